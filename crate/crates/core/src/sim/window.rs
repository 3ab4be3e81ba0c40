use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::control::ClosedLoopModel;
use crate::error::{Error, Result};
use crate::grid::ContingencyClass;
use crate::linalg::{Mat, Vector};
use crate::seed;
use crate::sim::{discretize, ExcitationShape, SimConfig};

/// Any state entry above this magnitude aborts a simulation.
pub const DIVERGENCE_LIMIT: f64 = 1e9;

/// Sampled closed-loop output over one observation window.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputTrace {
    /// Window index k within a schedule (0 for a standalone window).
    pub window: usize,
    pub scenario_id: usize,
    /// r, the number of measured outputs leading each row.
    pub n_measured: usize,
    /// N0 × (r + n): rows are samples, columns `[y; x̂]`.
    pub samples: Mat,
    /// Augmented state after the last simulated step.
    pub terminal: Vector,
}

impl OutputTrace {
    pub fn n_samples(&self) -> usize {
        self.samples.nrows()
    }

    pub fn n_outputs(&self) -> usize {
        self.samples.ncols()
    }

    pub fn column_names(&self) -> Vec<String> {
        let r = self.n_measured;
        (0..self.n_outputs())
            .map(|i| if i < r { format!("y_{}", i + 1) } else { format!("xhat_{}", i - r + 1) })
            .collect()
    }

    /// Comma-separated export, one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = self.column_names().join(",");
        out.push('\n');
        for row in self.samples.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// A closed-loop model discretized once for repeated window simulation.
#[derive(Debug, Clone)]
pub struct DiscreteLoop {
    pub scenario_id: usize,
    pub ad: Mat,
    /// Columns of Bd driven by the reference input v.
    pub bd_v: Mat,
    pub c_cl: Mat,
    pub sigma: f64,
    pub r: usize,
}

impl DiscreteLoop {
    pub fn new(model: &ClosedLoopModel, cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let (ad, bd) = discretize(&model.a_cl, &model.b_cl, cfg.sample_period)?;
        Ok(Self {
            scenario_id: model.scenario_id,
            ad,
            bd_v: bd.columns(0, model.q).into_owned(),
            c_cl: model.c_cl.clone(),
            sigma: model.sigma,
            r: model.r,
        })
    }

    pub fn n_augmented(&self) -> usize {
        self.ad.nrows()
    }

    /// Emits `samples` rows starting at `x0`, then advances `extra` more
    /// unobserved steps with v held at zero.
    pub fn run(&self, x0: &Vector, v: Option<&Mat>, samples: usize, extra: usize, noise_seed: u64) -> Result<OutputTrace> {
        let dim = self.n_augmented();
        if x0.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "initial state has {} entries, model has {dim}",
                x0.len()
            )));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("initial state".into()));
        }
        if let Some(v) = v {
            if v.shape() != (samples, self.bd_v.ncols()) {
                return Err(Error::DimensionMismatch(format!(
                    "input trace {:?}, expected ({samples}, {})",
                    v.shape(),
                    self.bd_v.ncols()
                )));
            }
        }
        let noise = if self.sigma > 0.0 {
            Some(Normal::new(0.0, self.sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?)
        } else {
            None
        };
        let mut rng = seed::rng(noise_seed);

        let outputs = self.c_cl.nrows();
        let mut trace = Mat::zeros(samples, outputs);
        let mut x = x0.clone();
        let mut y = Vector::zeros(outputs);
        for l in 0..samples + extra {
            if l < samples {
                self.c_cl.mul_to(&x, &mut y);
                if let Some(dist) = &noise {
                    for i in 0..self.r {
                        y[i] += dist.sample(&mut rng);
                    }
                }
                trace.row_mut(l).copy_from(&y.transpose());
            }
            let mut next = &self.ad * &x;
            if let Some(v) = v.filter(|_| l < samples) {
                next += &self.bd_v * v.row(l).transpose();
            }
            let magnitude = next.amax();
            if magnitude.is_nan() || magnitude > DIVERGENCE_LIMIT {
                return Err(Error::Diverged { sample: l + 1, magnitude });
            }
            x = next;
        }
        Ok(OutputTrace {
            window: 0,
            scenario_id: self.scenario_id,
            n_measured: self.r,
            samples: trace,
            terminal: x,
        })
    }
}

/// Simulates one window of N0 samples. `v` is N0 × q or `None` for v ≡ 0.
pub fn simulate_window(
    model: &ClosedLoopModel,
    x0: &Vector,
    v: Option<&Mat>,
    cfg: &SimConfig,
    seed: u64,
) -> Result<OutputTrace> {
    DiscreteLoop::new(model, cfg)?.run(x0, v, cfg.samples_per_window(), 0, seed)
}

/// Noise-free window of the Normal-class model from the same start and input
/// as a monitored window.
pub fn nominal_reference(
    nominal: &ClosedLoopModel,
    x0: &Vector,
    v: Option<&Mat>,
    cfg: &SimConfig,
) -> Result<OutputTrace> {
    if nominal.class != ContingencyClass::Normal {
        return Err(Error::InvalidArgument(format!(
            "nominal reference needs the normal model, got scenario {} ({})",
            nominal.scenario_id, nominal.class
        )));
    }
    let mut quiet = DiscreteLoop::new(nominal, cfg)?;
    quiet.sigma = 0.0;
    quiet.run(x0, v, cfg.samples_per_window(), 0, 0)
}

/// Initial perturbation `[Δ; Δ]`: the plant starts at Δ while the observer
/// starts at zero, so the estimation error equals Δ as well. States are
/// laid out `[δ1, ω1, δ2, ω2, …]`.
pub fn excitation(n: usize, magnitude: f64, shape: ExcitationShape, rng: &mut impl Rng) -> Vector {
    let mut x0 = Vector::zeros(2 * n);
    if magnitude == 0.0 {
        return x0;
    }
    match shape {
        ExcitationShape::CommonAngle => {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let a = sign * magnitude * rng.random_range(0.5..=1.0);
            for i in (0..n).step_by(2) {
                x0[i] = a;
                x0[n + i] = a;
            }
        }
        ExcitationShape::Uniform => {
            for i in 0..n {
                let d = rng.random_range(-magnitude..=magnitude);
                x0[i] = d;
                x0[n + i] = d;
            }
        }
    }
    x0
}
