//! Faults on exogenous signals and their matrix equivalents.
//!
//! A fault that rescales input u_i is the same system as a scenario with
//! column i of B rescaled; a fault that rescales sensor y_i is a scenario
//! with row i of C rescaled. [`verify_equivalence`] checks this by running
//! both systems side by side: the faulted plant with its nominal matrices
//! and corrupted signals, and the mapped scenario with clean signals.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::control::GainSet;
use crate::error::{Error, Result};
use crate::grid::{ContingencyClass, ScenarioModel};
use crate::linalg::{Mat, Vector};
use crate::seed::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultTarget {
    Input(usize),
    Output(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultKind {
    Loss,
    Gain(f64),
    Affine { gain: f64, offset: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalFault {
    pub target: FaultTarget,
    pub kind: FaultKind,
    pub description: String,
}

impl SignalFault {
    pub fn new(target: FaultTarget, kind: FaultKind) -> Self {
        let (name, i) = match target {
            FaultTarget::Input(i) => ("u", i),
            FaultTarget::Output(i) => ("y", i),
        };
        let description = match kind {
            FaultKind::Loss => format!("{name}{} loss", i + 1),
            FaultKind::Gain(g) => format!("{name}{} gain {g}", i + 1),
            FaultKind::Affine { gain, offset } => format!("{name}{} affine {gain}x{offset:+}", i + 1),
        };
        Self { target, kind, description }
    }

    pub fn input_loss(i: usize) -> Self {
        Self::new(FaultTarget::Input(i), FaultKind::Loss)
    }

    pub fn input_gain(i: usize, g: f64) -> Self {
        Self::new(FaultTarget::Input(i), FaultKind::Gain(g))
    }

    pub fn output_loss(i: usize) -> Self {
        Self::new(FaultTarget::Output(i), FaultKind::Loss)
    }

    pub fn output_gain(i: usize, g: f64) -> Self {
        Self::new(FaultTarget::Output(i), FaultKind::Gain(g))
    }

    /// What the faulted channel delivers when `clean` was sent.
    pub fn apply(&self, clean: f64) -> f64 {
        match self.kind {
            FaultKind::Loss => 0.0,
            FaultKind::Gain(g) => g * clean,
            FaultKind::Affine { gain, offset } => gain * clean + offset,
        }
    }

    /// The constant ratio faulted/clean, if there is one.
    pub fn multiplier(&self) -> Result<f64> {
        let g = match self.kind {
            FaultKind::Loss => 0.0,
            FaultKind::Gain(g) => g,
            FaultKind::Affine { gain, offset: 0.0 } => gain,
            FaultKind::Affine { offset, .. } => {
                return Err(Error::UnrepresentableFault(format!(
                    "{}: offset {offset} makes the faulted/clean ratio depend on the signal (and undefined where it crosses zero); only static multiplicative faults map to a constant matrix",
                    self.description
                )))
            }
        };
        if g.is_finite() {
            Ok(g)
        } else {
            Err(Error::InvalidArgument(format!("{}: gain must be finite", self.description)))
        }
    }

    pub fn class(&self) -> ContingencyClass {
        match self.target {
            FaultTarget::Input(_) => ContingencyClass::Control,
            FaultTarget::Output(_) => ContingencyClass::Measurement,
        }
    }
}

impl fmt::Display for SignalFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.description)
    }
}

/// B2 with column i scaled by the fault's multiplier.
pub fn equivalent_input_fault(b1: &Mat, fault: &SignalFault) -> Result<Mat> {
    let FaultTarget::Input(i) = fault.target else {
        return Err(Error::InvalidArgument(format!("{fault} is not an input fault")));
    };
    if i >= b1.ncols() {
        return Err(Error::IndexOutOfRange { what: "input", index: i, len: b1.ncols() });
    }
    let g = fault.multiplier()?;
    let mut b2 = b1.clone();
    b2.column_mut(i).scale_mut(g);
    Ok(b2)
}

/// C2 with row i scaled by the fault's multiplier.
pub fn equivalent_output_fault(c1: &Mat, fault: &SignalFault) -> Result<Mat> {
    let FaultTarget::Output(i) = fault.target else {
        return Err(Error::InvalidArgument(format!("{fault} is not an output fault")));
    };
    if i >= c1.nrows() {
        return Err(Error::IndexOutOfRange { what: "output", index: i, len: c1.nrows() });
    }
    let g = fault.multiplier()?;
    let mut c2 = c1.clone();
    c2.row_mut(i).scale_mut(g);
    Ok(c2)
}

/// The switching scenario equivalent to `fault` on `nominal`.
pub fn fault_scenario(nominal: &ScenarioModel, fault: &SignalFault) -> Result<ScenarioModel> {
    let mut s = nominal.clone();
    match fault.target {
        FaultTarget::Input(_) => s.b = equivalent_input_fault(&nominal.b, fault)?,
        FaultTarget::Output(_) => s.c = equivalent_output_fault(&nominal.c, fault)?,
    }
    s.class = fault.class();
    s.description = fault.description.clone();
    Ok(s)
}

/// Where an output fault acts inside the faulted observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFaultPath {
    /// Channel i of the innovation `C x̂ − y` is scaled, so the observer
    /// sees the same corrupted channel for prediction and measurement.
    #[default]
    Innovation,
    /// Only the measured `y_i` is scaled; the prediction `C x̂` stays clean.
    MeasurementOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceConfig {
    pub output_path: OutputFaultPath,
    pub sample_period: f64,
    pub horizon: f64,
    /// RK4 steps per sample.
    pub substeps: usize,
    pub tolerance: f64,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        Self {
            output_path: OutputFaultPath::Innovation,
            sample_period: 0.02,
            horizon: 1.0,
            substeps: 20,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub fault: String,
    pub trials: usize,
    pub samples: usize,
    pub max_dev_x: f64,
    pub max_dev_xhat: f64,
    pub max_dev_y: f64,
    pub tolerance: f64,
}

impl EquivalenceReport {
    pub fn max_deviation(&self) -> f64 {
        self.max_dev_x.max(self.max_dev_xhat).max(self.max_dev_y)
    }

    pub fn passed(&self) -> bool {
        self.max_deviation() <= self.tolerance
    }

    fn merge(&mut self, other: &EquivalenceReport) {
        self.trials += other.trials;
        self.max_dev_x = self.max_dev_x.max(other.max_dev_x);
        self.max_dev_xhat = self.max_dev_xhat.max(other.max_dev_xhat);
        self.max_dev_y = self.max_dev_y.max(other.max_dev_y);
    }
}

/// Plant plus observer, `u = K x̂ + v`, with an optional signal fault.
struct Loop<'a> {
    a: &'a Mat,
    b: &'a Mat,
    c: &'a Mat,
    gains: &'a GainSet,
    fault: Option<&'a SignalFault>,
    output_path: OutputFaultPath,
}

impl Loop<'_> {
    fn n(&self) -> usize {
        self.a.nrows()
    }

    fn input(&self, xhat: &Vector, v: &Vector) -> Vector {
        let mut u = &self.gains.k * xhat + v;
        if let Some(f @ SignalFault { target: FaultTarget::Input(i), .. }) = self.fault {
            u[*i] = f.apply(u[*i]);
        }
        u
    }

    fn corrupt(&self, mut y: Vector) -> Vector {
        if let Some(f @ SignalFault { target: FaultTarget::Output(i), .. }) = self.fault {
            y[*i] = f.apply(y[*i]);
        }
        y
    }

    fn output(&self, x: &Vector) -> Vector {
        self.corrupt(self.c * x)
    }

    /// d/dt [x; x̂] with ẋ = Ax + Bu and x̂̇ = Ax̂ + Bu + G(Cx̂ − y).
    fn deriv(&self, z: &Vector, v: &Vector) -> Vector {
        let n = self.n();
        let x = z.rows(0, n).into_owned();
        let xhat = z.rows(n, n).into_owned();
        let bu = self.b * self.input(&xhat, v);
        let innovation = match self.output_path {
            OutputFaultPath::Innovation => self.corrupt(self.c * &xhat - self.c * &x),
            OutputFaultPath::MeasurementOnly => self.c * &xhat - self.output(&x),
        };
        let dx = self.a * &x + &bu;
        let dxhat = self.a * &xhat + &bu + &self.gains.g * innovation;
        let mut out = Vector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&dx);
        out.rows_mut(n, n).copy_from(&dxhat);
        out
    }

    fn rk4(&self, z: &Vector, v: &Vector, h: f64) -> Vector {
        let k1 = self.deriv(z, v);
        let k2 = self.deriv(&(z + &k1 * (h / 2.0)), v);
        let k3 = self.deriv(&(z + &k2 * (h / 2.0)), v);
        let k4 = self.deriv(&(z + &k3 * h), v);
        z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
    }
}

/// Runs the faulted nominal loop and `shs` from the same `(x0, x̂0)` under
/// the same piecewise-constant `v` (one row per sample) and reports the
/// largest sample-instant gaps in x, x̂ and y.
#[allow(clippy::too_many_arguments)]
pub fn verify_equivalence(
    nominal: &ScenarioModel,
    fault: &SignalFault,
    shs: &ScenarioModel,
    gains: &GainSet,
    x0: &Vector,
    xhat0: &Vector,
    v: &Mat,
    cfg: &EquivalenceConfig,
) -> Result<EquivalenceReport> {
    nominal.check_dimensions()?;
    shs.check_dimensions()?;
    let (n, q, r) = (nominal.n_states(), nominal.n_inputs(), nominal.n_outputs());
    if !shs.same_shape(nominal) || x0.len() != n || xhat0.len() != n || gains.k.shape() != (q, n) || gains.g.shape() != (n, r) {
        return Err(Error::DimensionMismatch("equivalence inputs disagree with the nominal model".into()));
    }
    if !(cfg.sample_period > 0.0 && cfg.horizon >= 0.0 && cfg.substeps > 0 && cfg.tolerance >= 0.0) {
        return Err(Error::InvalidArgument(format!("bad equivalence config {cfg:?}")));
    }
    let samples = (cfg.horizon / cfg.sample_period).round() as usize;
    if v.ncols() != q || v.nrows() < samples {
        return Err(Error::DimensionMismatch(format!(
            "input trace {:?} for {samples} samples of {q} inputs",
            v.shape()
        )));
    }
    let actual = Loop { a: &nominal.a, b: &nominal.b, c: &nominal.c, gains, fault: Some(fault), output_path: cfg.output_path };
    let mapped = Loop { a: &shs.a, b: &shs.b, c: &shs.c, gains, fault: None, output_path: cfg.output_path };
    let mut z1 = Vector::zeros(2 * n);
    z1.rows_mut(0, n).copy_from(x0);
    z1.rows_mut(n, n).copy_from(xhat0);
    let mut z2 = z1.clone();
    let h = cfg.sample_period / cfg.substeps as f64;
    let mut report = EquivalenceReport {
        fault: fault.description.clone(),
        trials: 1,
        samples,
        max_dev_x: 0.0,
        max_dev_xhat: 0.0,
        max_dev_y: 0.0,
        tolerance: cfg.tolerance,
    };
    for l in 0..=samples {
        let dx = (z1.rows(0, n) - z2.rows(0, n)).amax();
        let dxhat = (z1.rows(n, n) - z2.rows(n, n)).amax();
        let dy = (actual.output(&z1.rows(0, n).into_owned()) - mapped.output(&z2.rows(0, n).into_owned())).amax();
        report.max_dev_x = report.max_dev_x.max(dx);
        report.max_dev_xhat = report.max_dev_xhat.max(dxhat);
        report.max_dev_y = report.max_dev_y.max(dy);
        if l == samples {
            break;
        }
        let vl = v.row(l).transpose();
        for _ in 0..cfg.substeps {
            z1 = actual.rk4(&z1, &vl, h);
            z2 = mapped.rk4(&z2, &vl, h);
        }
        if !(z1.iter().chain(z2.iter()).all(|s| s.is_finite())) {
            return Err(Error::NonFinite(format!("equivalence run for {fault}")));
        }
    }
    Ok(report)
}

/// [`verify_equivalence`] against the mapped scenario over `trials` seeded
/// starts: x0 uniform on ±`magnitude`, x̂0 = 0, v uniform on ±`magnitude`.
pub fn equivalence_sweep(
    nominal: &ScenarioModel,
    gains: &GainSet,
    fault: &SignalFault,
    trials: usize,
    magnitude: f64,
    seed: u64,
    cfg: &EquivalenceConfig,
) -> Result<EquivalenceReport> {
    let shs = fault_scenario(nominal, fault)?;
    let (n, q) = (nominal.n_states(), nominal.n_inputs());
    let samples = (cfg.horizon / cfg.sample_period).round() as usize;
    let mut total: Option<EquivalenceReport> = None;
    for t in 0..trials {
        let mut rng = seed::child_rng(seed, Stream::Equivalence, t as u64);
        let x0 = Vector::from_fn(n, |_, _| rng.random_range(-magnitude..=magnitude));
        let v = Mat::from_fn(samples.max(1), q, |_, _| rng.random_range(-magnitude..=magnitude));
        let rep = verify_equivalence(nominal, fault, &shs, gains, &x0, &Vector::zeros(n), &v, cfg)?;
        match total.as_mut() {
            Some(acc) => acc.merge(&rep),
            None => total = Some(rep),
        }
    }
    total.ok_or_else(|| Error::InvalidArgument("equivalence sweep needs at least one trial".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::pipeline::{build_bank, BuildConfig, ModelBank};
    use proptest::prelude::*;

    fn bank() -> ModelBank {
        let cfg = BuildConfig { plan: crate::grid::EnumerationPlan::empty(1), ..BuildConfig::full(1) };
        build_bank(&GridSpec::desk(), &cfg).unwrap()
    }

    #[test]
    fn matrix_maps() {
        let b1 = Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(equivalent_input_fault(&b1, &SignalFault::input_loss(1)).unwrap().column(1).sum(), 0.0);
        assert_eq!(equivalent_input_fault(&b1, &SignalFault::input_gain(0, 1.0)).unwrap(), b1);
        let b2 = equivalent_input_fault(&b1, &SignalFault::input_gain(0, 1.2)).unwrap();
        assert_eq!(b2.column(0), b1.column(0) * 1.2);
        assert_eq!(b2.column(1), b1.column(1));
        let c2 = equivalent_output_fault(&b1, &SignalFault::output_gain(1, 1.1)).unwrap();
        assert_eq!(c2.row(1), b1.row(1) * 1.1);
        assert_eq!(c2.row(0), b1.row(0));
        assert!(equivalent_output_fault(&b1, &SignalFault::output_loss(0)).unwrap().row(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_what_a_constant_matrix_cannot_express() {
        let b1 = Mat::identity(2, 2);
        let affine = SignalFault::new(FaultTarget::Input(0), FaultKind::Affine { gain: 1.0, offset: 0.3 });
        assert!(matches!(equivalent_input_fault(&b1, &affine), Err(Error::UnrepresentableFault(_))));
        let pure = SignalFault::new(FaultTarget::Input(0), FaultKind::Affine { gain: 0.5, offset: 0.0 });
        assert_eq!(equivalent_input_fault(&b1, &pure).unwrap()[(0, 0)], 0.5);
        assert!(equivalent_input_fault(&b1, &SignalFault::input_gain(0, f64::INFINITY)).is_err());
        assert!(equivalent_input_fault(&b1, &SignalFault::output_gain(0, 2.0)).is_err());
        assert!(matches!(equivalent_output_fault(&b1, &SignalFault::output_gain(4, 2.0)), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn mapped_faults_land_in_their_class() {
        let b = bank();
        let nom = b.registry.nominal();
        assert_eq!(fault_scenario(nom, &SignalFault::input_gain(1, 1.2)).unwrap().class, ContingencyClass::Control);
        assert_eq!(fault_scenario(nom, &SignalFault::output_loss(2)).unwrap().class, ContingencyClass::Measurement);
    }

    #[test]
    fn standard_faults_are_equivalent() {
        let b = bank();
        let nom = b.registry.nominal();
        let cfg = EquivalenceConfig::default();
        for fault in [SignalFault::input_loss(0), SignalFault::input_gain(0, 1.2), SignalFault::output_gain(0, 1.1), SignalFault::input_gain(3, 1.0)] {
            let rep = equivalence_sweep(nom, &b.gains, &fault, 5, 0.05, 3, &cfg).unwrap();
            assert!(rep.passed(), "{rep:?}");
            assert_eq!(rep.trials, 5);
            assert_eq!(rep.samples, 50);
        }
    }

    #[test]
    fn unit_gain_is_bitwise_identical() {
        let b = bank();
        let nom = b.registry.nominal();
        let rep = equivalence_sweep(nom, &b.gains, &SignalFault::output_gain(2, 1.0), 2, 0.05, 9, &EquivalenceConfig::default()).unwrap();
        assert_eq!(rep.max_deviation(), 0.0);
    }

    #[test]
    fn wrong_scenario_is_reported_not_raised() {
        let b = bank();
        let nom = b.registry.nominal();
        let fault = SignalFault::input_gain(0, 1.5);
        let x0 = Vector::from_element(10, 0.05);
        let v = Mat::zeros(50, 5);
        let rep = verify_equivalence(nom, &fault, nom, &b.gains, &x0, &Vector::zeros(10), &v, &EquivalenceConfig::default()).unwrap();
        assert!(!rep.passed());
        let affine = SignalFault::new(FaultTarget::Output(0), FaultKind::Affine { gain: 1.0, offset: 0.01 });
        let rep = verify_equivalence(nom, &affine, nom, &b.gains, &x0, &Vector::zeros(10), &v, &EquivalenceConfig::default()).unwrap();
        assert!(rep.max_dev_y >= 0.01 - 1e-12);
    }

    #[test]
    fn clean_prediction_breaks_output_equivalence() {
        let b = bank();
        let nom = b.registry.nominal();
        let cfg = EquivalenceConfig { output_path: OutputFaultPath::MeasurementOnly, ..EquivalenceConfig::default() };
        let rep = equivalence_sweep(nom, &b.gains, &SignalFault::output_gain(0, 1.1), 3, 0.05, 3, &cfg).unwrap();
        assert!(rep.max_dev_xhat > 1e-4, "{rep:?}");
        // input faults do not touch the innovation
        let rep = equivalence_sweep(nom, &b.gains, &SignalFault::input_gain(0, 1.2), 3, 0.05, 3, &cfg).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn multiplicative_faults_coincide(channel in 0usize..5, g in 0.0..2.0f64, output in any::<bool>(), seed in any::<u64>()) {
            let b = bank();
            let nom = b.registry.nominal();
            let fault = if output { SignalFault::output_gain(channel, g) } else { SignalFault::input_gain(channel, g) };
            let cfg = EquivalenceConfig { substeps: 5, ..EquivalenceConfig::default() };
            let rep = equivalence_sweep(nom, &b.gains, &fault, 1, 0.05, seed, &cfg).unwrap();
            prop_assert!(rep.passed(), "{:?}", rep);
        }
    }
}
