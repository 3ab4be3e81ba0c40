use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ContingencyClass;
use crate::learning::{Classifier, Dataset};

/// KKT gap at which SMO stops.
pub const KKT_TOLERANCE: f64 = 1e-3;
/// SMO iterations allowed per binary machine.
pub const MAX_ITERATIONS: usize = 1_000_000;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl SvmParams {
    pub fn new(c: f64, gamma: f64) -> Self {
        Self { c, gamma, tolerance: KKT_TOLERANCE, max_iterations: MAX_ITERATIONS }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.c.is_finite() && self.c > 0.0 && self.gamma.is_finite() && self.gamma > 0.0 && self.tolerance > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("SVM needs C > 0 and gamma > 0, got C={} gamma={}", self.c, self.gamma)))
        }
    }
}

/// Per-feature affine map to zero mean and unit variance. Constant
/// features get scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mean: Vec<f64> = (0..dim).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let scale = (0..dim)
            .map(|j| {
                let var = rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect()
    }
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// Dense RBF Gram matrix, row-major.
pub fn gram(rows: &[Vec<f64>], gamma: f64) -> Vec<f64> {
    let n = rows.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = 1.0;
        for j in 0..i {
            let v = rbf(&rows[i], &rows[j], gamma);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Dual solution of one binary machine.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySolution {
    pub alpha: Vec<f64>,
    /// Decision function is Σ α_j y_j K(x_j, x) − rho.
    pub rho: f64,
    pub iterations: usize,
    pub gap: f64,
}

/// SMO on `min ½ αᵀQα − Σα` subject to `0 ≤ α ≤ C`, `yᵀα = 0`, with
/// `Q_ij = y_i y_j K_ij`. The working pair is the maximal KKT violator.
pub fn smo(kernel: &[f64], y: &[f64], c: f64, tolerance: f64, max_iterations: usize) -> Result<BinarySolution> {
    let n = y.len();
    assert_eq!(kernel.len(), n * n, "kernel must be n×n");
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[i * n + j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let up = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] < c) || (y[t] < 0.0 && a[t] > 0.0);
    let low = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] > 0.0) || (y[t] < 0.0 && a[t] < c);
    let mut iterations = 0;
    loop {
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if up(t, &alpha) && v > gmax {
                gmax = v;
                i = t;
            }
            if low(t, &alpha) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        let gap = gmax - gmin;
        if i == usize::MAX || j == usize::MAX || gap < tolerance {
            let rho = bias(&alpha, &grad, y, c);
            return Ok(BinarySolution { alpha, rho, iterations, gap: gap.max(0.0) });
        }
        if iterations >= max_iterations {
            return Err(Error::NotConverged { iterations, gap });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (q(i, i) + q(j, j) + 2.0 * q(i, j)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(i, t) * di + q(j, t) * dj;
        }
    }
}

fn bias(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut free_sum = 0.0;
    let mut free = 0usize;
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else if ub.is_finite() && lb.is_finite() {
        (ub + lb) / 2.0
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        0.0
    }
}

/// One-vs-rest machine for `class`; `y_j = +1` iff the stored support
/// label equals `class`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Machine {
    pub class: ContingencyClass,
    /// Dual coefficients over the model's support rows.
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
}

/// Platt sigmoid `p = 1 / (1 + exp(a f + b))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sigmoid {
    pub a: f64,
    pub b: f64,
}

impl Sigmoid {
    pub fn prob(&self, f: f64) -> f64 {
        let z = self.a * f + self.b;
        if z >= 0.0 {
            (-z).exp() / (1.0 + (-z).exp())
        } else {
            1.0 / (1.0 + z.exp())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// One sigmoid per machine, same order.
    pub sigmoids: Vec<Sigmoid>,
    /// Per-class thresholds θ_c; prediction is argmax p_c / θ_c.
    pub thresholds: Vec<f64>,
    /// Macro-averaged accuracy on the validation rows, before and after.
    pub validation_before: f64,
    pub validation_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub params: SvmParams,
    pub standardizer: Standardizer,
    /// Standardized rows with a nonzero coefficient in some machine.
    pub support_vectors: Vec<Vec<f64>>,
    pub support_labels: Vec<ContingencyClass>,
    pub machines: Vec<Machine>,
    pub calibration: Option<Calibration>,
}

impl SvmModel {
    fn y(&self, m: &Machine, j: usize) -> f64 {
        if self.support_labels[j] == m.class {
            1.0
        } else {
            -1.0
        }
    }

    pub fn classes(&self) -> Vec<ContingencyClass> {
        self.machines.iter().map(|m| m.class).collect()
    }

    pub fn n_support(&self) -> usize {
        self.support_vectors.len()
    }

    /// Raw one-vs-rest decision values, one per machine.
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.standardizer.mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "query has {} features, model {}",
                x.len(),
                self.standardizer.mean.len()
            )));
        }
        let z = self.standardizer.apply(x);
        let k: Vec<f64> = self.support_vectors.iter().map(|s| rbf(s, &z, self.params.gamma)).collect();
        Ok(self
            .machines
            .iter()
            .map(|m| m.alpha.iter().enumerate().map(|(j, a)| a * self.y(m, j) * k[j]).sum::<f64>() - m.rho)
            .collect())
    }

    /// argmax of the raw decision values.
    pub fn predict_uncalibrated(&self, x: &[f64]) -> Result<ContingencyClass> {
        let f = self.decision_values(x)?;
        Ok(self.machines[argmax(&f)].class)
    }

    /// `Σ α_j y_j` for every machine.
    pub fn dual_residuals(&self) -> Vec<f64> {
        self.machines.iter().map(|m| m.alpha.iter().enumerate().map(|(j, a)| a * self.y(m, j)).sum()).collect()
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

fn calibrated_choice(cal: &Calibration, f: &[f64]) -> usize {
    let scores: Vec<f64> = f.iter().zip(&cal.sigmoids).zip(&cal.thresholds).map(|((v, s), t)| s.prob(*v) / t).collect();
    argmax(&scores)
}

impl Classifier for SvmModel {
    fn predict(&self, x: &[f64]) -> Result<ContingencyClass> {
        let f = self.decision_values(x)?;
        let i = match &self.calibration {
            Some(cal) => calibrated_choice(cal, &f),
            None => argmax(&f),
        };
        Ok(self.machines[i].class)
    }

    fn dim(&self) -> usize {
        self.standardizer.mean.len()
    }
}

/// Trains one machine per class present. `kernel` may be supplied when the
/// standardized Gram matrix for this γ is already at hand.
pub fn svm_train_with_kernel(data: &Dataset, params: &SvmParams, kernel: Option<&[f64]>) -> Result<SvmModel> {
    params.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("SVM training set".into()));
    }
    let classes: Vec<ContingencyClass> = data.class_counts().into_keys().collect();
    if classes.len() < 2 {
        return Err(Error::InvalidArgument("SVM training needs at least two classes".into()));
    }
    let rows = data.features();
    let standardizer = Standardizer::fit(&rows);
    let z: Vec<Vec<f64>> = rows.iter().map(|r| standardizer.apply(r)).collect();
    let owned;
    let kernel = match kernel {
        Some(k) => {
            if k.len() != z.len() * z.len() {
                return Err(Error::DimensionMismatch("supplied Gram matrix does not match the data".into()));
            }
            k
        }
        None => {
            owned = gram(&z, params.gamma);
            &owned
        }
    };
    let labels = data.labels();
    let solutions: Vec<(ContingencyClass, BinarySolution)> = classes
        .iter()
        .map(|&class| {
            let y: Vec<f64> = labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
            smo(kernel, &y, params.c, params.tolerance, params.max_iterations).map(|s| (class, s))
        })
        .collect::<Result<_>>()?;
    let support: Vec<usize> = (0..z.len()).filter(|&j| solutions.iter().any(|(_, s)| s.alpha[j] > 0.0)).collect();
    Ok(SvmModel {
        params: params.clone(),
        standardizer,
        support_vectors: support.iter().map(|&j| z[j].clone()).collect(),
        support_labels: support.iter().map(|&j| labels[j]).collect(),
        machines: solutions
            .into_iter()
            .map(|(class, s)| Machine {
                class,
                alpha: support.iter().map(|&j| s.alpha[j]).collect(),
                rho: s.rho,
                iterations: s.iterations,
            })
            .collect(),
        calibration: None,
    })
}

pub fn svm_train(data: &Dataset, c: f64, gamma: f64) -> Result<SvmModel> {
    svm_train_with_kernel(data, &SvmParams::new(c, gamma), None)
}

/// Maximum-likelihood sigmoid fit of decision values to binary targets,
/// with Platt's smoothed targets and a safeguarded Newton iteration.
pub fn fit_sigmoid(f: &[f64], positive: &[bool]) -> Result<Sigmoid> {
    let n_pos = positive.iter().filter(|&&p| p).count() as f64;
    let n_neg = positive.len() as f64 - n_pos;
    if n_pos == 0.0 || n_neg == 0.0 {
        return Err(Error::InvalidArgument("sigmoid fit needs positive and negative examples".into()));
    }
    let hi = (n_pos + 1.0) / (n_pos + 2.0);
    let lo = 1.0 / (n_neg + 2.0);
    let t: Vec<f64> = positive.iter().map(|&p| if p { hi } else { lo }).collect();
    let objective = |a: f64, b: f64| -> f64 {
        f.iter()
            .zip(&t)
            .map(|(fi, ti)| {
                let z = a * fi + b;
                // t·z + log(1 + e^{−z}) in a stable form
                if z >= 0.0 {
                    ti * z + (-z).exp().ln_1p()
                } else {
                    (ti - 1.0) * z + z.exp().ln_1p()
                }
            })
            .sum()
    };
    let (mut a, mut b) = (0.0, ((n_neg + 1.0) / (n_pos + 1.0)).ln());
    let mut fval = objective(a, b);
    for _ in 0..100 {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (1e-12, 1e-12, 0.0, 0.0, 0.0);
        for (fi, ti) in f.iter().zip(&t) {
            let z = a * fi + b;
            let (p, q) = if z >= 0.0 {
                let e = (-z).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = z.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += fi * fi * d2;
            h22 += d2;
            h21 += fi * d2;
            let d1 = ti - p;
            g1 += fi * d1;
            g2 += d1;
        }
        if g1.abs() < 1e-10 && g2.abs() < 1e-10 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        let mut moved = false;
        while step >= 1e-10 {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                moved = true;
                break;
            }
            step /= 2.0;
        }
        if !moved {
            break;
        }
    }
    if a.is_finite() && b.is_finite() {
        Ok(Sigmoid { a, b })
    } else {
        Err(Error::NonFinite("sigmoid fit".into()))
    }
}

/// Mean per-class recall over the classes present in `truth`.
pub fn macro_accuracy(truth: &[ContingencyClass], predicted: &[ContingencyClass]) -> f64 {
    let mut hit = [0usize; 4];
    let mut total = [0usize; 4];
    for (t, p) in truth.iter().zip(predicted) {
        total[t.index()] += 1;
        if t == p {
            hit[t.index()] += 1;
        }
    }
    let present: Vec<usize> = (0..4).filter(|&c| total[c] > 0).collect();
    if present.is_empty() {
        return 0.0;
    }
    present.iter().map(|&c| hit[c] as f64 / total[c] as f64).sum::<f64>() / present.len() as f64
}

const THRESHOLD_GRID: [f64; 19] = [
    0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95,
];

/// Fits per-class sigmoids on `validation` and tunes θ_c by coordinate
/// ascent on macro-averaged accuracy, starting from θ = 0.5. If the result
/// scores below the raw argmax on the same rows, the model is returned
/// without calibration.
pub fn svm_calibrate(mut model: SvmModel, validation: &Dataset) -> Result<SvmModel> {
    if validation.class_counts().len() < 2 {
        return Err(Error::InvalidArgument("calibration rows cover a single class".into()));
    }
    let truth = validation.labels();
    let f: Vec<Vec<f64>> = validation.rows.iter().map(|r| model.decision_values(&r.features)).collect::<Result<_>>()?;
    let raw: Vec<ContingencyClass> = f.iter().map(|v| model.machines[argmax(v)].class).collect();
    let before = macro_accuracy(&truth, &raw);

    let sigmoids: Vec<Sigmoid> = model
        .machines
        .iter()
        .enumerate()
        .map(|(m, machine)| {
            let values: Vec<f64> = f.iter().map(|v| v[m]).collect();
            let positive: Vec<bool> = truth.iter().map(|&t| t == machine.class).collect();
            fit_sigmoid(&values, &positive)
        })
        .collect::<Result<_>>()?;
    let mut cal = Calibration {
        sigmoids,
        thresholds: vec![0.5; model.machines.len()],
        validation_before: before,
        validation_after: 0.0,
    };
    let score = |cal: &Calibration| {
        let pred: Vec<ContingencyClass> = f.iter().map(|v| model.machines[calibrated_choice(cal, v)].class).collect();
        macro_accuracy(&truth, &pred)
    };
    let mut best = score(&cal);
    for _ in 0..3 {
        let mut improved = false;
        for c in 0..cal.thresholds.len() {
            for &theta in &THRESHOLD_GRID {
                let keep = cal.thresholds[c];
                cal.thresholds[c] = theta;
                let s = score(&cal);
                if s > best {
                    best = s;
                    improved = true;
                } else {
                    cal.thresholds[c] = keep;
                }
            }
        }
        if !improved {
            break;
        }
    }
    cal.validation_after = best;
    model.calibration = (best >= before).then_some(cal);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::{Provenance, Sample};
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn dataset(rows: Vec<(Vec<f64>, ContingencyClass)>) -> Dataset {
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, (features, label))| Sample { window_id: i, scenario_id: i, label, features, raw: None })
            .collect();
        Dataset::new(rows, Provenance::default()).unwrap()
    }

    fn dual_objective(kernel: &[f64], y: &[f64], alpha: &[f64]) -> f64 {
        let n = y.len();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel[i * n + j];
            }
        }
        0.5 * quad - alpha.iter().sum::<f64>()
    }

    /// Projected gradient on the same dual: gradient step, then Euclidean
    /// projection onto {0 ≤ α ≤ C, yᵀα = 0} by bisection on the multiplier.
    fn projected_gradient(kernel: &[f64], y: &[f64], c: f64) -> Vec<f64> {
        let n = y.len();
        let project = |v: &[f64]| -> Vec<f64> {
            let at = |mu: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - mu * yi).clamp(0.0, c)).collect() };
            let (mut lo, mut hi) = (-1e6, 1e6);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let s: f64 = at(mid).iter().zip(y).map(|(a, yi)| a * yi).sum();
                if s > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            at(0.5 * (lo + hi))
        };
        let mut alpha = vec![0.0; n];
        for _ in 0..20_000 {
            let grad: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| y[i] * y[j] * kernel[i * n + j] * alpha[j]).sum::<f64>() - 1.0)
                .collect();
            let step: Vec<f64> = alpha.iter().zip(&grad).map(|(a, g)| a - 0.1 * g).collect();
            alpha = project(&step);
        }
        alpha
    }

    #[test]
    fn two_points() {
        let d = dataset(vec![(vec![0.0, 0.0], ContingencyClass::Normal), (vec![1.0, 1.0], ContingencyClass::Physical)]);
        let m = svm_train(&d, 10.0, 0.5).unwrap();
        assert_eq!(m.n_support(), 2);
        for r in &d.rows {
            assert_eq!(m.predict(&r.features).unwrap(), r.label);
        }
    }

    #[test]
    fn xor_matches_projected_gradient() {
        let pts = [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
        let y = [1.0, 1.0, -1.0, -1.0];
        let rows: Vec<Vec<f64>> = pts.iter().map(|p| p.to_vec()).collect();
        let k = gram(&rows, 1.0);
        let sol = smo(&k, &y, 10.0, 1e-6, MAX_ITERATIONS).unwrap();
        let oracle = projected_gradient(&k, &y, 10.0);
        assert!((dual_objective(&k, &y, &sol.alpha) - dual_objective(&k, &y, &oracle)).abs() < 1e-4);
        for (i, x) in rows.iter().enumerate() {
            let f: f64 = (0..4).map(|j| sol.alpha[j] * y[j] * rbf(&rows[j], x, 1.0)).sum::<f64>() - sol.rho;
            assert_eq!(f.signum(), y[i]);
        }
        let labels = [ContingencyClass::Normal, ContingencyClass::Normal, ContingencyClass::Control, ContingencyClass::Control];
        let d = dataset(rows.iter().cloned().zip(labels).collect());
        let m = svm_train(&d, 10.0, 1.0).unwrap();
        assert!(d.rows.iter().all(|r| m.predict(&r.features).unwrap() == r.label));
    }

    #[test]
    fn rejects_bad_input() {
        let one = dataset(vec![(vec![0.0], ContingencyClass::Normal), (vec![1.0], ContingencyClass::Normal)]);
        assert!(svm_train(&one, 1.0, 1.0).is_err());
        let two = dataset(vec![(vec![0.0], ContingencyClass::Normal), (vec![1.0], ContingencyClass::Control)]);
        assert!(svm_train(&two, 0.0, 1.0).is_err());
        assert!(svm_train(&two, 1.0, -1.0).is_err());
        let m = svm_train(&two, 1.0, 1.0).unwrap();
        assert!(m.predict(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn iteration_cap_is_reported() {
        let mut rng = crate::seed::rng(2);
        let rows: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
        let y: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let err = smo(&gram(&rows, 1.0), &y, 1000.0, 1e-3, 3).unwrap_err();
        assert!(matches!(err, Error::NotConverged { iterations: 3, .. }));
    }

    #[test]
    fn sigmoid_recovery() {
        // standard error of both estimates is about 1% at this size
        let truth = Sigmoid { a: -2.0, b: 1.0 };
        let mut rng = crate::seed::rng(17);
        let f: Vec<f64> = (0..50_000).map(|_| rng.random_range(-3.0..3.0)).collect();
        let positive: Vec<bool> = f.iter().map(|&v| rng.random::<f64>() < truth.prob(v)).collect();
        let fit = fit_sigmoid(&f, &positive).unwrap();
        assert!((fit.a - truth.a).abs() <= 0.05 * truth.a.abs(), "{fit:?}");
        assert!((fit.b - truth.b).abs() <= 0.05 * truth.b.abs(), "{fit:?}");
        assert!(fit_sigmoid(&f, &vec![true; f.len()]).is_err());
    }

    fn blobs(seed: u64, per: usize, spread: f64) -> Dataset {
        let mut rng = crate::seed::rng(seed);
        let noise = Normal::new(0.0, spread).unwrap();
        let centers = [[0.0, 0.0], [3.0, 0.0], [0.0, 3.0], [3.0, 3.0]];
        let rows = (0..4 * per)
            .map(|i| {
                let c = i % 4;
                (centers[c].iter().map(|m| m + noise.sample(&mut rng)).collect(), ContingencyClass::ALL[c])
            })
            .collect();
        dataset(rows)
    }

    #[test]
    fn calibration_on_separated_data_keeps_half_thresholds() {
        let train = blobs(1, 20, 0.2);
        let val = blobs(2, 20, 0.2);
        let m = svm_train(&train, 10.0, 0.5).unwrap();
        let cal = svm_calibrate(m.clone(), &val).unwrap();
        let c = cal.calibration.as_ref().expect("calibration kept");
        assert!(c.thresholds.iter().all(|&t| t == 0.5));
        assert_eq!(c.validation_before, 1.0);
        assert_eq!(c.validation_after, 1.0);
        assert!(val.rows.iter().all(|r| cal.predict(&r.features).unwrap() == r.label));
    }

    #[test]
    fn calibration_never_lowers_validation_score() {
        for seed in 0..4 {
            let train = blobs(10 + seed, 25, 1.2);
            let val = blobs(20 + seed, 25, 1.2);
            let m = svm_calibrate(svm_train(&train, 1.0, 1.0).unwrap(), &val).unwrap();
            let truth = val.labels();
            let pred: Vec<_> = val.rows.iter().map(|r| m.predict(&r.features).unwrap()).collect();
            let raw: Vec<_> = val.rows.iter().map(|r| m.predict_uncalibrated(&r.features).unwrap()).collect();
            assert!(macro_accuracy(&truth, &pred) >= macro_accuracy(&truth, &raw));
        }
        let single = blobs(3, 5, 0.1).subset(&[0, 4, 8]);
        assert!(svm_calibrate(svm_train(&blobs(1, 5, 0.1), 1.0, 1.0).unwrap(), &single).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn dual_feasibility(seed in any::<u64>(), c in prop::sample::select(vec![0.1, 1.0, 100.0]), gamma in prop::sample::select(vec![0.1, 1.0, 5.0])) {
            let d = blobs(seed, 12, 1.0);
            let m = svm_train(&d, c, gamma).unwrap();
            for r in m.dual_residuals() {
                prop_assert!(r.abs() <= 1e-8, "Σαy = {r}");
            }
            for mach in &m.machines {
                prop_assert!(mach.alpha.iter().all(|&a| (0.0..=c).contains(&a)));
            }
        }
    }
}
