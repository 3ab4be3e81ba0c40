use serde::{Deserialize, Serialize};

use crate::control::placement::{place_poles_feedback, place_poles_observer, PlacementOptions};
use crate::error::{Error, Result};
use crate::grid::{ContingencyClass, ScenarioModel};
use crate::linalg::{self, Mat, C64};

/// Feedback and observer gains, designed once on the nominal model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSet {
    /// q×n state-feedback gain, `u = K x̂ + v`.
    #[serde(with = "linalg::rows")]
    pub k: Mat,
    /// n×r observer gain.
    #[serde(with = "linalg::rows")]
    pub g: Mat,
    #[serde(with = "linalg::complex_list")]
    pub feedback_poles: Vec<C64>,
    #[serde(with = "linalg::complex_list")]
    pub observer_poles: Vec<C64>,
}

/// Open-loop eigenvalues moved left by `shift`, imaginary parts kept. Real
/// parts end up at or below `-shift`.
pub fn default_feedback_poles(a: &Mat, shift: f64) -> Result<Vec<C64>> {
    let eig = linalg::eigenvalues(a)?;
    let mut poles: Vec<C64> = eig
        .iter()
        .map(|z| C64::new(z.re.min(0.0) - shift, z.im))
        .collect();
    // split accidental coincidences so every pole is simple
    for i in 0..poles.len() {
        for j in 0..i {
            if (poles[i] - poles[j]).norm() < 1e-6 && poles[i].im == 0.0 {
                poles[i].re -= 0.05;
            }
        }
    }
    linalg::sort_canonical(&mut poles);
    Ok(poles)
}

/// `{-6, -7, …, -(5+n)}`; for n = 10 this is −6 … −15.
pub fn default_observer_poles(n: usize) -> Vec<C64> {
    (0..n).map(|i| C64::new(-6.0 - i as f64, 0.0)).collect()
}

/// Places both spectra on the nominal model and checks the result against an
/// eigensolver.
pub fn design_gains(
    nominal: &ScenarioModel,
    feedback_poles: &[C64],
    observer_poles: &[C64],
    opts: &PlacementOptions,
) -> Result<GainSet> {
    nominal.check_dimensions()?;
    let k = place_poles_feedback(&nominal.a, &nominal.b, feedback_poles, opts)?;
    let g = place_poles_observer(&nominal.a, &nominal.c, observer_poles, opts)?;
    let mut fb = feedback_poles.to_vec();
    let mut ob = observer_poles.to_vec();
    linalg::sort_canonical(&mut fb);
    linalg::sort_canonical(&mut ob);
    Ok(GainSet {
        k,
        g,
        feedback_poles: fb,
        observer_poles: ob,
    })
}

/// Closed-loop augmented model in `[x; x̃]` coordinates:
///
/// ```text
/// d/dt [x; x̃] = [[A+BK, −BK], [0, A+GC]] [x; x̃] + [[B, 0], [0, G]] [v; N]
/// y_c = [[C, 0], [I, −I]] [x; x̃] + [N; 0]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedLoopModel {
    pub scenario_id: usize,
    pub class: ContingencyClass,
    #[serde(with = "linalg::rows")]
    pub a_cl: Mat,
    #[serde(with = "linalg::rows")]
    pub b_cl: Mat,
    #[serde(with = "linalg::rows")]
    pub c_cl: Mat,
    /// Standard deviation of the measurement noise N.
    pub sigma: f64,
    pub n: usize,
    pub q: usize,
    pub r: usize,
}

impl ClosedLoopModel {
    pub fn n_outputs(&self) -> usize {
        self.r + self.n
    }

    pub fn n_augmented(&self) -> usize {
        2 * self.n
    }

    /// Upper-left block, `A + BK`.
    pub fn controlled_block(&self) -> Mat {
        self.a_cl.view((0, 0), (self.n, self.n)).into_owned()
    }

    /// Lower-right block, `A + GC`.
    pub fn estimator_block(&self) -> Mat {
        self.a_cl.view((self.n, self.n), (self.n, self.n)).into_owned()
    }
}

pub fn build_closed_loop(scenario: &ScenarioModel, gains: &GainSet, sigma: f64) -> Result<ClosedLoopModel> {
    scenario.check_dimensions()?;
    let (n, q, r) = (scenario.n_states(), scenario.n_inputs(), scenario.n_outputs());
    if gains.k.shape() != (q, n) || gains.g.shape() != (n, r) {
        return Err(Error::DimensionMismatch(format!(
            "gains K {:?}, G {:?} for scenario with n={n}, q={q}, r={r}",
            gains.k.shape(),
            gains.g.shape()
        )));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise sigma must be >= 0, got {sigma}")));
    }
    let bk = &scenario.b * &gains.k;
    let mut a_cl = Mat::zeros(2 * n, 2 * n);
    a_cl.view_mut((0, 0), (n, n)).copy_from(&(&scenario.a + &bk));
    a_cl.view_mut((0, n), (n, n)).copy_from(&(-&bk));
    a_cl.view_mut((n, n), (n, n)).copy_from(&(&scenario.a + &gains.g * &scenario.c));

    let b_cl = linalg::block_diag(&scenario.b, &gains.g);

    let mut c_cl = Mat::zeros(r + n, 2 * n);
    c_cl.view_mut((0, 0), (r, n)).copy_from(&scenario.c);
    c_cl.view_mut((r, 0), (n, n)).fill_with_identity();
    c_cl.view_mut((r, n), (n, n)).copy_from(&(-Mat::identity(n, n)));

    Ok(ClosedLoopModel {
        scenario_id: scenario.id,
        class: scenario.class,
        a_cl,
        b_cl,
        c_cl,
        sigma,
        n,
        q,
        r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{apply_control_fault, build_nominal_model, GridSpec};

    fn desk_design() -> (ScenarioModel, GainSet) {
        let nom = build_nominal_model(&GridSpec::desk()).unwrap();
        let fb = default_feedback_poles(&nom.a, 1.0).unwrap();
        let gains = design_gains(&nom, &fb, &default_observer_poles(10), &PlacementOptions::default()).unwrap();
        (nom, gains)
    }

    #[test]
    fn zero_gains_give_block_diagonal() {
        let nom = build_nominal_model(&GridSpec::desk()).unwrap();
        let gains = GainSet {
            k: Mat::zeros(5, 10),
            g: Mat::zeros(10, 5),
            feedback_poles: vec![],
            observer_poles: vec![],
        };
        let cl = build_closed_loop(&nom, &gains, 0.0).unwrap();
        assert_eq!(cl.a_cl, linalg::block_diag(&nom.a, &nom.a));
    }

    #[test]
    fn block_structure() {
        let (nom, gains) = desk_design();
        let s = apply_control_fault(&nom, 2, 1.2).unwrap();
        let cl = build_closed_loop(&s, &gains, 1e-3).unwrap();
        let n = cl.n;
        assert!(cl.a_cl.view((n, 0), (n, n)).iter().all(|&v| v == 0.0));
        assert_eq!(cl.controlled_block(), &s.a + &s.b * &gains.k);
        assert_eq!(cl.estimator_block(), &s.a + &gains.g * &s.c);
        assert_eq!(cl.c_cl.view((cl.r, 0), (n, n)).into_owned(), Mat::identity(n, n));
        assert_eq!(cl.c_cl.view((cl.r, n), (n, n)).into_owned(), -Mat::identity(n, n));
        assert_eq!(cl.b_cl.shape(), (2 * n, cl.q + cl.r));
        assert_eq!(cl.c_cl.shape(), (cl.r + n, 2 * n));
    }

    #[test]
    fn dimension_mismatch() {
        let (nom, mut gains) = desk_design();
        gains.k = Mat::zeros(4, 10);
        assert!(matches!(build_closed_loop(&nom, &gains, 0.0), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn spectrum_is_union_of_blocks() {
        let (nom, gains) = desk_design();
        let cl = build_closed_loop(&nom, &gains, 0.0).unwrap();
        let full = linalg::eigenvalues(&cl.a_cl).unwrap();
        let mut parts = linalg::eigenvalues(&cl.controlled_block()).unwrap();
        parts.extend(linalg::eigenvalues(&cl.estimator_block()).unwrap());
        linalg::sort_canonical(&mut parts);
        for (x, y) in full.iter().zip(&parts) {
            assert!((x - y).norm() < 1e-6, "{x} vs {y}");
        }
    }

    #[test]
    fn default_feedback_poles_are_shifted() {
        let nom = build_nominal_model(&GridSpec::desk()).unwrap();
        let poles = default_feedback_poles(&nom.a, 0.2).unwrap();
        assert_eq!(poles.len(), 10);
        assert!(poles.iter().all(|p| p.re <= -0.2));
        assert_eq!(poles.iter().filter(|p| p.im != 0.0).count(), 8);
    }
}
