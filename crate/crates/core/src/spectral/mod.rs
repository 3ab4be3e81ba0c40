//! Spectral fingerprints of scenarios.
//!
//! Λ1 = eig(A + BK) moves when the plant or the actuators change and Λ2 =
//! eig(A + GC) moves when the plant or the sensors change. Comparing both
//! sets against the nominal scenario gives a class without any simulation.

mod matching;
mod rank;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::GainSet;
use crate::error::{Error, Result};
use crate::grid::{ContingencyClass, ScenarioModel, ScenarioRegistry};
use crate::linalg::{self, C64};

pub use matching::{eigenset_distance, min_cost_assignment};
pub use rank::{controllability_rank, observability_rank, rank_audit, RankAudit, SensorRank};

/// Relative tolerance used by [`classify_by_spectra`] unless overridden.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

pub const SPECTRA_FORMAT: &str = "contingency-lab spectra v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSignature {
    /// eig(A + BK), canonical order.
    #[serde(with = "linalg::complex_list")]
    pub lambda1: Vec<C64>,
    /// eig(A + GC), canonical order.
    #[serde(with = "linalg::complex_list")]
    pub lambda2: Vec<C64>,
}

pub fn spectral_signature(scenario: &ScenarioModel, gains: &GainSet) -> Result<SpectralSignature> {
    scenario.check_dimensions()?;
    let (n, q, r) = (scenario.n_states(), scenario.n_inputs(), scenario.n_outputs());
    if gains.k.shape() != (q, n) || gains.g.shape() != (n, r) {
        return Err(Error::DimensionMismatch(format!(
            "gains K {:?}, G {:?} for scenario with n={n}, q={q}, r={r}",
            gains.k.shape(),
            gains.g.shape()
        )));
    }
    Ok(SpectralSignature {
        lambda1: linalg::eigenvalues(&(&scenario.a + &scenario.b * &gains.k))?,
        lambda2: linalg::eigenvalues(&(&scenario.a + &gains.g * &scenario.c))?,
    })
}

/// Distances (d1, d2) of both sets from the nominal signature.
pub fn signature_distances(sig: &SpectralSignature, nominal: &SpectralSignature) -> Result<(f64, f64)> {
    Ok((
        eigenset_distance(&sig.lambda1, &nominal.lambda1)?,
        eigenset_distance(&sig.lambda2, &nominal.lambda2)?,
    ))
}

/// Which set moved beyond `tol` times the nominal spectral radius of that
/// set. A distance exactly at the threshold counts as unchanged.
pub fn classify_by_spectra(sig: &SpectralSignature, nominal: &SpectralSignature, tol: f64) -> Result<ContingencyClass> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!("spectral tolerance must be > 0, got {tol}")));
    }
    let (d1, d2) = signature_distances(sig, nominal)?;
    Ok(class_from_distances(
        d1 > tol * linalg::spectral_radius(&nominal.lambda1),
        d2 > tol * linalg::spectral_radius(&nominal.lambda2),
    ))
}

fn class_from_distances(moved1: bool, moved2: bool) -> ContingencyClass {
    match (moved1, moved2) {
        (false, false) => ContingencyClass::Normal,
        (true, false) => ContingencyClass::Control,
        (false, true) => ContingencyClass::Measurement,
        (true, true) => ContingencyClass::Physical,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectraRow {
    pub scenario_id: usize,
    pub description: String,
    pub declared: ContingencyClass,
    pub spectral: ContingencyClass,
    pub d1: f64,
    pub d2: f64,
    pub signature: SpectralSignature,
}

impl SpectraRow {
    pub fn agrees(&self) -> bool {
        self.declared == self.spectral
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectraReport {
    pub tolerance: f64,
    pub rows: Vec<SpectraRow>,
}

impl SpectraReport {
    pub fn disagreements(&self) -> Vec<&SpectraRow> {
        self.rows.iter().filter(|r| !r.agrees()).collect()
    }

    pub fn agreement(&self) -> f64 {
        if self.rows.is_empty() {
            return 1.0;
        }
        self.rows.iter().filter(|r| r.agrees()).count() as f64 / self.rows.len() as f64
    }

    /// One line per scenario; eigenvalues as `re+imj` joined by `;`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {SPECTRA_FORMAT}\n# tolerance={}\n", self.tolerance);
        out.push_str("scenario_id,declared,spectral,agree,d1,d2,lambda1,lambda2,description\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:e},{:e},{},{},\"{}\"",
                r.scenario_id,
                r.declared,
                r.spectral,
                r.agrees(),
                r.d1,
                r.d2,
                join_eigs(&r.signature.lambda1),
                join_eigs(&r.signature.lambda2),
                r.description.replace('"', "'")
            );
        }
        out
    }
}

fn join_eigs(values: &[C64]) -> String {
    values
        .iter()
        .map(|z| format!("{:.6}{:+.6}j", z.re, z.im))
        .collect::<Vec<_>>()
        .join(";")
}

/// Signatures and spectral classes of every scenario in the registry.
/// Islanded scenarios are included; their row simply reports what moved.
pub fn spectra_report(registry: &ScenarioRegistry, gains: &GainSet, tol: f64) -> Result<SpectraReport> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!("spectral tolerance must be > 0, got {tol}")));
    }
    let nominal = spectral_signature(registry.nominal(), gains)?;
    let rows = registry
        .scenarios
        .par_iter()
        .map(|s| {
            let signature = spectral_signature(s, gains)?;
            let (d1, d2) = signature_distances(&signature, &nominal)?;
            Ok(SpectraRow {
                scenario_id: s.id,
                description: s.description.clone(),
                declared: s.class,
                spectral: classify_by_spectra(&signature, &nominal, tol)?,
                d1,
                d2,
                signature,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SpectraReport { tolerance: tol, rows })
}
