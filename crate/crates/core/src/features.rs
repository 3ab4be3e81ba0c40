//! Error windows and log-sum features.
//!
//! For output i over window k, `e_i(l,k) = |y_c,i − y_nom,i|` and
//! `E_i(k) = ln(Σ_l e_i(l,k) + ε)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ContingencyClass;
use crate::linalg::Mat;
use crate::sim::OutputTrace;

pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Entrywise absolute output error over one window.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorWindow {
    pub window: usize,
    pub scenario_id: usize,
    /// N0 × (r + n), all entries ≥ 0.
    pub e: Mat,
}

impl ErrorWindow {
    /// Raw sequence export: output 1 samples first, then output 2, and so on.
    pub fn flatten(&self) -> Vec<f64> {
        self.e.as_slice().to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub window: usize,
    pub scenario_id: usize,
    pub label: Option<ContingencyClass>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

pub fn error_window(monitored: &OutputTrace, nominal: &OutputTrace) -> Result<ErrorWindow> {
    if monitored.samples.shape() != nominal.samples.shape() || monitored.window != nominal.window {
        return Err(Error::DimensionMismatch(format!(
            "monitored window {} {:?} vs nominal window {} {:?}",
            monitored.window,
            monitored.samples.shape(),
            nominal.window,
            nominal.samples.shape()
        )));
    }
    Ok(ErrorWindow {
        window: monitored.window,
        scenario_id: monitored.scenario_id,
        e: (&monitored.samples - &nominal.samples).abs(),
    })
}

pub fn aggregate(errors: &ErrorWindow, epsilon: f64) -> Result<FeatureVector> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {epsilon}")));
    }
    let values = errors
        .e
        .column_iter()
        .map(|col| (col.sum() + epsilon).ln())
        .collect();
    Ok(FeatureVector {
        window: errors.window,
        scenario_id: errors.scenario_id,
        label: None,
        values,
    })
}

/// `aggregate(error_window(..))` in one call.
pub fn extract(monitored: &OutputTrace, nominal: &OutputTrace, epsilon: f64) -> Result<FeatureVector> {
    aggregate(&error_window(monitored, nominal)?, epsilon)
}
