//! Contingency laboratory for power grids modeled as switched linear systems.
//!
//! The crate builds a linearized swing-equation model from a grid
//! description, derives physical (A), control (B) and measurement (C)
//! contingency scenarios, closes the loop with a state-feedback controller
//! and a Luenberger observer, simulates windowed output traces and turns the
//! output error against a noise-free nominal reference into log-sum
//! features. Classifiers (KNN, one-vs-rest RBF SVM) are trained on those
//! features offline and applied window by window online.

pub mod control;
pub mod error;
pub mod exogenous;
pub mod features;
pub mod grid;
pub mod learning;
pub mod linalg;
pub mod pipeline;
pub mod seed;
pub mod sim;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{ContingencyClass, GridSpec, ScenarioModel, ScenarioRegistry};
