//! Sampled simulation of closed-loop models.
//!
//! Windows are simulated on the exact zero-order-hold discretization of the
//! augmented `[x; x̃]` dynamics. Measurement noise is added to the emitted
//! `y` block only; the estimate block `x̂ = x − x̃` is noise free.

mod schedule;
mod window;
mod zoh;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use schedule::{simulate_schedule, Interval, Schedule, ScheduledWindow};
pub use window::{excitation, nominal_reference, simulate_window, DiscreteLoop, OutputTrace, DIVERGENCE_LIMIT};
pub use zoh::discretize;

/// Default magnitude of the per-window initial perturbation.
pub const EXCITATION: f64 = 0.05;

/// How the per-window initial perturbation Δ is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExcitationShape {
    /// Every rotor angle moves by the same `a`, with `|a|` uniform on
    /// `[m/2, m]` and a random sign; speeds start at zero.
    #[default]
    CommonAngle,
    /// Every state entry uniform on `[−m, m]`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Sample period t_s in seconds.
    pub sample_period: f64,
    /// Observation window τ0 in seconds.
    pub window: f64,
    /// Switching interval τ in seconds, at least one window long.
    pub switching_interval: f64,
    /// Perturbation magnitude m.
    pub excitation: f64,
    pub excitation_shape: ExcitationShape,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            sample_period: 0.02,
            window: 1.0,
            switching_interval: 1.0,
            excitation: EXCITATION,
            excitation_shape: ExcitationShape::CommonAngle,
            seed: 0,
        }
    }
}

impl SimConfig {
    /// N0 = round(τ0 / t_s).
    pub fn samples_per_window(&self) -> usize {
        (self.window / self.sample_period).round() as usize
    }

    /// Samples in one switching interval.
    pub fn samples_per_interval(&self) -> usize {
        (self.switching_interval / self.sample_period).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.sample_period.is_finite()
            && self.sample_period > 0.0
            && self.window.is_finite()
            && self.window >= self.sample_period
            && self.switching_interval.is_finite()
            && self.switching_interval >= self.window
            && self.excitation.is_finite()
            && self.excitation >= 0.0
            && self.samples_per_window() >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "simulation config needs t_s > 0, τ0 ≥ t_s, τ ≥ τ0, excitation ≥ 0; got t_s={}, τ0={}, τ={}, excitation={}",
                self.sample_period, self.window, self.switching_interval, self.excitation
            )))
        }
    }
}
