use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::{
    build_closed_loop, default_feedback_poles, default_observer_poles, design_gains, ClosedLoopModel, GainSet,
    PlacementOptions,
};
use crate::error::{Error, Result};
use crate::grid::{enumerate_scenarios, EnumerationPlan, GridSpec, ScenarioRegistry};

pub const BANK_FORMAT: &str = "contingency-lab model bank v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub plan: EnumerationPlan,
    /// Feedback poles are the open-loop eigenvalues moved left by this much.
    pub feedback_shift: f64,
    pub placement: PlacementOptions,
}

impl BuildConfig {
    pub fn full(seed: u64) -> Self {
        Self {
            plan: EnumerationPlan::full(seed),
            feedback_shift: 1.0,
            placement: PlacementOptions {
                seed,
                ..PlacementOptions::default()
            },
        }
    }
}

/// Scenario registry plus the gains designed on its nominal model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBank {
    pub format: String,
    pub grid: GridSpec,
    pub grid_digest: String,
    pub config: BuildConfig,
    pub gains: GainSet,
    pub registry: ScenarioRegistry,
}

impl ModelBank {
    pub fn closed_loop(&self, scenario_id: usize, sigma: f64) -> Result<ClosedLoopModel> {
        build_closed_loop(self.registry.get(scenario_id)?, &self.gains, sigma)
    }

    pub fn n_states(&self) -> usize {
        self.registry.nominal().n_states()
    }

    /// r + n, the feature dimension.
    pub fn n_features(&self) -> usize {
        let nom = self.registry.nominal();
        nom.n_outputs() + nom.n_states()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bank serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let bank: ModelBank = serde_json::from_str(text).map_err(|e| Error::Parse(format!("model bank: {e}")))?;
        if bank.format != BANK_FORMAT {
            return Err(Error::Parse(format!("unsupported model bank format {:?}", bank.format)));
        }
        bank.registry.validate()?;
        Ok(bank)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Enumerates scenarios and designs K and G on the nominal model.
pub fn build_bank(grid: &GridSpec, config: &BuildConfig) -> Result<ModelBank> {
    grid.validate()?;
    let registry = enumerate_scenarios(grid, &config.plan)?;
    let nominal = registry.nominal();
    let feedback = default_feedback_poles(&nominal.a, config.feedback_shift)?;
    let observer = default_observer_poles(nominal.n_states());
    let gains = design_gains(nominal, &feedback, &observer, &config.placement)?;
    Ok(ModelBank {
        format: BANK_FORMAT.to_string(),
        grid: grid.clone(),
        grid_digest: grid.digest(),
        config: config.clone(),
        gains,
        registry,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_plan_gives_single_scenario() {
        let cfg = BuildConfig {
            plan: EnumerationPlan::empty(1),
            ..BuildConfig::full(1)
        };
        let bank = build_bank(&GridSpec::desk(), &cfg).unwrap();
        assert_eq!(bank.registry.len(), 1);
        assert_eq!(bank.n_features(), 15);
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let bank = build_bank(&GridSpec::desk(), &BuildConfig::full(3)).unwrap();
        let text = bank.to_json();
        let back = ModelBank::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
        assert_eq!(build_bank(&GridSpec::desk(), &BuildConfig::full(3)).unwrap().to_json(), text);
    }

    #[test]
    fn rejects_foreign_format() {
        let mut bank = build_bank(&GridSpec::desk(), &BuildConfig { plan: EnumerationPlan::empty(1), ..BuildConfig::full(1) }).unwrap();
        bank.format = "something else".into();
        assert!(ModelBank::from_json(&bank.to_json()).is_err());
        assert!(ModelBank::from_json("{").is_err());
    }
}
