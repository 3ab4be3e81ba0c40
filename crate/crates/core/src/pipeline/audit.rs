use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exogenous::{equivalence_sweep, EquivalenceConfig, EquivalenceReport, SignalFault};
use crate::grid::ContingencyClass;
use crate::pipeline::ModelBank;
use crate::spectral::{controllability_rank, observability_rank, rank_audit, RankAudit};

/// Packet loss on u1, ×1.20 on u1 and ×1.10 on y1.
pub fn standard_faults() -> Vec<SignalFault> {
    vec![SignalFault::input_loss(0), SignalFault::input_gain(0, 1.2), SignalFault::output_gain(0, 1.1)]
}

pub fn equivalence_suite(
    bank: &ModelBank,
    faults: &[SignalFault],
    trials: usize,
    seed: u64,
    cfg: &EquivalenceConfig,
) -> Result<Vec<EquivalenceReport>> {
    let nominal = bank.registry.nominal();
    faults
        .par_iter()
        .map(|f| equivalence_sweep(nominal, &bank.gains, f, trials, 0.05, seed, cfg))
        .collect()
}

pub fn equivalence_csv(reports: &[EquivalenceReport]) -> String {
    let mut out = String::from("# contingency-lab equivalence v1\nfault,trials,samples,max_dev_x,max_dev_xhat,max_dev_y,tolerance,pass\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{:e},{:e},{:e},{:e},{}",
            r.fault,
            r.trials,
            r.samples,
            r.max_dev_x,
            r.max_dev_xhat,
            r.max_dev_y,
            r.tolerance,
            r.passed()
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRank {
    pub scenario_id: usize,
    pub class: ContingencyClass,
    pub controllability: usize,
    pub observability: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    /// Nominal model with the per-sensor breakdown.
    pub nominal: RankAudit,
    pub scenarios: Vec<ScenarioRank>,
}

impl RankReport {
    pub fn deficient(&self) -> Vec<&ScenarioRank> {
        let n = self.nominal.n;
        self.scenarios.iter().filter(|s| s.controllability < n || s.observability < n).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = self.nominal.to_text();
        out.push_str("scenario_id,class,controllability,observability\n");
        for s in &self.scenarios {
            let _ = writeln!(out, "{},{},{},{}", s.scenario_id, s.class, s.controllability, s.observability);
        }
        out
    }
}

pub fn rank_report(bank: &ModelBank) -> Result<RankReport> {
    let nom = bank.registry.nominal();
    let nominal = rank_audit(&nom.a, &nom.b, &nom.c)?;
    let scenarios = bank
        .registry
        .scenarios
        .par_iter()
        .map(|s| {
            Ok(ScenarioRank {
                scenario_id: s.id,
                class: s.class,
                controllability: controllability_rank(&s.a, &s.b)?.1,
                observability: observability_rank(&s.a, &s.c)?.1,
            })
        })
        .collect::<Result<_>>()?;
    Ok(RankReport { nominal, scenarios })
}
