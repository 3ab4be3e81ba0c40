use rand::seq::IndexedRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{aggregate, error_window, DEFAULT_EPSILON};
use crate::grid::ContingencyClass;
use crate::learning::{Dataset, Provenance, Sample};
use crate::linalg::Vector;
use crate::pipeline::ModelBank;
use crate::seed::{self, Stream};
use crate::sim::{excitation, DiscreteLoop, SimConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetPlan {
    pub per_class: usize,
    /// Noise levels, cycled over the replicates of each class.
    pub sigmas: Vec<f64>,
    pub sim: SimConfig,
    pub epsilon: f64,
    /// Random switching intervals simulated before each window; the window
    /// starts from their terminal state plus its own kick. Zero starts every
    /// window from rest.
    pub warmup: usize,
    /// Also export the raw error sequences.
    pub raw: bool,
    pub seed: u64,
}

impl DatasetPlan {
    /// 240 windows per class at σ ∈ {1e−4, 1e−3, 1e−2}, three warm-up
    /// intervals each.
    pub fn standard(seed: u64) -> Self {
        Self {
            per_class: 240,
            sigmas: vec![1e-4, 1e-3, 1e-2],
            sim: SimConfig::default(),
            epsilon: DEFAULT_EPSILON,
            warmup: 3,
            raw: false,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedDataset {
    pub dataset: Dataset,
    /// Islanded scenarios left out of sampling.
    pub skipped: Vec<usize>,
}

/// Simulates `per_class` windows for every class. Window w draws its
/// scenario, excitation and noise from child seeds indexed by w, so the
/// result does not depend on thread scheduling.
pub fn generate_dataset(bank: &ModelBank, plan: &DatasetPlan) -> Result<GeneratedDataset> {
    plan.sim.validate()?;
    if plan.sigmas.is_empty() || plan.sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::InvalidArgument(format!("noise levels must be finite and >= 0: {:?}", plan.sigmas)));
    }
    let registry = &bank.registry;
    let pools: Vec<Vec<usize>> = ContingencyClass::ALL.iter().map(|&c| registry.admissible_ids(c)).collect();
    for (class, pool) in ContingencyClass::ALL.iter().zip(&pools) {
        if pool.is_empty() && plan.per_class > 0 {
            return Err(Error::Plan(format!("no admissible {class} scenario in the bank")));
        }
    }
    let skipped: Vec<usize> = registry.scenarios.iter().filter(|s| s.islanded).map(|s| s.id).collect();

    let loops: Vec<Option<DiscreteLoop>> = registry
        .scenarios
        .par_iter()
        .map(|s| {
            if s.islanded {
                return Ok(None);
            }
            DiscreteLoop::new(&bank.closed_loop(s.id, 0.0)?, &plan.sim).map(Some)
        })
        .collect::<Result<_>>()?;
    let nominal = loops[0].as_ref().expect("nominal scenario is never islanded");
    let n = bank.n_states();
    let n0 = plan.sim.samples_per_window();
    let interval = plan.sim.samples_per_interval();
    let classes: Vec<usize> = (0..pools.len()).filter(|&c| !pools[c].is_empty()).collect();

    let total = ContingencyClass::ALL.len() * plan.per_class;
    let rows = (0..total)
        .into_par_iter()
        .map(|w| {
            let class = ContingencyClass::ALL[w / plan.per_class];
            let replicate = w % plan.per_class;
            let mut pick = seed::child_rng(plan.seed, Stream::Dataset, w as u64);
            let scenario_id = *pools[class.index()].choose(&mut pick).expect("pool checked above");
            let sigma = plan.sigmas[replicate % plan.sigmas.len()];
            let mut history = seed::child_rng(plan.seed, Stream::History, w as u64);
            let mut state = Vector::zeros(2 * n);
            for _ in 0..plan.warmup {
                let class = *classes.choose(&mut history).expect("some class is admissible");
                let id = *pools[class].choose(&mut history).expect("non-empty pool");
                let kick = excitation(n, plan.sim.excitation, plan.sim.excitation_shape, &mut history);
                let quiet = loops[id].as_ref().expect("admissible scenario has a loop");
                state = quiet.run(&(state + kick), None, 0, interval, 0).map_err(|e| scenario_context(e, id))?.terminal;
            }
            let x0 = state + excitation(n, plan.sim.excitation, plan.sim.excitation_shape, &mut seed::child_rng(plan.seed, Stream::Excitation, w as u64));
            let mut active = loops[scenario_id].clone().expect("admissible scenario has a loop");
            active.sigma = sigma;
            let noise_seed = seed::derive(plan.seed, Stream::Noise, w as u64);
            let monitored = active.run(&x0, None, n0, 0, noise_seed).map_err(|e| scenario_context(e, scenario_id))?;
            let reference = nominal.run(&x0, None, n0, 0, 0)?;
            let errors = error_window(&monitored, &reference)?;
            let features = aggregate(&errors, plan.epsilon)?;
            Ok(Sample {
                window_id: w,
                scenario_id,
                label: class,
                features: features.values,
                raw: plan.raw.then(|| errors.flatten()),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let provenance = Provenance {
        seed: plan.seed,
        sigmas: plan.sigmas.clone(),
        grid_digest: bank.grid_digest.clone(),
        per_class: plan.per_class,
        epsilon: plan.epsilon,
        warmup: plan.warmup,
    };
    Ok(GeneratedDataset {
        dataset: Dataset::new(rows, provenance)?,
        skipped,
    })
}

fn scenario_context(e: Error, scenario_id: usize) -> Error {
    match e {
        Error::Diverged { sample, magnitude } => {
            Error::InvalidArgument(format!("scenario {scenario_id} diverged at sample {sample} (|x| = {magnitude:e})"))
        }
        other => other,
    }
}
