use std::collections::hash_map::Entry;
use std::collections::HashMap;

use rand::seq::{IndexedRandom, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::control::{build_closed_loop, GainSet};
use crate::error::{Error, Result};
use crate::grid::{ContingencyClass, ScenarioRegistry};
use crate::linalg::Vector;
use crate::seed::{self, Stream};
use crate::sim::{excitation, DiscreteLoop, OutputTrace, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub k: usize,
    pub scenario_id: usize,
    /// Interval length τ in seconds.
    pub duration: f64,
}

/// Switching signal: one active scenario per interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub intervals: Vec<Interval>,
}

impl Schedule {
    pub fn from_ids(ids: &[usize], duration: f64) -> Self {
        Self {
            intervals: ids
                .iter()
                .enumerate()
                .map(|(k, &scenario_id)| Interval { k, scenario_id, duration })
                .collect(),
        }
    }

    /// `count` intervals with classes as balanced as `count` allows, in
    /// shuffled order, each drawing a uniform admissible scenario of its
    /// class.
    pub fn random(registry: &ScenarioRegistry, count: usize, duration: f64, seed: u64) -> Result<Self> {
        let pools: Vec<(ContingencyClass, Vec<usize>)> = ContingencyClass::ALL
            .into_iter()
            .map(|c| (c, registry.admissible_ids(c)))
            .filter(|(_, ids)| !ids.is_empty())
            .collect();
        if pools.is_empty() {
            return Err(Error::Empty("registry has no admissible scenarios".into()));
        }
        let mut rng = seed::child_rng(seed, Stream::Schedule, 0);
        let mut slots: Vec<usize> = (0..count).map(|k| k % pools.len()).collect();
        slots.shuffle(&mut rng);
        let ids: Vec<usize> = slots
            .into_iter()
            .map(|p| *pools[p].1.choose(&mut rng).expect("non-empty pool"))
            .collect();
        Ok(Self::from_ids(&ids, duration))
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Text form: header `k,scenario_id,duration_s`, one interval per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,scenario_id,duration_s\n");
        for iv in &self.intervals {
            out.push_str(&format!("{},{},{}\n", iv.k, iv.scenario_id, iv.duration));
        }
        out
    }

    /// Accepts the `to_csv` form, or bare scenario ids (one per line) using
    /// `default_duration`. Blank lines and `#` comments are skipped.
    pub fn from_csv(text: &str, default_duration: f64) -> Result<Self> {
        let mut intervals = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("k,") {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("schedule line {}: bad {what} in {line:?}", lineno + 1));
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let k = intervals.len();
            let iv = match fields.as_slice() {
                [id] => Interval {
                    k,
                    scenario_id: id.parse().map_err(|_| bad("scenario id"))?,
                    duration: default_duration,
                },
                [_, id, dur] => Interval {
                    k,
                    scenario_id: id.parse().map_err(|_| bad("scenario id"))?,
                    duration: dur.parse().map_err(|_| bad("duration"))?,
                },
                _ => return Err(bad("field count")),
            };
            intervals.push(iv);
        }
        Ok(Self { intervals })
    }
}

/// One simulated interval with its noise-free reference.
#[derive(Debug, Clone)]
pub struct ScheduledWindow {
    pub k: usize,
    pub scenario_id: usize,
    pub class: ContingencyClass,
    pub monitored: OutputTrace,
    pub nominal: OutputTrace,
}

/// Runs a schedule back to back. Window k starts from the terminal state of
/// interval k−1 plus a fresh excitation kick, and its nominal reference
/// starts from that same state.
pub fn simulate_schedule(
    registry: &ScenarioRegistry,
    gains: &GainSet,
    schedule: &Schedule,
    cfg: &SimConfig,
    sigma: f64,
    seed: u64,
) -> Result<Vec<ScheduledWindow>> {
    cfg.validate()?;
    let n0 = cfg.samples_per_window();
    let nominal = DiscreteLoop::new(&build_closed_loop(registry.nominal(), gains, 0.0)?, cfg)?;
    let n = nominal.n_augmented() / 2;
    let mut loops: HashMap<usize, DiscreteLoop> = HashMap::new();
    let mut state = Vector::zeros(2 * n);
    let mut windows = Vec::with_capacity(schedule.len());
    for iv in &schedule.intervals {
        let scenario = registry.get(iv.scenario_id)?;
        let total = (iv.duration / cfg.sample_period).round() as usize;
        if !(iv.duration.is_finite() && total >= n0) {
            return Err(Error::InvalidArgument(format!(
                "interval {} lasts {} s, shorter than the {} s window",
                iv.k, iv.duration, cfg.window
            )));
        }
        if let Entry::Vacant(slot) = loops.entry(iv.scenario_id) {
            slot.insert(DiscreteLoop::new(&build_closed_loop(scenario, gains, sigma)?, cfg)?);
        }
        let active = &loops[&iv.scenario_id];
        let mut kick_rng = seed::child_rng(seed, Stream::Excitation, iv.k as u64);
        let x0 = &state + excitation(n, cfg.excitation, cfg.excitation_shape, &mut kick_rng);
        let noise_seed = seed::derive(seed, Stream::Noise, iv.k as u64);
        let mut monitored = active.run(&x0, None, n0, total - n0, noise_seed)?;
        let mut reference = nominal.run(&x0, None, n0, 0, 0)?;
        monitored.window = iv.k;
        reference.window = iv.k;
        state = monitored.terminal.clone();
        windows.push(ScheduledWindow {
            k: iv.k,
            scenario_id: iv.scenario_id,
            class: scenario.class,
            monitored,
            nominal: reference,
        });
    }
    Ok(windows)
}
