use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::model::{apply_line_outage, build_nominal_model};
use crate::grid::scenario::{apply_control_fault, apply_measurement_fault, ContingencyClass, ScenarioModel};
use crate::grid::spec::GridSpec;
use crate::seed::{self, Stream};

/// Gains drawn for channel faults: optional loss (gain 0) for every channel
/// first, then uniform draws from either the attenuation or the
/// amplification band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainBands {
    pub include_loss: bool,
    pub low: (f64, f64),
    pub high: (f64, f64),
}

impl Default for GainBands {
    fn default() -> Self {
        Self {
            include_loss: true,
            low: (0.4, 0.8),
            high: (1.2, 1.6),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationPlan {
    /// Single-line outages, taken in line order.
    pub n1_outages: usize,
    /// Double-line outages, sampled with the plan seed.
    pub n2_outages: usize,
    pub control_faults: usize,
    pub measurement_faults: usize,
    pub control_gains: GainBands,
    pub measurement_gains: GainBands,
    /// Keep outages that split the network (flagged `islanded`) instead of
    /// skipping them.
    pub allow_islanded: bool,
    pub seed: u64,
}

impl EnumerationPlan {
    /// 29 physical, 32 control and 32 measurement scenarios: ids 1–29,
    /// 30–61 and 62–93.
    pub fn full(seed: u64) -> Self {
        Self {
            n1_outages: 17,
            n2_outages: 12,
            control_faults: 32,
            measurement_faults: 32,
            control_gains: GainBands::default(),
            measurement_gains: GainBands::default(),
            allow_islanded: false,
            seed,
        }
    }

    pub fn empty(seed: u64) -> Self {
        Self {
            n1_outages: 0,
            n2_outages: 0,
            control_faults: 0,
            measurement_faults: 0,
            ..Self::full(seed)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRegistry {
    pub scenarios: Vec<ScenarioModel>,
}

impl ScenarioRegistry {
    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn nominal(&self) -> &ScenarioModel {
        &self.scenarios[0]
    }

    pub fn get(&self, id: usize) -> Result<&ScenarioModel> {
        self.scenarios.get(id).ok_or(Error::UnknownScenario(id))
    }

    pub fn counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for s in &self.scenarios {
            counts[s.class.index()] += 1;
        }
        counts
    }

    /// Ids of a class, islanded scenarios excluded.
    pub fn admissible_ids(&self, class: ContingencyClass) -> Vec<usize> {
        self.scenarios
            .iter()
            .filter(|s| s.class == class && !s.islanded)
            .map(|s| s.id)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.scenarios.first() else {
            return Err(Error::Empty("registry has no scenarios".into()));
        };
        if first.class != ContingencyClass::Normal {
            return Err(Error::Plan("scenario 0 must be Normal".into()));
        }
        for (i, s) in self.scenarios.iter().enumerate() {
            if s.id != i {
                return Err(Error::Plan(format!("scenario at position {i} has id {}", s.id)));
            }
            if i > 0 && s.class == ContingencyClass::Normal {
                return Err(Error::Plan(format!("scenario {i} is a second Normal scenario")));
            }
            s.check_dimensions()?;
            if !s.same_shape(first) {
                return Err(Error::DimensionMismatch(format!("scenario {i} shape differs from nominal")));
            }
        }
        Ok(())
    }
}

fn draw_gain(bands: &GainBands, rng: &mut impl Rng) -> f64 {
    let (lo, hi) = if rng.random_bool(0.5) { bands.low } else { bands.high };
    rng.random_range(lo..=hi)
}

fn channel_gains(count: usize, channels: usize, bands: &GainBands, rng: &mut impl Rng) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(count);
    if bands.include_loss {
        out.extend((0..channels.min(count)).map(|ch| (ch, 0.0)));
    }
    let mut ch = 0;
    while out.len() < count {
        out.push((ch % channels, draw_gain(bands, rng)));
        ch += 1;
    }
    out
}

/// Auto-enumerates the scenario bank: id 0 Normal, then physical, control
/// and measurement scenarios in that order.
pub fn enumerate_scenarios(grid: &GridSpec, plan: &EnumerationPlan) -> Result<ScenarioRegistry> {
    let nominal = build_nominal_model(grid)?;
    let n_lines = grid.lines.len();
    if plan.n1_outages > n_lines {
        return Err(Error::Plan(format!(
            "requested {} single-line outages but the grid has {n_lines} lines",
            plan.n1_outages
        )));
    }
    let mut scenarios = vec![nominal.clone()];
    let admissible = |out: &BTreeSet<usize>| -> Option<ScenarioModel> {
        match apply_line_outage(grid, out) {
            Ok(s) if plan.allow_islanded || !s.islanded => Some(s),
            _ => None,
        }
    };

    let mut n1 = 0;
    for line in 0..n_lines {
        if n1 == plan.n1_outages {
            break;
        }
        if let Some(s) = admissible(&BTreeSet::from([line])) {
            scenarios.push(s);
            n1 += 1;
        }
    }
    if n1 < plan.n1_outages {
        return Err(Error::Plan(format!(
            "only {n1} admissible single-line outages, {} requested",
            plan.n1_outages
        )));
    }

    let mut rng = seed::child_rng(plan.seed, Stream::Enumeration, 0);
    if plan.n2_outages > 0 {
        let mut pairs: Vec<(usize, usize)> = (0..n_lines)
            .flat_map(|i| (i + 1..n_lines).map(move |j| (i, j)))
            .collect();
        pairs.shuffle(&mut rng);
        let mut n2 = 0;
        for (i, j) in pairs {
            if n2 == plan.n2_outages {
                break;
            }
            if let Some(s) = admissible(&BTreeSet::from([i, j])) {
                scenarios.push(s);
                n2 += 1;
            }
        }
        if n2 < plan.n2_outages {
            return Err(Error::Plan(format!(
                "only {n2} admissible double-line outages, {} requested",
                plan.n2_outages
            )));
        }
    }

    if plan.control_faults > 0 {
        for (input, gain) in channel_gains(plan.control_faults, nominal.n_inputs(), &plan.control_gains, &mut rng) {
            scenarios.push(apply_control_fault(&nominal, input, gain)?);
        }
    }
    if plan.measurement_faults > 0 {
        if nominal.n_outputs() == 0 {
            return Err(Error::Plan("measurement faults requested on a grid without sensors".into()));
        }
        for (output, gain) in
            channel_gains(plan.measurement_faults, nominal.n_outputs(), &plan.measurement_gains, &mut rng)
        {
            scenarios.push(apply_measurement_fault(&nominal, output, gain)?);
        }
    }

    for (id, s) in scenarios.iter_mut().enumerate() {
        s.id = id;
    }
    let registry = ScenarioRegistry { scenarios };
    registry.validate()?;
    Ok(registry)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_plan_layout() {
        let reg = enumerate_scenarios(&GridSpec::desk(), &EnumerationPlan::full(1)).unwrap();
        assert_eq!(reg.len(), 94);
        assert_eq!(reg.counts(), [1, 29, 32, 32]);
        for s in &reg.scenarios {
            let expected = match s.id {
                0 => ContingencyClass::Normal,
                1..=29 => ContingencyClass::Physical,
                30..=61 => ContingencyClass::Control,
                _ => ContingencyClass::Measurement,
            };
            assert_eq!(s.class, expected, "id {}", s.id);
            assert!(!s.islanded);
        }
    }

    #[test]
    fn empty_plan_has_only_normal() {
        let reg = enumerate_scenarios(&GridSpec::desk(), &EnumerationPlan::empty(1)).unwrap();
        assert_eq!(reg.len(), 1);
        assert_eq!(reg.nominal().class, ContingencyClass::Normal);
    }

    #[test]
    fn seeded_enumeration_replays() {
        let grid = GridSpec::desk();
        let a = enumerate_scenarios(&grid, &EnumerationPlan::full(77)).unwrap();
        let b = enumerate_scenarios(&grid, &EnumerationPlan::full(77)).unwrap();
        assert_eq!(a, b);
        let c = enumerate_scenarios(&grid, &EnumerationPlan::full(78)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn too_many_single_outages() {
        let mut plan = EnumerationPlan::full(1);
        plan.n1_outages = 18;
        assert!(matches!(
            enumerate_scenarios(&GridSpec::desk(), &plan),
            Err(Error::Plan(_))
        ));
    }

    #[test]
    fn perturbations_touch_only_their_matrix() {
        let reg = enumerate_scenarios(&GridSpec::desk(), &EnumerationPlan::full(5)).unwrap();
        let nom = reg.nominal();
        for s in &reg.scenarios[1..] {
            match s.class {
                ContingencyClass::Physical => {
                    assert_ne!(s.a, nom.a);
                    assert_eq!((&s.b, &s.c), (&nom.b, &nom.c));
                }
                ContingencyClass::Control => {
                    assert_ne!(s.b, nom.b);
                    assert_eq!((&s.a, &s.c), (&nom.a, &nom.c));
                }
                ContingencyClass::Measurement => {
                    assert_ne!(s.c, nom.c);
                    assert_eq!((&s.a, &s.b), (&nom.a, &nom.b));
                }
                ContingencyClass::Normal => unreachable!(),
            }
        }
    }

    #[test]
    fn loss_faults_come_first() {
        let reg = enumerate_scenarios(&GridSpec::desk(), &EnumerationPlan::full(5)).unwrap();
        for (k, id) in (30..35).enumerate() {
            assert!(reg.scenarios[id].b.column(k).iter().all(|&v| v == 0.0));
        }
        for (k, id) in (62..67).enumerate() {
            assert!(reg.scenarios[id].c.row(k).iter().all(|&v| v == 0.0));
        }
    }
}
