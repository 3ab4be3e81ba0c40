use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, Stream};

/// Transmission line between two buses, with series susceptance in per-unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    #[serde(rename = "susceptance_pu")]
    pub susceptance: f64,
}

/// Classical machine at a bus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub bus: usize,
    /// Inertia constant M in s².
    #[serde(rename = "inertia_s2")]
    pub inertia: f64,
    /// Damping D in per-unit.
    #[serde(rename = "damping_pu")]
    pub damping: f64,
    /// Operating rotor angle in rad.
    #[serde(rename = "angle_rad")]
    pub angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensedState {
    Angle,
    Speed,
}

/// A phasor measurement of one generator state. `generator` is a zero-based
/// index into [`GridSpec::generators`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sensor {
    pub generator: usize,
    pub state: SensedState,
}

/// Grid description: the source of every state-space matrix in the lab.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(default)]
    pub name: String,
    pub buses: Vec<usize>,
    #[serde(rename = "line", default)]
    pub lines: Vec<Line>,
    #[serde(rename = "generator")]
    pub generators: Vec<Generator>,
    #[serde(rename = "sensor", default)]
    pub sensors: Vec<Sensor>,
}

const DESK_GRID: &str = include_str!("../../data/desk_grid.toml");

impl GridSpec {
    /// Built-in 12-bus, 5-generator desk grid with a rotor-angle sensor on
    /// every machine.
    pub fn desk() -> Self {
        Self::from_toml_str(DESK_GRID).expect("bundled desk grid is valid")
    }

    /// Desk-grid topology with machine constants redrawn from `seed`:
    /// M in [2, 6] s², D in [0.05, 0.3] p.u., operating angles in [-0.1, 0.3]
    /// rad relative to the first machine.
    pub fn desk_seeded(seed: u64) -> Self {
        let mut grid = Self::desk();
        let mut rng = seed::child_rng(seed, Stream::Grid, 0);
        for (i, g) in grid.generators.iter_mut().enumerate() {
            g.inertia = rng.random_range(2.0..=6.0);
            g.damping = rng.random_range(0.05..=0.3);
            g.angle = if i == 0 {
                0.0
            } else {
                rng.random_range(-0.1..=0.3)
            };
        }
        grid.name = format!("desk-seed-{seed}");
        grid
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let grid: GridSpec = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        grid.validate()?;
        Ok(grid)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("grid spec serializes")
    }

    pub fn n_states(&self) -> usize {
        2 * self.generators.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.generators.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.sensors.len()
    }

    /// Checks every structural invariant, including connectivity of the full
    /// line graph.
    pub fn validate(&self) -> Result<()> {
        if self.buses.is_empty() {
            return Err(Error::InvalidGrid("no buses".into()));
        }
        if self.generators.is_empty() {
            return Err(Error::InvalidGrid("no generators".into()));
        }
        let buses: BTreeSet<usize> = self.buses.iter().copied().collect();
        if buses.len() != self.buses.len() {
            return Err(Error::InvalidGrid("duplicate bus id".into()));
        }
        for (i, line) in self.lines.iter().enumerate() {
            if !(line.susceptance.is_finite() && line.susceptance > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "line {i} susceptance must be positive, got {}",
                    line.susceptance
                )));
            }
            if line.from == line.to {
                return Err(Error::InvalidGrid(format!("line {i} is a self-loop")));
            }
            for bus in [line.from, line.to] {
                if !buses.contains(&bus) {
                    return Err(Error::InvalidGrid(format!("line {i} ends at unknown bus {bus}")));
                }
            }
        }
        let mut gen_buses = BTreeSet::new();
        for (i, g) in self.generators.iter().enumerate() {
            if !buses.contains(&g.bus) {
                return Err(Error::InvalidGrid(format!("generator {i} at unknown bus {}", g.bus)));
            }
            if !gen_buses.insert(g.bus) {
                return Err(Error::InvalidGrid(format!("two generators at bus {}", g.bus)));
            }
            if !(g.inertia.is_finite() && g.inertia > 0.0) {
                return Err(Error::ZeroInertia(i));
            }
            if !(g.damping.is_finite() && g.damping >= 0.0) || !g.angle.is_finite() {
                return Err(Error::InvalidGrid(format!("generator {i} has invalid damping or angle")));
            }
        }
        for (i, s) in self.sensors.iter().enumerate() {
            if s.generator >= self.generators.len() {
                return Err(Error::InvalidGrid(format!(
                    "sensor {i} references generator {} of {}",
                    s.generator,
                    self.generators.len()
                )));
            }
        }
        if self.islands(&BTreeSet::new()).len() != 1 {
            return Err(Error::Disconnected);
        }
        Ok(())
    }

    /// Connected components of the line graph with `out_lines` removed, each
    /// as a sorted list of bus ids.
    pub fn islands(&self, out_lines: &BTreeSet<usize>) -> Vec<Vec<usize>> {
        let mut adj: BTreeMap<usize, Vec<usize>> =
            self.buses.iter().map(|&b| (b, Vec::new())).collect();
        for (i, line) in self.lines.iter().enumerate() {
            if out_lines.contains(&i) {
                continue;
            }
            adj.entry(line.from).or_default().push(line.to);
            adj.entry(line.to).or_default().push(line.from);
        }
        let mut seen = BTreeSet::new();
        let mut islands = Vec::new();
        for &start in &self.buses {
            if !seen.insert(start) {
                continue;
            }
            let mut island = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(bus) = queue.pop_front() {
                for &next in &adj[&bus] {
                    if seen.insert(next) {
                        island.push(next);
                        queue.push_back(next);
                    }
                }
            }
            island.sort_unstable();
            islands.push(island);
        }
        islands
    }

    /// Short stable digest of the grid contents, used as dataset provenance.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_vec(self).expect("grid serializes");
        hex::encode(&Sha256::digest(&json)[..8])
    }
}
