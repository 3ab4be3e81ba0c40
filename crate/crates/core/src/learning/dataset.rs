use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::ContingencyClass;

pub const DATASET_FORMAT: &str = "contingency-lab dataset v1";

/// One labeled feature row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub window_id: usize,
    pub scenario_id: usize,
    pub label: ContingencyClass,
    pub features: Vec<f64>,
    /// Optional raw error sequence, output-major.
    pub raw: Option<Vec<f64>>,
}

/// Where a dataset came from. Written as `# key=value` header lines.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub sigmas: Vec<f64>,
    pub grid_digest: String,
    pub per_class: usize,
    pub epsilon: f64,
    /// Warm-up intervals before each window.
    pub warmup: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    pub rows: Vec<Sample>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(rows: Vec<Sample>, provenance: Provenance) -> Result<Self> {
        let ds = Self { rows, provenance };
        ds.validate()?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, |r| r.features.len())
    }

    pub fn labels(&self) -> Vec<ContingencyClass> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn features(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.features.clone()).collect()
    }

    pub fn class_counts(&self) -> BTreeMap<ContingencyClass, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.rows {
            *counts.entry(r.label).or_insert(0) += 1;
        }
        counts
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        for r in &self.rows {
            if r.features.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has {} features, expected {dim}",
                    r.window_id,
                    r.features.len()
                )));
            }
            if r.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("features of row {}", r.window_id)));
            }
        }
        let raw_len = self.rows.first().and_then(|r| r.raw.as_ref().map(Vec::len));
        if self.rows.iter().any(|r| r.raw.as_ref().map(Vec::len) != raw_len) {
            return Err(Error::DimensionMismatch("raw sequence columns differ between rows".into()));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let p = &self.provenance;
        let mut out = format!("# {DATASET_FORMAT}\n");
        let sigmas: Vec<String> = p.sigmas.iter().map(f64::to_string).collect();
        let _ = writeln!(out, "# seed={}", p.seed);
        let _ = writeln!(out, "# sigmas={}", sigmas.join(";"));
        let _ = writeln!(out, "# grid={}", p.grid_digest);
        let _ = writeln!(out, "# per_class={}", p.per_class);
        let _ = writeln!(out, "# epsilon={}", p.epsilon);
        let _ = writeln!(out, "# warmup={}", p.warmup);
        out.push_str("window_id,scenario_id,class_label");
        for i in 1..=self.dim() {
            let _ = write!(out, ",E_{i}");
        }
        if let Some(raw) = self.rows.first().and_then(|r| r.raw.as_ref()) {
            for i in 1..=raw.len() {
                let _ = write!(out, ",raw_{i}");
            }
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{},{}", r.window_id, r.scenario_id, r.label);
            for v in r.features.iter().chain(r.raw.iter().flatten()) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut provenance = Provenance::default();
        let mut lines = text.lines().enumerate().peekable();
        while let Some((_, line)) = lines.peek() {
            let Some(meta) = line.strip_prefix('#') else { break };
            if let Some((key, value)) = meta.trim().split_once('=') {
                let bad = || Error::Parse(format!("dataset header {key}={value}"));
                match key {
                    "seed" => provenance.seed = value.parse().map_err(|_| bad())?,
                    "sigmas" => {
                        provenance.sigmas = value
                            .split(';')
                            .filter(|s| !s.is_empty())
                            .map(|s| s.parse().map_err(|_| bad()))
                            .collect::<Result<_>>()?
                    }
                    "grid" => provenance.grid_digest = value.to_string(),
                    "per_class" => provenance.per_class = value.parse().map_err(|_| bad())?,
                    "epsilon" => provenance.epsilon = value.parse().map_err(|_| bad())?,
                    "warmup" => provenance.warmup = value.parse().map_err(|_| bad())?,
                    _ => {}
                }
            }
            lines.next();
        }
        let (_, header) = lines.next().ok_or_else(|| Error::Parse("dataset has no header row".into()))?;
        let columns: Vec<&str> = header.split(',').collect();
        if columns.len() < 3 || columns[..3] != ["window_id", "scenario_id", "class_label"] {
            return Err(Error::Parse(format!("unexpected dataset header {header:?}")));
        }
        let n_feat = columns.iter().filter(|c| c.starts_with("E_")).count();
        let n_raw = columns.iter().filter(|c| c.starts_with("raw_")).count();
        if 3 + n_feat + n_raw != columns.len() {
            return Err(Error::Parse(format!("unexpected dataset header {header:?}")));
        }
        let mut rows = Vec::new();
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("dataset line {}: bad {what}", lineno + 1));
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != columns.len() {
                return Err(bad("field count"));
            }
            let values: Vec<f64> = cells[3..]
                .iter()
                .map(|c| c.parse().map_err(|_| bad("number")))
                .collect::<Result<_>>()?;
            rows.push(Sample {
                window_id: cells[0].parse().map_err(|_| bad("window id"))?,
                scenario_id: cells[1].parse().map_err(|_| bad("scenario id"))?,
                label: cells[2].parse()?,
                features: values[..n_feat].to_vec(),
                raw: (n_raw > 0).then(|| values[n_feat..].to_vec()),
            });
        }
        Dataset::new(rows, provenance)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// Hex SHA-256 prefix of the CSV form; classifiers record it.
    pub fn digest(&self) -> String {
        hex::encode(&Sha256::digest(self.to_csv().as_bytes())[..8])
    }
}
