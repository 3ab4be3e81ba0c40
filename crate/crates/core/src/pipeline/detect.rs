use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::extract;
use crate::grid::ContingencyClass;
use crate::learning::{Classifier, TrainedClassifier};
use crate::pipeline::ModelBank;
use crate::sim::{simulate_schedule, Schedule, SimConfig};

pub const DETECTION_FORMAT: &str = "contingency-lab detection v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRow {
    pub k: usize,
    pub scenario_id: usize,
    pub true_class: ContingencyClass,
    pub predicted: ContingencyClass,
    /// Largest |E_i| of the window.
    pub max_abs_feature: f64,
    /// Feature extraction plus prediction, in milliseconds.
    pub classify_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub classifier: String,
    pub window_s: f64,
    pub sigma: f64,
    pub seed: u64,
    pub rows: Vec<DetectionRow>,
}

impl DetectionReport {
    pub fn accuracy(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| r.true_class == r.predicted).count() as f64 / self.rows.len() as f64
    }

    pub fn mean_classify_ms(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().map(|r| r.classify_ms).sum::<f64>() / self.rows.len() as f64
    }

    /// Report without timings. Two runs with the same inputs produce the
    /// same text.
    pub fn to_csv_untimed(&self) -> String {
        self.render(false)
    }

    pub fn to_csv(&self) -> String {
        self.render(true)
    }

    fn render(&self, timed: bool) -> String {
        let mut out = format!(
            "# {DETECTION_FORMAT}\n# classifier={}\n# window_s={}\n# sigma={}\n# seed={}\n# accuracy={}\n",
            self.classifier,
            self.window_s,
            self.sigma,
            self.seed,
            self.accuracy()
        );
        if timed {
            let _ = writeln!(out, "# mean_classify_ms={:.4}", self.mean_classify_ms());
        }
        out.push_str("k,scenario_id,true_class,predicted,max_abs_E");
        out.push_str(if timed { ",classify_ms\n" } else { "\n" });
        for r in &self.rows {
            let _ = write!(out, "{},{},{},{},{}", r.k, r.scenario_id, r.true_class, r.predicted, r.max_abs_feature);
            if timed {
                let _ = write!(out, ",{:.4}", r.classify_ms);
            }
            out.push('\n');
        }
        out
    }
}

/// Simulates `schedule` on the bank and classifies every window. No
/// training and no gain design happen here.
pub fn detect(
    bank: &ModelBank,
    classifier: &TrainedClassifier,
    schedule: &Schedule,
    cfg: &SimConfig,
    sigma: f64,
    epsilon: f64,
    seed: u64,
) -> Result<DetectionReport> {
    if classifier.dim() != bank.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "classifier expects {} features, bank produces {}",
            classifier.dim(),
            bank.n_features()
        )));
    }
    let windows = simulate_schedule(&bank.registry, &bank.gains, schedule, cfg, sigma, seed)?;
    let rows = windows
        .iter()
        .map(|w| {
            let start = Instant::now();
            let features = extract(&w.monitored, &w.nominal, epsilon)?;
            let predicted = classifier.predict(&features.values)?;
            let classify_ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(DetectionRow {
                k: w.k,
                scenario_id: w.scenario_id,
                true_class: w.class,
                predicted,
                max_abs_feature: features.values.iter().fold(0.0, |m, v| m.max(v.abs())),
                classify_ms,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DetectionReport {
        classifier: classifier.name().to_string(),
        window_s: cfg.window,
        sigma,
        seed,
        rows,
    })
}
