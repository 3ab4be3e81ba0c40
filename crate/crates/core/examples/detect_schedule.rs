//! Trains a KNN detector offline, then classifies every window of a random
//! switching schedule.
//!
//! cargo run --release --example detect_schedule -- [intervals] [seed]

use contingency_lab::features::DEFAULT_EPSILON;
use contingency_lab::pipeline::{
    build_bank, detect, generate_dataset, train_classifier, BuildConfig, ClassifierKind, DatasetPlan, TrainPlan,
};
use contingency_lab::sim::{Schedule, SimConfig};
use contingency_lab::GridSpec;

fn main() -> contingency_lab::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let intervals = args.first().and_then(|s| s.parse().ok()).unwrap_or(100);
    let seed = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let bank = build_bank(&GridSpec::desk(), &BuildConfig::full(7))?;
    let data = generate_dataset(&bank, &DatasetPlan::standard(7))?.dataset;
    let trained = train_classifier(&data, &TrainPlan::standard(ClassifierKind::Knn, 7))?;

    let cfg = SimConfig::default();
    let schedule = Schedule::random(&bank.registry, intervals, cfg.switching_interval, seed)?;
    let report = detect(&bank, &trained.classifier, &schedule, &cfg, 1e-3, DEFAULT_EPSILON, seed)?;
    for r in report.rows.iter().filter(|r| r.true_class != r.predicted) {
        println!("window {:>3}: scenario {:>2} is {} but predicted {}", r.k, r.scenario_id, r.true_class, r.predicted);
    }
    println!(
        "{} windows, accuracy {:.3}, mean classify {:.3} ms",
        report.rows.len(),
        report.accuracy(),
        report.mean_classify_ms()
    );
    Ok(())
}
