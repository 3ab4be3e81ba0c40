//! Generates the 960-row desk dataset, tunes KNN and SVM by grid search and
//! compares them on the same held-out rows.
//!
//! cargo run --release --example train_classifiers -- [seed]

use std::time::Instant;

use contingency_lab::learning::ModelSpec;
use contingency_lab::pipeline::{
    build_bank, generate_dataset, train_classifier, BuildConfig, ClassifierKind, DatasetPlan, TrainPlan,
};
use contingency_lab::GridSpec;

fn main() -> contingency_lab::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let bank = build_bank(&GridSpec::desk(), &BuildConfig::full(seed))?;
    let data = generate_dataset(&bank, &DatasetPlan::standard(seed))?.dataset;
    println!("dataset: {} rows, {} features", data.len(), data.dim());

    for kind in [ClassifierKind::Knn, ClassifierKind::Svm] {
        let start = Instant::now();
        let out = train_classifier(&data, &TrainPlan::standard(kind, seed))?;
        let best = match out.search.best {
            ModelSpec::Knn { k, p } => format!("k={k} p={p}"),
            ModelSpec::Svm { c, gamma } => format!("C={c} gamma={gamma}"),
        };
        println!(
            "{:?}: best {best}, cv {:.4}, held-out {:.4} on {} rows ({:.2?})",
            kind,
            out.search.best_accuracy,
            out.test.accuracy,
            out.test_rows,
            start.elapsed()
        );
        print!("{}", out.test.to_text());
    }
    Ok(())
}
