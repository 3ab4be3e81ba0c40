//! Builds the desk bank and simulates a balanced feature dataset.
//!
//! cargo run --release --example generate_dataset -- [out.csv] [per_class] [seed]

use std::time::Instant;

use contingency_lab::pipeline::{build_bank, generate_dataset, BuildConfig, DatasetPlan};
use contingency_lab::GridSpec;

fn main() -> contingency_lab::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = args.first().map(String::as_str).unwrap_or("dataset.csv");
    let per_class = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(240);
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(7);

    let bank = build_bank(&GridSpec::desk(), &BuildConfig::full(seed))?;
    let plan = DatasetPlan { per_class, ..DatasetPlan::standard(seed) };
    let start = Instant::now();
    let generated = generate_dataset(&bank, &plan)?;
    let ds = &generated.dataset;
    println!("{} rows x {} features in {:.2?}", ds.len(), ds.dim(), start.elapsed());
    for (class, count) in ds.class_counts() {
        println!("  {class:<12} {count}");
    }
    ds.write(out.as_ref())?;
    println!("wrote {out}");
    Ok(())
}
