//! Controllability and observability audit of the desk bank, including the
//! rank left after removing each sensor.
//!
//! cargo run --release --example rank_audit

use contingency_lab::pipeline::{build_bank, rank_report, BuildConfig};
use contingency_lab::GridSpec;

fn main() -> contingency_lab::Result<()> {
    let bank = build_bank(&GridSpec::desk(), &BuildConfig::full(7))?;
    let report = rank_report(&bank)?;
    print!("{}", report.nominal.to_text());
    let deficient = report.deficient();
    println!("{} of {} scenarios rank deficient", deficient.len(), report.scenarios.len());
    for s in deficient {
        println!("  {} {}: controllability {}, observability {}", s.scenario_id, s.class, s.controllability, s.observability);
    }
    Ok(())
}
