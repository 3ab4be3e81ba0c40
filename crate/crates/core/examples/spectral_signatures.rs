//! Classifies every scenario of the desk bank from its closed-loop spectra
//! alone and prints the distances to the nominal eigenvalue sets.
//!
//! cargo run --release --example spectral_signatures -- [tolerance]

use contingency_lab::pipeline::{build_bank, BuildConfig};
use contingency_lab::spectral::{spectra_report, DEFAULT_TOLERANCE};
use contingency_lab::GridSpec;

fn main() -> contingency_lab::Result<()> {
    let tol = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_TOLERANCE);
    let bank = build_bank(&GridSpec::desk(), &BuildConfig::full(7))?;
    let report = spectra_report(&bank.registry, &bank.gains, tol)?;
    println!("{:>3} {:<12} {:<12} {:>10} {:>10}  description", "id", "declared", "spectral", "d1", "d2");
    for r in &report.rows {
        println!("{:>3} {:<12} {:<12} {:>10.3e} {:>10.3e}  {}", r.scenario_id, r.declared, r.spectral, r.d1, r.d2, r.description);
    }
    println!("agreement {:.3} at tolerance {tol:e}", report.agreement());
    Ok(())
}
