//! Simulates one observation window for a chosen scenario next to its
//! noise-free nominal reference and prints the resulting features.
//!
//! cargo run --release --example simulate_window -- [scenario_id] [sigma] [trace.csv]

use contingency_lab::features::{extract, DEFAULT_EPSILON};
use contingency_lab::pipeline::{build_bank, BuildConfig};
use contingency_lab::seed::{self, Stream};
use contingency_lab::sim::{excitation, nominal_reference, simulate_window, SimConfig};
use contingency_lab::GridSpec;

fn main() -> contingency_lab::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let id = args.first().and_then(|s| s.parse().ok()).unwrap_or(70);
    let sigma = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1e-3);
    let bank = build_bank(&GridSpec::desk(), &BuildConfig::full(7))?;
    let cfg = SimConfig::default();

    let x0 = excitation(bank.n_states(), cfg.excitation, cfg.excitation_shape, &mut seed::child_rng(7, Stream::Excitation, 0));
    let monitored = simulate_window(&bank.closed_loop(id, sigma)?, &x0, None, &cfg, 1)?;
    let reference = nominal_reference(&bank.closed_loop(0, 0.0)?, &x0, None, &cfg)?;
    let features = extract(&monitored, &reference, DEFAULT_EPSILON)?;

    let scenario = bank.registry.get(id)?;
    println!("scenario {id} ({}, {}), sigma {sigma}, {} samples", scenario.class, scenario.description, monitored.n_samples());
    for (name, e) in monitored.column_names().iter().zip(&features.values) {
        println!("  E[{name:<7}] = {e:9.3}");
    }
    if let Some(path) = args.get(2) {
        std::fs::write(path, monitored.to_csv()).map_err(|e| contingency_lab::Error::Io { path: path.into(), source: e })?;
        println!("trace -> {path}");
    }
    Ok(())
}
