//! Co-simulates actuator and sensor signal faults against their constant
//! matrix equivalents.
//!
//! cargo run --release --example signal_faults -- [trials]

use contingency_lab::exogenous::{equivalence_sweep, fault_scenario, EquivalenceConfig, SignalFault};
use contingency_lab::pipeline::{build_bank, BuildConfig};
use contingency_lab::spectral::{classify_by_spectra, spectral_signature, DEFAULT_TOLERANCE};
use contingency_lab::GridSpec;

fn main() -> contingency_lab::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let bank = build_bank(&GridSpec::desk(), &BuildConfig::full(7))?;
    let nominal = bank.registry.nominal();
    let reference = spectral_signature(nominal, &bank.gains)?;
    let faults = [
        SignalFault::input_loss(0),
        SignalFault::input_gain(0, 1.2),
        SignalFault::input_gain(3, 0.5),
        SignalFault::output_loss(2),
        SignalFault::output_gain(0, 1.1),
    ];
    let cfg = EquivalenceConfig::default();
    for fault in &faults {
        let scenario = fault_scenario(nominal, fault)?;
        let class = classify_by_spectra(&spectral_signature(&scenario, &bank.gains)?, &reference, DEFAULT_TOLERANCE)?;
        let report = equivalence_sweep(nominal, &bank.gains, fault, trials, 0.05, 7, &cfg)?;
        println!(
            "{:<16} class {:<12} max deviation x {:.1e}, x̂ {:.1e}, y {:.1e} over {} starts: {}",
            report.fault,
            class,
            report.max_dev_x,
            report.max_dev_xhat,
            report.max_dev_y,
            report.trials,
            if report.passed() { "equivalent" } else { "NOT equivalent" }
        );
    }
    Ok(())
}
