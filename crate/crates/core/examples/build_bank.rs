//! Builds the desk grid's scenario bank and prints the nominal model and a
//! few scenarios from each class.
//!
//! cargo run --release --example build_bank -- [grid.toml] [seed]

use contingency_lab::linalg;
use contingency_lab::pipeline::{build_bank, BuildConfig};
use contingency_lab::{ContingencyClass, GridSpec};

fn main() -> contingency_lab::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let grid = match args.first() {
        Some(p) => GridSpec::from_file(p)?,
        None => GridSpec::desk(),
    };
    let seed = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let bank = build_bank(&grid, &BuildConfig::full(seed))?;
    let nom = bank.registry.nominal();
    println!(
        "{}: {} buses, {} lines, n={} q={} r={}",
        if grid.name.is_empty() { "grid" } else { &grid.name },
        grid.buses.len(),
        grid.lines.len(),
        nom.n_states(),
        nom.n_inputs(),
        nom.n_outputs()
    );
    let mut eig = linalg::eigenvalues(&nom.a)?;
    linalg::sort_canonical(&mut eig);
    println!("open-loop eigenvalues:");
    for z in &eig {
        println!("  {:+.4} {:+.4}i", z.re, z.im);
    }
    let [n, p, c, m] = bank.registry.counts();
    println!("{} scenarios: normal {n}, physical {p}, control {c}, measurement {m}", bank.registry.len());
    for class in ContingencyClass::ALL {
        for id in bank.registry.admissible_ids(class).into_iter().take(3) {
            let s = bank.registry.get(id)?;
            println!("  {:>3} {:<12} {}", s.id, s.class, s.description);
        }
    }
    Ok(())
}
