//! Designs the feedback and observer gains on the nominal desk model and
//! compares the achieved spectra with the requested ones.
//!
//! cargo run --release --example place_poles -- [feedback_shift]

use contingency_lab::control::{default_feedback_poles, default_observer_poles, design_gains, PlacementOptions};
use contingency_lab::grid::build_nominal_model;
use contingency_lab::linalg::{self, C64};
use contingency_lab::spectral::eigenset_distance;
use contingency_lab::GridSpec;

fn show(label: &str, requested: &[C64], achieved: &mut [C64]) -> contingency_lab::Result<()> {
    linalg::sort_canonical(achieved);
    println!("{label}: matched distance {:.3e}", eigenset_distance(requested, achieved)?);
    for (r, a) in requested.iter().zip(achieved.iter()) {
        println!("  requested {:+.4} {:+.4}i   achieved {:+.4} {:+.4}i", r.re, r.im, a.re, a.im);
    }
    Ok(())
}

fn main() -> contingency_lab::Result<()> {
    let shift = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let nom = build_nominal_model(&GridSpec::desk())?;
    let fb = default_feedback_poles(&nom.a, shift)?;
    let ob = default_observer_poles(nom.n_states());
    let gains = design_gains(&nom, &fb, &ob, &PlacementOptions::default())?;
    println!("|K| = {:.3}, |G| = {:.3}", gains.k.norm(), gains.g.norm());
    show("eig(A + BK)", &gains.feedback_poles, &mut linalg::eigenvalues(&(&nom.a + &nom.b * &gains.k))?)?;
    show("eig(A + GC)", &gains.observer_poles, &mut linalg::eigenvalues(&(&nom.a + &gains.g * &nom.c))?)?;
    Ok(())
}
