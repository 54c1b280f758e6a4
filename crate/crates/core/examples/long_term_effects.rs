//! Long-term indirect effects from short-term trial data.
//!
//! A trial gives TE(X,Z) on a surrogate Z. A separate observational
//! study sees Z, the long-term outcome Y and a self-reported treatment
//! W, but not X. The product of TE(X,Z) with a W-adjusted TE(Z,Y)
//! bounds IE from one side.
//!
//! ```bash
//! cargo run --example long_term_effects
//! ```

use medfx::cli::bound_and_truth;
use medfx::scm::MonotoneConstraint;
use medfx::{longterm_ie_bound, random_scm, Contrast, Family};

fn main() -> medfx::Result<()> {
    for direct_effect in [false, true] {
        let family = Family::LongTerm { direct_effect };
        println!("== {} ==", family.name());
        for seed in 0..4 {
            let c = if seed % 2 == 0 { MonotoneConstraint::Opposite } else { MonotoneConstraint::Same };
            let scm = random_scm(family, seed, Some(c))?;
            let (bound, truth) = bound_and_truth(&scm, family, false)?;
            println!(
                "  seed {seed} ({c:?}): {bound:.4}   true IE {truth:+.4}   holds: {}",
                bound.holds(truth, 1e-9)
            );
        }
    }

    // With no first-stage effect, IE is exactly zero.
    let scm = random_scm(Family::LongTerm { direct_effect: false }, 0, None)?;
    let obs = scm.observational_distribution()?.marginal(&["Z", "W", "Y"])?;
    let b = longterm_ie_bound(0.0, &obs, &Contrast::new("Z", "1", "0"), "Y", "W")?;
    println!("\nTE(X,Z) = 0: {b}");
    Ok(())
}
