//! Bounding DE when a binary confounder is hidden behind a proxy W.
//!
//! The direction in which E[Y|x,z,w] and E[X|z,w] move with w says
//! which side of the truth the adjusted estimate falls on. When the
//! directions are not monotone the bound is refused.
//!
//! ```bash
//! cargo run --example proxy_confounding
//! ```

use medfx::bounds::ProxyOptions;
use medfx::cli::{bound_and_truth, format_sig};
use medfx::scm::MonotoneConstraint;
use medfx::{proxy_de_bound, random_scm, Family};

fn main() -> medfx::Result<()> {
    for (label, constraint) in [
        ("opposite", Some(MonotoneConstraint::Opposite)),
        ("same", Some(MonotoneConstraint::Same)),
        ("unconstrained", None),
    ] {
        println!("== {label} ==");
        for seed in 0..3 {
            let scm = random_scm(Family::Proxy, seed, constraint)?;
            let (bound, truth) = bound_and_truth(&scm, Family::Proxy, false)?;
            let verdict = if !bound.is_determinate() {
                "no claim"
            } else if bound.holds(truth, 1e-9) {
                "holds"
            } else {
                "VIOLATED"
            };
            println!("  seed {seed}: {bound:.4}   true DE {truth:+.4}   {verdict}");
        }
    }

    // Full diagnostics for one model.
    let scm = random_scm(Family::Proxy, 0, Some(MonotoneConstraint::Opposite))?;
    let obs = scm.observational_distribution()?;
    let q = Family::Proxy.query();
    let b = proxy_de_bound(&obs, &q.exposure, "Z", "Y", "W", ProxyOptions::default())?;
    println!();
    for v in &b.diagnostics {
        println!("{}: {}", v.quantity, v.direction.name());
        for s in &v.strata {
            let means: Vec<String> = s.means.iter().map(|m| format_sig(*m)).collect();
            println!("  {:<12} {}  ({})", s.stratum.to_string(), means.join(" → "), s.direction.name());
        }
    }
    for n in &b.notes {
        println!("note: {n}");
    }
    Ok(())
}
