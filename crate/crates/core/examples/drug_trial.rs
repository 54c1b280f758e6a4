//! Every effect measure on a small drug trial.
//!
//! Treatment X acts on recovery Y both directly and through a side
//! effect Z. With p(x) known the joint is fully specified, so all
//! measures are point identified.
//!
//! ```bash
//! cargo run --example drug_trial
//! ```

use medfx::cli::format_sig;
use medfx::effects::{self, MeasureRequest};
use medfx::{fixtures, Contrast};

fn main() -> medfx::Result<()> {
    let joint = fixtures::drug_joint(0.5)?;
    let req = MeasureRequest::new(Contrast::new("X", "x1", "x0"), "Z", "Y");

    for report in effects::all_effects(&joint, &req)? {
        let name = match &report.level {
            Some(z) => format!("{}({z})", report.measure.name()),
            None => report.measure.name().to_string(),
        };
        println!("{name:<10} {:>9}   {}", format_sig(report.value), report.formula);
    }

    // The indirect effect factors into two total effects.
    let f = effects::ie_factored(&joint, &req)?;
    println!("\nIE = TE(X,Z) * TE(Z,Y) = {:.4} * {:.4} = {:.4}", f.te_xz, f.te_zy, f.product);

    // Reversing the contrast negates TE, DE and IE, and swaps natural with total.
    let back = req.swapped();
    println!(
        "reversed: TE {:.4}, NDE {:.4} (= -TDE), NIE {:.4} (= -TIE)",
        effects::te(&joint, &back)?.value,
        effects::nde(&joint, &back)?.value,
        effects::nie(&joint, &back)?.value,
    );
    Ok(())
}
