//! DE and IE when the treatment prevalence p(x) is unknown.
//!
//! Only p(z|x) and E[Y|x,z] are given. Both measures are affine in
//! p(x), so the extremes over p(x) in [0, 1] bound them exactly.
//!
//! ```bash
//! cargo run --example prevalence_bounds
//! ```

use medfx::bounds::{affine_in_px, reduction_interval};
use medfx::{fixtures, Measure};

fn main() -> medfx::Result<()> {
    let cond = fixtures::drug_conditionals()?;
    let te = cond.te();
    println!("TE = {te:.4} (does not depend on p(x))\n");

    for m in [Measure::De, Measure::Ie] {
        let a = affine_in_px(&cond, m)?;
        let r = reduction_interval(&a, te)?;
        println!("{} = {:.4} + {:.4}·p(x)", m.name(), a.intercept, a.slope);
        println!("  range over p(x): [{:.4}, {:.4}]", a.interval[0], a.interval[1]);
        println!("  TE reduced when disabled: {:.1}% to {:.1}%", 100.0 * r[0], 100.0 * r[1]);
    }

    // Sweep interior prevalences and confirm the affine form against a full joint.
    println!("\n p(x)     DE      IE");
    let de = affine_in_px(&cond, Measure::De)?;
    let ie = affine_in_px(&cond, Measure::Ie)?;
    let req = cond.request();
    for q in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let joint = cond.joint_at(q)?;
        assert!((medfx::effects::de(&joint, &req)?.value - de.at(q)).abs() < 1e-12);
        assert!((medfx::effects::ie(&joint, &req)?.value - ie.at(q)).abs() < 1e-12);
        println!(" {q:.2}  {:.4}  {:.4}", de.at(q), ie.at(q));
    }
    Ok(())
}
