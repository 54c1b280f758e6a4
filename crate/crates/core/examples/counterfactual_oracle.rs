//! Ground truth from a structural model.
//!
//! The oracle enumerates exogenous states exactly, so nested
//! counterfactuals like Y_{x, Z_{x'}} are evaluated without sampling.
//! Comparing it with the observational formulas shows which are
//! identified in which graphs.
//!
//! ```bash
//! cargo run --example counterfactual_oracle
//! ```

use medfx::effects::{self, MeasureRequest};
use medfx::scm::CounterfactualTerm;
use medfx::{fixtures, oracle_effect, random_scm, Family, Measure, OracleQuery};

fn main() -> medfx::Result<()> {
    let scm = fixtures::drug_scm(0.5)?;

    let term: CounterfactualTerm = "Y_{X=x0,Z=Z_{X=x1}}".parse()?;
    println!("E[{term}] = {:.4}", scm.counterfactual_mean(&term)?);

    let q = OracleQuery::new(medfx::Contrast::new("X", "x1", "x0"), "Z", "Y");
    for m in [Measure::Te, Measure::Nde, Measure::Nie, Measure::Piie, Measure::EttUntreated] {
        println!("{:<14} {:.4}", m.name(), oracle_effect(&scm, m, &q)?);
    }

    // In a confounded front-door graph IE still recovers TE.
    println!("\nfamily                 formula          oracle");
    for (family, measure, f) in [
        (Family::ConfoundedFrontDoor, "IE", effects::ie as fn(&_, &_) -> _),
        (Family::Reversed, "DE", effects::de),
    ] {
        let q = family.query();
        let req = MeasureRequest::new(q.exposure.clone(), q.mediator.clone(), q.outcome.clone());
        for seed in 0..3 {
            let m = random_scm(family, seed, None)?;
            let obs = m.observational_distribution()?;
            println!(
                "{:<22} {measure} {:>+.6}   TE {:>+.6}",
                family.name(),
                f(&obs, &req)?.value,
                oracle_effect(&m, Measure::Te, &q)?
            );
        }
    }
    Ok(())
}
