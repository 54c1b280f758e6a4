//! Acceptance criteria AC1–AC10, one PASS/FAIL line each.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use medfx::bounds::{affine_in_px, reduction_interval};
use medfx::cli::{bound_and_truth, BOUND_SLACK};
use medfx::effects::{self, MeasureRequest};
use medfx::scm::MonotoneConstraint;
use medfx::{
    fixtures, oracle_effect, random_scm, Contrast, Family, FiniteDistribution, Measure, VariableSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXACT: f64 = 1e-9;
/// Allowance for binary64 representation when a tolerance is met with equality.
const ULP_SLACK: f64 = 1e-12;

struct Check {
    failures: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check { failures: Vec::new() }
    }

    fn close(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        // false for NaN
        let within = (got - want).abs() <= tol + ULP_SLACK;
        if !within {
            self.failures.push(format!("{what}: got {got}, want {want} ± {tol}"));
        }
    }

    fn that(&mut self, what: &str, ok: bool) {
        if !ok {
            self.failures.push(what.to_string());
        }
    }
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn finish(c: Check, summary: String) -> Outcome {
    if c.failures.is_empty() {
        Ok(summary)
    } else {
        let shown: Vec<String> = c.failures.iter().take(3).cloned().collect();
        Err(format!("{} failure(s): {}", c.failures.len(), shown.join("; ")))
    }
}

fn request(family: Family) -> MeasureRequest {
    let q = family.query();
    MeasureRequest::new(q.exposure, q.mediator, q.outcome)
}

fn ac1() -> Outcome {
    let mut c = Check::new();
    let d = fixtures::drug_joint(0.5).map_err(|e| e.to_string())?;
    let r = fixtures::drug_request();
    let v = |res: medfx::Result<effects::EffectReport>| res.map(|e| e.value).unwrap_or(f64::NAN);
    c.close("TE", v(effects::te(&d, &r)), 0.46, EXACT);
    c.close("NDE", v(effects::nde(&d, &r)), 0.32, EXACT);
    c.close("NIE", v(effects::nie(&d, &r)), 0.035, EXACT);
    c.close("CDE(z)", v(effects::cde(&d, &r, "z1")), 0.5, EXACT);
    c.close("CDE(z̄)", v(effects::cde(&d, &r, "z0")), 0.2, EXACT);
    c.close("TDE", v(effects::tde(&d, &r)), 0.425, EXACT);
    c.close("TIE", v(effects::tie(&d, &r)), 0.14, EXACT);
    finish(c, "TE 0.46, NDE 0.32, NIE 0.035, CDE 0.5/0.2, TDE 0.425, TIE 0.14".into())
}

fn ac2() -> Outcome {
    let mut c = Check::new();
    let cond = fixtures::drug_conditionals().map_err(|e| e.to_string())?;
    let de = affine_in_px(&cond, Measure::De).map_err(|e| e.to_string())?;
    let ie = affine_in_px(&cond, Measure::Ie).map_err(|e| e.to_string())?;
    c.close("DE intercept", de.intercept, 0.32, EXACT);
    c.close("DE slope", de.slope, 0.105, EXACT);
    c.close("DE lo", de.interval[0], 0.32, EXACT);
    c.close("DE hi", de.interval[1], 0.425, EXACT);
    c.close("IE lo", ie.interval[0], 0.035, EXACT);
    c.close("IE hi", ie.interval[1], 0.14, EXACT);
    c.close("DE lo vs rounded", de.interval[0], 0.32, 0.005);
    c.close("DE hi vs rounded", de.interval[1], 0.43, 0.005);
    c.close("IE intercept", ie.intercept, 0.035, EXACT);
    c.close("IE slope", ie.slope, 0.105, EXACT);
    c.close("IE lo vs rounded", ie.interval[0], 0.04, 0.01);
    c.close("IE hi vs rounded", ie.interval[1], 0.15, 0.01);
    let te = cond.te();
    let rd = reduction_interval(&de, te).map_err(|e| e.to_string())?;
    let ri = reduction_interval(&ie, te).map_err(|e| e.to_string())?;
    c.close("DE reduction lo", rd[0], 0.07, 0.03);
    c.close("DE reduction hi", rd[1], 0.30, 0.03);
    c.close("IE reduction lo", ri[0], 0.67, 0.03);
    c.close("IE reduction hi", ri[1], 0.91, 0.03);
    finish(
        c,
        format!(
            "DE [{:.4}, {:.4}], IE [{:.4}, {:.4}], reductions [{:.3}, {:.3}] / [{:.3}, {:.3}]",
            de.interval[0], de.interval[1], ie.interval[0], ie.interval[1], rd[0], rd[1], ri[0], ri[1]
        ),
    )
}

/// Runs `f` on `n` seeded models of `family`.
fn over_models<F>(family: Family, n: u64, mut f: F) -> Result<u64, String>
where
    F: FnMut(u64, &medfx::StructuralModel, &FiniteDistribution) -> medfx::Result<()>,
{
    for seed in 0..n {
        let scm = random_scm(family, seed, None).map_err(|e| format!("seed {seed}: {e}"))?;
        let obs = scm.observational_distribution().map_err(|e| e.to_string())?;
        f(seed, &scm, &obs).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    Ok(n)
}

fn ac3() -> Outcome {
    let mut c = Check::new();
    let q = Family::Mediation.query();
    let n = over_models(Family::Mediation, 500, |seed, scm, _| {
        let te = oracle_effect(scm, Measure::Te, &q)?;
        let nde = oracle_effect(scm, Measure::Nde, &q)?;
        let nie = oracle_effect(scm, Measure::Nie, &q)?;
        let tde = oracle_effect(scm, Measure::Tde, &q)?;
        let tie = oracle_effect(scm, Measure::Tie, &q)?;
        c.close(&format!("seed {seed} TE=NDE+TIE"), nde + tie, te, EXACT);
        c.close(&format!("seed {seed} TE=TDE+NIE"), tde + nie, te, EXACT);
        Ok(())
    })?;
    finish(c, format!("{n} MEDIATION models"))
}

fn ac4() -> Outcome {
    let mut c = Check::new();
    let fd = Family::ConfoundedFrontDoor;
    let (qf, rf) = (fd.query(), request(fd));
    let n1 = over_models(fd, 500, |seed, scm, obs| {
        let ie = effects::ie(obs, &rf)?.value;
        c.close(&format!("frontdoor seed {seed}"), ie, oracle_effect(scm, Measure::Te, &qf)?, EXACT);
        Ok(())
    })?;
    let rev = Family::Reversed;
    let (qr, rr) = (rev.query(), request(rev));
    let n2 = over_models(rev, 500, |seed, scm, obs| {
        let de = effects::de(obs, &rr)?.value;
        c.close(&format!("reversed seed {seed}"), de, oracle_effect(scm, Measure::Te, &qr)?, EXACT);
        Ok(())
    })?;
    finish(c, format!("{n1} CONFOUNDED_FRONTDOOR, {n2} REVERSED models"))
}

fn random_joint(rng: &mut ChaCha8Rng) -> FiniteDistribution {
    let ky = rng.random_range(2..=4usize);
    let vars = vec![
        VariableSpec::new("X", ["0", "1"]),
        VariableSpec::new("Z", ["0", "1"]),
        VariableSpec::new("Y", (0..ky).map(|i| format!("y{i}")))
            .with_values((0..ky).map(|_| rng.random_range(-2.0..2.0)).collect()),
    ];
    let w: Vec<f64> = (0..4 * ky).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = w.iter().sum();
    FiniteDistribution::new(vars, w.iter().map(|p| p / total).collect()).expect("valid joint")
}

fn ac5() -> Outcome {
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = MeasureRequest::new(Contrast::new("X", "1", "0"), "Z", "Y");
    for i in 0..500 {
        let d = random_joint(&mut rng);
        let ie = effects::ie(&d, &r).map_err(|e| e.to_string())?.value;
        let f = effects::ie_factored(&d, &r).map_err(|e| e.to_string())?;
        c.close(&format!("joint {i}"), ie, f.product, EXACT);
        c.close(&format!("joint {i} product"), f.te_xz * f.te_zy, f.product, 0.0);
    }
    finish(c, "500 random joints".into())
}

fn ac6() -> Outcome {
    let mut c = Check::new();
    let rev = Family::Reversed;
    let (qr, rr) = (rev.query(), request(rev));
    over_models(rev, 200, |seed, scm, obs| {
        let nde = effects::nde(obs, &rr)?.value;
        c.close(
            &format!("reversed seed {seed}"),
            nde,
            oracle_effect(scm, Measure::EttUntreated, &qr)?,
            EXACT,
        );
        Ok(())
    })?;
    let fd = Family::ConfoundedFrontDoor;
    let (qf, rf) = (fd.query(), request(fd));
    over_models(fd, 200, |seed, scm, obs| {
        let nie = effects::nie(obs, &rf)?.value;
        c.close(
            &format!("frontdoor seed {seed}"),
            nie,
            oracle_effect(scm, Measure::EttUntreated, &qf)?,
            EXACT,
        );
        Ok(())
    })?;
    finish(c, "200 REVERSED (NDE), 200 CONFOUNDED_FRONTDOOR (NIE)".into())
}

/// Soundness over `n` constrained models alternating the two monotone
/// constraints and, for long-term families, the exposure designation.
fn soundness(family: Family, n: u64, c: &mut Check) -> Result<(u64, f64), String> {
    let mut determinate = 0;
    let mut worst = f64::INFINITY;
    for seed in 0..n {
        let constraint = if seed % 2 == 0 { MonotoneConstraint::Opposite } else { MonotoneConstraint::Same };
        let scm = random_scm(family, seed, Some(constraint)).map_err(|e| e.to_string())?;
        let (b, truth) = bound_and_truth(&scm, family, seed % 4 >= 2).map_err(|e| e.to_string())?;
        if b.is_determinate() {
            determinate += 1;
            let side = if b.relation == medfx::Relation::AtMost {
                b.bound_value - truth
            } else {
                truth - b.bound_value
            };
            worst = worst.min(side);
            c.that(
                &format!("{} seed {seed}: truth {truth} vs {b}", family.name()),
                b.holds(truth, BOUND_SLACK),
            );
        }
    }
    Ok((determinate, worst))
}

fn ac7() -> Outcome {
    let mut c = Check::new();
    let (det, worst) = soundness(Family::Proxy, 1000, &mut c)?;
    c.that("at least one determinate case", det > 0);
    finish(c, format!("1000 PROXY models, {det} determinate, 0 violations, min margin {worst:.3e}"))
}

fn ac8() -> Outcome {
    let mut c = Check::new();
    let (d1, w1) = soundness(Family::LongTerm { direct_effect: false }, 1000, &mut c)?;
    let (d2, w2) = soundness(Family::LongTerm { direct_effect: true }, 1000, &mut c)?;
    c.that("at least one determinate case", d1 > 0 && d2 > 0);
    finish(
        c,
        format!(
            "1000+1000 LONGTERM models ({d1}/{d2} determinate), 0 violations, min margin {:.3e}",
            w1.min(w2)
        ),
    )
}

fn ac9() -> Outcome {
    let mut c = Check::new();
    let m = Family::Mediation;
    let (q, r) = (m.query(), request(m));
    let n = over_models(m, 200, |seed, scm, obs| {
        let piie = effects::piie(obs, &r)?.value;
        c.close(&format!("seed {seed}"), piie, oracle_effect(scm, Measure::Piie, &q)?, EXACT);
        Ok(())
    })?;
    finish(c, format!("{n} MEDIATION models"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn ac10() -> Outcome {
    let mut c = Check::new();
    let tmp = std::env::temp_dir().join(format!("medfx-ac10-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).map_err(|e| e.to_string())?;
    let est = tmp.join("est.json");
    let f = |n: &str| fixture(n).display().to_string();
    let commands: Vec<Vec<String>> = vec![
        vec!["effects".into(), f("drug.json"), "--exposure".into(), "X=x1/x0".into()],
        vec!["effects".into(), f("drug_scm.json"), "--exposure".into(), "X=x0/x1".into()],
        vec![
            "bounds-px".into(),
            f("drug_conditionals.json"),
            "--exposure".into(),
            "X=x1/x0".into(),
            "--te".into(),
            "0.46".into(),
        ],
        vec!["bounds-proxy".into(), f("proxy_opposite.json"), "--exposure".into(), "X=1/0".into()],
        vec!["bounds-proxy".into(), f("proxy_neither.json"), "--exposure".into(), "X=1/0".into()],
        vec![
            "bounds-longterm".into(),
            f("longterm_opposite.json"),
            "--te-xz".into(),
            "0.25".into(),
            "--mediator".into(),
            "Z=1/0".into(),
        ],
        vec![
            "oracle".into(),
            f("drug_scm.json"),
            "--exposure".into(),
            "X=x1/x0".into(),
            "--measure".into(),
            "NIE".into(),
        ],
        vec!["oracle".into(), f("drug_scm.json"), "--term".into(), "Y_{X=x0,Z=Z_{X=x1}}".into()],
        vec![
            "estimate".into(),
            f("drug_records.csv"),
            "--schema".into(),
            f("drug_schema.json"),
            "--alpha".into(),
            "1".into(),
            "-o".into(),
            est.display().to_string(),
        ],
        vec!["validate".into(), f("drug.json")],
        vec!["effects".into(), f("empty_stratum.json"), "--exposure".into(), "X=x1/x0".into()],
    ];
    for args in &commands {
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_medfx"))
                .arg("--json")
                .args(args)
                .output()
                .map_err(|e| e.to_string())
        };
        let (a, b) = (run()?, run()?);
        let label = args[0].clone();
        c.that(&format!("{label}: stdout differs"), a.stdout == b.stdout);
        c.that(&format!("{label}: exit status differs"), a.status.code() == b.status.code());
        let expect_ok = !args[1].ends_with("empty_stratum.json");
        c.that(
            &format!("{label}: unexpected status {:?}", a.status.code()),
            (a.status.code() == Some(0)) == expect_ok,
        );
    }
    let _ = std::fs::remove_dir_all(&tmp);
    finish(c, format!("{} commands run twice, byte-identical --json output", commands.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("AC1 drug-example regression", ac1, Some(Duration::from_secs(1))),
        ("AC2 affine bounds regression", ac2, Some(Duration::from_secs(1))),
        ("AC3 decomposition identities", ac3, Some(Duration::from_secs(30))),
        ("AC4 front-door/adjustment oracle equivalence", ac4, Some(Duration::from_secs(60))),
        ("AC5 factorization identity", ac5, None),
        ("AC6 ETT correspondence", ac6, None),
        ("AC7 proxy-bound soundness", ac7, Some(Duration::from_secs(300))),
        ("AC8 long-term-bound soundness", ac8, Some(Duration::from_secs(300))),
        ("AC9 PIIE oracle equivalence", ac9, None),
        ("AC10 CLI determinism", ac10, None),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let late = limit.is_some_and(|l| elapsed > l);
        let budget = limit.map_or(String::new(), |l| format!(" (limit {}s)", l.as_secs()));
        match (&outcome, late) {
            (Ok(msg), false) => println!("PASS {name}: {msg} [{:.3}s{budget}]", elapsed.as_secs_f64()),
            (Ok(msg), true) => {
                failed += 1;
                println!("FAIL {name}: {msg} but took {:.3}s{budget}", elapsed.as_secs_f64());
            }
            (Err(msg), _) => {
                failed += 1;
                println!("FAIL {name}: {msg} [{:.3}s{budget}]", elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 10 acceptance criteria passed");
}
