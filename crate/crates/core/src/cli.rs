//! Command-line surface. [`execute`] runs one invocation and returns its exit
//! code and output, so the binary is a thin wrapper.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bounds::{
    affine_in_px, longterm_ie_bound, longterm_verdicts, opposite_indicator, proxy_de_bound, proxy_verdicts,
    reduction_interval, AffineEffect, BoundResult, Direction, ProxyOptions, Relation,
};
use crate::dist::{FiniteDistribution, Violation};
use crate::effects::{self, EffectReport, FactoredIe, MeasureRequest};
use crate::error::{Error, Result};
use crate::ingest;
use crate::measure::{Contrast, Measure};
use crate::scm::{
    oracle_effect, random_scm, CounterfactualTerm, Family, MonotoneConstraint, OracleQuery, StructuralModel,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "medfx", version, about = "Direct and indirect effects for discrete mediation models")]
struct Cli {
    /// Emit the full report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Exit with status 3 when every bound is indeterminate.
    #[arg(long, global = true)]
    require_determinate: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Roles {
    /// Exposure contrast, treated level first: `X=x1/x0`.
    #[arg(long)]
    exposure: Contrast,
    #[arg(long, default_value = "Z")]
    mediator: String,
    #[arg(long, default_value = "Y")]
    outcome: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Every identification formula on a distribution or structural model.
    Effects {
        /// Distribution JSON (joint or factored) or structural-model JSON.
        input: PathBuf,
        #[command(flatten)]
        roles: Roles,
    },
    /// DE and IE as affine functions of an unknown p(x).
    BoundsPx {
        /// Conditionals p(Z|X), p(Y|X,Z); p(X) may be absent.
        input: PathBuf,
        #[command(flatten)]
        roles: Roles,
        /// Total effect for relative-reduction intervals.
        #[arg(long)]
        te: Option<f64>,
    },
    /// Bound on DE using a proxy W of a latent confounder.
    BoundsProxy {
        /// Distribution over X, W, Z, Y.
        input: PathBuf,
        #[command(flatten)]
        roles: Roles,
        #[arg(long, default_value = "W")]
        proxy: String,
        /// Accept proxies with more than two ordered levels.
        #[arg(long)]
        allow_nonbinary_proxy: bool,
    },
    /// Bound on IE from an experimental TE(X,Z) and observational (W, Z, Y).
    BoundsLongterm {
        /// Distribution over W, Z, Y.
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        te_xz: f64,
        /// Mediator contrast, `Z=z1/z0`.
        #[arg(long)]
        mediator: Contrast,
        #[arg(long, default_value = "Y")]
        outcome: String,
        #[arg(long, default_value = "W")]
        proxy: String,
    },
    /// Ground truth from a structural model.
    Oracle {
        model: PathBuf,
        /// Exposure contrast; required with --measure.
        #[arg(long, required_unless_present = "term")]
        exposure: Option<Contrast>,
        #[arg(long, conflicts_with = "term", required_unless_present = "term")]
        measure: Option<Measure>,
        /// Counterfactual mean, e.g. `Y_{X=x0,Z=Z_{X=x1}}`.
        #[arg(long)]
        term: Option<CounterfactualTerm>,
        #[arg(long, default_value = "Z")]
        mediator: String,
        #[arg(long, default_value = "Y")]
        outcome: String,
        /// Mediator level for CDE and the mediator contrast.
        #[arg(long)]
        mediator_level: Option<String>,
        /// Latent confounder for DE_TRUE.
        #[arg(long)]
        confounder: Option<String>,
    },
    /// Estimate a joint distribution from CSV records.
    Estimate {
        records: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Check a distribution or structural-model file.
    Validate { input: PathBuf },
    #[command(hide = true, subcommand)]
    Dev(Dev),
}

#[derive(Debug, Subcommand)]
enum Dev {
    /// Write generated bound fixtures into a directory.
    Fixtures { out: PathBuf },
    /// Count bound violations over seeded random models.
    Soundness {
        family: Family,
        #[arg(long, default_value_t = 1000)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct Versions {
    medfx: &'static str,
    report_format: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Item {
    Effect(EffectReport),
    IeFactored(FactoredIe),
    Affine(AffineEffect),
    TotalEffect { value: f64 },
    Reduction { measure: Measure, te: f64, interval: [f64; 2] },
    Bound(BoundResult),
    Oracle { quantity: String, value: f64 },
    Validation { valid: bool, variables: Vec<String>, violations: Vec<String> },
    Estimate { output: String, sha256: String, rows: usize, total_weight: u64, alpha: f64 },
    Soundness { family: String, models: u64, determinate: u64, violations: u64, worst_slack: f64 },
    Fixture { path: String, sha256: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct RunReport {
    command: Vec<String>,
    inputs: Vec<InputDigest>,
    results: Vec<Item>,
    warnings: Vec<String>,
    versions: Versions,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Run {
    inputs: Vec<InputDigest>,
    results: Vec<Item>,
    warnings: Vec<String>,
}

impl Run {
    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path)
            .map_err(|e| Error::Parse { path: path.display().to_string(), message: e.to_string() })?;
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256: digest(&bytes) });
        String::from_utf8(bytes)
            .map_err(|_| Error::Parse { path: path.display().to_string(), message: "not valid UTF-8".into() })
    }
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn is_scm(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text).map(|v| v.get("exogenous").is_some()).unwrap_or(false)
}

fn origin(path: &Path) -> String {
    path.display().to_string()
}

fn load_joint(run: &mut Run, path: &Path) -> Result<FiniteDistribution> {
    let text = run.read(path)?;
    if is_scm(&text) {
        ingest::parse_scm(&text, &origin(path))?.observational_distribution()
    } else {
        ingest::parse_distribution(&text, &origin(path))
    }
}

fn load_model(run: &mut Run, path: &Path) -> Result<StructuralModel> {
    let text = run.read(path)?;
    ingest::parse_scm(&text, &origin(path))
}

/// Runs one command line (including the program name).
pub fn execute<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            };
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let mut run = Run { inputs: Vec::new(), results: Vec::new(), warnings: Vec::new() };
    let status = dispatch(&cli.command, &mut run);
    let report = RunReport {
        command: echo,
        inputs: run.inputs,
        results: run.results,
        warnings: run.warnings,
        versions: Versions { medfx: env!("CARGO_PKG_VERSION"), report_format: 1 },
    };
    let mut code = match &status {
        Ok(()) => EXIT_OK,
        Err(_) => EXIT_INPUT,
    };
    let bounds: Vec<&BoundResult> = report
        .results
        .iter()
        .filter_map(|i| match i {
            Item::Bound(b) => Some(b),
            _ => None,
        })
        .collect();
    let mut stderr = String::new();
    if code == EXIT_OK
        && cli.require_determinate
        && !bounds.is_empty()
        && bounds.iter().all(|b| !b.is_determinate())
    {
        code = EXIT_INDETERMINATE;
        stderr.push_str("error: every bound is indeterminate\n");
    }
    if let Err(e) = &status {
        stderr.push_str(&format!("error: {e}\n"));
    }
    if status.is_err() && report.results.is_empty() {
        return Outcome { code, stdout: String::new(), stderr };
    }
    let stdout = if cli.json {
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        render_text(&report)
    };
    Outcome { code, stdout, stderr }
}

fn dispatch(command: &Command, run: &mut Run) -> Result<()> {
    match command {
        Command::Effects { input, roles } => {
            let dist = load_joint(run, input)?;
            let req = MeasureRequest::new(roles.exposure.clone(), &roles.mediator, &roles.outcome);
            for r in effects::all_effects(&dist, &req)? {
                run.results.push(Item::Effect(r));
            }
            if dist.variable(&roles.mediator)?.is_binary() {
                run.results.push(Item::IeFactored(effects::ie_factored(&dist, &req)?));
            }
        }
        Command::BoundsPx { input, roles, te } => {
            let text = run.read(input)?;
            let cond = ingest::parse_conditionals(
                &text,
                &origin(input),
                &roles.exposure,
                &roles.mediator,
                &roles.outcome,
            )?;
            let de = affine_in_px(&cond, Measure::De)?;
            let ie = affine_in_px(&cond, Measure::Ie)?;
            run.results.push(Item::TotalEffect { value: cond.te() });
            run.results.push(Item::Affine(de));
            run.results.push(Item::Affine(ie));
            if let Some(te) = *te {
                for a in [de, ie] {
                    run.results.push(Item::Reduction {
                        measure: a.measure,
                        te,
                        interval: reduction_interval(&a, te)?,
                    });
                }
            }
        }
        Command::BoundsProxy { input, roles, proxy, allow_nonbinary_proxy } => {
            let dist = load_joint(run, input)?;
            let b = proxy_de_bound(
                &dist,
                &roles.exposure,
                &roles.mediator,
                &roles.outcome,
                proxy,
                ProxyOptions { allow_nonbinary_proxy: *allow_nonbinary_proxy },
            )?;
            run.warnings.extend(b.notes.iter().filter(|n| n.starts_with("WARNING")).cloned());
            run.results.push(Item::Bound(b));
        }
        Command::BoundsLongterm { input, te_xz, mediator, outcome, proxy } => {
            let dist = load_joint(run, input)?;
            run.results.push(Item::Bound(longterm_ie_bound(*te_xz, &dist, mediator, outcome, proxy)?));
        }
        Command::Oracle { model, exposure, measure, term, mediator, outcome, mediator_level, confounder } => {
            let scm = load_model(run, model)?;
            if let Some(term) = term {
                let value = scm.counterfactual_mean(term)?;
                run.results.push(Item::Oracle { quantity: format!("E[{term}]"), value });
            } else if let (Some(exposure), Some(measure)) = (exposure, measure) {
                let mut q = OracleQuery::new(exposure.clone(), mediator, outcome);
                if let Some(l) = mediator_level {
                    q = q.with_mediator_level(l);
                }
                if let Some(c) = confounder {
                    q = q.with_confounder(c);
                }
                let value = oracle_effect(&scm, *measure, &q)?;
                run.results.push(Item::Oracle { quantity: measure.to_string(), value });
            }
        }
        Command::Estimate { records, schema, alpha, output } => {
            let schema_text = run.read(schema)?;
            let specs: Vec<crate::dist::VariableSpec> =
                serde_json::from_str::<serde_json::Value>(&schema_text)
                    .ok()
                    .and_then(|v| v.get("variables").cloned())
                    .and_then(|v| serde_json::from_value(v).ok())
                    .ok_or_else(|| Error::Parse {
                        path: origin(schema),
                        message: "expected {\"variables\": [...]}".into(),
                    })?;
            let csv = run.read(records)?;
            let batch = ingest::RecordBatch::from_csv(csv.as_bytes(), specs, &origin(records))?;
            let dist = ingest::estimate_joint(&batch, *alpha)?;
            let json = ingest::distribution_to_json(&dist)?;
            fs::write(output, &json)?;
            run.results.push(Item::Estimate {
                output: origin(output),
                sha256: digest(json.as_bytes()),
                rows: batch.len(),
                total_weight: batch.total_weight(),
                alpha: *alpha,
            });
        }
        Command::Validate { input } => {
            let text = run.read(input)?;
            let parsed = if is_scm(&text) {
                ingest::parse_scm(&text, &origin(input))
                    .map(|m| m.endogenous_names().iter().map(|s| s.to_string()).collect())
            } else {
                ingest::parse_distribution(&text, &origin(input))
                    .map(|d| d.variables().iter().map(|v| v.name.clone()).collect())
            };
            match parsed {
                Ok(variables) => {
                    run.results.push(Item::Validation { valid: true, variables, violations: vec![] })
                }
                Err(e) => {
                    let violations = match &e {
                        Error::InvalidDistribution(list) => list.iter().map(Violation::to_string).collect(),
                        other => vec![other.to_string()],
                    };
                    run.results.push(Item::Validation { valid: false, variables: vec![], violations });
                    return Err(e);
                }
            }
        }
        Command::Dev(Dev::Fixtures { out }) => write_fixtures(run, out)?,
        Command::Dev(Dev::Soundness { family, count, seed }) => {
            let base = seed_override().unwrap_or(*seed);
            run.results.push(soundness(*family, base, *count)?);
        }
    }
    Ok(())
}

fn seed_override() -> Option<u64> {
    std::env::var("MEDFX_SEED").ok().and_then(|s| s.trim().parse().ok())
}

/// One-sided slack for bound checks.
pub const BOUND_SLACK: f64 = 1e-9;

/// Checks the bound for `family` on `count` constrained models, alternating
/// the opposite and same constraints. Returns the tally.
pub fn soundness_tally(family: Family, base_seed: u64, count: u64) -> Result<(u64, u64, f64)> {
    let (mut determinate, mut violations, mut worst) = (0, 0, f64::INFINITY);
    for i in 0..count {
        let constraint = if i % 2 == 0 { MonotoneConstraint::Opposite } else { MonotoneConstraint::Same };
        let scm = random_scm(family, base_seed.wrapping_add(i), Some(constraint))?;
        let (b, truth) = bound_and_truth(&scm, family, i % 4 >= 2)?;
        if b.is_determinate() {
            determinate += 1;
            let slack = match b.relation {
                Relation::AtLeast => truth - b.bound_value,
                Relation::AtMost => b.bound_value - truth,
                _ => -(truth - b.bound_value).abs(),
            };
            worst = worst.min(slack);
            if !b.holds(truth, BOUND_SLACK) {
                violations += 1;
            }
        }
    }
    Ok((determinate, violations, worst))
}

/// The bound computed from the model's observables and the oracle truth it
/// targets. For long-term families `swap` reverses the exposure contrast.
pub fn bound_and_truth(scm: &StructuralModel, family: Family, swap: bool) -> Result<(BoundResult, f64)> {
    let mut q = family.query();
    if swap {
        q.exposure = q.exposure.swapped();
    }
    let obs = scm.observational_distribution()?;
    match family {
        Family::Proxy => {
            let b = proxy_de_bound(&obs, &q.exposure, "Z", "Y", "W", ProxyOptions::default())?;
            Ok((b, oracle_effect(scm, Measure::DeTrue, &q)?))
        }
        Family::LongTerm { .. } => {
            let te_xz = oracle_effect(scm, Measure::TeXz, &q)?;
            let wzy = obs.marginal(&["Z", "W", "Y"])?;
            let b = longterm_ie_bound(te_xz, &wzy, &Contrast::new("Z", "1", "0"), "Y", "W")?;
            Ok((b, oracle_effect(scm, Measure::IeTrue, &q)?))
        }
        other => Err(Error::Usage(format!("family {} has no bound", other.name()))),
    }
}

fn soundness(family: Family, base: u64, count: u64) -> Result<Item> {
    let (determinate, violations, worst) = soundness_tally(family, base, count)?;
    Ok(Item::Soundness {
        family: family.name().to_string(),
        models: count,
        determinate,
        violations,
        worst_slack: if worst.is_finite() { worst } else { 0.0 },
    })
}

/// First seed (from `start`) whose unconstrained model has the requested
/// aggregate verdict shape: `None` for a failing verdict.
fn find_seed(family: Family, start: u64, want: Option<bool>) -> Result<StructuralModel> {
    for seed in start..start + 10_000 {
        let scm = random_scm(family, seed, None)?;
        let obs = scm.observational_distribution()?;
        let q = family.query();
        let (a, b) = match family {
            Family::Proxy => proxy_verdicts(&obs, &q.exposure, "Z", "Y", "W")?,
            _ => longterm_verdicts(&obs, &Contrast::new("Z", "1", "0"), "Y", "W")?,
        };
        let indicator = opposite_indicator(&a, &b);
        let neither = a.direction == Direction::Neither || b.direction == Direction::Neither;
        if indicator == want && (want.is_some() || neither) {
            return Ok(scm);
        }
    }
    Err(Error::RejectionBudgetExceeded {
        family: family.name().into(),
        constraint: "fixture".into(),
        attempts: 10_000,
    })
}

fn write_fixtures(run: &mut Run, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let start = seed_override().unwrap_or(0);
    let mut emit = |name: &str, text: String| -> Result<()> {
        let path = out.join(name);
        fs::write(&path, &text)?;
        run.results.push(Item::Fixture { path: name.to_string(), sha256: digest(text.as_bytes()) });
        Ok(())
    };
    emit("drug_scm.json", ingest::scm_to_json(&crate::fixtures::drug_scm(0.5)?)?)?;
    let drug = crate::fixtures::drug_scm(0.5)?;
    let schema = drug.observational_distribution()?.variables().to_vec();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
    let cards: Vec<usize> = schema.iter().map(|s| s.cardinality()).collect();
    let mut tallies = vec![0u64; cards.iter().product()];
    for row in drug.sample(&mut rng, 10_000) {
        tallies[crate::dist::encode(&row, &cards)] += 1;
    }
    let mut rows = Vec::new();
    let mut levels = vec![0; cards.len()];
    for i in 0..tallies.len() {
        crate::dist::decode(i, &cards, &mut levels);
        rows.push(levels.clone());
    }
    let batch = ingest::RecordBatch::new(schema.clone(), rows, Some(tallies))?;
    emit("drug_records.csv", batch.to_csv()?)?;
    emit("drug_schema.json", ingest::schema_to_json(&schema)?)?;
    let longterm = Family::LongTerm { direct_effect: false };
    let cases = [
        ("proxy_opposite", Family::Proxy, Some(true)),
        ("proxy_same", Family::Proxy, Some(false)),
        ("proxy_neither", Family::Proxy, None),
        ("longterm_opposite", longterm, Some(true)),
        ("longterm_neither", longterm, None),
    ];
    for (name, family, want) in cases {
        let scm = find_seed(family, start, want)?;
        let obs = scm.observational_distribution()?;
        let q = family.query();
        let data = match family {
            Family::Proxy => obs,
            _ => obs.marginal(&["Z", "W", "Y"])?,
        };
        emit(&format!("{name}.json"), ingest::distribution_to_json(&data)?)?;
        emit(&format!("{name}_scm.json"), ingest::scm_to_json(&scm)?)?;
        let truth = match family {
            Family::Proxy => serde_json::json!({
                "DE_TRUE": oracle_effect(&scm, Measure::DeTrue, &q)?,
            }),
            _ => serde_json::json!({
                "TE_XZ": oracle_effect(&scm, Measure::TeXz, &q)?,
                "IE_TRUE": oracle_effect(&scm, Measure::IeTrue, &q)?,
            }),
        };
        emit(&format!("{name}_truth.json"), serde_json::to_string_pretty(&truth)? + "\n")?;
    }
    Ok(())
}

/// Magnitudes below this print as 0 in text mode; JSON keeps full precision.
const TEXT_ZERO: f64 = 1e-12;

/// Six significant digits, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if x.abs() < TEXT_ZERO || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&magnitude) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn interval(i: [f64; 2]) -> String {
    format!("[{}, {}]", format_sig(i[0]), format_sig(i[1]))
}

fn render_bound(b: &BoundResult, out: &mut String) {
    let ind = |v: Option<bool>| v.map_or("undefined".to_string(), |b| u8::from(b).to_string());
    match b.relation {
        Relation::Indeterminate => out.push_str(&format!(
            "{}: indeterminate (adjusted value {})\n",
            b.target,
            format_sig(b.bound_value)
        )),
        r => out.push_str(&format!("{} {} {}\n", b.target, r.symbol(), format_sig(b.bound_value))),
    }
    out.push_str(&format!("  1_≠ = {}", ind(b.indicator_opposite)));
    if let Some(v) = b.indicator_nonnegative {
        out.push_str(&format!(", 1_≥ = {}", u8::from(v)));
    }
    out.push('\n');
    for v in &b.diagnostics {
        out.push_str(&format!("  {}: {}\n", v.quantity, v.direction));
        for s in &v.strata {
            let means: Vec<String> = s.means.iter().map(|m| format_sig(*m)).collect();
            out.push_str(&format!("    {} {} ({})\n", s.stratum, means.join(" → "), s.direction));
        }
    }
    for n in &b.notes {
        out.push_str(&format!("  note: {n}\n"));
    }
}

fn render_text(report: &RunReport) -> String {
    let mut out = format!("medfx {}\n", report.command.join(" "));
    for i in &report.inputs {
        out.push_str(&format!("input {} sha256:{}\n", i.path, i.sha256));
    }
    for item in &report.results {
        match item {
            Item::Effect(e) => {
                let name = match &e.level {
                    Some(l) => format!("{}({l})", e.measure),
                    None => e.measure.to_string(),
                };
                out.push_str(&format!("{name:<10} {:>12}   {}\n", format_sig(e.value), e.formula));
            }
            Item::IeFactored(f) => out.push_str(&format!(
                "IE = TE(X,Z)·TE(Z,Y) = {} · {} = {}\n",
                format_sig(f.te_xz),
                format_sig(f.te_zy),
                format_sig(f.product)
            )),
            Item::Affine(a) => out.push_str(&format!(
                "{} = {} + {}·{}  over [0, 1]: {}\n",
                a.measure,
                format_sig(a.intercept),
                format_sig(a.slope),
                a.parameter,
                interval(a.interval)
            )),
            Item::TotalEffect { value } => out.push_str(&format!("TE = {}\n", format_sig(*value))),
            Item::Reduction { measure, te, interval: i } => out.push_str(&format!(
                "1 − {measure}/TE with TE = {}: {}\n",
                format_sig(*te),
                interval(*i)
            )),
            Item::Bound(b) => render_bound(b, &mut out),
            Item::Oracle { quantity, value } => out.push_str(&format!("{quantity} = {}\n", format_sig(*value))),
            Item::Validation { valid, variables, violations } => {
                if *valid {
                    out.push_str(&format!("valid: {}\n", variables.join(", ")));
                } else {
                    out.push_str("invalid:\n");
                    for v in violations {
                        out.push_str(&format!("  {v}\n"));
                    }
                }
            }
            Item::Estimate { output, rows, total_weight, alpha, .. } => out.push_str(&format!(
                "wrote {output} from {rows} rows (weight {total_weight}, α = {})\n",
                format_sig(*alpha)
            )),
            Item::Soundness { family, models, determinate, violations, worst_slack } => out.push_str(&format!(
                "{family}: {models} models, {determinate} determinate, {violations} violations, min slack {}\n",
                format_sig(*worst_slack)
            )),
            Item::Fixture { path, .. } => out.push_str(&format!("wrote {path}\n")),
        }
    }
    for w in &report.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    out
}

/// Help text of the top-level command.
pub fn help() -> String {
    Cli::command().render_help().to_string()
}
