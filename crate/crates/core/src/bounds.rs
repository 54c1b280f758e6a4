//! Partial identification: DE and IE as affine functions of an unknown
//! p(x), monotone-proxy bounds on DE, and long-term bounds on IE.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::dist::{decode, Assignment, Factor, FiniteDistribution, VariableSpec, TOLERANCE};
use crate::effects::MeasureRequest;
use crate::error::{Error, Result};
use crate::measure::{Contrast, Measure};

/// p(Z | X) and p(Y | X, Z) for every stratum, without p(X).
#[derive(Debug, Clone, PartialEq)]
pub struct Conditionals {
    pub exposure: VariableSpec,
    pub mediator: VariableSpec,
    pub outcome: VariableSpec,
    pub contrast: Contrast,
    /// `mediator_rows[i]` is p(Z | X = level i), X in domain order.
    pub mediator_rows: Vec<Vec<f64>>,
    /// `outcome_rows[i * |Z| + j]` is p(Y | X = level i, Z = level j).
    pub outcome_rows: Vec<Vec<f64>>,
}

fn check_row(target: &str, row: &[f64], card: usize) -> Result<()> {
    let bad = |reason: String| Error::InvalidFactor { target: target.to_string(), reason };
    if row.len() != card {
        return Err(bad(format!("row has {} entries, expected {card}", row.len())));
    }
    if let Some(p) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(bad(format!("invalid probability {p}")));
    }
    let mass: f64 = row.iter().sum();
    if (mass - 1.0).abs() > TOLERANCE {
        return Err(bad(format!("row mass {mass} ≠ 1")));
    }
    Ok(())
}

impl Conditionals {
    pub fn new(
        exposure: VariableSpec,
        mediator: VariableSpec,
        outcome: VariableSpec,
        contrast: Contrast,
        mediator_rows: Vec<Vec<f64>>,
        outcome_rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if !exposure.is_binary() {
            return Err(Error::NonBinaryExposure(exposure.name.clone()));
        }
        if contrast.variable != exposure.name {
            return Err(Error::Usage(format!(
                "contrast is on `{}` but the exposure is `{}`",
                contrast.variable, exposure.name
            )));
        }
        contrast.indices(&exposure)?;
        if !outcome.is_numeric() {
            return Err(Error::NonNumericTarget(outcome.name.clone()));
        }
        let (kx, kz) = (exposure.cardinality(), mediator.cardinality());
        if mediator_rows.len() != kx || outcome_rows.len() != kx * kz {
            return Err(Error::Usage(
                "conditional tables do not cover every exposure and mediator stratum".into(),
            ));
        }
        for row in &mediator_rows {
            check_row(&mediator.name, row, kz)?;
        }
        for row in &outcome_rows {
            check_row(&outcome.name, row, outcome.cardinality())?;
        }
        Ok(Conditionals { exposure, mediator, outcome, contrast, mediator_rows, outcome_rows })
    }

    /// Reads the conditionals off a joint; every (x', z) stratum needs mass.
    pub fn from_joint(dist: &FiniteDistribution, req: &MeasureRequest) -> Result<Self> {
        let xs = dist.variable(&req.exposure.variable)?.clone();
        let zs = dist.variable(&req.mediator)?.clone();
        let ys = dist.variable(&req.outcome)?.clone();
        let mut mediator_rows = Vec::new();
        let mut outcome_rows = Vec::new();
        for x in &xs.levels {
            let at_x = Assignment::new().with(&xs.name, x);
            mediator_rows.push(
                zs.levels.iter().map(|z| dist.probability(&zs.name, z, &at_x)).collect::<Result<Vec<_>>>()?,
            );
            for z in &zs.levels {
                let at_xz = at_x.clone().with(&zs.name, z);
                outcome_rows.push(
                    ys.levels
                        .iter()
                        .map(|y| dist.probability(&ys.name, y, &at_xz))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
        }
        Self::new(xs, zs, ys, req.exposure.clone(), mediator_rows, outcome_rows)
    }

    pub fn request(&self) -> MeasureRequest {
        MeasureRequest::new(self.contrast.clone(), &self.mediator.name, &self.outcome.name)
    }

    fn indices(&self) -> (usize, usize) {
        self.contrast.indices(&self.exposure).expect("contrast validated at construction")
    }

    fn p_z(&self, x: usize, z: usize) -> f64 {
        self.mediator_rows[x][z]
    }

    fn e_y(&self, x: usize, z: usize) -> f64 {
        let row = &self.outcome_rows[x * self.mediator.cardinality() + z];
        row.iter().enumerate().map(|(k, p)| p * self.outcome.value(k).unwrap_or(0.0)).sum()
    }

    /// E[Y|x] − E[Y|x̄]; free of p(x).
    pub fn te(&self) -> f64 {
        let (t, r) = self.indices();
        (0..self.mediator.cardinality())
            .map(|z| self.e_y(t, z) * self.p_z(t, z) - self.e_y(r, z) * self.p_z(r, z))
            .sum()
    }

    /// The joint over (X, Z, Y) with p(treated) = q.
    pub fn joint_at(&self, q: f64) -> Result<FiniteDistribution> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Usage(format!("p(x) = {q} is outside [0, 1]")));
        }
        let (t, _) = self.indices();
        let mut px = vec![1.0 - q; 2];
        px[t] = q;
        let (xn, zn) = (&self.exposure.name, &self.mediator.name);
        let z_rows = self
            .exposure
            .levels
            .iter()
            .zip(&self.mediator_rows)
            .map(|(x, row)| (Assignment::new().with(xn, x), row.clone()))
            .collect();
        let mut y_rows = Vec::new();
        for (i, x) in self.exposure.levels.iter().enumerate() {
            for (j, z) in self.mediator.levels.iter().enumerate() {
                y_rows.push((
                    Assignment::new().with(xn, x).with(zn, z),
                    self.outcome_rows[i * self.mediator.cardinality() + j].clone(),
                ));
            }
        }
        FiniteDistribution::from_factors(
            vec![self.exposure.clone(), self.mediator.clone(), self.outcome.clone()],
            &[
                Factor::marginal(xn, px),
                Factor::conditional(zn, vec![xn.clone()], z_rows),
                Factor::conditional(&self.outcome.name, vec![xn.clone(), zn.clone()], y_rows),
            ],
        )
    }
}

/// A measure written as `intercept + slope · p(x)` over p(x) ∈ [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineEffect {
    pub measure: Measure,
    pub intercept: f64,
    pub slope: f64,
    pub parameter: &'static str,
    pub interval: [f64; 2],
}

impl AffineEffect {
    fn new(measure: Measure, intercept: f64, slope: f64) -> Self {
        let end = intercept + slope;
        AffineEffect {
            measure,
            intercept,
            slope,
            parameter: "p(x)",
            interval: [intercept.min(end), intercept.max(end)],
        }
    }

    pub fn at(&self, q: f64) -> f64 {
        self.intercept + self.slope * q
    }
}

pub fn affine_in_px(cond: &Conditionals, measure: Measure) -> Result<AffineEffect> {
    let (t, r) = cond.indices();
    let zs = 0..cond.mediator.cardinality();
    let (mut intercept, mut slope) = (0.0, 0.0);
    match measure {
        Measure::De => {
            for z in zs {
                let delta = cond.e_y(t, z) - cond.e_y(r, z);
                intercept += delta * cond.p_z(r, z);
                slope += delta * (cond.p_z(t, z) - cond.p_z(r, z));
            }
        }
        Measure::Ie => {
            for z in zs {
                let shift = cond.p_z(t, z) - cond.p_z(r, z);
                intercept += shift * cond.e_y(r, z);
                slope += shift * (cond.e_y(t, z) - cond.e_y(r, z));
            }
        }
        other => {
            return Err(Error::UnsupportedMeasure(format!(
                "{other} has no affine form in p(x); use DE or IE"
            )))
        }
    }
    Ok(AffineEffect::new(measure, intercept, slope))
}

/// Range of `1 − measure/te` over p(x) ∈ [0, 1].
pub fn reduction_interval(affine: &AffineEffect, te: f64) -> Result<[f64; 2]> {
    if te == 0.0 || !te.is_finite() {
        return Err(Error::ZeroTotalEffect);
    }
    let a = 1.0 - affine.interval[0] / te;
    let b = 1.0 - affine.interval[1] / te;
    Ok([a.min(b), a.max(b)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    NonDecreasing,
    NonIncreasing,
    Constant,
    Neither,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::NonDecreasing => "nondecreasing",
            Direction::NonIncreasing => "nonincreasing",
            Direction::Constant => "constant",
            Direction::Neither => "neither",
        }
    }

    pub fn is_monotone(self) -> bool {
        matches!(self, Direction::NonDecreasing | Direction::NonIncreasing)
    }

    fn of_differences(diffs: &[f64]) -> Self {
        let up = diffs.iter().any(|d| *d > TOLERANCE);
        let down = diffs.iter().any(|d| *d < -TOLERANCE);
        match (up, down) {
            (true, true) => Direction::Neither,
            (true, false) => Direction::NonDecreasing,
            (false, true) => Direction::NonIncreasing,
            (false, false) => Direction::Constant,
        }
    }

    fn combine(self, other: Direction) -> Self {
        use Direction::*;
        match (self, other) {
            (Neither, _) | (_, Neither) => Neither,
            (Constant, d) | (d, Constant) => d,
            (a, b) if a == b => a,
            _ => Neither,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The quantity tracked across proxy levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Mean(String),
    /// Probability of one level, i.e. the mean of its indicator.
    Indicator {
        variable: String,
        level: String,
    },
}

impl Target {
    fn value(&self, dist: &FiniteDistribution, given: &Assignment) -> Result<f64> {
        match self {
            Target::Mean(v) => dist.expectation(v, given),
            Target::Indicator { variable, level } => dist.probability(variable, level, given),
        }
    }

    fn label(&self) -> String {
        match self {
            Target::Mean(v) => v.clone(),
            Target::Indicator { variable, level } => format!("1{{{variable}={level}}}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumEvidence {
    pub stratum: Assignment,
    /// Conditional means at each proxy level, in level order.
    pub means: Vec<f64>,
    /// Consecutive differences of `means`.
    pub differences: Vec<f64>,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneVerdict {
    pub quantity: String,
    pub direction: Direction,
    pub strata: Vec<StratumEvidence>,
}

/// Direction of `E[target | strata, proxy]` across the ordered proxy levels,
/// checked within every combination of stratum levels.
pub fn monotone_direction(
    dist: &FiniteDistribution,
    target: &Target,
    strata: &[&str],
    proxy: &str,
) -> Result<MonotoneVerdict> {
    let wspec = dist.variable(proxy)?;
    let sspecs = strata.iter().map(|s| dist.variable(s)).collect::<Result<Vec<_>>>()?;
    let cards: Vec<usize> = sspecs.iter().map(|s| s.cardinality()).collect();
    let combos: usize = cards.iter().product();
    let mut levels = vec![0; cards.len()];
    let mut evidence = Vec::with_capacity(combos);
    let mut direction = Direction::Constant;
    for c in 0..combos {
        decode(c, &cards, &mut levels);
        let stratum: Assignment =
            sspecs.iter().zip(&levels).map(|(s, &l)| (s.name.clone(), s.levels[l].clone())).collect();
        let means = wspec
            .levels
            .iter()
            .map(|w| target.value(dist, &stratum.clone().with(proxy, w)))
            .collect::<Result<Vec<_>>>()?;
        let differences: Vec<f64> = means.windows(2).map(|p| p[1] - p[0]).collect();
        let d = Direction::of_differences(&differences);
        direction = direction.combine(d);
        evidence.push(StratumEvidence { stratum, means, differences, direction: d });
    }
    let given: Vec<&str> = strata.iter().copied().chain([proxy]).collect();
    Ok(MonotoneVerdict {
        quantity: format!("E[{} | {}]", target.label(), given.join(", ")),
        direction,
        strata: evidence,
    })
}

/// `Some(true)` when the two verdicts run in opposite directions,
/// `Some(false)` when they agree, `None` when either is not monotone.
pub fn opposite_indicator(a: &MonotoneVerdict, b: &MonotoneVerdict) -> Option<bool> {
    if a.direction.is_monotone() && b.direction.is_monotone() {
        Some(a.direction != b.direction)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtLeast,
    AtMost,
    /// The target equals the bound value outright.
    Exact,
    Indeterminate,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtLeast => "≥",
            Relation::AtMost => "≤",
            Relation::Exact => "=",
            Relation::Indeterminate => "?",
        }
    }
}

fn as_indicator<S: Serializer>(v: &Option<bool>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(b) => s.serialize_some(&u8::from(*b)),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub target: Measure,
    pub bound_value: f64,
    pub relation: Relation,
    /// 1_≠; absent when undefined.
    #[serde(serialize_with = "as_indicator")]
    pub indicator_opposite: Option<bool>,
    /// 1_≥ (long-term bound only).
    #[serde(serialize_with = "as_indicator", skip_serializing_if = "Option::is_none")]
    pub indicator_nonnegative: Option<bool>,
    pub diagnostics: Vec<MonotoneVerdict>,
    pub notes: Vec<String>,
}

impl BoundResult {
    pub fn is_determinate(&self) -> bool {
        self.relation != Relation::Indeterminate
    }

    /// Whether `truth` satisfies the stated relation, allowing `slack` on the
    /// violating side. Indeterminate results claim nothing.
    pub fn holds(&self, truth: f64, slack: f64) -> bool {
        match self.relation {
            Relation::AtLeast => truth >= self.bound_value - slack,
            Relation::AtMost => truth <= self.bound_value + slack,
            Relation::Exact => (truth - self.bound_value).abs() <= slack,
            Relation::Indeterminate => true,
        }
    }
}

impl fmt::Display for BoundResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match f.precision() {
            Some(p) => format!("{:.p$}", self.bound_value),
            None => self.bound_value.to_string(),
        };
        match self.relation {
            Relation::Indeterminate => write!(f, "{} indeterminate (value {v})", self.target),
            r => write!(f, "{} {} {v}", self.target, r.symbol()),
        }
    }
}

fn degenerate_note(verdicts: &[&MonotoneVerdict]) -> Option<String> {
    verdicts
        .iter()
        .find(|v| !v.direction.is_monotone())
        .map(|v| format!("{} is {}; no direction can be claimed", v.quantity, v.direction))
}

/// Σ_w (E[Y|x,z,w] − E[Y|x̄,z,w]) p(w|z) at one mediator level.
pub fn te_obs_conditional(
    dist: &FiniteDistribution,
    exposure: &Contrast,
    mediator: &str,
    z: &str,
    outcome: &str,
    proxy: &str,
) -> Result<f64> {
    let at_z = Assignment::new().with(mediator, z);
    let x = &exposure.variable;
    let mut total = 0.0;
    for w in &dist.variable(proxy)?.levels {
        let zw = at_z.clone().with(proxy, w);
        let diff = dist.expectation(outcome, &zw.clone().with(x, &exposure.treated))?
            - dist.expectation(outcome, &zw.clone().with(x, &exposure.reference))?;
        total += diff * dist.probability(proxy, w, &at_z)?;
    }
    Ok(total)
}

/// Verdicts on E[Y | X, Z, W] and on E[1{X = treated} | Z, W].
pub fn proxy_verdicts(
    dist: &FiniteDistribution,
    exposure: &Contrast,
    mediator: &str,
    outcome: &str,
    proxy: &str,
) -> Result<(MonotoneVerdict, MonotoneVerdict)> {
    let x = exposure.variable.as_str();
    let on_y = monotone_direction(dist, &Target::Mean(outcome.into()), &[x, mediator], proxy)?;
    let on_x = monotone_direction(
        dist,
        &Target::Indicator { variable: x.into(), level: exposure.treated.clone() },
        &[mediator],
        proxy,
    )?;
    Ok((on_y, on_x))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProxyOptions {
    /// Accept a proxy with more than two ordered levels.
    pub allow_nonbinary_proxy: bool,
}

/// Bound on DE from a proxy W of a latent confounder.
pub fn proxy_de_bound(
    dist: &FiniteDistribution,
    exposure: &Contrast,
    mediator: &str,
    outcome: &str,
    proxy: &str,
    options: ProxyOptions,
) -> Result<BoundResult> {
    let xs = dist.variable(&exposure.variable)?;
    if !xs.is_binary() {
        return Err(Error::NonBinaryExposure(xs.name.clone()));
    }
    exposure.indices(xs)?;
    let ws = dist.variable(proxy)?;
    let mut notes =
        vec!["assumes the latent confounder is binary; this is not testable from the data".to_string()];
    if !ws.is_binary() {
        if !options.allow_nonbinary_proxy {
            return Err(Error::NonBinaryProxy(proxy.to_string()));
        }
        notes.push(format!("WARNING: beyond-paper use of a proxy with {} ordered levels", ws.cardinality()));
    }
    if !dist.variable(outcome)?.is_numeric() {
        return Err(Error::NonNumericTarget(outcome.into()));
    }
    let (on_y, on_x) = proxy_verdicts(dist, exposure, mediator, outcome, proxy)?;
    let mut bound_value = 0.0;
    for z in &dist.variable(mediator)?.levels {
        let pz = dist.mass(&Assignment::new().with(mediator, z))?;
        bound_value += te_obs_conditional(dist, exposure, mediator, z, outcome, proxy)? * pz;
    }
    let indicator = opposite_indicator(&on_y, &on_x);
    let relation = match indicator {
        Some(true) => Relation::AtLeast,
        Some(false) => Relation::AtMost,
        None => Relation::Indeterminate,
    };
    notes.extend(degenerate_note(&[&on_y, &on_x]));
    Ok(BoundResult {
        target: Measure::De,
        bound_value,
        relation,
        indicator_opposite: indicator,
        indicator_nonnegative: None,
        diagnostics: vec![on_y, on_x],
        notes,
    })
}

/// Σ_w (E[Y|z,w] − E[Y|z̄,w]) p(w).
pub fn te_obs_zy(dist: &FiniteDistribution, mediator: &Contrast, outcome: &str, proxy: &str) -> Result<f64> {
    let z = &mediator.variable;
    let mut total = 0.0;
    for w in &dist.variable(proxy)?.levels {
        let at_w = Assignment::new().with(proxy, w);
        let diff = dist.expectation(outcome, &at_w.clone().with(z, &mediator.treated))?
            - dist.expectation(outcome, &at_w.clone().with(z, &mediator.reference))?;
        total += diff * dist.mass(&at_w)?;
    }
    Ok(total)
}

/// Verdicts on E[Y | Z, W] and on E[1{Z = z} | W].
pub fn longterm_verdicts(
    dist: &FiniteDistribution,
    mediator: &Contrast,
    outcome: &str,
    proxy: &str,
) -> Result<(MonotoneVerdict, MonotoneVerdict)> {
    let z = mediator.variable.as_str();
    let on_y = monotone_direction(dist, &Target::Mean(outcome.into()), &[z], proxy)?;
    let on_z = monotone_direction(
        dist,
        &Target::Indicator { variable: z.into(), level: mediator.treated.clone() },
        &[],
        proxy,
    )?;
    Ok((on_y, on_z))
}

/// Bound on IE combining an experimental TE(X,Z) with observational
/// (W, Z, Y) data.
pub fn longterm_ie_bound(
    te_xz: f64,
    dist: &FiniteDistribution,
    mediator: &Contrast,
    outcome: &str,
    proxy: &str,
) -> Result<BoundResult> {
    if !te_xz.is_finite() || te_xz.abs() > 1.0 {
        return Err(Error::Usage(format!("TE(X,Z) = {te_xz} is not a difference of probabilities")));
    }
    let zs = dist.variable(&mediator.variable)?;
    if !zs.is_binary() {
        return Err(Error::NonBinaryMediator(zs.name.clone()));
    }
    mediator.indices(zs)?;
    if !dist.variable(outcome)?.is_numeric() {
        return Err(Error::NonNumericTarget(outcome.into()));
    }
    let (on_y, on_z) = longterm_verdicts(dist, mediator, outcome, proxy)?;
    let te_zy = te_obs_zy(dist, mediator, outcome, proxy)?;
    let opposite = opposite_indicator(&on_y, &on_z);
    let nonnegative = te_xz >= 0.0;
    let mut notes = Vec::new();
    let relation = if te_xz == 0.0 {
        notes.push("TE(X,Z) = 0 annihilates the indirect effect".to_string());
        Relation::Exact
    } else {
        notes.extend(degenerate_note(&[&on_y, &on_z]));
        match opposite {
            None => Relation::Indeterminate,
            Some(opp) => {
                if opp == nonnegative {
                    Relation::AtLeast
                } else {
                    Relation::AtMost
                }
            }
        }
    };
    Ok(BoundResult {
        target: Measure::Ie,
        // + 0.0 turns a signed zero into 0
        bound_value: te_xz * te_zy + 0.0,
        relation,
        indicator_opposite: opposite,
        indicator_nonnegative: Some(nonnegative),
        diagnostics: vec![on_y, on_z],
        notes,
    })
}
