//! Seeded generators for the graph families the property suites run over.
//!
//! All generated variables are binary with levels `"0"`/`"1"`. Each
//! endogenous variable draws a random conditional table (entries kept inside
//! `[0.05, 0.95]`, so every stratum has positive mass) and realizes it with a
//! private exogenous "response" variable, coupled across parent
//! configurations either comonotonically (one thresholded uniform) or
//! independently (one coordinate per configuration).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{longterm_verdicts, opposite_indicator, proxy_verdicts};
use crate::dist::{decode, encode, VariableSpec};
use crate::error::{Error, Result};
use crate::measure::Contrast;

use super::{OracleQuery, ScmBuilder, StructuralModel};

/// Attempts allowed when rejection-sampling a constrained model.
pub const REJECTION_BUDGET: usize = 10_000;

/// Largest response-function space realized with independent coupling.
const MAX_INDEPENDENT_STATES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// X→Z→Y, X→Y.
    Mediation,
    /// V→X, V→Y, X→Z→Y.
    ConfoundedFrontDoor,
    /// Z→X and/or Z↔X, Z→Y, X→Y.
    Reversed,
    /// V→X, V→Y, V→W, X→Z→Y, X→Y.
    Proxy,
    /// V→X, V→Y, X→Z→Y, X→W, plus X→Y when `direct_effect`.
    LongTerm { direct_effect: bool },
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Mediation,
        Family::ConfoundedFrontDoor,
        Family::Reversed,
        Family::Proxy,
        Family::LongTerm { direct_effect: false },
        Family::LongTerm { direct_effect: true },
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Mediation => "mediation",
            Family::ConfoundedFrontDoor => "confounded-frontdoor",
            Family::Reversed => "reversed",
            Family::Proxy => "proxy",
            Family::LongTerm { direct_effect: false } => "longterm",
            Family::LongTerm { direct_effect: true } => "longterm-direct",
        }
    }

    /// Standard roles: exposure X=1/0, mediator Z (z = "1"), outcome Y, and
    /// the latent V as confounder where the family has one.
    pub fn query(self) -> OracleQuery {
        let q = OracleQuery::new(Contrast::new("X", "1", "0"), "Z", "Y").with_mediator_level("1");
        match self {
            Family::ConfoundedFrontDoor | Family::Proxy | Family::LongTerm { .. } => q.with_confounder("V"),
            _ => q,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == norm)
            .ok_or_else(|| Error::Usage(format!("unknown graph family `{s}`")))
    }
}

/// Which monotonicity pattern the observable antecedents must show.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MonotoneConstraint {
    /// One nonincreasing, the other nondecreasing (indicator 1).
    Opposite,
    /// Both in the same direction (indicator 0).
    Same,
    /// Either pattern, as long as the bound is determinate.
    Determinate,
}

impl MonotoneConstraint {
    fn accepts(self, indicator: Option<bool>) -> bool {
        match self {
            MonotoneConstraint::Opposite => indicator == Some(true),
            MonotoneConstraint::Same => indicator == Some(false),
            MonotoneConstraint::Determinate => indicator.is_some(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            MonotoneConstraint::Opposite => "opposite",
            MonotoneConstraint::Same => "same",
            MonotoneConstraint::Determinate => "determinate",
        }
    }
}

impl FromStr for MonotoneConstraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "opposite" => Ok(MonotoneConstraint::Opposite),
            "same" => Ok(MonotoneConstraint::Same),
            "determinate" | "any" => Ok(MonotoneConstraint::Determinate),
            _ => Err(Error::Usage(format!("unknown monotonicity constraint `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    Comonotone,
    Independent,
}

/// Realizes conditional rows `p(level | config)` with one exogenous noise
/// variable. Returns the noise probabilities and the mechanism table indexed
/// row-major by `(config, noise)`.
pub fn couple(rows: &[Vec<f64>], coupling: Coupling) -> (Vec<f64>, Vec<usize>) {
    let levels = rows[0].len();
    match coupling {
        Coupling::Comonotone => {
            let mut cuts: Vec<f64> = rows
                .iter()
                .flat_map(|r| {
                    r.iter()
                        .take(levels - 1)
                        .scan(0.0, |acc, p| {
                            *acc += p;
                            Some(*acc)
                        })
                        .collect::<Vec<_>>()
                })
                .filter(|&c| c > 0.0 && c < 1.0)
                .collect();
            cuts.push(1.0);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut probs = Vec::with_capacity(cuts.len());
            let mut mids = Vec::with_capacity(cuts.len());
            let mut lo = 0.0;
            for &hi in &cuts {
                if hi > lo {
                    probs.push(hi - lo);
                    mids.push(0.5 * (lo + hi));
                }
                lo = hi;
            }
            let mut table = Vec::with_capacity(rows.len() * mids.len());
            for r in rows {
                for &m in &mids {
                    let mut acc = 0.0;
                    let mut level = levels - 1;
                    for (l, p) in r.iter().enumerate().take(levels - 1) {
                        acc += p;
                        if m < acc {
                            level = l;
                            break;
                        }
                    }
                    table.push(level);
                }
            }
            (probs, table)
        }
        Coupling::Independent => {
            let cards = vec![levels; rows.len()];
            let states: usize = cards.iter().product();
            let mut choice = vec![0; rows.len()];
            let mut probs = Vec::with_capacity(states);
            for s in 0..states {
                decode(s, &cards, &mut choice);
                probs.push(rows.iter().zip(&choice).map(|(r, &l)| r[l]).product());
            }
            let mut table = Vec::with_capacity(rows.len() * states);
            for c in 0..rows.len() {
                for s in 0..states {
                    decode(s, &cards, &mut choice);
                    table.push(choice[c]);
                }
            }
            (probs, table)
        }
    }
}

/// Adds `spec` with mechanism realizing `rows` (one row per configuration of
/// `parents`, row-major) through a fresh exogenous `U_<name>`.
pub fn add_response(
    builder: ScmBuilder,
    spec: VariableSpec,
    parents: &[(&str, usize)],
    rows: &[Vec<f64>],
    coupling: Coupling,
) -> ScmBuilder {
    let (noise_probs, table) = couple(rows, coupling);
    let noise_name = format!("U_{}", spec.name);
    let noise_levels = noise_probs.len();
    let noise = VariableSpec::new(&noise_name, (0..noise_levels).map(|i| format!("u{i}")));
    let pcards: Vec<usize> = parents.iter().map(|p| p.1).collect();
    let mut names: Vec<&str> = parents.iter().map(|p| p.0).collect();
    names.push(&noise_name);
    builder.exogenous(noise, noise_probs).endogenous_fn(spec, &names, move |levels| {
        let (pl, u) = levels.split_at(levels.len() - 1);
        table[encode(pl, &pcards) * noise_levels + u[0]]
    })
}

struct Draw<'a> {
    rng: &'a mut ChaCha8Rng,
    builder: ScmBuilder,
}

impl Draw<'_> {
    fn confounder(mut self, name: &str) -> Self {
        let p = self.rng.random_range(0.1..0.9);
        self.builder = self.builder.exogenous(VariableSpec::binary(name), vec![1.0 - p, p]);
        self
    }

    fn binary(mut self, name: &str, parents: &[&str]) -> Self {
        let configs = 1usize << parents.len();
        let rows: Vec<Vec<f64>> = (0..configs)
            .map(|_| {
                let p = self.rng.random_range(0.05..0.95);
                vec![1.0 - p, p]
            })
            .collect();
        let coupling = if 2usize.pow(configs as u32) <= MAX_INDEPENDENT_STATES && self.rng.random_bool(0.5) {
            Coupling::Independent
        } else {
            Coupling::Comonotone
        };
        let parents: Vec<(&str, usize)> = parents.iter().map(|&p| (p, 2)).collect();
        self.builder = add_response(self.builder, VariableSpec::binary(name), &parents, &rows, coupling);
        self
    }
}

fn draw(family: Family, rng: &mut ChaCha8Rng) -> Result<StructuralModel> {
    let d = Draw { rng, builder: StructuralModel::builder() };
    let d = match family {
        Family::Mediation => d.binary("X", &[]).binary("Z", &["X"]).binary("Y", &["X", "Z"]),
        Family::ConfoundedFrontDoor => {
            d.confounder("V").binary("X", &["V"]).binary("Z", &["X"]).binary("Y", &["Z", "V"])
        }
        Family::Reversed => match d.rng.random_range(0..3) {
            0 => d.binary("Z", &[]).binary("X", &["Z"]),
            1 => d.confounder("C").binary("Z", &["C"]).binary("X", &["C"]),
            _ => d.confounder("C").binary("Z", &["C"]).binary("X", &["Z", "C"]),
        }
        .binary("Y", &["X", "Z"]),
        Family::Proxy => d
            .confounder("V")
            .binary("X", &["V"])
            .binary("W", &["V"])
            .binary("Z", &["X"])
            .binary("Y", &["X", "Z", "V"]),
        Family::LongTerm { direct_effect } => {
            let d = d.confounder("V").binary("X", &["V"]).binary("Z", &["X"]).binary("W", &["X"]);
            if direct_effect {
                d.binary("Y", &["X", "Z", "V"])
            } else {
                d.binary("Y", &["Z", "V"])
            }
        }
    };
    d.builder.build()
}

fn indicator(model: &StructuralModel, family: Family) -> Result<Option<bool>> {
    let dist = model.observational_distribution()?;
    let q = family.query();
    let mediator = Contrast::new("Z", "1", "0");
    let (a, b) = match family {
        Family::Proxy => proxy_verdicts(&dist, &q.exposure, "Z", "Y", "W")?,
        Family::LongTerm { .. } => longterm_verdicts(&dist, &mediator, "Y", "W")?,
        _ => unreachable!("constraints are checked against proxy families only"),
    };
    Ok(opposite_indicator(&a, &b))
}

/// Draws a reproducible model from `family`. With a constraint, draws are
/// repeated from the same seeded stream until the observable monotonicity
/// antecedents match it.
pub fn random_scm(
    family: Family,
    seed: u64,
    constraint: Option<MonotoneConstraint>,
) -> Result<StructuralModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let Some(constraint) = constraint else {
        return draw(family, &mut rng);
    };
    if !matches!(family, Family::Proxy | Family::LongTerm { .. }) {
        return Err(Error::Usage(format!(
            "monotonicity constraints apply to proxy and longterm families, not {family}"
        )));
    }
    for _ in 0..REJECTION_BUDGET {
        let model = draw(family, &mut rng)?;
        if constraint.accepts(indicator(&model, family)?) {
            return Ok(model);
        }
    }
    Err(Error::RejectionBudgetExceeded {
        family: family.to_string(),
        constraint: constraint.name().to_string(),
        attempts: REJECTION_BUDGET,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{Assignment, TOLERANCE};

    #[test]
    fn same_seed_same_model() {
        for family in Family::ALL {
            assert_eq!(random_scm(family, 7, None).unwrap(), random_scm(family, 7, None).unwrap());
        }
        assert_ne!(
            random_scm(Family::Mediation, 1, None).unwrap(),
            random_scm(Family::Mediation, 2, None).unwrap()
        );
    }

    #[test]
    fn mediation_family_observes_three_variables() {
        for seed in 0..20 {
            let d = random_scm(Family::Mediation, seed, None).unwrap().observational_distribution().unwrap();
            let names: Vec<&str> = d.variables().iter().map(|v| v.name.as_str()).collect();
            assert_eq!(names, ["X", "Z", "Y"]);
        }
    }

    #[test]
    fn couplings_reproduce_rows() {
        let rows = vec![vec![0.6, 0.4], vec![0.25, 0.75], vec![0.1, 0.9], vec![0.5, 0.5]];
        for coupling in [Coupling::Comonotone, Coupling::Independent] {
            let (probs, table) = couple(&rows, coupling);
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < TOLERANCE);
            let k = probs.len();
            for (c, row) in rows.iter().enumerate() {
                let p1: f64 = (0..k).filter(|&u| table[c * k + u] == 1).map(|u| probs[u]).sum();
                assert!((p1 - row[1]).abs() < TOLERANCE, "{coupling:?} {c}");
            }
        }
        let three = vec![vec![0.2, 0.3, 0.5], vec![0.5, 0.25, 0.25]];
        let (probs, table) = couple(&three, Coupling::Comonotone);
        let k = probs.len();
        for (c, row) in three.iter().enumerate() {
            for (l, &expected) in row.iter().enumerate() {
                let p: f64 = (0..k).filter(|&u| table[c * k + u] == l).map(|u| probs[u]).sum();
                assert!((p - expected).abs() < TOLERANCE);
            }
        }
    }

    #[test]
    fn constrained_proxy_models_meet_their_constraint() {
        for (seed, c) in [(3, MonotoneConstraint::Opposite), (4, MonotoneConstraint::Same)] {
            let m = random_scm(Family::Proxy, seed, Some(c)).unwrap();
            let ind = indicator(&m, Family::Proxy).unwrap();
            assert_eq!(ind, Some(c == MonotoneConstraint::Opposite));
        }
    }

    #[test]
    fn constraints_need_a_proxy_family() {
        assert!(random_scm(Family::Mediation, 0, Some(MonotoneConstraint::Same)).is_err());
    }

    #[test]
    fn strata_have_positive_mass() {
        for family in Family::ALL {
            let d = random_scm(family, 11, None).unwrap().observational_distribution().unwrap();
            assert!(d.probs().iter().all(|&p| p > 0.0), "{family}");
            assert!(d.mass(&Assignment::new()).unwrap() > 0.0);
        }
    }
}
