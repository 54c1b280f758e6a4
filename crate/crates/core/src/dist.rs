//! Exact joint probability tables over named finite-domain variables.
//!
//! A [`FiniteDistribution`] stores one probability per cell of the full
//! Cartesian product of its variables' domains, in row-major order with the
//! first declared variable varying slowest. Every constructor validates the
//! table, so downstream code never re-checks normalization.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for every probability equality check.
pub const TOLERANCE: f64 = 1e-9;

/// A named variable with an ordered finite domain.
///
/// For binary variables without explicit `values`, the first level maps to 0
/// and the second to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub levels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl VariableSpec {
    pub fn new<I, S>(name: impl Into<String>, levels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        VariableSpec { name: name.into(), levels: levels.into_iter().map(Into::into).collect(), values: None }
    }

    /// A binary variable with levels `"0"` and `"1"`.
    pub fn binary(name: impl Into<String>) -> Self {
        Self::new(name, ["0", "1"])
    }

    pub fn with_values(mut self, values: Vec<f64>) -> Self {
        self.values = Some(values);
        self
    }

    pub fn cardinality(&self) -> usize {
        self.levels.len()
    }

    pub fn is_binary(&self) -> bool {
        self.levels.len() == 2
    }

    pub fn level_index(&self, level: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == level)
    }

    pub fn require_level(&self, level: &str) -> Result<usize> {
        self.level_index(level)
            .ok_or_else(|| Error::UnknownLevel { variable: self.name.clone(), level: level.to_string() })
    }

    /// Numeric value of a level, if the variable has one.
    pub fn value(&self, level: usize) -> Option<f64> {
        match &self.values {
            Some(values) => values.get(level).copied(),
            None if self.is_binary() => Some(level as f64),
            None => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        self.values.is_some() || self.is_binary()
    }

    fn numeric_values(&self) -> Result<Vec<f64>> {
        (0..self.cardinality())
            .map(|l| self.value(l))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::NonNumericTarget(self.name.clone()))
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.levels.len() < 2 {
            out.push(Violation::TooFewLevels(self.name.clone()));
        }
        for (i, level) in self.levels.iter().enumerate() {
            if self.levels[..i].contains(level) {
                out.push(Violation::DuplicateLevel { variable: self.name.clone(), level: level.clone() });
            }
        }
        if let Some(values) = &self.values {
            if values.len() != self.levels.len() {
                out.push(Violation::ValueCount {
                    variable: self.name.clone(),
                    expected: self.levels.len(),
                    found: values.len(),
                });
            }
            if values.iter().any(|v| !v.is_finite()) {
                out.push(Violation::NonFiniteValue(self.name.clone()));
            }
        }
        out
    }
}

/// One way a table can fail validation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DuplicateVariable(String),
    TooFewLevels(String),
    DuplicateLevel { variable: String, level: String },
    ValueCount { variable: String, expected: usize, found: usize },
    NonFiniteValue(String),
    CellCount { expected: usize, found: usize },
    MissingCell(String),
    DuplicateCell(String),
    NegativeProbability { cell: String, p: f64 },
    NonFiniteProbability { cell: String },
    Mass(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateVariable(v) => write!(f, "duplicate variable `{v}`"),
            Violation::TooFewLevels(v) => write!(f, "variable `{v}` needs at least two levels"),
            Violation::DuplicateLevel { variable, level } => {
                write!(f, "duplicate level `{level}` in `{variable}`")
            }
            Violation::ValueCount { variable, expected, found } => {
                write!(f, "`{variable}` has {found} numeric values for {expected} levels")
            }
            Violation::NonFiniteValue(v) => write!(f, "`{v}` has a non-finite numeric value"),
            Violation::CellCount { expected, found } => {
                write!(f, "table has {found} cells, expected {expected}")
            }
            Violation::MissingCell(c) => write!(f, "missing cell {c}"),
            Violation::DuplicateCell(c) => write!(f, "duplicate cell {c}"),
            Violation::NegativeProbability { cell, p } => {
                write!(f, "negative probability {p} at {cell}")
            }
            Violation::NonFiniteProbability { cell } => {
                write!(f, "non-finite probability at {cell}")
            }
            Violation::Mass(m) => write!(f, "mass {m} ≠ 1"),
        }
    }
}

/// Partial or full assignment of levels to variables, keyed by name.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(BTreeMap<String, String>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, variable: impl Into<String>, level: impl Into<String>) -> Self {
        self.0.insert(variable.into(), level.into());
        self
    }

    pub fn insert(&mut self, variable: impl Into<String>, level: impl Into<String>) {
        self.0.insert(variable.into(), level.into());
    }

    pub fn get(&self, variable: &str) -> Option<&str> {
        self.0.get(variable).map(String::as_str)
    }

    pub fn contains(&self, variable: &str) -> bool {
        self.0.contains_key(variable)
    }

    pub fn remove(&mut self, variable: &str) -> Option<String> {
        self.0.remove(variable)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Union of two assignments; entries of `other` win on conflict.
    pub fn merged(&self, other: &Assignment) -> Assignment {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.insert(k, v);
        }
        out
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        Assignment(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str("}")
    }
}

/// Conditional table p(target | given) used to assemble a joint by
/// multiplication.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub target: String,
    pub given: Vec<String>,
    /// One row per combination of `given` levels: probabilities over the
    /// target's levels in domain order.
    pub rows: Vec<(Assignment, Vec<f64>)>,
}

impl Factor {
    pub fn marginal(target: impl Into<String>, probs: Vec<f64>) -> Self {
        Factor { target: target.into(), given: Vec::new(), rows: vec![(Assignment::new(), probs)] }
    }

    pub fn conditional(
        target: impl Into<String>,
        given: Vec<String>,
        rows: Vec<(Assignment, Vec<f64>)>,
    ) -> Self {
        Factor { target: target.into(), given, rows }
    }
}

fn product_len(variables: &[VariableSpec]) -> usize {
    variables.iter().map(VariableSpec::cardinality).product()
}

/// Decodes a row-major cell index into level indices.
pub(crate) fn decode(mut index: usize, cards: &[usize], out: &mut [usize]) {
    for (slot, &card) in out.iter_mut().zip(cards).rev() {
        *slot = index % card;
        index /= card;
    }
}

pub(crate) fn encode(levels: &[usize], cards: &[usize]) -> usize {
    levels.iter().zip(cards).fold(0, |acc, (&l, &card)| acc * card + l)
}

fn describe_cell(variables: &[VariableSpec], levels: &[usize]) -> String {
    variables
        .iter()
        .zip(levels)
        .map(|(v, &l)| (v.name.clone(), v.levels[l].clone()))
        .collect::<Assignment>()
        .to_string()
}

/// Reports every invariant violation of a raw table without constructing it.
pub fn validate(variables: &[VariableSpec], probs: &[f64]) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, v) in variables.iter().enumerate() {
        if variables[..i].iter().any(|w| w.name == v.name) {
            out.push(Violation::DuplicateVariable(v.name.clone()));
        }
        out.extend(v.violations());
    }
    let expected = product_len(variables);
    if probs.len() != expected {
        out.push(Violation::CellCount { expected, found: probs.len() });
        return out;
    }
    let cards: Vec<usize> = variables.iter().map(VariableSpec::cardinality).collect();
    let mut levels = vec![0; variables.len()];
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() {
            decode(i, &cards, &mut levels);
            out.push(Violation::NonFiniteProbability { cell: describe_cell(variables, &levels) });
        } else if p < 0.0 {
            decode(i, &cards, &mut levels);
            out.push(Violation::NegativeProbability { cell: describe_cell(variables, &levels), p });
        }
    }
    let mass: f64 = probs.iter().sum();
    if mass.is_finite() && (mass - 1.0).abs() > TOLERANCE {
        out.push(Violation::Mass(mass));
    }
    out
}

/// Immutable, validated joint distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    variables: Vec<VariableSpec>,
    cards: Vec<usize>,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(variables: Vec<VariableSpec>, probs: Vec<f64>) -> Result<Self> {
        let violations = validate(&variables, &probs);
        if !violations.is_empty() {
            return Err(Error::InvalidDistribution(violations));
        }
        let cards = variables.iter().map(VariableSpec::cardinality).collect();
        Ok(FiniteDistribution { variables, cards, probs })
    }

    /// Builds a table from explicit cells; every cell of the product must be
    /// listed exactly once.
    pub fn from_cells<I>(variables: Vec<VariableSpec>, cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Assignment, f64)>,
    {
        let cards: Vec<usize> = variables.iter().map(VariableSpec::cardinality).collect();
        let mut probs: Vec<Option<f64>> = vec![None; product_len(&variables)];
        let mut violations = Vec::new();
        let mut levels = vec![0; variables.len()];
        for (assign, p) in cells {
            if assign.len() != variables.len() {
                return Err(Error::Usage(format!("cell {assign} does not assign every variable")));
            }
            for (slot, v) in levels.iter_mut().zip(&variables) {
                let level = assign.get(&v.name).ok_or_else(|| Error::UnknownVariable(v.name.clone()))?;
                *slot = v.require_level(level)?;
            }
            let idx = encode(&levels, &cards);
            if probs[idx].replace(p).is_some() {
                violations.push(Violation::DuplicateCell(assign.to_string()));
            }
        }
        for (i, p) in probs.iter().enumerate() {
            if p.is_none() {
                decode(i, &cards, &mut levels);
                violations.push(Violation::MissingCell(describe_cell(&variables, &levels)));
            }
        }
        if !violations.is_empty() {
            return Err(Error::InvalidDistribution(violations));
        }
        Self::new(variables, probs.into_iter().map(|p| p.unwrap_or(0.0)).collect())
    }

    /// Builds a table by evaluating `f` on the level indices of every cell.
    pub fn from_fn<F>(variables: Vec<VariableSpec>, mut f: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> f64,
    {
        let cards: Vec<usize> = variables.iter().map(VariableSpec::cardinality).collect();
        let mut levels = vec![0; variables.len()];
        let probs = (0..product_len(&variables))
            .map(|i| {
                decode(i, &cards, &mut levels);
                f(&levels)
            })
            .collect();
        Self::new(variables, probs)
    }

    /// Multiplies conditional factors into a joint. Factors must be listed in
    /// an ancestral order and cover every variable exactly once.
    pub fn from_factors(variables: Vec<VariableSpec>, factors: &[Factor]) -> Result<Self> {
        let position = |name: &str| {
            variables
                .iter()
                .position(|v| v.name == name)
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))
        };
        if let Some(missing) = variables.iter().find(|v| !factors.iter().any(|f| f.target == v.name)) {
            return Err(Error::MissingFactor(missing.name.clone()));
        }
        let mut defined: Vec<usize> = Vec::new();
        // (target position, given positions, dense table indexed by given levels)
        let mut compiled: Vec<(usize, Vec<usize>, Vec<Vec<f64>>)> = Vec::new();
        for factor in factors {
            let target = position(&factor.target)?;
            if defined.contains(&target) {
                return Err(Error::InvalidFactor {
                    target: factor.target.clone(),
                    reason: "variable has more than one factor".into(),
                });
            }
            let mut given = Vec::with_capacity(factor.given.len());
            for g in &factor.given {
                let pos = position(g)?;
                if !defined.contains(&pos) {
                    return Err(Error::InvalidFactor {
                        target: factor.target.clone(),
                        reason: format!("conditions on `{g}` before p({g}) is defined"),
                    });
                }
                given.push(pos);
            }
            let given_cards: Vec<usize> = given.iter().map(|&g| variables[g].cardinality()).collect();
            let target_card = variables[target].cardinality();
            let mut table: Vec<Option<Vec<f64>>> = vec![None; given_cards.iter().product()];
            for (row_given, row) in &factor.rows {
                let mut idx = Vec::with_capacity(given.len());
                for &g in &given {
                    let var = &variables[g];
                    let level = row_given.get(&var.name).ok_or_else(|| Error::InvalidFactor {
                        target: factor.target.clone(),
                        reason: format!("row {row_given} does not assign `{}`", var.name),
                    })?;
                    idx.push(var.require_level(level)?);
                }
                if row_given.len() != given.len() {
                    return Err(Error::InvalidFactor {
                        target: factor.target.clone(),
                        reason: format!("row {row_given} assigns variables outside the conditioning set"),
                    });
                }
                if row.len() != target_card {
                    return Err(Error::InvalidFactor {
                        target: factor.target.clone(),
                        reason: format!(
                            "row {row_given} has {} probabilities for {target_card} levels",
                            row.len()
                        ),
                    });
                }
                let mass: f64 = row.iter().sum();
                if row.iter().any(|p| !p.is_finite() || *p < 0.0) || (mass - 1.0).abs() > TOLERANCE {
                    return Err(Error::InvalidFactor {
                        target: factor.target.clone(),
                        reason: format!("row {row_given} is not a probability vector (mass {mass})"),
                    });
                }
                let slot = &mut table[encode(&idx, &given_cards)];
                if slot.replace(row.clone()).is_some() {
                    return Err(Error::InvalidFactor {
                        target: factor.target.clone(),
                        reason: format!("duplicate row {row_given}"),
                    });
                }
            }
            let mut dense = Vec::with_capacity(table.len());
            let mut levels = vec![0; given.len()];
            for (i, row) in table.into_iter().enumerate() {
                match row {
                    Some(r) => dense.push(r),
                    None => {
                        decode(i, &given_cards, &mut levels);
                        let given_vars: Vec<VariableSpec> =
                            given.iter().map(|&g| variables[g].clone()).collect();
                        return Err(Error::InvalidFactor {
                            target: factor.target.clone(),
                            reason: format!("missing row {}", describe_cell(&given_vars, &levels)),
                        });
                    }
                }
            }
            defined.push(target);
            compiled.push((target, given, dense));
        }
        if let Some(missing) = (0..variables.len()).find(|i| !defined.contains(i)) {
            return Err(Error::MissingFactor(variables[missing].name.clone()));
        }
        let cards: Vec<usize> = variables.iter().map(VariableSpec::cardinality).collect();
        Self::from_fn(variables, |levels| {
            compiled.iter().fold(1.0, |acc, (target, given, dense)| {
                let gl: Vec<usize> = given.iter().map(|&g| levels[g]).collect();
                let gc: Vec<usize> = given.iter().map(|&g| cards[g]).collect();
                acc * dense[encode(&gl, &gc)][levels[*target]]
            })
        })
    }

    /// Re-runs validation; always empty for a constructed distribution.
    pub fn validate(&self) -> Vec<Violation> {
        validate(&self.variables, &self.probs)
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn variable(&self, name: &str) -> Result<&VariableSpec> {
        self.position(name).map(|i| &self.variables[i])
    }

    pub fn has_variable(&self, name: &str) -> bool {
        self.variables.iter().any(|v| v.name == name)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    fn position(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    fn resolve(&self, a: &Assignment) -> Result<Vec<(usize, usize)>> {
        a.iter()
            .map(|(name, level)| {
                let pos = self.position(name)?;
                Ok((pos, self.variables[pos].require_level(level)?))
            })
            .collect()
    }

    /// Iterates over `(levels, probability)` for every cell.
    pub fn cells(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let mut levels = vec![0; self.variables.len()];
        self.probs.iter().enumerate().map(move |(i, &p)| {
            decode(i, &self.cards, &mut levels);
            (levels.clone(), p)
        })
    }

    /// Cells as named assignments, in table order.
    pub fn assignments(&self) -> impl Iterator<Item = (Assignment, f64)> + '_ {
        self.cells().map(|(levels, p)| {
            let a = self
                .variables
                .iter()
                .zip(&levels)
                .map(|(v, &l)| (v.name.clone(), v.levels[l].clone()))
                .collect();
            (a, p)
        })
    }

    /// Probability of the event described by a (partial) assignment.
    pub fn mass(&self, event: &Assignment) -> Result<f64> {
        let fixed = self.resolve(event)?;
        Ok(self
            .cells()
            .filter(|(levels, _)| fixed.iter().all(|&(pos, l)| levels[pos] == l))
            .map(|(_, p)| p)
            .sum())
    }

    fn positive_mass(&self, event: &Assignment) -> Result<f64> {
        let m = self.mass(event)?;
        if m > 0.0 {
            Ok(m)
        } else {
            Err(Error::ZeroProbabilityCondition { event: event.to_string() })
        }
    }

    /// Sums out every variable not in `keep`; kept variables stay in their
    /// original order.
    pub fn marginal(&self, keep: &[&str]) -> Result<FiniteDistribution> {
        for k in keep {
            self.position(k)?;
        }
        let kept: Vec<usize> =
            (0..self.variables.len()).filter(|&i| keep.contains(&self.variables[i].name.as_str())).collect();
        let vars: Vec<VariableSpec> = kept.iter().map(|&i| self.variables[i].clone()).collect();
        let cards: Vec<usize> = vars.iter().map(VariableSpec::cardinality).collect();
        let mut probs = vec![0.0; product_len(&vars)];
        let mut sub = vec![0; kept.len()];
        for (levels, p) in self.cells() {
            for (slot, &i) in sub.iter_mut().zip(&kept) {
                *slot = levels[i];
            }
            probs[encode(&sub, &cards)] += p;
        }
        Self::new(vars, probs)
    }

    /// Distribution of the remaining variables given an event of positive
    /// mass.
    pub fn condition(&self, given: &Assignment) -> Result<FiniteDistribution> {
        let fixed = self.resolve(given)?;
        let total = self.positive_mass(given)?;
        let rest: Vec<usize> =
            (0..self.variables.len()).filter(|i| !fixed.iter().any(|&(pos, _)| pos == *i)).collect();
        let vars: Vec<VariableSpec> = rest.iter().map(|&i| self.variables[i].clone()).collect();
        let cards: Vec<usize> = vars.iter().map(VariableSpec::cardinality).collect();
        let mut probs = vec![0.0; product_len(&vars)];
        let mut sub = vec![0; rest.len()];
        for (levels, p) in self.cells() {
            if fixed.iter().all(|&(pos, l)| levels[pos] == l) {
                for (slot, &i) in sub.iter_mut().zip(&rest) {
                    *slot = levels[i];
                }
                probs[encode(&sub, &cards)] += p / total;
            }
        }
        Self::new(vars, probs)
    }

    /// p(variable = level | given).
    pub fn probability(&self, variable: &str, level: &str, given: &Assignment) -> Result<f64> {
        let denom = self.positive_mass(given)?;
        let joint = given.clone().with(variable, level);
        if let Some(existing) = given.get(variable) {
            self.variable(variable)?.require_level(level)?;
            return Ok(if existing == level { 1.0 } else { 0.0 });
        }
        Ok(self.mass(&joint)? / denom)
    }

    /// E[target | given] using the target's numeric level values.
    pub fn expectation(&self, target: &str, given: &Assignment) -> Result<f64> {
        let pos = self.position(target)?;
        let values = self.variables[pos].numeric_values()?;
        let fixed = self.resolve(given)?;
        let total = self.positive_mass(given)?;
        let weighted: f64 = self
            .cells()
            .filter(|(levels, _)| fixed.iter().all(|&(q, l)| levels[q] == l))
            .map(|(levels, p)| p * values[levels[pos]])
            .sum();
        Ok(weighted / total)
    }

    /// Sum of absolute cell differences over two tables with identical
    /// variables, halved.
    pub fn total_variation(&self, other: &FiniteDistribution) -> Result<f64> {
        if self.variables != other.variables {
            return Err(Error::Usage("total variation needs identical variable lists".into()));
        }
        Ok(0.5 * self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn x1() -> Assignment {
        Assignment::new().with("X", "x1")
    }

    #[test]
    fn drug_joint_validates() {
        let d = fixtures::drug_joint(0.5).unwrap();
        assert!(d.validate().is_empty());
    }

    #[test]
    fn short_mass_is_reported() {
        let vars = vec![VariableSpec::binary("A")];
        let v = validate(&vars, &[0.5, 0.48]);
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().starts_with("mass 0.98"), "{}", v[0]);
    }

    #[test]
    fn negative_cell_is_reported() {
        let vars = vec![VariableSpec::binary("A")];
        let v = validate(&vars, &[1.1, -0.1]);
        assert!(v.iter().any(|v| matches!(v, Violation::NegativeProbability { .. })));
        assert!(v.iter().any(|v| v.to_string().contains("negative probability")));
    }

    #[test]
    fn structural_violations() {
        let vars = vec![VariableSpec::new("A", ["a", "a"]), VariableSpec::binary("B").with_values(vec![1.0])];
        let v = validate(&vars, &[0.25; 4]);
        assert!(v.contains(&Violation::DuplicateLevel { variable: "A".into(), level: "a".into() }));
        assert!(v.iter().any(|v| matches!(v, Violation::ValueCount { .. })));
    }

    #[test]
    fn missing_cells_are_not_zero() {
        let vars = vec![VariableSpec::binary("A")];
        let err =
            FiniteDistribution::from_cells(vars, [(Assignment::new().with("A", "0"), 1.0)]).unwrap_err();
        match err {
            Error::InvalidDistribution(v) => {
                assert_eq!(v, vec![Violation::MissingCell("{A=1}".into())])
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn marginal_of_mediator() {
        let d = fixtures::drug_joint(0.5).unwrap();
        let z = d.marginal(&["Z"]).unwrap();
        let pz = z.probability("Z", "z1", &Assignment::new()).unwrap();
        // 0.75 * 0.5 + 0.4 * 0.5
        assert!((pz - 0.575).abs() < TOLERANCE);
    }

    #[test]
    fn marginal_keep_all_is_identity() {
        let d = fixtures::drug_joint(0.3).unwrap();
        assert_eq!(d.marginal(&["X", "Z", "Y"]).unwrap(), d);
        let x = d.marginal(&["X"]).unwrap();
        assert!((x.probs()[1] - 0.3).abs() < TOLERANCE);
    }

    #[test]
    fn marginal_unknown_variable() {
        let d = fixtures::drug_joint(0.5).unwrap();
        assert!(matches!(d.marginal(&["Q"]), Err(Error::UnknownVariable(_))));
    }

    #[test]
    fn condition_on_exposure() {
        let d = fixtures::drug_joint(0.5).unwrap();
        let c = d.condition(&x1()).unwrap();
        assert!((c.probability("Z", "z1", &Assignment::new()).unwrap() - 0.75).abs() < TOLERANCE);
    }

    #[test]
    fn condition_on_full_assignment_is_point_mass() {
        let d = fixtures::drug_joint(0.5).unwrap();
        let full = x1().with("Z", "z0").with("Y", "y1");
        let c = d.condition(&full).unwrap();
        assert!(c.variables().is_empty());
        assert_eq!(c.probs(), &[1.0]);
    }

    #[test]
    fn condition_on_null_event() {
        let d = fixtures::drug_joint(0.0).unwrap();
        assert!(matches!(d.condition(&x1()), Err(Error::ZeroProbabilityCondition { .. })));
    }

    #[test]
    fn expectation_examples() {
        let d = fixtures::drug_joint(0.5).unwrap();
        let e = d.expectation("Y", &x1().with("Z", "z1")).unwrap();
        assert!((e - 0.8).abs() < TOLERANCE);
        let e = d.expectation("Y", &x1()).unwrap();
        // 0.75 * 0.8 + 0.25 * 0.4
        assert!((e - 0.7).abs() < TOLERANCE);

        let point = FiniteDistribution::new(vec![VariableSpec::binary("A")], vec![0.0, 1.0]).unwrap();
        assert_eq!(point.expectation("A", &Assignment::new()).unwrap(), 1.0);
    }

    #[test]
    fn expectation_needs_numeric_target() {
        let d = FiniteDistribution::new(vec![VariableSpec::new("A", ["a", "b", "c"])], vec![0.2, 0.3, 0.5])
            .unwrap();
        assert!(matches!(d.expectation("A", &Assignment::new()), Err(Error::NonNumericTarget(_))));
    }

    #[test]
    fn factors_must_be_ancestral() {
        let vars = vec![VariableSpec::binary("A"), VariableSpec::binary("B")];
        let factors = [
            Factor::conditional(
                "B",
                vec!["A".into()],
                vec![
                    (Assignment::new().with("A", "0"), vec![0.5, 0.5]),
                    (Assignment::new().with("A", "1"), vec![0.5, 0.5]),
                ],
            ),
            Factor::marginal("A", vec![0.5, 0.5]),
        ];
        assert!(matches!(FiniteDistribution::from_factors(vars, &factors), Err(Error::InvalidFactor { .. })));
    }

    #[test]
    fn factors_must_cover_every_variable() {
        let vars = vec![VariableSpec::binary("A"), VariableSpec::binary("B")];
        let err =
            FiniteDistribution::from_factors(vars, &[Factor::marginal("B", vec![0.5, 0.5])]).unwrap_err();
        assert_eq!(err.to_string(), "p(A) required for joint; use bounds mode");
    }

    fn arb_joint() -> impl Strategy<Value = FiniteDistribution> {
        (2usize..4, 2usize..4, 2usize..3)
            .prop_flat_map(|(a, b, c)| (Just((a, b, c)), prop::collection::vec(0.01f64..1.0, a * b * c)))
            .prop_map(|((a, b, c), w)| {
                let total: f64 = w.iter().sum();
                let vars = vec![
                    VariableSpec::new("A", (0..a).map(|i| format!("a{i}"))),
                    VariableSpec::new("B", (0..b).map(|i| format!("b{i}")))
                        .with_values((0..b).map(|i| i as f64 * 1.5 - 1.0).collect()),
                    VariableSpec::new("C", (0..c).map(|i| format!("c{i}"))),
                ];
                FiniteDistribution::new(vars, w.iter().map(|x| x / total).collect()).unwrap()
            })
    }

    proptest! {
        #[test]
        fn marginal_composes(d in arb_joint()) {
            let twice = d.marginal(&["A", "B"]).unwrap().marginal(&["B"]).unwrap();
            let once = d.marginal(&["B"]).unwrap();
            for (x, y) in twice.probs().iter().zip(once.probs()) {
                prop_assert!((x - y).abs() < TOLERANCE);
            }
        }

        #[test]
        fn conditioning_normalizes(d in arb_joint(), a in 0usize..3, c in 0usize..2) {
            let a = a.min(d.variables()[0].cardinality() - 1);
            let given = Assignment::new().with("A", format!("a{a}")).with("C", format!("c{c}"));
            let cond = d.condition(&given).unwrap();
            prop_assert!((cond.probs().iter().sum::<f64>() - 1.0).abs() < TOLERANCE);
        }

        #[test]
        fn expectation_is_affine(d in arb_joint(), alpha in -3.0f64..3.0, beta in -2.0f64..2.0) {
            let given = Assignment::new().with("A", "a1");
            let e = d.expectation("B", &given).unwrap();
            let mut vars = d.variables().to_vec();
            let recoded: Vec<f64> = vars[1].values.as_ref().unwrap().iter().map(|v| alpha * v + beta).collect();
            vars[1].values = Some(recoded);
            let shifted = FiniteDistribution::new(vars, d.probs().to_vec()).unwrap();
            let e2 = shifted.expectation("B", &given).unwrap();
            prop_assert!((e2 - (alpha * e + beta)).abs() < TOLERANCE);
        }

        #[test]
        fn factored_round_trip(px in 0.05f64..0.95, z in prop::array::uniform2(0.05f64..0.95), y in prop::array::uniform4(0.05f64..0.95)) {
            let d = fixtures::mediation_joint(px, z, y).unwrap();
            prop_assert!((d.probability("X", "x1", &Assignment::new()).unwrap() - px).abs() < TOLERANCE);
            for (xi, xl) in ["x0", "x1"].iter().enumerate() {
                let gx = Assignment::new().with("X", *xl);
                prop_assert!((d.probability("Z", "z1", &gx).unwrap() - z[xi]).abs() < TOLERANCE);
                for (zi, zl) in ["z0", "z1"].iter().enumerate() {
                    let g = gx.clone().with("Z", *zl);
                    prop_assert!((d.expectation("Y", &g).unwrap() - y[xi * 2 + zi]).abs() < TOLERANCE);
                }
            }
        }
    }
}
