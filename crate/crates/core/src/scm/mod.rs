//! Finite structural causal models evaluated by exhaustive enumeration.
//!
//! Exogenous variables are mutually independent with explicit probability
//! tables. Endogenous variables are listed in topological order, each with a
//! deterministic mechanism stored as a dense table over its parents' levels.
//! Shared confounding (a bidirected edge) is a shared exogenous parent.
//!
//! Every probability the oracle reports is an exact weighted sum over all
//! joint exogenous states ("units"); nothing is sampled.

mod oracle;
pub mod random;
mod term;

use std::collections::{HashMap, HashSet};

use rand::Rng;

use crate::dist::{decode, encode, validate, Assignment, FiniteDistribution, VariableSpec};
use crate::error::{Error, Result};

pub use oracle::{oracle_effect, OracleQuery};
pub use random::{random_scm, Family, MonotoneConstraint};
pub use term::CounterfactualTerm;

/// Default cap on the number of joint exogenous states.
pub const DEFAULT_STATE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExogenousVar {
    pub spec: VariableSpec,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndogenousVar {
    pub spec: VariableSpec,
    pub parents: Vec<String>,
    /// Level index of this variable for every parent combination, row-major
    /// over `parents` in declaration order.
    pub table: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuralModel {
    exogenous: Vec<ExogenousVar>,
    endogenous: Vec<EndogenousVar>,
    /// Global slot of each endogenous variable's parents; exogenous
    /// variables occupy slots `0..exogenous.len()`.
    parent_slots: Vec<Vec<usize>>,
    cards: Vec<usize>,
    state_budget: u64,
}

type Mechanism = Box<dyn Fn(&[usize]) -> usize>;

enum MechanismSpec {
    Function(Mechanism),
    Entries(Vec<(Assignment, String)>),
}

/// Incremental constructor for [`StructuralModel`]; all checks run in
/// [`ScmBuilder::build`].
pub struct ScmBuilder {
    exogenous: Vec<ExogenousVar>,
    endogenous: Vec<(VariableSpec, Vec<String>, MechanismSpec)>,
    state_budget: u64,
}

impl Default for ScmBuilder {
    fn default() -> Self {
        ScmBuilder { exogenous: Vec::new(), endogenous: Vec::new(), state_budget: DEFAULT_STATE_BUDGET }
    }
}

impl ScmBuilder {
    pub fn exogenous(mut self, spec: VariableSpec, probs: Vec<f64>) -> Self {
        self.exogenous.push(ExogenousVar { spec, probs });
        self
    }

    /// Mechanism given as a function of the parents' level indices.
    pub fn endogenous_fn<F>(mut self, spec: VariableSpec, parents: &[&str], f: F) -> Self
    where
        F: Fn(&[usize]) -> usize + 'static,
    {
        self.endogenous.push((
            spec,
            parents.iter().map(|p| p.to_string()).collect(),
            MechanismSpec::Function(Box::new(f)),
        ));
        self
    }

    /// Mechanism given as explicit `(parent assignment, output level)` rows.
    pub fn endogenous_entries(
        mut self,
        spec: VariableSpec,
        parents: Vec<String>,
        entries: Vec<(Assignment, String)>,
    ) -> Self {
        self.endogenous.push((spec, parents, MechanismSpec::Entries(entries)));
        self
    }

    pub fn state_budget(mut self, budget: u64) -> Self {
        self.state_budget = budget;
        self
    }

    pub fn build(self) -> Result<StructuralModel> {
        let mut names: HashSet<&str> = HashSet::new();
        for spec in self.exogenous.iter().map(|e| &e.spec).chain(self.endogenous.iter().map(|e| &e.0)) {
            if !names.insert(&spec.name) {
                return Err(Error::InvalidModel(format!("variable `{}` declared twice", spec.name)));
            }
            if let Some(v) = spec.violations().first() {
                return Err(Error::InvalidModel(v.to_string()));
            }
        }
        for exo in &self.exogenous {
            let violations = validate(std::slice::from_ref(&exo.spec), &exo.probs);
            if !violations.is_empty() {
                return Err(Error::InvalidModel(format!(
                    "exogenous `{}`: {}",
                    exo.spec.name,
                    violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
                )));
            }
        }
        check_order(&self.exogenous, &self.endogenous)?;

        let mut slot_of: HashMap<String, usize> = HashMap::new();
        let mut cards: Vec<usize> = Vec::new();
        for exo in &self.exogenous {
            slot_of.insert(exo.spec.name.clone(), cards.len());
            cards.push(exo.spec.cardinality());
        }
        let mut endogenous = Vec::with_capacity(self.endogenous.len());
        let mut parent_slots = Vec::with_capacity(self.endogenous.len());
        let mut specs_by_slot: Vec<VariableSpec> = self.exogenous.iter().map(|e| e.spec.clone()).collect();
        for (spec, parents, mechanism) in self.endogenous {
            let slots: Vec<usize> = parents.iter().map(|p| slot_of[p]).collect();
            let pcards: Vec<usize> = slots.iter().map(|&s| cards[s]).collect();
            let rows: usize = pcards.iter().product();
            let table = match mechanism {
                MechanismSpec::Function(f) => {
                    let mut levels = vec![0; slots.len()];
                    let mut table = Vec::with_capacity(rows);
                    for i in 0..rows {
                        decode(i, &pcards, &mut levels);
                        let out = f(&levels);
                        if out >= spec.cardinality() {
                            return Err(Error::InvalidModel(format!(
                                "mechanism of `{}` returned level index {out} outside its domain",
                                spec.name
                            )));
                        }
                        table.push(out);
                    }
                    table
                }
                MechanismSpec::Entries(entries) => {
                    let pspecs: Vec<&VariableSpec> = slots.iter().map(|&s| &specs_by_slot[s]).collect();
                    table_from_entries(&spec, &parents, &pspecs, &pcards, entries)?
                }
            };
            slot_of.insert(spec.name.clone(), cards.len());
            cards.push(spec.cardinality());
            specs_by_slot.push(spec.clone());
            parent_slots.push(slots);
            endogenous.push(EndogenousVar { spec, parents, table });
        }
        Ok(StructuralModel {
            exogenous: self.exogenous,
            endogenous,
            parent_slots,
            cards,
            state_budget: self.state_budget,
        })
    }
}

fn check_order(
    exogenous: &[ExogenousVar],
    endogenous: &[(VariableSpec, Vec<String>, MechanismSpec)],
) -> Result<()> {
    let exo: HashSet<&str> = exogenous.iter().map(|e| e.spec.name.as_str()).collect();
    let endo_pos: HashMap<&str, usize> =
        endogenous.iter().enumerate().map(|(i, e)| (e.0.name.as_str(), i)).collect();
    for (spec, parents, _) in endogenous {
        let mut seen = HashSet::new();
        for p in parents {
            if !seen.insert(p) {
                return Err(Error::InvalidModel(format!("`{}` lists parent `{p}` twice", spec.name)));
            }
            if !exo.contains(p.as_str()) && !endo_pos.contains_key(p.as_str()) {
                return Err(Error::InvalidModel(format!("`{}` has unknown parent `{p}`", spec.name)));
            }
        }
    }
    // Cycle check over endogenous edges before the ordering check, so a
    // genuine cycle is reported as such.
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    fn visit(
        i: usize,
        endogenous: &[(VariableSpec, Vec<String>, MechanismSpec)],
        endo_pos: &HashMap<&str, usize>,
        marks: &mut [Mark],
    ) -> Result<()> {
        match marks[i] {
            Mark::Done => return Ok(()),
            Mark::Active => return Err(Error::CycleDetected(endogenous[i].0.name.clone())),
            Mark::New => {}
        }
        marks[i] = Mark::Active;
        for p in &endogenous[i].1 {
            if let Some(&j) = endo_pos.get(p.as_str()) {
                visit(j, endogenous, endo_pos, marks)?;
            }
        }
        marks[i] = Mark::Done;
        Ok(())
    }
    let mut marks = vec![Mark::New; endogenous.len()];
    for i in 0..endogenous.len() {
        visit(i, endogenous, &endo_pos, &mut marks)?;
    }
    for (i, (spec, parents, _)) in endogenous.iter().enumerate() {
        for p in parents {
            if let Some(&j) = endo_pos.get(p.as_str()) {
                if j >= i {
                    return Err(Error::NotTopological { child: spec.name.clone(), parent: p.clone() });
                }
            }
        }
    }
    Ok(())
}

fn table_from_entries(
    spec: &VariableSpec,
    parents: &[String],
    pspecs: &[&VariableSpec],
    pcards: &[usize],
    entries: Vec<(Assignment, String)>,
) -> Result<Vec<usize>> {
    let mut table: Vec<Option<usize>> = vec![None; pcards.iter().product()];
    for (given, value) in entries {
        if given.len() != parents.len() || parents.iter().any(|p| !given.contains(p)) {
            return Err(Error::InvalidModel(format!(
                "mechanism row {given} of `{}` must assign exactly its parents",
                spec.name
            )));
        }
        let levels = parents
            .iter()
            .zip(pspecs)
            .map(|(p, ps)| ps.require_level(given.get(p).unwrap_or_default()))
            .collect::<Result<Vec<_>>>()?;
        let out = spec.require_level(&value)?;
        if table[encode(&levels, pcards)].replace(out).is_some() {
            return Err(Error::InvalidModel(format!("mechanism of `{}` lists {given} twice", spec.name)));
        }
    }
    let mut levels = vec![0; parents.len()];
    table
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| {
                decode(i, pcards, &mut levels);
                let combination: Assignment = parents
                    .iter()
                    .zip(pspecs)
                    .zip(&levels)
                    .map(|((p, ps), &l)| (p.clone(), ps.levels[l].clone()))
                    .collect();
                Error::NonTotalMechanism { variable: spec.name.clone(), combination: combination.to_string() }
            })
        })
        .collect()
}

/// Per-variable override applied during evaluation: `None` keeps the
/// mechanism, `Some(level)` holds the variable fixed.
pub(crate) type Fixings = Vec<Option<usize>>;

impl StructuralModel {
    pub fn builder() -> ScmBuilder {
        ScmBuilder::default()
    }

    pub fn exogenous(&self) -> &[ExogenousVar] {
        &self.exogenous
    }

    pub fn endogenous(&self) -> &[EndogenousVar] {
        &self.endogenous
    }

    pub fn state_budget(&self) -> u64 {
        self.state_budget
    }

    pub fn with_state_budget(mut self, budget: u64) -> Self {
        self.state_budget = budget;
        self
    }

    pub fn endogenous_names(&self) -> Vec<&str> {
        self.endogenous.iter().map(|e| e.spec.name.as_str()).collect()
    }

    /// Spec of any variable, exogenous or endogenous.
    pub fn spec(&self, name: &str) -> Result<&VariableSpec> {
        self.slot(name).map(|s| self.spec_at(s))
    }

    fn spec_at(&self, slot: usize) -> &VariableSpec {
        let e = self.exogenous.len();
        if slot < e {
            &self.exogenous[slot].spec
        } else {
            &self.endogenous[slot - e].spec
        }
    }

    pub(crate) fn slot(&self, name: &str) -> Result<usize> {
        self.exogenous
            .iter()
            .map(|e| &e.spec)
            .chain(self.endogenous.iter().map(|e| &e.spec))
            .position(|s| s.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Index into `endogenous`, rejecting exogenous names.
    pub(crate) fn endogenous_index(&self, name: &str) -> Result<usize> {
        if self.exogenous.iter().any(|e| e.spec.name == name) {
            return Err(Error::ExogenousIntervention(name.to_string()));
        }
        self.endogenous
            .iter()
            .position(|e| e.spec.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub(crate) fn fixings(&self, world: &Assignment) -> Result<Fixings> {
        let mut fixed = vec![None; self.endogenous.len()];
        for (name, level) in world.iter() {
            let i = self.endogenous_index(name)?;
            fixed[i] = Some(self.endogenous[i].spec.require_level(level)?);
        }
        Ok(fixed)
    }

    /// Number of joint exogenous states.
    pub fn state_count(&self) -> u128 {
        self.exogenous.iter().map(|e| e.spec.cardinality() as u128).product()
    }

    fn check_budget(&self) -> Result<()> {
        let states = self.state_count();
        if states > self.state_budget as u128 {
            return Err(Error::StateBudgetExceeded { states, budget: self.state_budget });
        }
        Ok(())
    }

    /// Calls `f(slots, probability)` once per exogenous state with positive
    /// probability. `slots` holds exogenous levels; endogenous slots are
    /// scratch space for [`Self::evaluate_into`].
    pub(crate) fn for_each_unit<F>(&self, mut f: F) -> Result<()>
    where
        F: FnMut(&mut [usize], f64) -> Result<()>,
    {
        self.check_budget()?;
        let exo_cards: Vec<usize> = self.exogenous.iter().map(|e| e.spec.cardinality()).collect();
        let total: usize = exo_cards.iter().product();
        let e = self.exogenous.len();
        let mut slots = vec![0; self.cards.len()];
        for i in 0..total {
            decode(i, &exo_cards, &mut slots[..e]);
            let p: f64 = self.exogenous.iter().zip(&slots[..e]).map(|(x, &l)| x.probs[l]).product();
            if p > 0.0 {
                f(&mut slots, p)?;
            }
        }
        Ok(())
    }

    /// Fills endogenous slots for the unit already stored in the exogenous
    /// slots of `slots`.
    pub(crate) fn evaluate_into(&self, slots: &mut [usize], fixed: &[Option<usize>]) {
        let e = self.exogenous.len();
        for (i, var) in self.endogenous.iter().enumerate() {
            slots[e + i] = match fixed[i] {
                Some(level) => level,
                None => {
                    let idx = self.parent_slots[i].iter().fold(0, |acc, &s| acc * self.cards[s] + slots[s]);
                    var.table[idx]
                }
            };
        }
    }

    /// Exact joint over any subset of variables (exogenous or endogenous)
    /// in the natural world.
    pub fn distribution_over(&self, names: &[&str]) -> Result<FiniteDistribution> {
        let slots: Vec<usize> = names.iter().map(|n| self.slot(n)).collect::<Result<_>>()?;
        let specs: Vec<VariableSpec> = slots.iter().map(|&s| self.spec_at(s).clone()).collect();
        let cards: Vec<usize> = specs.iter().map(VariableSpec::cardinality).collect();
        let mut probs = vec![0.0; cards.iter().product()];
        let natural = vec![None; self.endogenous.len()];
        let mut sub = vec![0; slots.len()];
        self.for_each_unit(|units, p| {
            self.evaluate_into(units, &natural);
            for (o, &s) in sub.iter_mut().zip(&slots) {
                *o = units[s];
            }
            probs[encode(&sub, &cards)] += p;
            Ok(())
        })?;
        FiniteDistribution::new(specs, probs)
    }

    /// Joint over all endogenous variables.
    pub fn observational_distribution(&self) -> Result<FiniteDistribution> {
        let names = self.endogenous_names();
        self.distribution_over(&names)
    }

    /// Graph mutilation: each intervened mechanism becomes a constant.
    pub fn intervene(&self, world: &Assignment) -> Result<StructuralModel> {
        let mut out = self.clone();
        for (name, level) in world.iter() {
            let i = self.endogenous_index(name)?;
            let l = self.endogenous[i].spec.require_level(level)?;
            out.endogenous[i].parents.clear();
            out.endogenous[i].table = vec![l];
            out.parent_slots[i].clear();
        }
        Ok(out)
    }

    /// Draws `n` observations of the endogenous variables (level indices in
    /// declaration order).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Vec<usize>> {
        let e = self.exogenous.len();
        let natural = vec![None; self.endogenous.len()];
        let mut slots = vec![0; self.cards.len()];
        (0..n)
            .map(|_| {
                for (slot, exo) in slots[..e].iter_mut().zip(&self.exogenous) {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    *slot = exo.probs.len() - 1;
                    for (l, p) in exo.probs.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            *slot = l;
                            break;
                        }
                    }
                }
                self.evaluate_into(&mut slots, &natural);
                slots[e..].to_vec()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::TOLERANCE;
    use crate::fixtures;

    fn chain(p: f64) -> StructuralModel {
        StructuralModel::builder()
            .exogenous(VariableSpec::binary("U"), vec![1.0 - p, p])
            .endogenous_fn(VariableSpec::binary("X"), &["U"], |l| l[0])
            .endogenous_fn(VariableSpec::binary("Z"), &["X"], |l| l[0])
            .endogenous_fn(VariableSpec::binary("Y"), &["Z"], |l| l[0])
            .build()
            .unwrap()
    }

    #[test]
    fn deterministic_chain_propagates() {
        let d = chain(0.3).observational_distribution().unwrap();
        let all = |l: &str| Assignment::new().with("X", l).with("Z", l).with("Y", l);
        assert!((d.mass(&all("1")).unwrap() - 0.3).abs() < TOLERANCE);
        assert!((d.mass(&all("0")).unwrap() - 0.7).abs() < TOLERANCE);
        assert!(d.validate().is_empty());
    }

    #[test]
    fn drug_model_reproduces_conditionals() {
        let d = fixtures::drug_scm(0.5).unwrap().observational_distribution().unwrap();
        let expected = fixtures::drug_joint(0.5).unwrap();
        assert!(d.total_variation(&expected).unwrap() < TOLERANCE);
    }

    #[test]
    fn intervention_on_drug_model() {
        let scm = fixtures::drug_scm(0.5).unwrap();
        let treated = scm.intervene(&Assignment::new().with("X", "x1")).unwrap();
        let d = treated.observational_distribution().unwrap();
        let pz = d.probability("Z", "z1", &Assignment::new()).unwrap();
        assert!((pz - 0.75).abs() < TOLERANCE);
    }

    #[test]
    fn intervention_identities() {
        let scm = chain(0.4);
        assert_eq!(scm.intervene(&Assignment::new()).unwrap(), scm);
        let once = scm.intervene(&Assignment::new().with("Z", "1")).unwrap();
        let twice = once.intervene(&Assignment::new().with("Z", "1")).unwrap();
        assert_eq!(once.observational_distribution().unwrap(), twice.observational_distribution().unwrap());
    }

    #[test]
    fn cannot_intervene_on_exogenous() {
        let err = chain(0.4).intervene(&Assignment::new().with("U", "1")).unwrap_err();
        assert!(matches!(err, Error::ExogenousIntervention(_)));
    }

    #[test]
    fn ordering_and_cycles() {
        let err = StructuralModel::builder()
            .exogenous(VariableSpec::binary("U"), vec![0.5, 0.5])
            .endogenous_fn(VariableSpec::binary("Y"), &["X"], |l| l[0])
            .endogenous_fn(VariableSpec::binary("X"), &["U"], |l| l[0])
            .build()
            .unwrap_err();
        assert!(err.to_string().contains("not topologically ordered"), "{err}");

        let err = StructuralModel::builder()
            .endogenous_fn(VariableSpec::binary("A"), &["B"], |l| l[0])
            .endogenous_fn(VariableSpec::binary("B"), &["A"], |l| l[0])
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::CycleDetected(_)));
    }

    #[test]
    fn missing_mechanism_row_is_named() {
        let err = StructuralModel::builder()
            .exogenous(VariableSpec::binary("U"), vec![0.5, 0.5])
            .endogenous_entries(
                VariableSpec::binary("X"),
                vec!["U".into()],
                vec![(Assignment::new().with("U", "0"), "1".into())],
            )
            .build()
            .unwrap_err();
        assert_eq!(err.to_string(), "mechanism of `X` has no entry for parent combination {U=1}");
    }

    #[test]
    fn state_budget_is_enforced() {
        let scm = chain(0.5).with_state_budget(1);
        assert!(matches!(
            scm.observational_distribution(),
            Err(Error::StateBudgetExceeded { states: 2, budget: 1 })
        ));
    }
}
