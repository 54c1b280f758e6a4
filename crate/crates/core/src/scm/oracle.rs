use crate::dist::Assignment;
use crate::error::{Error, Result};
use crate::measure::{Contrast, Measure};

use super::{CounterfactualTerm, StructuralModel};

/// Variable roles for [`oracle_effect`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleQuery {
    pub exposure: Contrast,
    pub mediator: String,
    /// z' for CDE; the "z" level of the mediator contrast for TE_XZ, TE_ZY
    /// and IE_TRUE (defaults to the mediator's second level).
    pub mediator_level: Option<String>,
    pub outcome: String,
    /// Unmeasured confounder adjusted for by DE_TRUE.
    pub confounder: Option<String>,
}

impl OracleQuery {
    pub fn new(exposure: Contrast, mediator: impl Into<String>, outcome: impl Into<String>) -> Self {
        OracleQuery {
            exposure,
            mediator: mediator.into(),
            mediator_level: None,
            outcome: outcome.into(),
            confounder: None,
        }
    }

    pub fn with_mediator_level(mut self, level: impl Into<String>) -> Self {
        self.mediator_level = Some(level.into());
        self
    }

    pub fn with_confounder(mut self, name: impl Into<String>) -> Self {
        self.confounder = Some(name.into());
        self
    }
}

struct Resolved {
    outcome: usize,
    world: super::Fixings,
    substitutions: Vec<(usize, super::Fixings)>,
}

impl StructuralModel {
    fn resolve_term(&self, term: &CounterfactualTerm) -> Result<Resolved> {
        term.check()?;
        let outcome = self.endogenous_index(&term.outcome).map_err(|e| match e {
            Error::ExogenousIntervention(n) => Error::MalformedTerm(format!("outcome `{n}` is exogenous")),
            other => other,
        })?;
        let world = self.fixings(&term.world)?;
        let substitutions = term
            .substitutions
            .iter()
            .map(|(var, inner)| Ok((self.endogenous_index(var)?, self.fixings(inner)?)))
            .collect::<Result<_>>()?;
        Ok(Resolved { outcome, world, substitutions })
    }

    /// Weighted mean of `value(outcome level)` over units satisfying
    /// `evidence` in the natural world.
    fn counterfactual_expectation<F>(
        &self,
        term: &CounterfactualTerm,
        evidence: &Assignment,
        value: F,
    ) -> Result<f64>
    where
        F: Fn(usize) -> f64,
    {
        let r = self.resolve_term(term)?;
        let evidence_fixed: Vec<(usize, usize)> = evidence
            .iter()
            .map(|(name, level)| {
                let slot = self.slot(name)?;
                Ok((slot, self.spec_at(slot).require_level(level)?))
            })
            .collect::<Result<_>>()?;
        let e = self.exogenous.len();
        let natural = vec![None; self.endogenous.len()];
        let mut fixed = r.world.clone();
        let mut sub_values = vec![0; r.substitutions.len()];
        let (mut mass, mut acc) = (0.0, 0.0);
        self.for_each_unit(|slots, p| {
            if !evidence_fixed.is_empty() {
                self.evaluate_into(slots, &natural);
                if !evidence_fixed.iter().all(|&(s, l)| slots[s] == l) {
                    return Ok(());
                }
            }
            for (v, (var, inner)) in sub_values.iter_mut().zip(&r.substitutions) {
                self.evaluate_into(slots, inner);
                *v = slots[e + var];
            }
            fixed.clone_from(&r.world);
            for (&v, (var, _)) in sub_values.iter().zip(&r.substitutions) {
                fixed[*var] = Some(v);
            }
            self.evaluate_into(slots, &fixed);
            mass += p;
            acc += p * value(slots[e + r.outcome]);
            Ok(())
        })?;
        if mass <= 0.0 {
            return Err(Error::ZeroProbabilityCondition { event: evidence.to_string() });
        }
        Ok(acc / mass)
    }

    /// E[term] over all units.
    pub fn counterfactual_mean(&self, term: &CounterfactualTerm) -> Result<f64> {
        self.counterfactual_mean_given(term, &Assignment::new())
    }

    /// E[term | evidence], the evidence read in the natural world.
    pub fn counterfactual_mean_given(&self, term: &CounterfactualTerm, evidence: &Assignment) -> Result<f64> {
        let spec = &self.endogenous[self
            .endogenous_index(&term.outcome)
            .map_err(|_| Error::MalformedTerm(format!("outcome `{}` is not endogenous", term.outcome)))?]
        .spec;
        let values: Vec<f64> = (0..spec.cardinality())
            .map(|l| spec.value(l))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::NonNumericTarget(spec.name.clone()))?;
        self.counterfactual_expectation(term, evidence, |l| values[l])
    }

    /// P(term = level).
    pub fn counterfactual_probability(&self, term: &CounterfactualTerm, level: &str) -> Result<f64> {
        let l = self.spec(&term.outcome)?.require_level(level)?;
        self.counterfactual_expectation(term, &Assignment::new(), |v| (v == l) as u8 as f64)
    }
}

fn binary_mediator_levels(scm: &StructuralModel, q: &OracleQuery) -> Result<(String, String)> {
    let spec = scm.spec(&q.mediator)?;
    if !spec.is_binary() {
        return Err(Error::NonBinaryMediator(q.mediator.clone()));
    }
    let z = q.mediator_level.clone().unwrap_or_else(|| spec.levels[1].clone());
    let zi = spec.require_level(&z)?;
    Ok((z, spec.levels[1 - zi].clone()))
}

/// Ground-truth value of `measure` from its counterfactual definition.
pub fn oracle_effect(scm: &StructuralModel, measure: Measure, q: &OracleQuery) -> Result<f64> {
    let x = q.exposure.variable.as_str();
    let (xt, xr) = (q.exposure.treated.as_str(), q.exposure.reference.as_str());
    let exposure_spec = scm.spec(x)?;
    q.exposure.indices(exposure_spec)?;
    let y = || CounterfactualTerm::new(&q.outcome);
    let at = |level: &str| Assignment::new().with(x, level);
    let mean = |t: CounterfactualTerm| scm.counterfactual_mean(&t);
    match measure {
        Measure::Te => Ok(mean(y().under(x, xt))? - mean(y().under(x, xr))?),
        Measure::Nde => Ok(mean(y().under(x, xt).substitute(&q.mediator, at(xr)))? - mean(y().under(x, xr))?),
        Measure::Nie => Ok(mean(y().under(x, xr).substitute(&q.mediator, at(xt)))? - mean(y().under(x, xr))?),
        Measure::Tde => Ok(mean(y().under(x, xt))? - mean(y().under(x, xr).substitute(&q.mediator, at(xt)))?),
        Measure::Tie => Ok(mean(y().under(x, xt))? - mean(y().under(x, xt).substitute(&q.mediator, at(xr)))?),
        Measure::Cde => {
            let z = q
                .mediator_level
                .as_deref()
                .ok_or_else(|| Error::UnsupportedMeasure("CDE needs a controlled mediator level".into()))?;
            Ok(mean(y().under(x, xt).under(&q.mediator, z))? - mean(y().under(x, xr).under(&q.mediator, z))?)
        }
        Measure::Piie => Ok(mean(y())? - mean(y().substitute(&q.mediator, at(xr)))?),
        Measure::TeXz => {
            let (z, _) = binary_mediator_levels(scm, q)?;
            let zt = |l: &str| CounterfactualTerm::new(&q.mediator).under(x, l);
            Ok(scm.counterfactual_probability(&zt(xt), &z)? - scm.counterfactual_probability(&zt(xr), &z)?)
        }
        Measure::TeZy => {
            let (z, zbar) = binary_mediator_levels(scm, q)?;
            Ok(mean(y().under(&q.mediator, &z))? - mean(y().under(&q.mediator, &zbar))?)
        }
        Measure::IeTrue => Ok(oracle_effect(scm, Measure::TeXz, q)? * oracle_effect(scm, Measure::TeZy, q)?),
        Measure::DeTrue => {
            let v = q
                .confounder
                .as_deref()
                .ok_or_else(|| Error::UnsupportedMeasure("DE_TRUE needs the confounder variable".into()))?;
            let d = scm.distribution_over(&[x, &q.mediator, &q.outcome, v])?;
            let zspec = d.variable(&q.mediator)?.clone();
            let vspec = d.variable(v)?.clone();
            let mut total = 0.0;
            for z in &zspec.levels {
                let gz = Assignment::new().with(&q.mediator, z);
                let pz = d.mass(&gz)?;
                if pz == 0.0 {
                    continue;
                }
                let mut stratum = 0.0;
                for vl in &vspec.levels {
                    let pvz = d.probability(v, vl, &gz)?;
                    if pvz == 0.0 {
                        continue;
                    }
                    let g = gz.clone().with(v, vl);
                    stratum += (d.expectation(&q.outcome, &g.clone().with(x, xt))?
                        - d.expectation(&q.outcome, &g.with(x, xr))?)
                        * pvz;
                }
                total += pz * stratum;
            }
            Ok(total)
        }
        Measure::EttUntreated => {
            let untreated = at(xr);
            Ok(scm.counterfactual_mean_given(&y().under(x, xt), &untreated)?
                - scm.counterfactual_mean_given(&y().under(x, xr), &untreated)?)
        }
        Measure::De | Measure::Ie | Measure::Residual => Err(Error::UnsupportedMeasure(format!(
            "{measure} is defined by an identification formula, not a counterfactual"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn query() -> OracleQuery {
        OracleQuery::new(Contrast::new("X", "x1", "x0"), "Z", "Y")
    }

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-9, "{a} != {b}");
    }

    #[test]
    fn nested_counterfactual_on_drug_model() {
        let scm = fixtures::drug_scm(0.5).unwrap();
        let t: CounterfactualTerm = "Y_{X=x0,Z=Z_{X=x1}}".parse().unwrap();
        // 0.75 * 0.3 + 0.25 * 0.2
        close(scm.counterfactual_mean(&t).unwrap(), 0.275);
        close(scm.counterfactual_mean(&CounterfactualTerm::new("Y").under("X", "x1")).unwrap(), 0.7);
    }

    #[test]
    fn empty_term_is_observational_mean() {
        let scm = fixtures::drug_scm(0.3).unwrap();
        let d = scm.observational_distribution().unwrap();
        close(
            scm.counterfactual_mean(&CounterfactualTerm::new("Y")).unwrap(),
            d.expectation("Y", &Assignment::new()).unwrap(),
        );
    }

    #[test]
    fn drug_model_classical_effects() {
        let scm = fixtures::drug_scm(0.5).unwrap();
        let q = query();
        close(oracle_effect(&scm, Measure::Te, &q).unwrap(), 0.46);
        close(oracle_effect(&scm, Measure::Nde, &q).unwrap(), 0.32);
        close(oracle_effect(&scm, Measure::Nie, &q).unwrap(), 0.035);
        close(oracle_effect(&scm, Measure::Tde, &q).unwrap(), 0.425);
        close(oracle_effect(&scm, Measure::Tie, &q).unwrap(), 0.14);
        let q1 = query().with_mediator_level("z1");
        close(oracle_effect(&scm, Measure::Cde, &q1).unwrap(), 0.5);
        close(oracle_effect(&scm, Measure::Cde, &query().with_mediator_level("z0")).unwrap(), 0.2);
        close(oracle_effect(&scm, Measure::TeXz, &q1).unwrap(), 0.35);
        // Unconfounded: E[Y_z] - E[Y_z0] = sum_x p(x)(E[Y|x,z1]-E[Y|x,z0]) = 0.5*0.4 + 0.5*0.1
        close(oracle_effect(&scm, Measure::TeZy, &q1).unwrap(), 0.25);
        close(oracle_effect(&scm, Measure::IeTrue, &q1).unwrap(), 0.0875);
    }

    #[test]
    fn piie_uses_natural_exposure() {
        let scm = fixtures::drug_scm(0.5).unwrap();
        // E[Y] = 0.47; E[Y_{X, Z_x0}] = 0.5*(0.4*0.8+0.6*0.4) + 0.5*(0.4*0.3+0.6*0.2) = 0.40
        close(oracle_effect(&scm, Measure::Piie, &query()).unwrap(), 0.07);
    }

    #[test]
    fn formula_only_measures_are_rejected() {
        let scm = fixtures::drug_scm(0.5).unwrap();
        assert!(matches!(oracle_effect(&scm, Measure::De, &query()), Err(Error::UnsupportedMeasure(_))));
        assert!(oracle_effect(&scm, Measure::DeTrue, &query()).is_err());
    }

    #[test]
    fn consistency_with_mutilated_model() {
        let scm = fixtures::drug_scm(0.4).unwrap();
        let world = Assignment::new().with("X", "x1");
        let cf = scm.counterfactual_mean(&CounterfactualTerm::new("Y").under("X", "x1")).unwrap();
        let mutilated = scm.intervene(&world).unwrap().observational_distribution().unwrap();
        close(cf, mutilated.expectation("Y", &Assignment::new()).unwrap());
    }
}
