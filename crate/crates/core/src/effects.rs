//! Identification formulas over an observed joint p(X, Z, Y).
//!
//! Exposure X is binary with a designated treated level x and reference
//! level x̄. The mediator Z may have any number of levels (except in
//! [`ie_factored`]) and the outcome Y must be numeric. Any stratum whose
//! conditional expectation is needed but has zero mass is a hard error naming
//! the stratum; no formula imputes zeros.

use serde::Serialize;

use crate::dist::{Assignment, FiniteDistribution};
use crate::error::{Error, Result};
use crate::measure::{Contrast, Measure};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureRequest {
    pub exposure: Contrast,
    pub mediator: String,
    pub outcome: String,
    /// z' for CDE; for [`ie_factored`], the mediator level read as "z".
    pub controlled_level: Option<String>,
}

impl MeasureRequest {
    pub fn new(exposure: Contrast, mediator: impl Into<String>, outcome: impl Into<String>) -> Self {
        MeasureRequest {
            exposure,
            mediator: mediator.into(),
            outcome: outcome.into(),
            controlled_level: None,
        }
    }

    pub fn controlled_at(mut self, level: impl Into<String>) -> Self {
        self.controlled_level = Some(level.into());
        self
    }

    pub fn swapped(&self) -> Self {
        MeasureRequest { exposure: self.exposure.swapped(), ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectReport {
    pub measure: Measure,
    /// Mediator level for CDE.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,
    pub value: f64,
    pub formula: String,
    pub assumptions: String,
}

impl EffectReport {
    fn new(measure: Measure, value: f64, formula: &str, assumptions: &str) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Usage(format!("{measure} evaluated to a non-finite value")));
        }
        Ok(EffectReport {
            measure,
            level: None,
            value,
            formula: formula.to_string(),
            assumptions: assumptions.to_string(),
        })
    }
}

const MEDIATION_GRAPH: &str = "mediation graph X→Z→Y, X→Y with no unmeasured confounding";

/// Quantities shared by the formulas, looked up on demand.
struct Strata {
    dist: FiniteDistribution,
    x: String,
    xt: String,
    xr: String,
    z: String,
    z_levels: Vec<String>,
    y: String,
}

impl Strata {
    fn new(dist: &FiniteDistribution, req: &MeasureRequest) -> Result<Self> {
        let xs = dist.variable(&req.exposure.variable)?;
        if !xs.is_binary() {
            return Err(Error::NonBinaryExposure(xs.name.clone()));
        }
        req.exposure.indices(xs)?;
        let zs = dist.variable(&req.mediator)?;
        let ys = dist.variable(&req.outcome)?;
        if !ys.is_numeric() {
            return Err(Error::NonNumericTarget(ys.name.clone()));
        }
        let names = [req.exposure.variable.as_str(), &req.mediator, &req.outcome];
        if names[0] == names[1] || names[1] == names[2] || names[0] == names[2] {
            return Err(Error::Usage("exposure, mediator and outcome must be distinct variables".into()));
        }
        if let Some(level) = &req.controlled_level {
            zs.require_level(level)?;
        }
        let z_levels = zs.levels.clone();
        Ok(Strata {
            dist: dist.marginal(&names)?,
            x: req.exposure.variable.clone(),
            xt: req.exposure.treated.clone(),
            xr: req.exposure.reference.clone(),
            z: req.mediator.clone(),
            z_levels,
            y: req.outcome.clone(),
        })
    }

    fn at_x(&self, x: &str) -> Assignment {
        Assignment::new().with(&self.x, x)
    }

    fn p_x(&self, x: &str) -> Result<f64> {
        self.dist.mass(&self.at_x(x))
    }

    fn p_z(&self, z: &str) -> Result<f64> {
        self.dist.mass(&Assignment::new().with(&self.z, z))
    }

    fn p_z_given(&self, z: &str, x: &str) -> Result<f64> {
        self.dist.probability(&self.z, z, &self.at_x(x))
    }

    fn e_y(&self, x: &str, z: &str) -> Result<f64> {
        self.dist.expectation(&self.y, &self.at_x(x).with(&self.z, z))
    }

    fn e_y_given_x(&self, x: &str) -> Result<f64> {
        self.dist.expectation(&self.y, &self.at_x(x))
    }

    /// Σ_z f(z), failing on the first error.
    fn sum_z<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(&str) -> Result<f64>,
    {
        self.z_levels.iter().try_fold(0.0, |acc, z| Ok(acc + f(z)?))
    }

    /// Σ_x' E[Y|x',z] p(x').
    fn adjusted_outcome(&self, z: &str) -> Result<f64> {
        Ok(self.e_y(&self.xt, z)? * self.p_x(&self.xt)? + self.e_y(&self.xr, z)? * self.p_x(&self.xr)?)
    }

    /// E[Y|x,z] − E[Y|x̄,z].
    fn outcome_contrast(&self, z: &str) -> Result<f64> {
        Ok(self.e_y(&self.xt, z)? - self.e_y(&self.xr, z)?)
    }

    /// p(z|x) − p(z|x̄).
    fn mediator_shift(&self, z: &str) -> Result<f64> {
        Ok(self.p_z_given(z, &self.xt)? - self.p_z_given(z, &self.xr)?)
    }
}

/// E[Y|x] − E[Y|x̄].
pub fn te(dist: &FiniteDistribution, req: &MeasureRequest) -> Result<EffectReport> {
    let s = Strata::new(dist, req)?;
    EffectReport::new(
        Measure::Te,
        s.e_y_given_x(&s.xt)? - s.e_y_given_x(&s.xr)?,
        "E[Y|x] − E[Y|x̄]",
        "every path from X to Y is causal (no X–Y confounding)",
    )
}

/// Front-door indirect effect.
pub fn ie(dist: &FiniteDistribution, req: &MeasureRequest) -> Result<EffectReport> {
    let s = Strata::new(dist, req)?;
    let value = s.sum_z(|z| Ok(s.mediator_shift(z)? * s.adjusted_outcome(z)?))?;
    EffectReport::new(
        Measure::Ie,
        value,
        "Σ_z p(z|x)·Σ_x' E[Y|x',z]p(x') − Σ_z p(z|x̄)·Σ_x' E[Y|x',z]p(x')",
        "front-door through Z; the X→Y path is treated as mediated by an unmeasured variable (or X↔Y confounding) and deactivated",
    )
}

/// Direct effect by adjustment for the mediator.
pub fn de(dist: &FiniteDistribution, req: &MeasureRequest) -> Result<EffectReport> {
    let s = Strata::new(dist, req)?;
    let value = s.sum_z(|z| Ok(s.outcome_contrast(z)? * s.p_z(z)?))?;
    EffectReport::new(
        Measure::De,
        value,
        "Σ_z E[Y|x,z]p(z) − Σ_z E[Y|x̄,z]p(z)",
        "adjustment for Z deactivates X→Z→Y; equals TE when X←Z or X↔Z replaces X→Z",
    )
}

pub fn nde(dist: &FiniteDistribution, req: &MeasureRequest) -> Result<EffectReport> {
    let s = Strata::new(dist, req)?;
    let value = s.sum_z(|z| Ok(s.outcome_contrast(z)? * s.p_z_given(z, &s.xr)?))?;
    EffectReport::new(Measure::Nde, value, "Σ_z (E[Y|x,z] − E[Y|x̄,z]) p(z|x̄)", MEDIATION_GRAPH)
}

pub fn nie(dist: &FiniteDistribution, req: &MeasureRequest) -> Result<EffectReport> {
    let s = Strata::new(dist, req)?;
    let value = s.sum_z(|z| Ok(s.e_y(&s.xr, z)? * s.mediator_shift(z)?))?;
    EffectReport::new(Measure::Nie, value, "Σ_z E[Y|x̄,z] (p(z|x) − p(z|x̄))", MEDIATION_GRAPH)
}

pub fn tde(dist: &FiniteDistribution, req: &MeasureRequest) -> Result<EffectReport> {
    let s = Strata::new(dist, req)?;
    let value = s.sum_z(|z| Ok(s.outcome_contrast(z)? * s.p_z_given(z, &s.xt)?))?;
    EffectReport::new(Measure::Tde, value, "Σ_z (E[Y|x,z] − E[Y|x̄,z]) p(z|x)", MEDIATION_GRAPH)
}

pub fn tie(dist: &FiniteDistribution, req: &MeasureRequest) -> Result<EffectReport> {
    let s = Strata::new(dist, req)?;
    let value = s.sum_z(|z| Ok(s.e_y(&s.xt, z)? * s.mediator_shift(z)?))?;
    EffectReport::new(Measure::Tie, value, "Σ_z E[Y|x,z] (p(z|x) − p(z|x̄))", MEDIATION_GRAPH)
}

/// Controlled direct effect at mediator level `z`.
pub fn cde(dist: &FiniteDistribution, req: &MeasureRequest, z: &str) -> Result<EffectReport> {
    let s = Strata::new(dist, req)?;
    dist.variable(&req.mediator)?.require_level(z)?;
    let mut report =
        EffectReport::new(Measure::Cde, s.outcome_contrast(z)?, "E[Y|x,z'] − E[Y|x̄,z']", MEDIATION_GRAPH)?;
    report.level = Some(z.to_string());
    Ok(report)
}

/// Population intervention indirect effect with reference level x̄.
pub fn piie(dist: &FiniteDistribution, req: &MeasureRequest) -> Result<EffectReport> {
    let s = Strata::new(dist, req)?;
    let observed = s.dist.expectation(&s.y, &Assignment::new())?;
    let mut shifted = 0.0;
    for x in [&s.xt, &s.xr] {
        let inner = s.sum_z(|z| Ok(s.e_y(x, z)? * s.p_z_given(z, &s.xr)?))?;
        shifted += s.p_x(x)? * inner;
    }
    EffectReport::new(
        Measure::Piie,
        observed - shifted,
        "E[Y] − Σ_x' p(x') Σ_z E[Y|x',z] p(z|x̄)",
        MEDIATION_GRAPH,
    )
}

/// IE written as TE(X,Z)·TE(Z,Y) for a binary mediator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactoredIe {
    pub te_xz: f64,
    pub te_zy: f64,
    pub product: f64,
}

pub fn ie_factored(dist: &FiniteDistribution, req: &MeasureRequest) -> Result<FactoredIe> {
    let zs = dist.variable(&req.mediator)?;
    if !zs.is_binary() {
        return Err(Error::NonBinaryMediator(req.mediator.clone()));
    }
    let s = Strata::new(dist, req)?;
    let z = req.controlled_level.clone().unwrap_or_else(|| s.z_levels[1].clone());
    let zbar = s.z_levels.iter().find(|l| **l != z).cloned().unwrap_or_default();
    let te_xz = s.mediator_shift(&z)?;
    let te_zy = s.adjusted_outcome(&z)? - s.adjusted_outcome(&zbar)?;
    Ok(FactoredIe { te_xz, te_zy, product: te_xz * te_zy })
}

/// Every measure the effects command reports, in a fixed order: TE, DE, IE,
/// NDE, NIE, TDE, TIE, CDE per mediator level, PIIE, then TE − DE − IE.
pub fn all_effects(dist: &FiniteDistribution, req: &MeasureRequest) -> Result<Vec<EffectReport>> {
    let t = te(dist, req)?;
    let d = de(dist, req)?;
    let i = ie(dist, req)?;
    let residual = EffectReport::new(
        Measure::Residual,
        t.value - d.value - i.value,
        "TE − DE − IE",
        "interaction in the outcome model; reported without interpretation",
    )?;
    let mut out = vec![t, d, i, nde(dist, req)?, nie(dist, req)?, tde(dist, req)?, tie(dist, req)?];
    for z in &dist.variable(&req.mediator)?.levels {
        out.push(cde(dist, req, z)?);
    }
    out.push(piie(dist, req)?);
    out.push(residual);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{Factor, VariableSpec};
    use crate::fixtures;

    fn req() -> MeasureRequest {
        fixtures::drug_request()
    }

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-9, "{a} != {b}");
    }

    #[test]
    fn drug_example_values() {
        let d = fixtures::drug_joint(0.5).unwrap();
        close(te(&d, &req()).unwrap().value, 0.46);
        close(nde(&d, &req()).unwrap().value, 0.32);
        close(nie(&d, &req()).unwrap().value, 0.035);
        close(tde(&d, &req()).unwrap().value, 0.425);
        close(tie(&d, &req()).unwrap().value, 0.14);
        close(cde(&d, &req(), "z1").unwrap().value, 0.5);
        close(cde(&d, &req(), "z0").unwrap().value, 0.2);
        close(de(&d, &req()).unwrap().value, 0.3725);
        close(ie(&d, &req()).unwrap().value, 0.0875);
        close(piie(&d, &req()).unwrap().value, 0.07);
        let f = ie_factored(&d, &req()).unwrap();
        close(f.te_xz, 0.35);
        close(f.te_zy, 0.25);
        close(f.product, 0.0875);
    }

    #[test]
    fn te_does_not_depend_on_prevalence() {
        for px in [0.1, 0.5, 0.9] {
            close(te(&fixtures::drug_joint(px).unwrap(), &req()).unwrap().value, 0.46);
        }
    }

    #[test]
    fn null_models_give_zero() {
        // mediator independent of exposure
        let d = fixtures::mediation_joint(0.4, [0.3, 0.3], [0.2, 0.7, 0.5, 0.9]).unwrap();
        close(ie(&d, &req()).unwrap().value, 0.0);
        close(piie(&d, &req()).unwrap().value, 0.0);
        close(ie_factored(&d, &req()).unwrap().product, 0.0);
        // outcome ignores exposure
        let d = fixtures::mediation_joint(0.4, [0.3, 0.6], [0.2, 0.7, 0.2, 0.7]).unwrap();
        close(de(&d, &req()).unwrap().value, 0.0);
        close(cde(&d, &req(), "z1").unwrap().value, 0.0);
        // X independent of Y altogether
        let d = fixtures::mediation_joint(0.4, [0.3, 0.3], [0.2, 0.7, 0.2, 0.7]).unwrap();
        close(te(&d, &req()).unwrap().value, 0.0);
    }

    #[test]
    fn empty_stratum_is_named() {
        // p(z1|x1) = 1 leaves the (x1, z0) stratum empty
        let d = fixtures::mediation_joint(0.5, [0.4, 1.0], [0.2, 0.3, 0.4, 0.8]).unwrap();
        for err in [de(&d, &req()).unwrap_err(), ie(&d, &req()).unwrap_err()] {
            match err {
                Error::ZeroProbabilityCondition { event } => {
                    assert_eq!(event, "{X=x1, Z=z0}")
                }
                other => panic!("unexpected {other}"),
            }
        }
        // TE needs only the exposure marginal
        te(&d, &req()).unwrap();
    }

    #[test]
    fn exposure_must_be_binary() {
        let vars = vec![
            VariableSpec::new("X", ["a", "b", "c"]),
            VariableSpec::binary("Z"),
            VariableSpec::binary("Y"),
        ];
        let d = FiniteDistribution::new(vars, vec![1.0 / 12.0; 12]).unwrap();
        let r = MeasureRequest::new(Contrast::new("X", "b", "a"), "Z", "Y");
        assert!(matches!(te(&d, &r), Err(Error::NonBinaryExposure(_))));
    }

    #[test]
    fn factorization_needs_binary_mediator() {
        let vars = vec![
            VariableSpec::new("X", ["x0", "x1"]),
            VariableSpec::new("Z", ["z0", "z1", "z2"]),
            VariableSpec::new("Y", ["y0", "y1"]),
        ];
        let factors = [
            Factor::marginal("X", vec![0.5, 0.5]),
            Factor::conditional(
                "Z",
                vec!["X".into()],
                vec![
                    (Assignment::new().with("X", "x0"), vec![0.2, 0.3, 0.5]),
                    (Assignment::new().with("X", "x1"), vec![0.6, 0.1, 0.3]),
                ],
            ),
            Factor::conditional(
                "Y",
                vec!["X".into(), "Z".into()],
                ["x0", "x1"]
                    .iter()
                    .flat_map(|x| {
                        ["z0", "z1", "z2"]
                            .iter()
                            .map(move |z| (Assignment::new().with("X", *x).with("Z", *z), vec![0.6, 0.4]))
                    })
                    .collect(),
            ),
        ];
        let d = FiniteDistribution::from_factors(vars, &factors).unwrap();
        assert!(matches!(ie_factored(&d, &req()), Err(Error::NonBinaryMediator(_))));
        // the unfactored formulas accept it
        ie(&d, &req()).unwrap();
        de(&d, &req()).unwrap();
    }

    #[test]
    fn level_swap_negates_symmetric_measures() {
        let d = fixtures::drug_joint(0.35).unwrap();
        let (r, s) = (req(), req().swapped());
        close(te(&d, &r).unwrap().value, -te(&d, &s).unwrap().value);
        close(de(&d, &r).unwrap().value, -de(&d, &s).unwrap().value);
        close(ie(&d, &r).unwrap().value, -ie(&d, &s).unwrap().value);
        close(cde(&d, &r, "z0").unwrap().value, -cde(&d, &s, "z0").unwrap().value);
    }

    #[test]
    fn reports_cover_every_measure() {
        let d = fixtures::drug_joint(0.5).unwrap();
        let all = all_effects(&d, &req()).unwrap();
        let names: Vec<String> = all
            .iter()
            .map(|r| match &r.level {
                Some(l) => format!("{}({l})", r.measure),
                None => r.measure.to_string(),
            })
            .collect();
        assert_eq!(
            names,
            ["TE", "DE", "IE", "NDE", "NIE", "TDE", "TIE", "CDE(z0)", "CDE(z1)", "PIIE", "RESIDUAL"]
        );
        close(all.last().unwrap().value, 0.46 - 0.3725 - 0.0875);
    }
}
