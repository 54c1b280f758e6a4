//! Small reference models used by tests, examples and the CLI.
//!
//! The drug model has p(z|x) = 0.75, p(z|x̄) = 0.4 and recovery rates
//! 0.8, 0.4, 0.3, 0.2 for (x, z), (x, z̄), (x̄, z), (x̄, z̄).

use crate::bounds::Conditionals;
use crate::dist::{Assignment, Factor, FiniteDistribution, VariableSpec};
use crate::effects::MeasureRequest;
use crate::error::Result;
use crate::measure::Contrast;
use crate::scm::random::{add_response, Coupling};
use crate::scm::StructuralModel;

pub const DRUG_MEDIATOR: [f64; 2] = [0.4, 0.75];
pub const DRUG_OUTCOME: [f64; 4] = [0.2, 0.3, 0.4, 0.8];

fn specs() -> Vec<VariableSpec> {
    vec![
        VariableSpec::new("X", ["x0", "x1"]),
        VariableSpec::new("Z", ["z0", "z1"]),
        VariableSpec::new("Y", ["y0", "y1"]),
    ]
}

fn bernoulli(p: f64) -> Vec<f64> {
    vec![1.0 - p, p]
}

fn rows(z: [f64; 2], y: [f64; 4]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    (z.iter().map(|&p| bernoulli(p)).collect(), y.iter().map(|&p| bernoulli(p)).collect())
}

/// X → Z → Y, X → Y over levels x0/x1, z0/z1, y0/y1 with `p(x1) = px`,
/// `z[i] = p(z1 | x_i)` and `y[2i + j] = p(y1 | x_i, z_j)`.
pub fn mediation_joint(px: f64, z: [f64; 2], y: [f64; 4]) -> Result<FiniteDistribution> {
    let (zr, yr) = rows(z, y);
    let mut y_rows = Vec::new();
    for (i, x) in ["x0", "x1"].iter().enumerate() {
        for (j, zl) in ["z0", "z1"].iter().enumerate() {
            y_rows.push((Assignment::new().with("X", *x).with("Z", *zl), yr[2 * i + j].clone()));
        }
    }
    FiniteDistribution::from_factors(
        specs(),
        &[
            Factor::marginal("X", bernoulli(px)),
            Factor::conditional(
                "Z",
                vec!["X".into()],
                vec![
                    (Assignment::new().with("X", "x0"), zr[0].clone()),
                    (Assignment::new().with("X", "x1"), zr[1].clone()),
                ],
            ),
            Factor::conditional("Y", vec!["X".into(), "Z".into()], y_rows),
        ],
    )
}

pub fn drug_joint(px: f64) -> Result<FiniteDistribution> {
    mediation_joint(px, DRUG_MEDIATOR, DRUG_OUTCOME)
}

pub fn drug_conditionals() -> Result<Conditionals> {
    let [x, z, y]: [VariableSpec; 3] = specs().try_into().expect("three specs");
    let (zr, yr) = rows(DRUG_MEDIATOR, DRUG_OUTCOME);
    Conditionals::new(x, z, y, Contrast::new("X", "x1", "x0"), zr, yr)
}

/// Treated x1 against x0, mediator Z, outcome Y.
pub fn drug_request() -> MeasureRequest {
    MeasureRequest::new(Contrast::new("X", "x1", "x0"), "Z", "Y")
}

/// A structural model whose observational distribution is `drug_joint(px)`.
pub fn drug_scm(px: f64) -> Result<StructuralModel> {
    let [x, z, y]: [VariableSpec; 3] = specs().try_into().expect("three specs");
    let (zr, yr) = rows(DRUG_MEDIATOR, DRUG_OUTCOME);
    let builder = StructuralModel::builder()
        .exogenous(VariableSpec::new("U_X", ["u0", "u1"]), bernoulli(px))
        .endogenous_fn(x, &["U_X"], |l| l[0]);
    let builder = add_response(builder, z, &[("X", 2)], &zr, Coupling::Comonotone);
    add_response(builder, y, &[("X", 2), ("Z", 2)], &yr, Coupling::Comonotone).build()
}
