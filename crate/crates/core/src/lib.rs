//! Direct and indirect effects in mediation analysis: identification
//! formulas over finite joint distributions, a structural-model oracle for
//! counterfactual ground truth, and bounds for partially identified cases.

pub mod bounds;
pub mod cli;
pub mod dist;
pub mod effects;
pub mod error;
pub mod fixtures;
pub mod ingest;
pub mod measure;
pub mod scm;

pub use bounds::{
    affine_in_px, longterm_ie_bound, monotone_direction, proxy_de_bound, reduction_interval, AffineEffect,
    BoundResult, Conditionals, Direction, MonotoneVerdict, Relation,
};
pub use dist::{Assignment, Factor, FiniteDistribution, VariableSpec};
pub use effects::{EffectReport, MeasureRequest};
pub use error::{Error, Result};
pub use measure::{Contrast, Measure};
pub use scm::{oracle_effect, random_scm, CounterfactualTerm, Family, OracleQuery, StructuralModel};
