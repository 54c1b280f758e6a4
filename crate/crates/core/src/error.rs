use std::fmt;

use thiserror::Error;

use crate::dist::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("level `{level}` is not in the domain of `{variable}`")]
    UnknownLevel { variable: String, level: String },

    #[error("conditioning event {event} has zero probability")]
    ZeroProbabilityCondition { event: String },

    #[error("variable `{0}` has no numeric values")]
    NonNumericTarget(String),

    #[error("invalid distribution: {}", ViolationList(.0))]
    InvalidDistribution(Vec<Violation>),

    #[error("p({0}) required for joint; use bounds mode")]
    MissingFactor(String),

    #[error("factor for `{target}` is invalid: {reason}")]
    InvalidFactor { target: String, reason: String },

    #[error("exposure `{0}` must be binary")]
    NonBinaryExposure(String),

    #[error("mediator `{0}` must be binary")]
    NonBinaryMediator(String),

    #[error("proxy `{0}` must be binary (pass the beyond-paper flag to relax)")]
    NonBinaryProxy(String),

    #[error("total effect is zero; relative reduction is undefined")]
    ZeroTotalEffect,

    #[error("invalid structural model: {0}")]
    InvalidModel(String),

    #[error(
        "structural model is not topologically ordered: `{child}` is declared before its parent `{parent}`"
    )]
    NotTopological { child: String, parent: String },

    #[error("cycle detected through `{0}`")]
    CycleDetected(String),

    #[error("mechanism of `{variable}` has no entry for parent combination {combination}")]
    NonTotalMechanism { variable: String, combination: String },

    #[error("cannot intervene on exogenous variable `{0}`")]
    ExogenousIntervention(String),

    #[error("malformed counterfactual term: {0}")]
    MalformedTerm(String),

    #[error("unsupported measure: {0}")]
    UnsupportedMeasure(String),

    #[error("exogenous state space has {states} joint states, above the budget of {budget}")]
    StateBudgetExceeded { states: u128, budget: u64 },

    #[error("no model satisfying the {constraint} constraint in family {family} after {attempts} draws")]
    RejectionBudgetExceeded { family: String, constraint: String, attempts: usize },

    #[error("record batch is empty")]
    EmptyBatch,

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

struct ViolationList<'a>(&'a [Violation]);

impl fmt::Display for ViolationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
