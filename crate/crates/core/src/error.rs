use thiserror::Error;

use crate::model::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no weight for source `{source_id}`")]
    MissingWeight { source_id: String },

    #[error("extremum of an empty value set is undefined")]
    EmptyExtremum,

    #[error("negative influence {value} from `{rater}` to `{ratee}`")]
    NegativeInfluence {
        rater: String,
        ratee: String,
        value: f64,
    },

    #[error("catalog is invalid: {}", join(.0))]
    InvalidCatalog(Vec<Diagnostic>),

    #[error("missing attribute values at the chosen level: {}", pairs(.0))]
    MissingAttributes(Vec<(String, String)>),

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("attribute `{0}` is used more than once across the objectives")]
    DuplicateObjective(String),

    #[error("no objectives configured")]
    NoObjectives,

    #[error("invalid bound on `{attribute}`: {reason}")]
    InvalidBound { attribute: String, reason: String },

    #[error(
        "mandatory set alone exceeds resources: `{attribute}` needs {required} but the bound is {bound}"
    )]
    MandatoryInfeasible {
        attribute: String,
        required: f64,
        bound: f64,
    },

    #[error("`{a}` and `{b}` must be selected together and also exclude each other")]
    Contradiction { a: String, b: String },

    #[error("implications form a cycle: {}", .0.join(" -> "))]
    ImplicationCycle(Vec<String>),

    #[error(
        "exhaustive search is capped at {cap} requirements but the problem has {size}; use the greedy or hillclimb solver"
    )]
    CapExceeded { size: usize, cap: usize },

    #[error("solver `{solver}` needs {what}")]
    SolverConfig { solver: &'static str, what: String },

    #[error("unknown indicator `{name}`; available: {available}")]
    UnknownIndicator { name: String, available: String },

    #[error("unknown {kind} `{name}` for attribute `{attribute}`")]
    UnknownCoverageKey {
        kind: &'static str,
        attribute: String,
        name: String,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema error at `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}

fn join(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

fn pairs(missing: &[(String, String)]) -> String {
    missing
        .iter()
        .map(|(r, a)| format!("{r}.{a}"))
        .collect::<Vec<_>>()
        .join(", ")
}
