use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Variants are grouped by the stage that raises them. [`Error::code`] gives
/// the stable snake-case identifier used in the command-line error JSON.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // registry
    #[error("ADT `{0}` is already registered")]
    DuplicateAdt(String),
    #[error("ADT `{0}` declares no constructors")]
    EmptyAdt(String),
    #[error("ADT `{adt}` declares constructor `{con}` more than once")]
    DuplicateConstructor { adt: String, con: String },
    #[error("field of `{adt}::{con}` refers to unknown type `{ty}`")]
    UnknownFieldType { adt: String, con: String, ty: String },
    #[error("mutually recursive ADTs are not supported: {}", .0.join(" -> "))]
    MutualRecursionUnsupported(Vec<String>),
    #[error("`{adt}::{con}` refers to `{adt}` inside a tuple; recursive fields must be direct")]
    NestedRecursionUnsupported { adt: String, con: String },
    #[error("unknown ADT `{0}`")]
    UnknownAdt(String),
    #[error("ADT `{adt}` has no constructor `{con}`")]
    UnknownConstructor { adt: String, con: String },

    // typing
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("unbound variable `{0}`")]
    UnboundVar(String),
    #[error("projection `{path}` does not fit type {ty}")]
    BadProjection { path: String, ty: String },
    #[error("bad roll: {0}")]
    BadRoll(String),
    #[error("bad unroll: {0}")]
    BadUnroll(String),
    #[error("residual match node at {0}")]
    ResidualMatch(String),

    // serialization
    #[error("parse error at {location}: {detail}")]
    Parse { location: String, detail: String },

    // matchers
    #[error("embedded pattern used outside of a match context")]
    MatchOutsideContext,
    #[error("nested pattern on a recursive field; inspect it with a separate match")]
    RecursiveSubPattern,
    #[error("embedded function is not pure: two evaluations disagree")]
    PurityViolation,

    // evaluation
    #[error("read of an undefined (poisoned) value")]
    PoisonRead,
    #[error("tag {tag} out of range for `{adt}` ({count} constructors)")]
    BadTag { adt: String, tag: u32, count: usize },
    #[error("no case branch matched the scrutinee")]
    NoBranchMatched,
    #[error("integer division by zero")]
    IntegerDivByZero,
    #[error("value does not fit its type: {0}")]
    MalformedValue(String),

    // lowering
    #[error("malformed case traces: {0}")]
    MalformedTraces(String),

    // command line
    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error("bad arguments: {0}")]
    BadArgs(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::DuplicateAdt(_) => "duplicate_adt",
            Error::EmptyAdt(_) => "empty_adt",
            Error::DuplicateConstructor { .. } => "duplicate_constructor",
            Error::UnknownFieldType { .. } => "unknown_field_type",
            Error::MutualRecursionUnsupported(_) => "mutual_recursion_unsupported",
            Error::NestedRecursionUnsupported { .. } => "nested_recursion_unsupported",
            Error::UnknownAdt(_) => "unknown_adt",
            Error::UnknownConstructor { .. } => "unknown_constructor",
            Error::ArityMismatch { .. } => "arity_mismatch",
            Error::TypeMismatch(_) => "type_mismatch",
            Error::UnboundVar(_) => "unbound_var",
            Error::BadProjection { .. } => "bad_projection",
            Error::BadRoll(_) => "bad_roll",
            Error::BadUnroll(_) => "bad_unroll",
            Error::ResidualMatch(_) => "residual_match",
            Error::Parse { .. } => "parse_error",
            Error::MatchOutsideContext => "match_outside_context",
            Error::RecursiveSubPattern => "recursive_sub_pattern",
            Error::PurityViolation => "purity_violation",
            Error::PoisonRead => "poison_read",
            Error::BadTag { .. } => "bad_tag",
            Error::NoBranchMatched => "no_branch_matched",
            Error::IntegerDivByZero => "integer_div_by_zero",
            Error::MalformedValue(_) => "malformed_value",
            Error::MalformedTraces(_) => "malformed_traces",
            Error::UnknownExample(_) => "unknown_example",
            Error::BadArgs(_) => "bad_args",
        }
    }

    pub(crate) fn parse(location: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            detail: detail.into(),
        }
    }
}
