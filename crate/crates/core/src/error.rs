use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {lhs:?} vs {rhs:?}")]
    DimensionMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },

    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("matrix has numerical rank 0")]
    ZeroMatrix,

    #[error("matrix is singular (rank {rank} of {size}, condition {condition:.3e})")]
    Singular {
        rank: usize,
        size: usize,
        condition: f64,
    },

    #[error("idempotent check failed: relative residual of p*p vs p is {residual:.3e}")]
    NotIdempotent { residual: f64 },

    #[error("no group inverse: rank(M) = {rank}, rank(M^2) = {rank_of_square}")]
    NotGroupInvertible { rank: usize, rank_of_square: usize },

    #[error(
        "group inverse candidate fails the axioms (commute {commute:.3e}, inner {inner:.3e}, outer {outer:.3e})"
    )]
    AxiomViolation {
        commute: f64,
        inner: f64,
        outer: f64,
    },

    #[error("elements are not lambda-commuting (relative residual {residual:.3e})")]
    NoLambda { residual: f64 },

    #[error("elements do not commute (relative residual {residual:.3e})")]
    NotCommuting { residual: f64 },

    #[error("scalar {name} is numerically zero")]
    ZeroScalar { name: &'static str },

    #[error("hypotheses of {theorem} fail: {failing:?}")]
    HypothesisViolation {
        theorem: &'static str,
        failing: Vec<(String, f64)>,
    },

    #[error("variant {variant} is not defined for {theorem}")]
    UnsupportedVariant {
        theorem: &'static str,
        variant: &'static str,
    },

    #[error("search exhausted the enumerated grid for m = {m}, n = {n}")]
    SearchExhausted { m: usize, n: usize },

    #[error("invalid tolerance profile: {0}")]
    InvalidTolerance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("forge contract violated: {0}")]
    ForgeContract(String),

    #[error("{0}")]
    Parse(String),

    #[error("unknown {what} `{value}`")]
    Unknown { what: &'static str, value: String },
}
