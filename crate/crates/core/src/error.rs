use thiserror::Error;

/// Errors raised by chain construction, solvers and the search routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("linear system is singular")]
    SingularSystem,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("d({cap}) = {value} still exceeds epsilon; chain is periodic or cap is too small")]
    CapExceeded { cap: usize, value: String },
    #[error("chain has period {period}; d(t) never falls below {floor}")]
    Periodic { period: usize, floor: String },
    #[error("d(t) increased at t = {t}: {before} -> {after}")]
    MonotonicityViolation { t: usize, before: String, after: String },
    #[error("state limit exceeded: {states} states (limit {limit})")]
    StateLimitExceeded { states: usize, limit: usize },
    #[error("search space exceeded: {size} evaluations (budget {budget})")]
    SearchSpaceExceeded { size: u128, budget: u128 },
    #[error("gadget certificate falsified: {0}")]
    GadgetFalsified(String),
    #[error("no valid reflection for this case: {0}")]
    InvalidCase(String),
    #[error("exact evaluation budget exceeded: {work} (budget {budget})")]
    BudgetExceeded { work: u128, budget: u128 },
    #[error("set is not symmetric about the origin: {0}")]
    SymmetryViolation(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("chain is not lumpable: vertices {first} and {second} disagree")]
    NotLumpable { first: String, second: String },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
