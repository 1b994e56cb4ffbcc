use thiserror::Error;

/// Every failure mode of the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("distinct points {0} and {1} are at distance 0")]
    ZeroOffDiagonal(usize, usize),
    #[error("negative or non-finite distance at ({0}, {1})")]
    NegativeDistance(usize, usize),
    #[error("nonpositive or non-finite weight at point {0}")]
    NonpositiveWeight(usize),
    #[error("malformed space: {0}")]
    Malformed(String),
    #[error("empty set")]
    EmptySet,
    #[error("tail beyond radius {0} is empty")]
    EmptyTail(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("solver did not reach tolerance: gap {gap:e} after {iterations} iterations")]
    SolverDiverged { gap: f64, iterations: usize },
    #[error("sets touch (distance 0)")]
    TouchingSets,
    #[error("input gradient is infeasible at pair ({0}, {1})")]
    InfeasibleInput(usize, usize),
    #[error("gradient is infeasible at pair ({0}, {1})")]
    InfeasibleGradient(usize, usize),
    #[error("member {0} carries no gradient")]
    MissingGradient(usize),
    #[error("no pair of points is separated at the required scale")]
    NoSeparatedPair,
    #[error("exponents must satisfy 0 < p < p_tilde < p_star")]
    BadExponents,
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
