use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series variable mismatch: {0} vs {1}")]
    TagMismatch(String, String),
    #[error("division by a series with zero constant term")]
    DivisionByZeroSeries,
    #[error("inner series of a composition has a nonzero constant term")]
    NonzeroInnerConstant,
    #[error("series to revert needs zero constant term and nonzero linear term")]
    NonUnitLinearCoefficient,
    #[error("evaluation outside the convergence heuristic: tail {tail:e} > tol {tol:e}")]
    OutsideConvergenceHeuristic { tail: f64, tol: f64 },
    #[error("continuation path passes within {distance:e} of the singularity {singularity}")]
    PathTooCloseToSingularity { singularity: String, distance: f64 },
    #[error("continuation step underflow near t = {0}")]
    StepUnderflow(String),
    #[error("solution y vanishes at t = {0}")]
    ZeroDenominator(String),
    #[error("degenerate puncture: {0}")]
    DegeneratePuncture(String),
    #[error("Q_j vanishes")]
    ZeroQ,
    #[error("cusp representatives violate 0 < c1 < c2 < 1: c1 = {c1}, c2 = {c2}")]
    OrderingViolation { c1: f64, c2: f64 },
    #[error("generator relation violated: deviation 2^{log2_dev:.1}")]
    RelationViolation { log2_dev: f64 },
    #[error("probe outside the series convergence domain: |q| = {0}")]
    ConvergenceDomainViolation(f64),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("residual certificate failed: {0}")]
    ResidualCheckFailed(String),
    #[error("continuation step too large at index {0}")]
    StepTooLarge(usize),
    #[error("identity {name} violated at coefficient {index}: relative deviation 2^{log2_dev:.1}")]
    IdentityViolation { name: String, index: usize, log2_dev: f64 },
    #[error("basis of weight {weight} is rank deficient: rank {rank} < {expected}")]
    RankDeficient { weight: u32, rank: usize, expected: usize },
    #[error("punctures collide: {0}")]
    CollidingPunctures(String),
    #[error("unsupported transform: {0}")]
    UnsupportedTransform(String),
    #[error("ill-conditioned fit: condition number 2^{log2_cond:.1}")]
    IllConditionedFit { log2_cond: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    /// True for failures caused by the numbers rather than the request.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidInput(_)
                | Error::Parse(_)
                | Error::DegeneratePuncture(_)
                | Error::CollidingPunctures(_)
                | Error::UnsupportedTransform(_)
                | Error::TagMismatch(..)
        )
    }
}
