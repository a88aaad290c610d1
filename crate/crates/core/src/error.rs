use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is rank deficient (numerical rank {rank} < {cols})")]
    RankDeficient { rank: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("design with {runs} runs cannot be orthogonal in {factors} factors")]
    InfeasibleDesign { runs: usize, factors: usize },
    #[error("column {0} is constant")]
    ConstantColumn(usize),
    #[error("trimmed design box collapses in column {0}")]
    DegenerateBox(usize),
    #[error("all candidate points are excluded")]
    Exhausted,
    #[error("perturbation too large: s_p(L) = {sp_design} <= s_1(D) = {s1_perturbation}")]
    AssumptionViolated {
        sp_design: f64,
        s1_perturbation: f64,
    },
    #[error("term needs at least {needed} predictors, got {got}")]
    DimensionTooSmall { needed: usize, got: usize },
    #[error("misspecification term vanishes on the whole sample")]
    DegenerateSample,
}

pub type Result<T> = core::result::Result<T, Error>;
