use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid popularity: {0}")]
    InvalidPopularity(String),

    #[error("infeasible placement: {0}")]
    InfeasiblePlacement(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("content index {index} out of range for {n} contents")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("no sign change in [{lo}, {hi}] after {expansions} bracket expansions")]
    NoBracket { lo: f64, hi: f64, expansions: u32 },

    #[error("degenerate helper tier: {0}")]
    DegenerateHelperTier(String),

    #[error("cache budget {budget} exceeds content count {n}")]
    BudgetExceedsLibrary { budget: usize, n: usize },

    #[error(
        "objective increased by {increase:.3e} at outer iteration {iteration} \
         (convexifier scale {scale}); surrogate is not a majorizer here"
    )]
    NonMonotoneDescent {
        iteration: usize,
        increase: f64,
        scale: f64,
    },

    #[error("invalid solver settings: {0}")]
    InvalidSettings(String),

    #[error("invalid simulation settings: {0}")]
    InvalidSimSettings(String),

    #[error("capacity-exact cache assignment needs sum(p) <= slots: got {sum} > {slots}")]
    CapacityExceeded { sum: f64, slots: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
