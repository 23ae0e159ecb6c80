use core::fmt;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq)]
pub enum CptError {
    /// Two containers that must agree in length do not.
    DimensionMismatch { expected: usize, got: usize },
    /// A probability argument fell outside `[0, 1]`.
    ProbabilityOutOfRange(f64),
    /// Parameter validation failed (message names the offending field).
    InvalidParams(&'static str),
    /// Input data contained a non-finite value.
    NonFinite(&'static str),
    /// Portfolio weights do not sum to one within tolerance.
    BudgetViolation(f64),
    /// The constraint set admits no feasible point.
    InfeasibleConstraints,
    /// A solver configuration precondition failed.
    UnsupportedConfig(&'static str),
    /// An objective or gradient evaluated to a non-finite value mid-solve.
    NonFiniteObjective,
    /// Too few samples for the requested statistic.
    NotEnoughSamples { required: usize, got: usize },
    /// Grid search is limited to 2 or 3 assets.
    GridDimension(usize),
    /// Grid step must lie in (0, 0.1].
    GridStep(f64),
}

impl fmt::Display for CptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CptError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            CptError::ProbabilityOutOfRange(p) => {
                write!(f, "probability {p} outside [0, 1]")
            }
            CptError::InvalidParams(what) => write!(f, "invalid parameters: {what}"),
            CptError::NonFinite(what) => write!(f, "non-finite value in {what}"),
            CptError::BudgetViolation(sum) => {
                write!(f, "portfolio weights sum to {sum}, expected 1")
            }
            CptError::InfeasibleConstraints => write!(f, "constraint set is infeasible"),
            CptError::UnsupportedConfig(what) => write!(f, "unsupported configuration: {what}"),
            CptError::NonFiniteObjective => write!(f, "objective evaluated to a non-finite value"),
            CptError::NotEnoughSamples { required, got } => {
                write!(f, "need at least {required} samples, got {got}")
            }
            CptError::GridDimension(n) => {
                write!(f, "grid search supports 2 or 3 assets, got {n}")
            }
            CptError::GridStep(s) => write!(f, "grid step {s} outside (0, 0.1]"),
        }
    }
}

impl core::error::Error for CptError {}

pub type Result<T> = core::result::Result<T, CptError>;
