use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("probability {0} is outside (0, 1); no finite score-scale breakpoint exists")]
    ProbabilityDomain(f64),

    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    NoRoot { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("root search did not converge in {iterations} iterations; best bracket [{lo}, {hi}]")]
    RootNotConverged { iterations: usize, lo: f64, hi: f64 },

    #[error("pooled covariance is singular; collinear columns: {columns:?}")]
    SingularCovariance { columns: Vec<String> },

    #[error("projection has zero variance (beta is zero or lies in the covariance null space)")]
    DegenerateProjection,

    #[error("interval {interval} has vanishing class-0 mass ({mass:e})")]
    VanishingIntervalMass { interval: usize, mass: f64 },

    #[error("target risk vector has r_1 = 0 or r_T = 1; matching breakpoints would be infinite")]
    DegenerateTarget,

    #[error("projected class means are not increasing (mu1 - mu0 = {separation}); interval risk is not increasing in the score")]
    NonIncreasingScore { separation: f64 },

    #[error(transparent)]
    Infeasible(#[from] InfeasibleStep),

    #[error("penalty undefined: projected class-mean separation is zero")]
    PenaltyUndefined,

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("class {0} is absent")]
    ClassAbsent(u8),

    #[error("no feasible solution found across {starts} starts (smallest IRD {best_ird:e})")]
    NoFeasibleSolution { starts: usize, best_ird: f64 },

    #[error("csv error at row {row}, column '{column}': {message}")]
    Csv {
        row: usize,
        column: String,
        message: String,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable short code used by the command-line error line.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "INVALID_INPUT",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::ProbabilityDomain(_) => "PROBABILITY_DOMAIN",
            Error::NoRoot { .. } => "NO_ROOT",
            Error::RootNotConverged { .. } => "ROOT_NOT_CONVERGED",
            Error::SingularCovariance { .. } => "SINGULAR_COVARIANCE",
            Error::DegenerateProjection => "DEGENERATE_PROJECTION",
            Error::VanishingIntervalMass { .. } => "VANISHING_INTERVAL_MASS",
            Error::DegenerateTarget => "DEGENERATE_TARGET",
            Error::NonIncreasingScore { .. } => "NON_INCREASING_SCORE",
            Error::Infeasible(_) => "INFEASIBLE",
            Error::PenaltyUndefined => "PENALTY_UNDEFINED",
            Error::RankDeficient => "RANK_DEFICIENT",
            Error::ClassAbsent(_) => "CLASS_ABSENT",
            Error::NoFeasibleSolution { .. } => "NO_FEASIBLE_SOLUTION",
            Error::Csv { .. } => "CSV",
            Error::Io(_) => "IO",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Which side of the attainable range excluded the target at a sequential
/// matching step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSide {
    /// Every non-empty interval starting at the previous breakpoint already
    /// has risk above the target; the bound is the pointwise posterior at that
    /// breakpoint.
    Below,
    /// Even the unbounded interval has risk below the target.
    Above,
}

/// A sequential breakpoint step whose target risk cannot be reached.
#[derive(Debug, Clone, PartialEq, Error, serde::Serialize, serde::Deserialize)]
#[error("risk target r_{step} = {target} is unattainable: attainable {side:?} bound is {bound}")]
pub struct InfeasibleStep {
    /// 1-based interval index.
    pub step: usize,
    pub target: f64,
    /// Infimum (side = Below) or supremum (side = Above) of the attainable risk.
    pub bound: f64,
    pub side: BoundSide,
}

impl InfeasibleStep {
    /// Smallest achievable absolute deviation for this interval.
    pub fn gap(&self) -> f64 {
        (self.bound - self.target).abs()
    }
}

pub type Result<T> = std::result::Result<T, Error>;
