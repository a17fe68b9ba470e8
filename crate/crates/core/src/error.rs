use thiserror::Error;

use crate::vasicek_moments::ConvergenceReport;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),
    #[error("Feller condition violated: -2*mean_reversion*factor_drift = {lhs} <= factor_vol^2 = {rhs}")]
    FellerViolation { lhs: f64, rhs: f64 },
    #[error("step and path counts must be positive")]
    NonPositiveSteps,
    #[error("insufficient conditioning mass: {found} paths in window, need at least {needed}")]
    InsufficientConditioningMass { found: usize, needed: usize },
    #[error("ODE escape at t = {t}: |gamma| exceeded 1e12")]
    OdeEscape { t: f64 },
    #[error("degenerate factor volatility: closed form needs a nonzero factor variance")]
    DegenerateFactorVolatility,
    #[error("convergence condition violated: value {} at t, t_star = {}", .0.value, .0.t_star)]
    ConvergenceViolated(ConvergenceReport),
    #[error("horizon too large: t*|mean_reversion| = {0} exceeds 300")]
    HorizonTooLarge(f64),
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),
    #[error("factor level must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("mean reversion must be negative, got {0}")]
    NonNegativeMeanReversion(f64),
    #[error("degenerate optimum: singular Lagrange system")]
    DegenerateOptimum,
    #[error("not a maximum: reduced Hessian is not negative definite")]
    NotAMaximum,
    #[error("objective is not quadratic: holdout residual {0:e}")]
    NonQuadraticObjective(f64),
    #[error("risky-asset volatility must be nonzero")]
    ZeroVolatility,
    #[error("risk aversion must exceed -1/2, got {0}")]
    RiskAversionOutOfRange(f64),
    #[error("risk sensitivity must be {0}")]
    ThetaOutOfRange(&'static str),
    #[error("negative discriminant {0} in the benchmark value")]
    NegativeDiscriminant(f64),
    #[error("bandwidth must be positive, got {0}")]
    NonPositiveBandwidth(f64),
    #[error("factor-free asset expected to be the bank account")]
    NotTwoAsset,
}

pub type Result<T> = std::result::Result<T, Error>;
