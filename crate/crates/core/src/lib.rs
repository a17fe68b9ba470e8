//! Conditional moments of log-wealth in one-factor market models and the
//! fixed-horizon strategies built on them.
//!
//! The factor follows either an Ornstein-Uhlenbeck (Vasicek) or a square-root
//! (Cox-Ingersoll-Ross) diffusion. For a constant-proportion strategy `h` the
//! log-wealth `F` and factor `X` form a two-dimensional diffusion; the library
//! gives `E[F_t | X_t = x]` and `Var[F_t | X_t = x]` in closed form, maximizes
//! `mean - gamma * variance` over weights summing to one, and compares the
//! result with the Bielecki-Pliska risk-sensitive strategy. Monte-Carlo and
//! ODE oracles in [`sde_oracle`] check every closed form independently.

pub mod bp_benchmark;
pub mod cir_moments;
pub mod error;
pub mod model_core;
pub mod sde_oracle;
pub mod strategy_opt;
pub mod vasicek_moments;

pub use error::{Error, Result};
pub use model_core::{
    CirModelParams, EffectiveCoeffs, FactorDynamics, GaussianLaw, InitialLaw, LinearMarketParams, RiskAversion, StockBankParams,
    Strategy,
};
pub use vasicek_moments::ConditionalMoments;

/// Largest `t * |mean_reversion|` for which `exp(-2 * mean_reversion * t)` is evaluated.
pub const MAX_HORIZON_SCALE: f64 = 300.0;

pub(crate) fn check_horizon(mean_reversion: f64, t: f64) -> Result<()> {
    let scale = t * mean_reversion.abs();
    if scale > MAX_HORIZON_SCALE {
        return Err(Error::HorizonTooLarge(scale));
    }
    Ok(())
}
