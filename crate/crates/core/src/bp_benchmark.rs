//! The Bielecki-Pliska risk-sensitive benchmark for a stock/bank market,
//! and comparisons of its weight with the fixed-time optimum.
//!
//! Risk sensitivity `theta` corresponds to risk aversion `gamma = theta / 4`.

use serde::{Deserialize, Serialize};

use crate::model_core::{LinearMarketParams, RiskAversion, StockBankParams, Strategy};
use crate::strategy_opt::{maximize_on_hyperplane, optimal_two_asset_vasicek, QuadraticObjective, TwoAssetVasicekCoeffs};
use crate::{Error, Result};

/// `gamma = theta / 4`.
pub fn gamma_for_theta(theta: f64) -> Result<RiskAversion> {
    RiskAversion::new(theta / 4.0)
}

fn require_vol(p: &StockBankParams) -> Result<()> {
    if p.vol == 0.0 {
        return Err(Error::ZeroVolatility);
    }
    Ok(())
}

fn require_nonnegative(theta: f64) -> Result<()> {
    if !(theta >= 0.0) {
        return Err(Error::ThetaOutOfRange("nonnegative"));
    }
    Ok(())
}

/// Risky weight of the risk-sensitive strategy at factor level `r`.
pub fn h_theta(p: &StockBankParams, theta: f64, r: f64) -> Result<f64> {
    require_vol(p)?;
    require_nonnegative(theta)?;
    Ok((p.drift + (p.loading - 1.0) * r) / ((1.0 + theta / 2.0) * p.vol * p.vol))
}

/// `beta^2 + theta lambda^2 (alpha_1 - 1)^2 / ((theta + 2) sigma_1^2)`.
fn discriminant(p: &StockBankParams, theta: f64) -> f64 {
    let k = p.loading - 1.0;
    p.mean_reversion.powi(2) + theta * p.factor_vol.powi(2) * k * k / ((theta + 2.0) * p.vol * p.vol)
}

/// The auxiliary pair `(N1, N2)` of the quadratic ergodic solution
/// `v(R) = N1 R^2 + N2 R`.
///
/// `N1 = (beta + sqrt D) / (lambda^2 theta)` is computed as
/// `c / (sqrt D - beta)`, `c = (alpha_1 - 1)^2 / ((theta + 2) sigma_1^2)`,
/// which is exact and has no removable singularity at `lambda^2 theta = 0`.
pub fn auxiliary_coefficients(p: &StockBankParams, theta: f64) -> Result<(f64, f64)> {
    require_vol(p)?;
    let d = discriminant(p, theta);
    if d < 0.0 {
        return Err(Error::NegativeDiscriminant(d));
    }
    let s2 = (theta + 2.0) * p.vol * p.vol;
    let k = p.loading - 1.0;
    let root = d.sqrt();
    let n1 = k * k / s2 / (root - p.mean_reversion);
    let n2 = (1.0 + 2.0 * p.drift * k / s2 + 2.0 * p.factor_drift * n1) / root;
    Ok((n1, n2))
}

/// Optimal long-run risk-sensitive objective value.
pub fn rho_of_theta(p: &StockBankParams, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::ThetaOutOfRange("positive"));
    }
    let (n1, n2) = auxiliary_coefficients(p, theta)?;
    Ok(value_from(p, theta, n1, n2))
}

fn value_from(p: &StockBankParams, theta: f64, n1: f64, n2: f64) -> f64 {
    let lam2 = p.factor_vol * p.factor_vol;
    lam2 * n1 + p.factor_drift * n2 - lam2 * theta * n2 * n2 / 4.0
        + p.drift * p.drift / ((theta + 2.0) * p.vol * p.vol)
}

/// Same value with `N2 = (1 - 2 A_1 (alpha_1 - 1)/((theta+2) sigma_1^2) + 2 B N1) / sqrt D`,
/// the sign as it circulates. It does not solve the ergodic equation and
/// tends to the wrong limit as `theta -> 0`; kept to report the gap.
pub fn literal_rho_of_theta(p: &StockBankParams, theta: f64) -> Result<f64> {
    let (n1, _) = auxiliary_coefficients(p, theta)?;
    let s2 = (theta + 2.0) * p.vol * p.vol;
    let n2 = (1.0 - 2.0 * p.drift * (p.loading - 1.0) / s2 + 2.0 * p.factor_drift * n1) / discriminant(p, theta).sqrt();
    Ok(value_from(p, theta, n1, n2))
}

/// Expected long-run growth rate of log-wealth under the risk-sensitive weight.
pub fn rho_theta_growth(p: &StockBankParams, theta: f64) -> Result<f64> {
    require_vol(p)?;
    require_nonnegative(theta)?;
    let (b, be, k) = (p.factor_drift, p.mean_reversion, p.loading - 1.0);
    let bracket = (p.drift - b / be * k).powi(2) - p.factor_vol.powi(2) * k * k / (2.0 * be);
    Ok(-b / be + 2.0 * (theta + 1.0) / ((theta + 2.0).powi(2) * p.vol * p.vol) * bracket)
}

/// `theta -> 0` limit of [`rho_theta_growth`], written out separately.
pub fn growth_limit(p: &StockBankParams) -> Result<f64> {
    require_vol(p)?;
    let (b, be, k, s2) = (p.factor_drift, p.mean_reversion, p.loading - 1.0, p.vol * p.vol);
    Ok(-b / be + (p.drift - b / be * k).powi(2) / (2.0 * s2) - p.factor_vol.powi(2) * k * k / (4.0 * s2 * be))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BpQuantities {
    pub h_theta: f64,
    pub rho_of_theta: f64,
    pub rho_theta_growth: f64,
    pub n1: f64,
    pub n2: f64,
}

pub fn bp_quantities(p: &StockBankParams, theta: f64, r: f64) -> Result<BpQuantities> {
    let (n1, n2) = auxiliary_coefficients(p, theta)?;
    Ok(BpQuantities {
        h_theta: h_theta(p, theta, r)?,
        rho_of_theta: rho_of_theta(p, theta)?,
        rho_theta_growth: rho_theta_growth(p, theta)?,
        n1,
        n2,
    })
}

/// Minimum of `(1/2)(theta/2 + 1) h' S S' h - h'(drift + loading x)` over
/// `{sum h = 1}`, and its minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct KTheta {
    pub value: f64,
    pub selector: Strategy,
}

pub fn k_theta(params: &LinearMarketParams, theta: f64, x: f64) -> Result<KTheta> {
    require_nonnegative(theta)?;
    params.validate().into_result()?;
    let scale = 0.5 * (theta / 2.0 + 1.0);
    let cov = params.return_covariance();
    let obj = QuadraticObjective {
        quad: cov.iter().map(|row| row.iter().map(|c| -scale * c).collect()).collect(),
        lin: params.drift.iter().zip(&params.loading).map(|(a, l)| a + l * x).collect(),
        constant: 0.0,
    };
    let selector = maximize_on_hyperplane(&obj)?;
    Ok(KTheta { value: -obj.value(selector.weights()), selector })
}

/// Two-asset closed form `-R - (A_1 + (alpha_1 - 1) R)^2 / ((theta + 2) sigma_1^2)`.
pub fn k_theta_stock_bank(p: &StockBankParams, theta: f64, r: f64) -> f64 {
    -r - (p.drift + (p.loading - 1.0) * r).powi(2) / ((theta + 2.0) * p.vol * p.vol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    /// `f_bar` at the fixed-time optimum minus `f_bar` at the benchmark weight.
    pub diff: f64,
    /// Curvature at `t = 0` of `diff` as a function of time.
    pub q_second_deriv_at_zero: f64,
    /// Sign condition under which `diff > 0` for small `t` and `gamma`.
    /// For `alpha_1 = 1` it is `A_1 > 0`.
    pub condition_usl: bool,
}

/// Compares the conditional mean log-wealth (flat law) reached by the
/// fixed-time optimum and by the risk-sensitive weight.
pub fn compare_expectations(
    p: &StockBankParams,
    gamma: RiskAversion,
    theta: f64,
    t: f64,
    r: f64,
) -> Result<ComparisonResult> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let coeffs = TwoAssetVasicekCoeffs::new(p, 0.0, t, r)?;
    let h_bar = optimal_two_asset_vasicek(p, gamma, t, r)?;
    let h_bp = h_theta(p, theta, r)?;
    let k = p.loading - 1.0;
    let condition_usl = if k != 0.0 {
        (r + p.factor_drift / p.mean_reversion) * (r + p.drift / k) > 0.0
    } else {
        p.drift > 0.0
    };
    Ok(ComparisonResult {
        diff: coeffs.mean(h_bar) - coeffs.mean(h_bp),
        q_second_deriv_at_zero: q_second_derivative_at_zero(p, gamma.value(), theta, r),
        condition_usl,
    })
}

/// Exact `q''(0)` for arbitrary `gamma`, `theta`:
/// `(B + be r)(alpha_1 - 1)(A_1 + (alpha_1 - 1) r)(8 g^2 - 4 g theta - theta)
///  / (sigma_1^2 (2g + 1)^2 (theta + 2))`.
pub fn q_second_derivative_at_zero(p: &StockBankParams, gamma: f64, theta: f64, r: f64) -> f64 {
    let k = p.loading - 1.0;
    (p.factor_drift + p.mean_reversion * r) * k * (p.drift + k * r) * (8.0 * gamma * gamma - 4.0 * gamma * theta - theta)
        / (p.vol * p.vol * (2.0 * gamma + 1.0).powi(2) * (theta + 2.0))
}

/// `q''(0)` at `theta = 4 gamma` as it circulates. Agrees with
/// [`q_second_derivative_at_zero`] only to first order in `gamma`.
pub fn literal_q_second_derivative(p: &StockBankParams, gamma: f64, r: f64) -> f64 {
    let (a1, s1, b, be, lam) = (p.drift, p.vol, p.factor_drift, p.mean_reversion, p.factor_vol);
    let a = p.loading - 1.0;
    let g = gamma;
    let num = 8.0 * r * r * g * g * lam * a.powi(3)
        - 2.0 * ((1.0 + 2.0 * g) * g * be * s1 * r * r + ((1.0 + 2.0 * g) * g * b * s1 - 8.0 * g * g * lam * a1) * r) * a * a
        - 2.0
            * ((-2.0 * (2.0 * g + 1.0) * g * g * lam * s1 * s1 + (1.0 + 2.0 * g) * g * a1 * be * s1) * r
                + (1.0 + 2.0 * g) * g * a1 * b * s1
                - 4.0 * g * g * lam * a1 * a1)
            * a
        + 4.0 * (2.0 * g + 1.0) * g * g * lam * s1 * s1 * a1;
    num / (s1.powi(3) * (1.0 + 6.0 * g + 12.0 * g * g + 8.0 * g.powi(3)))
}

/// First-order-in-`gamma` series of `q''(0)` as it circulates:
/// `-2 be sigma_1 (alpha_1-1)^2 (r + B/be)(r + A_1/(alpha_1-1)) gamma`.
/// The exact leading term has `1/sigma_1^2` in place of `sigma_1`.
pub fn literal_q_second_derivative_series(p: &StockBankParams, gamma: f64, r: f64) -> f64 {
    let k = p.loading - 1.0;
    -2.0 * p.mean_reversion * p.vol * k * k * (r + p.factor_drift / p.mean_reversion) * (r + p.drift / k) * gamma
}

/// `diff` at `gamma = theta = 0`:
/// `(alpha_1-1)^2 (r + B/be)^2 t ((e^{-be t} - 1)/(t be) + 1)^2 / (2 sigma_1^2)`.
pub fn zero_risk_gap(p: &StockBankParams, t: f64, r: f64) -> f64 {
    let (b, be, k) = (p.factor_drift, p.mean_reversion, p.loading - 1.0);
    let bracket = (-be * t).exp_m1() / (t * be) + 1.0;
    k * k * (r + b / be).powi(2) * t * bracket * bracket / (2.0 * p.vol * p.vol)
}
