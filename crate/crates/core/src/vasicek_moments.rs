//! Closed-form conditional mean and variance of log-wealth given the factor
//! level, for an Ornstein-Uhlenbeck factor with a Gaussian or flat initial law.
//!
//! Notation in comments: `c` are the [`EffectiveCoeffs`] (drift `a`, loading
//! `al`, variances `s1 = wealth_var`, `s2 = factor_var`, `s3 = cross_cov`),
//! `b` the factor drift, `be` the mean reversion, `s` the initial factor std.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model_core::{EffectiveCoeffs, FactorDynamics, GaussianLaw, InitialLaw};
use crate::sde_oracle::GammaVector;
use crate::{check_horizon, Error, Result};

/// `E[F_t | X_t = x]` and `Var[F_t | X_t = x]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalMoments {
    pub mean: f64,
    pub variance: f64,
}

/// Integrability condition of the joint density at time t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Gaussian law: the condition value U. Flat law: the first condition.
    pub value: f64,
    /// Flat law only: the second condition.
    pub secondary: Option<f64>,
    pub ok: bool,
    /// First time in (0, 100/|be|] where the condition fails; infinite if none.
    pub t_star: f64,
}

/// Strict positivity margin for the convergence condition.
pub const CONVERGENCE_TOL: f64 = 1e-10;

fn check_time(be: f64, t: f64) -> Result<()> {
    if !(be < 0.0) {
        return Err(Error::NonNegativeMeanReversion(be));
    }
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    check_horizon(be, t)
}

/// Moments under the flat (uniform, L -> infinity) initial factor law.
pub fn moments_uniform(
    c: &EffectiveCoeffs,
    factor: FactorDynamics,
    f0: f64,
    t: f64,
    x: f64,
) -> Result<ConditionalMoments> {
    let be = factor.mean_reversion;
    check_time(be, t)?;
    Ok(ConditionalMoments {
        mean: uniform_mean(c, factor, f0, t, x),
        variance: uniform_variance(c, be, t),
    })
}

fn uniform_mean(c: &EffectiveCoeffs, factor: FactorDynamics, f0: f64, t: f64, x: f64) -> f64 {
    let (b, be) = (factor.factor_drift, factor.mean_reversion);
    let (a, al) = (c.drift, c.loading);
    let pull = be * x + b;
    // (1 - e^{-be t}) computed without cancellation for small t.
    let one_minus = -(-be * t).exp_m1();
    pull * al * one_minus / (be * be) - (b * al - a * be) * t / be + f0
}

fn uniform_variance(c: &EffectiveCoeffs, be: f64, t: f64) -> f64 {
    let (al, s1, s2, s3) = (c.loading, c.wealth_var, c.factor_var, c.cross_cov);
    let em = (-be * t).exp();
    let be3 = be * be * be;
    -(-4.0 * s2 * al * al + 4.0 * al * s3 * be) * em / (2.0 * be3)
        - s2 * al * al * em * em / (2.0 * be3)
        - (4.0 * al * be * be * t * s3 - 2.0 * s1 * t * be3 + 3.0 * s2 * al * al
            - 2.0 * al * al * be * t * s2
            - 4.0 * al * s3 * be)
            / (2.0 * be3)
}

/// Moments under a Gaussian initial factor law.
pub fn moments_gaussian(
    c: &EffectiveCoeffs,
    factor: FactorDynamics,
    law: &GaussianLaw,
    t: f64,
    x: f64,
) -> Result<ConditionalMoments> {
    let be = factor.mean_reversion;
    check_time(be, t)?;
    if t == 0.0 {
        return Ok(ConditionalMoments { mean: law.initial_log_wealth, variance: 0.0 });
    }
    let report = convergence_gaussian(c, be, law.factor_std, t);
    if !report.ok {
        return Err(Error::ConvergenceViolated(report));
    }
    Ok(ConditionalMoments {
        mean: gaussian_mean(c, factor, law, law.factor_std, t, x),
        variance: gaussian_variance(c, be, law.factor_std, t),
    })
}

/// Dispatches on the initial law.
pub fn moments(
    c: &EffectiveCoeffs,
    factor: FactorDynamics,
    law: &InitialLaw,
    t: f64,
    x: f64,
) -> Result<ConditionalMoments> {
    match law {
        InitialLaw::Gaussian(g) => moments_gaussian(c, factor, g, t, x),
        InitialLaw::UniformLimit { initial_log_wealth } => {
            moments_uniform(c, factor, *initial_log_wealth, t, x)
        }
    }
}

fn gaussian_mean(
    c: &EffectiveCoeffs,
    factor: FactorDynamics,
    law: &GaussianLaw,
    s: f64,
    t: f64,
    x: f64,
) -> f64 {
    let (b, be) = (factor.factor_drift, factor.mean_reversion);
    let (a, al, s2, s3) = (c.drift, c.loading, c.factor_var, c.cross_cov);
    let (f0, x0) = (law.initial_log_wealth, law.factor_mean);
    let e1 = (be * t).exp();
    let e2 = e1 * e1;
    let ss = s * s;
    let be2 = be * be;
    let num = ((2.0 * be2 * x * al + 2.0 * b * al * be) * e1
        + (-2.0 * be2 * x * al + (-2.0 * a * t - 2.0 * f0) * be2 * be + 2.0 * be2 * b * al * t
            - 2.0 * b * al * be)
            * e2)
        * ss
        + 2.0
            * ((s2 * al - s3 * be) * be * x - be2 * x0 * s3 + (s2 * x0 * al - 2.0 * b * s3) * be
                + 2.0 * s2 * b * al)
            * e1
        + (-be * x * al * s2 + (2.0 * x0 * s3 - a * t * s2 - f0 * s2) * be2
            + ((b * t * s2 - s2 * x0) * al + 2.0 * b * s3) * be
            - 2.0 * s2 * b * al)
            * e2
        + (-s2 * be * al + 2.0 * s3 * be2) * x
        + (a * t * s2 + f0 * s2) * be2
        + ((-s2 * x0 - b * t * s2) * al + 2.0 * b * s3) * be
        - 2.0 * s2 * b * al;
    -num / (be2 * ((2.0 * be * ss + s2) * e2 - s2))
}

/// Exact conditional variance under the Gaussian law; equals `-2 gamma_4(t)`.
fn gaussian_variance(c: &EffectiveCoeffs, be: f64, s: f64, t: f64) -> f64 {
    let (al, s1, s2, s3) = (c.loading, c.wealth_var, c.factor_var, c.cross_cov);
    let e1 = (be * t).exp();
    let e2 = e1 * e1;
    let ss = s * s;
    let (be2, be3) = (be * be, be * be * be);
    let be4 = be2 * be2;
    let al2 = al * al;
    let num = e2
        * (s1 * s2 * be3 * t + 2.0 * s1 * be4 * ss * t + s2 * s2 * al2 * be * t
            - 2.0 * s2 * s2 * al2
            - 2.0 * s2 * s3 * al * be2 * t
            + 4.0 * s2 * s3 * al * be
            + 2.0 * s2 * al2 * be2 * ss * t
            - 3.0 * s2 * al2 * be * ss
            - 2.0 * s3 * s3 * be2
            - 4.0 * s3 * al * be3 * ss * t
            + 4.0 * s3 * al * be2 * ss)
        + e1 * (4.0 * s2 * s2 * al2 - 8.0 * s2 * s3 * al * be + 4.0 * s2 * al2 * be * ss
            + 4.0 * s3 * s3 * be2
            - 4.0 * s3 * al * be2 * ss)
        - s1 * s2 * be3 * t
        - s2 * s2 * al2 * be * t
        - 2.0 * s2 * s2 * al2
        + 2.0 * s2 * s3 * al * be2 * t
        + 4.0 * s2 * s3 * al * be
        - s2 * al2 * be * ss
        - 2.0 * s3 * s3 * be2;
    num / (be3 * ((2.0 * be * ss + s2) * e2 - s2))
}

/// The variance expression as it circulates in the literal closed form,
/// `s1 t - 2 R` instead of the exact `s1 t + R`. Kept only to report the gap.
pub fn literal_gaussian_variance(c: &EffectiveCoeffs, be: f64, s: f64, t: f64) -> f64 {
    let (al, s1, s2, s3) = (c.loading, c.wealth_var, c.factor_var, c.cross_cov);
    let e1 = (be * t).exp();
    let e2 = e1 * e1;
    let ss = s * s;
    let (be2, be3) = (be * be, be * be * be);
    let al2 = al * al;
    let num = (8.0 * (be2 * s3 * al - s2 * al2 * be) * e1
        + 2.0 * s2 * al2 * be
        + (2.0 * s1 * t * be2 * be2 + 8.0 * s3 * be3 * al * t
            - 4.0 * (2.0 * s3 * al + s2 * al2 * t) * be2
            + 6.0 * s2 * al2 * be)
            * e2)
        * ss
        + 8.0 * (2.0 * s2 * al * s3 * be - s2 * s2 * al2 - s3 * s3 * be2) * e1
        + (4.0 * (s3 * al * t * s2 + s3 * s3) * be2 - 2.0 * (4.0 * al * s3 * s2 + s2 * s2 * al2 * t) * be
            + 4.0 * s2 * s2 * al2
            + s1 * t * be3 * s2)
            * e2
        - 4.0 * (s3 * al * t * s2 - s3 * s3) * be2
        - 2.0 * (4.0 * al * s3 * s2 - s2 * s2 * al2 * t) * be
        + 4.0 * s2 * s2 * al2
        - s1 * t * be3 * s2;
    num / (be3 * (-s2 + 2.0 * e2 * be * ss + e2 * s2))
}

/// Gaussian-law condition value U(t).
pub fn convergence_value_gaussian(c: &EffectiveCoeffs, be: f64, s: f64, t: f64) -> f64 {
    let (al, s1, s2, s3) = (c.loading, c.wealth_var, c.factor_var, c.cross_cov);
    let e1 = (be * t).exp();
    let e2 = e1 * e1;
    let ss = s * s;
    let be2 = be * be;
    let al2 = al * al;
    let num = (-4.0 * al2 * s2 * s2 - 4.0 * s3 * s3 * be2 + 8.0 * ss * al * s3 * be2
        - 6.0 * al2 * ss * s2 * be
        + 8.0 * al * s2 * s3 * be
        + (s2 + 2.0 * be * ss) * (2.0 * al2 * s2 - 4.0 * al * be * s3 - be2 * s1) * be * t)
        * e2
        + 8.0 * ((s3 * be - s2 * al).powi(2) - ss * al * be * (s3 * be - s2 * al)) * e1
        + (s1 * be2 - 2.0 * al2 * s2 + 4.0 * al * s3 * be) * s2 * be * t
        - 4.0 * s3 * s3 * be2
        - 4.0 * (s3 * be - s2 * al).powi(2)
        - 2.0 * al2 * ss * s2 * be;
    num / ((2.0 * be * ss + s2) * e2 - s2)
}

/// `lim_{s -> infinity} U`.
pub fn convergence_value_large_s(c: &EffectiveCoeffs, be: f64, t: f64) -> f64 {
    let (al, s1, s2, s3) = (c.loading, c.wealth_var, c.factor_var, c.cross_cov);
    let em = (-be * t).exp();
    4.0 * al * s3 * be - 3.0 * s2 * al * al
        + (2.0 * be * s2 * al * al - s1 * be * be * be - 4.0 * be * be * s3 * al) * t
        + (-4.0 * al * s3 * be + 4.0 * s2 * al * al) * em
        - al * al * s2 * em * em
}

/// `lim_{s -> 0} U`; needs a nonzero factor variance.
pub fn convergence_value_small_s(c: &EffectiveCoeffs, be: f64, t: f64) -> Result<f64> {
    let (al, s1, s2, s3) = (c.loading, c.wealth_var, c.factor_var, c.cross_cov);
    if s2 == 0.0 {
        return Err(Error::DegenerateFactorVolatility);
    }
    let e1 = (be * t).exp();
    let e2 = e1 * e1;
    let d = e2 - 1.0;
    let be2 = be * be;
    let be3 = be2 * be;
    let sq = s3 * s3 * be2 - 2.0 * s2 * al * be * s3 + al * al * s2 * s2;
    Ok(-4.0 * sq / (d * s2)
        + (s1 * s2 * be3 + 4.0 * al * s3 * s2 * be2 - 2.0 * al * al * s2 * s2 * be) * t / (d * s2)
        - 4.0 * sq * e2 / (d * s2)
        + (2.0 * al * al * s2 * be - s1 * be3 - 4.0 * al * s3 * be2) * e2 * t / d
        + 8.0 * sq * e1 / (d * s2))
}

/// Flat-law conditions: the first is half the variance, the second must be >= 0.
pub fn convergence_values_uniform(c: &EffectiveCoeffs, be: f64, t: f64) -> (f64, f64) {
    let (al, s1, s2, s3) = (c.loading, c.wealth_var, c.factor_var, c.cross_cov);
    let em = (-be * t).exp();
    let be3 = be * be * be;
    let al2 = al * al;
    let first = -(al2 * s2 * em * em - 4.0 * (al2 * s2 - al * be * s3) * em
        - 2.0 * be3 * s1 * t
        - al2 * s2 * (2.0 * be * t - 3.0)
        - 4.0 * al * be * s3 * (1.0 - be * t))
        / (4.0 * be3);
    let e1 = (be * t).exp();
    let second = -((2.0 * be3 * s1 - 4.0 * al * be * be * s3 + 2.0 * al2 * be * s2) * t
        + 4.0 * al * s3 * be
        - 3.0 * al2 * s2)
        * e1
        * e1
        - (-4.0 * al * be * s3 + 4.0 * al2 * s2) * e1
        + al2 * s2;
    (first, second)
}

fn convergence_gaussian(c: &EffectiveCoeffs, be: f64, s: f64, t: f64) -> ConvergenceReport {
    let holds = |tt: f64| convergence_value_gaussian(c, be, s, tt) > CONVERGENCE_TOL;
    let value = convergence_value_gaussian(c, be, s, t);
    ConvergenceReport { value, secondary: None, ok: value > CONVERGENCE_TOL, t_star: first_failure(holds, be) }
}

/// Evaluates the integrability condition and locates the first time it fails.
pub fn convergence_condition(c: &EffectiveCoeffs, be: f64, law: &InitialLaw, t: f64) -> ConvergenceReport {
    match law {
        InitialLaw::Gaussian(g) => convergence_gaussian(c, be, g.factor_std, t),
        InitialLaw::UniformLimit { .. } => {
            let holds = |tt: f64| {
                let (first, second) = convergence_values_uniform(c, be, tt);
                first > CONVERGENCE_TOL && second >= 0.0
            };
            let (first, second) = convergence_values_uniform(c, be, t);
            ConvergenceReport {
                value: first,
                secondary: Some(second),
                ok: first > CONVERGENCE_TOL && second >= 0.0,
                t_star: first_failure(holds, be),
            }
        }
    }
}

/// Scans (0, 100/|be|] for the first failure of `holds`, then bisects.
fn first_failure(holds: impl Fn(f64) -> bool, be: f64) -> f64 {
    const GRID: usize = 2000;
    let t_max = 100.0 / be.abs();
    let mut prev = 0.0;
    for k in 1..=GRID {
        let tk = t_max * k as f64 / GRID as f64;
        if !holds(tk) {
            // Near zero the condition is below the margin by construction; skip that sliver.
            let (mut lo, mut hi) = (prev, tk);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if holds(mid) || mid == lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-14 * hi {
                    break;
                }
            }
            if prev == 0.0 && lo == 0.0 {
                continue;
            }
            return hi;
        }
        prev = tk;
    }
    f64::INFINITY
}

/// Closed-form solution of the six-exponent Riccati system for a Gaussian law.
pub fn gamma_closed_form(
    c: &EffectiveCoeffs,
    factor: FactorDynamics,
    law: &GaussianLaw,
    t: f64,
) -> Result<GammaVector> {
    let be = factor.mean_reversion;
    check_time(be, t)?;
    if c.factor_var == 0.0 {
        return Err(Error::DegenerateFactorVolatility);
    }
    let (b, a, al, s2, s3) = (factor.factor_drift, c.drift, c.loading, c.factor_var, c.cross_cov);
    let (f0, x0, s) = (law.initial_log_wealth, law.factor_mean, law.factor_std);
    let i = Complex64::i();
    let ss = s * s;
    let u = (be * t).exp();
    let u2 = u * u;
    let spread = 2.0 * be * ss + s2;
    let d = spread * u2 - s2;

    let g1 = -x0 * x0 / (2.0 * ss) - 0.5 * (d / (2.0 * be * ss)).ln()
        + (u - 1.0)
            * (2.0 * b * b * ss * (1.0 - u) - 4.0 * b * u * be * ss * x0 + s2 * be * x0 * x0 * (u + 1.0))
            / (2.0 * be * ss * d);
    let g2 = literal_gamma2(a, al, b, be, s2, s3, f0, x0, ss, t, u, u2);
    let g3 = 2.0 * (-b + u * (x0 * be + b)) / d;
    let g4 = -0.5 * gaussian_variance(c, be, s, t);
    let g5 = i * (2.0 * u * (al * s2 - s3 * be + al * be * ss) - al * spread * u2 - (al * s2 - 2.0 * s3 * be))
        / (d * be);
    let g6 = -be / d;
    Ok(GammaVector([g1.into(), g2, g3.into(), g4.into(), g5, g6.into()]))
}

#[allow(clippy::too_many_arguments)]
fn literal_gamma2(
    a: f64,
    al: f64,
    b: f64,
    be: f64,
    s2: f64,
    s3: f64,
    f0: f64,
    x0: f64,
    ss: f64,
    t: f64,
    u: f64,
    u2: f64,
) -> Complex64 {
    let be2 = be * be;
    let den = (2.0 * be * ss + s2) * be2 * u2 - s2 * be2;
    let r = ((2.0 * b * al + x0 * be * al + be * b * al * t - be2 * a * t) * s2 - 2.0 * b * s3 * be)
        + u * ((-4.0 * b * al - 2.0 * x0 * be * al) * s2 + (4.0 * b * be + 2.0 * be2 * x0) * s3
            - 2.0 * ss * be * b * al)
        + u2 * ((b * al * (2.0 - be * t) + be2 * a * t + x0 * be * al) * s2 - 2.0 * be * (b + be * x0) * s3)
        + u2 * (-2.0 * b * be2 * ss * al * t + 2.0 * ss * be * b * al + 2.0 * ss * be2 * be * a * t);
    Complex64::new(0.0, -f0 - r / den)
}

/// Literal transcription of the circulating closed forms for the first,
/// fourth and fifth exponents; the others agree with [`gamma_closed_form`].
pub fn literal_gamma_closed_form(
    c: &EffectiveCoeffs,
    factor: FactorDynamics,
    law: &GaussianLaw,
    t: f64,
) -> GammaVector {
    let be = factor.mean_reversion;
    let (b, a, al, s1, s2, s3) =
        (factor.factor_drift, c.drift, c.loading, c.wealth_var, c.factor_var, c.cross_cov);
    let (f0, x0, s) = (law.initial_log_wealth, law.factor_mean, law.factor_std);
    let i = Complex64::i();
    let ss = s * s;
    let u = (be * t).exp();
    let u2 = u * u;
    let d = -s2 + 2.0 * u2 * be * ss + u2 * s2;
    let g1 = -(2.0 * b * b + be * s2 * (2.0 * be * ss / d).ln()) / (2.0 * be * d)
        + (s2 + 2.0 * be * ss) * (d / (2.0 * be * ss)).ln() * u2 / (2.0 * d)
        + (2.0 * b * (b + x0 * be) * u + (b + x0 * be).powi(2) * u2) / (be * d);
    let be2 = be * be;
    let be3 = be2 * be;
    let d3 = (2.0 * be * ss + s2) * be3 * u2 - s2 * be3;
    let d2 = (2.0 * be * ss + s2) * be2 * u2 - s2 * be2;
    let g4 = s1 * t / 2.0
        + (-2.0 * (s2 * al - s3 * be).powi(2) + s2 * al * be * (2.0 * s3 * be * t - al * ss - s2 * al * t)) / d3
        + 4.0 * u * (s2 * al - s3 * be) * (s2 * al - s3 * be + al * be * ss) / d3
        + u2 * ((2.0 * ss * be2 * t + (s2 * t - 3.0 * ss) * be - 2.0 * s2) * s2 * al * al) / d3
        + u2 * 2.0 * ((-2.0 * ss * be2 * t + (2.0 * ss - s2 * t) * be + 2.0 * s2) * s3 * al - 2.0 * s3 * s3 * be)
            / d2;
    let g5 = (2.0 * i * (al * be * ss + al * s2 - s3 * be) * u - i * al * (s2 + 2.0 * be * ss) * u2
        - 2.0 * s3 * be
        + al * s2)
        / (((2.0 * be * ss + s2) * u2 - s2) * be);
    let g2 = literal_gamma2(a, al, b, be, s2, s3, f0, x0, ss, t, u, u2);
    let g3 = 2.0 * (-b + u * x0 * be + u * b) / d;
    let g6 = -be / d;
    GammaVector([g1.into(), g2, g3.into(), g4.into(), g5, g6.into()])
}

/// `lim_{s -> infinity}` of `mean - gamma * variance`: the flat-law objective.
pub fn q_limit_large_s(
    c: &EffectiveCoeffs,
    factor: FactorDynamics,
    f0: f64,
    gamma: f64,
    t: f64,
    x: f64,
) -> Result<f64> {
    let m = moments_uniform(c, factor, f0, t, x)?;
    Ok(m.mean - gamma * m.variance)
}

/// `lim_{s -> 0}` of `mean - gamma * variance`, evaluated at s = 0 exactly.
pub fn q_limit_small_s(
    c: &EffectiveCoeffs,
    factor: FactorDynamics,
    f0: f64,
    x0: f64,
    gamma: f64,
    t: f64,
    x: f64,
) -> Result<f64> {
    let be = factor.mean_reversion;
    check_time(be, t)?;
    if c.factor_var == 0.0 {
        return Err(Error::DegenerateFactorVolatility);
    }
    if t == 0.0 {
        return Ok(f0);
    }
    let law = GaussianLaw { initial_log_wealth: f0, factor_mean: x0, factor_std: 0.0 };
    let mean = gaussian_mean(c, factor, &law, 0.0, t, x);
    let variance = gaussian_variance(c, be, 0.0, t);
    Ok(mean - gamma * variance)
}

/// Literal large-s limit expression; its variance part carries the `-2R` error.
pub fn literal_q_limit_large_s(
    c: &EffectiveCoeffs,
    factor: FactorDynamics,
    f0: f64,
    gamma: f64,
    t: f64,
    x: f64,
) -> f64 {
    let (b, be) = (factor.factor_drift, factor.mean_reversion);
    let (a, al, s1, s2, s3) = (c.drift, c.loading, c.wealth_var, c.factor_var, c.cross_cov);
    let em = (-be * t).exp();
    let be2 = be * be;
    f0 + t * a - gamma * t * s1
        - (3.0 + em * em - 2.0 * be * t - 4.0 * em) * s2 * gamma * al * al / (be2 * be)
        - 4.0 * (be * t - 1.0 + em) * gamma * s3 * al / be2
        - ((be * x + b) * (em - 1.0) + be * b * t) * al / be2
}

/// Literal small-s limit expression.
#[allow(clippy::too_many_arguments)]
pub fn literal_q_limit_small_s(
    c: &EffectiveCoeffs,
    factor: FactorDynamics,
    f0: f64,
    x0: f64,
    gamma: f64,
    t: f64,
    x: f64,
) -> f64 {
    let (b, be) = (factor.factor_drift, factor.mean_reversion);
    let (a, al, s1, s2, s3) = (c.drift, c.loading, c.wealth_var, c.factor_var, c.cross_cov);
    let e = (be * t).exp();
    let be2 = be * be;
    a * t + f0 - gamma * t * s1
        + (2.0 * (be * t - 2.0) * e + be * t + 2.0) * s2 * gamma * al * al / (be2 * be * (e + 1.0))
        - 4.0 * ((be * t - 2.0) * e + be * t + 2.0) * s3 * gamma * al / (be2 * (e + 1.0))
        + ((((-b * t + x0 + x) * be + 2.0 * b) * e - (x0 + b * t + x) * be - 2.0 * b) * al) / (be2 * (e + 1.0))
        + 4.0 * (1.0 - e) * gamma * s3 * s3 / (be * (e + 1.0) * s2)
        + 2.0 * (-(b + be * x0) * e + be * x + b) * s3 / (be * (e + 1.0) * s2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> (EffectiveCoeffs, FactorDynamics) {
        (
            EffectiveCoeffs { drift: 0.13, loading: -1.0, wealth_var: 0.04, factor_var: 4e-4, cross_cov: 0.0 },
            FactorDynamics { factor_drift: 0.05, mean_reversion: -1.0 },
        )
    }

    fn correlated() -> (EffectiveCoeffs, FactorDynamics, f64) {
        (
            EffectiveCoeffs { drift: 0.07, loading: 0.8, wealth_var: 0.05, factor_var: 0.012, cross_cov: -0.011 },
            FactorDynamics { factor_drift: 0.03, mean_reversion: -0.6 },
            0.4,
        )
    }

    fn law(f0: f64, s: f64) -> GaussianLaw {
        GaussianLaw { initial_log_wealth: f0, factor_mean: 0.01, factor_std: s }
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * (1.0 + b.abs()), "{a} vs {b}");
    }

    // Joint-Gaussian conditioning of the exact (F_t, X_t) law, computed independently.
    #[test]
    fn uniform_matches_exact_conditioning() {
        let (c, fd) = base();
        let m = moments_uniform(&c, fd, 1.0, 0.5, 0.0).unwrap();
        close(m.mean, 1.0724360635350065, 1e-12);
        close(m.variance, 0.020024679349131703, 1e-12);
        let m = moments_uniform(&c, fd, 1.0, 1.0, 0.05).unwrap();
        close(m.mean, 1.08, 1e-12);
        close(m.variance, 0.0403031857570189, 1e-12);
        let (c, fd, f0) = correlated();
        let m = moments_uniform(&c, fd, f0, 1.0, 0.0).unwrap();
        close(m.mean, 0.4551920799739661, 1e-12);
        close(m.variance, 0.06497721639552731, 1e-12);
    }

    #[test]
    fn gaussian_matches_exact_conditioning() {
        let (c, fd) = base();
        let cases = [
            (0.01, 0.5, 0.0, 1.0643853449587923, 0.02000871152184664),
            (0.1, 1.0, 0.0, 1.1608920951421147, 0.04027226765970282),
            (0.01, 1.0, 0.05, 1.0971430883976738, 0.04005011156238447),
        ];
        for (s, t, x, mean, var) in cases {
            let m = moments_gaussian(&c, fd, &law(1.0, s), t, x).unwrap();
            close(m.mean, mean, 1e-11);
            close(m.variance, var, 1e-11);
        }
        let (c, fd, f0) = correlated();
        let cases = [
            (0.01, 0.5, 0.05, 0.41632237878390715, 0.020060710827904702),
            (0.1, 1.0, 0.0, 0.49226398120569426, 0.04750691750276927),
        ];
        for (s, t, x, mean, var) in cases {
            let m = moments_gaussian(&c, fd, &law(f0, s), t, x).unwrap();
            close(m.mean, mean, 1e-11);
            close(m.variance, var, 1e-11);
        }
    }

    #[test]
    fn literal_variance_is_minus_two_remainder() {
        let (c, fd, f0) = correlated();
        let be = fd.mean_reversion;
        for t in [0.3, 1.0, 2.0] {
            let exact = moments_gaussian(&c, fd, &law(f0, 0.1), t, 0.0).unwrap().variance;
            let lit = literal_gaussian_variance(&c, be, 0.1, t);
            let rem = exact - c.wealth_var * t;
            close(lit, c.wealth_var * t - 2.0 * rem, 1e-10);
        }
    }

    #[test]
    fn zero_time_is_initial_law() {
        let (c, fd) = base();
        let m = moments_gaussian(&c, fd, &law(1.0, 0.1), 0.0, 0.3).unwrap();
        assert_eq!((m.mean, m.variance), (1.0, 0.0));
        let m = moments_uniform(&c, fd, 1.0, 0.0, 0.3).unwrap();
        assert_eq!(m.mean, 1.0);
        assert!(m.variance.abs() < 1e-16);
    }

    #[test]
    fn no_factor_coupling() {
        let c = EffectiveCoeffs { drift: 0.1, loading: 0.0, wealth_var: 0.03, factor_var: 0.01, cross_cov: 0.0 };
        let fd = FactorDynamics { factor_drift: 0.05, mean_reversion: -0.7 };
        let m = moments_uniform(&c, fd, 0.2, 1.5, 0.4).unwrap();
        close(m.mean, 0.2 + 0.15, 1e-14);
        close(m.variance, 0.045, 1e-13);
    }

    #[test]
    fn deterministic_factor_backward_solve() {
        let c = EffectiveCoeffs { drift: 0.13, loading: -1.0, wealth_var: 0.04, factor_var: 0.0, cross_cov: 0.0 };
        let fd = FactorDynamics { factor_drift: 0.05, mean_reversion: -1.0 };
        let (t, x) = (1.3, 0.02);
        let (b, be, al): (f64, f64, f64) = (0.05, -1.0, -1.0);
        let expected =
            1.0 + 0.13 * t - al * b * t / be + al * (be * x + b) * (1.0 - (-be * t).exp()) / (be * be);
        close(moments_uniform(&c, fd, 1.0, t, x).unwrap().mean, expected, 1e-14);
    }

    #[test]
    fn positive_beta_rejected() {
        let (c, _) = base();
        let fd = FactorDynamics { factor_drift: 0.05, mean_reversion: 0.1 };
        assert!(matches!(moments_uniform(&c, fd, 1.0, 1.0, 0.0), Err(Error::NonNegativeMeanReversion(_))));
    }

    #[test]
    fn long_horizon_rejected() {
        let (c, fd) = base();
        assert!(matches!(moments_uniform(&c, fd, 1.0, 301.0, 0.0), Err(Error::HorizonTooLarge(_))));
    }

    #[test]
    fn gamma_initial_data() {
        let (c, fd) = base();
        let g = gamma_closed_form(&c, fd, &law(1.0, 0.1), 0.0).unwrap();
        close(g.0[5].re, -1.0 / (2.0 * 0.01), 1e-14);
        close(g.0[2].re, 0.01 / 0.01, 1e-14);
        close(g.0[0].re, -0.0001 / 0.02, 1e-14);
        assert!(g.0[3].norm() < 1e-14);
        assert!(g.0[4].norm() < 1e-14);
        close(g.0[1].im, -1.0, 1e-14);
    }

    #[test]
    fn gamma6_long_time_limit() {
        let (c, fd) = base();
        let t = 50.0;
        let g = gamma_closed_form(&c, fd, &law(1.0, 0.1), t).unwrap();
        close(g.0[5].re, -1.0 / 4e-4, 1e-12);
    }

    #[test]
    fn gamma_needs_factor_noise() {
        let (mut c, fd) = base();
        c.factor_var = 0.0;
        assert!(matches!(
            gamma_closed_form(&c, fd, &law(1.0, 0.1), 1.0),
            Err(Error::DegenerateFactorVolatility)
        ));
    }

    #[test]
    fn convergence_slope_at_zero() {
        let (c, fd, _) = correlated();
        let be = fd.mean_reversion;
        let h = 1e-6;
        let slope = (convergence_value_gaussian(&c, be, 0.1, h) - convergence_value_gaussian(&c, be, 0.1, 0.0)) / h;
        close(slope, -c.wealth_var * be * be * be, 1e-5);
        let r = convergence_condition(&c, be, &InitialLaw::Gaussian(law(0.0, 0.1)), 0.01);
        assert!(r.ok);
    }

    #[test]
    fn uniform_condition_holds_for_negative_beta() {
        let (c, fd, _) = correlated();
        let r = convergence_condition(&c, fd.mean_reversion, &InitialLaw::UniformLimit { initial_log_wealth: 0.0 }, 1.0);
        assert!(r.ok);
        assert!(r.secondary.unwrap() >= 0.0);
        assert_eq!(r.t_star, f64::INFINITY);
    }

    #[test]
    fn small_s_failure_located() {
        // -s1 be^3 - 4 al s3 be^2 + 2 s2 al^2 be < 0 with a tight initial law.
        let c = EffectiveCoeffs { drift: 0.0, loading: 3.0, wealth_var: 0.01, factor_var: 0.04, cross_cov: 0.0 };
        let be = -1.0;
        assert!(-c.wealth_var * be * be * be + 2.0 * c.factor_var * 9.0 * be < 0.0);
        let r = convergence_condition(&c, be, &InitialLaw::Gaussian(law(0.0, 1e-3)), 50.0);
        assert!(!r.ok);
        assert!(r.t_star.is_finite() && r.t_star < 50.0);
        assert!(convergence_value_gaussian(&c, be, 1e-3, r.t_star * 1.001) <= CONVERGENCE_TOL);
    }

    #[test]
    fn large_s_value_limit() {
        let (c, fd, _) = correlated();
        let be = fd.mean_reversion;
        for t in [0.5, 2.0] {
            let s = 1e4;
            let u = convergence_value_gaussian(&c, be, s, t);
            close(u, convergence_value_large_s(&c, be, t), 1e-6);
        }
    }

    #[test]
    fn q_limits() {
        let (c, fd, f0) = correlated();
        let gamma = 0.7;
        let (t, x) = (1.2, 0.03);
        let big = moments_gaussian(&c, fd, &law(f0, 1e3), t, x).unwrap();
        close(big.mean - gamma * big.variance, q_limit_large_s(&c, fd, f0, gamma, t, x).unwrap(), 1e-7);
        let tiny = moments_gaussian(&c, fd, &law(f0, 1e-5), t, x).unwrap();
        close(
            tiny.mean - gamma * tiny.variance,
            q_limit_small_s(&c, fd, f0, 0.01, gamma, t, x).unwrap(),
            1e-7,
        );
    }

    #[test]
    fn literal_limits_share_the_mean_part() {
        let (c, fd, f0) = correlated();
        let (t, x) = (1.2, 0.03);
        close(literal_q_limit_large_s(&c, fd, f0, 0.0, t, x), q_limit_large_s(&c, fd, f0, 0.0, t, x).unwrap(), 1e-12);
        let lit0 = literal_q_limit_small_s(&c, fd, f0, 0.01, 0.0, t, x);
        close(lit0, q_limit_small_s(&c, fd, f0, 0.01, 0.0, t, x).unwrap(), 1e-10);
    }
}
