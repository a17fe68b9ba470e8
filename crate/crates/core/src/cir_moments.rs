//! Conditional log-wealth moments for the stock/bank model with a
//! square-root factor and a flat initial factor law on `(0, L)`, `L -> infinity`.
//!
//! The mean below is evaluated exactly as it circulates; it disagrees with
//! simulation (see `moments_cir` docs), so callers that need a trustworthy
//! mean should verify against [`crate::sde_oracle`].

use serde::{Deserialize, Serialize};

use crate::model_core::CirModelParams;
use crate::vasicek_moments::ConditionalMoments;
use crate::{check_horizon, Error, Result};

/// Log-wealth coefficients for risky weight `h`:
/// `dF = (drift + loading R) dt + vol dW_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirEffective {
    pub drift: f64,
    pub loading: f64,
    pub vol: f64,
}

impl CirEffective {
    pub fn new(p: &CirModelParams, h: f64) -> Self {
        Self {
            drift: p.drift * h - 0.5 * p.vol * p.vol * h * h,
            loading: (p.loading - 1.0) * h + 1.0,
            vol: p.vol * h,
        }
    }
}

/// Closed-form `(f_bar, v_bar)` at time `t` given `R_t = r`.
///
/// The variance agrees with full-truncation Monte-Carlo within sampling error.
/// The mean does not: its `(2 + lambda^2)` and `(1 + lambda^2)` terms mix
/// units, and at `t = 1`, `h = 0.3` on a typical set it is off by about 0.4.
pub fn moments_cir(eff: &CirEffective, p: &CirModelParams, f0: f64, t: f64, r: f64) -> Result<ConditionalMoments> {
    p.require_feller()?;
    let be = p.mean_reversion;
    if !(be < 0.0) {
        return Err(Error::NonNegativeMeanReversion(be));
    }
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    if !(r > 0.0) {
        return Err(Error::NonPositiveRate(r));
    }
    check_horizon(be, t)?;
    Ok(ConditionalMoments { mean: cir_mean(eff, p, f0, t, r), variance: cir_variance(eff, p, t, r) })
}

fn cir_mean(eff: &CirEffective, p: &CirModelParams, f0: f64, t: f64, r: f64) -> f64 {
    let (a, al) = (eff.drift, eff.loading);
    let (be, lam2) = (p.mean_reversion, p.factor_vol * p.factor_vol);
    let e = (be * t).exp();
    let be2 = be * be;
    f0 + (a - al / be) * t + (1.0 - e) * al * r / be - (2.0 + lam2) * al * e * e / be2
        + ((1.0 + lam2) * al * t / be + (2.0 + lam2) * al / be2) * e
}

fn cir_variance(eff: &CirEffective, p: &CirModelParams, t: f64, r: f64) -> f64 {
    let (al, sg) = (eff.loading, eff.vol);
    let (b, be) = (p.factor_drift, p.mean_reversion);
    let lam2 = p.factor_vol * p.factor_vol;
    let e = (be * t).exp();
    let (e2, e3, e4) = (e * e, e * e * e, e * e * e * e);
    let be3 = be * be * be;
    let be4 = be3 * be;
    let bt = be * t;
    let al2 = al * al;
    t * sg * sg
        + (-2.0 * e3 / be3 + (2.0 * bt + 3.0) * e2 / be3 - 2.0 * e / be3 + 1.0 / be3) * al2 * lam2 * r
        + (4.0 * e4 - 1.5 * (4.0 * bt + 5.0) * e3 + (bt * bt + 4.0 * bt + 6.0) * e2
            + (2.0 * bt * bt - 2.0 * bt - 5.0) * e / 2.0)
            * al2
            * lam2
            * lam2
            / be4
        + (2.5 * b * e4 - 2.0 * b * (bt + 3.0) * e3 + 7.5 * b * e2 - 4.0 * b * e - b * bt) * al2 * lam2 / be4
}

/// Mean of the deterministic-factor model (`lambda = 0`) given `R_t = r`,
/// obtained by solving the factor ODE backward from `r`.
pub fn deterministic_factor_mean(eff: &CirEffective, p: &CirModelParams, f0: f64, t: f64, r: f64) -> f64 {
    let (b, be) = (p.factor_drift, p.mean_reversion);
    let em1 = (be * t).exp_m1();
    let start = (r - b / be * em1) * (-be * t).exp();
    let integral = start * em1 / be + b / be * (em1 / be - t);
    f0 + eff.drift * t + eff.loading * integral
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set8() -> CirModelParams {
        CirModelParams { drift: 0.15, loading: -1.0, vol: 0.2, factor_drift: 0.05, mean_reversion: -1.0, factor_vol: 0.04 }
    }

    #[test]
    fn effective_coefficients() {
        let e = CirEffective::new(&set8(), 0.3);
        assert!((e.drift - (0.045 - 0.5 * 0.04 * 0.09)).abs() < 1e-15);
        assert!((e.loading - 0.4).abs() < 1e-15);
        assert!((e.vol - 0.06).abs() < 1e-15);
    }

    #[test]
    fn uncoupled_wealth() {
        let p = set8();
        let eff = CirEffective { drift: 0.07, loading: 0.0, vol: 0.3 };
        let m = moments_cir(&eff, &p, 0.08, 1.7, 0.05).unwrap();
        assert!((m.mean - (0.08 + 0.07 * 1.7)).abs() < 1e-14);
        assert!((m.variance - 0.09 * 1.7).abs() < 1e-14);
    }

    #[test]
    fn both_moments_cancel_at_zero() {
        let p = set8();
        for h in [0.3, 1.0, -2.0] {
            let m = moments_cir(&CirEffective::new(&p, h), &p, 0.08, 0.0, 0.05).unwrap();
            assert!((m.mean - 0.08).abs() < 1e-12);
            assert!(m.variance.abs() < 1e-12);
        }
    }

    // Values from the formula itself, evaluated independently in double precision.
    #[test]
    fn set8_values() {
        let p = set8();
        let m = moments_cir(&CirEffective::new(&p, 0.3), &p, 0.08, 1.0, 0.05).unwrap();
        assert!((m.variance - 0.0036012).abs() < 1e-7, "{}", m.variance);
        assert!((m.mean - 0.549).abs() < 1e-3, "{}", m.mean);
        let m = moments_cir(&CirEffective::new(&p, 1.0), &p, 0.08, 0.5, 0.05).unwrap();
        assert!((m.variance - 0.019998).abs() < 1e-6, "{}", m.variance);
    }

    #[test]
    fn mean_affine_in_rate() {
        let p = set8();
        let eff = CirEffective::new(&p, 0.6);
        let t = 1.3;
        let f = |r: f64| moments_cir(&eff, &p, 0.0, t, r).unwrap().mean;
        let slope = (f(0.09) - f(0.03)) / 0.06;
        let be = p.mean_reversion;
        assert!((slope - eff.loading * (1.0 - (be * t).exp()) / be).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = set8();
        let eff = CirEffective::new(&p, 0.5);
        assert!(matches!(moments_cir(&eff, &p, 0.0, 1.0, 0.0), Err(Error::NonPositiveRate(_))));
        let bad = CirModelParams { factor_drift: 0.0001, factor_vol: 0.1, ..p };
        assert!(matches!(moments_cir(&eff, &bad, 0.0, 1.0, 0.05), Err(Error::FellerViolation { .. })));
    }

    #[test]
    fn vanishing_noise_disagrees_with_backward_solve() {
        // The deterministic-factor limit should reproduce the backward ODE solve;
        // the circulating mean does not, by an O(1) amount.
        let p = CirModelParams { factor_vol: 1e-9, ..set8() };
        let eff = CirEffective::new(&p, 0.3);
        let (t, r) = (1.0, 0.05);
        let closed = moments_cir(&eff, &p, 0.08, t, r).unwrap().mean;
        let backward = deterministic_factor_mean(&eff, &p, 0.08, t, r);
        assert!((closed - backward).abs() > 0.1, "{closed} vs {backward}");
    }
}
