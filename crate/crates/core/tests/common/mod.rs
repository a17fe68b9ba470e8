#![allow(dead_code)]

use portopt::{CirModelParams, LinearMarketParams, StockBankParams};
use proptest::prelude::*;

pub fn stock_bank() -> impl Strategy<Value = StockBankParams> {
    (-0.2..0.3f64, -2.0..2.0f64, 0.05..0.5f64, -0.1..0.1f64, -2.0..-0.2f64, 0.005..0.1f64).prop_map(
        |(drift, loading, vol, factor_drift, mean_reversion, factor_vol)| StockBankParams {
            drift,
            loading,
            vol,
            factor_drift,
            mean_reversion,
            factor_vol,
        },
    )
}

/// Loading kept away from 1 so the two-asset limits stay finite.
pub fn stock_bank_off_unit() -> impl Strategy<Value = StockBankParams> {
    stock_bank().prop_filter("loading near 1", |p| (p.loading - 1.0).abs() > 0.2)
}

/// Feller-admissible square-root model.
pub fn cir() -> impl Strategy<Value = CirModelParams> {
    (-0.2..0.3f64, -2.0..2.0f64, 0.05..0.5f64, 0.02..0.1f64, -2.0..-0.3f64, 0.0..0.9f64).prop_map(
        |(drift, loading, vol, factor_drift, mean_reversion, frac)| {
            let feller = -2.0 * mean_reversion * factor_drift;
            CirModelParams { drift, loading, vol, factor_drift, mean_reversion, factor_vol: (frac * feller).sqrt() }
        },
    )
}

pub fn market(m: usize) -> impl Strategy<Value = LinearMarketParams> {
    (
        prop::collection::vec(-0.2..0.3f64, m),
        prop::collection::vec(-2.0..2.0f64, m),
        prop::collection::vec(prop::collection::vec(-0.4..0.4f64, m + 1), m),
        prop::collection::vec(-0.05..0.05f64, m + 1),
        -0.1..0.1f64,
        -2.0..-0.2f64,
    )
        .prop_map(|(drift, loading, vol, factor_vol, factor_drift, mean_reversion)| LinearMarketParams {
            drift,
            loading,
            factor_drift,
            mean_reversion,
            vol,
            factor_vol,
        })
        .prop_filter("nearly singular covariance", |p| min_eigen_proxy(p) > 1e-3)
}

pub fn any_market() -> impl Strategy<Value = LinearMarketParams> {
    (2usize..=4).prop_flat_map(market)
}

/// Smallest pivot of a Cholesky factorization of the return covariance.
fn min_eigen_proxy(p: &LinearMarketParams) -> f64 {
    let c = p.return_covariance();
    let m = c.len();
    let mut l = vec![vec![0.0; m]; m];
    let mut smallest = f64::INFINITY;
    for i in 0..m {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = c[i][i] - s;
                if d <= 0.0 {
                    return 0.0;
                }
                smallest = smallest.min(d);
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (c[i][j] - s) / l[j][j];
            }
        }
    }
    smallest
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
