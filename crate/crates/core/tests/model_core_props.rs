mod common;

use portopt::model_core::{effective_coeffs_unconstrained, LinearMarketParams};
use proptest::prelude::*;

use common::{any_market, close};

fn permute(p: &LinearMarketParams, perm: &[usize]) -> LinearMarketParams {
    LinearMarketParams {
        drift: perm.iter().map(|&i| p.drift[i]).collect(),
        loading: perm.iter().map(|&i| p.loading[i]).collect(),
        vol: perm.iter().map(|&i| p.vol[i].clone()).collect(),
        ..p.clone()
    }
}

fn weights(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn drift_concave_quadratic_in_weights(
        (p, h, d) in any_market().prop_flat_map(|p| { let m = p.n_assets(); (Just(p), weights(m), weights(m)) })
    ) {
        let at = |s: f64| {
            let w: Vec<f64> = h.iter().zip(&d).map(|(a, b)| a + s * b).collect();
            effective_coeffs_unconstrained(&p, &w).unwrap()
        };
        let (lo, mid, hi) = (at(-1.0), at(0.0), at(1.0));
        let second = lo.drift - 2.0 * mid.drift + hi.drift;
        prop_assert!(second <= 1e-12);
        // Third differences vanish for a quadratic.
        let far = at(2.0);
        prop_assert!((far.drift - 3.0 * hi.drift + 3.0 * mid.drift - lo.drift).abs() < 1e-10);
        prop_assert!((far.wealth_var - 3.0 * hi.wealth_var + 3.0 * mid.wealth_var - lo.wealth_var).abs() < 1e-10);
        prop_assert!((hi.loading - 2.0 * mid.loading + lo.loading).abs() < 1e-12);
    }

    #[test]
    fn linear_in_drift_and_loading(
        (p, h, da, dl) in any_market().prop_flat_map(|p| {
            let m = p.n_assets();
            (Just(p), weights(m), weights(m), weights(m))
        })
    ) {
        let base = effective_coeffs_unconstrained(&p, &h).unwrap();
        let mut q = p.clone();
        for i in 0..p.n_assets() {
            q.drift[i] += da[i];
            q.loading[i] += dl[i];
        }
        let shifted = effective_coeffs_unconstrained(&q, &h).unwrap();
        let dot = |v: &[f64]| v.iter().zip(&h).map(|(a, b)| a * b).sum::<f64>();
        prop_assert!(close(shifted.drift - base.drift, dot(&da), 1e-12));
        prop_assert!(close(shifted.loading - base.loading, dot(&dl), 1e-12));
        prop_assert_eq!(shifted.wealth_var, base.wealth_var);
    }

    #[test]
    fn disjoint_noise_columns_have_no_cross_term(
        (p, h) in any_market().prop_flat_map(|p| { let m = p.n_assets(); (Just(p), weights(m)) })
    ) {
        let m = p.n_assets();
        let mut q = p.clone();
        for row in &mut q.vol {
            row[m] = 0.0;
        }
        for k in 0..m {
            q.factor_vol[k] = 0.0;
        }
        q.factor_vol[m] = 0.03;
        prop_assert_eq!(effective_coeffs_unconstrained(&q, &h).unwrap().cross_cov, 0.0);
    }

    #[test]
    fn permutation_invariant(
        (p, h, perm) in any_market().prop_flat_map(|p| {
            let m = p.n_assets();
            (Just(p), weights(m), Just((0..m).collect::<Vec<_>>()).prop_shuffle())
        })
    ) {
        let base = effective_coeffs_unconstrained(&p, &h).unwrap();
        let hp: Vec<f64> = perm.iter().map(|&i| h[i]).collect();
        let other = effective_coeffs_unconstrained(&permute(&p, &perm), &hp).unwrap();
        prop_assert!(close(base.drift, other.drift, 1e-13));
        prop_assert!(close(base.loading, other.loading, 1e-13));
        prop_assert!(close(base.wealth_var, other.wealth_var, 1e-13));
        prop_assert!(close(base.cross_cov, other.cross_cov, 1e-13));
        prop_assert_eq!(base.factor_var, other.factor_var);
    }
}
