mod common;

use portopt::strategy_opt::{
    asymptotic_two_asset, assemble_objective, maximize_on_hyperplane, optimal_two_asset_vasicek, AsymptoticWeights,
    QuadraticObjective, TwoAssetVasicekCoeffs,
};
use portopt::{InitialLaw, RiskAversion};
use proptest::prelude::*;

use common::{any_market, close, market, stock_bank};

fn flat() -> InitialLaw {
    InitialLaw::UniformLimit { initial_log_wealth: 1.0 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn two_asset_curvature_negative(p in stock_bank(), g in 0.0..5.0f64, t in 0.01..10.0f64, r in -0.1..0.2f64) {
        let c = TwoAssetVasicekCoeffs::new(&p, 1.0, t, r).unwrap();
        prop_assert!(p.vol * p.vol * t + 2.0 * g * c.l2 > 0.0);
    }

    #[test]
    fn assembled_objective_is_concave_on_hyperplane(p in any_market(), g in 0.0..5.0f64, t in 0.05..5.0f64, x in -0.1..0.1f64) {
        let obj = assemble_objective(&p, &flat(), RiskAversion::new(g).unwrap(), t, x).unwrap();
        prop_assert!(maximize_on_hyperplane(&obj).is_ok());
    }

    #[test]
    fn closed_form_matches_lagrange(p in stock_bank(), g in 0.0..5.0f64, t in 0.05..5.0f64, r in -0.1..0.2f64) {
        let gamma = RiskAversion::new(g).unwrap();
        let closed = optimal_two_asset_vasicek(&p, gamma, t, r).unwrap();
        let obj = assemble_objective(&p.to_market(), &flat(), gamma, t, r).unwrap();
        let h = maximize_on_hyperplane(&obj).unwrap();
        prop_assert!(close(closed, h.weights()[0], 1e-9), "{closed} vs {:?}", h.weights());
    }

    #[test]
    fn constant_shift_of_linear_term_is_irrelevant(p in any_market(), g in 0.0..5.0f64, t in 0.05..5.0f64, shift in -5.0..5.0f64) {
        let obj = assemble_objective(&p, &flat(), RiskAversion::new(g).unwrap(), t, 0.02).unwrap();
        let moved = QuadraticObjective { lin: obj.lin.iter().map(|v| v + shift).collect(), ..obj.clone() };
        let a = maximize_on_hyperplane(&obj).unwrap();
        let b = maximize_on_hyperplane(&moved).unwrap();
        for (x, y) in a.weights().iter().zip(b.weights()) {
            prop_assert!(close(*x, *y, 1e-8));
        }
    }

    #[test]
    fn two_asset_limit_ignores_everything_but_loadings(
        p in market(2), q in market(2), g in 0.0..5.0f64, h in 0.0..5.0f64
    ) {
        prop_assume!((p.loading[0] - p.loading[1]).abs() > 1e-3);
        let mut other = q.clone();
        other.loading = p.loading.clone();
        let a = asymptotic_two_asset(&p, RiskAversion::new(g).unwrap()).unwrap();
        let b = asymptotic_two_asset(&other, RiskAversion::new(h).unwrap()).unwrap();
        let finite = matches!(a, AsymptoticWeights::Finite { .. });
        prop_assert!(finite);
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn grid_search_never_wins(p in stock_bank(), g in 0.0..5.0f64, t in 0.05..5.0f64, r in -0.1..0.2f64) {
        let gamma = RiskAversion::new(g).unwrap();
        let c = TwoAssetVasicekCoeffs::new(&p, 1.0, t, r).unwrap();
        let q = |h: f64| c.mean(h) - g * c.variance(h);
        let best = q(optimal_two_asset_vasicek(&p, gamma, t, r).unwrap());
        let grid = (0..=20_000).map(|i| q(-10.0 + 1e-3 * i as f64)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(grid <= best + 1e-6);
    }
}
