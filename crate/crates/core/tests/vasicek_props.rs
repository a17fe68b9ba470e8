mod common;

use portopt::model_core::{EffectiveCoeffs, FactorDynamics, GaussianLaw};
use portopt::sde_oracle::integrate_gamma_ode_steps;
use portopt::vasicek_moments::{gamma_closed_form, moments_gaussian, moments_uniform};
use portopt::{Error, InitialLaw};
use proptest::prelude::*;

use common::close;

fn coeffs() -> impl Strategy<Value = (EffectiveCoeffs, FactorDynamics)> {
    (-0.2..0.3f64, -2.0..2.0f64, 0.001..0.2f64, 1e-4..0.01f64, -0.99..0.99f64, -0.1..0.1f64, -2.0..-0.2f64).prop_map(
        |(drift, loading, wealth_var, factor_var, corr, factor_drift, mean_reversion)| {
            let c = EffectiveCoeffs {
                drift,
                loading,
                wealth_var,
                factor_var,
                cross_cov: corr * (wealth_var * factor_var).sqrt(),
            };
            (c, FactorDynamics { factor_drift, mean_reversion })
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn uniform_variance_ignores_level((c, fd) in coeffs(), t in 0.05..5.0f64, x in -0.3..0.3f64) {
        let v0 = moments_uniform(&c, fd, 1.0, t, 0.0).unwrap().variance;
        let v = moments_uniform(&c, fd, 1.0, t, x).unwrap().variance;
        prop_assert_eq!(v, v0);
    }

    #[test]
    fn uniform_mean_affine_in_level((c, fd) in coeffs(), t in 0.05..5.0f64, x in -0.3..0.3f64, dx in 0.01..0.2f64) {
        let be = fd.mean_reversion;
        let f = |x: f64| moments_uniform(&c, fd, 1.0, t, x).unwrap().mean;
        let slope = c.loading * (1.0 - (-be * t).exp()) / be;
        prop_assert!(close((f(x + dx) - f(x)) / dx, slope, 1e-8));
        prop_assert!(close((f(x + 2.0 * dx) - f(x)) / (2.0 * dx), slope, 1e-8));
    }

    #[test]
    fn gaussian_approaches_uniform((c, fd) in coeffs(), t in 0.1..2.0f64, x in -0.1..0.1f64, m in -0.1..0.1f64) {
        let u = moments_uniform(&c, fd, 1.0, t, x).unwrap();
        let mut gaps = Vec::new();
        for s in [10.0, 100.0, 1000.0] {
            let law = GaussianLaw { initial_log_wealth: 1.0, factor_mean: m, factor_std: s };
            match moments_gaussian(&c, fd, &law, t, x) {
                Ok(g) => gaps.push((g.mean - u.mean).abs() + (g.variance - u.variance).abs()),
                Err(Error::ConvergenceViolated(_)) => prop_assume!(false),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
        prop_assert!(gaps[1] <= gaps[0] + 1e-12 && gaps[2] <= gaps[1] + 1e-12, "{gaps:?}");
        prop_assert!(gaps[2] < 1e-3 * (1.0 + gaps[0]));
    }

    /// At small t the conditional drift is `A + alpha x`, shifted under a
    /// proper Gaussian law by the regression of the wealth noise on the
    /// factor surprise, `cross_cov (x - m) / s^2`.
    #[test]
    fn initial_mean_slope((c, fd) in coeffs(), x in -0.1..0.1f64, m in -0.1..0.1f64, s in 0.02..0.5f64) {
        let h = 1e-6;
        let u = moments_uniform(&c, fd, 1.0, h, x).unwrap().mean;
        prop_assert!(close((u - 1.0) / h, c.drift + c.loading * x, 1e-5));
        let law = GaussianLaw { initial_log_wealth: 1.0, factor_mean: m, factor_std: s };
        let g = moments_gaussian(&c, fd, &law, h, x);
        prop_assume!(g.is_ok());
        let expected = c.drift + c.loading * x + c.cross_cov * (x - m) / (s * s);
        prop_assert!(close((g.unwrap().mean - 1.0) / h, expected, 1e-4));
    }

    #[test]
    fn initial_mean_slope_uncorrelated((c, fd) in coeffs(), x in -0.1..0.1f64, m in -0.1..0.1f64, s in 0.02..0.5f64) {
        let c = EffectiveCoeffs { cross_cov: 0.0, ..c };
        let law = GaussianLaw { initial_log_wealth: 1.0, factor_mean: m, factor_std: s };
        let g = moments_gaussian(&c, fd, &law, 1e-6, x);
        prop_assume!(g.is_ok());
        prop_assert!(close((g.unwrap().mean - 1.0) / 1e-6, c.drift + c.loading * x, 1e-4));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn closed_form_gamma_matches_ode((c, fd) in coeffs(), t in 0.05..2.0f64, m in -0.1..0.1f64, s in 0.02..0.5f64) {
        let law = GaussianLaw { initial_log_wealth: 0.5, factor_mean: m, factor_std: s };
        let closed = gamma_closed_form(&c, fd, &law, t).unwrap();
        let ode = integrate_gamma_ode_steps(&c, fd, &InitialLaw::Gaussian(law), t, 4000).unwrap();
        let scale = closed.0.iter().map(|g| g.norm()).fold(1.0, f64::max);
        prop_assert!(closed.max_abs_diff(&ode) < 1e-8 * scale, "{}", closed.max_abs_diff(&ode));
    }

    #[test]
    fn ode_keeps_gaussian_normalizable((c, fd) in coeffs(), t in 0.01..3.0f64, m in -0.1..0.1f64, s in 0.02..0.5f64) {
        let law = InitialLaw::Gaussian(GaussianLaw { initial_log_wealth: 0.5, factor_mean: m, factor_std: s });
        let g = integrate_gamma_ode_steps(&c, fd, &law, t, 2000).unwrap();
        prop_assert!(g.0[5].re < 0.0);
    }
}
