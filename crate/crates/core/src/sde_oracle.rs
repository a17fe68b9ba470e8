//! Ground truth for the closed forms: Euler Monte-Carlo of the joint
//! (log-wealth, factor) diffusion with window conditioning, and an RK4
//! integrator for the six Riccati exponents of the characteristic function.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model_core::{
    effective_coeffs, CirModelParams, EffectiveCoeffs, FactorDynamics, InitialLaw, LinearMarketParams, Strategy,
};
use crate::vasicek_moments::ConditionalMoments;
use crate::{Error, Result};

/// Fewest paths a conditioning window may hold.
pub const MIN_WINDOW_PATHS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Euler,
    FullTruncationEuler,
}

/// What to simulate: an m-asset linear market under a fixed strategy, or the
/// stock/bank square-root model with risky weight `weight`.
#[derive(Debug, Clone, Copy)]
pub enum SimModel<'a> {
    Linear { params: &'a LinearMarketParams, strategy: &'a Strategy },
    Cir { params: &'a CirModelParams, weight: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub t_end: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    /// Width L of the uniform stand-in for the flat initial law; `None` picks
    /// [`default_truncation`].
    pub truncation: Option<f64>,
}

/// Terminal `(F_T, X_T)` pairs in path-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub samples: Vec<(f64, f64)>,
    pub t_end: f64,
    pub seed: u64,
    pub scheme: Scheme,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McMoments {
    pub f_bar_hat: f64,
    pub v_bar_hat: f64,
    pub stderr_f: f64,
    pub stderr_v: f64,
    pub n_eff: usize,
}

/// Width of the uniform initial factor law standing in for the flat limit.
///
/// Conditioning on `X_t = x` pulls `X_0` back to about
/// `(x - mean shift) e^{-be t}`, so the interval must grow like `e^{-be t}`.
pub fn default_truncation(model: &SimModel<'_>, t_end: f64) -> f64 {
    let (b, be, stat_sd) = match model {
        SimModel::Linear { params, .. } => {
            (params.factor_drift, params.mean_reversion, params.stationary_factor_std())
        }
        SimModel::Cir { params, .. } => {
            let level = params.factor_drift / -params.mean_reversion;
            let sd = params.factor_vol * (level / (-2.0 * params.mean_reversion)).sqrt();
            (params.factor_drift, params.mean_reversion, sd)
        }
    };
    (-be * t_end).exp() * (2.0 * (b / be).abs() + 10.0 * stat_sd)
}

/// Simulates `n_paths` independent paths; path `i` draws from its own ChaCha
/// stream, so the result does not depend on the thread count.
pub fn simulate_paths(model: SimModel<'_>, law: &InitialLaw, cfg: &SimConfig) -> Result<PathEnsemble> {
    if cfg.n_steps == 0 || cfg.n_paths == 0 {
        return Err(Error::NonPositiveSteps);
    }
    if !(cfg.t_end > 0.0) {
        return Err(Error::NonPositiveTime(cfg.t_end));
    }
    law.validate()?;
    let width = cfg.truncation.unwrap_or_else(|| default_truncation(&model, cfg.t_end));
    let dt = cfg.t_end / cfg.n_steps as f64;
    let sq = dt.sqrt();
    let f0 = law.initial_log_wealth();

    let (stepper, scheme): (Stepper, Scheme) = match model {
        SimModel::Linear { params, strategy } => {
            params.validate().into_result()?;
            let c = effective_coeffs(params, strategy)?;
            (Stepper::linear(&c, params.into(), sq), Scheme::Euler)
        }
        SimModel::Cir { params, weight } => {
            params.require_feller()?;
            (Stepper::cir(params, weight, sq), Scheme::FullTruncationEuler)
        }
    };
    let uniform_low = if scheme == Scheme::Euler { -width } else { 0.0 };
    let uniform_span = if scheme == Scheme::Euler { 2.0 * width } else { width };

    let samples = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let x0 = match law {
                InitialLaw::Gaussian(g) => g.factor_mean + g.factor_std * rng.sample::<f64, _>(StandardNormal),
                InitialLaw::UniformLimit { .. } => uniform_low + uniform_span * rng.random::<f64>(),
            };
            stepper.run(&mut rng, f0, x0, dt, cfg.n_steps)
        })
        .collect();
    Ok(PathEnsemble { samples, t_end: cfg.t_end, seed: cfg.seed, scheme })
}

/// Per-step increments of `(F, X)`.
#[derive(Debug, Clone, Copy)]
enum Stepper {
    /// `dF = (a + al X) dt + chol11 dZ1`,
    /// `dX = (b + be X) dt + chol21 dZ1 + chol22 dZ2`.
    Linear { a: f64, al: f64, b: f64, be: f64, chol11: f64, chol21: f64, chol22: f64 },
    /// `dF = (a + al R+) dt + sigma dZ1`, `dR = (b + be R+) dt + lam sqrt(R+) dZ2`.
    Cir { a: f64, al: f64, b: f64, be: f64, sigma: f64, lam: f64 },
}

impl Stepper {
    fn linear(c: &EffectiveCoeffs, factor: FactorDynamics, sq: f64) -> Self {
        let chol11 = c.wealth_var.sqrt();
        let chol21 = if chol11 > 0.0 { c.cross_cov / chol11 } else { 0.0 };
        let chol22 = (c.factor_var - chol21 * chol21).max(0.0).sqrt();
        Stepper::Linear {
            a: c.drift,
            al: c.loading,
            b: factor.factor_drift,
            be: factor.mean_reversion,
            chol11: chol11 * sq,
            chol21: chol21 * sq,
            chol22: chol22 * sq,
        }
    }

    fn cir(p: &CirModelParams, h: f64, sq: f64) -> Self {
        let eff = crate::cir_moments::CirEffective::new(p, h);
        Stepper::Cir {
            a: eff.drift,
            al: eff.loading,
            b: p.factor_drift,
            be: p.mean_reversion,
            sigma: eff.vol * sq,
            lam: p.factor_vol * sq,
        }
    }

    fn run(&self, rng: &mut ChaCha8Rng, mut f: f64, mut x: f64, dt: f64, n: usize) -> (f64, f64) {
        match *self {
            Stepper::Linear { a, al, b, be, chol11, chol21, chol22 } => {
                for _ in 0..n {
                    let z1: f64 = rng.sample(StandardNormal);
                    let z2: f64 = rng.sample(StandardNormal);
                    f += (a + al * x) * dt + chol11 * z1;
                    x += (b + be * x) * dt + chol21 * z1 + chol22 * z2;
                }
            }
            Stepper::Cir { a, al, b, be, sigma, lam } => {
                for _ in 0..n {
                    let z1: f64 = rng.sample(StandardNormal);
                    let z2: f64 = rng.sample(StandardNormal);
                    let xp = x.max(0.0);
                    f += (a + al * xp) * dt + sigma * z1;
                    x += (b + be * xp) * dt + lam * xp.sqrt() * z2;
                }
                x = x.max(0.0);
            }
        }
        (f, x)
    }
}

/// Quarter of the sample standard deviation of `X_T`.
pub fn default_bandwidth(ens: &PathEnsemble) -> f64 {
    let n = ens.samples.len() as f64;
    let mean = ens.samples.iter().map(|s| s.1).sum::<f64>() / n;
    let var = ens.samples.iter().map(|s| (s.1 - mean).powi(2)).sum::<f64>() / n;
    0.25 * var.sqrt()
}

/// Log-wealth of the paths with `|X_T - x| < bandwidth`.
pub fn window(ens: &PathEnsemble, x: f64, bandwidth: f64) -> Vec<f64> {
    ens.samples.iter().filter(|s| (s.1 - x).abs() < bandwidth).map(|s| s.0).collect()
}

/// Window estimate of `E[F_T | X_T = x]` and `Var[F_T | X_T = x]`.
pub fn mc_conditional_moments(ens: &PathEnsemble, x: f64, bandwidth: f64) -> Result<McMoments> {
    if !(bandwidth > 0.0) {
        return Err(Error::NonPositiveBandwidth(bandwidth));
    }
    let fs = window(ens, x, bandwidth);
    let n = fs.len();
    if n < MIN_WINDOW_PATHS {
        return Err(Error::InsufficientConditioningMass { found: n, needed: MIN_WINDOW_PATHS });
    }
    let nf = n as f64;
    let mean = fs.iter().sum::<f64>() / nf;
    let (mut m2, mut m4) = (0.0, 0.0);
    for f in &fs {
        let d2 = (f - mean).powi(2);
        m2 += d2;
        m4 += d2 * d2;
    }
    let var = m2 / (nf - 1.0);
    let m4 = m4 / nf;
    let pop_var = m2 / nf;
    Ok(McMoments {
        f_bar_hat: mean,
        v_bar_hat: var,
        stderr_f: (var / nf).sqrt(),
        stderr_v: ((m4 - pop_var * pop_var).max(0.0) / nf).sqrt(),
        n_eff: n,
    })
}

/// `(gamma_1, ..., gamma_6)`: exponents of the Gaussian ansatz
/// `exp(g1 + g2 mu + g3 xi + g4 mu^2 + g5 mu xi + g6 xi^2)` for the joint
/// characteristic function in `mu` (log-wealth) and the factor variable `xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaVector(pub [Complex64; 6]);

impl GammaVector {
    pub fn initial(law: &InitialLaw) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        match law {
            InitialLaw::Gaussian(g) => {
                let ss = g.factor_std * g.factor_std;
                GammaVector([
                    Complex64::from(-g.factor_mean * g.factor_mean / (2.0 * ss)),
                    Complex64::new(0.0, -g.initial_log_wealth),
                    Complex64::from(g.factor_mean / ss),
                    zero,
                    zero,
                    Complex64::from(-1.0 / (2.0 * ss)),
                ])
            }
            InitialLaw::UniformLimit { initial_log_wealth } => {
                GammaVector([zero, Complex64::new(0.0, -initial_log_wealth), zero, zero, zero, zero])
            }
        }
    }

    /// Moments read off the exponents: mean `Re i(g2 + g5 x)`, variance `-2 Re g4`.
    pub fn moments(&self, x: f64) -> ConditionalMoments {
        let i = Complex64::i();
        ConditionalMoments { mean: (i * (self.0[1] + self.0[4] * x)).re, variance: -2.0 * self.0[3].re }
    }

    pub fn max_abs_diff(&self, other: &GammaVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    fn max_norm(&self) -> f64 {
        self.0.iter().map(|g| g.norm()).fold(0.0, f64::max)
    }

    fn axpy(&self, h: f64, k: &GammaVector) -> GammaVector {
        let mut out = self.0;
        for (o, d) in out.iter_mut().zip(&k.0) {
            *o += d * h;
        }
        GammaVector(out)
    }
}

fn gamma_rhs(c: &EffectiveCoeffs, factor: FactorDynamics, g: &GammaVector) -> GammaVector {
    let i = Complex64::i();
    let (a, al, s1, s2, s3) = (c.drift, c.loading, c.wealth_var, c.factor_var, c.cross_cov);
    let (b, be) = (factor.factor_drift, factor.mean_reversion);
    let [_, _, g3, _, g5, g6] = g.0;
    GammaVector([
        s2 * g6 + 0.5 * s2 * g3 * g3 - be - b * g3,
        s2 * g3 * g5 - b * g5 - i * a + i * s3 * g3,
        2.0 * s2 * g3 * g6 - 2.0 * b * g6 - be * g3,
        -0.5 * s1 + i * s3 * g5 + 0.5 * s2 * g5 * g5,
        2.0 * i * s3 * g6 - i * al + 2.0 * s2 * g5 * g6 - be * g5,
        -2.0 * be * g6 + 2.0 * s2 * g6 * g6,
    ])
}

/// Classical RK4 with a fixed number of steps.
pub fn integrate_gamma_ode_steps(
    c: &EffectiveCoeffs,
    factor: FactorDynamics,
    law: &InitialLaw,
    t: f64,
    n_steps: usize,
) -> Result<GammaVector> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    if n_steps == 0 {
        return Err(Error::NonPositiveSteps);
    }
    let mut g = GammaVector::initial(law);
    if t == 0.0 {
        return Ok(g);
    }
    let h = t / n_steps as f64;
    for k in 0..n_steps {
        let k1 = gamma_rhs(c, factor, &g);
        let k2 = gamma_rhs(c, factor, &g.axpy(0.5 * h, &k1));
        let k3 = gamma_rhs(c, factor, &g.axpy(0.5 * h, &k2));
        let k4 = gamma_rhs(c, factor, &g.axpy(h, &k3));
        for j in 0..6 {
            g.0[j] += (k1.0[j] + 2.0 * k2.0[j] + 2.0 * k3.0[j] + k4.0[j]) * (h / 6.0);
        }
        if !(g.max_norm() <= 1e12) {
            return Err(Error::OdeEscape { t: h * (k + 1) as f64 });
        }
    }
    Ok(g)
}

/// Default RK4 step count, step `1e-4 t`.
pub const DEFAULT_ODE_STEPS: usize = 10_000;

/// RK4 with step doubling from [`DEFAULT_ODE_STEPS`] until two successive
/// solutions agree to `1e-10 (1 + |gamma|)`.
pub fn integrate_gamma_ode(
    c: &EffectiveCoeffs,
    factor: FactorDynamics,
    law: &InitialLaw,
    t: f64,
) -> Result<GammaVector> {
    let mut n = DEFAULT_ODE_STEPS;
    let mut coarse = integrate_gamma_ode_steps(c, factor, law, t, n)?;
    if t == 0.0 {
        return Ok(coarse);
    }
    loop {
        n *= 2;
        let fine = integrate_gamma_ode_steps(c, factor, law, t, n)?;
        let tol = 1e-10 * (1.0 + fine.max_norm());
        if fine.max_abs_diff(&coarse) < tol || n >= 1 << 22 {
            return Ok(fine);
        }
        coarse = fine;
    }
}
