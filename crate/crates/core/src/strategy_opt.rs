//! Fixed-time strategies maximizing `Q = f_bar - gamma * v_bar` over weights
//! summing to one, in closed form for stock/bank markets and by exact
//! quadratic interpolation in general, plus their large-time limits.

use serde::{Deserialize, Serialize};

use crate::cir_moments::{moments_cir, CirEffective};
use crate::model_core::{
    effective_coeffs_unconstrained, CirModelParams, FactorDynamics, InitialLaw, LinearMarketParams, RiskAversion,
    StockBankParams, Strategy,
};
use crate::vasicek_moments::{moments, ConditionalMoments};
use crate::{check_horizon, Error, Result};

/// `f_bar - gamma * v_bar`.
pub fn q_gamma(m: ConditionalMoments, gamma: RiskAversion) -> f64 {
    m.mean - gamma.value() * m.variance
}

/// `Q(h) = h' quad h + lin' h + constant`, with `quad` symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticObjective {
    pub quad: Vec<Vec<f64>>,
    pub lin: Vec<f64>,
    pub constant: f64,
}

impl QuadraticObjective {
    pub fn dim(&self) -> usize {
        self.lin.len()
    }

    pub fn value(&self, h: &[f64]) -> f64 {
        let mut v = self.constant;
        for i in 0..self.dim() {
            v += self.lin[i] * h[i];
            for j in 0..self.dim() {
                v += h[i] * self.quad[i][j] * h[j];
            }
        }
        v
    }
}

/// Evaluates `Q` at arbitrary (not necessarily normalized) weights.
pub fn objective_at(
    params: &LinearMarketParams,
    law: &InitialLaw,
    gamma: RiskAversion,
    t: f64,
    x: f64,
    weights: &[f64],
) -> Result<f64> {
    let c = effective_coeffs_unconstrained(params, weights)?;
    Ok(q_gamma(moments(&c, params.into(), law, t, x)?, gamma))
}

/// Holdout tolerance of the quadratic reconstruction, relative to `1 + |Q|`.
pub const QUADRATIC_HOLDOUT_TOL: f64 = 1e-9;

/// Recovers the quadratic form of `Q` from its values at `0`, `e_i` and
/// `e_i + e_j`, then checks it on the holdout `(2, -1, 0, ...)`.
pub fn assemble_objective(
    params: &LinearMarketParams,
    law: &InitialLaw,
    gamma: RiskAversion,
    t: f64,
    x: f64,
) -> Result<QuadraticObjective> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    params.validate().into_result()?;
    let m = params.n_assets();
    let eval = |w: &[f64]| objective_at(params, law, gamma, t, x, w);
    let unit = |i: usize, j: usize| {
        let mut w = vec![0.0; m];
        w[i] += 1.0;
        w[j] += 1.0;
        w
    };
    let q0 = eval(&vec![0.0; m])?;
    let qe = (0..m)
        .map(|i| {
            let mut w = vec![0.0; m];
            w[i] = 1.0;
            eval(&w)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut quad = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            let qij = eval(&unit(i, j))?;
            // Diagonal probe is 2 e_i: q = q0 + 2 lin_i + 4 quad_ii.
            let v = if i == j { (qij - 2.0 * qe[i] + q0) / 2.0 } else { (qij - qe[i] - qe[j] + q0) / 2.0 };
            quad[i][j] = v;
            quad[j][i] = v;
        }
    }
    let lin = (0..m).map(|i| qe[i] - q0 - quad[i][i]).collect();
    let obj = QuadraticObjective { quad, lin, constant: q0 };

    let mut holdout = vec![0.0; m];
    holdout[0] = 2.0;
    holdout[1] = -1.0;
    let direct = eval(&holdout)?;
    let residual = (obj.value(&holdout) - direct).abs();
    if residual > QUADRATIC_HOLDOUT_TOL * (1.0 + direct.abs()) {
        return Err(Error::NonQuadraticObjective(residual));
    }
    Ok(obj)
}

/// Solves `a y = b` by Gaussian elimination with partial pivoting; a pivot
/// below `1e-13` times the largest entry counts as singular.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut y = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * y[k]).sum();
        y[row] = (b[row] - s) / a[row][row];
    }
    Some(y)
}

/// Whether `quad` restricted to `{sum h = 0}` is negative definite.
fn reduced_hessian_negative_definite(quad: &[Vec<f64>]) -> bool {
    let m = quad.len();
    // Basis e_i - e_{m-1}; Cholesky of the negated restriction.
    let k = m - 1;
    let last = m - 1;
    let mut r = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            r[i][j] = -(quad[i][j] - quad[i][last] - quad[last][j] + quad[last][last]);
        }
    }
    let scale = r.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    for j in 0..k {
        let d = r[j][j] - (0..j).map(|p| r[j][p] * r[j][p]).sum::<f64>();
        if !(d > 1e-14 * scale) {
            return false;
        }
        let d = d.sqrt();
        r[j][j] = d;
        for i in j + 1..k {
            r[i][j] = (r[i][j] - (0..j).map(|p| r[i][p] * r[j][p]).sum::<f64>()) / d;
        }
    }
    true
}

/// Maximizer of `obj` on `{sum h = 1}` from the Lagrange system
/// `2 quad h + lin = mu 1`, `sum h = 1`.
pub fn maximize_on_hyperplane(obj: &QuadraticObjective) -> Result<Strategy> {
    let m = obj.dim();
    if m == 0 || obj.quad.len() != m || obj.quad.iter().any(|r| r.len() != m) {
        return Err(Error::DimensionMismatch(format!("objective of dimension {m}")));
    }
    let mut a = vec![vec![0.0; m + 1]; m + 1];
    let mut b = vec![0.0; m + 1];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = 2.0 * obj.quad[i][j];
        }
        a[i][m] = -1.0;
        a[m][i] = 1.0;
        b[i] = -obj.lin[i];
    }
    b[m] = 1.0;
    let y = solve_dense(a, b).ok_or(Error::DegenerateOptimum)?;
    if m > 1 && !reduced_hessian_negative_definite(&obj.quad) {
        return Err(Error::NotAMaximum);
    }
    Strategy::normalized(y[..m].to_vec())
}

/// Coefficients of `f_bar = M2 h^2 + M1 h + M0` and
/// `v_bar = L2 h^2 + L1 h + L0` for a stock/bank market under the flat law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoAssetVasicekCoeffs {
    pub m2: f64,
    pub m1: f64,
    pub m0: f64,
    pub l2: f64,
    pub l1: f64,
    pub l0: f64,
    /// `e^{-2 be t} - 4 e^{-be t} - 2 be t + 3`, zero at `t = 0`.
    pub phi_t: f64,
}

impl TwoAssetVasicekCoeffs {
    pub fn new(p: &StockBankParams, f0: f64, t: f64, r: f64) -> Result<Self> {
        let be = p.mean_reversion;
        if !(be < 0.0) {
            return Err(Error::NonNegativeMeanReversion(be));
        }
        check_horizon(be, t)?;
        let (a1, al1, s1, b, lam) = (p.drift, p.loading, p.vol, p.factor_drift, p.factor_vol);
        let em = (-be * t).exp();
        let one_minus = -(-be * t).exp_m1();
        let phi_t = em * em - 4.0 * em - 2.0 * be * t + 3.0;
        let be2 = be * be;
        let be3 = be2 * be;
        let k = al1 - 1.0;
        Ok(Self {
            m2: -s1 * s1 * t / 2.0,
            m1: k * (be * r + b) * one_minus / be2 - (b * k - be * a1) * t / be,
            m0: (be * r + b) * one_minus / be2 - b * t / be + f0,
            l2: -lam * lam / (2.0 * be3) * k * k * phi_t + s1 * s1 * t,
            l1: -lam * lam / be3 * k * phi_t,
            l0: -lam * lam / (2.0 * be3) * phi_t,
            phi_t,
        })
    }

    pub fn mean(&self, h: f64) -> f64 {
        self.m2 * h * h + self.m1 * h + self.m0
    }

    pub fn variance(&self, h: f64) -> f64 {
        self.l2 * h * h + self.l1 * h + self.l0
    }
}

/// Risky weight maximizing `Q` at time `t`, factor level `r`, flat law.
pub fn optimal_two_asset_vasicek(p: &StockBankParams, gamma: RiskAversion, t: f64, r: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let c = TwoAssetVasicekCoeffs::new(p, 0.0, t, r)?;
    let g = gamma.value();
    Ok((c.m1 - g * c.l1) / (p.vol * p.vol * t + 2.0 * g * c.l2))
}

/// Risky weight for the square-root factor model, as the circulating
/// rational expression in `e^{be t}`. It is not the maximizer of the
/// moments in [`crate::cir_moments`]; see [`cir_quadratic_maximizer`].
pub fn optimal_two_asset_cir(p: &CirModelParams, gamma: RiskAversion, t: f64, r: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    p.require_feller()?;
    check_horizon(p.mean_reversion, t)?;
    let g = gamma.value();
    let (a1, al1, s1, b, be, lam) =
        (p.drift, p.loading, p.vol, p.factor_drift, p.mean_reversion, p.factor_vol);
    let l2 = lam * lam;
    let l4 = l2 * l2;
    let (be2, be3) = (be * be, be * be * be);
    let be4 = be2 * be2;
    let m4 = g * l2 * (8.0 * l2 + 5.0 * b);
    let m3 = -g * l2 * ((3.0 * l2 + b) * 4.0 * be * t + 15.0 * l2 + 4.0 * r * be + 12.0 * b);
    let m2 = 2.0 * g * l4 * be2 * t * t + (2.0 * l2 + be * r) * 4.0 * g * be * l2 * t + 12.0 * g * l4
        + (5.0 * b + 2.0 * be * r) * 3.0 * g * l2
        - (l2 + b) * be2;
    let m1 = 2.0 * g * l4 * be2 * t * t + (be2 - 2.0 * g * l2) * be * l2 * t - 5.0 * g * l4
        + (be2 - 4.0 * g * be * r - 8.0 * g * b) * l2
        + be3 * r
        + be2 * b;
    let m0 = (be2 - 2.0 * g * l2) * be * b * t + 2.0 * g * l2 * be * r - be3 * r;
    let n2 = g * l2 * (2.0 * l2 * be2 * t * t + (2.0 * l2 + be * r) * 4.0 * be * t + 12.0 * l2 + 6.0 * be * r + 15.0 * b);
    let n1 = g * l2 * (2.0 * be2 * l2 * t * t - 2.0 * be * l2 * t - 5.0 * l2 - 4.0 * be * r - 8.0 * b);
    let n0 = 2.0 * g * be * l2 * (-b * t + r);
    let e = (be * t).exp();
    let poly_m = (((m4 * e + m3) * e + m2) * e + m1) * e + m0;
    let poly_n = (((m4 * e + m3) * e + n2) * e + n1) * e + n0;
    let num = (1.0 - al1) * poly_m + a1 * be4 * t;
    let den = (1.0 - al1).powi(2) * poly_n + (2.0 * g + 1.0) * s1 * s1 * be4 * t;
    Ok(num / den)
}

/// Large-time limit of [`optimal_two_asset_cir`] in its circulating form.
pub fn cir_limit(p: &CirModelParams, gamma: RiskAversion) -> f64 {
    let g = gamma.value();
    let (a1, al1, s1, b, be, lam) =
        (p.drift, p.loading, p.vol, p.factor_drift, p.mean_reversion, p.factor_vol);
    let k = al1 - 1.0;
    (k * (be * be * b - 2.0 * g * lam * lam * b) - a1 * be * be * be)
        / (k * k * 2.0 * g * lam * lam * b + (2.0 * g + 1.0) * s1 * s1 * be * be * be)
}

/// Maximizer of `Q` built from [`moments_cir`] by exact quadratic
/// interpolation in the risky weight.
pub fn cir_quadratic_maximizer(p: &CirModelParams, gamma: RiskAversion, t: f64, r: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let q = |h: f64| moments_cir(&CirEffective::new(p, h), p, 0.0, t, r).map(|m| q_gamma(m, gamma));
    let (q0, q1, q2) = (q(0.0)?, q(1.0)?, q(2.0)?);
    let k2 = (q2 - 2.0 * q1 + q0) / 2.0;
    let k1 = q1 - q0 - k2;
    if !(k2 < 0.0) {
        return Err(Error::NotAMaximum);
    }
    Ok(-k1 / (2.0 * k2))
}

/// Large-time behavior of the optimal weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AsymptoticWeights {
    Finite { weights: Vec<f64> },
    /// First weight runs off to `k1_coefficient * infinity`.
    Divergent { k1_coefficient: f64 },
    /// Weights do not depend on time. For three assets only the first is known.
    ConstantInTime { weights: Vec<f64> },
}

fn require_assets(params: &LinearMarketParams, m: usize) -> Result<()> {
    params.validate().into_result()?;
    if params.n_assets() != m {
        return Err(Error::DimensionMismatch(format!("{m} assets expected, got {}", params.n_assets())));
    }
    Ok(())
}

/// Two-asset large-time limit under the flat law.
pub fn asymptotic_two_asset(params: &LinearMarketParams, gamma: RiskAversion) -> Result<AsymptoticWeights> {
    require_assets(params, 2)?;
    let (a1, a2) = (params.loading[0], params.loading[1]);
    if a1 != a2 {
        let h1 = -a2 / (a1 - a2);
        return Ok(AsymptoticWeights::Finite { weights: vec![h1, 1.0 - h1] });
    }
    let g = gamma.value();
    let be = params.mean_reversion;
    let u = params.row_variances();
    let lam = &params.factor_vol;
    let spread: f64 = (0..3).map(|k| (params.vol[0][k] - params.vol[1][k]) * lam[k]).sum();
    let scale = 2.0 * be * g - 1.0;
    let k1 = g * a1 * spread / ((u[0] + u[1]) * scale);
    if k1 != 0.0 {
        return Ok(AsymptoticWeights::Divergent { k1_coefficient: k1 });
    }
    let h1 = (scale * u[1] + params.drift[1] - params.drift[0]) / ((u[0] + u[1]) * scale);
    Ok(AsymptoticWeights::ConstantInTime { weights: vec![h1, 1.0 - h1] })
}

/// Three-asset large-time limit in its circulating closed form.
pub fn asymptotic_three_asset(params: &LinearMarketParams, gamma: RiskAversion) -> Result<AsymptoticWeights> {
    require_assets(params, 3)?;
    let g = gamma.value();
    let be = params.mean_reversion;
    let u = params.row_variances();
    let (u1, u2, u3) = (u[0], u[1], u[2]);
    let (a1, a2, a3) = (params.drift[0], params.drift[1], params.drift[2]);
    let (l1, l2, l3) = (params.loading[0], params.loading[1], params.loading[2]);
    if l1 == l2 && l2 == l3 {
        return Ok(three_asset_degenerate(params, g));
    }
    let cross = 4.0 * be * (-u3 * l1 * l2 - u2 * l1 * l3 - u1 * l2 * l3);
    let rest = (-u2 - u3) * l1 * l1 + (-u1 - u3) * l2 * l2 + (-u1 - u2) * l3 * l3
        + 2.0 * (u3 * l1 * l2 + u2 * l1 * l3 + u1 * l2 * l3);
    let den1 = (2.0 * be * ((u2 + u3) * l1 * l1 + (u1 + u3) * l2 * l2 + (u1 + u2) * l3 * l3) + cross) * g + rest;
    let den23 = (2.0 * be * ((u2 + u3) * l1 * l1 + (u1 + u2) * l2 * l2 + (u1 + u2) * l3 * l3) + cross) * g + rest;
    let h1 = (2.0 * be * (u3 * (l2 * l2 - l1 * l2) + u2 * (l3 * l3 - l1 * l3)) * g
        + (-a1 + a3 - u3) * l2 * l2
        + (-a1 + a2 - u2) * l3 * l3
        + (2.0 * a1 - a2 - a3) * l2 * l3
        + (a2 - a3 + u3) * l1 * l2
        + (-a2 + a3 + u2) * l1 * l3)
        / den1;
    let h2 = (2.0 * be * (u3 * (l1 * l1 - l1 * l2) + u1 * (l3 * l3 - l2 * l3)) * g
        + (-a2 + a3 - u3) * l1 * l1
        + (a1 - a2 - u1) * l3 * l3
        + (-a1 + 2.0 * a2 - a3) * l1 * l3
        + (a1 - a3 + u3) * l1 * l2
        + (-a1 + a3 + u1) * l2 * l3)
        / den23;
    let h3 = (2.0 * be * (u2 * (l1 * l1 - l1 * l3) + u1 * (l2 * l2 - l2 * l3)) * g
        + (a2 - a3 - u2) * l1 * l1
        + (a1 - a3 - u1) * l2 * l2
        + (-a1 - a2 + 2.0 * a3) * l1 * l2
        + (a1 - a2 + u2) * l1 * l3
        + (-a1 + a2 + u1) * l2 * l3)
        / den23;
    Ok(AsymptoticWeights::Finite { weights: vec![h1, h2, h3] })
}

fn three_asset_degenerate(params: &LinearMarketParams, g: f64) -> AsymptoticWeights {
    let be = params.mean_reversion;
    let u = params.row_variances();
    let scale = 2.0 * be * g - 1.0;
    let pair_sum: f64 = (0..3).flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| u[i] * u[j])
        .sum();
    // Even permutations (i, j, k) of (1, 2, 3), sign (-1)^{i+j-1} in 1-based indices.
    let perms = [(0usize, 1usize, 2usize), (1, 2, 0), (2, 0, 1)];
    let mut spread = 0.0;
    for (l, lam) in params.factor_vol.iter().enumerate() {
        for &(i, j, k) in &perms {
            let sign = if (i + j + 1) % 2 == 0 { 1.0 } else { -1.0 };
            spread += lam * sign * u[k] * (params.vol[i][l] - params.vol[j][l]);
        }
    }
    let k1 = g * params.loading[0] * spread / (scale * pair_sum);
    if k1 != 0.0 {
        return AsymptoticWeights::Divergent { k1_coefficient: k1 };
    }
    let (a1, a2, a3) = (params.drift[0], params.drift[1], params.drift[2]);
    let h1 = (scale * u[1] * u[2] + (a2 - a1) * u[2] + (a3 - a1) * u[1]) / (scale * pair_sum);
    AsymptoticWeights::ConstantInTime { weights: vec![h1] }
}

/// Maximizer of `Q` under the flat law, solved so that it stays accurate
/// for `|be| t` up to the horizon limit.
///
/// `Q = f0 + t (a'h - h'Ph) + mt u - g w1 u (s'h) - g s2 w2 u^2` with
/// `u = loading'h` and `w2 ~ e^{-2 be t}`. The stiff `u` direction is
/// carried by an extra unknown `nu = mt - c s'h - 2 rho u`, which keeps the
/// Lagrange system well scaled.
pub fn optimal_weights_flat_law(
    params: &LinearMarketParams,
    gamma: RiskAversion,
    t: f64,
    x: f64,
) -> Result<Strategy> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    params.validate().into_result()?;
    let g = gamma.value();
    if !(g > 0.0) {
        return Err(Error::RiskAversionOutOfRange(g));
    }
    let be = params.mean_reversion;
    check_horizon(be, t)?;
    let b = params.factor_drift;
    let em = (-be * t).exp();
    let be2 = be * be;
    let be3 = be2 * be;
    // Per unit time.
    let mt = ((be * x + b) * (1.0 - em) / be2 - b * t / be) / t;
    let c = g * 2.0 * (1.0 - em - be * t) / be2 / t;
    let rho = g * params.factor_variance() * (4.0 * em - em * em - 3.0 + 2.0 * be * t) / (2.0 * be3) / t;
    if !(rho > 0.0) {
        return Err(Error::DegenerateFactorVolatility);
    }
    Ok(Strategy::normalized(flat_law_kkt(params, g, mt / (2.0 * rho), c / (2.0 * rho), 1.0 / (2.0 * rho), c)?)?)
}

/// Solves the scaled Lagrange system; `ratio_m = mt / 2 rho`,
/// `ratio_c = c / 2 rho`, `inv = 1 / 2 rho`.
fn flat_law_kkt(params: &LinearMarketParams, g: f64, ratio_m: f64, ratio_c: f64, inv: f64, c: f64) -> Result<Vec<f64>> {
    let m = params.n_assets();
    let u = params.row_variances();
    let cov = params.return_covariance();
    let s = params.factor_covariances();
    let ell = &params.loading;
    let n = m + 2;
    let mut a = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    for i in 0..m {
        for j in 0..m {
            // -2P with P = diag(u)/2 + g cov.
            let p = if i == j { 0.5 * u[i] } else { 0.0 } + g * cov[i][j];
            a[i][j] = -2.0 * p + c * ratio_c * s[i] * s[j];
        }
        a[i][m] = ell[i] + ratio_c * s[i];
        a[i][m + 1] = -1.0;
        rhs[i] = -params.drift[i] + c * ratio_m * s[i];
        a[m][i] = ell[i] + ratio_c * s[i];
        a[m + 1][i] = 1.0;
    }
    a[m][m] = inv;
    rhs[m] = ratio_m;
    rhs[m + 1] = 1.0;
    let y = solve_dense(a, rhs).ok_or(Error::DegenerateOptimum)?;
    Ok(y[..m].to_vec())
}

/// Exact large-time limit under the flat law: maximizer of
/// `drift'h - h'(diag(u)/2 + gamma cov)h` on `{sum h = 1, loading'h = 0}`.
pub fn asymptotic_limit_constrained(params: &LinearMarketParams, gamma: RiskAversion) -> Result<Vec<f64>> {
    params.validate().into_result()?;
    let g = gamma.value();
    flat_law_kkt(params, g, 0.0, 0.0, 0.0, 0.0)
}

/// Large-time limit by Richardson extrapolation in `1/t` of
/// [`optimal_weights_flat_law`] at `t = T, 2T, 4T, 8T`, `T = 30/|be|`.
pub fn asymptotic_limit_numeric(params: &LinearMarketParams, gamma: RiskAversion, x: f64) -> Result<Vec<f64>> {
    let base = 30.0 / params.mean_reversion.abs();
    let levels = [1.0, 2.0, 4.0, 8.0];
    let mut table: Vec<Vec<f64>> = levels
        .iter()
        .map(|k| optimal_weights_flat_law(params, gamma, base * k, x).map(|s| s.weights().to_vec()))
        .collect::<Result<_>>()?;
    // Halving 1/t each level: R_{j} = (2^p R_{j+1} - R_j) / (2^p - 1).
    let mut p = 1;
    while table.len() > 1 {
        let f = 2f64.powi(p);
        table = table
            .windows(2)
            .map(|w| w[0].iter().zip(&w[1]).map(|(lo, hi)| (f * hi - lo) / (f - 1.0)).collect())
            .collect();
        p += 1;
    }
    Ok(table.remove(0))
}

/// Long-run growth rate of `Q` along the optimal stock/bank weight.
pub fn rho_bar(p: &StockBankParams, gamma: RiskAversion) -> f64 {
    let g = gamma.value();
    let (a1, al1, s1) = (p.drift, p.loading, p.vol);
    if al1 != 1.0 {
        a1 / (1.0 - al1) - (g + 0.5) * s1 * s1 / (al1 - 1.0).powi(2)
    } else {
        a1 * a1 / (2.0 * s1 * s1) - p.factor_drift / p.mean_reversion
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub gamma: f64,
    pub v_bar: f64,
    pub f_bar: f64,
}

/// Moments at the optimal weights for each `gamma`, in list order.
pub fn frontier(
    params: &LinearMarketParams,
    law: &InitialLaw,
    gammas: &[f64],
    t: f64,
    x: f64,
) -> Result<Vec<FrontierRow>> {
    gammas
        .iter()
        .map(|&g| {
            let gamma = RiskAversion::new(g)?;
            let h = maximize_on_hyperplane(&assemble_objective(params, law, gamma, t, x)?)?;
            let c = crate::model_core::effective_coeffs(params, &h)?;
            let m = moments(&c, FactorDynamics::from(params), law, t, x)?;
            Ok(FrontierRow { gamma: g, v_bar: m.variance, f_bar: m.mean })
        })
        .collect()
}
