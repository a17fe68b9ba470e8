//! Market parameters, initial laws, strategies and the reduction of an
//! m-asset strategy to the scalar coefficients of a single log-wealth SDE.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// m assets driven by one linear factor and m+1 Brownian motions:
///
/// `dS_i/S_i = (drift_i + loading_i X) dt + sum_k vol[i][k] dW_k`
/// `dX = (factor_drift + mean_reversion X) dt + sum_k factor_vol[k] dW_k`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMarketParams {
    pub drift: Vec<f64>,
    pub loading: Vec<f64>,
    pub factor_drift: f64,
    pub mean_reversion: f64,
    /// m rows of m+1 entries.
    pub vol: Vec<Vec<f64>>,
    /// m+1 entries.
    pub factor_vol: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidParams(self.problems))
        }
    }
}

impl LinearMarketParams {
    pub fn n_assets(&self) -> usize {
        self.drift.len()
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    /// Asset-volatility row norms `sum_k vol[i][k]^2`.
    pub fn row_variances(&self) -> Vec<f64> {
        self.vol.iter().map(|row| row.iter().map(|v| v * v).sum()).collect()
    }

    pub fn factor_variance(&self) -> f64 {
        self.factor_vol.iter().map(|l| l * l).sum()
    }

    /// Loadings of each asset on the factor noise, `sum_k vol[i][k] factor_vol[k]`.
    pub fn factor_covariances(&self) -> Vec<f64> {
        self.vol
            .iter()
            .map(|row| row.iter().zip(&self.factor_vol).map(|(s, l)| s * l).sum())
            .collect()
    }

    /// Instantaneous covariance of asset returns.
    pub fn return_covariance(&self) -> Vec<Vec<f64>> {
        let m = self.n_assets();
        let mut cov = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..m {
                cov[i][j] = self.vol[i].iter().zip(&self.vol[j]).map(|(a, b)| a * b).sum();
            }
        }
        cov
    }

    /// Stationary standard deviation of the factor.
    pub fn stationary_factor_std(&self) -> f64 {
        (self.factor_variance() / (-2.0 * self.mean_reversion)).sqrt()
    }
}

/// Lists every violated standing assumption; an empty report means valid.
pub fn validate(params: &LinearMarketParams) -> ValidationReport {
    let mut problems = Vec::new();
    let m = params.drift.len();
    if m < 2 {
        problems.push(format!("at least 2 assets required, got {m}"));
    }
    if params.loading.len() != m {
        problems.push(format!("loading has {} entries, expected {m}", params.loading.len()));
    }
    if params.vol.len() != m {
        problems.push(format!("vol has {} rows, expected {m}", params.vol.len()));
    }
    for (i, row) in params.vol.iter().enumerate() {
        if row.len() != m + 1 {
            problems.push(format!("vol row {i} has {} entries, expected {}", row.len(), m + 1));
        }
    }
    if params.factor_vol.len() != m + 1 {
        problems.push(format!(
            "factor_vol has {} entries, expected {}",
            params.factor_vol.len(),
            m + 1
        ));
    }
    let all = params
        .drift
        .iter()
        .chain(&params.loading)
        .chain(params.vol.iter().flatten())
        .chain(&params.factor_vol)
        .chain([&params.factor_drift, &params.mean_reversion]);
    if all.into_iter().any(|v| !v.is_finite()) {
        problems.push("all entries must be finite".to_string());
    }
    if !(params.mean_reversion < 0.0) {
        problems.push("beta must be negative (mean_reversion < 0)".to_string());
    }
    if !params.vol.iter().flatten().any(|v| *v != 0.0) {
        problems.push("Sigma must have a nonzero row (vol is all zeros)".to_string());
    }
    ValidationReport { problems }
}

/// Drift intercept and mean reversion of the factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorDynamics {
    pub factor_drift: f64,
    pub mean_reversion: f64,
}

impl From<&LinearMarketParams> for FactorDynamics {
    fn from(p: &LinearMarketParams) -> Self {
        Self { factor_drift: p.factor_drift, mean_reversion: p.mean_reversion }
    }
}

impl From<&CirModelParams> for FactorDynamics {
    fn from(p: &CirModelParams) -> Self {
        Self { factor_drift: p.factor_drift, mean_reversion: p.mean_reversion }
    }
}

/// Risky asset plus bank account: `dS_1/S_1 = (drift + loading R) dt + vol dW_1`,
/// `dS_2/S_2 = R dt`, with the factor `R` driven by its own Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StockBankParams {
    pub drift: f64,
    pub loading: f64,
    pub vol: f64,
    pub factor_drift: f64,
    pub mean_reversion: f64,
    pub factor_vol: f64,
}

impl StockBankParams {
    /// The same market written as a two-asset linear market.
    pub fn to_market(&self) -> LinearMarketParams {
        LinearMarketParams {
            drift: vec![self.drift, 0.0],
            loading: vec![self.loading, 1.0],
            factor_drift: self.factor_drift,
            mean_reversion: self.mean_reversion,
            vol: vec![vec![self.vol, 0.0, 0.0], vec![0.0; 3]],
            factor_vol: vec![0.0, 0.0, self.factor_vol],
        }
    }

    /// Recognizes a two-asset market whose second asset is the bank account.
    pub fn from_market(params: &LinearMarketParams) -> Result<Self> {
        let bank = params.n_assets() == 2
            && params.drift[1] == 0.0
            && params.loading[1] == 1.0
            && params.vol[1].iter().all(|v| *v == 0.0)
            && params.vol[0][1..].iter().all(|v| *v == 0.0)
            && params.factor_vol[..2].iter().all(|v| *v == 0.0);
        if !bank {
            return Err(Error::NotTwoAsset);
        }
        Ok(Self {
            drift: params.drift[0],
            loading: params.loading[0],
            vol: params.vol[0][0],
            factor_drift: params.factor_drift,
            mean_reversion: params.mean_reversion,
            factor_vol: params.factor_vol[2],
        })
    }
}

/// Risky asset plus bank account with a square-root factor
/// `dR = (factor_drift + mean_reversion R) dt + factor_vol sqrt(R) dW_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirModelParams {
    pub drift: f64,
    pub loading: f64,
    pub vol: f64,
    pub factor_drift: f64,
    pub mean_reversion: f64,
    pub factor_vol: f64,
}

impl CirModelParams {
    pub fn validate(&self) -> ValidationReport {
        let mut problems = Vec::new();
        let all = [
            self.drift,
            self.loading,
            self.vol,
            self.factor_drift,
            self.mean_reversion,
            self.factor_vol,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            problems.push("all entries must be finite".to_string());
        }
        if !(self.mean_reversion < 0.0) {
            problems.push("beta must be negative (mean_reversion < 0)".to_string());
        }
        if !(self.factor_drift > 0.0) {
            problems.push("factor_drift must be positive".to_string());
        }
        if !(self.factor_vol >= 0.0) {
            problems.push("factor_vol must be nonnegative".to_string());
        }
        if !(self.vol > 0.0) {
            problems.push("vol must be positive".to_string());
        }
        if !feller_check(self) {
            problems.push("Feller condition -2*beta*B > lambda^2 violated".to_string());
        }
        ValidationReport { problems }
    }

    pub fn require_feller(&self) -> Result<()> {
        if feller_check(self) {
            Ok(())
        } else {
            Err(Error::FellerViolation {
                lhs: -2.0 * self.mean_reversion * self.factor_drift,
                rhs: self.factor_vol * self.factor_vol,
            })
        }
    }

    pub fn as_stock_bank(&self) -> StockBankParams {
        StockBankParams {
            drift: self.drift,
            loading: self.loading,
            vol: self.vol,
            factor_drift: self.factor_drift,
            mean_reversion: self.mean_reversion,
            factor_vol: self.factor_vol,
        }
    }
}

/// True iff the square-root factor stays strictly positive.
pub fn feller_check(params: &CirModelParams) -> bool {
    -2.0 * params.mean_reversion * params.factor_drift > params.factor_vol * params.factor_vol
}

/// Initial law of the factor. Log-wealth always starts at a point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialLaw {
    Gaussian(GaussianLaw),
    /// Limit of a uniform factor law on a growing interval.
    UniformLimit { initial_log_wealth: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianLaw {
    pub initial_log_wealth: f64,
    pub factor_mean: f64,
    pub factor_std: f64,
}

impl InitialLaw {
    pub fn initial_log_wealth(&self) -> f64 {
        match self {
            InitialLaw::Gaussian(g) => g.initial_log_wealth,
            InitialLaw::UniformLimit { initial_log_wealth } => *initial_log_wealth,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InitialLaw::Gaussian(g) if !(g.factor_std > 0.0 && g.factor_std.is_finite()) => {
                Err(Error::InvalidParams(vec!["factor_std must be positive".to_string()]))
            }
            _ => Ok(()),
        }
    }
}

/// Capital proportions; entries may be negative, they sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    weights: Vec<f64>,
}

impl Strategy {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        let scale = weights.iter().map(|w| w.abs()).sum::<f64>().max(1.0);
        if weights.iter().any(|w| !w.is_finite()) || (sum - 1.0).abs() > 1e-12 * scale {
            return Err(Error::InvalidParams(vec![format!("weights sum to {sum}, expected 1")]));
        }
        Ok(Self { weights })
    }

    /// Rescales arbitrary weights onto the hyperplane; only on explicit request.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if sum == 0.0 || !sum.is_finite() {
            return Err(Error::InvalidParams(vec!["weights sum to zero".to_string()]));
        }
        Ok(Self { weights: weights.into_iter().map(|w| w / sum).collect() })
    }

    /// Risky weight `h` and bank weight `1 - h`.
    pub fn stock_bank(h: f64) -> Self {
        Self { weights: vec![h, 1.0 - h] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Scalar coefficients of `dF = (drift + loading X) dt + (sigma, dW)` with
/// `wealth_var = |sigma|^2`, `factor_var = |factor_vol|^2` and
/// `cross_cov = (sigma, factor_vol)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCoeffs {
    pub drift: f64,
    pub loading: f64,
    pub wealth_var: f64,
    pub factor_var: f64,
    pub cross_cov: f64,
}

pub fn effective_coeffs(params: &LinearMarketParams, h: &Strategy) -> Result<EffectiveCoeffs> {
    effective_coeffs_unconstrained(params, h.weights())
}

/// Same reduction for weights that need not sum to one (interpolation probes).
pub fn effective_coeffs_unconstrained(
    params: &LinearMarketParams,
    weights: &[f64],
) -> Result<EffectiveCoeffs> {
    let m = params.n_assets();
    if weights.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {m} assets",
            weights.len()
        )));
    }
    if params.loading.len() != m
        || params.vol.len() != m
        || params.factor_vol.len() != m + 1
        || params.vol.iter().any(|r| r.len() != m + 1)
    {
        return Err(Error::DimensionMismatch("market arrays disagree on m".to_string()));
    }
    let row_var = params.row_variances();
    let mut drift = 0.0;
    let mut loading = 0.0;
    for i in 0..m {
        drift += weights[i] * params.drift[i] - 0.5 * weights[i] * weights[i] * row_var[i];
        loading += weights[i] * params.loading[i];
    }
    let mut wealth_var = 0.0;
    let mut cross_cov = 0.0;
    for k in 0..=m {
        let combined: f64 = (0..m).map(|i| weights[i] * params.vol[i][k]).sum();
        wealth_var += combined * combined;
        cross_cov += combined * params.factor_vol[k];
    }
    Ok(EffectiveCoeffs {
        drift,
        loading,
        wealth_var,
        factor_var: params.factor_variance(),
        cross_cov,
    })
}

/// Risk-penalty coefficient; admissible above -1/2.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct RiskAversion(f64);

impl RiskAversion {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > -0.5 && gamma.is_finite() {
            Ok(Self(gamma))
        } else {
            Err(Error::RiskAversionOutOfRange(gamma))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}
