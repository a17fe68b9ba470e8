use std::path::Path;

use anyhow::{bail, Context, Result};
use portopt::{CirModelParams, InitialLaw, LinearMarketParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Vasicek,
    Cir,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default)]
    pub t: Vec<f64>,
    #[serde(default)]
    pub x: Vec<f64>,
    #[serde(default)]
    pub gamma: Vec<f64>,
}

/// Monte-Carlo settings for `--verify`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySettings {
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    /// Half-width of the conditioning window; 0.25 sd of `X_T` when absent.
    #[serde(default)]
    pub bandwidth: Option<f64>,
    /// Width of the uniform stand-in for the flat law.
    #[serde(default)]
    pub truncation: Option<f64>,
}

fn default_paths() -> usize {
    100_000
}

fn default_steps() -> usize {
    1000
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self { n_paths: default_paths(), n_steps: default_steps(), bandwidth: None, truncation: None }
    }
}

fn default_law() -> InitialLaw {
    InitialLaw::UniformLimit { initial_log_wealth: 0.0 }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default)]
    pub market: Option<LinearMarketParams>,
    #[serde(default)]
    pub cir: Option<CirModelParams>,
    #[serde(default = "default_law")]
    pub law: InitialLaw,
    /// Portfolio weights for `moments`; the square-root model uses the first.
    #[serde(default)]
    pub strategy: Option<Vec<f64>>,
    #[serde(default)]
    pub gamma: f64,
    /// Risk sensitivity of the benchmark; `4 * gamma` when absent.
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub verify: VerifySettings,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("cannot parse config {}", path.display()))
    }

    pub fn theta(&self) -> f64 {
        self.theta.unwrap_or(4.0 * self.gamma)
    }

    pub fn market(&self) -> Result<&LinearMarketParams> {
        match &self.market {
            Some(m) => Ok(m),
            None => bail!("config has no `market` section"),
        }
    }

    pub fn cir(&self) -> Result<&CirModelParams> {
        match &self.cir {
            Some(c) => Ok(c),
            None => bail!("config has no `cir` section"),
        }
    }

    /// Every problem with the sections the chosen model uses.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(e) = self.law.validate() {
            out.push(format!("law: {e}"));
        }
        if !(self.gamma > -0.5) {
            out.push(format!("gamma must exceed -1/2, got {}", self.gamma));
        }
        match self.model {
            ModelKind::Vasicek => match &self.market {
                None => out.push("model `vasicek` needs a `market` section".to_string()),
                Some(m) => {
                    out.extend(m.validate().problems.into_iter().map(|p| format!("market: {p}")));
                    if let Some(h) = &self.strategy {
                        if h.len() != m.n_assets() {
                            out.push(format!("strategy has {} weights for {} assets", h.len(), m.n_assets()));
                        }
                    }
                }
            },
            ModelKind::Cir => {
                match &self.cir {
                    None => out.push("model `cir` needs a `cir` section".to_string()),
                    Some(c) => out.extend(c.validate().problems.into_iter().map(|p| format!("cir: {p}"))),
                }
                if matches!(self.law, InitialLaw::Gaussian(_)) {
                    out.push("the square-root model supports only the uniform_limit law".to_string());
                }
            }
        }
        if let Some(h) = &self.strategy {
            let total: f64 = h.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                out.push(format!("strategy weights sum to {total}, expected 1"));
            }
        }
        out
    }
}
