mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use portopt::bp_benchmark::{compare_expectations, h_theta};
use portopt::cir_moments::{moments_cir, CirEffective};
use portopt::model_core::effective_coeffs;
use portopt::sde_oracle::{default_bandwidth, mc_conditional_moments, simulate_paths, SimConfig, SimModel};
use portopt::strategy_opt::{
    assemble_objective, asymptotic_limit_constrained, asymptotic_two_asset, frontier, maximize_on_hyperplane,
    objective_at, optimal_two_asset_cir, optimal_two_asset_vasicek, optimal_weights_flat_law, q_gamma,
    AsymptoticWeights, TwoAssetVasicekCoeffs,
};
use portopt::vasicek_moments::moments;
use portopt::{FactorDynamics, RiskAversion, StockBankParams, Strategy};

use config::{ModelKind, RunConfig};
use output::{emit, Table};

#[derive(Parser)]
#[command(name = "portopt", version, about = "Fixed-horizon mean-variance strategies in one-factor market models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the config; exit status 0 iff it is usable.
    Validate(Common),
    /// Conditional mean and variance of log-wealth on a (t, x) grid.
    Moments(Common),
    /// Optimal weights and objective value on a (t, x) grid.
    Optimize(Common),
    /// Variance and mean at the optimum for each gamma in the grid.
    Frontier(Common),
    /// Optimal weights over the t grid under the flat law, then the limit.
    Asymptotics(Common),
    /// Mean log-wealth at the fixed-time optimum versus the risk-sensitive weight.
    CompareBp(Common),
    /// Optimal risky weight under the linear and square-root factor models.
    CompareModels(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Times, comma separated; overrides `grids.t`.
    #[arg(long, value_delimiter = ',')]
    t: Vec<f64>,
    /// Factor levels, comma separated; overrides `grids.x`.
    #[arg(long, value_delimiter = ',')]
    x: Vec<f64>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Add Monte-Carlo columns to `moments`.
    #[arg(long)]
    verify: bool,
    /// Directory for CSV files and the run manifest; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Run {
    cfg: RunConfig,
    ts: Vec<f64>,
    xs: Vec<f64>,
    verify: bool,
    out: Option<PathBuf>,
}

impl Run {
    fn load(args: Common) -> Result<Self> {
        let mut cfg = RunConfig::load(&args.config)?;
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        }
        let ts = if args.t.is_empty() { cfg.grids.t.clone() } else { args.t };
        let xs = if args.x.is_empty() { cfg.grids.x.clone() } else { args.x };
        Ok(Self { cfg, ts, xs, verify: args.verify, out: args.out })
    }

    fn checked(args: Common) -> Result<Self> {
        let run = Self::load(args)?;
        let problems = run.cfg.problems();
        if !problems.is_empty() {
            bail!("invalid config:\n  {}", problems.join("\n  "));
        }
        Ok(run)
    }

    fn gamma(&self) -> Result<RiskAversion> {
        Ok(RiskAversion::new(self.cfg.gamma)?)
    }

    fn need_t(&self) -> Result<&[f64]> {
        if self.ts.is_empty() {
            bail!("no times given: pass --t or set grids.t");
        }
        Ok(&self.ts)
    }

    fn need_x(&self) -> Result<&[f64]> {
        if self.xs.is_empty() {
            bail!("no factor levels given: pass --x or set grids.x");
        }
        Ok(&self.xs)
    }

    fn single(&self) -> Result<(f64, f64)> {
        match (self.need_t()?, self.need_x()?) {
            ([t], [x]) => Ok((*t, *x)),
            _ => bail!("this command needs exactly one t and one x"),
        }
    }

    /// The factor level for commands that sweep only time.
    fn single_x(&self) -> Result<f64> {
        match self.need_x()? {
            [x] => Ok(*x),
            _ => bail!("this command needs exactly one x"),
        }
    }

    fn stock_bank(&self) -> Result<StockBankParams> {
        Ok(StockBankParams::from_market(self.cfg.market()?)?)
    }

    fn emit(&self, command: &str, tables: &[(String, Table)], notes: &[String]) -> Result<()> {
        emit(self.out.as_deref(), command, &self.cfg, tables, notes)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate(a) => return validate(a),
        Command::Moments(a) => Run::checked(a).and_then(|r| cmd_moments(&r)),
        Command::Optimize(a) => Run::checked(a).and_then(|r| cmd_optimize(&r)),
        Command::Frontier(a) => Run::checked(a).and_then(|r| cmd_frontier(&r)),
        Command::Asymptotics(a) => Run::checked(a).and_then(|r| cmd_asymptotics(&r)),
        Command::CompareBp(a) => Run::checked(a).and_then(|r| cmd_compare_bp(&r)),
        Command::CompareModels(a) => Run::checked(a).and_then(|r| cmd_compare_models(&r)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn validate(args: Common) -> ExitCode {
    let run = match Run::load(args) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let problems = run.cfg.problems();
    if problems.is_empty() {
        println!("valid");
        ExitCode::SUCCESS
    } else {
        for p in problems {
            eprintln!("{p}");
        }
        ExitCode::from(2)
    }
}

fn strategy(run: &Run) -> Result<Strategy> {
    match &run.cfg.strategy {
        Some(w) => Ok(Strategy::new(w.clone())?),
        None => bail!("`moments` needs a `strategy` in the config"),
    }
}

fn cmd_moments(run: &Run) -> Result<()> {
    let (ts, xs) = (run.need_t()?, run.need_x()?);
    let mut header = vec!["t", "x", "f_bar", "v_bar"];
    if run.verify {
        header.extend(["f_mc", "v_mc", "stderr_f", "stderr_v"]);
    }
    let mut table = Table::new(header);
    let h = strategy(run)?;
    let law = run.cfg.law;
    let mut notes = Vec::new();
    for (i, &t) in ts.iter().enumerate() {
        let closed: Vec<(f64, f64)> = match run.cfg.model {
            ModelKind::Vasicek => {
                let market = run.cfg.market()?;
                let c = effective_coeffs(market, &h)?;
                xs.iter()
                    .map(|&x| {
                        let m = moments(&c, FactorDynamics::from(market), &law, t, x)
                            .with_context(|| format!("moments at t = {t}, x = {x}"))?;
                        Ok((m.mean, m.variance))
                    })
                    .collect::<Result<_>>()?
            }
            ModelKind::Cir => {
                let p = run.cfg.cir()?;
                let eff = CirEffective::new(p, h.weights()[0]);
                xs.iter()
                    .map(|&x| {
                        let m = moments_cir(&eff, p, law.initial_log_wealth(), t, x)
                            .with_context(|| format!("moments at t = {t}, r = {x}"))?;
                        Ok((m.mean, m.variance))
                    })
                    .collect::<Result<_>>()?
            }
        };
        let mc = if run.verify && t > 0.0 {
            let v = &run.cfg.verify;
            let sim = SimConfig {
                t_end: t,
                n_steps: v.n_steps,
                n_paths: v.n_paths,
                seed: run.cfg.seed.wrapping_add(i as u64),
                truncation: v.truncation,
            };
            let model = match run.cfg.model {
                ModelKind::Vasicek => SimModel::Linear { params: run.cfg.market()?, strategy: &h },
                ModelKind::Cir => SimModel::Cir { params: run.cfg.cir()?, weight: h.weights()[0] },
            };
            let ens = simulate_paths(model, &law, &sim)?;
            let bw = v.bandwidth.unwrap_or_else(|| default_bandwidth(&ens));
            let rows: Vec<[f64; 4]> = xs
                .iter()
                .map(|&x| match mc_conditional_moments(&ens, x, bw) {
                    Ok(m) => [m.f_bar_hat, m.v_bar_hat, m.stderr_f, m.stderr_v],
                    Err(e) => {
                        notes.push(format!("t = {t}, x = {x}: {e}"));
                        [f64::NAN; 4]
                    }
                })
                .collect();
            Some(rows)
        } else {
            None
        };
        for (j, (&x, (f, v))) in xs.iter().zip(closed).enumerate() {
            let mut row = vec![t, x, f, v];
            if run.verify {
                row.extend(mc.as_ref().map_or([f64::NAN; 4], |m| m[j]));
            }
            table.push(row);
        }
    }
    run.emit("moments", &[("moments".to_string(), table)], &notes)
}

fn cmd_optimize(run: &Run) -> Result<()> {
    let (ts, xs) = (run.need_t()?, run.need_x()?);
    let gamma = run.gamma()?;
    let law = run.cfg.law;
    let m = match run.cfg.model {
        ModelKind::Vasicek => run.cfg.market()?.n_assets(),
        ModelKind::Cir => 2,
    };
    let mut header = vec!["t".to_string(), "x".to_string()];
    header.extend((1..=m).map(|i| format!("h{i}")));
    header.push("q_value".to_string());
    let mut table = Table::new(header);
    for &t in ts {
        for &x in xs {
            let (weights, q) = match run.cfg.model {
                ModelKind::Vasicek => {
                    let market = run.cfg.market()?;
                    let obj = assemble_objective(market, &law, gamma, t, x)
                        .with_context(|| format!("objective at t = {t}, x = {x}"))?;
                    let h = maximize_on_hyperplane(&obj)?;
                    let q = objective_at(market, &law, gamma, t, x, h.weights())?;
                    (h.weights().to_vec(), q)
                }
                ModelKind::Cir => {
                    let p = run.cfg.cir()?;
                    let h = optimal_two_asset_cir(p, gamma, t, x)?;
                    let m = moments_cir(&CirEffective::new(p, h), p, law.initial_log_wealth(), t, x)?;
                    (vec![h, 1.0 - h], q_gamma(m, gamma))
                }
            };
            let mut row = vec![t, x];
            row.extend(weights);
            row.push(q);
            table.push(row);
        }
    }
    run.emit("optimize", &[("optimize".to_string(), table)], &[])
}

fn cmd_frontier(run: &Run) -> Result<()> {
    if run.cfg.model != ModelKind::Vasicek {
        bail!("frontier is available for the linear factor model only");
    }
    let (t, x) = run.single()?;
    let rows = frontier(run.cfg.market()?, &run.cfg.law, &run.cfg.grids.gamma, t, x)?;
    let mut table = Table::new(["gamma", "v_bar", "f_bar"]);
    for r in rows {
        table.push([r.gamma, r.v_bar, r.f_bar]);
    }
    run.emit("frontier", &[("frontier".to_string(), table)], &[])
}

fn cmd_asymptotics(run: &Run) -> Result<()> {
    if run.cfg.model != ModelKind::Vasicek {
        bail!("asymptotics is available for the linear factor model only");
    }
    let market = run.cfg.market()?;
    let gamma = run.gamma()?;
    let x = run.single_x()?;
    let m = market.n_assets();
    let mut header = vec!["t".to_string()];
    header.extend((1..=m).map(|i| format!("h{i}")));
    let mut table = Table::new(header);
    for &t in run.need_t()? {
        let h = optimal_weights_flat_law(market, gamma, t, x).with_context(|| format!("weights at t = {t}"))?;
        let mut row = vec![t];
        row.extend_from_slice(h.weights());
        table.push(row);
    }
    let mut notes = Vec::new();
    let limit = if m == 2 {
        match asymptotic_two_asset(market, gamma)? {
            AsymptoticWeights::Finite { weights } => Some(weights),
            AsymptoticWeights::ConstantInTime { weights } => {
                notes.push("equal loadings: weights constant in time".to_string());
                Some(weights)
            }
            AsymptoticWeights::Divergent { k1_coefficient } => {
                notes.push(format!("h1 diverges like {k1_coefficient} * t"));
                None
            }
        }
    } else {
        match asymptotic_limit_constrained(market, gamma) {
            Ok(w) => Some(w),
            Err(e) => {
                notes.push(format!("no finite limit: {e}"));
                None
            }
        }
    };
    if let Some(w) = limit {
        let mut row = vec![f64::INFINITY];
        row.extend(w);
        table.push(row);
    }
    run.emit("asymptotics", &[("asymptotics".to_string(), table)], &notes)
}

fn cmd_compare_bp(run: &Run) -> Result<()> {
    let p = run.stock_bank()?;
    let gamma = run.gamma()?;
    let theta = run.cfg.theta();
    let r = run.single_x()?;
    let f0 = run.cfg.law.initial_log_wealth();
    let h_bp = h_theta(&p, theta, r)?;
    let mut table = Table::new(["t", "f_bar_gamma", "f_bar_theta", "diff"]);
    for &t in run.need_t()? {
        let coeffs = TwoAssetVasicekCoeffs::new(&p, f0, t, r)?;
        let h = optimal_two_asset_vasicek(&p, gamma, t, r)?;
        let cmp = compare_expectations(&p, gamma, theta, t, r)?;
        table.push([t, coeffs.mean(h), coeffs.mean(h_bp), cmp.diff]);
    }
    run.emit("compare_bp", &[("compare_bp".to_string(), table)], &[])
}

fn cmd_compare_models(run: &Run) -> Result<()> {
    let p = run.cfg.cir.context("compare-models needs a `cir` section")?;
    p.require_feller()?;
    let gamma = run.gamma()?;
    let r = run.single_x()?;
    let linear = p.as_stock_bank();
    let mut table = Table::new(["t", "h_vasicek", "h_cir"]);
    for &t in run.need_t()? {
        table.push([t, optimal_two_asset_vasicek(&linear, gamma, t, r)?, optimal_two_asset_cir(&p, gamma, t, r)?]);
    }
    run.emit("compare_models", &[("compare_models".to_string(), table)], &[])
}

