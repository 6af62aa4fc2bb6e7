//! Subcommand surface and dispatch.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use tiercache_core::baselines::{even_cache, non_joint, popular_cache};
use tiercache_core::dc_solver::dc_optimize;
use tiercache_core::extreme_solvers::{usertier_solve, waterfill};
use tiercache_core::model::total_offload;
use tiercache_core::simulator::simulate_offloading;
use tiercache_core::{Placement, Popularity, ScenarioConfig};

use crate::config::{parse_cache_mode, parse_grid, AppConfig};
use crate::output::{
    push_placement_rows, push_simulate_rows, push_sweep_row, CsvFile, PLACEMENT_HEADER,
    SIMULATE_HEADER, SWEEP_HEADER,
};

#[derive(Parser, Debug)]
#[command(
    name = "tiercache",
    version,
    about = "Caching placement optimization and Monte Carlo validation for two-tier D2D-assisted wireless caching networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Jointly optimize both caching tiers
    Optimize(CommonArgs),
    /// Helper-tier water-filling placement (user tier left empty)
    Waterfill(CommonArgs),
    /// User-tier placement by dual bisection (helper tier left empty)
    Usertier(CommonArgs),
    /// Evaluate comparison placements (popular, even, nonjoint)
    Baseline(BaselineArgs),
    /// Monte Carlo estimate of the offloading probability for one scheme
    Simulate(SimulateArgs),
    /// Sweep one parameter over a grid, evaluating a set of schemes
    Sweep(SweepArgs),
}

/// Flags shared by every subcommand. Any config-file key can be overridden
/// by the flag of the same name; the flag wins. Numeric flags accept the
/// same arithmetic expressions as the file (e.g. `--lambda-h '20/(pi*500^2)'`).
#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Flat key = value config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path
    #[arg(long, default_value = "out.csv")]
    pub out: PathBuf,
    /// RNG seed for simulation (overrides rng_seed)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo trial count (overrides n_trials)
    #[arg(long)]
    pub trials: Option<u64>,
    /// Cache realization: independent | capacity-exact
    #[arg(long, alias = "cache_mode")]
    pub cache_mode: Option<String>,

    #[arg(long, alias = "n_contents", help_heading = "Scenario overrides")]
    pub n_contents: Option<String>,
    #[arg(long, help_heading = "Scenario overrides")]
    pub gamma: Option<String>,
    #[arg(long, alias = "lambda_ue", help_heading = "Scenario overrides")]
    pub lambda_ue: Option<String>,
    #[arg(long, alias = "lambda_h", help_heading = "Scenario overrides")]
    pub lambda_h: Option<String>,
    #[arg(long, alias = "r_ue", help_heading = "Scenario overrides")]
    pub r_ue: Option<String>,
    #[arg(long, alias = "r_h", help_heading = "Scenario overrides")]
    pub r_h: Option<String>,
    #[arg(long, help_heading = "Scenario overrides")]
    pub alpha: Option<String>,
    #[arg(long, alias = "m_ue", help_heading = "Scenario overrides")]
    pub m_ue: Option<String>,
    #[arg(long, alias = "m_h", help_heading = "Scenario overrides")]
    pub m_h: Option<String>,

    #[arg(long, help_heading = "Solver overrides")]
    pub epsilon: Option<String>,
    #[arg(long, alias = "max_outer_iters", help_heading = "Solver overrides")]
    pub max_outer_iters: Option<String>,
    #[arg(long, alias = "inner_tol", help_heading = "Solver overrides")]
    pub inner_tol: Option<String>,
    #[arg(long, alias = "inner_max_iters", help_heading = "Solver overrides")]
    pub inner_max_iters: Option<String>,
    #[arg(long, alias = "convexifier_scale", help_heading = "Solver overrides")]
    pub convexifier_scale: Option<String>,
    #[arg(long, alias = "region_radius", help_heading = "Simulation overrides")]
    pub region_radius: Option<String>,
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Schemes to evaluate
    #[arg(long, value_delimiter = ',', default_value = "popular,even,nonjoint")]
    pub schemes: Vec<String>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Scheme whose placement is simulated
    #[arg(long, value_delimiter = ',', default_value = "dc")]
    pub schemes: Vec<String>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Swept parameter: lambda_h | lambda_ue | alpha | gamma | n_contents
    #[arg(long)]
    pub param: String,
    /// Grid: `start:step:count` or a comma list (strictly increasing)
    #[arg(long)]
    pub grid: String,
    /// Schemes to evaluate at each grid point
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "dc,popular,even,nonjoint"
    )]
    pub schemes: Vec<String>,
    /// Also run the Monte Carlo simulator at every point
    #[arg(long)]
    pub validate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scheme {
    Dc,
    Popular,
    Even,
    NonJoint,
}

impl Scheme {
    pub const CANONICAL: [Scheme; 4] =
        [Scheme::Dc, Scheme::Popular, Scheme::Even, Scheme::NonJoint];

    pub fn parse(name: &str) -> Result<Scheme> {
        match name.trim() {
            "dc" => Ok(Scheme::Dc),
            "popular" => Ok(Scheme::Popular),
            "even" => Ok(Scheme::Even),
            "nonjoint" => Ok(Scheme::NonJoint),
            other => bail!("unknown scheme `{other}` (expected dc, popular, even, nonjoint)"),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Scheme::Dc => "dc",
            Scheme::Popular => "popular",
            Scheme::Even => "even",
            Scheme::NonJoint => "nonjoint",
        }
    }
}

fn parse_schemes(names: &[String]) -> Result<Vec<Scheme>> {
    let mut requested = Vec::new();
    for name in names {
        requested.push(Scheme::parse(name)?);
    }
    // Canonical order, deduplicated, so row order never depends on the flag.
    Ok(Scheme::CANONICAL
        .into_iter()
        .filter(|s| requested.contains(s))
        .collect())
}

/// Iteration count and convergence flag of a dc run.
#[derive(Debug, Clone, Copy)]
pub struct DcMeta {
    pub iterations: usize,
    pub converged: bool,
}

fn resolve(common: &CommonArgs) -> Result<AppConfig> {
    let mut app = AppConfig::default();
    if let Some(path) = &common.config {
        app.apply_file(path)?;
    }
    let overrides: [(&str, &Option<String>); 15] = [
        ("n_contents", &common.n_contents),
        ("gamma", &common.gamma),
        ("lambda_ue", &common.lambda_ue),
        ("lambda_h", &common.lambda_h),
        ("r_ue", &common.r_ue),
        ("r_h", &common.r_h),
        ("alpha", &common.alpha),
        ("m_ue", &common.m_ue),
        ("m_h", &common.m_h),
        ("epsilon", &common.epsilon),
        ("max_outer_iters", &common.max_outer_iters),
        ("inner_tol", &common.inner_tol),
        ("inner_max_iters", &common.inner_max_iters),
        ("convexifier_scale", &common.convexifier_scale),
        ("region_radius", &common.region_radius),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            app.set(key, v).with_context(|| format!("flag --{key}"))?;
        }
    }
    if let Some(seed) = common.seed {
        app.sim.rng_seed = seed;
    }
    if let Some(trials) = common.trials {
        app.sim.n_trials = trials;
    }
    if let Some(mode) = &common.cache_mode {
        app.sim.cache_mode = parse_cache_mode(mode)?;
    }
    app.scenario
        .validate()
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    for warning in app.scenario.warnings() {
        eprintln!("warning: {warning}");
    }
    Ok(app)
}

fn zipf_for(scenario: &ScenarioConfig) -> Result<Popularity> {
    Ok(Popularity::zipf(scenario.n_contents, scenario.gamma)?)
}

fn solve_scheme(
    app: &AppConfig,
    q: &Popularity,
    scheme: Scheme,
) -> Result<(Placement, Option<DcMeta>)> {
    match scheme {
        Scheme::Dc => {
            let (pl, trace) = dc_optimize(&app.scenario, q, &app.dc, None)?;
            let meta = DcMeta {
                iterations: trace.outer_iterations(),
                converged: trace.converged,
            };
            Ok((pl, Some(meta)))
        }
        Scheme::Popular => Ok((popular_cache(&app.scenario)?, None)),
        Scheme::Even => Ok((even_cache(&app.scenario)?, None)),
        Scheme::NonJoint => Ok((non_joint(&app.scenario, q)?.placement, None)),
    }
}

fn print_placement(label: &str, total: f64, pl: &Placement) {
    println!("{label}: total offloading probability {total:.6}");
    let fmt = |v: &[f64]| -> String {
        let inner: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
        format!("[{}]", inner.join(", "))
    };
    println!("p_ue = {}", fmt(pl.p_ue()));
    println!("p_h  = {}", fmt(pl.p_h()));
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Optimize(args) => cmd_optimize(args),
        Command::Waterfill(args) => cmd_waterfill(args),
        Command::Usertier(args) => cmd_usertier(args),
        Command::Baseline(args) => cmd_baseline(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn cmd_optimize(args: CommonArgs) -> Result<()> {
    let app = resolve(&args)?;
    let q = zipf_for(&app.scenario)?;
    let (pl, trace) = dc_optimize(&app.scenario, &q, &app.dc, None)?;
    let report = total_offload(&app.scenario, &q, &pl)?;
    print_placement("dc", report.total, &pl);
    println!(
        "outer iterations {}, converged {}",
        trace.outer_iterations(),
        trace.converged
    );
    let mut csv = CsvFile::new(PLACEMENT_HEADER);
    push_placement_rows(&mut csv, "dc", &q, &pl, &report);
    csv.write(&args.out)?;
    if !trace.converged {
        bail!(
            "solver did not converge within {} outer iterations (results written to {})",
            app.dc.max_outer_iters,
            args.out.display()
        );
    }
    Ok(())
}

fn cmd_waterfill(args: CommonArgs) -> Result<()> {
    let app = resolve(&args)?;
    let q = zipf_for(&app.scenario)?;
    let sol = waterfill(&app.scenario, &q)?;
    let pl = Placement::new(vec![0.0; app.scenario.n_contents], sol.p_h, &app.scenario)?;
    let report = total_offload(&app.scenario, &q, &pl)?;
    print_placement("waterfill", report.total, &pl);
    println!("water level {:.6}", sol.beta);
    let mut csv = CsvFile::new(PLACEMENT_HEADER);
    push_placement_rows(&mut csv, "waterfill", &q, &pl, &report);
    csv.write(&args.out)?;
    Ok(())
}

fn cmd_usertier(args: CommonArgs) -> Result<()> {
    let app = resolve(&args)?;
    let q = zipf_for(&app.scenario)?;
    let sol = usertier_solve(&app.scenario, &q)?;
    if sol.degenerate {
        eprintln!("warning: user tier is degenerate here (no cache-enabled user can serve anyone); returning the even placement");
    }
    let report = total_offload(&app.scenario, &q, &sol.placement)?;
    print_placement("usertier", report.total, &sol.placement);
    let mut csv = CsvFile::new(PLACEMENT_HEADER);
    push_placement_rows(&mut csv, "usertier", &q, &sol.placement, &report);
    csv.write(&args.out)?;
    Ok(())
}

fn cmd_baseline(args: BaselineArgs) -> Result<()> {
    let app = resolve(&args.common)?;
    let q = zipf_for(&app.scenario)?;
    let schemes = parse_schemes(&args.schemes)?;
    let mut csv = CsvFile::new(PLACEMENT_HEADER);
    for scheme in schemes {
        let (pl, _) = solve_scheme(&app, &q, scheme)?;
        let report = total_offload(&app.scenario, &q, &pl)?;
        print_placement(scheme.label(), report.total, &pl);
        push_placement_rows(&mut csv, scheme.label(), &q, &pl, &report);
    }
    csv.write(&args.common.out)?;
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let app = resolve(&args.common)?;
    let q = zipf_for(&app.scenario)?;
    let schemes = parse_schemes(&args.schemes)?;
    if schemes.len() != 1 {
        bail!("simulate takes exactly one scheme, got {}", schemes.len());
    }
    let scheme = schemes[0];
    let (pl, meta) = solve_scheme(&app, &q, scheme)?;
    let analytic = total_offload(&app.scenario, &q, &pl)?;
    let empirical = simulate_offloading(&app.scenario, &q, &pl, &app.sim)?;
    print_placement(scheme.label(), analytic.total, &pl);
    println!(
        "empirical total {:.6} +- {:.6} over {} trials (seed {})",
        empirical.total,
        empirical.ci_halfwidth.unwrap_or(0.0),
        app.sim.n_trials,
        app.sim.rng_seed
    );
    let mut csv = CsvFile::new(SIMULATE_HEADER);
    push_simulate_rows(&mut csv, scheme.label(), &q, &pl, &analytic, &empirical);
    csv.write(&args.common.out)?;
    if let Some(meta) = meta {
        if !meta.converged {
            bail!(
                "solver did not converge within {} outer iterations (results written to {})",
                app.dc.max_outer_iters,
                args.common.out.display()
            );
        }
    }
    Ok(())
}

fn apply_sweep_value(scenario: &ScenarioConfig, param: &str, value: f64) -> Result<ScenarioConfig> {
    let mut cfg = scenario.clone();
    match param {
        "lambda_h" => cfg.lambda_h = value,
        "lambda_ue" => cfg.lambda_ue = value,
        "alpha" => cfg.alpha = value,
        "gamma" => cfg.gamma = value,
        "n_contents" => {
            if value < 1.0 || value.fract().abs() > 1e-9 {
                bail!("n_contents grid values must be positive integers, got {value}");
            }
            cfg.n_contents = value.round() as usize;
        }
        other => bail!("unknown sweep parameter `{other}` (expected lambda_h, lambda_ue, alpha, gamma, n_contents)"),
    }
    cfg.validate()
        .map_err(|e| anyhow::anyhow!("grid value {value}: {e}"))?;
    Ok(cfg)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let app = resolve(&args.common)?;
    let grid = parse_grid(&args.grid)?;
    let schemes = parse_schemes(&args.schemes)?;
    if schemes.is_empty() {
        bail!("no schemes requested");
    }
    // Validate the whole grid up front; a bad grid is a usage error, not a
    // failed point.
    for &value in &grid {
        apply_sweep_value(&app.scenario, &args.param, value)?;
    }

    let mut csv = CsvFile::new(SWEEP_HEADER);
    for &value in &grid {
        let cfg = apply_sweep_value(&app.scenario, &args.param, value)?;
        let point = AppConfig {
            scenario: cfg,
            dc: app.dc.clone(),
            sim: app.sim.clone(),
        };
        let q = zipf_for(&point.scenario)?;
        for &scheme in &schemes {
            match solve_scheme(&point, &q, scheme) {
                Ok((pl, meta)) => {
                    let analytic = total_offload(&point.scenario, &q, &pl)?;
                    let (empirical, half) = if args.validate {
                        let rep = simulate_offloading(&point.scenario, &q, &pl, &point.sim)?;
                        (Some(rep.total), rep.ci_halfwidth)
                    } else {
                        (None, None)
                    };
                    push_sweep_row(
                        &mut csv,
                        &args.param,
                        value,
                        scheme.label(),
                        Some(analytic.total),
                        empirical,
                        half,
                        meta.map(|m| m.iterations),
                        meta.map(|m| m.converged),
                    );
                }
                Err(err) => {
                    eprintln!(
                        "warning: {} at {} = {value}: {err}; row marked converged=false",
                        scheme.label(),
                        args.param
                    );
                    push_sweep_row(
                        &mut csv,
                        &args.param,
                        value,
                        scheme.label(),
                        None,
                        None,
                        None,
                        None,
                        Some(false),
                    );
                }
            }
        }
    }
    csv.write(&args.common.out)?;
    println!(
        "wrote {} rows to {}",
        csv.row_count(),
        args.common.out.display()
    );
    Ok(())
}
