//! Command-line front end. Every subcommand reads a JSON config and prints JSON on stdout.

pub mod config;
pub mod output;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::Arc;

use crate::allocation::{capital_allocation, deviation_function, solve_cooperative};
use crate::blacklitterman::{bl_pipeline, Posterior, Views};
use crate::envelope::build;
use crate::error::{Error, Result};
use crate::forward::{diagnose_uniqueness, solve_forward};
use crate::geometry::{steiner_point, SteinerConfig, VPolytope};
use crate::golden;
use crate::inverse::{selected_mu, verify_dichotomy};
use crate::probspace::RandomVariable;
use crate::selector::select;

pub use config::RunConfig;
use output::to_value;

#[derive(Debug, Parser)]
#[command(name = "devport", version, about = "Mean-deviation portfolio optimization on finite scenario spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimize deviation subject to a target excess return.
    Forward(ConfigArg),
    /// Recover the set of mean returns making x_M optimal.
    Inverse(ConfigArg),
    /// Select one risk identifier for a scenario vector.
    Selector(ConfigArg),
    /// Steiner point of a polytope given by its vertices.
    Steiner(SteinerArgs),
    /// Capital allocation by the extended gradient.
    Alloc(ConfigArg),
    /// Cooperative investment with fair side payments.
    Coop(ConfigArg),
    /// Black-Litterman pipeline over scenario reweighting.
    Bl(ConfigArg),
    /// Run every built-in reference case and print a pass/fail table.
    #[command(visible_alias = "paper-examples")]
    GoldenCases,
}

#[derive(Debug, clap::Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Debug, clap::Args)]
struct SteinerArgs {
    /// Vertices as a JSON array of points.
    #[arg(long, conflicts_with = "config")]
    vertices: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Forward(_) => "forward",
            Command::Inverse(_) => "inverse",
            Command::Selector(_) => "selector",
            Command::Steiner(_) => "steiner",
            Command::Alloc(_) => "alloc",
            Command::Coop(_) => "coop",
            Command::Bl(_) => "bl",
            Command::GoldenCases => "golden-cases",
        }
    }
}

fn delta(cfg: &RunConfig) -> Result<f64> {
    Ok(*RunConfig::require(&cfg.delta, "delta")?)
}

fn forward(cfg: &RunConfig) -> Result<Value> {
    let market = cfg.market()?;
    let env = cfg.envelope(market.space.clone())?;
    let (gens, sol) = solve_forward(&market, &env, delta(cfg)?)?;
    let report = diagnose_uniqueness(&sol, &gens, &market.mu)?;
    Ok(json!({
        "x": sol.x,
        "value": sol.value,
        "unique": sol.unique,
        "optimal_set": sol.optimal_set,
        "active": sol.active,
        "generators": gens.generators,
        "p": sol.p,
        "q": sol.q,
        "certificate": to_value(&sol.certificate),
        "uniqueness": to_value(&report),
    }))
}

fn inverse(cfg: &RunConfig) -> Result<Value> {
    let market = cfg.market()?;
    let env = cfg.envelope(market.space.clone())?;
    let x_m = RunConfig::require(&cfg.x_m, "x_m")?;
    let d = delta(cfg)?;
    let (set, sel) = selected_mu(&market, &env, x_m, d, cfg.selector, &cfg.steiner())?;
    let dichotomy = verify_dichotomy(&market, &env, x_m, d)?;
    Ok(json!({
        "vertices": set.vertices,
        "delta_scale": set.delta_scale,
        "active": set.active,
        "risk": set.risk,
        "singleton": set.is_singleton(),
        "selected_mu": sel.mu,
        "selection": to_value(&sel.selection),
        "in_solution_set": sel.in_solution_set,
        "dichotomy": to_value(&dichotomy),
    }))
}

fn selector(cfg: &RunConfig) -> Result<Value> {
    let (space, x) = match &cfg.x {
        Some(x) => (cfg.space(Some(x.len()))?, x.clone()),
        None => {
            let market = cfg.market()?;
            let x_m = RunConfig::require(&cfg.x_m, "x or x_m")?;
            (market.space.clone(), market.portfolio(x_m)?)
        }
    };
    let env = cfg.envelope(space)?;
    let ids = env.risk_identifiers(&x, crate::envelope::IDENTIFIER_TOL)?;
    let sel = select(cfg.selector, &env, &x, &cfg.steiner())?;
    Ok(json!({
        "x": x,
        "deviation": ids.value,
        "identifiers": ids.polytope.vertices(),
        "selector": to_value(&cfg.selector),
        "q": sel.q,
        "method": to_value(&sel.method),
        "error": sel.error,
        "diagnostics": sel.diagnostics,
    }))
}

fn steiner(args: &SteinerArgs) -> Result<Value> {
    let (points, mut sc) = match (&args.vertices, &args.config) {
        (Some(v), _) => {
            let pts: Vec<Vec<f64>> = serde_json::from_str(v).map_err(|e| Error::Parse {
                row: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
            (pts, SteinerConfig::default())
        }
        (None, Some(path)) => {
            let cfg = RunConfig::load(path)?;
            (RunConfig::require(&cfg.vertices, "vertices")?.clone(), cfg.steiner())
        }
        (None, None) => {
            return Err(Error::InvalidParameter("give --vertices or --config".into()))
        }
    };
    if let Some(s) = args.samples {
        sc.samples = s;
    }
    if let Some(s) = args.seed {
        sc.seed = s;
    }
    let poly = VPolytope::new(points)?;
    let s = steiner_point(&poly, &sc);
    Ok(json!({
        "point": s.point,
        "error": s.error,
        "method": to_value(&s.method),
        "vertices": poly.vertices(),
        "affine_dim": poly.affine_dim(),
        "samples": sc.samples,
        "seed": sc.seed,
    }))
}

fn alloc(cfg: &RunConfig) -> Result<Value> {
    let parts = RunConfig::require(&cfg.subportfolios, "subportfolios")?;
    let space = cfg.space(parts.first().map(Vec::len))?;
    let env = cfg.envelope(space.clone())?;
    let rho = deviation_function(&env)?;
    let rvs = parts
        .iter()
        .map(|p| RandomVariable::new(space.clone(), p.clone()))
        .collect::<Result<Vec<_>>>()?;
    let r = capital_allocation(&rho, &rvs, &cfg.steiner())?;
    let standalone = parts.iter().map(|p| rho.eval(p)).collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "contributions": r.contributions,
        "errors": r.errors,
        "total_risk": r.total_risk,
        "sum": r.sum(),
        "standalone_risk": standalone,
        "gradient": to_value(&r.gradient),
        "portfolio": r.portfolio,
    }))
}

fn coop(cfg: &RunConfig) -> Result<Value> {
    let returns = cfg
        .raw_returns()?
        .ok_or_else(|| Error::InvalidParameter("coop needs raw \"returns\" or \"returns_csv\"".into()))?;
    let space = cfg.space(returns.first().map(Vec::len))?;
    let agents = RunConfig::require(&cfg.agents, "agents")?;
    let envs = agents
        .iter()
        .map(|a| build(Arc::clone(&space), a))
        .collect::<Result<Vec<_>>>()?;
    let s = solve_cooperative(&returns, &envs, cfg.capital, &cfg.steiner())?;
    Ok(to_value(&s))
}

fn bl(cfg: &RunConfig) -> Result<Value> {
    let market = cfg.market()?;
    let x_m = RunConfig::require(&cfg.x_m, "x_m")?;
    let posterior = cfg.views.clone().unwrap_or(Posterior::Views(Views::none()));
    let r = bl_pipeline(
        &market,
        cfg.measure()?,
        x_m,
        delta(cfg)?,
        &posterior,
        cfg.selector,
        &cfg.steiner(),
    )?;
    Ok(to_value(&r))
}

fn golden_cases() -> (Value, bool) {
    let cases = golden::run_all();
    let ok = cases.iter().all(golden::GoldenCase::passed);
    for case in &cases {
        eprintln!("{:<32} {}", case.name, if case.passed() { "PASS" } else { "FAIL" });
        for c in case.checks.iter().filter(|c| !c.passed) {
            eprintln!("    {}: expected {} got {}", c.name, c.expected, c.actual);
        }
        if let Some(e) = &case.error {
            eprintln!("    error: {e}");
        }
    }
    let table: Vec<Value> = cases
        .iter()
        .map(|c| json!({"case": c.name, "passed": c.passed(), "checks": to_value(&c.checks), "error": c.error}))
        .collect();
    (json!({"all_passed": ok, "cases": table}), ok)
}

fn dispatch(cmd: &Command) -> Result<Value> {
    let load = |a: &ConfigArg| RunConfig::load(&a.config);
    match cmd {
        Command::Forward(a) => forward(&load(a)?),
        Command::Inverse(a) => inverse(&load(a)?),
        Command::Selector(a) => selector(&load(a)?),
        Command::Steiner(a) => steiner(a),
        Command::Alloc(a) => alloc(&load(a)?),
        Command::Coop(a) => coop(&load(a)?),
        Command::Bl(a) => bl(&load(a)?),
        Command::GoldenCases => unreachable!("handled by run"),
    }
}

fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

/// Parses `argv`, runs the subcommand, prints JSON on stdout and returns the exit code:
/// 0 on success, 1 for invalid input, 2 for numerical failures.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let name = cli.command.name();
    if let Command::GoldenCases = cli.command {
        let (value, ok) = golden_cases();
        emit(&output::success(name, value));
        return if ok { 0 } else { 2 };
    }
    match dispatch(&cli.command) {
        Ok(v) => {
            emit(&output::success(name, v));
            0
        }
        Err(e) => {
            eprintln!("devport {name}: {e}");
            emit(&output::failure(name, &e));
            output::exit_code(&e)
        }
    }
}
