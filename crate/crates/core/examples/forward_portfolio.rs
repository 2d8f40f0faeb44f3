//! Forward problem: minimize deviation subject to a target excess return.

use std::sync::Arc;

use devport::envelope::build_cvar;
use devport::forward::{diagnose_uniqueness, solve_forward};
use devport::probspace::{FiniteProbSpace, MarketModel};

fn main() -> devport::Result<()> {
    let space = Arc::new(FiniteProbSpace::uniform(3)?);
    let market = MarketModel::from_centered(
        space.clone(),
        vec![vec![-1.0, 0.0, 1.0], vec![0.0, -1.0, 1.0]],
        vec![1.0 / 3.0, 2.0 / 3.0],
        0.0,
    )?;
    let env = build_cvar(space, 0.05)?;

    let (gens, sol) = solve_forward(&market, &env, 0.5)?;
    println!("portfolio risk generators: {:?}", gens.generators);
    println!("x* = {:?}, CVaR = {}, unique = {}", sol.x, sol.value, sol.unique);
    println!("certificate: {:?}", sol.certificate);

    let report = diagnose_uniqueness(&sol, &gens, &market.mu)?;
    println!("active generators {:?} span rank {}", report.active, report.witness_rank);

    // a μ proportional to one generator leaves a whole segment optimal
    let flat = MarketModel {
        mu: vec![0.0, 0.5],
        ..market
    };
    let (_, sol) = solve_forward(&flat, &env, 0.4)?;
    println!("degenerate μ: optimal set {:?}", sol.optimal_set);
    Ok(())
}
