//! Two agents pool capital in two binary options and split the payoff fairly.

use std::sync::Arc;

use devport::allocation::solve_cooperative;
use devport::envelope::{build_cvar, build_mad, scale};
use devport::geometry::SteinerConfig;
use devport::probspace::FiniteProbSpace;

fn main() -> devport::Result<()> {
    let space = Arc::new(FiniteProbSpace::uniform(3)?);
    let agents = [
        build_cvar(space.clone(), 2.0 / 3.0)?,
        scale(&build_mad(space)?, 0.5)?,
    ];
    let returns = vec![vec![-1.0, 1.0, 1.0], vec![-1.0, -1.0, 7.0]];
    let s = solve_cooperative(&returns, &agents, None, &SteinerConfig::default())?;

    for (i, ind) in s.individual.iter().enumerate() {
        println!("agent {} alone: x = {:?}, utility {:.6}", i + 1, ind.x, ind.utility);
    }
    println!("coalition: x = {:?}, X* = {:?}, u* = {:.6}", s.joint.x, s.joint.payoff, s.joint.value);
    println!("synergy {:.6}", s.synergy);
    println!("critical scenario Q* = {:?}", s.side_payments.q_star);
    println!("side payments {:?}", s.side_payments.payments);
    for (i, y) in s.side_payments.final_shares.iter().enumerate() {
        println!("agent {} receives {:?}", i + 1, y);
    }
    Ok(())
}
