//! Inverse problem: which μ make a given portfolio optimal, and which one to pick.

use std::sync::Arc;

use devport::envelope::build_mad;
use devport::geometry::SteinerConfig;
use devport::inverse::{inverse_solution_set, robust_mu, verify_dichotomy};
use devport::probspace::{FiniteProbSpace, MarketModel};

fn main() -> devport::Result<()> {
    let space = Arc::new(FiniteProbSpace::uniform(3)?);
    let market = MarketModel::from_centered(
        space.clone(),
        vec![vec![-1.0, -1.0, 2.0], vec![-2.0, 1.0, 1.0]],
        vec![0.0, 0.0],
        0.0,
    )?;
    let env = build_mad(space)?;
    let x_m = [0.5, 0.5];

    let (_, set) = inverse_solution_set(&market, &env, &x_m, 0.5)?;
    println!("solution set vertices: {:?}", set.vertices);
    let r = robust_mu(&market, &env, &x_m, 0.5, &SteinerConfig::default())?;
    println!("robust μ = {:?} via {:?}", r.mu, r.selection.method);

    let rep = verify_dichotomy(&market, &env, &x_m, 0.5)?;
    println!(
        "branch {:?}: {} vertices for n = {} (≥ n: {}, ≥ n+1: {})",
        rep.branch, rep.inverse_vertices, rep.assets, rep.meets_n, rep.meets_n_plus_one
    );
    Ok(())
}
