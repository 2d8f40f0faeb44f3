//! Loading scenarios from CSV and solving under a mixed CVaR.

use devport::envelope::{build_mixed_cvar, CvarTerm};
use devport::forward::solve_forward;
use devport::probspace::{center_market, ingest_csv};

fn main() -> devport::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/scenarios.csv").into());
    let data = ingest_csv(&path)?;
    let market = center_market(&data.returns, data.space.clone(), 0.0)?;
    println!("assets {:?}, μ = {:?}", data.header, market.mu);

    let env = build_mixed_cvar(
        data.space,
        &[CvarTerm { alpha: 0.2, lambda: 0.5 }, CvarTerm { alpha: 0.5, lambda: 0.5 }],
    )?;
    let (_, sol) = solve_forward(&market, &env, 0.01)?;
    println!("x* = {:?}, risk {:.6}, unique {}", sol.x, sol.value, sol.unique);
    Ok(())
}
