//! Robust and law-invariant selection of a risk identifier, and the concave order.

use std::sync::Arc;

use devport::envelope::{build_cvar, build_mad};
use devport::geometry::SteinerConfig;
use devport::order::concave_order_leq;
use devport::probspace::FiniteProbSpace;
use devport::selector::{law_invariant_selector, robust_selector, steiner_selector};

fn main() -> devport::Result<()> {
    let space = Arc::new(FiniteProbSpace::uniform(4)?);
    let x = [-1.0, 0.0, 0.0, 1.0];
    let cfg = SteinerConfig::default();

    let mad = build_mad(space.clone())?;
    let cvar = build_cvar(space.clone(), 0.5)?;
    for (name, env) in [("MAD", &mad), ("CVaR(0.5)", &cvar)] {
        let ids = env.risk_identifiers(&x, 1e-9)?;
        let robust = robust_selector(env, &x, &cfg)?;
        let generic = steiner_selector(env, &x, &cfg)?;
        let law = law_invariant_selector(env, &x)?;
        println!("{name}: {} identifiers", ids.polytope.len());
        println!("  robust        {:?} ({:?})", robust.q, robust.method);
        println!("  Steiner       {:?} ({:?})", generic.q, generic.method);
        println!("  law-invariant {:?}", law.q);
    }

    let y = [-2.0, 0.0, 0.0, 2.0];
    println!("X ⪰_c Y: {}", concave_order_leq(&x, &y, &space)?);
    Ok(())
}
