//! Building risk envelopes and combining them.

use std::sync::Arc;

use devport::envelope::{build, build_cvar, build_mad, intersect_all, mix, scale, EnvelopeSpec};
use devport::probspace::FiniteProbSpace;

fn main() -> devport::Result<()> {
    let space = Arc::new(FiniteProbSpace::uniform(4)?);
    let x = [-1.0, 0.5, 0.0, 2.0];

    let mad = build_mad(space.clone())?;
    let cvar = build_cvar(space.clone(), 0.5)?;
    println!("MAD has {} extreme generators, MAD(X) = {:.6}", mad.len(), mad.evaluate(&x)?);
    println!("CVaR(0.5) has {} extreme generators, value {:.6}", cvar.len(), cvar.evaluate(&x)?);

    let half = scale(&mad, 0.5)?;
    let blend = mix(&[mad.clone(), cvar.clone()], &[0.5, 0.5])?;
    let common = intersect_all(&[half.clone(), cvar.clone()])?;
    println!("½·MAD(X) = {:.6}", half.evaluate(&x)?);
    println!("½MAD + ½CVaR = {:.6}", blend.evaluate(&x)?);
    println!("infimal convolution via 𝒬₁ ∩ 𝒬₂ = {:.6}", common.evaluate(&x)?);

    let spec: EnvelopeSpec =
        serde_json::from_str(r#"{"kind":"max","parts":[{"kind":"mad"},{"kind":"cvar","alpha":0.25}]}"#)
            .expect("valid spec");
    let worst = build(space, &spec)?;
    println!("max(MAD, CVaR(0.25)) = {:.6}", worst.evaluate(&x)?);

    let ids = cvar.risk_identifiers(&x, 1e-9)?;
    println!("CVaR identifiers at X: {:?}", ids.polytope.vertices());
    Ok(())
}
