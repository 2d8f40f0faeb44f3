//! Equilibrium returns from a market portfolio, then reweighting by a view.

use std::sync::Arc;

use devport::blacklitterman::{bl_pipeline, Posterior, Views};
use devport::envelope::EnvelopeSpec;
use devport::geometry::SteinerConfig;
use devport::probspace::{FiniteProbSpace, MarketModel};
use devport::selector::SelectorKind;

fn main() -> devport::Result<()> {
    let market = MarketModel::from_centered(
        Arc::new(FiniteProbSpace::uniform(3)?),
        vec![vec![-1.0, 0.0, 1.0], vec![0.0, -1.0, 1.0]],
        vec![0.0, 0.0],
        0.0,
    )?;
    let spec = EnvelopeSpec::Cvar { alpha: 0.05 };
    let cfg = SteinerConfig::default();

    let inputs = [
        ("override (¼, ¼, ½)", Posterior::Override { posterior_weights: vec![0.25, 0.25, 0.5] }),
        (
            "view: asset 1 beats asset 2 by 0.1",
            Posterior::Views(Views {
                pick: vec![vec![1.0, -1.0]],
                values: vec![0.1],
                noise_cov: vec![vec![0.25]],
            }),
        ),
    ];
    for (label, post) in inputs {
        let r = bl_pipeline(&market, &spec, &[0.2, 0.8], 0.4, &post, SelectorKind::Robust, &cfg)?;
        println!("{label}");
        println!("  μ_eq = {:?}, posterior weights {:?}", r.equilibrium.mu, r.posterior_weights);
        println!("  μ_post = {:?}", r.mu_post);
        for line in &r.narrative {
            println!("  {line}");
        }
    }
    Ok(())
}
