#![allow(dead_code)]

use std::io::Write;
use std::sync::Arc;

use devport::envelope::{build_cvar, build_mad, RiskEnvelope};
use devport::forward::{portfolio_risk_generators, PortfolioRiskGenerators};
use devport::probspace::{FiniteProbSpace, MarketModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(n: usize) -> Arc<FiniteProbSpace> {
    Arc::new(FiniteProbSpace::uniform(n).unwrap())
}

/// Weights bounded away from zero, normalized.
pub fn random_space(rng: &mut ChaCha8Rng, n: usize) -> Arc<FiniteProbSpace> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let s: f64 = raw.iter().sum();
    Arc::new(FiniteProbSpace::new(raw.iter().map(|v| v / s).collect()).unwrap())
}

pub fn centered_rows(rng: &mut ChaCha8Rng, space: &FiniteProbSpace, assets: usize) -> Vec<Vec<f64>> {
    (0..assets)
        .map(|_| {
            let row: Vec<f64> = (0..space.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let m = space.mean(&row).unwrap();
            row.iter().map(|v| v - m).collect()
        })
        .collect()
}

/// Writes straight to the process stderr so the line survives libtest output capture.
pub fn report(criterion: u32, passed: bool, detail: &str) {
    let verdict = if passed { "PASS" } else { "FAIL" };
    let line = format!("\ncriterion {criterion:>2}: {verdict}  {detail}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    Mad,
    Cvar,
}

pub struct Instance {
    pub seed: u64,
    pub market: MarketModel,
    pub envelope: RiskEnvelope,
    pub gens: PortfolioRiskGenerators,
    pub measure: Measure,
}

/// Seeded random market with n ∈ {2,3} assets, N ∈ {3,…,6} scenarios and a MAD or CVaR envelope.
pub fn instance(seed: u64) -> Instance {
    let n = 2 + (seed % 2) as usize;
    let scen = (3 + (seed / 2) % 4) as usize;
    let measure = if (seed / 8) % 2 == 0 { Measure::Mad } else { Measure::Cvar };
    let mut r = rng(1000 + seed);
    loop {
        let space = uniform(scen.max(n + 1));
        let rows = centered_rows(&mut r, &space, n);
        let mu: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let Ok(market) = MarketModel::from_centered(space.clone(), rows, mu, 0.0) else {
            continue;
        };
        let envelope = match measure {
            Measure::Mad => build_mad(space).unwrap(),
            Measure::Cvar => build_cvar(space, r.random_range(0.15..0.85)).unwrap(),
        };
        if let Ok(gens) = portfolio_risk_generators(&market, &envelope) {
            return Instance {
                seed,
                market,
                envelope,
                gens,
                measure,
            };
        }
    }
}
