//! The forward problem `min D(R̂ᵀx)` subject to `μᵀx ≥ Δ`, solved as the LP
//! `min A` s.t. `Dᵢᵀx ≤ A`, `μᵀx ≥ Δ` over the portfolio risk generators Dᵢ.

use serde::Serialize;

use crate::envelope::RiskEnvelope;
use crate::error::{check_len, Error, Result};
use crate::geometry::{dedup, extreme_filter, VPolytope};
use crate::linalg::{self, dot};
use crate::lp::{self, LinearProgram};
use crate::probspace::MarketModel;

pub const ACTIVE_TOL: f64 = 1e-9;
pub const FACE_DEDUP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct PortfolioRiskGenerators {
    pub generators: Vec<Vec<f64>>,
    /// Envelope generator indices mapping onto each Dᵢ.
    pub sources: Vec<Vec<usize>>,
}

impl PortfolioRiskGenerators {
    pub fn assets(&self) -> usize {
        self.generators[0].len()
    }

    /// `max_i Dᵢᵀx`, which equals `D(R̂ᵀx)`.
    pub fn risk(&self, x: &[f64]) -> f64 {
        self.generators
            .iter()
            .map(|d| dot(d, x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn active(&self, x: &[f64], tol: f64) -> Vec<usize> {
        let best = self.risk(x);
        let cut = best - tol * best.abs().max(1e-300);
        (0..self.generators.len())
            .filter(|&i| dot(&self.generators[i], x) >= cut)
            .collect()
    }
}

/// `D̃ⱼ = E[−R̂Qⱼ]` for every envelope generator, deduplicated and filtered to extreme points.
pub fn portfolio_risk_generators(
    market: &MarketModel,
    envelope: &RiskEnvelope,
) -> Result<PortfolioRiskGenerators> {
    if market.space.as_ref() != envelope.space().as_ref() {
        return Err(Error::SpaceMismatch);
    }
    let w = market.space.weights();
    let raw: Vec<Vec<f64>> = envelope
        .generators()
        .iter()
        .map(|q| {
            market
                .centered
                .iter()
                .map(|row| -row.iter().zip(q).zip(w).map(|((r, qq), ww)| r * qq * ww).sum::<f64>())
                .collect()
        })
        .collect();
    let kept = extreme_filter(&dedup(&raw, 1e-10))?.into_vertices();
    let sources = kept
        .iter()
        .map(|d| {
            (0..raw.len())
                .filter(|&j| linalg::sup_dist(&raw[j], d) <= 1e-10)
                .collect()
        })
        .collect();
    let n = market.assets();
    let rank = linalg::rank(&kept, 1e-10);
    if rank < n {
        return Err(Error::SpanDeficient { rank, assets: n });
    }
    Ok(PortfolioRiskGenerators {
        generators: kept,
        sources,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ForwardSolution {
    pub value: f64,
    pub x: Vec<f64>,
    pub optimal_set: Vec<Vec<f64>>,
    pub unique: bool,
    pub active: Vec<usize>,
    /// Multipliers of the generator rows.
    pub p: Vec<f64>,
    /// Multiplier of the return constraint; `Δq = A*`.
    pub q: f64,
    pub delta: f64,
    pub binding_residual: f64,
    pub certificate: CertificateRecord,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CertificateRecord {
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub complementary_slackness: f64,
    pub duality_gap: f64,
    pub strong_duality_residual: f64,
}

impl ForwardSolution {
    pub fn optimal_polytope(&self) -> VPolytope {
        VPolytope::new(self.optimal_set.clone()).expect("non-empty")
    }
}

fn check_assumption_b(mu: &[f64], delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Assumption(format!("target Δ must be positive, got {delta}")));
    }
    if mu.iter().all(|m| *m == 0.0) {
        return Err(Error::Assumption("μ must be non-zero".into()));
    }
    Ok(())
}

pub fn forward_lp(gens: &PortfolioRiskGenerators, mu: &[f64], delta: f64) -> LinearProgram {
    let n = gens.assets();
    let mut c = vec![0.0; n + 1];
    c[0] = 1.0;
    let mut lp = LinearProgram::new(c);
    for d in &gens.generators {
        let mut row = vec![-1.0];
        row.extend_from_slice(d);
        lp.le(row, 0.0);
    }
    let mut row = vec![0.0];
    row.extend(mu.iter().map(|m| -m));
    lp.le(row, -delta);
    lp
}

/// Solve over precomputed generators with an arbitrary μ (used by the inverse re-solve checks).
pub fn solve_with_generators(
    gens: &PortfolioRiskGenerators,
    mu: &[f64],
    delta: f64,
) -> Result<ForwardSolution> {
    let n = gens.assets();
    check_len(n, mu.len())?;
    check_assumption_b(mu, delta)?;
    let lp = forward_lp(gens, mu, delta);
    let sol = lp::solve_optimal(&lp)?;
    let cert = sol.certify(&lp);
    let value = sol.value;
    let x = sol.x[1..].to_vec();
    let q = *sol.ineq_duals.last().expect("return row");
    let p = sol.ineq_duals[..gens.generators.len()].to_vec();
    let strong = (delta * q - value).abs();

    let coords: Vec<usize> = (1..=n).collect();
    let face = lp::optimal_face(&lp, &sol, &coords)?;
    let face = dedup(face.vertices(), FACE_DEDUP_TOL);

    if value <= 0.0 {
        return Err(Error::Certification(format!("optimal value {value} is not positive")));
    }
    let mut binding = (dot(mu, &x) - delta).abs();
    for v in &face {
        binding = binding.max((dot(mu, v) - delta).abs());
    }
    if binding > 1e-9 * (1.0 + delta) {
        return Err(Error::Certification(format!(
            "return constraint not binding (residual {binding})"
        )));
    }
    if strong > 1e-9 * (1.0 + value) {
        return Err(Error::Certification(format!("Δq − A* = {strong}")));
    }
    Ok(ForwardSolution {
        value,
        active: gens.active(&x, ACTIVE_TOL),
        unique: face.len() == 1,
        optimal_set: face,
        x,
        p,
        q,
        delta,
        binding_residual: binding,
        certificate: CertificateRecord {
            primal_infeasibility: cert.primal_infeasibility,
            dual_infeasibility: cert.dual_infeasibility,
            complementary_slackness: cert.complementary_slackness,
            duality_gap: cert.duality_gap,
            strong_duality_residual: strong,
        },
    })
}

pub fn solve_forward(
    market: &MarketModel,
    envelope: &RiskEnvelope,
    delta: f64,
) -> Result<(PortfolioRiskGenerators, ForwardSolution)> {
    check_assumption_b(&market.mu, delta)?;
    let gens = portfolio_risk_generators(market, envelope)?;
    let sol = solve_with_generators(&gens, &market.mu, delta)?;
    Ok((gens, sol))
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub unique: bool,
    /// Generators active at x*.
    pub active: Vec<usize>,
    /// Generators active over the whole optimal set.
    pub active_on_face: Vec<usize>,
    /// Unique case: n independent active generators. Otherwise: at most n−1 generators whose span holds μ.
    pub witnesses: Vec<usize>,
    pub witness_rank: usize,
    pub mu_residual: f64,
    pub activity_tolerance: f64,
}

pub fn diagnose_uniqueness(
    sol: &ForwardSolution,
    gens: &PortfolioRiskGenerators,
    mu: &[f64],
) -> Result<UniquenessReport> {
    let n = gens.assets();
    check_len(n, mu.len())?;
    let k = sol.optimal_set.len() as f64;
    let centroid: Vec<f64> = (0..n)
        .map(|j| sol.optimal_set.iter().map(|v| v[j]).sum::<f64>() / k)
        .collect();
    let on_face = gens.active(&centroid, ACTIVE_TOL);
    let pool = if sol.unique { &sol.active } else { &on_face };
    let rows: Vec<Vec<f64>> = pool.iter().map(|&i| gens.generators[i].clone()).collect();
    let picked: Vec<usize> = linalg::independent_subset(&rows, 1e-10)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    let cols: Vec<Vec<f64>> = picked.iter().map(|&i| gens.generators[i].clone()).collect();
    let (_, resid) = linalg::least_squares(&cols, mu);
    Ok(UniquenessReport {
        unique: sol.unique,
        active: sol.active.clone(),
        active_on_face: on_face,
        witness_rank: picked.len(),
        witnesses: picked,
        mu_residual: resid,
        activity_tolerance: ACTIVE_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::{build_cvar, build_mad};
    use crate::geometry::same_vertex_set;
    use crate::probspace::{FiniteProbSpace, MarketModel};
    use std::sync::Arc;

    fn market(scen: &[[f64; 2]], mu: [f64; 2]) -> MarketModel {
        let s = Arc::new(FiniteProbSpace::uniform(scen.len()).unwrap());
        let rows = (0..2).map(|i| scen.iter().map(|r| r[i]).collect()).collect();
        MarketModel::from_centered(s, rows, mu.to_vec(), 0.0).unwrap()
    }

    fn bl_market(mu: [f64; 2]) -> MarketModel {
        market(&[[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]], mu)
    }

    #[test]
    fn bl_generators() {
        let m = bl_market([0.0, 0.5]);
        let env = build_cvar(m.space.clone(), 0.05).unwrap();
        let g = portfolio_risk_generators(&m, &env).unwrap();
        assert!(same_vertex_set(
            &g.generators,
            &[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]],
            1e-12
        ));
    }

    #[test]
    fn cvar_unique_forward() {
        let m = bl_market([1.0 / 3.0, 2.0 / 3.0]);
        let env = build_cvar(m.space.clone(), 0.05).unwrap();
        let (g, s) = solve_forward(&m, &env, 0.5).unwrap();
        assert!(s.unique);
        assert!((s.x[0] - 0.5).abs() < 1e-9 && (s.x[1] - 0.5).abs() < 1e-9);
        let rep = diagnose_uniqueness(&s, &g, &m.mu).unwrap();
        assert_eq!(rep.witness_rank, 2);
    }

    #[test]
    fn degenerate_forward() {
        let m = bl_market([0.0, 0.5]);
        let env = build_cvar(m.space.clone(), 0.05).unwrap();
        let (g, s) = solve_forward(&m, &env, 0.4).unwrap();
        assert!(!s.unique);
        assert!((s.value - 0.8).abs() < 1e-12);
        assert!(same_vertex_set(&s.optimal_set, &[vec![-1.6, 0.8], vec![0.8, 0.8]], 1e-9));
        let rep = diagnose_uniqueness(&s, &g, &m.mu).unwrap();
        assert_eq!(rep.witness_rank, 1);
        assert!(rep.mu_residual < 1e-8);
    }

    #[test]
    fn mad_forward() {
        let m = market(&[[-1.0, -2.0], [-1.0, 1.0], [2.0, 1.0]], [0.4, 0.6]);
        let env = build_mad(m.space.clone()).unwrap();
        let (g, s) = solve_forward(&m, &env, 0.5).unwrap();
        assert!(g.generators.len() <= 6);
        assert!(s.unique);
        assert!((s.x[0] - 0.5).abs() < 1e-9 && (s.x[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn assumption_b() {
        let m = bl_market([0.0, 0.0]);
        let env = build_cvar(m.space.clone(), 0.05).unwrap();
        assert!(matches!(solve_forward(&m, &env, 0.4), Err(Error::Assumption(_))));
        let m = bl_market([0.0, 0.5]);
        assert!(matches!(solve_forward(&m, &env, 0.0), Err(Error::Assumption(_))));
    }
}
