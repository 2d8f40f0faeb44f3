//! The inverse problem: every μ for which a given portfolio x_M is optimal.
//!
//! ℳ = conv{δDᵢ : Dᵢ active at x_M} with δ = Δ_M / D(R̂ᵀx_M).

use serde::Serialize;

use crate::envelope::RiskEnvelope;
use crate::error::{check_len, Error, Result};
use crate::forward::{
    portfolio_risk_generators, solve_with_generators, PortfolioRiskGenerators, ACTIVE_TOL,
};
use crate::geometry::{extreme_filter, hull_contains, SteinerConfig, VPolytope};
use crate::linalg::{self, dot};
use crate::probspace::MarketModel;
use crate::selector::{select, Selection, SelectorKind};

#[derive(Debug, Clone, Serialize)]
pub struct InverseSolutionSet {
    pub vertices: Vec<Vec<f64>>,
    pub delta_scale: f64,
    /// Indices of active portfolio risk generators at x_M.
    pub active: Vec<usize>,
    pub risk: f64,
}

impl InverseSolutionSet {
    pub fn polytope(&self) -> VPolytope {
        VPolytope::new(self.vertices.clone()).expect("non-empty")
    }

    pub fn is_singleton(&self) -> bool {
        self.vertices.len() == 1
    }
}

fn check_inputs(market: &MarketModel, x_m: &[f64], delta_m: f64) -> Result<()> {
    check_len(market.assets(), x_m.len())?;
    if x_m.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidParameter("x_M must be non-zero".into()));
    }
    if !(delta_m.is_finite() && delta_m > 0.0) {
        return Err(Error::Assumption(format!("Δ_M must be positive, got {delta_m}")));
    }
    Ok(())
}

pub fn inverse_from_generators(
    gens: &PortfolioRiskGenerators,
    x_m: &[f64],
    delta_m: f64,
) -> Result<InverseSolutionSet> {
    let risk = gens.risk(x_m);
    if risk <= 1e-14 * linalg::norm(x_m) {
        return Err(Error::ZeroRiskPortfolio);
    }
    let delta_scale = delta_m / risk;
    let active = gens.active(x_m, ACTIVE_TOL);
    let pts: Vec<Vec<f64>> = active
        .iter()
        .map(|&i| linalg::scale(&gens.generators[i], delta_scale))
        .collect();
    Ok(InverseSolutionSet {
        vertices: extreme_filter(&pts)?.into_vertices(),
        delta_scale,
        active,
        risk,
    })
}

pub fn inverse_solution_set(
    market: &MarketModel,
    envelope: &RiskEnvelope,
    x_m: &[f64],
    delta_m: f64,
) -> Result<(PortfolioRiskGenerators, InverseSolutionSet)> {
    check_inputs(market, x_m, delta_m)?;
    let gens = portfolio_risk_generators(market, envelope)?;
    let set = inverse_from_generators(&gens, x_m, delta_m)?;
    Ok((gens, set))
}

/// Is x_M optimal for the forward problem with this μ and target Δ_M?
pub fn is_optimal_for(
    gens: &PortfolioRiskGenerators,
    mu: &[f64],
    x_m: &[f64],
    delta_m: f64,
) -> Result<bool> {
    if dot(mu, x_m) < delta_m - 1e-8 * (1.0 + delta_m) {
        return Ok(false);
    }
    let sol = solve_with_generators(gens, mu, delta_m)?;
    Ok(gens.risk(x_m) <= sol.value + 1e-8 * (1.0 + sol.value))
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustMu {
    pub mu: Vec<f64>,
    pub selection: Selection,
    pub in_solution_set: bool,
}

/// μ = δ·E[−R̂Q] for the selected identifier Q of X* = R̂ᵀx_M.
pub fn selected_mu(
    market: &MarketModel,
    envelope: &RiskEnvelope,
    x_m: &[f64],
    delta_m: f64,
    kind: SelectorKind,
    cfg: &SteinerConfig,
) -> Result<(InverseSolutionSet, RobustMu)> {
    let (_, set) = inverse_solution_set(market, envelope, x_m, delta_m)?;
    let x_star = market.portfolio(x_m)?;
    let selection = select(kind, envelope, &x_star, cfg)?;
    let w = market.space.weights();
    let mu: Vec<f64> = market
        .centered
        .iter()
        .map(|row| {
            -set.delta_scale
                * row
                    .iter()
                    .zip(&selection.q)
                    .zip(w)
                    .map(|((r, q), wi)| r * q * wi)
                    .sum::<f64>()
        })
        .collect();
    let in_solution_set = hull_contains(&set.vertices, &mu);
    if !in_solution_set && selection.error.iter().all(|e| *e == 0.0) {
        return Err(Error::Certification(
            "selected μ lies outside the inverse solution set".into(),
        ));
    }
    Ok((
        set,
        RobustMu {
            mu,
            selection,
            in_solution_set,
        },
    ))
}

pub fn robust_mu(
    market: &MarketModel,
    envelope: &RiskEnvelope,
    x_m: &[f64],
    delta_m: f64,
    cfg: &SteinerConfig,
) -> Result<RobustMu> {
    Ok(selected_mu(market, envelope, x_m, delta_m, SelectorKind::Robust, cfg)?.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DichotomyBranch {
    /// x_M is the unique optimum for μ in the relative interior of ℳ.
    UniqueForward,
    /// A single active generator: ℳ is a point and the forward face is fat.
    UniqueInverse,
    /// Several active generators that do not span ℝⁿ.
    Neither,
}

#[derive(Debug, Clone, Serialize)]
pub struct DichotomyReport {
    pub branch: DichotomyBranch,
    pub assets: usize,
    pub active_generators: usize,
    pub inverse_vertices: usize,
    /// The stated bound |vert ℳ| ≥ n+1 in the unique-forward branch.
    pub meets_n_plus_one: bool,
    /// The bound |vert ℳ| ≥ n that follows from n independent active generators.
    pub meets_n: bool,
    pub vertex_form_ok: bool,
    pub vertices_resolve_optimal: bool,
    pub forward_face_vertices: Option<usize>,
    pub forward_face_dim: Option<usize>,
}

impl DichotomyReport {
    /// Whether the statement as written holds on this instance.
    pub fn holds_as_stated(&self) -> bool {
        match self.branch {
            DichotomyBranch::UniqueForward => self.meets_n_plus_one && self.vertex_form_ok,
            DichotomyBranch::UniqueInverse => {
                self.inverse_vertices == 1
                    && self.forward_face_dim == Some(self.assets - 1)
                    && self.forward_face_vertices.unwrap_or(0) >= self.assets
            }
            DichotomyBranch::Neither => true,
        }
    }
}

/// Checks both branches of the forward/inverse uniqueness dichotomy at x_M.
///
/// Provable parts (vertex form, re-solve optimality, ≥ n vertices, the fat forward face)
/// raise `DichotomyViolation`. The ≥ n+1 count is only reported.
pub fn verify_dichotomy(
    market: &MarketModel,
    envelope: &RiskEnvelope,
    x_m: &[f64],
    delta_m: f64,
) -> Result<DichotomyReport> {
    let (gens, set) = inverse_solution_set(market, envelope, x_m, delta_m)?;
    let n = market.assets();
    let vertex_form_ok = set.vertices.iter().all(|v| {
        set.active.iter().any(|&i| {
            linalg::sup_dist(v, &linalg::scale(&gens.generators[i], set.delta_scale))
                <= 1e-9 * (1.0 + linalg::norm(v))
        })
    });
    let mut vertices_resolve_optimal = true;
    for v in &set.vertices {
        if !is_optimal_for(&gens, v, x_m, delta_m)? {
            vertices_resolve_optimal = false;
        }
    }
    if !vertex_form_ok || !vertices_resolve_optimal {
        return Err(Error::DichotomyViolation(format!(
            "inverse set vertices: form ok {vertex_form_ok}, optimal {vertices_resolve_optimal}"
        )));
    }
    let active_rows: Vec<Vec<f64>> =
        set.active.iter().map(|&i| gens.generators[i].clone()).collect();
    let rank = linalg::rank(&active_rows, 1e-10);
    let k = set.vertices.len() as f64;
    let centroid: Vec<f64> = (0..n)
        .map(|j| set.vertices.iter().map(|v| v[j]).sum::<f64>() / k)
        .collect();

    let mut report = DichotomyReport {
        branch: DichotomyBranch::Neither,
        assets: n,
        active_generators: set.active.len(),
        inverse_vertices: set.vertices.len(),
        meets_n_plus_one: set.vertices.len() > n,
        meets_n: set.vertices.len() >= n,
        vertex_form_ok,
        vertices_resolve_optimal,
        forward_face_vertices: None,
        forward_face_dim: None,
    };

    if set.active.len() == 1 {
        report.branch = DichotomyBranch::UniqueInverse;
        let fwd = solve_with_generators(&gens, &set.vertices[0], delta_m)?;
        let face = fwd.optimal_polytope();
        report.forward_face_vertices = Some(face.len());
        report.forward_face_dim = Some(face.affine_dim());
        if !report.holds_as_stated() {
            return Err(Error::DichotomyViolation(format!(
                "unique inverse solution but forward face has dimension {:?} and {} vertices",
                report.forward_face_dim,
                face.len()
            )));
        }
    } else if rank == n {
        let fwd = solve_with_generators(&gens, &centroid, delta_m)?;
        if fwd.unique {
            report.branch = DichotomyBranch::UniqueForward;
            report.forward_face_vertices = Some(1);
            report.forward_face_dim = Some(0);
            if !report.meets_n {
                return Err(Error::DichotomyViolation(format!(
                    "unique forward solution but ℳ has only {} vertices for n = {n}",
                    set.vertices.len()
                )));
            }
        }
    }
    Ok(report)
}
