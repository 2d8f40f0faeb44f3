//! Discrete Black-Litterman: equilibrium μ by inverse optimization, scenario reweighting from
//! views, then the forward problem under the posterior measure.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::envelope::{build, EnvelopeSpec};
use crate::error::{check_len, Error, Result};
use crate::forward::{diagnose_uniqueness, solve_forward, ForwardSolution, UniquenessReport};
use crate::geometry::SteinerConfig;
use crate::inverse::{inverse_solution_set, selected_mu, InverseSolutionSet};
use crate::probspace::{FiniteProbSpace, MarketModel};
use crate::selector::{SelectionMethod, SelectorKind};

/// Views `v = P·r + ε` with `ε ~ N(0, noise_cov)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Views {
    pub pick: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub noise_cov: Vec<Vec<f64>>,
}

/// Either views to condition on or posterior weights given directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Posterior {
    Views(Views),
    Override { posterior_weights: Vec<f64> },
}

impl Views {
    pub fn none() -> Self {
        Self {
            pick: Vec::new(),
            values: Vec::new(),
            noise_cov: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.pick.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pick.is_empty()
    }

    /// Validates shapes and returns the Cholesky factor of the noise covariance.
    fn factor(&self, assets: usize) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
        let m = self.len();
        check_len(m, self.values.len())?;
        check_len(m, self.noise_cov.len())?;
        for (i, row) in self.pick.iter().enumerate() {
            check_len(assets, row.len())?;
            if row.iter().all(|v| *v == 0.0) {
                return Err(Error::InvalidParameter(format!("pick row {i} is zero")));
            }
        }
        for row in &self.noise_cov {
            check_len(m, row.len())?;
        }
        let cov = DMatrix::from_fn(m, m, |i, j| self.noise_cov[i][j]);
        let asym = (&cov - cov.transpose()).abs().max();
        if asym > 1e-12 * (1.0 + cov.abs().max()) {
            return Err(Error::InvalidParameter("noise covariance is not symmetric".into()));
        }
        nalgebra::Cholesky::new(cov).ok_or_else(|| {
            Error::InvalidParameter("noise covariance is not positive definite".into())
        })
    }
}

/// ℚ(ω) ∝ ℙ(ω)·f_ε(v − Pμ_eq − PR̂(ω)), evaluated in log space.
pub fn posterior_space(
    market: &MarketModel,
    mu_eq: &[f64],
    views: &Views,
) -> Result<Arc<FiniteProbSpace>> {
    let n = market.assets();
    check_len(n, mu_eq.len())?;
    if views.is_empty() {
        return Ok(market.space.clone());
    }
    let chol = views.factor(n)?;
    let w = market.space.weights();
    let logs: Vec<f64> = (0..market.scenarios())
        .map(|k| {
            let resid = DVector::from_fn(views.len(), |i, _| {
                let row = &views.pick[i];
                let pr: f64 = (0..n)
                    .map(|j| row[j] * (mu_eq[j] + market.centered[j][k]))
                    .sum();
                views.values[i] - pr
            });
            let z = chol.l().solve_lower_triangular(&resid).expect("non-singular factor");
            w[k].ln() - 0.5 * z.norm_squared()
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::NumericUnderflow { max_log_density: max });
    }
    let unnorm: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    if unnorm.iter().any(|u| *u <= 0.0) {
        return Err(Error::NumericUnderflow { max_log_density: max });
    }
    let total: f64 = unnorm.iter().sum();
    Ok(Arc::new(FiniteProbSpace::new(
        unnorm.iter().map(|u| u / total).collect(),
    )?))
}

#[derive(Debug, Clone, Serialize)]
pub struct Equilibrium {
    pub mu: Vec<f64>,
    pub inverse: InverseSolutionSet,
    /// `None` when ℳ is a single point and no selection was needed.
    pub method: Option<SelectionMethod>,
    pub diagnostics: Vec<String>,
}

pub fn equilibrium_mu(
    market: &MarketModel,
    spec: &EnvelopeSpec,
    x_m: &[f64],
    delta_m: f64,
    kind: SelectorKind,
    cfg: &SteinerConfig,
) -> Result<Equilibrium> {
    let env = build(market.space.clone(), spec)?;
    let (_, set) = inverse_solution_set(market, &env, x_m, delta_m)?;
    if set.is_singleton() {
        return Ok(Equilibrium {
            mu: set.vertices[0].clone(),
            inverse: set,
            method: None,
            diagnostics: Vec::new(),
        });
    }
    let (set, sel) = selected_mu(market, &env, x_m, delta_m, kind, cfg)?;
    Ok(Equilibrium {
        mu: sel.mu,
        inverse: set,
        method: Some(sel.selection.method),
        diagnostics: sel.selection.diagnostics,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BlResult {
    pub equilibrium: Equilibrium,
    pub prior_forward: ForwardSolution,
    pub posterior_weights: Vec<f64>,
    pub mu_post: Vec<f64>,
    pub posterior_centered: Vec<Vec<f64>>,
    pub posterior_forward: ForwardSolution,
    pub posterior_uniqueness: UniquenessReport,
    pub narrative: Vec<String>,
}

fn describe(label: &str, sol: &ForwardSolution) -> String {
    if sol.unique {
        format!("{label}: unique optimal portfolio {:?}", sol.x)
    } else {
        format!(
            "{label}: optimal set has {} vertices, the forward problem is not uniquely solved",
            sol.optimal_set.len()
        )
    }
}

/// Runs the whole pipeline. The target Δ is kept at Δ_M under the posterior.
pub fn bl_pipeline(
    market: &MarketModel,
    spec: &EnvelopeSpec,
    x_m: &[f64],
    delta_m: f64,
    posterior: &Posterior,
    kind: SelectorKind,
    cfg: &SteinerConfig,
) -> Result<BlResult> {
    let equilibrium = equilibrium_mu(market, spec, x_m, delta_m, kind, cfg)?;
    let prior = MarketModel {
        mu: equilibrium.mu.clone(),
        ..market.clone()
    };
    let prior_env = build(prior.space.clone(), spec)?;
    let (_, prior_forward) = solve_forward(&prior, &prior_env, delta_m)?;

    let q_space = match posterior {
        Posterior::Views(v) => posterior_space(&prior, &equilibrium.mu, v)?,
        Posterior::Override { posterior_weights } => {
            check_len(market.scenarios(), posterior_weights.len())?;
            Arc::new(FiniteProbSpace::new(posterior_weights.clone())?)
        }
    };
    let post = if *q_space == *prior.space {
        prior.clone()
    } else {
        let shift: Vec<f64> = prior
            .centered
            .iter()
            .map(|row| q_space.mean(row))
            .collect::<Result<_>>()?;
        let centered = prior
            .centered
            .iter()
            .zip(&shift)
            .map(|(row, s)| row.iter().map(|r| r - s).collect())
            .collect();
        let mu = prior.mu.iter().zip(&shift).map(|(m, s)| m + s).collect();
        MarketModel::from_centered(q_space, centered, mu, prior.r0)?
    };
    let post_env = if Arc::ptr_eq(&post.space, &prior.space) {
        prior_env
    } else {
        build(post.space.clone(), spec)?
    };
    let (gens, posterior_forward) = solve_forward(&post, &post_env, delta_m)?;
    let posterior_uniqueness = diagnose_uniqueness(&posterior_forward, &gens, &post.mu)?;

    let mut narrative = vec![
        match &equilibrium.method {
            None => "inverse problem: unique equilibrium μ".to_string(),
            Some(m) => format!(
                "inverse problem: {} candidate vertices, equilibrium μ chosen by {m:?}",
                equilibrium.inverse.vertices.len()
            ),
        },
        describe("without views", &prior_forward),
        describe("with views", &posterior_forward),
    ];
    narrative.extend(equilibrium.diagnostics.iter().cloned());

    Ok(BlResult {
        equilibrium,
        prior_forward,
        posterior_weights: post.space.weights().to_vec(),
        mu_post: post.mu.clone(),
        posterior_centered: post.centered.clone(),
        posterior_forward,
        posterior_uniqueness,
        narrative,
    })
}
