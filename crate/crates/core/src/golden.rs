//! Reference cases with known closed-form answers, runnable from the CLI.

use serde::Serialize;
use serde_json::{json, Value};
use std::sync::Arc;

use crate::allocation::solve_cooperative;
use crate::blacklitterman::{bl_pipeline, Posterior};
use crate::envelope::{build_cvar, build_mad, scale, EnvelopeSpec};
use crate::error::Result;
use crate::forward::solve_forward;
use crate::geometry::{same_vertex_set, steiner_point, SteinerConfig, VPolytope};
use crate::inverse::{inverse_solution_set, robust_mu};
use crate::probspace::{FiniteProbSpace, MarketModel};
use crate::selector::{robust_selector, SelectorKind};

#[derive(Debug, Clone, Serialize)]
pub struct GoldenCheck {
    pub name: String,
    pub expected: Value,
    pub actual: Value,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GoldenCase {
    pub name: &'static str,
    pub checks: Vec<GoldenCheck>,
    /// Set when the case could not run at all.
    pub error: Option<String>,
}

impl GoldenCase {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Default)]
struct Checks(Vec<GoldenCheck>);

impl Checks {
    fn scalar(&mut self, name: &str, expected: f64, actual: f64, tol: f64) {
        self.0.push(GoldenCheck {
            name: name.into(),
            expected: json!(expected),
            actual: json!(actual),
            tolerance: tol,
            passed: (expected - actual).abs() <= tol,
        });
    }

    fn vector(&mut self, name: &str, expected: &[f64], actual: &[f64], tol: f64) {
        let passed = expected.len() == actual.len()
            && expected.iter().zip(actual).all(|(a, b)| (a - b).abs() <= tol);
        self.0.push(GoldenCheck {
            name: name.into(),
            expected: json!(expected),
            actual: json!(actual),
            tolerance: tol,
            passed,
        });
    }

    fn vertex_set(&mut self, name: &str, expected: &[Vec<f64>], actual: &[Vec<f64>], tol: f64) {
        self.0.push(GoldenCheck {
            name: name.into(),
            expected: json!(expected),
            actual: json!(actual),
            tolerance: tol,
            passed: same_vertex_set(expected, actual, tol),
        });
    }

    fn flag(&mut self, name: &str, expected: bool, actual: bool) {
        self.0.push(GoldenCheck {
            name: name.into(),
            expected: json!(expected),
            actual: json!(actual),
            tolerance: 0.0,
            passed: expected == actual,
        });
    }
}

const TOL: f64 = 1e-9;

fn uniform(n: usize) -> Arc<FiniteProbSpace> {
    Arc::new(FiniteProbSpace::uniform(n).expect("n ≥ 1"))
}

/// Asset rows from scenario rows.
fn assets(scenarios: &[[f64; 2]]) -> Vec<Vec<f64>> {
    (0..2).map(|i| scenarios.iter().map(|s| s[i]).collect()).collect()
}

pub fn perms3(a: [f64; 3]) -> Vec<Vec<f64>> {
    let idx = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in idx {
        let v = vec![a[p[0]], a[p[1]], a[p[2]]];
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

fn mad_two_asset(c: &mut Checks) -> Result<()> {
    let space = uniform(3);
    let m = MarketModel::from_centered(
        space.clone(),
        assets(&[[-1.0, -2.0], [-1.0, 1.0], [2.0, 1.0]]),
        vec![0.4, 0.6],
        0.0,
    )?;
    let env = build_mad(space)?;
    let (_, sol) = solve_forward(&m, &env, 0.5)?;
    c.vector("forward x*", &[0.5, 0.5], &sol.x, TOL);
    c.scalar("MAD(X*)", 1.0, sol.value, TOL);
    let x_star = m.portfolio(&sol.x)?;
    c.vector("X*", &[-1.5, 0.0, 1.5], &x_star, TOL);
    let (_, set) = inverse_solution_set(&m, &env, &[0.5, 0.5], 0.5)?;
    c.vertex_set(
        "inverse set endpoints μ(±1)",
        &[vec![0.5 - 1.0 / 6.0, 0.5 + 1.0 / 6.0], vec![0.5 + 1.0 / 6.0, 0.5 - 1.0 / 6.0]],
        &set.vertices,
        TOL,
    );
    let q = robust_selector(&env, &x_star, &SteinerConfig::default())?;
    c.vector("robust identifier", &[2.0, 1.0, 0.0], &q.q, TOL);
    let r = robust_mu(&m, &env, &[0.5, 0.5], 0.5, &SteinerConfig::default())?;
    c.vector("robust μ", &[0.5, 0.5], &r.mu, TOL);
    Ok(())
}

fn three_scenario_market(mu: [f64; 2]) -> Result<MarketModel> {
    MarketModel::from_centered(
        uniform(3),
        assets(&[[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]]),
        mu.to_vec(),
        0.0,
    )
}

fn cvar_three_scenario(c: &mut Checks) -> Result<()> {
    let m = three_scenario_market([1.0 / 3.0, 2.0 / 3.0])?;
    let env = build_cvar(m.space.clone(), 0.05)?;
    c.vertex_set("CVaR(0.05) generators", &perms3([3.0, 0.0, 0.0]), env.generators(), TOL);
    let (_, sol) = solve_forward(&m, &env, 0.5)?;
    c.vector("forward x*", &[0.5, 0.5], &sol.x, TOL);
    c.flag("forward unique", true, sol.unique);
    let x_star = m.portfolio(&sol.x)?;
    let ids = env.risk_identifiers(&x_star, 1e-9)?;
    c.vertex_set(
        "identifier family (q, 3−q, 0) endpoints",
        &[vec![3.0, 0.0, 0.0], vec![0.0, 3.0, 0.0]],
        ids.polytope.vertices(),
        TOL,
    );
    let (_, set) = inverse_solution_set(&m, &env, &[0.5, 0.5], 0.5)?;
    c.vertex_set(
        "inverse set (q/3, (3−q)/3) endpoints",
        &[vec![1.0, 0.0], vec![0.0, 1.0]],
        &set.vertices,
        TOL,
    );
    let q = robust_selector(&env, &x_star, &SteinerConfig::default())?;
    c.vector("robust identifier q = 1.5", &[1.5, 1.5, 0.0], &q.q, TOL);
    let r = robust_mu(&m, &env, &[0.5, 0.5], 0.5, &SteinerConfig::default())?;
    c.vector("robust μ", &[0.5, 0.5], &r.mu, TOL);
    Ok(())
}

fn black_litterman_reweighting(c: &mut Checks) -> Result<()> {
    let m = three_scenario_market([0.0, 0.5])?;
    let spec = EnvelopeSpec::Cvar { alpha: 0.05 };
    let env = build_cvar(m.space.clone(), 0.05)?;
    let gens = crate::forward::portfolio_risk_generators(&m, &env)?;
    c.vertex_set(
        "portfolio risk generators",
        &[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]],
        &gens.generators,
        TOL,
    );
    let (_, set) = inverse_solution_set(&m, &env, &[0.2, 0.8], 0.4)?;
    c.vertex_set("unique equilibrium μ*", &[vec![0.0, 0.5]], &set.vertices, TOL);
    let post = Posterior::Override {
        posterior_weights: vec![0.25, 0.25, 0.5],
    };
    let r = bl_pipeline(&m, &spec, &[0.2, 0.8], 0.4, &post, SelectorKind::Robust, &SteinerConfig::default())?;
    c.vertex_set(
        "no-view optimal face",
        &[vec![-1.6, 0.8], vec![0.8, 0.8]],
        &r.prior_forward.optimal_set,
        1e-8,
    );
    c.scalar("no-view optimal risk", 0.8, r.prior_forward.value, TOL);
    c.vector("posterior μ", &[0.25, 0.75], &r.mu_post, TOL);
    c.vector("posterior R̂ asset 1", &[-1.25, -0.25, 0.75], &r.posterior_centered[0], TOL);
    c.vector("posterior R̂ asset 2", &[-0.25, -1.25, 0.75], &r.posterior_centered[1], TOL);
    c.flag("posterior forward unique", true, r.posterior_forward.unique);
    c.vector("posterior x*", &[0.4, 0.4], &r.posterior_forward.x, TOL);
    let post_market = MarketModel::from_centered(
        Arc::new(FiniteProbSpace::new(r.posterior_weights.clone())?),
        r.posterior_centered.clone(),
        r.mu_post.clone(),
        0.0,
    )?;
    let post_env = build_cvar(post_market.space.clone(), 0.05)?;
    let post_gens = crate::forward::portfolio_risk_generators(&post_market, &post_env)?;
    let active: Vec<Vec<f64>> = r
        .posterior_forward
        .active
        .iter()
        .map(|&i| post_gens.generators[i].clone())
        .collect();
    c.vertex_set(
        "active generators D′₁, D′₂",
        &[vec![1.25, 0.25], vec![0.25, 1.25]],
        &active,
        TOL,
    );
    Ok(())
}

fn cooperative_binary_options(c: &mut Checks) -> Result<()> {
    let space = uniform(3);
    let agents = [
        build_cvar(space.clone(), 2.0 / 3.0)?,
        scale(&build_mad(space)?, 0.5)?,
    ];
    let returns = vec![vec![-1.0, 1.0, 1.0], vec![-1.0, -1.0, 7.0]];
    let s = solve_cooperative(&returns, &agents, None, &SteinerConfig::default())?;
    c.scalar("agent 1 individual t", 0.0, s.individual[0].x[1], TOL);
    c.scalar("agent 1 individual u₁*", 0.0, s.individual[0].utility, TOL);
    c.scalar("agent 2 individual t", 0.2, s.individual[1].x[1], TOL);
    c.scalar("agent 2 individual u₂*", 1.0 / 15.0, s.individual[1].utility, TOL);
    c.scalar("cooperative t", 0.2, s.joint.x[1], TOL);
    c.scalar("cooperative u*", 2.0 / 15.0, s.joint.value, TOL);
    c.vector("X*", &[-2.0, 6.0 / 5.0, 22.0 / 5.0], &s.joint.payoff, TOL);
    let mut q_star = perms3([1.5, 1.0, 0.5]);
    q_star.extend(perms3([4.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]));
    c.vertex_set("coalition envelope", &q_star, &s.coalition, TOL);
    let sp = &s.side_payments;
    c.vector("critical scenario Q*", &[17.0 / 12.0, 7.0 / 6.0, 5.0 / 12.0], &sp.q_star, TOL);
    c.scalar("side payment C", -1.0 / 15.0, sp.payments[0], TOL);
    c.vector("final share agent 1", &[1.0 / 15.0; 3], &sp.final_shares[0], TOL);
    c.vector(
        "final share agent 2",
        &[-31.0 / 15.0, 17.0 / 15.0, 13.0 / 3.0],
        &sp.final_shares[1],
        TOL,
    );
    Ok(())
}

fn steiner_segment_midpoint(c: &mut Checks) -> Result<()> {
    let p = VPolytope::new(vec![vec![1.5, 1.0, 0.5], vec![4.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]])?;
    let s = steiner_point(&p, &SteinerConfig::default());
    c.vector("segment midpoint", &[17.0 / 12.0, 7.0 / 6.0, 5.0 / 12.0], &s.point, TOL);
    Ok(())
}

type CaseFn = fn(&mut Checks) -> Result<()>;

const CASES: [(&str, CaseFn); 5] = [
    ("mad_two_asset", mad_two_asset),
    ("cvar_three_scenario", cvar_three_scenario),
    ("black_litterman_reweighting", black_litterman_reweighting),
    ("cooperative_binary_options", cooperative_binary_options),
    ("steiner_segment_midpoint", steiner_segment_midpoint),
];

pub fn run_all() -> Vec<GoldenCase> {
    CASES
        .iter()
        .map(|(name, f)| {
            let mut c = Checks::default();
            let error = f(&mut c).err().map(|e| e.to_string());
            GoldenCase {
                name,
                checks: c.0,
                error,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_cases_pass() {
        for case in super::run_all() {
            assert!(case.passed(), "{}", serde_json::to_string_pretty(&case).unwrap());
        }
    }
}
