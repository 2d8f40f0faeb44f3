//! Cooperative investment for agents with utilities `Uᵢ = E − 𝒟ᵢ`.
//!
//! The coalition buys `X* = s·Rᵀx` with `Σx = 1` and splits it as `ΣYᵢ = X*`. Side payments
//! `Cᵢ` with `ΣCᵢ = 0` then equalize the agents' valuations under the critical scenario Q*.

use serde::Serialize;
use std::sync::Arc;

use crate::envelope::{intersect_all, RiskEnvelope};
use crate::error::{check_len, Error, Result};
use crate::geometry::{SteinerConfig, SteinerMethod};
use crate::lp::{self, LinearProgram};
use crate::probspace::FiniteProbSpace;
use crate::selector::weighted_steiner;

pub const FACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct IndividualSolution {
    pub x: Vec<f64>,
    pub payoff: Vec<f64>,
    pub utility: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct JointAllocation {
    pub x: Vec<f64>,
    pub capital: f64,
    pub payoff: Vec<f64>,
    /// Raw split of X*, normalized so agents 2..m have zero utility.
    pub shares: Vec<Vec<f64>>,
    pub utilities: Vec<f64>,
    /// Optimal value of the joint LP, Σaᵢ.
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SidePayments {
    /// Vertices of 𝒬* attaining `min E[QX*]`.
    pub identifiers: Vec<Vec<f64>>,
    pub q_star: Vec<f64>,
    pub q_star_error: Vec<f64>,
    pub method: SteinerMethod,
    pub payments: Vec<f64>,
    pub final_shares: Vec<Vec<f64>>,
    pub final_utilities: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CooperativeSolution {
    pub coalition: Vec<Vec<f64>>,
    pub joint: JointAllocation,
    /// `min_{Q∈𝒬*} E[QX*]`, which must agree with the joint LP value.
    pub coalition_utility: f64,
    pub individual: Vec<IndividualSolution>,
    /// `u* − Σ uᵢ*`.
    pub synergy: f64,
    pub side_payments: SidePayments,
}

fn utility(space: &FiniteProbSpace, gens: &[Vec<f64>], y: &[f64]) -> f64 {
    let w = space.weights();
    gens.iter()
        .map(|q| q.iter().zip(y).zip(w).map(|((a, b), c)| a * b * c).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn payoff(returns: &[Vec<f64>], x: &[f64], scale: f64) -> Vec<f64> {
    let n_scen = returns[0].len();
    (0..n_scen)
        .map(|k| scale * returns.iter().zip(x).map(|(r, xi)| r[k] * xi).sum::<f64>())
        .collect()
}

fn check_returns(returns: &[Vec<f64>], space: &FiniteProbSpace) -> Result<()> {
    if returns.is_empty() {
        return Err(Error::Empty("returns"));
    }
    for r in returns {
        check_len(space.len(), r.len())?;
    }
    Ok(())
}

fn shared_space(envelopes: &[RiskEnvelope]) -> Result<Arc<FiniteProbSpace>> {
    let first = envelopes.first().ok_or(Error::Empty("envelopes"))?;
    for e in &envelopes[1..] {
        first.same_space(e)?;
    }
    Ok(first.space().clone())
}

/// 𝒬* = 𝒬₁ ∩ … ∩ 𝒬ₘ.
pub fn cooperative_envelope(envelopes: &[RiskEnvelope]) -> Result<RiskEnvelope> {
    if envelopes.len() < 2 {
        return Err(Error::InvalidParameter(
            "a coalition envelope needs at least two agents".into(),
        ));
    }
    intersect_all(envelopes).map_err(|e| match e {
        Error::EmptyIntersection => Error::Certification(
            "envelopes share the constant 1, so their intersection cannot be empty".into(),
        ),
        other => other,
    })
}

/// `max min_{Q∈𝒬} E[Q·Rᵀx]` over `Σx = 1`.
pub fn solve_individual(returns: &[Vec<f64>], env: &RiskEnvelope) -> Result<IndividualSolution> {
    let space = env.space();
    check_returns(returns, space)?;
    let n = returns.len();
    let w = space.weights();
    let mut c = vec![0.0; n + 1];
    c[0] = -1.0;
    let mut lp = LinearProgram::new(c);
    for q in env.generators() {
        let mut row = vec![1.0];
        row.extend(
            returns
                .iter()
                .map(|r| -r.iter().zip(q).zip(w).map(|((a, b), c)| a * b * c).sum::<f64>()),
        );
        lp.le(row, 0.0);
    }
    let mut budget = vec![0.0];
    budget.extend(std::iter::repeat_n(1.0, n));
    lp.eq(budget, 1.0);
    let sol = lp::solve_optimal(&lp)?;
    let x = sol.x[1..].to_vec();
    let payoff = payoff(returns, &x, 1.0);
    Ok(IndividualSolution {
        utility: utility(space, env.generators(), &payoff),
        x,
        payoff,
    })
}

/// The joint LP: maximize Σaᵢ with `aᵢ ≤ E[QYᵢ]` for Q ∈ 𝒬ⁱ and `ΣYᵢ = capital·Rᵀx`.
pub fn solve_joint(
    returns: &[Vec<f64>],
    envelopes: &[RiskEnvelope],
    capital: f64,
) -> Result<JointAllocation> {
    let space = shared_space(envelopes)?;
    check_returns(returns, &space)?;
    if !(capital.is_finite() && capital > 0.0) {
        return Err(Error::InvalidParameter(format!("capital must be positive, got {capital}")));
    }
    let (m, big_n, n) = (envelopes.len(), space.len(), returns.len());
    let w = space.weights();
    let y_at = |i: usize, k: usize| m + i * big_n + k;
    let x_at = |j: usize| m + m * big_n + j;
    let vars = m + m * big_n + n;

    let mut c = vec![0.0; vars];
    c[..m].fill(-1.0);
    let mut lp = LinearProgram::new(c);
    for (i, env) in envelopes.iter().enumerate() {
        for q in env.generators() {
            let mut row = vec![0.0; vars];
            row[i] = 1.0;
            for k in 0..big_n {
                row[y_at(i, k)] = -w[k] * q[k];
            }
            lp.le(row, 0.0);
        }
    }
    for k in 0..big_n {
        let mut row = vec![0.0; vars];
        for i in 0..m {
            row[y_at(i, k)] = 1.0;
        }
        for (j, r) in returns.iter().enumerate() {
            row[x_at(j)] = -capital * r[k];
        }
        lp.eq(row, 0.0);
    }
    let mut budget = vec![0.0; vars];
    for j in 0..n {
        budget[x_at(j)] = 1.0;
    }
    lp.eq(budget, 1.0);

    let sol = lp::solve_optimal(&lp)?;
    let x: Vec<f64> = (0..n).map(|j| sol.x[x_at(j)]).collect();
    let total = payoff(returns, &x, capital);
    let mut shares: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..big_n).map(|k| sol.x[y_at(i, k)]).collect())
        .collect();
    // the split is only determined up to zero-sum constants; move every agent after the
    // first to zero utility so the raw shares do not depend on the simplex path
    for (e, y) in envelopes.iter().zip(shares.iter_mut()).skip(1) {
        let u = utility(&space, e.generators(), y);
        y.iter_mut().for_each(|v| *v -= u);
    }
    for k in 0..big_n {
        let others: f64 = shares[1..].iter().map(|s| s[k]).sum();
        shares[0][k] = total[k] - others;
    }
    let utilities = envelopes
        .iter()
        .zip(&shares)
        .map(|(e, y)| utility(&space, e.generators(), y))
        .collect();
    Ok(JointAllocation {
        x,
        capital,
        payoff: total,
        shares,
        utilities,
        value: -sol.value,
    })
}

/// Critical scenario Q* = Steiner point of `argmin_{Q∈𝒬*} E[QX*]` and the zero-sum payments
/// `Cᵢ = −E[Q*Yᵢ] + E[Q*X*]/m`.
pub fn fair_side_payments(
    joint: &JointAllocation,
    coalition: &RiskEnvelope,
    envelopes: &[RiskEnvelope],
    cfg: &SteinerConfig,
) -> Result<SidePayments> {
    let space = coalition.space();
    check_len(joint.shares.len(), envelopes.len())?;
    let w = space.weights();
    let value = |q: &[f64], y: &[f64]| -> f64 {
        q.iter().zip(y).zip(w).map(|((a, b), c)| a * b * c).sum()
    };
    let vals: Vec<f64> = coalition
        .generators()
        .iter()
        .map(|q| value(q, &joint.payoff))
        .collect();
    let best = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = FACE_TOL * (1.0 + best.abs());
    let identifiers: Vec<Vec<f64>> = coalition
        .generators()
        .iter()
        .zip(&vals)
        .filter(|(_, v)| **v <= best + tol)
        .map(|(q, _)| q.clone())
        .collect();
    let (q_star, q_star_error, method) = if identifiers.len() == 1 {
        (identifiers[0].clone(), vec![0.0; space.len()], SteinerMethod::Exact)
    } else {
        weighted_steiner(space, &identifiers, cfg)
    };
    let m = joint.shares.len() as f64;
    let target = value(&q_star, &joint.payoff) / m;
    let payments: Vec<f64> = joint
        .shares
        .iter()
        .map(|y| target - value(&q_star, y))
        .collect();
    let final_shares: Vec<Vec<f64>> = joint
        .shares
        .iter()
        .zip(&payments)
        .map(|(y, c)| y.iter().map(|v| v + c).collect())
        .collect();
    let final_utilities = envelopes
        .iter()
        .zip(&final_shares)
        .map(|(e, y)| utility(space, e.generators(), y))
        .collect();
    Ok(SidePayments {
        identifiers,
        q_star,
        q_star_error,
        method,
        payments,
        final_shares,
        final_utilities,
    })
}

/// Full pipeline. `capital` defaults to the number of agents (one unit each).
pub fn solve_cooperative(
    returns: &[Vec<f64>],
    envelopes: &[RiskEnvelope],
    capital: Option<f64>,
    cfg: &SteinerConfig,
) -> Result<CooperativeSolution> {
    let space = shared_space(envelopes)?;
    let coalition = if envelopes.len() == 1 {
        envelopes[0].clone()
    } else {
        cooperative_envelope(envelopes)?
    };
    let capital = capital.unwrap_or(envelopes.len() as f64);
    let joint = solve_joint(returns, envelopes, capital)?;
    let coalition_utility = utility(&space, coalition.generators(), &joint.payoff);
    if (coalition_utility - joint.value).abs() > 1e-7 * (1.0 + joint.value.abs()) {
        return Err(Error::Certification(format!(
            "joint LP value {} disagrees with the coalition envelope value {coalition_utility}",
            joint.value
        )));
    }
    let individual = envelopes
        .iter()
        .map(|e| solve_individual(returns, e))
        .collect::<Result<Vec<_>>>()?;
    let synergy = joint.value - individual.iter().map(|s| s.utility).sum::<f64>();
    let side_payments = fair_side_payments(&joint, &coalition, envelopes, cfg)?;
    Ok(CooperativeSolution {
        coalition: coalition.generators().to_vec(),
        joint,
        coalition_utility,
        individual,
        synergy,
        side_payments,
    })
}
