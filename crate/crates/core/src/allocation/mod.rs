//! Capital allocation and equilibrium prices from the extended gradient, plus cooperative
//! investment.

pub mod cooperative;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::sync::Arc;

use crate::envelope::RiskEnvelope;
use crate::error::{check_len, Error, Result};
use crate::geometry::{extended_gradient, PwlConvexFunction, SteinerConfig, SteinerPoint};
use crate::linalg::{dot, norm};
use crate::probspace::{FiniteProbSpace, RandomVariable};

pub use cooperative::{
    cooperative_envelope, fair_side_payments, solve_cooperative, solve_individual,
    CooperativeSolution, IndividualSolution, JointAllocation, SidePayments,
};

/// The deviation measure as a function on ℝᴺ: pieces `w⊙(1−Q)` for Q ∈ 𝒬.
pub fn deviation_function(env: &RiskEnvelope) -> Result<PwlConvexFunction> {
    let w = env.space().weights();
    PwlConvexFunction::linear(
        env.generators()
            .iter()
            .map(|q| q.iter().zip(w).map(|(qi, wi)| wi * (1.0 - qi)).collect())
            .collect(),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct CapitalAllocationResult {
    pub contributions: Vec<f64>,
    /// Bound on each contribution's Monte-Carlo error: `Σⱼ |Xᵢⱼ|·σⱼ`.
    pub errors: Vec<f64>,
    pub total_risk: f64,
    pub gradient: SteinerPoint,
    pub portfolio: Vec<f64>,
}

impl CapitalAllocationResult {
    pub fn sum(&self) -> f64 {
        self.contributions.iter().sum()
    }
}

fn common_space(parts: &[RandomVariable]) -> Result<Arc<FiniteProbSpace>> {
    let first = parts.first().ok_or(Error::Empty("sub-portfolios"))?;
    for p in &parts[1..] {
        if !(Arc::ptr_eq(p.space(), first.space()) || p.space() == first.space()) {
            return Err(Error::SpaceMismatch);
        }
    }
    Ok(first.space().clone())
}

/// `Λ*(X, Y) = Xᵀ G_Y(ρ)`.
pub fn allocate(
    risk: &PwlConvexFunction,
    x: &[f64],
    y: &[f64],
    cfg: &SteinerConfig,
) -> Result<f64> {
    risk.check_homogeneous()?;
    check_len(risk.dim(), x.len())?;
    Ok(dot(x, &extended_gradient(risk, y, cfg)?.point))
}

pub fn capital_allocation(
    risk: &PwlConvexFunction,
    subportfolios: &[RandomVariable],
    cfg: &SteinerConfig,
) -> Result<CapitalAllocationResult> {
    risk.check_homogeneous()?;
    let space = common_space(subportfolios)?;
    check_len(risk.dim(), space.len())?;
    let mut y = vec![0.0; space.len()];
    for p in subportfolios {
        for (a, b) in y.iter_mut().zip(p.values()) {
            *a += b;
        }
    }
    let gradient = extended_gradient(risk, &y, cfg)?;
    let contributions = subportfolios
        .iter()
        .map(|p| dot(p.values(), &gradient.point))
        .collect();
    let errors = subportfolios
        .iter()
        .map(|p| {
            p.values()
                .iter()
                .zip(&gradient.error)
                .map(|(v, e)| v.abs() * e)
                .sum()
        })
        .collect();
    Ok(CapitalAllocationResult {
        contributions,
        errors,
        total_risk: risk.eval(&y)?,
        gradient,
        portfolio: y,
    })
}

/// Steiner point of ∂ρ*(Y), the selected equilibrium price.
pub fn equilibrium_price_selection(
    total_risk: &PwlConvexFunction,
    y: &[f64],
    cfg: &SteinerConfig,
) -> Result<SteinerPoint> {
    extended_gradient(total_risk, y, cfg)
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustnessCheck {
    pub reference: f64,
    pub mean: f64,
    pub standard_error: f64,
    pub samples: usize,
    pub radius: f64,
    pub within_three_se: bool,
}

/// Averages `Λ*(X, Y+e)` over uniform draws `e` from the ball of the given radius.
pub fn allocation_robustness(
    risk: &PwlConvexFunction,
    x: &[f64],
    y: &[f64],
    radius: f64,
    samples: usize,
    cfg: &SteinerConfig,
) -> Result<RobustnessCheck> {
    if samples < 2 || !(radius > 0.0) {
        return Err(Error::InvalidParameter(
            "robustness check needs ≥ 2 samples and a positive radius".into(),
        ));
    }
    let reference = allocate(risk, x, y, cfg)?;
    let d = y.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut vals = Vec::with_capacity(samples);
    for _ in 0..samples {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let r = radius * rng.random::<f64>().powf(1.0 / d as f64) / norm(&g);
        let z: Vec<f64> = y.iter().zip(&g).map(|(yi, gi)| yi + r * gi).collect();
        vals.push(allocate(risk, x, &z, cfg)?);
    }
    let k = samples as f64;
    let mean = vals.iter().sum::<f64>() / k;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let standard_error = (var / k).sqrt();
    Ok(RobustnessCheck {
        reference,
        mean,
        standard_error,
        samples,
        radius,
        within_three_se: (mean - reference).abs() <= 3.0 * standard_error + 1e-12,
    })
}
