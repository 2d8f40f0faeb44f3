//! Selectors: maps assigning each X one of its risk identifiers.
//!
//! The robust selector is the extended gradient of D read back in identifier space. With
//! scenario weights w the Euclidean gradient pieces of D are `w⊙(1−Q)`, so the selector is
//! `1 − S(w⊙(1−𝒬(X)))/w`; on uniform spaces this is just `S(𝒬(X))`.

use serde::{Deserialize, Serialize};

use crate::envelope::{CvarTerm, Provenance, RiskEnvelope, IDENTIFIER_TOL};
use crate::error::{check_len, Error, Result};
use crate::geometry::{hull_contains, steiner_point, SteinerConfig, SteinerMethod, VPolytope};
use crate::probspace::FiniteProbSpace;

pub const SELECTOR_TOL: f64 = 1e-8;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SelectorKind {
    #[default]
    Robust,
    LawInvariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    UniqueIdentifier,
    MadClosedForm,
    CvarClosedForm,
    MixedCvarClosedForm,
    ScaledClosedForm,
    SteinerExact,
    SteinerMonteCarlo,
    ConditionalExpectation,
}

#[derive(Debug, Clone, Serialize)]
pub struct Selection {
    pub q: Vec<f64>,
    pub method: SelectionMethod,
    /// Per-scenario Monte-Carlo standard error (zero for exact methods).
    pub error: Vec<f64>,
    pub diagnostics: Vec<String>,
}

fn ties(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= TIE_TOL * scale
}

fn scale_of(x: &[f64]) -> f64 {
    x.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

/// `1 + E[Z] − Z` with `Z = sign(X − E[X])`, zero on ties.
pub fn mad_closed_form(space: &FiniteProbSpace, x: &[f64]) -> Result<Vec<f64>> {
    let m = space.mean(x)?;
    let s = scale_of(x);
    let z: Vec<f64> = x
        .iter()
        .map(|v| {
            if ties(*v, m, s) {
                0.0
            } else if *v > m {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    let ez = space.mean(&z)?;
    Ok(z.iter().map(|zi| 1.0 + ez - zi).collect())
}

/// CVaR identifier with the tied block at the α-quantile equalized.
pub fn cvar_closed_form(space: &FiniteProbSpace, x: &[f64], alpha: f64) -> Result<Vec<f64>> {
    check_len(space.len(), x.len())?;
    let w = space.weights();
    let s = scale_of(x);
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut cum = 0.0;
    let mut v = x[order[order.len() - 1]];
    for &i in &order {
        cum += w[i];
        if cum >= alpha - 1e-12 {
            v = x[i];
            break;
        }
    }
    let low: f64 = (0..x.len())
        .filter(|&i| x[i] < v && !ties(x[i], v, s))
        .map(|i| w[i])
        .sum();
    let block: f64 = (0..x.len()).filter(|&i| ties(x[i], v, s)).map(|i| w[i]).sum();
    let q = ((1.0 - low / alpha) / block).clamp(0.0, 1.0 / alpha);
    Ok((0..x.len())
        .map(|i| {
            if ties(x[i], v, s) {
                q
            } else if x[i] < v {
                1.0 / alpha
            } else {
                0.0
            }
        })
        .collect())
}

fn closed_form(
    prov: &Provenance,
    space: &FiniteProbSpace,
    x: &[f64],
) -> Result<Option<(Vec<f64>, SelectionMethod)>> {
    Ok(match prov {
        Provenance::Mad => Some((mad_closed_form(space, x)?, SelectionMethod::MadClosedForm)),
        Provenance::Cvar { alpha } => Some((
            cvar_closed_form(space, x, *alpha)?,
            SelectionMethod::CvarClosedForm,
        )),
        Provenance::MixedCvar { terms } => {
            let mut q = vec![0.0; x.len()];
            for CvarTerm { alpha, lambda } in terms {
                let qa = cvar_closed_form(space, x, *alpha)?;
                for (a, b) in q.iter_mut().zip(qa) {
                    *a += lambda * b;
                }
            }
            Some((q, SelectionMethod::MixedCvarClosedForm))
        }
        Provenance::Scaled { lambda, inner } => closed_form(inner, space, x)?.map(|(q, _)| {
            (
                q.iter().map(|v| (1.0 - lambda) + lambda * v).collect(),
                SelectionMethod::ScaledClosedForm,
            )
        }),
        _ => None,
    })
}

/// Robust selection from a set of identifiers `verts` via the gradient-space Steiner point.
pub fn weighted_steiner(
    space: &FiniteProbSpace,
    verts: &[Vec<f64>],
    cfg: &SteinerConfig,
) -> (Vec<f64>, Vec<f64>, SteinerMethod) {
    let w = space.weights();
    if space.is_uniform() {
        let sp = steiner_point(&VPolytope::from_extreme(verts.to_vec()), cfg);
        return (sp.point, sp.error, sp.method);
    }
    let grads: Vec<Vec<f64>> = verts
        .iter()
        .map(|q| q.iter().zip(w).map(|(qi, wi)| wi * (1.0 - qi)).collect())
        .collect();
    let sp = steiner_point(&VPolytope::from_extreme(grads), cfg);
    let q = sp.point.iter().zip(w).map(|(g, wi)| 1.0 - g / wi).collect();
    let err = sp.error.iter().zip(w).map(|(e, wi)| e / wi).collect();
    (q, err, sp.method)
}

/// Generic robust selector: Steiner point of the identifier face, ignoring closed forms.
pub fn steiner_selector(env: &RiskEnvelope, x: &[f64], cfg: &SteinerConfig) -> Result<Selection> {
    let ids = env.risk_identifiers(x, IDENTIFIER_TOL)?;
    if ids.indices.len() == 1 {
        return Ok(Selection {
            q: ids.polytope.vertices()[0].clone(),
            method: SelectionMethod::UniqueIdentifier,
            error: vec![0.0; x.len()],
            diagnostics: Vec::new(),
        });
    }
    let (q, error, method) = weighted_steiner(env.space(), ids.polytope.vertices(), cfg);
    Ok(Selection {
        q,
        method: match method {
            SteinerMethod::Exact => SelectionMethod::SteinerExact,
            SteinerMethod::MonteCarlo => SelectionMethod::SteinerMonteCarlo,
        },
        error,
        diagnostics: Vec::new(),
    })
}

pub fn robust_selector(env: &RiskEnvelope, x: &[f64], cfg: &SteinerConfig) -> Result<Selection> {
    check_len(env.space().len(), x.len())?;
    let space = env.space();
    if let Some((q, method)) = closed_form(env.provenance(), space, x)? {
        let mut diagnostics = Vec::new();
        if !space.is_uniform() && method != SelectionMethod::MadClosedForm {
            let generic = steiner_selector(env, x, cfg)?;
            let gap = q
                .iter()
                .zip(&generic.q)
                .zip(&generic.error)
                .map(|((a, b), e)| (a - b).abs() - 3.0 * e)
                .fold(0.0f64, f64::max);
            if gap > 1e-9 {
                diagnostics.push(format!(
                    "equalized closed form differs from the Steiner selection by {gap:.3e} \
                     beyond three standard errors on this non-uniform space"
                ));
            }
        }
        if !env.is_identifier(x, &q, SELECTOR_TOL)? {
            return Err(Error::NotAnIdentifier(format!(
                "closed form {method:?} did not attain the supremum"
            )));
        }
        return Ok(Selection {
            q,
            method,
            error: vec![0.0; x.len()],
            diagnostics,
        });
    }
    steiner_selector(env, x, cfg)
}

/// Level sets of `x` (ties within a relative 1e-12), in first-occurrence order.
pub fn level_sets(x: &[f64]) -> Vec<Vec<usize>> {
    let s = scale_of(x);
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for i in 0..x.len() {
        match sets.iter_mut().find(|g| ties(x[g[0]], x[i], s)) {
            Some(g) => g.push(i),
            None => sets.push(vec![i]),
        }
    }
    sets
}

/// `E[Q | X]` for the lowest-index active generator Q.
pub fn law_invariant_selector(env: &RiskEnvelope, x: &[f64]) -> Result<Selection> {
    let ids = env.risk_identifiers(x, IDENTIFIER_TOL)?;
    let seed = &env.generators()[ids.indices[0]];
    let w = env.space().weights();
    let mut q = seed.clone();
    for set in level_sets(x) {
        let mass: f64 = set.iter().map(|&i| w[i]).sum();
        let avg = set.iter().map(|&i| w[i] * seed[i]).sum::<f64>() / mass;
        for &i in &set {
            q[i] = avg;
        }
    }
    if !env.is_identifier(x, &q, SELECTOR_TOL)? {
        return Err(Error::NotAnIdentifier(
            "conditional expectation lost optimality; the measure is not consistent with concave order"
                .into(),
        ));
    }
    if !hull_contains(env.generators(), &q) {
        return Err(Error::NotAnIdentifier(
            "conditional expectation left the risk envelope".into(),
        ));
    }
    Ok(Selection {
        q,
        method: SelectionMethod::ConditionalExpectation,
        error: vec![0.0; x.len()],
        diagnostics: vec![format!("seed identifier: generator {}", ids.indices[0])],
    })
}

pub fn select(
    kind: SelectorKind,
    env: &RiskEnvelope,
    x: &[f64],
    cfg: &SteinerConfig,
) -> Result<Selection> {
    match kind {
        SelectorKind::Robust => robust_selector(env, x, cfg),
        SelectorKind::LawInvariant => law_invariant_selector(env, x),
    }
}
