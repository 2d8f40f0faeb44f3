//! Finitely generated deviation measures, stored as the extreme points 𝒬ᵉ of their risk
//! envelope: `D(X) = E[X] + max_{Q ∈ 𝒬ᵉ} E[−XQ]`.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::{self, VPolytope};
use crate::probspace::FiniteProbSpace;

pub const MAD_MAX_SCENARIOS: usize = 20;
pub const CVAR_CANDIDATE_CAP: usize = 1_000_000;
pub const IDENTIFIER_TOL: f64 = 1e-9;
const MEAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvarTerm {
    pub alpha: f64,
    pub lambda: f64,
}

/// Configuration-level description of a deviation measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvelopeSpec {
    Mad,
    Cvar {
        alpha: f64,
    },
    MixedCvar {
        terms: Vec<CvarTerm>,
    },
    Scale {
        lambda: f64,
        inner: Box<EnvelopeSpec>,
    },
    Mix {
        parts: Vec<EnvelopeSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambdas: Option<Vec<f64>>,
    },
    Max {
        parts: Vec<EnvelopeSpec>,
    },
    Custom {
        generators: Vec<Vec<f64>>,
    },
    #[serde(alias = "std", alias = "standard_deviation")]
    Stddev,
}

/// How an envelope was produced; selectors use it to pick closed forms.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Mad,
    Cvar { alpha: f64 },
    MixedCvar { terms: Vec<CvarTerm> },
    Scaled { lambda: f64, inner: Box<Provenance> },
    Mixture,
    MaxCombination,
    Intersection,
    Custom,
}

#[derive(Debug, Clone)]
pub struct RiskEnvelope {
    space: Arc<FiniteProbSpace>,
    generators: Vec<Vec<f64>>,
    provenance: Provenance,
    /// Points dropped while building (custom input that was duplicate or not extreme).
    removed: Vec<Vec<f64>>,
}

/// The argmax face of `Q ↦ E[−XQ]` over 𝒬ᵉ.
#[derive(Debug, Clone)]
pub struct RiskIdentifierSet {
    pub polytope: VPolytope,
    pub indices: Vec<usize>,
    pub x: Vec<f64>,
    pub value: f64,
}

impl RiskEnvelope {
    fn checked(
        space: Arc<FiniteProbSpace>,
        generators: Vec<Vec<f64>>,
        provenance: Provenance,
    ) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Empty("risk envelope generators"));
        }
        for g in &generators {
            check_len(space.len(), g.len())?;
            let m = space.mean(g)?;
            if (m - 1.0).abs() > MEAN_TOL {
                return Err(Error::InvalidParameter(format!(
                    "envelope element has E[Q] = {m}, expected 1"
                )));
            }
        }
        Ok(Self {
            space,
            generators,
            provenance,
            removed: Vec::new(),
        })
    }

    /// Filters `points` to extreme points before wrapping them.
    pub fn from_points(
        space: Arc<FiniteProbSpace>,
        points: Vec<Vec<f64>>,
        provenance: Provenance,
    ) -> Result<Self> {
        let mut env = Self::checked(space, points.clone(), provenance)?;
        let kept = geometry::extreme_filter(&points)?.into_vertices();
        env.removed = points
            .into_iter()
            .filter(|p| !kept.iter().any(|k| k == p))
            .collect();
        env.generators = kept;
        Ok(env)
    }

    pub fn space(&self) -> &Arc<FiniteProbSpace> {
        &self.space
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn removed(&self) -> &[Vec<f64>] {
        &self.removed
    }

    pub fn polytope(&self) -> VPolytope {
        VPolytope::new(self.generators.clone()).expect("non-empty")
    }

    /// E[−XQ] for each generator.
    fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.space.len(), x.len())?;
        let w = self.space.weights();
        Ok(self
            .generators
            .iter()
            .map(|q| -q.iter().zip(x).zip(w).map(|((a, b), c)| a * b * c).sum::<f64>())
            .collect())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let scores = self.scores(x)?;
        if x.iter().all(|v| *v == x[0]) {
            return Ok(0.0);
        }
        let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(self.space.mean(x)? + best)
    }

    pub fn risk_identifiers(&self, x: &[f64], tol: f64) -> Result<RiskIdentifierSet> {
        let scores = self.scores(x)?;
        let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let cut = best - tol * (1.0 + best.abs());
        let indices: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] >= cut).collect();
        let verts = indices.iter().map(|&i| self.generators[i].clone()).collect();
        let value = if x.iter().all(|v| *v == x[0]) {
            0.0
        } else {
            self.space.mean(x)? + best
        };
        Ok(RiskIdentifierSet {
            polytope: VPolytope::from_extreme(verts),
            indices,
            x: x.to_vec(),
            value,
        })
    }

    /// Does `q` attain the supremum for `x` (within `tol`, relative)?
    pub fn is_identifier(&self, x: &[f64], q: &[f64], tol: f64) -> Result<bool> {
        let d = self.evaluate(x)?;
        let got = self.space.mean(x)? - self.space.inner(x, q)?;
        Ok((got - d).abs() <= tol * (1.0 + d.abs()))
    }

    pub fn same_space(&self, other: &RiskEnvelope) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

pub fn build_mad(space: Arc<FiniteProbSpace>) -> Result<RiskEnvelope> {
    let n = space.len();
    if n > MAD_MAX_SCENARIOS {
        return Err(Error::TooManyScenarios {
            scenarios: n,
            max: MAD_MAX_SCENARIOS,
        });
    }
    if n < 2 {
        return Err(Error::InvalidParameter("MAD needs at least two scenarios".into()));
    }
    let w = space.weights();
    let mut gens = Vec::with_capacity((1usize << n) - 2);
    for mask in 1..((1usize << n) - 1) {
        let z: Vec<f64> = (0..n)
            .map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 })
            .collect();
        let ez: f64 = z.iter().zip(w).map(|(a, b)| a * b).sum();
        gens.push(z.iter().map(|zi| 1.0 + ez - zi).collect());
    }
    RiskEnvelope::checked(space, gens, Provenance::Mad)
}

pub fn build_cvar(space: Arc<FiniteProbSpace>, alpha: f64) -> Result<RiskEnvelope> {
    let gens = cvar_vertices(space.weights(), alpha)?;
    RiskEnvelope::checked(space, gens, Provenance::Cvar { alpha })
}

/// Vertices of `{Q : E[Q] = 1, 0 ≤ Q ≤ 1/α}`: a set U at the upper bound and at most one
/// fractional coordinate absorbing the residual mass.
pub fn cvar_vertices(w: &[f64], alpha: f64) -> Result<Vec<Vec<f64>>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "CVaR level must lie in (0,1), got {alpha}"
        )));
    }
    let tol = 1e-12;
    let mut out = Vec::new();
    let mut visited = 0usize;
    let mut upper: Vec<usize> = Vec::new();

    fn emit(w: &[f64], alpha: f64, upper: &[usize], mass: f64, tol: f64, out: &mut Vec<Vec<f64>>) {
        let n = w.len();
        let r = alpha - mass;
        let mut base = vec![0.0; n];
        for &u in upper {
            base[u] = 1.0 / alpha;
        }
        if r.abs() <= tol {
            out.push(base);
            return;
        }
        for f in 0..n {
            if !upper.contains(&f) && r < w[f] - tol {
                let mut q = base.clone();
                q[f] = r / (alpha * w[f]);
                out.push(q);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        w: &[f64],
        alpha: f64,
        start: usize,
        mass: f64,
        upper: &mut Vec<usize>,
        visited: &mut usize,
        tol: f64,
        out: &mut Vec<Vec<f64>>,
    ) -> Result<()> {
        *visited += 1;
        if *visited > CVAR_CANDIDATE_CAP {
            return Err(Error::CombinatorialGuard {
                limit: CVAR_CANDIDATE_CAP,
            });
        }
        emit(w, alpha, upper, mass, tol, out);
        if mass >= alpha - tol {
            return Ok(());
        }
        for i in start..w.len() {
            if mass + w[i] <= alpha + tol {
                upper.push(i);
                dfs(w, alpha, i + 1, mass + w[i], upper, visited, tol, out)?;
                upper.pop();
            }
        }
        Ok(())
    }

    dfs(w, alpha, 0, 0.0, &mut upper, &mut visited, tol, &mut out)?;
    Ok(out)
}

fn check_lambdas(lambdas: &[f64], count: usize, must_sum_to_one: bool) -> Result<()> {
    check_len(count, lambdas.len())?;
    if lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::InvalidParameter("mixture weights must be positive".into()));
    }
    if must_sum_to_one && (lambdas.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter("mixture weights must sum to 1".into()));
    }
    Ok(())
}

pub fn build_mixed_cvar(space: Arc<FiniteProbSpace>, terms: &[CvarTerm]) -> Result<RiskEnvelope> {
    if terms.is_empty() {
        return Err(Error::Empty("mixed CVaR terms"));
    }
    let lambdas: Vec<f64> = terms.iter().map(|t| t.lambda).collect();
    check_lambdas(&lambdas, terms.len(), true)?;
    let gens = mixed_cvar_vertices(space.weights(), terms)?;
    RiskEnvelope::checked(
        space,
        gens,
        Provenance::MixedCvar {
            terms: terms.to_vec(),
        },
    )
}

/// Vertices of `Σ λᵢ 𝒬(αᵢ)`.
///
/// Every CVaR envelope is maximized along `c` by filling scenarios greedily in decreasing
/// order of `cⱼ/wⱼ`, so each vertex of the sum is the greedy point of some scenario ordering.
/// Orderings are explored as prefixes and cut once every level's mass is placed.
pub fn mixed_cvar_vertices(w: &[f64], terms: &[CvarTerm]) -> Result<Vec<Vec<f64>>> {
    for t in terms {
        if !(t.alpha > 0.0 && t.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "CVaR level must lie in (0,1), got {}",
                t.alpha
            )));
        }
    }
    struct Walk<'a> {
        w: &'a [f64],
        terms: &'a [CvarTerm],
        used: Vec<bool>,
        point: Vec<f64>,
        visited: usize,
        seen: HashSet<Vec<i64>>,
        out: Vec<Vec<f64>>,
    }

    impl Walk<'_> {
        fn step(&mut self, remaining: &[f64]) -> Result<()> {
            self.visited += 1;
            if self.visited > CVAR_CANDIDATE_CAP {
                return Err(Error::CombinatorialGuard {
                    limit: CVAR_CANDIDATE_CAP,
                });
            }
            if remaining.iter().all(|r| *r <= 1e-12) {
                let key = self.point.iter().map(|v| (v * 1e9).round() as i64).collect();
                if self.seen.insert(key) {
                    self.out.push(self.point.clone());
                }
                return Ok(());
            }
            for j in 0..self.w.len() {
                if self.used[j] {
                    continue;
                }
                let mut next = remaining.to_vec();
                let mut add = 0.0;
                for (t, r) in self.terms.iter().zip(next.iter_mut()) {
                    let m = self.w[j].min(r.max(0.0));
                    add += t.lambda * m / (t.alpha * self.w[j]);
                    *r -= m;
                }
                self.used[j] = true;
                self.point[j] = add;
                self.step(&next)?;
                self.point[j] = 0.0;
                self.used[j] = false;
            }
            Ok(())
        }
    }

    let mut walk = Walk {
        w,
        terms,
        used: vec![false; w.len()],
        point: vec![0.0; w.len()],
        visited: 0,
        seen: HashSet::new(),
        out: Vec::new(),
    };
    let start: Vec<f64> = terms.iter().map(|t| t.alpha).collect();
    walk.step(&start)?;
    Ok(geometry::polytope::dedup(&walk.out, geometry::polytope::DEDUP_TOL))
}

/// Envelope of `Σ λᵢ Dᵢ`: extreme points of `Σ λᵢ 𝒬ᵢ + (1 − Σλᵢ)`.
pub fn mix(envelopes: &[RiskEnvelope], lambdas: &[f64]) -> Result<RiskEnvelope> {
    let first = envelopes.first().ok_or(Error::Empty("envelopes"))?;
    check_lambdas(lambdas, envelopes.len(), false)?;
    for e in envelopes {
        first.same_space(e)?;
    }
    if envelopes.len() == 1 && lambdas[0] == 1.0 {
        return Ok(first.clone());
    }
    let mut acc = first.polytope().affine_image(lambdas[0], 0.0);
    for (e, l) in envelopes.iter().zip(lambdas).skip(1) {
        acc = geometry::minkowski_sum(&acc, &e.polytope().affine_image(*l, 0.0))?;
    }
    let shift = 1.0 - lambdas.iter().sum::<f64>();
    let acc = acc.affine_image(1.0, shift);
    RiskEnvelope::checked(first.space.clone(), acc.into_vertices(), Provenance::Mixture)
}

/// Envelope of `max(D₁, …, Dₘ)`: extreme points of the hull of the union.
pub fn max_combine(envelopes: &[RiskEnvelope]) -> Result<RiskEnvelope> {
    let first = envelopes.first().ok_or(Error::Empty("envelopes"))?;
    for e in envelopes {
        first.same_space(e)?;
    }
    let pts: Vec<Vec<f64>> = envelopes
        .iter()
        .flat_map(|e| e.generators.iter().cloned())
        .collect();
    RiskEnvelope::from_points(first.space.clone(), pts, Provenance::MaxCombination)
}

/// Envelope of `λD`: `{(1−λ) + λQ}`.
pub fn scale(envelope: &RiskEnvelope, lambda: f64) -> Result<RiskEnvelope> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter("scale factor must be positive".into()));
    }
    if lambda == 1.0 {
        return Ok(envelope.clone());
    }
    let gens = envelope
        .generators
        .iter()
        .map(|q| q.iter().map(|v| (1.0 - lambda) + lambda * v).collect())
        .collect();
    RiskEnvelope::checked(
        envelope.space.clone(),
        gens,
        Provenance::Scaled {
            lambda,
            inner: Box::new(envelope.provenance.clone()),
        },
    )
}

pub fn custom(space: Arc<FiniteProbSpace>, generators: Vec<Vec<f64>>) -> Result<RiskEnvelope> {
    RiskEnvelope::from_points(space, generators, Provenance::Custom)
}

/// Envelope of the infimal convolution: intersection of the envelopes' hulls.
pub fn intersect_all(envelopes: &[RiskEnvelope]) -> Result<RiskEnvelope> {
    let first = envelopes.first().ok_or(Error::Empty("envelopes"))?;
    let mut acc = first.polytope();
    for e in &envelopes[1..] {
        first.same_space(e)?;
        acc = geometry::intersect(&acc, &e.polytope())?;
    }
    let mut env = RiskEnvelope::checked(first.space.clone(), acc.into_vertices(), Provenance::Intersection)?;
    if envelopes.len() == 1 {
        env.provenance = first.provenance.clone();
    }
    Ok(env)
}

pub fn build(space: Arc<FiniteProbSpace>, spec: &EnvelopeSpec) -> Result<RiskEnvelope> {
    match spec {
        EnvelopeSpec::Mad => build_mad(space),
        EnvelopeSpec::Cvar { alpha } => build_cvar(space, *alpha),
        EnvelopeSpec::MixedCvar { terms } => build_mixed_cvar(space, terms),
        EnvelopeSpec::Scale { lambda, inner } => scale(&build(space, inner)?, *lambda),
        EnvelopeSpec::Mix { parts, lambdas } => {
            let envs = parts
                .iter()
                .map(|p| build(space.clone(), p))
                .collect::<Result<Vec<_>>>()?;
            let lambdas = lambdas
                .clone()
                .unwrap_or_else(|| vec![1.0 / parts.len().max(1) as f64; parts.len()]);
            mix(&envs, &lambdas)
        }
        EnvelopeSpec::Max { parts } => {
            let envs = parts
                .iter()
                .map(|p| build(space.clone(), p))
                .collect::<Result<Vec<_>>>()?;
            max_combine(&envs)
        }
        EnvelopeSpec::Custom { generators } => custom(space, generators.clone()),
        EnvelopeSpec::Stddev => reject_non_finitely_generated(spec),
    }
}

/// The standard deviation's envelope is a Euclidean ball slice with infinitely many
/// extreme points, so it has no finite generator list.
pub fn reject_non_finitely_generated(spec: &EnvelopeSpec) -> Result<RiskEnvelope> {
    match spec {
        EnvelopeSpec::Stddev => Err(Error::Unsupported(
            "standard deviation is not finitely generated: its risk envelope \
             {E[Q]=1, σ(Q) ≤ 1} has infinitely many extreme points"
                .into(),
        )),
        _ => Err(Error::InvalidParameter(
            "measure is finitely generated; build it instead".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::same_vertex_set;

    fn uni(n: usize) -> Arc<FiniteProbSpace> {
        Arc::new(FiniteProbSpace::uniform(n).unwrap())
    }

    #[test]
    fn mad_generators() {
        for n in 2..=6 {
            assert_eq!(build_mad(uni(n)).unwrap().len(), (1 << n) - 2);
        }
        let e = build_mad(uni(3)).unwrap();
        let g = [-1.0 / 3.0, 5.0 / 3.0, 5.0 / 3.0];
        assert!(e
            .generators()
            .iter()
            .any(|q| q.iter().zip(g).all(|(a, b)| (a - b).abs() < 1e-12)));
        let e2 = build_mad(uni(2)).unwrap();
        assert!(same_vertex_set(e2.generators(), &[vec![0.0, 2.0], vec![2.0, 0.0]], 1e-12));
        assert!(matches!(build_mad(uni(21)), Err(Error::TooManyScenarios { .. })));
    }

    #[test]
    fn cvar_generators() {
        let e = build_cvar(uni(3), 0.05).unwrap();
        assert!(same_vertex_set(
            e.generators(),
            &[vec![3.0, 0.0, 0.0], vec![0.0, 3.0, 0.0], vec![0.0, 0.0, 3.0]],
            1e-12
        ));
        let s = Arc::new(FiniteProbSpace::new(vec![0.5, 0.5]).unwrap());
        let e = build_cvar(s, 0.75).unwrap();
        assert!(same_vertex_set(
            e.generators(),
            &[vec![4.0 / 3.0, 2.0 / 3.0], vec![2.0 / 3.0, 4.0 / 3.0]],
            1e-12
        ));
        assert!(build_cvar(uni(3), 1.0).is_err());
        assert_eq!(build_cvar(uni(6), 0.5).unwrap().len(), 20);
    }

    #[test]
    fn evaluate_examples() {
        let mad = build_mad(uni(3)).unwrap();
        assert!((mad.evaluate(&[-1.5, 0.0, 1.5]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(mad.evaluate(&[2.0, 2.0, 2.0]).unwrap(), 0.0);
        let cvar = build_cvar(uni(3), 0.05).unwrap();
        assert!((cvar.evaluate(&[-0.5, -0.5, 1.0]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identifier_faces() {
        let mad = build_mad(uni(3)).unwrap();
        let ids = mad.risk_identifiers(&[-1.5, 0.0, 1.5], IDENTIFIER_TOL).unwrap();
        assert!(same_vertex_set(
            ids.polytope.vertices(),
            &[vec![7.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], vec![5.0 / 3.0, 5.0 / 3.0, -1.0 / 3.0]],
            1e-12
        ));
        let unique = mad.risk_identifiers(&[-1.0, 0.5, 0.7], IDENTIFIER_TOL).unwrap();
        assert_eq!(unique.indices.len(), 1);
    }

    #[test]
    fn mixed_cvar_matches_filtered_minkowski_sum() {
        let terms = [CvarTerm { alpha: 0.3, lambda: 0.25 }, CvarTerm { alpha: 0.7, lambda: 0.75 }];
        let spaces = [uni(4), uni(5), Arc::new(FiniteProbSpace::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap())];
        for s in spaces {
            let parts: Vec<RiskEnvelope> =
                terms.iter().map(|t| build_cvar(s.clone(), t.alpha).unwrap()).collect();
            let slow = mix(&parts, &[0.25, 0.75]).unwrap();
            let fast = build_mixed_cvar(s, &terms).unwrap();
            assert!(same_vertex_set(fast.generators(), slow.generators(), 1e-10));
        }
    }

    #[test]
    fn combinators() {
        let s = uni(2);
        let c = build_cvar(s.clone(), 0.5).unwrap();
        let m = build_mixed_cvar(
            s.clone(),
            &[CvarTerm { alpha: 0.5, lambda: 0.5 }, CvarTerm { alpha: 0.5, lambda: 0.5 }],
        )
        .unwrap();
        assert!(same_vertex_set(m.generators(), c.generators(), 1e-12));
        let s3 = uni(3);
        let m = build_mixed_cvar(
            s3.clone(),
            &[
                CvarTerm { alpha: 1.0 / 3.0, lambda: 0.5 },
                CvarTerm { alpha: 2.0 / 3.0, lambda: 0.5 },
            ],
        )
        .unwrap();
        for q in m.generators() {
            assert!((s3.mean(q).unwrap() - 1.0).abs() < 1e-12);
        }
        let c3 = build_cvar(s3.clone(), 0.3).unwrap();
        assert!(same_vertex_set(scale(&c3, 1.0).unwrap().generators(), c3.generators(), 0.0));
        assert!(matches!(
            build(s3, &EnvelopeSpec::Stddev),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn custom_reports_removed() {
        let s = uni(2);
        let e = custom(s, vec![vec![0.0, 2.0], vec![1.0, 1.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e.removed(), &[vec![1.0, 1.0]]);
    }

    #[test]
    fn spec_json_shapes() {
        let s: EnvelopeSpec =
            serde_json::from_str(r#"{"kind":"scale","lambda":0.5,"inner":{"kind":"mad"}}"#).unwrap();
        assert_eq!(
            s,
            EnvelopeSpec::Scale {
                lambda: 0.5,
                inner: Box::new(EnvelopeSpec::Mad)
            }
        );
        let s: EnvelopeSpec =
            serde_json::from_str(r#"{"kind":"mixed_cvar","terms":[{"alpha":0.1,"lambda":1}]}"#)
                .unwrap();
        assert!(matches!(s, EnvelopeSpec::MixedCvar { .. }));
    }
}
