use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dd::{self, cone_rays, HRep};
use crate::error::{check_len, Error, Result};
use crate::linalg::{self, dot, norm, sub};
use crate::lp::simplex::{solve, LinearProgram, LpStatus};

pub const DEDUP_TOL: f64 = 1e-10;
pub const ACTIVE_TOL: f64 = 1e-9;
pub const INTERSECT_MAX_DIM: usize = 8;
const MEMBERSHIP_TOL: f64 = 1e-9;

/// Convex hull of finitely many points, stored by its extreme points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VPolytope {
    vertices: Vec<Vec<f64>>,
    dim: usize,
}

impl VPolytope {
    /// Builds the hull of `points`, discarding anything that is not extreme.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        extreme_filter(&points)
    }

    pub fn point(p: Vec<f64>) -> Self {
        let dim = p.len();
        Self {
            vertices: vec![p],
            dim,
        }
    }

    /// Caller guarantees the points are distinct extreme points.
    pub(crate) fn from_extreme(vertices: Vec<Vec<f64>>) -> Self {
        let dim = vertices[0].len();
        Self { vertices, dim }
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vec<f64>> {
        self.vertices
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.vertices.len() == 1
    }

    /// Dimension of the affine hull.
    pub fn affine_dim(&self) -> usize {
        linalg::affine_hull(&self.vertices, 1e-10).1.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        hull_contains(&self.vertices, p)
    }

    /// Support value in `direction` and the face of maximizing vertices.
    pub fn support(&self, direction: &[f64]) -> Result<(f64, VPolytope)> {
        check_len(self.dim, direction.len())?;
        if norm(direction) == 0.0 {
            return Err(Error::ZeroDirection);
        }
        let vals: Vec<f64> = self.vertices.iter().map(|v| dot(v, direction)).collect();
        let best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tol = ACTIVE_TOL * (1.0 + best.abs());
        let face = self
            .vertices
            .iter()
            .zip(&vals)
            .filter(|(_, v)| **v >= best - tol)
            .map(|(p, _)| p.clone())
            .collect();
        Ok((best, VPolytope::from_extreme(face)))
    }

    pub fn translate(&self, q: &[f64]) -> Result<Self> {
        check_len(self.dim, q.len())?;
        Ok(Self::from_extreme(
            self.vertices.iter().map(|v| linalg::add(v, q)).collect(),
        ))
    }

    /// Image under `x ↦ a·x + b` (coordinatewise affine maps preserve extremality when a ≠ 0).
    pub fn affine_image(&self, a: f64, b: f64) -> Self {
        if a == 0.0 {
            return Self::point(vec![b; self.dim]);
        }
        Self::from_extreme(
            self.vertices
                .iter()
                .map(|v| v.iter().map(|x| a * x + b).collect())
                .collect(),
        )
    }

    /// Halfspace representation (facets of the relative interior plus affine-hull equalities).
    pub fn to_hrep(&self) -> HRep {
        facets(&self.vertices)
    }
}

fn scale_of(points: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |a, v| a.max(v.abs()))
}

/// Removes points within `tol` (sup-norm) of an earlier point.
pub fn dedup(points: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if !out.iter().any(|q| linalg::sup_dist(p, q) <= tol) {
            out.push(p.clone());
        }
    }
    out
}

/// LP test: is `p` a convex combination of `points`?
pub fn hull_contains(points: &[Vec<f64>], p: &[f64]) -> bool {
    if points.is_empty() {
        return false;
    }
    let k = points.len();
    let scale = scale_of(points).max(p.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    if points.iter().any(|q| linalg::sup_dist(q, p) <= MEMBERSHIP_TOL * scale) {
        return true;
    }
    if k == 1 {
        return false;
    }
    let mut lp = LinearProgram::new(vec![0.0; k]);
    for j in 0..k {
        lp.set_nonneg(j);
    }
    for i in 0..p.len() {
        lp.eq(points.iter().map(|q| q[i] / scale).collect(), p[i] / scale);
    }
    lp.eq(vec![1.0; k], 1.0);
    matches!(solve(&lp), Ok(s) if s.status == LpStatus::Optimal)
}

/// Keeps exactly the extreme points of the hull of `points`.
pub fn extreme_filter(points: &[Vec<f64>]) -> Result<VPolytope> {
    if points.is_empty() {
        return Err(Error::Empty("point list"));
    }
    let dim = points[0].len();
    for p in points {
        check_len(dim, p.len())?;
    }
    let pts = dedup(points, DEDUP_TOL);
    if pts.len() <= 2 {
        return Ok(VPolytope::from_extreme(pts));
    }
    let scale = scale_of(&pts);
    if dim == 1 {
        let lo = pts.iter().cloned().fold(pts[0].clone(), |a, b| if b[0] < a[0] { b } else { a });
        let hi = pts.iter().cloned().fold(pts[0].clone(), |a, b| if b[0] > a[0] { b } else { a });
        return Ok(VPolytope::from_extreme(dedup(&[lo, hi], DEDUP_TOL)));
    }

    // cheap certificate: a strict maximizer of a linear functional is extreme
    let mut confirmed = vec![false; pts.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let probes = 8 * dim + 32;
    for t in 0..probes {
        let dir: Vec<f64> = if t < 2 * dim {
            let mut d = vec![0.0; dim];
            d[t / 2] = if t % 2 == 0 { 1.0 } else { -1.0 };
            d
        } else {
            (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()
        };
        let vals: Vec<f64> = pts.iter().map(|p| dot(p, &dir)).collect();
        let (arg, best) = vals
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |a, (i, v)| if *v > a.1 { (i, *v) } else { a });
        let margin = 1e-7 * scale * norm(&dir);
        if vals
            .iter()
            .enumerate()
            .all(|(i, v)| i == arg || *v < best - margin)
        {
            confirmed[arg] = true;
        }
    }

    let mut alive = vec![true; pts.len()];
    for i in 0..pts.len() {
        if confirmed[i] {
            continue;
        }
        let known: Vec<Vec<f64>> = (0..pts.len())
            .filter(|&j| confirmed[j] && alive[j])
            .map(|j| pts[j].clone())
            .collect();
        if known.len() > 1 && hull_contains(&known, &pts[i]) {
            alive[i] = false;
            continue;
        }
        let others: Vec<Vec<f64>> = (0..pts.len())
            .filter(|&j| j != i && alive[j])
            .map(|j| pts[j].clone())
            .collect();
        if hull_contains(&others, &pts[i]) {
            alive[i] = false;
        } else {
            confirmed[i] = true;
        }
    }
    Ok(VPolytope::from_extreme(
        pts.into_iter()
            .zip(alive)
            .filter(|(_, a)| *a)
            .map(|(p, _)| p)
            .collect(),
    ))
}

pub fn minkowski_sum(a: &VPolytope, b: &VPolytope) -> Result<VPolytope> {
    check_len(a.dim, b.dim)?;
    let mut pts = Vec::with_capacity(a.len() * b.len());
    for u in &a.vertices {
        for v in &b.vertices {
            pts.push(linalg::add(u, v));
        }
    }
    extreme_filter(&pts)
}

/// Convex hull of a union.
pub fn hull_union(parts: &[&VPolytope]) -> Result<VPolytope> {
    let pts: Vec<Vec<f64>> = parts
        .iter()
        .flat_map(|p| p.vertices.iter().cloned())
        .collect();
    extreme_filter(&pts)
}

/// Facets of conv(points) inside its affine hull, plus the hull's equalities.
pub fn facets(points: &[Vec<f64>]) -> HRep {
    let d = points[0].len();
    let (c, basis) = linalg::affine_hull(points, 1e-10);
    let mut h = HRep::new(d);
    for w in linalg::complement_basis(&basis, d) {
        let f = dot(&w, &c);
        h.eq.push((w, f));
    }
    let k = basis.len();
    if k == 0 {
        return h;
    }
    let zs: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let diff = sub(p, &c);
            basis.iter().map(|u| dot(u, &diff)).collect()
        })
        .collect();
    let rows: Vec<Vec<f64>> = zs
        .iter()
        .map(|z| {
            let mut r = z.clone();
            r.push(-1.0);
            r
        })
        .collect();
    let rays = cone_rays(&rows, k + 1).expect("affinely spanning points give a pointed cone");
    for r in rays {
        let a = &r[..k];
        if norm(a) <= 1e-12 {
            continue;
        }
        let beta = r[k];
        let mut ax = vec![0.0; d];
        for (ai, u) in a.iter().zip(&basis) {
            for (x, ui) in ax.iter_mut().zip(u) {
                *x += ai * ui;
            }
        }
        let rhs = beta + dot(&ax, &c);
        h.ineq.push((ax, rhs));
    }
    h
}

pub fn intersect(a: &VPolytope, b: &VPolytope) -> Result<VPolytope> {
    check_len(a.dim, b.dim)?;
    if a.dim > INTERSECT_MAX_DIM {
        return Err(Error::DimensionGuard {
            dim: a.dim,
            max: INTERSECT_MAX_DIM,
        });
    }
    let mut h = a.to_hrep();
    h.extend(&b.to_hrep());
    let verts = match dd::vertices(&h) {
        Ok(v) => v,
        Err(Error::UnboundedFace { .. }) => unreachable!("intersection of bounded sets"),
        Err(e) => return Err(e),
    };
    extreme_filter(&verts)
}

fn project_simplex(v: &mut [f64]) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i as f64 + 1.0);
        if ui - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Euclidean distance from `p` to conv(`verts`) by accelerated projected gradient over
/// convex weights, stopped on a Frank-Wolfe gap of 1e-10 or after 10⁴ iterations.
pub fn distance_to_hull(verts: &[Vec<f64>], p: &[f64]) -> f64 {
    let k = verts.len();
    let diffs: Vec<f64> = verts.iter().map(|v| norm(&sub(v, p))).collect();
    let (start, dmin) = diffs
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |a, (i, d)| if *d < a.1 { (i, *d) } else { a });
    if k == 1 || dmin == 0.0 {
        return dmin;
    }
    let gram: Vec<Vec<f64>> = verts
        .iter()
        .map(|u| verts.iter().map(|v| dot(u, v)).collect())
        .collect();
    let vp: Vec<f64> = verts.iter().map(|v| dot(v, p)).collect();
    let lip = 2.0 * gram.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let grad = |l: &[f64]| -> Vec<f64> {
        (0..k)
            .map(|i| 2.0 * (dot(&gram[i], l) - vp[i]))
            .collect()
    };
    let mut lam = vec![0.0; k];
    lam[start] = 1.0;
    let mut y = lam.clone();
    let mut t = 1.0f64;
    for _ in 0..10_000 {
        let g = grad(&lam);
        let gap = dot(&g, &lam) - g.iter().cloned().fold(f64::INFINITY, f64::min);
        if gap <= 1e-10 {
            break;
        }
        let gy = grad(&y);
        let mut next: Vec<f64> = y.iter().zip(&gy).map(|(a, b)| a - b / lip).collect();
        project_simplex(&mut next);
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        y = next
            .iter()
            .zip(&lam)
            .map(|(n, o)| n + (t - 1.0) / t_next * (n - o))
            .collect();
        lam = next;
        t = t_next;
    }
    let mut q = vec![0.0; p.len()];
    for (l, v) in lam.iter().zip(verts) {
        for (qi, vi) in q.iter_mut().zip(v) {
            *qi += l * vi;
        }
    }
    norm(&sub(&q, p)).min(dmin)
}

pub fn hausdorff(a: &VPolytope, b: &VPolytope) -> Result<f64> {
    check_len(a.dim, b.dim)?;
    let ab = a
        .vertices
        .iter()
        .map(|v| distance_to_hull(&b.vertices, v))
        .fold(0.0, f64::max);
    let ba = b
        .vertices
        .iter()
        .map(|v| distance_to_hull(&a.vertices, v))
        .fold(0.0, f64::max);
    Ok(ab.max(ba))
}

/// Sorts vertices lexicographically so outputs are reproducible regardless of construction order.
pub fn sorted(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    pts
}

/// Same vertex sets up to order, within `tol` per coordinate.
pub fn same_vertex_set(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .all(|u| b.iter().any(|v| linalg::sup_dist(u, v) <= tol))
        && b.iter()
            .all(|u| a.iter().any(|v| linalg::sup_dist(u, v) <= tol))
}
