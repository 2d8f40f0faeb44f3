//! Double description: extreme rays of `{y : Hy ≤ 0}` and vertex enumeration of
//! bounded H-polyhedra built on top of it.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, rank, scale, solve_square};
use crate::lp::simplex::{solve, LinearProgram, LpStatus};

const ZERO_TOL: f64 = 1e-9;

/// `a·x ≤ b` rows plus `e·x = f` rows.
#[derive(Debug, Clone, Default)]
pub struct HRep {
    pub dim: usize,
    pub ineq: Vec<(Vec<f64>, f64)>,
    pub eq: Vec<(Vec<f64>, f64)>,
}

impl HRep {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ..Default::default()
        }
    }

    pub fn extend(&mut self, other: &HRep) {
        self.ineq.extend(other.ineq.iter().cloned());
        self.eq.extend(other.eq.iter().cloned());
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.ineq.iter().all(|(a, b)| dot(a, x) <= b + tol * (1.0 + b.abs()))
            && self
                .eq
                .iter()
                .all(|(e, f)| (dot(e, x) - f).abs() <= tol * (1.0 + f.abs()))
    }
}

struct Ray {
    v: Vec<f64>,
    zeros: Vec<usize>,
}

fn normalize(v: Vec<f64>) -> Vec<f64> {
    let n = norm(&v);
    if n > 0.0 {
        scale(&v, 1.0 / n)
    } else {
        v
    }
}

fn zero_set(rows: &[Vec<f64>], upto: usize, v: &[f64]) -> Vec<usize> {
    (0..upto)
        .filter(|&i| dot(&rows[i], v).abs() <= ZERO_TOL)
        .collect()
}

/// Extreme rays of the pointed cone `{y ∈ ℝᴰ : row·y ≤ 0 for every row}`.
/// When the cone contains a line, returns that line's direction as the error value.
pub fn cone_rays(rows: &[Vec<f64>], dim: usize) -> std::result::Result<Vec<Vec<f64>>, Vec<f64>> {
    let rows: Vec<Vec<f64>> = rows
        .iter()
        .filter(|r| norm(r) > 1e-14)
        .map(|r| normalize(r.clone()))
        .collect();
    // order: greedy independent rows first, then the rest in input order
    let mut basis_idx: Vec<usize> = Vec::new();
    for i in 0..rows.len() {
        let mut cand: Vec<Vec<f64>> = basis_idx.iter().map(|&j| rows[j].clone()).collect();
        cand.push(rows[i].clone());
        if rank(&cand, 1e-10) == cand.len() {
            basis_idx.push(i);
            if basis_idx.len() == dim {
                break;
            }
        }
    }
    if basis_idx.len() < dim {
        // lineality space: return a null direction
        return Err(null_direction(&rows, dim));
    }
    let mut order: Vec<usize> = basis_idx.clone();
    order.extend((0..rows.len()).filter(|i| !basis_idx.contains(i)));
    let rows: Vec<Vec<f64>> = order.iter().map(|&i| rows[i].clone()).collect();

    let hs: Vec<Vec<f64>> = rows[..dim].to_vec();
    let mut rays = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = -1.0;
        let v = solve_square(&hs, &e).expect("independent rows");
        let v = normalize(v);
        let zeros = zero_set(&rows, dim, &v);
        rays.push(Ray { v, zeros });
    }

    for h in dim..rows.len() {
        let row = &rows[h];
        let s: Vec<f64> = rays.iter().map(|r| dot(row, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| s[i] > ZERO_TOL).collect();
        if pos.is_empty() {
            for (r, si) in rays.iter_mut().zip(&s) {
                if si.abs() <= ZERO_TOL {
                    r.zeros.push(h);
                }
            }
            continue;
        }
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| s[i] < -ZERO_TOL).collect();
        let mut fresh = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common: Vec<usize> = rays[p]
                    .zeros
                    .iter()
                    .filter(|z| rays[n].zeros.contains(z))
                    .cloned()
                    .collect();
                if common.len() + 2 < dim {
                    continue;
                }
                let sub: Vec<Vec<f64>> = common.iter().map(|&i| rows[i].clone()).collect();
                if rank(&sub, 1e-10) != dim - 2 {
                    continue;
                }
                let v: Vec<f64> = rays[n]
                    .v
                    .iter()
                    .zip(&rays[p].v)
                    .map(|(rn, rp)| s[p] * rn - s[n] * rp)
                    .collect();
                let v = normalize(v);
                let zeros = zero_set(&rows, h + 1, &v);
                fresh.push(Ray { v, zeros });
            }
        }
        let mut kept: Vec<Ray> = Vec::new();
        for (i, mut r) in rays.into_iter().enumerate() {
            if s[i] > ZERO_TOL {
                continue;
            }
            if s[i].abs() <= ZERO_TOL {
                r.zeros.push(h);
            }
            kept.push(r);
        }
        for r in fresh {
            if !kept
                .iter()
                .any(|k| k.v.iter().zip(&r.v).all(|(a, b)| (a - b).abs() <= 1e-9))
            {
                kept.push(r);
            }
        }
        rays = kept;
    }
    Ok(rays.into_iter().map(|r| r.v).collect())
}

fn null_direction(rows: &[Vec<f64>], dim: usize) -> Vec<f64> {
    use nalgebra::DMatrix;
    if rows.is_empty() {
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        return v;
    }
    let m = DMatrix::from_fn(rows.len().max(dim), dim, |i, j| {
        if i < rows.len() {
            rows[i][j]
        } else {
            0.0
        }
    });
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("v requested");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |a, (i, s)| if *s < a.1 { (i, *s) } else { a });
    vt.row(k).iter().cloned().collect()
}

fn feasible(h: &HRep) -> Result<bool> {
    let mut lp = LinearProgram::new(vec![0.0; h.dim]);
    for (a, b) in &h.ineq {
        lp.le(a.clone(), *b);
    }
    for (e, f) in &h.eq {
        lp.eq(e.clone(), *f);
    }
    Ok(solve(&lp)?.status == LpStatus::Optimal)
}

/// Vertices of a bounded H-polyhedron. `Empty`-ness is reported as `EmptyIntersection`,
/// unboundedness as `UnboundedFace` with a recession direction.
pub fn vertices(h: &HRep) -> Result<Vec<Vec<f64>>> {
    let d = h.dim;
    let big = d + 1;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut t_row = vec![0.0; big];
    t_row[d] = -1.0;
    rows.push(t_row);
    for (a, b) in &h.ineq {
        let mut r = a.clone();
        r.push(-b);
        rows.push(r);
    }
    for (e, f) in &h.eq {
        let mut r = e.clone();
        r.push(-f);
        rows.push(r.clone());
        rows.push(scale(&r, -1.0));
    }
    let rays = match cone_rays(&rows, big) {
        Ok(r) => r,
        Err(dir) => {
            if !feasible(h)? {
                return Err(Error::EmptyIntersection);
            }
            return Err(Error::UnboundedFace {
                ray: dir[..d].to_vec(),
            });
        }
    };
    let mut verts: Vec<Vec<f64>> = Vec::new();
    let mut recession = None;
    for r in &rays {
        let t = r[d];
        if t > ZERO_TOL {
            let v: Vec<f64> = r[..d].iter().map(|x| x / t).collect();
            if !verts
                .iter()
                .any(|u| u.iter().zip(&v).all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + b.abs())))
            {
                verts.push(v);
            }
        } else if recession.is_none() {
            recession = Some(r[..d].to_vec());
        }
    }
    if verts.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    if let Some(ray) = recession {
        return Err(Error::UnboundedFace { ray });
    }
    Ok(verts)
}
