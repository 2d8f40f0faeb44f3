//! Small dense helpers over `Vec<f64>` rows. Anything heavier goes through nalgebra.

use nalgebra::{DMatrix, DVector};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Row rank by Gaussian elimination with partial pivoting. A pivot counts when it
/// exceeds `rel_tol` times the largest row norm of the input.
pub fn rank(rows: &[Vec<f64>], rel_tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let scale = rows.iter().map(|r| norm(r)).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let tol = rel_tol * scale;
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let (piv, val) = (r..m.len())
            .map(|i| (i, m[i][c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tol {
            continue;
        }
        m.swap(r, piv);
        for i in (r + 1)..m.len() {
            let f = m[i][c] / m[r][c];
            if f != 0.0 {
                for k in c..cols {
                    m[i][k] -= f * m[r][k];
                }
            }
        }
        r += 1;
    }
    r
}

/// Orthonormal basis (as rows) of the span of `rows`, via SVD with a relative cutoff.
pub fn span_basis(rows: &[Vec<f64>], dim: usize, rel_tol: f64) -> Vec<Vec<f64>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_fn(dim, rows.len(), |i, j| rows[j][i]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Vec::new();
    }
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > rel_tol * smax.max(1.0))
        .map(|(k, _)| u.column(k).iter().cloned().collect())
        .collect()
}

/// Orthonormal basis of the orthogonal complement of `basis` (rows, orthonormal) in R^dim.
pub fn complement_basis(basis: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = basis.to_vec();
    let mut comp = Vec::new();
    for e in 0..dim {
        let mut v = vec![0.0; dim];
        v[e] = 1.0;
        for b in &out {
            let p = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= p * bi;
            }
        }
        let n = norm(&v);
        if n > 1e-8 {
            let v = scale(&v, 1.0 / n);
            out.push(v.clone());
            comp.push(v);
        }
        if out.len() == dim {
            break;
        }
    }
    comp
}

/// Affine hull of a point set: (anchor point, orthonormal direction basis).
pub fn affine_hull(points: &[Vec<f64>], rel_tol: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let dim = points[0].len();
    let anchor: Vec<f64> = (0..dim)
        .map(|i| points.iter().map(|p| p[i]).sum::<f64>() / points.len() as f64)
        .collect();
    let diffs: Vec<Vec<f64>> = points.iter().map(|p| sub(p, &anchor)).collect();
    let spread = diffs.iter().map(|d| norm(d)).fold(0.0, f64::max);
    if spread <= 1e-12 * (1.0 + norm(&anchor)) {
        return (anchor, Vec::new());
    }
    let basis = span_basis(&diffs, dim, rel_tol);
    (anchor, basis)
}

/// Least-squares fit of `target` by the columns `cols`; returns (coefficients, residual norm).
pub fn least_squares(cols: &[Vec<f64>], target: &[f64]) -> (Vec<f64>, f64) {
    if cols.is_empty() {
        return (Vec::new(), norm(target));
    }
    let dim = target.len();
    let a = DMatrix::from_fn(dim, cols.len(), |i, j| cols[j][i]);
    let b = DVector::from_column_slice(target);
    let svd = a.clone().svd(true, true);
    let coef = svd.solve(&b, 1e-12).expect("svd with u and v");
    let resid = (&a * &coef - b).norm();
    (coef.iter().cloned().collect(), resid)
}

/// Solve a square system; `None` when singular.
pub fn solve_square(rows: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let lu = a.lu();
    lu.solve(&DVector::from_column_slice(rhs))
        .map(|x| x.iter().cloned().collect())
}

/// Greedily pick indices of linearly independent rows, in order.
pub fn independent_subset(rows: &[Vec<f64>], rel_tol: f64) -> Vec<usize> {
    let mut picked: Vec<usize> = Vec::new();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let mut v = r.clone();
        for b in &basis {
            let p = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= p * bi;
            }
        }
        let n = norm(&v);
        if n > rel_tol * norm(r).max(1e-300) && n > 0.0 {
            basis.push(scale(&v, 1.0 / n));
            picked.push(i);
        }
    }
    picked
}
