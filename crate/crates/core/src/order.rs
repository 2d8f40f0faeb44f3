//! Concave order on a finite space.

use crate::error::{check_len, Error, Result};
use crate::probspace::FiniteProbSpace;

const MEAN_TOL: f64 = 1e-10;
const CMP_TOL: f64 = 1e-12;

/// Returns whether `X ⪰_c Y`: equal means and `E[u(X)] ≥ E[u(Y)]` for every concave u.
///
/// Uniform spaces compare sorted partial sums; general weights compare the integrated
/// lower tails `E[(t−X)⁺] ≤ E[(t−Y)⁺]` at every knot.
pub fn concave_order_leq(x: &[f64], y: &[f64], space: &FiniteProbSpace) -> Result<bool> {
    check_len(space.len(), x.len())?;
    check_len(space.len(), y.len())?;
    let (mx, my) = (space.mean(x)?, space.mean(y)?);
    if (mx - my).abs() > MEAN_TOL {
        return Err(Error::InvalidParameter(format!(
            "concave order needs equal means, got {mx} and {my}"
        )));
    }
    let scale = x
        .iter()
        .chain(y)
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = CMP_TOL * scale * x.len() as f64;
    if space.is_uniform() {
        let mut xs = x.to_vec();
        let mut ys = y.to_vec();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let (mut sx, mut sy) = (0.0, 0.0);
        for (a, b) in xs.iter().zip(&ys) {
            sx += a;
            sy += b;
            if sx < sy - tol {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    let w = space.weights();
    let tail = |v: &[f64], t: f64| -> f64 {
        v.iter().zip(w).map(|(vi, wi)| wi * (t - vi).max(0.0)).sum()
    };
    Ok(x.iter()
        .chain(y)
        .all(|&t| tail(x, t) <= tail(y, t) + tol))
}
