use crate::error::{Error, Result};
use crate::geometry::dd::{self, HRep};
use crate::geometry::{extreme_filter, VPolytope};
use crate::lp::simplex::{solve, LinearProgram, LpSolution, LpStatus, FEAS_TOL};

pub const FACE_MAX_DIM: usize = 9;

/// The set of optimal points of `lp`, projected onto `coords`.
///
/// Rows carrying a strictly positive multiplier are tight in every optimum, so they
/// become equalities; the objective is pinned at its optimal value.
pub fn optimal_face(lp: &LinearProgram, sol: &LpSolution, coords: &[usize]) -> Result<VPolytope> {
    if sol.status != LpStatus::Optimal {
        return Err(Error::InvalidParameter("optimal_face needs an optimal solution".into()));
    }
    let n = lp.vars();
    if n > FACE_MAX_DIM {
        return Err(Error::DimensionGuard {
            dim: n,
            max: FACE_MAX_DIM,
        });
    }
    let mut h = face_hrep(lp, sol);
    for (j, &nn) in lp.nonneg.iter().enumerate() {
        if nn {
            let mut r = vec![0.0; n];
            r[j] = -1.0;
            h.ineq.push((r, 0.0));
        }
    }
    let verts = match dd::vertices(&h) {
        Ok(v) => v,
        Err(Error::UnboundedFace { ray }) => {
            return Err(Error::UnboundedFace {
                ray: coords.iter().map(|&j| ray[j]).collect(),
            })
        }
        Err(Error::EmptyIntersection) => {
            // the optimum itself lies on the face; an empty result is numerical noise
            vec![sol.x.clone()]
        }
        Err(e) => return Err(e),
    };
    let projected: Vec<Vec<f64>> = verts
        .iter()
        .map(|v| coords.iter().map(|&j| v[j]).collect())
        .collect();
    extreme_filter(&projected)
}

fn face_hrep(lp: &LinearProgram, sol: &LpSolution) -> HRep {
    let n = lp.vars();
    let mut h = HRep::new(n);
    for (i, (a, b)) in lp.a_ub.iter().zip(&lp.b_ub).enumerate() {
        if sol.ineq_duals[i] > FEAS_TOL {
            h.eq.push((a.clone(), *b));
        } else {
            h.ineq.push((a.clone(), *b));
        }
    }
    for (e, f) in lp.a_eq.iter().zip(&lp.b_eq) {
        h.eq.push((e.clone(), *f));
    }
    h.ineq.push((lp.c.clone(), sol.value));
    h
}

/// Inequality rows tight at every optimum: rows with a positive multiplier, plus rows
/// whose slack cannot be made positive over the optimal face (one LP per candidate).
pub fn always_active_rows(lp: &LinearProgram, sol: &LpSolution) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for &i in &sol.active_rows {
        if sol.ineq_duals[i] > FEAS_TOL {
            out.push(i);
            continue;
        }
        // maximize slack bᵢ − aᵢx over the optimal face, i.e. minimize aᵢx
        let mut face = lp.clone();
        face.c = lp.a_ub[i].clone();
        face.le(lp.c.clone(), sol.value + FEAS_TOL * (1.0 + sol.value.abs()));
        let s = solve(&face)?;
        match s.status {
            LpStatus::Optimal if lp.b_ub[i] - s.value <= FEAS_TOL * (1.0 + lp.b_ub[i].abs()) => {
                out.push(i)
            }
            _ => {}
        }
    }
    Ok(out)
}
