use serde::{Deserialize, Serialize};

use super::polytope::{extreme_filter, VPolytope, ACTIVE_TOL};
use super::steiner::{steiner_point, SteinerConfig, SteinerPoint};
use crate::error::{check_len, Error, Result};
use crate::linalg::dot;

/// `f(Y) = max_i (gᵢ·Y + cᵢ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PwlConvexFunction {
    pieces: Vec<(Vec<f64>, f64)>,
    dim: usize,
}

impl PwlConvexFunction {
    pub fn new(pieces: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let first = pieces.first().ok_or(Error::Empty("piecewise-linear pieces"))?;
        let dim = first.0.len();
        for (g, _) in &pieces {
            check_len(dim, g.len())?;
        }
        Ok(Self { pieces, dim })
    }

    /// Positively homogeneous case: all intercepts zero.
    pub fn linear(gradients: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(gradients.into_iter().map(|g| (g, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[(Vec<f64>, f64)] {
        &self.pieces
    }

    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        check_len(self.dim, y.len())?;
        Ok(self
            .pieces
            .iter()
            .map(|(g, c)| dot(g, y) + c)
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Indices of pieces within the relative activity tolerance of the max.
    pub fn active(&self, y: &[f64]) -> Result<Vec<usize>> {
        let best = self.eval(y)?;
        let tol = ACTIVE_TOL * (1.0 + best.abs());
        Ok(self
            .pieces
            .iter()
            .enumerate()
            .filter(|(_, (g, c))| dot(g, y) + c >= best - tol)
            .map(|(i, _)| i)
            .collect())
    }

    /// ∂f(Y) as the hull of active gradients.
    pub fn subdifferential(&self, y: &[f64]) -> Result<VPolytope> {
        let grads: Vec<Vec<f64>> = self
            .active(y)?
            .into_iter()
            .map(|i| self.pieces[i].0.clone())
            .collect();
        extreme_filter(&grads)
    }

    /// First piece with a non-zero intercept, if any.
    pub fn check_homogeneous(&self) -> Result<()> {
        match self.pieces.iter().position(|(_, c)| *c != 0.0) {
            Some(piece) => Err(Error::NonHomogeneous {
                piece,
                intercept: self.pieces[piece].1,
            }),
            None => Ok(()),
        }
    }
}

/// Steiner point of the subdifferential at `y`.
pub fn extended_gradient(
    f: &PwlConvexFunction,
    y: &[f64],
    cfg: &SteinerConfig,
) -> Result<SteinerPoint> {
    Ok(steiner_point(&f.subdifferential(y)?, cfg))
}
