//! Steiner point of a polytope: the normal-cone-angle weighted average of its vertices.
//! Exact for affine dimension ≤ 2, Monte-Carlo over random directions above that.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::polytope::VPolytope;
use crate::linalg::{self, dot, sub};

pub const DEFAULT_SAMPLES: usize = 65_536;
const BLOCK: usize = 1024;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteinerConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SteinerConfig {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteinerMethod {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinerPoint {
    pub point: Vec<f64>,
    /// Per-coordinate standard error; zero on exact paths.
    pub error: Vec<f64>,
    pub method: SteinerMethod,
}

impl SteinerPoint {
    pub fn max_error(&self) -> f64 {
        self.error.iter().cloned().fold(0.0, f64::max)
    }
}

fn combine(p: &VPolytope, weights: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.dim()];
    for (w, v) in weights.iter().zip(p.vertices()) {
        for (o, x) in out.iter_mut().zip(v) {
            *o += w * x;
        }
    }
    out
}

/// Centroid, orthonormal basis of the affine hull, and vertex coordinates in that basis.
fn intrinsic(p: &VPolytope) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let (c, basis) = linalg::affine_hull(p.vertices(), 1e-10);
    let z: Vec<Vec<f64>> = p
        .vertices()
        .iter()
        .map(|v| {
            let diff = sub(v, &c);
            basis.iter().map(|u| dot(u, &diff)).collect()
        })
        .collect();
    (c, basis, z)
}

/// Steiner point, computed intrinsically in the affine hull of `p`.
pub fn steiner_point(p: &VPolytope, cfg: &SteinerConfig) -> SteinerPoint {
    let d = p.dim();
    let exact = |point| SteinerPoint {
        point,
        error: vec![0.0; d],
        method: SteinerMethod::Exact,
    };
    if p.len() == 1 {
        return exact(p.vertices()[0].clone());
    }
    let (c, basis, z) = intrinsic(p);
    match basis.len() {
        0 => exact(c),
        1 => {
            let lo = (0..z.len()).min_by(|&a, &b| z[a][0].total_cmp(&z[b][0])).unwrap();
            let hi = (0..z.len()).max_by(|&a, &b| z[a][0].total_cmp(&z[b][0])).unwrap();
            let mut w = vec![0.0; z.len()];
            w[lo] += 0.5;
            w[hi] += 0.5;
            exact(combine(p, &w))
        }
        2 => exact(combine(p, &polygon_weights(&z))),
        k => monte_carlo(p, &z, k, cfg),
    }
}

/// Monte-Carlo estimate on any affine dimension, bypassing the exact low-dimensional paths.
pub fn steiner_point_monte_carlo(p: &VPolytope, cfg: &SteinerConfig) -> SteinerPoint {
    let (c, basis, z) = intrinsic(p);
    if basis.is_empty() {
        return SteinerPoint {
            point: c,
            error: vec![0.0; p.dim()],
            method: SteinerMethod::Exact,
        };
    }
    monte_carlo(p, &z, basis.len(), cfg)
}

/// Exterior angle / 2π for each vertex of a convex polygon given in the plane.
pub fn polygon_weights(z: &[Vec<f64>]) -> Vec<f64> {
    let m = z.len();
    let cx = z.iter().map(|p| p[0]).sum::<f64>() / m as f64;
    let cy = z.iter().map(|p| p[1]).sum::<f64>() / m as f64;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        let ta = (z[a][1] - cy).atan2(z[a][0] - cx);
        let tb = (z[b][1] - cy).atan2(z[b][0] - cx);
        ta.total_cmp(&tb)
    });
    let mut w = vec![0.0; m];
    for k in 0..m {
        let prev = &z[order[(k + m - 1) % m]];
        let cur = &z[order[k]];
        let next = &z[order[(k + 1) % m]];
        let e1 = [cur[0] - prev[0], cur[1] - prev[1]];
        let e2 = [next[0] - cur[0], next[1] - cur[1]];
        let turn = (e1[0] * e2[1] - e1[1] * e2[0]).atan2(e1[0] * e2[0] + e1[1] * e2[1]);
        w[order[k]] = turn / (2.0 * std::f64::consts::PI);
    }
    w
}

fn monte_carlo(p: &VPolytope, z: &[Vec<f64>], k: usize, cfg: &SteinerConfig) -> SteinerPoint {
    let samples = cfg.samples.max(2);
    let blocks = samples.div_ceil(BLOCK);
    let counts: Vec<Vec<u64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b as u64);
            let mut counts = vec![0u64; z.len()];
            let n = BLOCK.min(samples - b * BLOCK);
            for _ in 0..n {
                loop {
                    let dir: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let mut best = f64::NEG_INFINITY;
                    let mut second = f64::NEG_INFINITY;
                    let mut arg = 0;
                    for (i, zi) in z.iter().enumerate() {
                        let v = dot(zi, &dir);
                        if v > best {
                            second = best;
                            best = v;
                            arg = i;
                        } else if v > second {
                            second = v;
                        }
                    }
                    if best - second > TIE_TOL * (1.0 + best.abs()) {
                        counts[arg] += 1;
                        break;
                    }
                }
            }
            counts
        })
        .collect();
    let mut total = vec![0u64; z.len()];
    for c in &counts {
        for (t, x) in total.iter_mut().zip(c) {
            *t += x;
        }
    }
    let n = samples as f64;
    let weights: Vec<f64> = total.iter().map(|&c| c as f64 / n).collect();
    let point = combine(p, &weights);
    let error = (0..p.dim())
        .map(|j| {
            let var: f64 = weights
                .iter()
                .zip(p.vertices())
                .map(|(w, v)| w * (v[j] - point[j]).powi(2))
                .sum();
            (var * n / (n - 1.0) / n).sqrt()
        })
        .collect();
    SteinerPoint {
        point,
        error,
        method: SteinerMethod::MonteCarlo,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_midpoint_in_3d() {
        let p = VPolytope::new(vec![vec![1.5, 1.0, 0.5], vec![4.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]])
            .unwrap();
        let s = steiner_point(&p, &SteinerConfig::default());
        let expect = [17.0 / 12.0, 7.0 / 6.0, 5.0 / 12.0];
        for (a, b) in s.point.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(s.method, SteinerMethod::Exact);
    }

    #[test]
    fn singleton_and_square() {
        let q = vec![0.3, -2.0, 7.0];
        let s = steiner_point(&VPolytope::point(q.clone()), &SteinerConfig::default());
        assert_eq!(s.point, q);
        let sq = VPolytope::new(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        let s = steiner_point(&sq, &SteinerConfig::default());
        assert!((s.point[0] - 0.5).abs() < 1e-12 && (s.point[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn triangle_weights_sum_to_one() {
        let w = polygon_weights(&[vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 1.0]]);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // right angle at origin: exterior angle π/2
        assert!((w[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn cube_mc_is_deterministic_and_centered() {
        let mut v = Vec::new();
        for i in 0..8 {
            v.push(vec![(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]);
        }
        let p = VPolytope::new(v).unwrap();
        let cfg = SteinerConfig::default();
        let a = steiner_point(&p, &cfg);
        let b = steiner_point(&p, &cfg);
        assert_eq!(a, b);
        for j in 0..3 {
            assert!((a.point[j] - 0.5).abs() < 4.0 * a.error[j]);
        }
    }
}
