//! Steiner points: exact in low dimension, seeded Monte-Carlo otherwise.

use devport::geometry::{extended_gradient, steiner_point, PwlConvexFunction, SteinerConfig, VPolytope};

fn main() -> devport::Result<()> {
    let cfg = SteinerConfig::default();

    let triangle = VPolytope::new(vec![vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 1.0]])?;
    let s = steiner_point(&triangle, &cfg);
    println!("triangle: {:?} ({:?})", s.point, s.method);

    let simplex = VPolytope::new(vec![
        vec![0.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ])?;
    let s = steiner_point(&simplex, &SteinerConfig { samples: 1 << 16, seed: 11 });
    println!("tetrahedron: {:?} ± {:?}", s.point, s.error);

    let f = PwlConvexFunction::linear(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]])?;
    let g = extended_gradient(&f, &[0.8, 0.8], &cfg)?;
    println!("extended gradient of max(y₁, y₂, −y₁−y₂) at (0.8, 0.8): {:?}", g.point);
    Ok(())
}
