//! Vertex-represented polytopes, Steiner points and extended gradients.

pub mod dd;
pub mod polytope;
pub mod pwl;
pub mod steiner;

pub use dd::HRep;
pub use polytope::{
    dedup, distance_to_hull, extreme_filter, hausdorff, hull_contains, hull_union, intersect,
    minkowski_sum, same_vertex_set, sorted, VPolytope,
};
pub use pwl::{extended_gradient, PwlConvexFunction};
pub use steiner::{steiner_point, steiner_point_monte_carlo, SteinerConfig, SteinerMethod, SteinerPoint};
