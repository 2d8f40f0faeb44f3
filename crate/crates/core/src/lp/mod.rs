//! Linear programming: a self-contained simplex solver and optimal-face extraction.

pub mod face;
pub mod simplex;

pub use face::{always_active_rows, optimal_face};
pub use simplex::{solve, solve_optimal, Certificate, LinearProgram, LpSolution, LpStatus};
