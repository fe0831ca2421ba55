//! A small, self-contained conic optimizer.
//!
//! Problems are `maximize c^T x` subject to `A x = b` with every variable in a
//! free, nonnegative or 3-dimensional rotated second-order cone
//! `{(a, b, c) : 2ab >= c^2, a, b >= 0}`. [`solve`] runs a homogeneous
//! self-dual interior-point method; [`solve_lp_basic`] runs a Bland-rule
//! simplex when a vertex solution is needed; [`export_cbf`] writes the
//! Conic Benchmark Format for cross-checking with other solvers.
//!
//! ```
//! use sonc_conic::{solve, ConicProblem, SolverSettings, SolveStatus};
//!
//! let mut p = ConicProblem::new();
//! let a = p.add_rotated_soc3();
//! p.add_row([(a, 1.0)], 1.0);
//! p.add_row([(a + 1, 1.0)], 1.0);
//! p.set_objective(a + 2, 1.0);
//! let r = solve(&p, &SolverSettings::default()).unwrap();
//! assert_eq!(r.status, SolveStatus::Optimal);
//! assert!((r.objective - 2f64.sqrt()).abs() < 1e-8);
//! ```

mod cbf;
mod cone;
mod ipm;
mod linalg;
mod problem;
mod simplex;
mod solver;

pub use cbf::{export_cbf, parse_cbf};
pub use problem::{ConeKind, ConeSpec, ConicProblem, SolveResult, SolveStatus};
pub use simplex::solve_lp_basic;
pub use solver::{solve, SolverSettings};

#[derive(Debug, thiserror::Error)]
pub enum ConicError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("CBF line {line}: {msg}")]
    Cbf { line: usize, msg: String },
}
