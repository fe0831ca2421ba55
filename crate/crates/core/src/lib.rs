//! Certified lower bounds for sparse polynomials through sums of nonnegative
//! circuit polynomials (SONC).
//!
//! The pipeline in [`pipeline::sonc_lower_bound`] partitions the support,
//! passes to the PN-polynomial, covers the inner terms with simplices, builds
//! a rational mediated set for every simplex, solves the resulting
//! second-order cone program and returns a sum of binomial squares that is
//! checked exactly by [`certify::verify_exact`].
//!
//! ```
//! use sonc_core::{parse_poly, pipeline::{sonc_lower_bound, BoundConfig}};
//!
//! let f = parse_poly("x1^4*x2^2 + x1^2*x2^4 + 1 - 3*x1^2*x2^2", 2).unwrap();
//! let out = sonc_lower_bound(&f, &BoundConfig::default()).unwrap();
//! assert!(out.xi.abs() < 1e-6);
//! ```

pub mod bench;
pub mod certificate;
pub mod certify;
pub mod cover;
pub mod exponent;
pub mod local;
pub mod medseq;
pub mod pipeline;
pub mod poly;
pub mod qlin;
pub mod socp;

pub use exponent::{Exponent, Rational};
pub use poly::{parse_poly, SignMap, SparsePoly, SupportPartition};

#[derive(Debug, thiserror::Error)]
pub enum SoncError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("exponent is not an integer vector")]
    NonIntegerExponent,
    #[error("exponent too large to evaluate")]
    ExponentTooLarge,
    #[error("negative base under a fractional power")]
    NegativeBase,
    #[error("not a circuit: {0}")]
    NotCircuit(String),
    #[error("circuit is not nonnegative (d exceeds the circuit number)")]
    NotNonnegative,
    #[error("invalid arguments: {0}")]
    Invalid(String),
    #[error("point is not on the open segment between the endpoints")]
    NotOnSegment,
    #[error("exhaustive search limit exceeded (p = {p}, limit {limit})")]
    SearchLimit { p: u64, limit: u64 },
    #[error("exponent denominators exceed the configured bound ({0})")]
    DenominatorOverflow(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("corrupt solver output: {0}")]
    CorruptSolution(String),
    #[error(transparent)]
    Conic(#[from] sonc_conic::ConicError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
