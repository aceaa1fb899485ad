//! Exact and Monte Carlo computation of centered moments of low-lying-zero
//! statistics for split orthogonal families.
//!
//! The crate is organised bottom-up:
//!
//! * [`exactpoly`]: piecewise polynomials over `BigRational`, with exact convolution.
//! * [`testfn`]: test functions with compactly supported piecewise-polynomial transforms.
//! * [`moments`]: closed-form moment corrections and a floating-point quadrature oracle.
//! * [`sop`]: systems of parameters, t-classes and the binomial identities behind them.
//! * [`rmt`]: Haar sampling on SO(M) and empirical moments of the linear statistic.
//! * [`arith`]: Ramanujan, Gauss and Kloosterman sums.
//! * [`vanishing`]: Markov-type bounds on high order of vanishing.

pub mod arith;
pub mod exactpoly;
pub mod moments;
pub mod par;
pub mod quad;
pub mod rmt;
pub mod sop;
pub mod testfn;
pub mod vanishing;

pub use exactpoly::{PiecewisePoly, Rational};
pub use testfn::TestFunction;

/// Errors shared by every module.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two computations that must agree did not. Always a bug.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    /// A configured size cap was exceeded.
    #[error("resource limit: {0}")]
    Resource(String),
    /// Adaptive numerics did not reach the requested accuracy.
    #[error("tolerance not reached: {0}")]
    Tolerance(String),
    /// Floating-point linear algebra failed.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// Malformed textual input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
