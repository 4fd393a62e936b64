//! Numerical toolkit for multivariate normal approximation of sums of
//! bounded decomposable random vectors.
//!
//! The crate provides:
//!
//! - [`linalg`]: dense symmetric-matrix algebra at small dimension
//!   (Jacobi eigensolver, `Σ^{-1/2}`, Cholesky);
//! - [`geometry`]: convex test sets (half-spaces, balls, boxes) with exact
//!   distances, smoothed indicators and Gaussian probabilities;
//! - [`decomposition`]: dependency models built from independent randomness
//!   sources, with first/second/third-order neighborhoods and the structure
//!   parameters `(β, n₁, n₂, n₃)`;
//! - [`bound`]: the error-bound functionals in terms of those parameters;
//! - [`graphmodel`]: monochromatic edge counts of a randomly colored regular
//!   graph, with exact moments and standardized sampling;
//! - [`distance`]: empirical lower bounds on the convex-set distance to the
//!   standard Gaussian, with confidence intervals and rate fitting;
//! - [`steincheck`]: numerical verification of the smoothed Stein equation
//!   and the associated Gaussian integral inequalities.

pub mod bound;
pub mod decomposition;
pub mod distance;
pub mod error;
pub mod geometry;
pub mod graphmodel;
pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod steincheck;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
