//! Explicit factorizations of the `n x n` lower-triangular all-ones
//! (prefix-sum) matrix `M_count`, the error norms that govern the Gaussian
//! matrix mechanism built on them, and the lower bounds they are measured
//! against.
//!
//! Three factorizations are provided: the matrix square root, its
//! column-normalized variant (NSR), and the group-algebra factorization
//! obtained from the circulant extension of `M_count`. For each one the
//! library evaluates
//!
//! * `MaxSE = ||L||_{2->inf} ||R||_{1->2}` (max row norm times max column norm),
//! * `MeanSE = ||L||_F ||R||_{1->2} / sqrt(n)`,
//!
//! both directly from the factors and from closed forms, together with the
//! residual `value - log(n)/pi` that every asymptotic constant refers to.

pub mod bounds;
pub mod error;
pub mod factorizations;
pub mod mechanism;
pub mod metrics;
pub mod report;
pub mod sequences;
pub mod structmat;
pub mod summation;

pub use error::{Error, Result};
pub use factorizations::{
    factorize, group_algebra_factorization, nsr_factorization, sqrt_factorization,
    verify_reconstruction, FactorMatrix, Factorization, Method,
};

pub use metrics::{ErrorReport, Metric};
pub use sequences::{constants, CoefficientTable, NamedConstants};
