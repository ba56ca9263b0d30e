//! Dense complex linear algebra, special functions and reproducible
//! Gaussian sampling, generic over the floating-point type.
//!
//! Everything in here is scalar-agnostic: the kernels are written against
//! [`Real`], which is implemented for `f32` and `f64`. The rest of the crate
//! works in `f64` through the aliases exported at the crate root.

mod eigen;
mod gamma;
mod hypergeometric;
mod matrix;
mod rng;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};
use thiserror::Error;

pub use eigen::{hermitian_eigen, leading_singular_pair, psd_sqrt, HermitianEigen, SingularPair};
pub use gamma::gamma;
pub use hypergeometric::{gauss_2f1, GAUSS_2F1_TERM_CAP, GAUSS_2F1_TOL};
pub use matrix::{cholesky_solve, dot, norm, norm_sqr, ComplexMatrix};
pub use rng::{sample_cn, uniform_phase, RngStream};

/// Floating-point scalar the numerical kernels are generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is indefinite (eigenvalue {eigenvalue:e} below clip tolerance)")]
    IndefiniteMatrix { eigenvalue: f64 },
    #[error("matrix is zero")]
    ZeroMatrix,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("hypergeometric series did not reach tolerance within {terms} terms")]
    SeriesDiverged { terms: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}
