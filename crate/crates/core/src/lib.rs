//! Subsurface phase design for multi-frequency multi-user RIS uplinks.

pub mod analysis;
pub mod channel;
pub mod numerics;
pub mod phase_design;
pub mod simulate;

pub type Complex64 = num_complex::Complex<f64>;
pub type CMatrix = numerics::ComplexMatrix<f64>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
