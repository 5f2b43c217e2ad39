//! Fourier-spectral analysis of differential complexes `d_t + c(t, D_x)∧`
//! on the torus `T^{n+N}`.
//!
//! Everything algebraic is generic over [`Scalar`]: use [`C64`] for scale and
//! [`GaussianRational`] when equalities must hold exactly.

pub mod cli;
pub mod diophantine;
pub mod error;
pub mod forms;
pub mod normal_form;
pub mod scalar;
pub mod spectral;
pub mod symbols;
pub mod wedge;

use num_complex::Complex;
use num_rational::BigRational;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar, Tolerance, Tolerances};

pub type C64 = Complex<f64>;
pub type C32 = Complex<f32>;
/// Exact complex rationals `a + ib`, `a, b ∈ ℚ`.
pub type GaussianRational = Complex<BigRational>;

pub type ConstPForm64 = forms::ConstPForm<C64>;
pub type ConstPFormQ = forms::ConstPForm<GaussianRational>;
pub type TrigPForm64 = forms::TrigPForm<C64>;
pub type TrigPFormQ = forms::TrigPForm<GaussianRational>;
