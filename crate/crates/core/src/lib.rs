//! Computable finite models of subdiagonal algebras.
//!
//! Two concrete pairs `(M, A)` are supported: the upper-triangular nest algebra
//! inside `M_n`, and matrix-valued analytic trigonometric polynomials inside
//! `L∞(T; M_d)`. On top of them the crate provides Fuglede–Kadison determinants,
//! outer (spectral) factorization, the past–future angle `ρ`, distance to the
//! algebra, positivity certificates, Toeplitz/Hankel operators and the circle
//! weight diagnostics (A₂, Treil–Volberg, conjugate function).

pub mod angle;
pub mod classical;
pub mod error;
pub mod factor;
pub mod fft;
pub mod models;
pub mod opcore;
pub mod toeplitz;

pub use error::{Error, Result};
pub use models::{ModelElement, SubdiagonalModel};
pub use opcore::{CMat, C64};
