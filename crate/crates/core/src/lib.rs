//! Sparse generalized Fourier series by collocation and the Dantzig selector,
//! and Gaussian-Hermite moment invariants built from the recovered
//! coefficients.

pub mod basis;
pub mod collocation;
pub mod dantzig;
pub mod error;
pub mod experiments;
pub mod glyphs;
pub mod image;
pub mod indexsets;
pub mod moments;
pub mod quadrature;
pub mod series;

pub use error::{Error, Result};
