//! Periodic grid, Fourier transforms and spectral operators.

mod field;
mod grid;
pub mod ops;
mod random;

use thiserror::Error;

pub use field::{fields_from_spectra, prime_spectra, ScalarField, Spectrum, VectorField};
pub use grid::{Grid, Shape, MIN_POINTS};
pub use random::random_masked_field;
pub use ops::{
    curl, dealias, divergence, forward_transform, gradient, inverse_transform, poisson_gradient,
    product, riesz_div_projection, Vorticity,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field lives on {found}, expected {expected}")]
    GridMismatch { expected: Shape, found: Shape },
    #[error("expected {expected} samples, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("expected {expected} vector components, got {found}")]
    ComponentCount { expected: usize, found: usize },
    #[error("density has mean {mean:e} (norm {norm:e}); no periodic potential exists")]
    NonZeroMean { mean: f64, norm: f64 },
}
