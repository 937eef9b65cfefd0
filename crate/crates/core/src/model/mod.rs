//! Physical parameters, state types, symmetrizing maps and right-hand sides.

mod init;
mod params;
mod rhs;
mod state;

use thiserror::Error;

use crate::spectral::SpectralError;

pub use init::{compatible_init, InitSpec, ModeSpec, ModeTarget, RandomSpec};
pub use params::{Branch, Params};
pub use rhs::{
    projected_field, rhs_primitive, rhs_primitive_with, rhs_symmetric, rhs_symmetric_with, EMode,
    RhsOptions,
};
pub use state::{
    compatible_init_fields, constraint_residual, from_symmetric, h_of, sound_speed, to_symmetric,
    DensityInit, InitialFields, PrimitiveState, PrimitiveTendencies, SymmetricState, Tendencies,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("density {value:e} at grid point {index} is not positive")]
    NonPositiveDensity { index: usize, value: f64 },
    #[error("symmetric variable leaves its domain at grid point {index} (margin {value:e})")]
    DomainViolation { index: usize, value: f64 },
    #[error("invalid initial data: {0}")]
    InvalidInit(String),
}
