//! Pseudo-spectral laboratory for the damped Euler-Poisson system on the
//! periodic box: dyadic (Littlewood-Paley) analysis, symmetrized and
//! primitive right-hand sides, RK4 time stepping, a linear spectral oracle
//! and decay diagnostics.

pub mod diagnostics;
pub mod integrator;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod spectral;

pub use diagnostics::{
    decay_fit, q_functional, record_run, vorticity_norm, RateFit, RunRecord, Sample, Series,
};
pub use integrator::{
    evolve, step, FieldBundle, IntegratorError, Observer, PrimitiveSystem, Scheme, StepControl,
    SymmetricSystem, System,
};
pub use lp::{build_cutoffs, BesovIndex, DyadicCutoffs, LpError};
pub use model::{
    compatible_init, Branch, EMode, InitSpec, ModeSpec, ModeTarget, ModelError, Params,
    PrimitiveState, RandomSpec, RhsOptions, SymmetricState, Tendencies,
};
pub use oracle::{predicted_decay_rate, Excitation, OracleError};
pub use spectral::{Grid, ScalarField, SpectralError, Spectrum, VectorField};
