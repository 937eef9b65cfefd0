//! Pseudo-spectral right-hand sides. Products are formed on the grid and
//! every tendency is passed through the dealias mask.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::spectral::ops::{gradient_spectra, poisson_gradient_unchecked, riesz_spectra};
use crate::spectral::{fields_from_spectra, prime_spectra, ScalarField, Spectrum, VectorField};

use super::state::{check_density, check_domain};
use super::{ModelError, Params, PrimitiveState, PrimitiveTendencies, SymmetricState, Tendencies};

/// How the electric field enters the velocity equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EMode {
    /// `e` is a state variable advanced by its own equation.
    #[default]
    Evolved,
    /// `e` is recomputed from the density by the Poisson solve.
    Projected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RhsOptions {
    /// Advection, quadratic terms and the nonlinear flux. When off, the
    /// system is linearized about equilibrium.
    pub nonlinear: bool,
    /// Include `-u/tau`. Integrating-factor schemes switch this off.
    pub relaxation: bool,
    pub e_mode: EMode,
}

impl Default for RhsOptions {
    fn default() -> Self {
        Self {
            nonlinear: true,
            relaxation: true,
            e_mode: EMode::Evolved,
        }
    }
}

impl RhsOptions {
    pub fn linear() -> Self {
        Self {
            nonlinear: false,
            ..Self::default()
        }
    }
}

/// `grad Delta^{-1} h(m)`, or `grad Delta^{-1} (c m)` for the linearized system.
pub fn projected_field(m: &ScalarField, params: &Params, opts: &RhsOptions) -> VectorField {
    let rho = if opts.nonlinear {
        m.map(|v| params.h(v))
    } else {
        m.scaled(params.c())
    };
    poisson_gradient_unchecked(&rho)
}

/// Gradients of every field in `fields`.
fn gradients(fields: &[&ScalarField]) -> Vec<Vec<ScalarField>> {
    prime_spectra(fields);
    let dim = fields[0].grid().dim();
    let specs: Vec<Spectrum> = fields
        .iter()
        .flat_map(|f| gradient_spectra(f.spectrum()))
        .collect();
    let mut flat = fields_from_spectra(specs).into_iter();
    (0..fields.len())
        .map(|_| flat.by_ref().take(dim).collect())
        .collect()
}

/// Masks `scalars`, and turns `fluxes` into `-grad Delta^{-1} div flux`.
fn finish(scalars: Vec<ScalarField>, fluxes: Vec<ScalarField>) -> (Vec<ScalarField>, Vec<ScalarField>) {
    let all: Vec<&ScalarField> = scalars.iter().chain(&fluxes).collect();
    prime_spectra(&all);
    let masked = |f: &ScalarField| {
        let mut s = f.spectrum().clone();
        s.apply_mask();
        s
    };
    let mut specs: Vec<Spectrum> = scalars.iter().map(masked).collect();
    let flux: Vec<Spectrum> = fluxes.iter().map(masked).collect();
    let refs: Vec<&Spectrum> = flux.iter().collect();
    for mut s in riesz_spectra(&refs) {
        for c in s.coeffs_mut() {
            *c = -*c;
        }
        specs.push(s);
    }
    let mut out = fields_from_spectra(specs);
    let e_t = out.split_off(scalars.len());
    (out, e_t)
}

fn vector(components: Vec<ScalarField>) -> VectorField {
    VectorField::new(components).expect("components share the grid")
}

pub fn rhs_symmetric(state: &SymmetricState, params: &Params) -> Result<Tendencies, ModelError> {
    rhs_symmetric_with(state, params, &RhsOptions::default())
}

/// Tendencies of the symmetrized system in `(m, u, e)`.
pub fn rhs_symmetric_with(
    state: &SymmetricState,
    params: &Params,
    opts: &RhsOptions,
) -> Result<Tendencies, ModelError> {
    let grid = state.grid().clone();
    state.m.check_grid(state.u.grid())?;
    state.m.check_grid(state.e.grid())?;
    check_domain(&state.m, params)?;
    let dim = grid.dim();
    let len = grid.len();
    let psi = params.psi_bar();
    let k = params.k();
    let relax = if opts.relaxation { 1.0 / params.tau } else { 0.0 };

    let e = match opts.e_mode {
        EMode::Evolved => Cow::Borrowed(&state.e),
        EMode::Projected => Cow::Owned(projected_field(&state.m, params, opts)),
    };
    let mut inputs = vec![&state.m];
    inputs.extend(state.u.components());
    let grads = gradients(&inputs);
    let m = state.m.samples();
    let u: Vec<&[f64]> = state.u.components().iter().map(|c| c.samples()).collect();
    let ev: Vec<&[f64]> = e.components().iter().map(|c| c.samples()).collect();
    let gm: Vec<&[f64]> = grads[0].iter().map(|g| g.samples()).collect();
    let gu: Vec<Vec<&[f64]>> = grads[1..]
        .iter()
        .map(|g| g.iter().map(|c| c.samples()).collect())
        .collect();

    let mut m_t = vec![0.0; len];
    let mut u_t = vec![vec![0.0; len]; dim];
    let mut flux = vec![vec![0.0; len]; dim];
    for i in 0..len {
        let div: f64 = (0..dim).map(|a| gu[a][a][i]).sum();
        m_t[i] = -psi * div;
        for a in 0..dim {
            u_t[a][i] = -psi * gm[a][i] - relax * u[a][i] + ev[a][i];
        }
        if opts.nonlinear {
            let adv_m: f64 = (0..dim).map(|b| u[b][i] * gm[b][i]).sum();
            m_t[i] -= adv_m + k * m[i] * div;
            let n = params.density(m[i]);
            for a in 0..dim {
                let adv: f64 = (0..dim).map(|b| u[b][i] * gu[a][b][i]).sum();
                u_t[a][i] -= adv + k * m[i] * gm[a][i];
                flux[a][i] = n * u[a][i];
            }
        } else {
            for a in 0..dim {
                flux[a][i] = params.nbar * u[a][i];
            }
        }
    }

    let to_field = |v: Vec<f64>| ScalarField::new(&grid, v).expect("length matches grid");
    let mut scalars = vec![to_field(m_t)];
    scalars.extend(u_t.into_iter().map(to_field));
    let (mut scalars, e_t) = finish(scalars, flux.into_iter().map(to_field).collect());
    let u_t = scalars.split_off(1);
    Ok(Tendencies {
        m_t: scalars.pop().expect("m_t"),
        u_t: vector(u_t),
        e_t: vector(e_t),
    })
}

pub fn rhs_primitive(
    state: &PrimitiveState,
    params: &Params,
) -> Result<PrimitiveTendencies, ModelError> {
    rhs_primitive_with(state, params, &RhsOptions::default())
}

/// Tendencies of the original system in `(n, u, e)`.
///
/// The pressure term is written as `grad p(n) / n = A gamma n^{gamma-2} grad n`.
pub fn rhs_primitive_with(
    state: &PrimitiveState,
    params: &Params,
    opts: &RhsOptions,
) -> Result<PrimitiveTendencies, ModelError> {
    let grid = state.grid().clone();
    state.n.check_grid(state.u.grid())?;
    state.n.check_grid(state.e.grid())?;
    check_density(&state.n)?;
    let dim = grid.dim();
    let len = grid.len();
    let nbar = params.nbar;
    let relax = if opts.relaxation { 1.0 / params.tau } else { 0.0 };
    let ag = params.a * params.gamma;
    let linear_pressure = ag * nbar.powf(params.gamma - 2.0);

    let e = match opts.e_mode {
        EMode::Evolved => Cow::Borrowed(&state.e),
        EMode::Projected => {
            let rho = state.n.map(|v| v - nbar);
            Cow::Owned(poisson_gradient_unchecked(&rho))
        }
    };
    let mut inputs = vec![&state.n];
    inputs.extend(state.u.components());
    let grads = gradients(&inputs);
    let n = state.n.samples();
    let u: Vec<&[f64]> = state.u.components().iter().map(|c| c.samples()).collect();
    let ev: Vec<&[f64]> = e.components().iter().map(|c| c.samples()).collect();
    let gn: Vec<&[f64]> = grads[0].iter().map(|g| g.samples()).collect();
    let gu: Vec<Vec<&[f64]>> = grads[1..]
        .iter()
        .map(|g| g.iter().map(|c| c.samples()).collect())
        .collect();

    let mut n_t = vec![0.0; len];
    let mut u_t = vec![vec![0.0; len]; dim];
    let mut flux = vec![vec![0.0; len]; dim];
    for i in 0..len {
        let div: f64 = (0..dim).map(|a| gu[a][a][i]).sum();
        if opts.nonlinear {
            let adv_n: f64 = (0..dim).map(|b| u[b][i] * gn[b][i]).sum();
            n_t[i] = -(adv_n + n[i] * div);
            let pressure = ag * n[i].powf(params.gamma - 2.0);
            for a in 0..dim {
                let adv: f64 = (0..dim).map(|b| u[b][i] * gu[a][b][i]).sum();
                u_t[a][i] = -adv - pressure * gn[a][i] + ev[a][i] - relax * u[a][i];
                flux[a][i] = n[i] * u[a][i];
            }
        } else {
            n_t[i] = -nbar * div;
            for a in 0..dim {
                u_t[a][i] = -linear_pressure * gn[a][i] + ev[a][i] - relax * u[a][i];
                flux[a][i] = nbar * u[a][i];
            }
        }
    }

    let to_field = |v: Vec<f64>| ScalarField::new(&grid, v).expect("length matches grid");
    let mut scalars = vec![to_field(n_t)];
    scalars.extend(u_t.into_iter().map(to_field));
    let (mut scalars, e_t) = finish(scalars, flux.into_iter().map(to_field).collect());
    let u_t = scalars.split_off(1);
    Ok(PrimitiveTendencies {
        n_t: scalars.pop().expect("n_t"),
        u_t: vector(u_t),
        e_t: vector(e_t),
    })
}
