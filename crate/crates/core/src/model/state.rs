use crate::spectral::{ops, Grid, ScalarField, VectorField};

use super::{Branch, ModelError, Params};

/// Density, velocity and electric field `e = grad Phi`.
#[derive(Clone, Debug)]
pub struct PrimitiveState {
    pub n: ScalarField,
    pub u: VectorField,
    pub e: VectorField,
}

/// Symmetrized variables: `m` (or `n~` when isothermal), velocity and field.
#[derive(Clone, Debug)]
pub struct SymmetricState {
    pub m: ScalarField,
    pub u: VectorField,
    pub e: VectorField,
}

/// Right-hand side of the symmetrized system at one state.
#[derive(Clone, Debug)]
pub struct Tendencies {
    pub m_t: ScalarField,
    pub u_t: VectorField,
    pub e_t: VectorField,
}

#[derive(Clone, Debug)]
pub struct PrimitiveTendencies {
    pub n_t: ScalarField,
    pub u_t: VectorField,
    pub e_t: VectorField,
}

impl SymmetricState {
    pub fn equilibrium(grid: &Grid) -> Self {
        Self {
            m: ScalarField::zeros(grid),
            u: VectorField::zeros(grid),
            e: VectorField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.m.grid()
    }
}

impl PrimitiveState {
    pub fn equilibrium(grid: &Grid, params: &Params) -> Self {
        Self {
            n: ScalarField::constant(grid, params.nbar),
            u: VectorField::zeros(grid),
            e: VectorField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.n.grid()
    }
}

/// Flat views used by the integrator: scalar, then velocity, then field.
macro_rules! bundle {
    ($ty:ty, $s:ident, $u:ident, $e:ident) => {
        impl crate::integrator::FieldBundle for $ty {
            fn components(&self) -> Vec<&ScalarField> {
                let mut out = vec![&self.$s];
                out.extend(self.$u.components());
                out.extend(self.$e.components());
                out
            }

            fn components_mut(&mut self) -> Vec<&mut ScalarField> {
                let mut out = vec![&mut self.$s];
                out.extend(self.$u.components_mut());
                out.extend(self.$e.components_mut());
                out
            }
        }
    };
}

bundle!(SymmetricState, m, u, e);
bundle!(PrimitiveState, n, u, e);
bundle!(Tendencies, m_t, u_t, e_t);
bundle!(PrimitiveTendencies, n_t, u_t, e_t);

pub(crate) fn check_density(n: &ScalarField) -> Result<(), ModelError> {
    let (index, value) = n.argmin();
    if value > 0.0 {
        Ok(())
    } else {
        Err(ModelError::NonPositiveDensity { index, value })
    }
}

pub(crate) fn check_domain(m: &ScalarField, params: &Params) -> Result<(), ModelError> {
    if params.branch() == Branch::Isothermal {
        return Ok(());
    }
    let (index, value) = m.map(|v| params.domain_margin(v)).argmin();
    if value > 0.0 {
        Ok(())
    } else {
        Err(ModelError::DomainViolation { index, value })
    }
}

/// Pointwise `psi(n) = sqrt(p'(n))`.
pub fn sound_speed(n: &ScalarField, params: &Params) -> Result<ScalarField, ModelError> {
    check_density(n)?;
    Ok(n.map(|v| params.sound_speed(v)))
}

/// `h(m) = n(m) - nbar` on either branch.
pub fn h_of(m: &ScalarField, params: &Params) -> Result<ScalarField, ModelError> {
    check_domain(m, params)?;
    Ok(m.map(|v| params.h(v)))
}

pub fn to_symmetric(state: &PrimitiveState, params: &Params) -> Result<SymmetricState, ModelError> {
    check_density(&state.n)?;
    Ok(SymmetricState {
        m: state.n.map(|v| params.symmetric(v)),
        u: state.u.clone(),
        e: state.e.clone(),
    })
}

pub fn from_symmetric(state: &SymmetricState, params: &Params) -> Result<PrimitiveState, ModelError> {
    check_domain(&state.m, params)?;
    Ok(PrimitiveState {
        n: state.m.map(|v| params.density(v)),
        u: state.u.clone(),
        e: state.e.clone(),
    })
}

/// `||div e - h(m)||_2 / (1 + ||h(m)||_2)`.
pub fn constraint_residual(state: &SymmetricState, params: &Params) -> f64 {
    let h = state.m.map(|v| params.h(v));
    let div = ops::divergence(&state.e);
    div.sub(&h).l2_norm() / (1.0 + h.l2_norm())
}

/// Source of the density perturbation in [`InitialFields`].
#[derive(Clone, Debug)]
pub enum DensityInit {
    /// Symmetric variable. It is shifted by a constant so that the implied
    /// density perturbation has zero mean.
    Symmetric(ScalarField),
    /// Density `n`; `n - nbar` must already have zero mean.
    Density(ScalarField),
}

#[derive(Clone, Debug)]
pub struct InitialFields {
    pub density: DensityInit,
    pub u: VectorField,
}

/// Constant `s` with `mean(h(m - s)) = 0`, by Newton iteration.
fn neutralizing_shift(m: &ScalarField, params: &Params) -> Result<f64, ModelError> {
    let mut shift = 0.0;
    for _ in 0..50 {
        let (mut f, mut df) = (0.0, 0.0);
        for &v in m.samples() {
            f += params.h(v - shift);
            df += params.h_prime(v - shift);
        }
        let step = f / df;
        shift += step;
        if !shift.is_finite() {
            break;
        }
        if step.abs() <= 1e-16 * (1.0 + shift.abs()) {
            return Ok(shift);
        }
    }
    if shift.is_finite() {
        Ok(shift)
    } else {
        Err(ModelError::InvalidInit(
            "could not make the density perturbation mean-free".into(),
        ))
    }
}

/// Builds a state with `e = grad Delta^{-1} (n - nbar)`, so that the
/// constraint `div e = h(m)` holds initially.
pub fn compatible_init_fields(
    init: &InitialFields,
    params: &Params,
) -> Result<SymmetricState, ModelError> {
    params.validate()?;
    let (m, rho) = match &init.density {
        DensityInit::Symmetric(m) => {
            check_domain(m, params)?;
            let shift = neutralizing_shift(m, params)?;
            let m = if shift == 0.0 {
                m.clone()
            } else {
                m.map(|v| v - shift)
            };
            let rho = h_of(&m, params)?;
            (m, rho)
        }
        DensityInit::Density(n) => {
            check_density(n)?;
            let rho = n.map(|v| v - params.nbar);
            let m = n.map(|v| params.symmetric(v));
            (m, rho)
        }
    };
    m.check_grid(init.u.grid())?;
    let e = ops::poisson_gradient(&rho)?;
    let state = SymmetricState {
        m,
        u: init.u.clone(),
        e,
    };
    check_domain(&state.m, params)?;
    Ok(state)
}
