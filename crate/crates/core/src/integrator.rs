//! Explicit fourth-order time stepping with CFL and domain control.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    rhs_primitive_with, rhs_symmetric_with, EMode, ModelError, Params, PrimitiveState,
    PrimitiveTendencies, RhsOptions, SymmetricState, Tendencies,
};
use crate::model::projected_field;
use crate::spectral::{Grid, ScalarField};

/// Hard stability bound on `dt (psi_bar + max|u|) / dx`, checked every step.
pub const CFL_LIMIT: f64 = 1.0;
pub const DEFAULT_CFL: f64 = 0.4;

/// A state or tendency viewed as a flat list of scalar fields.
pub trait FieldBundle: Clone {
    fn components(&self) -> Vec<&ScalarField>;
    fn components_mut(&mut self) -> Vec<&mut ScalarField>;
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegratorError {
    #[error("t = {t}: {source}")]
    Model { t: f64, source: ModelError },
    #[error("t = {t}: density {value:e} at x = {location:?} is not positive")]
    NonPositiveDensity { t: f64, location: [f64; 3], value: f64 },
    #[error("t = {t}: domain lost at x = {location:?} (margin {value:e})")]
    DomainViolation { t: f64, location: [f64; 3], value: f64 },
    #[error("t = {t}: dt = {dt} exceeds the stability bound {bound}")]
    CflViolation { t: f64, dt: f64, bound: f64 },
    #[error("invalid step control: {0}")]
    InvalidControl(String),
    #[error("t = {t}: observer failed: {message}")]
    Observer { t: f64, message: String },
}

impl IntegratorError {
    fn at(t: f64, grid: &Grid, err: ModelError) -> Self {
        match err {
            ModelError::DomainViolation { index, value } => IntegratorError::DomainViolation {
                t,
                location: grid.coordinates(index),
                value,
            },
            ModelError::NonPositiveDensity { index, value } => {
                IntegratorError::NonPositiveDensity {
                    t,
                    location: grid.coordinates(index),
                    value,
                }
            }
            source => IntegratorError::Model { t, source },
        }
    }

    /// Time at which the failure occurred, if any.
    pub fn time(&self) -> Option<f64> {
        match self {
            IntegratorError::Model { t, .. }
            | IntegratorError::NonPositiveDensity { t, .. }
            | IntegratorError::DomainViolation { t, .. }
            | IntegratorError::CflViolation { t, .. }
            | IntegratorError::Observer { t, .. } => Some(*t),
            IntegratorError::InvalidControl(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Scheme {
    #[default]
    #[serde(rename = "rk4")]
    Rk4,
    /// Lawson RK4: `-u/tau` is integrated exactly by `exp(-dt/tau)`.
    #[serde(rename = "rk4-integrating-factor")]
    Rk4IntegratingFactor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    /// Fixed step. When absent it is derived from `cfl` at `t = 0`.
    pub dt: Option<f64>,
    pub cfl: f64,
    pub scheme: Scheme,
    pub t_end: f64,
    pub sample_interval: f64,
}

impl StepControl {
    pub fn new(t_end: f64, sample_interval: f64) -> Self {
        Self {
            dt: None,
            cfl: DEFAULT_CFL,
            scheme: Scheme::Rk4,
            t_end,
            sample_interval,
        }
    }

    pub fn with_dt(self, dt: f64) -> Self {
        Self { dt: Some(dt), ..self }
    }

    pub fn with_scheme(self, scheme: Scheme) -> Self {
        Self { scheme, ..self }
    }

    pub fn validate(&self) -> Result<(), IntegratorError> {
        let bad = |m: String| Err(IntegratorError::InvalidControl(m));
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {}", self.t_end));
        }
        if !(self.sample_interval > 0.0 && self.sample_interval.is_finite()) {
            return bad(format!("sample_interval = {}", self.sample_interval));
        }
        if !(self.cfl > 0.0 && self.cfl <= CFL_LIMIT) {
            return bad(format!("cfl = {} (must lie in (0, {CFL_LIMIT}])", self.cfl));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("dt = {dt}"));
            }
        }
        let samples = (self.t_end / self.sample_interval).round();
        if (samples * self.sample_interval - self.t_end).abs() > 1e-9 * self.t_end.max(1.0) {
            return bad(format!(
                "t_end = {} is not a multiple of sample_interval = {}",
                self.t_end, self.sample_interval
            ));
        }
        Ok(())
    }

    /// Number of sample intervals in `[0, t_end]`.
    pub fn intervals(&self) -> usize {
        (self.t_end / self.sample_interval).round() as usize
    }

    /// Step size and steps per sample interval. `speed` is the wave speed
    /// bound of the initial state.
    pub fn resolve(&self, dx: f64, speed: f64) -> Result<(f64, usize), IntegratorError> {
        self.validate()?;
        let target = self.dt.unwrap_or(self.cfl * dx / speed);
        let per_sample = (self.sample_interval / target * (1.0 - 1e-12)).ceil().max(1.0);
        let dt = self.sample_interval / per_sample;
        Ok((dt, per_sample as usize))
    }
}

/// A semi-discrete system `y' = F(y)` whose velocity block may carry a
/// linear relaxation `-u/tau`.
pub trait System {
    type State: FieldBundle;
    type Tendency: FieldBundle;

    fn rhs(&self, state: &Self::State, relaxation: bool) -> Result<Self::Tendency, ModelError>;
    /// Flat component indices subject to relaxation.
    fn relaxed(&self, state: &Self::State) -> std::ops::Range<usize>;
    fn tau(&self) -> f64;
    fn grid<'a>(&self, state: &'a Self::State) -> &'a Grid;
    /// `psi_bar + max|u|`.
    fn wave_speed(&self, state: &Self::State) -> f64;
    /// Applied after each completed step.
    fn finalize(&self, _state: &mut Self::State) {}
}

#[derive(Debug, Clone, Copy)]
pub struct SymmetricSystem {
    pub params: Params,
    pub options: RhsOptions,
}

impl SymmetricSystem {
    pub fn new(params: Params) -> Self {
        Self {
            params,
            options: RhsOptions::default(),
        }
    }

    pub fn with_options(params: Params, options: RhsOptions) -> Self {
        Self { params, options }
    }
}

impl System for SymmetricSystem {
    type State = SymmetricState;
    type Tendency = Tendencies;

    fn rhs(&self, state: &SymmetricState, relaxation: bool) -> Result<Tendencies, ModelError> {
        let opts = RhsOptions {
            relaxation,
            ..self.options
        };
        rhs_symmetric_with(state, &self.params, &opts)
    }

    fn relaxed(&self, state: &SymmetricState) -> std::ops::Range<usize> {
        1..1 + state.u.dim()
    }

    fn tau(&self) -> f64 {
        self.params.tau
    }

    fn grid<'a>(&self, state: &'a SymmetricState) -> &'a Grid {
        state.grid()
    }

    fn wave_speed(&self, state: &SymmetricState) -> f64 {
        self.params.psi_bar() + state.u.max_magnitude()
    }

    fn finalize(&self, state: &mut SymmetricState) {
        if self.options.e_mode == EMode::Projected {
            state.e = projected_field(&state.m, &self.params, &self.options);
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PrimitiveSystem {
    pub params: Params,
    pub options: RhsOptions,
}

impl PrimitiveSystem {
    pub fn new(params: Params) -> Self {
        Self {
            params,
            options: RhsOptions::default(),
        }
    }
}

impl System for PrimitiveSystem {
    type State = PrimitiveState;
    type Tendency = PrimitiveTendencies;

    fn rhs(&self, state: &PrimitiveState, relaxation: bool) -> Result<PrimitiveTendencies, ModelError> {
        let opts = RhsOptions {
            relaxation,
            ..self.options
        };
        rhs_primitive_with(state, &self.params, &opts)
    }

    fn relaxed(&self, state: &PrimitiveState) -> std::ops::Range<usize> {
        1..1 + state.u.dim()
    }

    fn tau(&self) -> f64 {
        self.params.tau
    }

    fn grid<'a>(&self, state: &'a PrimitiveState) -> &'a Grid {
        state.grid()
    }

    fn wave_speed(&self, state: &PrimitiveState) -> f64 {
        self.params.psi_bar() + state.u.max_magnitude()
    }

    fn finalize(&self, state: &mut PrimitiveState) {
        if self.options.e_mode == EMode::Projected {
            let rho = state.n.map(|v| v - self.params.nbar);
            state.e = crate::spectral::ops::poisson_gradient_unchecked(&rho);
        }
    }
}

/// `base + sum_j c_j k_j`.
fn combine<S: FieldBundle, T: FieldBundle>(base: &S, terms: &[(f64, &T)]) -> S {
    let mut out = base.clone();
    for (c, k) in terms {
        for (o, kc) in out.components_mut().into_iter().zip(k.components()) {
            o.axpy(*c, kc);
        }
    }
    out
}

fn damp<S: FieldBundle>(state: &mut S, range: std::ops::Range<usize>, factor: f64) {
    for (i, c) in state.components_mut().into_iter().enumerate() {
        if range.contains(&i) {
            for v in c.samples_mut() {
                *v *= factor;
            }
        }
    }
}

fn damped<S: FieldBundle>(state: &S, range: std::ops::Range<usize>, factor: f64) -> S {
    let mut out = state.clone();
    damp(&mut out, range, factor);
    out
}

/// One step of size `dt` from time `t`. `k1`, if given, must equal the full
/// right-hand side at `state` (used only by plain RK4).
pub fn step<S: System>(
    system: &S,
    state: &S::State,
    dt: f64,
    scheme: Scheme,
    t: f64,
    k1: Option<S::Tendency>,
) -> Result<S::State, IntegratorError> {
    let grid = system.grid(state).clone();
    let f = |y: &S::State, relax: bool| system.rhs(y, relax).map_err(|e| IntegratorError::at(t, &grid, e));
    let mut next = match scheme {
        Scheme::Rk4 => {
            let k1 = match k1 {
                Some(k) => k,
                None => f(state, true)?,
            };
            let k2 = f(&combine(state, &[(0.5 * dt, &k1)]), true)?;
            let k3 = f(&combine(state, &[(0.5 * dt, &k2)]), true)?;
            let k4 = f(&combine(state, &[(dt, &k3)]), true)?;
            combine(
                state,
                &[(dt / 6.0, &k1), (dt / 3.0, &k2), (dt / 3.0, &k3), (dt / 6.0, &k4)],
            )
        }
        Scheme::Rk4IntegratingFactor => {
            let r = system.relaxed(state);
            let e = (-0.5 * dt / system.tau()).exp();
            let k1 = f(state, false)?;
            let a = damped(&combine(state, &[(0.5 * dt, &k1)]), r.clone(), e);
            let k2 = f(&a, false)?;
            let ey = damped(state, r.clone(), e);
            let b = combine(&ey, &[(0.5 * dt, &k2)]);
            let k3 = f(&b, false)?;
            let c = damped(&combine(&ey, &[(dt, &k3)]), r.clone(), e);
            let k4 = f(&c, false)?;
            let inner = damped(&combine(state, &[(dt / 6.0, &k1)]), r.clone(), e);
            let mid = combine(&inner, &[(dt / 3.0, &k2), (dt / 3.0, &k3)]);
            combine(&damped(&mid, r, e), &[(dt / 6.0, &k4)])
        }
    };
    system.finalize(&mut next);
    Ok(next)
}

/// Called at every sample time with the state and its exact tendencies.
pub trait Observer<S: System> {
    fn observe(&mut self, t: f64, state: &S::State, tendency: &S::Tendency) -> Result<(), String>;
}

impl<S: System, F> Observer<S> for F
where
    F: FnMut(f64, &S::State, &S::Tendency) -> Result<(), String>,
{
    fn observe(&mut self, t: f64, state: &S::State, tendency: &S::Tendency) -> Result<(), String> {
        self(t, state, tendency)
    }
}

/// Outcome of [`evolve`].
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub final_state: T,
    pub times: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
}

/// Integrates to `control.t_end`, sampling at multiples of the sample
/// interval. Sample times are computed as `j * interval`, so runs are
/// reproducible bit for bit.
pub fn evolve<S: System>(
    system: &S,
    initial: &S::State,
    control: &StepControl,
    observers: &mut [&mut dyn Observer<S>],
) -> Result<Trajectory<S::State>, IntegratorError> {
    let grid = system.grid(initial).clone();
    let dx = grid.spacing();
    let (dt, per_sample) = control.resolve(dx, system.wave_speed(initial))?;
    let intervals = control.intervals();
    let mut state = initial.clone();
    system.finalize(&mut state);
    let mut times = Vec::with_capacity(intervals + 1);
    let mut steps = 0;
    for j in 0..=intervals {
        let t = j as f64 * control.sample_interval;
        let full = system
            .rhs(&state, true)
            .map_err(|e| IntegratorError::at(t, &grid, e))?;
        for obs in observers.iter_mut() {
            obs.observe(t, &state, &full)
                .map_err(|message| IntegratorError::Observer { t, message })?;
        }
        times.push(t);
        if j == intervals {
            break;
        }
        let mut k1 = Some(full);
        for s in 0..per_sample {
            let ts = t + s as f64 * dt;
            let bound = CFL_LIMIT * dx / system.wave_speed(&state);
            if dt > bound {
                return Err(IntegratorError::CflViolation { t: ts, dt, bound });
            }
            let k = if control.scheme == Scheme::Rk4 { k1.take() } else { None };
            state = step(system, &state, dt, control.scheme, ts, k)?;
            steps += 1;
        }
    }
    Ok(Trajectory {
        final_state: state,
        times,
        dt,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{compatible_init, InitSpec, ModeTarget};
    use crate::spectral::{curl, Grid, VectorField};
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(2, 32, 2.0 * PI).unwrap()
    }

    #[test]
    fn equilibrium_is_fixed() {
        let g = grid();
        let sys = SymmetricSystem::new(Params::reference());
        let s0 = SymmetricState::equilibrium(&g);
        for scheme in [Scheme::Rk4, Scheme::Rk4IntegratingFactor] {
            let s1 = step(&sys, &s0, 0.01, scheme, 0.0, None).unwrap();
            for c in s1.components() {
                assert_eq!(c.max_abs(), 0.0);
            }
        }
    }

    #[test]
    fn solenoidal_linear_decay_is_exact_with_integrating_factor() {
        let g = grid();
        let params = Params::reference();
        let sys = SymmetricSystem::with_options(params, RhsOptions::linear());
        let mut s = SymmetricState::equilibrium(&g);
        s.u = VectorField::from_fn(&g, |x| [0.0, 1e-3 * x[0].sin(), 0.0]);
        let u0 = s.u.clone();
        let control = StepControl::new(2.0, 0.5)
            .with_dt(0.05)
            .with_scheme(Scheme::Rk4IntegratingFactor);
        let traj = evolve(&sys, &s, &control, &mut []).unwrap();
        let expect = u0.scaled((-2.0 / params.tau).exp());
        let err = traj.final_state.u.sub(&expect).l2_norm() / expect.l2_norm();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn t_end_zero_gives_one_sample() {
        let g = grid();
        let sys = SymmetricSystem::new(Params::reference());
        let s0 = compatible_init(&InitSpec::single(vec![1, 0], 1e-3, ModeTarget::M), &sys.params, &g)
            .unwrap();
        let mut count = 0;
        let mut obs = |_t: f64, _s: &SymmetricState, _k: &Tendencies| -> Result<(), String> {
            count += 1;
            Ok(())
        };
        let traj = evolve(&sys, &s0, &StepControl::new(0.0, 0.1), &mut [&mut obs]).unwrap();
        assert_eq!(traj.times, vec![0.0]);
        assert_eq!(traj.steps, 0);
        assert_eq!(count, 1);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let g = grid();
        let params = Params::reference();
        let sys = SymmetricSystem::new(params);
        let mut s0 = compatible_init(&InitSpec::single(vec![1, 1], 0.05, ModeTarget::M), &params, &g)
            .unwrap();
        s0.u = VectorField::from_fn(&g, |x| [0.05 * x[1].cos(), 0.03 * x[0].sin(), 0.0]);
        let run = |dt: f64| {
            evolve(&sys, &s0, &StepControl::new(0.4, 0.4).with_dt(dt), &mut [])
                .unwrap()
                .final_state
        };
        let (a, b, c) = (run(0.04), run(0.02), run(0.01));
        let e1 = a.m.sub(&c.m).l2_norm();
        let e2 = b.m.sub(&c.m).l2_norm();
        let order = ((e1 - e2) / e2).log2();
        assert!(order > 3.5, "order {order}");
    }

    #[test]
    fn cfl_violation_is_reported() {
        let g = grid();
        let sys = SymmetricSystem::new(Params::reference());
        let s0 = SymmetricState::equilibrium(&g);
        let err = evolve(&sys, &s0, &StepControl::new(1.0, 1.0).with_dt(0.5), &mut []).unwrap_err();
        assert!(matches!(err, IntegratorError::CflViolation { .. }), "{err}");
    }

    #[test]
    fn domain_violation_carries_time_and_location() {
        let g = grid();
        let params = Params::reference();
        let sys = SymmetricSystem::new(params);
        let mut s0 = SymmetricState::equilibrium(&g);
        // margin psi_bar + m/2 goes negative at x = 0
        s0.m = ScalarField::from_fn(&g, |x| -3.0 * x[0].cos());
        let err = evolve(&sys, &s0, &StepControl::new(1.0, 1.0).with_dt(0.01), &mut []).unwrap_err();
        match err {
            IntegratorError::DomainViolation { t, location, value } => {
                assert_eq!(t, 0.0);
                assert!(value <= 0.0);
                assert_eq!(location[0], 0.0);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn vorticity_decays_at_relaxation_rate_in_linear_mode() {
        let g = grid();
        let params = Params::reference();
        let sys = SymmetricSystem::with_options(params, RhsOptions::linear());
        let mut s = compatible_init(&InitSpec::single(vec![1, 0], 1e-3, ModeTarget::M), &params, &g)
            .unwrap();
        s.u = VectorField::from_fn(&g, |x| [1e-3 * x[1].sin(), 0.0, 0.0]);
        let w0 = curl(&s.u).l2_norm();
        let control = StepControl::new(1.0, 1.0)
            .with_dt(0.02)
            .with_scheme(Scheme::Rk4IntegratingFactor);
        let traj = evolve(&sys, &s, &control, &mut []).unwrap();
        let w1 = curl(&traj.final_state.u).l2_norm();
        assert!((w1 / (w0 * (-2.0f64).exp()) - 1.0).abs() < 1e-10);
    }
}
