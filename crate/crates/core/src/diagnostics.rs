//! Norm time series, the block energy functional `Q`, vorticity and rate fits.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrator::{evolve, IntegratorError, Observer, StepControl, SymmetricSystem};
use crate::lp::{besov_norm_of_components, BesovIndex, DyadicCutoffs};
use crate::model::{constraint_residual, Params, SymmetricState, Tendencies};
use crate::oracle::linear_slope;
use crate::spectral::{curl, prime_spectra, ScalarField, VectorField};

/// Samples required inside a fit window.
pub const MIN_FIT_SAMPLES: usize = 8;
/// Fraction of the run treated as transient and excluded from default fits.
pub const TRANSIENT_FRACTION: f64 = 0.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("{found} samples in the fit window, need at least {MIN_FIT_SAMPLES}")]
    TooFewSamples { found: usize },
    #[error("series value {value:e} at t = {t} is not positive")]
    NonPositiveSeries { t: f64, value: f64 },
}

/// Column names of the persisted series, in order.
pub const SERIES_COLUMNS: [&str; 11] = [
    "t",
    "norm_m_sigma",
    "norm_u_sigma",
    "norm_e_sigma",
    "norm_mt",
    "norm_ut",
    "norm_et",
    "Q",
    "vorticity_norm",
    "constraint_residual",
    "min_domain_margin",
];

/// Diagnostics at one sample time. State norms are `B^sigma_{2,1}`,
/// tendency and vorticity norms `B^{sigma-1}_{2,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub norm_m_sigma: f64,
    pub norm_u_sigma: f64,
    pub norm_e_sigma: f64,
    pub norm_mt: f64,
    pub norm_ut: f64,
    pub norm_et: f64,
    pub q: f64,
    pub vorticity_norm: f64,
    pub constraint_residual: f64,
    pub min_domain_margin: f64,
    /// `||(m, u, e)||_{B^sigma}` with the block norm taken jointly.
    pub norm_joint_sigma: f64,
    /// `||(m_t, u_t, e_t)||_{B^{sigma-1}}`, jointly.
    pub norm_joint_t: f64,
}

impl Sample {
    /// Values in [`SERIES_COLUMNS`] order.
    pub fn row(&self) -> [f64; 11] {
        [
            self.t,
            self.norm_m_sigma,
            self.norm_u_sigma,
            self.norm_e_sigma,
            self.norm_mt,
            self.norm_ut,
            self.norm_et,
            self.q,
            self.vorticity_norm,
            self.constraint_residual,
            self.min_domain_margin,
        ]
    }
}

/// Named scalar series extracted from a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Series {
    NormM,
    NormU,
    NormE,
    /// `||(m, u, e)||_{B^sigma}`.
    Joint,
    /// `||(m, u, e)||_{B^sigma} + ||(m_t, u_t, e_t)||_{B^{sigma-1}}`.
    JointWithTendencies,
    Q,
    Vorticity,
}

impl Series {
    pub const ALL: [Series; 7] = [
        Series::NormM,
        Series::NormU,
        Series::NormE,
        Series::Joint,
        Series::JointWithTendencies,
        Series::Q,
        Series::Vorticity,
    ];

    pub fn value(&self, s: &Sample) -> f64 {
        match self {
            Series::NormM => s.norm_m_sigma,
            Series::NormU => s.norm_u_sigma,
            Series::NormE => s.norm_e_sigma,
            Series::Joint => s.norm_joint_sigma,
            Series::JointWithTendencies => s.norm_joint_sigma + s.norm_joint_t,
            Series::Q => s.q,
            Series::Vorticity => s.vorticity_norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub series: Series,
    /// `NaN` when the fit failed; see `error`.
    pub mu: f64,
    pub residual: f64,
    pub window: [f64; 2],
    pub samples: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub samples: Vec<Sample>,
    pub fits: Vec<RateFit>,
    pub dt: f64,
    pub steps: usize,
}

impl RunRecord {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn series(&self, which: Series) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.t, which.value(s))).collect()
    }

    pub fn fit(&self, which: Series) -> Option<&RateFit> {
        self.fits.iter().find(|f| f.series == which)
    }
}

/// Least-squares slope `mu` of `-log y` against `t` over samples with
/// `t` in `window`, and the RMS residual of the fit in log space.
pub fn decay_fit(series: &[(f64, f64)], window: [f64; 2]) -> Result<(f64, f64), DiagnosticsError> {
    let inside: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window[0] && t <= window[1])
        .collect();
    if inside.len() < MIN_FIT_SAMPLES {
        return Err(DiagnosticsError::TooFewSamples {
            found: inside.len(),
        });
    }
    if let Some(&(t, value)) = inside.iter().find(|&&(_, y)| !(y > 0.0)) {
        return Err(DiagnosticsError::NonPositiveSeries { t, value });
    }
    let logs: Vec<(f64, f64)> = inside.iter().map(|&(t, y)| (t, -y.ln())).collect();
    let mu = linear_slope(&logs);
    let n = logs.len() as f64;
    let mt = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let ss: f64 = logs
        .iter()
        .map(|&(t, y)| (y - (my + mu * (t - mt))).powi(2))
        .sum();
    Ok((mu, (ss / n).sqrt()))
}

/// Default fit window: the run with its first [`TRANSIENT_FRACTION`] removed.
pub fn default_window(times: &[f64]) -> [f64; 2] {
    let (t0, t1) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (0.0, 0.0),
    };
    [t0 + TRANSIENT_FRACTION * (t1 - t0), t1]
}

/// Fits every [`Series`] over `window`. An identically zero series (an
/// equilibrium run) is reported with rate 0.
pub fn fit_rates(samples: &[Sample], window: [f64; 2]) -> Vec<RateFit> {
    Series::ALL
        .iter()
        .map(|&series| {
            let data: Vec<(f64, f64)> = samples.iter().map(|s| (s.t, series.value(s))).collect();
            let count = data
                .iter()
                .filter(|&&(t, _)| t >= window[0] && t <= window[1])
                .count();
            let all_zero = !data.is_empty() && data.iter().all(|&(_, y)| y == 0.0);
            let (mu, residual, error) = if all_zero {
                (0.0, 0.0, None)
            } else {
                match decay_fit(&data, window) {
                    Ok((mu, r)) => (mu, r, None),
                    Err(e) => (f64::NAN, f64::NAN, Some(e.to_string())),
                }
            };
            RateFit {
                series,
                mu,
                residual,
                window,
                samples: count,
                error,
            }
        })
        .collect()
}

/// `sum_q 2^{q(sigma-1)} { 2^{2q} (|m_q|^2 + |u_q|^2 + |e_q|^2/nbar)
///   + |m_t,q|^2 + |u_t,q|^2 + |e_t,q|^2/nbar }^{1/2}`.
pub fn q_functional(
    cutoffs: &DyadicCutoffs,
    state: &SymmetricState,
    tendencies: &Tendencies,
    params: &Params,
) -> f64 {
    let sigma = Params::sigma(state.grid().dim());
    let energy = |m: &ScalarField, u: &VectorField, e: &VectorField| {
        let mut fields = vec![m];
        fields.extend(u.components());
        fields.extend(e.components());
        prime_spectra(&fields);
        let ne = e.dim();
        let nf = fields.len();
        cutoffs
            .blocks()
            .map(|q| {
                fields
                    .iter()
                    .enumerate()
                    .map(|(i, f)| {
                        let w = if i >= nf - ne { 1.0 / params.nbar } else { 1.0 };
                        w * cutoffs.block_norm_spectrum(f.spectrum(), q).powi(2)
                    })
                    .sum::<f64>()
            })
            .collect::<Vec<f64>>()
    };
    let es = energy(&state.m, &state.u, &state.e);
    let et = energy(&tendencies.m_t, &tendencies.u_t, &tendencies.e_t);
    cutoffs
        .blocks()
        .zip(es.iter().zip(&et))
        .map(|(q, (s, t))| {
            let q = q as f64;
            2f64.powf(q * (sigma - 1.0)) * (2f64.powf(2.0 * q) * s + t).sqrt()
        })
        .sum()
}

/// `||curl u||_{B^{sigma-1}_{2,1}}`.
pub fn vorticity_norm(cutoffs: &DyadicCutoffs, u: &VectorField) -> f64 {
    let sigma = Params::sigma(u.dim());
    let w = curl(u);
    besov_norm_of_components(cutoffs, &w.components(), BesovIndex::l2_sum(sigma - 1.0))
}

/// Evaluates every column at one sample.
pub fn sample(
    cutoffs: &DyadicCutoffs,
    params: &Params,
    t: f64,
    state: &SymmetricState,
    tend: &Tendencies,
) -> Sample {
    let sigma = Params::sigma(state.grid().dim());
    let hi = BesovIndex::l2_sum(sigma);
    let lo = BesovIndex::l2_sum(sigma - 1.0);
    let u: Vec<&ScalarField> = state.u.components().iter().collect();
    let e: Vec<&ScalarField> = state.e.components().iter().collect();
    let ut: Vec<&ScalarField> = tend.u_t.components().iter().collect();
    let et: Vec<&ScalarField> = tend.e_t.components().iter().collect();
    let mut all: Vec<&ScalarField> = vec![&state.m];
    all.extend(&u);
    all.extend(&e);
    let mut all_t: Vec<&ScalarField> = vec![&tend.m_t];
    all_t.extend(&ut);
    all_t.extend(&et);
    let k = params.k();
    let psi = params.psi_bar();
    Sample {
        t,
        norm_m_sigma: besov_norm_of_components(cutoffs, &[&state.m], hi),
        norm_u_sigma: besov_norm_of_components(cutoffs, &u, hi),
        norm_e_sigma: besov_norm_of_components(cutoffs, &e, hi),
        norm_mt: besov_norm_of_components(cutoffs, &[&tend.m_t], lo),
        norm_ut: besov_norm_of_components(cutoffs, &ut, lo),
        norm_et: besov_norm_of_components(cutoffs, &et, lo),
        q: q_functional(cutoffs, state, tend, params),
        vorticity_norm: vorticity_norm(cutoffs, &state.u),
        constraint_residual: constraint_residual(state, params),
        min_domain_margin: state.m.samples().iter().fold(f64::INFINITY, |acc, &m| acc.min(k * m + psi)),
        norm_joint_sigma: besov_norm_of_components(cutoffs, &all, hi),
        norm_joint_t: besov_norm_of_components(cutoffs, &all_t, lo),
    }
}

/// Observer collecting a [`Sample`] per sample time.
pub struct Recorder<'a> {
    pub cutoffs: &'a DyadicCutoffs,
    pub params: Params,
    pub samples: Vec<Sample>,
}

impl<'a> Recorder<'a> {
    pub fn new(cutoffs: &'a DyadicCutoffs, params: Params) -> Self {
        Self {
            cutoffs,
            params,
            samples: Vec::new(),
        }
    }
}

impl Observer<SymmetricSystem> for Recorder<'_> {
    fn observe(&mut self, t: f64, state: &SymmetricState, tend: &Tendencies) -> Result<(), String> {
        self.samples.push(sample(self.cutoffs, &self.params, t, state, tend));
        Ok(())
    }
}

/// Integrates `system` from `initial`, recording diagnostics and fitting
/// rates over the default window. Extra observers run after the recorder.
pub fn record_run(
    system: &SymmetricSystem,
    initial: &SymmetricState,
    control: &StepControl,
    cutoffs: &DyadicCutoffs,
    extra: &mut [&mut dyn Observer<SymmetricSystem>],
) -> Result<(RunRecord, SymmetricState), IntegratorError> {
    let mut recorder = Recorder::new(cutoffs, system.params);
    let traj = {
        let mut observers: Vec<&mut dyn Observer<SymmetricSystem>> = vec![&mut recorder];
        for o in extra.iter_mut() {
            observers.push(&mut **o);
        }
        evolve(system, initial, control, &mut observers)?
    };
    let window = default_window(&traj.times);
    let fits = fit_rates(&recorder.samples, window);
    Ok((
        RunRecord {
            samples: recorder.samples,
            fits,
            dt: traj.dt,
            steps: traj.steps,
        },
        traj.final_state,
    ))
}
