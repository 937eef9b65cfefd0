//! Exact per-mode spectrum of the system linearized about equilibrium.
//!
//! A longitudinal mode of wavenumber `kappa` obeys
//! `lambda^2 + lambda/tau + (psi_bar^2 kappa^2 + psi_bar c) = 0`;
//! solenoidal velocity decays at `-1/tau`.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Params;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("no excited components")]
    EmptyExcitation,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Whether the Poisson coupling enters the linearization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    #[default]
    Poisson,
    /// `c` set to zero, for comparison only.
    Disabled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpectrum {
    pub kappa: f64,
    /// Root with the larger real part (the slow root).
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub solenoidal: f64,
}

fn constant_term(kappa: f64, params: &Params, coupling: Coupling) -> f64 {
    let psi = params.psi_bar();
    let c = match coupling {
        Coupling::Poisson => params.c(),
        Coupling::Disabled => 0.0,
    };
    psi * psi * kappa * kappa + psi * c
}

/// Roots of `lambda^2 + b lambda + q`, slow root first, without cancellation.
fn roots(b: f64, q: f64) -> (Complex64, Complex64) {
    let disc = b * b - 4.0 * q;
    if disc >= 0.0 {
        let fast = -0.5 * (b + disc.sqrt());
        let slow = if q == 0.0 { 0.0 } else { q / fast };
        (Complex64::new(slow, 0.0), Complex64::new(fast, 0.0))
    } else {
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(-0.5 * b, im), Complex64::new(-0.5 * b, -im))
    }
}

pub fn longitudinal_eigenvalues(kappa: f64, params: &Params) -> (Complex64, Complex64) {
    longitudinal_eigenvalues_with(kappa, params, Coupling::Poisson)
}

pub fn longitudinal_eigenvalues_with(
    kappa: f64,
    params: &Params,
    coupling: Coupling,
) -> (Complex64, Complex64) {
    roots(1.0 / params.tau, constant_term(kappa, params, coupling))
}

/// `lambda^2 + lambda/tau + q` at `lambda`.
pub fn characteristic_residual(lambda: Complex64, kappa: f64, params: &Params, coupling: Coupling) -> f64 {
    (lambda * lambda + lambda / params.tau + constant_term(kappa, params, coupling)).norm()
}

pub fn solenoidal_rate(params: &Params) -> f64 {
    -1.0 / params.tau
}

pub fn mode_spectrum(kappa: f64, params: &Params, coupling: Coupling) -> ModeSpectrum {
    let (lambda_plus, lambda_minus) = longitudinal_eigenvalues_with(kappa, params, coupling);
    ModeSpectrum {
        kappa,
        lambda_plus,
        lambda_minus,
        solenoidal: solenoidal_rate(params),
    }
}

/// Excited longitudinal wavenumbers and whether solenoidal velocity is present.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Excitation {
    pub kappas: Vec<f64>,
    pub solenoidal: bool,
}

/// `min` over excited components of `-Re lambda`.
pub fn predicted_decay_rate(excitation: &Excitation, params: &Params) -> Result<f64, OracleError> {
    if excitation.kappas.is_empty() && !excitation.solenoidal {
        return Err(OracleError::EmptyExcitation);
    }
    if let Some(k) = excitation.kappas.iter().find(|k| !(**k >= 0.0)) {
        return Err(OracleError::InvalidArgument(format!("kappa = {k}")));
    }
    let mut mu = f64::INFINITY;
    for &k in &excitation.kappas {
        mu = mu.min(-longitudinal_eigenvalues(k, params).0.re);
    }
    if excitation.solenoidal {
        mu = mu.min(-solenoidal_rate(params));
    }
    Ok(mu)
}

/// `(tau, mu_0(tau))` for a single longitudinal wavenumber.
pub fn tau_scaling_curve(
    taus: &[f64],
    kappa_min: f64,
    params: &Params,
) -> Result<Vec<(f64, f64)>, OracleError> {
    let exc = Excitation {
        kappas: vec![kappa_min],
        solenoidal: false,
    };
    taus.iter()
        .map(|&tau| {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(OracleError::InvalidArgument(format!("tau = {tau}")));
            }
            Ok((tau, predicted_decay_rate(&exc, &params.with_tau(tau))?))
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    linear_slope(&logs)
}

pub(crate) fn linear_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
