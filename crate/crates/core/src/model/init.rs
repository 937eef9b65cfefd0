//! Declarative initial data: a list of Fourier modes or a seeded random spectrum.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::spectral::{random_masked_field, Grid, ScalarField, VectorField};

use super::state::{compatible_init_fields, DensityInit, InitialFields, SymmetricState};
use super::{ModelError, Params};

/// Which field a mode perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeTarget {
    /// Symmetric variable `m` (or `n~`).
    M,
    /// Density perturbation `n - nbar`.
    N,
    /// Velocity parallel to the wavevector (curl-free).
    ULongitudinal,
    /// Velocity perpendicular to the wavevector (divergence-free).
    USolenoidal,
}

/// `amplitude * cos(k . x)` along `target`, with `k = 2 pi / L * wavevector`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub wavevector: Vec<i64>,
    pub amplitude: f64,
    pub target: ModeTarget,
}

/// Random masked `m` and `u` with wavenumbers in `band`, each component
/// scaled to RMS value `amplitude`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub seed: u64,
    pub amplitude: f64,
    pub band: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitSpec {
    Modes(Vec<ModeSpec>),
    Random(RandomSpec),
}

impl InitSpec {
    pub fn equilibrium() -> Self {
        InitSpec::Modes(Vec::new())
    }

    pub fn single(wavevector: Vec<i64>, amplitude: f64, target: ModeTarget) -> Self {
        InitSpec::Modes(vec![ModeSpec {
            wavevector,
            amplitude,
            target,
        }])
    }

    /// Magnitudes of the excited wavevectors and whether solenoidal
    /// velocity content is present.
    pub fn excitation(&self, grid: &Grid) -> (Vec<f64>, bool) {
        let base = 2.0 * std::f64::consts::PI / grid.length();
        match self {
            InitSpec::Modes(modes) => {
                let mut kappas: Vec<f64> = modes
                    .iter()
                    .filter(|m| m.amplitude != 0.0 && m.target != ModeTarget::USolenoidal)
                    .map(|m| base * norm(&m.wavevector))
                    .collect();
                kappas.sort_by(f64::total_cmp);
                kappas.dedup();
                let solenoidal = modes
                    .iter()
                    .any(|m| m.amplitude != 0.0 && m.target == ModeTarget::USolenoidal);
                (kappas, solenoidal)
            }
            InitSpec::Random(r) => {
                let mut kappas: Vec<f64> = (0..grid.len())
                    .filter(|&i| grid.in_mask(i))
                    .map(|i| grid.wavenumber(i))
                    .filter(|&k| k > 0.0 && k >= r.band[0] && k <= r.band[1])
                    .collect();
                kappas.sort_by(f64::total_cmp);
                kappas.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
                (kappas, r.amplitude != 0.0)
            }
        }
    }
}

fn norm(v: &[i64]) -> f64 {
    v.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt()
}

fn solenoidal_direction(k: [f64; 3], dim: usize) -> [f64; 3] {
    if dim == 2 {
        let n = (k[0] * k[0] + k[1] * k[1]).sqrt();
        return [-k[1] / n, k[0] / n, 0.0];
    }
    // k x e_j with e_j the axis least aligned with k
    let j = (0..3)
        .min_by(|&a, &b| k[a].abs().total_cmp(&k[b].abs()))
        .expect("three axes");
    let mut ej = [0.0; 3];
    ej[j] = 1.0;
    let w = [
        k[1] * ej[2] - k[2] * ej[1],
        k[2] * ej[0] - k[0] * ej[2],
        k[0] * ej[1] - k[1] * ej[0],
    ];
    let n = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    [w[0] / n, w[1] / n, w[2] / n]
}

fn mode_fields(
    modes: &[ModeSpec],
    grid: &Grid,
) -> Result<(ScalarField, ScalarField, VectorField, bool), ModelError> {
    let dim = grid.dim();
    let base = 2.0 * std::f64::consts::PI / grid.length();
    let mut m = ScalarField::zeros(grid);
    let mut n = ScalarField::zeros(grid);
    let mut u: Vec<ScalarField> = (0..dim).map(|_| ScalarField::zeros(grid)).collect();
    let (mut has_m, mut has_n) = (false, false);
    for mode in modes {
        if mode.wavevector.len() != dim {
            return Err(ModelError::InvalidInit(format!(
                "wavevector {:?} has {} components, grid has {dim}",
                mode.wavevector,
                mode.wavevector.len()
            )));
        }
        if !mode.amplitude.is_finite() {
            return Err(ModelError::InvalidInit(format!(
                "amplitude {} is not finite",
                mode.amplitude
            )));
        }
        if mode.wavevector.iter().all(|&c| c == 0) {
            return Err(ModelError::InvalidInit("zero wavevector".into()));
        }
        if !grid.in_mask(grid.mode_index(&mode.wavevector))
            || mode.wavevector.iter().any(|&c| 3 * c.abs() > grid.points() as i64)
        {
            return Err(ModelError::InvalidInit(format!(
                "wavevector {:?} lies outside the dealias mask",
                mode.wavevector
            )));
        }
        let mut k = [0.0; 3];
        for (a, &c) in mode.wavevector.iter().enumerate() {
            k[a] = base * c as f64;
        }
        let wave = ScalarField::from_fn(grid, |x| (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]).cos());
        let amp = mode.amplitude;
        match mode.target {
            ModeTarget::M => {
                has_m = true;
                m.axpy(amp, &wave);
            }
            ModeTarget::N => {
                has_n = true;
                n.axpy(amp, &wave);
            }
            ModeTarget::ULongitudinal | ModeTarget::USolenoidal => {
                let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
                let dir = if mode.target == ModeTarget::ULongitudinal {
                    [k[0] / kn, k[1] / kn, k[2] / kn]
                } else {
                    solenoidal_direction(k, dim)
                };
                for (a, ua) in u.iter_mut().enumerate() {
                    if dir[a] != 0.0 {
                        ua.axpy(amp * dir[a], &wave);
                    }
                }
            }
        }
    }
    if has_m && has_n {
        return Err(ModelError::InvalidInit(
            "modes may target m or n, not both".into(),
        ));
    }
    Ok((m, n, VectorField::new(u)?, has_n))
}

/// Builds the symmetric initial state described by `spec`, with the
/// electric field compatible with the density.
pub fn compatible_init(
    spec: &InitSpec,
    params: &Params,
    grid: &Grid,
) -> Result<SymmetricState, ModelError> {
    params.validate()?;
    let fields = match spec {
        InitSpec::Modes(modes) => {
            let (m, n, u, density_given) = mode_fields(modes, grid)?;
            let density = if density_given {
                DensityInit::Density(n.map(|v| v + params.nbar))
            } else {
                DensityInit::Symmetric(m)
            };
            InitialFields { density, u }
        }
        InitSpec::Random(r) => {
            if !r.amplitude.is_finite() || !(r.band[0] <= r.band[1]) {
                return Err(ModelError::InvalidInit(format!(
                    "random init needs finite amplitude and band lo <= hi, got {} and {:?}",
                    r.amplitude, r.band
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
            let band = Some((r.band[0].max(1e-12), r.band[1]));
            let m = random_masked_field(grid, &mut rng, band).scaled(r.amplitude);
            let u = (0..grid.dim())
                .map(|_| random_masked_field(grid, &mut rng, band).scaled(r.amplitude))
                .collect();
            InitialFields {
                density: DensityInit::Symmetric(m),
                u: VectorField::new(u)?,
            }
        }
    };
    compatible_init_fields(&fields, params)
}
