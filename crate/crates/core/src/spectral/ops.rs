//! Spectral differential operators and the nonlocal Poisson/Riesz maps.
//!
//! Derivatives multiply by `i k`; the Nyquist component of `k` is treated as
//! zero so real fields stay real. The `k = 0` mode of every inverse-Laplacian
//! output is set to zero.

use rustfft::num_complex::Complex64;

use super::field::{fields_from_spectra, prime_spectra};
use super::{Grid, ScalarField, SpectralError, Spectrum, VectorField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative tolerance on `|mean(rho)| / ||rho||_2` accepted by [`poisson_gradient`].
pub const MEAN_TOLERANCE: f64 = 1e-10;

pub fn forward_transform(grid: &Grid, f: &ScalarField) -> Result<Spectrum, SpectralError> {
    f.check_grid(grid)?;
    Ok(f.spectrum().clone())
}

pub fn inverse_transform(grid: &Grid, c: &Spectrum) -> Result<ScalarField, SpectralError> {
    if c.grid() != grid {
        return Err(SpectralError::GridMismatch {
            expected: grid.shape(),
            found: c.grid().shape(),
        });
    }
    Ok(ScalarField::from_spectrum(c.clone()))
}

/// `d/dx_axis` in Fourier space.
pub fn derivative_spectrum(s: &Spectrum, axis: usize) -> Spectrum {
    let grid = s.grid().clone();
    s.mapped(|idx, c| I * grid.derivative_vector(idx)[axis] * c)
}

pub fn gradient_spectra(s: &Spectrum) -> Vec<Spectrum> {
    (0..s.grid().dim()).map(|a| derivative_spectrum(s, a)).collect()
}

pub fn divergence_spectrum(components: &[&Spectrum]) -> Spectrum {
    let grid = components[0].grid().clone();
    let mut out = Spectrum::zeros(&grid);
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        let d = grid.derivative_vector(idx);
        *c = components
            .iter()
            .enumerate()
            .map(|(a, s)| I * d[a] * s.coeffs()[idx])
            .sum();
    }
    out
}

/// `grad Delta^{-1} rho`; the zero mode of `rho` is ignored.
pub fn poisson_gradient_spectra(rho: &Spectrum) -> Vec<Spectrum> {
    let grid = rho.grid().clone();
    (0..grid.dim())
        .map(|a| {
            rho.mapped(|idx, c| {
                let d = grid.derivative_vector(idx);
                let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                if d2 == 0.0 {
                    Complex64::default()
                } else {
                    -I * (d[a] / d2) * c
                }
            })
        })
        .collect()
}

/// `grad Delta^{-1} div F`: projection onto the curl-free part.
pub fn riesz_spectra(components: &[&Spectrum]) -> Vec<Spectrum> {
    let grid = components[0].grid().clone();
    let dim = grid.dim();
    let mut out: Vec<Spectrum> = (0..dim).map(|_| Spectrum::zeros(&grid)).collect();
    for idx in 0..grid.len() {
        let d = grid.derivative_vector(idx);
        let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        if d2 == 0.0 {
            continue;
        }
        let dot: Complex64 = (0..dim).map(|a| d[a] * components[a].coeffs()[idx]).sum();
        for (a, s) in out.iter_mut().enumerate() {
            s.coeffs_mut()[idx] = dot * (d[a] / d2);
        }
    }
    out
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let comps = fields_from_spectra(gradient_spectra(f.spectrum()));
    VectorField::new(comps).expect("gradient components share the grid")
}

pub fn divergence(v: &VectorField) -> ScalarField {
    let refs: Vec<&ScalarField> = v.components().iter().collect();
    prime_spectra(&refs);
    let specs: Vec<&Spectrum> = refs.iter().map(|c| c.spectrum()).collect();
    ScalarField::from_spectrum(divergence_spectrum(&specs))
}

/// Vorticity: a scalar in two dimensions, a vector in three.
#[derive(Clone, Debug)]
pub enum Vorticity {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl Vorticity {
    pub fn components(&self) -> Vec<&ScalarField> {
        match self {
            Vorticity::Scalar(s) => vec![s],
            Vorticity::Vector(v) => v.components().iter().collect(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.components()
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

pub fn curl_spectra(components: &[&Spectrum]) -> Vec<Spectrum> {
    let d = |s: &Spectrum, a: usize| derivative_spectrum(s, a);
    let sub = |x: Spectrum, y: Spectrum| {
        let yc = y.coeffs().to_vec();
        x.mapped(|i, c| c - yc[i])
    };
    match components.len() {
        2 => vec![sub(d(components[1], 0), d(components[0], 1))],
        _ => vec![
            sub(d(components[2], 1), d(components[1], 2)),
            sub(d(components[0], 2), d(components[2], 0)),
            sub(d(components[1], 0), d(components[0], 1)),
        ],
    }
}

pub fn curl(v: &VectorField) -> Vorticity {
    let refs: Vec<&ScalarField> = v.components().iter().collect();
    prime_spectra(&refs);
    let specs: Vec<&Spectrum> = refs.iter().map(|c| c.spectrum()).collect();
    let mut out = fields_from_spectra(curl_spectra(&specs));
    if out.len() == 1 {
        Vorticity::Scalar(out.pop().expect("one component"))
    } else {
        Vorticity::Vector(VectorField::new(out).expect("curl components share the grid"))
    }
}

/// `e = grad Delta^{-1} rho` with the zero mode of `e` set to zero.
///
/// Fails with [`SpectralError::NonZeroMean`] when `rho` has a mean that no
/// periodic potential can produce.
pub fn poisson_gradient(rho: &ScalarField) -> Result<VectorField, SpectralError> {
    let mean = rho.mean();
    let norm = rho.l2_norm();
    if mean.abs() > MEAN_TOLERANCE * norm {
        return Err(SpectralError::NonZeroMean { mean, norm });
    }
    Ok(poisson_gradient_unchecked(rho))
}

/// [`poisson_gradient`] that silently drops the mean of `rho`.
pub fn poisson_gradient_unchecked(rho: &ScalarField) -> VectorField {
    let comps = fields_from_spectra(poisson_gradient_spectra(rho.spectrum()));
    VectorField::new(comps).expect("components share the grid")
}

/// `grad Delta^{-1} div v`, with the `k = 0` mode annihilated.
pub fn riesz_div_projection(v: &VectorField) -> VectorField {
    let refs: Vec<&ScalarField> = v.components().iter().collect();
    prime_spectra(&refs);
    let specs: Vec<&Spectrum> = refs.iter().map(|c| c.spectrum()).collect();
    let comps = fields_from_spectra(riesz_spectra(&specs));
    VectorField::new(comps).expect("components share the grid")
}

pub fn dealias(f: &ScalarField) -> ScalarField {
    let mut s = f.spectrum().clone();
    s.apply_mask();
    ScalarField::from_spectrum(s)
}

pub fn dealias_vector(v: &VectorField) -> VectorField {
    VectorField::new(v.components().iter().map(dealias).collect()).expect("same grid")
}

/// Pointwise product followed by the dealias mask.
///
/// For masked inputs on a grid where `M` is not a multiple of three this is
/// exactly the true product restricted to the mask.
pub fn product(f: &ScalarField, g: &ScalarField) -> Result<ScalarField, SpectralError> {
    g.check_grid(f.grid())?;
    Ok(dealias(&f.zip_map(g, |a, b| a * b)))
}

/// `v . grad f`, dealiased.
pub fn advect(v: &VectorField, f: &ScalarField) -> Result<ScalarField, SpectralError> {
    f.check_grid(v.grid())?;
    let grad = gradient(f);
    let mut acc = ScalarField::zeros(f.grid());
    for (vc, gc) in v.components().iter().zip(grad.components()) {
        let p = vc.zip_map(gc, |a, b| a * b);
        acc.axpy(1.0, &p);
    }
    Ok(dealias(&acc))
}
