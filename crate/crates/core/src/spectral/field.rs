//! Real-valued fields on a [`Grid`] and their Fourier coefficients.
//!
//! Coefficients are Fourier-series coefficients: `f(x) = sum_k c_k e^{ik.x}`,
//! so a constant field has `c_0` equal to its mean. With the L2 norm taken as
//! `int |f|^2 dx` over the box, Parseval reads `||f||^2 = L^N sum |c_k|^2`.

use std::sync::OnceLock;

use rustfft::num_complex::Complex64;

use super::{Grid, SpectralError};

/// Fourier coefficients on a grid's lattice, in the grid's flat mode order.
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                found: coeffs.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Fourier-side L2 norm, `sqrt(L^N sum |c_k|^2)`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.shape().volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>())
            .sqrt()
    }

    /// Zero every coefficient outside the dealias mask.
    pub fn apply_mask(&mut self) {
        for (c, &keep) in self.coeffs.iter_mut().zip(self.grid.mask()) {
            if !keep {
                *c = Complex64::default();
            }
        }
    }

    /// Multiply mode-by-mode with a real multiplier.
    pub fn apply_multiplier(&mut self, symbol: impl Fn(usize) -> f64) {
        for (idx, c) in self.coeffs.iter_mut().enumerate() {
            *c *= symbol(idx);
        }
    }

    pub(crate) fn mapped(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Spectrum {
        Spectrum {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().enumerate().map(|(i, &c)| f(i, c)).collect(),
        }
    }
}

/// Real samples of a scalar function on the physical lattice.
///
/// The forward transform is computed on first use and cached; any mutable
/// access to the samples drops the cache.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
    spectrum: OnceLock<Spectrum>,
}

impl ScalarField {
    pub fn new(grid: &Grid, data: Vec<f64>) -> Result<Self, SpectralError> {
        if data.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                found: data.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            data,
            spectrum: OnceLock::new(),
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self {
            grid: grid.clone(),
            data: vec![value; grid.len()],
            spectrum: OnceLock::new(),
        }
    }

    /// Sample `f(x)` at every grid point (`x` padded with zeros to three components).
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.coordinates(i))).collect();
        Self {
            grid: grid.clone(),
            data,
            spectrum: OnceLock::new(),
        }
    }

    /// Inverse transform; the real part of the synthesis is kept.
    pub fn from_spectrum(spectrum: Spectrum) -> Self {
        let grid = spectrum.grid.clone();
        let mut buf = spectrum.coeffs.clone();
        grid.fft_in_place(&mut buf, false);
        let data = buf.iter().map(|c| c.re).collect();
        let cache = OnceLock::new();
        let _ = cache.set(spectrum);
        Self {
            grid,
            data,
            spectrum: cache,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.data
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        self.spectrum = OnceLock::new();
        &mut self.data
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.data
    }

    pub fn has_cached_spectrum(&self) -> bool {
        self.spectrum.get().is_some()
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            let mut buf: Vec<Complex64> =
                self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            self.grid.fft_in_place(&mut buf, true);
            Spectrum {
                grid: self.grid.clone(),
                coeffs: buf,
            }
        })
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<(), SpectralError> {
        if &self.grid == grid {
            Ok(())
        } else {
            Err(SpectralError::GridMismatch {
                expected: grid.shape(),
                found: self.grid.shape(),
            })
        }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Physical-space L2 norm `(int |f|^2 dx)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.shape().cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index and value of the smallest sample.
    pub fn argmin(&self) -> (usize, f64) {
        self.data
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        Self {
            grid: self.grid.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid.clone(),
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        self.map(|v| s * v)
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &ScalarField) {
        debug_assert_eq!(self.grid, other.grid);
        for (x, y) in self.samples_mut().iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.zip_map(other, |a, b| a - b)
    }
}

/// `N` scalar components on a common grid.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self, SpectralError> {
        let grid = components
            .first()
            .ok_or(SpectralError::ComponentCount {
                expected: 2,
                found: 0,
            })?
            .grid()
            .clone();
        if components.len() != grid.dim() {
            return Err(SpectralError::ComponentCount {
                expected: grid.dim(),
                found: components.len(),
            });
        }
        for c in &components {
            c.check_grid(&grid)?;
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        Self {
            components: (0..grid.dim())
                .map(|a| ScalarField::from_fn(grid, |x| f(x)[a]))
                .collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [ScalarField] {
        &mut self.components
    }

    pub fn component(&self, a: usize) -> &ScalarField {
        &self.components[a]
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Pointwise maximum of the Euclidean length.
    pub fn max_magnitude(&self) -> f64 {
        let n = self.grid().len();
        (0..n)
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c.samples()[i].powi(2))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
            .sqrt()
    }

    pub fn scaled(&self, s: f64) -> VectorField {
        Self {
            components: self.components.iter().map(|c| c.scaled(s)).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.zip_map(b, |x, y| x + y))
                .collect(),
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }
}

/// Fill the spectrum caches of `fields`, transforming two real fields per
/// complex FFT.
pub fn prime_spectra(fields: &[&ScalarField]) {
    let pending: Vec<&ScalarField> = fields
        .iter()
        .copied()
        .filter(|f| !f.has_cached_spectrum())
        .collect();
    for pair in pending.chunks(2) {
        match pair {
            [a, b] if a.grid == b.grid => {
                let (sa, sb) = forward_pair(a, b);
                let _ = a.spectrum.set(sa);
                let _ = b.spectrum.set(sb);
            }
            _ => {
                for f in pair {
                    f.spectrum();
                }
            }
        }
    }
}

fn forward_pair(a: &ScalarField, b: &ScalarField) -> (Spectrum, Spectrum) {
    let grid = &a.grid;
    let mut buf: Vec<Complex64> = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| Complex64::new(x, y))
        .collect();
    grid.fft_in_place(&mut buf, true);
    let mut ca = Vec::with_capacity(buf.len());
    let mut cb = Vec::with_capacity(buf.len());
    for (idx, &z) in buf.iter().enumerate() {
        let zn = buf[grid.negated(idx)].conj();
        ca.push((z + zn) * 0.5);
        cb.push((z - zn) * Complex64::new(0.0, -0.5));
    }
    (
        Spectrum {
            grid: grid.clone(),
            coeffs: ca,
        },
        Spectrum {
            grid: grid.clone(),
            coeffs: cb,
        },
    )
}

/// Synthesize real fields from (Hermitian) spectra, two per complex FFT.
pub fn fields_from_spectra(spectra: Vec<Spectrum>) -> Vec<ScalarField> {
    let mut out = Vec::with_capacity(spectra.len());
    let mut iter = spectra.into_iter();
    while let Some(a) = iter.next() {
        match iter.next() {
            Some(b) if a.grid == b.grid => {
                let grid = a.grid.clone();
                let mut buf: Vec<Complex64> = a
                    .coeffs
                    .iter()
                    .zip(&b.coeffs)
                    .map(|(&x, &y)| x + Complex64::new(-y.im, y.re))
                    .collect();
                grid.fft_in_place(&mut buf, false);
                for (spec, pick) in [(a, 0usize), (b, 1)] {
                    let data = buf
                        .iter()
                        .map(|z| if pick == 0 { z.re } else { z.im })
                        .collect();
                    let cache = OnceLock::new();
                    let _ = cache.set(spec);
                    out.push(ScalarField {
                        grid: grid.clone(),
                        data,
                        spectrum: cache,
                    });
                }
            }
            Some(b) => {
                out.push(ScalarField::from_spectrum(a));
                out.push(ScalarField::from_spectrum(b));
            }
            None => out.push(ScalarField::from_spectrum(a)),
        }
    }
    out
}
