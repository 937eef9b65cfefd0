//! Periodic box descriptor and its Fourier lattice.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::SpectralError;

/// Smallest supported number of points per axis.
pub const MIN_POINTS: usize = 16;

/// Geometry of a periodic box `[0, L)^N` sampled with `M` points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape {
    pub dim: usize,
    pub points: usize,
    pub length: f64,
}

impl Shape {
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Volume of one grid cell, `(L/M)^N`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{} on L={}", self.points, self.dim, self.length)
    }
}

struct GridInner {
    shape: Shape,
    /// Signed lattice index per axis position (`i` or `i - M`).
    lattice: Vec<i64>,
    /// Physical wavevector per mode.
    kvec: Vec<[f64; 3]>,
    /// Wavevector used for derivatives: Nyquist components zeroed.
    dvec: Vec<[f64; 3]>,
    kmag: Vec<f64>,
    mask: Vec<bool>,
    /// Index of the mode `-k` for every mode `k`.
    negated: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Periodic grid with precomputed wavenumbers, dealias mask and FFT plans.
///
/// Cloning is cheap: all tables live behind an `Arc`. The FFT plans are
/// shared; every transform allocates its own scratch space, so a single
/// grid can be used from several threads.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("shape", &self.inner.shape).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.shape == other.inner.shape
    }
}

impl Grid {
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Self, SpectralError> {
        if !(2..=3).contains(&dim) {
            return Err(SpectralError::InvalidGrid(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if points < MIN_POINTS || points % 2 != 0 {
            return Err(SpectralError::InvalidGrid(format!(
                "points per axis must be even and at least {MIN_POINTS}, got {points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SpectralError::InvalidGrid(format!(
                "box length must be positive, got {length}"
            )));
        }
        let shape = Shape { dim, points, length };
        let m = points as i64;
        let lattice: Vec<i64> = (0..m).map(|i| if i < m / 2 { i } else { i - m }).collect();
        let nyquist = -m / 2;
        let base = 2.0 * PI / length;
        // |n_j| <= (2/3)(M/2), i.e. |k_j| <= (2/3) pi M / L
        let keep = |n: i64| 3 * n.abs() <= m;

        let total = shape.len();
        let mut kvec = Vec::with_capacity(total);
        let mut dvec = Vec::with_capacity(total);
        let mut kmag = Vec::with_capacity(total);
        let mut mask = Vec::with_capacity(total);
        let mut negated = Vec::with_capacity(total);
        let mut idx = [0usize; 3];
        for flat in 0..total {
            let mut rem = flat;
            for a in (0..dim).rev() {
                idx[a] = rem % points;
                rem /= points;
            }
            let mut k = [0.0; 3];
            let mut d = [0.0; 3];
            let mut inside = true;
            let mut neg = 0usize;
            for a in 0..dim {
                let n = lattice[idx[a]];
                k[a] = base * n as f64;
                d[a] = if n == nyquist { 0.0 } else { k[a] };
                inside &= keep(n);
                neg = neg * points + (points - idx[a]) % points;
            }
            kvec.push(k);
            dvec.push(d);
            kmag.push((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt());
            mask.push(inside);
            negated.push(neg);
        }

        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);
        Ok(Self {
            inner: Arc::new(GridInner {
                shape,
                lattice,
                kvec,
                dvec,
                kmag,
                mask,
                negated,
                forward,
                inverse,
            }),
        })
    }

    pub fn shape(&self) -> Shape {
        self.inner.shape
    }

    pub fn dim(&self) -> usize {
        self.inner.shape.dim
    }

    pub fn points(&self) -> usize {
        self.inner.shape.points
    }

    pub fn length(&self) -> f64 {
        self.inner.shape.length
    }

    /// Number of samples (equal to the number of Fourier modes).
    pub fn len(&self) -> usize {
        self.inner.kvec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.kvec.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.inner.shape.spacing()
    }

    /// Wavevector of mode `idx`; unused trailing components are zero.
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        self.inner.kvec[idx]
    }

    pub(crate) fn derivative_vector(&self, idx: usize) -> [f64; 3] {
        self.inner.dvec[idx]
    }

    pub fn wavenumber(&self, idx: usize) -> f64 {
        self.inner.kmag[idx]
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.inner.kmag
    }

    pub fn mask(&self) -> &[bool] {
        &self.inner.mask
    }

    pub fn in_mask(&self, idx: usize) -> bool {
        self.inner.mask[idx]
    }

    pub(crate) fn negated(&self, idx: usize) -> usize {
        self.inner.negated[idx]
    }

    /// Largest wavenumber magnitude among retained (dealiased) modes.
    pub fn dealias_radius(&self) -> f64 {
        self.inner
            .kmag
            .iter()
            .zip(&self.inner.mask)
            .filter(|(_, &m)| m)
            .map(|(&k, _)| k)
            .fold(0.0, f64::max)
    }

    /// Flat mode index of an integer lattice vector (components taken modulo M).
    pub fn mode_index(&self, lattice: &[i64]) -> usize {
        let m = self.points() as i64;
        lattice
            .iter()
            .take(self.dim())
            .fold(0usize, |acc, &n| acc * self.points() + n.rem_euclid(m) as usize)
    }

    /// Physical coordinates of sample `idx`.
    pub fn coordinates(&self, idx: usize) -> [f64; 3] {
        let mut x = [0.0; 3];
        let mut rem = idx;
        let h = self.spacing();
        for a in (0..self.dim()).rev() {
            x[a] = (rem % self.points()) as f64 * h;
            rem /= self.points();
        }
        x
    }

    /// Signed integer lattice vector of mode `idx`.
    pub fn lattice_vector(&self, idx: usize) -> [i64; 3] {
        let mut n = [0i64; 3];
        let mut rem = idx;
        for a in (0..self.dim()).rev() {
            n[a] = self.inner.lattice[rem % self.points()];
            rem /= self.points();
        }
        n
    }

    /// In-place N-dimensional FFT over the row-major buffer.
    ///
    /// The forward direction divides by `M^N`, so `data[k]` ends up holding
    /// the Fourier-series coefficient of mode `k`.
    pub(crate) fn fft_in_place(&self, data: &mut [Complex64], forward: bool) {
        let inner = &*self.inner;
        let m = inner.shape.points;
        let dim = inner.shape.dim;
        let plan = if forward { &inner.forward } else { &inner.inverse };
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);

        let mut lines = vec![Complex64::default(); data.len()];
        for axis in 0..dim - 1 {
            let stride = m.pow((dim - 1 - axis) as u32);
            let outer = data.len() / (m * stride);
            let mut line = 0;
            for o in 0..outer {
                let base = o * m * stride;
                for j in 0..stride {
                    let dst = &mut lines[line * m..(line + 1) * m];
                    for (i, v) in dst.iter_mut().enumerate() {
                        *v = data[base + i * stride + j];
                    }
                    line += 1;
                }
            }
            plan.process_with_scratch(&mut lines, &mut scratch);
            let mut line = 0;
            for o in 0..outer {
                let base = o * m * stride;
                for j in 0..stride {
                    let src = &lines[line * m..(line + 1) * m];
                    for (i, v) in src.iter().enumerate() {
                        data[base + i * stride + j] = *v;
                    }
                    line += 1;
                }
            }
        }
        if forward {
            let norm = 1.0 / data.len() as f64;
            data.iter_mut().for_each(|v| *v *= norm);
        }
    }
}
