//! Littlewood-Paley analysis on the periodic grid.
//!
//! The ball multiplier `chi` equals one on `|k| <= 3/4` and vanishes on
//! `|k| >= 4/3`; the shell multiplier is `phi(xi) = chi(xi/2) - chi(xi)`, so
//! `chi + sum_q phi(2^-q .)` telescopes to one on the retained lattice.
//! Block `q = -1` is the ball; blocks `q >= 0` are the dyadic shells
//! `2^q [3/4, 8/3]`.

pub mod suite;

use thiserror::Error;

use crate::spectral::{
    fields_from_spectra, prime_spectra, Grid, ScalarField, SpectralError, Spectrum, VectorField,
};

pub const BALL_RADIUS: f64 = 4.0 / 3.0;
pub const PLATEAU_RADIUS: f64 = 3.0 / 4.0;
pub const SHELL_INNER: f64 = 3.0 / 4.0;
pub const SHELL_OUTER: f64 = 8.0 / 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("grid too coarse: largest retained wavenumber {max_wavenumber} does not reach the q=0 shell")]
    GridTooCoarse { max_wavenumber: f64 },
    #[error("block index {q} outside [{min}, {max}]")]
    OutOfRange { q: i32, min: i32, max: i32 },
    #[error("only B^s_{{2,1}} is supported, got p={p}, r={r}")]
    UnsupportedIndex { p: f64, r: f64 },
    #[error("block {q} of the field is zero")]
    ZeroBlock { q: i32 },
}

/// `g(t)/(g(t)+g(1-t))` with `g(t) = exp(-1/t)` for `t > 0`.
pub fn smooth_step(t: f64) -> f64 {
    let g = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = g(t);
        a / (a + g(1.0 - t))
    }
}

/// Radial ball multiplier.
pub fn chi(r: f64) -> f64 {
    if r <= PLATEAU_RADIUS {
        1.0
    } else if r >= BALL_RADIUS {
        0.0
    } else {
        smooth_step((BALL_RADIUS - r) / (BALL_RADIUS - PLATEAU_RADIUS))
    }
}

/// Radial shell multiplier, `chi(r/2) - chi(r)`.
pub fn phi(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

/// Sampled dyadic multipliers for one grid.
#[derive(Clone, Debug)]
pub struct DyadicCutoffs {
    grid: Grid,
    q_max: i32,
    /// `multipliers[q + 1]` holds block `q` sampled on every mode.
    multipliers: Vec<Vec<f64>>,
    /// Modes where block `q` is nonzero.
    support: Vec<Vec<u32>>,
}

pub fn build_cutoffs(grid: &Grid) -> Result<DyadicCutoffs, LpError> {
    let kmax = grid.dealias_radius();
    if kmax <= SHELL_INNER {
        return Err(LpError::GridTooCoarse {
            max_wavenumber: kmax,
        });
    }
    // largest q with 2^q * 3/4 below the dealias radius
    let mut q_max = 0;
    while SHELL_INNER * 2f64.powi(q_max + 1) < kmax {
        q_max += 1;
    }
    let mut multipliers = Vec::with_capacity(q_max as usize + 2);
    multipliers.push(grid.wavenumbers().iter().map(|&k| chi(k)).collect::<Vec<_>>());
    for q in 0..=q_max {
        let scale = 2f64.powi(-q);
        multipliers.push(grid.wavenumbers().iter().map(|&k| phi(scale * k)).collect());
    }
    Ok(DyadicCutoffs::from_multipliers(grid.clone(), q_max, multipliers))
}

impl DyadicCutoffs {
    fn from_multipliers(grid: Grid, q_max: i32, multipliers: Vec<Vec<f64>>) -> Self {
        let support = multipliers
            .iter()
            .map(|m| {
                m.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(i, _)| i as u32)
                    .collect()
            })
            .collect();
        Self {
            grid,
            q_max,
            multipliers,
            support,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn q_max(&self) -> i32 {
        self.q_max
    }

    /// All block indices, `-1..=q_max`.
    pub fn blocks(&self) -> std::ops::RangeInclusive<i32> {
        -1..=self.q_max
    }

    fn check_q(&self, q: i32) -> Result<usize, LpError> {
        if q < -1 || q > self.q_max {
            return Err(LpError::OutOfRange {
                q,
                min: -1,
                max: self.q_max,
            });
        }
        Ok((q + 1) as usize)
    }

    /// Multiplier of block `q` at mode `idx`.
    pub fn multiplier(&self, q: i32, idx: usize) -> f64 {
        self.multipliers[(q + 1) as usize][idx]
    }

    /// Max over retained modes of `|chi + sum_q phi_q - 1|`.
    pub fn partition_residual(&self) -> f64 {
        (0..self.grid.len())
            .filter(|&i| self.grid.in_mask(i))
            .map(|i| {
                let total: f64 = self.multipliers.iter().map(|m| m[i]).sum();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Copy with block `q` multiplied by `scale`; used to check that the
    /// property suite notices a broken partition.
    #[doc(hidden)]
    pub fn perturbed(&self, q: i32, scale: f64) -> Self {
        let mut multipliers = self.multipliers.clone();
        multipliers[(q + 1) as usize]
            .iter_mut()
            .for_each(|v| *v *= scale);
        Self::from_multipliers(self.grid.clone(), self.q_max, multipliers)
    }

    pub fn block_spectrum(&self, s: &Spectrum, q: i32) -> Result<Spectrum, LpError> {
        let slot = self.check_q(q)?;
        if s.grid() != &self.grid {
            return Err(SpectralError::GridMismatch {
                expected: self.grid.shape(),
                found: s.grid().shape(),
            }
            .into());
        }
        let mut out = Spectrum::zeros(&self.grid);
        let mult = &self.multipliers[slot];
        let coeffs = out.coeffs_mut();
        for &i in &self.support[slot] {
            let i = i as usize;
            coeffs[i] = s.coeffs()[i] * mult[i];
        }
        Ok(out)
    }

    /// `Delta_q f`.
    pub fn block(&self, f: &ScalarField, q: i32) -> Result<ScalarField, LpError> {
        f.check_grid(&self.grid)?;
        Ok(ScalarField::from_spectrum(self.block_spectrum(f.spectrum(), q)?))
    }

    /// Every block of `f`, ordered `q = -1..=q_max`.
    pub fn all_blocks(&self, f: &ScalarField) -> Result<Vec<ScalarField>, LpError> {
        f.check_grid(&self.grid)?;
        let specs = self
            .blocks()
            .map(|q| self.block_spectrum(f.spectrum(), q))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(fields_from_spectra(specs))
    }

    /// `S_q f = sum_{p <= q-1} Delta_p f`, for `0 <= q <= q_max + 1`.
    pub fn low_pass(&self, f: &ScalarField, q: i32) -> Result<ScalarField, LpError> {
        f.check_grid(&self.grid)?;
        if q < 0 || q > self.q_max + 1 {
            return Err(LpError::OutOfRange {
                q,
                min: 0,
                max: self.q_max + 1,
            });
        }
        let mut s = f.spectrum().clone();
        s.apply_multiplier(|i| (-1..q).map(|p| self.multiplier(p, i)).sum());
        Ok(ScalarField::from_spectrum(s))
    }

    /// `||Delta_q f||_2` from the coefficients (Parseval).
    pub fn block_norm_spectrum(&self, s: &Spectrum, q: i32) -> f64 {
        let slot = (q + 1) as usize;
        let mult = &self.multipliers[slot];
        let sum: f64 = self.support[slot]
            .iter()
            .map(|&i| {
                let i = i as usize;
                (mult[i] * mult[i]) * s.coeffs()[i].norm_sqr()
            })
            .sum();
        (self.grid.shape().volume() * sum).sqrt()
    }

    /// Squared block norms of `f`, ordered `q = -1..=q_max`.
    pub fn block_energies(&self, s: &Spectrum) -> Vec<f64> {
        self.blocks()
            .map(|q| self.block_norm_spectrum(s, q).powi(2))
            .collect()
    }

    pub fn block_norm(&self, f: &ScalarField, q: i32) -> Result<f64, LpError> {
        f.check_grid(&self.grid)?;
        self.check_q(q)?;
        Ok(self.block_norm_spectrum(f.spectrum(), q))
    }
}

/// Besov index `(s, p, r)`; only `p = 2`, `r = 1` is accepted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovIndex {
    s: f64,
}

impl BesovIndex {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self, LpError> {
        if p != 2.0 || r != 1.0 {
            return Err(LpError::UnsupportedIndex { p, r });
        }
        Ok(Self { s })
    }

    /// `B^s_{2,1}`.
    pub fn l2_sum(s: f64) -> Self {
        Self { s }
    }

    pub fn smoothness(&self) -> f64 {
        self.s
    }

    pub fn weight(&self, q: i32) -> f64 {
        2f64.powf(q as f64 * self.s)
    }
}

/// `sum_q 2^{qs} ||Delta_q f||_2`.
pub fn besov_norm(cutoffs: &DyadicCutoffs, f: &ScalarField, index: BesovIndex) -> f64 {
    besov_norm_of_components(cutoffs, &[f], index)
}

/// Besov norm of a tuple of fields, with the block L2 norm taken over all
/// components jointly.
pub fn besov_norm_of_components(
    cutoffs: &DyadicCutoffs,
    fields: &[&ScalarField],
    index: BesovIndex,
) -> f64 {
    prime_spectra(fields);
    let specs: Vec<&Spectrum> = fields.iter().map(|f| f.spectrum()).collect();
    besov_norm_of_spectra(cutoffs, &specs, index)
}

pub fn besov_norm_of_spectra(cutoffs: &DyadicCutoffs, specs: &[&Spectrum], index: BesovIndex) -> f64 {
    cutoffs
        .blocks()
        .map(|q| {
            let energy: f64 = specs
                .iter()
                .map(|s| cutoffs.block_norm_spectrum(s, q).powi(2))
                .sum();
            index.weight(q) * energy.sqrt()
        })
        .sum()
}

pub fn besov_norm_vector(cutoffs: &DyadicCutoffs, v: &VectorField, index: BesovIndex) -> f64 {
    let refs: Vec<&ScalarField> = v.components().iter().collect();
    besov_norm_of_components(cutoffs, &refs, index)
}

fn masked_sum(acc: ScalarField) -> ScalarField {
    crate::spectral::dealias(&acc)
}

/// Paraproduct `T_f g = sum_{q >= 1} S_{q-1} f Delta_q g`.
pub fn paraproduct(
    cutoffs: &DyadicCutoffs,
    f: &ScalarField,
    g: &ScalarField,
) -> Result<ScalarField, LpError> {
    let fb = cutoffs.all_blocks(f)?;
    let gb = cutoffs.all_blocks(g)?;
    Ok(paraproduct_from_blocks(cutoffs, &fb, &gb))
}

fn paraproduct_from_blocks(
    cutoffs: &DyadicCutoffs,
    fb: &[ScalarField],
    gb: &[ScalarField],
) -> ScalarField {
    let grid = cutoffs.grid();
    let mut low = ScalarField::zeros(grid);
    let mut acc = ScalarField::zeros(grid);
    // slot j holds block q = j - 1
    for slot in 2..fb.len() {
        low.axpy(1.0, &fb[slot - 2]);
        acc.axpy(1.0, &low.zip_map(&gb[slot], |a, b| a * b));
    }
    masked_sum(acc)
}

/// Remainder `R(f, g) = sum_{|p-q| <= 1} Delta_p f Delta_q g`.
pub fn remainder(
    cutoffs: &DyadicCutoffs,
    f: &ScalarField,
    g: &ScalarField,
) -> Result<ScalarField, LpError> {
    let fb = cutoffs.all_blocks(f)?;
    let gb = cutoffs.all_blocks(g)?;
    Ok(remainder_from_blocks(cutoffs, &fb, &gb))
}

fn remainder_from_blocks(
    cutoffs: &DyadicCutoffs,
    fb: &[ScalarField],
    gb: &[ScalarField],
) -> ScalarField {
    let mut acc = ScalarField::zeros(cutoffs.grid());
    let n = fb.len();
    for p in 0..n {
        let lo = p.saturating_sub(1);
        let hi = (p + 1).min(n - 1);
        let mut near = gb[lo].clone();
        for g in &gb[lo + 1..=hi] {
            near.axpy(1.0, g);
        }
        acc.axpy(1.0, &fb[p].zip_map(&near, |a, b| a * b));
    }
    masked_sum(acc)
}

/// The three Bony pieces `(T_f g, T_g f, R(f, g))`.
pub fn bony_decomposition(
    cutoffs: &DyadicCutoffs,
    f: &ScalarField,
    g: &ScalarField,
) -> Result<(ScalarField, ScalarField, ScalarField), LpError> {
    let fb = cutoffs.all_blocks(f)?;
    let gb = cutoffs.all_blocks(g)?;
    Ok((
        paraproduct_from_blocks(cutoffs, &fb, &gb),
        paraproduct_from_blocks(cutoffs, &gb, &fb),
        remainder_from_blocks(cutoffs, &fb, &gb),
    ))
}

/// Block energy, relative to the whole field, below which a block counts as empty.
const ZERO_BLOCK_ENERGY: f64 = 1e-26;

/// `||D^order Delta_q f||_2 / ||Delta_q f||_2`, with `D^order` the full
/// tensor of `order`-th derivatives (symbol `|k|^order`).
pub fn bernstein_ratio(
    cutoffs: &DyadicCutoffs,
    f: &ScalarField,
    q: i32,
    order: u32,
) -> Result<f64, LpError> {
    f.check_grid(cutoffs.grid())?;
    let block = cutoffs.block_spectrum(f.spectrum(), q)?;
    let grid = cutoffs.grid();
    let (mut num, mut den) = (0.0, 0.0);
    for (i, c) in block.coeffs().iter().enumerate() {
        let e = c.norm_sqr();
        den += e;
        num += grid.wavenumber(i).powi(2 * order as i32) * e;
    }
    let total: f64 = f.spectrum().coeffs().iter().map(|c| c.norm_sqr()).sum();
    if den <= ZERO_BLOCK_ENERGY * total || den == 0.0 {
        return Err(LpError::ZeroBlock { q });
    }
    Ok((num / den).sqrt())
}

/// Exact Bernstein bounds for block `q`: `None` as lower bound for the ball.
pub fn bernstein_bounds(q: i32, order: u32) -> (Option<f64>, f64) {
    let k = order as i32;
    if q < 0 {
        (None, BALL_RADIUS.powi(k))
    } else {
        let s = 2f64.powi(q);
        (Some((SHELL_INNER * s).powi(k)), (SHELL_OUTER * s).powi(k))
    }
}

/// `[u, Delta_q] . grad f = u . Delta_q grad f - Delta_q (u . grad f)`,
/// with both products dealiased.
pub fn commutator_block(
    cutoffs: &DyadicCutoffs,
    u: &VectorField,
    f: &ScalarField,
    q: i32,
) -> Result<ScalarField, LpError> {
    f.check_grid(cutoffs.grid())?;
    u.component(0).check_grid(cutoffs.grid())?;
    let grad_specs = crate::spectral::ops::gradient_spectra(f.spectrum());
    let blocked = grad_specs
        .iter()
        .map(|s| cutoffs.block_spectrum(s, q))
        .collect::<Result<Vec<_>, _>>()?;
    let grad = fields_from_spectra(grad_specs);
    let grad_block = fields_from_spectra(blocked);
    let grid = cutoffs.grid();
    let mut first = ScalarField::zeros(grid);
    let mut inner = ScalarField::zeros(grid);
    for (a, ua) in u.components().iter().enumerate() {
        first.axpy(1.0, &ua.zip_map(&grad_block[a], |x, y| x * y));
        inner.axpy(1.0, &ua.zip_map(&grad[a], |x, y| x * y));
    }
    let first = crate::spectral::dealias(&first);
    let mut inner_spec = inner.spectrum().clone();
    inner_spec.apply_mask();
    let second = ScalarField::from_spectrum(cutoffs.block_spectrum(&inner_spec, q)?);
    Ok(first.sub(&second))
}
