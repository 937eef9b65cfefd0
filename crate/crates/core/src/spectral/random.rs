use rand::Rng;

use super::{Grid, ScalarField};

/// Random real field whose spectrum is restricted to the dealias mask and,
/// optionally, to wavenumbers `band.0 <= |k| <= band.1`.
///
/// The result is scaled to unit RMS value (`||f||_2 = L^{N/2}`) unless it
/// has no admissible modes, in which case it is zero.
pub fn random_masked_field<R: Rng + ?Sized>(
    grid: &Grid,
    rng: &mut R,
    band: Option<(f64, f64)>,
) -> ScalarField {
    let data: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let noise = ScalarField::new(grid, data).expect("length matches grid");
    let mut s = noise.spectrum().clone();
    s.apply_mask();
    if let Some((lo, hi)) = band {
        s.apply_multiplier(|i| {
            let k = grid.wavenumber(i);
            if k >= lo && k <= hi {
                1.0
            } else {
                0.0
            }
        });
    }
    let norm = s.l2_norm();
    if norm == 0.0 {
        return ScalarField::zeros(grid);
    }
    let target = grid.shape().volume().sqrt();
    s.apply_multiplier(|_| target / norm);
    ScalarField::from_spectrum(s)
}
