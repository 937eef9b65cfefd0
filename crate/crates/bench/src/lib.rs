//! Shared fixtures for the benchmarks.

use eplab_core::spectral::random_masked_field;
use eplab_core::{compatible_init, Grid, InitSpec, ModeSpec, ModeTarget, Params, ScalarField, SymmetricState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn grid(dim: usize, points: usize) -> Grid {
    Grid::new(dim, points, 2.0 * std::f64::consts::PI).expect("valid grid")
}

pub fn random_pair(grid: &Grid, seed: u64) -> (ScalarField, ScalarField) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (
        random_masked_field(grid, &mut rng, None),
        random_masked_field(grid, &mut rng, None),
    )
}

/// Small-amplitude state with density, longitudinal and solenoidal content.
pub fn mixed_state(grid: &Grid) -> SymmetricState {
    let dim = grid.dim();
    let wv = |a: i64, b: i64| {
        let mut v = vec![0; dim];
        v[0] = a;
        v[1] = b;
        v
    };
    let mode = |wavevector, target| ModeSpec {
        wavevector,
        amplitude: 1e-3,
        target,
    };
    let spec = InitSpec::Modes(vec![
        mode(wv(1, 0), ModeTarget::M),
        mode(wv(0, 2), ModeTarget::USolenoidal),
        mode(wv(2, 1), ModeTarget::ULongitudinal),
    ]);
    compatible_init(&spec, &Params::reference(), grid).expect("valid init")
}
