//! Property suite for the dyadic decomposition, run on random masked fields.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{bernstein_bounds, bernstein_ratio, bony_decomposition, DyadicCutoffs, LpError};
use crate::spectral::{product, random_masked_field, ScalarField};

pub const PARTITION_TOL: f64 = 1e-14;
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
pub const LOCALIZATION_TOL: f64 = 1e-12;
pub const BONY_TOL: f64 = 1e-10;
/// Bernstein bounds are exact; this only absorbs rounding.
pub const BERNSTEIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub dim: usize,
    pub points: usize,
    pub length: f64,
    pub q_max: i32,
    pub fields: usize,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn rms_norm(f: &ScalarField) -> f64 {
    f.l2_norm() / f.grid().shape().volume().sqrt()
}

/// Runs every check on `fields` pairs of random masked fields of unit RMS.
pub fn run_suite(cutoffs: &DyadicCutoffs, fields: usize, seed: u64) -> Result<SuiteReport, LpError> {
    let grid = cutoffs.grid().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut orthogonality: f64 = 0.0;
    let mut localization: f64 = 0.0;
    let mut bony: f64 = 0.0;
    let mut reconstruction: f64 = 0.0;
    let mut bernstein: f64 = 0.0;

    for _ in 0..fields {
        let f = random_masked_field(&grid, &mut rng, None);
        let g = random_masked_field(&grid, &mut rng, None);
        let fnorm = f.l2_norm();

        // Delta_p Delta_q f = 0 for |p - q| >= 2
        for q in cutoffs.blocks() {
            let bq = cutoffs.block_spectrum(f.spectrum(), q)?;
            for p in cutoffs.blocks().filter(|p| (p - q).abs() >= 2) {
                let bpq = cutoffs.block_spectrum(&bq, p)?;
                orthogonality = orthogonality.max(bpq.l2_norm() / fnorm);
            }
        }

        // sum_q Delta_q f = f
        let blocks = cutoffs.all_blocks(&f)?;
        let mut sum = ScalarField::zeros(&grid);
        for b in &blocks {
            sum.axpy(1.0, b);
        }
        reconstruction = reconstruction.max(sum.sub(&f).l2_norm() / fnorm);

        // Delta_q (S_{p-1} f Delta_p g) = 0 for |p - q| >= 5
        let gblocks = cutoffs.all_blocks(&g)?;
        let mut low = ScalarField::zeros(&grid);
        for p in 0..=cutoffs.q_max() {
            if p >= 1 {
                low.axpy(1.0, &blocks[(p - 1) as usize]);
            }
            let far: Vec<i32> = cutoffs.blocks().filter(|q| (p - q).abs() >= 5).collect();
            if far.is_empty() || p == 0 {
                continue;
            }
            let prod = product(&low, &gblocks[(p + 1) as usize])?;
            for q in far {
                let b = cutoffs.block(&prod, q)?;
                localization = localization.max(rms_norm(&b));
            }
        }

        // T_f g + T_g f + R(f, g) = f g
        let exact = product(&f, &g)?;
        let (tf, tg, r) = bony_decomposition(cutoffs, &f, &g)?;
        let mut total = tf;
        total.axpy(1.0, &tg);
        total.axpy(1.0, &r);
        bony = bony.max(total.sub(&exact).l2_norm() / exact.l2_norm());

        // two-sided Bernstein bounds for first and second derivatives
        for q in cutoffs.blocks() {
            for order in 1..=2 {
                let ratio = match bernstein_ratio(cutoffs, &f, q, order) {
                    Ok(r) => r,
                    Err(LpError::ZeroBlock { .. }) => continue,
                    Err(e) => return Err(e),
                };
                let (lo, hi) = bernstein_bounds(q, order);
                let below = lo.map_or(0.0, |lo| (lo - ratio) / lo);
                let above = (ratio - hi) / hi;
                bernstein = bernstein.max(below.max(above).max(0.0));
            }
        }
    }

    let partition = cutoffs.partition_residual();
    let check = |name: &str, max_residual: f64, tolerance: f64| CheckResult {
        name: name.to_string(),
        max_residual,
        tolerance,
        passed: max_residual <= tolerance,
    };
    let shape = grid.shape();
    Ok(SuiteReport {
        dim: shape.dim,
        points: shape.points,
        length: shape.length,
        q_max: cutoffs.q_max(),
        fields,
        seed,
        checks: vec![
            check("partition_of_unity", partition, PARTITION_TOL),
            check("reconstruction", reconstruction, ORTHOGONALITY_TOL),
            check("almost_orthogonality", orthogonality, ORTHOGONALITY_TOL),
            check("product_localization", localization, LOCALIZATION_TOL),
            check("bony_reconstruction", bony, BONY_TOL),
            check("bernstein_bounds", bernstein, BERNSTEIN_SLACK),
        ],
    })
}
