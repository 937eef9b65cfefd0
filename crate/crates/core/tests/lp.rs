use std::f64::consts::PI;

use eplab_core::lp::{
    bernstein_bounds, bernstein_ratio, besov_norm, besov_norm_of_components, bony_decomposition,
    remainder, BALL_RADIUS, SHELL_INNER, SHELL_OUTER,
};
use eplab_core::spectral::{dealias, product, random_masked_field};
use eplab_core::{build_cutoffs, BesovIndex, DyadicCutoffs, Grid, LpError, ScalarField};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn setup(dim: usize, points: usize) -> DyadicCutoffs {
    build_cutoffs(&Grid::new(dim, points, 2.0 * PI).unwrap()).unwrap()
}

fn random(c: &DyadicCutoffs, seed: u64) -> ScalarField {
    random_masked_field(c.grid(), &mut ChaCha8Rng::seed_from_u64(seed), None)
}

/// `int f g dx` as a Riemann sum over the samples.
fn inner(f: &ScalarField, g: &ScalarField) -> f64 {
    let dv = f.grid().shape().cell_volume();
    f.samples().iter().zip(g.samples()).map(|(a, b)| a * b).sum::<f64>() * dv
}

fn sum(fields: &[ScalarField]) -> ScalarField {
    let mut acc = ScalarField::zeros(fields[0].grid());
    for f in fields {
        acc.axpy(1.0, f);
    }
    acc
}

#[test]
fn block_count_on_reference_grids() {
    assert_eq!(setup(2, 128).q_max(), 6);
    // q_max is the last shell whose inner edge 2^q 3/4 is below the largest retained |k|
    for (dim, points) in [(2, 16), (2, 48), (3, 32)] {
        let c = setup(dim, points);
        let g = c.grid();
        let kmax = (0..g.len())
            .filter(|&i| g.in_mask(i))
            .map(|i| g.wavenumber(i))
            .fold(0.0, f64::max);
        let q = c.q_max();
        assert!(SHELL_INNER * 2f64.powi(q) < kmax && SHELL_INNER * 2f64.powi(q + 1) >= kmax);
    }
}

#[test]
fn multipliers_are_supported_on_their_shells() {
    let c = setup(2, 64);
    let g = c.grid();
    for idx in 0..g.len() {
        let k = g.wavenumber(idx);
        for q in c.blocks() {
            let m = c.multiplier(q, idx);
            assert!((0.0..=1.0).contains(&m), "{q} {idx} {m}");
            let (lo, hi) = if q < 0 {
                (0.0, BALL_RADIUS)
            } else {
                let s = 2f64.powi(q);
                (SHELL_INNER * s, SHELL_OUTER * s)
            };
            if (q >= 0 && k <= lo) || k >= hi {
                assert_eq!(m, 0.0, "q={q} k={k}");
            }
        }
        // at most two overlapping blocks per mode
        let active = c.blocks().filter(|&q| c.multiplier(q, idx) > 0.0).count();
        assert!(active <= 2);
    }
    assert!(c.partition_residual() <= 1e-12);
}

#[test]
fn multipliers_are_radial() {
    let c = setup(2, 64);
    let g = c.grid();
    // (3,4) and (5,0) share |k| = 5
    let (a, b) = (g.mode_index(&[3, 4]), g.mode_index(&[5, 0]));
    let d = g.mode_index(&[0, -5]);
    for q in c.blocks() {
        assert_eq!(c.multiplier(q, a), c.multiplier(q, b));
        assert_eq!(c.multiplier(q, a), c.multiplier(q, d));
    }
}

#[test]
fn plateau_mode_besov_norm() {
    // |k| = 3 = 2 * 3/2 sits where the q = 1 multiplier equals one
    let c = setup(2, 64);
    let f = ScalarField::from_fn(c.grid(), |x| (3.0 * x[0]).cos());
    let l2 = 2.0 * PI / 2f64.sqrt();
    assert!((f.l2_norm() - l2).abs() < 1e-12);
    for s in [0.0, 1.0, 2.0, -0.5] {
        let expected = 2f64.powf(s) * l2;
        let got = besov_norm(&c, &f, BesovIndex::l2_sum(s));
        assert!((got - expected).abs() < 1e-12 * expected, "s={s}: {got} vs {expected}");
    }
    let block = c.block(&f, 1).unwrap();
    assert!(block.sub(&f).max_abs() < 1e-13);
}

#[test]
fn straddling_mode_splits_between_two_blocks() {
    // |k| = 1 lies between the ball plateau and the q = 0 plateau
    let c = setup(2, 32);
    let g = c.grid();
    let f = ScalarField::from_fn(g, |x| x[1].sin());
    let idx = g.mode_index(&[0, 1]);
    let (a, b) = (c.multiplier(-1, idx), c.multiplier(0, idx));
    assert!(a > 0.0 && b > 0.0);
    assert!((a + b - 1.0).abs() < 1e-15);
    let l2 = f.l2_norm();
    let expected = (0.5f64.powf(1.5) * a + b) * l2;
    let got = besov_norm(&c, &f, BesovIndex::l2_sum(1.5));
    assert!((got - expected).abs() < 1e-12 * expected);
}

#[test]
fn index_and_range_errors() {
    let c = setup(2, 32);
    let f = random(&c, 1);
    assert!(matches!(c.block(&f, -2), Err(LpError::OutOfRange { .. })));
    assert!(matches!(c.block(&f, c.q_max() + 1), Err(LpError::OutOfRange { .. })));
    assert!(c.low_pass(&f, c.q_max() + 2).is_err());
    assert!(BesovIndex::new(1.0, 2.0, 2.0).is_err());
    assert!(BesovIndex::new(1.0, 1.0, 1.0).is_err());
    assert!(BesovIndex::new(1.0, 2.0, 1.0).is_ok());
    let other = ScalarField::zeros(&Grid::new(2, 64, 2.0 * PI).unwrap());
    assert!(c.block(&other, 0).is_err());
    assert!(build_cutoffs(&Grid::new(2, 16, 200.0).unwrap()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn blocks_reconstruct_and_telescope(seed in any::<u64>(), dim in 2usize..=3) {
        let c = setup(dim, if dim == 2 { 64 } else { 16 });
        let f = random(&c, seed);
        let blocks = c.all_blocks(&f).unwrap();
        let scale = f.l2_norm();
        prop_assert!(sum(&blocks).sub(&dealias(&f)).l2_norm() <= 1e-12 * scale);
        for q in 0..=c.q_max() + 1 {
            let direct = sum(&blocks[..q as usize + 1]);
            prop_assert!(c.low_pass(&f, q).unwrap().sub(&direct).l2_norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn distant_blocks_are_orthogonal(seed in any::<u64>()) {
        let c = setup(2, 64);
        let f = random(&c, seed);
        let g = random(&c, seed.wrapping_add(7));
        let fb = c.all_blocks(&f).unwrap();
        let gb = c.all_blocks(&g).unwrap();
        let scale = f.l2_norm() * g.l2_norm();
        for p in 0..fb.len() {
            for q in 0..gb.len() {
                if p.abs_diff(q) >= 2 {
                    prop_assert!(inner(&fb[p], &gb[q]).abs() <= 1e-12 * scale, "{p} {q}");
                }
            }
        }
    }

    #[test]
    fn block_norms_match_physical_samples(seed in any::<u64>(), s in -1.0f64..3.0) {
        let c = setup(2, 64);
        let f = random(&c, seed);
        let blocks = c.all_blocks(&f).unwrap();
        let expected: f64 = c
            .blocks()
            .zip(&blocks)
            .map(|(q, b)| 2f64.powf(q as f64 * s) * inner(b, b).sqrt())
            .sum();
        let got = besov_norm(&c, &f, BesovIndex::l2_sum(s));
        prop_assert!((got - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn besov_norm_is_a_norm(seed in any::<u64>(), a in -5.0f64..5.0, s in 0.0f64..3.0) {
        let c = setup(2, 64);
        let idx = BesovIndex::l2_sum(s);
        let f = random(&c, seed);
        let g = random(&c, seed ^ 0xabc);
        let nf = besov_norm(&c, &f, idx);
        prop_assert!((besov_norm(&c, &f.scaled(a), idx) - a.abs() * nf).abs() <= 1e-12 * nf);
        let mut h = f.clone();
        h.axpy(1.0, &g);
        prop_assert!(besov_norm(&c, &h, idx) <= nf + besov_norm(&c, &g, idx) + 1e-12 * nf);
        // the joint tuple norm sits between the largest component and the sum
        let joint = besov_norm_of_components(&c, &[&f, &g], idx);
        let ng = besov_norm(&c, &g, idx);
        prop_assert!(joint >= nf.max(ng) * (1.0 - 1e-12));
        prop_assert!(joint <= (nf + ng) * (1.0 + 1e-12));
    }

    #[test]
    fn bony_pieces_sum_to_the_product(seed in any::<u64>(), dim in 2usize..=3) {
        let c = setup(dim, if dim == 2 { 64 } else { 16 });
        let f = random(&c, seed);
        let g = random(&c, seed.wrapping_mul(31).wrapping_add(1));
        let (tfg, tgf, r) = bony_decomposition(&c, &f, &g).unwrap();
        let mut total = tfg;
        total.axpy(1.0, &tgf);
        total.axpy(1.0, &r);
        let fg = product(&f, &g).unwrap();
        prop_assert!(total.sub(&fg).l2_norm() <= 1e-12 * fg.l2_norm().max(1.0));
        let r_swapped = remainder(&c, &g, &f).unwrap();
        prop_assert!(r_swapped.sub(&r).l2_norm() <= 1e-12 * r.l2_norm().max(1e-300));
    }

    #[test]
    fn bernstein_ratios_within_bounds(seed in any::<u64>(), order in 1u32..=3) {
        let c = setup(2, 128);
        let f = random(&c, seed);
        for q in c.blocks() {
            let ratio = bernstein_ratio(&c, &f, q, order).unwrap();
            let (lo, hi) = bernstein_bounds(q, order);
            prop_assert!(ratio <= hi * (1.0 + 1e-12));
            if let Some(lo) = lo {
                prop_assert!(ratio >= lo * (1.0 - 1e-12));
            }
        }
    }
}

#[test]
fn bernstein_needs_a_nonzero_block() {
    let c = setup(2, 32);
    let f = ScalarField::from_fn(c.grid(), |x| (3.0 * x[0]).cos());
    assert!(matches!(bernstein_ratio(&c, &f, 3, 1), Err(LpError::ZeroBlock { q: 3 })));
    // a pure mode has ratio |k|^order exactly
    let r = bernstein_ratio(&c, &f, 1, 2).unwrap();
    assert!((r - 9.0).abs() < 1e-12);
}
