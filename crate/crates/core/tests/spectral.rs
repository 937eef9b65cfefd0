use std::f64::consts::PI;

use eplab_core::spectral::ops::{advect, dealias_vector, poisson_gradient_unchecked};
use eplab_core::spectral::{
    curl, dealias, divergence, forward_transform, gradient, inverse_transform, poisson_gradient,
    product, random_masked_field, riesz_div_projection, Vorticity,
};
use eplab_core::{Grid, ScalarField, SpectralError, VectorField};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

fn grid(dim: usize, points: usize, length: f64) -> Grid {
    Grid::new(dim, points, length).unwrap()
}

fn random(g: &Grid, seed: u64) -> ScalarField {
    random_masked_field(g, &mut ChaCha8Rng::seed_from_u64(seed), None)
}

fn rel(a: &ScalarField, b: &ScalarField) -> f64 {
    a.sub(b).l2_norm() / b.l2_norm().max(1e-300)
}

/// `(1/M^N) sum_x f(x) exp(-i k.x)` evaluated term by term.
fn direct_dft(f: &ScalarField, lattice: [i64; 3]) -> Complex64 {
    let g = f.grid();
    let base = 2.0 * PI / g.length();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &v) in f.samples().iter().enumerate() {
        let x = g.coordinates(i);
        let phase: f64 = (0..g.dim()).map(|a| base * lattice[a] as f64 * x[a]).sum();
        acc += v * Complex64::from_polar(1.0, -phase);
    }
    acc / g.len() as f64
}

#[test]
fn transform_matches_direct_sum() {
    let g = grid(2, 16, 3.0);
    let f = ScalarField::from_fn(&g, |x| (x[0] * 0.3).sin().exp() + x[1] * x[1]);
    let s = forward_transform(&g, &f).unwrap();
    for idx in 0..g.len() {
        let direct = direct_dft(&f, g.lattice_vector(idx));
        assert!((s.coeffs()[idx] - direct).norm() < 1e-13, "{idx}");
    }
}

#[test]
fn transform_matches_direct_sum_3d() {
    let g = grid(3, 16, 2.0 * PI);
    let f = random(&g, 4);
    for idx in (0..g.len()).step_by(97) {
        let direct = direct_dft(&f, g.lattice_vector(idx));
        assert!((f.spectrum().coeffs()[idx] - direct).norm() < 1e-14);
    }
}

#[test]
fn constant_and_cosine_spectra() {
    let g = grid(2, 32, 2.0 * PI);
    let s = ScalarField::constant(&g, 2.5).spectrum().clone();
    assert!((s.coeffs()[0] - Complex64::new(2.5, 0.0)).norm() < 1e-15);
    assert!(s.coeffs()[1..].iter().all(|c| c.norm() < 1e-15));
    let c = ScalarField::from_fn(&g, |x| x[0].cos());
    let nonzero: Vec<[i64; 3]> = (0..g.len())
        .filter(|&i| c.spectrum().coeffs()[i].norm() > 1e-14)
        .map(|i| g.lattice_vector(i))
        .collect();
    assert_eq!(nonzero.len(), 2);
    assert!(nonzero.contains(&[1, 0, 0]) && nonzero.contains(&[-1, 0, 0]));
}

#[test]
fn dimension_mismatch() {
    let (a, b) = (grid(2, 16, 1.0), grid(2, 32, 1.0));
    let f = ScalarField::zeros(&a);
    assert!(forward_transform(&b, &f).is_err());
    assert!(matches!(
        ScalarField::new(&a, vec![0.0; 5]),
        Err(SpectralError::LengthMismatch { .. })
    ));
}

#[test]
fn non_power_of_two_grid() {
    let g = grid(2, 48, 2.0 * PI);
    let f = random(&g, 1);
    let back = inverse_transform(&g, &forward_transform(&g, &f).unwrap()).unwrap();
    assert!(rel(&back, &f) < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn round_trip_parseval_hermitian(seed in any::<u64>(), dim in 2usize..=3, length in 0.5f64..20.0) {
        let g = grid(dim, if dim == 2 { 64 } else { 16 }, length);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..g.len()).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
        let f = ScalarField::new(&g, data).unwrap();
        let s = forward_transform(&g, &f).unwrap();
        let back = inverse_transform(&g, &s).unwrap();
        prop_assert!(rel(&back, &f) <= 1e-12);
        // ||f||^2 = L^N sum |c|^2
        let physical: f64 = f.samples().iter().map(|v| v * v).sum::<f64>() * g.shape().cell_volume();
        let fourier: f64 = s.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>() * g.length().powi(dim as i32);
        prop_assert!((physical - fourier).abs() <= 1e-12 * physical);
        for idx in 0..g.len() {
            let v = g.lattice_vector(idx);
            let neg = g.mode_index(&[-v[0], -v[1], -v[2]][..dim]);
            prop_assert!((s.coeffs()[idx] - s.coeffs()[neg].conj()).norm() <= 1e-14 * (1.0 + s.coeffs()[idx].norm()));
        }
    }

    #[test]
    fn derivatives_apply_the_symbol(k1 in -10i64..=10, k2 in -10i64..=10, k3 in -5i64..=5, dim in 2usize..=3, phase in 0.0f64..6.3) {
        let g = grid(dim, 32, 4.0);
        let base = 2.0 * PI / 4.0;
        let k = [base * k1 as f64, base * k2 as f64, if dim == 3 { base * k3 as f64 } else { 0.0 }];
        let arg = move |x: [f64; 3]| k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + phase;
        let f = ScalarField::from_fn(&g, |x| arg(x).sin());
        let grad = gradient(&f);
        for a in 0..dim {
            let exact = ScalarField::from_fn(&g, |x| k[a] * arg(x).cos());
            prop_assert!(grad.component(a).sub(&exact).max_abs() <= 1e-11);
        }
        // a field along a fixed direction d: div = k.d cos, curl = k x d cos
        let d = [0.3, -1.1, if dim == 3 { 0.7 } else { 0.0 }];
        let v = VectorField::from_fn(&g, |x| {
            let s = arg(x).sin();
            [d[0] * s, d[1] * s, d[2] * s]
        });
        let kd: f64 = (0..3).map(|a| k[a] * d[a]).sum();
        let div_exact = ScalarField::from_fn(&g, |x| kd * arg(x).cos());
        prop_assert!(divergence(&v).sub(&div_exact).max_abs() <= 1e-11);
        match curl(&v) {
            Vorticity::Scalar(w) => {
                let exact = ScalarField::from_fn(&g, |x| (k[0] * d[1] - k[1] * d[0]) * arg(x).cos());
                prop_assert!(w.sub(&exact).max_abs() <= 1e-11);
            }
            Vorticity::Vector(w) => {
                let cross = [k[1] * d[2] - k[2] * d[1], k[2] * d[0] - k[0] * d[2], k[0] * d[1] - k[1] * d[0]];
                for a in 0..3 {
                    let exact = ScalarField::from_fn(&g, |x| cross[a] * arg(x).cos());
                    prop_assert!(w.component(a).sub(&exact).max_abs() <= 1e-11);
                }
            }
        }
    }

    #[test]
    fn helmholtz_split(seed in any::<u64>(), dim in 2usize..=3) {
        let g = grid(dim, if dim == 2 { 32 } else { 16 }, 2.0 * PI);
        let f = random(&g, seed);
        let psi = random(&g, seed ^ 0x5555);
        let grad_f = gradient(&f);
        // divergence-free part: curl of a potential
        let w = if dim == 2 {
            let gp = gradient(&psi);
            VectorField::new(vec![gp.component(1).scaled(-1.0), gp.component(0).clone()]).unwrap()
        } else {
            let a = VectorField::new(vec![psi.clone(), random(&g, seed ^ 1), random(&g, seed ^ 2)]).unwrap();
            match curl(&a) {
                Vorticity::Vector(v) => v,
                Vorticity::Scalar(_) => unreachable!(),
            }
        };
        prop_assert!(divergence(&w).max_abs() <= 1e-10);
        let v = grad_f.add(&w);
        let p = riesz_div_projection(&v);
        prop_assert!(p.sub(&grad_f).l2_norm() <= 1e-11 * grad_f.l2_norm());
        let pp = riesz_div_projection(&p);
        prop_assert!(pp.sub(&p).l2_norm() <= 1e-12 * p.l2_norm());
        let c = curl(&p);
        prop_assert!(c.l2_norm() <= 1e-10 * grad_f.l2_norm());
        // poisson_gradient inverts divergence on curl-free mean-zero fields
        let back = poisson_gradient(&divergence(&grad_f)).unwrap();
        prop_assert!(back.sub(&grad_f).l2_norm() <= 1e-10 * grad_f.l2_norm());
    }

    #[test]
    fn poisson_solves_for_the_fluctuation(seed in any::<u64>()) {
        let g = grid(2, 32, 5.0);
        let rho = random(&g, seed);
        let fluct = rho.map(|v| v - rho.mean());
        let e = poisson_gradient_unchecked(&rho);
        prop_assert!(divergence(&e).sub(&fluct).max_abs() <= 1e-10 * rho.max_abs());
        let checked = poisson_gradient(&fluct).unwrap();
        prop_assert!(checked.sub(&e).max_magnitude() <= 1e-12 * rho.max_abs());
        for c in e.components() {
            prop_assert!(c.spectrum().coeffs()[0].norm() <= 1e-16);
        }
    }

    #[test]
    fn product_is_alias_free(seed in any::<u64>(), points in prop_oneof![Just(16usize), Just(20), Just(32)]) {
        let g = grid(2, points, 2.0 * PI);
        let f = random(&g, seed);
        let h = random(&g, seed.wrapping_add(1));
        let p = product(&f, &h).unwrap();
        // exact product coefficients by direct convolution over the masked lattice
        let masked: Vec<usize> = (0..g.len()).filter(|&i| g.in_mask(i)).collect();
        let mut exact = vec![Complex64::new(0.0, 0.0); g.len()];
        for &i in &masked {
            for &j in &masked {
                let (a, b) = (g.lattice_vector(i), g.lattice_vector(j));
                let sum = [a[0] + b[0], a[1] + b[1]];
                let limit = (points / 3) as i64;
                if sum[0].abs() <= limit && sum[1].abs() <= limit {
                    exact[g.mode_index(&sum)] += f.spectrum().coeffs()[i] * h.spectrum().coeffs()[j];
                }
            }
        }
        let scale = exact.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for idx in 0..g.len() {
            prop_assert!((p.spectrum().coeffs()[idx] - exact[idx]).norm() <= 1e-12 * scale, "{:?}", g.lattice_vector(idx));
        }
    }
}

#[test]
fn poisson_examples() {
    let g = grid(2, 32, 2.0 * PI);
    let e = poisson_gradient(&ScalarField::from_fn(&g, |x| x[0].cos())).unwrap();
    assert!(e.component(0).sub(&ScalarField::from_fn(&g, |x| x[0].sin())).max_abs() < 1e-14);
    assert!(e.component(1).max_abs() < 1e-14);
    assert_eq!(poisson_gradient(&ScalarField::zeros(&g)).unwrap().max_magnitude(), 0.0);
    assert!(matches!(
        poisson_gradient(&ScalarField::constant(&g, 1.0)),
        Err(SpectralError::NonZeroMean { .. })
    ));
}

#[test]
fn riesz_examples() {
    let g = grid(2, 32, 2.0 * PI);
    let along = VectorField::from_fn(&g, |x| [x[0].sin(), 0.0, 0.0]);
    assert!(riesz_div_projection(&along).sub(&along).max_magnitude() < 1e-14);
    let across = VectorField::from_fn(&g, |x| [0.0, x[0].sin(), 0.0]);
    assert!(riesz_div_projection(&across).max_magnitude() < 1e-14);
}

#[test]
fn dealias_examples() {
    let g = grid(2, 32, 2.0 * PI);
    let inside = ScalarField::from_fn(&g, |x| (10.0 * x[0] - 9.0 * x[1]).cos());
    assert!(dealias(&inside).sub(&inside).max_abs() < 1e-13);
    let outside = ScalarField::from_fn(&g, |x| (11.0 * x[0]).cos());
    assert!(dealias(&outside).max_abs() < 1e-14);
    let f = random(&g, 9);
    let once = dealias(&f.map(|v| v * v * v));
    assert!(dealias(&once).sub(&once).max_abs() < 1e-15);
    let v = VectorField::new(vec![outside.clone(), inside.clone()]).unwrap();
    let dv = dealias_vector(&v);
    assert!(dv.component(0).max_abs() < 1e-14);
}

#[test]
fn advection_matches_pointwise_product() {
    let g = grid(2, 32, 2.0 * PI);
    let u = VectorField::from_fn(&g, |x| [x[1].sin(), 0.5 * x[0].cos(), 0.0]);
    let f = ScalarField::from_fn(&g, |x| (x[0] + 2.0 * x[1]).sin());
    let exact = ScalarField::from_fn(&g, |x| {
        let c = (x[0] + 2.0 * x[1]).cos();
        x[1].sin() * c + 0.5 * x[0].cos() * 2.0 * c
    });
    assert!(advect(&u, &f).unwrap().sub(&exact).max_abs() < 1e-13);
}

#[test]
fn cached_spectrum_matches_samples() {
    let g = grid(2, 32, 2.0 * PI);
    let f = random(&g, 3);
    let rebuilt = ScalarField::from_spectrum(f.spectrum().clone());
    assert!(rebuilt.has_cached_spectrum());
    let fresh = ScalarField::new(&g, rebuilt.samples().to_vec()).unwrap();
    let err: f64 = fresh
        .spectrum()
        .coeffs()
        .iter()
        .zip(rebuilt.spectrum().coeffs())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let norm: f64 = rebuilt.spectrum().coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    assert!(err <= 1e-12 * norm);
}
