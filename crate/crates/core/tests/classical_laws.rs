mod common;

use common::rng;
use nchs_core::classical::{self, GridWeight};
use proptest::prelude::*;
use rand::Rng;

fn smooth_weight(seed: u64, m: usize) -> GridWeight {
    // exp of a random low-degree trigonometric polynomial
    let mut r = rng(seed);
    let coeffs: Vec<(f64, f64)> = (1..=4).map(|_| (r.random_range(-0.4..0.4), r.random_range(-0.4..0.4))).collect();
    let samples = (0..m)
        .map(|j| {
            let t = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            let v: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| a * ((k + 1) as f64 * t).cos() + b * ((k + 1) as f64 * t).sin())
                .sum();
            v.exp()
        })
        .collect();
    GridWeight::scalar(samples, 0.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugate_function_is_an_isometry(seed: u64, log_m in 3u32..=9) {
        let m = 1usize << log_m;
        let mut r = rng(seed);
        let mut v: Vec<f64> = (0..m).map(|_| r.random_range(-1.0..1.0)).collect();
        let mean = v.iter().sum::<f64>() / m as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        // drop the Nyquist component, which the multiplier annihilates
        let nyq: f64 = v.iter().enumerate().map(|(j, x)| if j % 2 == 0 { *x } else { -*x }).sum::<f64>() / m as f64;
        v.iter_mut().enumerate().for_each(|(j, x)| *x -= if j % 2 == 0 { nyq } else { -nyq });
        let cv = classical::conjugate_function(&v);
        let n0: f64 = v.iter().map(|x| x * x).sum();
        let n1: f64 = cv.iter().map(|x| x * x).sum();
        prop_assert!((n0.sqrt() - n1.sqrt()).abs() <= 1e-10 * n0.sqrt().max(1.0));
    }

    #[test]
    fn a2_is_at_least_one(seed: u64, log_m in 2u32..=8) {
        let m = 1usize << log_m;
        let mut r = rng(seed);
        let s: Vec<f64> = (0..m).map(|_| r.random_range(0.01..10.0)).collect();
        let a2 = classical::a2_constant(&GridWeight::scalar(s, 0.0).unwrap()).unwrap();
        prop_assert!(a2.value >= 1.0 - 1e-12);
        prop_assert!(a2.value > 1.0 + 1e-10);
    }

    #[test]
    fn geometric_mean_is_the_determinant(seed: u64) {
        let w = smooth_weight(seed, 256);
        let (model, g) = w.to_element().unwrap();
        let gm = classical::geometric_mean(&w).unwrap();
        let det = model.det(&g).unwrap();
        prop_assert!((gm - det).abs() <= 1e-8 * gm.max(1.0), "{gm} vs {det}");
    }
}

#[test]
fn constant_weight_has_unit_a2() {
    for m in [4, 64, 512] {
        let w = GridWeight::scalar(vec![0.7; m], 0.0).unwrap();
        assert!((classical::a2_constant(&w).unwrap().value - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn geometric_mean_converges_under_refinement() {
    let coarse = classical::geometric_mean(&smooth_weight(3, 256)).unwrap();
    let fine = classical::geometric_mean(&smooth_weight(3, 1024)).unwrap();
    assert!((coarse - fine).abs() <= 1e-8);
}
