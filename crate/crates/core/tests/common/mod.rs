#![allow(dead_code)]

use nchs_core::models::Laurent;
use nchs_core::opcore::{self, identity};
use nchs_core::{CMat, ModelElement, SubdiagonalModel, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) / 2f64.sqrt()
    })
}

pub fn hermitian(rng: &mut impl Rng, n: usize) -> CMat {
    opcore::hermitian_part(&gaussian(rng, n, n))
}

pub fn positive_definite(rng: &mut impl Rng, n: usize, eps: f64) -> CMat {
    let b = gaussian(rng, n, n);
    b.adjoint() * &b / C64::new(n as f64, 0.0) + identity(n) * C64::new(eps, 0.0)
}

pub fn upper(rng: &mut impl Rng, n: usize) -> CMat {
    gaussian(rng, n, n).upper_triangle()
}

pub fn unitary(rng: &mut impl Rng, n: usize, s: f64) -> CMat {
    let h = hermitian(rng, n) * C64::new(s, 0.0);
    opcore::expm_i_hermitian(&h).unwrap()
}

/// Analytic polynomial with geometrically decaying coefficients.
pub fn analytic(rng: &mut impl Rng, d: usize, deg: usize) -> Laurent {
    let pairs = (0..=deg).map(|k| (k as i64, gaussian(rng, d, d) * C64::new(0.6f64.powi(k as i32), 0.0)));
    Laurent::from_pairs(d, pairs).unwrap()
}

/// Trigonometric polynomial supported on `-deg..=deg`.
pub fn laurent(rng: &mut impl Rng, d: usize, deg: usize) -> Laurent {
    let deg = deg as i64;
    let pairs = (-deg..=deg).map(|k| (k, gaussian(rng, d, d) * C64::new(0.6f64.powi(k.abs() as i32), 0.0)));
    Laurent::from_pairs(d, pairs).unwrap()
}

/// `b*b + eps` with `b` analytic of degree `deg / 2`, so the weight has
/// degree `deg` and minimum eigenvalue at least `eps`.
pub fn psd_symbol(rng: &mut impl Rng, d: usize, deg: usize, eps: f64) -> Laurent {
    let b = analytic(rng, d, deg / 2);
    b.adjoint().mul(&b).add(&Laurent::constant(identity(d) * C64::new(eps, 0.0)))
}

/// A random analytic element of either model.
pub fn analytic_element(model: &SubdiagonalModel, rng: &mut impl Rng) -> ModelElement {
    match *model {
        SubdiagonalModel::Triangular { n } => upper(rng, n).into(),
        SubdiagonalModel::Fourier { d, deg, .. } => analytic(rng, d, deg).into(),
    }
}

pub fn psd_element(model: &SubdiagonalModel, rng: &mut impl Rng, eps: f64) -> ModelElement {
    match *model {
        SubdiagonalModel::Triangular { n } => positive_definite(rng, n, eps).into(),
        SubdiagonalModel::Fourier { d, deg, .. } => psd_symbol(rng, d, deg, eps).into(),
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
