mod common;

use common::*;
use nchs_core::models::{Laurent, Space};
use nchs_core::opcore::{self, real};
use nchs_core::{CMat, ModelElement, SubdiagonalModel, C64};
use proptest::prelude::*;
use rand::Rng;

fn models() -> impl Strategy<Value = SubdiagonalModel> {
    prop_oneof![
        (1usize..=6).prop_map(|n| SubdiagonalModel::triangular(n).unwrap()),
        (1usize..=2, 1usize..=6).prop_map(|(d, deg)| SubdiagonalModel::fourier(d, deg).unwrap()),
    ]
}

fn general(model: &SubdiagonalModel, r: &mut impl Rng) -> ModelElement {
    match *model {
        SubdiagonalModel::Triangular { n } => gaussian(r, n, n).into(),
        SubdiagonalModel::Fourier { d, deg, .. } => laurent(r, d, deg).into(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn expectation_laws(model in models(), seed: u64) {
        let mut r = rng(seed);
        let x = general(&model, &mut r);
        let phi = model.phi(&x).unwrap();
        let phi2 = model.phi(&phi).unwrap();
        prop_assert!(model.l2_norm(&model.sub(&phi, &phi2).unwrap()).unwrap() <= 1e-12);
        prop_assert!((model.trace(&x).unwrap() - model.trace(&phi).unwrap()).norm() <= 1e-12);

        let a = analytic_element(&model, &mut r);
        let b = analytic_element(&model, &mut r);
        let lhs = model.phi(&model.mul(&a, &b).unwrap()).unwrap();
        let rhs = model.mul(&model.phi(&a).unwrap(), &model.phi(&b).unwrap()).unwrap();
        prop_assert!(model.l2_norm(&model.sub(&lhs, &rhs).unwrap()).unwrap() <= 1e-10);
    }

    #[test]
    fn decomposition_is_exact_and_orthogonal(model in models(), seed: u64) {
        let x = general(&model, &mut rng(seed));
        let parts = model.decompose(&x).unwrap();
        let sum = model.add(&model.add(&parts.plus0, &parts.diag).unwrap(), &parts.minus0).unwrap();
        prop_assert!(model.l2_norm(&model.sub(&sum, &x).unwrap()).unwrap() <= 1e-12);
        let pieces = [&parts.plus0, &parts.diag, &parts.minus0];
        for i in 0..3 {
            for j in i + 1..3 {
                let inner = model.trace(&model.mul(&model.adj(pieces[j]).unwrap(), pieces[i]).unwrap()).unwrap();
                prop_assert!(inner.norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn sup_norm_is_submultiplicative(d in 1usize..=2, deg in 1usize..=4, seed: u64) {
        let model = SubdiagonalModel::fourier(d, 2 * deg).unwrap();
        let mut r = rng(seed);
        let x: ModelElement = laurent(&mut r, d, deg).into();
        let y: ModelElement = laurent(&mut r, d, deg).into();
        let xy = model.mul(&x, &y).unwrap();
        let bound = model.sup_norm(&x).unwrap() * model.sup_norm(&y).unwrap();
        prop_assert!(model.sup_norm(&xy).unwrap() <= bound + 1e-8);
    }
}

#[test]
fn analytic_and_coanalytic_bases_are_orthogonal() {
    let cases = [
        SubdiagonalModel::triangular(5).unwrap(),
        SubdiagonalModel::fourier(2, 4).unwrap(),
    ];
    for model in cases {
        let a0 = model.basis(Space::A0, 4).unwrap();
        let astar = model.basis(Space::Astar, 4).unwrap();
        for a in &a0 {
            for b in &astar {
                let t = model.trace(&model.mul(&model.adj(b).unwrap(), a).unwrap()).unwrap();
                assert!(t.norm() <= 1e-12, "{model}: {t}");
            }
        }
    }
}

#[test]
fn fourier_product_is_exact_convolution() {
    let mut r = rng(11);
    let int_mat = |r: &mut rand_chacha::ChaCha8Rng| {
        CMat::from_fn(2, 2, |_, _| C64::new(r.random_range(-9..=9) as f64, r.random_range(-9..=9) as f64))
    };
    let x = Laurent::from_pairs(2, (-3..=4).map(|k| (k, int_mat(&mut r)))).unwrap();
    let y = Laurent::from_pairs(2, (-2..=5).map(|k| (k, int_mat(&mut r)))).unwrap();
    let xy = x.mul(&y);
    for k in -5..=9 {
        let mut expect = opcore::zeros(2, 2);
        for i in -3..=4 {
            expect += x.coeff_or_zero(i) * y.coeff_or_zero(k - i);
        }
        assert_eq!(xy.coeff_or_zero(k), expect, "coefficient {k}");
    }
    assert!(xy.coeff(10).is_none_or(|c| c.iter().all(|z| *z == real(0.0))));
}
