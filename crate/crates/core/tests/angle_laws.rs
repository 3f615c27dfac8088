mod common;

use common::*;
use nchs_core::angle::{self, CertifyOutcome};
use nchs_core::factor;
use nchs_core::{ModelElement, SubdiagonalModel};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn three_distance_computations_agree(n in 2usize..=8, seed: u64, scale in 0.1f64..3.0) {
        let model = SubdiagonalModel::triangular(n).unwrap();
        let x = gaussian(&mut rng(seed), n, n) * nchs_core::opcore::real(scale);
        let arveson = angle::arveson_distance(&x);
        let x: ModelElement = x.into();
        let hankel = angle::hankel_restricted_norm(&model, &x, n).unwrap();
        let best = angle::best_analytic_approx(&model, &x, n, 1e-9).unwrap().achieved;
        prop_assert!((arveson - hankel).abs() <= 1e-5 * arveson.max(1.0));
        prop_assert!((arveson - best).abs() <= 1e-5 * arveson.max(1.0));
    }

    #[test]
    fn hs1_angle_equals_distance_of_the_unitary(n in 2usize..=6, seed: u64) {
        let model = SubdiagonalModel::triangular(n).unwrap();
        let g: ModelElement = positive_definite(&mut rng(seed), n, 0.05).into();
        let rho = angle::rho_gram(&model, &g, n).unwrap().rho;
        let u = factor::hs1_factorize(&model, &g, 1e-9).unwrap().u;
        let dist = angle::dist_to_algebra(&model, &u, n).unwrap();
        prop_assert!((rho - dist).abs() <= 1e-5, "rho {rho} vs dist {dist}");
    }

    #[test]
    fn certificates_are_sound_and_convert_back(n in 2usize..=6, seed: u64, s in 0.0f64..2.5) {
        let model = SubdiagonalModel::triangular(n).unwrap();
        let u: ModelElement = unitary(&mut rng(seed), n, s).into();
        let tol = 1e-6;
        match angle::certify_positive_real(&model, &u, n, tol).unwrap() {
            CertifyOutcome::Certified(cert) => {
                let floor = angle::real_part_floor(&model, &u, &cert.k).unwrap();
                prop_assert!(floor >= cert.alpha - 1e-9);
                if cert.alpha > tol {
                    let back = angle::certificate_to_approximant(&model, &u, &cert, None).unwrap();
                    prop_assert!(back.achieved < 1.0);
                    prop_assert!(back.achieved <= back.bound + 1e-9);
                }
            }
            CertifyOutcome::Infeasible { .. } => {
                let dist = angle::dist_to_algebra(&model, &u, n).unwrap();
                prop_assert!(dist >= 1.0 - tol);
            }
        }
    }

    #[test]
    fn approximant_gives_certificate(n in 2usize..=6, seed: u64, s in 0.0f64..2.5) {
        let model = SubdiagonalModel::triangular(n).unwrap();
        let u: ModelElement = unitary(&mut rng(seed), n, s).into();
        let best = angle::best_analytic_approx(&model, &u, n, 1e-9).unwrap();
        prop_assume!(best.achieved < 1.0 - 1e-9);
        let cert = angle::approximant_to_certificate(&model, &u, &best.f).unwrap();
        prop_assert!(cert.alpha > 0.0);
        prop_assert!(cert.alpha >= 1.0 - best.achieved - 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rho_grows_with_cutoff(d in 1usize..=2, deg in 2usize..=6, seed: u64) {
        let model = SubdiagonalModel::fourier(d, deg).unwrap();
        let g: ModelElement = psd_symbol(&mut rng(seed), d, deg, 0.02).into();
        let rhos: Vec<f64> = [2, 4, 8, 16]
            .iter()
            .map(|&c| angle::rho_gram(&model, &g, c).unwrap().rho)
            .collect();
        for w in rhos.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-10, "{rhos:?}");
        }
        prop_assert!(rhos.iter().all(|&r| (0.0..=1.0 + 1e-10).contains(&r)));
    }

    #[test]
    fn fourier_certificates_are_sound(seed: u64, s in 0.1f64..1.0) {
        // u = exp(i·s·Re p) for a trigonometric polynomial p.
        let model = SubdiagonalModel::fourier(1, 8).unwrap();
        let p = laurent(&mut rng(seed), 1, 2);
        let h: ModelElement = p.add(&p.adjoint()).scale(nchs_core::opcore::real(0.5 * s)).into();
        let u = model
            .map_pointwise(&h, nchs_core::opcore::expm_i_hermitian)
            .unwrap();
        if let CertifyOutcome::Certified(cert) = angle::certify_positive_real(&model, &u, 16, 1e-6).unwrap() {
            let floor = angle::real_part_floor(&model, &u, &cert.k).unwrap();
            prop_assert!(floor >= cert.alpha - 1e-9);
        }
    }
}
