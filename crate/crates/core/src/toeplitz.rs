//! Toeplitz and Hankel operators on `H²`, the invertibility pipeline and the
//! end-to-end equivalence check for unitary symbols.

use nalgebra::DVector;
use serde::Serialize;

use crate::angle::{self, AngleReport, Certificate, CertifyOutcome};
use crate::error::{Error, Result};
use crate::models::{BasisUnit, ModelElement, Space, SubdiagonalModel};
use crate::opcore::{self, singular_values, CMat, C64};

/// Matrix of an operator against orthonormal unit bases.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub matrix: CMat,
    pub cutoff: usize,
    pub domain: Space,
    pub codomain: Space,
    pub domain_units: Vec<BasisUnit>,
    pub codomain_units: Vec<BasisUnit>,
}

impl OperatorMatrix {
    pub fn norm(&self) -> f64 {
        if self.matrix.is_empty() {
            0.0
        } else {
            opcore::op_norm(&self.matrix)
        }
    }

    pub fn sigma_min(&self) -> f64 {
        if self.matrix.is_empty() {
            return 0.0;
        }
        singular_values(&self.matrix).last().copied().unwrap_or(0.0)
    }

    /// Applies the operator to `x` (taken through its domain coordinates).
    pub fn apply(&self, model: &SubdiagonalModel, x: &ModelElement) -> Result<ModelElement> {
        let coords = model.coordinates(x, &self.domain_units)?;
        model.from_coordinates(&self.codomain_units, &(&self.matrix * coords))
    }
}

/// `[i,j] = ⟨Proj(f·b_j), a_i⟩ = F̂(k_i − l_j)[p_i, r_j]·δ(s_j, q_i)` for units
/// `a_i = √d z^{k_i} E_{p_i q_i}` and `b_j = √d z^{l_j} E_{r_j s_j}`.
fn multiplication_matrix(f: &ModelElement, domain: &[BasisUnit], codomain: &[BasisUnit]) -> CMat {
    CMat::from_fn(codomain.len(), domain.len(), |i, j| {
        let (a, b) = (codomain[i], domain[j]);
        if b.col != a.col {
            return C64::new(0.0, 0.0);
        }
        let power = a.power - b.power;
        match f {
            ModelElement::Matrix(m) if power == 0 => m[(a.row, b.row)],
            ModelElement::Matrix(_) => C64::new(0.0, 0.0),
            ModelElement::Laurent(l) => l.coeff(power).map_or(C64::new(0.0, 0.0), |c| c[(a.row, b.row)]),
        }
    })
}

fn operator(
    model: &SubdiagonalModel,
    f: &ModelElement,
    cutoff: usize,
    domain: Space,
    codomain: Space,
) -> Result<OperatorMatrix> {
    model.check(f)?;
    let domain_units = model.basis_units(domain, cutoff)?;
    let codomain_units = model.basis_units(codomain, cutoff)?;
    Ok(OperatorMatrix {
        matrix: multiplication_matrix(f, &domain_units, &codomain_units),
        cutoff,
        domain,
        codomain,
        domain_units,
        codomain_units,
    })
}

/// `T_a: b ↦ P₊(ab)` on `H²` (powers `0..=cutoff` for symbols).
pub fn toeplitz_matrix(model: &SubdiagonalModel, a: &ModelElement, cutoff: usize) -> Result<OperatorMatrix> {
    operator(model, a, cutoff, Space::H2, Space::H2)
}

/// `H_f: x ↦ P₋(fx)` from `H²` (or `H²₀` when `restricted`) into `H²*`.
pub fn hankel_matrix(
    model: &SubdiagonalModel,
    f: &ModelElement,
    cutoff: usize,
    restricted: bool,
) -> Result<OperatorMatrix> {
    let domain = if restricted { Space::H20 } else { Space::H2 };
    operator(model, f, cutoff, domain, Space::Astar)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Invertible,
    NotInvertible,
    Ambiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionSigma {
    pub cutoff: usize,
    pub sigma_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvertibilityReport {
    pub verdict: Verdict,
    pub sigma_min: Vec<SectionSigma>,
}

impl InvertibilityReport {
    /// `σ_min` at the largest cutoff.
    pub fn last_sigma(&self) -> f64 {
        self.sigma_min.last().map_or(0.0, |s| s.sigma_min)
    }
}

/// Matrices: exact, `σ_min(T_a) > tol`. Symbols: `σ_min` of finite sections
/// at each cutoff; invertible when it stays above `tol` with relative changes
/// below 10%, not invertible when it is below `tol` or halves at every step.
pub fn invertibility_test(
    model: &SubdiagonalModel,
    a: &ModelElement,
    cutoffs: &[usize],
    tol: f64,
) -> Result<InvertibilityReport> {
    if !model.is_fourier() {
        let s = toeplitz_matrix(model, a, 0)?.sigma_min();
        return Ok(InvertibilityReport {
            verdict: if s > tol { Verdict::Invertible } else { Verdict::NotInvertible },
            sigma_min: vec![SectionSigma { cutoff: 0, sigma_min: s }],
        });
    }
    let mut cuts = cutoffs.to_vec();
    cuts.sort_unstable();
    cuts.dedup();
    if cuts.is_empty() {
        return Err(Error::InvalidParams("at least one cutoff is required".into()));
    }
    let sigma_min = cuts
        .iter()
        .map(|&c| {
            Ok(SectionSigma {
                cutoff: c,
                sigma_min: toeplitz_matrix(model, a, c)?.sigma_min(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = sigma_min.iter().map(|s| s.sigma_min).collect();
    let last = *values.last().expect("nonempty");
    let pairs: Vec<(f64, f64)> = values.windows(2).map(|w| (w[0], w[1])).collect();
    let stable = pairs.iter().all(|&(p, q)| (q - p).abs() < 0.1 * p.max(q));
    let halving = !pairs.is_empty() && pairs.iter().all(|&(p, q)| q <= 0.5 * p);
    let verdict = if last <= tol || halving {
        Verdict::NotInvertible
    } else if stable {
        Verdict::Invertible
    } else {
        Verdict::Ambiguous
    };
    Ok(InvertibilityReport { verdict, sigma_min })
}

fn section_cutoffs(model: &SubdiagonalModel, cutoff: usize) -> Vec<usize> {
    if model.is_fourier() {
        vec![(cutoff / 4).max(1), (cutoff / 2).max(1), cutoff.max(1)]
    } else {
        vec![0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvToepResiduals {
    /// `‖Φ(g₁*) − d‖₂`.
    pub phi: f64,
    /// `‖u − (g₁*)⁻¹ d g₀⁻¹‖₂`.
    pub unitary: f64,
    /// `‖g₀*g₀ − d*(g₁*g₁)⁻¹d‖₂`.
    pub modulus: f64,
    /// `|Δ(g₀) − Δ(Φ(g₀))|`.
    pub gap0: f64,
    /// `|Δ(g₁) − Δ(Φ(g₁*))|`.
    pub gap1: f64,
    pub det0: f64,
    pub det1: f64,
    /// Least-squares residuals of the two linear solves.
    pub solve0: f64,
    pub solve1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvToep {
    pub g0: ModelElement,
    pub g1: ModelElement,
    pub d: ModelElement,
    pub residuals: InvToepResiduals,
}

fn solve_for_one(model: &SubdiagonalModel, t: &OperatorMatrix) -> Result<(ModelElement, f64)> {
    let rhs: DVector<C64> = model.coordinates(&model.one(), &t.codomain_units)?;
    // Sections reaching this point passed the invertibility test, so a
    // pivoted LU solve suffices; the pseudo-inverse covers the rest.
    let lu = (t.matrix.is_square())
        .then(|| t.matrix.clone().full_piv_lu().solve(&rhs))
        .flatten();
    let x = lu.unwrap_or_else(|| opcore::pinv(&t.matrix, 1e-14) * &rhs);
    let residual = (&t.matrix * &x - rhs).norm();
    Ok((model.from_coordinates(&t.domain_units, &x)?, residual))
}

/// Solves `T_u g₀ = 1`, `T_{u*} g₁ = 1`, sets `d = Φ(g₀)` and checks the
/// structure identities of an invertible Toeplitz operator with unitary symbol.
pub fn extract_invtoep(model: &SubdiagonalModel, u: &ModelElement, cutoff: usize, tol: f64) -> Result<InvToep> {
    let inv = invertibility_test(model, u, &section_cutoffs(model, cutoff), tol)?;
    if inv.verdict != Verdict::Invertible {
        return Err(Error::NotInvertible {
            sigma_min: inv.last_sigma(),
        });
    }
    let u_star = model.adj(u)?;
    let (g0, solve0) = solve_for_one(model, &toeplitz_matrix(model, u, cutoff)?)?;
    let (g1, solve1) = solve_for_one(model, &toeplitz_matrix(model, &u_star, cutoff)?)?;
    let d = model.phi(&g0)?;
    let g1_star = model.adj(&g1)?;
    let dist = |a: &ModelElement, b: &ModelElement| model.l2_norm(&model.sub(a, b)?);
    // Inverses of symbols are not polynomials, so the right-hand sides are
    // sampled on a refined grid instead of the model grid.
    let pinv = |v: &CMat| opcore::pinv(v, 1e-14);

    let phi = dist(&model.phi(&g1_star)?, &d)?;
    let rebuilt = model.zip_pointwise_refined(&[&g1_star, &d, &g0], |v| Ok(pinv(&v[0]) * &v[1] * pinv(&v[2])), 1e-13)?;
    let unitary = dist(u, &rebuilt)?;
    let modulus = dist(
        &model.mul(&model.adj(&g0)?, &g0)?,
        &model.zip_pointwise_refined(&[&g1, &d], |v| Ok(v[1].adjoint() * pinv(&(v[0].adjoint() * &v[0])) * &v[1]), 1e-13)?,
    )?;
    let det0 = model.det(&g0)?;
    let det1 = model.det(&g1)?;
    let gap0 = (det0 - model.det_phi(&g0)?).abs();
    let gap1 = (det1 - model.det_phi(&g1_star)?).abs();
    let residuals = InvToepResiduals {
        phi,
        unitary,
        modulus,
        gap0,
        gap1,
        det0,
        det1,
        solve0,
        solve1,
    };
    for (identity, value) in [
        ("d = Φ(g1*)", phi),
        ("u = (g1*)^-1 d g0^-1", unitary),
        ("g0*g0 = d*(g1*g1)^-1 d", modulus),
    ] {
        if value > tol {
            return Err(Error::ResidualExceeded { identity, value, tol });
        }
    }
    if det0 < tol || det1 < tol {
        return Err(Error::ResidualExceeded {
            identity: "Δ(g0), Δ(g1) > 0",
            value: det0.min(det1),
            tol,
        });
    }
    for (identity, gap, det) in [("Δ(g0) = Δ(Φ(g0))", gap0, det0), ("Δ(g1) = Δ(Φ(g1*))", gap1, det1)] {
        if gap > 1e-6 * det.max(1.0) {
            return Err(Error::ResidualExceeded {
                identity,
                value: gap,
                tol: 1e-6 * det.max(1.0),
            });
        }
    }
    Ok(InvToep { g0, g1, d, residuals })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleWeightReport {
    pub weight: ModelElement,
    pub angle: AngleReport,
    /// `ρ < 1 − tol`.
    pub positive_angle: bool,
    /// The invertibility verdict the angle verdict is compared against.
    pub invertible: bool,
}

impl AngleWeightReport {
    pub fn consistent(&self) -> bool {
        self.positive_angle == self.invertible
    }
}

/// `ρ` for the weight `w = g₀*g₀` attached to an invertible `T_u`.
pub fn positive_angle_weight_test(
    model: &SubdiagonalModel,
    u: &ModelElement,
    cutoff: usize,
    tol: f64,
) -> Result<AngleWeightReport> {
    let structure = extract_invtoep(model, u, cutoff, tol)?;
    let weight = model.mul(&model.adj(&structure.g0)?, &structure.g0)?;
    let angle = angle::rho_gram(model, &weight, cutoff)?;
    Ok(AngleWeightReport {
        positive_angle: angle.rho < 1.0 - tol,
        weight,
        angle,
        invertible: true,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub sigma_min: Vec<SectionSigma>,
    pub invertibility: Verdict,
    pub dist: f64,
    pub hankel_restricted: f64,
    pub certificate: Option<Certificate>,
    /// Gap estimate `max(0, dist − 1)` when no certificate was found.
    pub infeasible_gap: Option<f64>,
    pub full_hankel_norm: f64,
    /// `[T_u invertible, certificate alpha > tol, restricted Hankel < 1 − tol]`.
    pub verdicts: [bool; 3],
    /// Distances to the decision boundary minus `tol`:
    /// `[σ_min − tol, alpha − tol, (1 − ‖H_u|H²₀‖) − tol]`.
    pub margins: [f64; 3],
    pub agree: bool,
    pub flagged_ambiguous: bool,
    /// `|‖H_u‖ − 1| ≤ 1e-6`, checked whenever the invtoep structure was extracted.
    pub remark_norm_one: Option<bool>,
}

/// Runs the three equivalent invertibility tests on a unitary `u`.
///
/// An instance is flagged ambiguous when some boundary distance lies within
/// a decade of `tol` on either side, or the section test is inconclusive.
pub fn equivalence_check(
    model: &SubdiagonalModel,
    u: &ModelElement,
    cutoffs: &[usize],
    tol: f64,
) -> Result<EquivalenceReport> {
    let unitarity = model
        .grid_values(u)?
        .iter()
        .map(opcore::unitarity_defect)
        .fold(0.0, f64::max);
    if unitarity > 1e-8 {
        return Err(Error::UnitarityFailure { defect: unitarity });
    }
    let cutoff = cutoffs.iter().copied().max().unwrap_or(0);
    let inv = invertibility_test(model, u, cutoffs, tol)?;
    let outcome = angle::certify_positive_real(model, u, cutoff, tol)?;
    let hankel_restricted = angle::hankel_restricted_norm(model, u, cutoff)?;
    let full_hankel_norm = hankel_matrix(model, u, cutoff, false)?.norm();
    let dist = angle::dist_to_algebra(model, u, cutoff)?;

    let boundary = [inv.last_sigma(), outcome.alpha(), 1.0 - hankel_restricted];
    let verdicts = [
        inv.verdict == Verdict::Invertible,
        boundary[1] > tol,
        boundary[2] > tol,
    ];
    let margins = boundary.map(|b| b - tol);
    let flagged_ambiguous =
        inv.verdict == Verdict::Ambiguous || boundary.iter().any(|&b| b >= 0.1 * tol && b <= 10.0 * tol);
    let agree = verdicts.iter().all(|&v| v == verdicts[0]);
    let remark_norm_one = if verdicts[0] {
        extract_invtoep(model, u, cutoff, tol.max(1e-8))
            .ok()
            .map(|_| (full_hankel_norm - 1.0).abs() <= 1e-6)
    } else {
        None
    };
    let (certificate, infeasible_gap) = match outcome {
        CertifyOutcome::Certified(c) => (Some(c), None),
        CertifyOutcome::Infeasible { gap } => (None, Some(gap)),
    };
    Ok(EquivalenceReport {
        sigma_min: inv.sigma_min,
        invertibility: inv.verdict,
        dist,
        hankel_restricted,
        certificate,
        infeasible_gap,
        full_hankel_norm,
        verdicts,
        margins,
        agree,
        flagged_ambiguous,
        remark_norm_one,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Laurent;
    use crate::opcore::{c, diag, identity, real};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar(pairs: &[(i64, f64)]) -> ModelElement {
        let v: Vec<(i64, C64)> = pairs.iter().map(|&(k, x)| (k, real(x))).collect();
        ModelElement::Laurent(Laurent::scalar(&v))
    }

    #[test]
    fn toeplitz_examples() {
        let m = SubdiagonalModel::triangular(3).unwrap();
        let t = toeplitz_matrix(&m, &m.one(), 0).unwrap();
        assert_eq!(t.matrix, identity(6));
        let f = SubdiagonalModel::fourier(1, 4).unwrap();
        let t = toeplitz_matrix(&f, &scalar(&[(1, 1.0)]), 3).unwrap();
        assert!(t.sigma_min() < 1e-15);
        let r = invertibility_test(&f, &scalar(&[(1, 1.0)]), &[16, 32, 64], 1e-6).unwrap();
        assert_eq!(r.verdict, Verdict::NotInvertible);
        let r = invertibility_test(&f, &scalar(&[(0, 2.0), (1, 1.0)]), &[16, 32, 64], 1e-6).unwrap();
        assert_eq!(r.verdict, Verdict::Invertible);
        assert!(r.sigma_min.iter().all(|s| s.sigma_min > 0.99));
    }

    #[test]
    fn toeplitz_matrix_matches_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let m = SubdiagonalModel::triangular(4).unwrap();
        let rm = |rng: &mut ChaCha8Rng| CMat::from_fn(4, 4, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        for _ in 0..20 {
            let a = ModelElement::Matrix(rm(&mut rng));
            let b = m.p_plus(&ModelElement::Matrix(rm(&mut rng))).unwrap();
            let t = toeplitz_matrix(&m, &a, 0).unwrap();
            let lhs = t.apply(&m, &b).unwrap();
            let rhs = m.p_plus(&m.mul(&a, &b).unwrap()).unwrap();
            assert!(m.l2_norm(&m.sub(&lhs, &rhs).unwrap()).unwrap() < 1e-12);
            let ta_star = toeplitz_matrix(&m, &m.adj(&a).unwrap(), 0).unwrap();
            assert!((ta_star.matrix - t.matrix.adjoint()).norm() < 1e-12);
        }
    }

    #[test]
    fn hankel_examples() {
        let f = SubdiagonalModel::fourier(1, 4).unwrap();
        let h = hankel_matrix(&f, &scalar(&[(-1, 1.0)]), 4, true).unwrap();
        let nonzero: Vec<C64> = h.matrix.iter().copied().filter(|z| z.norm() > 0.0).collect();
        assert_eq!(nonzero, vec![real(1.0)]);
        let h = hankel_matrix(&f, &scalar(&[(0, 1.0), (2, 3.0)]), 4, true).unwrap();
        assert_eq!(h.norm(), 0.0);
    }

    #[test]
    fn diagonal_unitary_invtoep() {
        let m = SubdiagonalModel::triangular(3).unwrap();
        let u = ModelElement::Matrix(diag(&[C64::from_polar(1.0, 0.4), C64::from_polar(1.0, -1.1), real(-1.0)]));
        let s = extract_invtoep(&m, &u, 0, 1e-10).unwrap();
        let ustar = m.adj(&u).unwrap();
        assert!(m.l2_norm(&m.sub(&s.g0, &ustar).unwrap()).unwrap() < 1e-14);
        assert!(m.l2_norm(&m.sub(&s.d, &ustar).unwrap()).unwrap() < 1e-14);
        assert!(m.l2_norm(&m.sub(&s.g1, &u).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn identity_and_zbar_equivalence() {
        let m = SubdiagonalModel::triangular(3).unwrap();
        let r = equivalence_check(&m, &m.one(), &[0], 1e-6).unwrap();
        assert_eq!(r.verdicts, [true, true, true]);
        assert!(r.hankel_restricted < 1e-15);
        assert_eq!(r.remark_norm_one, Some(true));
        let f = SubdiagonalModel::fourier(1, 4).unwrap();
        let r = equivalence_check(&f, &scalar(&[(-1, 1.0)]), &[4, 8, 16], 1e-6).unwrap();
        assert_eq!(r.verdicts, [false, false, false]);
        assert!((r.hankel_restricted - 1.0).abs() < 1e-15);
        assert!(r.certificate.is_none());
        assert!(r.agree && !r.flagged_ambiguous);
    }
}
