//! The past–future angle `ρ`, distance to the algebra, analytic best
//! approximation and positivity certificates `Re(u*k) ⪰ α`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft;
use crate::models::{BasisUnit, Laurent, ModelElement, Space, SubdiagonalModel};
use crate::opcore::{self, hermitian_part, op_norm, zeros, CMat, C64};
use crate::toeplitz;

/// Relative rank cut for the pseudo-inverse square roots of Gram matrices.
pub const GRAM_RANK_CUT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AngleMethod {
    GramPrincipalAngles,
    DistanceToAlgebra,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleReport {
    pub rho: f64,
    pub method: AngleMethod,
    pub cutoff: usize,
    /// Retained rank of the `A₀` Gram matrix.
    pub gram_rank: usize,
    /// Retained rank of the `A*` Gram matrix.
    pub gram_rank_star: usize,
    /// `1 − ρ`.
    pub margin: f64,
}

/// Gram block `[i,j] = τ(g·y_j*·x_i)` between two unit families.
///
/// For units `x = √d z^k E_pq`, `y = √d z^l E_rs` this is `δ_pr·Ĝ(l − k)[q, s]`.
fn unit_gram(g: &ModelElement, xs: &[BasisUnit], ys: &[BasisUnit]) -> CMat {
    let coeff = |power: i64, a: usize, b: usize| -> C64 {
        match g {
            ModelElement::Matrix(m) if power == 0 => m[(a, b)],
            ModelElement::Matrix(_) => C64::new(0.0, 0.0),
            ModelElement::Laurent(l) => l.coeff(power).map_or(C64::new(0.0, 0.0), |c| c[(a, b)]),
        }
    };
    CMat::from_fn(xs.len(), ys.len(), |i, j| {
        let (x, y) = (xs[i], ys[j]);
        if x.row == y.row {
            coeff(y.power - x.power, x.col, y.col)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `ρ` for the state `τ(g·)`: the largest cosine between `A₀` and `A*` in the
/// seminorm `x ↦ τ(g x*x)^{1/2}`, via whitened cross-Gram matrices.
pub fn rho_gram(model: &SubdiagonalModel, g: &ModelElement, cutoff: usize) -> Result<AngleReport> {
    model.check_psd(g)?;
    let past = model.basis_units(Space::A0, cutoff)?;
    let future = model.basis_units(Space::Astar, cutoff)?;
    let report = |rho: f64, gram_rank, gram_rank_star| AngleReport {
        rho,
        method: AngleMethod::GramPrincipalAngles,
        cutoff,
        gram_rank,
        gram_rank_star,
        margin: 1.0 - rho,
    };
    if past.is_empty() {
        return Ok(report(0.0, 0, future.len()));
    }
    let g1 = unit_gram(g, &past, &past);
    let g2 = unit_gram(g, &future, &future);
    let cross = unit_gram(g, &past, &future);
    let (w1, r1) = opcore::pinv_sqrt_psd(&g1, GRAM_RANK_CUT)?;
    let (w2, r2) = opcore::pinv_sqrt_psd(&g2, GRAM_RANK_CUT)?;
    let rho = op_norm(&(w1 * cross * w2));
    Ok(report(rho, r1, r2))
}

/// Arveson distance from a matrix to the upper triangulars: the largest
/// operator norm of a lower-left corner `x[k.., ..k]`.
pub fn arveson_distance(x: &CMat) -> f64 {
    let n = x.nrows();
    (1..n)
        .map(|k| op_norm(&x.view((k, 0), (n - k, k)).into_owned()))
        .fold(0.0, f64::max)
}

/// Block Hankel matrix `[x̂(−(i+j))]`, `i ∈ 0..N`, `j ∈ 1..=N`.
pub fn nehari_matrix(x: &Laurent, cutoff: usize) -> CMat {
    let d = x.d();
    let mut h = zeros(d * cutoff, d * cutoff);
    for i in 0..cutoff {
        for j in 1..=cutoff {
            if let Some(c) = x.coeff(-((i + j) as i64)) {
                h.view_mut((i * d, (j - 1) * d), (d, d)).copy_from(c);
            }
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceReport {
    pub dist: f64,
    pub cutoff: usize,
    /// Same quantity at twice the cutoff (symbols only); it can only grow.
    pub dist_doubled: Option<f64>,
}

pub fn dist_to_algebra(model: &SubdiagonalModel, x: &ModelElement, cutoff: usize) -> Result<f64> {
    model.check(x)?;
    Ok(match x {
        ModelElement::Matrix(m) => arveson_distance(m),
        ModelElement::Laurent(l) => op_norm(&nehari_matrix(l, cutoff)),
    })
}

pub fn dist_to_algebra_report(
    model: &SubdiagonalModel,
    x: &ModelElement,
    cutoff: usize,
) -> Result<DistanceReport> {
    let dist = dist_to_algebra(model, x, cutoff)?;
    let dist_doubled = if model.is_fourier() {
        Some(dist_to_algebra(model, x, 2 * cutoff)?)
    } else {
        None
    };
    Ok(DistanceReport {
        dist,
        cutoff,
        dist_doubled,
    })
}

/// Norm of `x ↦ P₋(f·x)` on `H²₀`.
pub fn hankel_restricted_norm(model: &SubdiagonalModel, f: &ModelElement, cutoff: usize) -> Result<f64> {
    Ok(toeplitz::hankel_matrix(model, f, cutoff, true)?.norm())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestApprox {
    pub f: ModelElement,
    /// `‖u − f‖_∞`.
    pub achieved: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// An element `f ∈ A` close to `u` in operator norm.
///
/// Matrices use the central Parrott completion, which is optimal. Symbols use
/// smoothed descent over analytic polynomials of degree `≤ cutoff`, which is
/// a heuristic upper bound only.
pub fn best_analytic_approx(
    model: &SubdiagonalModel,
    u: &ModelElement,
    cutoff: usize,
    tol: f64,
) -> Result<BestApprox> {
    model.check(u)?;
    match u {
        ModelElement::Matrix(m) => {
            let (f, achieved) = parrott_approx(m)?;
            Ok(BestApprox {
                f: ModelElement::Matrix(f),
                achieved,
                iterations: m.nrows(),
                converged: true,
            })
        }
        ModelElement::Laurent(l) => {
            if cutoff > model.max_cutoff() {
                return Err(Error::CutoffTooLarge {
                    cutoff,
                    max: model.max_cutoff(),
                });
            }
            let (f, iterations, converged) = descent_approx(l, cutoff, model.grid(), tol);
            let f = ModelElement::Laurent(f);
            let achieved = model.sup_norm(&model.sub(u, &f)?)?;
            Ok(BestApprox {
                f,
                achieved,
                iterations,
                converged,
            })
        }
    }
}

/// Completes `x = u − f` column by column. In column `j` the known blocks are
/// `B = x[..=j, ..j]`, `A = x[j+1.., ..j]`, `C = x[j+1.., j]` and the unknown
/// `X = x[..=j, j]` is the central choice `−B(μ² − A*A)^{-1/2} A* (μ² − AA*)^{-1/2} C`.
fn parrott_approx(u: &CMat) -> Result<(CMat, f64)> {
    let n = u.nrows();
    let mu = arveson_distance(u);
    let mu = mu * (1.0 + 1e-10) + 1e-14;
    let mu2 = mu * mu;
    let mut x = u.clone();
    for j in 0..n {
        let below = n - j - 1;
        let column = if j == 0 || below == 0 {
            zeros(j + 1, 1)
        } else {
            let b = x.view((0, 0), (j + 1, j)).into_owned();
            let a = x.view((j + 1, 0), (below, j)).into_owned();
            let c = x.view((j + 1, j), (below, 1)).into_owned();
            let inv_root = |h: CMat| -> Result<CMat> {
                let eig = opcore::hermitian_eigen(&hermitian_part(&h))?;
                Ok(opcore::spectral_apply(&eig, |l| C64::new(1.0 / l.max(f64::MIN_POSITIVE).sqrt(), 0.0)))
            };
            let ata = a.adjoint() * &a;
            let aat = &a * a.adjoint();
            let y = b * inv_root(opcore::identity(j) * C64::new(mu2, 0.0) - ata)?;
            let z = inv_root(opcore::identity(below) * C64::new(mu2, 0.0) - aat)? * c;
            -(y * a.adjoint() * z)
        };
        x.view_mut((0, j), (j + 1, 1)).copy_from(&column);
    }
    let f = u - &x;
    Ok((f, op_norm(&x)))
}

/// Top singular triple `(σ, a, b)` with `e·b = σ·a`.
fn top_triple(e: &CMat) -> (f64, Vec<C64>, Vec<C64>) {
    if e.nrows() == 1 {
        let z = e[(0, 0)];
        let s = z.norm();
        let phase = if s > 0.0 { z / s } else { C64::new(1.0, 0.0) };
        return (s, vec![phase], vec![C64::new(1.0, 0.0)]);
    }
    let dec = opcore::svd(e);
    (
        dec.sigma[0],
        dec.u.column(0).iter().copied().collect(),
        dec.v.column(0).iter().copied().collect(),
    )
}

/// Minimizes `max_θ ‖u(θ) − f(θ)‖` over `f = Σ_{k=0}^{N} F_k z^k` by gradient
/// descent on a log-sum-exp smoothing with a decreasing temperature.
fn descent_approx(u: &Laurent, cutoff: usize, grid: usize, tol: f64) -> (Laurent, usize, bool) {
    let d = u.d();
    let m = grid;
    let uv = u.eval_grid(m);
    let thetas: Vec<f64> = (0..m).map(|j| fft::grid_angle(j, m)).collect();

    let profile = |f: &Laurent| -> Vec<(f64, Vec<C64>, Vec<C64>)> {
        f.eval_grid(m)
            .iter()
            .zip(&uv)
            .map(|(fv, uj)| top_triple(&(uj - fv)))
            .collect()
    };
    let peak = |p: &[(f64, Vec<C64>, Vec<C64>)]| p.iter().map(|t| t.0).fold(0.0, f64::max);
    let smooth = |p: &[(f64, Vec<C64>, Vec<C64>)], t: f64| -> (f64, Vec<f64>) {
        let top = peak(p);
        let ex: Vec<f64> = p.iter().map(|q| ((q.0 - top) / t).exp()).collect();
        let total: f64 = ex.iter().sum();
        (top + t * total.ln(), ex.into_iter().map(|e| e / total).collect())
    };

    let mut f = u.filter(|k| k >= 0).truncate(cutoff);
    let zero = Laurent::zero(d);
    if peak(&profile(&zero)) < peak(&profile(&f)) {
        f = zero;
    }
    let mut best = (f.clone(), peak(&profile(&f)));
    let mut iterations = 0;
    let mut converged = false;
    let mut step = 0.5;
    for &temp in &[0.1, 0.03, 0.01, 3e-3, 1e-3, 3e-4, 1e-4] {
        let mut p = profile(&f);
        let (mut value, mut weights) = smooth(&p, temp);
        for _ in 0..250 {
            iterations += 1;
            // G_k = −Σ_j w_j e^{−ikθ_j} a_j b_j*
            let mut grad = Laurent::with_degree(d, cutoff);
            for (j, (w, q)) in weights.iter().zip(&p).enumerate() {
                if *w < 1e-300 {
                    continue;
                }
                let outer = CMat::from_fn(d, d, |r, s| q.1[r] * q.2[s].conj() * *w);
                for k in 0..=cutoff {
                    *grad.coeff_mut(k as i64) -= &outer * C64::from_polar(1.0, -(k as f64) * thetas[j]);
                }
            }
            let mut accepted = false;
            for _ in 0..40 {
                let trial = f.sub(&grad.scale(C64::new(step, 0.0)));
                let tp = profile(&trial);
                let (tv, tw) = smooth(&tp, temp);
                if tv < value {
                    let gain = value - tv;
                    f = trial;
                    p = tp;
                    value = tv;
                    weights = tw;
                    step *= 1.5;
                    accepted = gain > 1e-13 * value.max(1.0);
                    break;
                }
                step *= 0.5;
            }
            let current = peak(&p);
            if current < best.1 {
                best = (f.clone(), current);
            }
            if !accepted {
                break;
            }
        }
        if best.1 <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        converged = step > 1e-12;
    }
    (best.0, iterations, converged)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CertificateSource {
    FromApproximant,
    FromAscent,
}

/// `k ∈ A` with `Re(u*k) ⪰ alpha·1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub k: ModelElement,
    pub alpha: f64,
    /// `‖k‖_∞`.
    pub k_norm: f64,
    pub source: CertificateSource,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertifyOutcome {
    Certified(Certificate),
    Infeasible { gap: f64 },
}

impl CertifyOutcome {
    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            CertifyOutcome::Certified(c) => Some(c),
            CertifyOutcome::Infeasible { .. } => None,
        }
    }

    /// Certified margin, or 0 when infeasible.
    pub fn alpha(&self) -> f64 {
        self.certificate().map_or(0.0, |c| c.alpha)
    }
}

/// `λ_min(Re(u*k))` (minimum over four times the grid for symbols).
pub fn real_part_floor(model: &SubdiagonalModel, u: &ModelElement, k: &ModelElement) -> Result<f64> {
    let prod = model.mul(&model.adj(u)?, k)?;
    let m = 4 * model.grid();
    model.min_eig_hermitian_on(&prod, m)
}

/// From `‖u − f‖_∞ < 1` to `Re(u*f) ⪰ (1 − ‖u − f‖_∞)·1`.
pub fn approximant_to_certificate(model: &SubdiagonalModel, u: &ModelElement, f: &ModelElement) -> Result<Certificate> {
    let distance = model.sup_norm(&model.sub(u, f)?)?;
    if distance >= 1.0 {
        return Err(Error::ApproximantTooFar { distance });
    }
    let alpha = 1.0 - distance;
    let floor = real_part_floor(model, u, f)?;
    if floor < alpha - 1e-9 {
        return Err(Error::InvalidCertificate(format!(
            "λ_min(Re(u*f)) = {floor} is below alpha = {alpha}"
        )));
    }
    Ok(Certificate {
        k: f.clone(),
        alpha,
        k_norm: model.sup_norm(f)?,
        source: CertificateSource::FromApproximant,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledApproximant {
    pub f: ModelElement,
    /// `√(1 − δ)` with `δ = 2·alpha·eps/‖k‖ − eps²`.
    pub bound: f64,
    pub eps: f64,
    /// Measured `‖u − f‖_∞`.
    pub achieved: f64,
}

/// From `Re(u*k) ⪰ α` to `‖u − λk‖_∞ ≤ √(1 − δ)` with `λ = eps/‖k‖`.
///
/// Without an explicit `eps` the bound is optimized: `eps = α/‖k‖`, which
/// gives `δ = α²/‖k‖²`.
pub fn certificate_to_approximant(
    model: &SubdiagonalModel,
    u: &ModelElement,
    cert: &Certificate,
    eps: Option<f64>,
) -> Result<ScaledApproximant> {
    let (alpha, norm) = (cert.alpha, cert.k_norm);
    if !(alpha > 0.0 && norm > 0.0 && alpha <= norm * (1.0 + 1e-9)) {
        return Err(Error::InvalidCertificate(format!("alpha = {alpha}, ‖k‖ = {norm}")));
    }
    let upper = (2.0 * alpha / norm).min(1.0);
    let eps = eps.unwrap_or(alpha / norm).clamp(f64::MIN_POSITIVE, upper);
    let delta = 2.0 * alpha * eps / norm - eps * eps;
    if !(delta > 0.0 && delta < 1.0 + 1e-12) {
        return Err(Error::InvalidCertificate(format!("δ = {delta} outside (0, 1)")));
    }
    let bound = (1.0 - delta).max(0.0).sqrt();
    let f = model.scale(&cert.k, C64::new(eps / norm, 0.0))?;
    let achieved = model.sup_norm(&model.sub(u, &f)?)?;
    if achieved > bound + 1e-9 {
        return Err(Error::InvalidCertificate(format!(
            "‖u − f‖ = {achieved} exceeds the bound {bound}"
        )));
    }
    Ok(ScaledApproximant {
        f,
        bound,
        eps,
        achieved,
    })
}

/// Looks for `k ∈ A` with `Re(u*k)` strictly positive: first through the best
/// analytic approximant, then (near the boundary) by supergradient ascent on
/// `λ_min(Re(u*k))` over `‖k‖₂ ≤ 1`.
pub fn certify_positive_real(
    model: &SubdiagonalModel,
    u: &ModelElement,
    cutoff: usize,
    tol: f64,
) -> Result<CertifyOutcome> {
    let best = best_analytic_approx(model, u, cutoff, tol)?;
    if best.achieved < 1.0 - tol {
        return Ok(CertifyOutcome::Certified(approximant_to_certificate(model, u, &best.f)?));
    }
    let gap = (dist_to_algebra(model, u, cutoff)? - 1.0).max(0.0);
    if best.achieved > 1.0 + tol {
        return Ok(CertifyOutcome::Infeasible { gap });
    }
    let (k, floor) = ascent(model, u, cutoff, 500)?;
    if floor > tol {
        let alpha = real_part_floor(model, u, &k)?;
        if alpha > tol {
            return Ok(CertifyOutcome::Certified(Certificate {
                k_norm: model.sup_norm(&k)?,
                k,
                alpha,
                source: CertificateSource::FromAscent,
            }));
        }
    }
    Ok(CertifyOutcome::Infeasible { gap })
}

/// Projected supergradient ascent for `max λ_min(Re(u*k))`, `k ∈ A`, `‖k‖₂ ≤ 1`.
fn ascent(model: &SubdiagonalModel, u: &ModelElement, cutoff: usize, iterations: usize) -> Result<(ModelElement, f64)> {
    let mut k = model.p_plus(u)?;
    if let ModelElement::Laurent(l) = &k {
        k = ModelElement::Laurent(l.truncate(cutoff));
    }
    let norm = model.l2_norm(&k)?;
    k = if norm > 1e-12 {
        model.scale(&k, C64::new(1.0 / norm, 0.0))?
    } else {
        model.one()
    };
    let mut best = (k.clone(), f64::NEG_INFINITY);
    let grid = model.grid();
    for t in 0..iterations {
        // value and a supergradient at the worst point
        let uv = model.grid_values(u)?;
        let kv = model.grid_values(&k)?;
        let mut worst = (f64::INFINITY, 0usize, Vec::new());
        for (j, (uj, kj)) in uv.iter().zip(&kv).enumerate() {
            let eig = opcore::hermitian_eigen(&hermitian_part(&(uj.adjoint() * kj)))?;
            let lam = *eig.values.last().expect("nonempty");
            if lam < worst.0 {
                let v: Vec<C64> = eig.vectors.column(eig.values.len() - 1).iter().copied().collect();
                worst = (lam, j, v);
            }
        }
        if worst.0 > best.1 {
            best = (k.clone(), worst.0);
        }
        let (_, j, v) = worst;
        let vv = CMat::from_fn(v.len(), v.len(), |a, b| v[a] * v[b].conj());
        let x = &uv[j] * vv;
        let step = C64::new(0.5 / ((t + 1) as f64).sqrt(), 0.0);
        let grad = match model {
            SubdiagonalModel::Triangular { .. } => model.p_plus(&ModelElement::Matrix(x))?,
            SubdiagonalModel::Fourier { .. } => {
                let theta = fft::grid_angle(j, grid);
                let pairs = (0..=cutoff as i64).map(|p| (p, &x * C64::from_polar(1.0, -(p as f64) * theta)));
                ModelElement::Laurent(Laurent::from_pairs(model.block_size(), pairs)?)
            }
        };
        k = model.add(&k, &model.scale(&grad, step)?)?;
        let norm = model.l2_norm(&k)?;
        if norm > 1.0 {
            k = model.scale(&k, C64::new(1.0 / norm, 0.0))?;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{diag, identity, real, unit};

    fn tri(n: usize) -> SubdiagonalModel {
        SubdiagonalModel::triangular(n).unwrap()
    }

    fn zbar() -> ModelElement {
        ModelElement::Laurent(Laurent::scalar(&[(-1, real(1.0))]))
    }

    #[test]
    fn rho_of_trace_is_zero() {
        for model in [tri(4), SubdiagonalModel::fourier(2, 4).unwrap()] {
            let r = rho_gram(&model, &model.one(), 4).unwrap();
            assert!(r.rho.abs() < 1e-12);
        }
    }

    #[test]
    fn distance_examples() {
        let m = tri(2);
        assert_eq!(dist_to_algebra(&m, &ModelElement::Matrix(unit(2, 1, 0)), 0).unwrap(), 1.0);
        assert_eq!(dist_to_algebra(&m, &ModelElement::Matrix(unit(2, 0, 1)), 0).unwrap(), 0.0);
        let f = SubdiagonalModel::fourier(1, 4).unwrap();
        assert!((dist_to_algebra(&f, &zbar(), 8).unwrap() - 1.0).abs() < 1e-15);
        assert!((hankel_restricted_norm(&f, &zbar(), 8).unwrap() - 1.0).abs() < 1e-15);
        assert!(hankel_restricted_norm(&f, &f.one(), 8).unwrap() < 1e-15);
    }

    #[test]
    fn parrott_on_lower_unit() {
        let m = tri(2);
        let b = best_analytic_approx(&m, &ModelElement::Matrix(unit(2, 1, 0)), 0, 1e-9).unwrap();
        assert!((b.achieved - 1.0).abs() < 1e-9);
        assert!(m.l2_norm(&b.f).unwrap() < 1e-9);
        let up = ModelElement::Matrix(identity(3) + unit(3, 0, 2));
        let b = best_analytic_approx(&tri(3), &up, 0, 1e-9).unwrap();
        assert!(b.achieved < 1e-12);
    }

    #[test]
    fn certificate_examples() {
        let m = tri(2);
        let c = approximant_to_certificate(&m, &m.one(), &m.one()).unwrap();
        assert!((c.alpha - 1.0).abs() < 1e-15);
        let t0: f64 = 0.3;
        let u = ModelElement::Matrix(diag(&[C64::from_polar(1.0, t0), real(1.0)]));
        let c = approximant_to_certificate(&m, &u, &m.one()).unwrap();
        let expect = 1.0 - (real(1.0) - C64::from_polar(1.0, t0)).norm();
        assert!((c.alpha - expect).abs() < 1e-12);
        let back = certificate_to_approximant(&m, &u, &c, None).unwrap();
        assert!(back.achieved < 1.0 && back.achieved <= back.bound + 1e-9);
        let scaled = Certificate {
            k: m.scale(&c.k, real(3.0)).unwrap(),
            alpha: 3.0 * c.alpha,
            k_norm: 3.0 * c.k_norm,
            source: c.source,
        };
        let again = certificate_to_approximant(&m, &u, &scaled, None).unwrap();
        assert!(m.l2_norm(&m.sub(&again.f, &back.f).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn cyclic_permutation_is_infeasible() {
        let n = 3;
        let mut p = zeros(n, n);
        for i in 0..n - 1 {
            p[(i + 1, i)] = real(1.0);
        }
        p[(0, n - 1)] = real(1.0);
        let m = tri(n);
        let out = certify_positive_real(&m, &ModelElement::Matrix(p), 0, 1e-6).unwrap();
        assert!(matches!(out, CertifyOutcome::Infeasible { .. }));
        let one = certify_positive_real(&m, &m.one(), 0, 1e-6).unwrap();
        assert!((one.alpha() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zbar_is_infeasible_on_the_circle() {
        let f = SubdiagonalModel::fourier(1, 4).unwrap();
        let out = certify_positive_real(&f, &zbar(), 8, 1e-6).unwrap();
        assert!(matches!(out, CertifyOutcome::Infeasible { .. }));
    }

    #[test]
    fn descent_reaches_nehari_value_for_a_scalar_symbol() {
        // u = (z̄ + 2)/3·... keep a smooth symbol with known distance via Nehari
        let f = SubdiagonalModel::fourier(1, 8).unwrap();
        let u = ModelElement::Laurent(Laurent::scalar(&[(-2, real(0.3)), (-1, real(0.4)), (0, real(0.5)), (1, real(0.2))]));
        let nehari = dist_to_algebra(&f, &u, 32).unwrap();
        let b = best_analytic_approx(&f, &u, 32, 1e-9).unwrap();
        assert!(b.achieved >= nehari - 1e-9);
        assert!(b.achieved <= nehari + 2e-3, "{} vs {}", b.achieved, nehari);
    }
}
