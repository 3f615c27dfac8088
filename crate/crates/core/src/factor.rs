//! Outer (spectral) factorization and the two structural factorizations
//! built on top of it: `g = f_R·u·f_L` for positive weights and `a = u·k` for
//! symbols with strictly positive modulus.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft;
use crate::models::{Laurent, ModelElement, SubdiagonalModel};
use crate::opcore::{self, hermitian_part, singular_values, zeros, CMat, C64, DEFAULT_ZERO_TOL};

/// Default relative strict-positivity threshold `ε_pos`.
pub const DEFAULT_EPS_POS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterMethod {
    /// Upper Cholesky factor (Triangular model).
    Cholesky,
    /// `exp` of the analytic completion of `½ log w` (scalar symbols).
    Exponential,
    /// Banded block-Toeplitz Cholesky (matrix symbols).
    Bauer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorOptions {
    /// Residual tolerance, relative to `max(1, ‖w‖₂)`.
    pub tol: f64,
    /// Relative strict-positivity threshold.
    pub eps_pos: f64,
    /// Forces an algorithm; `None` picks by model and block size.
    pub method: Option<OuterMethod>,
    /// Cap on Bauer block rows; `None` means `max(64·deg, 256)`.
    pub max_blocks: Option<usize>,
}

impl FactorOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

impl Default for FactorOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            eps_pos: DEFAULT_EPS_POS,
            method: None,
            max_blocks: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OuterFactor {
    /// `h ∈ H²` with `w = h*h` and `Φ(h) ⪰ 0`.
    pub h: ModelElement,
    /// `‖w − h*h‖₂`.
    pub residual: f64,
    /// `|Δ(h) − Δ(Φ(h))|`; small values certify outerness.
    pub delta_gap: f64,
    pub method: OuterMethod,
    /// Bauer block rows used (0 for the other methods).
    pub iterations: usize,
    /// Energy discarded when truncating the exponential factor.
    pub tail_energy: f64,
}

/// Outer factor `h` of a PSD element `w = h*h` with default options.
pub fn outer_factor_psd(model: &SubdiagonalModel, w: &ModelElement, tol: f64) -> Result<OuterFactor> {
    outer_factor_with(model, w, &FactorOptions::with_tol(tol))
}

pub fn outer_factor_with(
    model: &SubdiagonalModel,
    w: &ModelElement,
    opts: &FactorOptions,
) -> Result<OuterFactor> {
    model.check_psd(w)?;
    let (h, method, iterations, tail_energy) = match w {
        ModelElement::Matrix(m) => {
            let det = opcore::fk_det(m, DEFAULT_ZERO_TOL)?;
            if det <= 0.0 {
                return Err(Error::DeterminantZero { det });
            }
            let r = opcore::cholesky_upper(m)?;
            (ModelElement::Matrix(r), OuterMethod::Cholesky, 0, 0.0)
        }
        ModelElement::Laurent(l) => {
            let low = model.min_eig_hermitian(w)?;
            let top = model.grid_max_op_norm(w, model.grid())?;
            if low < opts.eps_pos * top || top <= 0.0 {
                return Err(Error::DeterminantZero { det: 0.0 });
            }
            let l = l.trim(0.0);
            let method = opts.method.unwrap_or(if l.d() == 1 {
                OuterMethod::Exponential
            } else {
                OuterMethod::Bauer
            });
            match method {
                OuterMethod::Exponential if l.d() == 1 => {
                    let (h, tail) = outer_exponential(&l, model.grid());
                    (ModelElement::Laurent(h), method, 0, tail)
                }
                OuterMethod::Bauer => {
                    let cap = opts
                        .max_blocks
                        .unwrap_or_else(|| (64 * l.degree()).max(256));
                    let (h, rows) = outer_bauer(&l, opts.tol, cap)?;
                    (ModelElement::Laurent(h), method, rows, 0.0)
                }
                _ => {
                    return Err(Error::InvalidParams(format!(
                        "{method:?} does not apply to {}-block symbols",
                        l.d()
                    )))
                }
            }
        }
    };
    let recomposed = model.mul(&model.adj(&h)?, &h)?;
    let residual = model.l2_norm(&model.sub(w, &recomposed)?)?;
    let scale = model.l2_norm(w)?.max(1.0);
    if residual > opts.tol * scale {
        return Err(Error::ResidualExceeded {
            identity: "w = h*h",
            value: residual,
            tol: opts.tol * scale,
        });
    }
    let delta_gap = (model.det(&h)? - model.det_phi(&h)?).abs();
    Ok(OuterFactor {
        h,
        residual,
        delta_gap,
        method,
        iterations,
        tail_energy,
    })
}

/// Scalar outer factor `exp(½·ĉ₀ + Σ_{k≥1} ĉ_k z^k)` where `ĉ` are the Fourier
/// coefficients of `log w`, truncated to the degree of `w`.
fn outer_exponential(w: &Laurent, grid: usize) -> (Laurent, f64) {
    let deg = w.degree();
    let m = 4 * grid.max((8 * deg.max(1)).next_power_of_two());
    let logs: Vec<C64> = w
        .eval_grid(m)
        .iter()
        .map(|v| C64::new(v[(0, 0)].re.ln(), 0.0))
        .collect();
    let c = fft::coefficients(&logs);
    let mut analytic = vec![C64::new(0.0, 0.0); m];
    analytic[0] = c[0] * 0.5;
    analytic[1..m / 2].copy_from_slice(&c[1..m / 2]);
    let expo: Vec<C64> = fft::synthesize(&analytic).into_iter().map(|z| z.exp()).collect();
    let hc = fft::coefficients(&expo);
    let mut h = Laurent::with_degree(1, deg);
    for (k, &v) in hc.iter().enumerate().take(deg + 1) {
        h.coeff_mut(k as i64)[(0, 0)] = v;
    }
    let tail = hc.iter().skip(deg + 1).map(|z| z.norm_sqr()).sum();
    (h, tail)
}

/// Bauer's method: block Cholesky `T = CC*` of the banded block Toeplitz matrix
/// `T[i,j] = W_{j−i}`, run row by row until the last row `C[i, i−k] → F_k`
/// settles. Then `h = Σ F_k* z^k` satisfies `w = h*h`.
fn outer_bauer(w: &Laurent, tol: f64, max_blocks: usize) -> Result<(Laurent, usize)> {
    let d = w.d();
    let deg = w.degree();
    let coeff: Vec<CMat> = (0..=deg as i64).map(|k| w.coeff_or_zero(k)).collect();
    // T[i,j] = W_{j−i}; W_{−k} = W_k*.
    let block = |i: usize, j: usize| -> CMat {
        if j >= i {
            coeff[j - i].clone()
        } else {
            coeff[i - j].adjoint()
        }
    };
    // rows[i][k] = C[i, i−k]
    let mut rows: Vec<Vec<CMat>> = Vec::new();
    // Rows are refined toward machine precision; the caller's tolerance is
    // only the acceptance level when the block cap is reached first.
    let target = 4e-15;
    let accept = (1e-3 * tol).max(target);
    let mut change = f64::INFINITY;
    for i in 0..max_blocks {
        let jmin = i.saturating_sub(deg);
        let mut row = vec![zeros(d, d); i - jmin + 1];
        for j in jmin..=i {
            let mut s = block(i, j);
            let lmin = jmin.max(j.saturating_sub(deg));
            for l in lmin..j {
                let cjl = if j == i { &row[i - l] } else { &rows[j][j - l] };
                s -= &row[i - l] * cjl.adjoint();
            }
            if j < i {
                let cjj = &rows[j][0];
                let xt = cjj
                    .solve_lower_triangular(&s.adjoint())
                    .ok_or(Error::Singular)?;
                row[i - j] = xt.adjoint();
            } else {
                let chol = hermitian_part(&s).cholesky().ok_or(Error::NotPsd {
                    min_eig: opcore::lambda_min_herm(&s).unwrap_or(f64::NAN),
                })?;
                row[0] = chol.l();
            }
        }
        if i > deg {
            let prev = &rows[i - 1];
            let diff: f64 = row.iter().zip(prev).map(|(a, b)| (a - b).norm_squared()).sum();
            let size: f64 = row.iter().map(|a| a.norm_squared()).sum();
            change = diff.sqrt() / size.sqrt().max(f64::MIN_POSITIVE);
        }
        rows.push(row);
        if change <= target || deg == 0 {
            return bauer_symbol(&rows, d, deg).map(|h| (h, i + 1));
        }
    }
    if change <= accept {
        return bauer_symbol(&rows, d, deg).map(|h| (h, max_blocks));
    }
    Err(Error::NoConvergence {
        iterations: max_blocks,
        last_change: change,
    })
}

/// `h = Σ F_k* z^k` from the last Cholesky row, rotated so `Φ(h) ⪰ 0`.
fn bauer_symbol(rows: &[Vec<CMat>], d: usize, deg: usize) -> Result<Laurent> {
    let last = rows.last().expect("at least one row");
    let mut h = Laurent::with_degree(d, deg);
    for (k, f) in last.iter().enumerate() {
        *h.coeff_mut(k as i64) = f.adjoint();
    }
    let polar = opcore::polar(&h.coeff_or_zero(0), DEFAULT_ZERO_TOL)?;
    Ok(h.left_mul_const(&polar.w.adjoint()))
}

/// Strict-positivity margin: smallest singular value over the grid (or of
/// the matrix) together with the largest.
fn singular_range(model: &SubdiagonalModel, x: &ModelElement) -> Result<(f64, f64)> {
    let mut low = f64::INFINITY;
    let mut high = 0.0f64;
    for v in model.grid_values(x)? {
        let s = singular_values(&v);
        high = high.max(s[0]);
        low = low.min(*s.last().expect("nonempty"));
    }
    Ok((low, high))
}

fn max_grid_defect(model: &SubdiagonalModel, x: &ModelElement, target: &CMat) -> Result<f64> {
    let m = 2 * model.grid();
    Ok(model
        .grid_values_on(x, m)?
        .iter()
        .map(|v| opcore::op_norm(&(v.adjoint() * v - target)))
        .fold(0.0, f64::max))
}

/// `f = u·h` with `u` unitary and `h` outer.
#[derive(Debug, Clone, PartialEq)]
pub struct RieszSzego {
    pub u: ModelElement,
    pub outer: OuterFactor,
    /// `‖u*u − 1‖` (operator norm; for symbols the maximum over twice the grid).
    pub unitarity: f64,
    /// `‖f − u·h‖₂`.
    pub residual: f64,
}

pub fn riesz_szego(model: &SubdiagonalModel, f: &ModelElement, tol: f64) -> Result<RieszSzego> {
    let det = model.det(f)?;
    if det <= 0.0 {
        return Err(Error::DeterminantZero { det });
    }
    let w = model.mul(&model.adj(f)?, f)?;
    let outer = outer_factor_psd(model, &w, tol)?;
    let u = match (f, &outer.h) {
        (ModelElement::Matrix(a), ModelElement::Matrix(r)) => {
            ModelElement::Matrix(opcore::solve_right_upper(a, r)?)
        }
        _ => model.zip_pointwise(f, &outer.h, |a, h| Ok(a * opcore::inverse(h)?))?,
    };
    let k = model.block_size();
    let unitarity = max_grid_defect(model, &u, &opcore::identity(k))?;
    if unitarity > tol {
        return Err(Error::UnitarityFailure { defect: unitarity });
    }
    let residual = model.l2_norm(&model.sub(f, &model.mul(&u, &outer.h)?)?)?;
    let bound = tol * model.l2_norm(f)?.max(1.0);
    if residual > bound {
        return Err(Error::ResidualExceeded {
            identity: "f = u h",
            value: residual,
            tol: bound,
        });
    }
    Ok(RieszSzego {
        u,
        outer,
        unitarity,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hs1Residuals {
    /// `‖g − f_R·u·f_L‖₂` (for the normalized `g`).
    pub recomposition: f64,
    /// `‖f_L*f_L − (g + 1 − s_Φ)‖₂`.
    pub left_modulus: f64,
    /// `‖f_R f_R* − (g + 1 − s_Φ)‖₂`.
    pub right_modulus: f64,
    /// `max(‖u*u − s_Φ‖₂, ‖uu* − s_Φ‖₂)`.
    pub unitarity: f64,
    /// `|Δ(f_L) − Δ(Φ(f_L))|`.
    pub delta_gap_left: f64,
    /// `|Δ(f_R) − Δ(Φ(f_R))|`.
    pub delta_gap_right: f64,
}

/// `g = f_R·u·f_L` with strongly outer `f_L`, `f_R` and `u*u = uu* = s_Φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationBundle {
    pub f_l: ModelElement,
    pub f_r: ModelElement,
    pub u: ModelElement,
    pub s_phi: CMat,
    /// `τ(g)` of the input; the bundle factorizes `g/τ(g)`.
    pub scale: f64,
    /// `Δ_Φ(g/τ(g))`.
    pub delta_phi: f64,
    pub residuals: Hs1Residuals,
}

/// Support projection of `Φ(g)`. In the Triangular model it is computed
/// entrywise so that it lies exactly in the diagonal.
pub fn phi_support(model: &SubdiagonalModel, g: &ModelElement) -> Result<CMat> {
    let p = model.phi_matrix(g)?;
    match model {
        SubdiagonalModel::Triangular { n } => {
            let top = p.diagonal().iter().map(|z| z.re).fold(0.0, f64::max);
            Ok(opcore::diag_real(
                &(0..*n)
                    .map(|i| {
                        if top > 0.0 && p[(i, i)].re >= DEFAULT_ZERO_TOL * top {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect::<Vec<_>>(),
            ))
        }
        SubdiagonalModel::Fourier { .. } => opcore::support_proj(&p, DEFAULT_ZERO_TOL),
    }
}

pub fn hs1_factorize(model: &SubdiagonalModel, g: &ModelElement, tol: f64) -> Result<FactorizationBundle> {
    model.check_psd(g)?;
    let scale = model.trace(g)?.re;
    if scale <= 0.0 {
        return Err(Error::ZeroTrace);
    }
    let g = model.scale(g, C64::new(1.0 / scale, 0.0))?;
    let s_phi = phi_support(model, &g)?;
    let comp = model.compress(&s_phi)?;
    let sub = comp.model;
    let gc = comp.restrict(&g)?;
    let delta_phi = sub.det(&gc)?;
    if delta_phi <= 0.0 {
        return Err(Error::DeltaPhiZero { det: delta_phi });
    }

    let h_l = outer_factor_psd(&sub, &gc, tol)?.h;
    let h_r = sub.flip(&outer_factor_psd(&sub, &sub.flip(&gc)?, tol)?.h)?;
    // u = h_R⁻¹·g·h_L⁻¹ is unitary in the compressed algebra.
    let u_c = match (&gc, &h_l, &h_r) {
        (ModelElement::Matrix(gm), ModelElement::Matrix(l), ModelElement::Matrix(r)) => {
            let right = opcore::solve_right_upper(gm, l)?;
            let left = r
                .solve_upper_triangular(&right)
                .ok_or(Error::Singular)?;
            ModelElement::Matrix(left)
        }
        _ => sub.zip_pointwise_refined(
            &[&gc, &h_l, &h_r],
            |v| Ok(opcore::inverse(&v[2])? * &v[0] * opcore::inverse(&v[1])?),
            1e-13,
        )?,
    };

    let complement = comp.complement();
    let f_l = model.add(&comp.extend(&h_l)?, &complement)?;
    let f_r = model.add(&comp.extend(&h_r)?, &complement)?;
    let u = comp.extend(&u_c)?;

    let s_el = model.constant(s_phi.clone())?;
    let target = model.add(&g, &complement)?;
    let dist = |a: &ModelElement, b: &ModelElement| -> Result<f64> { model.l2_norm(&model.sub(a, b)?) };
    let recomposition = dist(&g, &model.mul3(&f_r, &u, &f_l)?)?;
    let left_modulus = dist(&model.mul(&model.adj(&f_l)?, &f_l)?, &target)?;
    let right_modulus = dist(&model.mul(&f_r, &model.adj(&f_r)?)?, &target)?;
    let unitarity = dist(&model.mul(&model.adj(&u)?, &u)?, &s_el)?
        .max(dist(&model.mul(&u, &model.adj(&u)?)?, &s_el)?);
    let gap = |f: &ModelElement| -> Result<f64> { Ok((model.det(f)? - model.det_phi(f)?).abs()) };
    let residuals = Hs1Residuals {
        recomposition,
        left_modulus,
        right_modulus,
        unitarity,
        delta_gap_left: gap(&f_l)?,
        delta_gap_right: gap(&f_r)?,
    };
    for (identity, value) in [
        ("g = f_R u f_L", recomposition),
        ("|f_L|^2 = g + 1 - s", left_modulus),
        ("|f_R*|^2 = g + 1 - s", right_modulus),
        ("u*u = uu* = s", unitarity),
    ] {
        if value > tol {
            return Err(Error::ResidualExceeded { identity, value, tol });
        }
    }
    Ok(FactorizationBundle {
        f_l,
        f_r,
        u,
        s_phi,
        scale,
        delta_phi,
        residuals,
    })
}

/// `a = u·k` with `u` unitary and `k, k⁻¹ ∈ A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Toep1Factorization {
    pub u: ModelElement,
    pub k: ModelElement,
    pub k_inv: ModelElement,
    /// `‖a − u·k‖₂`.
    pub residual: f64,
    /// `‖u*u − 1‖` (operator norm, maximum over twice the grid for symbols).
    pub unitarity: f64,
    /// `‖k·k⁻¹ − 1‖₂`.
    pub inverse_residual: f64,
    /// Smallest singular value of `k` (over the grid for symbols).
    pub k_sigma_min: f64,
}

pub fn toep1_factorize(model: &SubdiagonalModel, a: &ModelElement, tol: f64) -> Result<Toep1Factorization> {
    toep1_factorize_with(model, a, &FactorOptions::with_tol(tol))
}

pub fn toep1_factorize_with(
    model: &SubdiagonalModel,
    a: &ModelElement,
    opts: &FactorOptions,
) -> Result<Toep1Factorization> {
    let (low, high) = singular_range(model, a)?;
    if high <= 0.0 || low < opts.eps_pos * high {
        return Err(Error::NotStrictlyPositive { min_eig: low });
    }
    let w = model.mul(&model.adj(a)?, a)?;
    let k = outer_factor_with(model, &w, opts)?.h;
    let (k_sigma_min, k_top) = singular_range(model, &k)?;
    if k_sigma_min < opts.eps_pos * k_top {
        return Err(Error::NotStrictlyPositive { min_eig: k_sigma_min });
    }
    let k_inv = match &k {
        ModelElement::Matrix(r) => {
            let n = r.nrows();
            ModelElement::Matrix(r.solve_upper_triangular(&opcore::identity(n)).ok_or(Error::Singular)?)
        }
        ModelElement::Laurent(_) => {
            let inv = model.inverse(&k)?;
            let inv_l = inv.as_laurent().expect("symbol");
            let leak = inv_l.energy_outside(|j| j >= 0).sqrt();
            if leak > opts.tol {
                return Err(Error::ResidualExceeded {
                    identity: "k^-1 in A",
                    value: leak,
                    tol: opts.tol,
                });
            }
            model.p_plus(&inv)?
        }
    };
    let one = model.one();
    let inverse_residual = model.l2_norm(&model.sub(&model.mul(&k, &k_inv)?, &one)?)?;
    if inverse_residual > opts.tol {
        return Err(Error::ResidualExceeded {
            identity: "k k^-1 = 1",
            value: inverse_residual,
            tol: opts.tol,
        });
    }
    let u = model.mul(a, &k_inv)?;
    let u = match u {
        ModelElement::Laurent(l) => {
            let top = l.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
            ModelElement::Laurent(l.trim(1e-17 * top))
        }
        m => m,
    };
    let unitarity = max_grid_defect(model, &u, &opcore::identity(model.block_size()))?;
    if unitarity > opts.tol.max(1e-12) * 10.0 {
        return Err(Error::UnitarityFailure { defect: unitarity });
    }
    let residual = model.l2_norm(&model.sub(a, &model.mul(&u, &k)?)?)?;
    Ok(Toep1Factorization {
        u,
        k,
        k_inv,
        residual,
        unitarity,
        inverse_residual,
        k_sigma_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{c, diag_real, identity, real};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tri(n: usize) -> SubdiagonalModel {
        SubdiagonalModel::triangular(n).unwrap()
    }

    fn near(a: &ModelElement, b: &ModelElement, model: &SubdiagonalModel) -> f64 {
        model.l2_norm(&model.sub(a, b).unwrap()).unwrap()
    }

    #[test]
    fn identity_factors_trivially() {
        for model in [tri(3), SubdiagonalModel::fourier(2, 2).unwrap()] {
            let one = model.one();
            let f = outer_factor_psd(&model, &one, 1e-9).unwrap();
            assert!(near(&f.h, &one, &model) < 1e-12);
            let b = hs1_factorize(&model, &one, 1e-9).unwrap();
            assert!(near(&b.u, &one, &model) < 1e-10);
            assert!(near(&b.f_l, &one, &model) < 1e-10);
            assert_eq!(b.s_phi, identity(model.block_size()));
        }
    }

    #[test]
    fn triangular_cholesky_example() {
        let m = tri(2);
        let w = ModelElement::Matrix(CMat::from_row_slice(2, 2, &[real(2.0), real(1.0), real(1.0), real(2.0)]));
        let f = outer_factor_psd(&m, &w, 1e-12).unwrap();
        let r = f.h.as_matrix().unwrap();
        assert_eq!(r[(1, 0)], real(0.0));
        assert!(r[(0, 0)].re > 0.0 && r[(1, 1)].re > 0.0);
        assert!(f.residual <= 1e-12);
        assert!(f.delta_gap <= 1e-12);
    }

    #[test]
    fn scalar_outer_of_shifted_weight() {
        let model = SubdiagonalModel::fourier(1, 4).unwrap();
        let h0 = Laurent::scalar(&[(0, real(1.0)), (1, real(0.5))]);
        let w = ModelElement::Laurent(h0.adjoint().mul(&h0));
        for method in [OuterMethod::Exponential, OuterMethod::Bauer] {
            let opts = FactorOptions {
                method: Some(method),
                tol: 1e-10,
                ..FactorOptions::default()
            };
            let f = outer_factor_with(&model, &w, &opts).unwrap();
            let h = f.h.as_laurent().unwrap();
            assert!((h.coeff_or_zero(0)[(0, 0)] - real(1.0)).norm() < 1e-8, "{method:?}");
            assert!((h.coeff_or_zero(1)[(0, 0)] - real(0.5)).norm() < 1e-8, "{method:?}");
        }
    }

    #[test]
    fn matrix_outer_of_diagonal_embedding() {
        let model = SubdiagonalModel::fourier(2, 4).unwrap();
        let h0 = Laurent::from_pairs(2, [(0, identity(2)), (1, identity(2) * real(0.5))]).unwrap();
        let w = ModelElement::Laurent(h0.mul(&h0.adjoint()));
        let f = outer_factor_psd(&model, &w, 1e-9).unwrap();
        assert_eq!(f.method, OuterMethod::Bauer);
        assert!(near(&f.h, &ModelElement::Laurent(h0), &model) < 1e-6);
    }

    #[test]
    fn bauer_handles_non_commuting_blocks() {
        let model = SubdiagonalModel::fourier(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rm = |rng: &mut ChaCha8Rng| CMat::from_fn(2, 2, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let h0 = Laurent::from_pairs(2, [(0, identity(2) * real(2.0) + rm(&mut rng)), (1, rm(&mut rng)), (3, rm(&mut rng))]).unwrap();
        let w = ModelElement::Laurent(h0.adjoint().mul(&h0));
        let f = outer_factor_psd(&model, &w, 1e-9).unwrap();
        assert!(f.residual < 1e-9);
        assert!(f.delta_gap < 1e-6);
        let phi = model.phi_matrix(&f.h).unwrap();
        assert!(opcore::lambda_min_herm(&phi).unwrap() > 0.0);
        assert!((&phi - phi.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn rejects_singular_and_non_psd() {
        let m = tri(2);
        let sing = ModelElement::Matrix(diag_real(&[1.0, 0.0]));
        assert!(matches!(outer_factor_psd(&m, &sing, 1e-9), Err(Error::DeterminantZero { .. })));
        let neg = ModelElement::Matrix(diag_real(&[1.0, -1.0]));
        assert!(matches!(outer_factor_psd(&m, &neg, 1e-9), Err(Error::NotPsd { .. })));
        let f = SubdiagonalModel::fourier(1, 2).unwrap();
        let z = Laurent::scalar(&[(0, real(1.0)), (1, real(-1.0))]);
        let w = ModelElement::Laurent(z.adjoint().mul(&z));
        assert!(matches!(outer_factor_psd(&f, &w, 1e-9), Err(Error::DeterminantZero { .. })));
    }

    #[test]
    fn riesz_szego_examples() {
        let m = tri(2);
        let f = ModelElement::Matrix(diag_real(&[-1.0, 2.0]));
        let rs = riesz_szego(&m, &f, 1e-9).unwrap();
        assert!(near(&rs.u, &ModelElement::Matrix(diag_real(&[-1.0, 1.0])), &m) < 1e-14);
        assert!(near(&rs.outer.h, &ModelElement::Matrix(diag_real(&[1.0, 2.0])), &m) < 1e-14);
    }

    #[test]
    fn toep1_diagonal_example() {
        let m = tri(2);
        let a = ModelElement::Matrix(diag_real(&[2.0, -3.0]));
        let t = toep1_factorize(&m, &a, 1e-9).unwrap();
        assert!(near(&t.u, &ModelElement::Matrix(diag_real(&[1.0, -1.0])), &m) < 1e-14);
        assert!(near(&t.k, &ModelElement::Matrix(diag_real(&[2.0, 3.0])), &m) < 1e-14);
        let u = ModelElement::Matrix(CMat::from_row_slice(2, 2, &[real(0.0), real(1.0), real(1.0), real(0.0)]));
        let t = toep1_factorize(&m, &u, 1e-9).unwrap();
        assert!(near(&t.u, &u, &m) < 1e-14);
        assert!(near(&t.k, &m.one(), &m) < 1e-14);
        assert!(matches!(
            toep1_factorize(&m, &ModelElement::Matrix(diag_real(&[1.0, 0.0])), 1e-9),
            Err(Error::NotStrictlyPositive { .. })
        ));
    }

    #[test]
    fn remark_weight_has_rank_one_phi_support() {
        let model = SubdiagonalModel::fourier(2, 4).unwrap();
        let w = Laurent::scalar(&[(-1, real(0.5)), (0, real(2.0)), (1, real(0.5))]);
        let mut e11 = zeros(2, 2);
        e11[(0, 0)] = real(1.0);
        let g = ModelElement::Laurent(Laurent::from_pairs(2, w.iter().map(|(k, c)| (k, &e11 * c[(0, 0)]))).unwrap());
        let b = hs1_factorize(&model, &g, 1e-6).unwrap();
        assert!((&b.s_phi - &e11).norm() < 1e-12);
        assert!(b.residuals.recomposition < 1e-6);
    }
}
