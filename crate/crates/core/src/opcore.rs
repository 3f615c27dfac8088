//! Dense complex-matrix operator core.
//!
//! Everything here works in `(M_n, τ)` with the normalized trace
//! `τ(a) = tr(a)/n`. Tolerances are relative to the largest singular value of
//! the input unless stated otherwise.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Relative cut below which singular values count as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Allowed asymmetry `‖g − g*‖ / ‖g‖` for inputs claimed Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-8;

/// Allowed relative negativity `λ_min / λ_max` for inputs claimed PSD.
pub const PSD_TOL: f64 = 1e-10;

const LOG_FLOOR: f64 = 1e-300;

/// Singular value decomposition with singular values sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v: CMat,
}

/// Hermitian eigendecomposition with eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct HermEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

/// `a = w·p` with `p = |a|` and `w` a partial isometry.
#[derive(Debug, Clone)]
pub struct Polar {
    pub w: CMat,
    pub p: CMat,
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

/// Diagonal matrix from complex entries.
pub fn diag(entries: &[C64]) -> CMat {
    let n = entries.len();
    let mut m = zeros(n, n);
    for (i, &e) in entries.iter().enumerate() {
        m[(i, i)] = e;
    }
    m
}

/// Diagonal matrix from real entries.
pub fn diag_real(entries: &[f64]) -> CMat {
    diag(&entries.iter().map(|&x| real(x)).collect::<Vec<_>>())
}

/// Matrix unit `E_ij` in `M_n`.
pub fn unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = zeros(n, n);
    m[(i, j)] = real(1.0);
    m
}

pub fn ensure_square(a: &CMat) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

/// Normalized trace `τ(a) = tr(a)/n`.
pub fn trace_state(a: &CMat) -> Result<C64> {
    let n = ensure_square(a)?;
    if n == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    Ok(a.trace() / n as f64)
}

pub fn svd(a: &CMat) -> Svd {
    let (rows, cols) = a.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Svd {
            u: zeros(rows, 0),
            sigma: Vec::new(),
            v: zeros(cols, 0),
        };
    }
    // Eigenpairs of the dilation [[0, a], [a*, 0]] are (±σ, (u, ±v)/√2).
    // nalgebra's direct complex SVD can return vectors that do not
    // reconstruct `a` when singular values cluster; the Hermitian solver
    // does not have that problem.
    let mut h = zeros(rows + cols, rows + cols);
    h.view_mut((0, rows), (rows, cols)).copy_from(a);
    h.view_mut((rows, 0), (cols, rows)).copy_from(&a.adjoint());
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..rows + cols).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let top = eig.eigenvalues[order[0]].max(0.0);
    if top == 0.0 {
        return Svd {
            u: identity(rows).columns(0, k).into_owned(),
            sigma: vec![0.0; k],
            v: identity(cols).columns(0, k).into_owned(),
        };
    }
    let mut u = zeros(rows, k);
    let mut v = zeros(cols, k);
    let mut sigma = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let s = eig.eigenvalues[i];
        // The ±σ eigenvectors mix at order ε·top/σ; smaller singular values
        // are resolved on the compressed remainder, whose own scale is small.
        if s.is_nan() || s <= 1e-3 * top {
            break;
        }
        let col = eig.eigenvectors.column(i);
        let (x, y) = (col.rows(0, rows).into_owned(), col.rows(rows, cols).into_owned());
        u.set_column(sigma.len(), &x.unscale(x.norm()));
        v.set_column(sigma.len(), &y.unscale(y.norm()));
        sigma.push(s);
    }
    let done = sigma.len();
    if done < k {
        let uc = complement_basis(&u.columns(0, done).into_owned());
        let vc = complement_basis(&v.columns(0, done).into_owned());
        let rest = svd(&(uc.adjoint() * a * &vc));
        let m = rest.sigma.len();
        u.columns_mut(done, m).copy_from(&(&uc * &rest.u));
        v.columns_mut(done, m).copy_from(&(&vc * &rest.v));
        sigma.extend(rest.sigma);
    }
    Svd { u, sigma, v }
}

/// Orthonormal basis of the orthogonal complement of the columns of `q`
/// (which must be orthonormal).
fn complement_basis(q: &CMat) -> CMat {
    let n = q.nrows();
    let p = identity(n) - q * q.adjoint();
    let eig = hermitian_part(&p).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let m = n - q.ncols();
    let mut out = zeros(n, m);
    for (dst, &src) in order.iter().take(m).enumerate() {
        out.set_column(dst, &eig.eigenvectors.column(src));
    }
    out
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a
        .clone()
        .singular_values()
        .iter()
        .map(|x| x.max(0.0))
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Operator (spectral) norm.
pub fn op_norm(a: &CMat) -> f64 {
    if a.nrows() == 1 || a.ncols() == 1 {
        return a.norm();
    }
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Hilbert–Schmidt norm with respect to the normalized trace, `τ(a*a)^{1/2}`.
pub fn l2_normalized(a: &CMat) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    a.norm() / (a.nrows() as f64).sqrt()
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

pub fn hermitian_eigen(g: &CMat) -> Result<HermEigen> {
    let n = ensure_square(g)?;
    if n == 0 {
        return Ok(HermEigen {
            values: Vec::new(),
            vectors: zeros(0, 0),
        });
    }
    let dec = SymmetricEigen::new(hermitian_part(g));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| dec.eigenvalues[j].total_cmp(&dec.eigenvalues[i]));
    let mut vectors = zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(dec.eigenvalues[src]);
        vectors.set_column(dst, &dec.eigenvectors.column(src));
    }
    Ok(HermEigen { values, vectors })
}

/// Smallest eigenvalue of the Hermitian part of `a`.
pub fn lambda_min_herm(a: &CMat) -> Result<f64> {
    let n = ensure_square(a)?;
    if n == 1 {
        return Ok(a[(0, 0)].re);
    }
    Ok(hermitian_eigen(a)?
        .values
        .last()
        .copied()
        .unwrap_or(0.0))
}

/// Checks Hermiticity up to [`HERMITIAN_TOL`] and returns `(g + g*)/2`.
pub fn symmetrize(g: &CMat) -> Result<CMat> {
    ensure_square(g)?;
    let scale = g.norm().max(f64::MIN_POSITIVE);
    let asym = (g - g.adjoint()).norm();
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { asym: asym / scale });
    }
    Ok(hermitian_part(g))
}

/// Symmetrizes and checks positive semidefiniteness; returns the spectral data.
pub fn psd_eigen(g: &CMat) -> Result<HermEigen> {
    let h = symmetrize(g)?;
    let eig = hermitian_eigen(&h)?;
    let top = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let low = eig.values.last().copied().unwrap_or(0.0);
    if low < -PSD_TOL * top.max(f64::MIN_POSITIVE) && low < -f64::MIN_POSITIVE {
        return Err(Error::NotPsd { min_eig: low });
    }
    Ok(eig)
}

/// `V·diag(f(λ))·V*` for a Hermitian eigendecomposition.
pub fn spectral_apply(eig: &HermEigen, f: impl Fn(f64) -> C64) -> CMat {
    let n = eig.vectors.nrows();
    let mut scaled = eig.vectors.clone();
    for (j, &lam) in eig.values.iter().enumerate() {
        let fj = f(lam);
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    scaled * eig.vectors.adjoint()
}

/// Fuglede–Kadison determinant `exp(τ(log|a|))`, evaluated in log space.
///
/// Returns 0 when the smallest singular value falls below `zero_tol·σ₁`.
pub fn fk_det(a: &CMat, zero_tol: f64) -> Result<f64> {
    let n = ensure_square(a)?;
    if n == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    let sigma = singular_values(a);
    Ok(det_from_singular_values(&sigma, zero_tol))
}

pub(crate) fn det_from_singular_values(sigma: &[f64], zero_tol: f64) -> f64 {
    let top = sigma.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return 0.0;
    }
    let low = sigma.last().copied().unwrap_or(0.0);
    if low < zero_tol * top || low <= LOG_FLOOR {
        return 0.0;
    }
    let mean_log = sigma.iter().map(|s| s.ln()).sum::<f64>() / sigma.len() as f64;
    mean_log.exp()
}

/// Checks that `s` is an orthogonal projection and returns an isometry onto its range.
pub fn projection_range(s: &CMat) -> Result<CMat> {
    let n = ensure_square(s)?;
    let defect = (s * s - s).norm().max((s - s.adjoint()).norm());
    if defect > 1e-10 * (n as f64).sqrt().max(1.0) {
        return Err(Error::NotProjection { defect });
    }
    let eig = hermitian_eigen(s)?;
    let rank = eig.values.iter().filter(|&&l| l > 0.5).count();
    if rank == 0 {
        return Err(Error::ZeroTrace);
    }
    Ok(eig.vectors.columns(0, rank).into_owned())
}

/// Determinant of the compression `s·g·s` inside `(sMs, τ(·)/τ(s))`.
pub fn fk_det_compressed(g: &CMat, s: &CMat) -> Result<f64> {
    ensure_square(g)?;
    if g.shape() != s.shape() {
        return Err(Error::Shape(format!(
            "g is {:?}, projection is {:?}",
            g.shape(),
            s.shape()
        )));
    }
    let v = projection_range(s)?;
    let compressed = v.adjoint() * g * &v;
    fk_det(&compressed, DEFAULT_ZERO_TOL)
}

/// Support projection of a PSD matrix: spectral projection onto eigenvalues
/// `≥ zero_tol·λ_max`.
pub fn support_proj(g: &CMat, zero_tol: f64) -> Result<CMat> {
    let eig = psd_eigen(g)?;
    let n = g.nrows();
    let top = eig.values.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return Ok(zeros(n, n));
    }
    let rank = eig.values.iter().filter(|&&l| l >= zero_tol * top).count();
    let v = eig.vectors.columns(0, rank);
    Ok(v * v.adjoint())
}

/// Polar decomposition through the SVD `a = UΣV*`: `p = VΣV*`, `w = U_r V_r*`
/// over the singular values above `zero_tol·σ₁`.
pub fn polar(a: &CMat, zero_tol: f64) -> Result<Polar> {
    let n = ensure_square(a)?;
    let dec = svd(a);
    let top = dec.sigma.first().copied().unwrap_or(0.0);
    let mut w = zeros(n, n);
    let mut p = zeros(n, n);
    for (k, &s) in dec.sigma.iter().enumerate() {
        let vk = dec.v.column(k);
        p += (vk * vk.adjoint()).scale(s);
        if top > 0.0 && s > zero_tol * top {
            w += dec.u.column(k) * vk.adjoint();
        }
    }
    Ok(Polar { w, p })
}

/// Square root of a PSD matrix.
pub fn psd_sqrt(g: &CMat) -> Result<CMat> {
    let eig = psd_eigen(g)?;
    Ok(spectral_apply(&eig, |l| real(l.max(0.0).sqrt())))
}

/// `log|a|`; fails when `a` is singular.
pub fn log_abs(a: &CMat) -> Result<CMat> {
    ensure_square(a)?;
    let dec = svd(a);
    if dec.sigma.last().copied().unwrap_or(0.0) <= LOG_FLOOR {
        return Err(Error::Singular);
    }
    let eig = HermEigen {
        values: dec.sigma.clone(),
        vectors: dec.v,
    };
    Ok(spectral_apply(&eig, |s| real(s.ln())))
}

/// Moore–Penrose pseudoinverse with relative cut `zero_tol·σ₁`.
pub fn pinv(a: &CMat, zero_tol: f64) -> CMat {
    let dec = svd(a);
    let mut out = zeros(a.ncols(), a.nrows());
    let top = dec.sigma.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return out;
    }
    for (k, &s) in dec.sigma.iter().enumerate() {
        if s > zero_tol * top {
            out += (dec.v.column(k) * dec.u.column(k).adjoint()).unscale(s);
        }
    }
    out
}

/// Pseudo-inverse square root of a PSD matrix with rank cut `cut·λ_max`.
/// Also returns the retained rank.
pub fn pinv_sqrt_psd(g: &CMat, cut: f64) -> Result<(CMat, usize)> {
    let eig = hermitian_eigen(&hermitian_part(g))?;
    let top = eig.values.first().copied().unwrap_or(0.0);
    let thresh = cut * top.max(0.0);
    let rank = eig.values.iter().filter(|&&l| l > thresh && l > 0.0).count();
    let out = spectral_apply(&eig, |l| {
        if l > thresh && l > 0.0 {
            real(1.0 / l.sqrt())
        } else {
            real(0.0)
        }
    });
    Ok((out, rank))
}

/// `exp(i·H)` for Hermitian `H`.
pub fn expm_i_hermitian(h: &CMat) -> Result<CMat> {
    let eig = hermitian_eigen(&symmetrize(h)?)?;
    Ok(spectral_apply(&eig, |l| C64::from_polar(1.0, l)))
}

/// Inverse of a square matrix; `Error::Singular` when LU fails.
pub fn inverse(a: &CMat) -> Result<CMat> {
    ensure_square(a)?;
    a.clone().try_inverse().ok_or(Error::Singular)
}

/// `‖u*u − 1‖` in operator norm.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.ncols();
    op_norm(&(u.adjoint() * u - identity(n)))
}

/// Upper-triangular factor `R` with positive diagonal and `g = R*R`.
pub fn cholesky_upper(g: &CMat) -> Result<CMat> {
    let h = symmetrize(g)?;
    let chol = h.cholesky().ok_or(Error::NotPsd {
        min_eig: lambda_min_herm(g).unwrap_or(f64::NAN),
    })?;
    Ok(chol.l().adjoint())
}

/// Solves `x·r = b` for upper-triangular invertible `r`.
pub fn solve_right_upper(b: &CMat, r: &CMat) -> Result<CMat> {
    // x r = b  <=>  r* x* = b*, with r* lower triangular.
    let rt = r.adjoint();
    let xt = rt
        .solve_lower_triangular(&b.adjoint())
        .ok_or(Error::Singular)?;
    Ok(xt.adjoint())
}
