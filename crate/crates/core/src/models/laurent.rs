//! Matrix-valued Laurent polynomials `Σ_{|k| ≤ deg} c_k z^k`, `c_k ∈ M_d`.

use crate::error::{Error, Result};
use crate::fft;
use crate::opcore::{zeros, CMat, C64};

/// Dense symmetric storage: `coeffs[k + deg]` holds `c_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent {
    d: usize,
    deg: usize,
    coeffs: Vec<CMat>,
}

impl Laurent {
    pub fn zero(d: usize) -> Self {
        Self {
            d,
            deg: 0,
            coeffs: vec![zeros(d, d)],
        }
    }

    pub fn with_degree(d: usize, deg: usize) -> Self {
        Self {
            d,
            deg,
            coeffs: vec![zeros(d, d); 2 * deg + 1],
        }
    }

    pub fn constant(c: CMat) -> Self {
        let d = c.nrows();
        Self {
            d,
            deg: 0,
            coeffs: vec![c],
        }
    }

    /// `c·z^k`.
    pub fn monomial(k: i64, c: CMat) -> Self {
        let mut out = Self::with_degree(c.nrows(), k.unsigned_abs() as usize);
        *out.coeff_mut(k) = c;
        out
    }

    /// Builds from `(k, c_k)` pairs; repeated powers are summed.
    pub fn from_pairs(d: usize, pairs: impl IntoIterator<Item = (i64, CMat)>) -> Result<Self> {
        let pairs: Vec<(i64, CMat)> = pairs.into_iter().collect();
        let deg = pairs
            .iter()
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let mut out = Self::with_degree(d, deg);
        for (k, c) in pairs {
            if c.shape() != (d, d) {
                return Err(Error::Shape(format!(
                    "coefficient {k} is {:?}, expected {d}x{d}",
                    c.shape()
                )));
            }
            *out.coeff_mut(k) += c;
        }
        Ok(out)
    }

    /// Scalar (`d = 1`) Laurent polynomial from `(k, c_k)` pairs.
    pub fn scalar(pairs: &[(i64, C64)]) -> Self {
        Self::from_pairs(
            1,
            pairs
                .iter()
                .map(|&(k, v)| (k, CMat::from_element(1, 1, v))),
        )
        .expect("1x1 coefficients")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    pub fn coeff(&self, k: i64) -> Option<&CMat> {
        if k.unsigned_abs() as usize > self.deg {
            None
        } else {
            Some(&self.coeffs[(k + self.deg as i64) as usize])
        }
    }

    pub fn coeff_or_zero(&self, k: i64) -> CMat {
        self.coeff(k).cloned().unwrap_or_else(|| zeros(self.d, self.d))
    }

    /// Mutable access, growing storage when `|k|` exceeds the degree.
    pub fn coeff_mut(&mut self, k: i64) -> &mut CMat {
        let need = k.unsigned_abs() as usize;
        if need > self.deg {
            self.regrow(need);
        }
        let idx = (k + self.deg as i64) as usize;
        &mut self.coeffs[idx]
    }

    fn regrow(&mut self, deg: usize) {
        let mut coeffs = vec![zeros(self.d, self.d); 2 * deg + 1];
        let shift = deg - self.deg;
        for (i, c) in self.coeffs.drain(..).enumerate() {
            coeffs[i + shift] = c;
        }
        self.coeffs = coeffs;
        self.deg = deg;
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &CMat)> {
        let deg = self.deg as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (i as i64 - deg, c))
    }

    /// Keeps only the powers accepted by `keep`.
    pub fn filter(&self, keep: impl Fn(i64) -> bool) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if !keep(i as i64 - self.deg as i64) {
                c.fill(C64::new(0.0, 0.0));
            }
        }
        out
    }

    /// Drops all powers with `|k| > deg`.
    pub fn truncate(&self, deg: usize) -> Self {
        if deg >= self.deg {
            return self.clone();
        }
        let shift = self.deg - deg;
        Self {
            d: self.d,
            deg,
            coeffs: self.coeffs[shift..shift + 2 * deg + 1].to_vec(),
        }
    }

    /// Shrinks the stored degree while both outermost coefficients have
    /// Frobenius norm `≤ eps`.
    pub fn trim(&self, eps: f64) -> Self {
        let mut deg = self.deg;
        while deg > 0 {
            let lo = &self.coeffs[self.deg - deg];
            let hi = &self.coeffs[self.deg + deg];
            if lo.norm() <= eps && hi.norm() <= eps {
                deg -= 1;
            } else {
                break;
            }
        }
        self.truncate(deg)
    }

    /// Energy `Σ ‖c_k‖²_F` over the powers rejected by `keep`.
    pub fn energy_outside(&self, keep: impl Fn(i64) -> bool) -> f64 {
        self.iter()
            .filter(|(k, _)| !keep(*k))
            .map(|(_, c)| c.norm_squared())
            .sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        let deg = self.deg.max(other.deg);
        let mut out = self.clone();
        if deg > out.deg {
            out.regrow(deg);
        }
        for (k, c) in other.iter() {
            *out.coeff_mut(k) += c;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            d: self.d,
            deg: self.deg,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Left multiplication by a constant matrix.
    pub fn left_mul_const(&self, a: &CMat) -> Self {
        Self {
            d: a.nrows(),
            deg: self.deg,
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
        }
    }

    /// Right multiplication by a constant matrix.
    pub fn right_mul_const(&self, a: &CMat) -> Self {
        Self {
            d: a.ncols(),
            deg: self.deg,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// Exact product by direct convolution; the degree is `deg(x) + deg(y)`.
    pub fn mul(&self, other: &Self) -> Self {
        let d = self.d;
        let deg = self.deg + other.deg;
        let mut out = Self::with_degree(d, deg);
        if d == 1 {
            for (i, a) in self.coeffs.iter().enumerate() {
                let a = a[(0, 0)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for (j, b) in other.coeffs.iter().enumerate() {
                    out.coeffs[i + j][(0, 0)] += a * b[(0, 0)];
                }
            }
            return out;
        }
        let one = C64::new(1.0, 0.0);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out.coeffs[i + j].gemm(one, a, b, one);
            }
        }
        out
    }

    /// Pointwise adjoint: `c_k ↦ c_{−k}*`.
    pub fn adjoint(&self) -> Self {
        Self {
            d: self.d,
            deg: self.deg,
            coeffs: self.coeffs.iter().rev().map(|c| c.adjoint()).collect(),
        }
    }

    /// Pointwise transpose: `c_k ↦ c_kᵀ`.
    pub fn transpose(&self) -> Self {
        Self {
            d: self.d,
            deg: self.deg,
            coeffs: self.coeffs.iter().map(|c| c.transpose()).collect(),
        }
    }

    /// Symbol values at `θ_j = 2πj/m`, `j = 0..m`. Exact for any degree.
    pub fn eval_grid(&self, m: usize) -> Vec<CMat> {
        let d = self.d;
        let mut out = vec![zeros(d, d); m];
        let mut buf = vec![C64::new(0.0, 0.0); m];
        for p in 0..d {
            for q in 0..d {
                buf.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
                for (k, c) in self.iter() {
                    buf[k.rem_euclid(m as i64) as usize] += c[(p, q)];
                }
                let vals = fft::synthesize(&buf);
                for (j, v) in vals.into_iter().enumerate() {
                    out[j][(p, q)] = v;
                }
            }
        }
        out
    }

    /// Symbol value at the angle `theta`.
    pub fn eval_at(&self, theta: f64) -> CMat {
        let mut out = zeros(self.d, self.d);
        for (k, c) in self.iter() {
            out += c * C64::from_polar(1.0, k as f64 * theta);
        }
        out
    }

    /// Trigonometric interpolant of grid samples; the Nyquist bin is split
    /// evenly between `±m/2`, so Hermitian-valued samples give a
    /// Hermitian-symmetric polynomial.
    pub fn from_grid(values: &[CMat]) -> Result<Self> {
        let m = values.len();
        if m == 0 {
            return Err(Error::Shape("empty grid".into()));
        }
        let d = values[0].nrows();
        let half = m / 2;
        let mut out = Self::with_degree(d, half);
        let mut buf = vec![C64::new(0.0, 0.0); m];
        for p in 0..d {
            for q in 0..d {
                for (j, v) in values.iter().enumerate() {
                    buf[j] = v[(p, q)];
                }
                let c = fft::coefficients(&buf);
                for (j, cj) in c.into_iter().enumerate() {
                    if m.is_multiple_of(2) && j == half {
                        out.coeff_mut(half as i64)[(p, q)] += cj * 0.5;
                        out.coeff_mut(-(half as i64))[(p, q)] += cj * 0.5;
                    } else {
                        out.coeff_mut(fft::frequency(j, m))[(p, q)] += cj;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `Σ_k ‖c_k‖²_F`.
    pub fn coefficient_energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_squared()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{identity, real};

    #[test]
    fn product_is_exact_convolution() {
        let x = Laurent::scalar(&[(-1, real(2.0)), (0, real(3.0)), (2, real(-1.0))]);
        let y = Laurent::scalar(&[(1, real(5.0)), (-2, real(7.0))]);
        let p = x.mul(&y);
        assert_eq!(p.degree(), 4);
        // brute-force convolution
        for k in -4i64..=4 {
            let mut expect = real(0.0);
            for (i, a) in x.iter() {
                for (j, b) in y.iter() {
                    if i + j == k {
                        expect += a[(0, 0)] * b[(0, 0)];
                    }
                }
            }
            assert_eq!(p.coeff_or_zero(k)[(0, 0)], expect);
        }
    }

    #[test]
    fn shift_times_backward_shift_is_identity() {
        let z = Laurent::monomial(1, identity(2));
        let zb = Laurent::monomial(-1, identity(2));
        let p = z.mul(&zb).trim(0.0);
        assert_eq!(p, Laurent::constant(identity(2)));
    }

    #[test]
    fn grid_round_trip() {
        let x = Laurent::scalar(&[(-3, C64::new(1.0, 2.0)), (0, real(3.0)), (5, real(-1.0))]);
        let back = Laurent::from_grid(&x.eval_grid(32)).unwrap().trim(1e-13);
        assert_eq!(back.degree(), 5);
        for k in -5i64..=5 {
            assert!((back.coeff_or_zero(k) - x.coeff_or_zero(k)).norm() < 1e-13);
        }
    }

    #[test]
    fn regrow_keeps_coefficients() {
        let mut x = Laurent::scalar(&[(1, real(1.0))]);
        *x.coeff_mut(-3) += CMat::from_element(1, 1, real(2.0));
        assert_eq!(x.degree(), 3);
        assert_eq!(x.coeff_or_zero(1)[(0, 0)], real(1.0));
        assert_eq!(x.coeff_or_zero(-3)[(0, 0)], real(2.0));
    }
}
