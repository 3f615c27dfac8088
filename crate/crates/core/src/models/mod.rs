//! The two finite subdiagonal algebras `(M, A, D, Φ)`.
//!
//! * `Triangular { n }`: `M = M_n`, `A` = upper triangular matrices,
//!   `D` = diagonal matrices, `Φ` = diagonal extraction.
//! * `Fourier { d, deg, grid }`: `M` = `M_d`-valued trigonometric polynomials,
//!   `A` = polynomials in `z` only, `D = M_d` (constant symbols), `Φ` = the
//!   zeroth coefficient. Products are exact (degrees add); only explicitly
//!   named projection or grid steps approximate.

pub mod json;
mod laurent;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use laurent::Laurent;

use crate::error::{Error, Result};
use crate::opcore::{
    self, det_from_singular_values, hermitian_part, identity, l2_normalized, op_norm,
    singular_values, zeros, CMat, C64, DEFAULT_ZERO_TOL, HERMITIAN_TOL, PSD_TOL,
};

/// Largest grid used when refining the determinant quadrature.
const DET_GRID_CAP: usize = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SubdiagonalModel {
    Triangular { n: usize },
    Fourier { d: usize, deg: usize, grid: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelElement {
    Matrix(CMat),
    Laurent(Laurent),
}

impl ModelElement {
    pub fn as_matrix(&self) -> Option<&CMat> {
        match self {
            ModelElement::Matrix(m) => Some(m),
            ModelElement::Laurent(_) => None,
        }
    }

    pub fn as_laurent(&self) -> Option<&Laurent> {
        match self {
            ModelElement::Laurent(l) => Some(l),
            ModelElement::Matrix(_) => None,
        }
    }

    /// Matrix block size (`n` or `d`).
    pub fn block_size(&self) -> usize {
        match self {
            ModelElement::Matrix(m) => m.nrows(),
            ModelElement::Laurent(l) => l.d(),
        }
    }
}

impl From<CMat> for ModelElement {
    fn from(m: CMat) -> Self {
        ModelElement::Matrix(m)
    }
}

impl From<Laurent> for ModelElement {
    fn from(l: Laurent) -> Self {
        ModelElement::Laurent(l)
    }
}

/// Subspaces of `L²(M)` with finite orthonormal bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    /// `A₀ = A ∩ ker Φ`.
    A0,
    /// `A*`.
    Astar,
    /// `H²₀` (equal to `A₀` in both finite models, up to the cutoff).
    H20,
    /// `H²`.
    H2,
    /// `L²(D)`.
    D,
}

/// The normalized matrix unit `√d·z^power·E_{row,col}`; orthonormal in `L²(τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisUnit {
    pub power: i64,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// Part in `H²₀`.
    pub plus0: ModelElement,
    /// Part in `L²(D)`.
    pub diag: ModelElement,
    /// Part in `(H²₀)*`.
    pub minus0: ModelElement,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupNorm {
    pub value: f64,
    /// Difference between the base grid and the 4× refined grid.
    pub resolution: f64,
}

/// Refines the few largest local maxima of a sampled operator-norm profile by
/// golden-section search between the neighbouring grid points.
fn polish_local_maxima(l: &Laurent, samples: &[f64]) -> f64 {
    const CANDIDATES: usize = 4;
    let m = samples.len();
    let mut peaks: Vec<usize> = (0..m)
        .filter(|&j| samples[j] >= samples[(j + m - 1) % m] && samples[j] >= samples[(j + 1) % m])
        .collect();
    peaks.sort_by(|&a, &b| samples[b].total_cmp(&samples[a]));
    peaks.truncate(CANDIDATES);
    let h = std::f64::consts::TAU / m as f64;
    let value = |t: f64| op_norm(&l.eval_at(t));
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut best = 0.0f64;
    for j in peaks {
        let centre = j as f64 * h;
        let (mut a, mut b) = (centre - h, centre + h);
        let mut x1 = b - golden * (b - a);
        let mut x2 = a + golden * (b - a);
        let (mut f1, mut f2) = (value(x1), value(x2));
        for _ in 0..60 {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + golden * (b - a);
                f2 = value(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - golden * (b - a);
                f1 = value(x1);
            }
        }
        best = best.max(f1).max(f2).max(samples[j]);
    }
    best
}

/// A compressed model `eMe` with `τ_e = τ(·)/τ(e)`, realized through an
/// isometry `V` onto the range of `e`: `x ↦ V*xV`.
#[derive(Debug, Clone, PartialEq)]
pub struct Compression {
    pub model: SubdiagonalModel,
    pub parent: SubdiagonalModel,
    pub iso: CMat,
}

impl Compression {
    pub fn restrict(&self, x: &ModelElement) -> Result<ModelElement> {
        self.parent.check(x)?;
        let v = &self.iso;
        Ok(match x {
            ModelElement::Matrix(m) => ModelElement::Matrix(v.adjoint() * m * v),
            ModelElement::Laurent(l) => {
                ModelElement::Laurent(l.left_mul_const(&v.adjoint()).right_mul_const(v))
            }
        })
    }

    pub fn extend(&self, y: &ModelElement) -> Result<ModelElement> {
        self.model.check(y)?;
        let v = &self.iso;
        Ok(match y {
            ModelElement::Matrix(m) => ModelElement::Matrix(v * m * v.adjoint()),
            ModelElement::Laurent(l) => {
                ModelElement::Laurent(l.left_mul_const(v).right_mul_const(&v.adjoint()))
            }
        })
    }

    /// The projection `e = VV*`.
    pub fn projection(&self) -> CMat {
        &self.iso * self.iso.adjoint()
    }

    /// `1 − e` as an element of the parent model.
    pub fn complement(&self) -> ModelElement {
        let n = self.iso.nrows();
        self.parent
            .constant(identity(n) - self.projection())
            .expect("projection has parent block size")
    }

    pub fn rank(&self) -> usize {
        self.iso.ncols()
    }
}

impl SubdiagonalModel {
    pub fn triangular(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidModel("n must be at least 1".into()));
        }
        Ok(Self::Triangular { n })
    }

    /// Fourier model with the default grid `max(256, 8·deg)` rounded up to a power of two.
    pub fn fourier(d: usize, deg: usize) -> Result<Self> {
        Self::fourier_with_grid(d, deg, Self::default_grid(deg))
    }

    pub fn fourier_with_grid(d: usize, deg: usize, grid: usize) -> Result<Self> {
        if d == 0 || deg == 0 {
            return Err(Error::InvalidModel("d and deg must be at least 1".into()));
        }
        if grid < 8 * deg || !grid.is_power_of_two() {
            return Err(Error::InvalidModel(format!(
                "grid {grid} must be a power of two and at least 8*deg = {}",
                8 * deg
            )));
        }
        Ok(Self::Fourier { d, deg, grid })
    }

    pub fn default_grid(deg: usize) -> usize {
        (8 * deg).max(256).next_power_of_two()
    }

    /// Matrix block size: `n` (Triangular) or `d` (Fourier).
    pub fn block_size(&self) -> usize {
        match *self {
            Self::Triangular { n } => n,
            Self::Fourier { d, .. } => d,
        }
    }

    pub fn is_fourier(&self) -> bool {
        matches!(self, Self::Fourier { .. })
    }

    /// Quadrature grid size; 1 for the Triangular model.
    pub fn grid(&self) -> usize {
        match *self {
            Self::Triangular { .. } => 1,
            Self::Fourier { grid, .. } => grid,
        }
    }

    /// Largest basis cutoff; the Triangular model ignores cutoffs.
    pub fn max_cutoff(&self) -> usize {
        match *self {
            Self::Triangular { .. } => usize::MAX,
            Self::Fourier { grid, .. } => grid / 2,
        }
    }

    pub fn check(&self, x: &ModelElement) -> Result<()> {
        let ok = match (self, x) {
            (Self::Triangular { n }, ModelElement::Matrix(m)) => m.shape() == (*n, *n),
            (Self::Fourier { d, .. }, ModelElement::Laurent(l)) => l.d() == *d,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ModelMismatch(self.to_string()))
        }
    }

    fn check_all(&self, xs: &[&ModelElement]) -> Result<()> {
        xs.iter().try_for_each(|x| self.check(x))
    }

    pub fn one(&self) -> ModelElement {
        self.constant(identity(self.block_size()))
            .expect("identity has block size")
    }

    pub fn zero(&self) -> ModelElement {
        let k = self.block_size();
        self.constant(zeros(k, k)).expect("zero has block size")
    }

    /// Embeds a `D`-shaped constant (a block-size matrix).
    pub fn constant(&self, c: CMat) -> Result<ModelElement> {
        let k = self.block_size();
        if c.shape() != (k, k) {
            return Err(Error::ModelMismatch(self.to_string()));
        }
        Ok(match self {
            Self::Triangular { .. } => ModelElement::Matrix(c),
            Self::Fourier { .. } => ModelElement::Laurent(Laurent::constant(c)),
        })
    }

    /// `τ(x)`.
    pub fn trace(&self, x: &ModelElement) -> Result<C64> {
        self.check(x)?;
        match x {
            ModelElement::Matrix(m) => opcore::trace_state(m),
            ModelElement::Laurent(l) => opcore::trace_state(&l.coeff_or_zero(0)),
        }
    }

    /// The `D`-component of `x` as a block-size matrix.
    pub fn phi_matrix(&self, x: &ModelElement) -> Result<CMat> {
        self.check(x)?;
        Ok(match x {
            ModelElement::Matrix(m) => CMat::from_diagonal(&m.diagonal()),
            ModelElement::Laurent(l) => l.coeff_or_zero(0),
        })
    }

    /// Trace-preserving conditional expectation onto `D`.
    pub fn phi(&self, x: &ModelElement) -> Result<ModelElement> {
        self.constant(self.phi_matrix(x)?)
    }

    pub fn decompose(&self, x: &ModelElement) -> Result<Decomposition> {
        self.check(x)?;
        Ok(match x {
            ModelElement::Matrix(m) => {
                let n = m.nrows();
                let part = |keep: &dyn Fn(usize, usize) -> bool| {
                    ModelElement::Matrix(CMat::from_fn(n, n, |i, j| {
                        if keep(i, j) {
                            m[(i, j)]
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    }))
                };
                Decomposition {
                    plus0: part(&|i, j| i < j),
                    diag: part(&|i, j| i == j),
                    minus0: part(&|i, j| i > j),
                }
            }
            ModelElement::Laurent(l) => Decomposition {
                plus0: ModelElement::Laurent(l.filter(|k| k > 0)),
                diag: ModelElement::Laurent(l.filter(|k| k == 0)),
                minus0: ModelElement::Laurent(l.filter(|k| k < 0)),
            },
        })
    }

    /// Orthogonal projection onto `H²`.
    pub fn p_plus(&self, x: &ModelElement) -> Result<ModelElement> {
        let dec = self.decompose(x)?;
        self.add(&dec.plus0, &dec.diag)
    }

    /// Orthogonal projection onto `H²* = L²(D) ⊕ (H²₀)*`.
    pub fn p_minus(&self, x: &ModelElement) -> Result<ModelElement> {
        let dec = self.decompose(x)?;
        self.add(&dec.diag, &dec.minus0)
    }

    pub fn mul(&self, x: &ModelElement, y: &ModelElement) -> Result<ModelElement> {
        self.check_all(&[x, y])?;
        Ok(match (x, y) {
            (ModelElement::Matrix(a), ModelElement::Matrix(b)) => ModelElement::Matrix(a * b),
            (ModelElement::Laurent(a), ModelElement::Laurent(b)) => ModelElement::Laurent(a.mul(b)),
            _ => unreachable!("checked"),
        })
    }

    pub fn mul3(&self, x: &ModelElement, y: &ModelElement, w: &ModelElement) -> Result<ModelElement> {
        self.mul(&self.mul(x, y)?, w)
    }

    pub fn adj(&self, x: &ModelElement) -> Result<ModelElement> {
        self.check(x)?;
        Ok(match x {
            ModelElement::Matrix(a) => ModelElement::Matrix(a.adjoint()),
            ModelElement::Laurent(l) => ModelElement::Laurent(l.adjoint()),
        })
    }

    pub fn add(&self, x: &ModelElement, y: &ModelElement) -> Result<ModelElement> {
        self.check_all(&[x, y])?;
        Ok(match (x, y) {
            (ModelElement::Matrix(a), ModelElement::Matrix(b)) => ModelElement::Matrix(a + b),
            (ModelElement::Laurent(a), ModelElement::Laurent(b)) => ModelElement::Laurent(a.add(b)),
            _ => unreachable!("checked"),
        })
    }

    pub fn sub(&self, x: &ModelElement, y: &ModelElement) -> Result<ModelElement> {
        self.add(x, &self.scale(y, C64::new(-1.0, 0.0))?)
    }

    pub fn scale(&self, x: &ModelElement, s: C64) -> Result<ModelElement> {
        self.check(x)?;
        Ok(match x {
            ModelElement::Matrix(a) => ModelElement::Matrix(a * s),
            ModelElement::Laurent(l) => ModelElement::Laurent(l.scale(s)),
        })
    }

    /// Anti-automorphism of `M` that maps `A` onto `A` and commutes with the
    /// adjoint: `J xᵀ J` (reversal `J`) for matrices, pointwise transpose for
    /// symbols. Turns right factorizations into left ones.
    pub fn flip(&self, x: &ModelElement) -> Result<ModelElement> {
        self.check(x)?;
        Ok(match x {
            ModelElement::Matrix(a) => {
                let n = a.nrows();
                ModelElement::Matrix(CMat::from_fn(n, n, |i, j| a[(n - 1 - j, n - 1 - i)]))
            }
            ModelElement::Laurent(l) => ModelElement::Laurent(l.transpose()),
        })
    }

    /// Membership in `A` up to `tol` (absolute, Frobenius).
    pub fn in_algebra(&self, x: &ModelElement, tol: f64) -> Result<bool> {
        let dec = self.decompose(x)?;
        Ok(self.l2_norm(&dec.minus0)? <= tol)
    }

    /// Symbol values on the model grid (a single value for the Triangular model).
    pub fn grid_values(&self, x: &ModelElement) -> Result<Vec<CMat>> {
        self.grid_values_on(x, self.grid())
    }

    pub fn grid_values_on(&self, x: &ModelElement, m: usize) -> Result<Vec<CMat>> {
        self.check(x)?;
        Ok(match x {
            ModelElement::Matrix(a) => vec![a.clone()],
            ModelElement::Laurent(l) => l.eval_grid(m),
        })
    }

    /// Element from symbol values on the model grid (trigonometric interpolation).
    pub fn from_grid_values(&self, values: Vec<CMat>) -> Result<ModelElement> {
        match self {
            Self::Triangular { .. } => {
                if values.len() != 1 {
                    return Err(Error::Shape("triangular model takes one value".into()));
                }
                let v = values.into_iter().next().expect("one value");
                self.constant(v)
            }
            Self::Fourier { grid, d, .. } => {
                if values.len() != *grid || values.iter().any(|v| v.shape() != (*d, *d)) {
                    return Err(Error::Shape(format!("expected {grid} values of size {d}x{d}")));
                }
                let l = Laurent::from_grid(&values)?;
                let top = l.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
                Ok(ModelElement::Laurent(l.trim(1e-17 * top)))
            }
        }
    }

    /// Applies `f` at every grid point (exactly once for the Triangular model).
    pub fn map_pointwise(
        &self,
        x: &ModelElement,
        f: impl Fn(&CMat) -> Result<CMat>,
    ) -> Result<ModelElement> {
        let vals = self
            .grid_values(x)?
            .iter()
            .map(f)
            .collect::<Result<Vec<_>>>()?;
        self.from_grid_values(vals)
    }

    pub fn zip_pointwise(
        &self,
        x: &ModelElement,
        y: &ModelElement,
        f: impl Fn(&CMat, &CMat) -> Result<CMat>,
    ) -> Result<ModelElement> {
        let xs = self.grid_values(x)?;
        let ys = self.grid_values(y)?;
        let vals = xs
            .iter()
            .zip(&ys)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        self.from_grid_values(vals)
    }

    /// Pointwise `f` of several elements, sampled on grids that double from
    /// the model grid until the interpolant's coefficients past a quarter of
    /// the grid carry relative norm below `tail` (or the grid reaches
    /// `DET_GRID_CAP`). The result may have degree above the model grid.
    pub fn zip_pointwise_refined(
        &self,
        xs: &[&ModelElement],
        f: impl Fn(&[CMat]) -> Result<CMat>,
        tail: f64,
    ) -> Result<ModelElement> {
        let Self::Fourier { grid, .. } = *self else {
            let vals: Vec<CMat> = xs.iter().map(|x| self.grid_values(x).map(|mut v| v.remove(0))).collect::<Result<_>>()?;
            return self.constant(f(&vals)?);
        };
        let mut m = grid;
        loop {
            let samples = xs.iter().map(|x| self.grid_values_on(x, m)).collect::<Result<Vec<_>>>()?;
            let vals = (0..m)
                .map(|j| f(&samples.iter().map(|s| s[j].clone()).collect::<Vec<_>>()))
                .collect::<Result<Vec<_>>>()?;
            let l = Laurent::from_grid(&vals)?;
            let total = l.coefficient_energy();
            let high = l.energy_outside(|k| k.unsigned_abs() as usize <= m / 4);
            if high <= tail * tail * total || m >= DET_GRID_CAP {
                let top = l.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
                return Ok(ModelElement::Laurent(l.trim(1e-17 * top)));
            }
            m *= 2;
        }
    }

    /// Rejects elements that are not Hermitian (relative asymmetry above
    /// `HERMITIAN_TOL`) or not PSD (relative negativity above `PSD_TOL`).
    pub fn check_psd(&self, x: &ModelElement) -> Result<()> {
        let size = self.l2_norm(x)?;
        let asym = self.l2_norm(&self.sub(x, &self.adj(x)?)?)?;
        if asym > HERMITIAN_TOL * size.max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian { asym: asym / size });
        }
        let mut low = f64::INFINITY;
        let mut high = 0.0f64;
        for v in self.grid_values(x)? {
            let eig = opcore::hermitian_eigen(&hermitian_part(&v))?;
            high = high.max(eig.values[0]);
            low = low.min(*eig.values.last().expect("nonempty"));
        }
        if low < -PSD_TOL * high.max(f64::MIN_POSITIVE) {
            return Err(Error::NotPsd { min_eig: low });
        }
        Ok(())
    }

    /// Pointwise inverse (exact for matrices, grid interpolation for symbols).
    pub fn inverse(&self, x: &ModelElement) -> Result<ModelElement> {
        self.map_pointwise(x, opcore::inverse)
    }

    /// Minimum over the grid of the smallest eigenvalue of the Hermitian part.
    pub fn min_eig_hermitian(&self, x: &ModelElement) -> Result<f64> {
        self.min_eig_hermitian_on(x, self.grid())
    }

    pub fn min_eig_hermitian_on(&self, x: &ModelElement, m: usize) -> Result<f64> {
        let mut low = f64::INFINITY;
        for v in self.grid_values_on(x, m)? {
            low = low.min(opcore::lambda_min_herm(&hermitian_part(&v))?);
        }
        Ok(low)
    }

    /// `‖x‖_∞`; see [`Self::sup_norm_report`] for the Fourier resolution estimate.
    pub fn sup_norm(&self, x: &ModelElement) -> Result<f64> {
        Ok(self.sup_norm_report(x)?.value)
    }

    pub fn sup_norm_report(&self, x: &ModelElement) -> Result<SupNorm> {
        self.check(x)?;
        match x {
            ModelElement::Matrix(a) => Ok(SupNorm {
                value: op_norm(a),
                resolution: 0.0,
            }),
            ModelElement::Laurent(l) => {
                let m = self.grid();
                let base = self.grid_max_op_norm(x, m)?;
                let fine_m = 4 * m;
                let fine_vals: Vec<f64> = l.eval_grid(fine_m).iter().map(op_norm).collect();
                let fine = fine_vals.iter().copied().fold(0.0, f64::max);
                let polished = polish_local_maxima(l, &fine_vals);
                let value = base.max(fine).max(polished);
                Ok(SupNorm {
                    value,
                    resolution: value - base,
                })
            }
        }
    }

    /// Maximum of the operator norm over a grid of size `m`.
    pub fn grid_max_op_norm(&self, x: &ModelElement, m: usize) -> Result<f64> {
        Ok(self
            .grid_values_on(x, m)?
            .iter()
            .map(op_norm)
            .fold(0.0, f64::max))
    }

    /// `‖x‖₂ = τ(x*x)^{1/2}` (Parseval for symbols).
    pub fn l2_norm(&self, x: &ModelElement) -> Result<f64> {
        self.check(x)?;
        Ok(match x {
            ModelElement::Matrix(a) => l2_normalized(a),
            ModelElement::Laurent(l) => (l.coefficient_energy() / l.d() as f64).sqrt(),
        })
    }

    /// `‖x‖₁ = τ(|x|)`, by grid quadrature for symbols.
    pub fn l1_norm(&self, x: &ModelElement) -> Result<f64> {
        let vals = self.grid_values(x)?;
        let k = self.block_size() as f64;
        let total: f64 = vals
            .iter()
            .map(|v| singular_values(v).iter().sum::<f64>() / k)
            .sum();
        Ok(total / vals.len() as f64)
    }

    /// Fuglede–Kadison determinant `Δ(x) = exp τ(log|x|)`; grid quadrature for symbols.
    pub fn det(&self, x: &ModelElement) -> Result<f64> {
        self.det_with_tol(x, DEFAULT_ZERO_TOL)
    }

    pub fn det_with_tol(&self, x: &ModelElement, zero_tol: f64) -> Result<f64> {
        self.check(x)?;
        match x {
            ModelElement::Matrix(a) => opcore::fk_det(a, zero_tol),
            ModelElement::Laurent(_) => {
                // The trapezoid rule converges geometrically but slowly when
                // det x has zeros close to the circle, so refine until stable.
                let mut m = self.grid();
                let mut det = self.det_on_grid(x, m, zero_tol)?;
                while m < DET_GRID_CAP {
                    m *= 2;
                    let finer = self.det_on_grid(x, m, zero_tol)?;
                    let settled = (finer - det).abs() <= 1e-13 * finer.max(1.0);
                    det = finer;
                    if settled || det == 0.0 {
                        break;
                    }
                }
                Ok(det)
            }
        }
    }

    fn det_on_grid(&self, x: &ModelElement, m: usize, zero_tol: f64) -> Result<f64> {
        let vals = self.grid_values_on(x, m)?;
        let sv: Vec<Vec<f64>> = vals.iter().map(singular_values).collect();
        let top = sv.iter().map(|s| s[0]).fold(0.0, f64::max);
        if top <= 0.0 {
            return Ok(0.0);
        }
        let mut mean_log = 0.0;
        for s in &sv {
            let low = *s.last().expect("nonempty");
            if low < zero_tol * top || low <= 1e-300 {
                return Ok(0.0);
            }
            mean_log += s.iter().map(|v| v.ln()).sum::<f64>() / s.len() as f64;
        }
        Ok((mean_log / sv.len() as f64).exp())
    }

    /// `Δ(Φ(x))`.
    pub fn det_phi(&self, x: &ModelElement) -> Result<f64> {
        let p = self.phi_matrix(x)?;
        Ok(det_from_singular_values(&singular_values(&p), DEFAULT_ZERO_TOL))
    }

    pub fn basis_units(&self, space: Space, cutoff: usize) -> Result<Vec<BasisUnit>> {
        let mut out = Vec::new();
        match *self {
            Self::Triangular { n } => {
                let keep = |i: usize, j: usize| match space {
                    Space::A0 | Space::H20 => i < j,
                    Space::Astar => i >= j,
                    Space::H2 => i <= j,
                    Space::D => i == j,
                };
                for i in 0..n {
                    for j in 0..n {
                        if keep(i, j) {
                            out.push(BasisUnit {
                                power: 0,
                                row: i,
                                col: j,
                            });
                        }
                    }
                }
            }
            Self::Fourier { d, .. } => {
                if cutoff > self.max_cutoff() {
                    return Err(Error::CutoffTooLarge {
                        cutoff,
                        max: self.max_cutoff(),
                    });
                }
                let c = cutoff as i64;
                let powers: Vec<i64> = match space {
                    Space::A0 | Space::H20 => (1..=c).collect(),
                    Space::Astar => (-c..=0).collect(),
                    Space::H2 => (0..=c).collect(),
                    Space::D => vec![0],
                };
                for k in powers {
                    for row in 0..d {
                        for col in 0..d {
                            out.push(BasisUnit { power: k, row, col });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn unit_element(&self, u: BasisUnit) -> ModelElement {
        let k = self.block_size();
        let mut e = zeros(k, k);
        e[(u.row, u.col)] = C64::new((k as f64).sqrt(), 0.0);
        match self {
            Self::Triangular { .. } => ModelElement::Matrix(e),
            Self::Fourier { .. } => ModelElement::Laurent(Laurent::monomial(u.power, e)),
        }
    }

    /// Orthonormal basis (w.r.t. `τ`) of `space`, up to `cutoff` powers for symbols.
    pub fn basis(&self, space: Space, cutoff: usize) -> Result<Vec<ModelElement>> {
        Ok(self
            .basis_units(space, cutoff)?
            .into_iter()
            .map(|u| self.unit_element(u))
            .collect())
    }

    /// Coordinates `⟨x, a_i⟩ = τ(a_i*·x)` of `x` against normalized units.
    pub fn coordinates(&self, x: &ModelElement, units: &[BasisUnit]) -> Result<DVector<C64>> {
        self.check(x)?;
        let root = (self.block_size() as f64).sqrt();
        Ok(DVector::from_iterator(
            units.len(),
            units.iter().map(|u| {
                let entry = match x {
                    ModelElement::Matrix(m) => m[(u.row, u.col)],
                    ModelElement::Laurent(l) => {
                        l.coeff(u.power).map_or(C64::new(0.0, 0.0), |c| c[(u.row, u.col)])
                    }
                };
                entry / root
            }),
        ))
    }

    /// `Σ c_i·a_i` over normalized units.
    pub fn from_coordinates(&self, units: &[BasisUnit], coords: &DVector<C64>) -> Result<ModelElement> {
        if units.len() != coords.len() {
            return Err(Error::Shape(format!(
                "{} coordinates for {} basis units",
                coords.len(),
                units.len()
            )));
        }
        let k = self.block_size();
        let root = (k as f64).sqrt();
        Ok(match self {
            Self::Triangular { .. } => {
                let mut m = zeros(k, k);
                for (u, c) in units.iter().zip(coords.iter()) {
                    m[(u.row, u.col)] += c * root;
                }
                ModelElement::Matrix(m)
            }
            Self::Fourier { .. } => {
                let mut l = Laurent::zero(k);
                for (u, c) in units.iter().zip(coords.iter()) {
                    l.coeff_mut(u.power)[(u.row, u.col)] += c * root;
                }
                ModelElement::Laurent(l)
            }
        })
    }

    /// Compression to `eMe` for a projection `e ∈ D`.
    pub fn compress(&self, e: &CMat) -> Result<Compression> {
        let k = self.block_size();
        if e.shape() != (k, k) {
            return Err(Error::ModelMismatch(self.to_string()));
        }
        match *self {
            Self::Triangular { n } => {
                let off = (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| i != j)
                    .map(|(i, j)| e[(i, j)].norm())
                    .fold(0.0, f64::max);
                let idx: Vec<usize> = (0..n).filter(|&i| (e[(i, i)].re - 1.0).abs() < 1e-10).collect();
                let zero_ok = (0..n).all(|i| {
                    let v = e[(i, i)];
                    v.im.abs() < 1e-10 && (v.re.abs() < 1e-10 || (v.re - 1.0).abs() < 1e-10)
                });
                if off > 1e-10 || !zero_ok {
                    return Err(Error::NotInDiagonal);
                }
                if idx.is_empty() {
                    return Err(Error::ZeroTrace);
                }
                let mut iso = zeros(n, idx.len());
                for (c, &i) in idx.iter().enumerate() {
                    iso[(i, c)] = C64::new(1.0, 0.0);
                }
                Ok(Compression {
                    model: Self::Triangular { n: idx.len() },
                    parent: *self,
                    iso,
                })
            }
            Self::Fourier { deg, grid, .. } => {
                let iso = opcore::projection_range(e)?;
                Ok(Compression {
                    model: Self::Fourier {
                        d: iso.ncols(),
                        deg,
                        grid,
                    },
                    parent: *self,
                    iso,
                })
            }
        }
    }
}

impl fmt::Display for SubdiagonalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Triangular { n } => write!(f, "triangular:n={n}"),
            Self::Fourier { d, deg, grid } => write!(f, "fourier:d={d},deg={deg},grid={grid}"),
        }
    }
}

impl FromStr for SubdiagonalModel {
    type Err = Error;

    /// Parses `triangular:n=6` or `fourier:d=2,deg=16[,grid=256]`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("model string `{s}` lacks `kind:`")))?;
        let mut n = None;
        let mut d = None;
        let mut deg = None;
        let mut grid = None;
        for kv in rest.split(',').filter(|t| !t.trim().is_empty()) {
            let (key, val) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad model parameter `{kv}`")))?;
            let val: usize = val
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad value in `{kv}`")))?;
            match key.trim() {
                "n" => n = Some(val),
                "d" => d = Some(val),
                "deg" => deg = Some(val),
                "grid" => grid = Some(val),
                other => return Err(Error::Parse(format!("unknown model parameter `{other}`"))),
            }
        }
        match kind.trim().to_ascii_lowercase().as_str() {
            "triangular" => Self::triangular(n.ok_or_else(|| Error::Parse("missing n".into()))?),
            "fourier" => {
                let d = d.unwrap_or(1);
                let deg = deg.ok_or_else(|| Error::Parse("missing deg".into()))?;
                Self::fourier_with_grid(d, deg, grid.unwrap_or_else(|| Self::default_grid(deg)))
            }
            other => Err(Error::Parse(format!("unknown model kind `{other}`"))),
        }
    }
}
