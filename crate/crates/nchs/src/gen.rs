//! Seeded instance generators.
//!
//! Every instance draws from its own ChaCha stream (selected by kind and
//! index), so a batch is reproducible from the seed alone and does not depend
//! on evaluation order or worker count.

use std::fmt;

use nchs_core::classical::GridWeight;
use nchs_core::factor;
use nchs_core::models::json::{element_for_model, element_to_json};
use nchs_core::models::Laurent;
use nchs_core::opcore::{self, identity, CMat, C64};
use nchs_core::{ModelElement, SubdiagonalModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InstanceKind {
    PdWeight,
    UnitaryScaled,
    InvtoepPlanted,
    HsWeightFamily,
}

impl InstanceKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::PdWeight => "pd_weight",
            Self::UnitaryScaled => "unitary_scaled",
            Self::InvtoepPlanted => "invtoep_planted",
            Self::HsWeightFamily => "hs_weight_family",
        }
    }

    fn stream(self) -> u64 {
        match self {
            Self::PdWeight => 1,
            Self::UnitaryScaled => 2,
            Self::InvtoepPlanted => 3,
            Self::HsWeightFamily => 4,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::PdWeight, Self::UnitaryScaled, Self::InvtoepPlanted, Self::HsWeightFamily]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Independent generator for instance `index` of `kind`.
pub fn instance_rng(seed: u64, kind: InstanceKind, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((kind.stream() << 48) | index);
    rng
}

pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * std::f64::consts::FRAC_1_SQRT_2
    })
}

fn hermitian(rng: &mut impl Rng, n: usize) -> CMat {
    opcore::hermitian_part(&gaussian(rng, n, n))
}

fn diagonal_unitary(rng: &mut impl Rng, n: usize) -> CMat {
    let phases: Vec<C64> = (0..n)
        .map(|_| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    opcore::diag(&phases)
}

/// `g = b*b + eps·1` with Gaussian `b` (a trigonometric polynomial of degree
/// `deg/2` for symbols).
pub fn pd_weight(model: &SubdiagonalModel, eps: f64, rng: &mut impl Rng) -> ModelElement {
    let shift = |d: usize| identity(d) * C64::new(eps, 0.0);
    match *model {
        SubdiagonalModel::Triangular { n } => {
            let b = gaussian(rng, n, n);
            (b.adjoint() * &b + shift(n)).into()
        }
        SubdiagonalModel::Fourier { d, deg, .. } => {
            let half = (deg / 2) as i64;
            let scale = C64::new(1.0 / ((half + 1) as f64).sqrt(), 0.0);
            let b = Laurent::from_pairs(d, (0..=half).map(|k| (k, gaussian(rng, d, d) * scale)))
                .expect("blocks are d×d");
            b.adjoint().mul(&b).add(&Laurent::constant(shift(d))).into()
        }
    }
}

/// `u = exp(i·s·H)` with `H` Gaussian Hermitian (pointwise on the grid for
/// symbols, `H` a Hermitian trigonometric polynomial of degree 2).
pub fn unitary_scaled(model: &SubdiagonalModel, s: f64, rng: &mut impl Rng) -> CliResult<ModelElement> {
    match *model {
        SubdiagonalModel::Triangular { n } => {
            let h = hermitian(rng, n) * C64::new(s, 0.0);
            Ok(opcore::expm_i_hermitian(&h)?.into())
        }
        SubdiagonalModel::Fourier { d, .. } => {
            let p = Laurent::from_pairs(d, (0..=2).map(|k| (k, gaussian(rng, d, d))))?;
            let h: ModelElement = p.add(&p.adjoint()).scale(C64::new(0.5 * s, 0.0)).into();
            Ok(model.map_pointwise(&h, opcore::expm_i_hermitian)?)
        }
    }
}

/// Unitaries whose Toeplitz operator has the constant `1` (or a rotation of
/// it) in its kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Negative {
    /// Cyclic shift `e_i ↦ e_{i+1}` times a diagonal unitary.
    CyclicShift,
    /// Order-reversing permutation times a diagonal unitary.
    Swap,
    /// `z̄` times a constant unitary.
    BackwardShift,
}

impl Negative {
    pub const ALL: [Negative; 3] = [Self::CyclicShift, Self::Swap, Self::BackwardShift];

    pub fn name(self) -> &'static str {
        match self {
            Self::CyclicShift => "cyclic_shift",
            Self::Swap => "swap",
            Self::BackwardShift => "backward_shift",
        }
    }
}

/// Interns a stored construction name.
fn construction_name(s: Option<&str>) -> CliResult<&'static str> {
    match s {
        None | Some("exp_i_s_h") => Ok("exp_i_s_h"),
        Some(name) => Negative::ALL
            .into_iter()
            .map(Negative::name)
            .find(|n| *n == name)
            .ok_or_else(|| CliError::Usage(format!("unknown construction {name:?}"))),
    }
}

pub fn negative_unitary(model: &SubdiagonalModel, which: Negative, rng: &mut impl Rng) -> CliResult<ModelElement> {
    match (*model, which) {
        (SubdiagonalModel::Triangular { n }, Negative::CyclicShift) => {
            let p = CMat::from_fn(n, n, |i, j| C64::new(f64::from(u8::from(i == (j + 1) % n)), 0.0));
            Ok((p * diagonal_unitary(rng, n)).into())
        }
        (SubdiagonalModel::Triangular { n }, Negative::Swap) => {
            let j = CMat::from_fn(n, n, |r, c| C64::new(f64::from(u8::from(r + c == n - 1)), 0.0));
            Ok((j * diagonal_unitary(rng, n)).into())
        }
        (SubdiagonalModel::Fourier { d, .. }, _) => {
            let v = opcore::expm_i_hermitian(&hermitian(rng, d))?;
            Ok(Laurent::monomial(-1, v).into())
        }
        (SubdiagonalModel::Triangular { .. }, Negative::BackwardShift) => Err(CliError::Usage(
            "backward_shift negatives need a Fourier model".into(),
        )),
    }
}

/// Ground truth of a planted instance: `u = (g₁*)⁻¹·d·g₀⁻¹` with `T_u g₀ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Planted {
    pub u: ModelElement,
    pub g0: ModelElement,
    pub g1: ModelElement,
    pub d: ModelElement,
}

/// Plants `(g₀, g₁, d)` from a weight `w = b*b + eps`.
///
/// With `w = h_L*h_L = h_R h_R*` (left and right outer factors) and
/// `D = Φ(h_R)*`, the symbol `u = h_R*·h_L⁻¹` is unitary, `g₀ = h_L D⁻¹`
/// satisfies `u g₀ = h_R* D⁻¹ ∈ 1 + (A₀)*`, and `d = Φ(g₀)`,
/// `g₁ = h_R⁻¹ D* d*` complete the structure.
pub fn invtoep_planted(model: &SubdiagonalModel, eps: f64, rng: &mut impl Rng) -> CliResult<Planted> {
    let w = pd_weight(model, eps, rng);
    let tol = 1e-11;
    let h_l = factor::outer_factor_psd(model, &w, tol)?.h;
    let h_r = model.flip(&factor::outer_factor_psd(model, &model.flip(&w)?, tol)?.h)?;
    let d_cap = model.phi_matrix(&h_r)?.adjoint();
    let d_cap_inv = opcore::inverse(&d_cap)?;
    let u = model.zip_pointwise_refined(&[&h_r, &h_l], |v| Ok(v[0].adjoint() * opcore::inverse(&v[1])?), 1e-13)?;
    let g0 = model.mul(&h_l, &model.constant(d_cap_inv)?)?;
    let d = model.phi(&g0)?;
    let tail = d_cap.adjoint() * model.phi_matrix(&d)?.adjoint();
    let g1 = model.map_pointwise(&h_r, |r| Ok(opcore::inverse(r)? * &tail))?;
    let g1 = model.p_plus(&g1)?;
    Ok(Planted { u, g0, g1, d })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Weight(ModelElement),
    Unitary {
        u: ModelElement,
        s: Option<f64>,
        construction: &'static str,
    },
    Planted(Planted),
    Circle { alpha: f64, w: GridWeight },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub kind: InstanceKind,
    pub model: Option<SubdiagonalModel>,
    pub payload: Payload,
}

impl Instance {
    pub fn to_json(&self) -> Value {
        let (params, inputs, truth) = match &self.payload {
            Payload::Weight(g) => (json!({}), json!({ "g": element_to_json(g) }), Value::Null),
            Payload::Unitary { u, s, construction } => (
                json!({ "s": s, "construction": construction }),
                json!({ "u": element_to_json(u) }),
                Value::Null,
            ),
            Payload::Planted(p) => (
                json!({}),
                json!({ "u": element_to_json(&p.u) }),
                json!({
                    "g0": element_to_json(&p.g0),
                    "g1": element_to_json(&p.g1),
                    "d": element_to_json(&p.d),
                }),
            ),
            Payload::Circle { alpha, w } => (json!({ "alpha": alpha }), json!({ "w": w.to_json() }), Value::Null),
        };
        let mut record = json!({
            "id": self.id,
            "kind": self.kind.name(),
            "model": self.model.map(|m| m.to_string()),
            "params": params,
            "inputs": inputs,
        });
        if !truth.is_null() {
            record["truth"] = truth;
        }
        record
    }

    pub fn from_json(v: &Value) -> CliResult<Self> {
        let bad = |what: &str| CliError::Usage(format!("instance record: {what}"));
        let id = v.get("id").and_then(Value::as_str).ok_or_else(|| bad("missing `id`"))?;
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .and_then(InstanceKind::parse)
            .ok_or_else(|| bad("unknown `kind`"))?;
        let model = match v.get("model").and_then(Value::as_str) {
            Some(s) => Some(s.parse::<SubdiagonalModel>()?),
            None => None,
        };
        let inputs = v.get("inputs").ok_or_else(|| bad("missing `inputs`"))?;
        let element = |key: &str| -> CliResult<ModelElement> {
            let m = model.ok_or_else(|| bad("missing `model`"))?;
            let raw = inputs.get(key).ok_or_else(|| bad(&format!("missing input `{key}`")))?;
            Ok(element_for_model(&m, raw)?)
        };
        let payload = match kind {
            InstanceKind::PdWeight => Payload::Weight(element("g")?),
            InstanceKind::UnitaryScaled => Payload::Unitary {
                u: element("u")?,
                s: v["params"]["s"].as_f64(),
                construction: construction_name(v["params"]["construction"].as_str())?,
            },
            InstanceKind::InvtoepPlanted => {
                let m = model.ok_or_else(|| bad("missing `model`"))?;
                let truth = v.get("truth").ok_or_else(|| bad("missing `truth`"))?;
                let part = |k: &str| -> CliResult<ModelElement> { Ok(element_for_model(&m, &truth[k])?) };
                Payload::Planted(Planted {
                    u: element("u")?,
                    g0: part("g0")?,
                    g1: part("g1")?,
                    d: part("d")?,
                })
            }
            InstanceKind::HsWeightFamily => Payload::Circle {
                alpha: v["params"]["alpha"].as_f64().ok_or_else(|| bad("missing `alpha`"))?,
                w: GridWeight::from_json(&inputs["w"])?,
            },
        };
        Ok(Self {
            id: id.to_owned(),
            kind,
            model,
            payload,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub count: usize,
    /// Regularization of planted and PD weights.
    pub eps: f64,
    /// Upper end of the `s` sweep for `unitary_scaled`.
    pub s_max: f64,
    /// Structured negatives appended to `unitary_scaled` batches.
    pub negatives: usize,
    pub alphas: Vec<f64>,
    /// Grid size for `hs_weight_family`.
    pub grid: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            count: 10,
            eps: 0.1,
            s_max: 3.0,
            negatives: 0,
            alphas: vec![0.1, 0.3, 0.45, 0.6, 0.8],
            grid: 512,
        }
    }
}

impl GenParams {
    /// Parses `key=value` pairs separated by `;` (alphas take a comma list).
    pub fn parse(s: &str) -> CliResult<Self> {
        let mut p = Self::default();
        for item in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("param {item:?} is not key=value")))?;
            let num = |v: &str| -> CliResult<f64> {
                v.trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("param {k}: {v:?} is not a number")))
            };
            let int = |v: &str| -> CliResult<usize> {
                v.trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("param {k}: {v:?} is not a non-negative integer")))
            };
            match k.trim() {
                "count" => p.count = int(v)?,
                "eps" => p.eps = num(v)?,
                "s_max" => p.s_max = num(v)?,
                "negatives" => p.negatives = int(v)?,
                "grid" => p.grid = int(v)?,
                "alphas" => p.alphas = v.split(',').map(num).collect::<CliResult<_>>()?,
                other => return Err(CliError::Usage(format!("unknown param {other:?}"))),
            }
        }
        if p.eps.is_nan() || p.eps <= 0.0 {
            return Err(CliError::Usage("param eps must be positive".into()));
        }
        Ok(p)
    }
}

/// The `s` value of sweep position `i` out of `count`, from 0 up to `s_max`.
pub fn sweep(i: usize, count: usize, s_max: f64) -> f64 {
    if count <= 1 {
        0.0
    } else {
        s_max * i as f64 / (count - 1) as f64
    }
}

pub fn gen_instances(
    kind: InstanceKind,
    model: Option<SubdiagonalModel>,
    params: &GenParams,
    seed: u64,
) -> CliResult<Vec<Instance>> {
    let need_model = || model.ok_or_else(|| CliError::Usage(format!("{kind} needs --model")));
    let id = |i: usize| format!("{kind}-{i:04}");
    let mut out = Vec::new();
    match kind {
        InstanceKind::HsWeightFamily => {
            for (i, &alpha) in params.alphas.iter().enumerate() {
                out.push(Instance {
                    id: id(i),
                    kind,
                    model: None,
                    payload: Payload::Circle {
                        alpha,
                        w: GridWeight::power_weight(params.grid, alpha)?,
                    },
                });
            }
        }
        InstanceKind::PdWeight => {
            let m = need_model()?;
            for i in 0..params.count {
                let g = pd_weight(&m, params.eps, &mut instance_rng(seed, kind, i as u64));
                out.push(Instance { id: id(i), kind, model: Some(m), payload: Payload::Weight(g) });
            }
        }
        InstanceKind::UnitaryScaled => {
            let m = need_model()?;
            for i in 0..params.count {
                let s = sweep(i, params.count, params.s_max);
                let u = unitary_scaled(&m, s, &mut instance_rng(seed, kind, i as u64))?;
                out.push(Instance {
                    id: id(i),
                    kind,
                    model: Some(m),
                    payload: Payload::Unitary { u, s: Some(s), construction: "exp_i_s_h" },
                });
            }
            for j in 0..params.negatives {
                let which = match (m.is_fourier(), j % 2) {
                    (true, _) => Negative::BackwardShift,
                    (false, 0) => Negative::CyclicShift,
                    (false, _) => Negative::Swap,
                };
                let i = params.count + j;
                let u = negative_unitary(&m, which, &mut instance_rng(seed, kind, i as u64))?;
                out.push(Instance {
                    id: id(i),
                    kind,
                    model: Some(m),
                    payload: Payload::Unitary { u, s: None, construction: which.name() },
                });
            }
        }
        InstanceKind::InvtoepPlanted => {
            let m = need_model()?;
            for i in 0..params.count {
                let p = invtoep_planted(&m, params.eps, &mut instance_rng(seed, kind, i as u64))?;
                out.push(Instance { id: id(i), kind, model: Some(m), payload: Payload::Planted(p) });
            }
        }
    }
    Ok(out)
}
