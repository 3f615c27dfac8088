//! Batch verification suites.
//!
//! Each suite draws its instances from dedicated ChaCha streams, evaluates
//! them on a worker pool and merges results in instance order, so the summary
//! depends on the seed and tolerance only.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::time::Instant;

use nchs_core::angle;
use nchs_core::classical::{self, GridWeight, HsOptions, A2_REFINEMENT_RATIO_MAX, RHO_GAP_RATIO_MIN};
use nchs_core::factor;
use nchs_core::models::Laurent;
use nchs_core::opcore::{self, fk_det, identity, CMat, C64, DEFAULT_ZERO_TOL};
use nchs_core::toeplitz::{self, Verdict};
use nchs_core::{ModelElement, SubdiagonalModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Status};
use crate::gen::{self, gaussian, InstanceKind, Negative};
use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SuiteKey {
    Determinant,
    Jensen,
    Szego,
    Hs1,
    Distance,
    Equivalence,
    Invtoep,
    Remark,
    Certificate,
    Circle,
    CrossCheck,
    Determinism,
}

impl SuiteKey {
    pub const ALL: [SuiteKey; 12] = [
        Self::Determinant,
        Self::Jensen,
        Self::Szego,
        Self::Hs1,
        Self::Distance,
        Self::Equivalence,
        Self::Invtoep,
        Self::Remark,
        Self::Certificate,
        Self::Circle,
        Self::CrossCheck,
        Self::Determinism,
    ];

    /// Criterion number, 1 to 12.
    pub fn id(self) -> u8 {
        Self::ALL.iter().position(|&k| k == self).expect("listed") as u8 + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Determinant => "determinant",
            Self::Jensen => "jensen",
            Self::Szego => "szego",
            Self::Hs1 => "hs1",
            Self::Distance => "distance",
            Self::Equivalence => "equivalence",
            Self::Invtoep => "invtoep",
            Self::Remark => "remark",
            Self::Certificate => "certificate",
            Self::Circle => "circle",
            Self::CrossCheck => "crosscheck",
            Self::Determinism => "determinism",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Self::Determinant => "determinant laws",
            Self::Jensen => "Jensen inequality",
            Self::Szego => "Szegő formula",
            Self::Hs1 => "HS1 round trip",
            Self::Distance => "three-way distance agreement",
            Self::Equivalence => "invertibility equivalence",
            Self::Invtoep => "invtoep structure",
            Self::Remark => "norm-one Hankel remark",
            Self::Certificate => "certificate round trips",
            Self::Circle => "scalar circle suite",
            Self::CrossCheck => "Fourier/Triangular cross-checks",
            Self::Determinism => "determinism",
        }
    }

    pub fn parse(s: &str) -> Option<Vec<Self>> {
        if s == "all" {
            return Some(Self::ALL.to_vec());
        }
        s.split(',')
            .map(|t| {
                let t = t.trim();
                Self::ALL
                    .into_iter()
                    .find(|k| k.name() == t || t.parse::<u8>().ok() == Some(k.id()))
            })
            .collect()
    }
}

impl fmt::Display for SuiteKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginRow {
    pub suite: &'static str,
    pub instance: String,
    pub label: &'static str,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub id: u8,
    pub suite: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub failures: usize,
    pub flagged: usize,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub margins: Vec<MarginRow>,
}

struct Tally {
    key: SuiteKey,
    checked: usize,
    failures: usize,
    flagged: usize,
    notes: Vec<String>,
    metrics: BTreeMap<String, f64>,
    margins: Vec<MarginRow>,
}

const MAX_NOTES: usize = 8;

impl Tally {
    fn new(key: SuiteKey) -> Self {
        Self {
            key,
            checked: 0,
            failures: 0,
            flagged: 0,
            notes: Vec::new(),
            metrics: BTreeMap::new(),
            margins: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.notes.len() < MAX_NOTES {
                self.notes.push(msg());
            }
        }
    }

    fn error(&mut self, id: &str, e: impl fmt::Display) {
        self.check(false, || format!("{id}: {e}"));
    }

    fn note(&mut self, msg: String) {
        if self.notes.len() < MAX_NOTES {
            self.notes.push(msg);
        }
    }

    fn max(&mut self, name: &str, v: f64) {
        let e = self.metrics.entry(name.to_owned()).or_insert(f64::NEG_INFINITY);
        *e = e.max(v);
    }

    fn min(&mut self, name: &str, v: f64) {
        let e = self.metrics.entry(name.to_owned()).or_insert(f64::INFINITY);
        *e = e.min(v);
    }

    fn set(&mut self, name: &str, v: f64) {
        self.metrics.insert(name.to_owned(), v);
    }

    fn margin(&mut self, instance: &str, label: &'static str, margin: f64) {
        self.margins.push(MarginRow {
            suite: self.key.name(),
            instance: instance.to_owned(),
            label,
            margin,
        });
    }

    fn finish(self, extra_ok: bool) -> SuiteResult {
        SuiteResult {
            id: self.key.id(),
            suite: self.key.name(),
            title: self.key.title(),
            passed: self.failures == 0 && self.checked > 0 && extra_ok,
            checked: self.checked,
            failures: self.failures,
            flagged: self.flagged,
            metrics: self.metrics,
            notes: self.notes,
            margins: self.margins,
        }
    }
}

/// Shared state of one verification run.
pub struct Ctx {
    pub seed: u64,
    pub tol: f64,
    pool: rayon::ThreadPool,
}

impl Ctx {
    pub fn new(seed: u64, tol: f64, jobs: usize) -> CliResult<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;
        Ok(Self { seed, tol, pool })
    }

    fn rng(&self, key: SuiteKey, i: usize) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(((16 + u64::from(key.id())) << 48) | i as u64);
        r
    }

    /// `f(0..count)` on the pool, results in index order.
    fn map<T: Send>(&self, count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
        self.pool.install(|| (0..count).into_par_iter().map(f).collect())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn tri(n: usize) -> SubdiagonalModel {
    SubdiagonalModel::triangular(n).expect("n >= 1")
}

fn l2_dist(model: &SubdiagonalModel, a: &ModelElement, b: &ModelElement) -> nchs_core::Result<f64> {
    model.l2_norm(&model.sub(a, b)?)
}

fn determinant(ctx: &Ctx) -> SuiteResult {
    let mut t = Tally::new(SuiteKey::Determinant);
    let rows = ctx.map(500, |i| {
        let mut r = ctx.rng(SuiteKey::Determinant, i);
        let n = 1 + i % 6;
        let a = gaussian(&mut r, n, n);
        let b = gaussian(&mut r, n, n);
        let well = [&a, &b].iter().all(|m| opcore::singular_values(m)[n - 1] > 1e-6);
        let prod = fk_det(&(&a * &b), DEFAULT_ZERO_TOL).ok()?;
        let split = fk_det(&a, DEFAULT_ZERO_TOL).ok()? * fk_det(&b, DEFAULT_ZERO_TOL).ok()?;
        let h = opcore::hermitian_part(&gaussian(&mut r, n, n)) * C64::new(r.random_range(0.0..5.0), 0.0);
        let u = opcore::expm_i_hermitian(&h).ok()?;
        let du = fk_det(&u, DEFAULT_ZERO_TOL).ok()?;
        Some((well, (prod - split).abs() / split.max(1.0), (du - 1.0).abs()))
    });
    let mut skipped = 0;
    for (i, row) in rows.into_iter().enumerate() {
        let Some((well, mult, unit)) = row else {
            t.error(&format!("pair {i}"), "determinant evaluation failed");
            continue;
        };
        if well {
            t.check(mult <= 1e-8, || format!("pair {i}: multiplicativity error {mult:e}"));
            t.max("max_multiplicative_rel_err", mult);
        } else {
            skipped += 1;
        }
        t.check(unit <= 1e-10, || format!("pair {i}: |Δ(u) − 1| = {unit:e}"));
        t.max("max_unitary_err", unit);
    }
    t.set("ill_conditioned_pairs_skipped", skipped as f64);
    t.finish(true)
}

fn analytic_symbol(r: &mut impl Rng, d: usize, deg: usize) -> Laurent {
    let pairs = (0..=deg).map(|k| (k as i64, gaussian(r, d, d) * C64::new(0.7f64.powi(k as i32), 0.0)));
    Laurent::from_pairs(d, pairs).expect("d×d blocks")
}

fn jensen(ctx: &Ctx) -> SuiteResult {
    let mut t = Tally::new(SuiteKey::Jensen);
    let rows = ctx.map(500, |i| -> nchs_core::Result<(f64, f64)> {
        let mut r = ctx.rng(SuiteKey::Jensen, i);
        let (model, h): (SubdiagonalModel, ModelElement) = if i % 2 == 0 {
            let n = 1 + (i / 2) % 6;
            (tri(n), gaussian(&mut r, n, n).upper_triangle().into())
        } else {
            let (d, deg) = (1 + (i / 2) % 2, 1 + (i / 4) % 8);
            (SubdiagonalModel::fourier(d, deg)?, analytic_symbol(&mut r, d, deg).into())
        };
        Ok((model.det_phi(&h)?, model.det(&h)?))
    });
    for (i, row) in rows.into_iter().enumerate() {
        match row {
            Ok((dphi, dh)) => {
                t.check(dphi <= dh + 1e-8, || format!("element {i}: Δ(Φ(h)) = {dphi} > Δ(h) = {dh}"));
                t.max("max_violation", dphi - dh);
                t.margin(&format!("jensen-{i}"), "dh_minus_dphi", dh - dphi);
            }
            Err(e) => t.error(&format!("element {i}"), e),
        }
    }
    t.finish(true)
}

/// `g = QQ*` with `Q` upper triangular (right outer factor).
fn right_outer(model: &SubdiagonalModel, g: &ModelElement) -> nchs_core::Result<CMat> {
    let k = factor::outer_factor_psd(model, &model.flip(g)?, 1e-12)?.h;
    Ok(model.flip(&k)?.as_matrix().expect("matrix model").clone())
}

/// `τ(g·|a − d|²)` with `|y|² = y*y`.
fn szego_objective(g: &CMat, a: &CMat, d: &CMat) -> f64 {
    let y = a - d;
    let n = g.nrows() as f64;
    (g * y.adjoint() * &y).trace().re / n
}

/// A random diagonal `d` with `Δ(d) = 1`.
fn unit_det_diagonal(r: &mut impl Rng, n: usize) -> CMat {
    let raw: Vec<C64> = (0..n)
        .map(|_| C64::from_polar(r.random_range(0.2..3.0), r.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let det = raw.iter().map(|z| z.norm().ln()).sum::<f64>() / n as f64;
    opcore::diag(&raw.iter().map(|z| z / det.exp()).collect::<Vec<_>>())
}

fn szego(ctx: &Ctx) -> SuiteResult {
    const SAMPLES: usize = 1000;
    let mut t = Tally::new(SuiteKey::Szego);
    let rows = ctx.map(100, |i| -> nchs_core::Result<(f64, f64, f64, usize)> {
        let mut r = ctx.rng(SuiteKey::Szego, i);
        let n = 1 + i % 5;
        let model = tri(n);
        let g = gen::pd_weight(&model, 0.1, &mut r);
        let gm = g.as_matrix().expect("matrix").clone();
        let delta = model.det(&g)?;
        let q = right_outer(&model, &g)?;
        // x = T·Q⁻¹ with |T_ii| = Δ(g)^{1/2}; then d = Φ(x), a = d − x.
        let t_diag = identity(n) * C64::new(delta.sqrt(), 0.0);
        let x = opcore::inverse(&q).map(|qi| &t_diag * qi)?;
        let d_opt = CMat::from_diagonal(&x.diagonal());
        let a_opt = &d_opt - &x;
        let d_det = fk_det(&d_opt, DEFAULT_ZERO_TOL)?;
        let best = szego_objective(&gm, &a_opt, &d_opt);
        let mut beaten = 0usize;
        let mut closest = f64::INFINITY;
        for s in 0..SAMPLES {
            let (a, d) = if s % 2 == 0 {
                (gaussian(&mut r, n, n).upper_triangle() - CMat::from_diagonal(&gaussian(&mut r, n, n).diagonal()), unit_det_diagonal(&mut r, n))
            } else {
                // perturb the minimizer inside the feasible set
                let step = 10f64.powf(r.random_range(-6.0..-1.0));
                let dx = gaussian(&mut r, n, n).upper_triangle() * C64::new(step, 0.0);
                let x2 = &x + dx;
                let d2 = CMat::from_diagonal(&x2.diagonal());
                let scale = fk_det(&d2, DEFAULT_ZERO_TOL)?;
                let x2 = x2 / C64::new(scale, 0.0);
                let d2 = CMat::from_diagonal(&x2.diagonal());
                (&d2 - &x2, d2)
            };
            let a = a.upper_triangle() - CMat::from_diagonal(&a.diagonal());
            let v = szego_objective(&gm, &a, &d);
            closest = closest.min((v - best) / best);
            if v < best - 1e-8 * best {
                beaten += 1;
            }
        }
        Ok((rel(best, delta), (d_det - 1.0).abs(), closest, beaten))
    });
    for (i, row) in rows.into_iter().enumerate() {
        match row {
            Ok((err, d_err, closest, beaten)) => {
                t.check(err <= 1e-8, || format!("g {i}: τ(g|a−d|²) vs Δ(g) relative error {err:e}"));
                t.check(d_err <= 1e-10, || format!("g {i}: Δ(d) − 1 = {d_err:e}"));
                t.check(beaten == 0, || format!("g {i}: {beaten} feasible samples beat the construction"));
                t.max("max_construction_rel_err", err);
                t.min("min_sample_relative_excess", closest);
            }
            Err(e) => t.error(&format!("g {i}"), e),
        }
    }
    t.set("samples_per_weight", SAMPLES as f64);
    t.finish(true)
}

fn hs1(ctx: &Ctx) -> SuiteResult {
    let mut t = Tally::new(SuiteKey::Hs1);
    let rows = ctx.map(100, |i| -> nchs_core::Result<(f64, factor::Hs1Residuals)> {
        let mut r = ctx.rng(SuiteKey::Hs1, i);
        let (model, tol) = if i % 2 == 0 {
            (tri(2 + (i / 2) % 5), 1e-9)
        } else {
            (SubdiagonalModel::fourier(1 + (i / 2) % 2, 2 + (i / 4) % 7)?, 1e-6)
        };
        let g = gen::pd_weight(&model, 0.1, &mut r);
        let b = factor::hs1_factorize(&model, &g, tol)?;
        Ok((tol, b.residuals))
    });
    for (i, row) in rows.into_iter().enumerate() {
        let id = format!("hs1-{i}");
        match row {
            Ok((tol, res)) => {
                t.check(res.recomposition <= tol, || format!("{id}: ‖g − f_R u f_L‖ = {:e}", res.recomposition));
                t.check(res.left_modulus <= tol, || format!("{id}: ‖|f_L|² − g‖ = {:e}", res.left_modulus));
                t.check(res.right_modulus <= tol, || format!("{id}: ‖|f_R*|² − g‖ = {:e}", res.right_modulus));
                t.check(res.unitarity <= 1e-9, || format!("{id}: ‖u*u − s‖ = {:e}", res.unitarity));
                let key = if i % 2 == 0 { "triangular" } else { "fourier" };
                t.max(&format!("max_recomposition_{key}"), res.recomposition);
                t.max(&format!("max_modulus_{key}"), res.left_modulus.max(res.right_modulus));
                t.max(&format!("max_unitarity_{key}"), res.unitarity);
                t.margin(&id, "recomposition", tol - res.recomposition);
            }
            Err(e) => t.error(&id, e),
        }
    }
    t.finish(true)
}

fn distance(ctx: &Ctx) -> SuiteResult {
    let mut t = Tally::new(SuiteKey::Distance);
    let rows = ctx.map(100, |i| -> nchs_core::Result<[f64; 3]> {
        let mut r = ctx.rng(SuiteKey::Distance, i);
        let n = 2 + i % 7;
        let model = tri(n);
        let x = gaussian(&mut r, n, n) * C64::new(r.random_range(0.1..3.0), 0.0);
        let arveson = angle::arveson_distance(&x);
        let x: ModelElement = x.into();
        let hankel = angle::hankel_restricted_norm(&model, &x, n)?;
        let best = angle::best_analytic_approx(&model, &x, n, 1e-10)?.achieved;
        Ok([arveson, hankel, best])
    });
    for (i, row) in rows.into_iter().enumerate() {
        let id = format!("distance-{i}");
        match row {
            Ok([a, h, b]) => {
                let gap = (a - h).abs().max((a - b).abs()).max((h - b).abs());
                t.check(gap <= 1e-5, || format!("{id}: arveson {a}, hankel {h}, approx {b}"));
                t.max("max_pairwise_gap", gap);
                t.margin(&id, "pairwise_gap", 1e-5 - gap);
            }
            Err(e) => t.error(&id, e),
        }
    }
    t.finish(true)
}

/// Unitaries of the equivalence batch: an `exp(i·s·H)` sweep, planted
/// invertible instances and structured negatives, Triangular `n ≤ 6`.
fn equivalence_instances(ctx: &Ctx) -> Vec<(String, SubdiagonalModel, CliResult<ModelElement>)> {
    const SWEEP: usize = 100;
    const PLANTED: usize = 60;
    const NEGATIVE: usize = 40;
    let mut out = Vec::with_capacity(SWEEP + PLANTED + NEGATIVE);
    for i in 0..SWEEP {
        let model = tri(2 + i % 5);
        let s = gen::sweep(i, SWEEP, 3.0);
        let u = gen::unitary_scaled(&model, s, &mut gen::instance_rng(ctx.seed, InstanceKind::UnitaryScaled, i as u64));
        out.push((format!("sweep-{i:03}"), model, u));
    }
    for (i, (model, planted)) in planted_instances(ctx).into_iter().enumerate() {
        out.push((format!("planted-{i:03}"), model, planted.map(|p| p.u)));
    }
    for j in 0..NEGATIVE {
        let model = tri(2 + j % 5);
        let which = if j % 2 == 0 { Negative::CyclicShift } else { Negative::Swap };
        let idx = (SWEEP + j) as u64;
        let u = gen::negative_unitary(&model, which, &mut gen::instance_rng(ctx.seed, InstanceKind::UnitaryScaled, idx));
        out.push((format!("{}-{j:03}", which.name()), model, u));
    }
    out
}

const PLANTED_COUNT: usize = 60;

fn planted_instances(ctx: &Ctx) -> Vec<(SubdiagonalModel, CliResult<gen::Planted>)> {
    (0..PLANTED_COUNT)
        .map(|i| {
            let model = tri(2 + i % 5);
            let mut r = gen::instance_rng(ctx.seed, InstanceKind::InvtoepPlanted, i as u64);
            (model, gen::invtoep_planted(&model, 0.1, &mut r))
        })
        .collect()
}

fn equivalence(ctx: &Ctx) -> SuiteResult {
    let mut t = Tally::new(SuiteKey::Equivalence);
    let instances = equivalence_instances(ctx);
    let tol = ctx.tol;
    let rows = ctx.map(instances.len(), |i| {
        let (_, model, u) = &instances[i];
        let u = u.as_ref().map_err(|e| e.to_string())?;
        toeplitz::equivalence_check(model, u, &[model.block_size()], tol).map_err(|e| e.to_string())
    });
    let mut decided = 0usize;
    let mut positives = 0usize;
    for ((id, _, _), row) in instances.iter().zip(rows) {
        match row {
            Ok(rep) => {
                for (label, m) in ["sigma_min", "certificate_alpha", "hankel_gap"].into_iter().zip(rep.margins) {
                    t.margin(id, label, m);
                }
                if rep.flagged_ambiguous {
                    t.flagged += 1;
                    continue;
                }
                decided += 1;
                positives += usize::from(rep.verdicts[0]);
                t.check(rep.agree, || format!("{id}: verdicts {:?} margins {:?}", rep.verdicts, rep.margins));
            }
            Err(e) => t.error(id, e),
        }
    }
    let rate = t.flagged as f64 / instances.len() as f64;
    t.set("instances", instances.len() as f64);
    t.set("decided", decided as f64);
    t.set("invertible", positives as f64);
    t.set("flagged_rate", rate);
    if rate > 0.05 {
        t.note(format!("flagged-ambiguous rate {rate} exceeds 5%"));
    }
    t.finish(rate <= 0.05)
}

fn invtoep(ctx: &Ctx) -> SuiteResult {
    let mut t = Tally::new(SuiteKey::Invtoep);
    let planted = planted_instances(ctx);
    let rows = ctx.map(planted.len(), |i| -> CliResult<(toeplitz::InvToep, f64)> {
        let (model, p) = &planted[i];
        let p = p.as_ref().map_err(|e| CliError::Usage(e.to_string()))?;
        let s = toeplitz::extract_invtoep(model, &p.u, model.block_size(), 1e-8)?;
        let recovery = l2_dist(model, &s.g0, &p.g0)?;
        Ok((s, recovery))
    });
    for (i, row) in rows.into_iter().enumerate() {
        let id = format!("planted-{i:03}");
        match row {
            Ok((s, recovery)) => {
                let r = s.residuals;
                let worst = r.phi.max(r.unitary).max(r.modulus);
                t.check(worst <= 1e-8, || format!("{id}: structure residual {worst:e}"));
                t.check(r.gap0.max(r.gap1) <= 1e-6, || format!("{id}: Δ-gap {:e}", r.gap0.max(r.gap1)));
                t.check(recovery <= 1e-7, || format!("{id}: planted g0 recovered to {recovery:e}"));
                t.max("max_structure_residual", worst);
                t.max("max_delta_gap", r.gap0.max(r.gap1));
                t.max("max_g0_recovery_err", recovery);
                t.margin(&id, "structure", 1e-8 - worst);
            }
            Err(e) => t.error(&id, e),
        }
    }
    t.finish(true)
}

fn remark(ctx: &Ctx) -> SuiteResult {
    let mut t = Tally::new(SuiteKey::Remark);
    let planted = planted_instances(ctx);
    let tol = ctx.tol;
    let rows = ctx.map(planted.len(), |i| -> CliResult<(bool, f64, f64)> {
        let (model, p) = &planted[i];
        let p = p.as_ref().map_err(|e| CliError::Usage(e.to_string()))?;
        let n = model.block_size();
        let inv = toeplitz::invertibility_test(model, &p.u, &[n], tol)?;
        let full = toeplitz::hankel_matrix(model, &p.u, n, false)?.norm();
        let restricted = angle::hankel_restricted_norm(model, &p.u, n)?;
        Ok((inv.verdict == Verdict::Invertible, full, restricted))
    });
    let mut invertible = 0;
    for (i, row) in rows.into_iter().enumerate() {
        let id = format!("planted-{i:03}");
        match row {
            Ok((true, full, restricted)) => {
                invertible += 1;
                t.check((full - 1.0).abs() <= 1e-6, || format!("{id}: ‖H_u‖ = {full}"));
                t.check(restricted < 1.0 - tol, || format!("{id}: restricted norm {restricted}"));
                t.max("max_full_norm_err", (full - 1.0).abs());
                t.max("max_restricted_norm", restricted);
            }
            Ok((false, ..)) => t.note(format!("{id}: T_u not invertible, skipped")),
            Err(e) => t.error(&id, e),
        }
    }
    t.set("invertible_instances", invertible as f64);
    t.finish(true)
}

fn certificate(ctx: &Ctx) -> SuiteResult {
    const WANT: usize = 100;
    let mut t = Tally::new(SuiteKey::Certificate);
    // Candidates are screened by distance; at most 4× the target are drawn.
    let rows = ctx.map(4 * WANT, |i| -> CliResult<Option<(f64, f64, f64, f64)>> {
        let mut r = ctx.rng(SuiteKey::Certificate, i);
        let n = 2 + i % 5;
        let model = tri(n);
        let s = r.random_range(0.0..2.0);
        let u = gen::unitary_scaled(&model, s, &mut r)?;
        let best = angle::best_analytic_approx(&model, &u, n, 1e-10)?;
        if best.achieved > 0.9 {
            return Ok(None);
        }
        let cert = angle::approximant_to_certificate(&model, &u, &best.f)?;
        let back = angle::certificate_to_approximant(&model, &u, &cert, None)?;
        Ok(Some((best.achieved, cert.alpha, back.achieved, back.bound)))
    });
    let mut used = 0;
    for (i, row) in rows.into_iter().enumerate() {
        if used == WANT {
            break;
        }
        let id = format!("certificate-{i:03}");
        match row {
            Ok(None) => {}
            Ok(Some((dist, alpha, achieved, bound))) => {
                used += 1;
                t.check(alpha >= 1.0 - dist - 1e-6, || format!("{id}: alpha {alpha} for distance {dist}"));
                t.check(achieved <= bound + 1e-9 && bound < 1.0, || {
                    format!("{id}: ‖u − f‖ = {achieved}, bound {bound}")
                });
                t.min("min_alpha_slack", alpha - (1.0 - dist));
                t.max("max_bound", bound);
                t.margin(&id, "alpha_slack", alpha - (1.0 - dist) + 1e-6);
            }
            Err(e) => {
                used += 1;
                t.error(&id, e);
            }
        }
    }
    t.set("instances", used as f64);
    if used < WANT {
        t.note(format!("only {used} instances with distance ≤ 0.9"));
    }
    t.finish(used == WANT)
}

pub const CIRCLE_ALPHAS: [f64; 5] = [0.1, 0.3, 0.45, 0.6, 0.8];
pub const CIRCLE_GRID: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleRow {
    pub alpha: f64,
    pub hs_positive: bool,
    pub rho_stable: bool,
    pub a2_stable: bool,
    pub gap_ratio: f64,
    pub a2_ratio: f64,
    pub rho_last: f64,
    pub angle_excess: f64,
}

pub fn circle_rows(ctx: &Ctx) -> Vec<CliResult<CircleRow>> {
    ctx.map(CIRCLE_ALPHAS.len(), |i| {
        let alpha = CIRCLE_ALPHAS[i];
        let fine = GridWeight::power_weight(CIRCLE_GRID, alpha)?;
        let coarse = GridWeight::power_weight(CIRCLE_GRID / 2, alpha)?;
        let c = classical::hs_certificate(&fine, &HsOptions { cutoffs: [16, 32, 64], tol: ctx.tol })?;
        let a2_ratio = classical::a2_refinement_ratio(&coarse, &fine)?;
        Ok(CircleRow {
            alpha,
            hs_positive: c.hs_positive,
            rho_stable: c.rho_stable,
            a2_stable: a2_ratio < A2_REFINEMENT_RATIO_MAX,
            gap_ratio: c.gap_ratio,
            a2_ratio,
            rho_last: c.rho.last().map_or(1.0, |r| r.rho),
            angle_excess: c.angle_excess,
        })
    })
}

fn circle(ctx: &Ctx) -> SuiteResult {
    let mut t = Tally::new(SuiteKey::Circle);
    let mut rows = Vec::new();
    for (row, alpha) in circle_rows(ctx).into_iter().zip(CIRCLE_ALPHAS) {
        match row {
            Ok(r) => rows.push(r),
            Err(e) => t.error(&format!("alpha={alpha}"), e),
        }
    }
    for r in &rows {
        let id = format!("alpha={}", r.alpha);
        t.check(r.hs_positive == r.rho_stable, || format!("{id}: HS verdict disagrees with ρ verdict"));
        t.check(r.a2_stable == r.rho_stable, || format!("{id}: A₂ verdict disagrees with ρ verdict"));
        t.set(&format!("gap_ratio@{}", r.alpha), r.gap_ratio);
        t.set(&format!("a2_ratio@{}", r.alpha), r.a2_ratio);
        t.margin(&id, "gap_ratio", r.gap_ratio - RHO_GAP_RATIO_MIN);
        t.margin(&id, "a2_ratio", A2_REFINEMENT_RATIO_MAX - r.a2_ratio);
    }
    // Monotone boundary: positives form a prefix, negatives the rest, and
    // both sides are non-empty.
    let split = rows.iter().take_while(|r| r.hs_positive).count();
    let monotone = rows[split..].iter().all(|r| !r.hs_positive);
    t.check(monotone && split > 0 && split < rows.len() && rows.len() == CIRCLE_ALPHAS.len(), || {
        format!("verdicts along α are not a positive prefix followed by negatives: {:?}", rows.iter().map(|r| r.hs_positive).collect::<Vec<_>>())
    });
    if split > 0 && split < rows.len() {
        t.set("alpha_star", rows[split - 1].alpha);
        t.set("alpha_star_star", rows[split].alpha);
    }
    t.finish(true)
}

fn cross_check(_ctx: &Ctx) -> SuiteResult {
    let mut t = Tally::new(SuiteKey::CrossCheck);
    let run = |t: &mut Tally| -> nchs_core::Result<()> {
        let model = SubdiagonalModel::fourier(1, 4)?;
        let zbar: ModelElement = Laurent::scalar(&[(-1, C64::new(1.0, 0.0))]).into();
        let inv = toeplitz::invertibility_test(&model, &zbar, &[16, 32, 64], 1e-6)?;
        t.check(inv.verdict == Verdict::NotInvertible, || format!("T_z̄ verdict {:?}", inv.verdict));
        let image = toeplitz::toeplitz_matrix(&model, &zbar, 64)?.apply(&model, &model.one())?;
        let kernel = model.l2_norm(&image)?;
        t.check(kernel == 0.0, || format!("‖T_z̄ 1‖ = {kernel:e}"));
        let h = angle::hankel_restricted_norm(&model, &zbar, 64)?;
        t.check((h - 1.0).abs() <= 1e-15, || format!("restricted ‖H_z̄‖ = {h}"));
        t.set("fourier_restricted_hankel", h);
        for n in 2..=6 {
            // The lower shift plays the role of z̄ in the Triangular model.
            let m = tri(n);
            let s = CMat::from_fn(n, n, |i, j| C64::new(f64::from(u8::from(i == j + 1)), 0.0));
            let s: ModelElement = s.into();
            let image = toeplitz::toeplitz_matrix(&m, &s, 0)?.apply(&m, &m.one())?;
            let kernel = m.l2_norm(&image)?;
            t.check(kernel == 0.0, || format!("n={n}: ‖T_S* 1‖ = {kernel:e}"));
            let h = angle::hankel_restricted_norm(&m, &s, n)?;
            t.check((h - 1.0).abs() <= 1e-15, || format!("n={n}: restricted ‖H_S*‖ = {h}"));
            let sigma = toeplitz::invertibility_test(&m, &s, &[], 1e-6)?;
            t.check(sigma.verdict == Verdict::NotInvertible, || format!("n={n}: T_S* verdict {:?}", sigma.verdict));
        }
        Ok(())
    };
    if let Err(e) = run(&mut t) {
        t.error("cross-check", e);
    }
    t.finish(true)
}

/// Regenerates every instance kind and reruns the cheap suites twice,
/// comparing serialized output byte for byte.
fn determinism(ctx: &Ctx) -> SuiteResult {
    let mut t = Tally::new(SuiteKey::Determinism);
    let params = gen::GenParams {
        count: 4,
        negatives: 2,
        grid: 64,
        ..gen::GenParams::default()
    };
    let batches: Vec<(InstanceKind, Option<SubdiagonalModel>)> = vec![
        (InstanceKind::PdWeight, Some(tri(4))),
        (InstanceKind::PdWeight, SubdiagonalModel::fourier(2, 4).ok()),
        (InstanceKind::UnitaryScaled, Some(tri(5))),
        (InstanceKind::UnitaryScaled, SubdiagonalModel::fourier(1, 4).ok()),
        (InstanceKind::InvtoepPlanted, Some(tri(4))),
        (InstanceKind::InvtoepPlanted, SubdiagonalModel::fourier(1, 4).ok()),
        (InstanceKind::HsWeightFamily, None),
    ];
    for (kind, model) in batches {
        let render = || -> CliResult<Vec<u8>> {
            let v: Vec<Value> = gen::gen_instances(kind, model, &params, ctx.seed)?
                .iter()
                .map(gen::Instance::to_json)
                .collect();
            Ok(io::to_bytes(&Value::Array(v)))
        };
        match (render(), render()) {
            (Ok(a), Ok(b)) => t.check(a == b, || format!("{kind} instances differ between runs")),
            (Err(e), _) | (_, Err(e)) => t.error(kind.name(), e),
        }
    }
    for key in [SuiteKey::Determinant, SuiteKey::Distance, SuiteKey::CrossCheck] {
        let a = serde_json::to_vec(&run_suite(ctx, key)).expect("serializable");
        let b = serde_json::to_vec(&run_suite(ctx, key)).expect("serializable");
        t.check(a == b, || format!("suite {key} output differs between runs"));
    }
    t.finish(true)
}

pub fn run_suite(ctx: &Ctx, key: SuiteKey) -> SuiteResult {
    match key {
        SuiteKey::Determinant => determinant(ctx),
        SuiteKey::Jensen => jensen(ctx),
        SuiteKey::Szego => szego(ctx),
        SuiteKey::Hs1 => hs1(ctx),
        SuiteKey::Distance => distance(ctx),
        SuiteKey::Equivalence => equivalence(ctx),
        SuiteKey::Invtoep => invtoep(ctx),
        SuiteKey::Remark => remark(ctx),
        SuiteKey::Certificate => certificate(ctx),
        SuiteKey::Circle => circle(ctx),
        SuiteKey::CrossCheck => cross_check(ctx),
        SuiteKey::Determinism => determinism(ctx),
    }
}

pub struct VerifyRun {
    pub results: Vec<SuiteResult>,
    /// Wall time per suite in seconds, kept out of the summary.
    pub timings: Vec<(SuiteKey, f64)>,
}

impl VerifyRun {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

pub fn run_verify(cfg: &RunConfig, suites: &[SuiteKey]) -> CliResult<VerifyRun> {
    let ctx = Ctx::new(cfg.seed, cfg.tol, cfg.jobs)?;
    let mut results = Vec::new();
    let mut timings = Vec::new();
    for &key in suites {
        let start = Instant::now();
        results.push(run_suite(&ctx, key));
        timings.push((key, start.elapsed().as_secs_f64()));
    }
    Ok(VerifyRun { results, timings })
}

pub fn summary_json(cfg: &RunConfig, run: &VerifyRun) -> Value {
    json!({
        "config": cfg.echo(),
        "passed": run.passed(),
        "suites": run.results,
    })
}

pub fn margins_csv(run: &VerifyRun) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["suite", "instance", "label", "margin"])?;
    for r in run.results.iter().flat_map(|r| &r.margins) {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
}

/// Decade bin of a margin: `<0`, `0`, or `1e{k}` for `margin ∈ [10^k, 10^{k+1})`.
fn decade(m: f64) -> String {
    if m < 0.0 {
        "<0".into()
    } else if m == 0.0 {
        "0".into()
    } else {
        format!("1e{}", m.log10().floor() as i32)
    }
}

pub fn margins_histogram_csv(run: &VerifyRun) -> CliResult<Vec<u8>> {
    let mut bins: BTreeMap<(&str, &str, String), usize> = BTreeMap::new();
    for r in run.results.iter().flat_map(|r| &r.margins) {
        *bins.entry((r.suite, r.label, decade(r.margin))).or_default() += 1;
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["suite", "label", "bin", "count"])?;
    for ((suite, label, bin), count) in bins {
        w.write_record([suite, label, &bin, &count.to_string()])?;
    }
    w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
}

pub fn timing_json(run: &VerifyRun) -> Value {
    let per: BTreeMap<&str, f64> = run.timings.iter().map(|(k, s)| (k.name(), *s)).collect();
    json!({ "seconds": per, "total": run.timings.iter().map(|t| t.1).sum::<f64>() })
}

/// Writes `summary.json`, `margins.csv`, `margins_histogram.csv` and
/// `timing.json` into `dir`.
pub fn write_outputs(dir: &Path, cfg: &RunConfig, run: &VerifyRun) -> CliResult<()> {
    io::write_file(&dir.join("summary.json"), &io::to_bytes(&summary_json(cfg, run)))?;
    io::write_file(&dir.join("margins.csv"), &margins_csv(run)?)?;
    io::write_file(&dir.join("margins_histogram.csv"), &margins_histogram_csv(run)?)?;
    io::write_file(&dir.join("timing.json"), &io::to_bytes(&timing_json(run)))?;
    Ok(())
}

pub fn cmd_verify(cfg: &RunConfig, suites: &[SuiteKey]) -> CliResult<Status> {
    let run = run_verify(cfg, suites)?;
    match &cfg.out {
        Some(dir) => write_outputs(dir, cfg, &run)?,
        None => print!("{}", String::from_utf8_lossy(&io::to_bytes(&summary_json(cfg, &run)))),
    }
    for r in &run.results {
        eprintln!(
            "[{:>2}] {:<13} {}  checked={} failures={} flagged={}",
            r.id,
            r.suite,
            if r.passed { "PASS" } else { "FAIL" },
            r.checked,
            r.failures,
            r.flagged
        );
    }
    Ok(if run.passed() { Status::Ok } else { Status::VerificationFailed })
}
