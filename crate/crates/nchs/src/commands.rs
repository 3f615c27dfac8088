//! Thin orchestration for the single-input subcommands.

use std::path::Path;

use nchs_core::angle::{self, CertifyOutcome};
use nchs_core::classical::{self, GridWeight, HsOptions, Samples};
use nchs_core::factor;
use nchs_core::models::json::{complex_to_json, element_for_model, element_to_json, matrix_to_json};
use nchs_core::toeplitz::{self, Verdict};
use nchs_core::{opcore, ModelElement, SubdiagonalModel};
use serde_json::{json, Value};

use crate::config::{OutputFormat, RunConfig};
use crate::error::{CliError, CliResult, Status};
use crate::gen::{self, GenParams, Instance, InstanceKind, Payload};
use crate::io::{self, InputDigest};

/// A finished command: the report body and the exit status it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub status: Status,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Self {
            report,
            status: Status::Ok,
        }
    }
}

/// Wraps a report with the config echo and input digests.
pub fn envelope(cfg: &RunConfig, digests: &[InputDigest], report: Value) -> Value {
    json!({ "config": cfg.echo(), "inputs": digests, "report": report })
}

struct Loaded {
    model: SubdiagonalModel,
    element: ModelElement,
    digests: Vec<InputDigest>,
}

fn single_input(cfg: &RunConfig) -> CliResult<&Path> {
    match cfg.inputs.as_slice() {
        [p] => Ok(p),
        [] => Err(CliError::Usage(format!("`{}` needs --in <file>", cfg.command))),
        _ => Err(CliError::Usage(format!("`{}` takes exactly one --in file", cfg.command))),
    }
}

/// Reads either a bare element (model from `--model`) or an instance record
/// produced by `gen`, from which the input named `key` is taken.
fn load_element(cfg: &RunConfig, key: &str) -> CliResult<Loaded> {
    let path = single_input(cfg)?;
    let (value, digest) = io::read_json(path)?;
    let (model, element) = if value.get("inputs").is_some() {
        let rec = Instance::from_json(&value)?;
        let model = cfg.model.or(rec.model).ok_or_else(|| CliError::Usage("no model given".into()))?;
        let el = match (rec.payload, key) {
            (Payload::Weight(g), "g") => g,
            (Payload::Unitary { u, .. }, "u") => u,
            (Payload::Planted(p), "u") => p.u,
            _ => return Err(CliError::Usage(format!("record {} has no input `{key}`", rec.id))),
        };
        (model, el)
    } else {
        let model = cfg.model()?;
        let el = element_for_model(&model, &value)?;
        (model, el)
    };
    model.check(&element)?;
    Ok(Loaded {
        model,
        element,
        digests: vec![digest],
    })
}

fn finish(cfg: &RunConfig, digests: &[InputDigest], outcome: Outcome, name: &str) -> CliResult<Status> {
    io::emit(cfg.out.as_deref(), name, &envelope(cfg, digests, outcome.report))?;
    Ok(outcome.status)
}

pub fn cmd_factor(cfg: &RunConfig, outer_only: bool) -> CliResult<Status> {
    let input = load_element(cfg, "g")?;
    let outcome = factor_report(&input.model, &input.element, cfg.tol, outer_only)?;
    finish(cfg, &input.digests, outcome, "factor.json")
}

pub fn factor_report(model: &SubdiagonalModel, g: &ModelElement, tol: f64, outer_only: bool) -> CliResult<Outcome> {
    if outer_only {
        let h = factor::outer_factor_psd(model, g, tol)?;
        return Ok(Outcome::ok(json!({
            "kind": "outer",
            "method": format!("{:?}", h.method).to_lowercase(),
            "h": element_to_json(&h.h),
            "residual": h.residual,
            "delta_gap": h.delta_gap,
            "iterations": h.iterations,
            "tail_energy": h.tail_energy,
        })));
    }
    let b = factor::hs1_factorize(model, g, tol)?;
    let rank = b.s_phi.diagonal().iter().map(|z| z.re).sum::<f64>().round() as usize;
    Ok(Outcome::ok(json!({
        "kind": "hs1",
        "f_l": element_to_json(&b.f_l),
        "f_r": element_to_json(&b.f_r),
        "u": element_to_json(&b.u),
        "s_phi": matrix_to_json(&b.s_phi),
        "s_phi_rank": rank,
        "scale": b.scale,
        "delta_phi": b.delta_phi,
        "residuals": b.residuals,
    })))
}

pub fn cmd_angle(cfg: &RunConfig, distance: bool) -> CliResult<Status> {
    let key = if distance { "u" } else { "g" };
    let input = load_element(cfg, key)?;
    let outcome = angle_report(&input.model, &input.element, &cfg.cutoffs_for(&input.model), cfg.tol, distance)?;
    finish(cfg, &input.digests, outcome, "angle.json")
}

pub fn angle_report(
    model: &SubdiagonalModel,
    x: &ModelElement,
    cutoffs: &[usize],
    tol: f64,
    distance: bool,
) -> CliResult<Outcome> {
    if distance {
        let rows = cutoffs
            .iter()
            .map(|&c| {
                let d = angle::dist_to_algebra_report(model, x, c)?;
                let h = angle::hankel_restricted_norm(model, x, c)?;
                Ok(json!({ "cutoff": c, "dist": d.dist, "dist_doubled": d.dist_doubled, "hankel_restricted": h }))
            })
            .collect::<CliResult<Vec<_>>>()?;
        return Ok(Outcome::ok(json!({ "kind": "distance", "method": "nehari_arveson", "sections": rows })));
    }
    let reports = cutoffs
        .iter()
        .map(|&c| angle::rho_gram(model, x, c))
        .collect::<Result<Vec<_>, _>>()?;
    let last = reports.last().map_or(1.0, |r| r.rho);
    Ok(Outcome::ok(json!({
        "kind": "angle",
        "sections": reports,
        "positive_angle": last < 1.0 - tol,
        "margin": 1.0 - tol - last,
    })))
}

pub fn cmd_toeplitz(cfg: &RunConfig) -> CliResult<Status> {
    let input = load_element(cfg, "u")?;
    let outcome = toeplitz_report(&input.model, &input.element, &cfg.cutoffs_for(&input.model), cfg.tol)?;
    finish(cfg, &input.digests, outcome, "toeplitz.json")
}

pub fn toeplitz_report(model: &SubdiagonalModel, a: &ModelElement, cutoffs: &[usize], tol: f64) -> CliResult<Outcome> {
    let inv = toeplitz::invertibility_test(model, a, cutoffs, tol)?;
    let unitarity = model
        .grid_values(a)?
        .iter()
        .map(opcore::unitarity_defect)
        .fold(0.0, f64::max);
    let mut report = json!({
        "kind": "toeplitz",
        "verdict": inv.verdict,
        "sections": inv.sigma_min,
        "unitarity_defect": unitarity,
    });
    if unitarity <= 1e-8 {
        let eq = toeplitz::equivalence_check(model, a, cutoffs, tol)?;
        report["equivalence"] = json!({
            "dist": eq.dist,
            "hankel_restricted": eq.hankel_restricted,
            "full_hankel_norm": eq.full_hankel_norm,
            "certificate_alpha": eq.certificate.as_ref().map(|c| c.alpha),
            "infeasible_gap": eq.infeasible_gap,
            "verdicts": eq.verdicts,
            "margins": eq.margins,
            "agree": eq.agree,
            "flagged_ambiguous": eq.flagged_ambiguous,
            "remark_norm_one": eq.remark_norm_one,
        });
        if inv.verdict == Verdict::Invertible {
            let cutoff = cutoffs.iter().copied().max().unwrap_or(0);
            report["invtoep"] = match toeplitz::extract_invtoep(model, a, cutoff, tol.max(1e-8)) {
                Ok(s) => json!({
                    "g0": element_to_json(&s.g0),
                    "g1": element_to_json(&s.g1),
                    "d": element_to_json(&s.d),
                    "residuals": s.residuals,
                }),
                Err(e) => json!({ "error": e.to_string() }),
            };
        }
    }
    Ok(Outcome::ok(report))
}

pub fn cmd_certify(cfg: &RunConfig) -> CliResult<Status> {
    let input = load_element(cfg, "u")?;
    let cutoff = cfg.cutoffs_for(&input.model).last().copied().unwrap_or(0);
    let outcome = certify_report(&input.model, &input.element, cutoff, cfg.tol)?;
    finish(cfg, &input.digests, outcome, "certify.json")
}

pub fn certify_report(model: &SubdiagonalModel, u: &ModelElement, cutoff: usize, tol: f64) -> CliResult<Outcome> {
    match angle::certify_positive_real(model, u, cutoff, tol)? {
        CertifyOutcome::Certified(cert) => {
            let floor = angle::real_part_floor(model, u, &cert.k)?;
            let approx = angle::certificate_to_approximant(model, u, &cert, None)?;
            Ok(Outcome::ok(json!({
                "kind": "certificate",
                "certified": true,
                "cutoff": cutoff,
                "alpha": cert.alpha,
                "k": element_to_json(&cert.k),
                "k_norm": cert.k_norm,
                "source": format!("{:?}", cert.source),
                "real_part_floor": floor,
                "margin": cert.alpha - tol,
                "approximant": {
                    "f": element_to_json(&approx.f),
                    "eps": approx.eps,
                    "bound": approx.bound,
                    "achieved": approx.achieved,
                },
            })))
        }
        CertifyOutcome::Infeasible { gap } => Ok(Outcome {
            report: json!({ "kind": "certificate", "certified": false, "cutoff": cutoff, "gap": gap }),
            status: Status::BadInput,
        }),
    }
}

pub fn cmd_classical(cfg: &RunConfig) -> CliResult<Status> {
    let path = single_input(cfg)?;
    let (value, digest) = io::read_json(path)?;
    let w = if value.get("inputs").is_some() {
        match Instance::from_json(&value)?.payload {
            Payload::Circle { w, .. } => w,
            _ => return Err(CliError::Usage("record is not a circle weight".into())),
        }
    } else {
        GridWeight::from_json(&value)?
    };
    if cfg.format == OutputFormat::Csv {
        match &cfg.out {
            Some(dir) => {
                let p = dir.join("profile.csv");
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                let f = std::fs::File::create(&p).map_err(|e| CliError::io(&p, e))?;
                w.write_profile_csv(f)?;
            }
            None => w.write_profile_csv(std::io::stdout().lock())?,
        }
    }
    let outcome = classical_report(&w, &cfg.cutoffs, cfg.tol)?;
    if cfg.format == OutputFormat::Csv && cfg.out.is_none() {
        return Ok(outcome.status);
    }
    finish(cfg, &[digest], outcome, "classical.json")
}

pub fn classical_report(w: &GridWeight, cutoffs: &[usize], tol: f64) -> CliResult<Outcome> {
    let m = w.len();
    let mut report = json!({ "kind": "classical", "M": m, "offset": w.offset() });
    match w.samples() {
        Samples::Matrix(_) => {
            let tv = classical::treil_volberg_constant(w)?;
            report["treil_volberg"] = json!({ "value": tv.value, "arc": tv.arc, "arc_family": "dyadic_windows" });
        }
        Samples::Scalar(s) => {
            report["geometric_mean"] = json!(classical::geometric_mean(w)?);
            let a2 = classical::a2_constant(w)?;
            report["a2"] = json!({ "value": a2.value, "arc": a2.arc, "arc_family": "dyadic_windows" });
            if m >= 4 {
                let half = GridWeight::scalar(s.iter().step_by(2).copied().collect(), w.offset() / 2.0)?;
                report["a2_refinement_ratio"] = json!(classical::a2_refinement_ratio(&half, w)?);
            }
            if m >= 16 {
                let opts = HsOptions {
                    cutoffs: hs_cutoffs(m, cutoffs),
                    tol,
                };
                let c = classical::hs_certificate(w, &opts)?;
                report["hs_certificate"] = json!({
                    "rho_hat": c.rho_hat,
                    "achieved": c.achieved,
                    "eps": c.eps,
                    "angle_excess": c.angle_excess,
                    "min_abs_k0": c.k0.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min),
                    "k0_at_0": complex_to_json(c.k0[0]),
                    "rho": c.rho.iter().map(|r| json!({ "cutoff": r.cutoff, "rho": r.rho })).collect::<Vec<_>>(),
                    "gap_ratio": c.gap_ratio,
                    "rho_stable": c.rho_stable,
                    "hs_positive": c.hs_positive,
                });
            }
        }
    }
    Ok(Outcome::ok(report))
}

/// Three cutoffs for the ρ stability check that the grid can resolve.
fn hs_cutoffs(m: usize, requested: &[usize]) -> [usize; 3] {
    match requested {
        [a, b, c] if *c <= m / 2 => [*a, *b, *c],
        _ if m >= 128 => [16, 32, 64],
        _ => [(m / 8).max(1), (m / 4).max(1), m / 2],
    }
}

pub fn cmd_gen(cfg: &RunConfig, kind: InstanceKind, params: &GenParams) -> CliResult<Status> {
    let instances = gen::gen_instances(kind, cfg.model, params, cfg.seed)?;
    match &cfg.out {
        Some(dir) => {
            let mut manifest = Vec::new();
            for inst in &instances {
                let bytes = io::to_bytes(&inst.to_json());
                let name = format!("{}.json", inst.id);
                io::write_file(&dir.join(&name), &bytes)?;
                manifest.push(json!({ "file": name, "sha256": io::content_hash(&bytes) }));
            }
            let summary = json!({ "kind": kind.name(), "count": instances.len(), "files": manifest });
            io::emit(Some(dir), "manifest.json", &envelope(cfg, &[], summary))?;
        }
        None => {
            let all: Vec<Value> = instances.iter().map(Instance::to_json).collect();
            io::emit(None, "", &envelope(cfg, &[], Value::Array(all)))?;
        }
    }
    Ok(Status::Ok)
}
