//! Orchestrates the analyses of one config and writes the report bundle.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use torusmix_core::energy::{
    assess_corollary, assess_theorem, bound_constant, conjecture_diagnostic, corollary_rhs, proof_trace,
    BoundConstants, EnergyFields, FlowSweep, ProofTrace, ProofTraceParams, VerdictStatus, AREA_TOLERANCE,
};
use torusmix_core::flow::{FlowSpec, GronwallReport};
use torusmix_core::geometry::{IndicatorField, TorusPoint, MIN_CELLS_PER_BALL};
use torusmix_core::maps::Rearrangement;
use torusmix_core::mixing::{build_image_indicator, mixing_scale_scan, ScanResult, PREDICATE_TOL_CELLS};
use torusmix_core::tolerances as tol;

use crate::config::{Analysis, RunConfig, Subject};
use crate::error::CliError;
use crate::render::{render, Format, Style};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Worker cap; all cores when `None`.
    pub threads: Option<usize>,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub schema: u32,
    pub name: String,
    pub subject: &'static str,
    pub analyses: Vec<Analysis>,
    pub seed: u64,
    pub verdicts: BTreeMap<&'static str, String>,
    pub highlights: BTreeMap<&'static str, serde_json::Value>,
    pub exit_code: i32,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub out_dir: PathBuf,
    pub summary: Summary,
}

/// Files of a run plus per-stage wall times for the manifest.
struct Bundle {
    dir: PathBuf,
    files: Vec<String>,
    wall_ms: BTreeMap<String, f64>,
}

impl Bundle {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: vec![], wall_ms: BTreeMap::new() })
    }

    fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        std::fs::write(self.dir.join(name), data)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json<S: Serialize>(&mut self, name: &str, analysis: &str, body: &S) -> Result<(), CliError> {
        let mut value = serde_json::to_value(body)?;
        if let serde_json::Value::Object(map) = &mut value {
            map.insert("schema".into(), json!(SCHEMA));
            map.insert("analysis".into(), json!(analysis));
        }
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    fn timed<R>(&mut self, stage: &str, f: impl FnOnce() -> R) -> R {
        let t = Instant::now();
        let r = f();
        *self.wall_ms.entry(stage.to_string()).or_default() += t.elapsed().as_secs_f64() * 1e3;
        r
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn scan_csv(scan: &ScanResult<f64>) -> String {
    let mut out = String::from(
        "epsilon,passed,tolerance,centers_tested,worst_low_x1,worst_low_x2,worst_low_fraction,worst_high_x1,worst_high_x2,worst_high_fraction\n",
    );
    for r in &scan.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.epsilon,
            r.passed,
            r.tolerance,
            r.centers_tested,
            r.worst_low.x1,
            r.worst_low.x2,
            r.worst_low.fraction,
            r.worst_high.x1,
            r.worst_high.x2,
            r.worst_high.fraction
        );
    }
    out
}

fn proof_trace_csv(trace: &ProofTrace<f64>) -> String {
    let mut out = String::from(
        "s,l_s,l_half_minus_s,hoelder_residual,image_area,n_pack,packing_margin,packing_area_margin,covering_margin,area_margin,length_margin,pair_bound_margin,ok\n",
    );
    for r in &trace.slices {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.s,
            r.l_s,
            r.l_half_minus_s,
            r.hoelder_residual,
            r.image_area,
            r.n_pack,
            opt(r.packing_margin),
            r.packing_area_margin,
            r.covering_margin,
            r.area_margin,
            opt(r.length_margin),
            opt(r.pair_bound_margin),
            r.ok
        );
    }
    out
}

fn gronwall_csv(rows: &[(TorusPoint<f64>, GronwallReport<f64>)]) -> String {
    let mut out = String::from(
        "x1,x2,max_residual,final_energy_density,grad_norm_integral,integrated_bound,integrated_margin\n",
    );
    for (p, g) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.x1(),
            p.x2(),
            g.max_residual,
            g.final_energy_density,
            g.grad_norm_integral,
            g.integrated_bound,
            g.integrated_margin
        );
    }
    out
}

fn tolerances(grid_res: usize) -> serde_json::Value {
    json!({
        "predicate": PREDICATE_TOL_CELLS / grid_res as f64,
        "predicate_cells": PREDICATE_TOL_CELLS,
        "min_cells_per_ball": MIN_CELLS_PER_BALL,
        "separator_area": AREA_TOLERANCE,
        "det_hypothesis": tol::DET_HYPOTHESIS_TOL,
        "energy_relative": tol::ENERGY_REL_TOL,
        "gronwall": tol::GRONWALL_TOL,
        "hoelder_relative": tol::HOELDER_REL_TOL,
        "area_per_length": tol::AREA_TOL_PER_LENGTH,
        "length_cells": tol::LENGTH_TOL_CELLS,
        "final_cells": tol::FINAL_TOL_CELLS,
        "packing_area_res": tol::PACKING_AREA_RES,
    })
}

fn status_name(s: VerdictStatus) -> String {
    serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

/// Runs every requested analysis on a thread pool capped at
/// `options.threads` and writes the bundle into `options.out_dir`.
pub fn run(config: &RunConfig, options: &RunOptions) -> Result<RunOutcome, CliError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| match config.subject() {
        Subject::Map(m) => run_subject(config, options, m, None),
        Subject::Flow(f) => {
            let phi = f.time1_map()?;
            run_subject(config, options, &phi, Some(f))
        }
    })
}

fn run_subject<R: Rearrangement<f64>>(
    config: &RunConfig,
    options: &RunOptions,
    map: &R,
    flow: Option<&FlowSpec<f64>>,
) -> Result<RunOutcome, CliError> {
    let p = &config.params;
    let mut bundle = Bundle::new(&options.out_dir)?;
    let constants: BoundConstants<f64> = bound_constant(p.kappa, p.kappa_prime).map_err(CliError::config)?;
    let eps_grid = p.eps_grid()?;
    let mut verdicts = BTreeMap::new();
    let mut highlights = BTreeMap::new();
    let mut violation = false;
    highlights.insert("c", json!(constants.c));
    highlights.insert("m_prime", json!(constants.m_prime));

    let wants = |a| config.wants(a);
    let need_scan = wants(Analysis::MixScale)
        || wants(Analysis::VerifyTheorem)
        || wants(Analysis::VerifyCorollary)
        || (wants(Analysis::ProofTrace) && p.proof_eps.is_none());
    let need_image = need_scan || wants(Analysis::Render);
    let need_energy = wants(Analysis::Energy)
        || wants(Analysis::VerifyTheorem)
        || wants(Analysis::VerifyCorollary)
        || wants(Analysis::Render);

    let image: Option<IndicatorField> = if need_image {
        Some(bundle.timed("image", || match flow {
            Some(f) => build_image_indicator(|q| f.flow_membership_in_image(q), p.grid_res),
            None => build_image_indicator(|q| map.image_contains(q), p.grid_res),
        })?)
    } else {
        None
    };
    let scan = match (&image, need_scan) {
        (Some(img), true) => Some(bundle.timed("mix-scale", || {
            mixing_scale_scan(img, p.kappa, &eps_grid, p.center_spacing_factor)
        })?),
        _ => None,
    };
    if let Some(s) = &scan {
        highlights.insert("eps_star", json!(s.certified_eps));
    }

    let (fields, sweep) = if need_energy {
        bundle.timed("energy", || -> Result<_, CliError> {
            Ok(match flow {
                Some(f) => {
                    let sw = FlowSweep::run(f, p.energy_res)?;
                    (Some(sw.fields.clone()), Some(sw))
                }
                None => (Some(EnergyFields::sample(map, p.energy_res)?), None),
            })
        })?
    } else {
        (None, None)
    };
    let energy = fields.as_ref().map(|f| f.summary()).transpose()?;
    if let Some(e) = &energy {
        highlights.insert("energy", json!(e.energy));
    }

    if wants(Analysis::Energy) {
        let (f, e) = (fields.as_ref().expect("energy computed"), energy.as_ref().expect("energy computed"));
        bundle.json("energy.json", "energy", &json!({ "summary": e }))?;
        bundle.bytes("energy_density.csv", f.density.to_csv().as_bytes())?;
        bundle.bytes("det.csv", f.det.to_csv().as_bytes())?;
    }

    if wants(Analysis::MixScale) {
        let s = scan.as_ref().expect("scan computed");
        bundle.json("mix_scale.json", "mix-scale", &json!({ "scan": s }))?;
        bundle.bytes("scan.csv", scan_csv(s).as_bytes())?;
        bundle.bytes("image.csv", image.as_ref().expect("image").to_csv().as_bytes())?;
        verdicts.insert(
            "mix-scale",
            match s.certified_eps {
                Some(e) => format!("certified eps* = {e}"),
                None => "no scale certified".into(),
            },
        );
    }

    if wants(Analysis::VerifyTheorem) {
        let report = assess_theorem(
            constants,
            energy.expect("energy computed"),
            scan.clone().expect("scan computed"),
            map.is_orientation_reversing(),
        );
        violation |= report.status.is_violation();
        verdicts.insert("verify-theorem", status_name(report.status));
        highlights.insert("theorem_margin", json!(report.margin));
        bundle.json("theorem.json", "verify-theorem", &report)?;
    }

    if let (true, Some(f), Some(sw)) = (wants(Analysis::VerifyCorollary), flow, sweep.as_ref()) {
        let (report, conjecture, rows) = bundle.timed("corollary", || -> Result<_, CliError> {
            let near = f.check_near_incompressible(p.incompressibility_res, p.t_samples)?;
            let rhs = corollary_rhs(f, p.grid_res, p.t_samples)?;
            let report = assess_corollary(constants, near, scan.clone().expect("scan computed"), sw, rhs)?;
            let conjecture = conjecture_diagnostic(f, p.grid_res, p.t_samples, report.eps_star)?;
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            let starts: Vec<TorusPoint<f64>> = (0..p.trajectories)
                .map(|_| TorusPoint::new(rng.gen(), rng.gen()))
                .collect::<Result<_, _>>()?;
            let rows = starts
                .into_iter()
                .map(|x0| Ok((x0, f.gronwall_check(x0)?)))
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok((report, conjecture, rows))
        })?;
        let max_residual = rows.iter().map(|r| r.1.max_residual).fold(f64::NEG_INFINITY, f64::max);
        let min_rel_margin = rows
            .iter()
            .map(|r| r.1.integrated_margin / r.1.integrated_bound)
            .fold(f64::INFINITY, f64::min);
        let gronwall_ok = max_residual <= tol::GRONWALL_TOL && min_rel_margin >= -tol::GRONWALL_TOL;
        violation |= report.status.is_violation() || !gronwall_ok;
        verdicts.insert("verify-corollary", status_name(report.status));
        verdicts.insert("gronwall", if gronwall_ok { "holds" } else { "violated" }.into());
        highlights.insert("corollary_rhs", json!(report.rhs));
        highlights.insert("grad_norm_integral", json!(conjecture.grad_norm_integral));
        bundle.json(
            "corollary.json",
            "verify-corollary",
            &json!({
                "report": report,
                "conjecture": conjecture,
                "gronwall": {
                    "trajectories": rows.len(),
                    "max_residual": max_residual,
                    "min_relative_integrated_margin": min_rel_margin,
                    "tolerance": tol::GRONWALL_TOL,
                    "holds": gronwall_ok,
                },
            }),
        )?;
        bundle.bytes("gronwall.csv", gronwall_csv(&rows).as_bytes())?;
    }

    if wants(Analysis::ProofTrace) {
        let eps_max = eps_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let eps = p
            .proof_eps
            .or_else(|| scan.as_ref().and_then(|s| s.certified_eps))
            .unwrap_or(eps_max);
        let params = ProofTraceParams {
            kappa: p.kappa,
            kappa_prime: p.kappa_prime,
            eps,
            s_samples: p.s_samples,
            grid_res: p.grid_res,
            energy_res: p.energy_res,
        };
        let trace = bundle.timed("proof-trace", || proof_trace(map, &params))?;
        violation |= !trace.all_ok;
        verdicts.insert(
            "proof-trace",
            format!("{} ({})", if trace.all_ok { "clean" } else { "margin violated" }, status_mode(&trace)),
        );
        bundle.json("proof_trace.json", "proof-trace", &trace)?;
        bundle.bytes("proof_trace.csv", proof_trace_csv(&trace).as_bytes())?;
    }

    if wants(Analysis::Render) {
        let t = Instant::now();
        let img = image.as_ref().expect("image").to_scalar::<f64>();
        bundle_render(&mut bundle, "image", &img, Style::Indicator)?;
        let density = &fields.as_ref().expect("energy computed").density;
        bundle_render(&mut bundle, "energy_density", density, Style::Heatmap)?;
        bundle.wall_ms.insert("render".into(), t.elapsed().as_secs_f64() * 1e3);
    }

    let exit_code = i32::from(violation);
    let summary = Summary {
        schema: SCHEMA,
        name: config.name.clone(),
        subject: if flow.is_some() { "flow" } else { "map" },
        analyses: config.analyses.clone(),
        seed: options.seed,
        verdicts,
        highlights,
        exit_code,
    };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    bundle.bytes("report.json", text.as_bytes())?;

    let mut files = bundle.files.clone();
    files.push("manifest.json".into());
    let manifest = json!({
        "schema": SCHEMA,
        "name": config.name,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "seed": options.seed,
        "threads": rayon::current_num_threads(),
        "tolerances": tolerances(p.grid_res),
        "wall_time_ms": bundle.wall_ms,
        "files": files,
    });
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(bundle.dir.join("manifest.json"), text)?;
    Ok(RunOutcome { exit_code, out_dir: bundle.dir, summary })
}

fn status_mode(trace: &ProofTrace<f64>) -> String {
    serde_json::to_value(trace.mode).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn bundle_render(
    bundle: &mut Bundle,
    stem: &str,
    field: &torusmix_core::geometry::ScalarField<f64>,
    style: Style,
) -> Result<(), CliError> {
    bundle.bytes(&format!("{stem}.svg"), &render(field, style, Format::Svg))?;
    bundle.bytes(&format!("{stem}.ppm"), &render(field, style, Format::Ppm))
}
