//! One function per subcommand, each returning the reports to emit.

use std::f64::consts::{E, PI};
use std::path::{Path, PathBuf};

use serde_json::json;

use carnot_lw::brascamp_lieb::{
    corank_linearized_datum, lw_datum, pair_deletion_datum, BLDatum, BLOptions, BLOutcome,
};
use carnot_lw::density::presets::Preset;
use carnot_lw::density::{Axis, GridDensity};
use carnot_lw::group::CorankGroup;
use carnot_lw::harness::{
    corank_constants, euclidean_constants, inputs, isoperimetric_check, level_set_check, product_combine_line,
    proof_chain_checks, proof_chain_source, sobolev_check as run_sobolev, tolerance, verify_lw,
    verify_nonlinear_lw, verify_set_lw, LevelSetOptions, Raster, Report, ScaledData,
};
use carnot_lw::radon::{estimate_radon_norm_lb, TestFunction};

use crate::{parse_group, Failure, Outcome};

fn input_err(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn parse_datum(spec: &str) -> Result<BLDatum, Failure> {
    let count = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| input_err(format!("expected a count in '{spec}'")))
    };
    let datum = if let Some(k) = spec.strip_prefix("lw:") {
        lw_datum(count(k)?)?
    } else if let Some(n) = spec.strip_prefix("pair:") {
        pair_deletion_datum(count(n)?)?
    } else if let Some(g) = spec.strip_prefix("corank:") {
        corank_linearized_datum(&parse_group(g).map_err(input_err)?)?
    } else {
        let text = std::fs::read_to_string(spec).map_err(|e| input_err(format!("cannot read datum '{spec}': {e}")))?;
        BLDatum::from_json(&text)?
    };
    Ok(datum)
}

pub fn bl_constant(spec: &str, iters: usize, starts: usize, seed: u64) -> Result<Outcome, Failure> {
    let datum = parse_datum(spec)?;
    let opts = BLOptions {
        iters,
        starts,
        seed,
        ..BLOptions::default()
    };
    let geometric = datum.check_geometric();
    match datum.bl_constant(&opts) {
        BLOutcome::Finite {
            estimate, converged, ..
        } => {
            // for a geometric datum the constant is exactly 1, so any estimate above it is a violation
            let report = if geometric {
                Report::new("bl-constant", estimate, 1.0, 1e-6)
            } else {
                Report::new("bl-constant", estimate, estimate, 0.0)
            };
            Ok(Outcome {
                reports: vec![report
                    .with("geometric", geometric)
                    .with("converged", converged)
                    .with("datum", spec)],
                lines: vec![format!("BL estimate {estimate:.10} (converged: {converged}, geometric: {geometric})")],
            })
        }
        BLOutcome::Infinite { reason, detail } => Ok(Outcome {
            reports: Vec::new(),
            lines: vec![format!("BL constant is infinite: {reason:?} ({detail})")],
        }),
    }
}

fn read_inputs(paths: &[PathBuf], expected: usize) -> Result<Vec<GridDensity>, Failure> {
    if paths.len() != expected {
        return Err(input_err(format!("expected {expected} input files, got {}", paths.len())));
    }
    paths
        .iter()
        .map(|p| GridDensity::read_file(p).map_err(Failure::from))
        .collect()
}

pub fn lw_verify(
    g: &CorankGroup,
    preset: &str,
    files: &[PathBuf],
    res: usize,
    seed: u64,
    r_norm: f64,
    nonlinear: bool,
) -> Result<Outcome, Failure> {
    let m = g.horizontal_dim() + nonlinear as usize;
    let fs = if !files.is_empty() {
        read_inputs(files, m)?
    } else if preset == "random" {
        if nonlinear {
            inputs::nonlinear_inputs(g, res, seed)?
        } else {
            inputs::lw_inputs(g, res, seed)?
        }
    } else {
        let f = preset.parse::<Preset>()?.build(g.horizontal_dim(), res)?;
        vec![f; m]
    };
    let report = if nonlinear {
        verify_nonlinear_lw(g, &fs)?
    } else {
        verify_lw(g, &fs, r_norm)?
    };
    Ok(Outcome {
        reports: vec![report.with("res", res).with("inputs", if files.is_empty() { preset } else { "files" })],
        lines: Vec::new(),
    })
}

pub fn set_lw(g: &CorankGroup, set: &str, res: usize, seed: u64, r_norm: f64) -> Result<Outcome, Failure> {
    let k = g.topo_dim();
    let e = match set {
        "random" => inputs::random_set(g, res, seed)?,
        "cube" => Raster::from_fn(vec![Axis::new(-0.25, 1.25, res)?; k], |p| {
            p.iter().all(|x| (0.0..=1.0).contains(x))
        })?,
        "ball" => Raster::from_fn(vec![Axis::centered(1.0, res)?; k], |p| {
            p.iter().map(|x| x * x).sum::<f64>() <= 0.36
        })?,
        other => return Err(input_err(format!("unknown set '{other}' (expected random, cube or ball)"))),
    };
    Ok(Outcome {
        reports: vec![verify_set_lw(g, &e, r_norm)?.with("set", set).with("res", res)],
        lines: Vec::new(),
    })
}

/// `S = ∫ f ln f` of the presets, where known in closed form, with whether the
/// density is smooth.
fn preset_entropy(p: Preset, k: usize) -> (f64, bool) {
    let gauss = -0.5 * (2.0 * PI * E).ln();
    match p {
        Preset::Gaussian => (k as f64 * gauss, true),
        Preset::UniformBox => (-(k as f64) * 2f64.ln(), false),
        Preset::Product => ((k - 1) as f64 * gauss - 2f64.ln(), false),
        Preset::Triangle => (2f64.ln(), false),
    }
}

pub fn entropy_check(preset: &str, input: Option<&Path>, dim: usize, res: usize) -> Result<Outcome, Failure> {
    let (f, exact) = match input {
        Some(path) => (GridDensity::read_file(path)?.normalize()?, None),
        None => {
            let p: Preset = preset.parse()?;
            (p.build(dim, res)?, Some(preset_entropy(p, dim)))
        }
    };
    let s = f.entropy()?;
    let h = f.max_h();
    let k = f.k();
    let mut reports = Vec::new();
    if let Some((value, smooth)) = exact {
        let tol = if smooth {
            tolerance::entropy(h, k as f64)
        } else {
            tolerance::raster(h, k as f64)
        };
        reports.push(
            Report::new("entropy-closed-form", (s - value).abs(), 0.0, tol)
                .with("entropy", s)
                .with("exact", value),
        );
    }
    if k >= 2 {
        let rest: Vec<usize> = (1..k).collect();
        let sx = f.marginal(&[0])?.entropy()?;
        let sy = f.marginal(&rest)?.entropy()?;
        // S(X) + S(Y) ≤ S(X, Y) holds exactly for grid marginals
        reports.push(Report::new("subadditivity", sx + sy, s, 1e-9));
        let residual = f.chain_rule_residual(&[0])?;
        reports.push(Report::new("chain-rule", residual, 0.0, CHAIN_RULE_TOL));
    }
    Ok(Outcome {
        reports: reports.into_iter().map(|r| r.with("res", json!(f.res()))).collect(),
        lines: vec![format!("S(f) = {s:.8}")],
    })
}

/// Residual allowed in the chain rule, matching the resolution-256 triangle bound.
const CHAIN_RULE_TOL: f64 = 5e-3;

pub fn proof_chain(
    g: &CorankGroup,
    res: usize,
    half: f64,
    sigma: f64,
    sigma_t: f64,
    r_norm: f64,
) -> Result<Outcome, Failure> {
    let src = proof_chain_source(g, res, half, sigma, sigma_t)?;
    let chain = proof_chain_checks(g, &src, r_norm)?;
    Ok(Outcome {
        reports: chain.reports,
        lines: chain.notes.iter().map(|n| format!("note: {n}")).collect(),
    })
}

pub fn radon_norm(family: &str, res: usize, seed: u64, r_norm: f64) -> Result<Outcome, Failure> {
    let names: Vec<&str> = family.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let fam = TestFunction::family(&names, seed)?;
    let est = estimate_radon_norm_lb(&fam, res)?;
    let line = json!({"lb": est.lb, "argmax_descriptor": est.best.describe()}).to_string();
    let ratios: Vec<_> = fam
        .iter()
        .zip(&est.ratios)
        .map(|(f, r)| json!({"function": f.describe(), "ratio": r}))
        .collect();
    // the configured norm must dominate every computed lower bound
    let report = Report::new("radon-norm-lb", est.lb, r_norm, 0.0)
        .with("argmax", est.best.describe())
        .with("ratios", ratios)
        .with("res", res);
    Ok(Outcome {
        reports: vec![report],
        lines: vec![line],
    })
}

enum Factor {
    Data(ScaledData),
    Line,
}

fn parse_factor(name: &str) -> Result<Factor, Failure> {
    if name == "line" {
        return Ok(Factor::Line);
    }
    if let Some(k) = name.strip_prefix('r').and_then(|k| k.parse::<usize>().ok()) {
        return Ok(Factor::Data(euclidean_constants(k)?));
    }
    Ok(Factor::Data(corank_constants(&parse_group(name).map_err(input_err)?)))
}

fn join(v: &[impl std::fmt::Display]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

pub fn product_combine(left: &str, right: &str, r_norm: f64) -> Result<Outcome, Failure> {
    let sd = match (parse_factor(left)?, parse_factor(right)?) {
        (Factor::Data(a), Factor::Data(b)) => carnot_lw::harness::product_combine(&a, &b)?,
        (Factor::Data(a), Factor::Line) | (Factor::Line, Factor::Data(a)) => product_combine_line(&a)?,
        (Factor::Line, Factor::Line) => return Err(input_err("at least one factor must be a group or r<k>")),
    };
    let mut lines = vec![
        format!("c = [{}]", join(sd.c())),
        format!("exponents = [{}]", join(&sd.exponents())),
        format!("D = {}", sd.d()),
        format!("D(r_norm = {r_norm}) = {:.10}", sd.d().value(r_norm)),
    ];
    let mut reports = Vec::new();
    if let Some(q) = sd.q() {
        lines.push(format!("Q = {q}"));
        let q = q as f64;
        let sum = sd.sum_c();
        let sum = *sum.numer() as f64 / *sum.denom() as f64;
        reports.push(Report::new("sum-c", sum, q / (q - 1.0), 1e-12).with("sum_c", sd.sum_c().to_string()));
    }
    lines.push(sd.to_json(r_norm).to_string());
    Ok(Outcome { reports, lines })
}

pub fn sobolev_check(
    g: &CorankGroup,
    res: usize,
    half: f64,
    sigma: f64,
    sigma_t: f64,
    r_norm: f64,
) -> Result<Outcome, Failure> {
    let f = inputs::gaussian_bump(g, res, half, sigma, sigma_t, 1.0)?;
    let mut reports = level_set_check(g, &f, LevelSetOptions::default())?;
    reports.push(run_sobolev(g, &f, r_norm)?);
    Ok(Outcome {
        reports: reports.into_iter().map(|r| r.with("res", res)).collect(),
        lines: Vec::new(),
    })
}

pub fn iso_check(g: &CorankGroup, res: usize, radius: f64, width: f64, r_norm: f64) -> Result<Outcome, Failure> {
    let e = Raster::from_fn(vec![Axis::centered(1.0, res)?; g.topo_dim()], |p| {
        p.iter().map(|x| x * x).sum::<f64>() <= radius * radius
    })?;
    Ok(Outcome {
        reports: vec![isoperimetric_check(g, &e, width, r_norm)?.with("radius", radius).with("res", res)],
        lines: Vec::new(),
    })
}
