//! The sub-commands: each writes its CSV plus `manifest.json`.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use meandense_core::estimate::{self, Query, SimulationPlan, StudyPlan};
use meandense_core::exact::{capacity_sweep, density_field};
use meandense_core::exec::Executor;
use meandense_core::grains::Grain;
use meandense_core::minkowski::{bound_check, content_limit, MinkowskiRun};
use meandense_core::{derive_seed, derive_stream, BooleanRealization, MarkDistribution, RegularityCertificate};
use serde_json::{json, Value};

use crate::config::{Bandwidth, Grid, ScenarioConfig};
use crate::error::CliError;
use crate::output::{coord_header, coords, header, num, write_json, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Exact,
    Estimate,
    Study,
    Minkowski,
    Simulate,
    Oracle,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Exact => "exact",
            Command::Estimate => "estimate",
            Command::Study => "study",
            Command::Minkowski => "minkowski",
            Command::Simulate => "simulate",
            Command::Oracle => "oracle",
        }
    }
}

/// Seed used when neither the command line nor the config sets one.
pub const DEFAULT_SEED: u64 = 0;

const EXACT_STREAM: u64 = 1;
const STUDY_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub results: Value,
}

/// Runs one sub-command and writes its artifacts into `out`.
pub fn run<E: Executor>(
    command: Command,
    cfg: &ScenarioConfig,
    seed: u64,
    out: &Path,
    exec: &E,
) -> Result<RunSummary, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let (mut files, results) = match command {
        Command::Exact => exact(cfg, seed, out, exec)?,
        Command::Estimate => estimate(cfg, seed, out, exec)?,
        Command::Study => study(cfg, seed, out, exec)?,
        Command::Minkowski => minkowski(cfg, seed, out, exec)?,
        Command::Simulate => simulate(cfg, seed, out)?,
        Command::Oracle => oracle(cfg, seed, out, exec)?,
    };
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let names: Vec<String> = files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let manifest = json!({
        "subcommand": command.name(),
        "scenario_id": cfg.scenario_id,
        "seed": seed,
        "versions": {
            "meandense": env!("CARGO_PKG_VERSION"),
            "meandense-core": meandense_core::VERSION,
        },
        "config": serde_json::to_value(&cfg.echo).expect("config values serialize"),
        "outputs": names,
        "results": results,
        "created_unix": created,
    });
    files.push(write_json(out.join("manifest.json"), &manifest)?);
    Ok(RunSummary { files, results })
}

fn need<'a, T>(v: &'a Option<T>, key: &str, command: Command) -> Result<&'a T, CliError> {
    v.as_ref()
        .ok_or_else(|| CliError::Usage(format!("`{}` requires the config key `{key}`", command.name())))
}

type Artifacts = (Vec<PathBuf>, Value);

fn exact<E: Executor>(cfg: &ScenarioConfig, seed: u64, out: &Path, exec: &E) -> Result<Artifacts, CliError> {
    let grid = need(&cfg.grid, "grid.kind", Command::Exact)?;
    let field = density_field(exec, &cfg.scenario, &grid.points, cfg.mark_draws as usize, seed)?;
    let mut h = coord_header("x", cfg.dim);
    h.extend(header(&["value", "standard_error", "method"]));
    let mut t = Table::create(out.join("density.csv"), &h)?;
    for (p, v, se) in field.rows() {
        let mut row = coords(p);
        row.extend([num(v), num(se), field.method().as_str().to_string()]);
        t.row(&row)?;
    }
    Ok((vec![t.finish()?], json!({ "points": field.len(), "method": field.method().as_str() })))
}

fn estimate<E: Executor>(cfg: &ScenarioConfig, seed: u64, out: &Path, exec: &E) -> Result<Artifacts, CliError> {
    let grid = need(&cfg.grid, "grid.kind", Command::Estimate)?;
    let window = need(&cfg.window, "window.lo", Command::Estimate)?;
    let n = *need(&cfg.n, "N", Command::Estimate)?;
    let r = cfg.bandwidth.radius(n);
    let plan = SimulationPlan::new(cfg.scenario.clone(), *window, r)?;
    let queries: Vec<Query> = grid.points.iter().map(|x| Query { x: *x, r }).collect();
    let tally = estimate::tally(exec, &plan, &queries, n, seed)?;
    let mut h = coord_header("x", cfg.dim);
    h.extend(header(&["N", "R_N", "lambda_hat", "se", "count_estimate", "count_se"]));
    let mut t = Table::create(out.join("estimate.csv"), &h)?;
    for k in 0..queries.len() {
        let rep = plan.report(&tally, &queries, k);
        let (c, cse) = plan.count_estimate(&tally, &queries, k);
        let mut row = coords(&rep.x);
        row.extend([n.to_string(), num(r), num(rep.lambda_hat), num(rep.std_error), num(c), num(cse)]);
        t.row(&row)?;
    }
    Ok((vec![t.finish()?], json!({ "N": n, "R_N": r, "points": queries.len() })))
}

fn study<E: Executor>(cfg: &ScenarioConfig, seed: u64, out: &Path, exec: &E) -> Result<Artifacts, CliError> {
    let grid: &Grid = need(&cfg.grid, "grid.kind", Command::Study)?;
    let window = need(&cfg.window, "window.lo", Command::Study)?;
    let n_grid = need(&cfg.n_grid, "N_grid", Command::Study)?;
    let replications = *need(&cfg.replications, "replications", Command::Study)?;
    let Bandwidth::Schedule(schedule) = cfg.bandwidth else {
        return Err(CliError::Usage(
            "`study` needs a bandwidth schedule (bandwidth.c0, bandwidth.beta), not a fixed bandwidth.r".into(),
        ));
    };
    let exact = density_field(
        exec,
        &cfg.scenario,
        &grid.points,
        cfg.mark_draws as usize,
        derive_seed(seed, EXACT_STREAM),
    )?;
    let plan = StudyPlan {
        scenario: cfg.scenario.clone(),
        x_grid: grid.points.clone(),
        exact: exact.values().to_vec(),
        cell_volume: grid.cell_volume,
        schedule,
        n_grid: n_grid.clone(),
        replications,
    };
    let table = estimate::convergence_study(exec, &plan, window, derive_seed(seed, STUDY_STREAM))?;

    let mut h = header(&["scenario_id"]);
    h.extend(coord_header("x", cfg.dim));
    h.extend(header(&["N", "R_N", "lambda_hat", "se", "exact", "bias", "variance", "mse"]));
    let mut t = Table::create(out.join("study.csv"), &h)?;
    for row in &table.rows {
        let mut cells = vec![cfg.scenario_id.clone()];
        cells.extend(coords(&row.x));
        cells.extend([
            row.n.to_string(),
            num(row.radius),
            num(row.lambda_hat),
            num(row.std_error),
            num(row.exact),
            num(row.bias),
            num(row.variance),
            num(row.mse),
        ]);
        t.row(&cells)?;
    }
    let mut files = vec![t.finish()?];
    if !table.region.is_empty() {
        let h = header(&["scenario_id", "N", "estimated", "exact", "relative_error"]);
        let mut t = Table::create(out.join("study_region.csv"), &h)?;
        for r in &table.region {
            t.row(&[
                cfg.scenario_id.clone(),
                r.n.to_string(),
                num(r.estimated),
                num(r.exact),
                num(r.relative_error),
            ])?;
        }
        files.push(t.finish()?);
    }
    Ok((files, json!({ "rows": table.rows.len(), "N_grid": n_grid, "replications": replications })))
}

fn minkowski<E: Executor>(cfg: &ScenarioConfig, seed: u64, out: &Path, exec: &E) -> Result<Artifacts, CliError> {
    let MarkDistribution::Deterministic(set) = &cfg.scenario.marks else {
        return Err(CliError::Usage(
            "`minkowski` needs a deterministic set: marks.kind = \"deterministic\"".into(),
        ));
    };
    let run = MinkowskiRun::execute(
        exec,
        set.clone(),
        cfg.scenario.intensity.clone(),
        cfg.minkowski.r_grid.clone(),
        cfg.minkowski.mc_points as usize,
        seed,
    )?;
    let limit = content_limit(&run)?;
    let cert = RegularityCertificate::for_marks(&cfg.scenario.marks);
    let bound = bound_check(&run, &cert)?;
    let h = header(&["r", "ratio", "se", "bound", "target", "limit_estimate"]);
    let mut t = Table::create(out.join("minkowski.csv"), &h)?;
    for (r, e) in run.r_grid.iter().zip(&run.ratios) {
        t.row(&[num(*r), num(e.value), num(e.std_error), num(bound.bound), num(run.target), num(limit.limit.value)])?;
    }
    let results = json!({
        "target": run.target,
        "limit_estimate": limit.limit.value,
        "limit_se": limit.limit.std_error,
        "abs_error": limit.abs_error,
        "within_band": limit.within_band,
        "bound": bound.bound,
        "bound_holds": bound.holds,
        "worst_margin": bound.worst_margin,
    });
    Ok((vec![t.finish()?], results))
}

fn simulate(cfg: &ScenarioConfig, seed: u64, out: &Path) -> Result<Artifacts, CliError> {
    let window = need(&cfg.window, "window.lo", Command::Simulate)?;
    let real = BooleanRealization::simulate(&cfg.scenario, window, 0.0, &mut derive_stream(seed, 0))?;
    let mut h = header(&["grain", "kind"]);
    h.extend(coord_header("germ", cfg.dim));
    h.extend(header(&["measure", "vertices"]));
    let mut t = Table::create(out.join("realization.csv"), &h)?;
    for (i, p) in real.placed_grains().iter().enumerate() {
        let kind = match p.grain {
            Grain::Point { .. } => "point",
            Grain::Segment { .. } => "segment",
            Grain::Polyline { .. } => "polyline",
        };
        let vertices = vertex_list(&p.grain, &p.germ);
        let mut row = vec![i.to_string(), kind.to_string()];
        row.extend(coords(&p.germ));
        row.extend([num(p.grain.hn_measure()), vertices]);
        t.row(&row)?;
    }
    let results = json!({
        "grains": real.len(),
        "guard_margin": real.guard_margin(),
    });
    Ok((vec![t.finish()?], results))
}

/// Absolute vertex coordinates, `;` between vertices and ` ` between coordinates.
fn vertex_list(g: &Grain, germ: &meandense_core::Point) -> String {
    let fmt = |p: &meandense_core::Point| coords(p).join(" ");
    match g {
        Grain::Point { .. } => fmt(germ),
        Grain::Segment { length, direction } => {
            format!("{};{}", fmt(germ), fmt(&(*germ + *direction * *length)))
        }
        Grain::Polyline { vertices } => vertices
            .iter()
            .map(|v| fmt(&(*germ + *v)))
            .collect::<Vec<_>>()
            .join(";"),
    }
}

fn oracle<E: Executor>(cfg: &ScenarioConfig, seed: u64, out: &Path, exec: &E) -> Result<Artifacts, CliError> {
    let grid = need(&cfg.grid, "grid.kind", Command::Oracle)?;
    let radii = &cfg.oracle.r_grid;
    let sweep = capacity_sweep(exec, &cfg.scenario, &grid.points, radii, cfg.oracle.mc_points as usize, seed)?;
    let mut h = coord_header("x", cfg.dim);
    h.extend(header(&["r", "lambda", "lambda_se", "probability", "probability_se", "ratio", "ratio_se"]));
    let mut t = Table::create(out.join("oracle.csv"), &h)?;
    for (k, cp) in sweep.iter().enumerate() {
        let p = &grid.points[k / radii.len()];
        let r = radii[k % radii.len()];
        let norm = cfg.scenario.normalizer(r);
        let mut row = coords(p);
        row.extend([
            num(r),
            num(cp.lambda.value),
            num(cp.lambda.std_error),
            num(cp.probability.value),
            num(cp.probability.std_error),
            num(cp.probability.value / norm),
            num(cp.probability.std_error / norm),
        ]);
        t.row(&row)?;
    }
    Ok((vec![t.finish()?], json!({ "points": grid.points.len(), "radii": radii })))
}
