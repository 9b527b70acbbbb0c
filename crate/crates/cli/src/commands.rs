use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vinelasso::data::{read_csv, Scale};
use vinelasso::pipeline::{self, column_path_steps, compare, spec_knob, CompareConfig, ComparisonReport, Method};
use vinelasso::select::{lasso_ordering, select_structure};
use vinelasso::vine::{self, information_criteria, InformationCriteria};
use vinelasso::{Dataset, Error, FittedVine, Result, Selection};

use crate::config::{RunConfig, Stage};
use crate::output::{slug, write_atomic, write_csv, write_json};

/// Copula-scale and normal-score versions of the input.
pub struct Data {
    pub u: Dataset,
    pub z: Dataset,
}

pub fn load_data(cfg: &RunConfig) -> Result<Data> {
    let path = cfg.input()?;
    let file = std::fs::File::open(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    let raw: Dataset = read_csv(file, cfg.header)?;
    let u = match cfg.scale {
        Scale::X => raw.to_pseudo_observations()?,
        Scale::U => raw.with_scale(Scale::U)?,
        Scale::Z => raw.with_scale(Scale::Z)?.to_u_scale()?,
    };
    let z = u.to_z_scale()?;
    Ok(Data { u, z })
}

fn out(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output.join(name)
}

pub fn write_resolved(cfg: &RunConfig) -> Result<()> {
    write_json(&out(cfg, "config.resolved.json"), cfg)
}

pub fn prepare(cfg: &RunConfig) -> Result<()> {
    let data = load_data(cfg)?;
    let mut u = Vec::new();
    data.u.write_csv(&mut u)?;
    write_atomic(&out(cfg, "u.csv"), &u)?;
    let mut z = Vec::new();
    data.z.write_csv(&mut z)?;
    write_atomic(&out(cfg, "z.csv"), &z)?;
    eprintln!("prepared {} x {} observations", data.u.n(), data.u.d());
    Ok(())
}

pub fn order(cfg: &RunConfig) -> Result<()> {
    let data = load_data(cfg)?;
    if data.z.d() < 3 {
        let eta: Vec<usize> = (1..=data.z.d()).collect();
        return write_json(&out(cfg, "order.json"), &serde_json::json!({ "eta": eta }));
    }
    let ord = lasso_ordering(&data.z, &cfg.selection())?;
    write_json(&out(cfg, "order.json"), &ord)
}

fn run_selection(cfg: &RunConfig, data: &Data) -> Result<Selection> {
    let sel = select_structure(&data.z, &cfg.selection())?;
    write_atomic(&out(cfg, "structure.json"), sel.to_json()?.as_bytes())?;
    write_csv(&out(cfg, "path_steps.csv"), &column_path_steps(&sel.matrix, &sel.lambda))?;
    Ok(sel)
}

pub fn select(cfg: &RunConfig) -> Result<()> {
    let data = load_data(cfg)?;
    let sel = run_selection(cfg, &data)?;
    eprintln!(
        "selected structure on d = {} with {} proximity failures resolved",
        sel.matrix.d(),
        sel.pcf_log.len()
    );
    Ok(())
}

/// Reuses the structure artifact if one is given or already present in the
/// output directory, and runs the selection otherwise.
fn structure(cfg: &RunConfig, data: &Data) -> Result<Selection> {
    let existing = cfg.structure.clone().or_else(|| {
        let p = out(cfg, "structure.json");
        p.exists().then_some(p)
    });
    let sel = match existing {
        Some(p) => Selection::from_json(&std::fs::read_to_string(&p)?)?,
        None => return run_selection(cfg, data),
    };
    if sel.matrix.d() != data.u.d() {
        return Err(Error::Shape(format!(
            "structure has d = {} but data has d = {}",
            sel.matrix.d(),
            data.u.d()
        )));
    }
    Ok(sel)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaRow {
    pub mode: String,
    pub value: f64,
    pub file: String,
    pub p: usize,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub mbic: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRow {
    pub mode: String,
    pub value: f64,
    pub error: String,
}

fn model_name(k: usize, mode: &str, value: f64) -> String {
    format!("models/point_{k:03}_{mode}_{}.json", slug(value))
}

pub fn sweep(cfg: &RunConfig) -> Result<()> {
    let specs = cfg.require_grid()?;
    let data = load_data(cfg)?;
    let sel = structure(cfg, &data)?;
    let outcomes = pipeline::sweep(&data.u, &sel.matrix, &sel.lambda, &specs, &cfg.vine());
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (k, o) in outcomes.into_iter().enumerate() {
        let (mode, value) = spec_knob(&o.spec);
        match o.result {
            Ok(point) => {
                let file = model_name(k + 1, &mode, value);
                write_atomic(&out(cfg, &file), point.vine.to_json()?.as_bytes())?;
                let ic = &point.criteria;
                rows.push(CriteriaRow {
                    mode,
                    value,
                    file,
                    p: ic.n_params,
                    loglik: ic.loglik,
                    aic: ic.aic,
                    bic: ic.bic,
                    mbic: ic.mbic,
                    seconds: point.seconds,
                });
            }
            Err(e) => {
                eprintln!("grid point {mode} {value}: {e}");
                failures.push(FailureRow {
                    mode,
                    value,
                    error: e.to_string(),
                });
            }
        }
    }
    write_csv(&out(cfg, "criteria.csv"), &rows)?;
    write_csv(&out(cfg, "failures.csv"), &failures)?;
    write_csv(&out(cfg, "path_steps.csv"), &column_path_steps(&sel.matrix, &sel.lambda))?;
    eprintln!("{} of {} grid points fitted", rows.len(), specs.len());
    Ok(())
}

#[derive(Debug, Serialize)]
struct FitReport<'a> {
    mode: &'a str,
    value: f64,
    criteria: &'a InformationCriteria,
}

/// Fits the first threshold of the grid.
pub fn fit(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.require_grid()?[0];
    let data = load_data(cfg)?;
    let sel = structure(cfg, &data)?;
    let pattern = spec.apply(&sel.lambda)?;
    let v = vine::fit(&data.u, &sel.matrix, &pattern, &cfg.vine())?;
    write_atomic(&out(cfg, "model.json"), v.to_json()?.as_bytes())?;
    let ic = information_criteria(&v, data.u.n());
    let (mode, value) = spec_knob(&spec);
    write_json(
        &out(cfg, "model_criteria.json"),
        &FitReport {
            mode: &mode,
            value,
            criteria: &ic,
        },
    )?;
    eprintln!("fitted {} parameters, loglik {:.4}, mBIC {:.4}", ic.n_params, ic.loglik, ic.mbic);
    Ok(())
}

pub fn simulate(cfg: &RunConfig) -> Result<()> {
    let path = cfg
        .model
        .clone()
        .ok_or_else(|| Error::Config("simulate needs --model".into()))?;
    let v = FittedVine::from_json(&std::fs::read_to_string(&path)?)?;
    let u = vine::simulate(&v, cfg.n_sim, cfg.stage_seed(Stage::Simulation))?;
    let mut bytes = Vec::new();
    u.write_csv(&mut bytes)?;
    write_atomic(&out(cfg, "simulated.csv"), &bytes)
}

pub fn compare_cmd(cfg: &RunConfig) -> Result<()> {
    let thresholds = cfg.require_grid()?;
    let data = load_data(cfg)?;
    let sel = structure(cfg, &data)?;
    let cc = CompareConfig {
        thresholds,
        truncations: cfg.truncations.clone(),
        vine: cfg.vine(),
        include_sem: cfg.include_sem,
        include_dissmann: cfg.include_dissmann && data.u.d() >= 3,
    };
    let (report, timings) = compare(&data.u, &sel.matrix, &sel.lambda, &cc)?;
    write_csv(&out(cfg, "report.csv"), &report.rows)?;
    write_json(&out(cfg, "report.json"), &report)?;
    write_csv(&out(cfg, "timings.csv"), &timings)?;
    for f in &report.failures {
        eprintln!("{} {} failed: {}", f.method, f.knob, f.error);
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SummaryRow {
    method: Method,
    models: usize,
    best_knob: String,
    best_value: Option<f64>,
    best_p: usize,
    best_bic: f64,
    best_mbic: f64,
}

/// Summarizes `report.json`: the mBIC-best model of each method.
pub fn report(cfg: &RunConfig) -> Result<()> {
    let path: &Path = &out(cfg, "report.json");
    let report: ComparisonReport = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let mut rows = Vec::new();
    for method in [Method::Lasso, Method::GaussianSem, Method::Dissmann] {
        if let Some(b) = report.best(method) {
            rows.push(SummaryRow {
                method,
                models: report.rows.iter().filter(|r| r.method == method).count(),
                best_knob: b.knob.clone(),
                best_value: b.value,
                best_p: b.p,
                best_bic: b.bic,
                best_mbic: b.mbic,
            });
        }
    }
    println!("{:<14} {:>6} {:>11} {:>12} {:>6} {:>14} {:>14}", "method", "models", "knob", "value", "p", "BIC", "mBIC");
    for r in &rows {
        let value = r.best_value.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
        println!(
            "{:<14} {:>6} {:>11} {:>12} {:>6} {:>14.3} {:>14.3}",
            r.method.to_string(),
            r.models,
            r.best_knob,
            value,
            r.best_p,
            r.best_bic,
            r.best_mbic
        );
    }
    write_csv(&out(cfg, "summary.csv"), &rows)
}
