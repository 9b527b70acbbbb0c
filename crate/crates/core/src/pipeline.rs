//! End-to-end runs: fitting along a threshold grid, the Gaussian comparator,
//! the greedy baseline ladder, and their comparison.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::Family;
use crate::data::Dataset;
use crate::dissmann::{fit_dissmann, DissmannConfig};
use crate::error::{Error, Result};
use crate::rvine::{IndependencePattern, RVineMatrix};
use crate::select::RegPathMatrix;
use crate::threshold::ThresholdSpec;
use crate::vine::{self, information_criteria, FittedVine, InformationCriteria, VineFitConfig};

/// Fitted model at one grid point.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub spec: ThresholdSpec,
    pub pattern: IndependencePattern,
    pub vine: FittedVine,
    pub criteria: InformationCriteria,
    pub seconds: f64,
}

/// One grid point's result; failures do not stop the sweep.
#[derive(Debug)]
pub struct SweepOutcome {
    pub spec: ThresholdSpec,
    pub result: Result<SweepPoint>,
}

/// Fits the structure under every threshold of the grid. Grid points that
/// produce the same pattern share a single fit.
pub fn sweep(
    u: &Dataset<f64>,
    m: &RVineMatrix,
    lambda: &RegPathMatrix<f64>,
    specs: &[ThresholdSpec],
    cfg: &VineFitConfig,
) -> Vec<SweepOutcome> {
    let patterns: Vec<Result<IndependencePattern>> = specs
        .iter()
        .map(|s| s.validate().and_then(|_| s.apply(lambda)))
        .collect();
    let mut unique: Vec<IndependencePattern> = Vec::new();
    for p in patterns.iter().flatten() {
        if !unique.contains(p) {
            unique.push(p.clone());
        }
    }
    let run = |p: &IndependencePattern| {
        let start = Instant::now();
        let fit = vine::fit(u, m, p, cfg);
        (fit, start.elapsed().as_secs_f64())
    };
    let fits: Vec<(Result<FittedVine>, f64)> = if cfg.parallel {
        unique.par_iter().map(run).collect()
    } else {
        unique.iter().map(run).collect()
    };
    let by_pattern: HashMap<&IndependencePattern, &(Result<FittedVine>, f64)> = unique.iter().zip(&fits).collect();
    specs
        .iter()
        .zip(patterns)
        .map(|(spec, pattern)| {
            let result = pattern.and_then(|pattern| {
                let (fit, secs) = by_pattern[&pattern];
                match fit {
                    Ok(v) => Ok(SweepPoint {
                        spec: *spec,
                        criteria: information_criteria(v, u.n()),
                        vine: v.clone(),
                        pattern,
                        seconds: *secs,
                    }),
                    Err(e) => Err(Error::Fit {
                        edge: String::new(),
                        msg: e.to_string(),
                    }),
                }
            });
            SweepOutcome { spec: *spec, result }
        })
        .collect()
}

/// Same structure and patterns with every active pair forced Gaussian.
pub fn gaussian_sem_sweep(
    u: &Dataset<f64>,
    m: &RVineMatrix,
    lambda: &RegPathMatrix<f64>,
    specs: &[ThresholdSpec],
    parallel: bool,
) -> Vec<SweepOutcome> {
    let mut cfg = VineFitConfig::default();
    cfg.pair.families = vec![Family::Gaussian];
    cfg.pair.independence_alpha = None;
    cfg.parallel = parallel;
    sweep(u, m, lambda, specs, &cfg)
}

/// Greedy baseline at the given truncation levels plus the full model.
/// Trees up to `k` do not depend on the truncation, so every level is the
/// full fit truncated at `k`.
pub fn dissmann_ladder(
    u: &Dataset<f64>,
    levels: &[usize],
    cfg: &DissmannConfig,
) -> Result<Vec<(Option<usize>, FittedVine, f64)>> {
    let start = Instant::now();
    let full = fit_dissmann(
        u,
        &DissmannConfig {
            truncation: None,
            ..cfg.clone()
        },
    )?;
    let secs = start.elapsed().as_secs_f64();
    let d = u.d();
    let mut out = Vec::new();
    let mut ks: Vec<usize> = levels.iter().copied().filter(|&k| k >= 1 && k + 2 <= d).collect();
    ks.sort_unstable();
    ks.dedup();
    for k in ks {
        out.push((Some(k), full.truncate(k)?, secs));
    }
    out.push((None, full, secs));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lasso,
    GaussianSem,
    Dissmann,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Lasso => "lasso",
            Method::GaussianSem => "gaussian_sem",
            Method::Dissmann => "dissmann",
        })
    }
}

/// One model in a comparison. `knob` names the sparsity setting
/// (`single`, `adaptive`, `truncation` or `full`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: Method,
    pub knob: String,
    pub value: Option<f64>,
    pub p: usize,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub mbic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub method: Method,
    pub knob: String,
    pub value: Option<f64>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub method: Method,
    pub knob: String,
    pub value: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ReportRow>,
    pub failures: Vec<Failure>,
}

impl ComparisonReport {
    /// mBIC-minimal row of a method.
    pub fn best(&self, method: Method) -> Option<&ReportRow> {
        self.rows
            .iter()
            .filter(|r| r.method == method)
            .min_by(|a, b| a.mbic.total_cmp(&b.mbic))
    }
}

pub fn spec_knob(spec: &ThresholdSpec) -> (String, f64) {
    match *spec {
        ThresholdSpec::Single(t) => ("single".into(), t),
        ThresholdSpec::Adaptive(mu) => ("adaptive".into(), mu),
    }
}

pub fn row_of(method: Method, knob: String, value: Option<f64>, ic: &InformationCriteria) -> ReportRow {
    ReportRow {
        method,
        knob,
        value,
        p: ic.n_params,
        loglik: ic.loglik,
        aic: ic.aic,
        bic: ic.bic,
        mbic: ic.mbic,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub thresholds: Vec<ThresholdSpec>,
    pub truncations: Vec<usize>,
    pub vine: VineFitConfig,
    pub include_sem: bool,
    pub include_dissmann: bool,
}

impl CompareConfig {
    fn dissmann(&self) -> DissmannConfig {
        DissmannConfig {
            truncation: None,
            alpha: self.vine.pair.independence_alpha,
            families: self.vine.pair.families.clone(),
            criterion: self.vine.pair.criterion,
            parallel: self.vine.parallel,
        }
    }
}

/// Collects sweep outcomes into report rows and failures.
pub fn absorb(method: Method, outcomes: Vec<SweepOutcome>, report: &mut ComparisonReport, timings: &mut Vec<Timing>) -> Vec<SweepPoint> {
    let mut points = Vec::new();
    for o in outcomes {
        let (knob, value) = spec_knob(&o.spec);
        match o.result {
            Ok(p) => {
                report.rows.push(row_of(method, knob.clone(), Some(value), &p.criteria));
                timings.push(Timing {
                    method,
                    knob,
                    value: Some(value),
                    seconds: p.seconds,
                });
                points.push(p);
            }
            Err(e) => report.failures.push(Failure {
                method,
                knob,
                value: Some(value),
                error: e.to_string(),
            }),
        }
    }
    points
}

/// Runs the Lasso sweep, the Gaussian comparator and the greedy ladder on
/// one dataset. A failing method is recorded and the others still report.
pub fn compare(
    u: &Dataset<f64>,
    m: &RVineMatrix,
    lambda: &RegPathMatrix<f64>,
    cfg: &CompareConfig,
) -> Result<(ComparisonReport, Vec<Timing>)> {
    if cfg.vine.pair.families.is_empty() {
        return Err(Error::Config("empty candidate family set".into()));
    }
    if cfg.thresholds.is_empty() {
        return Err(Error::Config("empty threshold grid".into()));
    }
    let mut report = ComparisonReport::default();
    let mut timings = Vec::new();
    absorb(Method::Lasso, sweep(u, m, lambda, &cfg.thresholds, &cfg.vine), &mut report, &mut timings);
    if cfg.include_sem {
        let sem = gaussian_sem_sweep(u, m, lambda, &cfg.thresholds, cfg.vine.parallel);
        absorb(Method::GaussianSem, sem, &mut report, &mut timings);
    }
    if cfg.include_dissmann {
        match dissmann_ladder(u, &cfg.truncations, &cfg.dissmann()) {
            Ok(ladder) => {
                for (k, v, secs) in ladder {
                    let (knob, value) = match k {
                        Some(k) => ("truncation".to_string(), Some(k as f64)),
                        None => ("full".to_string(), None),
                    };
                    let ic = information_criteria(&v, u.n());
                    report.rows.push(row_of(Method::Dissmann, knob.clone(), value, &ic));
                    timings.push(Timing {
                        method: Method::Dissmann,
                        knob,
                        value,
                        seconds: secs,
                    });
                }
            }
            Err(e) => report.failures.push(Failure {
                method: Method::Dissmann,
                knob: "all".into(),
                value: None,
                error: e.to_string(),
            }),
        }
    }
    Ok((report, timings))
}

/// Step-function data of a column regularization path: at each entry λ of
/// column `j`, the number of regressors active for penalties at or below it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    pub column: usize,
    pub tree: usize,
    pub partner: usize,
    pub lambda: f64,
    pub active: usize,
}

pub fn column_path_steps(m: &RVineMatrix, lambda: &RegPathMatrix<f64>) -> Vec<PathStep> {
    let d = m.d();
    let mut out = Vec::new();
    for j in 1..d {
        let mut entries: Vec<(usize, f64)> = (1..=d - j).map(|t| (t, lambda.get(d - t + 1, j))).collect();
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (k, (t, l)) in entries.into_iter().enumerate() {
            out.push(PathStep {
                column: j,
                tree: t,
                partner: m.get(d - t + 1, j),
                lambda: l,
                active: k + 1,
            });
        }
    }
    out
}
