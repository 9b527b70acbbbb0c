//! Sequential estimation of a vine copula on a fixed structure, its
//! likelihood and information criteria, truncation and simulation.

mod criteria;
mod simulate;

pub use criteria::{information_criteria, InformationCriteria};
pub use simulate::simulate;

use std::collections::HashMap;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{fit_pair, IndependenceTest, PairCopula, PairFitConfig};
use crate::data::{Dataset, Scale};
use crate::error::{Error, Result};
use crate::rvine::{Edge, IndependencePattern, RVineMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VineFitConfig {
    /// Candidate families, criterion and independence level for each pair.
    pub pair: PairFitConfig,
    pub parallel: bool,
}

impl Default for VineFitConfig {
    fn default() -> Self {
        VineFitConfig {
            pair: PairFitConfig::default(),
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeStatus {
    /// The pattern sets this edge to independence.
    Pattern,
    /// Independence retained by the test.
    Test,
    Fitted,
    /// Removed by truncation after fitting.
    Truncated,
}

/// Per-edge record of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub tree: usize,
    pub column: usize,
    pub label: String,
    pub copula: PairCopula,
    pub loglik: f64,
    pub status: EdgeStatus,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub statistic: Option<f64>,
}

/// Vine copula with fitted pair copulas.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedVine {
    structure: RVineMatrix,
    copulas: Vec<PairCopula>,
    loglik: f64,
    n_obs: usize,
    edges: Vec<EdgeRecord>,
}

impl FittedVine {
    /// Builds a vine from given pair copulas, laid out like the structure
    /// (`copulas[i][j]` for row `i + 1`, column `j + 1`). The log-likelihood
    /// is zero until [`recompute_loglik`](Self::recompute_loglik) is called.
    pub fn from_copulas(structure: RVineMatrix, rows: Vec<Vec<PairCopula>>) -> Result<Self> {
        let d = structure.d();
        if rows.len() != d || rows.iter().enumerate().any(|(i, r)| r.len() != i) {
            return Err(Error::Shape("copula rows must form a lower triangle of the structure size".into()));
        }
        let mut copulas = vec![PairCopula::independence(); d * d];
        let mut edges = Vec::new();
        for t in 1..d {
            for j in 1..=d - t {
                let c = rows[d - t][j - 1];
                c.check()?;
                copulas[idx(d, d - t + 1, j)] = c;
                edges.push(EdgeRecord {
                    tree: t,
                    column: j,
                    label: structure.edge(t, j).to_string(),
                    copula: c,
                    loglik: 0.0,
                    status: if c.is_independence() {
                        EdgeStatus::Pattern
                    } else {
                        EdgeStatus::Fitted
                    },
                    tau: None,
                    statistic: None,
                });
            }
        }
        Ok(FittedVine {
            structure,
            copulas,
            loglik: 0.0,
            n_obs: 0,
            edges,
        })
    }

    pub fn structure(&self) -> &RVineMatrix {
        &self.structure
    }

    pub fn d(&self) -> usize {
        self.structure.d()
    }

    /// Pair copula of the tree-`t` edge in column `j`.
    pub fn copula(&self, t: usize, j: usize) -> &PairCopula {
        &self.copulas[idx(self.d(), self.d() - t + 1, j)]
    }

    pub fn loglik(&self) -> f64 {
        self.loglik
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    /// Free parameters; Student t counts two.
    pub fn n_params(&self) -> usize {
        self.edges.iter().map(|e| e.copula.n_params()).sum()
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub(crate) fn edges_mut(&mut self) -> &mut [EdgeRecord] {
        &mut self.edges
    }

    /// Edges carrying a non-independence copula.
    pub fn pattern(&self) -> IndependencePattern {
        let d = self.d();
        let mut p = IndependencePattern::all(d, false);
        for e in &self.edges {
            p.set(d - e.tree + 1, e.column, !e.copula.is_independence());
        }
        p
    }

    /// Family codes in matrix layout (row `i` has `i − 1` entries).
    pub fn family_rows(&self) -> Vec<Vec<u16>> {
        self.rows(|c| c.code())
    }

    pub fn param_rows(&self) -> Vec<Vec<f64>> {
        self.rows(|c| c.par)
    }

    pub fn param2_rows(&self) -> Vec<Vec<f64>> {
        self.rows(|c| c.par2)
    }

    fn rows<T>(&self, f: impl Fn(&PairCopula) -> T) -> Vec<Vec<T>> {
        let d = self.d();
        (1..=d)
            .map(|i| (1..i).map(|j| f(&self.copulas[idx(d, i, j)])).collect())
            .collect()
    }

    pub fn copula_rows(&self) -> Vec<Vec<PairCopula>> {
        self.rows(|c| *c)
    }

    /// Sum of the ledger contributions of trees `1..=k`.
    pub fn loglik_up_to(&self, k: usize) -> f64 {
        self.edges.iter().filter(|e| e.tree <= k).map(|e| e.loglik).sum()
    }

    /// Replaces every copula in trees `> k` by independence.
    pub fn truncate(&self, k: usize) -> Result<FittedVine> {
        let d = self.d();
        if k < 1 || k + 2 > d {
            return Err(Error::Contract(format!(
                "truncation level {k} outside 1..={}",
                d.saturating_sub(2)
            )));
        }
        let mut out = self.clone();
        for e in out.edges.iter_mut().filter(|e| e.tree > k) {
            if !e.copula.is_independence() {
                e.status = EdgeStatus::Truncated;
            }
            e.copula = PairCopula::independence();
            e.loglik = 0.0;
        }
        for t in k + 1..d {
            for j in 1..=d - t {
                out.copulas[idx(d, d - t + 1, j)] = PairCopula::independence();
            }
        }
        out.loglik = out.edges.iter().map(|e| e.loglik).sum();
        Ok(out)
    }

    /// Re-evaluates the log-likelihood on `u`, refreshing the ledger.
    pub fn recompute_loglik(&mut self, u: &Dataset<f64>, parallel: bool) -> Result<f64> {
        check_u(u, self.d())?;
        let copulas = self.copulas.clone();
        let d = self.d();
        let recs = walk(&self.structure, u, parallel, |t, j, _, _, _| {
            let c = copulas[idx(d, d - t + 1, j)];
            Ok(Outcome {
                copula: c,
                status: if c.is_independence() {
                    EdgeStatus::Pattern
                } else {
                    EdgeStatus::Fitted
                },
                test: None,
                tau: None,
            })
        })?;
        for (e, r) in self.edges.iter_mut().zip(recs) {
            e.loglik = r.loglik;
        }
        self.loglik = self.edges.iter().map(|e| e.loglik).sum();
        self.n_obs = u.n();
        Ok(self.loglik)
    }

    /// Log-likelihood of `u` under this vine, without touching the ledger.
    pub fn loglik_of(&self, u: &Dataset<f64>) -> Result<f64> {
        let mut copy = self.clone();
        copy.recompute_loglik(u, true)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[inline]
fn idx(d: usize, i: usize, j: usize) -> usize {
    (i - 1) * d + (j - 1)
}

#[derive(Serialize, Deserialize)]
struct VineRepr {
    structure: RVineMatrix,
    families: Vec<Vec<u16>>,
    params: Vec<Vec<f64>>,
    params2: Vec<Vec<f64>>,
    loglik: f64,
    n_params: usize,
    n_obs: usize,
    edges: Vec<EdgeRecord>,
}

impl Serialize for FittedVine {
    fn serialize<Se: serde::Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        VineRepr {
            structure: self.structure.clone(),
            families: self.family_rows(),
            params: self.param_rows(),
            params2: self.param2_rows(),
            loglik: self.loglik,
            n_params: self.n_params(),
            n_obs: self.n_obs,
            edges: self.edges.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FittedVine {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = VineRepr::deserialize(de)?;
        let d = r.structure.d();
        let shape_ok = |rows: usize, lens: Vec<usize>| rows == d && lens.iter().enumerate().all(|(i, l)| *l == i);
        if !shape_ok(r.families.len(), r.families.iter().map(Vec::len).collect())
            || !shape_ok(r.params.len(), r.params.iter().map(Vec::len).collect())
            || !shape_ok(r.params2.len(), r.params2.iter().map(Vec::len).collect())
        {
            return Err(D::Error::custom("family or parameter matrix does not match the structure"));
        }
        let rows = (0..d)
            .map(|i| {
                (0..i)
                    .map(|j| PairCopula::from_code(r.families[i][j], r.params[i][j], r.params2[i][j]))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        let mut v = FittedVine::from_copulas(r.structure, rows).map_err(D::Error::custom)?;
        if r.edges.len() == v.edges.len() {
            for (e, stored) in v.edges.iter_mut().zip(r.edges) {
                if stored.tree != e.tree || stored.column != e.column || stored.copula != e.copula {
                    return Err(D::Error::custom("edge ledger does not match the parameter matrices"));
                }
                *e = stored;
            }
        }
        v.loglik = r.loglik;
        v.n_obs = r.n_obs;
        if v.n_params() != r.n_params {
            return Err(D::Error::custom("stored parameter count is inconsistent"));
        }
        Ok(v)
    }
}

pub(crate) struct Outcome {
    pub copula: PairCopula,
    pub status: EdgeStatus,
    pub test: Option<IndependenceTest>,
    pub tau: Option<f64>,
}

pub(crate) struct Walked {
    pub tree: usize,
    pub column: usize,
    pub edge: Edge,
    pub outcome: Outcome,
    pub loglik: f64,
}

/// Conditional distribution values `F(var | set)` keyed by the variable and
/// the sorted conditioning set.
#[derive(Default)]
pub(crate) struct ConditionalStore {
    values: HashMap<(usize, Vec<usize>), Vec<f64>>,
}

impl ConditionalStore {
    pub fn from_columns(u: &Array2<f64>) -> Self {
        let mut s = ConditionalStore::default();
        for (k, col) in u.columns().into_iter().enumerate() {
            s.values.insert((k + 1, Vec::new()), col.to_vec());
        }
        s
    }

    pub fn get(&self, var: usize, set: &[usize]) -> Result<&[f64]> {
        let mut key = set.to_vec();
        key.sort_unstable();
        self.values
            .get(&(var, key))
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Structure(format!("no conditional values for {var} given {set:?}")))
    }

    pub fn insert(&mut self, var: usize, set: &[usize], values: Vec<f64>) {
        let mut key = set.to_vec();
        key.sort_unstable();
        self.values.insert((var, key), values);
    }
}

/// Tree-by-tree pass: `choose(t, j, edge, ua, ub)` picks the copula of each
/// edge from its two conditional samples; the pass then propagates the
/// h-function values to the next tree.
pub(crate) fn walk<F>(m: &RVineMatrix, u: &Dataset<f64>, parallel: bool, choose: F) -> Result<Vec<Walked>>
where
    F: Fn(usize, usize, &Edge, &[f64], &[f64]) -> Result<Outcome> + Sync,
{
    let d = m.d();
    let mut store = ConditionalStore::from_columns(&u.values().to_owned());
    let mut out = Vec::with_capacity(d * (d - 1) / 2);
    for t in 1..d {
        let edges: Vec<Edge> = (1..=d - t).map(|j| m.edge(t, j)).collect();
        let job = |e: &Edge| -> Result<(Walked, Option<(Vec<f64>, Vec<f64>)>)> {
            let (a, b) = e.conditioned;
            let ua = store.get(a, &e.conditioning)?;
            let ub = store.get(b, &e.conditioning)?;
            let outcome = choose(t, e.column, e, ua, ub).map_err(|err| relabel_fit(err, e))?;
            let ev = outcome.copula.evaluator();
            let loglik = ev.loglik(ua, ub);
            if !loglik.is_finite() {
                return Err(Error::Fit {
                    edge: e.to_string(),
                    msg: format!("log-likelihood {loglik}"),
                });
            }
            // next tree needs F(a | D ∪ b) and F(b | D ∪ a)
            let next = (t + 1 < d).then(|| {
                if outcome.copula.is_independence() {
                    (ua.to_vec(), ub.to_vec())
                } else {
                    (
                        ua.iter().zip(ub).map(|(x, y)| ev.h(*x, *y)).collect(),
                        ua.iter().zip(ub).map(|(x, y)| ev.h_first(*x, *y)).collect(),
                    )
                }
            });
            Ok((
                Walked {
                    tree: t,
                    column: e.column,
                    edge: e.clone(),
                    outcome,
                    loglik,
                },
                next,
            ))
        };
        let results: Vec<(Walked, Option<(Vec<f64>, Vec<f64>)>)> = if parallel {
            edges.par_iter().map(job).collect::<Result<_>>()?
        } else {
            edges.iter().map(job).collect::<Result<_>>()?
        };
        for (w, next) in results {
            if let Some((fa, fb)) = next {
                let (a, b) = w.edge.conditioned;
                let mut da = w.edge.conditioning.clone();
                da.push(b);
                store.insert(a, &da, fa);
                let mut db = w.edge.conditioning.clone();
                db.push(a);
                store.insert(b, &db, fb);
            }
            out.push(w);
        }
    }
    Ok(out)
}

fn relabel_fit(err: Error, e: &Edge) -> Error {
    match err {
        Error::Fit { edge, msg } if edge.is_empty() => Error::Fit { edge: e.to_string(), msg },
        other => other,
    }
}

fn check_u(u: &Dataset<f64>, d: usize) -> Result<()> {
    if u.scale() != Scale::U {
        return Err(Error::Contract("vine fitting needs copula-scale (U) data".into()));
    }
    if u.d() != d {
        return Err(Error::Shape(format!("data has {} columns, structure has {d}", u.d())));
    }
    Ok(())
}

/// Pair-copula choice for one edge under the pattern flag.
pub(crate) fn choose_pair(active: bool, ua: &[f64], ub: &[f64], cfg: &PairFitConfig) -> Result<Outcome> {
    if !active {
        return Ok(Outcome {
            copula: PairCopula::independence(),
            status: EdgeStatus::Pattern,
            test: None,
            tau: None,
        });
    }
    let fit = fit_pair(ua, ub, cfg)?;
    let status = if fit.test.is_some_and(|t| t.independent) {
        EdgeStatus::Test
    } else {
        EdgeStatus::Fitted
    };
    Ok(Outcome {
        copula: fit.copula,
        status,
        test: fit.test,
        tau: Some(fit.tau),
    })
}

pub(crate) fn assemble(m: &RVineMatrix, walked: Vec<Walked>, n: usize) -> FittedVine {
    let d = m.d();
    let mut copulas = vec![PairCopula::independence(); d * d];
    let mut edges = Vec::with_capacity(walked.len());
    for w in walked {
        copulas[idx(d, d - w.tree + 1, w.column)] = w.outcome.copula;
        edges.push(EdgeRecord {
            tree: w.tree,
            column: w.column,
            label: w.edge.to_string(),
            copula: w.outcome.copula,
            loglik: w.loglik,
            status: w.outcome.status,
            tau: w.outcome.tau,
            statistic: w.outcome.test.map(|t| t.statistic),
        });
    }
    let loglik = edges.iter().map(|e| e.loglik).sum();
    FittedVine {
        structure: m.clone(),
        copulas,
        loglik,
        n_obs: n,
        edges,
    }
}

/// Fits the pair copulas of `m` tree by tree. Edges flagged `false` in the
/// pattern get the independence copula; the others go through the
/// independence test (when configured) and per-pair maximum likelihood.
pub fn fit(u: &Dataset<f64>, m: &RVineMatrix, pattern: &IndependencePattern, cfg: &VineFitConfig) -> Result<FittedVine> {
    check_u(u, m.d())?;
    pattern.check_conformable(m)?;
    let walked = walk(m, u, cfg.parallel, |t, j, _, ua, ub| {
        choose_pair(pattern.edge(t, j), ua, ub, &cfg.pair)
    })?;
    Ok(assemble(m, walked, u.n()))
}
