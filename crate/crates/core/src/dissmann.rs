//! Greedy tree-by-tree structure selection: each tree is a maximum spanning
//! tree on `|τ̂|` among the edges allowed by the proximity condition.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{kendall_tau, Criterion, Family, PairCopula, PairFitConfig};
use crate::data::{Dataset, Scale};
use crate::error::{Error, Result};
use crate::rvine::RVineMatrix;
use crate::vine::{choose_pair, ConditionalStore, EdgeStatus, FittedVine};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissmannConfig {
    /// Trees above this level get the independence copula.
    pub truncation: Option<usize>,
    /// Level of the per-edge independence test; `None` skips the test.
    pub alpha: Option<f64>,
    pub families: Vec<Family>,
    pub criterion: Criterion,
    pub parallel: bool,
}

impl Default for DissmannConfig {
    fn default() -> Self {
        DissmannConfig {
            truncation: None,
            alpha: Some(0.05),
            families: Family::ALL.to_vec(),
            criterion: Criterion::Aic,
            parallel: true,
        }
    }
}

impl DissmannConfig {
    pub fn pair_config(&self) -> PairFitConfig {
        PairFitConfig {
            families: self.families.clone(),
            criterion: self.criterion,
            independence_alpha: self.alpha,
            ..PairFitConfig::default()
        }
    }
}

/// Node of tree `t`: an edge of tree `t − 1` (or a variable when `t = 1`).
#[derive(Debug, Clone)]
struct Node {
    /// Variables in the conditioned and conditioning sets together.
    set: BTreeSet<usize>,
    /// Indices of the two tree-`t − 1` nodes joined by this edge.
    ends: Option<(usize, usize)>,
}

/// Edge picked in one tree, oriented as fitted.
#[derive(Debug, Clone)]
struct Picked {
    a: usize,
    b: usize,
    cond: Vec<usize>,
    ends: (usize, usize),
    copula: PairCopula,
    status: EdgeStatus,
    tau: f64,
    statistic: Option<f64>,
}

/// Maximum spanning tree by Kruskal's algorithm. `edges` holds
/// `(node, node, weight)`; ties are broken by position in `edges`, so pass
/// them in label order. Returns indices into `edges`.
pub fn max_spanning_tree(n_nodes: usize, edges: &[(usize, usize, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&x, &y| edges[y].2.total_cmp(&edges[x].2).then(x.cmp(&y)));
    let mut parent: Vec<usize> = (0..n_nodes).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut out = Vec::with_capacity(n_nodes.saturating_sub(1));
    for k in order {
        let (a, b, _) = edges[k];
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            out.push(k);
            if out.len() + 1 == n_nodes {
                break;
            }
        }
    }
    out
}

/// Fits a vine with the greedy maximum-spanning-tree structure.
pub fn fit_dissmann(u: &Dataset<f64>, cfg: &DissmannConfig) -> Result<FittedVine> {
    let (n, d) = (u.n(), u.d());
    if u.scale() != Scale::U {
        return Err(Error::Contract("Dissmann selection needs copula-scale (U) data".into()));
    }
    if n < 10 || d < 3 {
        return Err(Error::Contract(format!("Dissmann selection needs n ≥ 10 and d ≥ 3, got {n}x{d}")));
    }
    if let Some(k) = cfg.truncation {
        if k < 1 || k + 2 > d {
            return Err(Error::Config(format!("truncation level {k} outside 1..={}", d - 2)));
        }
    }
    let pair_cfg = cfg.pair_config();
    let mut store = ConditionalStore::from_columns(&u.values().to_owned());
    let mut nodes: Vec<Node> = (1..=d)
        .map(|v| Node {
            set: BTreeSet::from([v]),
            ends: None,
        })
        .collect();
    let mut trees: Vec<Vec<Picked>> = Vec::with_capacity(d - 1);

    for t in 1..d {
        // candidate pairs of nodes
        let mut cands: Vec<(usize, usize, usize, usize, Vec<usize>)> = Vec::new();
        for x in 0..nodes.len() {
            for y in x + 1..nodes.len() {
                let adjacent = match (nodes[x].ends, nodes[y].ends) {
                    (None, None) => true,
                    (Some((p, q)), Some((r, s))) => p == r || p == s || q == r || q == s,
                    _ => false,
                };
                if !adjacent {
                    continue;
                }
                let cond: Vec<usize> = nodes[x].set.intersection(&nodes[y].set).copied().collect();
                let a = *nodes[x].set.difference(&nodes[y].set).next().expect("distinct nodes");
                let b = *nodes[y].set.difference(&nodes[x].set).next().expect("distinct nodes");
                let (a, b, x0, y0) = if a < b { (a, b, x, y) } else { (b, a, y, x) };
                cands.push((a, b, x0, y0, cond));
            }
        }
        cands.sort_by(|p, q| (&p.4, p.0, p.1).cmp(&(&q.4, q.0, q.1)));
        let weigh = |c: &(usize, usize, usize, usize, Vec<usize>)| -> Result<f64> {
            let ua = store.get(c.0, &c.4)?;
            let ub = store.get(c.1, &c.4)?;
            Ok(kendall_tau(ua, ub)?.abs())
        };
        let weights: Vec<f64> = if cfg.parallel {
            cands.par_iter().map(weigh).collect::<Result<_>>()?
        } else {
            cands.iter().map(weigh).collect::<Result<_>>()?
        };
        let graph: Vec<(usize, usize, f64)> = cands.iter().zip(&weights).map(|(c, w)| (c.2, c.3, *w)).collect();
        let chosen = max_spanning_tree(nodes.len(), &graph);
        if chosen.len() + 1 != nodes.len() {
            return Err(Error::Structure(format!("tree {t}: admissible graph is disconnected")));
        }
        let active = cfg.truncation.is_none_or(|k| t <= k);
        let fit_one = |&k: &usize| -> Result<Picked> {
            let (a, b, x, y, ref cond) = cands[k];
            let ua = store.get(a, cond)?;
            let ub = store.get(b, cond)?;
            let out = choose_pair(active, ua, ub, &pair_cfg).map_err(|e| match e {
                Error::Fit { msg, .. } => Error::Fit {
                    edge: edge_label(a, b, cond),
                    msg,
                },
                other => other,
            })?;
            Ok(Picked {
                a,
                b,
                cond: cond.clone(),
                ends: (x, y),
                copula: out.copula,
                status: if active { out.status } else { EdgeStatus::Truncated },
                tau: weights[k],
                statistic: out.test.map(|t| t.statistic),
            })
        };
        let mut picked: Vec<Picked> = if cfg.parallel {
            chosen.par_iter().map(fit_one).collect::<Result<_>>()?
        } else {
            chosen.iter().map(fit_one).collect::<Result<_>>()?
        };
        picked.sort_by(|p, q| (&p.cond, p.a, p.b).cmp(&(&q.cond, q.a, q.b)));
        if t + 1 < d {
            for p in &picked {
                let ua = store.get(p.a, &p.cond)?.to_vec();
                let ub = store.get(p.b, &p.cond)?.to_vec();
                let ev = p.copula.evaluator();
                let (fa, fb): (Vec<f64>, Vec<f64>) = if p.copula.is_independence() {
                    (ua, ub)
                } else {
                    ua.iter().zip(&ub).map(|(x, y)| (ev.h(*x, *y), ev.h_first(*x, *y))).unzip()
                };
                let mut da = p.cond.clone();
                da.push(p.b);
                store.insert(p.a, &da, fa);
                let mut db = p.cond.clone();
                db.push(p.a);
                store.insert(p.b, &db, fb);
            }
        }
        nodes = picked
            .iter()
            .map(|p| Node {
                set: p.cond.iter().copied().chain([p.a, p.b]).collect(),
                ends: Some(p.ends),
            })
            .collect();
        trees.push(picked);
    }

    let (matrix, rows) = to_matrix(d, &trees)?;
    let mut vine = FittedVine::from_copulas(matrix, rows)?;
    vine.recompute_loglik(u, cfg.parallel)?;
    for e in vine.edges_mut() {
        let edge = trees[e.tree - 1]
            .iter()
            .find(|p| {
                let m = e.label.split('|').next().unwrap_or_default().to_string();
                m == format!("{},{}", p.a, p.b) || m == format!("{},{}", p.b, p.a)
            })
            .expect("every matrix edge comes from a tree");
        e.status = edge.status;
        e.tau = Some(edge.tau);
        e.statistic = edge.statistic;
    }
    Ok(vine)
}

fn edge_label(a: usize, b: usize, cond: &[usize]) -> String {
    if cond.is_empty() {
        format!("{a},{b}")
    } else {
        let c: Vec<String> = cond.iter().map(usize::to_string).collect();
        format!("{a},{b}|{}", c.join(","))
    }
}

/// Turns a tree sequence into a structure matrix and the matching
/// copula rows, oriented so each copula's first argument is the diagonal
/// variable of its column.
fn to_matrix(d: usize, trees: &[Vec<Picked>]) -> Result<(RVineMatrix, Vec<Vec<PairCopula>>)> {
    let mut used: Vec<Vec<bool>> = trees.iter().map(|t| vec![false; t.len()]).collect();
    let mut rows: Vec<Vec<usize>> = (0..d).map(|i| vec![0; i + 1]).collect();
    let mut cops: Vec<Vec<PairCopula>> = (0..d).map(|i| vec![PairCopula::independence(); i]).collect();
    for j in 1..d {
        let top = d - j; // highest tree still holding an unused edge
        let e = used[top - 1]
            .iter()
            .position(|u| !u)
            .ok_or_else(|| Error::Structure(format!("tree {top} has no unused edge")))?;
        let head = &trees[top - 1][e];
        let mut placed = None;
        for x in [head.a, head.b] {
            if let Some(path) = descend(trees, &used, top, e, x) {
                placed = Some((x, path));
                break;
            }
        }
        let (x, path) = placed.ok_or_else(|| Error::Structure(format!("column {j}: no leaf variable")))?;
        rows[j - 1][j - 1] = x;
        for (t, k) in path {
            used[t - 1][k] = true;
            let p = &trees[t - 1][k];
            let (y, c) = if p.a == x { (p.b, p.copula) } else { (p.a, p.copula.swapped()) };
            rows[d - t][j - 1] = y;
            cops[d - t][j - 1] = c;
        }
    }
    // last column: the one variable left
    let last = rows[d - 1][d - 2];
    rows[d - 1][d - 1] = last;
    let m = RVineMatrix::from_rows(rows)?;
    Ok((m, cops))
}

/// Follows `x` from edge `k` of tree `top` down to tree 1, requiring `x` in
/// the conditioned set at every level. Returns `(tree, edge index)` pairs.
fn descend(trees: &[Vec<Picked>], used: &[Vec<bool>], top: usize, k: usize, x: usize) -> Option<Vec<(usize, usize)>> {
    let mut path = Vec::with_capacity(top);
    let (mut t, mut k) = (top, k);
    loop {
        let p = &trees[t - 1][k];
        if (p.a != x && p.b != x) || used[t - 1][k] {
            return None;
        }
        path.push((t, k));
        if t == 1 {
            return Some(path);
        }
        // the end node whose variable set holds x
        let (l, r) = p.ends;
        let holds = |idx: usize| {
            let q = &trees[t - 2][idx];
            q.a == x || q.b == x || q.cond.contains(&x)
        };
        k = if holds(l) { l } else { r };
        t -= 1;
    }
}
