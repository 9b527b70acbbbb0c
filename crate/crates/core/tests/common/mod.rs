#![allow(dead_code)]

use std::collections::BTreeSet;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use vinelasso::data::Scale;
use vinelasso::{Dataset, RVineMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, p), || StandardNormal.sample(rng))
}

/// `n × p` design with `XᵀX / n = I`, by modified Gram-Schmidt.
pub fn orthonormal_design(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Array2<f64> {
    let mut x = normal_matrix(rng, n, p);
    for k in 0..p {
        for j in 0..k {
            let dot = x.column(k).dot(&x.column(j));
            let qj = x.column(j).to_owned();
            x.column_mut(k).scaled_add(-dot, &qj);
        }
        let norm = x.column(k).dot(&x.column(k)).sqrt();
        x.column_mut(k).mapv_inplace(|v| v / norm);
    }
    x * (n as f64).sqrt()
}

pub fn soft(z: f64, t: f64) -> f64 {
    z.signum() * (z.abs() - t).max(0.0)
}

/// `(1/2n) ‖y − Xφ‖²`.
pub fn quad_loss(x: &Array2<f64>, y: &Array1<f64>, phi: &[f64]) -> f64 {
    let r = y - &x.dot(&Array1::from(phi.to_vec()));
    r.dot(&r) / (2.0 * x.nrows() as f64)
}

/// Euclidean projection onto `{‖φ‖₁ ≤ t}` (sort-based).
pub fn project_l1(v: &[f64], t: f64) -> Vec<f64> {
    if v.iter().map(|a| a.abs()).sum::<f64>() <= t {
        return v.to_vec();
    }
    let mut mu: Vec<f64> = v.iter().map(|a| a.abs()).collect();
    mu.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, m) in mu.iter().enumerate() {
        cum += m;
        let th = (cum - t) / (k + 1) as f64;
        if m - th > 0.0 {
            theta = th;
        }
    }
    v.iter().map(|a| soft(*a, theta)).collect()
}

/// Minimizes the quadratic loss over the L1 ball by accelerated projected
/// gradient, starting from `start`.
pub fn constrained_ls(x: &Array2<f64>, y: &Array1<f64>, t: f64, start: &[f64]) -> Vec<f64> {
    let n = x.nrows() as f64;
    let g = x.t().dot(x) / n;
    let c = x.t().dot(y) / n;
    // Lipschitz bound: largest Gram eigenvalue ≤ max row sum
    let lip = g.rows().into_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut phi = project_l1(start, t);
    let mut prev = phi.clone();
    for k in 0..20_000 {
        let beta = k as f64 / (k as f64 + 3.0);
        let w: Vec<f64> = phi.iter().zip(&prev).map(|(a, b)| a + beta * (a - b)).collect();
        let wa = Array1::from(w.clone());
        let grad = g.dot(&wa) - &c;
        let step: Vec<f64> = w.iter().zip(grad.iter()).map(|(a, d)| a - d / lip).collect();
        prev = phi;
        phi = project_l1(&step, t);
    }
    phi
}

/// Pseudo-observations of `n` draws of `x = A e` with `e` standard normal.
pub fn linear_sample(a: &Array2<f64>, n: usize, seed: u64) -> Dataset {
    let e = normal_matrix(&mut rng(seed), n, a.ncols());
    let x = e.dot(&a.t());
    Dataset::from_array(x, Scale::X).unwrap().to_pseudo_observations().unwrap()
}

/// Random linear factor model with at least some dependence between all
/// variables.
pub fn random_factor_data(rng: &mut ChaCha8Rng, d: usize, n: usize) -> Dataset {
    let k = rng.random_range(1..=d);
    let mut a = Array2::from_shape_fn((d, k), |_| rng.random_range(-1.0..1.0));
    for i in 0..d.min(k) {
        a[[i, i]] += 0.3;
    }
    let a = ndarray::concatenate![ndarray::Axis(1), a, Array2::<f64>::eye(d) * 0.5];
    linear_sample(&a, n, rng.random())
}

pub fn example_one() -> RVineMatrix {
    RVineMatrix::from_rows(vec![
        vec![4],
        vec![1, 5],
        vec![3, 1, 3],
        vec![6, 3, 1, 6],
        vec![2, 6, 2, 1, 2],
        vec![5, 2, 6, 2, 1, 1],
    ])
    .unwrap()
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    parent[x] = r;
    r
}

/// Checks the nested-tree definition directly from the edge sets: every tree
/// is a spanning tree on the edges of the previous one and every edge joins
/// two edges sharing all but one variable.
pub fn is_regular_vine(m: &RVineMatrix) -> Result<(), String> {
    let d = m.d();
    let mut prev: Vec<BTreeSet<usize>> = (1..=d).map(|v| BTreeSet::from([v])).collect();
    for t in 1..d {
        let edges = m.edges_of_tree(t).map_err(|e| e.to_string())?;
        let mut parent: Vec<usize> = (0..prev.len()).collect();
        let mut next = Vec::new();
        for e in &edges {
            let (a, b) = e.conditioned;
            let cond: BTreeSet<usize> = e.conditioning.iter().copied().collect();
            if a == b || cond.contains(&a) || cond.contains(&b) || cond.len() != t - 1 {
                return Err(format!("edge {e} malformed"));
            }
            let mut left = cond.clone();
            left.insert(a);
            let mut right = cond.clone();
            right.insert(b);
            let l = prev.iter().position(|s| *s == left).ok_or(format!("edge {e}: no node {left:?}"))?;
            let r = prev.iter().position(|s| *s == right).ok_or(format!("edge {e}: no node {right:?}"))?;
            let (rl, rr) = (find(&mut parent, l), find(&mut parent, r));
            if rl == rr {
                return Err(format!("tree {t} has a cycle at {e}"));
            }
            parent[rl] = rr;
            let mut all = cond;
            all.insert(a);
            all.insert(b);
            next.push(all);
        }
        if edges.len() + 1 != prev.len() {
            return Err(format!("tree {t} does not span"));
        }
        prev = next;
    }
    Ok(())
}

/// Whether the solution at `lambda` satisfies the optimality conditions
/// within `tol · lambda`.
pub fn kkt_holds(x: &Array2<f64>, y: &Array1<f64>, phi: &[f64], lambda: f64, tol: f64) -> bool {
    let n = x.nrows() as f64;
    let resid = y - &x.dot(&Array1::from(phi.to_vec()));
    phi.iter().enumerate().all(|(l, &b)| {
        let g = x.column(l).dot(&resid) / n;
        if b != 0.0 {
            (g - lambda * b.signum()).abs() <= tol * lambda
        } else {
            g.abs() <= lambda * (1.0 + tol)
        }
    })
}

/// For a drop in the active count between grid points `k` and `k + 1`:
/// both solutions are optimal and some coefficient active at `k` is zero at
/// `k + 1` with a strictly sub-critical gradient, so the drop belongs to the
/// problem and not to the solver.
pub fn certified_drop(
    prob: &vinelasso::lasso::LassoProblem<f64>,
    x: &Array2<f64>,
    y: &Array1<f64>,
    grid: &[f64],
    k: usize,
) -> bool {
    let cfg = vinelasso::lasso::SolverConfig::default();
    let (l0, l1) = (grid[k], grid[k + 1]);
    let (Ok(a), Ok(b)) = (vinelasso::lasso::solve(prob, l0, &cfg), vinelasso::lasso::solve(prob, l1, &cfg)) else {
        return false;
    };
    if !(kkt_holds(x, y, &a, l0, 1e-6) && kkt_holds(x, y, &b, l1, 1e-6)) {
        return false;
    }
    let n = x.nrows() as f64;
    let resid = y - &x.dot(&Array1::from(b.clone()));
    (0..a.len()).any(|l| a[l] != 0.0 && b[l] == 0.0 && (x.column(l).dot(&resid) / n).abs() < l1 * (1.0 - 1e-6))
}
