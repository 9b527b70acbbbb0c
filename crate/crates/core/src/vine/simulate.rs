use ndarray::{s, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{ConditionalStore, FittedVine};
use crate::data::{Dataset, Scale};
use crate::error::{Error, Result};

const BLOCK: usize = 1024;

/// Draws `n` samples on the copula scale by inverse Rosenblatt transform,
/// variables in the order `m(d,d), m(d−1,d−1), …, m(1,1)`. Samples are
/// generated in blocks of 1024 rows, each from its own ChaCha8 stream of
/// `seed`, so the output does not depend on the thread count.
pub fn simulate(v: &FittedVine, n: usize, seed: u64) -> Result<Dataset<f64>> {
    if n < 2 {
        return Err(Error::Contract(format!("simulate needs n ≥ 2, got {n}")));
    }
    let d = v.d();
    let blocks: Vec<usize> = (0..n.div_ceil(BLOCK)).collect();
    let parts: Vec<Array2<f64>> = blocks
        .par_iter()
        .map(|&b| {
            let rows = BLOCK.min(n - b * BLOCK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let w = Array2::from_shape_simple_fn((rows, d), || rng.random::<f64>());
            sample_block(v, &w)
        })
        .collect::<Result<_>>()?;
    let mut out = Array2::zeros((n, d));
    for (b, part) in parts.into_iter().enumerate() {
        let start = b * BLOCK;
        out.slice_mut(s![start..start + part.nrows(), ..]).assign(&part);
    }
    Dataset::from_array(out, Scale::U)
}

/// Maps independent uniforms `w` (column `k` drives the `k`-th variable in
/// sampling order) to a sample of the vine.
fn sample_block(v: &FittedVine, w: &Array2<f64>) -> Result<Array2<f64>> {
    let m = v.structure();
    let d = m.d();
    let rows = w.nrows();
    let mut store = ConditionalStore::default();
    let mut out = Array2::zeros((rows, d));
    for (step, j) in (1..=d).rev().enumerate() {
        let a = m.get(j, j);
        let mut p: Vec<f64> = w.column(step).iter().map(|&x| crate::copula::clamp(x)).collect();
        let depth = d - j;
        let mut given: Vec<Vec<f64>> = vec![Vec::new(); depth + 1];
        for t in (1..=depth).rev() {
            let e = m.edge(t, j);
            let cond = {
                let mut c = e.conditioning.clone();
                c.push(e.conditioned.1);
                c
            };
            store.insert(a, &cond, p.clone());
            let ev = v.copula(t, j).evaluator();
            let ub = store.get(e.conditioned.1, &e.conditioning)?;
            if !ev.copula().is_independence() {
                for (x, y) in p.iter_mut().zip(ub) {
                    *x = ev.h_inv(*x, *y);
                }
            }
            given[t] = ub.to_vec();
        }
        store.insert(a, &[], p.clone());
        // F(b | D ∪ a) for the partners, needed by later columns
        let mut fa = p;
        for t in 1..=depth {
            let e = m.edge(t, j);
            let b = e.conditioned.1;
            let ev = v.copula(t, j).evaluator();
            let fb: Vec<f64> = if ev.copula().is_independence() {
                given[t].clone()
            } else {
                fa.iter().zip(&given[t]).map(|(x, y)| ev.h_first(*x, *y)).collect()
            };
            let mut db = e.conditioning.clone();
            db.push(a);
            store.insert(b, &db, fb);
            let mut da = e.conditioning.clone();
            da.push(b);
            fa = store.get(a, &da)?.to_vec();
        }
        let col = store.get(a, &[])?;
        out.column_mut(a - 1).assign(&ndarray::ArrayView1::from(col));
    }
    Ok(out)
}
