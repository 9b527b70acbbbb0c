use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::norm_quantile;

/// Kendall's tau-b in `O(n log n)`.
pub fn kendall_tau(u: &[f64], v: &[f64]) -> Result<f64> {
    let n = u.len();
    if v.len() != n {
        return Err(Error::Shape(format!("kendall_tau: lengths {} and {}", n, v.len())));
    }
    if n < 2 {
        return Err(Error::Contract("kendall_tau needs at least two pairs".into()));
    }
    if u.iter().chain(v).any(|x| x.is_nan()) {
        return Err(Error::Domain("kendall_tau: NaN input".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| u[a].total_cmp(&u[b]).then(v[a].total_cmp(&v[b])));
    let mut ys: Vec<f64> = idx.iter().map(|&i| v[i]).collect();

    let pairs = |k: u64| k * k.saturating_sub(1) / 2;
    let n0 = pairs(n as u64);

    // ties in u, and joint ties
    let (mut tie_u, mut tie_uv) = (0u64, 0u64);
    let (mut run_u, mut run_uv) = (1u64, 1u64);
    for k in 1..n {
        let (a, b) = (idx[k - 1], idx[k]);
        if u[a] == u[b] {
            run_u += 1;
            if v[a] == v[b] {
                run_uv += 1;
            } else {
                tie_uv += pairs(run_uv);
                run_uv = 1;
            }
        } else {
            tie_u += pairs(run_u);
            tie_uv += pairs(run_uv);
            run_u = 1;
            run_uv = 1;
        }
    }
    tie_u += pairs(run_u);
    tie_uv += pairs(run_uv);

    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    let mut tie_v = 0u64;
    let mut run = 1u64;
    for k in 1..n {
        if ys[k] == ys[k - 1] {
            run += 1;
        } else {
            tie_v += pairs(run);
            run = 1;
        }
    }
    tie_v += pairs(run);

    let denom = ((n0 - tie_u) as f64 * (n0 - tie_v) as f64).sqrt();
    if denom == 0.0 {
        return Ok(0.0);
    }
    let num = n0 as f64 - tie_u as f64 - tie_v as f64 + tie_uv as f64 - 2.0 * swaps as f64;
    Ok((num / denom).clamp(-1.0, 1.0))
}

/// Stable merge sort returning the number of exchanges.
fn merge_count(xs: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = xs.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = xs.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if xs[j] < xs[i] {
            buf[k] = xs[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = xs[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&xs[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&xs[j..n]);
    xs.copy_from_slice(&buf[..n]);
    swaps
}

/// Outcome of the asymptotic Kendall independence test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndependenceTest {
    pub tau: f64,
    pub statistic: f64,
    pub critical: f64,
    /// `true` when independence is retained.
    pub independent: bool,
}

/// Two-sided test of `τ = 0` at level `alpha`.
pub fn independence_test(u: &[f64], v: &[f64], alpha: f64) -> Result<IndependenceTest> {
    let n = u.len();
    if n < 10 {
        return Err(Error::Contract(format!("independence test needs n ≥ 10, got {n}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Config(format!("test level {alpha} outside [0,1]")));
    }
    let tau = kendall_tau(u, v)?;
    Ok(test_from_tau(tau, n, alpha))
}

pub(crate) fn test_from_tau(tau: f64, n: usize, alpha: f64) -> IndependenceTest {
    let nf = n as f64;
    let statistic = tau.abs() * (9.0 * nf * (nf - 1.0) / (2.0 * (2.0 * nf + 5.0))).sqrt();
    let critical = if alpha <= 0.0 {
        f64::INFINITY
    } else if alpha >= 1.0 {
        0.0
    } else {
        norm_quantile(1.0 - alpha / 2.0)
    };
    IndependenceTest {
        tau,
        statistic,
        critical,
        independent: !(statistic > critical),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(u: &[f64], v: &[f64]) -> f64 {
        let n = u.len();
        let (mut s, mut tu, mut tv) = (0.0, 0.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                let a = (u[i] - u[j]).signum() * (u[i] != u[j]) as i32 as f64;
                let b = (v[i] - v[j]).signum() * (v[i] != v[j]) as i32 as f64;
                s += a * b;
                tu += a * a;
                tv += b * b;
            }
        }
        s / (tu * tv).sqrt()
    }

    #[test]
    fn small_examples() {
        assert_eq!(kendall_tau(&[1., 2., 3., 4.], &[2., 3., 5., 9.]).unwrap(), 1.0);
        assert_eq!(kendall_tau(&[1., 2., 3., 4.], &[9., 5., 3., 2.]).unwrap(), -1.0);
        let t = kendall_tau(&[1., 2., 3.], &[3., 1., 2.]).unwrap();
        assert!((t + 1.0 / 3.0).abs() < 1e-15);
        assert!(kendall_tau(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn test_statistic() {
        let t = test_from_tau(0.2, 1000, 0.05);
        assert!((t.statistic - 9.48).abs() < 0.01, "{}", t.statistic);
        assert!(!t.independent);
        assert!(test_from_tau(0.0, 50, 0.5).independent);
        assert!(test_from_tau(0.9, 50, 0.0).independent);
        assert!(independence_test(&[0.5; 9], &[0.5; 9], 0.05).is_err());
    }

    proptest! {
        #[test]
        fn matches_quadratic(pairs in proptest::collection::vec((0u8..6, 0u8..6), 2..40)) {
            let u: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let v: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
            let fast = kendall_tau(&u, &v).unwrap();
            let slow = naive(&u, &v);
            if slow.is_nan() {
                prop_assert_eq!(fast, 0.0);
            } else {
                prop_assert!((fast - slow).abs() < 1e-12);
            }
        }
    }
}
