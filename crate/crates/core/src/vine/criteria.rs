use serde::{Deserialize, Serialize};

use super::FittedVine;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformationCriteria {
    pub loglik: f64,
    pub n_params: usize,
    pub n: usize,
    pub aic: f64,
    pub bic: f64,
    pub mbic: f64,
    /// `q(d) = d(d − 1)`.
    pub q: f64,
    /// Indices `j` whose `ln ln(n q² / j)` term was dropped because
    /// `ln(n q² / j) ≤ 1`.
    pub dropped_terms: Vec<usize>,
}

impl InformationCriteria {
    pub fn compute(loglik: f64, p: usize, n: usize, d: usize) -> Self {
        let q = (d * d.saturating_sub(1)) as f64;
        let nf = n as f64;
        let aic = -2.0 * loglik + 2.0 * p as f64;
        let bic = -2.0 * loglik + p as f64 * nf.ln();
        let mut mbic = -2.0 * loglik;
        let mut dropped_terms = Vec::new();
        if p > 0 {
            let nq2 = nf * q * q;
            let ln_fact: f64 = (1..=p).map(|j| (j as f64).ln()).sum();
            mbic += p as f64 * nq2.ln() - 2.0 * ln_fact;
            for j in 1..=p {
                let l = (nq2 / j as f64).ln();
                if l <= 1.0 {
                    dropped_terms.push(j);
                } else {
                    mbic -= l.ln();
                }
            }
            if !dropped_terms.is_empty() {
                log::warn!(
                    "mBIC: dropped {} terms with ln(nq²/j) ≤ 1 (n = {n}, q = {q}, p = {p})",
                    dropped_terms.len()
                );
            }
        }
        InformationCriteria {
            loglik,
            n_params: p,
            n,
            aic,
            bic,
            mbic,
            q,
            dropped_terms,
        }
    }
}

/// AIC, BIC and mBIC of a fitted vine at sample size `n`.
pub fn information_criteria(v: &FittedVine, n: usize) -> InformationCriteria {
    InformationCriteria::compute(v.loglik(), v.n_params(), n, v.d())
}
