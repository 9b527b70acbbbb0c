//! Univariate distribution helpers shared by the data transforms and the
//! copula families. Everything here works in `f64`.

use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal cdf.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile. Infinite at 0 and 1.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    // erfc_inv keeps full relative precision in both tails
    -SQRT_2 * erf::erfc_inv(2.0 * p)
}

/// Student-t distribution with real degrees of freedom.
#[derive(Debug, Clone)]
pub struct StudentT {
    nu: f64,
    dist: StudentsT,
}

impl StudentT {
    pub fn new(nu: f64) -> Self {
        let dist = StudentsT::new(0.0, 1.0, nu).expect("nu > 0");
        StudentT { nu, dist }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.dist.cdf(x)
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        use statrs::function::gamma::ln_gamma;
        let nu = self.nu;
        ln_gamma((nu + 1.0) / 2.0)
            - ln_gamma(nu / 2.0)
            - 0.5 * (nu * std::f64::consts::PI).ln()
            - (nu + 1.0) / 2.0 * (x * x / nu).ln_1p()
    }

    /// Quantile, polished with Newton steps against this type's own cdf so
    /// that `cdf(quantile(p))` reproduces `p` to rounding.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        if p == 0.5 {
            return 0.0;
        }
        let mut x = self.dist.inverse_cdf(p);
        if !x.is_finite() {
            return x;
        }
        for _ in 0..3 {
            let f = self.cdf(x) - p;
            let dens = self.ln_pdf(x).exp();
            if dens <= 0.0 || !dens.is_finite() {
                break;
            }
            let step = f / dens;
            x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        x
    }
}
