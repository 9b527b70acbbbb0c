//! Unrotated one- and two-parameter families. Every function takes interior
//! arguments; `h(u, v) = ∂C(u, v)/∂v` and all families here are exchangeable.

use statrs::function::gamma::ln_gamma;

use crate::special::{norm_cdf, norm_quantile, StudentT};

pub(crate) mod gaussian {
    use super::*;

    pub fn ln_pdf(rho: f64, u: f64, v: f64) -> f64 {
        let x = norm_quantile(u);
        let y = norm_quantile(v);
        let r2 = 1.0 - rho * rho;
        -0.5 * r2.ln() - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)
    }

    pub fn h(rho: f64, u: f64, v: f64) -> f64 {
        let x = norm_quantile(u);
        let y = norm_quantile(v);
        norm_cdf((x - rho * y) / (1.0 - rho * rho).sqrt())
    }

    pub fn h_inv(rho: f64, p: f64, v: f64) -> f64 {
        let y = norm_quantile(v);
        norm_cdf(norm_quantile(p) * (1.0 - rho * rho).sqrt() + rho * y)
    }

    pub fn tau(rho: f64) -> f64 {
        2.0 / std::f64::consts::PI * rho.asin()
    }
}

pub(crate) mod student {
    use super::*;

    /// Marginal and conditional t distributions for one `ν`.
    #[derive(Debug, Clone)]
    pub struct Kernel {
        pub t: StudentT,
        pub t1: StudentT,
        konst: f64,
    }

    impl Kernel {
        pub fn new(nu: f64) -> Self {
            let konst = ln_gamma((nu + 2.0) / 2.0) + ln_gamma(nu / 2.0) - 2.0 * ln_gamma((nu + 1.0) / 2.0);
            Kernel {
                t: StudentT::new(nu),
                t1: StudentT::new(nu + 1.0),
                konst,
            }
        }

        pub fn nu(&self) -> f64 {
            self.t.nu()
        }

        /// Log-density on the t scale, `x = t_ν⁻¹(u)`, `y = t_ν⁻¹(v)`.
        pub fn ln_pdf_xy(&self, rho: f64, x: f64, y: f64) -> f64 {
            let nu = self.nu();
            let r2 = 1.0 - rho * rho;
            self.konst - 0.5 * r2.ln()
                - (nu + 2.0) / 2.0 * ((x * x + y * y - 2.0 * rho * x * y) / (nu * r2)).ln_1p()
                + (nu + 1.0) / 2.0 * ((x * x / nu).ln_1p() + (y * y / nu).ln_1p())
        }

        pub fn ln_pdf(&self, rho: f64, u: f64, v: f64) -> f64 {
            self.ln_pdf_xy(rho, self.t.quantile(u), self.t.quantile(v))
        }

        pub fn h(&self, rho: f64, u: f64, v: f64) -> f64 {
            let nu = self.nu();
            let x = self.t.quantile(u);
            let y = self.t.quantile(v);
            let scale = ((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0)).sqrt();
            self.t1.cdf((x - rho * y) / scale)
        }

        pub fn h_inv(&self, rho: f64, p: f64, v: f64) -> f64 {
            let nu = self.nu();
            let y = self.t.quantile(v);
            let scale = ((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0)).sqrt();
            self.t.cdf(self.t1.quantile(p) * scale + rho * y)
        }
    }
}

pub(crate) mod clayton {
    /// `ln(u^{−θ} + v^{−θ} − 1)` without cancellation for small `θ`.
    fn ln_a(theta: f64, lu: f64, lv: f64) -> f64 {
        ((-theta * lu).exp_m1() + (-theta * lv).exp_m1()).ln_1p()
    }

    pub fn ln_pdf(theta: f64, u: f64, v: f64) -> f64 {
        let (lu, lv) = (u.ln(), v.ln());
        theta.ln_1p() - (1.0 + theta) * (lu + lv) - (2.0 + 1.0 / theta) * ln_a(theta, lu, lv)
    }

    pub fn h(theta: f64, u: f64, v: f64) -> f64 {
        let (lu, lv) = (u.ln(), v.ln());
        ((-theta - 1.0) * lv - (1.0 + 1.0 / theta) * ln_a(theta, lu, lv)).exp()
    }

    pub fn h_inv(theta: f64, p: f64, v: f64) -> f64 {
        let lv = v.ln();
        let a = -theta / (1.0 + theta) * (p.ln() + (theta + 1.0) * lv);
        let b = -theta * lv;
        let s = a.exp_m1() - b.exp_m1();
        (-s.ln_1p() / theta).exp()
    }

    pub fn tau(theta: f64) -> f64 {
        theta / (theta + 2.0)
    }
}

pub(crate) mod gumbel {
    pub fn ln_pdf(theta: f64, u: f64, v: f64) -> f64 {
        let (lu, lv) = (u.ln(), v.ln());
        let (x, y) = (-lu, -lv);
        let lt = ln_sum_pow(theta, x, y);
        let w = (lt / theta).exp();
        -w - lu - lv + (theta - 1.0) * (x.ln() + y.ln()) + (-2.0 + 2.0 / theta) * lt
            + ((theta - 1.0) / w).ln_1p()
    }

    /// `ln(x^θ + y^θ)` evaluated around the larger term.
    fn ln_sum_pow(theta: f64, x: f64, y: f64) -> f64 {
        let (lx, ly) = (theta * x.ln(), theta * y.ln());
        let m = lx.max(ly);
        m + ((lx - m).exp() + (ly - m).exp()).ln()
    }

    pub fn h(theta: f64, u: f64, v: f64) -> f64 {
        let (x, y) = (-u.ln(), -v.ln());
        let lt = ln_sum_pow(theta, x, y);
        let w = (lt / theta).exp();
        (-w + (1.0 / theta - 1.0) * lt + (theta - 1.0) * y.ln() + y).exp()
    }

    /// Solves `z + (θ−1) ln z = k` for `z = t^{1/θ} ≥ y`, then maps back.
    pub fn h_inv(theta: f64, p: f64, v: f64) -> f64 {
        let y = -v.ln();
        let k = -(p.ln() + v.ln()) + (theta - 1.0) * y.ln();
        let f = |z: f64| z + (theta - 1.0) * z.ln() - k;
        let mut lo = y;
        let mut hi = y.max(1.0);
        while f(hi) < 0.0 {
            hi *= 2.0;
        }
        let mut z = 0.5 * (lo + hi);
        for _ in 0..200 {
            let fz = f(z);
            if fz < 0.0 {
                lo = z;
            } else {
                hi = z;
            }
            let step = fz / (1.0 + (theta - 1.0) / z);
            if fz == 0.0 || step.abs() <= 1e-15 * z {
                break;
            }
            let next = z - step;
            z = if next >= lo && next <= hi { next } else { 0.5 * (lo + hi) };
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        let ln_xt = theta * z.ln() + (-(theta * (y.ln() - z.ln())).exp()).ln_1p();
        let x = (ln_xt / theta).exp();
        (-x).exp()
    }

    pub fn tau(theta: f64) -> f64 {
        1.0 - 1.0 / theta
    }
}

pub(crate) mod frank {
    pub fn ln_pdf(theta: f64, u: f64, v: f64) -> f64 {
        let g = (-theta).exp_m1();
        let a = (-theta * u).exp_m1();
        let b = (-theta * v).exp_m1();
        (theta * -g).ln() - theta * (u + v) - 2.0 * (g + a * b).abs().ln()
    }

    pub fn h(theta: f64, u: f64, v: f64) -> f64 {
        let g = (-theta).exp_m1();
        let a = (-theta * u).exp_m1();
        let b = (-theta * v).exp_m1();
        (-theta * v).exp() * a / (g + a * b)
    }

    pub fn h_inv(theta: f64, p: f64, v: f64) -> f64 {
        let g = (-theta).exp_m1();
        let b = (-theta * v).exp_m1();
        let a = p * g / (1.0 + b * (1.0 - p));
        -a.ln_1p() / theta
    }

    /// First Debye function `D₁(x) = x⁻¹ ∫₀ˣ t/(eᵗ−1) dt`.
    pub fn debye1(x: f64) -> f64 {
        if x == 0.0 {
            return 1.0;
        }
        if x < 0.0 {
            return debye1(-x) - x / 2.0;
        }
        // composite Gauss-Legendre, 5 nodes per panel
        const NODES: [f64; 5] = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.236_926_885_056_189,
            0.478_628_670_499_366,
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
        ];
        let panels = (x.ceil() as usize).clamp(4, 200);
        let width = x / panels as f64;
        let mut sum = 0.0;
        for k in 0..panels {
            let mid = (k as f64 + 0.5) * width;
            for (n, w) in NODES.iter().zip(WEIGHTS) {
                let t = mid + 0.5 * width * n;
                sum += w * t / t.exp_m1();
            }
        }
        sum * 0.5 * width / x
    }

    pub fn tau(theta: f64) -> f64 {
        if theta.abs() < 1e-6 {
            return theta / 9.0;
        }
        1.0 - 4.0 / theta * (1.0 - debye1(theta))
    }
}
