use serde::{Deserialize, Serialize};

use super::families::frank;
use super::tau::{kendall_tau, test_from_tau, IndependenceTest};
use super::{clamp, Family, PairCopula, Rotation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Aic,
    Bic,
}

impl Criterion {
    pub fn value(self, loglik: f64, k: usize, n: usize) -> f64 {
        match self {
            Criterion::Aic => -2.0 * loglik + 2.0 * k as f64,
            Criterion::Bic => -2.0 * loglik + (n as f64).ln() * k as f64,
        }
    }
}

/// Settings for one pair fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFitConfig {
    pub families: Vec<Family>,
    pub criterion: Criterion,
    /// Level of the independence pre-test; `None` skips it.
    pub independence_alpha: Option<f64>,
    /// Optimizer tolerance on the parameter scale.
    pub tol: f64,
}

impl Default for PairFitConfig {
    fn default() -> Self {
        PairFitConfig {
            families: Family::ALL.to_vec(),
            criterion: Criterion::Aic,
            independence_alpha: Some(0.05),
            tol: 1e-6,
        }
    }
}

/// One candidate that was fitted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub copula: PairCopula,
    pub loglik: f64,
    pub criterion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairFit {
    pub copula: PairCopula,
    pub loglik: f64,
    pub criterion: f64,
    pub tau: f64,
    pub test: Option<IndependenceTest>,
    pub candidates: Vec<Candidate>,
    /// Families whose fit failed, with the reason.
    pub failures: Vec<(Family, String)>,
}

/// Bounded Brent minimization (golden section with parabolic steps) started
/// at `x0`. Returns the minimizer and the objective there.
pub fn brent_minimize<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    x0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, f64)> {
    if !(lo < hi) {
        return Err(Error::Numeric(format!("empty bracket [{lo}, {hi}]")));
    }
    const CGOLD: f64 = 0.381_966_011_250_105;
    let (mut a, mut b) = (lo, hi);
    let mut x = x0.clamp(lo, hi);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-10;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            if !fx.is_finite() {
                return Err(Error::Numeric("objective not finite at optimum".into()));
            }
            return Ok((x, fx));
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let uu = x + d;
                if uu - a < tol2 || b - uu < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let uu = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let uu = uu.clamp(lo, hi);
        let mut fu = f(uu);
        if fu.is_nan() {
            fu = f64::INFINITY;
        }
        if fu <= fx {
            if uu >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = uu;
            fx = fu;
        } else {
            if uu < x {
                a = uu;
            } else {
                b = uu;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = uu;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = uu;
                fv = fu;
            }
        }
    }
    Err(Error::Numeric(format!("Brent search did not converge in {max_iter} iterations")))
}

/// Closed-form or numeric inversion of the tau of an unrotated family;
/// `None` for families without a single parameter.
pub fn invert_tau(family: Family, tau: f64) -> Option<f64> {
    match family {
        Family::Gaussian | Family::StudentT => Some((std::f64::consts::FRAC_PI_2 * tau).sin()),
        Family::Clayton => Some(2.0 * tau / (1.0 - tau)),
        Family::Gumbel => Some(1.0 / (1.0 - tau)),
        Family::Frank => {
            if tau == 0.0 {
                return None;
            }
            let target = tau.clamp(-0.95, 0.95);
            let (mut lo, mut hi) = if target > 0.0 { (1e-6, 200.0) } else { (-200.0, -1e-6) };
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if frank::tau(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(0.5 * (lo + hi))
        }
        Family::Independence => None,
    }
}

const RHO_MAX: f64 = 0.9999;
const NU_RANGE: (f64, f64) = (2.0001, 30.0);
const MAX_ITER: usize = 200;

fn loglik(c: &PairCopula, u: &[f64], v: &[f64]) -> f64 {
    let ll = c.evaluator().loglik(u, v);
    if ll.is_nan() {
        f64::NEG_INFINITY
    } else {
        ll
    }
}

/// One-parameter family fitted over `[lo, hi]` from `start`.
fn fit_one(
    family: Family,
    rotation: Rotation,
    (lo, hi): (f64, f64),
    start: f64,
    u: &[f64],
    v: &[f64],
    tol: f64,
) -> Result<(PairCopula, f64)> {
    let make = |p: f64| PairCopula {
        family,
        rotation,
        par: p,
        par2: 0.0,
    };
    let (p, nll) = brent_minimize(|p| -loglik(&make(p), u, v), lo, hi, start, tol, MAX_ITER)?;
    let c = PairCopula::new(family, rotation, p, 0.0)?;
    Ok((c, -nll))
}

fn fit_student(u: &[f64], v: &[f64], tau: f64, tol: f64) -> Result<(PairCopula, f64)> {
    let mut rho = invert_tau(Family::StudentT, tau).unwrap().clamp(-RHO_MAX, RHO_MAX);
    let mut nu = 5.0;
    let mut best = f64::NEG_INFINITY;
    for _ in 0..20 {
        let (r, _) = brent_minimize(
            |r| -loglik(&PairCopula { family: Family::StudentT, rotation: Rotation::R0, par: r, par2: nu }, u, v),
            -RHO_MAX,
            RHO_MAX,
            rho,
            tol,
            MAX_ITER,
        )?;
        rho = r;
        let (n, nll) = brent_minimize(
            |n| -loglik(&PairCopula { family: Family::StudentT, rotation: Rotation::R0, par: rho, par2: n }, u, v),
            NU_RANGE.0,
            NU_RANGE.1,
            nu,
            tol,
            MAX_ITER,
        )?;
        let moved = (n - nu).abs() > 1e-4 * nu;
        nu = n;
        let ll = -nll;
        let gain = ll - best;
        best = ll;
        if !moved && gain.abs() < 1e-8 * (1.0 + ll.abs()) {
            break;
        }
    }
    Ok((PairCopula::student_t(rho, nu)?, best))
}

fn fit_family(family: Family, u: &[f64], v: &[f64], tau: f64, tol: f64) -> Vec<Result<(PairCopula, f64)>> {
    let at = tau.abs().min(0.95);
    match family {
        Family::Independence => vec![Ok((PairCopula::independence(), 0.0))],
        Family::Gaussian => {
            let start = invert_tau(family, tau).unwrap();
            vec![fit_one(family, Rotation::R0, (-RHO_MAX, RHO_MAX), start, u, v, tol)]
        }
        Family::StudentT => vec![fit_student(u, v, tau, tol)],
        Family::Clayton | Family::Gumbel => {
            let rots = if tau >= 0.0 {
                [Rotation::R0, Rotation::R180]
            } else {
                [Rotation::R90, Rotation::R270]
            };
            let (bounds, start) = if family == Family::Clayton {
                ((1e-4, 30.0), invert_tau(family, at).unwrap())
            } else {
                ((1.0, 20.0), invert_tau(family, at).unwrap())
            };
            rots.iter()
                .map(|&r| fit_one(family, r, bounds, start.clamp(bounds.0, bounds.1), u, v, tol))
                .collect()
        }
        Family::Frank => {
            let bounds = if tau >= 0.0 { (1e-4, 40.0) } else { (-40.0, -1e-4) };
            let start = invert_tau(family, tau)
                .unwrap_or(bounds.0)
                .clamp(bounds.0, bounds.1);
            vec![fit_one(family, Rotation::R0, bounds, start, u, v, tol)]
        }
    }
}

/// Fits every candidate family to the pair `(u, v)` and keeps the one with
/// the smallest criterion value. With an independence level set, a retained
/// null returns the independence copula without optimization.
pub fn fit_pair(u: &[f64], v: &[f64], cfg: &PairFitConfig) -> Result<PairFit> {
    let n = u.len();
    if v.len() != n {
        return Err(Error::Shape(format!("fit_pair: lengths {} and {}", n, v.len())));
    }
    if n < 10 {
        return Err(Error::Contract(format!("fit_pair needs n ≥ 10, got {n}")));
    }
    if u.iter().chain(v).any(|x| !(*x >= 0.0 && *x <= 1.0)) {
        return Err(Error::Domain("fit_pair: observations outside [0,1]".into()));
    }
    if cfg.families.is_empty() {
        return Err(Error::Config("no candidate families".into()));
    }
    let u: Vec<f64> = u.iter().map(|&x| clamp(x)).collect();
    let v: Vec<f64> = v.iter().map(|&x| clamp(x)).collect();
    let tau = kendall_tau(&u, &v)?;

    let test = cfg.independence_alpha.map(|a| test_from_tau(tau, n, a));
    if test.map_or(false, |t| t.independent) {
        let c = PairCopula::independence();
        return Ok(PairFit {
            copula: c,
            loglik: 0.0,
            criterion: 0.0,
            tau,
            test,
            candidates: vec![Candidate {
                copula: c,
                loglik: 0.0,
                criterion: 0.0,
            }],
            failures: Vec::new(),
        });
    }

    let mut candidates = Vec::new();
    let mut failures = Vec::new();
    for &fam in &cfg.families {
        for res in fit_family(fam, &u, &v, tau, cfg.tol) {
            match res {
                Ok((c, ll)) if ll.is_finite() => candidates.push(Candidate {
                    copula: c,
                    loglik: ll,
                    criterion: cfg.criterion.value(ll, c.n_params(), n),
                }),
                Ok((_, ll)) => failures.push((fam, format!("log-likelihood {ll}"))),
                Err(e) => failures.push((fam, e.to_string())),
            }
        }
    }
    let best = candidates
        .iter()
        .min_by(|a, b| a.criterion.total_cmp(&b.criterion))
        .cloned()
        .ok_or_else(|| Error::Fit {
            edge: String::new(),
            msg: format!("all candidate families failed: {failures:?}"),
        })?;
    Ok(PairFit {
        copula: best.copula,
        loglik: best.loglik,
        criterion: best.criterion,
        tau,
        test,
        candidates,
        failures,
    })
}
