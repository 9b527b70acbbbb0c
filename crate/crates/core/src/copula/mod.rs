//! Bivariate copula families, conditional distribution functions, Kendall's
//! tau, the asymptotic independence test and per-pair maximum likelihood.
//!
//! Family codes follow the common numbering: `0` independence, `1`
//! Gaussian, `2` Student t, `3` Clayton, `4` Gumbel, `5` Frank. Clayton and
//! Gumbel also come rotated by 180° (`13`, `14`), 90° (`23`, `24`) and 270°
//! (`33`, `34`).

mod families;
mod fit;
mod tau;

pub use fit::{brent_minimize, fit_pair, invert_tau, Candidate, Criterion, PairFit, PairFitConfig};
pub use tau::{independence_test, kendall_tau, IndependenceTest};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use families::{clayton, frank, gaussian, gumbel, student};

/// Arguments are clamped to `[EPS, 1 − EPS]` before evaluation.
pub const EPS: f64 = 1e-10;

#[inline]
pub(crate) fn clamp(u: f64) -> f64 {
    u.clamp(EPS, 1.0 - EPS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Independence,
    Gaussian,
    StudentT,
    Clayton,
    Gumbel,
    Frank,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Independence,
        Family::Gaussian,
        Family::StudentT,
        Family::Clayton,
        Family::Gumbel,
        Family::Frank,
    ];

    pub fn base_code(self) -> u16 {
        match self {
            Family::Independence => 0,
            Family::Gaussian => 1,
            Family::StudentT => 2,
            Family::Clayton => 3,
            Family::Gumbel => 4,
            Family::Frank => 5,
        }
    }

    pub fn n_params(self) -> usize {
        match self {
            Family::Independence => 0,
            Family::StudentT => 2,
            _ => 1,
        }
    }

    pub fn rotatable(self) -> bool {
        matches!(self, Family::Clayton | Family::Gumbel)
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "independence" | "indep" | "0" => Ok(Family::Independence),
            "gaussian" | "normal" | "1" => Ok(Family::Gaussian),
            "student_t" | "studentt" | "t" | "2" => Ok(Family::StudentT),
            "clayton" | "3" => Ok(Family::Clayton),
            "gumbel" | "4" => Ok(Family::Gumbel),
            "frank" | "5" => Ok(Family::Frank),
            other => Err(Error::Config(format!("unknown copula family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Rotation {
    #[default]
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub fn degrees(self) -> u16 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 90,
            Rotation::R180 => 180,
            Rotation::R270 => 270,
        }
    }

    /// Rotation of the copula of `(V, U)` when this is the copula of `(U, V)`.
    pub fn swapped(self) -> Rotation {
        match self {
            Rotation::R90 => Rotation::R270,
            Rotation::R270 => Rotation::R90,
            r => r,
        }
    }
}

/// A parametrized bivariate copula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCopula {
    pub family: Family,
    #[serde(default)]
    pub rotation: Rotation,
    #[serde(default)]
    pub par: f64,
    #[serde(default)]
    pub par2: f64,
}

impl Default for PairCopula {
    fn default() -> Self {
        PairCopula::independence()
    }
}

impl PairCopula {
    pub fn independence() -> Self {
        PairCopula {
            family: Family::Independence,
            rotation: Rotation::R0,
            par: 0.0,
            par2: 0.0,
        }
    }

    pub fn gaussian(rho: f64) -> Result<Self> {
        Self::new(Family::Gaussian, Rotation::R0, rho, 0.0)
    }

    pub fn student_t(rho: f64, nu: f64) -> Result<Self> {
        Self::new(Family::StudentT, Rotation::R0, rho, nu)
    }

    pub fn clayton(theta: f64, rotation: Rotation) -> Result<Self> {
        Self::new(Family::Clayton, rotation, theta, 0.0)
    }

    pub fn gumbel(theta: f64, rotation: Rotation) -> Result<Self> {
        Self::new(Family::Gumbel, rotation, theta, 0.0)
    }

    pub fn frank(theta: f64) -> Result<Self> {
        Self::new(Family::Frank, Rotation::R0, theta, 0.0)
    }

    /// Validated constructor.
    pub fn new(family: Family, rotation: Rotation, par: f64, par2: f64) -> Result<Self> {
        let c = PairCopula {
            family,
            rotation,
            par,
            par2,
        };
        c.check()?;
        Ok(c)
    }

    pub fn check(&self) -> Result<()> {
        let (p, p2) = (self.par, self.par2);
        let ok = match self.family {
            Family::Independence => true,
            Family::Gaussian => p.abs() < 1.0,
            Family::StudentT => p.abs() < 1.0 && p2 > 2.0 && p2.is_finite(),
            Family::Clayton => p > 0.0 && p.is_finite(),
            Family::Gumbel => p >= 1.0 && p.is_finite(),
            Family::Frank => p != 0.0 && p.is_finite(),
        };
        if !ok {
            return Err(Error::Domain(format!(
                "parameters ({p}, {p2}) outside the domain of {:?}",
                self.family
            )));
        }
        if self.rotation != Rotation::R0 && !self.family.rotatable() {
            return Err(Error::Domain(format!("{:?} has no rotated versions", self.family)));
        }
        Ok(())
    }

    /// Numeric family code, rotations included.
    pub fn code(&self) -> u16 {
        let base = self.family.base_code();
        match self.rotation {
            Rotation::R0 => base,
            Rotation::R180 => 10 + base,
            Rotation::R90 => 20 + base,
            Rotation::R270 => 30 + base,
        }
    }

    pub fn from_code(code: u16, par: f64, par2: f64) -> Result<Self> {
        let (rotation, base) = match code {
            0..=5 => (Rotation::R0, code),
            13 | 14 => (Rotation::R180, code - 10),
            23 | 24 => (Rotation::R90, code - 20),
            33 | 34 => (Rotation::R270, code - 30),
            _ => return Err(Error::Domain(format!("unknown family code {code}"))),
        };
        let family = Family::ALL[base as usize];
        let par = if family == Family::Independence { 0.0 } else { par };
        let par2 = if family == Family::StudentT { par2 } else { 0.0 };
        Self::new(family, rotation, par, par2)
    }

    pub fn n_params(&self) -> usize {
        self.family.n_params()
    }

    pub fn is_independence(&self) -> bool {
        self.family == Family::Independence
    }

    /// Copula of `(V, U)`.
    pub fn swapped(&self) -> PairCopula {
        PairCopula {
            rotation: self.rotation.swapped(),
            ..*self
        }
    }

    /// Population Kendall's tau.
    pub fn tau(&self) -> f64 {
        let base = match self.family {
            Family::Independence => 0.0,
            Family::Gaussian | Family::StudentT => gaussian::tau(self.par),
            Family::Clayton => clayton::tau(self.par),
            Family::Gumbel => gumbel::tau(self.par),
            Family::Frank => frank::tau(self.par),
        };
        match self.rotation {
            Rotation::R90 | Rotation::R270 => -base,
            _ => base,
        }
    }

    /// Evaluator with per-copula precomputation.
    pub fn evaluator(&self) -> Evaluator {
        Evaluator {
            cop: *self,
            t: (self.family == Family::StudentT).then(|| student::Kernel::new(self.par2)),
        }
    }

    /// Density at an interior point.
    pub fn density(&self, u: f64, v: f64) -> Result<f64> {
        check_open(u, v)?;
        Ok(self.evaluator().ln_pdf(u, v).exp())
    }

    /// `h(u | v) = ∂C(u, v)/∂v`.
    pub fn h_function(&self, u: f64, v: f64) -> Result<f64> {
        check_open(u, v)?;
        Ok(self.evaluator().h(u, v))
    }

    /// Solves `h(u | v) = p` for `u`.
    pub fn h_inverse(&self, p: f64, v: f64) -> Result<f64> {
        check_open(p, v)?;
        Ok(self.evaluator().h_inv(p, v))
    }
}

fn check_open(u: f64, v: f64) -> Result<()> {
    if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
        return Err(Error::Domain(format!("arguments ({u}, {v}) not inside (0,1)²")));
    }
    Ok(())
}

/// Copula plus cached distribution objects; the methods clamp their
/// arguments instead of rejecting boundary values.
#[derive(Debug, Clone)]
pub struct Evaluator {
    cop: PairCopula,
    t: Option<student::Kernel>,
}

impl Evaluator {
    pub fn copula(&self) -> &PairCopula {
        &self.cop
    }

    fn base_ln_pdf(&self, u: f64, v: f64) -> f64 {
        let p = self.cop.par;
        match self.cop.family {
            Family::Independence => 0.0,
            Family::Gaussian => gaussian::ln_pdf(p, u, v),
            Family::StudentT => self.t.as_ref().expect("t kernel").ln_pdf(p, u, v),
            Family::Clayton => clayton::ln_pdf(p, u, v),
            Family::Gumbel => gumbel::ln_pdf(p, u, v),
            Family::Frank => frank::ln_pdf(p, u, v),
        }
    }

    fn base_h(&self, u: f64, v: f64) -> f64 {
        let p = self.cop.par;
        let h = match self.cop.family {
            Family::Independence => u,
            Family::Gaussian => gaussian::h(p, u, v),
            Family::StudentT => self.t.as_ref().expect("t kernel").h(p, u, v),
            Family::Clayton => clayton::h(p, u, v),
            Family::Gumbel => gumbel::h(p, u, v),
            Family::Frank => frank::h(p, u, v),
        };
        clamp(h)
    }

    fn base_h_inv(&self, q: f64, v: f64) -> f64 {
        let p = self.cop.par;
        let u = match self.cop.family {
            Family::Independence => q,
            Family::Gaussian => gaussian::h_inv(p, q, v),
            Family::StudentT => self.t.as_ref().expect("t kernel").h_inv(p, q, v),
            Family::Clayton => clayton::h_inv(p, q, v),
            Family::Gumbel => gumbel::h_inv(p, q, v),
            Family::Frank => frank::h_inv(p, q, v),
        };
        clamp(u)
    }

    /// Log-density.
    pub fn ln_pdf(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp(u), clamp(v));
        match self.cop.rotation {
            Rotation::R0 => self.base_ln_pdf(u, v),
            Rotation::R90 => self.base_ln_pdf(1.0 - u, v),
            Rotation::R180 => self.base_ln_pdf(1.0 - u, 1.0 - v),
            Rotation::R270 => self.base_ln_pdf(u, 1.0 - v),
        }
    }

    /// `∂C(u, v)/∂v`, the distribution of the first argument given the second.
    pub fn h(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp(u), clamp(v));
        match self.cop.rotation {
            Rotation::R0 => self.base_h(u, v),
            Rotation::R90 => clamp(1.0 - self.base_h(1.0 - u, v)),
            Rotation::R180 => clamp(1.0 - self.base_h(1.0 - u, 1.0 - v)),
            Rotation::R270 => self.base_h(u, 1.0 - v),
        }
    }

    /// Inverse of [`h`](Self::h) in its first argument.
    pub fn h_inv(&self, p: f64, v: f64) -> f64 {
        let (p, v) = (clamp(p), clamp(v));
        match self.cop.rotation {
            Rotation::R0 => self.base_h_inv(p, v),
            Rotation::R90 => clamp(1.0 - self.base_h_inv(1.0 - p, v)),
            Rotation::R180 => clamp(1.0 - self.base_h_inv(1.0 - p, 1.0 - v)),
            Rotation::R270 => self.base_h_inv(p, 1.0 - v),
        }
    }

    /// `∂C(u, v)/∂u`, the distribution of the second argument given the first.
    pub fn h_first(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp(u), clamp(v));
        match self.cop.rotation {
            Rotation::R0 => self.base_h(v, u),
            Rotation::R90 => self.base_h(v, 1.0 - u),
            Rotation::R180 => clamp(1.0 - self.base_h(1.0 - v, 1.0 - u)),
            Rotation::R270 => clamp(1.0 - self.base_h(1.0 - v, u)),
        }
    }

    /// Inverse of [`h_first`](Self::h_first) in `v`.
    pub fn h_first_inv(&self, p: f64, u: f64) -> f64 {
        let (p, u) = (clamp(p), clamp(u));
        match self.cop.rotation {
            Rotation::R0 => self.base_h_inv(p, u),
            Rotation::R90 => self.base_h_inv(p, 1.0 - u),
            Rotation::R180 => clamp(1.0 - self.base_h_inv(1.0 - p, 1.0 - u)),
            Rotation::R270 => clamp(1.0 - self.base_h_inv(1.0 - p, u)),
        }
    }

    /// Sum of log-densities over paired observations.
    pub fn loglik(&self, u: &[f64], v: &[f64]) -> f64 {
        if self.cop.is_independence() {
            return 0.0;
        }
        u.iter().zip(v).map(|(a, b)| self.ln_pdf(*a, *b)).sum()
    }
}
