use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use vinelasso::copula::{Criterion, PairFitConfig};
use vinelasso::data::Scale;
use vinelasso::lasso::CvRule;
use vinelasso::select::SelectionConfig;
use vinelasso::threshold::{power_grid, ThresholdSpec};
use vinelasso::{Error, Family, Result, VineFitConfig};

/// Settings of a run. Every field can come from the JSON config file and be
/// overridden on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub scale: Scale,
    pub header: bool,
    pub seed: u64,
    pub k_folds: usize,
    pub cv_rule: CvRule,
    /// Single thresholds `λ_T`.
    pub thresholds: Vec<f64>,
    /// Adaptive shares `μ`.
    pub adaptive: Vec<f64>,
    pub families: Vec<Family>,
    /// Level of the independence pre-test; `null` disables it.
    pub alpha: Option<f64>,
    pub criterion: Criterion,
    pub truncations: Vec<usize>,
    pub output: PathBuf,
    /// Worker threads; `null` uses all cores.
    pub threads: Option<usize>,
    pub include_sem: bool,
    pub include_dissmann: bool,
    /// Structure artifact reused by `sweep`, `fit` and `compare`.
    pub structure: Option<PathBuf>,
    /// Model file read by `simulate`.
    pub model: Option<PathBuf>,
    pub n_sim: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            scale: Scale::X,
            header: true,
            seed: 42,
            k_folds: 5,
            cv_rule: CvRule::OneSe,
            thresholds: power_grid(0.05, 0.5, 0.05, 4.0).expect("static grid"),
            adaptive: Vec::new(),
            families: Family::ALL.to_vec(),
            alpha: Some(0.05),
            criterion: Criterion::Aic,
            truncations: vec![2, 5, 10],
            output: PathBuf::from("out"),
            threads: None,
            include_sem: true,
            include_dissmann: true,
            structure: None,
            model: None,
            n_sim: 1000,
        }
    }
}

/// Stages draw their seeds from the master seed.
#[derive(Debug, Clone, Copy)]
pub enum Stage {
    Selection,
    Simulation,
}

impl RunConfig {
    pub fn stage_seed(&self, stage: Stage) -> u64 {
        match stage {
            Stage::Selection => self.seed,
            Stage::Simulation => self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn check(&self) -> Result<()> {
        if self.families.is_empty() {
            return Err(Error::Config("empty candidate family set".into()));
        }
        if self.k_folds < 2 {
            return Err(Error::Config(format!("k_folds must be at least 2, got {}", self.k_folds)));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Config(format!("alpha must lie in (0, 1), got {a}")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        for spec in self.threshold_specs() {
            spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Grid stages need at least one threshold.
    pub fn require_grid(&self) -> Result<Vec<ThresholdSpec>> {
        let specs = self.threshold_specs();
        if specs.is_empty() {
            return Err(Error::Config("empty threshold grid".into()));
        }
        Ok(specs)
    }

    pub fn threshold_specs(&self) -> Vec<ThresholdSpec> {
        self.thresholds
            .iter()
            .map(|&t| ThresholdSpec::Single(t))
            .chain(self.adaptive.iter().map(|&m| ThresholdSpec::Adaptive(m)))
            .collect()
    }

    pub fn input(&self) -> Result<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| Error::Config("no input file given".into()))
    }

    pub fn selection(&self) -> SelectionConfig {
        SelectionConfig {
            k_folds: self.k_folds,
            seed: self.stage_seed(Stage::Selection),
            cv_rule: self.cv_rule,
            ..SelectionConfig::default()
        }
    }

    pub fn vine(&self) -> VineFitConfig {
        VineFitConfig {
            pair: PairFitConfig {
                families: self.families.clone(),
                criterion: self.criterion,
                independence_alpha: self.alpha,
                ..PairFitConfig::default()
            },
            parallel: self.threads != Some(1),
        }
    }
}

fn family(s: &str) -> std::result::Result<Family, String> {
    s.parse::<Family>().map_err(|e| e.to_string())
}

fn alpha(s: &str) -> std::result::Result<Option<f64>, String> {
    match s {
        "none" | "off" => Ok(None),
        x => x.parse::<f64>().map(Some).map_err(|e| e.to_string()),
    }
}

fn criterion(s: &str) -> std::result::Result<Criterion, String> {
    match s.to_ascii_lowercase().as_str() {
        "aic" => Ok(Criterion::Aic),
        "bic" => Ok(Criterion::Bic),
        other => Err(format!("unknown criterion '{other}'")),
    }
}

fn cv_rule(s: &str) -> std::result::Result<CvRule, String> {
    match s {
        "min" => Ok(CvRule::Min),
        "1se" | "one_se" => Ok(CvRule::OneSe),
        other => Err(format!("unknown CV rule '{other}'")),
    }
}

/// Command-line overrides shared by all subcommands.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON config file; flags below take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, short, global = true)]
    pub input: Option<PathBuf>,
    /// Scale of the input: x (raw), u (copula) or z (normal scores).
    #[arg(long, global = true)]
    pub scale: Option<Scale>,
    /// Input CSV has no header line.
    #[arg(long, global = true)]
    pub no_header: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub k_folds: Option<usize>,
    /// `min` or `1se`.
    #[arg(long, global = true, value_parser = cv_rule)]
    pub cv_rule: Option<CvRule>,
    /// Comma-separated single thresholds.
    #[arg(long, global = true, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
    /// Comma-separated adaptive shares.
    #[arg(long, global = true, value_delimiter = ',')]
    pub adaptive: Option<Vec<f64>>,
    /// Comma-separated families, e.g. `gaussian,t,clayton`.
    #[arg(long, global = true, value_delimiter = ',', value_parser = family)]
    pub families: Option<Vec<Family>>,
    /// Independence-test level, or `none`.
    #[arg(long, global = true, value_parser = alpha)]
    pub alpha: Option<Option<f64>>,
    #[arg(long, global = true, value_parser = criterion)]
    pub criterion: Option<Criterion>,
    /// Comma-separated truncation levels of the baseline.
    #[arg(long, global = true, value_delimiter = ',')]
    pub truncations: Option<Vec<usize>>,
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub no_sem: bool,
    #[arg(long, global = true)]
    pub no_dissmann: bool,
    #[arg(long, global = true)]
    pub structure: Option<PathBuf>,
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Number of draws for `simulate`.
    #[arg(long, short = 'n', global = true)]
    pub n_sim: Option<usize>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field {
                    c.$field = v.clone().into();
                })*
            };
        }
        set!(scale, seed, k_folds, cv_rule, thresholds, adaptive, families, alpha, criterion, truncations, output, n_sim);
        if let Some(p) = &self.input {
            c.input = Some(p.clone());
        }
        if let Some(t) = self.threads {
            c.threads = Some(t);
        }
        if let Some(p) = &self.structure {
            c.structure = Some(p.clone());
        }
        if let Some(p) = &self.model {
            c.model = Some(p.clone());
        }
        if self.no_header {
            c.header = false;
        }
        if self.no_sem {
            c.include_sem = false;
        }
        if self.no_dissmann {
            c.include_dissmann = false;
        }
        c.check()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_is_fourth_powers() {
        let c = RunConfig::default();
        assert_eq!(c.thresholds.len(), 10);
        assert!((c.thresholds[9] - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"seed": 7, "k_folds": 4}"#).unwrap();
        let o = Overrides {
            config: Some(path),
            seed: Some(9),
            ..Overrides::default()
        };
        let c = o.resolve().unwrap();
        assert_eq!((c.seed, c.k_folds), (9, 4));
    }

    #[test]
    fn empty_family_set_is_rejected() {
        let o = Overrides {
            families: Some(Vec::new()),
            ..Overrides::default()
        };
        assert!(matches!(o.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"sede": 7}"#).unwrap();
        assert!(RunConfig::load(&path).is_err());
    }
}
