//! Experiment configuration and its validation.

use std::path::{Path, PathBuf};

use hypermine::community::{CommunityAlgorithm, DegreeNormalization};
use hypermine::linkpred::{LinkPredAlgorithm, RoundingRule};
use hypermine::spreading::{validate_grid, THRESHOLD_ENSEMBLE};
use hypermine::vitality::Measure;
use hypermine::Source;
use serde::{Deserialize, Serialize};

use crate::grid::{parse_grid, BetaSpec};
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Linkpred,
    Community,
    Vital,
    Sir,
    VitalEval,
    Ablation,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Linkpred => "linkpred",
            Task::Community => "community",
            Task::Vital => "vital",
            Task::Sir => "sir",
            Task::VitalEval => "vital-eval",
            Task::Ablation => "ablation",
        }
    }
}

/// Grid used to locate the epidemic threshold when `rel:` rates are
/// requested without an explicit `beta_grid`.
pub const DEFAULT_THRESHOLD_GRID: &str = "0.001:0.2:40";

fn one() -> usize {
    1
}
fn default_rho() -> f64 {
    0.5
}
fn default_folds() -> usize {
    5
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_gamma() -> f64 {
    0.25
}
fn default_kappa() -> f64 {
    1.25
}
fn default_runs() -> usize {
    100
}
fn default_ensemble() -> usize {
    THRESHOLD_ENSEMBLE
}
fn default_replicates() -> usize {
    5
}

/// Everything needed to reproduce one experiment. Stored verbatim in every
/// result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub dataset: PathBuf,
    #[serde(default)]
    pub labels: Option<PathBuf>,
    /// Algorithm or measure names; empty selects every one the task knows.
    #[serde(default)]
    pub algorithms: Vec<String>,
    /// Master seeds. Tasks other than linkpred and community take one.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Result path; the `.json` and `.csv` siblings are both written.
    pub output: PathBuf,
    #[serde(default)]
    pub dedupe: bool,
    #[serde(default)]
    pub dedupe_within_line: bool,
    #[serde(default)]
    pub source: Source,
    /// Allocation rounds `t` for `P⁽ᵗ⁾`.
    #[serde(default = "one")]
    pub iterate: usize,

    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub rounding: RoundingRule,
    #[serde(default)]
    pub katz_lambda: Option<f64>,

    /// Number of communities; defaults to the label count.
    #[serde(default)]
    pub n_c: Option<usize>,
    #[serde(default)]
    pub normalization: DegreeNormalization,

    #[serde(default)]
    pub katz_gamma: Option<f64>,

    /// Susceptibility grid (`sir`) or threshold search grid (`rel:` rates).
    #[serde(default)]
    pub beta_grid: Option<Vec<f64>>,
    /// Rates at which centralities are evaluated.
    #[serde(default)]
    pub beta: Option<BetaSpec>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// SIR runs per seed node for influence.
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// SIR runs per β point for the susceptibility curve.
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    /// Independent influence estimates behind each τ.
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Where threshold estimates are cached; defaults next to the output.
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults for everything but the required fields.
    pub fn new(task: Task, dataset: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        Self {
            task,
            dataset: dataset.into(),
            labels: None,
            algorithms: Vec::new(),
            seeds: default_seeds(),
            output: output.into(),
            dedupe: false,
            dedupe_within_line: false,
            source: Source::P,
            iterate: 1,
            rho: default_rho(),
            folds: default_folds(),
            rounding: RoundingRule::default(),
            katz_lambda: None,
            n_c: None,
            normalization: DegreeNormalization::default(),
            katz_gamma: None,
            beta_grid: None,
            beta: None,
            gamma: default_gamma(),
            kappa: default_kappa(),
            runs: default_runs(),
            ensemble: default_ensemble(),
            replicates: default_replicates(),
            cache_dir: None,
        }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn linkpred_algorithms(&self) -> CliResult<Vec<LinkPredAlgorithm>> {
        parse_all(&self.algorithms, &LinkPredAlgorithm::ALL)
    }

    pub fn community_algorithms(&self) -> CliResult<Vec<CommunityAlgorithm>> {
        parse_all(&self.algorithms, &CommunityAlgorithm::ALL)
    }

    pub fn measures(&self) -> CliResult<Vec<Measure>> {
        parse_all(&self.algorithms, &Measure::ALL)
    }

    /// The single master seed of tasks that take one.
    pub fn master_seed(&self) -> u64 {
        self.seeds[0]
    }

    /// Grid for the threshold search behind `rel:` rates.
    pub fn threshold_grid(&self) -> Vec<f64> {
        match &self.beta_grid {
            Some(g) => g.clone(),
            None => parse_grid(DEFAULT_THRESHOLD_GRID).expect("default grid parses"),
        }
    }

    /// Range checks for the fields the task uses.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if self.iterate == 0 {
            return bad("iterate must be ≥ 1".into());
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        let single_seed = matches!(self.task, Task::Vital | Task::Sir | Task::VitalEval);
        if single_seed && self.seeds.len() != 1 {
            return bad(format!("task {} takes exactly one seed", self.task.name()));
        }
        match self.task {
            Task::Linkpred => {
                self.linkpred_algorithms()?;
                self.check_linkpred()?;
            }
            Task::Community => {
                self.community_algorithms()?;
                self.check_community()?;
            }
            Task::Vital => {
                self.measures()?;
                self.check_gamma()?;
            }
            Task::Sir => {
                if !self.algorithms.is_empty() {
                    return bad("task sir takes no algorithms".into());
                }
                let grid = self
                    .beta_grid
                    .as_ref()
                    .ok_or_else(|| CliError::config("task sir needs a beta grid"))?;
                validate_grid(grid)?;
                self.check_sir()?;
            }
            Task::VitalEval => {
                self.measures()?;
                self.check_gamma()?;
                self.check_beta(true)?;
                self.check_sir()?;
            }
            Task::Ablation => {
                if !self.algorithms.is_empty() {
                    return bad("task ablation always runs the HRA pipelines and takes no algorithms".into());
                }
                self.check_linkpred()?;
                if self.labels.is_some() {
                    self.check_community()?;
                }
                if self.beta.is_some() {
                    self.check_beta(false)?;
                    self.check_sir()?;
                }
            }
        }
        Ok(())
    }

    fn check_linkpred(&self) -> CliResult<()> {
        if !(0.0..1.0).contains(&self.rho) {
            return Err(CliError::config(format!("rho must lie in [0, 1), got {}", self.rho)));
        }
        if self.folds < 2 {
            return Err(CliError::config(format!("folds must be ≥ 2, got {}", self.folds)));
        }
        if let Some(l) = self.katz_lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(CliError::config(format!("katz_lambda must be > 0, got {l}")));
            }
        }
        Ok(())
    }

    fn check_community(&self) -> CliResult<()> {
        if self.labels.is_none() {
            return Err(CliError::config("community detection needs a label file"));
        }
        if let Some(n) = self.n_c {
            if n < 2 {
                return Err(CliError::config(format!("n_c must be ≥ 2, got {n}")));
            }
        }
        Ok(())
    }

    fn check_gamma(&self) -> CliResult<()> {
        match self.katz_gamma {
            Some(g) if !(g > 0.0 && g.is_finite()) => Err(CliError::config(format!("katz_gamma must be > 0, got {g}"))),
            _ => Ok(()),
        }
    }

    fn check_beta(&self, required: bool) -> CliResult<()> {
        let Some(spec) = &self.beta else {
            return if required {
                Err(CliError::config("an infection rate (beta) is required"))
            } else {
                Ok(())
            };
        };
        if spec.values().is_empty() {
            return Err(CliError::config("beta list is empty"));
        }
        if spec.values().iter().any(|&b| !(b >= 0.0)) {
            return Err(CliError::config("beta values must be ≥ 0"));
        }
        if spec.is_relative() {
            validate_grid(&self.threshold_grid())?;
        }
        Ok(())
    }

    fn check_sir(&self) -> CliResult<()> {
        let sir = hypermine::spreading::SirConfig {
            beta: 0.0,
            gamma: self.gamma,
            kappa: self.kappa,
            runs: self.runs,
            seed: 0,
        };
        sir.validate()?;
        if self.ensemble < 2 {
            return Err(CliError::config("ensemble must be ≥ 2"));
        }
        if self.replicates == 0 {
            return Err(CliError::config("replicates must be ≥ 1"));
        }
        Ok(())
    }
}

fn parse_all<T: Copy + std::str::FromStr<Err = hypermine::Error>>(names: &[String], all: &[T]) -> CliResult<Vec<T>> {
    if names.is_empty() {
        return Ok(all.to_vec());
    }
    let mut out = Vec::with_capacity(names.len());
    for n in names {
        let v = n.parse::<T>().map_err(|e| CliError::Config(e.to_string()))?;
        out.push(v);
    }
    Ok(out)
}
