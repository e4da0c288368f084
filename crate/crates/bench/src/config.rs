//! Experiment description: a TOML file, overridden field by field from the
//! command line. Fields left unset take experiment-specific defaults, which
//! the runners write back so the provenance line records every value used.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::functions::FunctionId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    ApproxFn,
    Helmholtz,
    PoissonBench,
    Bratu,
    AllenCahn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// `ε_H = θ ρ_k`.
    Residual,
    /// `ε_H` fixed at `eps_h0`.
    Constant,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentId>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Record wall-clock columns (these differ between runs).
    pub timing: bool,

    pub n: Option<usize>,
    pub d: Option<usize>,
    /// Absolute tolerance, except: the per-entry RMS tolerance for
    /// poisson-bench and the relative stop tolerance for bratu, allen-cahn.
    pub tol: Option<f64>,

    pub function: Option<FunctionId>,
    pub ranks: Option<Vec<usize>>,
    pub tolerances: Option<Vec<f64>>,

    pub kappa: Option<Vec<f64>>,
    pub x_start: Option<f64>,
    pub x_stop: Option<f64>,
    pub x_step: Option<f64>,

    pub levels: Option<Vec<u32>>,
    pub validate_dense: Option<bool>,

    pub theta: Option<f64>,
    pub window: Option<usize>,
    pub c2d_max_iters: Option<usize>,
    pub precond: Option<bool>,
    pub schedule: Option<ScheduleKind>,
    pub eps_h0: Option<f64>,
    pub alpha: Option<f64>,
    pub max_iter: Option<usize>,
    pub lambda: Option<f64>,
    pub steps: Option<usize>,
    pub dt: Option<f64>,
    pub nu: Option<f64>,
}

/// Command-line overrides of the config file.
#[derive(Clone, Debug, Default, Args)]
pub struct Overrides {
    #[arg(long, value_enum)]
    pub experiment: Option<ExperimentId>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub c2d_max_iters: Option<usize>,
    #[arg(long, action = ArgAction::Set)]
    pub precond: Option<bool>,
    #[arg(long, value_enum)]
    pub function: Option<FunctionId>,
    #[arg(long, value_enum)]
    pub schedule: Option<ScheduleKind>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("parsing experiment config")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn for_experiment(id: ExperimentId) -> Self {
        Self { experiment: Some(id), ..Self::default() }
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($f:ident),*) => { $( if o.$f.is_some() { self.$f = o.$f.clone(); } )* };
        }
        set!(experiment, n, d, tol, out, theta, window, c2d_max_iters, precond, function, schedule, steps);
        if let Some(s) = o.seed {
            self.seed = s;
        }
        self.timing |= o.timing;
    }

    pub fn id(&self) -> Result<ExperimentId> {
        match self.experiment {
            Some(id) => Ok(id),
            None => bail!("no experiment selected (set `experiment` or pass --experiment)"),
        }
    }

    /// One-line JSON rendering of the config for the provenance comment.
    pub fn provenance(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("tucker-bench {} config={json}", env!("CARGO_PKG_VERSION"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_kebab_case_ids_and_rejects_unknown_keys() {
        let c = ExperimentConfig::from_toml("experiment = \"poisson-bench\"\nn = 31\nlevels = [5, 6]\n").unwrap();
        assert_eq!(c.experiment, Some(ExperimentId::PoissonBench));
        assert_eq!(c.levels, Some(vec![5, 6]));
        assert!(ExperimentConfig::from_toml("experiment = \"bratu\"\nbogus = 1\n").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"heat\"\n").is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let mut c = ExperimentConfig::from_toml("experiment = \"bratu\"\nn = 32\ntheta = 0.5\n").unwrap();
        let o = Overrides { n: Some(64), precond: Some(false), seed: Some(7), ..Overrides::default() };
        c.apply(&o);
        assert_eq!((c.n, c.theta, c.precond, c.seed), (Some(64), Some(0.5), Some(false), 7));
    }

    #[test]
    fn missing_experiment_is_an_error() {
        assert!(ExperimentConfig::default().id().is_err());
    }
}
