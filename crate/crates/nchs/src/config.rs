use std::path::PathBuf;

use nchs_core::SubdiagonalModel;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "NCHS_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Everything that determines a run. Reports echo it verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub model: Option<SubdiagonalModel>,
    pub inputs: Vec<PathBuf>,
    pub tol: f64,
    pub cutoffs: Vec<usize>,
    pub seed: u64,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub jobs: usize,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_owned(),
            model: None,
            inputs: Vec::new(),
            tol: DEFAULT_TOL,
            cutoffs: Vec::new(),
            seed: DEFAULT_SEED,
            format: OutputFormat::Json,
            out: None,
            jobs: 1,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be positive, got {}", self.tol)));
        }
        if self.jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        if self.cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Usage("--cutoffs must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn model(&self) -> CliResult<SubdiagonalModel> {
        self.model
            .ok_or_else(|| CliError::Usage(format!("`{}` needs --model", self.command)))
    }

    /// Cutoffs for Fourier sections; the Triangular model ignores them.
    pub fn cutoffs_for(&self, model: &SubdiagonalModel) -> Vec<usize> {
        match model {
            SubdiagonalModel::Triangular { n } => vec![*n],
            SubdiagonalModel::Fourier { .. } if self.cutoffs.is_empty() => {
                let top = model.max_cutoff().min(64);
                vec![top / 4, top / 2, top]
            }
            SubdiagonalModel::Fourier { .. } => self.cutoffs.clone(),
        }
    }

    /// Echo written into reports. The worker count is left out because
    /// output does not depend on it.
    pub fn echo(&self) -> Value {
        json!({
            "command": self.command,
            "model": self.model.map(|m| m.to_string()),
            "inputs": self.inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "tol": self.tol,
            "cutoffs": self.cutoffs,
            "seed": self.seed,
            "format": self.format,
        })
    }
}

/// `NCHS_SEED` wins over `--seed`.
pub fn resolve_seed(flag: Option<u64>) -> CliResult<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not a 64-bit integer"))),
        Err(_) => Ok(flag.unwrap_or(DEFAULT_SEED)),
    }
}

pub fn parse_cutoffs(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("cutoff {t:?}: {e}")))
        .collect()
}
