//! The JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use logsp::potential::PotentialKind;
use logsp::{GridSpec, KernelTables, PotentialModel, Problem, ProblemParams, Seed, SolveConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Lowest exponent either minimization method covers.
pub const MIN_P: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub p: f64,
    pub b: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Summary and residual history as CSV.
    Csv,
    /// Final state as a `LOGSP1` field file.
    Field,
    /// Full result report as JSON.
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("logsp-out"),
            formats: vec![Format::Csv, Format::Field],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub problem: ProblemSection,
    pub potential: PotentialKind,
    #[serde(default)]
    pub solver: SolveConfig,
    #[serde(default)]
    pub output: OutputSection,
}

/// A validated configuration with its problem assembled.
pub struct Run {
    pub config: RunConfig,
    pub spec: GridSpec,
    pub problem: Problem,
}

fn invalid(key: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {reason}"))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads `path`; a relative seed file is resolved against the config's
    /// directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_json(&text)?;
        if let Seed::File { path: seed } = &mut config.solver.seed {
            if seed.is_relative() {
                if let Some(dir) = path.parent() {
                    *seed = dir.join(&*seed);
                }
            }
        }
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every precondition and builds the problem.
    pub fn validate(self) -> Result<Run, CliError> {
        let spec = GridSpec::new(self.grid.half_width, self.grid.n).map_err(|e| invalid("grid", e))?;
        let ProblemSection { p, b } = self.problem;
        if !(p >= MIN_P) || !p.is_finite() {
            return Err(invalid("problem.p", format!("p below supported range (need p >= {MIN_P}), got {p}")));
        }
        let params = ProblemParams::new(p, b).map_err(|e| invalid("problem.b", e))?;
        let potential = PotentialModel::from_kind(self.potential).map_err(|e| invalid("potential.params", e))?;
        self.solver.validate().map_err(|e| invalid("solver", e))?;
        if self.output.formats.is_empty() {
            return Err(invalid("output.formats", "at least one format is required"));
        }
        let problem = Problem::new(params, potential, KernelTables::shared(spec));
        Ok(Run {
            config: self,
            spec,
            problem,
        })
    }
}
