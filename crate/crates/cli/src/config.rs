//! Experiment configuration: one TOML file with shared keys and a table per
//! subcommand. Command-line flags override file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use subconc_core::{ConvexBody, PriorFamily};

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub sharpness: SharpnessSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub net: NetSection,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    UniformShift { a: f64, r: f64 },
    BallShift { a: f64, r: f64, theta1: ConvexBody },
}

impl FamilySpec {
    pub fn build(&self, n: usize) -> Result<PriorFamily, CliError> {
        let fam = match self {
            FamilySpec::UniformShift { a, r } => PriorFamily::uniform_shift(*a, *r, n),
            FamilySpec::BallShift { a, r, theta1 } => PriorFamily::ball_shift(*a, *r, n, theta1.clone()),
        };
        fam.map_err(|e| CliError::config(format!("family: {e}")))
    }
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    pub n: Option<u64>,
    pub d: Option<usize>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub sigma_sq: Option<f64>,
    pub t_grid: Option<Vec<f64>>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub family: Option<FamilySpec>,
    pub n: Option<usize>,
    pub t_grid: Option<Vec<f64>>,
    pub replicates: Option<u64>,
    pub random_priors: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessSection {
    pub a: Option<f64>,
    pub sigma: Option<f64>,
    pub n_grid: Option<Vec<usize>>,
    pub replicates: Option<u64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    /// Shipped space names or paths to space files.
    pub spaces: Option<Vec<String>>,
    pub probes: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetSection {
    pub d: Option<usize>,
    pub samples: Option<usize>,
    pub transfer_trials: Option<usize>,
}

pub const DEFAULT_REPLICATES: u64 = 100_000;
pub const DEFAULT_GRID_POINTS: usize = 17;

/// `2M·k/18` for `k = 1..=17`: evenly spaced over the nonvacuous range.
pub fn default_t_grid(m: f64) -> Vec<f64> {
    (1..=DEFAULT_GRID_POINTS)
        .map(|k| 2.0 * m * k as f64 / (DEFAULT_GRID_POINTS + 1) as f64)
        .collect()
}

pub fn check_t_grid(grid: &[f64]) -> Result<(), CliError> {
    if grid.is_empty() {
        return Err(CliError::config("t grid is empty"));
    }
    if let Some(t) = grid.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(CliError::config(format!("t grid value {t} is not positive")));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(CliError::config("t grid must be strictly ascending"));
    }
    Ok(())
}

/// Parses `0.05,0.1,0.2` style lists.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| format!("cannot parse `{x}`")))
        .collect()
}
