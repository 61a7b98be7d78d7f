//! Optional TOML experiment configuration. Command-line flags win over the
//! file; `GENEO_SEED` (read through the `--seed` flag) wins over the file's
//! seed.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use geneo::FunctionSpace;
use serde::Deserialize;

pub const DEFAULT_N: usize = 360;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_PROBES: usize = 50;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: Option<usize>,
    pub group: Option<String>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub probes: Option<usize>,
    #[serde(default)]
    pub space: SpaceConfig,
    /// Operator expressions placed first in `gap` families.
    #[serde(default)]
    pub operators: Vec<String>,
    /// Function CSV files for `gap`; relative paths are taken from the
    /// config file's directory.
    #[serde(default)]
    pub corpus: Vec<PathBuf>,
    pub out: Option<PathBuf>,
    pub family_sizes: Option<Vec<usize>>,
    pub max_depth: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub bound: f64,
    pub lipschitz: Option<f64>,
    pub range: Option<[f64; 2]>,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        SpaceConfig {
            bound: 1.0,
            lipschitz: Some(1.0),
            range: Some([0.0, 1.0]),
        }
    }
}

impl SpaceConfig {
    pub fn build(&self) -> Result<FunctionSpace> {
        let mut space = FunctionSpace::new(self.bound)?;
        if let Some(l) = self.lipschitz {
            space = space.with_lipschitz(l)?;
        }
        if let Some([lo, hi]) = self.range {
            space = space.with_range(lo, hi)?;
        }
        Ok(space)
    }
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| crate::io_error(e, path))?;
        let mut config: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for file in &mut config.corpus {
            if file.is_relative() {
                *file = base.join(&*file);
            }
            if !file.exists() {
                bail!(
                    "no such file: {} (listed in {})",
                    file.display(),
                    path.display()
                );
            }
        }
        Ok(config)
    }

    pub fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.seed).unwrap_or(DEFAULT_SEED)
    }

    pub fn n(&self, flag: Option<usize>) -> usize {
        flag.or(self.n).unwrap_or(DEFAULT_N)
    }

    pub fn group(&self, flag: Option<&str>) -> String {
        flag.map(str::to_string)
            .or_else(|| self.group.clone())
            .unwrap_or_else(|| "rotations".into())
    }
}
