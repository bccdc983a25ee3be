//! Benchmark run configuration, read from TOML.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::client::{EndpointRole, EndpointTable, Role};
use crate::hints::{HintStrategy, MAX_HINTS};
use crate::metrics::InfoGainMode;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategySelection {
    Static,
    Dynamic,
    #[default]
    Both,
}

impl StrategySelection {
    pub fn strategies(self) -> Vec<HintStrategy> {
        match self {
            StrategySelection::Static => vec![HintStrategy::Static],
            StrategySelection::Dynamic => vec![HintStrategy::Dynamic],
            StrategySelection::Both => vec![HintStrategy::Static, HintStrategy::Dynamic],
        }
    }
}

impl std::str::FromStr for StrategySelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(Self::Static),
            "dynamic" => Ok(Self::Dynamic),
            "both" => Ok(Self::Both),
            other => Err(format!("unknown strategy {other:?} (static, dynamic, both)")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scorer", rename_all = "lowercase")]
pub enum ConsistencyConfig {
    /// Word-set overlap; needs no model.
    #[default]
    Lexical,
    /// External alignment model; see [`crate::metrics::HttpAlignmentScorer`].
    Http { url: String },
}

fn default_chain_length() -> usize {
    MAX_HINTS
}

fn default_concurrency() -> usize {
    crate::client::DEFAULT_MAX_IN_FLIGHT
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs/latest")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: PathBuf,
    #[serde(default)]
    pub strategy: StrategySelection,
    #[serde(default = "default_chain_length")]
    pub chain_length: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub resume: bool,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    /// First `limit` questions of the dataset.
    #[serde(default)]
    pub limit: Option<usize>,
    /// Seeded random sample of this many questions, applied after `limit`.
    #[serde(default)]
    pub sample: Option<usize>,
    /// Response cache directory; defaults to `<output_dir>/cache`.
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub prompts_dir: Option<PathBuf>,
    #[serde(default)]
    pub info_gain_mode: InfoGainMode,
    #[serde(default)]
    pub consistency: ConsistencyConfig,
    pub endpoints: BTreeMap<Role, EndpointRole>,
}

pub const REQUIRED_ROLES: [Role; 4] = [Role::Generator, Role::QaEvaluator, Role::LeakageJudge, Role::Embedder];

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Loads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut config = Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut config.dataset);
        fix(&mut config.output_dir);
        config.cache_dir.as_mut().map(fix);
        config.prompts_dir.as_mut().map(fix);
        Ok(config)
    }

    pub fn endpoint_table(&self) -> EndpointTable {
        EndpointTable::from_named(self.endpoints.clone())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.chain_length == 0 || self.chain_length > MAX_HINTS {
            return Err(format!("chain_length must be in 1..={MAX_HINTS}"));
        }
        if self.concurrency == 0 {
            return Err("concurrency must be positive".into());
        }
        self.endpoint_table().validate(&REQUIRED_ROLES).map_err(|e| e.to_string())
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache_dir.clone().unwrap_or_else(|| self.output_dir.join("cache"))
    }
}
