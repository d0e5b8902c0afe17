use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use klss::equilibrium::{Orientation, SolverConfig};
use klss::harness::safety::SafetyConfig;
use klss::harness::{default_tolerance, Table1Config};
use klss::knowledge::SamplingConvention;
use klss::subgame::SubgameOptions;
use klss::GameTree;
use serde::{Deserialize, Serialize};

/// Settings shared by every command; read from TOML, then overridden by flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Fixed solver tolerance; unset picks 1e-6 or 1e-4 by game size.
    pub tolerance: Option<f64>,
    pub max_iterations: usize,
    pub gadget_max_iterations: usize,
    pub epsilon: f64,
    pub reach: bool,
    pub merge_transpositions: bool,
    pub jobs: usize,
    /// Record wall-clock time in Table 1 rows; off keeps CSV output reproducible.
    pub timing: bool,
    pub orientation: Orientation,
    pub convention: SamplingConvention,
    pub out: Option<PathBuf>,
    pub audit: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = Table1Config::default();
        Self {
            seed: 0,
            tolerance: None,
            max_iterations: t.max_iterations,
            gadget_max_iterations: t.gadget_max_iterations,
            epsilon: t.epsilon,
            reach: false,
            merge_transpositions: false,
            jobs: 0,
            timing: false,
            orientation: Orientation::Min,
            convention: SamplingConvention::DecisionNodes,
            out: None,
            audit: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn tolerance(&self, game: &GameTree) -> f64 {
        self.tolerance.unwrap_or_else(|| default_tolerance(game.num_nodes()))
    }

    pub fn solver(&self, game: &GameTree) -> SolverConfig {
        SolverConfig { tolerance: self.tolerance(game), max_iterations: self.max_iterations, seed: self.seed, ..SolverConfig::default() }
    }

    pub fn options(&self) -> SubgameOptions {
        SubgameOptions { reach: self.reach, merge_transpositions: self.merge_transpositions, seed: self.seed }
    }

    pub fn table1(&self) -> Table1Config {
        Table1Config {
            epsilon: self.epsilon,
            seed: self.seed,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            gadget_max_iterations: self.gadget_max_iterations,
            options: self.options(),
            jobs: self.jobs,
            timing: self.timing,
            ..Table1Config::default()
        }
    }

    pub fn safety(&self) -> SafetyConfig {
        SafetyConfig {
            seed: self.seed,
            tolerance: self.tolerance,
            epsilon: self.epsilon,
            max_iterations: self.max_iterations,
            gadget_max_iterations: self.gadget_max_iterations,
        }
    }
}
