//! Run configuration: one human-editable TOML file, strict schema
//! (unknown keys rejected), command-line flags layered on top. The
//! resolved configuration is echoed into every manifest so a run can be
//! reproduced from its outputs alone.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub master_seed: u64,
    /// Worker threads; 0 means all available cores.
    pub threads: usize,
    pub d: usize,
    pub lambda: f64,
    pub epsilon: f64,
    /// Tree-arena node cap per replica.
    pub node_cap: usize,
    /// Time-series grid spacing.
    pub grid: f64,
    /// Tree growth rate; estimated when absent.
    pub c_hat: Option<f64>,
    /// Tree survival probability; estimated when absent.
    pub p_hat: Option<f64>,
    pub gen: GenConfig,
    pub estimate: EstimateConfig,
    pub tree: TreeConfig,
    pub simulate: SimulateConfig,
    pub cutoff: CutoffConfig,
    pub density: DensityConfig,
    pub intersect: IntersectConfig,
    pub census: CensusConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            master_seed: 0,
            threads: 0,
            d: 3,
            lambda: 2.0,
            epsilon: 0.1,
            node_cap: 100_000_000,
            grid: 0.1,
            c_hat: None,
            p_hat: None,
            gen: GenConfig::default(),
            estimate: EstimateConfig::default(),
            tree: TreeConfig::default(),
            simulate: SimulateConfig::default(),
            cutoff: CutoffConfig::default(),
            density: DensityConfig::default(),
            intersect: IntersectConfig::default(),
            census: CensusConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GenConfig {
    pub n: usize,
    /// Condition on simplicity by rejection.
    pub simple: bool,
    /// Output file name inside the out dir.
    pub out: String,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n: 10,
            simple: false,
            out: "graph.txt".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateConfig {
    pub replicas: u64,
    pub horizon: f64,
    pub window: [f64; 2],
    pub survival_replicas: u64,
    pub survival_threshold: usize,
    pub survival_t_cap: f64,
    pub severed: bool,
    /// Extra infection rates to sweep for the survival-transition
    /// report (phase bracketing; reported, never asserted).
    pub lambda_grid: Vec<f64>,
    /// Optional growth-rate reference for the tail-exceedance report.
    pub tail_times: Vec<f64>,
    pub tail_delta: f64,
    pub tail_replicas: u64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            replicas: 10_000,
            horizon: 6.0,
            window: [2.0, 6.0],
            survival_replicas: 10_000,
            survival_threshold: 1000,
            survival_t_cap: 50.0,
            severed: false,
            lambda_grid: vec![],
            tail_times: vec![],
            tail_delta: 1.0,
            tail_replicas: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TreeConfig {
    pub replicas: u64,
    pub horizon: f64,
    pub severed: bool,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            replicas: 1000,
            horizon: 8.0,
            severed: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    /// Vertex count when generating a fresh graph per replica.
    pub n: usize,
    /// Path to a fixed graph file; overrides `n` when set.
    pub graph: Option<PathBuf>,
    pub init: Vec<u32>,
    pub targets: Vec<u32>,
    pub horizon: f64,
    pub replicas: u64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            n: 100,
            graph: None,
            init: vec![0],
            targets: vec![],
            horizon: 10.0,
            replicas: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CutoffConfig {
    pub n_list: Vec<usize>,
    pub replicas: u64,
    /// Fixed-graph (quenched) mode: one graph per n, fresh pairs.
    pub quenched: bool,
    /// Largest n simulated on a pre-generated graph; beyond this the
    /// grow-and-explore engine is used.
    pub full_engine_max_n: usize,
}

impl Default for CutoffConfig {
    fn default() -> Self {
        CutoffConfig {
            n_list: vec![1000, 10_000],
            replicas: 2000,
            quenched: false,
            full_engine_max_n: 10_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DensityConfig {
    pub n: usize,
    pub replicas: u64,
    pub delta: f64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            n: 100_000,
            replicas: 100,
            delta: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct IntersectConfig {
    pub n: usize,
    pub replicas: u64,
    /// A process counts as surviving when its projected set is nonempty
    /// at its end time.
    pub report_conditional: bool,
}

impl Default for IntersectConfig {
    fn default() -> Self {
        IntersectConfig {
            n: 10_000,
            replicas: 2000,
            report_conditional: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CensusConfig {
    pub n: usize,
    /// Monte Carlo runs started from each source vertex.
    pub replicas_per_source: u64,
    /// Pair-threshold slack values g: a pair is good when
    /// P(v in xi^u at t_plus) >= (1-g) p_hat^2.
    pub slack_grid: Vec<f64>,
    pub bootstrap: u64,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig {
            n: 100,
            replicas_per_source: 400,
            slack_grid: vec![0.0, 0.05, 0.1, 0.2, 0.5, 1.0],
            bootstrap: 200,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        let cfg: Config =
            toml::from_str(&text).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return Err(SimError::Config("d must be at least 1".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(SimError::Config("lambda must be finite and >= 0".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.125) {
            return Err(SimError::Config("epsilon must lie in (0, 1/8)".into()));
        }
        if self.grid <= 0.0 {
            return Err(SimError::Config("grid spacing must be positive".into()));
        }
        if self.estimate.window[0] >= self.estimate.window[1] {
            return Err(SimError::Config("estimate.window must be increasing".into()));
        }
        for &n in &self.cutoff.n_list {
            if !(n * self.d).is_multiple_of(2) {
                return Err(SimError::Config(format!("n*d must be even (n = {n})")));
            }
        }
        if !(self.density.n * self.d).is_multiple_of(2) || !(self.intersect.n * self.d).is_multiple_of(2) {
            return Err(SimError::Config("n*d must be even".into()));
        }
        if !(self.census.n * self.d).is_multiple_of(2) {
            return Err(SimError::Config("n*d must be even for the census".into()));
        }
        Ok(())
    }
}
