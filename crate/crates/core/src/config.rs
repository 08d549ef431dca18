//! TOML run configuration and graph files.
//!
//! A run config has sections `[graph]`, `[gains]`, `[signal]`, `[sim]` and
//! `[init]`; only `[graph]` is required. The graph is given one of three ways:
//!
//! ```toml
//! [graph]
//! n_nodes = 3
//! [[graph.edge]]
//! i = 1
//! j = 2
//! w = -0.5
//! ```
//!
//! or `file = "net.toml"` (resolved against the config's directory), or
//! `preset = "fig1"` with an optional `magnitude_seed`. Node labels in config
//! and graph files are one-based.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{NodeDynamics, PlantSpec};
use crate::error::{Error, Result};
use crate::graph::{Edge, SignedGraph};
use crate::protocol::{GainConfig, SignalConfig};
use crate::reference::reference_graph;
use crate::sim::{InitSpec, SimConfig};

/// Edge with one-based labels, as written in files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// Standalone graph file: `n_nodes` plus `[[edge]]` tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n_nodes: usize,
    #[serde(default, rename = "edge")]
    pub edges: Vec<EdgeSpec>,
}

impl GraphFile {
    pub fn from_graph(g: &SignedGraph) -> Self {
        Self {
            n_nodes: g.n_nodes(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeSpec {
                    i: e.i + 1,
                    j: e.j + 1,
                    w: e.w,
                })
                .collect(),
        }
    }

    pub fn to_graph(&self) -> Result<SignedGraph> {
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            if e.i == 0 || e.j == 0 {
                return Err(Error::Validation(format!(
                    "edge ({}, {}): node labels start at 1",
                    e.i, e.j
                )));
            }
            edges.push(Edge {
                i: e.i - 1,
                j: e.j - 1,
                w: e.w,
            });
        }
        SignedGraph::new(self.n_nodes, edges).map_err(|e| match e {
            Error::InvalidArgument(m) => Error::Validation(m),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("graph file serializes")
    }
}

pub fn parse_graph_file(text: &str, source_name: &str) -> Result<SignedGraph> {
    parse_toml::<GraphFile>(text, source_name)?.to_graph()
}

pub fn load_graph_file(path: &Path) -> Result<SignedGraph> {
    let text = std::fs::read_to_string(path)?;
    parse_graph_file(&text, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnitude_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_nodes: Option<usize>,
    #[serde(default)]
    pub dynamics: NodeDynamics,
    #[serde(default, rename = "edge", skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub dt: f64,
    pub horizon: f64,
    pub record_stride: usize,
    pub seed: u64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            horizon: 200.0,
            record_stride: 10,
            seed: 0,
        }
    }
}

/// Top-level run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphSection,
    #[serde(default)]
    pub gains: GainConfig,
    #[serde(default)]
    pub signal: SignalConfig,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub init: InitSpec,
}

impl RunConfig {
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        parse_toml(text, source_name)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// The benchmark network run for `seed`.
    pub fn reference(seed: u64) -> Self {
        Self {
            graph: GraphSection {
                preset: Some("fig1".into()),
                magnitude_seed: Some(seed),
                ..Default::default()
            },
            gains: GainConfig::default(),
            signal: SignalConfig::default(),
            sim: SimSection {
                seed,
                ..Default::default()
            },
            init: InitSpec::default(),
        }
    }

    /// Builds the graph; relative `file` paths resolve against `base_dir`.
    pub fn resolve_graph(&self, base_dir: &Path) -> Result<SignedGraph> {
        let g = &self.graph;
        let given = [g.preset.is_some(), g.file.is_some(), g.n_nodes.is_some()]
            .iter()
            .filter(|&&b| b)
            .count();
        if given != 1 {
            return Err(Error::Validation(
                "[graph] needs exactly one of `preset`, `file` or `n_nodes`".into(),
            ));
        }
        if g.preset.is_none() && g.magnitude_seed.is_some() {
            return Err(Error::Validation(
                "`magnitude_seed` only applies to a preset".into(),
            ));
        }
        if g.n_nodes.is_none() && !g.edges.is_empty() {
            return Err(Error::Validation(
                "[[graph.edge]] entries need `n_nodes`".into(),
            ));
        }
        if let Some(p) = &g.preset {
            return match p.as_str() {
                "fig1" => reference_graph(g.magnitude_seed.unwrap_or(self.sim.seed)),
                other => Err(Error::Validation(format!("unknown graph preset '{other}'"))),
            };
        }
        if let Some(f) = &g.file {
            return load_graph_file(&base_dir.join(f));
        }
        GraphFile {
            n_nodes: g.n_nodes.unwrap_or(0),
            edges: g.edges.clone(),
        }
        .to_graph()
    }

    /// Validates everything and produces a runnable [`SimConfig`].
    pub fn to_sim_config(&self, base_dir: &Path) -> Result<SimConfig> {
        let graph = self.resolve_graph(base_dir)?;
        let plant = PlantSpec::new(graph, self.graph.dynamics.clone())?;
        let cfg = SimConfig {
            plant,
            gains: self.gains,
            signal: self.signal.clone(),
            dt: self.sim.dt,
            horizon: self.sim.horizon,
            record_stride: self.sim.record_stride,
            seed: self.sim.seed,
            init: self.init.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Self-contained copy with the graph inlined, so it replays without
    /// external files.
    pub fn resolved(&self, base_dir: &Path) -> Result<Self> {
        let g = self.resolve_graph(base_dir)?;
        let file = GraphFile::from_graph(&g);
        let mut out = self.clone();
        out.graph = GraphSection {
            n_nodes: Some(file.n_nodes),
            edges: file.edges,
            dynamics: self.graph.dynamics.clone(),
            ..Default::default()
        };
        Ok(out)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }
}

fn parse_toml<T: serde::de::DeserializeOwned>(text: &str, source_name: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let message = match e.span() {
            Some(span) => {
                let before = &text[..span.start.min(text.len())];
                let line = before.matches('\n').count() + 1;
                let col = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
                format!("line {line}, column {col}: {}", e.message())
            }
            None => e.message().to_string(),
        };
        Error::Parse {
            source_name: source_name.to_string(),
            message,
        }
    })
}
