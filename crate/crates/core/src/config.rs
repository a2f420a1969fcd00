//! Declarative experiment documents (TOML, `schema_version = 1`).
//!
//! ```toml
//! schema_version = 1
//! experiment_id = "edge-lru"
//!
//! [catalog]
//! size = 10000
//! zipf_alpha = 0.8
//! ttu = { law = "normal", mean = 1e6, stddev = 2.5e5 }
//!
//! [[topology.nodes]]
//! id = "origin"
//!
//! [[topology.nodes]]
//! id = "edge"
//! parent = "origin"
//! capacity = 100
//! policy = "lru"
//!
//! [workload]
//! seed = 7
//! streams = [{ node = "edge", rate = 1.0 }]
//!
//! [run]
//! horizon = 1e5
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytics::ProductMode;
use crate::cache::Policy;
use crate::sim::{ExogenousSource, NodeSpec, SimConfig, Topology};
use crate::tlru::TlruConfig;
use crate::workload::{Catalog, TtuLaw};
use crate::{Error, NodeId, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment_id: String,
    pub catalog: CatalogSection,
    pub topology: TopologySection,
    pub workload: WorkloadSection,
    pub run: RunSection,
    #[serde(default)]
    pub tlru: TlruConfig,
    #[serde(default)]
    pub analytics: AnalyticsSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogSection {
    pub size: usize,
    #[serde(default = "default_alpha")]
    pub zipf_alpha: f64,
    #[serde(default = "default_content_size")]
    pub content_size: u64,
    /// Defaults to a normal law centred on ten mean inter-request gaps.
    #[serde(default)]
    pub ttu: Option<TtuLaw>,
}

fn default_alpha() -> f64 {
    0.8
}

fn default_content_size() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    /// Publisher TTU multiplier applied once per level below the first cache.
    #[serde(default = "default_scale")]
    pub ttu_level_scale: f64,
    pub nodes: Vec<NodeSection>,
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSection {
    pub id: String,
    /// Absent for the publisher.
    #[serde(default)]
    pub parent: Option<String>,
    #[serde(default)]
    pub capacity: u64,
    #[serde(default = "default_policy")]
    pub policy: Policy,
}

fn default_policy() -> Policy {
    Policy::Lru
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadSection {
    pub seed: u64,
    pub streams: Vec<StreamSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamSection {
    pub node: String,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub horizon: f64,
    #[serde(default = "default_warmup")]
    pub warmup_fraction: f64,
    /// Defaults to the whole measurement interval.
    #[serde(default)]
    pub metric_window: Option<f64>,
    /// Policies to run on the same request streams; empty keeps each node's own.
    #[serde(default)]
    pub compare: Vec<Policy>,
}

fn default_warmup() -> f64 {
    0.2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticsSection {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: u32,
    #[serde(default)]
    pub delay_product_mode: ProductMode,
    /// Per-node service rate for the delay chain; no delay output when absent.
    #[serde(default)]
    pub service_rate: Option<f64>,
}

fn default_tolerance() -> f64 {
    1e-9
}

fn default_max_iter() -> u32 {
    50
}

impl Default for AnalyticsSection {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
            max_iter: default_max_iter(),
            delay_product_mode: ProductMode::default(),
            service_rate: None,
        }
    }
}

/// Command-line overrides applied after parsing.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub policy: Option<Policy>,
    pub cache_size: Option<u64>,
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let key = match e.span() {
            Some(span) => format!("line {}", text[..span.start.min(text.len())].lines().count().max(1)),
            None => "document".to_string(),
        };
        Error::config(key, e.message().replace('\n', " "))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(path.display().to_string(), format!("cannot read: {e}")))?;
    parse_config(&text)
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        let id_ok = !self.experiment_id.is_empty()
            && self
                .experiment_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
        if !id_ok {
            return Err(Error::config("experiment_id", "must be non-empty [A-Za-z0-9._-]"));
        }

        let cat = &self.catalog;
        if cat.size == 0 || cat.size > u32::MAX as usize {
            return Err(Error::config("catalog.size", "must be >= 1"));
        }
        positive("catalog.zipf_alpha", cat.zipf_alpha)?;
        if cat.content_size == 0 {
            return Err(Error::config("catalog.content_size", "must be >= 1"));
        }
        if let Some(law) = &cat.ttu {
            law.validate().map_err(|e| Error::config("catalog.ttu", e.to_string()))?;
        }

        positive("topology.ttu_level_scale", self.topology.ttu_level_scale)?;
        let nodes = &self.topology.nodes;
        for (i, n) in nodes.iter().enumerate() {
            if n.id.is_empty() {
                return Err(Error::config(format!("topology.nodes[{i}].id"), "must be non-empty"));
            }
            if nodes[..i].iter().any(|m| m.id == n.id) {
                return Err(Error::config(format!("topology.nodes[{i}].id"), format!("duplicate id `{}`", n.id)));
            }
        }
        for (i, n) in nodes.iter().enumerate() {
            if let Some(p) = &n.parent {
                if !nodes.iter().any(|m| &m.id == p) {
                    return Err(Error::config(
                        format!("topology.nodes[{i}].parent"),
                        format!("undefined node `{p}`"),
                    ));
                }
            } else if n.capacity != 0 {
                return Err(Error::config(
                    format!("topology.nodes[{i}].capacity"),
                    "the publisher holds everything; omit its capacity",
                ));
            }
        }
        // Remaining structural checks (single root, cycles, capacities).
        let topology = self.topology()?;

        if self.workload.streams.is_empty() {
            return Err(Error::config("workload.streams", "at least one stream is required"));
        }
        for (i, s) in self.workload.streams.iter().enumerate() {
            let key = format!("workload.streams[{i}]");
            let node = topology
                .find(&s.node)
                .ok_or_else(|| Error::config(format!("{key}.node"), format!("undefined node `{}`", s.node)))?;
            if topology.is_publisher(node) {
                return Err(Error::config(format!("{key}.node"), "streams must attach to a cache node"));
            }
            positive(&format!("{key}.rate"), s.rate)?;
        }

        let run = &self.run;
        if !(run.horizon >= 0.0) || !run.horizon.is_finite() {
            return Err(Error::config("run.horizon", format!("must be finite and >= 0, got {}", run.horizon)));
        }
        if !(0.0..1.0).contains(&run.warmup_fraction) {
            return Err(Error::config("run.warmup_fraction", "must lie in [0, 1)"));
        }
        if let Some(w) = run.metric_window {
            positive("run.metric_window", w)?;
        }
        for (i, p) in run.compare.iter().enumerate() {
            if run.compare[..i].contains(p) {
                return Err(Error::config(format!("run.compare[{i}]"), format!("duplicate policy `{p}`")));
            }
        }

        self.tlru.validate().map_err(|e| Error::config("tlru", e.to_string()))?;
        positive("analytics.tolerance", self.analytics.tolerance)?;
        if self.analytics.max_iter == 0 {
            return Err(Error::config("analytics.max_iter", "must be >= 1"));
        }
        if let Some(mu) = self.analytics.service_rate {
            positive("analytics.service_rate", mu)?;
        }
        Ok(())
    }

    /// Applies CLI overrides and revalidates.
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            self.workload.seed = seed;
        }
        for n in self.topology.nodes.iter_mut().filter(|n| n.parent.is_some()) {
            if let Some(p) = o.policy {
                n.policy = p;
            }
            if let Some(c) = o.cache_size {
                n.capacity = c;
            }
        }
        if let Some(p) = o.policy {
            self.run.compare = vec![p];
        }
        self.validate()
    }

    pub fn topology(&self) -> Result<Topology> {
        let nodes = &self.topology.nodes;
        let specs = nodes
            .iter()
            .map(|n| NodeSpec {
                name: n.id.clone(),
                capacity: n.capacity,
                policy: n.policy,
                parent: n
                    .parent
                    .as_ref()
                    .and_then(|p| nodes.iter().position(|m| &m.id == p))
                    .map(|i| NodeId(i as u32)),
            })
            .collect();
        Topology::new(specs)
    }

    /// Same document with every cache node switched to `policy`.
    pub fn with_policy(&self, policy: Policy) -> Self {
        let mut cfg = self.clone();
        for n in cfg.topology.nodes.iter_mut().filter(|n| n.parent.is_some()) {
            n.policy = policy;
        }
        cfg
    }

    /// Largest total exogenous rate attached to any single node.
    pub fn peak_node_rate(&self) -> f64 {
        let mut per_node: Vec<(&str, f64)> = Vec::new();
        for s in &self.workload.streams {
            match per_node.iter_mut().find(|(n, _)| *n == s.node) {
                Some((_, r)) => *r += s.rate,
                None => per_node.push((&s.node, s.rate)),
            }
        }
        per_node.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }

    /// Configured TTU law, or the default normal law for the busiest node.
    pub fn ttu_law(&self) -> TtuLaw {
        self.catalog
            .ttu
            .clone()
            .unwrap_or_else(|| TtuLaw::default_normal(self.peak_node_rate()))
    }

    pub fn catalog(&self) -> Result<Catalog> {
        Catalog::build(
            self.catalog.size,
            self.catalog.zipf_alpha,
            self.catalog.content_size,
            self.ttu_law(),
            self.workload.seed,
        )
    }

    pub fn sources(&self, topology: &Topology) -> Vec<ExogenousSource> {
        self.workload
            .streams
            .iter()
            .map(|s| ExogenousSource {
                node: topology.find(&s.node).expect("validated stream node"),
                rate: s.rate,
            })
            .collect()
    }

    pub fn sim_config(&self) -> SimConfig {
        let warmup = self.run.horizon * self.run.warmup_fraction;
        let measured = self.run.horizon - warmup;
        SimConfig {
            horizon: self.run.horizon,
            warmup,
            metric_window: self
                .run
                .metric_window
                .unwrap_or(if measured > 0.0 { measured } else { 1.0 }),
            tlru: self.tlru.clone(),
            ttu_level_scale: self.topology.ttu_level_scale,
            seed: self.workload.seed,
        }
    }
}
