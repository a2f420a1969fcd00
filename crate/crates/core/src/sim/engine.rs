use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use crate::cache::{AccessResult, CacheEntry, CacheState, Policy, StoreOutcome};
use crate::sim::{Metrics, Topology};
use crate::tlru::{tlru_insert_observed, TlruConfig};
use crate::workload::{Catalog, ContentMeta, RequestStream};
use crate::{ContentId, Error, NodeId, Result, SimTime};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SimEventKind {
    ExogenousRequest,
    /// A miss forwarded from a child node.
    ForwardedRequest,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SimEvent {
    pub time: SimTime,
    pub kind: SimEventKind,
    pub content: ContentId,
    pub node: NodeId,
    /// Node where the request entered the network.
    pub origin_node: NodeId,
    pub hops_so_far: u32,
}

/// An exogenous Poisson request stream attached to a node.
#[derive(Clone, Debug, PartialEq)]
pub struct ExogenousSource {
    pub node: NodeId,
    /// Requests per second, spread over the catalog by popularity.
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub horizon: SimTime,
    /// Events before this instant drive the caches but are not counted.
    pub warmup: SimTime,
    pub metric_window: f64,
    pub tlru: TlruConfig,
    /// Publisher TTU multiplier per level below the first cache level.
    pub ttu_level_scale: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(horizon: SimTime, seed: u64) -> Self {
        Self {
            horizon,
            warmup: 0.0,
            metric_window: horizon.max(1.0),
            tlru: TlruConfig::default(),
            ttu_level_scale: 1.0,
            seed,
        }
    }
}

/// Node states plus metrics for one run. Owned by a single event loop.
pub struct Network<'a> {
    topology: &'a Topology,
    catalog: &'a Catalog,
    caches: Vec<Option<CacheState>>,
    config: SimConfig,
    metrics: Metrics,
}

impl<'a> Network<'a> {
    pub fn new(topology: &'a Topology, catalog: &'a Catalog, config: SimConfig) -> Result<Self> {
        if !(config.metric_window > 0.0) {
            return Err(Error::config("run.metric_window", "must be > 0"));
        }
        config.tlru.validate()?;
        let caches = topology
            .node_ids()
            .map(|n| {
                (!topology.is_publisher(n)).then(|| CacheState::new(n, topology.node(n).capacity))
            })
            .collect();
        let mut metrics = Metrics::new(
            topology.len(),
            catalog.len(),
            config.warmup.min(config.horizon),
            config.horizon,
            config.metric_window,
        );
        metrics.seed = config.seed;
        Ok(Self {
            topology,
            catalog,
            caches,
            config,
            metrics,
        })
    }

    pub fn cache(&self, node: NodeId) -> Option<&CacheState> {
        self.caches[node.index()].as_ref()
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    pub fn into_metrics(mut self) -> Metrics {
        self.metrics.expired_hit_violations += self
            .caches
            .iter()
            .flatten()
            .map(CacheState::expired_hits)
            .sum::<u64>();
        self.metrics
    }

    /// Publisher TTU as seen by `node`, scaled by its level.
    fn effective_meta(&self, meta: &ContentMeta, node: NodeId) -> ContentMeta {
        let level = self.topology.depth(node).saturating_sub(1);
        let scale = self.config.ttu_level_scale.powi(level as i32);
        ContentMeta {
            publisher_ttu: meta.publisher_ttu.map(|t| t * scale),
            ..meta.clone()
        }
    }

    /// Handles one request at one node. A miss yields the forwarded request
    /// for the parent; a hit fills the miss path below.
    pub fn route_request(&mut self, event: SimEvent) -> Result<Option<SimEvent>> {
        let now = event.time;
        let content = event.content;
        if self.catalog.get(content).is_none() {
            return Err(Error::UnknownContent(content));
        }
        let measuring = self.metrics.measuring(now);
        let exogenous = event.kind == SimEventKind::ExogenousRequest;
        if exogenous {
            self.metrics.fold_stream(now, event.node, content);
        }

        let result = match self.caches[event.node.index()].as_mut() {
            None => AccessResult::Hit,
            Some(cache) => {
                cache.record_request(content, now)?;
                let outcome = cache.lookup(content, now);
                if outcome.result == AccessResult::Hit {
                    let served = outcome.served_entry.as_ref().map_or(f64::INFINITY, |e| e.expiry);
                    if served <= now {
                        self.metrics.expired_hit_violations += 1;
                    }
                }
                outcome.result
            }
        };

        if measuring {
            let c = self.metrics.counters_mut(event.node, content);
            c.requests += 1;
            if exogenous {
                c.exogenous += 1;
            } else {
                c.endogenous += 1;
            }
            match result {
                AccessResult::Hit => c.hits += 1,
                AccessResult::Miss => c.misses += 1,
                AccessResult::ExpiredMiss => c.expired_misses += 1,
            }
            if let Some(w) = self.metrics.window_mut(event.node, now) {
                if exogenous {
                    w.exogenous += 1;
                } else {
                    w.endogenous += 1;
                }
                if result != AccessResult::Hit {
                    w.misses += 1;
                }
            }
        }

        if result == AccessResult::Hit {
            let origin_measured = self.metrics.measuring(now);
            if origin_measured {
                self.metrics.terminations += 1;
                self.metrics.record_hops(event.hops_so_far);
            }
            let path = self.topology.path_up(event.origin_node, event.hops_so_far);
            self.fill_on_return(content, &path, now);
            return Ok(None);
        }

        let parent = self
            .topology
            .parent(event.node)
            .ok_or_else(|| Error::Invariant(format!("publisher missed content {content}")))?;
        Ok(Some(SimEvent {
            time: now,
            kind: SimEventKind::ForwardedRequest,
            content,
            node: parent,
            origin_node: event.origin_node,
            hops_so_far: event.hops_so_far + 1,
        }))
    }

    /// Offers `content` to every node on `path` at instant `now`.
    pub fn fill_on_return(&mut self, content: ContentId, path: &[NodeId], now: SimTime) -> Vec<(NodeId, StoreOutcome)> {
        let Some(base) = self.catalog.get(content) else {
            return Vec::new();
        };
        let measuring = self.metrics.measuring(now);
        let mut outcomes = Vec::with_capacity(path.len());
        for &node in path {
            let meta = self.effective_meta(base, node);
            let policy = self.topology.node(node).policy;
            let tlru = self.config.tlru;
            let Some(cache) = self.caches[node.index()].as_mut() else {
                continue;
            };
            let outcome = match (policy, meta.publisher_ttu) {
                (_, None) => StoreOutcome::NotCacheable,
                (Policy::Tlru, Some(_)) => tlru_insert_observed(cache, &meta, now, &tlru),
                (p, Some(ttu)) => cache.insert(CacheEntry::new(content, meta.size, now, ttu), p),
            };
            if measuring {
                match &outcome {
                    StoreOutcome::Stored { evicted } => {
                        self.metrics.counters_mut(node, content).stores += 1;
                        for v in evicted {
                            self.metrics.counters_mut(node, *v).evictions += 1;
                        }
                    }
                    StoreOutcome::Rejected | StoreOutcome::NotCacheable => {
                        self.metrics.counters_mut(node, content).rejections += 1;
                    }
                }
            }
            outcomes.push((node, outcome));
        }
        outcomes
    }

    /// Processes an exogenous request and its forwarding cascade atomically.
    pub fn serve(&mut self, time: SimTime, node: NodeId, content: ContentId) -> Result<u32> {
        if self.metrics.measuring(time) {
            self.metrics.exogenous_requests += 1;
        }
        let mut event = SimEvent {
            time,
            kind: SimEventKind::ExogenousRequest,
            content,
            node,
            origin_node: node,
            hops_so_far: 0,
        };
        loop {
            match self.route_request(event)? {
                Some(next) => event = next,
                None => return Ok(event.hops_so_far),
            }
        }
    }
}

/// Runs the event loop to `config.horizon` and returns the collected metrics.
/// Identical inputs give identical metrics.
pub fn run_simulation(
    topology: &Topology,
    catalog: &Catalog,
    sources: &[ExogenousSource],
    config: &SimConfig,
) -> Result<Metrics> {
    if !(config.horizon >= 0.0) {
        return Err(Error::Domain(format!("horizon must be >= 0, got {}", config.horizon)));
    }
    let mut streams = Vec::with_capacity(sources.len());
    for (i, s) in sources.iter().enumerate() {
        if s.node.index() >= topology.len() {
            return Err(Error::config(format!("workload.streams[{i}].node"), "unknown node"));
        }
        let name = format!("{}#{i}", topology.node(s.node).name);
        streams.push(RequestStream::new(s.node, &name, s.rate, catalog.popularity(), config.seed)?);
    }

    let mut net = Network::new(topology, catalog, config.clone())?;
    let mut queue = BinaryHeap::new();
    let mut seq = 0u64;
    let mut pending = Vec::with_capacity(streams.len());
    for (i, stream) in streams.iter_mut().enumerate() {
        let ev = stream.next().ok_or_else(|| Error::Invariant("request stream ended".into()))?;
        queue.push(Reverse((OrderedFloat(ev.time), seq, i)));
        seq += 1;
        pending.push(ev);
    }

    let mut clock = 0.0;
    while let Some(Reverse((OrderedFloat(t), _, i))) = queue.pop() {
        if t > config.horizon {
            break;
        }
        if t < clock {
            return Err(Error::Invariant(format!("event time regressed from {clock} to {t}")));
        }
        clock = t;
        let ev = pending[i];
        net.serve(ev.time, ev.node, ev.content)?;

        let next = streams[i]
            .next()
            .ok_or_else(|| Error::Invariant("request stream ended".into()))?;
        queue.push(Reverse((OrderedFloat(next.time), seq, i)));
        seq += 1;
        pending[i] = next;
    }
    Ok(net.into_metrics())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::TtuLaw;

    fn catalog(k: usize, ttu: TtuLaw) -> Catalog {
        Catalog::build(k, 0.8, 1, ttu, 1).unwrap()
    }

    fn huge() -> TtuLaw {
        TtuLaw::Constant { value: 1e12 }
    }

    fn net<'a>(t: &'a Topology, c: &'a Catalog) -> Network<'a> {
        Network::new(t, c, SimConfig::new(100.0, 0)).unwrap()
    }

    #[test]
    fn leaf_miss_parent_hit() {
        let topo = Topology::chain(&[4, 4], Policy::Lru).unwrap();
        let cat = catalog(10, huge());
        let mut n = net(&topo, &cat);
        // Warm the parent (node 1) through a full miss from the leaf, then
        // drop the leaf copy by requesting directly at the parent.
        assert_eq!(n.serve(1.0, NodeId(1), ContentId(3)).unwrap(), 1);
        let hops = n.serve(2.0, NodeId(2), ContentId(3)).unwrap();
        assert_eq!(hops, 1);
        let m = n.metrics();
        assert_eq!(m.counters(NodeId(2), ContentId(3)).misses, 1);
        assert_eq!(m.counters(NodeId(1), ContentId(3)).hits, 1);
        assert!(n.cache(NodeId(2)).unwrap().contains(ContentId(3)));
    }

    #[test]
    fn all_miss_chain_reaches_publisher() {
        let topo = Topology::chain(&[4, 4, 4], Policy::Lru).unwrap();
        let cat = catalog(10, huge());
        let mut n = net(&topo, &cat);
        assert_eq!(n.serve(1.0, NodeId(3), ContentId(5)).unwrap(), 3);
        assert_eq!(n.metrics().counters(NodeId(0), ContentId(5)).hits, 1);
        for node in 1..=3 {
            assert!(n.cache(NodeId(node)).unwrap().contains(ContentId(5)));
        }
        assert_eq!(n.metrics().hop_histogram, vec![0, 0, 0, 1]);
    }

    #[test]
    fn leaf_hit_forwards_nothing() {
        let topo = Topology::chain(&[4], Policy::Lru).unwrap();
        let cat = catalog(10, huge());
        let mut n = net(&topo, &cat);
        n.serve(1.0, NodeId(1), ContentId(2)).unwrap();
        let ev = SimEvent {
            time: 2.0,
            kind: SimEventKind::ExogenousRequest,
            content: ContentId(2),
            node: NodeId(1),
            origin_node: NodeId(1),
            hops_so_far: 0,
        };
        assert_eq!(n.route_request(ev).unwrap(), None);
        assert_eq!(n.metrics().counters(NodeId(0), ContentId(2)).requests, 1);
    }

    #[test]
    fn unknown_content_is_rejected() {
        let topo = Topology::chain(&[4], Policy::Lru).unwrap();
        let cat = catalog(10, huge());
        let mut n = net(&topo, &cat);
        assert!(matches!(n.serve(1.0, NodeId(1), ContentId(11)), Err(Error::UnknownContent(_))));
    }

    #[test]
    fn fill_diverges_by_policy() {
        // Leaf TLRU refuses content whose gap estimate exceeds its local TTU;
        // the LRU parent stores it regardless.
        let nodes = vec![
            crate::sim::NodeSpec { name: "p".into(), capacity: 0, policy: Policy::Lru, parent: None },
            crate::sim::NodeSpec { name: "mid".into(), capacity: 100, policy: Policy::Lru, parent: Some(NodeId(0)) },
            crate::sim::NodeSpec { name: "leaf".into(), capacity: 100, policy: Policy::Tlru, parent: Some(NodeId(1)) },
        ];
        let topo = Topology::new(nodes).unwrap();
        let cat = catalog(10, TtuLaw::Constant { value: 50.0 });
        let mut n = net(&topo, &cat);
        // Build a gap estimate of 40 s for content 7 at the leaf.
        n.caches[2].as_mut().unwrap().record_request(ContentId(7), 0.0).unwrap();
        n.caches[2].as_mut().unwrap().record_request(ContentId(1), 1.0).unwrap();
        n.caches[2].as_mut().unwrap().record_request(ContentId(1), 1.5).unwrap();
        n.serve(40.0, NodeId(2), ContentId(7)).unwrap();
        assert!(!n.cache(NodeId(2)).unwrap().contains(ContentId(7)));
        assert!(n.cache(NodeId(1)).unwrap().contains(ContentId(7)));
    }

    #[test]
    fn absent_ttu_is_never_stored() {
        let topo = Topology::chain(&[4, 4], Policy::Lru).unwrap();
        let cat = catalog(10, TtuLaw::Absent);
        let mut n = net(&topo, &cat);
        n.serve(1.0, NodeId(2), ContentId(1)).unwrap();
        n.serve(2.0, NodeId(2), ContentId(1)).unwrap();
        assert!(n.cache(NodeId(1)).unwrap().is_empty());
        assert!(n.cache(NodeId(2)).unwrap().is_empty());
        assert_eq!(n.metrics().counters(NodeId(0), ContentId(1)).hits, 2);
    }

    #[test]
    fn zero_horizon_is_empty() {
        let topo = Topology::chain(&[4], Policy::Lru).unwrap();
        let cat = catalog(10, huge());
        let src = [ExogenousSource { node: NodeId(1), rate: 5.0 }];
        let m = run_simulation(&topo, &cat, &src, &SimConfig::new(0.0, 3)).unwrap();
        assert_eq!(m.exogenous_requests, 0);
        assert_eq!(m.node_totals(NodeId(1)).requests, 0);
    }

    #[test]
    fn saturated_cache_hits_everything() {
        let topo = Topology::chain(&[50], Policy::Lru).unwrap();
        let cat = catalog(20, huge());
        let src = [ExogenousSource { node: NodeId(1), rate: 10.0 }];
        let mut cfg = SimConfig::new(2000.0, 9);
        cfg.warmup = 1000.0;
        let m = run_simulation(&topo, &cat, &src, &cfg).unwrap();
        let totals = m.node_totals(NodeId(1));
        assert!(totals.requests > 9000);
        assert_eq!(totals.hits, totals.requests);
    }

    #[test]
    fn reruns_are_identical() {
        let topo = Topology::chain(&[5, 3], Policy::Tlru).unwrap();
        let cat = catalog(50, TtuLaw::Normal { mean: 5.0, stddev: 2.0, floor: 0.001 });
        let src = [ExogenousSource { node: NodeId(2), rate: 4.0 }];
        let mut cfg = SimConfig::new(500.0, 17);
        cfg.warmup = 100.0;
        cfg.metric_window = 50.0;
        let a = run_simulation(&topo, &cat, &src, &cfg).unwrap();
        let b = run_simulation(&topo, &cat, &src, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.accounting_holds());
        assert_eq!(a.terminations, a.exogenous_requests);
    }
}
