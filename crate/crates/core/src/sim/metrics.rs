use crate::sim::Topology;
use crate::{ContentId, Error, NodeId, Result, SimTime};

/// Per (node, content) event counts over the measurement interval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub requests: u64,
    pub exogenous: u64,
    pub endogenous: u64,
    pub hits: u64,
    pub misses: u64,
    pub expired_misses: u64,
    pub rejections: u64,
    pub evictions: u64,
    pub stores: u64,
}

impl Counters {
    pub fn hit_ratio(&self) -> f64 {
        if self.requests == 0 {
            0.0
        } else {
            self.hits as f64 / self.requests as f64
        }
    }

    fn add(&mut self, o: &Counters) {
        self.requests += o.requests;
        self.exogenous += o.exogenous;
        self.endogenous += o.endogenous;
        self.hits += o.hits;
        self.misses += o.misses;
        self.expired_misses += o.expired_misses;
        self.rejections += o.rejections;
        self.evictions += o.evictions;
        self.stores += o.stores;
    }
}

/// Node-level counts in one measurement window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WindowCounts {
    pub exogenous: u64,
    pub endogenous: u64,
    /// Plain and expired misses, i.e. requests forwarded to the parent.
    pub misses: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub seed: u64,
    pub config_digest: String,
    pub measure_start: SimTime,
    pub measure_end: SimTime,
    pub window: f64,
    counters: Vec<Vec<Counters>>,
    windows: Vec<Vec<WindowCounts>>,
    /// Exogenous requests by hop count to the serving node.
    pub hop_histogram: Vec<u64>,
    pub exogenous_requests: u64,
    /// Exogenous requests that were served somewhere.
    pub terminations: u64,
    /// HIT outcomes served at or after entry expiry. Must stay zero.
    pub expired_hit_violations: u64,
    /// FNV-1a digest of every exogenous (time, node, content) triple.
    pub stream_digest: u64,
}

impl Metrics {
    pub fn new(nodes: usize, contents: usize, measure_start: SimTime, measure_end: SimTime, window: f64) -> Self {
        let span = (measure_end - measure_start).max(0.0);
        let buckets = if window > 0.0 && span > 0.0 {
            (span / window).ceil() as usize
        } else {
            0
        };
        Self {
            seed: 0,
            config_digest: String::new(),
            measure_start,
            measure_end,
            window,
            counters: vec![vec![Counters::default(); contents]; nodes],
            windows: vec![vec![WindowCounts::default(); buckets]; nodes],
            hop_histogram: Vec::new(),
            exogenous_requests: 0,
            terminations: 0,
            expired_hit_violations: 0,
            stream_digest: 0xcbf2_9ce4_8422_2325,
        }
    }

    pub fn measuring(&self, t: SimTime) -> bool {
        t >= self.measure_start && t <= self.measure_end
    }

    /// Length of the measurement interval in seconds.
    pub fn measured_duration(&self) -> f64 {
        (self.measure_end - self.measure_start).max(0.0)
    }

    pub fn counters(&self, node: NodeId, content: ContentId) -> &Counters {
        &self.counters[node.index()][content.index()]
    }

    pub(crate) fn counters_mut(&mut self, node: NodeId, content: ContentId) -> &mut Counters {
        &mut self.counters[node.index()][content.index()]
    }

    pub fn node_counters(&self, node: NodeId) -> &[Counters] {
        &self.counters[node.index()]
    }

    pub fn node_totals(&self, node: NodeId) -> Counters {
        let mut total = Counters::default();
        for c in &self.counters[node.index()] {
            total.add(c);
        }
        total
    }

    pub fn windows(&self, node: NodeId) -> &[WindowCounts] {
        &self.windows[node.index()]
    }

    pub(crate) fn window_mut(&mut self, node: NodeId, t: SimTime) -> Option<&mut WindowCounts> {
        if self.window <= 0.0 || t < self.measure_start {
            return None;
        }
        let b = ((t - self.measure_start) / self.window) as usize;
        let row = &mut self.windows[node.index()];
        let last = row.len().checked_sub(1)?;
        row.get_mut(b.min(last))
    }

    pub(crate) fn record_hops(&mut self, hops: u32) {
        let h = hops as usize;
        if self.hop_histogram.len() <= h {
            self.hop_histogram.resize(h + 1, 0);
        }
        self.hop_histogram[h] += 1;
    }

    pub(crate) fn fold_stream(&mut self, t: SimTime, node: NodeId, content: ContentId) {
        let mut h = self.stream_digest;
        for b in t
            .to_bits()
            .to_le_bytes()
            .iter()
            .chain(node.0.to_le_bytes().iter())
            .chain(content.0.to_le_bytes().iter())
        {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        self.stream_digest = h;
    }

    /// Every (node, content) pair satisfies hits + misses + expired = requests.
    pub fn accounting_holds(&self) -> bool {
        self.counters
            .iter()
            .flatten()
            .all(|c| c.hits + c.misses + c.expired_misses == c.requests && c.exogenous + c.endogenous == c.requests)
    }

    /// Largest per-window gap between a node's measured request count and its
    /// exogenous count plus its children's forwarded misses.
    pub fn flow_balance_error(&self, topology: &Topology) -> u64 {
        let mut worst = 0;
        for node in topology.node_ids() {
            let kids = topology.children(node);
            if kids.is_empty() {
                continue;
            }
            for (b, w) in self.windows(node).iter().enumerate() {
                let measured = w.exogenous + w.endogenous;
                let expected = w.exogenous + kids.iter().map(|k| self.windows(*k)[b].misses).sum::<u64>();
                worst = worst.max(measured.abs_diff(expected));
            }
        }
        worst
    }
}

/// Total request rate for `content` at `node`: exogenous plus endogenous
/// arrivals counted over a window of `window` seconds.
pub fn aggregate_rate(metrics: &Metrics, node: NodeId, content: ContentId, window: f64) -> Result<f64> {
    if !(window > 0.0) {
        return Err(Error::Domain(format!("rate window must be > 0, got {window}")));
    }
    let c = metrics.counters(node, content);
    Ok((c.exogenous + c.endogenous) as f64 / window)
}
