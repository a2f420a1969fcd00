//! Per-node cache state, request-rate estimators and the FIFO/LRU/LFU
//! baseline eviction rules.
//!
//! Entries are live strictly before their expiry instant. Expired entries are
//! removed lazily: on lookup, or ahead of any policy victim when an insert
//! needs room.

use std::collections::{BTreeSet, HashMap};

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::{ContentId, Error, NodeId, Result, SimTime};

/// Smoothing weight of the inter-request gap EWMA.
pub const EWMA_WEIGHT: f64 = 0.125;

/// Expiry of a permanent (publisher) copy.
pub const NEVER: SimTime = f64::INFINITY;

type Time = OrderedFloat<f64>;
type LruKey = (Time, u64, ContentId);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Fifo,
    Lru,
    Lfu,
    Tlru,
}

impl Policy {
    pub const ALL: [Policy; 4] = [Policy::Fifo, Policy::Lru, Policy::Lfu, Policy::Tlru];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Fifo => "fifo",
            Policy::Lru => "lru",
            Policy::Lfu => "lfu",
            Policy::Tlru => "tlru",
        }
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fifo" => Ok(Policy::Fifo),
            "lru" => Ok(Policy::Lru),
            "lfu" => Ok(Policy::Lfu),
            "tlru" => Ok(Policy::Tlru),
            other => Err(Error::config("policy", format!("unknown policy `{other}`"))),
        }
    }
}

/// A stored copy of a content item.
#[derive(Clone, Debug, PartialEq)]
pub struct CacheEntry {
    pub content: ContentId,
    pub size: u64,
    pub insert_time: SimTime,
    /// Absolute instant at which the copy dies; [`NEVER`] for permanent copies.
    pub expiry: SimTime,
    pub last_access: SimTime,
    /// Assigned by the cache on insertion.
    pub insert_seq: u64,
    /// Hits served during the current residency.
    pub access_count: u64,
}

impl CacheEntry {
    /// A fresh entry inserted at `now` that lives for `ttu` seconds.
    pub fn new(content: ContentId, size: u64, now: SimTime, ttu: f64) -> Self {
        Self {
            content,
            size,
            insert_time: now,
            expiry: now + ttu,
            last_access: now,
            insert_seq: 0,
            access_count: 0,
        }
    }

    pub fn is_live(&self, now: SimTime) -> bool {
        self.expiry > now
    }

    pub fn remaining(&self, now: SimTime) -> f64 {
        self.expiry - now
    }
}

/// EWMA estimator of the mean time between requests for one content.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RateEstimator {
    pub last_request_time: Option<SimTime>,
    pub ewma_gap: Option<f64>,
    pub sample_count: u64,
}

impl RateEstimator {
    /// Folds in a request at `now` and returns the current gap estimate.
    pub fn observe(&mut self, content: ContentId, now: SimTime) -> Result<Option<f64>> {
        if let Some(last) = self.last_request_time {
            if now < last {
                return Err(Error::Ordering { content, last, now });
            }
            let gap = now - last;
            self.ewma_gap = match self.ewma_gap {
                None => Some(gap),
                Some(prev) => Some((1.0 - EWMA_WEIGHT) * prev + EWMA_WEIGHT * gap),
            };
            // A zero gap (simultaneous requests) would make the estimate
            // non-positive; keep it strictly positive.
            if let Some(g) = self.ewma_gap {
                if g <= 0.0 {
                    self.ewma_gap = Some(f64::MIN_POSITIVE);
                }
            }
        }
        self.last_request_time = Some(now);
        self.sample_count += 1;
        Ok(self.ewma_gap)
    }

    /// Estimated request rate, `1 / ewma_gap`, or 0 before two observations.
    pub fn rate(&self) -> f64 {
        self.ewma_gap.map_or(0.0, |g| 1.0 / g)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum AccessResult {
    Hit,
    Miss,
    ExpiredMiss,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccessOutcome {
    pub result: AccessResult,
    pub served_entry: Option<CacheEntry>,
}

/// Result of an attempt to store a content item.
#[derive(Clone, Debug, PartialEq)]
pub enum StoreOutcome {
    Stored { evicted: Vec<ContentId> },
    /// Admission control declined to store; the content is still delivered.
    Rejected,
    /// The item can never be cached here (no TTU stamp, or larger than the cache).
    NotCacheable,
}

/// One node's content store.
#[derive(Clone, Debug)]
pub struct CacheState {
    node: NodeId,
    capacity: u64,
    used: u64,
    entries: HashMap<ContentId, CacheEntry>,
    estimators: HashMap<ContentId, RateEstimator>,
    seq_counter: u64,
    rate_sum: f64,
    fifo_order: BTreeSet<(u64, ContentId)>,
    lru_order: BTreeSet<(Time, u64, ContentId)>,
    lfu_order: BTreeSet<(u64, Time, u64, ContentId)>,
    expiry_order: BTreeSet<(Time, u64, ContentId)>,
    /// Contraction-set index. An indexed entry's membership threshold
    /// `expiry − τ̂` is fixed until it is re-indexed, and membership only
    /// grows with time, so entries move one way from `ev_pending` to `ev_ready`.
    ev_pending: BTreeSet<(Time, LruKey)>,
    ev_ready: BTreeSet<LruKey>,
    ev_threshold: HashMap<ContentId, Time>,
    expired_hits: u64,
}

impl CacheState {
    pub fn new(node: NodeId, capacity: u64) -> Self {
        Self {
            node,
            capacity,
            used: 0,
            entries: HashMap::new(),
            estimators: HashMap::new(),
            seq_counter: 0,
            rate_sum: 0.0,
            fifo_order: BTreeSet::new(),
            lru_order: BTreeSet::new(),
            lfu_order: BTreeSet::new(),
            expiry_order: BTreeSet::new(),
            ev_pending: BTreeSet::new(),
            ev_ready: BTreeSet::new(),
            ev_threshold: HashMap::new(),
            expired_hits: 0,
        }
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, content: ContentId) -> bool {
        self.entries.contains_key(&content)
    }

    pub fn entry(&self, content: ContentId) -> Option<&CacheEntry> {
        self.entries.get(&content)
    }

    /// Entries ordered from least to most recently used.
    pub fn entries_by_recency(&self) -> impl Iterator<Item = &CacheEntry> + '_ {
        self.lru_order.iter().map(move |(_, _, c)| &self.entries[c])
    }

    /// Number of HIT outcomes ever served on an expired entry. Always zero.
    pub fn expired_hits(&self) -> u64 {
        self.expired_hits
    }

    pub fn estimator(&self, content: ContentId) -> Option<&RateEstimator> {
        self.estimators.get(&content)
    }

    /// Current mean inter-request gap for `content` (τ while absent, τ̂ while cached).
    pub fn tau(&self, content: ContentId) -> Option<f64> {
        self.estimators.get(&content).and_then(|e| e.ewma_gap)
    }

    /// Estimated request rate of `content` at this node.
    pub fn estimated_rate(&self, content: ContentId) -> f64 {
        self.estimators.get(&content).map_or(0.0, RateEstimator::rate)
    }

    /// Sum of estimated rates over every content observed at this node.
    pub fn estimated_total_rate(&self) -> f64 {
        self.rate_sum.max(0.0)
    }

    /// Records a request for `content` at `now` and returns the gap estimate.
    pub fn record_request(&mut self, content: ContentId, now: SimTime) -> Result<Option<f64>> {
        let est = self.estimators.entry(content).or_default();
        let before = est.rate();
        let gap = est.observe(content, now)?;
        self.rate_sum += est.rate() - before;
        // τ̂ moved, so the entry's contraction threshold did too.
        if let Some(entry) = self.unindex(content) {
            self.index(entry);
        }
        Ok(gap)
    }

    /// Looks up `content` at `now`. Expired entries are removed and reported
    /// as [`AccessResult::ExpiredMiss`]; hits refresh recency and frequency.
    pub fn lookup(&mut self, content: ContentId, now: SimTime) -> AccessOutcome {
        let Some(entry) = self.entries.get(&content) else {
            return AccessOutcome {
                result: AccessResult::Miss,
                served_entry: None,
            };
        };
        if !entry.is_live(now) {
            let dead = self.remove(content);
            return AccessOutcome {
                result: AccessResult::ExpiredMiss,
                served_entry: dead,
            };
        }
        let mut entry = self.unindex(content).expect("entry present");
        entry.last_access = now;
        entry.access_count += 1;
        if entry.expiry <= now {
            self.expired_hits += 1;
        }
        debug_assert!(entry.expiry > now, "hit served on expired entry");
        self.index(entry.clone());
        AccessOutcome {
            result: AccessResult::Hit,
            served_entry: Some(entry),
        }
    }

    pub fn evict_victim_fifo(&self) -> Result<ContentId> {
        self.fifo_order
            .first()
            .map(|&(_, c)| c)
            .ok_or(Error::EmptyCandidates("fifo victim requested from an empty cache"))
    }

    /// Least recently used entry, optionally restricted to `candidates`.
    /// Ties on last access go to the earlier insertion.
    pub fn evict_victim_lru(&self, candidates: Option<&BTreeSet<ContentId>>) -> Result<ContentId> {
        let found = match candidates {
            None => self.lru_order.first().map(|&(_, _, c)| c),
            Some(set) => self.lru_order.iter().map(|&(_, _, c)| c).find(|c| set.contains(c)),
        };
        found.ok_or(Error::EmptyCandidates("lru victim requested from an empty candidate set"))
    }

    /// First entry in LRU order satisfying `pred`.
    pub fn lru_victim_where(&self, mut pred: impl FnMut(&CacheEntry) -> bool) -> Option<ContentId> {
        self.lru_order
            .iter()
            .map(|(_, _, c)| &self.entries[c])
            .find(|e| pred(e))
            .map(|e| e.content)
    }

    /// Least frequently used entry; ties by LRU order, then insertion order.
    pub fn evict_victim_lfu(&self) -> Result<ContentId> {
        self.lfu_order
            .first()
            .map(|&(_, _, _, c)| c)
            .ok_or(Error::EmptyCandidates("lfu victim requested from an empty cache"))
    }

    /// Least recently used member of the contraction set at `now`: entries
    /// whose remaining lifetime is below τ̂, plus expired ones. Amortised
    /// `O(log n)`; equivalent to filtering [`Self::entries_by_recency`] with
    /// [`crate::tlru::in_contraction`].
    pub fn contraction_victim(&mut self, now: SimTime) -> Option<ContentId> {
        while let Some(&(th, key)) = self.ev_pending.first() {
            let entry = &self.entries[&key.2];
            if !crate::tlru::in_contraction(entry, self.tau(key.2), now) {
                // Thresholds are only approximately ordered at the ulp level;
                // stop at the first entry not yet in the set.
                break;
            }
            self.ev_pending.remove(&(th, key));
            self.ev_ready.insert(key);
        }
        self.ev_ready.first().map(|k| k.2)
    }

    /// Earliest-expiring entry if it is already dead at `now`.
    pub fn expired_victim(&self, now: SimTime) -> Option<ContentId> {
        self.expiry_order
            .first()
            .filter(|(expiry, _, _)| expiry.0 <= now)
            .map(|&(_, _, c)| c)
    }

    fn policy_victim(&self, policy: Policy) -> Result<ContentId> {
        match policy {
            Policy::Fifo => self.evict_victim_fifo(),
            Policy::Lru | Policy::Tlru => self.evict_victim_lru(None),
            Policy::Lfu => self.evict_victim_lfu(),
        }
    }

    /// Stores `entry` (inserted at `entry.insert_time`), evicting expired
    /// entries first and then victims of `policy` until it fits. A `Tlru`
    /// policy here only uses the plain LRU victim rule; see
    /// [`crate::tlru::tlru_insert`] for the full policy.
    pub fn insert(&mut self, entry: CacheEntry, policy: Policy) -> StoreOutcome {
        if entry.size > self.capacity || entry.size == 0 {
            return StoreOutcome::NotCacheable;
        }
        let now = entry.insert_time;
        let mut evicted = Vec::new();
        if let Some(old) = self.remove(entry.content) {
            debug_assert!(old.content == entry.content);
        }
        while self.used + entry.size > self.capacity {
            let victim = match self.expired_victim(now) {
                Some(c) => c,
                None => self.policy_victim(policy).expect("non-empty cache while over capacity"),
            };
            self.remove(victim);
            evicted.push(victim);
        }
        self.store(entry);
        StoreOutcome::Stored { evicted }
    }

    /// Unconditionally places `entry`; the caller has made room.
    pub(crate) fn store(&mut self, mut entry: CacheEntry) {
        debug_assert!(self.used + entry.size <= self.capacity);
        debug_assert!(entry.expiry > entry.insert_time, "empty life span");
        self.seq_counter += 1;
        entry.insert_seq = self.seq_counter;
        self.used += entry.size;
        self.index(entry);
    }

    /// Removes `content` from the store, returning the evicted entry.
    pub fn remove(&mut self, content: ContentId) -> Option<CacheEntry> {
        let entry = self.unindex(content)?;
        self.used -= entry.size;
        Some(entry)
    }

    fn index(&mut self, entry: CacheEntry) {
        let c = entry.content;
        let seq = entry.insert_seq;
        self.fifo_order.insert((seq, c));
        self.lru_order.insert((OrderedFloat(entry.last_access), seq, c));
        self.lfu_order
            .insert((entry.access_count, OrderedFloat(entry.last_access), seq, c));
        self.expiry_order.insert((OrderedFloat(entry.expiry), seq, c));
        let threshold = OrderedFloat(match self.tau(c) {
            Some(gap) => entry.expiry - gap,
            None => entry.expiry,
        });
        self.ev_pending
            .insert((threshold, (OrderedFloat(entry.last_access), seq, c)));
        self.ev_threshold.insert(c, threshold);
        self.entries.insert(c, entry);
    }

    fn unindex(&mut self, content: ContentId) -> Option<CacheEntry> {
        let entry = self.entries.remove(&content)?;
        let seq = entry.insert_seq;
        let last = OrderedFloat(entry.last_access);
        self.fifo_order.remove(&(seq, content));
        self.lru_order.remove(&(last, seq, content));
        self.lfu_order.remove(&(entry.access_count, last, seq, content));
        self.expiry_order
            .remove(&(OrderedFloat(entry.expiry), seq, content));
        let key = (last, seq, content);
        if let Some(th) = self.ev_threshold.remove(&content) {
            self.ev_pending.remove(&(th, key));
        }
        self.ev_ready.remove(&key);
        Some(entry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(id: u32) -> ContentId {
        ContentId(id)
    }

    fn put(state: &mut CacheState, id: u32, now: f64, policy: Policy) -> StoreOutcome {
        state.insert(CacheEntry::new(c(id), 1, now, 1e9), policy)
    }

    #[test]
    fn estimator_examples() {
        let mut s = CacheState::new(NodeId(0), 4);
        assert_eq!(s.record_request(c(1), 0.0).unwrap(), None);
        assert_eq!(s.record_request(c(1), 10.0).unwrap(), Some(10.0));
        assert_eq!(s.record_request(c(1), 18.0).unwrap(), Some(9.75));

        assert_eq!(s.record_request(c(2), 5.0).unwrap(), None);
        assert_eq!(s.tau(c(2)), None);

        let err = s.record_request(c(1), 17.0).unwrap_err();
        assert!(matches!(err, Error::Ordering { .. }));
        assert!((s.estimated_total_rate() - 1.0 / 9.75).abs() < 1e-15);
    }

    #[test]
    fn simultaneous_requests_keep_gap_positive() {
        let mut est = RateEstimator::default();
        est.observe(c(1), 3.0).unwrap();
        let g = est.observe(c(1), 3.0).unwrap().unwrap();
        assert!(g > 0.0);
        assert_eq!(est.sample_count, 2);
    }

    #[test]
    fn lookup_respects_expiry_boundary() {
        let mut s = CacheState::new(NodeId(0), 2);
        s.insert(CacheEntry::new(c(1), 1, 0.0, 100.0), Policy::Lru);
        assert_eq!(s.lookup(c(1), 99.0).result, AccessResult::Hit);
        let out = s.lookup(c(1), 100.0);
        assert_eq!(out.result, AccessResult::ExpiredMiss);
        assert!(!s.contains(c(1)));
        assert_eq!(s.used(), 0);
        assert_eq!(s.lookup(c(7), 1.0).result, AccessResult::Miss);
        assert_eq!(s.expired_hits(), 0);
    }

    #[test]
    fn fifo_examples() {
        let mut s = CacheState::new(NodeId(0), 3);
        assert!(s.evict_victim_fifo().is_err());
        put(&mut s, 1, 0.0, Policy::Fifo);
        assert_eq!(s.evict_victim_fifo().unwrap(), c(1));
        put(&mut s, 2, 1.0, Policy::Fifo);
        put(&mut s, 3, 2.0, Policy::Fifo);
        assert_eq!(s.evict_victim_fifo().unwrap(), c(1));
        s.lookup(c(1), 3.0);
        assert_eq!(s.evict_victim_fifo().unwrap(), c(1));
    }

    #[test]
    fn lru_examples() {
        let mut s = CacheState::new(NodeId(0), 3);
        assert!(s.evict_victim_lru(None).is_err());
        put(&mut s, 1, 1.0, Policy::Lru);
        put(&mut s, 2, 2.0, Policy::Lru);
        s.lookup(c(1), 3.0);
        assert_eq!(s.evict_victim_lru(None).unwrap(), c(2));

        let mut s = CacheState::new(NodeId(0), 3);
        put(&mut s, 1, 5.0, Policy::Lru);
        put(&mut s, 2, 1.0, Policy::Lru);
        put(&mut s, 3, 9.0, Policy::Lru);
        let cands: BTreeSet<_> = [c(1), c(3)].into();
        assert_eq!(s.evict_victim_lru(Some(&cands)).unwrap(), c(1));
        assert!(s.evict_victim_lru(Some(&BTreeSet::new())).is_err());
    }

    #[test]
    fn lru_tie_breaks_on_insertion_order() {
        // Enumerate both access orders at the same instant: the earlier
        // insertion is always the victim.
        for order in [[1, 2], [2, 1]] {
            let mut s = CacheState::new(NodeId(0), 2);
            put(&mut s, 1, 0.0, Policy::Lru);
            put(&mut s, 2, 1.0, Policy::Lru);
            for id in order {
                s.lookup(c(id), 4.0);
            }
            assert_eq!(s.evict_victim_lru(None).unwrap(), c(1));
        }
    }

    #[test]
    fn lfu_examples() {
        let mut s = CacheState::new(NodeId(0), 3);
        assert!(s.evict_victim_lfu().is_err());
        put(&mut s, 1, 0.0, Policy::Lfu);
        assert_eq!(s.evict_victim_lfu().unwrap(), c(1));
        put(&mut s, 2, 0.0, Policy::Lfu);
        for t in [1.0, 2.0, 3.0] {
            s.lookup(c(1), t);
        }
        s.lookup(c(2), 4.0);
        assert_eq!(s.evict_victim_lfu().unwrap(), c(2));
    }

    #[test]
    fn lfu_tie_breaks_by_recency() {
        // counts a:2, b:2 with every interleaving of the hits; the entry with
        // the older last access is the victim.
        let schedules: [[u32; 4]; 6] = [
            [1, 1, 2, 2],
            [1, 2, 1, 2],
            [1, 2, 2, 1],
            [2, 1, 1, 2],
            [2, 1, 2, 1],
            [2, 2, 1, 1],
        ];
        for sched in schedules {
            let mut s = CacheState::new(NodeId(0), 2);
            put(&mut s, 1, 0.0, Policy::Lfu);
            put(&mut s, 2, 0.0, Policy::Lfu);
            for (i, id) in sched.iter().enumerate() {
                s.lookup(c(*id), 1.0 + i as f64);
            }
            let last = *sched.last().unwrap();
            let expected = if last == 1 { c(2) } else { c(1) };
            assert_eq!(s.evict_victim_lfu().unwrap(), expected, "{sched:?}");
        }
    }

    #[test]
    fn lfu_counts_reset_per_residency() {
        let mut s = CacheState::new(NodeId(0), 1);
        put(&mut s, 1, 0.0, Policy::Lfu);
        s.lookup(c(1), 1.0);
        s.lookup(c(1), 2.0);
        put(&mut s, 2, 3.0, Policy::Lfu);
        put(&mut s, 1, 4.0, Policy::Lfu);
        assert_eq!(s.entry(c(1)).unwrap().access_count, 0);
    }

    #[test]
    fn insert_examples() {
        let mut s = CacheState::new(NodeId(0), 2);
        put(&mut s, 1, 1.0, Policy::Lru);
        put(&mut s, 2, 2.0, Policy::Lru);
        assert_eq!(
            put(&mut s, 3, 3.0, Policy::Lru),
            StoreOutcome::Stored { evicted: vec![c(1)] }
        );

        let mut s = CacheState::new(NodeId(0), 2);
        s.insert(CacheEntry::new(c(1), 1, 0.0, 1e9), Policy::Lru);
        s.insert(CacheEntry::new(c(2), 1, 1.0, 5.0), Policy::Lru);
        // c(2) expired at t=6; c(1) is the LRU victim but the dead entry goes first.
        assert_eq!(
            s.insert(CacheEntry::new(c(3), 1, 10.0, 5.0), Policy::Lru),
            StoreOutcome::Stored { evicted: vec![c(2)] }
        );

        let mut s = CacheState::new(NodeId(0), 2);
        assert_eq!(
            s.insert(CacheEntry::new(c(9), 3, 0.0, 1.0), Policy::Lru),
            StoreOutcome::NotCacheable
        );
        assert!(s.is_empty());
    }

    #[test]
    fn variable_sizes_evict_multiple_victims() {
        let mut s = CacheState::new(NodeId(0), 4);
        for id in 1..=4 {
            put(&mut s, id, id as f64, Policy::Fifo);
        }
        let out = s.insert(CacheEntry::new(c(9), 3, 10.0, 1e9), Policy::Fifo);
        assert_eq!(out, StoreOutcome::Stored { evicted: vec![c(1), c(2), c(3)] });
        assert_eq!(s.used(), 4);
    }

    #[derive(Clone, Debug)]
    enum Op {
        Request(u32),
        Advance(u8),
    }

    fn ops() -> impl Strategy<Value = Vec<Op>> {
        prop::collection::vec(
            prop_oneof![
                4 => (1u32..12).prop_map(Op::Request),
                1 => (0u8..20).prop_map(Op::Advance),
            ],
            1..300,
        )
    }

    proptest! {
        #[test]
        fn capacity_and_safety_hold(ops in ops(), cap in 1u64..6, pol in 0usize..3, ttl in 1.0f64..40.0) {
            let policy = [Policy::Fifo, Policy::Lru, Policy::Lfu][pol];
            let mut s = CacheState::new(NodeId(0), cap);
            let mut now = 0.0;
            for op in ops {
                match op {
                    Op::Advance(dt) => now += dt as f64,
                    Op::Request(id) => {
                        s.record_request(c(id), now).unwrap();
                        let out = s.lookup(c(id), now);
                        if out.result == AccessResult::Hit {
                            prop_assert!(out.served_entry.unwrap().expiry > now);
                        } else {
                            s.insert(CacheEntry::new(c(id), 1 + (id as u64 % 2), now, ttl), policy);
                        }
                        prop_assert!(s.used() <= s.capacity());
                        let total: u64 = s.entries_by_recency().map(|e| e.size).sum();
                        prop_assert_eq!(total, s.used());
                        if let Some(g) = s.tau(c(id)) {
                            prop_assert!(g > 0.0);
                        }
                    }
                }
            }
            prop_assert_eq!(s.expired_hits(), 0);
        }

        #[test]
        fn fifo_order_is_rigid_under_hits(hits in prop::collection::vec(1u32..5, 0..50)) {
            let mut s = CacheState::new(NodeId(0), 4);
            for id in 1..=4 {
                put(&mut s, id, id as f64, Policy::Fifo);
            }
            let before: Vec<_> = s.fifo_order.iter().map(|&(_, c)| c).collect();
            for (i, id) in hits.iter().enumerate() {
                s.lookup(c(*id), 10.0 + i as f64);
            }
            let after: Vec<_> = s.fifo_order.iter().map(|&(_, c)| c).collect();
            prop_assert_eq!(before, after);
        }
    }
}
