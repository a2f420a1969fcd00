//! Time-aware LRU.
//!
//! On a miss being filled the node derives a local TTU from two worth
//! signals, one driven by content size and one by request share, then:
//!
//! 1. rejects the item if the local TTU does not outlast the expected gap to
//!    the next request (`τ`),
//! 2. stores it directly if there is room,
//! 3. otherwise evicts by LRU within the contraction set `Ev` (entries whose
//!    remaining lifetime is shorter than their expected request gap `τ̂`),
//!    falling back to LRU over the whole store when `Ev` is empty.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::cache::{CacheEntry, CacheState, StoreOutcome};
use crate::workload::ContentMeta;
use crate::{ContentId, Error, Result, SimTime};

/// How the size-driven and rate-driven worths are combined.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositeRule {
    #[default]
    Max,
    Min,
    FOnly,
    GOnly,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TlruConfig {
    pub composite_rule: CompositeRule,
    /// Admit content whose request gap is still unknown.
    pub cold_start_admit: bool,
    pub ttu_floor: f64,
}

impl Default for TlruConfig {
    fn default() -> Self {
        Self {
            composite_rule: CompositeRule::Max,
            cold_start_admit: true,
            ttu_floor: 0.001,
        }
    }
}

impl TlruConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ttu_floor > 0.0) {
            return Err(Error::config("tlru.ttu_floor", "must be > 0"));
        }
        Ok(())
    }
}

/// Per-content total request rates at a node.
pub trait RateView {
    fn rate(&self, content: ContentId) -> f64;
    /// Sum of rates over every content.
    fn total_rate(&self) -> f64;
}

/// Explicit rate table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RateSnapshot {
    pub rho: HashMap<ContentId, f64>,
}

impl RateSnapshot {
    pub fn new(rates: impl IntoIterator<Item = (ContentId, f64)>) -> Self {
        Self {
            rho: rates.into_iter().collect(),
        }
    }
}

impl RateView for RateSnapshot {
    fn rate(&self, content: ContentId) -> f64 {
        self.rho.get(&content).copied().unwrap_or(0.0)
    }

    fn total_rate(&self) -> f64 {
        let mut rates: Vec<f64> = self.rho.values().copied().collect();
        rates.sort_by(f64::total_cmp);
        rates.iter().sum()
    }
}

/// Online estimates: `1 / ewma_gap` per observed content, 0 otherwise.
impl RateView for CacheState {
    fn rate(&self, content: ContentId) -> f64 {
        self.estimated_rate(content)
    }

    fn total_rate(&self) -> f64 {
        self.estimated_total_rate()
    }
}

/// Size-driven worth: `size / capacity * publisher_ttu`.
pub fn f_worth(content_size: u64, cache_capacity: u64, publisher_ttu: f64) -> Result<f64> {
    if content_size == 0 || content_size > cache_capacity {
        return Err(Error::Domain(format!(
            "content of size {content_size} cannot be cached in capacity {cache_capacity}"
        )));
    }
    if !(publisher_ttu > 0.0) {
        return Err(Error::Domain(format!("publisher TTU must be > 0, got {publisher_ttu}")));
    }
    Ok(content_size as f64 / cache_capacity as f64 * publisher_ttu)
}

/// Rate-driven worth: the content's rate relative to all other traffic at
/// the node, times `publisher_ttu`, clamped into `(0, publisher_ttu]`.
/// With no other traffic the full TTU is returned.
pub fn g_worth<R: RateView + ?Sized>(content: ContentId, rates: &R, publisher_ttu: f64) -> f64 {
    let own = rates.rate(content).max(0.0);
    let others = (rates.total_rate() - own).max(0.0);
    if others <= 0.0 {
        return publisher_ttu;
    }
    let g = own / others * publisher_ttu;
    g.min(publisher_ttu).max(f64::MIN_POSITIVE)
}

/// Combines the worths per the configured rule and clamps the result into
/// `[ttu_floor, publisher_ttu]`.
pub fn combine_worths(f: f64, g: f64, publisher_ttu: f64, config: &TlruConfig) -> f64 {
    let raw = match config.composite_rule {
        CompositeRule::Max => f.max(g),
        CompositeRule::Min => f.min(g),
        CompositeRule::FOnly => f,
        CompositeRule::GOnly => g,
    };
    raw.max(config.ttu_floor).min(publisher_ttu)
}

/// Local TTU of `content` at a node of `cache_capacity`. Errors when the
/// content carries no publisher TTU or does not fit.
pub fn local_ttu<R: RateView + ?Sized>(
    content: &ContentMeta,
    cache_capacity: u64,
    rates: &R,
    config: &TlruConfig,
) -> Result<f64> {
    let ttu = content
        .publisher_ttu
        .ok_or_else(|| Error::Domain(format!("content {} has no TTU stamp and is not cacheable", content.id)))?;
    let f = f_worth(content.size, cache_capacity, ttu)?;
    let g = g_worth(content.id, rates, ttu);
    Ok(combine_worths(f, g, ttu, config))
}

/// Admission test: the local TTU must strictly exceed the expected request gap.
pub fn admit(local_ttu: f64, tau: Option<f64>, config: &TlruConfig) -> bool {
    match tau {
        Some(t) => local_ttu > t,
        None => config.cold_start_admit,
    }
}

/// Membership test for the contraction set.
pub fn in_contraction(entry: &CacheEntry, tau_hat: Option<f64>, now: SimTime) -> bool {
    let remaining = entry.remaining(now);
    if remaining <= 0.0 {
        return true;
    }
    matches!(tau_hat, Some(t) if remaining < t)
}

/// Cached entries whose remaining lifetime is below their request-gap
/// estimate, plus every expired entry.
pub fn contraction_set(state: &CacheState, now: SimTime) -> BTreeSet<ContentId> {
    state
        .entries_by_recency()
        .filter(|e| in_contraction(e, state.tau(e.content), now))
        .map(|e| e.content)
        .collect()
}

/// TLRU fill using the node's own rate estimators for both the rate-driven
/// worth and the admission gap.
pub fn tlru_insert_observed(
    state: &mut CacheState,
    content: &ContentMeta,
    now: SimTime,
    config: &TlruConfig,
) -> StoreOutcome {
    match local_ttu(content, state.capacity(), &*state, config) {
        Ok(ttu) => store_with_local_ttu(state, content, now, ttu, config),
        Err(_) => StoreOutcome::NotCacheable,
    }
}

/// TLRU fill with an explicit rate snapshot for the rate-driven worth.
pub fn tlru_insert<R: RateView + ?Sized>(
    state: &mut CacheState,
    content: &ContentMeta,
    now: SimTime,
    rates: &R,
    config: &TlruConfig,
) -> StoreOutcome {
    match local_ttu(content, state.capacity(), rates, config) {
        Ok(ttu) => store_with_local_ttu(state, content, now, ttu, config),
        Err(_) => StoreOutcome::NotCacheable,
    }
}

fn store_with_local_ttu(
    state: &mut CacheState,
    content: &ContentMeta,
    now: SimTime,
    local_ttu: f64,
    config: &TlruConfig,
) -> StoreOutcome {
    if !admit(local_ttu, state.tau(content.id), config) {
        return StoreOutcome::Rejected;
    }
    state.remove(content.id);
    let mut evicted = Vec::new();
    while state.used() + content.size > state.capacity() {
        let victim = match state.expired_victim(now) {
            Some(v) => v,
            None => state
                .contraction_victim(now)
                .or_else(|| state.evict_victim_lru(None).ok())
                .expect("non-empty cache while over capacity"),
        };
        state.remove(victim);
        evicted.push(victim);
    }
    state.store(CacheEntry::new(content.id, content.size, now, local_ttu));
    StoreOutcome::Stored { evicted }
}
