//! Exhaustive state-graph analysis of eviction policies on tiny instances.
//!
//! Contents are small integers rendered as letters (`a`, `b`, ...). Every
//! state is enumerated breadth-first from the empty cache under every
//! request symbol, which gives a finite graph on which protectiveness and
//! recurrence become plain graph questions.
//!
//! TLRU timing is abstracted to `ttu_levels` live levels plus an expired
//! level 0: new entries start at the top level, every request step first
//! decays all entries by one level, and entries at level 1 or 0 form the
//! contraction set.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::Direction;

use crate::cache::Policy;
use crate::{Error, Result};

pub const MAX_CATALOG: u8 = 6;
pub const MAX_CACHE: u8 = 3;
pub const MAX_TTU_LEVELS: u8 = 3;
pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

/// Letter name of content symbol `c` (0 is `a`).
pub fn symbol(c: u8) -> char {
    char::from(b'a' + c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub content: u8,
    /// Hit count in the current residency (LFU only, capped).
    pub count: u8,
    /// Remaining-TTU level (TLRU only); 0 means expired.
    pub level: u8,
}

/// Canonical eviction-relevant state. `slots` is the queue for FIFO and the
/// recency order for the other policies, eviction end first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbstractCacheState {
    pub policy: Policy,
    pub slots: Vec<Slot>,
}

impl AbstractCacheState {
    pub fn empty(policy: Policy) -> Self {
        Self {
            policy,
            slots: Vec::new(),
        }
    }

    /// State holding `order` (eviction end first) with fresh per-entry
    /// metadata: zero hits and, for TLRU, the top TTU level.
    pub fn from_order(policy: Policy, order: &[u8], ttu_levels: u8) -> Self {
        let slots = order
            .iter()
            .map(|&content| Slot {
                content,
                count: 0,
                level: if policy == Policy::Tlru { ttu_levels } else { 0 },
            })
            .collect();
        Self { policy, slots }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn contains(&self, c: u8) -> bool {
        self.slots.iter().any(|s| s.content == c)
    }

    /// Cached contents as a bitmask.
    pub fn content_mask(&self) -> u8 {
        self.slots.iter().fold(0, |m, s| m | (1 << s.content))
    }
}

impl fmt::Display for AbstractCacheState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.slots.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", symbol(s.content))?;
            match self.policy {
                Policy::Lfu => write!(f, ":{}", s.count)?,
                Policy::Tlru => write!(f, "^{}", s.level)?,
                _ => {}
            }
        }
        write!(f, ")")
    }
}

/// Instance parameters shared by every state of a graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LabParams {
    pub policy: Policy,
    pub catalog_size: u8,
    pub cache_size: u8,
    pub ttu_levels: u8,
}

impl LabParams {
    fn count_cap(&self) -> u8 {
        self.cache_size + 1
    }
}

/// One request applied to a state: the successor and what left the cache.
pub fn step(params: &LabParams, state: &AbstractCacheState, request: u8) -> (AbstractCacheState, Vec<u8>) {
    let mut slots = state.slots.clone();
    let mut evicted = Vec::new();
    let cap = usize::from(params.cache_size);
    match params.policy {
        Policy::Fifo => {
            if !state.contains(request) {
                if slots.len() == cap {
                    evicted.push(slots.remove(0).content);
                }
                slots.push(Slot {
                    content: request,
                    count: 0,
                    level: 0,
                });
            }
        }
        Policy::Lru => {
            if let Some(i) = slots.iter().position(|s| s.content == request) {
                let s = slots.remove(i);
                slots.push(s);
            } else {
                if slots.len() == cap {
                    evicted.push(slots.remove(0).content);
                }
                slots.push(Slot {
                    content: request,
                    count: 0,
                    level: 0,
                });
            }
        }
        Policy::Lfu => {
            if let Some(i) = slots.iter().position(|s| s.content == request) {
                let mut s = slots.remove(i);
                s.count = (s.count + 1).min(params.count_cap());
                slots.push(s);
            } else {
                if slots.len() == cap {
                    // Lowest count; ties go to the least recent (earliest slot).
                    let (i, _) = slots
                        .iter()
                        .enumerate()
                        .min_by_key(|(i, s)| (s.count, *i))
                        .expect("full cache");
                    evicted.push(slots.remove(i).content);
                }
                slots.push(Slot {
                    content: request,
                    count: 0,
                    level: 0,
                });
            }
        }
        Policy::Tlru => {
            for s in &mut slots {
                s.level = s.level.saturating_sub(1);
            }
            let pos = slots.iter().position(|s| s.content == request);
            match pos {
                Some(i) if slots[i].level > 0 => {
                    let s = slots.remove(i);
                    slots.push(s);
                }
                _ => {
                    // Expired copies are dropped and refetched like a miss.
                    if let Some(i) = pos {
                        slots.remove(i);
                    }
                    if slots.len() == cap {
                        let i = slots
                            .iter()
                            .position(|s| s.level == 0)
                            .or_else(|| slots.iter().position(|s| s.level <= 1))
                            .unwrap_or(0);
                        evicted.push(slots.remove(i).content);
                    }
                    slots.push(Slot {
                        content: request,
                        count: 0,
                        level: params.ttu_levels,
                    });
                }
            }
        }
    }
    (
        AbstractCacheState {
            policy: params.policy,
            slots,
        },
        evicted,
    )
}

/// Content a miss would evict from `state`, judged with a request for a
/// content outside the catalog. `None` unless the cache is full.
pub fn victim(params: &LabParams, state: &AbstractCacheState) -> Option<u8> {
    if state.len() < usize::from(params.cache_size) {
        return None;
    }
    step(params, state, params.catalog_size).1.first().copied()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub request: u8,
    pub target: usize,
    pub evicted: Vec<u8>,
    /// Probability under the uniform request distribution.
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct TransitionGraph {
    pub params: LabParams,
    /// States in discovery order; index 0 is the empty cache.
    pub states: Vec<AbstractCacheState>,
    /// Out-edges per state, one per request symbol in symbol order.
    pub edges: Vec<Vec<Edge>>,
    index: HashMap<AbstractCacheState, usize>,
}

impl TransitionGraph {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn find(&self, state: &AbstractCacheState) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn is_full(&self, i: usize) -> bool {
        self.states[i].len() == usize::from(self.params.cache_size)
    }

    pub fn full_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.is_full(i))
    }

    fn digraph(&self) -> DiGraph<(), ()> {
        let mut g = DiGraph::with_capacity(self.len(), self.len() * usize::from(self.params.catalog_size));
        for _ in 0..self.len() {
            g.add_node(());
        }
        for (s, out) in self.edges.iter().enumerate() {
            for e in out {
                g.update_edge(NodeIndex::new(s), NodeIndex::new(e.target), ());
            }
        }
        g
    }
}

/// Breadth-first closure from the empty cache with the default state budget.
pub fn enumerate_reachable(policy: Policy, catalog_size: u8, cache_size: u8, ttu_levels: u8) -> Result<TransitionGraph> {
    enumerate_with_budget(policy, catalog_size, cache_size, ttu_levels, DEFAULT_STATE_BUDGET)
}

pub fn enumerate_with_budget(
    policy: Policy,
    catalog_size: u8,
    cache_size: u8,
    ttu_levels: u8,
    budget: usize,
) -> Result<TransitionGraph> {
    if !(1..=MAX_CATALOG).contains(&catalog_size) {
        return Err(Error::Domain(format!("catalog size must be in 1..={MAX_CATALOG}, got {catalog_size}")));
    }
    if !(1..=MAX_CACHE).contains(&cache_size) {
        return Err(Error::Domain(format!("cache size must be in 1..={MAX_CACHE}, got {cache_size}")));
    }
    if policy == Policy::Tlru && !(1..=MAX_TTU_LEVELS).contains(&ttu_levels) {
        return Err(Error::Domain(format!("ttu levels must be in 1..={MAX_TTU_LEVELS}, got {ttu_levels}")));
    }
    let params = LabParams {
        policy,
        catalog_size,
        cache_size,
        ttu_levels: if policy == Policy::Tlru { ttu_levels } else { 0 },
    };
    let weight = 1.0 / f64::from(catalog_size);
    let root = AbstractCacheState::empty(policy);
    let mut states = vec![root.clone()];
    let mut index = HashMap::from([(root, 0usize)]);
    let mut edges: Vec<Vec<Edge>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let mut out = Vec::with_capacity(usize::from(catalog_size));
        for r in 0..catalog_size {
            let (next, evicted) = step(&params, &states[s], r);
            let target = match index.get(&next) {
                Some(&t) => t,
                None => {
                    if states.len() >= budget {
                        return Err(Error::StateBudget {
                            count: states.len() + 1,
                            budget,
                        });
                    }
                    let t = states.len();
                    index.insert(next.clone(), t);
                    states.push(next);
                    queue.push_back(t);
                    t
                }
            };
            out.push(Edge {
                request: r,
                target,
                evicted,
                weight,
            });
        }
        // BFS pops in index order, so edges[s] lines up with states[s].
        debug_assert_eq!(edges.len(), s);
        edges.push(out);
    }
    Ok(TransitionGraph {
        params,
        states,
        edges,
        index,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Protective,
    NonProtective,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Protective => "PROTECTIVE",
            Classification::NonProtective => "NON_PROTECTIVE",
        })
    }
}

/// A cached content that no content-preserving request sequence can evict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Witness {
    pub state: usize,
    pub content: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationReport {
    pub class: Classification,
    pub witnesses: Vec<Witness>,
    /// (full state, cached content) pairs examined.
    pub pairs: usize,
    /// Pairs evicted by some single next request.
    pub one_step: usize,
    /// Pairs evicted after a content-preserving prefix (the classification basis).
    pub preserving: usize,
    /// Pairs evicted along some arbitrary path.
    pub eventual: usize,
}

/// A content counts as evictable from a full state when some run of requests
/// that leaves the cached set unchanged reaches a state whose miss victim is
/// that content. Hits only reshuffle the policy's ordering, so this asks
/// whether the policy lets every item drift to the eviction end without
/// outside help; FIFO is the policy for which hits cannot do that. Victims
/// are judged against a request from outside the catalog, so a cache that
/// holds the whole catalog is still classified.
pub fn classify_protective(graph: &TransitionGraph) -> ClassificationReport {
    let eventual_masks = eventual_eviction_masks(graph);
    let mut report = ClassificationReport {
        class: Classification::NonProtective,
        witnesses: Vec::new(),
        pairs: 0,
        one_step: 0,
        preserving: 0,
        eventual: 0,
    };
    for s in graph.full_states() {
        let state = &graph.states[s];
        let one_step_mask = victim_mask(graph, s);
        let preserving_mask = preserving_eviction_mask(graph, s);
        for slot in &state.slots {
            let bit = 1u8 << slot.content;
            report.pairs += 1;
            report.one_step += usize::from(one_step_mask & bit != 0);
            report.eventual += usize::from(eventual_masks[s] & bit != 0);
            if preserving_mask & bit != 0 {
                report.preserving += 1;
            } else {
                report.witnesses.push(Witness {
                    state: s,
                    content: slot.content,
                });
            }
        }
    }
    if !report.witnesses.is_empty() {
        report.class = Classification::Protective;
    }
    report
}

fn evicted_mask(edges: &[Edge]) -> u8 {
    edges.iter().flat_map(|e| &e.evicted).fold(0, |m, c| m | (1 << c))
}

fn victim_mask(graph: &TransitionGraph, s: usize) -> u8 {
    victim(&graph.params, &graph.states[s]).map_or(0, |c| 1 << c) | evicted_mask(&graph.edges[s])
}

fn preserving_eviction_mask(graph: &TransitionGraph, start: usize) -> u8 {
    let contents = graph.states[start].content_mask();
    let mut seen = vec![false; graph.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    let mut mask = 0;
    while let Some(s) = queue.pop_front() {
        mask |= victim_mask(graph, s);
        for e in &graph.edges[s] {
            if graph.states[e.target].content_mask() == contents && !seen[e.target] {
                seen[e.target] = true;
                queue.push_back(e.target);
            }
        }
    }
    mask
}

/// Per state: every content evicted on some edge reachable from it.
fn eventual_eviction_masks(graph: &TransitionGraph) -> Vec<u8> {
    let g = graph.digraph();
    // tarjan_scc yields components in reverse topological order, so every
    // successor component is finished before its predecessors.
    let sccs = tarjan_scc(&g);
    let mut comp = vec![0usize; graph.len()];
    for (k, scc) in sccs.iter().enumerate() {
        for n in scc {
            comp[n.index()] = k;
        }
    }
    let mut comp_mask = vec![0u8; sccs.len()];
    for (k, scc) in sccs.iter().enumerate() {
        let mut m = 0;
        for n in scc {
            let s = n.index();
            m |= victim_mask(graph, s);
            for e in &graph.edges[s] {
                let t = comp[e.target];
                if t != k {
                    m |= comp_mask[t];
                }
            }
        }
        comp_mask[k] = m;
    }
    (0..graph.len()).map(|s| comp_mask[comp[s]]).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceReport {
    /// Closed communicating classes, each sorted by state index.
    pub closed_classes: Vec<Vec<usize>>,
    /// States in some closed class.
    pub recurrent: Vec<usize>,
    /// True iff one closed class holds every full state.
    pub is_ergodic_set: bool,
    /// True iff there is one closed class and, for every full state, it holds
    /// a state with the same contents in the same order. Weaker than
    /// `is_ergodic_set` when per-entry metadata (LFU counts) only grows.
    pub covers_placements: bool,
}

/// Recurrent states are those in a closed strongly connected component.
/// With any request distribution that gives every symbol positive mass this
/// matches return-with-probability-one.
pub fn check_recurrence(graph: &TransitionGraph) -> RecurrenceReport {
    let g = graph.digraph();
    let sccs = tarjan_scc(&g);
    let mut comp = vec![0usize; graph.len()];
    for (k, scc) in sccs.iter().enumerate() {
        for n in scc {
            comp[n.index()] = k;
        }
    }
    let mut closed_classes: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(k, scc)| {
            scc.iter()
                .all(|n| g.neighbors_directed(*n, Direction::Outgoing).all(|m| comp[m.index()] == *k))
        })
        .map(|(_, scc)| {
            let mut v: Vec<usize> = scc.iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    closed_classes.sort();
    let mut recurrent: Vec<usize> = closed_classes.iter().flatten().copied().collect();
    recurrent.sort_unstable();
    let is_ergodic_set = closed_classes.len() == 1 && graph.full_states().all(|s| closed_classes[0].binary_search(&s).is_ok());
    let covers_placements = closed_classes.len() == 1 && {
        let placement = |i: usize| graph.states[i].slots.iter().map(|s| s.content).collect::<Vec<u8>>();
        let inside: std::collections::HashSet<Vec<u8>> = closed_classes[0].iter().map(|&i| placement(i)).collect();
        graph.full_states().all(|s| inside.contains(&placement(s)))
    };
    RecurrenceReport {
        closed_classes,
        recurrent,
        is_ergodic_set,
        covers_placements,
    }
}

/// Fewest requests leading from `from` to `to`.
pub fn reorder_cost(graph: &TransitionGraph, from: &AbstractCacheState, to: &AbstractCacheState) -> Result<usize> {
    let missing = |s: &AbstractCacheState| Error::Domain(format!("state {s} is not in the graph"));
    let src = graph.find(from).ok_or_else(|| missing(from))?;
    let dst = graph.find(to).ok_or_else(|| missing(to))?;
    let mut dist = vec![usize::MAX; graph.len()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(s) = queue.pop_front() {
        if s == dst {
            return Ok(dist[s]);
        }
        for e in &graph.edges[s] {
            if dist[e.target] == usize::MAX {
                dist[e.target] = dist[s] + 1;
                queue.push_back(e.target);
            }
        }
    }
    Err(Error::Unreachable)
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: u8 = 0;
    const B: u8 = 1;
    const C: u8 = 2;
    const D: u8 = 3;

    #[test]
    fn lru_pairs_are_all_reachable() {
        let g = enumerate_reachable(Policy::Lru, 3, 2, 0).unwrap();
        assert_eq!(g.full_states().count(), 6);
        // Empty, three singletons, six ordered pairs.
        assert_eq!(g.len(), 10);
    }

    #[test]
    fn fifo_reaches_the_same_full_states() {
        let g = enumerate_reachable(Policy::Fifo, 3, 2, 0).unwrap();
        assert_eq!(g.full_states().count(), 6);
        // Hits never move anything.
        for s in g.full_states() {
            for e in &g.edges[s] {
                if g.states[s].contains(e.request) {
                    assert_eq!(e.target, s);
                }
            }
        }
    }

    #[test]
    fn single_content_graph() {
        for p in Policy::ALL {
            let g = enumerate_reachable(p, 1, 1, 2).unwrap();
            let expected = match p {
                // a:0 .. a:2 under the count cap.
                Policy::Lfu => 4,
                // a^2, a^1; a request at a^1 expires and refetches.
                Policy::Tlru => 3,
                _ => 2,
            };
            assert_eq!(g.len(), expected, "{p}");
            let r = check_recurrence(&g);
            assert_eq!(r.is_ergodic_set, p != Policy::Lfu, "{p}");
            assert!(r.covers_placements);
            assert!(!r.recurrent.contains(&0));
        }
    }

    #[test]
    fn edges_cover_every_symbol_and_replay() {
        for p in Policy::ALL {
            let g = enumerate_reachable(p, 4, 3, 3).unwrap();
            for (s, out) in g.edges.iter().enumerate() {
                assert_eq!(out.len(), 4);
                for (r, e) in out.iter().enumerate() {
                    assert_eq!(e.request as usize, r);
                    let (next, ev) = step(&g.params, &g.states[s], e.request);
                    assert_eq!(g.find(&next), Some(e.target));
                    assert_eq!(ev, e.evicted);
                }
            }
        }
    }

    #[test]
    fn fifo_is_protective_with_newest_as_witness() {
        let g = enumerate_reachable(Policy::Fifo, 3, 2, 0).unwrap();
        let r = classify_protective(&g);
        assert_eq!(r.class, Classification::Protective);
        for w in &r.witnesses {
            assert_eq!(g.states[w.state].slots.last().unwrap().content, w.content);
        }
        assert_eq!(r.witnesses.len(), 6);
    }

    #[test]
    fn other_policies_are_non_protective() {
        for p in [Policy::Lru, Policy::Lfu, Policy::Tlru] {
            let g = enumerate_reachable(p, 3, 2, 2).unwrap();
            let r = classify_protective(&g);
            assert_eq!(r.class, Classification::NonProtective, "{p}");
            assert_eq!(r.preserving, r.pairs);
        }
    }

    #[test]
    fn classification_table_holds_across_sizes() {
        for catalog in 3..=5 {
            for cache in 2..=3 {
                for p in Policy::ALL {
                    let g = enumerate_reachable(p, catalog, cache, 2).unwrap();
                    let expected = if p == Policy::Fifo {
                        Classification::Protective
                    } else {
                        Classification::NonProtective
                    };
                    assert_eq!(classify_protective(&g).class, expected, "{p} {catalog}/{cache}");
                }
            }
        }
    }

    #[test]
    fn unit_cache_is_never_protective() {
        for p in Policy::ALL {
            let g = enumerate_reachable(p, 3, 1, 2).unwrap();
            assert_eq!(classify_protective(&g).class, Classification::NonProtective, "{p}");
        }
    }

    #[test]
    fn non_protective_graphs_have_one_closed_class() {
        for catalog in 3..=5 {
            for cache in 2..=3 {
                for p in [Policy::Lru, Policy::Lfu, Policy::Tlru] {
                    let g = enumerate_reachable(p, catalog, cache, 2).unwrap();
                    let r = check_recurrence(&g);
                    assert_eq!(r.closed_classes.len(), 1, "{p} {catalog}/{cache}");
                    assert!(r.covers_placements, "{p} {catalog}/{cache}");
                    // LFU counts never shrink for the resident maximum, so its
                    // low-count full states are transient.
                    assert_eq!(r.is_ergodic_set, p != Policy::Lfu, "{p} {catalog}/{cache}");
                }
            }
        }
    }

    #[test]
    fn fifo_full_states_split_into_rotation_classes() {
        let g = enumerate_reachable(Policy::Fifo, 3, 2, 0).unwrap();
        let r = check_recurrence(&g);
        assert_eq!(r.closed_classes.len(), 2);
        assert!(r.closed_classes.iter().all(|c| c.len() == 3));
        assert!(!r.is_ergodic_set);
    }

    #[test]
    fn fifo_reorder_takes_four_steps() {
        let g = enumerate_reachable(Policy::Fifo, 4, 2, 0).unwrap();
        let from = AbstractCacheState::from_order(Policy::Fifo, &[D, C], 0);
        let to = AbstractCacheState::from_order(Policy::Fifo, &[C, D], 0);
        assert_eq!(reorder_cost(&g, &from, &to).unwrap(), 4);
        assert_eq!(reorder_cost(&g, &from, &from).unwrap(), 0);

        let g3 = enumerate_reachable(Policy::Fifo, 3, 2, 0).unwrap();
        let from = AbstractCacheState::from_order(Policy::Fifo, &[B, A], 0);
        let to = AbstractCacheState::from_order(Policy::Fifo, &[A, B], 0);
        assert!(matches!(reorder_cost(&g3, &from, &to), Err(Error::Unreachable)));
    }

    #[test]
    fn lru_reorder_takes_one_hit() {
        let g = enumerate_reachable(Policy::Lru, 4, 2, 0).unwrap();
        let from = AbstractCacheState::from_order(Policy::Lru, &[D, C], 0);
        let to = AbstractCacheState::from_order(Policy::Lru, &[C, D], 0);
        assert_eq!(reorder_cost(&g, &from, &to).unwrap(), 1);
    }

    #[test]
    fn lfu_prefers_low_count_then_recency() {
        let p = LabParams {
            policy: Policy::Lfu,
            catalog_size: 3,
            cache_size: 2,
            ttu_levels: 0,
        };
        let mut s = AbstractCacheState::from_order(Policy::Lfu, &[A, B], 0);
        s.slots[0].count = 2;
        let (_, ev) = step(&p, &s, C);
        assert_eq!(ev, vec![B]);
        s.slots[1].count = 2;
        let (_, ev) = step(&p, &s, C);
        assert_eq!(ev, vec![A]);
    }

    #[test]
    fn tlru_evicts_expired_then_contraction_then_lru() {
        let p = LabParams {
            policy: Policy::Tlru,
            catalog_size: 4,
            cache_size: 3,
            ttu_levels: 3,
        };
        let mut s = AbstractCacheState::from_order(Policy::Tlru, &[A, B, C], 3);
        // After decay: a^2 b^1 c^2 -> b is the contraction victim.
        s.slots[1].level = 2;
        assert_eq!(step(&p, &s, D).1, vec![B]);
        // After decay: a^2 b^0 c^2 -> b expired.
        s.slots[1].level = 1;
        assert_eq!(step(&p, &s, D).1, vec![B]);
        // After decay all at level 2: plain LRU.
        let s = AbstractCacheState::from_order(Policy::Tlru, &[A, B, C], 3);
        assert_eq!(step(&p, &s, D).1, vec![A]);
        // An expired copy of the requested content is refreshed, not evicted.
        let mut s = AbstractCacheState::from_order(Policy::Tlru, &[A, B, C], 3);
        s.slots[0].level = 1;
        let (next, ev) = step(&p, &s, A);
        assert!(ev.is_empty());
        assert_eq!(next.slots.last().unwrap(), &Slot { content: A, count: 0, level: 3 });
    }

    #[test]
    fn budget_and_domain_errors() {
        assert!(matches!(
            enumerate_with_budget(Policy::Lru, 4, 3, 0, 5),
            Err(Error::StateBudget { budget: 5, .. })
        ));
        assert!(enumerate_reachable(Policy::Lru, 7, 2, 0).is_err());
        assert!(enumerate_reachable(Policy::Lru, 3, 4, 0).is_err());
        assert!(enumerate_reachable(Policy::Tlru, 3, 2, 4).is_err());
        assert!(enumerate_reachable(Policy::Tlru, 3, 2, 0).is_err());
    }

    #[test]
    fn one_step_reading_is_reported() {
        // Under a one-request reading even LRU shields its most recent entry;
        // the report keeps that figure visible.
        let g = enumerate_reachable(Policy::Lru, 3, 2, 0).unwrap();
        let r = classify_protective(&g);
        assert_eq!(r.pairs, 12);
        assert_eq!(r.one_step, 6);
        assert_eq!(r.eventual, 12);
    }
}
