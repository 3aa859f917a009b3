//! Exhaustive reference solver for small instances.
//!
//! Depth-first enumeration of every itinerary that visits each (node, mode)
//! pair at most once, pruned by an admissible bound. With a transition
//! budget of at most two no vehicle mode can be picked up twice, so an
//! optimal itinerary never repeats a (node, mode) pair and the result is
//! exact. With larger budgets the result is only an upper bound.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::cost::{can_finish, energy_after_edge, transition_admissible, CostError, Query};
use crate::graph::{EHub, HubRegistry, MultiModalGraph, NodeId};
use crate::itinerary::Itinerary;
use crate::mode::Mode;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleLimits {
    pub max_nodes: usize,
    pub max_path_len: usize,
    pub max_states: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_nodes: 12,
            max_path_len: 48,
            max_states: 20_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("instance too large for enumeration: {0}")]
    TooLarge(String),
    #[error("origin and destination must be distinct graph nodes")]
    BadQuery,
    #[error(transparent)]
    Preferences(#[from] CostError),
}

#[derive(Debug, Clone)]
pub struct OracleOutcome {
    /// None when no feasible itinerary exists.
    pub itinerary: Option<Itinerary>,
    pub states: u64,
}

/// Reverse shortest times to the destination using the cheapest allowed mode
/// on every arc; transitions and energy are ignored, so it never overestimates.
fn lower_bounds(g: &MultiModalGraph, query: &Query) -> Vec<f64> {
    let n = g.num_nodes();
    let mut rev: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); n];
    for a in g.arcs() {
        let best = Mode::ALL.iter().filter_map(|&m| query.arc_cost(a, m)).fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            rev[a.head].push((a.tail, best));
        }
    }
    let mut h = vec![f64::INFINITY; n];
    h[query.destination] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((Ord64(0.0), query.destination)));
    while let Some(Reverse((Ord64(d), v))) = heap.pop() {
        if d > h[v] {
            continue;
        }
        for &(u, c) in &rev[v] {
            let nd = d + c;
            if nd < h[u] {
                h[u] = nd;
                heap.push(Reverse((Ord64(nd), u)));
            }
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ord64(f64);
impl Eq for Ord64 {}
impl PartialOrd for Ord64 {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Ord64 {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

struct Search<'a> {
    g: &'a MultiModalGraph,
    query: &'a Query,
    hubs: Vec<Option<EHub>>,
    h: Vec<f64>,
    on_path: Vec<[bool; 4]>,
    path: Vec<(NodeId, NodeId, Mode)>,
    best: f64,
    best_path: Option<Vec<(NodeId, NodeId, Mode)>>,
    states: u64,
    limits: OracleLimits,
}

impl Search<'_> {
    fn dfs(&mut self, node: NodeId, mode: Mode, transitions: u32, soc: f64, cost: f64) -> Result<(), OracleError> {
        self.states += 1;
        if self.states > self.limits.max_states {
            return Err(OracleError::TooLarge(format!("more than {} search states", self.limits.max_states)));
        }
        if cost + self.h[node] > self.best {
            return Ok(());
        }
        if node == self.query.destination {
            if can_finish(self.hubs[node].as_ref(), mode) && cost < self.best {
                self.best = cost;
                self.best_path = Some(self.path.clone());
            }
            return Ok(());
        }
        if self.path.len() >= self.limits.max_path_len {
            return Err(OracleError::TooLarge(format!("paths longer than {} legs", self.limits.max_path_len)));
        }
        let hub = self.hubs[node];
        for arc in self.g.out_arcs(node) {
            let j = arc.head;
            if j == self.query.origin {
                continue;
            }
            for sp in Mode::ALL {
                if self.on_path[j][sp.index()] {
                    continue;
                }
                let Some(c) = self.query.arc_cost(arc, sp) else { continue };
                let (t, mut next, start) = if sp == mode {
                    (transitions, cost, soc)
                } else {
                    if transitions >= self.query.prefs.t_max || !transition_admissible(hub.as_ref(), mode, sp) {
                        continue;
                    }
                    let start = if sp == Mode::Walk {
                        0.0
                    } else {
                        hub.and_then(|h| h.best_soc(sp)).unwrap_or(0.0)
                    };
                    (transitions + 1, cost + self.query.transition_costs.get(mode, sp), start)
                };
                let left = if sp == Mode::Walk {
                    0.0
                } else {
                    match energy_after_edge(&self.query.energy, start, sp, arc.distance_m) {
                        Some(x) => x,
                        None => continue,
                    }
                };
                next += c;
                self.on_path[j][sp.index()] = true;
                self.path.push((node, j, sp));
                let r = self.dfs(j, sp, t, left, next);
                self.path.pop();
                self.on_path[j][sp.index()] = false;
                r?;
            }
        }
        Ok(())
    }
}

/// Minimum-cost itinerary by enumeration, or `TooLarge` past the limits.
pub fn enumerate_optimal(g: &MultiModalGraph, hubs: &HubRegistry, query: &Query, limits: &OracleLimits) -> Result<OracleOutcome, OracleError> {
    if !g.contains(query.origin) || !g.contains(query.destination) || query.origin == query.destination {
        return Err(OracleError::BadQuery);
    }
    query.prefs.validate()?;
    if g.num_nodes() > limits.max_nodes {
        return Err(OracleError::TooLarge(format!("{} nodes, limit {}", g.num_nodes(), limits.max_nodes)));
    }
    let h = lower_bounds(g, query);
    let mut s = Search {
        g,
        query,
        hubs: hubs.lookup(g.num_nodes()),
        h,
        on_path: vec![[false; 4]; g.num_nodes()],
        path: Vec::new(),
        best: f64::INFINITY,
        best_path: None,
        states: 0,
        limits: *limits,
    };
    s.on_path[query.origin][Mode::Walk.index()] = true;
    if s.h[query.origin].is_finite() {
        s.dfs(query.origin, Mode::Walk, 0, 0.0, 0.0)?;
    }
    let itinerary = s
        .best_path
        .map(|p| Itinerary::from_steps(g, query, &p).expect("enumeration only follows usable arcs"));
    Ok(OracleOutcome { itinerary, states: s.states })
}
