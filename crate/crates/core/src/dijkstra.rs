//! Priority-queue search over (elapsed, node, mode, transitions, SOC).
//!
//! [`route_paper`] keeps one visited flag per node, so a node first reached
//! in an unhelpful mode is never expanded again; it can miss the optimum.
//! [`route_exact`] replaces the flag with per-(node, mode) Pareto labels over
//! (transitions, quantised SOC, elapsed) and is exact whenever every ρ·d is a
//! multiple of the quantum.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::cost::{can_finish, energy_after_edge, transition_admissible, CostError, Query};
use crate::graph::{EHub, HubRegistry, MultiModalGraph, NodeId};
use crate::itinerary::Itinerary;
use crate::mode::Mode;

pub const DEFAULT_ENERGY_QUANTUM: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RouteError {
    #[error("no feasible path found")]
    NoFeasiblePath,
    #[error("origin and destination must be distinct graph nodes")]
    BadQuery,
    #[error("energy quantum must be positive")]
    BadQuantum,
    #[error(transparent)]
    Preferences(#[from] CostError),
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    elapsed: f64,
    transitions: u32,
    node: NodeId,
    mode: Mode,
    id: usize,
}

impl PartialEq for Entry {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Entry {
    // Min-heap on (elapsed, transitions, node, mode, insertion order).
    fn cmp(&self, o: &Self) -> Ordering {
        o.elapsed
            .total_cmp(&self.elapsed)
            .then(o.transitions.cmp(&self.transitions))
            .then(o.node.cmp(&self.node))
            .then(o.mode.cmp(&self.mode))
            .then(o.id.cmp(&self.id))
    }
}

#[derive(Debug, Clone, Copy)]
struct Step {
    parent: usize,
    from: NodeId,
    mode: Mode,
}

const ROOT: usize = usize::MAX;

fn check(g: &MultiModalGraph, query: &Query) -> Result<(), RouteError> {
    if !g.contains(query.origin) || !g.contains(query.destination) || query.origin == query.destination {
        return Err(RouteError::BadQuery);
    }
    query.prefs.validate()?;
    Ok(())
}

fn rebuild(g: &MultiModalGraph, query: &Query, steps: &[Step], nodes: &[NodeId], mut id: usize) -> Itinerary {
    let mut seq = Vec::new();
    while steps[id].parent != ROOT {
        seq.push((steps[id].from, nodes[id], steps[id].mode));
        id = steps[id].parent;
    }
    seq.reverse();
    Itinerary::from_steps(g, query, &seq).expect("search only follows usable arcs")
}

/// One successor of a state: the arc, the mode ridden on it, and the switch
/// (if any) made before leaving.
struct Move {
    head: NodeId,
    mode: Mode,
    elapsed: f64,
    transitions: u32,
    distance_m: f64,
    start_soc: f64,
}

#[inline]
fn moves(
    g: &MultiModalGraph,
    query: &Query,
    hub: Option<&EHub>,
    node: NodeId,
    mode: Mode,
    elapsed: f64,
    transitions: u32,
    soc: f64,
    mut f: impl FnMut(Move),
) {
    for arc in g.out_arcs(node) {
        if arc.head == query.origin {
            continue;
        }
        for sp in Mode::ALL {
            let Some(c) = query.arc_cost(arc, sp) else { continue };
            let (t, d, start) = if sp == mode {
                (transitions, 0.0, soc)
            } else {
                if transitions >= query.prefs.t_max || !transition_admissible(hub, mode, sp) {
                    continue;
                }
                let start = if sp == Mode::Walk {
                    0.0
                } else {
                    hub.and_then(|h| h.best_soc(sp)).unwrap_or(0.0)
                };
                (transitions + 1, query.transition_costs.get(mode, sp), start)
            };
            f(Move {
                head: arc.head,
                mode: sp,
                elapsed: elapsed + d + c,
                transitions: t,
                distance_m: arc.distance_m,
                start_soc: start,
            });
        }
    }
}

/// Node-visited search as published: returns the first state popped at the
/// destination that satisfies the docking rule.
pub fn route_paper(g: &MultiModalGraph, hubs: &HubRegistry, query: &Query) -> Result<Itinerary, RouteError> {
    route_paper_traced(g, hubs, query, None)
}

/// [`route_paper`] that also records the elapsed value of every expansion.
pub fn route_paper_traced(g: &MultiModalGraph, hubs: &HubRegistry, query: &Query, mut trace: Option<&mut Vec<f64>>) -> Result<Itinerary, RouteError> {
    check(g, query)?;
    let lookup = hubs.lookup(g.num_nodes());
    let dest_hub = lookup[query.destination].as_ref();
    let mut visited = vec![false; g.num_nodes()];
    let mut steps = vec![Step {
        parent: ROOT,
        from: query.origin,
        mode: Mode::Walk,
    }];
    let mut nodes = vec![query.origin];
    let mut socs = vec![0.0f64];
    let mut heap = BinaryHeap::new();
    heap.push(Entry {
        elapsed: 0.0,
        transitions: 0,
        node: query.origin,
        mode: Mode::Walk,
        id: 0,
    });
    while let Some(cur) = heap.pop() {
        if cur.node == query.destination {
            if can_finish(dest_hub, cur.mode) {
                return Ok(rebuild(g, query, &steps, &nodes, cur.id));
            }
            continue;
        }
        if visited[cur.node] {
            continue;
        }
        visited[cur.node] = true;
        if let Some(t) = trace.as_deref_mut() {
            t.push(cur.elapsed);
        }
        let soc = socs[cur.id];
        moves(g, query, lookup[cur.node].as_ref(), cur.node, cur.mode, cur.elapsed, cur.transitions, soc, |mv| {
            if visited[mv.head] {
                return;
            }
            let Some(left) = energy_after_edge(&query.energy, mv.start_soc, mv.mode, mv.distance_m) else {
                return;
            };
            let id = steps.len();
            steps.push(Step {
                parent: cur.id,
                from: cur.node,
                mode: mv.mode,
            });
            nodes.push(mv.head);
            socs.push(left);
            heap.push(Entry {
                elapsed: mv.elapsed,
                transitions: mv.transitions,
                node: mv.head,
                mode: mv.mode,
                id,
            });
        });
    }
    Err(RouteError::NoFeasiblePath)
}

// Relative slack so that 150 Wh / 0.1 Wh stays 1500 quanta.
fn quanta_down(x: f64) -> i64 {
    (x + 1e-9 * x.abs().max(1.0)).floor() as i64
}

fn quanta_up(x: f64) -> i64 {
    (x - 1e-9 * x.abs().max(1.0)).ceil().max(0.0) as i64
}

#[derive(Debug, Clone, Copy)]
struct Label {
    elapsed: f64,
    transitions: u32,
    soc_q: i64,
    alive: bool,
}

/// Label-setting search; `energy_quantum` is the SOC step in Wh used for
/// dominance. Pickup charge rounds down and consumption rounds up, so every
/// returned itinerary is feasible with exact arithmetic.
pub fn route_exact(g: &MultiModalGraph, hubs: &HubRegistry, query: &Query, energy_quantum: f64) -> Result<Itinerary, RouteError> {
    check(g, query)?;
    if !(energy_quantum.is_finite() && energy_quantum > 0.0) {
        return Err(RouteError::BadQuantum);
    }
    let q = energy_quantum;
    let lookup = hubs.lookup(g.num_nodes());
    let dest_hub = lookup[query.destination].as_ref();
    let mut buckets: Vec<[Vec<usize>; 4]> = (0..g.num_nodes()).map(|_| Default::default()).collect();
    let mut labels = vec![Label {
        elapsed: 0.0,
        transitions: 0,
        soc_q: 0,
        alive: true,
    }];
    let mut steps = vec![Step {
        parent: ROOT,
        from: query.origin,
        mode: Mode::Walk,
    }];
    let mut nodes = vec![query.origin];
    buckets[query.origin][Mode::Walk.index()].push(0);
    let mut heap = BinaryHeap::new();
    heap.push(Entry {
        elapsed: 0.0,
        transitions: 0,
        node: query.origin,
        mode: Mode::Walk,
        id: 0,
    });
    while let Some(cur) = heap.pop() {
        if !labels[cur.id].alive {
            continue;
        }
        if cur.node == query.destination {
            if can_finish(dest_hub, cur.mode) {
                return Ok(rebuild(g, query, &steps, &nodes, cur.id));
            }
            continue;
        }
        let cur_q = labels[cur.id].soc_q;
        let hub = lookup[cur.node].as_ref();
        moves(g, query, hub, cur.node, cur.mode, cur.elapsed, cur.transitions, 0.0, |mv| {
            let soc_q = if mv.mode == Mode::Walk {
                0
            } else {
                let start = if mv.mode == cur.mode {
                    cur_q
                } else {
                    quanta_down(mv.start_soc / q)
                };
                let cost = quanta_up(query.energy.rho(mv.mode) * mv.distance_m / q);
                if start < cost {
                    return;
                }
                start - cost
            };
            let bucket = &mut buckets[mv.head][mv.mode.index()];
            bucket.retain(|&id| labels[id].alive);
            for &id in bucket.iter() {
                let a = &labels[id];
                if a.transitions <= mv.transitions && a.soc_q >= soc_q && a.elapsed <= mv.elapsed {
                    return;
                }
            }
            for &id in bucket.iter() {
                let a = &mut labels[id];
                if mv.transitions <= a.transitions && soc_q >= a.soc_q && mv.elapsed <= a.elapsed {
                    a.alive = false;
                }
            }
            let id = labels.len();
            labels.push(Label {
                elapsed: mv.elapsed,
                transitions: mv.transitions,
                soc_q,
                alive: true,
            });
            steps.push(Step {
                parent: cur.id,
                from: cur.node,
                mode: mv.mode,
            });
            nodes.push(mv.head);
            bucket.push(id);
            heap.push(Entry {
                elapsed: mv.elapsed,
                transitions: mv.transitions,
                node: mv.head,
                mode: mv.mode,
                id,
            });
        });
    }
    Err(RouteError::NoFeasiblePath)
}
