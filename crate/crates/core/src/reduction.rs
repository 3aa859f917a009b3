//! Contraction of the network to its hubs plus origin and destination.
//!
//! Each super-edge is the fastest underlying path between two anchors in one
//! mode, with its cumulative time and distance. Walk super-edges join every
//! ordered anchor pair; vehicle super-edges join hubs that both support the
//! vehicle. Searches never enter the origin or leave the destination, which
//! mirrors the flow model, so the contracted MILP is exact whenever no
//! energy constraint binds and an upper bound otherwise.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::path::Path;
use std::time::Instant;

use emob_lp::Limits;
use serde::Serialize;
use thiserror::Error;

use crate::cost::Query;
use crate::exec::par_map;
use crate::flow::{ArcMode, FlowArc, FlowNetwork};
use crate::graph::{EHub, HubRegistry, MultiModalGraph, NodeId};
use crate::itinerary::{Itinerary, ItineraryError};
use crate::milp::{solve_network, MilpError, MilpSolution, ModelOptions};
use crate::mode::Mode;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("origin {origin} reaches neither a hub nor the destination on foot")]
    NoWalkPathToAnyHub { origin: NodeId },
    #[error("origin and destination must differ and exist in the graph")]
    BadQuery,
    #[error("no expansion recorded for {from}->{to} in {mode}")]
    MissingExpansion { from: NodeId, to: NodeId, mode: Mode },
    #[error(transparent)]
    Itinerary(#[from] ItineraryError),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuperEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub mode: Mode,
    pub time_s: f64,
    pub distance_m: f64,
}

/// Underlying node sequence of every super-edge, endpoints included.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpansionMap {
    paths: BTreeMap<(NodeId, NodeId, Mode), Vec<NodeId>>,
}

impl ExpansionMap {
    pub fn get(&self, from: NodeId, to: NodeId, mode: Mode) -> Option<&[NodeId]> {
        self.paths.get(&(from, to, mode)).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(NodeId, NodeId, Mode), &Vec<NodeId>)> {
        self.paths.iter()
    }

    /// Removes one entry; used to model a pruned super-edge.
    pub fn remove(&mut self, from: NodeId, to: NodeId, mode: Mode) -> Option<Vec<NodeId>> {
        self.paths.remove(&(from, to, mode))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedGraph {
    /// Ascending graph node ids: the hubs, origin and destination.
    pub anchors: Vec<NodeId>,
    pub origin: NodeId,
    pub destination: NodeId,
    /// Sorted by (from, to, mode).
    pub edges: Vec<SuperEdge>,
    hubs: Vec<Option<EHub>>,
}

#[derive(Debug, Clone, Copy)]
struct MinF(f64, NodeId);
impl PartialEq for MinF {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for MinF {}
impl PartialOrd for MinF {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for MinF {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

const NONE: usize = usize::MAX;

fn path_to(parent: &[usize], mut v: NodeId) -> Vec<NodeId> {
    let mut p = vec![v];
    while parent[v] != NONE {
        v = parent[v];
        p.push(v);
    }
    p.reverse();
    p
}

/// Fastest mode-`m` paths from `src`; equal-time paths resolve to the
/// lexicographically smallest node sequence.
fn mode_tree(g: &MultiModalGraph, query: &Query, src: NodeId, m: Mode) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let n = g.num_nodes();
    let mut time = vec![f64::INFINITY; n];
    let mut dist = vec![0.0; n];
    let mut parent = vec![NONE; n];
    let mut done = vec![false; n];
    time[src] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(MinF(0.0, src));
    while let Some(MinF(t, u)) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if u == query.destination {
            continue;
        }
        for arc in g.out_arcs(u) {
            let v = arc.head;
            if v == query.origin || done[v] {
                continue;
            }
            let Some(c) = query.arc_cost(arc, m) else { continue };
            let nt = t + c;
            let better = nt < time[v] || (nt == time[v] && {
                let mut cand = path_to(&parent, u);
                cand.push(v);
                cand < path_to(&parent, v)
            });
            if better {
                time[v] = nt;
                dist[v] = dist[u] + arc.distance_m;
                parent[v] = u;
                heap.push(MinF(nt, v));
            }
        }
    }
    (time, dist, parent)
}

/// Contracts `g` for `query`. Per-source searches run through [`par_map`].
pub fn reduce(g: &MultiModalGraph, hubs: &HubRegistry, query: &Query, parallel: bool) -> Result<(ReducedGraph, ExpansionMap), ReductionError> {
    let (o, d) = (query.origin, query.destination);
    if !g.contains(o) || !g.contains(d) || o == d {
        return Err(ReductionError::BadQuery);
    }
    let mut anchors: Vec<NodeId> = hubs.nodes().into_iter().filter(|&v| g.contains(v)).collect();
    anchors.extend([o, d]);
    anchors.sort_unstable();
    anchors.dedup();
    let hub_at: Vec<Option<EHub>> = anchors.iter().map(|&v| hubs.get(v).copied()).collect();

    let mut tasks = Vec::new();
    for (i, &p) in anchors.iter().enumerate() {
        if p == d {
            continue;
        }
        for m in Mode::ALL {
            let ok = m == Mode::Walk || (query.prefs.allows(m) && hub_at[i].is_some_and(|h| h.supports(m)));
            if ok {
                tasks.push((p, m));
            }
        }
    }
    let results = par_map(&tasks, parallel, |&(p, m)| {
        let (time, dist, parent) = mode_tree(g, query, p, m);
        let mut out = Vec::new();
        for (j, &q) in anchors.iter().enumerate() {
            if q == p || q == o || !time[q].is_finite() {
                continue;
            }
            if m != Mode::Walk && !hub_at[j].is_some_and(|h| h.supports(m)) {
                continue;
            }
            let edge = SuperEdge {
                from: p,
                to: q,
                mode: m,
                time_s: time[q],
                distance_m: dist[q],
            };
            out.push((edge, path_to(&parent, q)));
        }
        out
    });

    let mut edges = Vec::new();
    let mut map = ExpansionMap::default();
    for (e, path) in results.into_iter().flatten() {
        map.paths.insert((e.from, e.to, e.mode), path);
        edges.push(e);
    }
    edges.sort_by_key(|e| (e.from, e.to, e.mode));

    let origin_is_hub = hubs.get(o).is_some();
    let leaves = edges.iter().any(|e| e.from == o && e.mode == Mode::Walk && (e.to == d || hubs.get(e.to).is_some()));
    if !hubs.is_empty() && !origin_is_hub && !leaves {
        return Err(ReductionError::NoWalkPathToAnyHub { origin: o });
    }
    Ok((
        ReducedGraph {
            anchors,
            origin: o,
            destination: d,
            edges,
            hubs: hub_at,
        },
        map,
    ))
}

impl ReducedGraph {
    pub fn num_anchors(&self) -> usize {
        self.anchors.len()
    }

    pub fn edge(&self, from: NodeId, to: NodeId, mode: Mode) -> Option<&SuperEdge> {
        self.edges
            .binary_search_by_key(&(from, to, mode), |e| (e.from, e.to, e.mode))
            .ok()
            .map(|k| &self.edges[k])
    }

    pub fn hub(&self, v: NodeId) -> Option<&EHub> {
        let k = self.anchors.binary_search(&v).ok()?;
        self.hubs[k].as_ref()
    }

    /// Flow network whose nodes are the anchors and whose arcs are the
    /// super-edges.
    pub fn to_flow_network(&self) -> FlowNetwork {
        let local = |v: NodeId| self.anchors.binary_search(&v).expect("super-edges join anchors");
        let mut arcs: Vec<FlowArc> = Vec::new();
        for e in &self.edges {
            let (t, h) = (local(e.from), local(e.to));
            if arcs.last().is_none_or(|a| (a.tail, a.head) != (t, h)) {
                arcs.push(FlowArc {
                    tail: t,
                    head: h,
                    modes: [None; 4],
                });
            }
            arcs.last_mut().expect("just pushed").modes[e.mode.index()] = Some(ArcMode {
                cost_s: e.time_s,
                distance_m: e.distance_m,
            });
        }
        FlowNetwork {
            labels: self.anchors.clone(),
            arcs,
            hubs: self.hubs.clone(),
            origin: local(self.origin),
            destination: local(self.destination),
        }
    }

    /// JSON audit dump: anchor nodes and hubs in the scenario layout, the
    /// super-edges, and an `expansion` table.
    pub fn to_json(&self, g: &MultiModalGraph, map: &ExpansionMap) -> String {
        #[derive(Serialize)]
        struct NodeOut {
            id: NodeId,
            #[serde(skip_serializing_if = "Option::is_none")]
            x: Option<f64>,
            #[serde(skip_serializing_if = "Option::is_none")]
            y: Option<f64>,
        }
        #[derive(Serialize)]
        struct HubOut {
            node: NodeId,
            modes: Vec<Mode>,
            soc_wh: BTreeMap<String, f64>,
        }
        #[derive(Serialize)]
        struct ExpOut<'a> {
            from: NodeId,
            to: NodeId,
            mode: Mode,
            nodes: &'a [NodeId],
        }
        #[derive(Serialize)]
        struct Meta {
            origin: NodeId,
            destination: NodeId,
            anchors: usize,
            super_edges: usize,
        }
        #[derive(Serialize)]
        struct Out<'a> {
            nodes: Vec<NodeOut>,
            hubs: Vec<HubOut>,
            super_edges: &'a [SuperEdge],
            expansion: Vec<ExpOut<'a>>,
            meta: Meta,
        }
        let out = Out {
            nodes: self
                .anchors
                .iter()
                .map(|&v| {
                    let r = g.node(v);
                    NodeOut { id: v, x: r.x, y: r.y }
                })
                .collect(),
            hubs: self
                .hubs
                .iter()
                .flatten()
                .map(|h| HubOut {
                    node: h.node,
                    modes: h.modes().iter().collect(),
                    soc_wh: h.modes().iter().filter_map(|m| h.best_soc(m).map(|s| (m.name().to_string(), s))).collect(),
                })
                .collect(),
            super_edges: &self.edges,
            expansion: map
                .iter()
                .map(|(&(from, to, mode), nodes)| ExpOut { from, to, mode, nodes })
                .collect(),
            meta: Meta {
                origin: self.origin,
                destination: self.destination,
                anchors: self.anchors.len(),
                super_edges: self.edges.len(),
            },
        };
        let mut s = serde_json::to_string_pretty(&out).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn save_json(&self, g: &MultiModalGraph, map: &ExpansionMap, path: impl AsRef<Path>) -> Result<(), ReductionError> {
        std::fs::write(path, self.to_json(g, map))?;
        Ok(())
    }
}

/// Replaces every super-edge leg by its underlying arcs.
pub fn expand_itinerary(reduced: &Itinerary, map: &ExpansionMap, g: &MultiModalGraph, query: &Query) -> Result<Itinerary, ReductionError> {
    let mut steps = Vec::new();
    for leg in reduced.legs() {
        let path = map.get(leg.from, leg.to, leg.mode).ok_or(ReductionError::MissingExpansion {
            from: leg.from,
            to: leg.to,
            mode: leg.mode,
        })?;
        steps.extend(path.windows(2).map(|w| (w[0], w[1], leg.mode)));
    }
    Ok(Itinerary::from_steps(g, query, &steps)?)
}

#[derive(Debug, Clone)]
pub struct ReducedSolution {
    /// Solution with the itinerary expanded to full resolution; `objective`
    /// is the expanded itinerary's cost.
    pub milp: MilpSolution,
    pub reduced_itinerary: Option<Itinerary>,
    pub reduce_ms: f64,
    pub num_anchors: usize,
    pub num_super_edges: usize,
}

/// Contract, solve the contracted MILP, expand.
pub fn solve_milp_reduced(
    g: &MultiModalGraph,
    hubs: &HubRegistry,
    query: &Query,
    opts: &ModelOptions,
    limits: &Limits,
    parallel: bool,
) -> Result<ReducedSolution, ReductionError> {
    let t0 = Instant::now();
    let (rg, map) = reduce(g, hubs, query, parallel)?;
    let net = rg.to_flow_network();
    let reduce_ms = t0.elapsed().as_secs_f64() * 1e3;
    let mut milp = solve_network(&net, query, opts, limits)?;
    let reduced_itinerary = milp.itinerary.take();
    if let Some(r) = &reduced_itinerary {
        let full = expand_itinerary(r, &map, g, query)?;
        milp.objective = Some(full.total_seconds());
        milp.itinerary = Some(full);
    }
    Ok(ReducedSolution {
        milp,
        reduced_itinerary,
        reduce_ms,
        num_anchors: rg.num_anchors(),
        num_super_edges: rg.edges.len(),
    })
}
