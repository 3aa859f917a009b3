use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::mode::{Mode, ModeSet};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeRecord {
    pub id: NodeId,
    pub x: Option<f64>,
    pub y: Option<f64>,
}

impl NodeRecord {
    pub fn new(id: NodeId) -> Self {
        Self { id, x: None, y: None }
    }

    pub fn at(id: NodeId, x: f64, y: f64) -> Self {
        Self {
            id,
            x: Some(x),
            y: Some(y),
        }
    }
}

/// Arc input record. A `None` speed forbids the mode on this arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRecord {
    pub from: NodeId,
    pub to: NodeId,
    pub distance_m: f64,
    pub speeds: [Option<f64>; 4],
}

impl EdgeRecord {
    /// Arc usable by every mode at the same speed.
    pub fn uniform(from: NodeId, to: NodeId, distance_m: f64, speed: f64) -> Self {
        Self {
            from,
            to,
            distance_m,
            speeds: [Some(speed); 4],
        }
    }

    pub fn with_speeds(from: NodeId, to: NodeId, distance_m: f64, speeds: [Option<f64>; 4]) -> Self {
        Self {
            from,
            to,
            distance_m,
            speeds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub tail: NodeId,
    pub head: NodeId,
    pub distance_m: f64,
    pub speeds: [Option<f64>; 4],
}

impl Arc {
    #[inline]
    pub fn speed(&self, m: Mode) -> Option<f64> {
        self.speeds[m.index()]
    }

    #[inline]
    pub fn permits(&self, m: Mode) -> bool {
        self.speeds[m.index()].is_some()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("node ids must be dense: id {id} is out of range for {n} nodes")]
    SparseNodeId { id: NodeId, n: usize },
    #[error("arc {from}->{to} references missing node {missing}")]
    DanglingArc {
        from: NodeId,
        to: NodeId,
        missing: NodeId,
    },
    #[error("arc {from}->{to} has non-positive or non-finite {field}")]
    NonPositiveWeight {
        from: NodeId,
        to: NodeId,
        field: &'static str,
    },
    #[error("parallel arc {from}->{to}")]
    ParallelArc { from: NodeId, to: NodeId },
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

/// Frozen directed graph in compressed sparse row form. Out-arcs of every
/// node are sorted by head id, which fixes neighbor order for all solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiModalGraph {
    nodes: Vec<NodeRecord>,
    offsets: Vec<usize>,
    arcs: Vec<Arc>,
    in_degree: Vec<usize>,
}

pub fn build_graph(nodes: &[NodeRecord], edges: &[EdgeRecord]) -> Result<MultiModalGraph, GraphError> {
    let n = nodes.len();
    let mut slots: Vec<Option<NodeRecord>> = vec![None; n];
    for rec in nodes {
        if rec.id >= n {
            return Err(GraphError::SparseNodeId { id: rec.id, n });
        }
        if slots[rec.id].is_some() {
            return Err(GraphError::DuplicateNode(rec.id));
        }
        slots[rec.id] = Some(*rec);
    }
    let nodes: Vec<NodeRecord> = slots.into_iter().map(|s| s.expect("dense ids")).collect();

    let mut arcs: Vec<Arc> = Vec::with_capacity(edges.len());
    for e in edges {
        for end in [e.from, e.to] {
            if end >= n {
                return Err(GraphError::DanglingArc {
                    from: e.from,
                    to: e.to,
                    missing: end,
                });
            }
        }
        if e.from == e.to {
            return Err(GraphError::SelfLoop(e.from));
        }
        if !(e.distance_m.is_finite() && e.distance_m > 0.0) {
            return Err(GraphError::NonPositiveWeight {
                from: e.from,
                to: e.to,
                field: "distance_m",
            });
        }
        for m in Mode::ALL {
            if let Some(v) = e.speeds[m.index()] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(GraphError::NonPositiveWeight {
                        from: e.from,
                        to: e.to,
                        field: speed_field(m),
                    });
                }
            }
        }
        arcs.push(Arc {
            tail: e.from,
            head: e.to,
            distance_m: e.distance_m,
            speeds: e.speeds,
        });
    }
    arcs.sort_by_key(|a| (a.tail, a.head));
    for w in arcs.windows(2) {
        if w[0].tail == w[1].tail && w[0].head == w[1].head {
            return Err(GraphError::ParallelArc {
                from: w[0].tail,
                to: w[0].head,
            });
        }
    }
    let mut offsets = vec![0usize; n + 1];
    let mut in_degree = vec![0usize; n];
    for a in &arcs {
        offsets[a.tail + 1] += 1;
        in_degree[a.head] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    Ok(MultiModalGraph {
        nodes,
        offsets,
        arcs,
        in_degree,
    })
}

fn speed_field(m: Mode) -> &'static str {
    match m {
        Mode::Walk => "speed_mps.walk",
        Mode::EScooter => "speed_mps.escooter",
        Mode::EBike => "speed_mps.ebike",
        Mode::ECar => "speed_mps.ecar",
    }
}

impl MultiModalGraph {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v < self.nodes.len()
    }

    pub fn node(&self, v: NodeId) -> &NodeRecord {
        &self.nodes[v]
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    /// Out-arcs of `v`, ascending by head. Panics if `v` is out of range.
    #[inline]
    pub fn out_arcs(&self, v: NodeId) -> &[Arc] {
        &self.arcs[self.offsets[v]..self.offsets[v + 1]]
    }

    /// N(v) in ascending id order.
    pub fn neighbors(&self, v: NodeId) -> Result<Vec<NodeId>, GraphError> {
        if !self.contains(v) {
            return Err(GraphError::UnknownNode(v));
        }
        Ok(self.out_arcs(v).iter().map(|a| a.head).collect())
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_degree[v]
    }

    pub fn arc(&self, i: NodeId, j: NodeId) -> Option<&Arc> {
        if !self.contains(i) {
            return None;
        }
        let out = self.out_arcs(i);
        out.binary_search_by_key(&j, |a| a.head).ok().map(|k| &out[k])
    }

    /// A_ij.
    pub fn has_arc(&self, i: NodeId, j: NodeId) -> bool {
        self.arc(i, j).is_some()
    }

    /// All arcs ordered by (tail, head).
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn edge_records(&self) -> Vec<EdgeRecord> {
        self.arcs
            .iter()
            .map(|a| EdgeRecord::with_speeds(a.tail, a.head, a.distance_m, a.speeds))
            .collect()
    }

    /// Nodes reachable from `source` using arcs that permit `mode`, never
    /// entering any node in `blocked` (the source itself is always allowed).
    pub fn reachable(&self, source: NodeId, mode: Mode, blocked: &[NodeId]) -> Vec<bool> {
        let mut seen = vec![false; self.num_nodes()];
        let mut queue = VecDeque::new();
        seen[source] = true;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for a in self.out_arcs(u) {
                if a.permits(mode) && !seen[a.head] && !blocked.contains(&a.head) {
                    seen[a.head] = true;
                    queue.push_back(a.head);
                }
            }
        }
        seen
    }

    /// True iff `to` can be reached from `from` on foot.
    pub fn walk_reachable(&self, from: NodeId, to: NodeId) -> bool {
        self.contains(from) && self.contains(to) && self.reachable(from, Mode::Walk, &[])[to]
    }

    /// Same graph with every arc permitted only for `modes`.
    pub fn restricted_to(&self, modes: ModeSet) -> MultiModalGraph {
        let mut g = self.clone();
        for a in &mut g.arcs {
            for m in Mode::ALL {
                if !modes.contains(m) {
                    a.speeds[m.index()] = None;
                }
            }
        }
        g
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HubError {
    #[error("hub at node {0} lists walk, which needs no hub")]
    WalkAtHub(NodeId),
    #[error("hub at node {node} has invalid SOC {soc} for {mode}")]
    BadSoc { node: NodeId, mode: Mode, soc: f64 },
    #[error("duplicate hub at node {0}")]
    DuplicateHub(NodeId),
}

/// A node offering vehicle modes, each with the best available state of
/// charge in Wh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EHub {
    pub node: NodeId,
    modes: ModeSet,
    soc_wh: [f64; 4],
}

impl EHub {
    pub fn new(node: NodeId, vehicles: &[(Mode, f64)]) -> Result<EHub, HubError> {
        let mut hub = EHub {
            node,
            modes: ModeSet::EMPTY,
            soc_wh: [0.0; 4],
        };
        for &(m, soc) in vehicles {
            if m == Mode::Walk {
                return Err(HubError::WalkAtHub(node));
            }
            if !(soc.is_finite() && soc >= 0.0) {
                return Err(HubError::BadSoc { node, mode: m, soc });
            }
            hub.modes.insert(m);
            hub.soc_wh[m.index()] = soc;
        }
        Ok(hub)
    }

    pub fn modes(&self) -> ModeSet {
        self.modes
    }

    /// True iff `m` is a vehicle mode offered here.
    #[inline]
    pub fn supports(&self, m: Mode) -> bool {
        self.modes.contains(m)
    }

    pub fn best_soc(&self, m: Mode) -> Option<f64> {
        self.supports(m).then(|| self.soc_wh[m.index()])
    }

    /// Copy with every SOC multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> EHub {
        let mut h = *self;
        for v in &mut h.soc_wh {
            *v *= factor;
        }
        h
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HubRegistry {
    hubs: BTreeMap<NodeId, EHub>,
}

impl HubRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_hubs(hubs: impl IntoIterator<Item = EHub>) -> Result<Self, HubError> {
        let mut r = Self::new();
        for h in hubs {
            r.insert(h)?;
        }
        Ok(r)
    }

    pub fn insert(&mut self, hub: EHub) -> Result<(), HubError> {
        if self.hubs.contains_key(&hub.node) {
            return Err(HubError::DuplicateHub(hub.node));
        }
        self.hubs.insert(hub.node, hub);
        Ok(())
    }

    /// k.
    pub fn len(&self) -> usize {
        self.hubs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hubs.is_empty()
    }

    pub fn get(&self, v: NodeId) -> Option<&EHub> {
        self.hubs.get(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &EHub> {
        self.hubs.values()
    }

    pub fn nodes(&self) -> Vec<NodeId> {
        self.hubs.keys().copied().collect()
    }

    /// Array-indexed view for hot loops; hubs outside `0..n` are dropped.
    pub fn lookup(&self, n: usize) -> Vec<Option<EHub>> {
        let mut t = vec![None; n];
        for h in self.hubs.values() {
            if h.node < n {
                t[h.node] = Some(*h);
            }
        }
        t
    }

    pub fn scaled(&self, factor: f64) -> HubRegistry {
        HubRegistry {
            hubs: self.hubs.iter().map(|(&k, h)| (k, h.scaled(factor))).collect(),
        }
    }

    /// Largest SOC offered for `m` at any hub, or 0.
    pub fn max_soc(&self, m: Mode) -> f64 {
        self.hubs
            .values()
            .filter_map(|h| h.best_soc(m))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    HubOnMissingNode(NodeId),
    UnreachableHub(NodeId),
    ZeroSoc { node: NodeId, mode: Mode },
    HubWithoutVehicles(NodeId),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::HubOnMissingNode(v) => write!(f, "hub on node {v}, which is not in the graph"),
            Diagnostic::UnreachableHub(v) => write!(f, "unreachable hub at node {v}: no other node can walk to it"),
            Diagnostic::ZeroSoc { node, mode } => write!(f, "hub at node {node} lists {mode} with zero SOC"),
            Diagnostic::HubWithoutVehicles(v) => write!(f, "hub at node {v} offers no vehicle mode"),
        }
    }
}

/// Well-formedness report; empty iff the scenario is clean.
pub fn validate_scenario(g: &MultiModalGraph, hubs: &HubRegistry) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let n = g.num_nodes();
    // Reverse walk adjacency for the reachability scan.
    let mut rev: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for a in g.arcs() {
        if a.permits(Mode::Walk) {
            rev[a.head].push(a.tail);
        }
    }
    for hub in hubs.iter() {
        if !g.contains(hub.node) {
            out.push(Diagnostic::HubOnMissingNode(hub.node));
            continue;
        }
        if hub.modes().is_empty() {
            out.push(Diagnostic::HubWithoutVehicles(hub.node));
        }
        if n > 1 {
            let mut seen = vec![false; n];
            let mut queue = VecDeque::from([hub.node]);
            seen[hub.node] = true;
            let mut reached_other = false;
            while let Some(u) = queue.pop_front() {
                for &p in &rev[u] {
                    if !seen[p] {
                        seen[p] = true;
                        reached_other = true;
                        queue.push_back(p);
                    }
                }
                if reached_other {
                    break;
                }
            }
            if !reached_other {
                out.push(Diagnostic::UnreachableHub(hub.node));
            }
        }
        for m in hub.modes().iter() {
            if hub.best_soc(m) == Some(0.0) {
                out.push(Diagnostic::ZeroSoc { node: hub.node, mode: m });
            }
        }
    }
    out
}
