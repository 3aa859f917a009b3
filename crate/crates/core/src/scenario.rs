use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{build_graph, EHub, EdgeRecord, GraphError, HubError, HubRegistry, MultiModalGraph, NodeId, NodeRecord};
use crate::mode::Mode;
use crate::rng::ScenarioRng;

pub const SCHEMA_VERSION: u32 = 1;

const STREAM_GEOMETRY: u64 = 1;
const STREAM_SPEEDS: u64 = 2;
const STREAM_HUBS: u64 = 3;
const STREAM_SOC: u64 = 4;
const GEOMETRIC_RETRIES: usize = 20;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("infeasible scenario spec: {0}")]
    InfeasibleSpec(String),
    #[error("requested {requested} O/D pairs but no walk-reachable pair satisfies the filter")]
    NotEnoughReachablePairs { requested: usize, available: usize },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema version {found} is not supported (expected {expected})")]
    SchemaVersionMismatch { found: u32, expected: u32 },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Hub(#[from] HubError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for ScenarioError {
    fn from(e: serde_json::Error) -> Self {
        ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Topology {
    /// Row-major lattice `cols` wide (default: ceil(sqrt(n))); the last row
    /// may be partial.
    Grid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cols: Option<usize>,
    },
    /// Uniform points in a square of side spacing·sqrt(n), joined by the
    /// shortest pairs until the target average degree is met.
    RandomGeometric { avg_degree: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HubPlacement {
    #[default]
    UniformRandom,
    DegreeWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedRanges {
    pub walk: [f64; 2],
    pub escooter: [f64; 2],
    pub ebike: [f64; 2],
    pub ecar: [f64; 2],
}

impl Default for SpeedRanges {
    fn default() -> Self {
        Self {
            walk: [1.2, 1.6],
            escooter: [4.0, 6.0],
            ebike: [5.0, 8.0],
            ecar: [6.0, 14.0],
        }
    }
}

impl SpeedRanges {
    pub fn get(&self, m: Mode) -> [f64; 2] {
        match m {
            Mode::Walk => self.walk,
            Mode::EScooter => self.escooter,
            Mode::EBike => self.ebike,
            Mode::ECar => self.ecar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SocRanges {
    pub escooter: [f64; 2],
    pub ebike: [f64; 2],
    pub ecar: [f64; 2],
}

impl Default for SocRanges {
    fn default() -> Self {
        Self {
            escooter: [50.0, 300.0],
            ebike: [100.0, 500.0],
            ecar: [1000.0, 5000.0],
        }
    }
}

impl SocRanges {
    pub fn get(&self, m: Mode) -> [f64; 2] {
        match m {
            Mode::Walk => [0.0, 0.0],
            Mode::EScooter => self.escooter,
            Mode::EBike => self.ebike,
            Mode::ECar => self.ecar,
        }
    }
}

fn default_name() -> String {
    "synthetic".into()
}

fn default_spacing() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub n_nodes: usize,
    pub topology: Topology,
    #[serde(default = "default_spacing")]
    pub spacing_m: f64,
    pub k_hubs: usize,
    #[serde(default)]
    pub hub_placement: HubPlacement,
    #[serde(default)]
    pub speed_ranges: SpeedRanges,
    #[serde(default)]
    pub soc_ranges: SocRanges,
    /// Round every distance to a multiple of this many metres (at least one
    /// unit), which keeps consumption on a fixed grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round_distance_m: Option<f64>,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn grid(n_nodes: usize, k_hubs: usize, seed: u64) -> Self {
        Self {
            name: default_name(),
            n_nodes,
            topology: Topology::Grid { cols: None },
            spacing_m: default_spacing(),
            k_hubs,
            hub_placement: HubPlacement::UniformRandom,
            speed_ranges: SpeedRanges::default(),
            soc_ranges: SocRanges::default(),
            round_distance_m: None,
            seed,
        }
    }

    pub fn random_geometric(n_nodes: usize, avg_degree: f64, k_hubs: usize, seed: u64) -> Self {
        Self {
            topology: Topology::RandomGeometric { avg_degree },
            ..Self::grid(n_nodes, k_hubs, seed)
        }
    }

    pub fn with_hubs(&self, k: usize) -> Self {
        Self {
            k_hubs: k,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::InfeasibleSpec(m));
        if self.n_nodes == 0 {
            return bad("n_nodes must be positive".into());
        }
        if self.k_hubs > self.n_nodes {
            return bad(format!("k_hubs {} exceeds n_nodes {}", self.k_hubs, self.n_nodes));
        }
        if !(self.spacing_m.is_finite() && self.spacing_m > 0.0) {
            return bad("spacing_m must be positive".into());
        }
        if let Some(r) = self.round_distance_m {
            if !(r.is_finite() && r > 0.0) {
                return bad("round_distance_m must be positive".into());
            }
        }
        for m in Mode::ALL {
            let [lo, hi] = self.speed_ranges.get(m);
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return bad(format!("speed range for {m} must satisfy 0 < min <= max"));
            }
        }
        for m in Mode::VEHICLES {
            let [lo, hi] = self.soc_ranges.get(m);
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
                return bad(format!("SOC range for {m} must satisfy 0 <= min <= max"));
            }
        }
        match self.topology {
            Topology::Grid { cols: Some(0) } => return bad("grid needs at least one column".into()),
            Topology::Grid { .. } => {}
            Topology::RandomGeometric { avg_degree } => {
                let n = self.n_nodes as f64;
                let min = 2.0 * (n - 1.0) / n;
                if !(avg_degree.is_finite() && avg_degree >= min - 1e-12) {
                    return bad(format!("average degree {avg_degree} cannot connect {} nodes (needs >= {min:.3})", self.n_nodes));
                }
                if avg_degree > n - 1.0 + 1e-12 {
                    return bad(format!("average degree {avg_degree} exceeds n - 1"));
                }
            }
        }
        Ok(())
    }
}

/// A generated or loaded scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub graph: MultiModalGraph,
    pub hubs: HubRegistry,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

fn dist(p: (f64, f64), q: (f64, f64)) -> f64 {
    ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()
}

/// Undirected skeleton (i < j) plus coordinates.
fn skeleton(spec: &ScenarioSpec) -> Result<(Vec<(f64, f64)>, Vec<(usize, usize)>), ScenarioError> {
    let n = spec.n_nodes;
    match spec.topology {
        Topology::Grid { cols } => {
            let cols = cols.unwrap_or_else(|| (n as f64).sqrt().ceil() as usize).max(1);
            let pts = (0..n)
                .map(|i| ((i % cols) as f64 * spec.spacing_m, (i / cols) as f64 * spec.spacing_m))
                .collect();
            let mut edges = Vec::new();
            for i in 0..n {
                if (i % cols) + 1 < cols && i + 1 < n {
                    edges.push((i, i + 1));
                }
                if i + cols < n {
                    edges.push((i, i + cols));
                }
            }
            Ok((pts, edges))
        }
        Topology::RandomGeometric { avg_degree } => {
            let side = spec.spacing_m * (n as f64).sqrt();
            let target = ((n as f64 * avg_degree / 2.0).round() as usize).max(n.saturating_sub(1));
            let mut rng = ScenarioRng::stream(spec.seed, STREAM_GEOMETRY);
            let mut last = None;
            for _ in 0..GEOMETRIC_RETRIES {
                let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.uniform(0.0, side), rng.uniform(0.0, side))).collect();
                let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
                for i in 0..n {
                    for j in i + 1..n {
                        pairs.push((dist(pts[i], pts[j]), i, j));
                    }
                }
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
                let edges: Vec<(usize, usize)> = pairs.iter().take(target).map(|p| (p.1, p.2)).collect();
                let mut uf = UnionFind::new(n);
                let mut comps = n;
                for &(i, j) in &edges {
                    if uf.union(i, j) {
                        comps -= 1;
                    }
                }
                if comps == 1 {
                    return Ok((pts, edges));
                }
                last = Some((pts, edges, pairs));
            }
            // Bridge the remaining components through their closest pairs.
            let (pts, mut edges, pairs) = last.expect("at least one attempt");
            let mut uf = UnionFind::new(n);
            for &(i, j) in &edges {
                uf.union(i, j);
            }
            for &(_, i, j) in &pairs {
                if uf.union(i, j) {
                    edges.push((i, j));
                }
            }
            edges.sort_unstable();
            Ok((pts, edges))
        }
    }
}

/// Builds the graph and hubs for `spec`. Geometry, speeds, hub order and
/// SOC values come from separate streams, so changing `k_hubs` keeps the
/// graph fixed and the hub sets nested.
pub fn generate(spec: &ScenarioSpec) -> Result<Scenario, ScenarioError> {
    spec.validate()?;
    let n = spec.n_nodes;
    let (pts, skel) = skeleton(spec)?;

    let mut speed_rng = ScenarioRng::stream(spec.seed, STREAM_SPEEDS);
    let mut edges = Vec::with_capacity(2 * skel.len());
    for &(i, j) in &skel {
        let mut d = dist(pts[i], pts[j]);
        if let Some(r) = spec.round_distance_m {
            d = ((d / r).round() * r).max(r);
        }
        for (a, b) in [(i, j), (j, i)] {
            let mut speeds = [None; 4];
            for m in Mode::ALL {
                let [lo, hi] = spec.speed_ranges.get(m);
                speeds[m.index()] = Some(speed_rng.uniform(lo, hi));
            }
            edges.push(EdgeRecord::with_speeds(a, b, d, speeds));
        }
    }
    let nodes: Vec<NodeRecord> = pts.iter().enumerate().map(|(i, p)| NodeRecord::at(i, p.0, p.1)).collect();
    let graph = build_graph(&nodes, &edges)?;

    let order = hub_order(spec, &graph);
    let mut soc_rng = ScenarioRng::stream(spec.seed, STREAM_SOC);
    let soc: Vec<[f64; 3]> = (0..n)
        .map(|_| {
            let mut row = [0.0; 3];
            for (k, m) in Mode::VEHICLES.into_iter().enumerate() {
                let [lo, hi] = spec.soc_ranges.get(m);
                row[k] = soc_rng.uniform(lo, hi);
            }
            row
        })
        .collect();
    let mut hubs = HubRegistry::new();
    for &v in order.iter().take(spec.k_hubs) {
        let vehicles: Vec<(Mode, f64)> = Mode::VEHICLES.into_iter().zip(soc[v]).collect();
        hubs.insert(EHub::new(v, &vehicles)?)?;
    }
    Ok(Scenario {
        name: spec.name.clone(),
        seed: spec.seed,
        graph,
        hubs,
    })
}

fn hub_order(spec: &ScenarioSpec, g: &MultiModalGraph) -> Vec<NodeId> {
    let n = g.num_nodes();
    let mut rng = ScenarioRng::stream(spec.seed, STREAM_HUBS);
    match spec.hub_placement {
        HubPlacement::UniformRandom => {
            let mut v: Vec<NodeId> = (0..n).collect();
            rng.shuffle(&mut v);
            v
        }
        HubPlacement::DegreeWeighted => {
            // Weighted sampling without replacement: sort by u^(1/w) descending.
            let mut keyed: Vec<(f64, NodeId)> = (0..n)
                .map(|v| {
                    let w = g.out_degree(v).max(1) as f64;
                    let u = rng.next_f64().max(f64::MIN_POSITIVE);
                    (u.ln() / w, v)
                })
                .collect();
            keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            keyed.into_iter().map(|(_, v)| v).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct MinF(f64, NodeId);
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

/// Shortest walking distances in metres from `source` (infinite when
/// unreachable).
pub fn walk_distances(g: &MultiModalGraph, source: NodeId) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; g.num_nodes()];
    let mut heap = BinaryHeap::new();
    d[source] = 0.0;
    heap.push(MinF(0.0, source));
    while let Some(MinF(du, u)) = heap.pop() {
        if du > d[u] {
            continue;
        }
        for a in g.out_arcs(u) {
            if a.permits(Mode::Walk) {
                let nd = du + a.distance_m;
                if nd < d[a.head] {
                    d[a.head] = nd;
                    heap.push(MinF(nd, a.head));
                }
            }
        }
    }
    d
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ODSet {
    pub pairs: Vec<(NodeId, NodeId)>,
    pub seed: u64,
}

/// Samples `n` walk-reachable pairs at least `min_walk_dist_m` apart on foot:
/// a seeded shuffle of all qualifying pairs, then uniform draws with
/// replacement once they run out.
pub fn sample_od_pairs(g: &MultiModalGraph, n: usize, min_walk_dist_m: f64, seed: u64) -> Result<ODSet, ScenarioError> {
    let mut candidates = Vec::new();
    for o in 0..g.num_nodes() {
        let d = walk_distances(g, o);
        for (t, &dt) in d.iter().enumerate() {
            if t != o && dt.is_finite() && dt >= min_walk_dist_m {
                candidates.push((o, t));
            }
        }
    }
    if candidates.is_empty() && n > 0 {
        return Err(ScenarioError::NotEnoughReachablePairs { requested: n, available: 0 });
    }
    let mut rng = ScenarioRng::new(seed);
    rng.shuffle(&mut candidates);
    let mut pairs: Vec<(NodeId, NodeId)> = candidates.iter().take(n).copied().collect();
    while pairs.len() < n {
        pairs.push(candidates[rng.index(candidates.len())]);
    }
    Ok(ODSet { pairs, seed })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeJson {
    id: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpeedJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ecar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ebike: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    escooter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    walk: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeJson {
    from: NodeId,
    to: NodeId,
    distance_m: f64,
    speed_mps: SpeedJson,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HubJson {
    node: NodeId,
    modes: Vec<Mode>,
    soc_wh: BTreeMap<String, f64>,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaJson {
    seed: u64,
    name: String,
    #[serde(default = "default_schema")]
    schema_version: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioJson {
    nodes: Vec<NodeJson>,
    edges: Vec<EdgeJson>,
    hubs: Vec<HubJson>,
    meta: MetaJson,
}

impl Scenario {
    pub fn new(name: impl Into<String>, seed: u64, graph: MultiModalGraph, hubs: HubRegistry) -> Self {
        Self {
            name: name.into(),
            seed,
            graph,
            hubs,
        }
    }

    /// Same scenario with every hub SOC scaled.
    pub fn with_soc_multiplier(&self, factor: f64) -> Scenario {
        Scenario {
            hubs: self.hubs.scaled(factor),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        let g = &self.graph;
        let doc = ScenarioJson {
            nodes: g.nodes().iter().map(|r| NodeJson { id: r.id, x: r.x, y: r.y }).collect(),
            edges: g
                .arcs()
                .iter()
                .map(|a| EdgeJson {
                    from: a.tail,
                    to: a.head,
                    distance_m: a.distance_m,
                    speed_mps: SpeedJson {
                        ecar: a.speed(Mode::ECar),
                        ebike: a.speed(Mode::EBike),
                        escooter: a.speed(Mode::EScooter),
                        walk: a.speed(Mode::Walk),
                    },
                })
                .collect(),
            hubs: self
                .hubs
                .iter()
                .map(|h| HubJson {
                    node: h.node,
                    modes: h.modes().iter().collect(),
                    soc_wh: h.modes().iter().map(|m| (m.name().to_string(), h.best_soc(m).unwrap_or(0.0))).collect(),
                })
                .collect(),
            meta: MetaJson {
                seed: self.seed,
                name: self.name.clone(),
                schema_version: SCHEMA_VERSION,
            },
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("scenario serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        let doc: ScenarioJson = serde_json::from_str(text)?;
        if doc.meta.schema_version != SCHEMA_VERSION {
            return Err(ScenarioError::SchemaVersionMismatch {
                found: doc.meta.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let nodes: Vec<NodeRecord> = doc.nodes.iter().map(|n| NodeRecord { id: n.id, x: n.x, y: n.y }).collect();
        let edges: Vec<EdgeRecord> = doc
            .edges
            .iter()
            .map(|e| {
                let mut speeds = [None; 4];
                speeds[Mode::Walk.index()] = e.speed_mps.walk;
                speeds[Mode::EScooter.index()] = e.speed_mps.escooter;
                speeds[Mode::EBike.index()] = e.speed_mps.ebike;
                speeds[Mode::ECar.index()] = e.speed_mps.ecar;
                EdgeRecord::with_speeds(e.from, e.to, e.distance_m, speeds)
            })
            .collect();
        let graph = build_graph(&nodes, &edges)?;
        let mut hubs = HubRegistry::new();
        for (i, h) in doc.hubs.iter().enumerate() {
            let mut vehicles = Vec::new();
            for m in &h.modes {
                let soc = h
                    .soc_wh
                    .get(m.name())
                    .ok_or_else(|| ScenarioError::Invalid(format!("hubs[{i}] lists {m} without soc_wh.{m}")))?;
                vehicles.push((*m, *soc));
            }
            for key in h.soc_wh.keys() {
                if !h.modes.iter().any(|m| m.name() == key) {
                    return Err(ScenarioError::Invalid(format!("hubs[{i}].soc_wh.{key} has no matching mode")));
                }
            }
            hubs.insert(EHub::new(h.node, &vehicles)?)?;
        }
        Ok(Scenario {
            name: doc.meta.name,
            seed: doc.meta.seed,
            graph,
            hubs,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
        Scenario::from_json(&std::fs::read_to_string(path)?)
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    Scenario::load(path)
}

pub fn save_scenario(s: &Scenario, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
    s.save(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_deterministic_and_byte_identical() {
        let spec = ScenarioSpec::grid(25, 2, 7);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.graph.num_nodes(), 25);
        assert_eq!(a.graph.num_arcs(), 2 * 40);
        assert_eq!(a.hubs.len(), 2);
    }

    #[test]
    fn every_node_can_be_a_hub() {
        let s = generate(&ScenarioSpec::grid(9, 9, 1)).unwrap();
        assert_eq!(s.hubs.len(), 9);
        assert!(ScenarioSpec::grid(9, 10, 1).validate().is_err());
    }

    #[test]
    fn hub_sets_are_nested_across_k() {
        let spec = ScenarioSpec::grid(100, 10, 5);
        let small = generate(&spec).unwrap();
        let large = generate(&spec.with_hubs(30)).unwrap();
        assert_eq!(small.graph, large.graph);
        for h in small.hubs.iter() {
            assert_eq!(large.hubs.get(h.node), Some(h));
        }
    }

    #[test]
    fn random_geometric_hits_target_degree() {
        let s = generate(&ScenarioSpec::random_geometric(200, 4.0, 5, 11)).unwrap();
        let avg = s.graph.num_arcs() as f64 / 200.0;
        assert!((avg - 4.0).abs() <= 0.4, "avg degree {avg}");
        let reach = s.graph.reachable(0, Mode::Walk, &[]);
        assert!(reach.iter().all(|&r| r));
    }

    #[test]
    fn sparse_geometric_is_infeasible() {
        let spec = ScenarioSpec::random_geometric(10, 1.5, 0, 1);
        assert!(matches!(generate(&spec), Err(ScenarioError::InfeasibleSpec(_))));
    }

    #[test]
    fn speeds_stay_in_range() {
        let spec = ScenarioSpec::grid(36, 4, 3);
        let s = generate(&spec).unwrap();
        for a in s.graph.arcs() {
            for m in Mode::ALL {
                let [lo, hi] = spec.speed_ranges.get(m);
                let v = a.speed(m).unwrap();
                assert!(v >= lo && v <= hi);
            }
            assert!(a.speed(Mode::Walk).unwrap() < spec.speed_ranges.ecar[1]);
        }
    }

    #[test]
    fn save_load_save_is_identity() {
        let s = generate(&ScenarioSpec::random_geometric(30, 3.0, 4, 9)).unwrap();
        let text = s.to_json();
        let back = Scenario::from_json(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn truncated_file_names_missing_key() {
        let err = Scenario::from_json(r#"{"nodes": [], "hubs": [], "meta": {"seed": 1, "name": "x"}}"#).unwrap_err();
        match err {
            ScenarioError::Parse { message, .. } => assert!(message.contains("edges"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
        let v2 = r#"{"nodes": [], "edges": [], "hubs": [], "meta": {"seed": 1, "name": "x", "schema_version": 2}}"#;
        assert!(matches!(Scenario::from_json(v2), Err(ScenarioError::SchemaVersionMismatch { found: 2, .. })));
    }

    #[test]
    fn od_pairs_on_complete_graph() {
        let nodes: Vec<NodeRecord> = (0..3).map(NodeRecord::new).collect();
        let mut edges = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    edges.push(EdgeRecord::uniform(i, j, 10.0, 1.0));
                }
            }
        }
        let g = build_graph(&nodes, &edges).unwrap();
        let od = sample_od_pairs(&g, 3, 0.0, 4).unwrap();
        let mut p = od.pairs.clone();
        p.sort_unstable();
        p.dedup();
        assert_eq!(p.len(), 3);
        assert!(od.pairs.iter().all(|(o, d)| o != d));
    }

    #[test]
    fn od_pairs_never_cross_components() {
        let nodes: Vec<NodeRecord> = (0..4).map(NodeRecord::new).collect();
        let edges = [
            EdgeRecord::uniform(0, 1, 10.0, 1.0),
            EdgeRecord::uniform(1, 0, 10.0, 1.0),
            EdgeRecord::uniform(2, 3, 10.0, 1.0),
            EdgeRecord::uniform(3, 2, 10.0, 1.0),
        ];
        let g = build_graph(&nodes, &edges).unwrap();
        let od = sample_od_pairs(&g, 50, 0.0, 4).unwrap();
        assert_eq!(od.pairs.len(), 50);
        assert!(od.pairs.iter().all(|&(o, d)| (o < 2) == (d < 2)));
        assert!(matches!(
            sample_od_pairs(&g, 5, 100.0, 1),
            Err(ScenarioError::NotEnoughReachablePairs { .. })
        ));
    }
}
