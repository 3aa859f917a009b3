//! Flow formulation of the routing problem as a MILP.
//!
//! Columns: `x_i_j_s` (arc i→j ridden in mode s), `y_v_s_sp` (switch s→sp at
//! hub v), `z_v_s` (journey ends at the destination in mode s) and the
//! continuous `e_v_s` (charge left when leaving v in mode s). Flow is
//! conserved per (node, mode); one unit leaves the origin on foot. Energy
//! rows are big-M with a per-row constant that is exactly tight.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use emob_lp::{LinearModel, Limits, ModelError, Sense, SolveError, Stats, Status};
use thiserror::Error;

use crate::cost::{transition_admissible, Query};
use crate::flow::FlowNetwork;
use crate::graph::{HubRegistry, MultiModalGraph, NodeId};
use crate::itinerary::{Itinerary, ItineraryError};
use crate::mode::Mode;

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("destination {destination} is unreachable from origin {origin}")]
    UnreachableDestination { origin: NodeId, destination: NodeId },
    #[error("origin and destination must differ and exist in the graph")]
    BadQuery,
    #[error("selected arcs do not form a single origin-destination path: {0}")]
    DisconnectedSelection(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Itinerary(#[from] ItineraryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelOptions {
    /// Add Σ_s x_ij^s ≤ 1 per arc. Off by default: it forbids an itinerary
    /// from reusing an arc in a second mode, which the other solvers allow.
    pub arc_exclusivity: bool,
    /// Drop vehicle arcs no charged vehicle can reach and return from, and
    /// omit energy rows for modes whose charge can never run out.
    pub energy_presolve: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            arc_exclusivity: false,
            energy_presolve: true,
        }
    }
}

/// Column bookkeeping; node ids are local to the flow network.
#[derive(Debug, Clone, Default)]
pub struct VariableIndex {
    /// (arc index, mode, column).
    pub x: Vec<(usize, Mode, usize)>,
    /// (node, from mode, to mode, column).
    pub y: Vec<(usize, Mode, Mode, usize)>,
    /// (destination, arrival mode, column).
    pub z: Vec<(usize, Mode, usize)>,
    pub e: HashMap<(usize, Mode), usize>,
    /// Modes that received energy rows.
    pub energy_modes: Vec<Mode>,
}

#[derive(Debug, Clone, Copy)]
struct MinF(f64, usize);
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

/// Multi-source distances over the mode-`m` arcs of `net`, with per-source
/// initial offsets; `reverse` searches against arc direction.
fn offset_distances(net: &FlowNetwork, m: Mode, sources: &[(usize, f64)], reverse: bool) -> Vec<f64> {
    let n = net.num_nodes();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for a in &net.arcs {
        if let Some(am) = a.modes[m.index()] {
            if reverse {
                adj[a.head].push((a.tail, am.distance_m));
            } else {
                adj[a.tail].push((a.head, am.distance_m));
            }
        }
    }
    let mut d = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    for &(s, off) in sources {
        if off < d[s] {
            d[s] = off;
            heap.push(MinF(off, s));
        }
    }
    while let Some(MinF(du, u)) = heap.pop() {
        if du > d[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = du + w;
            if nd < d[v] {
                d[v] = nd;
                heap.push(MinF(nd, v));
            }
        }
    }
    d
}

fn col_name(prefix: &str, net: &FlowNetwork, parts: &[usize], modes: &[Mode]) -> String {
    let mut s = String::from(prefix);
    for &p in parts {
        s.push('_');
        s.push_str(&net.labels[p].to_string());
    }
    for m in modes {
        s.push('_');
        s.push_str(m.name());
    }
    s
}

/// Builds the MILP for `query` over `net`.
pub fn build_model(net: &FlowNetwork, query: &Query, opts: &ModelOptions) -> Result<(LinearModel, VariableIndex), MilpError> {
    let n = net.num_nodes();
    let (o, dst) = (net.origin, net.destination);
    if o == dst || o >= n || dst >= n {
        return Err(MilpError::BadQuery);
    }
    if !net.structurally_connected() {
        return Err(MilpError::UnreachableDestination {
            origin: net.labels[o],
            destination: net.labels[dst],
        });
    }
    let prefs = &query.prefs;
    let energy = &query.energy;

    // Which (arc, mode) pairs survive, and per-mode energy data.
    let mut keep: Vec<[bool; 4]> = net.arcs.iter().map(|a| std::array::from_fn(|k| a.modes[k].is_some())).collect();
    let mut e_max = [0.0f64; 4];
    let mut energy_mode = [false; 4];
    for s in Mode::VEHICLES {
        if !prefs.allows(s) {
            for k in &mut keep {
                k[s.index()] = false;
            }
            continue;
        }
        let pickups: Vec<(usize, f64)> = (0..n)
            .filter(|&v| v != dst)
            .filter_map(|v| net.hub(v).and_then(|h| h.best_soc(s)).map(|soc| (v, soc)))
            .collect();
        let docks: Vec<usize> = (0..n).filter(|&v| v != o && net.hub(v).is_some_and(|h| h.supports(s))).collect();
        if pickups.is_empty() || docks.is_empty() {
            for k in &mut keep {
                k[s.index()] = false;
            }
            continue;
        }
        e_max[s.index()] = pickups.iter().map(|p| p.1).fold(0.0, f64::max);
        let rho = energy.rho(s);
        if rho == 0.0 {
            continue;
        }
        if opts.energy_presolve {
            // Deficit form: distance from a pickup minus that vehicle's range.
            let srcs: Vec<(usize, f64)> = pickups.iter().map(|&(v, soc)| (v, -soc / rho)).collect();
            let fwd = offset_distances(net, s, &srcs, false);
            let back = offset_distances(net, s, &docks.iter().map(|&v| (v, 0.0)).collect::<Vec<_>>(), true);
            for (k, a) in net.arcs.iter().enumerate() {
                if let Some(am) = a.modes[s.index()] {
                    let need = fwd[a.tail] + am.distance_m + back[a.head];
                    if !(need <= 1e-9 * (1.0 + am.distance_m)) {
                        keep[k][s.index()] = false;
                    }
                }
            }
            // Longest possible ride: one arc out of every node at most.
            let mut longest = vec![0.0f64; n];
            for (k, a) in net.arcs.iter().enumerate() {
                if keep[k][s.index()] {
                    let d = a.modes[s.index()].expect("kept").distance_m;
                    longest[a.tail] = longest[a.tail].max(d);
                }
            }
            let bound: f64 = longest.iter().sum::<f64>() * rho;
            let min_soc = pickups.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            energy_mode[s.index()] = min_soc < bound;
        } else {
            energy_mode[s.index()] = true;
        }
    }

    let mut has_in = vec![[false; 4]; n];
    let mut has_out = vec![[false; 4]; n];
    for (k, a) in net.arcs.iter().enumerate() {
        for m in Mode::ALL {
            if keep[k][m.index()] {
                has_out[a.tail][m.index()] = true;
                has_in[a.head][m.index()] = true;
            }
        }
    }

    let mut model = LinearModel::new();
    let mut idx = VariableIndex::default();
    // Per (node, mode) flow terms.
    let mut flow: Vec<[Vec<(usize, f64)>; 4]> = (0..n).map(|_| Default::default()).collect();

    for (k, a) in net.arcs.iter().enumerate() {
        for m in Mode::ALL {
            if !keep[k][m.index()] {
                continue;
            }
            let am = a.modes[m.index()].expect("kept");
            let c = model.add_binary(col_name("x", net, &[a.tail, a.head], &[m]), am.cost_s);
            idx.x.push((k, m, c));
            flow[a.tail][m.index()].push((c, 1.0));
            flow[a.head][m.index()].push((c, -1.0));
        }
    }

    if prefs.t_max > 0 {
        for v in 0..n {
            if v == dst {
                continue;
            }
            let hub = net.hub(v);
            if hub.is_none() {
                continue;
            }
            for s in Mode::ALL {
                if !prefs.allows(s) || (v == o && s != Mode::Walk) {
                    continue;
                }
                // Flow can only be in mode s here by arriving in it.
                if v != o && !has_in[v][s.index()] {
                    continue;
                }
                for sp in Mode::ALL {
                    if !prefs.allows(sp) || !transition_admissible(hub, s, sp) || !has_out[v][sp.index()] {
                        continue;
                    }
                    let c = model.add_binary(col_name("y", net, &[v], &[s, sp]), query.transition_costs.get(s, sp));
                    idx.y.push((v, s, sp, c));
                    flow[v][s.index()].push((c, 1.0));
                    flow[v][sp.index()].push((c, -1.0));
                }
            }
        }
    }

    for m in Mode::ALL {
        let dockable = m == Mode::Walk || net.hub(dst).is_some_and(|h| h.supports(m));
        if dockable && has_in[dst][m.index()] {
            let c = model.add_binary(col_name("z", net, &[dst], &[m]), 0.0);
            idx.z.push((dst, m, c));
            flow[dst][m.index()].push((c, 1.0));
        }
    }

    for s in Mode::VEHICLES {
        if !energy_mode[s.index()] {
            continue;
        }
        idx.energy_modes.push(s);
        for v in 0..n {
            if has_in[v][s.index()] || has_out[v][s.index()] {
                let c = model.add_column(col_name("e", net, &[v], &[s]), 0.0, 0.0, e_max[s.index()], false);
                idx.e.insert((v, s), c);
            }
        }
    }

    for v in 0..n {
        for m in Mode::ALL {
            let terms = std::mem::take(&mut flow[v][m.index()]);
            let rhs = if v == o && m == Mode::Walk { 1.0 } else { 0.0 };
            if terms.is_empty() && rhs == 0.0 {
                continue;
            }
            model.add_row(col_name("flow", net, &[v], &[m]), terms, Sense::Eq, rhs);
        }
    }

    if !idx.y.is_empty() {
        model.add_row("tmax", idx.y.iter().map(|t| (t.3, 1.0)).collect::<Vec<_>>(), Sense::Le, prefs.t_max as f64);
    }

    if opts.arc_exclusivity {
        let mut per_arc: HashMap<usize, Vec<usize>> = HashMap::new();
        for &(k, _, c) in &idx.x {
            per_arc.entry(k).or_default().push(c);
        }
        let mut arcs: Vec<_> = per_arc.into_iter().filter(|(_, v)| v.len() > 1).collect();
        arcs.sort_unstable();
        for (k, cols) in arcs {
            let a = &net.arcs[k];
            model.add_row(
                col_name("excl", net, &[a.tail, a.head], &[]),
                cols.into_iter().map(|c| (c, 1.0)).collect::<Vec<_>>(),
                Sense::Le,
                1.0,
            );
        }
    }

    for &(k, s, c) in &idx.x {
        if s == Mode::Walk || !energy_mode[s.index()] {
            continue;
        }
        let a = &net.arcs[k];
        let d = a.modes[s.index()].expect("kept").distance_m;
        let em = e_max[s.index()];
        let ei = idx.e[&(a.tail, s)];
        let ej = idx.e[&(a.head, s)];
        model.add_row(
            col_name("en", net, &[a.tail, a.head], &[s]),
            vec![(ej, 1.0), (ei, -1.0), (c, em + energy.rho(s) * d)],
            Sense::Le,
            em,
        );
    }

    for v in 0..n {
        for s in Mode::VEHICLES {
            let Some(&ev) = idx.e.get(&(v, s)) else { continue };
            let Some(soc) = net.hub(v).and_then(|h| h.best_soc(s)) else { continue };
            let em = e_max[s.index()];
            let into: Vec<usize> = idx.y.iter().filter(|t| t.0 == v && t.2 == s).map(|t| t.3).collect();
            if into.is_empty() || soc >= em {
                continue;
            }
            let mut terms = vec![(ev, 1.0)];
            terms.extend(into.into_iter().map(|c| (c, em - soc)));
            model.add_row(col_name("pick", net, &[v], &[s]), terms, Sense::Le, em);
        }
    }

    Ok((model, idx))
}

/// Reconstructs the origin-destination path from a 0/1 assignment. Unused
/// switch columns (zero-cost switch loops) are ignored; any unused arc is a
/// disconnected cycle and rejected.
pub fn extract_steps(values: &[f64], idx: &VariableIndex, net: &FlowNetwork) -> Result<Vec<(usize, usize, Mode)>, MilpError> {
    let on = |c: usize| values.get(c).is_some_and(|&v| v > 0.5);
    let mut xs: Vec<(usize, usize, Mode, bool)> = idx
        .x
        .iter()
        .filter(|t| on(t.2))
        .map(|&(k, m, _)| (net.arcs[k].tail, net.arcs[k].head, m, false))
        .collect();
    let mut ys: Vec<(usize, Mode, Mode, bool)> = idx.y.iter().filter(|t| on(t.3)).map(|&(v, s, sp, _)| (v, s, sp, false)).collect();

    let (mut node, mut mode) = (net.origin, Mode::Walk);
    let mut steps = Vec::new();
    let guard = xs.len() + ys.len() + 1;
    for _ in 0..guard {
        if node == net.destination {
            break;
        }
        if let Some(x) = xs.iter_mut().find(|x| !x.3 && x.0 == node && x.2 == mode) {
            x.3 = true;
            steps.push((x.0, x.1, x.2));
            node = x.1;
            continue;
        }
        if let Some(y) = ys.iter_mut().find(|y| !y.3 && y.0 == node && y.1 == mode) {
            y.3 = true;
            mode = y.2;
            continue;
        }
        return Err(MilpError::DisconnectedSelection(format!(
            "dead end at node {} in {}",
            net.labels[node], mode
        )));
    }
    if node != net.destination {
        return Err(MilpError::DisconnectedSelection("path does not reach the destination".into()));
    }
    if let Some(x) = xs.iter().find(|x| !x.3) {
        return Err(MilpError::DisconnectedSelection(format!(
            "arc {}->{} in {} is not on the path",
            net.labels[x.0], net.labels[x.1], x.2
        )));
    }
    Ok(steps)
}

#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: Status,
    /// Cost of the extracted itinerary when one exists.
    pub objective: Option<f64>,
    pub itinerary: Option<Itinerary>,
    /// Selected arcs and switches, in graph node ids.
    pub x_selected: Vec<(NodeId, NodeId, Mode)>,
    pub y_selected: Vec<(NodeId, Mode, Mode)>,
    pub stats: Stats,
    pub build_ms: f64,
    pub num_columns: usize,
    pub num_rows: usize,
}

/// Builds, solves and decodes the model for `net`. `build_ms` covers the
/// model build only; `stats.wall_ms` covers the solve.
pub fn solve_network(net: &FlowNetwork, query: &Query, opts: &ModelOptions, limits: &Limits) -> Result<MilpSolution, MilpError> {
    let t0 = Instant::now();
    let (model, idx) = build_model(net, query, opts)?;
    let build_ms = t0.elapsed().as_secs_f64() * 1e3;
    let res = emob_lp::solve(&model, limits)?;
    let mut sol = MilpSolution {
        status: res.status,
        objective: None,
        itinerary: None,
        x_selected: Vec::new(),
        y_selected: Vec::new(),
        stats: res.stats,
        build_ms,
        num_columns: model.num_columns(),
        num_rows: model.num_rows(),
    };
    if let Some(values) = &res.values {
        let on = |c: usize| values[c] > 0.5;
        sol.x_selected = idx
            .x
            .iter()
            .filter(|t| on(t.2))
            .map(|&(k, m, _)| (net.labels[net.arcs[k].tail], net.labels[net.arcs[k].head], m))
            .collect();
        sol.y_selected = idx.y.iter().filter(|t| on(t.3)).map(|&(v, s, sp, _)| (net.labels[v], s, sp)).collect();
        let steps = extract_steps(values, &idx, net)?;
        let it = net.itinerary(&steps, query)?;
        sol.objective = Some(it.total_seconds());
        sol.itinerary = Some(it);
    }
    Ok(sol)
}

/// MILP over the full graph.
pub fn solve_milp(g: &MultiModalGraph, hubs: &HubRegistry, query: &Query, opts: &ModelOptions, limits: &Limits) -> Result<MilpSolution, MilpError> {
    if !g.contains(query.origin) || !g.contains(query.destination) || query.origin == query.destination {
        return Err(MilpError::BadQuery);
    }
    let t0 = Instant::now();
    let net = FlowNetwork::from_graph(g, hubs, query);
    let prep = t0.elapsed().as_secs_f64() * 1e3;
    let mut sol = solve_network(&net, query, opts, limits)?;
    sol.build_ms += prep;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, EHub, EdgeRecord, NodeRecord};

    fn line(n: usize, d: f64, v: f64) -> MultiModalGraph {
        let nodes: Vec<NodeRecord> = (0..n).map(NodeRecord::new).collect();
        let mut edges = Vec::new();
        for i in 0..n - 1 {
            edges.push(EdgeRecord::uniform(i, i + 1, d, v));
            edges.push(EdgeRecord::uniform(i + 1, i, d, v));
        }
        build_graph(&nodes, &edges).unwrap()
    }

    #[test]
    fn single_walk_arc() {
        let nodes = [NodeRecord::new(0), NodeRecord::new(1)];
        let mut e = EdgeRecord::uniform(0, 1, 100.0, 1.25);
        e.speeds = [Some(1.25), None, None, None];
        let g = build_graph(&nodes, &[e]).unwrap();
        let q = Query::new(0, 1);
        let net = FlowNetwork::from_graph(&g, &HubRegistry::new(), &q);
        let (m, idx) = build_model(&net, &q, &ModelOptions::default()).unwrap();
        assert_eq!(idx.x.len(), 1);
        assert!(idx.y.is_empty());
        assert_eq!(m.column(idx.x[0].2).name, "x_0_1_walk");
        let sol = solve_milp(&g, &HubRegistry::new(), &q, &ModelOptions::default(), &Limits::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert_eq!(sol.objective, Some(80.0));
        assert_eq!(sol.itinerary.unwrap().legs().len(), 1);
    }

    #[test]
    fn rides_between_hubs_when_faster() {
        let g = line(5, 100.0, 1.0);
        let mut edges = g.edge_records();
        for e in &mut edges {
            e.speeds[Mode::EBike.index()] = Some(10.0);
        }
        let g = build_graph(g.nodes(), &edges).unwrap();
        let hubs = HubRegistry::from_hubs([
            EHub::new(1, &[(Mode::EBike, 50.0)]).unwrap(),
            EHub::new(3, &[(Mode::EBike, 50.0)]).unwrap(),
        ])
        .unwrap();
        let q = Query::new(0, 4);
        let sol = solve_milp(&g, &hubs, &q, &ModelOptions::default(), &Limits::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        // walk 100 s, ride 2 x 10 s, walk 100 s
        assert!((sol.objective.unwrap() - 220.0).abs() < 1e-9);
        let it = sol.itinerary.unwrap();
        assert_eq!(it.transitions(), 2);
        assert_eq!(sol.y_selected, vec![(1, Mode::Walk, Mode::EBike), (3, Mode::EBike, Mode::Walk)]);

        let q0 = q.with_prefs(q.prefs.with_t_max(0));
        let walk = solve_milp(&g, &hubs, &q0, &ModelOptions::default(), &Limits::default()).unwrap();
        assert!((walk.objective.unwrap() - 400.0).abs() < 1e-9);
    }

    #[test]
    fn scooter_then_car_needs_three_changes() {
        let g = line(6, 100.0, 1.0);
        let mut edges = g.edge_records();
        for e in &mut edges {
            e.speeds[Mode::EScooter.index()] = Some(5.0);
            e.speeds[Mode::ECar.index()] = Some(20.0);
        }
        let g = build_graph(g.nodes(), &edges).unwrap();
        let hubs = HubRegistry::from_hubs([
            EHub::new(1, &[(Mode::EScooter, 100.0)]).unwrap(),
            EHub::new(2, &[(Mode::EScooter, 100.0), (Mode::ECar, 1000.0)]).unwrap(),
            EHub::new(4, &[(Mode::ECar, 1000.0)]).unwrap(),
        ])
        .unwrap();
        let q = Query::new(0, 5);
        let q = q.with_prefs(q.prefs.with_t_max(3));
        let sol = solve_milp(&g, &hubs, &q, &ModelOptions::default(), &Limits::default()).unwrap();
        let it = sol.itinerary.unwrap();
        // walk 100 s, scooter 20 s, car 2 x 5 s, walk 100 s
        assert!((it.total_seconds() - 230.0).abs() < 1e-9);
        assert_eq!(it.transitions(), 3);
        assert_eq!(it.mode_label(), "ecar+escooter+walk");

        // Two changes only buy one vehicle: walk to the car hub instead.
        let q2 = q.with_prefs(q.prefs.with_t_max(2));
        let sol = solve_milp(&g, &hubs, &q2, &ModelOptions::default(), &Limits::default()).unwrap();
        assert!((sol.objective.unwrap() - 310.0).abs() < 1e-9);
    }

    #[test]
    fn energy_rows_bind() {
        let g = line(4, 1000.0, 1.0);
        let mut edges = g.edge_records();
        for e in &mut edges {
            e.speeds[Mode::ECar.index()] = Some(10.0);
        }
        let g = build_graph(g.nodes(), &edges).unwrap();
        // 0.15 Wh/m: 2 km of driving needs 300 Wh.
        let mk = |soc: f64| {
            HubRegistry::from_hubs([
                EHub::new(0, &[(Mode::ECar, soc)]).unwrap(),
                EHub::new(2, &[(Mode::ECar, soc)]).unwrap(),
            ])
            .unwrap()
        };
        let q = Query::new(0, 3);
        for presolve in [true, false] {
            let opts = ModelOptions {
                energy_presolve: presolve,
                ..Default::default()
            };
            let rich = solve_milp(&g, &mk(400.0), &q, &opts, &Limits::default()).unwrap();
            assert!((rich.objective.unwrap() - 1200.0).abs() < 1e-6, "{:?}", rich.objective);
            let poor = solve_milp(&g, &mk(200.0), &q, &opts, &Limits::default()).unwrap();
            // 200 Wh cannot cover the 2 km to the other hub, so walk all 3 km.
            assert!((poor.objective.unwrap() - 3000.0).abs() < 1e-6, "{:?}", poor.objective);
        }
    }

    #[test]
    fn walk_removed_and_energy_short_is_infeasible() {
        let nodes: Vec<NodeRecord> = (0..2).map(NodeRecord::new).collect();
        let e = EdgeRecord::with_speeds(0, 1, 1000.0, [None, None, None, Some(10.0)]);
        let g = build_graph(&nodes, &[e]).unwrap();
        let hubs = HubRegistry::from_hubs([
            EHub::new(0, &[(Mode::ECar, 10.0)]).unwrap(),
            EHub::new(1, &[(Mode::ECar, 10.0)]).unwrap(),
        ])
        .unwrap();
        let sol = solve_milp(&g, &hubs, &Query::new(0, 1), &ModelOptions::default(), &Limits::default()).unwrap();
        assert_eq!(sol.status, Status::Infeasible);
        assert!(sol.itinerary.is_none());
    }

    #[test]
    fn unreachable_destination_is_reported() {
        let g = build_graph(&[NodeRecord::new(0), NodeRecord::new(1)], &[EdgeRecord::uniform(1, 0, 5.0, 1.0)]).unwrap();
        let r = solve_milp(&g, &HubRegistry::new(), &Query::new(0, 1), &ModelOptions::default(), &Limits::default());
        assert!(matches!(r, Err(MilpError::UnreachableDestination { .. })));
    }

    #[test]
    fn disjoint_cycle_is_rejected() {
        let g = line(4, 10.0, 1.0);
        let q = Query::new(0, 1);
        let net = FlowNetwork::from_graph(&g, &HubRegistry::new(), &q);
        let (m, idx) = build_model(&net, &q, &ModelOptions::default()).unwrap();
        let mut values = vec![0.0; m.num_columns()];
        for name in ["x_0_1_walk", "x_2_3_walk", "x_3_2_walk"] {
            values[m.column_index(name).unwrap()] = 1.0;
        }
        assert!(matches!(extract_steps(&values, &idx, &net), Err(MilpError::DisconnectedSelection(_))));
        values[m.column_index("x_2_3_walk").unwrap()] = 0.0;
        values[m.column_index("x_3_2_walk").unwrap()] = 0.0;
        assert_eq!(extract_steps(&values, &idx, &net).unwrap(), vec![(0, 1, Mode::Walk)]);
    }

    #[test]
    fn exclusivity_rows_are_optional() {
        let g = line(3, 10.0, 1.0);
        let hubs = HubRegistry::from_hubs([EHub::new(0, &[(Mode::EBike, 99.0)]).unwrap(), EHub::new(2, &[(Mode::EBike, 99.0)]).unwrap()]).unwrap();
        let q = Query::new(0, 2);
        let net = FlowNetwork::from_graph(&g, &hubs, &q);
        let (plain, _) = build_model(&net, &q, &ModelOptions::default()).unwrap();
        let opts = ModelOptions {
            arc_exclusivity: true,
            ..Default::default()
        };
        let (excl, _) = build_model(&net, &q, &opts).unwrap();
        assert!(excl.rows().iter().any(|r| r.name == "excl_0_1"));
        assert!(!plain.rows().iter().any(|r| r.name.starts_with("excl")));
    }
}
