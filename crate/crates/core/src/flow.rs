//! Mode-layered network shared by the full and the contracted MILP. Nodes are
//! local indices; `labels` maps them back to graph node ids.

use crate::cost::Query;
use crate::graph::{EHub, HubRegistry, MultiModalGraph, NodeId};
use crate::itinerary::{Itinerary, ItineraryError, Leg};
use crate::mode::Mode;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcMode {
    pub cost_s: f64,
    pub distance_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowArc {
    pub tail: usize,
    pub head: usize,
    pub modes: [Option<ArcMode>; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowNetwork {
    pub labels: Vec<NodeId>,
    /// Sorted by (tail, head); no arc enters the origin or leaves the
    /// destination.
    pub arcs: Vec<FlowArc>,
    pub hubs: Vec<Option<EHub>>,
    pub origin: usize,
    pub destination: usize,
}

impl FlowNetwork {
    /// Full-resolution network for `query`: one arc per graph arc, carrying
    /// only the modes the query allows.
    pub fn from_graph(g: &MultiModalGraph, hubs: &HubRegistry, query: &Query) -> FlowNetwork {
        let mut arcs = Vec::with_capacity(g.num_arcs());
        for a in g.arcs() {
            if a.head == query.origin || a.tail == query.destination {
                continue;
            }
            let mut modes = [None; 4];
            for m in Mode::ALL {
                if let Some(c) = query.arc_cost(a, m) {
                    modes[m.index()] = Some(ArcMode {
                        cost_s: c,
                        distance_m: a.distance_m,
                    });
                }
            }
            if modes.iter().any(Option::is_some) {
                arcs.push(FlowArc {
                    tail: a.tail,
                    head: a.head,
                    modes,
                });
            }
        }
        FlowNetwork {
            labels: (0..g.num_nodes()).collect(),
            arcs,
            hubs: hubs.lookup(g.num_nodes()),
            origin: query.origin,
            destination: query.destination,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn hub(&self, v: usize) -> Option<&EHub> {
        self.hubs[v].as_ref()
    }

    /// True iff the destination is reachable from the origin using any
    /// allowed mode, ignoring hubs and energy.
    pub fn structurally_connected(&self) -> bool {
        let n = self.num_nodes();
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for a in &self.arcs {
            out[a.tail].push(a.head);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![self.origin];
        seen[self.origin] = true;
        while let Some(u) = stack.pop() {
            if u == self.destination {
                return true;
            }
            for &v in &out[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        false
    }

    /// Itinerary over this network's arcs, in graph node ids.
    pub fn itinerary(&self, steps: &[(usize, usize, Mode)], query: &Query) -> Result<Itinerary, ItineraryError> {
        let mut legs = Vec::with_capacity(steps.len());
        for &(i, j, m) in steps {
            let (from, to) = (self.labels[i], self.labels[j]);
            let am = self
                .arcs
                .binary_search_by_key(&(i, j), |a| (a.tail, a.head))
                .ok()
                .and_then(|k| self.arcs[k].modes[m.index()])
                .ok_or(ItineraryError::MissingArc { from, to, mode: m })?;
            legs.push(Leg {
                from,
                to,
                mode: m,
                seconds: am.cost_s,
                distance_m: am.distance_m,
                wh: query.energy.rho(m) * am.distance_m,
            });
        }
        Itinerary::new(legs, &query.transition_costs)
    }
}
