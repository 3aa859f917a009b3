use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::cost::{can_finish, energy_after_edge, transition_admissible, Query, TransitionCostTable};
use crate::graph::{EHub, HubRegistry, MultiModalGraph, NodeId};
use crate::mode::{Mode, ModeSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Leg {
    pub from: NodeId,
    pub to: NodeId,
    pub mode: Mode,
    pub seconds: f64,
    pub distance_m: f64,
    pub wh: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ItineraryError {
    #[error("an itinerary needs at least one leg")]
    Empty,
    #[error("leg {index} starts at {found} but the previous leg ended at {expected}")]
    NotContiguous {
        index: usize,
        expected: NodeId,
        found: NodeId,
    },
    #[error("no arc {from}->{to} usable in {mode}")]
    MissingArc { from: NodeId, to: NodeId, mode: Mode },
}

/// Ordered legs plus the mode changes between them. The journey starts on
/// foot at the first leg's origin, so a first leg ridden by vehicle counts
/// as one transition. Arriving at the destination by vehicle adds none.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Itinerary {
    legs: Vec<Leg>,
    transitions: u32,
    transition_seconds: f64,
    total_seconds: f64,
}

impl Itinerary {
    /// Totals accumulate leg by leg, adding any switch cost just before the
    /// leg it precedes; every solver sums in this same order.
    pub fn new(legs: Vec<Leg>, table: &TransitionCostTable) -> Result<Itinerary, ItineraryError> {
        if legs.is_empty() {
            return Err(ItineraryError::Empty);
        }
        for (i, w) in legs.windows(2).enumerate() {
            if w[0].to != w[1].from {
                return Err(ItineraryError::NotContiguous {
                    index: i + 1,
                    expected: w[0].to,
                    found: w[1].from,
                });
            }
        }
        let mut total = 0.0;
        let mut switch_total = 0.0;
        let mut transitions = 0;
        let mut mode = Mode::Walk;
        for leg in &legs {
            if leg.mode != mode {
                let d = table.get(mode, leg.mode);
                total += d;
                switch_total += d;
                transitions += 1;
                mode = leg.mode;
            }
            total += leg.seconds;
        }
        Ok(Itinerary {
            legs,
            transitions,
            transition_seconds: switch_total,
            total_seconds: total,
        })
    }

    /// Builds legs from `(from, to, mode)` steps over real graph arcs.
    pub fn from_steps(g: &MultiModalGraph, query: &Query, steps: &[(NodeId, NodeId, Mode)]) -> Result<Itinerary, ItineraryError> {
        let mut legs = Vec::with_capacity(steps.len());
        for &(from, to, mode) in steps {
            let arc = g.arc(from, to).ok_or(ItineraryError::MissingArc { from, to, mode })?;
            let seconds = query.arc_cost(arc, mode).ok_or(ItineraryError::MissingArc { from, to, mode })?;
            legs.push(Leg {
                from,
                to,
                mode,
                seconds,
                distance_m: arc.distance_m,
                wh: query.energy.rho(mode) * arc.distance_m,
            });
        }
        Itinerary::new(legs, &query.transition_costs)
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn origin(&self) -> NodeId {
        self.legs[0].from
    }

    pub fn destination(&self) -> NodeId {
        self.legs[self.legs.len() - 1].to
    }

    pub fn transitions(&self) -> u32 {
        self.transitions
    }

    pub fn transition_seconds(&self) -> f64 {
        self.transition_seconds
    }

    pub fn total_seconds(&self) -> f64 {
        self.total_seconds
    }

    pub fn total_distance_m(&self) -> f64 {
        self.legs.iter().map(|l| l.distance_m).sum()
    }

    pub fn modes_used(&self) -> ModeSet {
        self.legs.iter().map(|l| l.mode).collect()
    }

    /// Canonical mode-combination label such as `ecar+walk`.
    pub fn mode_label(&self) -> String {
        self.modes_used().label()
    }

    pub fn is_walk_only(&self) -> bool {
        self.modes_used() == ModeSet::only(Mode::Walk)
    }

    /// Node sequence including both ends.
    pub fn nodes(&self) -> Vec<NodeId> {
        let mut v = vec![self.origin()];
        v.extend(self.legs.iter().map(|l| l.to));
        v
    }

    /// Leg table with one row per leg and a totals footer.
    pub fn explain(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>4}  {:>6}  {:>6}  {:<8}  {:>10}  {:>9}", "leg", "from", "to", "mode", "seconds", "Wh");
        for (i, l) in self.legs.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:>4}  {:>6}  {:>6}  {:<8}  {:>10.3}  {:>9.3}",
                i + 1,
                l.from,
                l.to,
                l.mode.name(),
                l.seconds,
                l.wh
            );
        }
        let _ = writeln!(
            out,
            "total {:.3} s ({} legs, {} transitions, {:.3} s switching, {:.1} m, modes {})",
            self.total_seconds,
            self.legs.len(),
            self.transitions,
            self.transition_seconds,
            self.total_distance_m(),
            self.mode_label()
        );
        out
    }
}

impl fmt::Display for Itinerary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.explain())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    WrongEndpoints { origin: NodeId, destination: NodeId },
    MissingArc { leg: usize },
    ModeForbidden { leg: usize, mode: Mode },
    TooManyTransitions { used: u32, t_max: u32 },
    BadTransition { at: NodeId, from: Mode, to: Mode },
    NegativeSoc { leg: usize, mode: Mode, soc: f64 },
    CannotDock { mode: Mode },
    CostMismatch { recorded: f64, recomputed: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WrongEndpoints { origin, destination } => write!(f, "itinerary runs {origin}->{destination}"),
            Violation::MissingArc { leg } => write!(f, "leg {leg} uses a missing arc"),
            Violation::ModeForbidden { leg, mode } => write!(f, "leg {leg} rides forbidden or excluded {mode}"),
            Violation::TooManyTransitions { used, t_max } => write!(f, "{used} transitions exceed the budget of {t_max}"),
            Violation::BadTransition { at, from, to } => write!(f, "switch {from}->{to} at node {at} is not admissible"),
            Violation::NegativeSoc { leg, mode, soc } => write!(f, "{mode} SOC drops to {soc} Wh on leg {leg}"),
            Violation::CannotDock { mode } => write!(f, "destination cannot take back the {mode}"),
            Violation::CostMismatch { recorded, recomputed } => write!(f, "recorded cost {recorded} but legs sum to {recomputed}"),
        }
    }
}

/// Re-simulates an itinerary against the query and returns every broken
/// rule. Pickups reset the SOC to the hub's best vehicle for that mode.
pub fn verify(it: &Itinerary, g: &MultiModalGraph, hubs: &HubRegistry, query: &Query) -> Vec<Violation> {
    let mut out = Vec::new();
    if it.origin() != query.origin || it.destination() != query.destination {
        out.push(Violation::WrongEndpoints {
            origin: it.origin(),
            destination: it.destination(),
        });
    }
    let mut mode = Mode::Walk;
    let mut soc = 0.0;
    let mut transitions = 0u32;
    let mut total = 0.0;
    for (i, leg) in it.legs().iter().enumerate() {
        if leg.mode != mode {
            transitions += 1;
            let hub: Option<&EHub> = hubs.get(leg.from);
            if !transition_admissible(hub, mode, leg.mode) {
                out.push(Violation::BadTransition {
                    at: leg.from,
                    from: mode,
                    to: leg.mode,
                });
            }
            soc = hub.and_then(|h| h.best_soc(leg.mode)).unwrap_or(0.0);
            total += query.transition_costs.get(mode, leg.mode);
            mode = leg.mode;
        }
        match g.arc(leg.from, leg.to) {
            None => out.push(Violation::MissingArc { leg: i }),
            Some(arc) => match query.arc_cost(arc, leg.mode) {
                None => out.push(Violation::ModeForbidden { leg: i, mode: leg.mode }),
                Some(c) => {
                    total += c;
                    match energy_after_edge(&query.energy, soc, leg.mode, arc.distance_m) {
                        Some(left) => soc = left,
                        None => {
                            out.push(Violation::NegativeSoc {
                                leg: i,
                                mode: leg.mode,
                                soc: soc - query.energy.rho(leg.mode) * arc.distance_m,
                            });
                            soc = 0.0;
                        }
                    }
                }
            },
        }
    }
    if transitions > query.prefs.t_max {
        out.push(Violation::TooManyTransitions {
            used: transitions,
            t_max: query.prefs.t_max,
        });
    }
    if !can_finish(hubs.get(it.destination()), mode) {
        out.push(Violation::CannotDock { mode });
    }
    let tol = 1e-6 * total.abs().max(1.0);
    if (total - it.total_seconds()).abs() > tol {
        out.push(Violation::CostMismatch {
            recorded: it.total_seconds(),
            recomputed: total,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, EdgeRecord, NodeRecord};

    fn leg(from: NodeId, to: NodeId, mode: Mode, seconds: f64) -> Leg {
        Leg {
            from,
            to,
            mode,
            seconds,
            distance_m: 10.0,
            wh: 0.0,
        }
    }

    #[test]
    fn totals_and_transitions() {
        let mut t = TransitionCostTable::default();
        t.set(Mode::Walk, Mode::ECar, 5.0).unwrap();
        let it = Itinerary::new(
            vec![leg(0, 1, Mode::Walk, 10.0), leg(1, 2, Mode::ECar, 3.0), leg(2, 3, Mode::Walk, 7.0)],
            &t,
        )
        .unwrap();
        assert_eq!(it.transitions(), 2);
        assert_eq!(it.total_seconds(), 25.0);
        assert_eq!(it.mode_label(), "ecar+walk");
        assert_eq!(it.nodes(), vec![0, 1, 2, 3]);
        let table = it.explain();
        assert_eq!(table.lines().count(), 5);
        assert!(table.lines().last().unwrap().contains("2 transitions"));
    }

    #[test]
    fn constructor_rejects_bad_shapes() {
        let t = TransitionCostTable::default();
        assert_eq!(Itinerary::new(vec![], &t), Err(ItineraryError::Empty));
        assert!(matches!(
            Itinerary::new(vec![leg(0, 1, Mode::Walk, 1.0), leg(2, 3, Mode::Walk, 1.0)], &t),
            Err(ItineraryError::NotContiguous { index: 1, .. })
        ));
    }

    #[test]
    fn single_walk_leg_table() {
        let it = Itinerary::new(vec![leg(0, 1, Mode::Walk, 4.0)], &TransitionCostTable::default()).unwrap();
        assert_eq!(it.explain().lines().count(), 3);
        assert!(it.is_walk_only());
    }

    #[test]
    fn verification_catches_each_rule() {
        let nodes: Vec<NodeRecord> = (0..3).map(NodeRecord::new).collect();
        let edges = [EdgeRecord::uniform(0, 1, 100.0, 10.0), EdgeRecord::uniform(1, 2, 100.0, 10.0)];
        let g = build_graph(&nodes, &edges).unwrap();
        let hubs = HubRegistry::from_hubs([EHub::new(0, &[(Mode::ECar, 20.0)]).unwrap()]).unwrap();
        let q = Query::new(0, 2);
        let ok = Itinerary::from_steps(&g, &q, &[(0, 1, Mode::Walk), (1, 2, Mode::Walk)]).unwrap();
        assert!(verify(&ok, &g, &hubs, &q).is_empty());

        // Car picked up at 0 cannot be left at 2, and 200 m needs 30 Wh.
        let car = Itinerary::from_steps(&g, &q, &[(0, 1, Mode::ECar), (1, 2, Mode::ECar)]).unwrap();
        let v = verify(&car, &g, &hubs, &q);
        assert!(v.contains(&Violation::CannotDock { mode: Mode::ECar }));
        assert!(v.iter().any(|x| matches!(x, Violation::NegativeSoc { leg: 1, .. })));

        // Switching at a non-hub.
        let bad = Itinerary::from_steps(&g, &q, &[(0, 1, Mode::Walk), (1, 2, Mode::EBike)]).unwrap();
        assert!(verify(&bad, &g, &hubs, &q).iter().any(|x| matches!(x, Violation::BadTransition { at: 1, .. })));

        let tight = q.with_prefs(q.prefs.with_t_max(0));
        assert!(verify(&car, &g, &hubs, &tight).iter().any(|x| matches!(x, Violation::TooManyTransitions { .. })));
    }
}
