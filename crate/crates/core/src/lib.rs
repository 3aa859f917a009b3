//! Multi-modal shared e-mobility routing over e-hub networks.
//!
//! Walking is available everywhere; e-scooters, e-bikes and e-cars are picked
//! up and docked only at hubs. Itineraries minimise preference-weighted
//! travel time under a transition budget and per-vehicle state of charge.
//! Four interchangeable solvers share one [`Query`] and one [`Itinerary`]
//! type: an exact MILP, the MILP over a hub-contracted graph, a
//! node-visited constrained Dijkstra and an exact label-setting Dijkstra.
//! An exhaustive oracle checks them on small instances.

pub mod cost;
pub mod graph;
pub mod itinerary;
pub mod mode;
pub mod rng;
pub mod scenario;
pub mod flow;
pub mod milp;
pub mod dijkstra;
pub mod oracle;
pub mod exec;
pub mod reduction;
pub mod solver;
pub mod bench;

pub use cost::{ExclusionPolicy, EnergyParams, Query, TransitionCostTable, UserPreferences};
pub use graph::{build_graph, EHub, EdgeRecord, HubRegistry, MultiModalGraph, NodeId, NodeRecord};
pub use itinerary::{Itinerary, Leg};
pub use mode::{Mode, ModeSet};
pub use scenario::{generate, Scenario, ScenarioSpec};
