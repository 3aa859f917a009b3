//! One entry point over every routing method, with uniform status and timing.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use emob_lp::{Limits, Status};
use serde::{Deserialize, Serialize};

use crate::cost::Query;
use crate::dijkstra::{route_exact, route_paper, RouteError, DEFAULT_ENERGY_QUANTUM};
use crate::graph::{HubRegistry, MultiModalGraph};
use crate::itinerary::Itinerary;
use crate::milp::{solve_milp, MilpError, MilpSolution, ModelOptions};
use crate::oracle::{enumerate_optimal, OracleError, OracleLimits};
use crate::reduction::{solve_milp_reduced, ReductionError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Milp,
    MilpReduced,
    Dijkstra,
    DijkstraExact,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Milp, Method::MilpReduced, Method::Dijkstra, Method::DijkstraExact, Method::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Method::Milp => "milp",
            Method::MilpReduced => "milp-reduced",
            Method::Dijkstra => "dijkstra",
            Method::DijkstraExact => "dijkstra-exact",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown method `{0}` (expected milp, milp-reduced, dijkstra, dijkstra-exact or oracle)")]
pub struct UnknownMethod(pub String);

impl FromStr for Method {
    type Err = UnknownMethod;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// A heuristic answer with no optimality claim.
    Feasible,
    Infeasible,
    NodeLimit,
    TimeLimit,
    Error,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NodeLimit => "node_limit",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::Error => "error",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub limits: Limits,
    pub model: ModelOptions,
    pub energy_quantum: f64,
    pub oracle: OracleLimits,
    /// Fan out the contraction's per-hub searches.
    pub parallel: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            limits: Limits::default(),
            model: ModelOptions::default(),
            energy_quantum: DEFAULT_ENERGY_QUANTUM,
            oracle: OracleLimits::default(),
            parallel: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MethodResult {
    pub method: Method,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub itinerary: Option<Itinerary>,
    /// Search or solve time, excluding model construction.
    pub wall_ms: f64,
    /// Model construction (and contraction) time; zero for the searches.
    pub build_ms: f64,
    pub bb_nodes: usize,
    pub error: Option<String>,
}

impl MethodResult {
    fn new(method: Method, status: SolveStatus) -> Self {
        MethodResult {
            method,
            status,
            objective: None,
            itinerary: None,
            wall_ms: 0.0,
            build_ms: 0.0,
            bb_nodes: 0,
            error: None,
        }
    }

    fn failed(method: Method, status: SolveStatus, e: impl fmt::Display) -> Self {
        let mut r = Self::new(method, status);
        r.error = Some(e.to_string());
        r
    }

    fn from_milp(method: Method, sol: MilpSolution, extra_build_ms: f64) -> Self {
        let status = match sol.status {
            Status::Optimal => SolveStatus::Optimal,
            Status::Infeasible => SolveStatus::Infeasible,
            Status::NodeLimit => SolveStatus::NodeLimit,
            Status::TimeLimit => SolveStatus::TimeLimit,
        };
        MethodResult {
            method,
            status,
            objective: sol.objective,
            itinerary: sol.itinerary,
            wall_ms: sol.stats.wall_ms,
            build_ms: sol.build_ms + extra_build_ms,
            bb_nodes: sol.stats.bb_nodes,
            error: None,
        }
    }

    fn from_route(method: Method, r: Result<Itinerary, RouteError>, ms: f64, found: SolveStatus) -> Self {
        let mut out = match r {
            Ok(it) => {
                let mut m = Self::new(method, found);
                m.objective = Some(it.total_seconds());
                m.itinerary = Some(it);
                m
            }
            Err(RouteError::NoFeasiblePath) => Self::new(method, SolveStatus::Infeasible),
            Err(e) => Self::failed(method, SolveStatus::Error, e),
        };
        out.wall_ms = ms;
        out
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Routes `query` with `method`. Infeasibility and solver limits are
/// statuses; only malformed input yields `SolveStatus::Error`.
pub fn solve(method: Method, g: &MultiModalGraph, hubs: &HubRegistry, query: &Query, opts: &SolverOptions) -> MethodResult {
    match method {
        Method::Milp => match solve_milp(g, hubs, query, &opts.model, &opts.limits) {
            Ok(sol) => MethodResult::from_milp(method, sol, 0.0),
            Err(MilpError::UnreachableDestination { .. }) => MethodResult::new(method, SolveStatus::Infeasible),
            Err(e) => MethodResult::failed(method, SolveStatus::Error, e),
        },
        Method::MilpReduced => match solve_milp_reduced(g, hubs, query, &opts.model, &opts.limits, opts.parallel) {
            Ok(r) => MethodResult::from_milp(method, r.milp, r.reduce_ms),
            Err(ReductionError::NoWalkPathToAnyHub { .. }) | Err(ReductionError::Milp(MilpError::UnreachableDestination { .. })) => {
                MethodResult::new(method, SolveStatus::Infeasible)
            }
            Err(e) => MethodResult::failed(method, SolveStatus::Error, e),
        },
        Method::Dijkstra => {
            let t = Instant::now();
            let r = route_paper(g, hubs, query);
            MethodResult::from_route(method, r, ms_since(t), SolveStatus::Feasible)
        }
        Method::DijkstraExact => {
            let t = Instant::now();
            let r = route_exact(g, hubs, query, opts.energy_quantum);
            MethodResult::from_route(method, r, ms_since(t), SolveStatus::Optimal)
        }
        Method::Oracle => {
            let t = Instant::now();
            let r = enumerate_optimal(g, hubs, query, &opts.oracle);
            let ms = ms_since(t);
            let mut out = match r {
                Ok(o) => match o.itinerary {
                    Some(it) => {
                        let mut m = MethodResult::new(method, SolveStatus::Optimal);
                        m.objective = Some(it.total_seconds());
                        m.itinerary = Some(it);
                        m
                    }
                    None => MethodResult::new(method, SolveStatus::Infeasible),
                },
                Err(e @ OracleError::TooLarge(_)) => MethodResult::failed(method, SolveStatus::NodeLimit, e),
                Err(e) => MethodResult::failed(method, SolveStatus::Error, e),
            };
            out.wall_ms = ms;
            out
        }
    }
}
