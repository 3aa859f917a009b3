use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::error::SolveError;
use crate::model::LinearModel;
use crate::simplex::{solve_lp, LpStatus};

pub const INTEGRALITY_TOL: f64 = 1e-6;
const GAP_REL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_nodes: usize,
    pub time_ms: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_nodes: 10_000,
            time_ms: 120_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    NodeLimit,
    TimeLimit,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::NodeLimit => "node_limit",
            Status::TimeLimit => "time_limit",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Stats {
    pub bb_nodes: usize,
    pub lp_iterations: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: Status,
    /// Objective of the incumbent, if any.
    pub objective: Option<f64>,
    /// Incumbent column values; integer columns are rounded exactly.
    pub values: Option<Vec<f64>>,
    pub stats: Stats,
}

struct Node {
    bound: f64,
    seq: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Best-first branch-and-bound over LP relaxations, branching on the most
/// fractional integer column (lowest index on ties).
pub fn solve(model: &LinearModel, limits: &Limits) -> Result<SolveResult, SolveError> {
    model.validate()?;
    let start = Instant::now();
    let deadline = start + Duration::from_millis(limits.time_ms);
    let mut stats = Stats::default();

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        seq,
        lower: model.columns().iter().map(|c| c.lower).collect(),
        upper: model.columns().iter().map(|c| c.upper).collect(),
    });

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut status = None;

    while let Some(node) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if node.bound >= best - GAP_REL * best.abs() {
                continue;
            }
        }
        if stats.bb_nodes >= limits.max_nodes {
            status = Some(Status::NodeLimit);
            break;
        }
        if Instant::now() >= deadline {
            status = Some(Status::TimeLimit);
            break;
        }
        stats.bb_nodes += 1;
        let lp = solve_lp(model, &node.lower, &node.upper, Some(deadline))?;
        stats.lp_iterations += lp.iterations;
        match lp.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::TimeLimit => {
                status = Some(Status::TimeLimit);
                break;
            }
            LpStatus::Unbounded => {
                return Err(SolveError::NumericalBreakdown {
                    iterations: stats.lp_iterations,
                    reason: "unbounded relaxation".into(),
                })
            }
        }
        if let Some((best, _)) = &incumbent {
            if lp.objective >= best - GAP_REL * best.abs() {
                continue;
            }
        }

        let mut branch: Option<(usize, f64)> = None;
        let mut best_frac = 0.0;
        for (j, col) in model.columns().iter().enumerate() {
            if !col.integer {
                continue;
            }
            let v = lp.x[j];
            let frac = (v - v.floor()).min(v.ceil() - v);
            if frac > INTEGRALITY_TOL && frac > best_frac + 1e-12 {
                best_frac = frac;
                branch = Some((j, v));
            }
        }

        match branch {
            None => {
                let mut values = lp.x.clone();
                for (j, col) in model.columns().iter().enumerate() {
                    if col.integer {
                        values[j] = values[j].round();
                    }
                }
                let obj = model.evaluate(&values);
                if incumbent.as_ref().is_none_or(|(b, _)| obj < *b) {
                    incumbent = Some((obj, values));
                }
            }
            Some((j, v)) => {
                let mut down = Node {
                    bound: lp.objective,
                    seq: 0,
                    lower: node.lower.clone(),
                    upper: node.upper.clone(),
                };
                down.upper[j] = v.floor();
                let mut up = Node {
                    bound: lp.objective,
                    seq: 0,
                    lower: node.lower,
                    upper: node.upper,
                };
                up.lower[j] = v.ceil();
                seq += 1;
                down.seq = seq;
                heap.push(down);
                seq += 1;
                up.seq = seq;
                heap.push(up);
            }
        }
    }

    stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let status = status.unwrap_or(if incumbent.is_some() {
        Status::Optimal
    } else {
        Status::Infeasible
    });
    let (objective, values) = match incumbent {
        Some((o, v)) => (Some(o), Some(v)),
        None => (None, None),
    };
    Ok(SolveResult {
        status,
        objective,
        values,
        stats,
    })
}
