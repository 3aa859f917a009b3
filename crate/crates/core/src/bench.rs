//! Experiment grid: method × hub count × preference set × SOC multiplier over
//! one fixed batch of origin-destination pairs, plus the reports built from
//! the resulting metrics table.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use emob_lp::Limits;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{CostError, PreferenceConfig, Query};
use crate::dijkstra::DEFAULT_ENERGY_QUANTUM;
use crate::exec::par_map;
use crate::graph::{HubRegistry, NodeId};
use crate::itinerary::verify;
use crate::milp::ModelOptions;
use crate::rng::ScenarioRng;
use crate::scenario::{generate, sample_od_pairs, Scenario, ScenarioError, ScenarioSpec};
use crate::solver::{solve, Method, SolveStatus, SolverOptions};

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TIMING_NOTE: &str = "wall_ms covers the solve or search call only; model construction and graph contraction are reported separately as build_ms";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("missing cell: {0}")]
    MissingCell(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("preference set `{name}`: {source}")]
    Preferences { name: String, source: CostError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreferenceSet {
    pub name: String,
    #[serde(default)]
    pub prefs: PreferenceConfig,
}

impl PreferenceSet {
    pub fn new(name: impl Into<String>, prefs: PreferenceConfig) -> Self {
        PreferenceSet { name: name.into(), prefs }
    }

    /// Only walking plus the listed vehicles are allowed.
    pub fn availability(vehicles: &[crate::mode::Mode]) -> Self {
        let excluded: Vec<String> = crate::mode::Mode::VEHICLES
            .iter()
            .filter(|m| !vehicles.contains(m))
            .map(|m| m.name().to_string())
            .collect();
        let label = crate::mode::ModeSet::from_iter(vehicles.iter().copied().chain([crate::mode::Mode::Walk])).label();
        PreferenceSet::new(
            label,
            PreferenceConfig {
                excluded,
                ..PreferenceConfig::default()
            },
        )
    }
}

fn default_hub_counts() -> Vec<usize> {
    vec![10, 20, 50, 100]
}
fn default_pairs() -> usize {
    50
}
fn default_sets() -> Vec<PreferenceSet> {
    vec![PreferenceSet::new("default", PreferenceConfig::default())]
}
fn default_sweep() -> Vec<f64> {
    vec![1.0]
}
fn default_true() -> bool {
    true
}
fn default_bb() -> usize {
    Limits::default().max_nodes
}
fn default_time() -> u64 {
    Limits::default().time_ms
}
fn default_quantum() -> f64 {
    DEFAULT_ENERGY_QUANTUM
}
fn default_name() -> String {
    "experiment".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    /// Generated scenario; its `k_hubs` is overridden per cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSpec>,
    /// Scenario file; cells use nested seeded subsets of its hubs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_file: Option<PathBuf>,
    #[serde(default = "default_hub_counts")]
    pub hub_counts: Vec<usize>,
    #[serde(default = "default_pairs")]
    pub n_od_pairs: usize,
    #[serde(default)]
    pub min_od_walk_m: f64,
    pub methods: Vec<Method>,
    #[serde(default = "default_sets")]
    pub preference_sets: Vec<PreferenceSet>,
    #[serde(default = "default_sweep")]
    pub soc_sweep: Vec<f64>,
    /// Seed for O/D sampling and hub subsetting.
    #[serde(default)]
    pub seed: u64,
    /// Run queries concurrently. Turn off for timing studies.
    #[serde(default = "default_true")]
    pub parallel: bool,
    #[serde(default = "default_bb")]
    pub bb_nodes: usize,
    #[serde(default = "default_time")]
    pub time_ms: u64,
    #[serde(default = "default_quantum")]
    pub energy_quantum_wh: f64,
}

impl ExperimentConfig {
    pub fn new(scenario: ScenarioSpec, methods: Vec<Method>) -> Self {
        ExperimentConfig {
            name: default_name(),
            scenario: Some(scenario),
            scenario_file: None,
            hub_counts: default_hub_counts(),
            n_od_pairs: default_pairs(),
            min_od_walk_m: 0.0,
            methods,
            preference_sets: default_sets(),
            soc_sweep: default_sweep(),
            seed: 0,
            parallel: true,
            bb_nodes: default_bb(),
            time_ms: default_time(),
            energy_quantum_wh: default_quantum(),
        }
    }

    /// Reads JSON, or TOML when the extension is `.toml`. A relative
    /// `scenario_file` resolves against the config's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg: ExperimentConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| BenchError::Config(e.to_string()))?
        } else {
            serde_json::from_str(&text).map_err(|e| BenchError::Config(e.to_string()))?
        };
        if let (Some(f), Some(dir)) = (&cfg.scenario_file, path.parent()) {
            if f.is_relative() {
                cfg.scenario_file = Some(dir.join(f));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Config(m.to_string()));
        match (&self.scenario, &self.scenario_file) {
            (Some(_), Some(_)) => return bad("give either scenario or scenario_file, not both"),
            (None, None) => return bad("a scenario or scenario_file is required"),
            _ => {}
        }
        if self.methods.is_empty() {
            return bad("at least one method is required");
        }
        if self.preference_sets.is_empty() {
            return bad("at least one preference set is required");
        }
        if self.hub_counts.is_empty() || self.soc_sweep.is_empty() {
            return bad("hub_counts and soc_sweep must be non-empty");
        }
        if self.soc_sweep.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return bad("SOC multipliers must be non-negative");
        }
        let names: BTreeSet<&str> = self.preference_sets.iter().map(|p| p.name.as_str()).collect();
        if names.len() != self.preference_sets.len() {
            return bad("preference set names must be unique");
        }
        for p in &self.preference_sets {
            p.prefs.resolve().map_err(|source| BenchError::Preferences {
                name: p.name.clone(),
                source,
            })?;
        }
        Ok(())
    }

    fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            limits: Limits {
                max_nodes: self.bb_nodes,
                time_ms: self.time_ms,
            },
            model: ModelOptions::default(),
            energy_quantum: self.energy_quantum_wh,
            parallel: self.parallel,
            ..SolverOptions::default()
        }
    }
}

/// One CSV row: one query in one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub cell_id: String,
    pub method: Method,
    pub k_hubs: usize,
    pub pref_set: String,
    pub soc_mult: f64,
    pub od_index: usize,
    pub status: SolveStatus,
    pub objective_s: Option<f64>,
    pub wall_ms: f64,
    /// Canonical mode combination, e.g. `ecar+walk`; empty without a route.
    pub modes: String,
    pub transitions: Option<u32>,
    #[serde(skip)]
    pub build_ms: f64,
    #[serde(skip)]
    pub violations: usize,
}

pub fn cell_id(method: Method, k: usize, pref: &str, soc: f64) -> String {
    format!("{method}:k{k}:{pref}:{soc}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

/// Linear-interpolation quantiles; None for an empty sample.
pub fn quantiles(xs: &[f64]) -> Option<Quantiles> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let at = |p: f64| {
        let h = p * (v.len() - 1) as f64;
        let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
        v[lo] + (h - lo as f64) * (v[hi] - v[lo])
    };
    Some(Quantiles {
        min: v[0],
        q1: at(0.25),
        median: at(0.5),
        q3: at(0.75),
        max: v[v.len() - 1],
        mean: v.iter().sum::<f64>() / v.len() as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell_id: String,
    pub method: Method,
    pub k_hubs: usize,
    pub pref_set: String,
    pub soc_mult: f64,
    pub queries: usize,
    pub statuses: BTreeMap<String, usize>,
    pub runtime_ms: Option<Quantiles>,
    pub mean_build_ms: f64,
    pub mean_objective_s: Option<f64>,
    pub mode_combinations: BTreeMap<String, usize>,
    /// Share of routed queries that never leave Walk.
    pub walk_only_share: Option<f64>,
    pub constraint_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub note: String,
    pub od_pairs: Vec<(NodeId, NodeId)>,
    pub cells: Vec<CellSummary>,
    pub errors: usize,
}

pub fn summarize(name: &str, od_pairs: &[(NodeId, NodeId)], rows: &[MetricsRow]) -> Summary {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&MetricsRow>> = BTreeMap::new();
    for r in rows {
        let g = groups.entry(r.cell_id.as_str()).or_default();
        if g.is_empty() {
            order.push(&r.cell_id);
        }
        g.push(r);
    }
    let cells = order
        .into_iter()
        .map(|id| {
            let rs = &groups[id];
            let first = rs[0];
            let mut statuses = BTreeMap::new();
            let mut combos = BTreeMap::new();
            for r in rs {
                *statuses.entry(r.status.as_str().to_string()).or_insert(0) += 1;
                if !r.modes.is_empty() {
                    *combos.entry(r.modes.clone()).or_insert(0) += 1;
                }
            }
            let objs: Vec<f64> = rs.iter().filter_map(|r| r.objective_s).collect();
            let routed = combos.values().sum::<usize>();
            let walk = combos.get("walk").copied().unwrap_or(0);
            CellSummary {
                cell_id: id.to_string(),
                method: first.method,
                k_hubs: first.k_hubs,
                pref_set: first.pref_set.clone(),
                soc_mult: first.soc_mult,
                queries: rs.len(),
                statuses,
                runtime_ms: quantiles(&rs.iter().map(|r| r.wall_ms).collect::<Vec<_>>()),
                mean_build_ms: rs.iter().map(|r| r.build_ms).sum::<f64>() / rs.len() as f64,
                mean_objective_s: (!objs.is_empty()).then(|| objs.iter().sum::<f64>() / objs.len() as f64),
                mode_combinations: combos,
                walk_only_share: (routed > 0).then(|| walk as f64 / routed as f64),
                constraint_violations: rs.iter().map(|r| r.violations).sum(),
            }
        })
        .collect();
    Summary {
        name: name.to_string(),
        note: TIMING_NOTE.to_string(),
        od_pairs: od_pairs.to_vec(),
        cells,
        errors: rows.iter().filter(|r| r.status == SolveStatus::Error).count(),
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub rows: Vec<MetricsRow>,
    pub summary: Summary,
}

/// Hub registries per hub count, nested as k grows.
fn hub_sets(cfg: &ExperimentConfig) -> Result<(Scenario, Vec<HubRegistry>), BenchError> {
    if let Some(spec) = &cfg.scenario {
        let mut base = None;
        let mut sets = Vec::new();
        for &k in &cfg.hub_counts {
            let s = generate(&spec.with_hubs(k))?;
            sets.push(s.hubs.clone());
            base.get_or_insert(s);
        }
        return Ok((base.expect("hub_counts is non-empty"), sets));
    }
    let s = Scenario::load(cfg.scenario_file.as_ref().expect("validated"))?;
    let mut order: Vec<_> = s.hubs.iter().copied().collect();
    ScenarioRng::stream(cfg.seed, 3).shuffle(&mut order);
    let mut sets = Vec::new();
    for &k in &cfg.hub_counts {
        if k > order.len() {
            return Err(BenchError::Config(format!("hub count {k} exceeds the {} hubs in the scenario file", order.len())));
        }
        sets.push(HubRegistry::from_hubs(order[..k].iter().copied()).map_err(ScenarioError::from)?);
    }
    Ok((s, sets))
}

/// Runs the whole grid. Per-query failures become status rows. When `out`
/// is given, writes the metrics table and summary there.
pub fn run_experiment(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<ExperimentReport, BenchError> {
    cfg.validate()?;
    let (scenario, hub_sets) = hub_sets(cfg)?;
    let g = &scenario.graph;
    let od = sample_od_pairs(g, cfg.n_od_pairs, cfg.min_od_walk_m, cfg.seed)?;
    let opts = cfg.solver_options();
    let mut resolved = Vec::new();
    for p in &cfg.preference_sets {
        let r = p.prefs.resolve().map_err(|source| BenchError::Preferences {
            name: p.name.clone(),
            source,
        })?;
        resolved.push(r);
    }

    struct Cell {
        method: Method,
        k_idx: usize,
        pref_idx: usize,
        soc: f64,
        hubs: HubRegistry,
    }
    let mut cells = Vec::new();
    for (k_idx, base) in hub_sets.iter().enumerate() {
        for &soc in &cfg.soc_sweep {
            let hubs = if soc == 1.0 { base.clone() } else { base.scaled(soc) };
            for pref_idx in 0..cfg.preference_sets.len() {
                for &method in &cfg.methods {
                    cells.push(Cell {
                        method,
                        k_idx,
                        pref_idx,
                        soc,
                        hubs: hubs.clone(),
                    });
                }
            }
        }
    }
    let tasks: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..od.pairs.len()).map(move |q| (c, q))).collect();
    let rows = par_map(&tasks, cfg.parallel, |&(c, qi)| {
        let cell = &cells[c];
        let (o, d) = od.pairs[qi];
        let (prefs, energy, table) = resolved[cell.pref_idx];
        let query = Query::new(o, d).with_prefs(prefs).with_energy(energy).with_transition_costs(table);
        let r = solve(cell.method, g, &cell.hubs, &query, &opts);
        let violations = r.itinerary.as_ref().map_or(0, |it| verify(it, g, &cell.hubs, &query).len());
        let k = cfg.hub_counts[cell.k_idx];
        let pref = &cfg.preference_sets[cell.pref_idx].name;
        MetricsRow {
            cell_id: cell_id(cell.method, k, pref, cell.soc),
            method: cell.method,
            k_hubs: k,
            pref_set: pref.clone(),
            soc_mult: cell.soc,
            od_index: qi,
            status: r.status,
            objective_s: r.objective,
            wall_ms: r.wall_ms,
            modes: r.itinerary.as_ref().map(|it| it.mode_label()).unwrap_or_default(),
            transitions: r.itinerary.as_ref().map(|it| it.transitions()),
            build_ms: r.build_ms,
            violations,
        }
    });
    let summary = summarize(&cfg.name, &od.pairs, &rows);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_metrics(&rows, dir.join(METRICS_FILE))?;
        let mut s = serde_json::to_string_pretty(&summary)?;
        s.push('\n');
        std::fs::write(dir.join(SUMMARY_FILE), s)?;
    }
    Ok(ExperimentReport { rows, summary })
}

pub fn write_metrics(rows: &[MetricsRow], path: impl AsRef<Path>) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics(path: impl AsRef<Path>) -> Result<Vec<MetricsRow>, BenchError> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<Result<Vec<MetricsRow>, _>>()?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapStats {
    pub pairs: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub mean: f64,
    /// Queries where the contracted model found a strictly worse route.
    pub positive: usize,
    pub negative: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareEntry {
    pub k_hubs: usize,
    pub pref_set: String,
    pub soc_mult: f64,
    pub mean_ms_original: f64,
    pub mean_ms_reduced: f64,
    /// original / reduced mean solve time.
    pub ratio: f64,
    /// 1 − reduced / original.
    pub speedup: f64,
    pub gap: Option<GapStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub entries: Vec<CompareEntry>,
    /// Smallest hub count at which contraction no longer pays off.
    pub crossover_k: Option<usize>,
}

type CellKey = (usize, String, u64);

fn by_cell(rows: &[MetricsRow], method: Method) -> BTreeMap<CellKey, Vec<&MetricsRow>> {
    let mut m: BTreeMap<CellKey, Vec<&MetricsRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.method == method) {
        m.entry((r.k_hubs, r.pref_set.clone(), r.soc_mult.to_bits())).or_default().push(r);
    }
    m
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// Full versus contracted MILP, per cell.
pub fn compare_methods(rows: &[MetricsRow]) -> Result<CompareReport, BenchError> {
    let orig = by_cell(rows, Method::Milp);
    let red = by_cell(rows, Method::MilpReduced);
    if orig.is_empty() && red.is_empty() {
        return Err(BenchError::MissingCell("no milp or milp-reduced rows".into()));
    }
    for (mine, other, absent) in [(&orig, &red, Method::MilpReduced), (&red, &orig, Method::Milp)] {
        if let Some(key) = mine.keys().find(|k| !other.contains_key(*k)) {
            return Err(BenchError::MissingCell(cell_id(absent, key.0, &key.1, f64::from_bits(key.2))));
        }
    }
    let mut entries = Vec::new();
    for (key, o_rows) in &orig {
        let r_rows = &red[key];
        let mo = mean(o_rows.iter().map(|r| r.wall_ms));
        let mr = mean(r_rows.iter().map(|r| r.wall_ms));
        let r_obj: BTreeMap<usize, f64> = r_rows.iter().filter_map(|r| r.objective_s.map(|v| (r.od_index, v))).collect();
        let gaps: Vec<f64> = o_rows
            .iter()
            .filter_map(|r| Some(r_obj.get(&r.od_index)? - r.objective_s?))
            .collect();
        let gap = quantiles(&gaps).map(|q| GapStats {
            pairs: gaps.len(),
            min: q.min,
            median: q.median,
            max: q.max,
            mean: q.mean,
            positive: gaps.iter().filter(|&&g| g > 1e-9).count(),
            negative: gaps.iter().filter(|&&g| g < -1e-9).count(),
        });
        let ratio = if mr > 0.0 { mo / mr } else { f64::INFINITY };
        entries.push(CompareEntry {
            k_hubs: key.0,
            pref_set: key.1.clone(),
            soc_mult: f64::from_bits(key.2),
            mean_ms_original: mo,
            mean_ms_reduced: mr,
            ratio,
            speedup: if mo > 0.0 { 1.0 - mr / mo } else { 0.0 },
            gap,
        });
    }
    let crossover_k = entries.iter().filter(|e| e.ratio <= 1.0).map(|e| e.k_hubs).min();
    Ok(CompareReport { entries, crossover_k })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SocCurve {
    pub pref_set: String,
    /// (SOC multiplier, mean objective), ascending in SOC.
    pub points: Vec<(f64, f64)>,
    /// Mean cost never increases with more charge.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SocReport {
    pub method: Method,
    pub k_hubs: usize,
    pub curves: Vec<SocCurve>,
    /// The all-modes curve lies on or below every single-vehicle curve.
    pub all_modes_dominate: bool,
}

/// Curves for the availability sets `all` (or `default`), `ecar+walk` and
/// `ebike+walk`.
pub fn soc_sweep_report(rows: &[MetricsRow], method: Method, k_hubs: usize) -> Result<SocReport, BenchError> {
    let sel: Vec<&MetricsRow> = rows.iter().filter(|r| r.method == method && r.k_hubs == k_hubs).collect();
    let present: BTreeSet<&str> = sel.iter().map(|r| r.pref_set.as_str()).collect();
    let all_name = ["all", "default"]
        .into_iter()
        .find(|n| present.contains(n))
        .ok_or_else(|| BenchError::MissingCell(format!("{method}:k{k_hubs}:all")))?;
    let mut curves = Vec::new();
    for name in [all_name, "ecar+walk", "ebike+walk"] {
        if !present.contains(name) {
            return Err(BenchError::MissingCell(format!("{method}:k{k_hubs}:{name}")));
        }
        let mut by_soc: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for r in sel.iter().filter(|r| r.pref_set == name) {
            if let Some(v) = r.objective_s {
                by_soc.entry(r.soc_mult.to_bits()).or_default().push(v);
            }
        }
        let mut points: Vec<(f64, f64)> = by_soc.into_iter().map(|(b, v)| (f64::from_bits(b), mean(v.into_iter()))).collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let monotone = points.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9));
        curves.push(SocCurve {
            pref_set: name.to_string(),
            points,
            monotone,
        });
    }
    let all = &curves[0].points;
    let all_modes_dominate = curves[1..].iter().all(|c| {
        c.points.iter().all(|&(s, v)| all.iter().find(|p| p.0 == s).is_none_or(|p| p.1 <= v * (1.0 + 1e-9)))
    });
    Ok(SocReport {
        method,
        k_hubs,
        curves,
        all_modes_dominate,
    })
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties. None when either
/// side is constant or the samples are shorter than two.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let (mx, my) = (mean(rx.iter().copied()), mean(ry.iter().copied()));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Walk-only share per hub count for one method, preference set and SOC
/// level, with the Spearman correlation of share against k.
pub fn walk_only_trend(summary: &Summary, method: Method, pref_set: &str, soc_mult: f64) -> (Vec<(usize, f64)>, Option<f64>) {
    let mut pts: Vec<(usize, f64)> = summary
        .cells
        .iter()
        .filter(|c| c.method == method && c.pref_set == pref_set && c.soc_mult == soc_mult)
        .filter_map(|c| c.walk_only_share.map(|s| (c.k_hubs, s)))
        .collect();
    pts.sort_by_key(|p| p.0);
    let xs: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let rho = spearman(&xs, &ys);
    (pts, rho)
}
