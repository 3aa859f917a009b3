use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use emob_core::bench::{compare_methods, read_metrics, run_experiment, soc_sweep_report, ExperimentConfig};
use emob_core::cost::{ExclusionPolicy, PreferenceConfig};
use emob_core::flow::FlowNetwork;
use emob_core::graph::{validate_scenario, EHub, HubRegistry};
use emob_core::milp::{build_model, ModelOptions};
use emob_core::oracle::{enumerate_optimal, OracleLimits};
use emob_core::reduction::reduce;
use emob_core::scenario::{generate, Scenario, ScenarioSpec};
use emob_core::solver::{solve, Method, SolveStatus, SolverOptions};
use emob_core::{Mode, ModeSet, Query};
use emob_lp::Limits;

#[derive(Parser)]
#[command(name = "emob", version, about = "Multi-modal routing over shared e-mobility hubs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Route one origin-destination query.
    Route {
        #[command(flatten)]
        q: QueryArgs,
        #[arg(long, default_value = "milp")]
        method: Method,
        /// Branch-and-bound node limit.
        #[arg(long)]
        bb_nodes: Option<usize>,
        /// Solver time limit in milliseconds.
        #[arg(long)]
        time_ms: Option<u64>,
        /// Print only the JSON result record.
        #[arg(long)]
        json: bool,
    },
    /// Run an experiment grid and write metrics.csv and summary.json.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full versus contracted MILP runtime and objective comparison.
    Compare {
        #[arg(long)]
        metrics: PathBuf,
    },
    /// Mean cost against SOC multiplier per availability set.
    SocReport {
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long, default_value = "dijkstra-exact")]
        method: Method,
        #[arg(long)]
        k: usize,
    },
    /// Generate a synthetic scenario file.
    Generate {
        /// Scenario spec (JSON, or TOML by extension); overrides the flags.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        nodes: usize,
        #[arg(long, default_value_t = 10)]
        hubs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Average degree; switches to a random geometric topology.
        #[arg(long)]
        degree: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Load a scenario and report structural problems.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Write the MILP for a query in LP format.
    ExportLp {
        #[command(flatten)]
        q: QueryArgs,
        /// Export the contracted model instead of the full one.
        #[arg(long)]
        reduced: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump the contracted graph with its expansion table as JSON.
    Reduce {
        #[command(flatten)]
        q: QueryArgs,
        #[arg(long)]
        out: PathBuf,
    },
    #[command(hide = true)]
    Oracle {
        #[command(flatten)]
        q: QueryArgs,
    },
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    origin: usize,
    #[arg(long)]
    dest: usize,
    /// Preference file (JSON, or TOML by extension); flags override it.
    #[arg(long)]
    prefs: Option<PathBuf>,
    #[arg(long)]
    tmax: Option<u32>,
    /// Vehicle modes to exclude, e.g. `ecar,ebike`.
    #[arg(long)]
    exclude: Option<String>,
    /// Penalise excluded modes instead of forbidding them.
    #[arg(long)]
    soft: bool,
    /// Starting charge at every hub offering the mode, e.g. `ebike=50,ecar=800`.
    #[arg(long)]
    soc: Option<String>,
}

struct Loaded {
    scenario: Scenario,
    hubs: HubRegistry,
    query: Query,
}

fn with_soc(hubs: &HubRegistry, spec: &str) -> Result<HubRegistry> {
    let mut set = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (m, v) = part.split_once('=').with_context(|| format!("expected mode=Wh, got `{part}`"))?;
        let m: Mode = m.parse()?;
        let v: f64 = v.trim().parse().with_context(|| format!("bad SOC value in `{part}`"))?;
        if !m.is_vehicle() {
            bail!("walking has no charge");
        }
        set.push((m, v));
    }
    let mut out = HubRegistry::new();
    for h in hubs.iter() {
        let socs: Vec<(Mode, f64)> = h
            .modes()
            .iter()
            .map(|m| (m, set.iter().find(|s| s.0 == m).map_or_else(|| h.best_soc(m).unwrap_or(0.0), |s| s.1)))
            .collect();
        out.insert(EHub::new(h.node, &socs)?)?;
    }
    Ok(out)
}

impl QueryArgs {
    fn load(&self) -> Result<Loaded> {
        let scenario = Scenario::load(&self.scenario).with_context(|| format!("loading {}", self.scenario.display()))?;
        let cfg = match &self.prefs {
            Some(p) => PreferenceConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => PreferenceConfig::default(),
        };
        let (mut prefs, energy, table) = cfg.resolve()?;
        if let Some(t) = self.tmax {
            prefs.t_max = t;
        }
        if let Some(e) = &self.exclude {
            let set = ModeSet::parse_list(e)?;
            let policy = if self.soft { ExclusionPolicy::Soft } else { ExclusionPolicy::Hard };
            prefs = prefs.excluding(prefs.excluded.union(set), policy);
        }
        prefs.validate()?;
        for v in [self.origin, self.dest] {
            if !scenario.graph.contains(v) {
                bail!("node {v} is not in the scenario ({} nodes)", scenario.graph.num_nodes());
            }
        }
        let hubs = match &self.soc {
            Some(s) => with_soc(&scenario.hubs, s)?,
            None => scenario.hubs.clone(),
        };
        let query = Query::new(self.origin, self.dest).with_prefs(prefs).with_energy(energy).with_transition_costs(table);
        Ok(Loaded { scenario, hubs, query })
    }
}

fn route(q: &QueryArgs, method: Method, bb_nodes: Option<usize>, time_ms: Option<u64>, json: bool) -> Result<ExitCode> {
    let l = q.load()?;
    let mut opts = SolverOptions::default();
    let d = Limits::default();
    opts.limits = Limits {
        max_nodes: bb_nodes.unwrap_or(d.max_nodes),
        time_ms: time_ms.unwrap_or(d.time_ms),
    };
    let r = solve(method, &l.scenario.graph, &l.hubs, &l.query, &opts);
    if let Some(e) = &r.error {
        bail!("{method} failed: {e}");
    }
    if !json {
        match &r.itinerary {
            Some(it) => print!("{}", it.explain()),
            None => println!("no feasible route ({})", r.status),
        }
    }
    let mut record = serde_json::json!({
        "method": method.name(),
        "origin": q.origin,
        "destination": q.dest,
        "status": r.status.as_str(),
        "objective_s": r.objective,
        "wall_ms": r.wall_ms,
        "build_ms": r.build_ms,
        "modes": r.itinerary.as_ref().map(|it| it.mode_label()),
        "transitions": r.itinerary.as_ref().map(|it| it.transitions()),
    });
    if json {
        record["legs"] = serde_json::json!(r.itinerary.as_ref().map(|it| it.legs().to_vec()));
    }
    println!("{record}");
    Ok(if r.itinerary.is_some() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn bench(config: &Path, out: &Path) -> Result<ExitCode> {
    let cfg = ExperimentConfig::load(config)?;
    let rep = run_experiment(&cfg, Some(out))?;
    println!("{:<36} {:>5} {:>10} {:>10} {:>12} {:>9}", "cell", "n", "median_ms", "mean_ms", "mean_obj_s", "walk_only");
    for c in &rep.summary.cells {
        let q = c.runtime_ms.expect("cells are never empty");
        println!(
            "{:<36} {:>5} {:>10.3} {:>10.3} {:>12} {:>9}",
            c.cell_id,
            c.queries,
            q.median,
            q.mean,
            c.mean_objective_s.map_or("-".into(), |v| format!("{v:.1}")),
            c.walk_only_share.map_or("-".into(), |v| format!("{:.1}%", 100.0 * v)),
        );
    }
    println!("wrote {} rows to {}", rep.rows.len(), out.display());
    if rep.summary.errors > 0 {
        eprintln!("{} queries ended in an internal error", rep.summary.errors);
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn compare(metrics: &Path) -> Result<()> {
    let rep = compare_methods(&read_metrics(metrics)?)?;
    println!("{:>6} {:<14} {:>6} {:>12} {:>12} {:>8} {:>9} {:>10}", "k", "pref_set", "soc", "milp_ms", "reduced_ms", "ratio", "speedup", "max_gap_s");
    for e in &rep.entries {
        println!(
            "{:>6} {:<14} {:>6} {:>12.2} {:>12.2} {:>8.2} {:>8.1}% {:>10}",
            e.k_hubs,
            e.pref_set,
            e.soc_mult,
            e.mean_ms_original,
            e.mean_ms_reduced,
            e.ratio,
            100.0 * e.speedup,
            e.gap.as_ref().map_or("-".into(), |g| format!("{:.3}", g.max)),
        );
    }
    match rep.crossover_k {
        Some(k) => println!("contraction stops paying off at k = {k}"),
        None => println!("contraction is faster at every hub count"),
    }
    Ok(())
}

fn soc_report(metrics: &Path, method: Method, k: usize) -> Result<()> {
    let rep = soc_sweep_report(&read_metrics(metrics)?, method, k)?;
    for c in &rep.curves {
        let pts: Vec<String> = c.points.iter().map(|(s, v)| format!("{s}:{v:.1}")).collect();
        println!("{:<12} monotone={:<5} {}", c.pref_set, c.monotone, pts.join(" "));
    }
    println!("all-modes curve lowest: {}", rep.all_modes_dominate);
    Ok(())
}

fn load_spec(path: &Path) -> Result<ScenarioSpec> {
    let text = std::fs::read_to_string(path)?;
    Ok(if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text)?
    } else {
        serde_json::from_str(&text)?
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Route {
            q,
            method,
            bb_nodes,
            time_ms,
            json,
        } => route(&q, method, bb_nodes, time_ms, json),
        Cmd::Bench { config, out } => bench(&config, &out),
        Cmd::Compare { metrics } => compare(&metrics).map(|_| ExitCode::SUCCESS),
        Cmd::SocReport { metrics, method, k } => soc_report(&metrics, method, k).map(|_| ExitCode::SUCCESS),
        Cmd::Generate {
            spec,
            nodes,
            hubs,
            seed,
            degree,
            out,
        } => {
            let spec = match (spec, degree) {
                (Some(p), _) => load_spec(&p)?,
                (None, Some(deg)) => ScenarioSpec::random_geometric(nodes, deg, hubs, seed),
                (None, None) => ScenarioSpec::grid(nodes, hubs, seed),
            };
            let s = generate(&spec)?;
            s.save(&out)?;
            println!("{} nodes, {} arcs, {} hubs -> {}", s.graph.num_nodes(), s.graph.num_arcs(), s.hubs.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Validate { scenario } => {
            let s = Scenario::load(&scenario).with_context(|| format!("loading {}", scenario.display()))?;
            let diags = validate_scenario(&s.graph, &s.hubs);
            println!("{} nodes, {} arcs, {} hubs", s.graph.num_nodes(), s.graph.num_arcs(), s.hubs.len());
            for d in &diags {
                println!("warning: {d}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::ExportLp { q, reduced, out } => {
            let l = q.load()?;
            let net = if reduced {
                reduce(&l.scenario.graph, &l.hubs, &l.query, true)?.0.to_flow_network()
            } else {
                FlowNetwork::from_graph(&l.scenario.graph, &l.hubs, &l.query)
            };
            let (model, _) = build_model(&net, &l.query, &ModelOptions::default())?;
            emob_lp::write_lp(&model, &out)?;
            println!("{} columns, {} rows -> {}", model.num_columns(), model.num_rows(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Reduce { q, out } => {
            let l = q.load()?;
            let (rg, map) = reduce(&l.scenario.graph, &l.hubs, &l.query, true)?;
            rg.save_json(&l.scenario.graph, &map, &out)?;
            println!("{} anchors, {} super-edges -> {}", rg.num_anchors(), rg.edges.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Oracle { q } => {
            let l = q.load()?;
            let o = enumerate_optimal(&l.scenario.graph, &l.hubs, &l.query, &OracleLimits::default())?;
            match o.itinerary {
                Some(it) => print!("{}", it.explain()),
                None => println!("no feasible route ({})", SolveStatus::Infeasible),
            }
            println!("{} search states", o.states);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
