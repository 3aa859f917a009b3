use emob_core::bench::{compare_methods, read_metrics, run_experiment, ExperimentConfig, PreferenceSet, METRICS_FILE, SUMMARY_FILE};
use emob_core::cost::PreferenceConfig;
use emob_core::scenario::ScenarioSpec;
use emob_core::solver::{Method, SolveStatus};

fn small(methods: Vec<Method>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ScenarioSpec::grid(49, 5, 4), methods);
    cfg.hub_counts = vec![5];
    cfg.n_od_pairs = 10;
    cfg.seed = 2;
    cfg
}

#[test]
fn one_cell_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let rep = run_experiment(&small(vec![Method::DijkstraExact]), Some(dir.path())).unwrap();
    assert_eq!(rep.rows.len(), 10);
    assert_eq!(rep.summary.cells.len(), 1);
    assert_eq!(rep.summary.cells[0].cell_id, "dijkstra-exact:k5:default:1");
    let text = std::fs::read_to_string(dir.path().join(METRICS_FILE)).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "cell_id,method,k_hubs,pref_set,soc_mult,od_index,status,objective_s,wall_ms,modes,transitions"
    );
    assert_eq!(text.lines().count(), 11);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap()).unwrap();
    assert!(summary["note"].as_str().unwrap().contains("wall_ms"));
    assert!(summary["cells"][0]["runtime_ms"]["median"].is_number());
    let back = read_metrics(dir.path().join(METRICS_FILE)).unwrap();
    for (a, b) in back.iter().zip(&rep.rows) {
        assert_eq!((a.objective_s, &a.modes, a.status), (b.objective_s, &b.modes, b.status));
    }
}

#[test]
fn reruns_are_deterministic_apart_from_timing() {
    let cfg = small(vec![Method::Dijkstra, Method::Milp]);
    let a = run_experiment(&cfg, None).unwrap().rows;
    let b = run_experiment(&cfg, None).unwrap().rows;
    let key = |r: &emob_core::bench::MetricsRow| (r.cell_id.clone(), r.od_index, r.status, r.objective_s, r.modes.clone(), r.transitions);
    assert_eq!(a.iter().map(key).collect::<Vec<_>>(), b.iter().map(key).collect::<Vec<_>>());
}

#[test]
fn excluding_cars_never_lowers_walk_share() {
    let mut cfg = ExperimentConfig::new(ScenarioSpec::grid(200, 10, 6), vec![Method::DijkstraExact]);
    cfg.hub_counts = vec![10];
    cfg.n_od_pairs = 80;
    cfg.seed = 1;
    cfg.preference_sets = vec![
        PreferenceSet::new("default", PreferenceConfig::default()),
        PreferenceSet::new(
            "no-ecar",
            PreferenceConfig {
                excluded: vec!["ecar".into()],
                ..PreferenceConfig::default()
            },
        ),
    ];
    let rep = run_experiment(&cfg, None).unwrap();
    let share = |name: &str| rep.summary.cells.iter().find(|c| c.pref_set == name).unwrap().walk_only_share.unwrap();
    assert!(share("no-ecar") >= share("default"));
    assert!(rep.rows.iter().filter(|r| r.pref_set == "no-ecar").all(|r| !r.modes.contains("ecar")));
}

#[test]
fn failures_become_rows_and_compare_reads_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(vec![Method::Milp, Method::MilpReduced]);
    cfg.bb_nodes = 0;
    let rep = run_experiment(&cfg, Some(dir.path())).unwrap();
    assert_eq!(rep.rows.len(), 20);
    assert!(rep.rows.iter().all(|r| r.status != SolveStatus::Error));
    let rows = read_metrics(dir.path().join(METRICS_FILE)).unwrap();
    let cmp = compare_methods(&rows).unwrap();
    assert_eq!(cmp.entries.len(), 1);
    assert_eq!(cmp.entries[0].k_hubs, 5);
}

#[test]
fn toml_config_loads() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.toml");
    std::fs::write(
        &path,
        r#"
name = "tiny"
hub_counts = [2, 4]
n_od_pairs = 3
methods = ["dijkstra", "milp-reduced"]
soc_sweep = [0.5, 1.0]
parallel = false

[scenario]
n_nodes = 25
k_hubs = 0
seed = 3
topology = { kind = "grid" }

[[preference_sets]]
name = "ebike+walk"
prefs = { excluded = ["ecar", "escooter"], t_max = 2 }
"#,
    )
    .unwrap();
    let cfg = ExperimentConfig::load(&path).unwrap();
    assert_eq!(cfg.methods, vec![Method::Dijkstra, Method::MilpReduced]);
    let rep = run_experiment(&cfg, None).unwrap();
    assert_eq!(rep.rows.len(), 2 * 2 * 2 * 3);
    assert!(rep.rows.iter().any(|r| r.cell_id == "milp-reduced:k4:ebike+walk:0.5"));
    std::fs::write(&path, "methods = []\nbogus = 1\n").unwrap();
    assert!(ExperimentConfig::load(&path).is_err());
}
