#![allow(dead_code)]

use emob_core::cost::ExclusionPolicy;
use emob_core::rng::ScenarioRng;
use emob_core::scenario::{generate, Scenario, ScenarioSpec};
use emob_core::{Mode, ModeSet, Query, TransitionCostTable, UserPreferences};

/// SOC scale factors from plenty of charge down to a few metres of range.
pub const SOC_LEVELS: [f64; 4] = [1.0, 0.05, 0.01, 0.002];

#[derive(Debug, Clone)]
pub struct Instance {
    pub scenario: Scenario,
    pub query: Query,
    pub soc_mult: f64,
}

/// Random geometric graph of 6..=12 nodes with at most three hubs, 20 m
/// distance grid, T_max <= 2 and a mix of slack and binding charge.
pub fn small_instance(seed: u64) -> Instance {
    let mut rng = ScenarioRng::stream(seed, 101);
    let n = 6 + rng.index(7);
    let min_deg = 2.0 * (n as f64 - 1.0) / n as f64;
    let deg = rng.uniform(min_deg, (min_deg + 2.5).min(n as f64 - 1.0));
    let k = rng.index(4);
    let mut spec = ScenarioSpec::random_geometric(n, deg, k, seed);
    spec.round_distance_m = Some(20.0);
    let soc_mult = SOC_LEVELS[rng.index(SOC_LEVELS.len())];
    let scenario = generate(&spec).expect("valid small spec").with_soc_multiplier(soc_mult);
    let o = rng.index(n);
    let d = (o + 1 + rng.index(n - 1)) % n;
    let mut prefs = UserPreferences::default().with_t_max(rng.index(3) as u32);
    if rng.index(4) == 0 {
        let m = Mode::VEHICLES[rng.index(3)];
        prefs = prefs.excluding(ModeSet::only(m), ExclusionPolicy::Hard);
    }
    let table = if rng.index(2) == 0 {
        TransitionCostTable::default()
    } else {
        TransitionCostTable::uniform(20.0).unwrap()
    };
    Instance {
        scenario,
        query: Query::new(o, d).with_prefs(prefs).with_transition_costs(table),
        soc_mult,
    }
}

/// Same as [`small_instance`] with every vehicle hard-excluded.
pub fn walk_only(mut inst: Instance) -> Instance {
    inst.query.prefs = inst.query.prefs.excluding(ModeSet::VEHICLES, ExclusionPolicy::Hard);
    inst
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
