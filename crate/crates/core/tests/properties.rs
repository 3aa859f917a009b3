//! Randomised invariants over small generated instances.

mod common;

use emob_core::cost::{energy_after_edge, travel_cost, ExclusionPolicy};
use emob_core::dijkstra::{route_exact, route_paper_traced, DEFAULT_ENERGY_QUANTUM};
use emob_core::graph::HubRegistry;
use emob_core::itinerary::verify;
use emob_core::oracle::{enumerate_optimal, OracleLimits};
use emob_core::reduction::reduce;
use emob_core::scenario::{generate, Scenario, ScenarioSpec};
use emob_core::{EnergyParams, Itinerary, Mode, ModeSet, UserPreferences};
use proptest::prelude::*;

use common::{close, small_instance};

fn exact(s: &Scenario, hubs: &HubRegistry, q: &emob_core::Query) -> Option<f64> {
    route_exact(&s.graph, hubs, q, DEFAULT_ENERGY_QUANTUM).ok().map(|it| it.total_seconds())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn travel_cost_scales_with_distance(d in 1.0f64..5000.0, v in 0.5f64..30.0, k in 1.0f64..4.0) {
        let p = UserPreferences::default();
        for m in Mode::ALL {
            let a = travel_cost(&p, d, v, m).unwrap();
            let b = travel_cost(&p, d * k, v, m).unwrap();
            prop_assert!(a > 0.0);
            prop_assert!(close(b, a * k, 1e-9 * b));
        }
    }

    #[test]
    fn charge_only_goes_down(soc in 0.0f64..500.0, d in 0.0f64..3000.0) {
        let e = EnergyParams::default();
        for m in Mode::VEHICLES {
            match energy_after_edge(&e, soc, m, d) {
                Some(left) => prop_assert!(left >= 0.0 && left <= soc),
                None => prop_assert!(e.rho(m) * d > soc),
            }
        }
    }

    #[test]
    fn returned_itineraries_reproduce_their_cost(seed in 0u64..100_000) {
        let inst = small_instance(seed);
        let s = &inst.scenario;
        if let Ok(it) = route_exact(&s.graph, &s.hubs, &inst.query, DEFAULT_ENERGY_QUANTUM) {
            prop_assert!(verify(&it, &s.graph, &s.hubs, &inst.query).is_empty());
            let legs: f64 = it.legs().iter().map(|l| l.seconds).sum();
            prop_assert!(close(it.total_seconds(), legs + it.transition_seconds(), 1e-9 * it.total_seconds().max(1.0)));
            prop_assert!(it.transitions() <= inst.query.prefs.t_max);
        }
    }

    #[test]
    fn hubs_never_hurt(seed in 0u64..100_000) {
        let inst = small_instance(seed);
        let s = &inst.scenario;
        let q = &inst.query;
        let with = exact(s, &s.hubs, q);
        let fewer = HubRegistry::from_hubs(s.hubs.iter().skip(1).copied()).unwrap();
        let without = exact(s, &HubRegistry::new(), q);
        let less = exact(s, &fewer, q);
        prop_assert!(with.unwrap() <= less.unwrap() + 1e-9);
        prop_assert!(less.unwrap() <= without.unwrap() + 1e-9);
        // No hubs at all means walking Dijkstra.
        let mut walk = *q;
        walk.prefs = walk.prefs.excluding(ModeSet::VEHICLES, ExclusionPolicy::Hard);
        let oracle = enumerate_optimal(&s.graph, &s.hubs, &walk, &OracleLimits::default()).unwrap();
        prop_assert!(close(without.unwrap(), oracle.itinerary.unwrap().total_seconds(), 1e-9));
    }

    #[test]
    fn more_charge_never_hurts(seed in 0u64..100_000, f in 1.0f64..20.0) {
        let inst = small_instance(seed);
        let s = &inst.scenario;
        let more = s.with_soc_multiplier(f);
        let a = exact(s, &s.hubs, &inst.query);
        let b = exact(&more, &more.hubs, &inst.query);
        prop_assert!(b.unwrap() <= a.unwrap() + 1e-9);
    }

    #[test]
    fn node_visited_expansions_are_ordered(seed in 0u64..100_000) {
        let inst = small_instance(seed);
        let s = &inst.scenario;
        let mut trace = Vec::new();
        let _ = route_paper_traced(&s.graph, &s.hubs, &inst.query, Some(&mut trace));
        prop_assert!(trace.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(trace.len() <= s.graph.num_nodes());
    }

    #[test]
    fn expansions_chain_into_graph_walks(seed in 0u64..100_000) {
        let inst = small_instance(seed);
        let s = &inst.scenario;
        let (rg, map) = reduce(&s.graph, &s.hubs, &inst.query, false).unwrap();
        for e in &rg.edges {
            let path = map.get(e.from, e.to, e.mode).unwrap();
            prop_assert_eq!(path[0], e.from);
            prop_assert_eq!(*path.last().unwrap(), e.to);
            let steps: Vec<_> = path.windows(2).map(|w| (w[0], w[1], e.mode)).collect();
            let it = Itinerary::from_steps(&s.graph, &inst.query, &steps).unwrap();
            let legs: f64 = it.legs().iter().map(|l| l.seconds).sum();
            prop_assert!(close(legs, e.time_s, 1e-9 * e.time_s.max(1.0)));
            prop_assert!(close(it.total_distance_m(), e.distance_m, 1e-9 * e.distance_m.max(1.0)));
            // Consecutive super-edges meet at exactly the junction node.
            if let Some(next) = rg.edges.iter().find(|n| n.from == e.to && n.to != e.from) {
                let tail = map.get(next.from, next.to, next.mode).unwrap();
                prop_assert_eq!(tail[0], *path.last().unwrap());
            }
        }
    }

    #[test]
    fn scenario_files_round_trip(n in 4usize..40, k in 0usize..4, seed in 0u64..1000) {
        let s = generate(&ScenarioSpec::grid(n, k.min(n), seed)).unwrap();
        let back = Scenario::from_json(&s.to_json()).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.to_json(), s.to_json());
    }
}
