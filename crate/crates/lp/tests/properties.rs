use emob_lp::{parse_lp, solve, to_lp_string, LinearModel, Limits, Sense, Status};
use proptest::prelude::*;

fn sense_of(k: u8) -> Sense {
    match k % 3 {
        0 => Sense::Le,
        1 => Sense::Ge,
        _ => Sense::Eq,
    }
}

/// Small pure-binary models with integer data, so brute force is exact.
fn binary_model() -> impl Strategy<Value = LinearModel> {
    (1usize..=7, 0usize..=5).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-9i32..=9, n),
            prop::collection::vec((prop::collection::vec(-4i32..=4, n), 0u8..3, -6i32..=8), m),
        )
            .prop_map(move |(costs, rows)| {
                let mut lm = LinearModel::new();
                for (j, c) in costs.iter().enumerate() {
                    lm.add_binary(format!("b{j}"), *c as f64);
                }
                for (i, (coef, s, rhs)) in rows.into_iter().enumerate() {
                    lm.add_row(
                        format!("r{i}"),
                        coef.iter().enumerate().map(|(j, &a)| (j, a as f64)),
                        sense_of(s),
                        rhs as f64,
                    );
                }
                lm
            })
    })
}

fn brute_force(m: &LinearModel) -> Option<f64> {
    let n = m.num_columns();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << n) {
        let x: Vec<f64> = (0..n).map(|j| ((mask >> j) & 1) as f64).collect();
        if m.max_violation(&x) <= 1e-9 {
            let v = m.evaluate(&x);
            if best.is_none_or(|b| v < b) {
                best = Some(v);
            }
        }
    }
    best
}

fn mixed_model() -> impl Strategy<Value = LinearModel> {
    let col = (-1e6f64..1e6, -50.0f64..50.0, 0.0f64..100.0, 0u8..5);
    (prop::collection::vec(col, 1..12), prop::collection::vec(
        (prop::collection::vec((0usize..12, -1e3f64..1e3), 0..6), 0u8..3, -1e4f64..1e4),
        0..8,
    ))
        .prop_map(|(cols, rows)| {
            let mut lm = LinearModel::new();
            for (j, (cost, lo, width, kind)) in cols.iter().enumerate() {
                let name = format!("c_{j}");
                match kind {
                    0 => {
                        lm.add_binary(name, *cost);
                    }
                    1 => {
                        lm.add_column(name, *cost, f64::NEG_INFINITY, f64::INFINITY, false);
                    }
                    2 => {
                        lm.add_column(name, *cost, lo.floor(), lo.floor() + width.floor(), true);
                    }
                    3 => {
                        lm.add_column(name, *cost, *lo, *lo, false);
                    }
                    _ => {
                        lm.add_column(name, *cost, *lo, lo + width, false);
                    }
                }
            }
            let n = cols.len();
            for (i, (terms, s, rhs)) in rows.into_iter().enumerate() {
                lm.add_row(
                    format!("row.{i}"),
                    terms.into_iter().map(|(j, a)| (j % n, a)),
                    sense_of(s),
                    rhs,
                );
            }
            lm
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn branch_and_bound_matches_enumeration(m in binary_model()) {
        let res = solve(&m, &Limits::default()).unwrap();
        match brute_force(&m) {
            None => prop_assert_eq!(res.status, Status::Infeasible),
            Some(best) => {
                prop_assert_eq!(res.status, Status::Optimal);
                let got = res.objective.unwrap();
                prop_assert!((got - best).abs() <= 1e-9, "got {got}, expected {best}");
                prop_assert!(m.max_violation(res.values.as_ref().unwrap()) <= 1e-6);
            }
        }
    }

    #[test]
    fn lp_text_round_trips(m in mixed_model()) {
        let text = to_lp_string(&m).unwrap();
        let back = parse_lp(&text, true).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(to_lp_string(&back).unwrap(), text);
    }
}
