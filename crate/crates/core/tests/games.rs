mod common;

use common::{behavior, best_case, walk_value, worst_case};
use klss::equilibrium::{solve, SolverConfig};
use klss::knowledge::diameter;
use klss::{games, BehaviorStrategy, GameTree, PayoffAddends, Player};
use proptest::prelude::*;

#[test]
fn published_counts_and_diameters() {
    // (game, nodes, infosets, diameter) from the statistics table
    let rows = [
        ("dark-hex-2x2", 471, 94, 13),
        ("goofspiel4-random", 26773, 3608, 4),
        ("goofspiel4-inc", 1077, 162, 4),
        ("kuhn", 58, 12, 3),
        ("leduc3", 9457, 936, 3),
        ("liars-dice5", 51181, 5120, 2),
        ("mp-100", 701, 101, 99),
    ];
    for (name, nodes, infosets, diam) in rows {
        let g = games::by_name(name).unwrap();
        assert_eq!((g.num_nodes(), g.num_decision_infosets(), diameter(&g)), (nodes, infosets, diam), "{name}");
    }
}

#[test]
fn fig1_hand_count() {
    // root, e, four deals, eight minus nodes, sixteen leaves
    let g = games::example_fig1();
    assert_eq!(g.num_nodes(), 1 + 1 + 4 + 8 + 16);
    assert_eq!(g.decision_infosets(Player::Plus).len(), 2);
    assert_eq!(g.decision_infosets(Player::Minus).len(), 3);
}

/// One member of the known Kuhn equilibrium family (alpha = 0), checked
/// against every pure deviation.
fn kuhn_equilibrium(g: &GameTree) -> (BehaviorStrategy, BehaviorStrategy) {
    let third = 1.0 / 3.0;
    let x = behavior(
        g,
        Player::Plus,
        &[
            ("J", &[1.0, 0.0]),
            ("Q", &[1.0, 0.0]),
            ("K", &[1.0, 0.0]),
            ("J/check/bet", &[1.0, 0.0]),
            ("Q/check/bet", &[1.0 - third, third]),
            ("K/check/bet", &[0.0, 1.0]),
        ],
    );
    let y = behavior(
        g,
        Player::Minus,
        &[
            ("J/check", &[1.0 - third, third]),
            ("J/bet", &[1.0, 0.0]),
            ("Q/check", &[1.0, 0.0]),
            ("Q/bet", &[1.0 - third, third]),
            ("K/check", &[0.0, 1.0]),
            ("K/bet", &[0.0, 1.0]),
        ],
    );
    (x, y)
}

#[test]
fn kuhn_value_matches_enumeration() {
    let g = games::kuhn();
    let (x, y) = kuhn_equilibrium(&g);
    let lo = worst_case(&g, &x);
    let hi = best_case(&g, &y);
    assert!((hi - lo).abs() < 1e-12, "analytic profile is not an equilibrium: {lo} {hi}");
    let sol = solve(&g, &PayoffAddends::new(), &SolverConfig::default()).unwrap();
    assert!((sol.value() - lo).abs() <= 1e-6);
    assert!((lo + 1.0 / 36.0).abs() < 1e-12);
}

#[test]
fn solver_output_certified_by_enumeration() {
    for name in ["kuhn", "fig1", "mp-5", "hidden-mp-4"] {
        let g = games::by_name(name).unwrap();
        let cfg = SolverConfig::default();
        let sol = solve(&g, &PayoffAddends::new(), &cfg).unwrap();
        let x = sol.x.to_behavior(&g);
        let y = sol.y.to_behavior(&g);
        let gap = best_case(&g, &y) - worst_case(&g, &x);
        assert!(gap <= cfg.tolerance * (1.0 + 1e-9), "{name}: {gap}");
    }
}

fn random_behavior(g: &GameTree, player: Player, seed: &[f64]) -> BehaviorStrategy {
    let mut b = BehaviorStrategy::uniform(g, player);
    let mut k = 0;
    for &i in g.decision_infosets(player) {
        let m = g.infoset(player, i).actions.len();
        let mut row: Vec<f64> = (0..m)
            .map(|_| {
                k += 1;
                seed[k % seed.len()]
            })
            .collect();
        // occasionally a pure row, to exercise zero-reach branches
        if seed[k % seed.len()] < 0.1 {
            row.iter_mut().enumerate().for_each(|(a, r)| *r = if a == 0 { 1.0 } else { 0.0 });
        }
        let s: f64 = row.iter().sum();
        b.set(i, row.into_iter().map(|r| r / s).collect());
    }
    b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sequence_form_value_matches_tree_walk(
        name in prop::sample::select(vec!["kuhn", "fig1", "leduc2", "goofspiel3-inc", "mp-7"]),
        seed in prop::collection::vec(0.01f64..1.0, 7..31),
    ) {
        let g = games::by_name(name).unwrap();
        let bx = random_behavior(&g, Player::Plus, &seed);
        let by = random_behavior(&g, Player::Minus, &seed[1..]);
        let v = g.expected_value(&PayoffAddends::new(), &bx.to_sequence_form(&g), &by.to_sequence_form(&g)).unwrap();
        prop_assert!((v - walk_value(&g, &bx, &by)).abs() < 1e-10);
    }

    #[test]
    fn expected_value_is_bilinear(
        seed in prop::collection::vec(0.01f64..1.0, 5..23),
        alpha in -2.0f64..3.0,
    ) {
        let g = games::kuhn();
        let none = PayoffAddends::new();
        let x1 = random_behavior(&g, Player::Plus, &seed).to_sequence_form(&g);
        let x2 = random_behavior(&g, Player::Plus, &seed[2..]).to_sequence_form(&g);
        let y = random_behavior(&g, Player::Minus, &seed[1..]).to_sequence_form(&g);
        let mix: Vec<f64> = x1.values().iter().zip(x2.values()).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
        let lhs = g.expected_value_raw(&none, &mix, y.values());
        let rhs = alpha * g.expected_value(&none, &x1, &y).unwrap() + (1.0 - alpha) * g.expected_value(&none, &x2, &y).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn behavior_round_trip_on_reached_infosets(seed in prop::collection::vec(0.01f64..1.0, 5..23)) {
        let g = games::by_name("leduc2").unwrap();
        let b = random_behavior(&g, Player::Plus, &seed);
        let x = b.to_sequence_form(&g);
        x.validate(&g).unwrap();
        let back = x.to_behavior(&g);
        for &i in g.decision_infosets(Player::Plus) {
            if x.reach(&g, i) > 0.0 {
                for (p, q) in b.at(i).iter().zip(back.at(i)) {
                    prop_assert!((p - q).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn json_round_trip_preserves_structure() {
    let g = games::by_name("goofspiel3-random").unwrap();
    let h = GameTree::from_json(&g.to_json()).unwrap();
    assert_eq!(h.num_nodes(), g.num_nodes());
    assert_eq!(h.num_decision_infosets(), g.num_decision_infosets());
    assert_eq!(h.to_json(), g.to_json());
}
