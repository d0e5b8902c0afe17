use std::collections::BTreeMap;

use klss::equilibrium::{run, solve, Floors, SolverConfig};
use klss::knowledge::Order;
use klss::subgame::{make_subgame, margins, maxmargin_to_resolve, resolve_to_maxmargin, GadgetKind, SubgameOptions};
use klss::{games, GameTree, InfosetId, PayoffAddends, Player, SequenceFormStrategy};
use proptest::prelude::*;

fn entries(pairs: &[(&str, &str, f64)]) -> BTreeMap<(String, String), f64> {
    pairs.iter().map(|&(r, c, v)| ((r.to_string(), c.to_string()), v)).collect()
}

fn fig1_gadget(order: Order) -> klss::subgame::GadgetGame {
    let g = games::example_fig1();
    let x = SequenceFormStrategy::uniform(&g, Player::Plus);
    let r1 = g.find_infoset(Player::Plus, "R1").unwrap();
    make_subgame(&g, &PayoffAddends::new(), &x, r1, order, SubgameOptions::default()).unwrap()
}

#[test]
fn appendix_tables() {
    let inf = fig1_gadget(Order::Infinite);
    let expected = entries(&[
        ("R1h", "C0h", 1.0),
        ("R1t", "C0t", 4.0),
        ("R1h", "C2h", 1.0),
        ("R3h", "C2h", 1.5),
        ("R1t", "C2t", 1.5),
        ("R3t", "C2t", 1.0),
        ("R3h", "C4h", 4.0),
        ("R3t", "C4t", 1.0),
    ]);
    assert_eq!(inf.payoff_entries(), expected);

    let one = fig1_gadget(Order::Finite(1));
    let expected = entries(&[("R1h", "C0h", 1.0), ("R1t", "C0t", 4.0), ("R1h", "C2h", 2.0), ("R1t", "C2t", 3.0)]);
    assert_eq!(one.payoff_entries(), expected);
    let b = one.addend_entries();
    assert!((b["C2h"] - 1.5).abs() <= 1e-12);
    assert!((b["C2t"] - 1.0).abs() <= 1e-12);
}

/// Plus strategy of the full game: the blueprint with the gadget's behavior
/// written over the solved subtree.
fn lift(g: &GameTree, gg: &klss::subgame::GadgetGame, x: &SequenceFormStrategy, gx: &SequenceFormStrategy) -> SequenceFormStrategy {
    let mut b = x.to_behavior(g);
    gg.splice(g, &gx.to_behavior(&gg.tree), &mut b);
    b.to_sequence_form(g)
}

/// The gadget's value is the smallest branch margin, rescaled from the
/// branch's knowledge mass to the whole source infoset.
fn check_value_identity(g: &GameTree, x: &SequenceFormStrategy, i: InfosetId, order: Order) {
    let none = PayoffAddends::new();
    let gg = make_subgame(g, &none, x, i, order, SubgameOptions::default()).unwrap();
    let cfg = SolverConfig { tolerance: 1e-9, max_iterations: 400_000, ..SolverConfig::default() };
    let sol = solve(&gg.tree, &gg.addends, &cfg).unwrap();
    let x_new = lift(g, &gg, x, &sol.x);
    let m: BTreeMap<InfosetId, f64> = margins(g, &none, &x_new, x, i, order).unwrap().into_iter().collect();
    let implied = gg.branches.iter().map(|b| m[&b.infoset] * b.full_mass / b.mass).fold(f64::INFINITY, f64::min);
    assert!((implied - sol.value()).abs() <= 1e-6, "{} {implied} vs {}", g.infoset(Player::Plus, i).label, sol.value());
    // the blueprint is feasible, so solving never loses margin
    assert!(sol.value() >= -1e-6);
}

#[test]
fn gadget_value_is_min_margin() {
    let g = games::example_fig1();
    let x = SequenceFormStrategy::uniform(&g, Player::Plus);
    for &i in g.decision_infosets(Player::Plus) {
        check_value_identity(&g, &x, i, Order::Finite(1));
        check_value_identity(&g, &x, i, Order::Infinite);
    }
    let g = games::kuhn();
    let bp = run(&g, &PayoffAddends::new(), &[Floors::epsilon_uniform(&g, Player::Plus, 0.25).unwrap(), Floors::none(&g, Player::Minus)], &SolverConfig::default())
        .unwrap()
        .x;
    for &i in g.decision_infosets(Player::Plus) {
        check_value_identity(&g, &bp, i, Order::Finite(1));
    }
}

#[test]
fn kuhn_transpositions() {
    let g = games::kuhn();
    let x = SequenceFormStrategy::uniform(&g, Player::Plus);
    let none = PayoffAddends::new();
    let merge = SubgameOptions { merge_transpositions: true, ..Default::default() };
    // the deal itself is observed, so root infosets have none
    for label in ["J", "Q", "K"] {
        let i = g.find_infoset(Player::Plus, label).unwrap();
        let plain = make_subgame(&g, &none, &x, i, Order::Finite(1), SubgameOptions::default()).unwrap();
        let merged = make_subgame(&g, &none, &x, i, Order::Finite(1), merge).unwrap();
        assert_eq!(plain.to_json(), merged.to_json(), "{label}");
    }
    // after check-bet with a jack, losing to a queen or a king looks the same
    // from then on; the king section is dominated and dropped
    let i = g.find_infoset(Player::Plus, "J/check/bet").unwrap();
    let merged = make_subgame(&g, &none, &x, i, Order::Finite(1), merge).unwrap();
    let labels: Vec<&str> = merged.branches.iter().map(|b| b.label.as_str()).collect();
    assert_eq!(labels, ["Q/check/bet"]);
}

#[test]
fn reach_lowers_alternatives_by_the_gift() {
    let g = games::by_name("leduc2").unwrap();
    let x = SequenceFormStrategy::uniform(&g, Player::Plus);
    let none = PayoffAddends::new();
    for &i in g.decision_infosets(Player::Plus).iter().step_by(7) {
        let plain = make_subgame(&g, &none, &x, i, Order::Finite(1), SubgameOptions::default()).unwrap();
        let reach = make_subgame(&g, &none, &x, i, Order::Finite(1), SubgameOptions { reach: true, ..Default::default() }).unwrap();
        for (a, b) in plain.branches.iter().zip(&reach.branches) {
            assert!(b.gift >= -1e-12);
            assert!((b.alt - (a.alt - b.gift)).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn resolve_round_trip(idx in 0usize..1000, eps in 0.0f64..0.6) {
        let g = games::by_name("leduc2").unwrap();
        let plus = g.decision_infosets(Player::Plus);
        let i = plus[idx % plus.len()];
        let floors = [Floors::epsilon_uniform(&g, Player::Plus, eps).unwrap(), Floors::none(&g, Player::Minus)];
        let x = run(&g, &PayoffAddends::new(), &floors, &SolverConfig::default().with_max_iterations(50)).unwrap().x;
        prop_assume!(x.reach(&g, i) > 0.0);
        let gg = make_subgame(&g, &PayoffAddends::new(), &x, i, Order::Finite(1), SubgameOptions::default()).unwrap();
        let r = maxmargin_to_resolve(&gg).unwrap();
        prop_assert_eq!(r.kind, GadgetKind::Resolve);
        prop_assert!(maxmargin_to_resolve(&r).is_err());
        let back = resolve_to_maxmargin(&r).unwrap();
        prop_assert_eq!(back.to_json(), gg.to_json());
    }
}
