mod common;

use std::collections::BTreeSet;

use common::worst_case;
use klss::equilibrium::{solve, ExploitabilityOracle, SolverConfig};
use klss::harness::safety::hidden_mp_blueprint;
use klss::harness::*;
use klss::knowledge::IndependentSetPlan;
use klss::{games, GameBuilder, GameTree, PayoffAddends, Player, SequenceFormStrategy};

#[test]
fn empty_schedule_keeps_blueprint() {
    let g = games::kuhn();
    let oracle = exploitability_oracle(&g);
    let bp = epsilon_uniform_blueprint(&g, &oracle, 0.25, &SolverConfig::default()).unwrap();
    let trace = blueprint_update_schedule(&g, &bp.x, &[], &NestedConfig::default(), &oracle).unwrap();
    assert_eq!(trace.exploitability.len(), 1);
    assert!((trace.exploitability[0] - bp.exploitability).abs() < 1e-12);
}

#[test]
fn hidden_pennies_blueprint_updates_stay_safe() {
    // sequential updates never raise exploitability, unlike nested solving
    let g = games::hidden_mp_counterexample(100).unwrap();
    let oracle = ExploitabilityOracle::with_value(&g, 0.0);
    let x = hidden_mp_blueprint(&g);
    let schedule = breadth_first_schedule(&g);
    let cfg = NestedConfig::default();
    let trace = blueprint_update_schedule(&g, &x, &schedule, &cfg, &oracle).unwrap();
    assert!((trace.exploitability[0] - 0.04).abs() < 1e-9);
    let last = *trace.exploitability.last().unwrap();
    assert!(last <= 0.04 + 5.0 * cfg.solver.tolerance, "{last}");
}

#[test]
fn hidden_pennies_nested_solving_plays_tails() {
    let g = games::hidden_mp_counterexample(100).unwrap();
    let oracle = ExploitabilityOracle::with_value(&g, 0.0);
    let x = hidden_mp_blueprint(&g);
    let rec = nested_klss_everywhere(&g, &x, &NestedConfig::default(), &oracle).unwrap();
    // the oracle's value is checked independently against pure minus strategies
    assert!((worst_case(&g, &x.to_behavior(&g)) + 0.04).abs() < 1e-9);
    assert!((rec.exploitability_after - 1.0).abs() < 1e-4, "{}", rec.exploitability_after);
    for &i in g.decision_infosets(Player::Plus) {
        assert!(rec.strategy.at(i)[1] > 1.0 - 1e-4);
    }
}

#[test]
fn fig1_allocation_to_r1_keeps_r3() {
    let g = games::example_fig1();
    let oracle = exploitability_oracle(&g);
    let x = SequenceFormStrategy::uniform(&g, Player::Plus);
    let r1 = g.find_infoset(Player::Plus, "R1").unwrap();
    let r3 = g.find_infoset(Player::Plus, "R3").unwrap();
    let rec = allocation_play_with(&g, &x, BTreeSet::from([r1]), &NestedConfig::default(), &oracle).unwrap();
    assert_eq!(rec.nested.solves.len(), 1);
    assert_eq!(rec.nested.solves[0].infoset, "R1");
    assert_eq!(rec.nested.strategy.at(r3), &[0.5, 0.5]);
}

#[test]
fn fig1_plan_puts_r1_and_r3_apart() {
    // R1 and R3 share the minus infoset C2', so they must never be sampled together
    let g = games::example_fig1();
    let plan = IndependentSetPlan::new(&g);
    let r1 = g.find_infoset(Player::Plus, "R1").unwrap();
    let r3 = g.find_infoset(Player::Plus, "R3").unwrap();
    assert!(!plan.is_valid(&BTreeSet::from([r1, r3])));
    assert!((plan.probability(r1) - 0.5).abs() < 1e-12);
}

/// Plus picks l/r, minus sees it and answers, plus sees that and moves again.
fn perfect_information() -> GameTree {
    let mut b = GameBuilder::new();
    let root = b.decision(Player::Plus, "", "");
    for a in ["l", "r"] {
        let m = b.decision(Player::Minus, a, a);
        b.connect(root, a, m);
        for c in ["l", "r"] {
            let p = b.decision(Player::Plus, c, c);
            b.connect(m, c, p);
            for (d, u) in [("l", 1.0), ("r", -0.5)] {
                let sign = if (a == c) == (c == d) { 1.0 } else { -1.0 };
                let z = b.terminal(sign * u, d, d);
                b.connect(p, d, z);
            }
        }
    }
    b.build(root).unwrap()
}

#[test]
fn perfect_information_allocation_is_everywhere() {
    let g = perfect_information();
    let plan = IndependentSetPlan::new(&g);
    for &i in g.decision_infosets(Player::Plus) {
        assert_eq!(plan.probability(i), 1.0);
    }
    let oracle = exploitability_oracle(&g);
    let x = SequenceFormStrategy::uniform(&g, Player::Plus);
    let cfg = NestedConfig::default();
    let alloc = allocation_play(&g, &x, 7, &cfg, &oracle).unwrap();
    let all = nested_klss_everywhere(&g, &x, &cfg, &oracle).unwrap();
    assert_eq!(alloc.allowed.len(), g.decision_infosets(Player::Plus).len());
    assert_eq!(alloc.nested.strategy.rows(), all.strategy.rows());
}

#[test]
fn blueprint_affine_check_is_trivial() {
    for name in ["kuhn", "mp-2"] {
        let g = games::by_name(name).unwrap();
        let none = PayoffAddends::new();
        let sol = solve(&g, &none, &SolverConfig::default()).unwrap();
        let oracle = exploitability_oracle(&g);
        let dev = affine_check(&g, &sol.x, &[sol.y.clone()], oracle.value().unwrap()).unwrap();
        assert!(dev <= 2e-6, "{name}: {dev}");
    }
}

#[test]
fn matching_pennies_two_has_one_equilibrium() {
    let g = games::by_name("mp-2").unwrap();
    let none = PayoffAddends::new();
    let cfg = SolverConfig::default();
    let sol = solve(&g, &none, &cfg).unwrap();
    let oracle = exploitability_oracle(&g);
    let rec = nested_klss_everywhere(&g, &sol.x, &NestedConfig::default(), &oracle).unwrap();
    let ys: Vec<_> = klss::equilibrium::sample_equilibria(&g, &none, &cfg, 5).unwrap().into_iter().map(|s| s.y).collect();
    let dev = affine_check(&g, &rec.strategy.to_sequence_form(&g), &ys, oracle.value().unwrap()).unwrap();
    assert!(dev <= 2e-6, "{dev}");
}

#[test]
fn kuhn_nested_solving_reduces_exploitability() {
    let report = run_table1(&[Table1Entry::uniform("kuhn")], &Table1Config::default()).unwrap();
    let row = &report.rows[0];
    assert!((row.blueprint_expl - 0.0124).abs() <= 1e-3);
    assert!((row.post_expl - 0.0015).abs() <= 1e-3, "{}", row.post_expl);
    assert!(row.ratio > 1.0);
}

#[test]
fn kuhn_eps_bet_row() {
    let report = run_table1(&[Table1Entry::action("kuhn", "bet")], &Table1Config::default()).unwrap();
    let row = &report.rows[0];
    assert!((row.blueprint_expl - 0.0035).abs() <= 1e-3, "{}", row.blueprint_expl);
    assert!(row.ratio >= 1.0);
}

#[test]
fn action_floor_is_the_uniform_share() {
    let g = games::kuhn();
    let f = restriction_floors(&g, &Restriction::Action("bet".into()), 0.25).unwrap();
    for &i in g.decision_infosets(Player::Plus) {
        let info = g.infoset(Player::Plus, i);
        let want: Vec<f64> = info.actions.iter().map(|a| if a == "bet" { 0.125 } else { 0.0 }).collect();
        let got = if f.row(i).is_empty() { vec![0.0; want.len()] } else { f.row(i).to_vec() };
        assert_eq!(got, want, "{}", info.label);
    }
}

#[test]
fn table1_csv_is_reproducible() {
    let entries = [Table1Entry::uniform("kuhn"), Table1Entry::action("kuhn", "bet")];
    let cfg = Table1Config { seed: 11, jobs: 2, ..Table1Config::default() };
    let a = run_table1(&entries, &cfg).unwrap().to_csv();
    let b = run_table1(&entries, &cfg).unwrap().to_csv();
    assert_eq!(a, b);
    assert!(a.starts_with(ExperimentReport::CSV_HEADER));
}

#[test]
fn substreams_are_independent_and_stable() {
    use rand::RngCore;
    let a = substream(5, "solver").next_u64();
    assert_eq!(a, substream(5, "solver").next_u64());
    assert_ne!(a, substream(5, "independent-set").next_u64());
    assert_ne!(a, substream(6, "solver").next_u64());
}
