//! Brute-force oracles that share no code with the solver: expected values by
//! walking the tree, best responses by enumerating pure strategies.
#![allow(dead_code)]

use klss::game::NodeKind;
use klss::{BehaviorStrategy, GameTree, NodeId, Player};

/// Expected utility to plus, computed by recursion over the tree.
pub fn walk_value(g: &GameTree, x: &BehaviorStrategy, y: &BehaviorStrategy) -> f64 {
    fn go(g: &GameTree, v: NodeId, s: [&BehaviorStrategy; 2]) -> f64 {
        let n = g.node(v);
        match &n.kind {
            NodeKind::Terminal(u) => *u,
            NodeKind::Nature(p) => n.children.iter().zip(p).map(|(&c, &q)| q * go(g, c, s)).sum(),
            NodeKind::Decision(pl) => {
                let row = s[pl.index()].at(g.infoset_of(*pl, v));
                n.children.iter().zip(row).map(|(&c, &q)| if q == 0.0 { 0.0 } else { q * go(g, c, s) }).sum()
            }
        }
    }
    go(g, g.root(), [x, y])
}

/// Every pure behavior strategy of `player`.
pub fn pure_strategies(g: &GameTree, player: Player) -> Vec<BehaviorStrategy> {
    let infosets = g.decision_infosets(player).to_vec();
    let arity: Vec<usize> = infosets.iter().map(|&i| g.infoset(player, i).actions.len()).collect();
    let total: usize = arity.iter().product();
    assert!(total <= 1 << 16, "too many pure strategies to enumerate");
    (0..total)
        .map(|mut code| {
            let mut b = BehaviorStrategy::uniform(g, player);
            for (&i, &m) in infosets.iter().zip(&arity) {
                let mut row = vec![0.0; m];
                row[code % m] = 1.0;
                code /= m;
                b.set(i, row);
            }
            b
        })
        .collect()
}

/// `min_y u(x, y)` over pure minus strategies.
pub fn worst_case(g: &GameTree, x: &BehaviorStrategy) -> f64 {
    pure_strategies(g, Player::Minus).iter().map(|y| walk_value(g, x, y)).fold(f64::INFINITY, f64::min)
}

/// `max_x u(x, y)` over pure plus strategies.
pub fn best_case(g: &GameTree, y: &BehaviorStrategy) -> f64 {
    pure_strategies(g, Player::Plus).iter().map(|x| walk_value(g, x, y)).fold(f64::NEG_INFINITY, f64::max)
}

/// Behavior strategy from `(label, row)` pairs; other infosets uniform.
pub fn behavior(g: &GameTree, player: Player, rows: &[(&str, &[f64])]) -> BehaviorStrategy {
    let mut b = BehaviorStrategy::uniform(g, player);
    for (label, row) in rows {
        b.set(g.find_infoset(player, label).unwrap(), row.to_vec());
    }
    b
}
