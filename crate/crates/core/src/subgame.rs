//! Gadget games for knowledge-limited subgame solving: the maxmargin gadget
//! built from an order-k knowledge set, its resolve form, transposition
//! detection, and margin measurement.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::{Hash, Hasher};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{counterfactual_values, infoset_children, Orientation};
use crate::error::{Error, Result};
use crate::game::{GameBuilder, GameTree, InfosetId, NodeId, NodeKind, PayoffAddends, Player, SeqId, EMPTY_SEQ};
use crate::knowledge::{infoset_knowledge_set, KnowledgeSet, Order};
use crate::strategy::{BehaviorStrategy, SequenceFormStrategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GadgetKind {
    /// Minus picks the branch at the root.
    Maxmargin,
    /// Nature picks the branch; minus may exit for its alternative value.
    Resolve,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgameOptions {
    /// Lower each alternative value by the gift minus forwent on the way to it.
    pub reach: bool,
    /// Drop branches that are transpositions of kept ones (order 1 only).
    pub merge_transpositions: bool,
    /// Seed for the order in which transposed branches are considered.
    pub seed: u64,
}

/// One root branch of a gadget: a minus infoset meeting the knowledge set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    /// Source minus infoset.
    pub infoset: InfosetId,
    pub label: String,
    /// Source nodes of the infoset inside the knowledge set.
    pub members: Vec<NodeId>,
    /// `D`: nature-and-plus reach of `members`.
    pub mass: f64,
    /// Reach of the whole source infoset.
    pub full_mass: f64,
    /// Constant subtracted on entering the branch, in branch units (per `D`).
    pub alt: f64,
    /// Gift deducted from `alt` when the reach option is on, in branch units.
    pub gift: f64,
    /// Gadget minus sequence that commits to this branch.
    pub entry_seq: SeqId,
}

/// A gadget game together with its payoff addends and provenance.
#[derive(Clone, Debug)]
pub struct GadgetGame {
    pub tree: GameTree,
    pub addends: PayoffAddends,
    pub kind: GadgetKind,
    pub branches: Vec<Branch>,
    /// Source plus infoset the gadget was built for.
    pub infoset: InfosetId,
    pub order: Order,
    pub options: SubgameOptions,
    pub knowledge: KnowledgeSet,
    /// Source node of every gadget node (`None` for gadget scaffolding).
    provenance: Vec<Option<NodeId>>,
    /// Maxmargin addends retained by the resolve form for an exact round trip.
    maxmargin_addends: Option<PayoffAddends>,
}

impl GadgetGame {
    pub fn source_node(&self, v: NodeId) -> Option<NodeId> {
        self.provenance[v]
    }

    /// Pairs `(gadget plus infoset, source plus infoset)` for decision infosets.
    pub fn plus_infoset_map(&self, source: &GameTree) -> Vec<(InfosetId, InfosetId)> {
        self.tree
            .decision_infosets(Player::Plus)
            .iter()
            .map(|&i| {
                let v = self.tree.infoset(Player::Plus, i).members[0];
                let src = self.provenance[v].expect("plus decision nodes are copies");
                (i, source.infoset_of(Player::Plus, src))
            })
            .collect()
    }

    /// Copies the gadget behavior into `target` at the corresponding source
    /// infosets; returns the source infosets written.
    pub fn splice(&self, source: &GameTree, gadget_behavior: &BehaviorStrategy, target: &mut BehaviorStrategy) -> Vec<InfosetId> {
        self.plus_infoset_map(source)
            .into_iter()
            .map(|(g, s)| {
                target.set(s, gadget_behavior.at(g).to_vec());
                s
            })
            .collect()
    }

    /// Nonzero payoff matrix entries keyed by short sequence labels.
    pub fn payoff_entries(&self) -> BTreeMap<(String, String), f64> {
        let t = &self.tree;
        let mut out = BTreeMap::new();
        for z in t.terminals() {
            if z.weight != 0.0 {
                let key = (t.sequence_short_label(Player::Plus, z.seq[0]), t.sequence_short_label(Player::Minus, z.seq[1]));
                *out.entry(key).or_insert(0.0) += z.weight;
            }
        }
        out
    }

    /// Payoff addends keyed by short minus sequence labels.
    pub fn addend_entries(&self) -> BTreeMap<String, f64> {
        self.addends.iter().map(|((_, t), b)| (self.tree.sequence_short_label(Player::Minus, t), b)).collect()
    }

    /// Human-readable branches, payoff entries and addends.
    pub fn dump(&self) -> String {
        use std::fmt::Write as _;
        let mut out = format!("gadget {:?} order {}
", self.kind, self.order);
        for b in &self.branches {
            let _ = writeln!(out, "branch {} mass {} alt {} gift {}", b.label, b.mass, b.alt, b.gift);
        }
        out.push_str("A
");
        for ((r, c), v) in self.payoff_entries() {
            let _ = writeln!(out, "  {r} {c} {v}");
        }
        out.push_str("B
");
        for (c, v) in self.addend_entries() {
            let _ = writeln!(out, "  ∅ {c} {v}");
        }
        out
    }

    /// Serializable view: tree, addends and branch records.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct View<'a> {
            kind: GadgetKind,
            order: String,
            game: crate::game::NodeSpec,
            addends: Vec<(String, f64)>,
            branches: &'a [Branch],
        }
        let addends = self
            .addends
            .iter()
            .map(|((_, t), b)| (self.tree.sequence_label(Player::Minus, t), b))
            .collect();
        let view = View { kind: self.kind, order: self.order.to_string(), game: self.tree.to_spec(), addends, branches: &self.branches };
        serde_json::to_string_pretty(&view).expect("gadget views serialize")
    }
}

/// Labels made unique by appending `#id` where two ids would render the same.
fn unique_labels(ids: &[InfosetId], label: impl Fn(InfosetId) -> String) -> HashMap<InfosetId, String> {
    let mut count: HashMap<String, usize> = HashMap::new();
    for &i in ids {
        *count.entry(label(i)).or_default() += 1;
    }
    ids.iter()
        .map(|&i| {
            let l = label(i);
            let l = if count[&l] > 1 || l.is_empty() { format!("{l}#{i}") } else { l };
            (i, l)
        })
        .collect()
}

/// Recursively copies the source subtree at `v`, overriding the root's observations.
fn copy_subtree(source: &GameTree, b: &mut GameBuilder, v: NodeId, root_obs: Option<[String; 2]>, prov: &mut Vec<Option<NodeId>>) -> NodeId {
    let node = source.node(v);
    let [op, om] = root_obs.unwrap_or_else(|| node.obs.clone());
    let id = match &node.kind {
        NodeKind::Nature(_) => b.nature(op, om),
        NodeKind::Decision(p) => b.decision(*p, op, om),
        NodeKind::Terminal(u) => b.terminal(*u, op, om),
    };
    prov.push(Some(v));
    debug_assert_eq!(prov.len(), id + 1);
    for (a, &c) in node.children.iter().enumerate() {
        let child = copy_subtree(source, b, c, None, prov);
        let p = match &node.kind {
            NodeKind::Nature(probs) => probs[a],
            _ => 0.0,
        };
        b.connect_chance(id, node.actions[a].clone(), child, p);
    }
    id
}

/// Minus infoset ancestors of `j` (inclusive) in the minus infoset tree.
fn infoset_ancestors(game: &GameTree, j: InfosetId) -> impl Iterator<Item = InfosetId> + '_ {
    std::iter::successors(Some(j), move |&i| game.infoset(Player::Minus, i).parent_infoset)
}

/// Reach `Σ p(h) x(h)` of a node set.
fn reach(game: &GameTree, x: &SequenceFormStrategy, nodes: &[NodeId]) -> f64 {
    nodes.iter().map(|&h| game.chance_reach(h) * x.values()[game.seq_of(Player::Plus, h)]).sum()
}

struct BranchPlan {
    infoset: InfosetId,
    members: Vec<NodeId>,
    mass: f64,
    full_mass: f64,
    alt: f64,
    gift: f64,
    /// Constants per source minus sequence (entry constants under `None`).
    constants: BTreeMap<Option<SeqId>, f64>,
}

/// Builds the maxmargin gadget for plus infoset `infoset` under blueprint `x`.
pub fn make_subgame(
    game: &GameTree,
    addends: &PayoffAddends,
    x: &SequenceFormStrategy,
    infoset: InfosetId,
    order: Order,
    options: SubgameOptions,
) -> Result<GadgetGame> {
    let order = order.validate()?;
    if !order.is_odd_or_infinite() {
        return Err(Error::BadOrder(format!("order {order} is even; only odd orders or infinity are supported")));
    }
    if options.merge_transpositions && order != Order::Finite(1) {
        return Err(Error::BadOrder("merging transpositions requires order 1".into()));
    }
    if !addends.is_top_row_only() {
        return Err(Error::BadParameter("payoff addends must lie in plus's empty-sequence row".into()));
    }
    game.check_dims(Player::Plus, x.values())?;
    let inf = game.infoset(Player::Plus, infoset);
    if !inf.decision {
        return Err(Error::UnknownInfoset(inf.label.clone()));
    }
    if reach(game, x, &inf.members) <= 0.0 {
        return Err(Error::UnreachableInfoset(inf.label.clone()));
    }
    let knowledge = infoset_knowledge_set(game, Player::Plus, infoset, order)?;
    let in_k: HashSet<NodeId> = knowledge.members.iter().copied().collect();

    let mut groups: BTreeMap<InfosetId, Vec<NodeId>> = BTreeMap::new();
    for &h in &knowledge.members {
        groups.entry(game.infoset_of(Player::Minus, h)).or_default().push(h);
    }
    let cbv = counterfactual_values(game, addends, x, Orientation::Min)?;
    let mut plans = Vec::new();
    for (i0, members) in groups {
        let mass = reach(game, x, &members);
        if mass <= 0.0 {
            continue;
        }
        let full_mass = cbv.mass[i0];
        let mut alt = cbv.raw[i0] / mass;
        let mut gift = 0.0;
        if options.reach {
            gift = reach_gift(game, &cbv, i0) * full_mass / mass;
            alt -= gift;
        }
        let constants = branch_constants(game, addends, x, i0, &in_k, mass);
        plans.push(BranchPlan { infoset: i0, members, mass, full_mass, alt, gift, constants });
    }
    if options.merge_transpositions {
        plans = merge_transposed(game, x, plans, options.seed)?;
    }
    build_gadget(game, x, plans, infoset, order, options, knowledge)
}

/// `ĝ(I₀)`: total gift over minus's own earlier choices leading to `i0`.
fn reach_gift(game: &GameTree, cbv: &crate::equilibrium::CounterfactualValueTable, i0: InfosetId) -> f64 {
    let seqs = game.sequences(Player::Minus);
    let mut total = 0.0;
    let mut s = game.infoset(Player::Minus, i0).parent_seq;
    while let Some(j) = seqs[s].infoset {
        if let (Some(va), Some(v)) = (cbv.sequence_value(s), cbv.infoset_value(j)) {
            total += va - v;
        }
        s = game.infoset(Player::Minus, j).parent_seq;
    }
    total
}

/// Fixed-plus payoffs below `i0` outside the knowledge set, and prior addends
/// below `i0`, all divided by `mass`, per source minus sequence.
fn branch_constants(
    game: &GameTree,
    addends: &PayoffAddends,
    x: &SequenceFormStrategy,
    i0: InfosetId,
    in_k: &HashSet<NodeId>,
    mass: f64,
) -> BTreeMap<Option<SeqId>, f64> {
    let entry = game.infoset(Player::Minus, i0).parent_seq;
    let key = |t: SeqId| if t == entry { None } else { Some(t) };
    let mut c: BTreeMap<Option<SeqId>, f64> = BTreeMap::new();
    for &h in &game.infoset(Player::Minus, i0).members {
        if in_k.contains(&h) {
            continue;
        }
        for z in game.subtree(h) {
            if let Some(u) = game.node(z).utility() {
                let w = u * game.chance_reach(z) * x.values()[game.seq_of(Player::Plus, z)];
                if w != 0.0 {
                    *c.entry(key(game.seq_of(Player::Minus, z))).or_default() += w / mass;
                }
            }
        }
    }
    for (t, b) in addends.top_row() {
        if let Some(j) = game.sequences(Player::Minus)[t].infoset {
            if infoset_ancestors(game, j).any(|a| a == i0) {
                *c.entry(Some(t)).or_default() += b / mass;
            }
        }
    }
    c
}

/// Folds constants on sequences absent from the gadget into their nearest
/// present ancestor, choosing minus's best action at absent infosets.
fn collapse_phantoms(game: &GameTree, i0: InfosetId, present: &HashSet<InfosetId>, c: &mut BTreeMap<Option<SeqId>, f64>) {
    let entry = game.infoset(Player::Minus, i0).parent_seq;
    let children = infoset_children(game, Player::Minus);
    // collect the infoset subtree below i0, deepest first
    let mut below = Vec::new();
    let mut stack = vec![i0];
    while let Some(j) = stack.pop() {
        below.push(j);
        stack.extend(children[j].iter().map(|&(_, c)| c));
    }
    below.sort_by_key(|&j| std::cmp::Reverse(game.node(game.infoset(Player::Minus, j).members[0]).depth));
    let key = |t: SeqId| if t == entry { None } else { Some(t) };
    for j in below {
        if present.contains(&j) {
            continue;
        }
        let inf = game.infoset(Player::Minus, j);
        if inf.decision {
            let best = (0..inf.actions.len())
                .map(|a| c.remove(&Some(inf.seq(a))).unwrap_or(0.0))
                .fold(f64::INFINITY, f64::min);
            if best != 0.0 {
                *c.entry(key(inf.parent_seq)).or_default() += best;
            }
        }
    }
}

fn build_gadget(
    game: &GameTree,
    x: &SequenceFormStrategy,
    plans: Vec<BranchPlan>,
    infoset: InfosetId,
    order: Order,
    options: SubgameOptions,
    knowledge: KnowledgeSet,
) -> Result<GadgetGame> {
    if plans.is_empty() {
        return Err(Error::UnreachableInfoset(game.infoset(Player::Plus, infoset).label.clone()));
    }
    let minus_ids: Vec<InfosetId> = plans.iter().map(|p| p.infoset).collect();
    let minus_labels = unique_labels(&minus_ids, |i| game.infoset(Player::Minus, i).label.clone());
    let plus_ids: Vec<InfosetId> = {
        let mut v: Vec<InfosetId> = plans
            .iter()
            .flat_map(|p| p.members.iter().map(|&h| game.infoset_of(Player::Plus, h)))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let plus_labels = unique_labels(&plus_ids, |i| game.infoset(Player::Plus, i).label.clone());

    let mut b = GameBuilder::new();
    let mut prov: Vec<Option<NodeId>> = Vec::new();
    let root = b.decision(Player::Minus, "", "");
    prov.push(None);
    for plan in &plans {
        let nat = b.nature("", "");
        prov.push(None);
        b.connect(root, minus_labels[&plan.infoset].clone(), nat);
        for &h in &plan.members {
            let p = game.chance_reach(h) * x.values()[game.seq_of(Player::Plus, h)] / plan.mass;
            let obs = [plus_labels[&game.infoset_of(Player::Plus, h)].clone(), minus_labels[&plan.infoset].clone()];
            let child = copy_subtree(game, &mut b, h, Some(obs), &mut prov);
            b.connect_chance(nat, format!("n{h}"), child, p);
        }
    }
    let (tree, ids) = b.build_with_ids(root)?;
    let mut provenance = vec![None; tree.num_nodes()];
    for (old, &new) in ids.iter().enumerate() {
        provenance[new] = prov[old];
    }

    // source minus infoset -> gadget minus infoset, for copied infosets
    let mut minus_map: HashMap<InfosetId, InfosetId> = HashMap::new();
    for v in 0..tree.num_nodes() {
        if let Some(s) = provenance[v] {
            minus_map.insert(game.infoset_of(Player::Minus, s), tree.infoset_of(Player::Minus, v));
        }
    }
    let present: HashSet<InfosetId> = minus_map.keys().copied().collect();
    let root_inf = tree.infoset(Player::Minus, tree.infoset_of(Player::Minus, tree.root()));
    let mut addends = PayoffAddends::new();
    let mut branches = Vec::new();
    for (k, mut plan) in plans.into_iter().enumerate() {
        collapse_phantoms(game, plan.infoset, &present, &mut plan.constants);
        let entry_seq = root_inf.seq(k);
        addends.add(EMPTY_SEQ, entry_seq, -plan.alt);
        for (t, v) in &plan.constants {
            let gt = match t {
                None => entry_seq,
                Some(t) => {
                    let seq = game.sequences(Player::Minus)[*t];
                    let j = seq.infoset.expect("non-entry sequences belong to an infoset");
                    tree.infoset(Player::Minus, minus_map[&j]).seq(seq.action)
                }
            };
            addends.add(EMPTY_SEQ, gt, *v);
        }
        branches.push(Branch {
            infoset: plan.infoset,
            label: minus_labels[&plan.infoset].clone(),
            members: plan.members,
            mass: plan.mass,
            full_mass: plan.full_mass,
            alt: plan.alt,
            gift: plan.gift,
            entry_seq,
        });
    }
    Ok(GadgetGame {
        tree,
        addends,
        kind: GadgetKind::Maxmargin,
        branches,
        infoset,
        order,
        options,
        knowledge,
        provenance,
        maxmargin_addends: None,
    })
}

/// Hash of a node's own observations and its future: actions, both players'
/// observations on entering each child, nature probabilities and terminal
/// utilities.
pub fn transposition_key(game: &GameTree, v: NodeId) -> u64 {
    let mut memo = HashMap::new();
    let mut h = DefaultHasher::new();
    game.node(v).obs.hash(&mut h);
    key_rec(game, v, &mut memo).hash(&mut h);
    h.finish()
}

fn key_rec(game: &GameTree, v: NodeId, memo: &mut HashMap<NodeId, u64>) -> u64 {
    if let Some(&k) = memo.get(&v) {
        return k;
    }
    let node = game.node(v);
    let mut h = DefaultHasher::new();
    match &node.kind {
        NodeKind::Nature(probs) => {
            0u8.hash(&mut h);
            for p in probs {
                p.to_bits().hash(&mut h);
            }
        }
        NodeKind::Decision(p) => (1u8, p.index()).hash(&mut h),
        NodeKind::Terminal(u) => (2u8, u.to_bits()).hash(&mut h),
    }
    for (a, &c) in node.children.iter().enumerate() {
        node.actions[a].hash(&mut h);
        game.node(c).obs.hash(&mut h);
        key_rec(game, c, memo).hash(&mut h);
    }
    let k = h.finish();
    memo.insert(v, k);
    k
}

/// Whether an observer who sees everything from `a` or `b` on, including
/// the observations made at the nodes themselves, cannot tell them apart.
pub fn are_transpositions(game: &GameTree, a: NodeId, b: NodeId) -> bool {
    game.node(a).obs == game.node(b).obs && same_future(game, a, b)
}

fn same_future(game: &GameTree, a: NodeId, b: NodeId) -> bool {
    let (na, nb) = (game.node(a), game.node(b));
    let same_kind = match (&na.kind, &nb.kind) {
        (NodeKind::Nature(p), NodeKind::Nature(q)) => p == q,
        (NodeKind::Decision(p), NodeKind::Decision(q)) => p == q,
        (NodeKind::Terminal(u), NodeKind::Terminal(w)) => u == w,
        _ => false,
    };
    same_kind
        && na.actions == nb.actions
        && na.children.iter().zip(&nb.children).all(|(&c, &d)| {
            game.node(c).obs == game.node(d).obs && same_future(game, c, d)
        })
}

/// Relative path of a source minus sequence below branch infoset `i0`.
fn relative_path(game: &GameTree, i0: InfosetId, t: Option<SeqId>) -> String {
    let root_len = game.infoset(Player::Minus, i0).label.len();
    let mut parts = Vec::new();
    let mut cur = t;
    while let Some(s) = cur {
        let seq = game.sequences(Player::Minus)[s];
        let Some(j) = seq.infoset else { break };
        let inf = game.infoset(Player::Minus, j);
        parts.push(format!("{}:{}", inf.label.get(root_len..).unwrap_or(""), inf.actions[seq.action]));
        cur = if j == i0 { None } else { Some(inf.parent_seq) };
    }
    parts.reverse();
    parts.join("|")
}

fn section(game: &GameTree, plan: &BranchPlan) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    out.insert(String::new(), -plan.alt);
    for (t, v) in &plan.constants {
        let key = if t.is_none() { String::new() } else { relative_path(game, plan.infoset, *t) };
        *out.entry(key).or_default() += v;
    }
    out
}

/// `a ≤ b` entrywise, missing entries read as zero.
fn weakly_below(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> bool {
    a.keys().chain(b.keys()).all(|k| a.get(k).copied().unwrap_or(0.0) <= b.get(k).copied().unwrap_or(0.0) + 1e-12)
}

fn merge_transposed(game: &GameTree, x: &SequenceFormStrategy, plans: Vec<BranchPlan>, seed: u64) -> Result<Vec<BranchPlan>> {
    let signature = |p: &BranchPlan| -> Vec<(u64, u64, NodeId)> {
        let mut s: Vec<(u64, u64, NodeId)> = p
            .members
            .iter()
            .map(|&h| {
                let prob = game.chance_reach(h) * x.values()[game.seq_of(Player::Plus, h)] / p.mass;
                (transposition_key(game, h), (prob * 1e12).round().to_bits(), h)
            })
            .collect();
        s.sort_unstable();
        s
    };
    let sigs: Vec<_> = plans.iter().map(signature).collect();
    let mut order: Vec<usize> = (0..plans.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut kept: Vec<usize> = Vec::new();
    for idx in order {
        let twin = kept.iter().position(|&k| {
            sigs[k].len() == sigs[idx].len() && sigs[k].iter().zip(&sigs[idx]).all(|(a, b)| a.0 == b.0 && a.1 == b.1)
        });
        let Some(pos) = twin else {
            kept.push(idx);
            continue;
        };
        let other = kept[pos];
        for (a, b) in sigs[other].iter().zip(&sigs[idx]) {
            if !are_transpositions(game, a.2, b.2) {
                return Err(Error::TranspositionCollision(a.2, b.2));
            }
        }
        let (s_kept, s_new) = (section(game, &plans[other]), section(game, &plans[idx]));
        // minus minimizes, so the entrywise larger section is never preferred
        if !weakly_below(&s_kept, &s_new) && weakly_below(&s_new, &s_kept) {
            kept[pos] = idx;
        }
    }
    kept.sort_by_key(|&k| plans[k].infoset);
    let keep: HashSet<usize> = kept.into_iter().collect();
    Ok(plans.into_iter().enumerate().filter(|(k, _)| keep.contains(k)).map(|(_, p)| p).collect())
}

/// Maps a minus sequence of `old` to `new` through a node correspondence.
fn map_minus_seq(old: &GameTree, new: &GameTree, node_map: &[Option<NodeId>], t: SeqId) -> Option<SeqId> {
    if t == EMPTY_SEQ {
        return Some(EMPTY_SEQ);
    }
    let seq = old.sequences(Player::Minus)[t];
    let j = seq.infoset?;
    let v = old.infoset(Player::Minus, j).members.iter().find_map(|&v| node_map[v])?;
    Some(new.infoset(Player::Minus, new.infoset_of(Player::Minus, v)).seq(seq.action))
}

/// Copies a subtree of a gadget, recording the old node of every new node.
fn copy_gadget_subtree(old: &GameTree, b: &mut GameBuilder, v: NodeId, origin: &mut Vec<Option<NodeId>>) -> NodeId {
    let start = origin.len();
    let id = copy_subtree(old, b, v, None, origin);
    debug_assert!(start <= id);
    id
}

fn rebuild(
    gg: &GadgetGame,
    kind: GadgetKind,
    build: impl FnOnce(&mut GameBuilder, &mut Vec<Option<NodeId>>) -> (NodeId, Vec<(NodeId, usize)>),
    scale: f64,
    maxmargin_addends: Option<PayoffAddends>,
) -> Result<GadgetGame> {
    let mut b = GameBuilder::new();
    let mut origin: Vec<Option<NodeId>> = Vec::new();
    let (root, entry_nodes) = build(&mut b, &mut origin);
    let (tree, ids) = b.build_with_ids(root)?;
    let mut new_of_old = vec![None; gg.tree.num_nodes()];
    let mut provenance = vec![None; tree.num_nodes()];
    for (bid, &new) in ids.iter().enumerate() {
        if let Some(old) = origin[bid] {
            new_of_old[old] = Some(new);
            provenance[new] = gg.provenance[old];
        }
    }
    let entry_seqs: Vec<SeqId> = entry_nodes
        .iter()
        .map(|&(bnode, action)| {
            let v = ids[bnode];
            tree.infoset(Player::Minus, tree.infoset_of(Player::Minus, v)).seq(action)
        })
        .collect();
    let old_entries: HashMap<SeqId, usize> = gg.branches.iter().enumerate().map(|(k, br)| (br.entry_seq, k)).collect();
    let addends = match (&maxmargin_addends, kind) {
        (_, GadgetKind::Resolve) | (None, GadgetKind::Maxmargin) => {
            let mut out = PayoffAddends::new();
            for ((s, t), v) in gg.addends.iter() {
                let nt = match old_entries.get(&t) {
                    Some(&k) => entry_seqs[k],
                    None => map_minus_seq(&gg.tree, &tree, &new_of_old, t)
                        .ok_or_else(|| Error::InvalidTree(format!("addend sequence {t} has no counterpart")))?,
                };
                out.add(s, nt, v * scale);
            }
            out
        }
        (Some(orig), GadgetKind::Maxmargin) => orig.clone(),
    };
    let branches = gg
        .branches
        .iter()
        .zip(&entry_seqs)
        .map(|(br, &e)| Branch { entry_seq: e, ..br.clone() })
        .collect();
    Ok(GadgetGame {
        tree,
        addends,
        kind,
        branches,
        infoset: gg.infoset,
        order: gg.order,
        options: gg.options,
        knowledge: gg.knowledge.clone(),
        provenance,
        maxmargin_addends: if kind == GadgetKind::Resolve { maxmargin_addends } else { None },
    })
}

/// Nature picks a branch uniformly; minus then chooses to exit (utility 0)
/// or play the branch. Addends are scaled by 1/N.
pub fn maxmargin_to_resolve(gg: &GadgetGame) -> Result<GadgetGame> {
    if gg.kind != GadgetKind::Maxmargin {
        return Err(Error::WrongKind { expected: "maxmargin".into() });
    }
    let old = &gg.tree;
    let n = gg.branches.len();
    let build = |b: &mut GameBuilder, origin: &mut Vec<Option<NodeId>>| {
        let root = b.nature("", "");
        origin.push(None);
        let mut entries = Vec::new();
        for (k, br) in gg.branches.iter().enumerate() {
            let m = b.decision(Player::Minus, "", br.label.clone());
            origin.push(None);
            b.connect_chance(root, br.label.clone(), m, 1.0 / n as f64);
            let exit = b.terminal(0.0, "", "");
            origin.push(None);
            b.connect(m, "exit", exit);
            let sub = copy_gadget_subtree(old, b, old.node(old.root()).children[k], origin);
            b.connect(m, "play", sub);
            entries.push((m, 1));
        }
        (root, entries)
    };
    rebuild(gg, GadgetKind::Resolve, build, 1.0 / n as f64, Some(gg.addends.clone()))
}

/// Inverse of [`maxmargin_to_resolve`]: minus picks the branch at the root.
pub fn resolve_to_maxmargin(gg: &GadgetGame) -> Result<GadgetGame> {
    if gg.kind != GadgetKind::Resolve {
        return Err(Error::WrongKind { expected: "resolve".into() });
    }
    let old = &gg.tree;
    let n = gg.branches.len();
    let build = |b: &mut GameBuilder, origin: &mut Vec<Option<NodeId>>| {
        let root = b.decision(Player::Minus, "", "");
        origin.push(None);
        for (k, br) in gg.branches.iter().enumerate() {
            let m = old.node(old.root()).children[k];
            let play = old.node(m).actions.iter().position(|a| a == "play").expect("resolve branches have a play action");
            let sub = copy_gadget_subtree(old, b, old.node(m).children[play], origin);
            b.connect(root, br.label.clone(), sub);
        }
        (root, (0..n).map(|k| (root, k)).collect())
    };
    rebuild(gg, GadgetKind::Maxmargin, build, n as f64, gg.maxmargin_addends.clone())
}

/// `M(I₀) = u*(x'|I₀) - u*(x|I₀)` for every minus infoset meeting the order-k
/// knowledge set of `infoset` with positive blueprint reach.
pub fn margins(
    game: &GameTree,
    addends: &PayoffAddends,
    x_new: &SequenceFormStrategy,
    x_blueprint: &SequenceFormStrategy,
    infoset: InfosetId,
    order: Order,
) -> Result<Vec<(InfosetId, f64)>> {
    let inf = game.infoset(Player::Plus, infoset);
    if reach(game, x_blueprint, &inf.members) <= 0.0 {
        return Err(Error::UnreachableInfoset(inf.label.clone()));
    }
    let knowledge = infoset_knowledge_set(game, Player::Plus, infoset, order)?;
    let new = counterfactual_values(game, addends, x_new, Orientation::Min)?;
    let old = counterfactual_values(game, addends, x_blueprint, Orientation::Min)?;
    let mut roots: Vec<InfosetId> = knowledge.members.iter().map(|&h| game.infoset_of(Player::Minus, h)).collect();
    roots.sort_unstable();
    roots.dedup();
    Ok(roots
        .into_iter()
        .filter_map(|j| Some((j, new.infoset_value(j)? - old.infoset_value(j)?)))
        .collect())
}
