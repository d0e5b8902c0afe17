//! Extensive-form zero-sum games with explicit observations.
//!
//! A [`GameTree`] stores nodes in depth-first preorder. Every node carries one
//! observation label per player; a player's observation sequence at a node is
//! the chain of observations received and own actions played on the path from
//! the root. Nodes with equal observation sequences form one infoset of that
//! player, so every node belongs to exactly one infoset of *each* player,
//! including nodes the player does not move at.
//!
//! Utilities are always stored from plus's perspective; minus minimizes.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strategy::SequenceFormStrategy;

pub type NodeId = usize;
pub type InfosetId = usize;
pub type SeqId = usize;

/// The empty sequence of either player.
pub const EMPTY_SEQ: SeqId = 0;

const PROB_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Plus,
    Minus,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::Plus, Player::Minus];

    pub fn index(self) -> usize {
        match self {
            Player::Plus => 0,
            Player::Minus => 1,
        }
    }

    pub fn opponent(self) -> Player {
        match self {
            Player::Plus => Player::Minus,
            Player::Minus => Player::Plus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Player::Plus => "plus",
            Player::Minus => "minus",
        }
    }
}

impl std::fmt::Display for Player {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Who acts at a node, as written in game descriptions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Owner {
    Nature,
    Plus,
    Minus,
    Terminal,
}

impl From<Player> for Owner {
    fn from(p: Player) -> Self {
        match p {
            Player::Plus => Owner::Plus,
            Player::Minus => Owner::Minus,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    Nature(Vec<f64>),
    Decision(Player),
    Terminal(f64),
}

#[derive(Clone, Debug)]
pub struct Node {
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    /// Index of the edge leading here within the parent's action list.
    pub parent_action: usize,
    pub actions: Vec<String>,
    pub children: Vec<NodeId>,
    pub obs: [String; 2],
    pub depth: usize,
}

impl Node {
    pub fn owner(&self) -> Owner {
        match self.kind {
            NodeKind::Nature(_) => Owner::Nature,
            NodeKind::Decision(p) => p.into(),
            NodeKind::Terminal(_) => Owner::Terminal,
        }
    }

    pub fn mover(&self) -> Option<Player> {
        match self.kind {
            NodeKind::Decision(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self.kind, NodeKind::Terminal(_))
    }

    pub fn utility(&self) -> Option<f64> {
        match self.kind {
            NodeKind::Terminal(u) => Some(u),
            _ => None,
        }
    }
}

/// An equivalence class of nodes under one player's observation sequence.
#[derive(Clone, Debug)]
pub struct Infoset {
    pub player: Player,
    pub members: Vec<NodeId>,
    /// True when the player moves at the member nodes.
    pub decision: bool,
    pub actions: Vec<String>,
    /// The player's sequence shared by all members.
    pub parent_seq: SeqId,
    /// First of the `actions.len()` consecutive sequence ids `Ia` (decision infosets only).
    pub first_seq: SeqId,
    /// Infoset of the parent nodes (the previous step of the observation sequence).
    pub parent_infoset: Option<InfosetId>,
    /// Own action taken at the parent infoset to get here, if the player moved there.
    pub parent_action: Option<usize>,
    /// Rendered observation sequence: non-empty tokens joined by `/`.
    pub label: String,
    /// Last non-empty observation token of the sequence.
    pub last_obs: String,
}

impl Infoset {
    pub fn seq(&self, action: usize) -> SeqId {
        debug_assert!(self.decision && action < self.actions.len());
        self.first_seq + action
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sequence {
    /// `None` for the empty sequence.
    pub infoset: Option<InfosetId>,
    pub action: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct TerminalEntry {
    pub node: NodeId,
    pub seq: [SeqId; 2],
    /// `u(z) * p(z)`.
    pub weight: f64,
}

/// Sparse auxiliary payoff matrix `B` keyed by (plus sequence, minus sequence).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PayoffAddends {
    entries: BTreeMap<(SeqId, SeqId), f64>,
}

impl PayoffAddends {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, plus: SeqId, minus: SeqId) -> f64 {
        self.entries.get(&(plus, minus)).copied().unwrap_or(0.0)
    }

    pub fn add(&mut self, plus: SeqId, minus: SeqId, value: f64) {
        *self.entries.entry((plus, minus)).or_insert(0.0) += value;
    }

    pub fn set(&mut self, plus: SeqId, minus: SeqId, value: f64) {
        self.entries.insert((plus, minus), value);
    }

    pub fn iter(&self) -> impl Iterator<Item = ((SeqId, SeqId), f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries of the row keyed by plus's empty sequence.
    pub fn top_row(&self) -> impl Iterator<Item = (SeqId, f64)> + '_ {
        self.entries
            .range((EMPTY_SEQ, 0)..(EMPTY_SEQ + 1, 0))
            .map(|(&(_, t), &v)| (t, v))
    }

    pub fn is_top_row_only(&self) -> bool {
        self.entries.keys().all(|&(s, _)| s == EMPTY_SEQ)
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.entries.values_mut() {
            *v *= factor;
        }
    }
}

/// Builds a [`GameTree`] from nodes and labeled edges in any order.
#[derive(Default)]
pub struct GameBuilder {
    nodes: Vec<RawNode>,
}

struct RawNode {
    owner: Owner,
    utility: f64,
    obs: [String; 2],
    edges: Vec<(String, NodeId, f64)>,
    parent_count: usize,
}

impl GameBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, owner: Owner, utility: f64, obs_plus: String, obs_minus: String) -> NodeId {
        self.nodes.push(RawNode {
            owner,
            utility,
            obs: [obs_plus, obs_minus],
            edges: Vec::new(),
            parent_count: 0,
        });
        self.nodes.len() - 1
    }

    pub fn nature(&mut self, obs_plus: impl Into<String>, obs_minus: impl Into<String>) -> NodeId {
        self.push(Owner::Nature, 0.0, obs_plus.into(), obs_minus.into())
    }

    pub fn decision(
        &mut self,
        player: Player,
        obs_plus: impl Into<String>,
        obs_minus: impl Into<String>,
    ) -> NodeId {
        self.push(player.into(), 0.0, obs_plus.into(), obs_minus.into())
    }

    pub fn terminal(
        &mut self,
        utility: f64,
        obs_plus: impl Into<String>,
        obs_minus: impl Into<String>,
    ) -> NodeId {
        self.push(Owner::Terminal, utility, obs_plus.into(), obs_minus.into())
    }

    /// Adds a player edge.
    pub fn connect(&mut self, parent: NodeId, action: impl Into<String>, child: NodeId) {
        self.connect_chance(parent, action, child, 0.0);
    }

    /// Adds an edge carrying a nature probability (ignored below player nodes).
    pub fn connect_chance(&mut self, parent: NodeId, action: impl Into<String>, child: NodeId, prob: f64) {
        self.nodes[parent].edges.push((action.into(), child, prob));
        self.nodes[child].parent_count += 1;
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Renumbers nodes in preorder from `root`, validates, and indexes infosets.
    pub fn build(self, root: NodeId) -> Result<GameTree> {
        self.build_with_ids(root).map(|(g, _)| g)
    }

    /// Like [`GameBuilder::build`], also returning the final id of every builder node.
    pub fn build_with_ids(self, root: NodeId) -> Result<(GameTree, Vec<NodeId>)> {
        let n = self.nodes.len();
        if root >= n {
            return Err(Error::InvalidTree(format!("root {root} out of range")));
        }
        if self.nodes[root].parent_count != 0 {
            return Err(Error::InvalidTree("root has a parent".into()));
        }
        for (i, raw) in self.nodes.iter().enumerate() {
            if i != root && raw.parent_count != 1 {
                return Err(Error::InvalidTree(format!(
                    "node {i} has {} parents",
                    raw.parent_count
                )));
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut new_id = vec![usize::MAX; n];
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            if new_id[v] != usize::MAX {
                return Err(Error::InvalidTree(format!("cycle through node {v}")));
            }
            new_id[v] = order.len();
            order.push(v);
            for &(_, c, _) in self.nodes[v].edges.iter().rev() {
                stack.push(c);
            }
        }
        if order.len() != n {
            return Err(Error::InvalidTree(format!(
                "{} orphan nodes unreachable from the root",
                n - order.len()
            )));
        }
        let mut nodes: Vec<Node> = Vec::with_capacity(n);
        for (idx, &old) in order.iter().enumerate() {
            let raw = &self.nodes[old];
            let kind = match raw.owner {
                Owner::Nature => NodeKind::Nature(raw.edges.iter().map(|e| e.2).collect()),
                Owner::Plus => NodeKind::Decision(Player::Plus),
                Owner::Minus => NodeKind::Decision(Player::Minus),
                Owner::Terminal => NodeKind::Terminal(raw.utility),
            };
            nodes.push(Node {
                kind,
                parent: None,
                parent_action: 0,
                actions: raw.edges.iter().map(|e| e.0.clone()).collect(),
                children: raw.edges.iter().map(|e| new_id[e.1]).collect(),
                obs: raw.obs.clone(),
                depth: 0,
            });
            debug_assert_eq!(nodes.len() - 1, idx);
        }
        for v in 0..n {
            for (a, &c) in nodes[v].children.clone().iter().enumerate() {
                nodes[c].parent = Some(v);
                nodes[c].parent_action = a;
                nodes[c].depth = nodes[v].depth + 1;
            }
        }
        Ok((GameTree::index(nodes)?, new_id))
    }
}

/// A validated game together with its infoset and sequence indices.
#[derive(Clone, Debug)]
pub struct GameTree {
    nodes: Vec<Node>,
    chance_reach: Vec<f64>,
    infosets: [Vec<Infoset>; 2],
    node_infoset: Vec<[InfosetId; 2]>,
    node_seq: Vec<[SeqId; 2]>,
    sequences: [Vec<Sequence>; 2],
    decision_infosets: [Vec<InfosetId>; 2],
    terminals: Vec<TerminalEntry>,
}

impl GameTree {
    fn index(nodes: Vec<Node>) -> Result<GameTree> {
        let n = nodes.len();
        for (v, node) in nodes.iter().enumerate() {
            match &node.kind {
                NodeKind::Terminal(u) => {
                    if !node.children.is_empty() {
                        return Err(Error::InvalidTree(format!("terminal node {v} has children")));
                    }
                    if !u.is_finite() {
                        return Err(Error::InvalidTree(format!("terminal node {v} has non-finite utility")));
                    }
                }
                kind => {
                    if node.children.is_empty() {
                        return Err(Error::InvalidTree(format!("internal node {v} has no actions")));
                    }
                    if let NodeKind::Nature(probs) = kind {
                        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                            return Err(Error::BadDistribution {
                                node: v,
                                reason: "negative or non-finite probability".into(),
                            });
                        }
                        let total: f64 = probs.iter().sum();
                        if (total - 1.0).abs() > PROB_TOLERANCE {
                            return Err(Error::BadDistribution {
                                node: v,
                                reason: format!("probabilities sum to {total}"),
                            });
                        }
                    }
                }
            }
            let mut labels: Vec<&String> = node.actions.iter().collect();
            labels.sort();
            labels.dedup();
            if labels.len() != node.actions.len() {
                return Err(Error::InvalidTree(format!("duplicate action labels at node {v}")));
            }
        }

        let mut chance_reach = vec![1.0; n];
        for v in 0..n {
            if let NodeKind::Nature(probs) = &nodes[v].kind {
                for (a, &c) in nodes[v].children.iter().enumerate() {
                    chance_reach[c] = chance_reach[v] * probs[a];
                }
            } else {
                for &c in &nodes[v].children {
                    chance_reach[c] = chance_reach[v];
                }
            }
        }

        let mut infosets: [Vec<Infoset>; 2] = [Vec::new(), Vec::new()];
        let mut sequences: [Vec<Sequence>; 2] = [
            vec![Sequence { infoset: None, action: 0 }],
            vec![Sequence { infoset: None, action: 0 }],
        ];
        let mut node_infoset = vec![[0usize; 2]; n];
        let mut node_seq = vec![[EMPTY_SEQ; 2]; n];
        let mut decision_infosets: [Vec<InfosetId>; 2] = [Vec::new(), Vec::new()];

        for player in Player::BOTH {
            let pi = player.index();
            let mut interner: HashMap<(Option<InfosetId>, Option<usize>, &str), InfosetId> = HashMap::new();
            for v in 0..n {
                let node = &nodes[v];
                let (parent_infoset, parent_action, seq) = match node.parent {
                    None => (None, None, EMPTY_SEQ),
                    Some(p) => {
                        let pinf = node_infoset[p][pi];
                        if nodes[p].mover() == Some(player) {
                            let a = node.parent_action;
                            (Some(pinf), Some(a), infosets[pi][pinf].seq(a))
                        } else {
                            (Some(pinf), None, node_seq[p][pi])
                        }
                    }
                };
                node_seq[v][pi] = seq;
                let owned = node.mover() == Some(player);
                let key = (parent_infoset, parent_action, node.obs[pi].as_str());
                let id = match interner.get(&key) {
                    Some(&id) => {
                        let inf = &mut infosets[pi][id];
                        if inf.decision != owned {
                            return Err(Error::ObservationMoverMismatch {
                                player: player.name().into(),
                                infoset: inf.label.clone(),
                            });
                        }
                        if owned && inf.actions != node.actions {
                            return Err(Error::InvalidTree(format!(
                                "nodes of {player} infoset `{}` expose different actions",
                                inf.label
                            )));
                        }
                        if inf.parent_seq != seq {
                            return Err(Error::ImperfectRecall {
                                player: player.name().into(),
                                infoset: inf.label.clone(),
                            });
                        }
                        inf.members.push(v);
                        id
                    }
                    None => {
                        let id = infosets[pi].len();
                        let (mut label, mut last_obs) = match parent_infoset {
                            Some(p) => (infosets[pi][p].label.clone(), infosets[pi][p].last_obs.clone()),
                            None => (String::new(), String::new()),
                        };
                        if let Some(a) = parent_action {
                            let p = parent_infoset.expect("own action implies a parent");
                            push_token(&mut label, &infosets[pi][p].actions[a]);
                        }
                        if !node.obs[pi].is_empty() {
                            push_token(&mut label, &node.obs[pi]);
                            last_obs = node.obs[pi].clone();
                        }
                        let first_seq = sequences[pi].len();
                        if owned {
                            for a in 0..node.actions.len() {
                                sequences[pi].push(Sequence { infoset: Some(id), action: a });
                            }
                            decision_infosets[pi].push(id);
                        }
                        infosets[pi].push(Infoset {
                            player,
                            members: vec![v],
                            decision: owned,
                            actions: if owned { node.actions.clone() } else { Vec::new() },
                            parent_seq: seq,
                            first_seq: if owned { first_seq } else { 0 },
                            parent_infoset,
                            parent_action,
                            label,
                            last_obs,
                        });
                        interner.insert(key, id);
                        id
                    }
                };
                node_infoset[v][pi] = id;
            }
        }

        let terminals = (0..n)
            .filter_map(|v| {
                nodes[v].utility().map(|u| TerminalEntry {
                    node: v,
                    seq: node_seq[v],
                    weight: u * chance_reach[v],
                })
            })
            .collect();

        Ok(GameTree {
            nodes,
            chance_reach,
            infosets,
            node_infoset,
            node_seq,
            sequences,
            decision_infosets,
            terminals,
        })
    }

    pub fn from_spec(spec: &NodeSpec) -> Result<GameTree> {
        let mut b = GameBuilder::new();
        let root = spec.add_to(&mut b)?;
        b.build(root)
    }

    pub fn from_json(text: &str) -> Result<GameTree> {
        let spec: NodeSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_spec(&spec)
    }

    pub fn to_spec(&self) -> NodeSpec {
        self.spec_at(self.root())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("game specs always serialize")
    }

    fn spec_at(&self, v: NodeId) -> NodeSpec {
        let node = &self.nodes[v];
        let (player, utility, probs) = match &node.kind {
            NodeKind::Nature(p) => (Owner::Nature, None, p.clone()),
            NodeKind::Decision(p) => ((*p).into(), None, Vec::new()),
            NodeKind::Terminal(u) => (Owner::Terminal, Some(*u), Vec::new()),
        };
        NodeSpec {
            player,
            obs_plus: node.obs[0].clone(),
            obs_minus: node.obs[1].clone(),
            utility,
            probs,
            actions: node
                .actions
                .iter()
                .zip(&node.children)
                .map(|(a, &c)| (a.clone(), self.spec_at(c)))
                .collect(),
        }
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, v: NodeId) -> &Node {
        &self.nodes[v]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Product of nature probabilities from the root to `v`.
    pub fn chance_reach(&self, v: NodeId) -> f64 {
        self.chance_reach[v]
    }

    pub fn infosets(&self, player: Player) -> &[Infoset] {
        &self.infosets[player.index()]
    }

    pub fn infoset(&self, player: Player, id: InfosetId) -> &Infoset {
        &self.infosets[player.index()][id]
    }

    pub fn infoset_of(&self, player: Player, v: NodeId) -> InfosetId {
        self.node_infoset[v][player.index()]
    }

    /// The player's sequence at node `v` (last own infoset-action pair on the path).
    pub fn seq_of(&self, player: Player, v: NodeId) -> SeqId {
        self.node_seq[v][player.index()]
    }

    /// Decision infosets of `player`, parents before children.
    pub fn decision_infosets(&self, player: Player) -> &[InfosetId] {
        &self.decision_infosets[player.index()]
    }

    pub fn num_decision_infosets(&self) -> usize {
        self.decision_infosets[0].len() + self.decision_infosets[1].len()
    }

    pub fn sequences(&self, player: Player) -> &[Sequence] {
        &self.sequences[player.index()]
    }

    pub fn num_sequences(&self, player: Player) -> usize {
        self.sequences[player.index()].len()
    }

    pub fn terminals(&self) -> &[TerminalEntry] {
        &self.terminals
    }

    /// `label:action` rendering of a sequence; `∅` for the empty sequence.
    pub fn sequence_label(&self, player: Player, s: SeqId) -> String {
        match self.sequences[player.index()][s].infoset {
            None => "∅".into(),
            Some(i) => {
                let inf = &self.infosets[player.index()][i];
                format!("{}:{}", inf.label, inf.actions[self.sequences[player.index()][s].action])
            }
        }
    }

    /// Compact rendering: last observation token followed by the action.
    pub fn sequence_short_label(&self, player: Player, s: SeqId) -> String {
        match self.sequences[player.index()][s].infoset {
            None => "∅".into(),
            Some(i) => {
                let inf = &self.infosets[player.index()][i];
                format!("{}{}", inf.last_obs, inf.actions[self.sequences[player.index()][s].action])
            }
        }
    }

    /// Finds a decision infoset by its rendered label, falling back to a unique suffix match.
    pub fn find_infoset(&self, player: Player, label: &str) -> Result<InfosetId> {
        let sets = self.infosets(player);
        let exact: Vec<InfosetId> = self.decision_infosets(player)
            .iter()
            .copied()
            .filter(|&i| sets[i].label == label)
            .collect();
        if exact.len() == 1 {
            return Ok(exact[0]);
        }
        let suffix: Vec<InfosetId> = self.decision_infosets(player)
            .iter()
            .copied()
            .filter(|&i| sets[i].label.ends_with(label) && sets[i].last_obs == label)
            .collect();
        if suffix.len() == 1 {
            return Ok(suffix[0]);
        }
        Err(Error::UnknownInfoset(label.to_string()))
    }

    /// Whether sequence `ancestor` is a prefix of (or equal to) `s`.
    pub fn seq_precedes(&self, player: Player, ancestor: SeqId, mut s: SeqId) -> bool {
        loop {
            if s == ancestor {
                return true;
            }
            match self.sequences[player.index()][s].infoset {
                None => return false,
                Some(i) => s = self.infosets[player.index()][i].parent_seq,
            }
        }
    }

    /// Whether node `ancestor` lies on the path from the root to `v` (inclusive).
    pub fn node_precedes(&self, ancestor: NodeId, v: NodeId) -> bool {
        let mut cur = Some(v);
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            if self.nodes[c].depth < self.nodes[ancestor].depth {
                return false;
            }
            cur = self.nodes[c].parent;
        }
        false
    }

    /// Preorder node ids of the subtree rooted at `v`.
    pub fn subtree(&self, v: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            for &c in self.nodes[u].children.iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// `u(x, y) = Σ_z u(z) p(z) x(z) y(z) + Σ_(s,t) B[s,t] x(s) y(t)`.
    pub fn expected_value(
        &self,
        addends: &PayoffAddends,
        x: &SequenceFormStrategy,
        y: &SequenceFormStrategy,
    ) -> Result<f64> {
        self.check_dims(Player::Plus, x.values())?;
        self.check_dims(Player::Minus, y.values())?;
        Ok(self.expected_value_raw(addends, x.values(), y.values()))
    }

    /// Bilinear payoff on raw sequence vectors (not necessarily valid strategies).
    pub fn expected_value_raw(&self, addends: &PayoffAddends, x: &[f64], y: &[f64]) -> f64 {
        let mut total = 0.0;
        for t in &self.terminals {
            total += t.weight * x[t.seq[0]] * y[t.seq[1]];
        }
        for ((s, t), b) in addends.iter() {
            total += b * x[s] * y[t];
        }
        total
    }

    pub(crate) fn check_dims(&self, player: Player, values: &[f64]) -> Result<()> {
        let expected = self.num_sequences(player);
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: values.len() });
        }
        Ok(())
    }

    /// Coefficients of the payoff as a linear function of `responder`'s sequences,
    /// with the opponent's sequence-form vector held fixed.
    pub fn payoff_gradient(&self, addends: &PayoffAddends, responder: Player, opponent: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.num_sequences(responder)];
        let (ri, oi) = (responder.index(), responder.opponent().index());
        for t in &self.terminals {
            g[t.seq[ri]] += t.weight * opponent[t.seq[oi]];
        }
        for ((s, t), b) in addends.iter() {
            match responder {
                Player::Plus => g[s] += b * opponent[t],
                Player::Minus => g[t] += b * opponent[s],
            }
        }
        g
    }
}

fn push_token(label: &mut String, token: &str) {
    if !label.is_empty() {
        label.push('/');
    }
    label.push_str(token);
}

/// Serializable nested game description.
///
/// ```json
/// {"player": "nature", "probs": [0.5, 0.5],
///  "actions": [["l", {"player": "terminal", "utility": 1.0}],
///              ["r", {"player": "terminal", "utility": -1.0}]]}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub player: Owner,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub obs_plus: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub obs_minus: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub actions: Vec<(String, NodeSpec)>,
}

impl NodeSpec {
    fn add_to(&self, b: &mut GameBuilder) -> Result<NodeId> {
        let id = match self.player {
            Owner::Nature => {
                if self.probs.len() != self.actions.len() {
                    return Err(Error::BadDistribution {
                        node: b.len(),
                        reason: format!("{} probabilities for {} actions", self.probs.len(), self.actions.len()),
                    });
                }
                b.nature(self.obs_plus.clone(), self.obs_minus.clone())
            }
            Owner::Plus => b.decision(Player::Plus, self.obs_plus.clone(), self.obs_minus.clone()),
            Owner::Minus => b.decision(Player::Minus, self.obs_plus.clone(), self.obs_minus.clone()),
            Owner::Terminal => {
                let u = self
                    .utility
                    .ok_or_else(|| Error::InvalidTree("terminal node without utility".into()))?;
                b.terminal(u, self.obs_plus.clone(), self.obs_minus.clone())
            }
        };
        for (a, (label, child)) in self.actions.iter().enumerate() {
            let c = child.add_to(b)?;
            let p = if self.player == Owner::Nature { self.probs[a] } else { 0.0 };
            b.connect_chance(id, label.clone(), c, p);
        }
        Ok(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin() -> GameBuilder {
        let mut b = GameBuilder::new();
        let r = b.nature("", "");
        let h = b.decision(Player::Plus, "h", "");
        let t = b.decision(Player::Plus, "t", "");
        b.connect_chance(r, "H", h, 0.5);
        b.connect_chance(r, "T", t, 0.5);
        for (n, u) in [(h, 1.0), (t, -1.0)] {
            let z1 = b.terminal(u, "", "");
            let z2 = b.terminal(-u, "", "");
            b.connect(n, "a", z1);
            b.connect(n, "b", z2);
        }
        b
    }

    #[test]
    fn single_terminal_is_trivial() {
        let mut b = GameBuilder::new();
        let r = b.terminal(0.0, "", "");
        let g = b.build(r).unwrap();
        assert_eq!(g.num_nodes(), 1);
        assert_eq!(g.num_decision_infosets(), 0);
        assert_eq!(g.num_sequences(Player::Plus), 1);
    }

    #[test]
    fn bad_distribution_rejected() {
        let mut b = GameBuilder::new();
        let r = b.nature("", "");
        let z1 = b.terminal(0.0, "", "");
        let z2 = b.terminal(0.0, "", "");
        b.connect_chance(r, "a", z1, 0.5);
        b.connect_chance(r, "b", z2, 0.6);
        assert!(matches!(b.build(r), Err(Error::BadDistribution { .. })));
    }

    #[test]
    fn orphan_rejected() {
        let mut b = coin();
        b.terminal(0.0, "", "");
        assert!(matches!(b.build(0), Err(Error::InvalidTree(_))));
    }

    #[test]
    fn observation_mover_mismatch_rejected() {
        let mut b = GameBuilder::new();
        let r = b.nature("", "");
        let p = b.decision(Player::Plus, "", "x");
        let m = b.decision(Player::Minus, "", "x");
        b.connect_chance(r, "a", p, 0.5);
        b.connect_chance(r, "b", m, 0.5);
        for n in [p, m] {
            let z = b.terminal(0.0, "", "");
            b.connect(n, "go", z);
        }
        assert!(matches!(b.build(r), Err(Error::ObservationMoverMismatch { .. })));
    }

    #[test]
    fn infosets_for_both_players_at_every_node() {
        let g = coin().build(0).unwrap();
        assert_eq!(g.decision_infosets(Player::Plus).len(), 2);
        assert!(g.decision_infosets(Player::Minus).is_empty());
        // minus sees nothing: both plus nodes share one minus infoset
        assert_eq!(g.infoset_of(Player::Minus, 1), g.infoset_of(Player::Minus, 4));
        assert_ne!(g.infoset_of(Player::Plus, 1), g.infoset_of(Player::Plus, 4));
    }

    #[test]
    fn json_round_trip() {
        let g = coin().build(0).unwrap();
        let text = g.to_json();
        let back = GameTree::from_json(&text).unwrap();
        assert_eq!(back.to_spec(), g.to_spec());
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn constant_addend() {
        let g = coin().build(0).unwrap();
        let mut zero = GameBuilder::new();
        let r = zero.terminal(0.0, "", "");
        let z = zero.build(r).unwrap();
        let mut b = PayoffAddends::new();
        b.set(EMPTY_SEQ, EMPTY_SEQ, 2.5);
        let x = SequenceFormStrategy::new(Player::Plus, vec![1.0]);
        let y = SequenceFormStrategy::new(Player::Minus, vec![1.0]);
        assert_eq!(z.expected_value(&b, &x, &y).unwrap(), 2.5);
        let bad = SequenceFormStrategy::new(Player::Plus, vec![1.0]);
        assert!(matches!(
            g.expected_value(&PayoffAddends::new(), &bad, &y),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
