//! Infoset hypergraph, order-k knowledge sets, common-knowledge closures, and
//! the collapsed plus-infoset graph used to allocate subgame solves safely.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameTree, InfosetId, NodeId, Owner, Player};

/// Order of a knowledge set: a positive integer or infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Order {
    Finite(usize),
    Infinite,
}

impl Order {
    pub fn validate(self) -> Result<Self> {
        match self {
            Order::Finite(0) => Err(Error::BadOrder("order must be at least 1".into())),
            o => Ok(o),
        }
    }

    /// Odd or infinite orders are the ones for which resolving is well defined.
    pub fn is_odd_or_infinite(self) -> bool {
        match self {
            Order::Finite(k) => k % 2 == 1,
            Order::Infinite => true,
        }
    }

    /// Maximum hypergraph distance from the generating set.
    fn radius(self) -> Option<usize> {
        match self {
            Order::Finite(k) => Some(k.saturating_sub(1)),
            Order::Infinite => None,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(k) => write!(f, "{k}"),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Order::Infinite),
            t => t
                .parse::<usize>()
                .map_err(|_| Error::BadOrder(format!("cannot parse `{s}`")))
                .and_then(|k| Order::Finite(k).validate()),
        }
    }
}

/// Nodes within hypergraph distance `k - 1` of a generating node set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnowledgeSet {
    pub seeds: Vec<NodeId>,
    pub order: Order,
    /// Sorted member nodes.
    pub members: Vec<NodeId>,
}

impl KnowledgeSet {
    pub fn contains(&self, v: NodeId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Breadth-first search over nodes, where nodes sharing an infoset of either
/// player are adjacent. Returns `(node, distance)` in visit order.
fn bfs(game: &GameTree, seeds: &[NodeId], radius: Option<usize>) -> Vec<(NodeId, usize)> {
    let mut dist: HashMap<NodeId, usize> = HashMap::new();
    let mut seen_inf: [HashMap<InfosetId, ()>; 2] = [HashMap::new(), HashMap::new()];
    let mut queue = VecDeque::new();
    let mut out = Vec::new();
    for &s in seeds {
        if dist.insert(s, 0).is_none() {
            queue.push_back(s);
            out.push((s, 0));
        }
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        if radius.is_some_and(|r| d >= r) {
            continue;
        }
        for p in Player::BOTH {
            let i = game.infoset_of(p, v);
            if seen_inf[p.index()].insert(i, ()).is_some() {
                continue;
            }
            for &w in &game.infoset(p, i).members {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                    e.insert(d + 1);
                    queue.push_back(w);
                    out.push((w, d + 1));
                }
            }
        }
    }
    out
}

/// Order-`k` knowledge set generated by `seeds`.
pub fn knowledge_set(game: &GameTree, seeds: &[NodeId], order: Order) -> Result<KnowledgeSet> {
    let order = order.validate()?;
    if seeds.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut members: Vec<NodeId> = bfs(game, seeds, order.radius()).into_iter().map(|(v, _)| v).collect();
    members.sort_unstable();
    let mut seeds = seeds.to_vec();
    seeds.sort_unstable();
    seeds.dedup();
    Ok(KnowledgeSet { seeds, order, members })
}

/// Order-`k` knowledge set of an infoset.
pub fn infoset_knowledge_set(game: &GameTree, player: Player, infoset: InfosetId, order: Order) -> Result<KnowledgeSet> {
    knowledge_set(game, &game.infoset(player, infoset).members, order)
}

/// Connected component of the infoset hypergraph containing `seeds`.
pub fn common_knowledge_closure(game: &GameTree, seeds: &[NodeId]) -> Result<KnowledgeSet> {
    knowledge_set(game, seeds, Order::Infinite)
}

/// Connected components of the node hypergraph, as a component id per node.
pub fn components(game: &GameTree) -> Vec<usize> {
    let mut comp = vec![usize::MAX; game.num_nodes()];
    let mut next = 0;
    for v in 0..game.num_nodes() {
        if comp[v] != usize::MAX {
            continue;
        }
        for (w, _) in bfs(game, &[v], None) {
            comp[w] = next;
        }
        next += 1;
    }
    comp
}

/// Largest hypergraph distance from a non-terminal node to another node of its
/// component. Terminal layers are excluded: nobody acts there.
pub fn diameter(game: &GameTree) -> usize {
    let comp = components(game);
    let mut sizes: HashMap<usize, usize> = HashMap::new();
    for &c in &comp {
        *sizes.entry(c).or_default() += 1;
    }
    (0..game.num_nodes())
        .filter(|&v| sizes[&comp[v]] > 1 && !game.node(v).is_terminal())
        .map(|v| bfs(game, &[v], None).last().map_or(0, |&(_, d)| d))
        .max()
        .unwrap_or(0)
}

/// Which nodes are sampled, and which infoset is attached to each sample,
/// when averaging knowledge-set sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingConvention {
    /// Decision nodes only, with the mover's infoset.
    DecisionNodes,
    /// Every node: the mover's infoset at decision nodes, the last mover's
    /// infoset at terminals, and the node itself elsewhere.
    AllNodes,
}

impl FromStr for SamplingConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "decision-nodes" => Ok(Self::DecisionNodes),
            "all-nodes" => Ok(Self::AllNodes),
            _ => Err(Error::BadParameter(format!("unknown sampling convention `{s}`"))),
        }
    }
}

/// Generating node set attached to node `v` under `convention`, if sampled.
fn sample_seeds(game: &GameTree, v: NodeId, convention: SamplingConvention) -> Option<Vec<NodeId>> {
    let node = game.node(v);
    let mover_set = |p: Player| game.infoset(p, game.infoset_of(p, v)).members.clone();
    match (node.owner(), convention) {
        (Owner::Plus, _) => Some(mover_set(Player::Plus)),
        (Owner::Minus, _) => Some(mover_set(Player::Minus)),
        (_, SamplingConvention::DecisionNodes) => None,
        (Owner::Terminal, SamplingConvention::AllNodes) => {
            match node.parent.and_then(|u| game.node(u).mover()) {
                Some(p) => Some(mover_set(p)),
                None => Some(vec![v]),
            }
        }
        (Owner::Nature, SamplingConvention::AllNodes) => Some(vec![v]),
    }
}

/// Structural statistics of a game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameStats {
    pub nodes: usize,
    pub decision_infosets: usize,
    pub diameter: usize,
    pub convention: SamplingConvention,
    /// Average `|I^k|` for k = 1..=4 and infinity.
    pub avg_knowledge_size: Vec<(Order, f64)>,
}

pub const STATS_ORDERS: [Order; 5] =
    [Order::Finite(1), Order::Finite(2), Order::Finite(3), Order::Finite(4), Order::Infinite];

/// Node/infoset counts, diameter and average knowledge-set sizes.
pub fn game_stats(game: &GameTree, convention: SamplingConvention) -> GameStats {
    let mut totals = [0.0f64; STATS_ORDERS.len()];
    let mut samples = 0usize;
    // memoize per generating set; many nodes share one
    let mut cache: HashMap<Vec<NodeId>, [usize; STATS_ORDERS.len()]> = HashMap::new();
    for v in 0..game.num_nodes() {
        let Some(seeds) = sample_seeds(game, v, convention) else {
            continue;
        };
        let sizes = cache.entry(seeds).or_insert_with_key(|seeds| {
            let visit = bfs(game, seeds, None);
            let mut out = [0usize; STATS_ORDERS.len()];
            for (slot, order) in out.iter_mut().zip(STATS_ORDERS) {
                *slot = match order.radius() {
                    Some(r) => visit.iter().filter(|&&(_, d)| d <= r).count(),
                    None => visit.len(),
                };
            }
            out
        });
        for (t, &s) in totals.iter_mut().zip(sizes.iter()) {
            *t += s as f64;
        }
        samples += 1;
    }
    let n = samples.max(1) as f64;
    GameStats {
        nodes: game.num_nodes(),
        decision_infosets: game.num_decision_infosets(),
        diameter: diameter(game),
        convention,
        avg_knowledge_size: STATS_ORDERS.iter().zip(totals).map(|(&o, t)| (o, t / n)).collect(),
    }
}

/// Plus decision infosets, adjacent when they contain nodes sharing a minus infoset.
#[derive(Clone, Debug)]
pub struct CollapsedGraph {
    pub vertices: Vec<InfosetId>,
    index: HashMap<InfosetId, usize>,
    adj: Vec<Vec<usize>>,
}

impl CollapsedGraph {
    pub fn new(game: &GameTree) -> Self {
        let vertices = game.decision_infosets(Player::Plus).to_vec();
        let index: HashMap<_, _> = vertices.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); vertices.len()];
        for j in game.infosets(Player::Minus) {
            let touched: BTreeSet<usize> = j
                .members
                .iter()
                .filter_map(|&v| index.get(&game.infoset_of(Player::Plus, v)).copied())
                .collect();
            for &a in &touched {
                for &b in &touched {
                    if a != b {
                        adj[a].insert(b);
                    }
                }
            }
        }
        let adj = adj.into_iter().map(|s| s.into_iter().collect()).collect();
        Self { vertices, index, adj }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex_of(&self, infoset: InfosetId) -> Option<usize> {
        self.index.get(&infoset).copied()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn are_adjacent(&self, a: InfosetId, b: InfosetId) -> bool {
        match (self.vertex_of(a), self.vertex_of(b)) {
            (Some(x), Some(y)) => self.adj[x].binary_search(&y).is_ok(),
            _ => false,
        }
    }

    /// Component id per vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.len()];
        let mut next = 0;
        for s in 0..self.len() {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &w in &self.adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }
}

/// Largest vertex count for which colorings are computed exactly.
pub const EXACT_COLORING_LIMIT: usize = 12;

/// Proper coloring of an undirected graph given as sorted adjacency lists.
/// Exact (minimum) for small graphs, largest-degree-first greedy otherwise.
pub fn color_graph(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    if n == 0 {
        return Vec::new();
    }
    if n <= EXACT_COLORING_LIMIT {
        for k in 1..=n {
            let mut colors = vec![usize::MAX; n];
            if exact_color(adj, k, 0, &mut colors) {
                return colors;
            }
        }
        unreachable!("n colors always suffice");
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(adj[v].len()), v));
    let mut colors = vec![usize::MAX; n];
    for v in order {
        let used: BTreeSet<usize> = adj[v].iter().map(|&w| colors[w]).collect();
        colors[v] = (0..).find(|c| !used.contains(c)).unwrap();
    }
    colors
}

fn exact_color(adj: &[Vec<usize>], k: usize, v: usize, colors: &mut [usize]) -> bool {
    if v == adj.len() {
        return true;
    }
    // symmetry breaking: vertex v may only open one new color
    let max_used = colors[..v].iter().copied().max().map_or(0, |m| m + 1);
    for c in 0..k.min(max_used + 1) {
        if adj[v].iter().all(|&w| colors[w] != c) {
            colors[v] = c;
            if exact_color(adj, k, v + 1, colors) {
                return true;
            }
        }
    }
    colors[v] = usize::MAX;
    false
}

pub fn num_colors(colors: &[usize]) -> usize {
    colors.iter().copied().max().map_or(0, |m| m + 1)
}

/// Sampling plan for ancestor-closed independent sets of the collapsed graph:
/// each component independently picks one color class uniformly, then infosets
/// with an excluded plus ancestor are pruned.
#[derive(Clone, Debug)]
pub struct IndependentSetPlan {
    graph: CollapsedGraph,
    component: Vec<usize>,
    /// Color of each vertex within its component's coloring.
    color: Vec<usize>,
    /// Number of colors used in each component.
    chromatic: Vec<usize>,
    /// Plus decision-infoset ancestors of each vertex, nearest first.
    ancestors: Vec<Vec<usize>>,
}

impl IndependentSetPlan {
    pub fn new(game: &GameTree) -> Self {
        let graph = CollapsedGraph::new(game);
        let component = graph.components();
        let ncomp = component.iter().copied().max().map_or(0, |m| m + 1);
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
        for (v, &c) in component.iter().enumerate() {
            members[c].push(v);
        }
        let mut color = vec![0; graph.len()];
        let mut chromatic = vec![0; ncomp];
        for (c, vs) in members.iter().enumerate() {
            let local: HashMap<usize, usize> = vs.iter().enumerate().map(|(k, &v)| (v, k)).collect();
            let adj: Vec<Vec<usize>> = vs
                .iter()
                .map(|&v| {
                    let mut row: Vec<usize> = graph.neighbors(v).iter().map(|w| local[w]).collect();
                    row.sort_unstable();
                    row
                })
                .collect();
            let colors = color_graph(&adj);
            chromatic[c] = num_colors(&colors);
            for (k, &v) in vs.iter().enumerate() {
                color[v] = colors[k];
            }
        }
        let seqs = game.sequences(Player::Plus);
        let ancestors = graph
            .vertices
            .iter()
            .map(|&i| {
                let mut out = Vec::new();
                let mut s = game.infoset(Player::Plus, i).parent_seq;
                while let Some(j) = seqs[s].infoset {
                    out.push(graph.index[&j]);
                    s = game.infoset(Player::Plus, j).parent_seq;
                }
                out
            })
            .collect();
        Self { graph, component, color, chromatic, ancestors }
    }

    pub fn graph(&self) -> &CollapsedGraph {
        &self.graph
    }

    /// Number of colors used for the component containing `infoset`.
    pub fn chromatic_bound(&self, infoset: InfosetId) -> Option<usize> {
        self.graph.vertex_of(infoset).map(|v| self.chromatic[self.component[v]])
    }

    /// Draws one independent, ancestor-closed set of plus decision infosets.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> BTreeSet<InfosetId> {
        let chosen: Vec<usize> = self.chromatic.iter().map(|&k| rng.gen_range(0..k.max(1))).collect();
        self.select(&chosen)
    }

    /// The set obtained when each component picks color class `chosen[c]`.
    fn select(&self, chosen: &[usize]) -> BTreeSet<InfosetId> {
        let picked = |v: usize| self.color[v] == chosen[self.component[v]];
        (0..self.graph.len())
            .filter(|&v| picked(v) && self.ancestors[v].iter().all(|&a| picked(a)))
            .map(|v| self.graph.vertices[v])
            .collect()
    }

    /// Probability that `infoset` belongs to a sampled set.
    pub fn probability(&self, infoset: InfosetId) -> f64 {
        let Some(v) = self.graph.vertex_of(infoset) else {
            return 0.0;
        };
        let mut required: HashMap<usize, usize> = HashMap::new();
        for &u in std::iter::once(&v).chain(&self.ancestors[v]) {
            let c = self.component[u];
            if *required.entry(c).or_insert(self.color[u]) != self.color[u] {
                return 0.0;
            }
        }
        required.keys().map(|&c| 1.0 / self.chromatic[c] as f64).product()
    }

    /// Whether `set` is independent in the collapsed graph and closed under
    /// plus ancestors.
    pub fn is_valid(&self, set: &BTreeSet<InfosetId>) -> bool {
        set.iter().all(|&i| {
            let Some(v) = self.graph.vertex_of(i) else {
                return false;
            };
            self.graph.neighbors(v).iter().all(|&w| !set.contains(&self.graph.vertices[w]))
                && self.ancestors[v].iter().all(|&a| set.contains(&self.graph.vertices[a]))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games;
    use rand::SeedableRng;

    fn plus_node(g: &GameTree, label: &str) -> Vec<NodeId> {
        let i = g.find_infoset(Player::Plus, label).unwrap();
        g.infoset(Player::Plus, i).members.clone()
    }

    #[test]
    fn order_parsing() {
        assert_eq!("3".parse::<Order>().unwrap(), Order::Finite(3));
        assert_eq!("inf".parse::<Order>().unwrap(), Order::Infinite);
        assert!("0".parse::<Order>().is_err());
        assert!("x".parse::<Order>().is_err());
        assert!(Order::Finite(1).is_odd_or_infinite());
        assert!(!Order::Finite(2).is_odd_or_infinite());
    }

    #[test]
    fn order_one_is_the_seed_set() {
        let g = games::kuhn();
        let seeds = plus_node(&g, "J");
        let ks = knowledge_set(&g, &seeds, Order::Finite(1)).unwrap();
        assert_eq!(ks.members, {
            let mut s = seeds.clone();
            s.sort();
            s
        });
        assert_eq!(knowledge_set(&g, &[], Order::Finite(1)), Err(Error::EmptySet));
    }

    #[test]
    fn matching_pennies_chain() {
        let g = games::matching_pennies(100).unwrap();
        let root_children = &g.node(g.root()).children;
        let n1 = root_children[0];
        let ks = |k| knowledge_set(&g, &[n1], Order::Finite(k)).unwrap().members;
        assert_eq!(ks(2), vec![root_children[0], root_children[1]]);
        assert_eq!(ks(3), root_children[..3].to_vec());
        let closure = common_knowledge_closure(&g, &[n1]).unwrap();
        assert_eq!(closure.members, root_children.clone());
    }

    #[test]
    fn collapsed_graph_of_example() {
        let g = games::example_fig1();
        let cg = CollapsedGraph::new(&g);
        assert_eq!(cg.len(), 2);
        assert_eq!(cg.num_edges(), 1);
        let plan = IndependentSetPlan::new(&g);
        let r1 = g.find_infoset(Player::Plus, "R1").unwrap();
        assert_eq!(plan.chromatic_bound(r1), Some(2));
        assert_eq!(plan.probability(r1), 0.5);
    }

    #[test]
    fn exact_coloring_small_graphs() {
        // odd cycle needs three colors, even cycle two
        let cycle = |n: usize| -> Vec<Vec<usize>> {
            (0..n)
                .map(|v| {
                    let mut r = vec![(v + 1) % n, (v + n - 1) % n];
                    r.sort();
                    r
                })
                .collect()
        };
        assert_eq!(num_colors(&color_graph(&cycle(5))), 3);
        assert_eq!(num_colors(&color_graph(&cycle(6))), 2);
        assert_eq!(num_colors(&color_graph(&[])), 0);
    }

    #[test]
    fn kuhn_samples_are_valid() {
        let g = games::kuhn();
        let plan = IndependentSetPlan::new(&g);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let s = plan.sample(&mut rng);
            assert!(plan.is_valid(&s));
        }
    }
}
