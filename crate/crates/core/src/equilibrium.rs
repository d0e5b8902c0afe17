//! Best responses, counterfactual best-response values, exploitability, and a
//! CFR+ solver over the sequence form with optional per-action probability floors.

use std::fmt::Write as _;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameTree, InfosetId, PayoffAddends, Player, SeqId, EMPTY_SEQ};
use crate::strategy::SequenceFormStrategy;

/// Lower bounds on action probabilities, per infoset (empty row: no floor).
#[derive(Clone, Debug, PartialEq)]
pub struct Floors {
    player: Player,
    rows: Vec<Vec<f64>>,
}

impl Floors {
    pub fn none(game: &GameTree, player: Player) -> Self {
        Self { player, rows: vec![Vec::new(); game.infosets(player).len()] }
    }

    /// Every action at every decision infoset gets probability at least `eps / m`.
    pub fn epsilon_uniform(game: &GameTree, player: Player, eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::BadParameter(format!("epsilon must lie in [0, 1], got {eps}")));
        }
        let mut f = Self::none(game, player);
        if eps > 0.0 {
            for &i in game.decision_infosets(player) {
                let m = game.infoset(player, i).actions.len();
                f.rows[i] = vec![eps / m as f64; m];
            }
        }
        Ok(f)
    }

    pub fn player(&self) -> Player {
        self.player
    }

    /// Removes the floor at `infoset`.
    pub fn exempt(&mut self, infoset: InfosetId) {
        self.rows[infoset].clear();
    }

    pub fn set(&mut self, game: &GameTree, infoset: InfosetId, row: Vec<f64>) -> Result<()> {
        let m = game.infoset(self.player, infoset).actions.len();
        let total: f64 = row.iter().sum();
        if row.len() != m || row.iter().any(|&f| f < 0.0) || total > 1.0 + 1e-12 {
            return Err(Error::BadParameter(format!("invalid floor row at infoset {infoset}")));
        }
        self.rows[infoset] = row;
        Ok(())
    }

    pub fn row(&self, infoset: InfosetId) -> &[f64] {
        &self.rows[infoset]
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    fn floor(&self, infoset: InfosetId, a: usize) -> f64 {
        self.rows[infoset].get(a).copied().unwrap_or(0.0)
    }

    fn total(&self, infoset: InfosetId) -> f64 {
        self.rows[infoset].iter().sum()
    }
}

/// Maximizer for plus, minimizer for minus.
fn better(player: Player, a: f64, b: f64) -> bool {
    match player {
        Player::Plus => a > b,
        Player::Minus => a < b,
    }
}

/// Optimal response to a linear objective `g` over the (floored) treeplex.
/// Returns the sequence-form response and its objective value.
pub fn best_response_to_gradient(game: &GameTree, player: Player, g: &[f64], floors: Option<&Floors>) -> (SequenceFormStrategy, f64) {
    let mut v = g.to_vec();
    let mut choice = vec![0usize; game.infosets(player).len()];
    for &i in game.decision_infosets(player).iter().rev() {
        let inf = game.infoset(player, i);
        let m = inf.actions.len();
        let mut best = 0;
        for a in 1..m {
            if better(player, v[inf.seq(a)], v[inf.seq(best)]) {
                best = a;
            }
        }
        choice[i] = best;
        let value = match floors {
            Some(f) if !f.row(i).is_empty() => {
                let floored: f64 = (0..m).map(|a| f.floor(i, a) * v[inf.seq(a)]).sum();
                floored + (1.0 - f.total(i)) * v[inf.seq(best)]
            }
            _ => v[inf.seq(best)],
        };
        v[inf.parent_seq] += value;
    }
    let mut x = vec![0.0; g.len()];
    x[EMPTY_SEQ] = 1.0;
    for &i in game.decision_infosets(player) {
        let inf = game.infoset(player, i);
        let parent = x[inf.parent_seq];
        for a in 0..inf.actions.len() {
            let f = floors.map_or(0.0, |f| f.floor(i, a));
            let free = if a == choice[i] { 1.0 - floors.map_or(0.0, |f| f.total(i)) } else { 0.0 };
            x[inf.seq(a)] = parent * (f + free);
        }
    }
    (SequenceFormStrategy::new(player, x), v[EMPTY_SEQ])
}

/// Exact best response of the opponent of `opponent.player()`; returns the
/// response and the resulting payoff to plus.
pub fn best_response(game: &GameTree, addends: &PayoffAddends, opponent: &SequenceFormStrategy) -> Result<(SequenceFormStrategy, f64)> {
    let responder = opponent.player().opponent();
    game.check_dims(opponent.player(), opponent.values())?;
    let g = game.payoff_gradient(addends, responder, opponent.values());
    Ok(best_response_to_gradient(game, responder, &g, None))
}

/// Orientation of the counterfactual best value over minus actions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Minus minimizes plus's payoff.
    #[default]
    Min,
    Max,
}

/// Counterfactual best-response values of minus against a fixed plus strategy.
#[derive(Clone, Debug)]
pub struct CounterfactualValueTable {
    /// Unnormalized best value below each minus infoset.
    pub raw: Vec<f64>,
    /// Unnormalized best value below each minus sequence (index 0 unused).
    pub raw_seq: Vec<f64>,
    /// `Σ_{h∈I} p(h) x(h)` per minus infoset.
    pub mass: Vec<f64>,
    seq_infoset: Vec<Option<InfosetId>>,
}

impl CounterfactualValueTable {
    /// `u*(x | I)`; `None` when plus and nature never reach `I`.
    pub fn infoset_value(&self, i: InfosetId) -> Option<f64> {
        (self.mass[i] > 0.0).then(|| self.raw[i] / self.mass[i])
    }

    /// `u*(x | Ia)` for a minus sequence; `None` when its infoset has zero mass.
    pub fn sequence_value(&self, s: SeqId) -> Option<f64> {
        let i = self.seq_infoset[s]?;
        (self.mass[i] > 0.0).then(|| self.raw_seq[s] / self.mass[i])
    }

    pub fn is_defined(&self, i: InfosetId) -> bool {
        self.mass[i] > 0.0
    }
}

/// Children of every infoset in the player's infoset tree, grouped by the own
/// action that leads to them (`None` for non-decision parents).
pub(crate) fn infoset_children(game: &GameTree, player: Player) -> Vec<Vec<(Option<usize>, InfosetId)>> {
    let sets = game.infosets(player);
    let mut children = vec![Vec::new(); sets.len()];
    for (j, inf) in sets.iter().enumerate() {
        if let Some(p) = inf.parent_infoset {
            children[p].push((inf.parent_action, j));
        }
    }
    children
}

/// Computes `u*(x | I)` and `u*(x | Ia)` for every minus infoset and sequence.
pub fn counterfactual_values(game: &GameTree, addends: &PayoffAddends, x: &SequenceFormStrategy, orientation: Orientation) -> Result<CounterfactualValueTable> {
    game.check_dims(Player::Plus, x.values())?;
    let sets = game.infosets(Player::Minus);
    let xv = x.values();
    let mut mass = vec![0.0; sets.len()];
    let mut leaf = vec![0.0; sets.len()];
    for (v, node) in game.nodes().iter().enumerate() {
        let j = game.infoset_of(Player::Minus, v);
        let reach = game.chance_reach(v) * xv[game.seq_of(Player::Plus, v)];
        mass[j] += reach;
        if let Some(u) = node.utility() {
            leaf[j] += u * reach;
        }
    }
    let mut raw_seq = vec![0.0; game.num_sequences(Player::Minus)];
    for ((s, t), b) in addends.iter() {
        raw_seq[t] += b * xv[s];
    }
    let children = infoset_children(game, Player::Minus);
    let mut raw = vec![0.0; sets.len()];
    // children have larger depth, so process infosets deepest first
    let mut order: Vec<InfosetId> = (0..sets.len()).collect();
    order.sort_by_key(|&j| std::cmp::Reverse(game.node(sets[j].members[0]).depth));
    for j in order {
        let inf = &sets[j];
        let mut value = leaf[j];
        if inf.decision {
            for &(a, c) in &children[j] {
                raw_seq[inf.seq(a.expect("decision children carry an action"))] += raw[c];
            }
            let vals = (0..inf.actions.len()).map(|a| raw_seq[inf.seq(a)]);
            value += match orientation {
                Orientation::Min => vals.fold(f64::INFINITY, f64::min),
                Orientation::Max => vals.fold(f64::NEG_INFINITY, f64::max),
            };
        } else {
            value += children[j].iter().map(|&(_, c)| raw[c]).sum::<f64>();
        }
        raw[j] = value;
    }
    let seq_infoset = game.sequences(Player::Minus).iter().map(|s| s.infoset).collect();
    Ok(CounterfactualValueTable { raw, raw_seq, mass, seq_infoset })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Iterate t weighted by t.
    Linear,
    /// Iterate t weighted by t².
    #[default]
    Quadratic,
    Uniform,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    CfrPlus,
    /// CFR+ whose regret matching also counts the last instantaneous regret.
    #[default]
    PredictiveCfrPlus,
    /// Discounted CFR: positive regrets scaled by t^1.5/(t^1.5+1), negative
    /// ones halved each iteration.
    Discounted,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    /// Zero regrets, so the first iterate is uniform.
    #[default]
    Uniform,
    /// Seeded random initial regrets; used to reach different equilibria.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Target duality gap of the average strategies.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
    /// Iterations between convergence checks.
    pub check_every: usize,
    pub algorithm: Algorithm,
    pub averaging: Averaging,
    pub init: Init,
    /// Uniform probability floors `ε/m` for plus and minus.
    pub epsilon: [f64; 2],
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 100_000,
            seed: 0,
            check_every: 10,
            algorithm: Algorithm::PredictiveCfrPlus,
            averaging: Averaging::Quadratic,
            init: Init::Uniform,
            epsilon: [0.0, 0.0],
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::BadParameter(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.epsilon.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::BadParameter("epsilon must lie in [0, 1]".into()));
        }
        if self.check_every == 0 {
            return Err(Error::BadParameter("check_every must be positive".into()));
        }
        Ok(())
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn floors(&self, game: &GameTree) -> Result<[Floors; 2]> {
        Ok([
            Floors::epsilon_uniform(game, Player::Plus, self.epsilon[0])?,
            Floors::epsilon_uniform(game, Player::Minus, self.epsilon[1])?,
        ])
    }
}

/// Average strategies and their certified duality gap.
#[derive(Clone, Debug)]
pub struct Solution {
    pub x: SequenceFormStrategy,
    pub y: SequenceFormStrategy,
    /// `max_x u(x, ȳ) - min_y u(x̄, y)` over the (floored) strategy sets.
    pub gap: f64,
    /// `min_y u(x̄, y)`, a lower bound on the game value.
    pub lower: f64,
    /// `max_x u(x, ȳ)`, an upper bound on the game value.
    pub upper: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `(iteration, gap)` at each convergence check.
    pub trace: Vec<(usize, f64)>,
}

impl Solution {
    pub fn value(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,gap\n");
        for (t, g) in &self.trace {
            let _ = writeln!(out, "{t},{g:e}");
        }
        out
    }
}

struct RegretState {
    player: Player,
    algorithm: Algorithm,
    /// Number of updates so far.
    t: usize,
    regrets: Vec<f64>,
    /// Last instantaneous regrets, used as the prediction.
    last: Vec<f64>,
    avg: Vec<f64>,
    current: Vec<f64>,
}

impl RegretState {
    fn new(game: &GameTree, player: Player, config: &SolverConfig, rng: &mut ChaCha8Rng) -> Self {
        let n = game.num_sequences(player);
        let regrets = match config.init {
            Init::Uniform => vec![0.0; n],
            Init::Random => (0..n).map(|_| rng.gen::<f64>()).collect(),
        };
        Self {
            player,
            algorithm: config.algorithm,
            t: 0,
            regrets,
            last: vec![0.0; n],
            avg: vec![0.0; n],
            current: vec![0.0; n],
        }
    }

    fn matched(&self, s: SeqId) -> f64 {
        if self.algorithm == Algorithm::PredictiveCfrPlus {
            (self.regrets[s] + self.last[s]).max(0.0)
        } else {
            self.regrets[s].max(0.0)
        }
    }

    /// Realization plan of the current regret-matching+ iterate.
    fn refresh(&mut self, game: &GameTree, floors: &Floors) {
        let mut x = std::mem::take(&mut self.current);
        x[EMPTY_SEQ] = 1.0;
        for &i in game.decision_infosets(self.player) {
            let inf = game.infoset(self.player, i);
            let m = inf.actions.len();
            let parent = x[inf.parent_seq];
            let pos: f64 = (0..m).map(|a| self.matched(inf.seq(a))).sum();
            let free = 1.0 - floors.total(i);
            for a in 0..m {
                let tilde = if pos > 0.0 { self.matched(inf.seq(a)) / pos } else { 1.0 / m as f64 };
                x[inf.seq(a)] = parent * (floors.floor(i, a) + free * tilde);
            }
        }
        self.current = x;
    }

    /// Regret-matching+ update against the linear objective `g`.
    fn update(&mut self, game: &GameTree, g: &[f64]) {
        let sign = match self.player {
            Player::Plus => 1.0,
            Player::Minus => -1.0,
        };
        let mut v: Vec<f64> = g.iter().map(|&c| sign * c).collect();
        self.t += 1;
        let tp = (self.t as f64).powf(1.5);
        let (keep_pos, keep_neg) = (tp / (tp + 1.0), 0.5);
        for &i in game.decision_infosets(self.player).iter().rev() {
            let inf = game.infoset(self.player, i);
            let m = inf.actions.len();
            let parent = self.current[inf.parent_seq];
            let pos: f64 = (0..m).map(|a| self.matched(inf.seq(a))).sum();
            let tilde: Vec<f64> =
                (0..m).map(|a| if pos > 0.0 { self.matched(inf.seq(a)) / pos } else { 1.0 / m as f64 }).collect();
            let base: f64 = (0..m).map(|a| tilde[a] * v[inf.seq(a)]).sum();
            let mut value = 0.0;
            for a in 0..m {
                let s = inf.seq(a);
                value += if parent > 0.0 { self.current[s] / parent } else { tilde[a] } * v[s];
            }
            for a in 0..m {
                let s = inf.seq(a);
                self.last[s] = v[s] - base;
                self.regrets[s] = match self.algorithm {
                    Algorithm::Discounted => {
                        let r = self.regrets[s];
                        r * if r > 0.0 { keep_pos } else { keep_neg } + self.last[s]
                    }
                    _ => (self.regrets[s] + self.last[s]).max(0.0),
                };
            }
            v[inf.parent_seq] += value;
        }
    }

    fn accumulate(&mut self, weight: f64) {
        for (a, c) in self.avg.iter_mut().zip(&self.current) {
            *a += weight * c;
        }
    }

    fn average(&self) -> SequenceFormStrategy {
        let total = self.avg[EMPTY_SEQ];
        SequenceFormStrategy::new(self.player, self.avg.iter().map(|a| a / total).collect())
    }
}

/// Duality gap of a strategy pair over the floored strategy sets.
pub fn restricted_gap(
    game: &GameTree,
    addends: &PayoffAddends,
    floors: &[Floors; 2],
    x: &SequenceFormStrategy,
    y: &SequenceFormStrategy,
) -> (f64, f64, f64) {
    let gy = game.payoff_gradient(addends, Player::Minus, x.values());
    let (_, lower) = best_response_to_gradient(game, Player::Minus, &gy, Some(&floors[1]));
    let gx = game.payoff_gradient(addends, Player::Plus, y.values());
    let (_, upper) = best_response_to_gradient(game, Player::Plus, &gx, Some(&floors[0]));
    (upper - lower, lower, upper)
}

/// Runs CFR+ until the gap reaches the tolerance or the iteration budget is
/// spent; never fails on non-convergence.
pub fn run(game: &GameTree, addends: &PayoffAddends, floors: &[Floors; 2], config: &SolverConfig) -> Result<Solution> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut xs = RegretState::new(game, Player::Plus, config, &mut rng);
    let mut ys = RegretState::new(game, Player::Minus, config, &mut rng);
    let mut trace = Vec::new();
    let mut last = None;
    for t in 1..=config.max_iterations.max(1) {
        let weight = match config.averaging {
            Averaging::Linear => t as f64,
            Averaging::Quadratic => (t as f64).powi(2),
            Averaging::Uniform => 1.0,
        };
        // alternating updates: minus responds to plus's freshly updated iterate
        ys.refresh(game, &floors[1]);
        xs.refresh(game, &floors[0]);
        let gx = game.payoff_gradient(addends, Player::Plus, &ys.current);
        xs.update(game, &gx);
        xs.accumulate(weight);
        xs.refresh(game, &floors[0]);
        let gy = game.payoff_gradient(addends, Player::Minus, &xs.current);
        ys.update(game, &gy);
        ys.accumulate(weight);
        if t % config.check_every == 0 || t == config.max_iterations.max(1) {
            let (x, y) = (xs.average(), ys.average());
            let (gap, lower, upper) = restricted_gap(game, addends, floors, &x, &y);
            trace.push((t, gap));
            let converged = gap <= config.tolerance;
            last = Some(Solution { x, y, gap, lower, upper, iterations: t, converged, trace: Vec::new() });
            if converged {
                break;
            }
        }
    }
    let mut sol = last.expect("at least one convergence check runs");
    sol.trace = trace;
    Ok(sol)
}

/// Solves with the config's uniform ε floors; errors if the tolerance is not met.
pub fn solve(game: &GameTree, addends: &PayoffAddends, config: &SolverConfig) -> Result<Solution> {
    let floors = config.floors(game)?;
    solve_restricted(game, addends, &floors, config)
}

/// Solves over the floored strategy sets; errors if the tolerance is not met.
pub fn solve_restricted(game: &GameTree, addends: &PayoffAddends, floors: &[Floors; 2], config: &SolverConfig) -> Result<Solution> {
    let sol = run(game, addends, floors, config)?;
    if !sol.converged {
        return Err(Error::DidNotConverge { gap: sol.gap, iterations: sol.iterations });
    }
    Ok(sol)
}

/// Solves `n` times from seeded random initial regrets.
pub fn sample_equilibria(game: &GameTree, addends: &PayoffAddends, config: &SolverConfig, n: usize) -> Result<Vec<Solution>> {
    (0..n as u64)
        .map(|k| {
            let cfg = SolverConfig { init: Init::Random, seed: config.seed.wrapping_add(k), ..config.clone() };
            solve(game, addends, &cfg)
        })
        .collect()
}

/// Exploitability measured against a game value computed once and cached.
pub struct ExploitabilityOracle<'g> {
    game: &'g GameTree,
    addends: PayoffAddends,
    tolerance: f64,
    max_iterations: usize,
    value: OnceLock<f64>,
}

impl<'g> ExploitabilityOracle<'g> {
    pub fn new(game: &'g GameTree) -> Self {
        Self { game, addends: PayoffAddends::new(), tolerance: 1e-8, max_iterations: 2_000_000, value: OnceLock::new() }
    }

    /// Uses a known game value instead of solving for it.
    pub fn with_value(game: &'g GameTree, value: f64) -> Self {
        let o = Self::new(game);
        let _ = o.value.set(value);
        o
    }

    pub fn with_addends(mut self, addends: PayoffAddends) -> Self {
        self.addends = addends;
        self
    }

    /// Duality-gap tolerance of the value computation; the value error is at
    /// most half of it.
    pub fn with_tolerance(mut self, tolerance: f64, max_iterations: usize) -> Self {
        self.tolerance = tolerance;
        self.max_iterations = max_iterations;
        self
    }

    pub fn game(&self) -> &GameTree {
        self.game
    }

    pub fn addends(&self) -> &PayoffAddends {
        &self.addends
    }

    /// The game value `v*`.
    pub fn value(&self) -> Result<f64> {
        if let Some(&v) = self.value.get() {
            return Ok(v);
        }
        let cfg = SolverConfig {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            check_every: 50,
            ..SolverConfig::default()
        };
        let sol = solve(self.game, &self.addends, &cfg)?;
        Ok(*self.value.get_or_init(|| sol.value()))
    }

    /// `v* - min_y u(x, y)`.
    pub fn plus(&self, x: &SequenceFormStrategy) -> Result<f64> {
        let (_, worst) = best_response(self.game, &self.addends, x)?;
        Ok(self.value()? - worst)
    }

    /// `max_x u(x, y) - v*`.
    pub fn minus(&self, y: &SequenceFormStrategy) -> Result<f64> {
        let (_, best) = best_response(self.game, &self.addends, y)?;
        Ok(best - self.value()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games;
    use crate::strategy::BehaviorStrategy;

    #[test]
    fn kuhn_value() {
        let g = games::kuhn();
        let sol = solve(&g, &PayoffAddends::new(), &SolverConfig::default().with_tolerance(1e-7)).unwrap();
        assert!((sol.value() + 1.0 / 36.0).abs() < 1e-7, "{}", sol.value());
        sol.x.validate(&g).unwrap();
        sol.y.validate(&g).unwrap();
    }

    #[test]
    fn hidden_pennies_closed_form() {
        let n = 100;
        let g = games::hidden_mp_counterexample(n).unwrap();
        let mut b = BehaviorStrategy::uniform(&g, Player::Plus);
        let p = 0.5 + 2.0 / n as f64;
        for &i in g.decision_infosets(Player::Plus) {
            let h = g.infoset(Player::Plus, i).actions.iter().position(|a| a == "h").unwrap();
            let mut row = vec![1.0 - p; 2];
            row[h] = p;
            b.set(i, row);
        }
        let x = b.to_sequence_form(&g);
        let (_, v) = best_response(&g, &PayoffAddends::new(), &x).unwrap();
        assert!((v - (1.0 - 2.0 * p)).abs() < 1e-12);
        let oracle = ExploitabilityOracle::with_value(&g, 0.0);
        assert!((oracle.plus(&x).unwrap() - 4.0 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn floors_respected() {
        let g = games::kuhn();
        let cfg = SolverConfig { epsilon: [0.5, 0.0], tolerance: 1e-5, ..SolverConfig::default() };
        let sol = solve(&g, &PayoffAddends::new(), &cfg).unwrap();
        let b = sol.x.to_behavior(&g);
        for &i in g.decision_infosets(Player::Plus) {
            assert!(b.at(i).iter().all(|&p| p >= 0.25 - 1e-12));
        }
    }

    #[test]
    fn non_convergence_reported() {
        let g = games::kuhn();
        let cfg = SolverConfig { tolerance: 1e-12, max_iterations: 20, ..SolverConfig::default() };
        assert!(matches!(solve(&g, &PayoffAddends::new(), &cfg), Err(Error::DidNotConverge { iterations: 20, .. })));
        assert!(!run(&g, &PayoffAddends::new(), &cfg.floors(&g).unwrap(), &cfg).unwrap().converged);
    }

    #[test]
    fn bad_config_rejected() {
        let g = games::kuhn();
        let cfg = SolverConfig { tolerance: 0.0, ..SolverConfig::default() };
        assert!(matches!(solve(&g, &PayoffAddends::new(), &cfg), Err(Error::BadParameter(_))));
    }
}
