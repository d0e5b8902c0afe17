//! Safety procedures and experiment pipelines: nested 1-KLSS everywhere,
//! blueprint updating, deviation allocation, affine-equilibrium checks and
//! the experiment tables.

pub mod safety;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{run, ExploitabilityOracle, Floors, Solution, SolverConfig};
use crate::error::{Error, Result};
use crate::game::{GameTree, InfosetId, NodeId, PayoffAddends, Player};
use crate::games;
use crate::knowledge::{game_stats, GameStats, IndependentSetPlan, Order, SamplingConvention};
use crate::strategy::{BehaviorStrategy, SequenceFormStrategy};
use crate::subgame::{make_subgame, maxmargin_to_resolve, GadgetGame, GadgetKind, SubgameOptions};

/// Deterministic generator for a named purpose derived from one seed.
pub fn substream(seed: u64, name: &str) -> ChaCha8Rng {
    // FNV-1a, stable across platforms and toolchains
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(h);
    rng
}

/// Settings shared by every gadget solve of a nested run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NestedConfig {
    pub solver: SolverConfig,
    /// Floor applied at every gadget plus infoset except the one being solved.
    pub epsilon: f64,
    /// Which actions the floor covers; matches the blueprint's restriction.
    pub restriction: Restriction,
    pub options: SubgameOptions,
    /// Solve the resolve form of each gadget instead of the maxmargin form.
    pub resolve: bool,
}

impl Default for NestedConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig { max_iterations: 20_000, ..SolverConfig::default() },
            epsilon: 0.0,
            restriction: Restriction::Uniform,
            options: SubgameOptions::default(),
            resolve: false,
        }
    }
}

/// Tolerance used for a game of the given size.
pub fn default_tolerance(nodes: usize) -> f64 {
    if nodes <= 10_000 {
        1e-6
    } else {
        1e-4
    }
}

/// One gadget solve inside a nested run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveRecord {
    /// Label of the solved plus infoset in the full game.
    pub infoset: String,
    /// Nesting depth, 0 for a gadget built from the full game.
    pub depth: usize,
    pub kind: GadgetKind,
    pub nodes: usize,
    pub branches: usize,
    /// Gadget value: the smallest margin, in branch units.
    pub min_margin: f64,
    /// Duality gap in full-game units.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NestedSolveRecord {
    pub solves: Vec<SolveRecord>,
    /// Composed full-game plus strategy.
    pub strategy: BehaviorStrategy,
    pub exploitability_before: f64,
    pub exploitability_after: f64,
}

impl NestedSolveRecord {
    pub fn iterations(&self) -> usize {
        self.solves.iter().map(|s| s.iterations).sum()
    }

    pub fn all_converged(&self) -> bool {
        self.solves.iter().all(|s| s.converged)
    }
}

/// Least-exploitable plus strategy under the given floors, certified by best
/// response against the full game.
#[derive(Clone, Debug)]
pub struct Blueprint {
    pub x: SequenceFormStrategy,
    pub exploitability: f64,
    pub iterations: usize,
    /// Certified duality gap of the restricted solve.
    pub gap: f64,
}

/// Which actions the blueprint must keep playing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Restriction {
    /// Every action with probability at least `ε/m`.
    Uniform,
    /// The named action wherever it is legal, with the share `ε/m` it
    /// would get under the uniform floor; other actions are free.
    Action(String),
}

pub fn restriction_floors(game: &GameTree, restriction: &Restriction, epsilon: f64) -> Result<Floors> {
    match restriction {
        Restriction::Uniform => Floors::epsilon_uniform(game, Player::Plus, epsilon),
        Restriction::Action(name) => {
            let mut f = Floors::none(game, Player::Plus);
            for &i in game.decision_infosets(Player::Plus) {
                let actions = &game.infoset(Player::Plus, i).actions;
                if let Some(a) = actions.iter().position(|x| x == name) {
                    let mut row = vec![0.0; actions.len()];
                    row[a] = epsilon / actions.len() as f64;
                    f.set(game, i, row)?;
                }
            }
            Ok(f)
        }
    }
}

pub fn restricted_blueprint(
    game: &GameTree,
    oracle: &ExploitabilityOracle<'_>,
    restriction: &Restriction,
    epsilon: f64,
    config: &SolverConfig,
) -> Result<Blueprint> {
    let bp = restricted_blueprint_run(game, oracle, restriction, epsilon, config)?;
    if bp.gap > config.tolerance {
        return Err(Error::DidNotConverge { gap: bp.gap, iterations: bp.iterations });
    }
    Ok(bp)
}

/// Like [`restricted_blueprint`] but returns the strategy reached when the
/// iteration budget runs out; its exploitability is still exact.
pub fn restricted_blueprint_run(
    game: &GameTree,
    oracle: &ExploitabilityOracle<'_>,
    restriction: &Restriction,
    epsilon: f64,
    config: &SolverConfig,
) -> Result<Blueprint> {
    let floors = [restriction_floors(game, restriction, epsilon)?, Floors::none(game, Player::Minus)];
    let sol = run(game, &PayoffAddends::new(), &floors, config)?;
    let exploitability = oracle.plus(&sol.x)?;
    Ok(Blueprint { x: sol.x, exploitability, iterations: sol.iterations, gap: sol.gap })
}

pub fn epsilon_uniform_blueprint(
    game: &GameTree,
    oracle: &ExploitabilityOracle<'_>,
    epsilon: f64,
    config: &SolverConfig,
) -> Result<Blueprint> {
    restricted_blueprint(game, oracle, &Restriction::Uniform, epsilon, config)
}

/// The plus decision infoset preceding `i` in plus's own history.
pub(crate) fn plus_parent(game: &GameTree, i: InfosetId) -> Option<InfosetId> {
    game.sequences(Player::Plus)[game.infoset(Player::Plus, i).parent_seq].infoset
}

/// A game the nested recursion works in, with the map back to the full game.
struct Ctx<'a> {
    game: &'a GameTree,
    addends: &'a PayoffAddends,
    x: &'a SequenceFormStrategy,
    to_full: &'a [Option<NodeId>],
    /// Full-game value of one unit of this game's payoff.
    weight: f64,
}

impl Ctx<'_> {
    fn full_infoset(&self, full: &GameTree, i: InfosetId) -> InfosetId {
        let v = self.game.infoset(Player::Plus, i).members[0];
        full.infoset_of(Player::Plus, self.to_full[v].expect("plus decision nodes come from the full game"))
    }

    /// Copies this context's behavior at `root` and every plus infoset below it.
    fn copy_below(&self, full: &GameTree, root: InfosetId, out: &mut BehaviorStrategy) {
        let beh = self.x.to_behavior(self.game);
        for &j in self.game.decision_infosets(Player::Plus) {
            let mut cur = Some(j);
            while let Some(c) = cur {
                if c == root {
                    out.set(self.full_infoset(full, j), beh.at(j).to_vec());
                    break;
                }
                cur = plus_parent(self.game, c);
            }
        }
    }
}

/// Largest absolute terminal utility or addend of a gadget, at least 1.
fn payoff_magnitude(gg: &GadgetGame) -> f64 {
    let u = gg.tree.terminals().iter().filter_map(|z| gg.tree.node(z.node).utility()).map(f64::abs);
    let b = gg.addends.iter().map(|(_, v)| v.abs());
    u.chain(b).fold(1.0, f64::max)
}

/// How the solver tolerance is shared among the gadgets of one run.
#[derive(Clone, Copy, Debug)]
struct Budget {
    /// Longest chain of plus decisions.
    levels: usize,
    /// Most gadgets a run can solve.
    solves: usize,
}

impl Budget {
    fn of(game: &GameTree) -> Self {
        let mut depth = vec![0usize; game.infosets(Player::Plus).len()];
        let mut levels = 1;
        for &i in game.decision_infosets(Player::Plus) {
            depth[i] = plus_parent(game, i).map_or(1, |p| depth[p] + 1);
            levels = levels.max(depth[i]);
        }
        Self { levels, solves: game.decision_infosets(Player::Plus).len().max(1) }
    }
}

/// Builds and solves the order-1 gadget for `infoset`, floors everywhere but
/// at the solved infoset itself. The solver tolerance is split over the
/// `levels` of nested solves.
fn solve_gadget(ctx: &Ctx<'_>, infoset: InfosetId, config: &NestedConfig, budget: Budget) -> Result<(GadgetGame, Solution, Vec<InfosetId>, f64)> {
    let mut gg = make_subgame(ctx.game, ctx.addends, ctx.x, infoset, Order::Finite(1), config.options)?;
    if config.resolve {
        gg = maxmargin_to_resolve(&gg)?;
    }
    let roots: Vec<InfosetId> = gg
        .plus_infoset_map(ctx.game)
        .into_iter()
        .filter(|&(_, src)| src == infoset)
        .map(|(g, _)| g)
        .collect();
    let mut plus = restriction_floors(&gg.tree, &config.restriction, config.epsilon)?;
    for &r in &roots {
        plus.exempt(r);
    }
    let floors = [plus, Floors::none(&gg.tree, Player::Minus)];
    // one gadget unit is worth `weight` units of the full game; sibling
    // weights sum to at most one, so a gap of tol/levels per gadget keeps the
    // total near tol. Gadgets too light to matter may stop once their share of
    // tol in full-game units is met.
    let weight = ctx.weight * gg.branches.iter().map(|b| b.mass).sum::<f64>();
    let tol = config.solver.tolerance;
    let solver = SolverConfig {
        tolerance: (tol * payoff_magnitude(&gg) / budget.levels as f64).max(tol / (budget.solves as f64 * weight)),
        ..config.solver.clone()
    };
    let sol = run(&gg.tree, &gg.addends, &floors, &solver)?;
    Ok((gg, sol, roots, weight))
}

/// Visits plus infosets depth first; `filter` decides (on full-game ids)
/// where re-solving may continue.
struct Nested<'a> {
    full: &'a GameTree,
    config: &'a NestedConfig,
    filter: Option<&'a dyn Fn(InfosetId) -> bool>,
    budget: Budget,
    out: BehaviorStrategy,
    solves: Vec<SolveRecord>,
}

impl Nested<'_> {
    fn visit(&mut self, ctx: &Ctx<'_>, infoset: InfosetId, depth: usize) -> Result<()> {
        if ctx.x.reach(ctx.game, infoset) <= 0.0 {
            return Ok(());
        }
        let full_id = ctx.full_infoset(self.full, infoset);
        if let Some(f) = self.filter {
            if !f(full_id) {
                ctx.copy_below(self.full, infoset, &mut self.out);
                return Ok(());
            }
        }
        let (gg, sol, roots, weight) = solve_gadget(ctx, infoset, self.config, self.budget)?;
        let beh = sol.x.to_behavior(&gg.tree);
        let root = roots[0];
        self.out.set(full_id, beh.at(root).to_vec());
        self.solves.push(SolveRecord {
            infoset: self.full.infoset(Player::Plus, full_id).label.clone(),
            depth,
            kind: gg.kind,
            nodes: gg.tree.num_nodes(),
            branches: gg.branches.len(),
            min_margin: sol.value(),
            gap: sol.gap * weight,
            iterations: sol.iterations,
            converged: sol.converged,
        });
        let to_full: Vec<Option<NodeId>> =
            (0..gg.tree.num_nodes()).map(|v| gg.source_node(v).and_then(|s| ctx.to_full[s])).collect();
        let child = Ctx { game: &gg.tree, addends: &gg.addends, x: &sol.x, to_full: &to_full, weight };
        let below: Vec<InfosetId> = gg
            .tree
            .decision_infosets(Player::Plus)
            .iter()
            .copied()
            .filter(|&j| plus_parent(&gg.tree, j).is_some_and(|p| roots.contains(&p)))
            .collect();
        for j in below {
            self.visit(&child, j, depth + 1)?;
        }
        Ok(())
    }
}

fn nested_run(
    game: &GameTree,
    blueprint: &SequenceFormStrategy,
    config: &NestedConfig,
    filter: Option<&dyn Fn(InfosetId) -> bool>,
    oracle: &ExploitabilityOracle<'_>,
) -> Result<NestedSolveRecord> {
    let identity: Vec<Option<NodeId>> = (0..game.num_nodes()).map(Some).collect();
    let none = PayoffAddends::new();
    let ctx = Ctx { game, addends: &none, x: blueprint, to_full: &identity, weight: 1.0 };
    let mut nested = Nested { full: game, config, filter, budget: Budget::of(game), out: blueprint.to_behavior(game), solves: Vec::new() };
    let roots: Vec<InfosetId> =
        game.decision_infosets(Player::Plus).iter().copied().filter(|&i| plus_parent(game, i).is_none()).collect();
    for i in roots {
        nested.visit(&ctx, i, 0)?;
    }
    let composed = nested.out.to_sequence_form(game);
    Ok(NestedSolveRecord {
        exploitability_before: oracle.plus(blueprint)?,
        exploitability_after: oracle.plus(&composed)?,
        solves: nested.solves,
        strategy: nested.out,
    })
}

/// Nested order-1 subgame solving at every plus infoset reached with positive
/// probability; unreached infosets keep the blueprint.
pub fn nested_klss_everywhere(
    game: &GameTree,
    blueprint: &SequenceFormStrategy,
    config: &NestedConfig,
    oracle: &ExploitabilityOracle<'_>,
) -> Result<NestedSolveRecord> {
    nested_run(game, blueprint, config, None, oracle)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UpdateTrace {
    /// Blueprint after each update, starting with the input.
    pub blueprints: Vec<SequenceFormStrategy>,
    /// Plus exploitability of each blueprint.
    pub exploitability: Vec<f64>,
    pub solves: Vec<SolveRecord>,
}

/// Re-solves each scheduled infoset from the current blueprint and writes the
/// result back into the blueprint below it.
pub fn blueprint_update_schedule(
    game: &GameTree,
    blueprint: &SequenceFormStrategy,
    schedule: &[InfosetId],
    config: &NestedConfig,
    oracle: &ExploitabilityOracle<'_>,
) -> Result<UpdateTrace> {
    let identity: Vec<Option<NodeId>> = (0..game.num_nodes()).map(Some).collect();
    let none = PayoffAddends::new();
    let mut behavior = blueprint.to_behavior(game);
    let mut current = blueprint.clone();
    let mut trace = UpdateTrace { blueprints: vec![current.clone()], exploitability: vec![oracle.plus(&current)?], solves: Vec::new() };
    for &i in schedule {
        let ctx = Ctx { game, addends: &none, x: &current, to_full: &identity, weight: 1.0 };
        let (gg, sol, _, weight) = solve_gadget(&ctx, i, config, Budget { levels: 1, solves: schedule.len().max(1) })?;
        gg.splice(game, &sol.x.to_behavior(&gg.tree), &mut behavior);
        trace.solves.push(SolveRecord {
            infoset: game.infoset(Player::Plus, i).label.clone(),
            depth: 0,
            kind: gg.kind,
            nodes: gg.tree.num_nodes(),
            branches: gg.branches.len(),
            min_margin: sol.value(),
            gap: sol.gap * weight,
            iterations: sol.iterations,
            converged: sol.converged,
        });
        current = behavior.to_sequence_form(game);
        trace.exploitability.push(oracle.plus(&current)?);
        trace.blueprints.push(current.clone());
    }
    Ok(trace)
}

/// Plus decision infosets in play order: roots first, then each level below.
pub fn breadth_first_schedule(game: &GameTree) -> Vec<InfosetId> {
    let mut depth: Vec<(usize, InfosetId)> = game
        .decision_infosets(Player::Plus)
        .iter()
        .map(|&i| {
            let mut d = 0;
            let mut cur = plus_parent(game, i);
            while let Some(p) = cur {
                d += 1;
                cur = plus_parent(game, p);
            }
            (d, i)
        })
        .collect();
    depth.sort_unstable();
    depth.into_iter().map(|(_, i)| i).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AllocationRecord {
    /// Sampled ancestor-closed independent set (full-game plus infosets).
    pub allowed: BTreeSet<InfosetId>,
    pub nested: NestedSolveRecord,
}

/// Nested solving that stops for good at the first infoset outside a sampled
/// independent set of the collapsed graph.
pub fn allocation_play(
    game: &GameTree,
    blueprint: &SequenceFormStrategy,
    seed: u64,
    config: &NestedConfig,
    oracle: &ExploitabilityOracle<'_>,
) -> Result<AllocationRecord> {
    let plan = IndependentSetPlan::new(game);
    let allowed = plan.sample(&mut substream(seed, "independent-set"));
    allocation_play_with(game, blueprint, allowed, config, oracle)
}

/// [`allocation_play`] with a given set.
pub fn allocation_play_with(
    game: &GameTree,
    blueprint: &SequenceFormStrategy,
    allowed: BTreeSet<InfosetId>,
    config: &NestedConfig,
    oracle: &ExploitabilityOracle<'_>,
) -> Result<AllocationRecord> {
    let filter = |i: InfosetId| allowed.contains(&i);
    let nested = nested_run(game, blueprint, config, Some(&filter), oracle)?;
    Ok(AllocationRecord { allowed, nested })
}

/// `max |u(x, y*) - v*|` over the given minus strategies.
pub fn affine_check(game: &GameTree, x: &SequenceFormStrategy, ne_samples: &[SequenceFormStrategy], value: f64) -> Result<f64> {
    let none = PayoffAddends::new();
    ne_samples.iter().try_fold(0.0f64, |worst, y| Ok(worst.max((game.expected_value(&none, x, y)? - value).abs())))
}

/// One Table 1 row to reproduce.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1Entry {
    /// Name printed in the report.
    pub name: String,
    pub game: String,
    pub restriction: Restriction,
}

impl Table1Entry {
    pub fn uniform(game: &str) -> Self {
        Self { name: game.into(), game: game.into(), restriction: Restriction::Uniform }
    }

    pub fn action(game: &str, action: &str) -> Self {
        Self { name: format!("{game}-eps-{action}"), game: game.into(), restriction: Restriction::Action(action.into()) }
    }
}

/// The rows of the experiment table, in order.
pub fn table1_entries() -> Vec<Table1Entry> {
    vec![
        Table1Entry::uniform("dark-hex-2x2"),
        Table1Entry::uniform("goofspiel4-random"),
        Table1Entry::uniform("goofspiel4-inc"),
        Table1Entry::uniform("kuhn"),
        Table1Entry::action("kuhn", "bet"),
        Table1Entry::uniform("leduc3"),
        Table1Entry::action("leduc3", "fold"),
        Table1Entry::action("leduc3", "raise"),
        Table1Entry::uniform("liars-dice5"),
        Table1Entry::uniform("mp-100"),
    ]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub game: String,
    pub epsilon: f64,
    pub blueprint_expl: f64,
    /// Certified gap of the blueprint solve; above the tolerance when the
    /// iteration budget ran out first.
    pub blueprint_gap: f64,
    pub post_expl: f64,
    /// `blueprint / post`, infinite when post is below the numeric floor.
    pub ratio: f64,
    pub seed: u64,
    pub solver_iters: usize,
    pub wallclock_ms: u128,
    /// Gadget solves that stopped at the iteration budget; the post-solve
    /// exploitability is still exact.
    pub unconverged: usize,
    /// Largest gadget duality gap, in full-game units.
    pub max_gadget_gap: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
    pub config: Table1Config,
}

impl ExperimentReport {
    pub const CSV_HEADER: &'static str = "game,epsilon,blueprint_expl,post_expl,ratio,seed,solver_iters,wallclock_ms";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            if let Some(e) = &r.error {
                let _ = writeln!(out, "{},{},error,error,error,{},0,0 # {}", r.game, r.epsilon, r.seed, e.replace(['\n', ','], " "));
                continue;
            }
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{},{},{},{}",
                r.game,
                r.epsilon,
                r.blueprint_expl,
                r.post_expl,
                if r.ratio.is_finite() { format!("{:.3}", r.ratio) } else { "inf".into() },
                r.seed,
                r.solver_iters,
                r.wallclock_ms
            );
        }
        out
    }
}

/// Experiment settings; solver tolerances follow game size unless fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Table1Config {
    pub epsilon: f64,
    pub seed: u64,
    /// Fixed solver tolerance; `None` picks by game size.
    pub tolerance: Option<f64>,
    pub max_iterations: usize,
    /// Iteration budget of each gadget solve; degenerate gadgets converge
    /// slowly and are recorded as unconverged rather than run to the end.
    pub gadget_max_iterations: usize,
    pub options: SubgameOptions,
    pub resolve: bool,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    /// Record wall-clock times; off keeps reports byte-identical across runs.
    pub timing: bool,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            epsilon: 0.25,
            seed: 0,
            tolerance: None,
            max_iterations: 1_000_000,
            gadget_max_iterations: 20_000,
            options: SubgameOptions::default(),
            resolve: false,
            jobs: 0,
            timing: false,
        }
    }
}

impl Table1Config {
    pub fn solver(&self, game: &GameTree, purpose: &str) -> SolverConfig {
        use rand::RngCore;
        SolverConfig {
            tolerance: self.tolerance.unwrap_or_else(|| default_tolerance(game.num_nodes())),
            max_iterations: self.max_iterations,
            seed: substream(self.seed, purpose).next_u64(),
            ..SolverConfig::default()
        }
    }

    pub fn nested(&self, game: &GameTree, epsilon: f64, restriction: &Restriction) -> NestedConfig {
        use rand::RngCore;
        let options = SubgameOptions { seed: substream(self.seed, "transposition-shuffle").next_u64(), ..self.options };
        let solver = SolverConfig { max_iterations: self.gadget_max_iterations, ..self.solver(game, "gadget-solver") };
        NestedConfig { solver, epsilon, restriction: restriction.clone(), options, resolve: self.resolve }
    }
}

/// Oracle whose value is computed at a tolerance well below the report's.
pub fn exploitability_oracle(game: &GameTree) -> ExploitabilityOracle<'_> {
    ExploitabilityOracle::new(game).with_tolerance(default_tolerance(game.num_nodes()) * 0.01, 2_000_000)
}

fn table1_row(entry: &Table1Entry, config: &Table1Config) -> Result<ExperimentRow> {
    let start = Instant::now();
    let game = games::by_name(&entry.game)?;
    let oracle = exploitability_oracle(&game);
    let bp_cfg = config.solver(&game, "blueprint-solver");
    let bp = restricted_blueprint_run(&game, &oracle, &entry.restriction, config.epsilon, &bp_cfg)?;
    let nested_cfg = config.nested(&game, config.epsilon, &entry.restriction);
    let rec = nested_klss_everywhere(&game, &bp.x, &nested_cfg, &oracle)?;
    let floor = 5.0 * nested_cfg.solver.tolerance;
    let post = rec.exploitability_after;
    Ok(ExperimentRow {
        game: entry.name.clone(),
        epsilon: config.epsilon,
        blueprint_expl: bp.exploitability,
        blueprint_gap: bp.gap,
        post_expl: post,
        ratio: if post <= floor { f64::INFINITY } else { bp.exploitability / post },
        seed: config.seed,
        solver_iters: bp.iterations + rec.iterations(),
        wallclock_ms: if config.timing { start.elapsed().as_millis() } else { 0 },
        unconverged: rec.solves.iter().filter(|s| !s.converged).count(),
        max_gadget_gap: rec.solves.iter().map(|s| s.gap).fold(0.0, f64::max),
        error: None,
    })
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| Error::BadParameter(e.to_string()))
}

/// Blueprint and post-solve exploitability per entry; failed rows are kept
/// with their error and the run continues.
pub fn run_table1(entries: &[Table1Entry], config: &Table1Config) -> Result<ExperimentReport> {
    let rows = thread_pool(config.jobs)?.install(|| {
        entries
            .par_iter()
            .map(|e| {
                table1_row(e, config).unwrap_or_else(|err| ExperimentRow {
                    game: e.name.clone(),
                    epsilon: config.epsilon,
                    blueprint_expl: f64::NAN,
                    blueprint_gap: f64::NAN,
                    post_expl: f64::NAN,
                    ratio: f64::NAN,
                    seed: config.seed,
                    solver_iters: 0,
                    wallclock_ms: 0,
                    unconverged: 0,
                    max_gadget_gap: f64::NAN,
                    error: Some(err.to_string()),
                })
            })
            .collect()
    });
    Ok(ExperimentReport { rows, config: config.clone() })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Table2Row {
    pub game: String,
    pub stats: GameStats,
}

pub fn run_table2(names: &[&str], convention: SamplingConvention, jobs: usize) -> Result<Vec<Table2Row>> {
    thread_pool(jobs)?.install(|| {
        names
            .par_iter()
            .map(|&name| Ok(Table2Row { game: name.to_string(), stats: game_stats(&games::by_name(name)?, convention) }))
            .collect()
    })
}

pub fn table2_csv(rows: &[Table2Row]) -> String {
    let mut out = String::from("game,nodes,infosets,diameter");
    if let Some(r) = rows.first() {
        for (k, _) in &r.stats.avg_knowledge_size {
            let _ = write!(out, ",avg_I{k}");
        }
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{},{},{}", r.game, r.stats.nodes, r.stats.decision_infosets, r.stats.diameter);
        for (_, v) in &r.stats.avg_knowledge_size {
            let _ = write!(out, ",{v:.2}");
        }
        out.push('\n');
    }
    out
}
