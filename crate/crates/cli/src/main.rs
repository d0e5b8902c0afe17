mod config;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use klss::equilibrium::{best_response, counterfactual_values, solve};
use klss::harness::safety::{self, Check};
use klss::harness::{run_table1, run_table2, table1_entries, table2_csv, Table1Entry};
use klss::knowledge::{infoset_knowledge_set, IndependentSetPlan, Order, SamplingConvention};
use klss::subgame::make_subgame;
use klss::{games, Error, GameTree, PayoffAddends, Player, SequenceFormStrategy};
use serde::Serialize;

use config::RunConfig;

#[derive(Parser)]
#[command(name = "klss", version, about = "Knowledge-limited subgame solving bench")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Flags {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Solver duality-gap tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    iters: Option<usize>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Add the reach gift to gadget alternatives.
    #[arg(long, global = true)]
    reach: bool,
    #[arg(long, global = true)]
    merge_transpositions: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// JSON audit file with per-row records and the run configuration.
    #[arg(long, global = true)]
    audit: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Load the game from a JSON game file instead of the catalog.
    #[arg(long, global = true)]
    game_file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Node, infoset and knowledge-set statistics of a game.
    Stats {
        game: Option<String>,
        #[arg(long)]
        convention: Option<SamplingConvention>,
        /// Also list every decision infoset label.
        #[arg(long)]
        infosets: bool,
    },
    /// Solve a game and certify the result with best responses.
    Solve { game: Option<String> },
    /// Build the maxmargin gadget at a plus infoset: `subgame <game> <infoset>`,
    /// or `subgame <infoset>` with --game-file.
    Subgame {
        #[arg(num_args = 1..=2, required = true)]
        target: Vec<String>,
        #[arg(long, default_value = "1")]
        k: Order,
        #[arg(long, value_enum, default_value_t = BlueprintKind::Uniform)]
        blueprint: BlueprintKind,
    },
    /// Knowledge set of an infoset and its allocation probability.
    Knowledge {
        #[arg(num_args = 1..=2, required = true)]
        target: Vec<String>,
        #[arg(long, default_value = "1")]
        k: Order,
        #[arg(long, value_enum, default_value_t = Side::Plus)]
        player: Side,
    },
    /// Blueprint and post-solve exploitability table.
    Table1 {
        /// Row names such as `kuhn` or `kuhn-eps-bet`; all rows by default.
        entries: Vec<String>,
    },
    /// Game statistics table.
    Table2 { games: Vec<String> },
    /// Safety property suites; exits with 4 on any violation.
    Safety {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long = "game")]
        games: Vec<String>,
        #[arg(long)]
        seeds: Option<u64>,
        /// Size of the hidden matching pennies counterexample.
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Sampled minus equilibria for the affine check.
        #[arg(long, default_value_t = 25)]
        samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BlueprintKind {
    Uniform,
    Equilibrium,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Plus,
    Minus,
}

impl From<Side> for Player {
    fn from(s: Side) -> Self {
        match s {
            Side::Plus => Player::Plus,
            Side::Minus => Player::Minus,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Prop1,
    Thm1,
    Thm2,
    Thm3,
    Preservation,
    All,
}

/// A failed property; maps to exit code 4.
#[derive(Debug)]
struct Violation(usize);

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} property check(s) failed", self.0)
    }
}

impl std::error::Error for Violation {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Violation>().is_some() {
        return 4;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::DidNotConverge { .. }) => 3,
        Some(
            Error::UnknownGame(_) | Error::UnknownInfoset(_) | Error::BadParameter(_) | Error::BadOrder(_) | Error::Parse(_),
        ) => 2,
        _ => 1,
    }
}

fn resolve_config(flags: &Flags) -> Result<RunConfig> {
    let mut c = match &flags.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = flags.seed {
        c.seed = s;
    }
    if let Some(t) = flags.tol {
        if !(t > 0.0) {
            return Err(Error::BadParameter(format!("--tol must be positive, got {t}")).into());
        }
        c.tolerance = Some(t);
    }
    if let Some(n) = flags.iters {
        c.max_iterations = n;
    }
    if let Some(e) = flags.epsilon {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::BadParameter(format!("--epsilon must lie in [0, 1], got {e}")).into());
        }
        c.epsilon = e;
    }
    c.reach |= flags.reach;
    c.merge_transpositions |= flags.merge_transpositions;
    if let Some(j) = flags.jobs {
        c.jobs = j;
    }
    if flags.out.is_some() {
        c.out.clone_from(&flags.out);
    }
    if flags.audit.is_some() {
        c.audit.clone_from(&flags.audit);
    }
    Ok(c)
}

fn load_game(name: Option<&str>, file: Option<&Path>) -> Result<(String, GameTree)> {
    match (file, name) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok((p.display().to_string(), GameTree::from_json(&text)?))
        }
        (None, Some(n)) => Ok((n.to_string(), games::by_name(n)?)),
        (None, None) => Err(Error::BadParameter("a game name or --game-file is required".into()).into()),
    }
}

/// Splits `[game] infoset` positionals depending on whether a game file is given.
fn game_and_infoset(target: &[String], file: Option<&Path>) -> Result<(String, GameTree, String)> {
    let (name, infoset) = match (file.is_some(), target) {
        (true, [i]) => (None, i.clone()),
        (false, [g, i]) => (Some(g.as_str()), i.clone()),
        _ => return Err(Error::BadParameter("expected `<game> <infoset>`, or `<infoset>` with --game-file".into()).into()),
    };
    let (name, game) = load_game(name, file)?;
    Ok((name, game, infoset))
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Prints `text`, and also writes it to `--out` when given.
fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    print!("{text}");
    if let Some(p) = &cfg.out {
        write_atomic(p, text)?;
    }
    Ok(())
}

fn write_audit<T: Serialize>(cfg: &RunConfig, records: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Audit<'a, T> {
        config: &'a RunConfig,
        records: &'a T,
    }
    if let Some(p) = &cfg.audit {
        write_atomic(p, &serde_json::to_string_pretty(&Audit { config: cfg, records })?)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = resolve_config(&cli.flags)?;
    let file = cli.flags.game_file.as_deref();
    match cli.command {
        Command::Stats { game, convention, infosets } => {
            let (name, g) = load_game(game.as_deref(), file)?;
            let stats = klss::knowledge::game_stats(&g, convention.unwrap_or(cfg.convention));
            let mut line = format!("game={name} nodes={} infosets={} diameter={}", stats.nodes, stats.decision_infosets, stats.diameter);
            for (k, v) in &stats.avg_knowledge_size {
                line.push_str(&format!(" avg_I{k}={v:.2}"));
            }
            line.push('\n');
            if infosets {
                for p in [Player::Plus, Player::Minus] {
                    for &i in g.decision_infosets(p) {
                        line.push_str(&format!("{} {}\n", p.name(), g.infoset(p, i).label));
                    }
                }
            }
            emit(&cfg, &line)?;
            write_audit(&cfg, &stats)
        }
        Command::Solve { game } => {
            let (name, g) = load_game(game.as_deref(), file)?;
            let none = PayoffAddends::new();
            let sol = solve(&g, &none, &cfg.solver(&g))?;
            let (_, worst) = best_response(&g, &none, &sol.x)?;
            let (_, best) = best_response(&g, &none, &sol.y)?;
            let v = sol.value();
            let text = format!(
                "game={name} value={v:.9} plus_exploitability={:.3e} minus_exploitability={:.3e} gap={:.3e} iterations={}\n",
                v - worst,
                best - v,
                best - worst,
                sol.iterations
            );
            emit(&cfg, &text)?;
            write_audit(&cfg, &sol.trace)
        }
        Command::Subgame { target, k, blueprint } => {
            let (_, g, label) = game_and_infoset(&target, file)?;
            let i = g.find_infoset(Player::Plus, &label)?;
            let none = PayoffAddends::new();
            let x = match blueprint {
                BlueprintKind::Uniform => SequenceFormStrategy::uniform(&g, Player::Plus),
                BlueprintKind::Equilibrium => solve(&g, &none, &cfg.solver(&g))?.x,
            };
            let gg = make_subgame(&g, &none, &x, i, k, cfg.options())?;
            let cbv = counterfactual_values(&g, &none, &x, cfg.orientation)?;
            let mut text = gg.dump();
            text.push_str("cbv\n");
            for b in &gg.branches {
                if let Some(v) = cbv.infoset_value(b.infoset) {
                    text.push_str(&format!("  {} {v}\n", b.label));
                }
            }
            print!("{text}");
            if let Some(p) = &cfg.out {
                write_atomic(p, &gg.to_json())?;
            }
            Ok(())
        }
        Command::Knowledge { target, k, player } => {
            let (_, g, label) = game_and_infoset(&target, file)?;
            let player = Player::from(player);
            let i = g.find_infoset(player, &label)?;
            let ks = infoset_knowledge_set(&g, player, i, k)?;
            let mut plus: Vec<&str> = ks
                .members
                .iter()
                .filter(|&&v| g.node(v).mover() == Some(Player::Plus))
                .map(|&v| g.infoset(Player::Plus, g.infoset_of(Player::Plus, v)).label.as_str())
                .collect();
            plus.sort_unstable();
            plus.dedup();
            let mut text = format!("infoset={label} order={k} nodes={} plus_infosets={}\n", ks.len(), plus.len());
            if player == Player::Plus {
                let plan = IndependentSetPlan::new(&g);
                text.push_str(&format!("allocation_probability={}\n", plan.probability(i)));
            }
            for l in plus {
                text.push_str(&format!("  {l}\n"));
            }
            emit(&cfg, &text)
        }
        Command::Table1 { entries } => {
            let all = table1_entries();
            let chosen: Vec<Table1Entry> = if entries.is_empty() {
                all
            } else {
                entries
                    .iter()
                    .map(|n| all.iter().find(|e| &e.name == n).cloned().ok_or_else(|| Error::UnknownGame(n.clone())))
                    .collect::<klss::Result<_>>()?
            };
            let report = run_table1(&chosen, &cfg.table1())?;
            emit(&cfg, &report.to_csv())?;
            write_audit(&cfg, &report)?;
            let failed = report.rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                bail!("{failed} row(s) failed");
            }
            Ok(())
        }
        Command::Table2 { games: names } => {
            let names: Vec<&str> =
                if names.is_empty() { games::BENCHMARKS.to_vec() } else { names.iter().map(String::as_str).collect() };
            let rows = run_table2(&names, cfg.convention, cfg.jobs)?;
            emit(&cfg, &table2_csv(&rows))?;
            write_audit(&cfg, &rows)
        }
        Command::Safety { suite, games: names, seeds, n, samples } => run_safety(&cfg, suite, &names, seeds, n, samples),
    }
}

fn run_safety(cfg: &RunConfig, suite: Suite, names: &[String], seeds: Option<u64>, n: usize, samples: usize) -> Result<()> {
    let sc = cfg.safety();
    let pick = |default: &[&str]| -> Vec<String> {
        if names.is_empty() { default.iter().map(|s| s.to_string()).collect() } else { names.to_vec() }
    };
    let wants = |s: Suite| suite == s || suite == Suite::All;
    let mut checks: Vec<(&str, Check)> = Vec::new();
    let mut text = String::new();
    if wants(Suite::Prop1) {
        let r = safety::prop1(n, &sc)?;
        let ok = (r.after - 1.0).abs() <= 1e-6 && (r.before - 4.0 / n as f64).abs() <= 1e-6 && r.min_tails >= 1.0 - 1e-6;
        text.push_str(&format!(
            "prop1 n={n} before={:.6} after={:.6} min_tails={:.9} {}\n",
            r.before,
            r.after,
            r.min_tails,
            if ok { "ok" } else { "VIOLATED" }
        ));
        let check = Check { game: format!("hidden-mp-{n}"), seed: sc.seed, measured: r.after, bound: 1.0, passed: ok, detail: String::new() };
        checks.push(("prop1", check));
    }
    if wants(Suite::Thm1) {
        for g in pick(&["kuhn", "mp-20", "dark-hex-2x2"]) {
            for s in 0..seeds.unwrap_or(5) {
                checks.push(("thm1", safety::thm1(&g, sc.seed + s, &sc)?));
            }
        }
    }
    if wants(Suite::Thm2) {
        for g in pick(&["kuhn"]) {
            for s in 0..seeds.unwrap_or(20) {
                checks.push(("thm2", safety::thm2(&g, sc.seed + s, &sc)?));
            }
        }
    }
    if wants(Suite::Thm3) {
        for g in pick(&["kuhn", "fig1"]) {
            checks.push(("thm3", safety::affine(&g, samples, &sc)?));
        }
    }
    if wants(Suite::Preservation) {
        for g in pick(&games::CATALOG) {
            checks.push(("preservation", safety::preservation(&g, &sc)?));
        }
    }
    for (name, c) in checks.iter().filter(|(n, _)| *n != "prop1") {
        text.push_str(&format!(
            "{name} {} seed={} measured={:.3e} bound={:.3e} {} ({})\n",
            c.game,
            c.seed,
            c.measured,
            c.bound,
            if c.passed { "ok" } else { "VIOLATED" },
            c.detail
        ));
    }
    emit(cfg, &text)?;
    write_audit(cfg, &checks.iter().map(|(n, c)| (n, c)).collect::<Vec<_>>())?;
    let failed = checks.iter().filter(|(_, c)| !c.passed).count();
    if failed > 0 {
        return Err(Violation(failed).into());
    }
    Ok(())
}
