//! Benchmark and example games. All rewards are normalized to `[-1, 1]` except
//! the hand-drawn example game, which keeps its published utilities.

use crate::error::{Error, Result};
use crate::game::{GameBuilder, GameTree, NodeId, Player};

fn build(b: GameBuilder, root: NodeId) -> GameTree {
    b.build(root).expect("catalog games are well formed")
}

/// Three-card Kuhn poker with sequential dealing; plus bets first.
pub fn kuhn() -> GameTree {
    let cards = ["J", "Q", "K"];
    let mut b = GameBuilder::new();
    let root = b.nature("", "");
    for c1 in 0..3 {
        let deal2 = b.nature(cards[c1], "");
        b.connect_chance(root, cards[c1], deal2, 1.0 / 3.0);
        for c2 in (0..3).filter(|&c| c != c1) {
            let p1 = b.decision(Player::Plus, "", cards[c2]);
            b.connect_chance(deal2, cards[c2], p1, 0.5);
            // showdown payoff per unit of pot contribution
            let win = if c1 > c2 { 1.0 } else { -1.0 };
            let z = |b: &mut GameBuilder, u: f64, obs: (&str, &str)| b.terminal(u / 2.0, obs.0, obs.1);

            let p2_check = b.decision(Player::Minus, "", "check");
            b.connect(p1, "check", p2_check);
            let p2_bet = b.decision(Player::Minus, "", "bet");
            b.connect(p1, "bet", p2_bet);

            let t = z(&mut b, win, ("check", ""));
            b.connect(p2_check, "check", t);
            let p1_facing = b.decision(Player::Plus, "bet", "");
            b.connect(p2_check, "bet", p1_facing);
            let t = z(&mut b, -1.0, ("", "fold"));
            b.connect(p1_facing, "fold", t);
            let t = z(&mut b, 2.0 * win, ("", "call"));
            b.connect(p1_facing, "call", t);

            let t = z(&mut b, 1.0, ("fold", ""));
            b.connect(p2_bet, "fold", t);
            let t = z(&mut b, 2.0 * win, ("call", ""));
            b.connect(p2_bet, "call", t);
        }
    }
    build(b, root)
}

/// Two-suit limit Leduc hold'em with `ranks` ranks: antes of 1, raises of 2
/// then 4, at most two raises per round, pair beats high card.
pub fn leduc(ranks: usize) -> Result<GameTree> {
    if ranks < 2 {
        return Err(Error::BadParameter(format!("leduc needs at least 2 ranks, got {ranks}")));
    }
    let deck = 2 * ranks;
    let norm = 1.0 + 2.0 * 2.0 + 2.0 * 4.0;
    let name = |c: usize| format!("{}{}", c / 2, if c % 2 == 0 { 's' } else { 'h' });
    let mut b = GameBuilder::new();
    let root = b.nature("", "");
    for c1 in 0..deck {
        let deal2 = b.nature(name(c1), "");
        b.connect_chance(root, name(c1), deal2, 1.0 / deck as f64);
        for c2 in (0..deck).filter(|&c| c != c1) {
            let start = b.decision(Player::Plus, "", name(c2));
            b.connect_chance(deal2, name(c2), start, 1.0 / (deck - 1) as f64);
            let hands = LeducHands { c1, c2, board: None, deck, norm };
            leduc_round(&mut b, start, &hands, Player::Plus, [1.0, 1.0], 0, false, 0);
        }
    }
    Ok(build(b, root))
}

struct LeducHands {
    c1: usize,
    c2: usize,
    board: Option<usize>,
    deck: usize,
    norm: f64,
}

impl LeducHands {
    /// Showdown winner from plus's view: 1, -1 or 0.
    fn showdown(&self) -> f64 {
        let board = self.board.expect("showdown after the board card") / 2;
        let (r1, r2) = (self.c1 / 2, self.c2 / 2);
        match (r1 == board, r2 == board) {
            (true, false) => 1.0,
            (false, true) => -1.0,
            _ => sign(r1.cmp(&r2)),
        }
    }
}

fn sign(o: std::cmp::Ordering) -> f64 {
    match o {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
    }
}

/// Recursively expands one betting round from decision node `node`.
#[allow(clippy::too_many_arguments)]
fn leduc_round(
    b: &mut GameBuilder,
    node: NodeId,
    hands: &LeducHands,
    mover: Player,
    pot: [f64; 2],
    raises: usize,
    facing_bet: bool,
    round: usize,
) {
    let raise_size = if round == 0 { 2.0 } else { 4.0 };
    let mi = mover.index();
    let oi = mover.opponent().index();
    let obs = |p: Player, act: &str| -> (String, String) {
        // the opponent of the mover observes the action
        match p {
            Player::Plus => (String::new(), act.to_string()),
            Player::Minus => (act.to_string(), String::new()),
        }
    };
    if facing_bet {
        let (op, om) = obs(mover, "fold");
        let u = if mover == Player::Plus { -pot[0] } else { pot[1] };
        let t = b.terminal(u / hands.norm, op, om);
        b.connect(node, "fold", t);
    }
    // call (or check when nothing to call)
    {
        let mut pot2 = pot;
        pot2[mi] = pot2[oi];
        let (op, om) = obs(mover, "call");
        // the round closes on a call facing a bet, or on the second check
        let closes = facing_bet || mover == Player::Minus;
        if !closes {
            let next = b.decision(mover.opponent(), op, om);
            b.connect(node, "call", next);
            leduc_round(b, next, hands, mover.opponent(), pot2, raises, false, round);
        } else if round == 0 {
            let deal = b.nature(op, om);
            b.connect(node, "call", deal);
            for board in (0..hands.deck).filter(|&c| c != hands.c1 && c != hands.c2) {
                let name = format!("{}{}", board / 2, if board % 2 == 0 { 's' } else { 'h' });
                let next = b.decision(Player::Plus, name.clone(), name.clone());
                b.connect_chance(deal, name, next, 1.0 / (hands.deck - 2) as f64);
                let h2 = LeducHands { board: Some(board), ..*hands };
                leduc_round(b, next, &h2, Player::Plus, pot2, 0, false, 1);
            }
        } else {
            let u = hands.showdown() * pot2[0];
            let t = b.terminal(u / hands.norm, op, om);
            b.connect(node, "call", t);
        }
    }
    if raises < 2 {
        let mut pot2 = pot;
        pot2[mi] = pot2[oi] + raise_size;
        let (op, om) = obs(mover, "raise");
        let next = b.decision(mover.opponent(), op, om);
        b.connect(node, "raise", next);
        leduc_round(b, next, hands, mover.opponent(), pot2, raises + 1, true, round);
    }
}

impl Clone for LeducHands {
    fn clone(&self) -> Self {
        LeducHands { ..*self }
    }
}

impl Copy for LeducHands {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrizeOrder {
    Random,
    Increasing,
}

/// Goofspiel with `cards` bid cards and prizes; bids are hidden, players learn
/// only who won each prize. The last round is played automatically.
pub fn goofspiel(cards: usize, order: PrizeOrder) -> Result<GameTree> {
    if cards < 2 {
        return Err(Error::BadParameter(format!("goofspiel needs at least 2 cards, got {cards}")));
    }
    let mut b = GameBuilder::new();
    let state = GoofState {
        hands: [(1..=cards).collect(), (1..=cards).collect()],
        prizes: (1..=cards).collect(),
        score: [0.0, 0.0],
    };
    let root = match order {
        PrizeOrder::Increasing => {
            let root = b.decision(Player::Plus, "", "");
            goof_bid_plus(&mut b, root, state, order, cards);
            root
        }
        PrizeOrder::Random => {
            let root = b.nature("", "");
            goof_deal(&mut b, root, state, order, cards);
            root
        }
    };
    Ok(build(b, root))
}

#[derive(Clone)]
struct GoofState {
    hands: [Vec<usize>; 2],
    /// Remaining prizes; the next prize is chosen from these.
    prizes: Vec<usize>,
    score: [f64; 2],
}

fn goof_deal(b: &mut GameBuilder, node: NodeId, state: GoofState, order: PrizeOrder, cards: usize) {
    let n = state.prizes.len();
    for (k, &prize) in state.prizes.iter().enumerate() {
        let label = format!("p{prize}");
        let next = b.decision(Player::Plus, label.clone(), label.clone());
        b.connect_chance(node, label, next, 1.0 / n as f64);
        let mut s = state.clone();
        s.prizes.swap(0, k);
        let first = s.prizes.remove(0);
        s.prizes.insert(0, first);
        goof_bid_plus(b, next, s, order, cards);
    }
}

fn goof_bid_plus(b: &mut GameBuilder, node: NodeId, state: GoofState, order: PrizeOrder, cards: usize) {
    for (i, &bid1) in state.hands[0].iter().enumerate() {
        let next = b.decision(Player::Minus, "", "");
        b.connect(node, format!("b{bid1}"), next);
        for (j, &bid2) in state.hands[1].iter().enumerate() {
            let mut s = state.clone();
            s.hands[0].remove(i);
            s.hands[1].remove(j);
            let prize = s.prizes.remove(0) as f64;
            let (o1, o2) = match bid1.cmp(&bid2) {
                std::cmp::Ordering::Greater => {
                    s.score[0] += prize;
                    ("win", "lose")
                }
                std::cmp::Ordering::Less => {
                    s.score[1] += prize;
                    ("lose", "win")
                }
                std::cmp::Ordering::Equal => {
                    s.score[0] += prize / 2.0;
                    s.score[1] += prize / 2.0;
                    ("tie", "tie")
                }
            };
            let label = format!("b{bid2}");
            if s.hands[0].len() == 1 {
                // final card pair is forced
                let prize = s.prizes[0] as f64;
                match s.hands[0][0].cmp(&s.hands[1][0]) {
                    std::cmp::Ordering::Greater => s.score[0] += prize,
                    std::cmp::Ordering::Less => s.score[1] += prize,
                    std::cmp::Ordering::Equal => {
                        s.score[0] += prize / 2.0;
                        s.score[1] += prize / 2.0;
                    }
                }
                let u = sign(s.score[0].total_cmp(&s.score[1]));
                let t = b.terminal(u, o1, o2);
                b.connect(next, label, t);
            } else {
                match order {
                    PrizeOrder::Increasing => {
                        let n2 = b.decision(Player::Plus, o1, o2);
                        b.connect(next, label, n2);
                        goof_bid_plus(b, n2, s, order, cards);
                    }
                    PrizeOrder::Random => {
                        let n2 = b.nature(o1, o2);
                        b.connect(next, label, n2);
                        goof_deal(b, n2, s, order, cards);
                    }
                }
            }
        }
    }
}

/// Liar's dice with one `faces`-sided die per player. Bids are
/// (quantity, face) pairs over both dice in increasing order; the highest face
/// is wild. Calling liar resolves the last bid: a true bid wins for the bidder.
pub fn liars_dice(faces: usize) -> Result<GameTree> {
    if faces < 2 {
        return Err(Error::BadParameter(format!("liar's dice needs at least 2 faces, got {faces}")));
    }
    let mut b = GameBuilder::new();
    let root = b.nature("", "");
    let bids: Vec<(usize, usize)> = (1..=2).flat_map(|q| (1..=faces).map(move |f| (q, f))).collect();
    for d1 in 1..=faces {
        let deal2 = b.nature(format!("d{d1}"), "");
        b.connect_chance(root, format!("d{d1}"), deal2, 1.0 / faces as f64);
        for d2 in 1..=faces {
            let first = b.decision(Player::Plus, "", format!("d{d2}"));
            b.connect_chance(deal2, format!("d{d2}"), first, 1.0 / faces as f64);
            liars_bid(&mut b, first, &bids, [d1, d2], faces, Player::Plus, None);
        }
    }
    Ok(build(b, root))
}

fn liars_bid(
    b: &mut GameBuilder,
    node: NodeId,
    bids: &[(usize, usize)],
    dice: [usize; 2],
    faces: usize,
    mover: Player,
    last: Option<usize>,
) {
    let obs = |act: &str| match mover {
        Player::Plus => (String::new(), act.to_string()),
        Player::Minus => (act.to_string(), String::new()),
    };
    let start = last.map_or(0, |l| l + 1);
    for (k, &(q, f)) in bids.iter().enumerate().skip(start) {
        let label = format!("{q}x{f}");
        let (op, om) = obs(&label);
        let next = b.decision(mover.opponent(), op, om);
        b.connect(node, label, next);
        liars_bid(b, next, bids, dice, faces, mover.opponent(), Some(k));
    }
    if let Some(l) = last {
        let (q, f) = bids[l];
        let count = dice.iter().filter(|&&d| d == f || d == faces).count();
        // the bidder is the opponent of the caller
        let bidder_wins = count >= q;
        let caller_plus = mover == Player::Plus;
        let plus_wins = bidder_wins != caller_plus;
        let (op, om) = obs("liar");
        let t = b.terminal(if plus_wins { 1.0 } else { -1.0 }, op, om);
        b.connect(node, "liar", t);
    }
}

/// Abrupt dark hex on a 2x2 board: players do not see opponent stones; a move
/// onto a hidden opponent stone reveals it to the mover and forfeits the turn.
/// Plus connects top to bottom, minus left to right.
pub fn abrupt_dark_hex(rows: usize, cols: usize) -> Result<GameTree> {
    if rows != 2 || cols != 2 {
        return Err(Error::BadParameter(format!("only 2x2 dark hex is supported, got {rows}x{cols}")));
    }
    let mut b = GameBuilder::new();
    let root = b.decision(Player::Plus, "", "");
    let state = HexState { board: [None; 4], known: [[false; 4]; 2] };
    hex_expand(&mut b, root, state, Player::Plus);
    Ok(build(b, root))
}

#[derive(Clone, Copy)]
struct HexState {
    board: [Option<Player>; 4],
    /// Cells each player knows to be occupied.
    known: [[bool; 4]; 2],
}

const HEX_ADJ: [(usize, usize); 5] = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)];

fn hex_wins(board: &[Option<Player>; 4], p: Player) -> bool {
    // cells: 0=(0,0) 1=(0,1) 2=(1,0) 3=(1,1)
    let row = |c: usize| c / 2;
    let col = |c: usize| c % 2;
    HEX_ADJ.iter().any(|&(a, c)| {
        board[a] == Some(p)
            && board[c] == Some(p)
            && match p {
                Player::Plus => row(a) != row(c),
                Player::Minus => col(a) != col(c),
            }
    })
}

fn hex_expand(b: &mut GameBuilder, node: NodeId, s: HexState, mover: Player) {
    let mi = mover.index();
    for cell in 0..4 {
        if s.known[mi][cell] {
            continue;
        }
        let label = format!("c{cell}");
        let mut next = s;
        next.known[mi][cell] = true;
        let outcome = if s.board[cell].is_some() { "blocked" } else { "placed" };
        if s.board[cell].is_none() {
            next.board[cell] = Some(mover);
        }
        let (op, om) = match mover {
            Player::Plus => (outcome.to_string(), String::new()),
            Player::Minus => (String::new(), outcome.to_string()),
        };
        if hex_wins(&next.board, mover) {
            let u = if mover == Player::Plus { 1.0 } else { -1.0 };
            let t = b.terminal(u, format!("{op}end"), format!("{om}end"));
            b.connect(node, label, t);
        } else {
            let child = b.decision(mover.opponent(), op, om);
            b.connect(node, label, child);
            hex_expand(b, child, next, mover.opponent());
        }
    }
}

/// N-matching pennies: nature draws n, plus sees floor(n/2), minus sees
/// floor((n+1)/2); heads-heads pays n, tails-tails pays N-n, mismatches 0,
/// mapped affinely from [0, N] onto [-1, 1].
pub fn matching_pennies(n: usize) -> Result<GameTree> {
    if n < 2 {
        return Err(Error::BadParameter(format!("matching pennies needs N >= 2, got {n}")));
    }
    let mut b = GameBuilder::new();
    let root = b.nature("", "");
    for k in 1..=n {
        let p = b.decision(Player::Plus, format!("{}", k / 2), format!("{}", (k + 1) / 2));
        b.connect_chance(root, format!("n{k}"), p, 1.0 / n as f64);
        for a in ["h", "t"] {
            let m = b.decision(Player::Minus, "", "");
            b.connect(p, a, m);
            for c in ["h", "t"] {
                let u = match (a, c) {
                    ("h", "h") => k as f64,
                    ("t", "t") => (n - k) as f64,
                    _ => 0.0,
                };
                let z = b.terminal(2.0 * u / n as f64 - 1.0, "", "");
                b.connect(m, c, z);
            }
        }
    }
    Ok(build(b, root))
}

/// Nature draws n and tells only plus; then matching pennies where minus wins
/// on a match. Payoffs are ±1.
pub fn hidden_mp_counterexample(n: usize) -> Result<GameTree> {
    if n < 2 {
        return Err(Error::BadParameter(format!("hidden matching pennies needs N >= 2, got {n}")));
    }
    let mut b = GameBuilder::new();
    let root = b.nature("", "");
    for k in 1..=n {
        let p = b.decision(Player::Plus, format!("n{k}"), "");
        b.connect_chance(root, format!("n{k}"), p, 1.0 / n as f64);
        for a in ["h", "t"] {
            let m = b.decision(Player::Minus, "", "");
            b.connect(p, a, m);
            for c in ["h", "t"] {
                let z = b.terminal(if a == c { -1.0 } else { 1.0 }, "", "");
                b.connect(m, c, z);
            }
        }
    }
    Ok(build(b, root))
}

/// The modified 4-matching-pennies example: plus infosets R1 = {1,2} and
/// R3 = {3,4}; minus infosets C0' = {1}, C2' = {2,3}, C4' = {4} above the
/// decision infosets C0, C2, C4. Branch e is a terminal of utility 0.
pub fn example_fig1() -> GameTree {
    let mut b = GameBuilder::new();
    let root = b.nature("", "");
    let plus_obs = ["R1", "R1", "R3", "R3"];
    let minus_obs = ["C0'", "C2'", "C2'", "C4'"];
    let minus_dec = ["C0", "C2", "C2", "C4"];
    for k in 1..=4usize {
        let p = b.decision(Player::Plus, plus_obs[k - 1], minus_obs[k - 1]);
        b.connect_chance(root, k.to_string(), p, 0.2);
        for a in ["h", "t"] {
            let m = b.decision(Player::Minus, "", minus_dec[k - 1]);
            b.connect(p, a, m);
            for c in ["h", "t"] {
                let u = match (a, c) {
                    ("h", "h") => k as f64,
                    ("t", "t") => (5 - k) as f64,
                    _ => 0.0,
                };
                let z = b.terminal(u, "", "");
                b.connect(m, c, z);
            }
        }
    }
    let e = b.terminal(0.0, "e", "e");
    b.connect_chance(root, "e", e, 0.2);
    build(b, root)
}

/// Game names understood by [`by_name`].
pub const CATALOG: [&str; 9] = [
    "kuhn",
    "leduc3",
    "goofspiel4-random",
    "goofspiel4-inc",
    "liars-dice5",
    "dark-hex-2x2",
    "mp-100",
    "hidden-mp-100",
    "fig1",
];

/// The seven benchmark games of the statistics table, in table order.
pub const BENCHMARKS: [&str; 7] = [
    "dark-hex-2x2",
    "goofspiel4-random",
    "goofspiel4-inc",
    "kuhn",
    "leduc3",
    "liars-dice5",
    "mp-100",
];

/// Constructs a catalog game. Parameterized names such as `mp-7`,
/// `hidden-mp-20`, `leduc2`, `goofspiel3-inc` and `liars-dice3` are accepted.
pub fn by_name(name: &str) -> Result<GameTree> {
    let unknown = || Error::UnknownGame(name.to_string());
    let num = |s: &str| s.parse::<usize>().map_err(|_| unknown());
    match name {
        "kuhn" => Ok(kuhn()),
        "fig1" => Ok(example_fig1()),
        "dark-hex-2x2" => abrupt_dark_hex(2, 2),
        _ => {
            if let Some(r) = name.strip_prefix("hidden-mp-") {
                hidden_mp_counterexample(num(r)?)
            } else if let Some(r) = name.strip_prefix("mp-") {
                matching_pennies(num(r)?)
            } else if let Some(r) = name.strip_prefix("leduc") {
                leduc(num(r)?)
            } else if let Some(r) = name.strip_prefix("liars-dice") {
                liars_dice(num(r)?)
            } else if let Some(r) = name.strip_prefix("goofspiel") {
                if let Some(c) = r.strip_suffix("-random") {
                    goofspiel(num(c)?, PrizeOrder::Random)
                } else if let Some(c) = r.strip_suffix("-inc") {
                    goofspiel(num(c)?, PrizeOrder::Increasing)
                } else {
                    Err(unknown())
                }
            } else {
                Err(unknown())
            }
        }
    }
}
