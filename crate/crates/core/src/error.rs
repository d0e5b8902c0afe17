use thiserror::Error;

/// Errors raised by game construction, solving and subgame building.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("imperfect recall at {player} infoset `{infoset}`")]
    ImperfectRecall { player: String, infoset: String },
    #[error("observation does not determine the mover for {player} at infoset `{infoset}`")]
    ObservationMoverMismatch { player: String, infoset: String },
    #[error("bad nature distribution at node {node}: {reason}")]
    BadDistribution { node: usize, reason: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("behavior at infoset {infoset} is not a distribution")]
    NonDistribution { infoset: usize },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("empty node set")]
    EmptySet,
    #[error("solver did not converge: gap {gap:.3e} after {iterations} iterations")]
    DidNotConverge { gap: f64, iterations: usize },
    #[error("infoset `{0}` is unreachable under the blueprint")]
    UnreachableInfoset(String),
    #[error("bad knowledge order: {0}")]
    BadOrder(String),
    #[error("wrong gadget kind: expected {expected}")]
    WrongKind { expected: String },
    #[error("unknown game `{0}`")]
    UnknownGame(String),
    #[error("unknown infoset `{0}`")]
    UnknownInfoset(String),
    #[error("transposition key collision between nodes {0} and {1}")]
    TranspositionCollision(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
