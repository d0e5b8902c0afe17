//! Knowledge-limited subgame solving for two-player zero-sum extensive-form
//! games with imperfect information.

pub mod equilibrium;
pub mod error;
pub mod game;
pub mod games;
pub mod harness;
pub mod knowledge;
pub mod strategy;
pub mod subgame;

pub use error::{Error, Result};
pub use game::{GameBuilder, GameTree, InfosetId, NodeId, PayoffAddends, Player, SeqId, EMPTY_SEQ};
pub use strategy::{BehaviorStrategy, SequenceFormStrategy};
