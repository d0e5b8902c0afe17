//! Sequence-form and behavioral strategies and the realization-plan correspondence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameTree, InfosetId, Player, EMPTY_SEQ};

const FLOW_TOLERANCE: f64 = 1e-9;

/// Probability that the player plays every action of each sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceFormStrategy {
    player: Player,
    values: Vec<f64>,
}

impl SequenceFormStrategy {
    pub fn new(player: Player, values: Vec<f64>) -> Self {
        Self { player, values }
    }

    pub fn player(&self) -> Player {
        self.player
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn uniform(game: &GameTree, player: Player) -> Self {
        BehaviorStrategy::uniform(game, player).to_sequence_form(game)
    }

    /// Checks the empty-sequence and flow-conservation constraints.
    pub fn validate(&self, game: &GameTree) -> Result<()> {
        game.check_dims(self.player, &self.values)?;
        if (self.values[EMPTY_SEQ] - 1.0).abs() > FLOW_TOLERANCE {
            return Err(Error::NonDistribution { infoset: usize::MAX });
        }
        for &i in game.decision_infosets(self.player) {
            let inf = game.infoset(self.player, i);
            let parent = self.values[inf.parent_seq];
            let mut total = 0.0;
            for a in 0..inf.actions.len() {
                let v = self.values[inf.seq(a)];
                if v < -FLOW_TOLERANCE {
                    return Err(Error::NonDistribution { infoset: i });
                }
                total += v;
            }
            if (total - parent).abs() > FLOW_TOLERANCE * parent.abs().max(1.0) {
                return Err(Error::NonDistribution { infoset: i });
            }
        }
        Ok(())
    }

    /// Probability mass the player puts on reaching infoset `i`.
    pub fn reach(&self, game: &GameTree, i: InfosetId) -> f64 {
        self.values[game.infoset(self.player, i).parent_seq]
    }

    /// Behavior at every decision infoset; unreached infosets get uniform behavior.
    pub fn to_behavior(&self, game: &GameTree) -> BehaviorStrategy {
        let mut probs = vec![Vec::new(); game.infosets(self.player).len()];
        for &i in game.decision_infosets(self.player) {
            let inf = game.infoset(self.player, i);
            let m = inf.actions.len();
            let parent = self.values[inf.parent_seq];
            let total: f64 = (0..m).map(|a| self.values[inf.seq(a)].max(0.0)).sum();
            probs[i] = if parent > 0.0 && total > 0.0 {
                (0..m).map(|a| self.values[inf.seq(a)].max(0.0) / total).collect()
            } else {
                vec![1.0 / m as f64; m]
            };
        }
        BehaviorStrategy { player: self.player, probs }
    }
}

/// Per-infoset action distributions, indexed by infoset id (empty rows at
/// infosets where the player does not move).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehaviorStrategy {
    player: Player,
    probs: Vec<Vec<f64>>,
}

impl BehaviorStrategy {
    pub fn new(game: &GameTree, player: Player, probs: Vec<Vec<f64>>) -> Result<Self> {
        if probs.len() != game.infosets(player).len() {
            return Err(Error::DimensionMismatch {
                expected: game.infosets(player).len(),
                got: probs.len(),
            });
        }
        for &i in game.decision_infosets(player) {
            let row = &probs[i];
            let m = game.infoset(player, i).actions.len();
            let total: f64 = row.iter().sum();
            if row.len() != m || row.iter().any(|&p| p < -1e-12) || (total - 1.0).abs() > 1e-9 {
                return Err(Error::NonDistribution { infoset: i });
            }
        }
        Ok(Self { player, probs })
    }

    pub fn uniform(game: &GameTree, player: Player) -> Self {
        let mut probs = vec![Vec::new(); game.infosets(player).len()];
        for &i in game.decision_infosets(player) {
            let m = game.infoset(player, i).actions.len();
            probs[i] = vec![1.0 / m as f64; m];
        }
        Self { player, probs }
    }

    pub fn player(&self) -> Player {
        self.player
    }

    pub fn at(&self, i: InfosetId) -> &[f64] {
        &self.probs[i]
    }

    pub fn set(&mut self, i: InfosetId, row: Vec<f64>) {
        self.probs[i] = row;
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn to_sequence_form(&self, game: &GameTree) -> SequenceFormStrategy {
        let mut values = vec![0.0; game.num_sequences(self.player)];
        values[EMPTY_SEQ] = 1.0;
        for &i in game.decision_infosets(self.player) {
            let inf = game.infoset(self.player, i);
            let parent = values[inf.parent_seq];
            for (a, p) in self.probs[i].iter().enumerate() {
                values[inf.seq(a)] = parent * p;
            }
        }
        SequenceFormStrategy { player: self.player, values }
    }
}
