//! Speaker and listener policies for the signalling game.

pub mod checkpoint;
pub mod game;
pub mod gradcheck;
pub mod listener;
pub mod nn;
pub mod speaker;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{NumExpr, Numeral, Token};

pub use game::{
    greedy_accuracy, play_batch, pretrain, reinforce_update, AgentPair, Episode, EpisodeBatch, LossDiagnostics,
    TrainError,
};
pub use listener::{Listener, ListenerTrace};
pub use speaker::{Speaker, SpeakerTrace};

/// Message symbol in `0..message_alphabet_size`.
pub type Symbol = usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub embedding_dim: usize,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub message_alphabet_size: usize,
    pub entropy_coefficient: f64,
    /// Also apply the entropy bonus to the speaker.
    pub speaker_entropy: bool,
    /// Numerals `1..=numeral_range` are communicated; also bounds the
    /// speaker's numeral vocabulary.
    pub numeral_range: Numeral,
    pub init_scale: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            embedding_dim: 5,
            hidden_dim: 100,
            learning_rate: 0.002,
            batch_size: 32,
            message_alphabet_size: 64,
            entropy_coefficient: 0.01,
            speaker_entropy: false,
            numeral_range: 50,
            init_scale: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let checks = [
            (self.embedding_dim, "embedding_dim"),
            (self.hidden_dim, "hidden_dim"),
            (self.batch_size, "batch_size"),
            (self.message_alphabet_size, "message_alphabet_size"),
            (self.numeral_range as usize, "numeral_range"),
        ];
        for (v, name) in checks {
            if v == 0 {
                return Err(ConfigError::NotPositive(name));
            }
        }
        if !(self.learning_rate > 0.0) {
            return Err(ConfigError::NotPositive("learning_rate"));
        }
        if !(self.init_scale > 0.0) {
            return Err(ConfigError::NotPositive("init_scale"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Sample,
    Greedy,
}

/// Expression tokens keyed by absolute value: numeral `n` has id `n - 1`,
/// followed by `+`, `-`, `*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vocab {
    max_numeral: Numeral,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("numeral {numeral} is outside the vocabulary [1, {max}]")]
pub struct OutOfVocabulary {
    pub numeral: Numeral,
    pub max: Numeral,
}

impl Vocab {
    pub fn new(max_numeral: Numeral) -> Self {
        Vocab { max_numeral }
    }

    pub fn len(&self) -> usize {
        self.max_numeral as usize + 3
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, token: Token) -> Result<usize, OutOfVocabulary> {
        let base = self.max_numeral as usize;
        match token {
            Token::Num(n) if (1..=self.max_numeral).contains(&n) => Ok(n as usize - 1),
            Token::Num(n) => Err(OutOfVocabulary { numeral: n, max: self.max_numeral }),
            Token::Plus => Ok(base),
            Token::Minus => Ok(base + 1),
            Token::Times => Ok(base + 2),
        }
    }
}

/// Token ids of `expr` in rendering order.
pub fn tokenize(expr: &NumExpr, vocab: &Vocab) -> Result<Vec<usize>, OutOfVocabulary> {
    expr.tokens().into_iter().map(|t| vocab.id(t)).collect()
}
