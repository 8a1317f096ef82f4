//! Grammar evolution: alternate grammar proposals with communication phases
//! in which a two-armed bandit compares the current grammar with the
//! proposed one.

use std::io;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{pretrain, AgentConfig, AgentPair, ConfigError, TrainError};
use crate::grammar::{DmPair, GrammarError, Numeral};
use crate::lexicon::{compute_lmin, CoverageError, Lexicon};
use crate::metrics::{avg_ms_complexity_dm, NeedDistribution, DEFAULT_SUPPORT};
use crate::mutation::{sample_alternative, MutationKind};
use crate::report::{format_list, sig12};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// Greedy with probability ε, least-explored otherwise.
    Verbatim,
    /// Greedy with probability 1 - ε, least-explored otherwise.
    Conventional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BanditState {
    pub q_values: [f64; 2],
    pub pull_counts: [u64; 2],
    pub alpha: f64,
    pub epsilon: f64,
    pub rule: SelectionRule,
}

impl BanditState {
    pub fn new(alpha: f64, epsilon: f64, rule: SelectionRule) -> Self {
        BanditState { q_values: [0.0; 2], pull_counts: [0; 2], alpha, epsilon, rule }
    }

    pub fn reset(&mut self) {
        self.q_values = [0.0; 2];
        self.pull_counts = [0; 2];
    }

    /// Arm with the highest Q-value; ties go to arm 0.
    pub fn greedy_arm(&self) -> usize {
        usize::from(self.q_values[1] > self.q_values[0])
    }

    /// Arm with the fewest pulls; ties go to arm 0.
    pub fn least_explored_arm(&self) -> usize {
        usize::from(self.pull_counts[1] < self.pull_counts[0])
    }

    /// Selection given the uniform draw `n`.
    pub fn select_with(&self, n: f64) -> usize {
        let greedy = match self.rule {
            SelectionRule::Verbatim => 1.0 - self.epsilon <= n,
            SelectionRule::Conventional => n < 1.0 - self.epsilon,
        };
        if greedy {
            self.greedy_arm()
        } else {
            self.least_explored_arm()
        }
    }

    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.select_with(rng.gen::<f64>())
    }

    pub fn update(&mut self, arm: usize, reward: f64) {
        self.q_values[arm] += self.alpha * (reward - self.q_values[arm]);
        self.pull_counts[arm] += 1;
    }
}

/// Runs one communication phase of `iterations` bandit steps; `play(arm)`
/// performs one round on that arm's grammar and returns its mean reward.
/// Returns the arm adopted at the end (ties keep arm 0).
pub fn communication_phase<R, E, F>(
    state: &mut BanditState,
    iterations: usize,
    rng: &mut R,
    mut play: F,
) -> Result<usize, E>
where
    R: Rng + ?Sized,
    F: FnMut(usize, &mut R) -> Result<f64, E>,
{
    state.reset();
    for _ in 0..iterations {
        let arm = state.select(rng);
        let r = play(arm, rng)?;
        state.update(arm, r);
    }
    Ok(state.greedy_arm())
}

/// The agents' side of the evolution loop.
pub trait CommunicationGame {
    /// Trains on a fixed lexicon before the first proposal; returns accuracy.
    fn pretrain<R: Rng + ?Sized>(&mut self, lexicon: &Lexicon, rng: &mut R) -> Result<f64, TrainError>;
    /// One round (batch plus update) on `lexicon`; returns the mean reward.
    fn communicate<R: Rng + ?Sized>(&mut self, lexicon: &Lexicon, rng: &mut R) -> Result<f64, TrainError>;
    fn accuracy(&self, lexicon: &Lexicon) -> Result<f64, TrainError>;
}

/// Speaker and listener trained by REINFORCE.
#[derive(Debug, Clone)]
pub struct NeuralGame {
    pub pair: AgentPair,
    pub dist: NeedDistribution,
    pub pretrain_epochs: usize,
}

impl NeuralGame {
    pub fn new(config: AgentConfig, seed: u64, pretrain_epochs: usize) -> Result<Self, ConfigError> {
        let dist = NeedDistribution::new(config.numeral_range);
        Ok(NeuralGame { pair: AgentPair::new(config, seed)?, dist, pretrain_epochs })
    }
}

impl CommunicationGame for NeuralGame {
    fn pretrain<R: Rng + ?Sized>(&mut self, lexicon: &Lexicon, rng: &mut R) -> Result<f64, TrainError> {
        pretrain(&mut self.pair, lexicon, &self.dist, self.pretrain_epochs, rng)
    }

    fn communicate<R: Rng + ?Sized>(&mut self, lexicon: &Lexicon, rng: &mut R) -> Result<f64, TrainError> {
        let batch = self.pair.play_batch(lexicon, &self.dist, rng)?;
        Ok(self.pair.update(&batch)?.mean_reward)
    }

    fn accuracy(&self, lexicon: &Lexicon) -> Result<f64, TrainError> {
        self.pair.accuracy(lexicon, &self.dist)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub max_steps: usize,
    /// Bandit steps per communication phase.
    pub inner_iterations: usize,
    pub pretrain_epochs: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub selection_rule: SelectionRule,
    pub metric_support: Numeral,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            max_steps: 100,
            inner_iterations: 40_000,
            pretrain_epochs: 5_000,
            alpha: 0.1,
            epsilon: 0.2,
            selection_rule: SelectionRule::Verbatim,
            metric_support: DEFAULT_SUPPORT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub step: usize,
    pub dm: DmPair,
    pub lexicon_size: usize,
    /// NaN when the grammar does not cover the metric support.
    pub avg_ms_complexity: f64,
    /// The proposal of this step, if any.
    pub mutation: Option<MutationKind>,
    pub adopted: bool,
    pub q_final: [f64; 2],
    pub accuracy: f64,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("start grammar has range {found}, expected the communication range {expected}")]
    RangeMismatch { found: Numeral, expected: Numeral },
    #[error("start grammar does not cover the communication range: {0}")]
    Uncovered(#[from] CoverageError),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Train(#[from] TrainError),
}

fn avg_or_nan(dm: &DmPair, dist: &NeedDistribution) -> f64 {
    avg_ms_complexity_dm(dm, dist).unwrap_or(f64::NAN)
}

/// Runs the evolution loop from `start`, whose range must equal the
/// communication range `range`. Records the start plus one row per step.
pub fn run_evolution<G, R>(
    start: &DmPair,
    range: Numeral,
    config: &EvolutionConfig,
    game: &mut G,
    seed: u64,
    rng: &mut R,
) -> Result<Vec<TrajectoryRecord>, EvolutionError>
where
    G: CommunicationGame,
    R: Rng + ?Sized,
{
    if start.range_max() != range {
        return Err(EvolutionError::RangeMismatch { found: start.range_max(), expected: range });
    }
    let metric = NeedDistribution::new(config.metric_support);
    let mut current = start.clone();
    let mut lexicon = compute_lmin(&current)?;
    let accuracy = game.pretrain(&lexicon, rng)?;
    let record = |step, dm: &DmPair, mutation, adopted, q_final, accuracy| TrajectoryRecord {
        step,
        dm: dm.clone(),
        lexicon_size: dm.lexicon_size(),
        avg_ms_complexity: avg_or_nan(dm, &metric),
        mutation,
        adopted,
        q_final,
        accuracy,
        seed,
    };
    let mut out = vec![record(0, &current, None, false, [0.0; 2], accuracy)];
    let mut state = BanditState::new(config.alpha, config.epsilon, config.selection_rule);

    for step in 1..=config.max_steps {
        let Ok((kind, alternative)) = sample_alternative(&current, rng) else {
            let accuracy = game.accuracy(&lexicon)?;
            out.push(record(step, &current, None, false, [0.0; 2], accuracy));
            continue;
        };
        let alt_lexicon = compute_lmin(&alternative).expect("valid neighbours cover the range");
        let arms = [&lexicon, &alt_lexicon];
        let winner = communication_phase(&mut state, config.inner_iterations, rng, |arm, rng| {
            game.communicate(arms[arm], rng)
        })?;
        let adopted = winner == 1;
        if adopted {
            current = alternative;
            lexicon = alt_lexicon;
        }
        let accuracy = game.accuracy(&lexicon)?;
        out.push(record(step, &current, Some(kind), adopted, state.q_values, accuracy));
    }
    Ok(out)
}

pub const TRAJECTORY_HEADER: [&str; 9] =
    ["step", "lexicon_size", "avg_ms_complexity", "D", "M", "q_current", "q_alt", "accuracy", "mutation"];

pub fn write_trajectory_csv<W: io::Write>(records: &[TrajectoryRecord], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for r in records {
        w.write_record([
            r.step.to_string(),
            r.lexicon_size.to_string(),
            sig12(r.avg_ms_complexity),
            format_list(r.dm.digits()),
            format_list(r.dm.multipliers()),
            sig12(r.q_final[0]),
            sig12(r.q_final[1]),
            sig12(r.accuracy),
            r.mutation.map(|m| m.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
