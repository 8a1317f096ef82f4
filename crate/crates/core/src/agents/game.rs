use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::nn::{Adam, AdamConfig};
use super::{tokenize, AgentConfig, ConfigError, Listener, ListenerTrace, Mode, OutOfVocabulary, Speaker, SpeakerTrace, Symbol};
use crate::grammar::Numeral;
use crate::lexicon::Lexicon;
use crate::metrics::NeedDistribution;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("non-finite {agent} gradient")]
    NonFiniteGradient { agent: &'static str },
    #[error(transparent)]
    Vocabulary(#[from] OutOfVocabulary),
    #[error("lexicon covers [1, {lexicon}] but targets reach {needed}")]
    LexiconTooSmall { lexicon: Numeral, needed: Numeral },
    #[error("listener predicts [1, {listener}] but targets reach {needed}")]
    ListenerTooSmall { listener: Numeral, needed: Numeral },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub target: Numeral,
    pub message: Vec<Symbol>,
    pub guess: Numeral,
    pub reward: f64,
    pub speaker: SpeakerTrace,
    /// `None` when the guess came from something other than a [`Listener`].
    pub listener: Option<ListenerTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeBatch {
    pub episodes: Vec<Episode>,
}

impl EpisodeBatch {
    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn targets(&self) -> Vec<Numeral> {
        self.episodes.iter().map(|e| e.target).collect()
    }

    pub fn guesses(&self) -> Vec<Numeral> {
        self.episodes.iter().map(|e| e.guess).collect()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.reward).collect()
    }

    pub fn mean_reward(&self) -> f64 {
        if self.episodes.is_empty() {
            return 0.0;
        }
        self.episodes.iter().map(|e| e.reward).sum::<f64>() / self.episodes.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossDiagnostics {
    pub speaker_loss: f64,
    pub listener_loss: f64,
    pub mean_reward: f64,
    pub listener_entropy: f64,
}

/// A speaker, a listener and their optimiser states.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentPair {
    pub config: AgentConfig,
    pub speaker: Speaker,
    pub listener: Listener,
    pub speaker_opt: Adam,
    pub listener_opt: Adam,
}

impl AgentPair {
    /// Speaker and listener are initialised from independent streams derived
    /// from `seed`.
    pub fn new(config: AgentConfig, seed: u64) -> Result<Self, ConfigError> {
        config.validate()?;
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let speaker = Speaker::new(&config, &mut ChaCha8Rng::seed_from_u64(master.gen()));
        let listener = Listener::new(&config, &mut ChaCha8Rng::seed_from_u64(master.gen()));
        let adam = AdamConfig::with_lr(config.learning_rate);
        Ok(AgentPair {
            speaker_opt: Adam::new(speaker.params.len(), adam),
            listener_opt: Adam::new(listener.params.len(), adam),
            speaker,
            listener,
            config,
        })
    }

    pub fn play_batch<R: Rng + ?Sized>(
        &self,
        lexicon: &Lexicon,
        dist: &NeedDistribution,
        rng: &mut R,
    ) -> Result<EpisodeBatch, TrainError> {
        play_batch(&self.speaker, &self.listener, lexicon, dist, self.config.batch_size, rng)
    }

    pub fn update(&mut self, batch: &EpisodeBatch) -> Result<LossDiagnostics, TrainError> {
        reinforce_update(self, batch)
    }

    pub fn accuracy(&self, lexicon: &Lexicon, dist: &NeedDistribution) -> Result<f64, TrainError> {
        greedy_accuracy(&self.speaker, &self.listener, lexicon, dist)
    }
}

fn check_lexicon(lexicon: &Lexicon, dist: &NeedDistribution) -> Result<(), TrainError> {
    if lexicon.range_max() < dist.n_max() {
        return Err(TrainError::LexiconTooSmall { lexicon: lexicon.range_max(), needed: dist.n_max() });
    }
    Ok(())
}

/// Plays `batch_size` games with targets drawn from `dist`, with the guess
/// supplied by `listen(target, message, rng)`.
pub fn play_batch_with<R, F>(
    speaker: &Speaker,
    lexicon: &Lexicon,
    dist: &NeedDistribution,
    batch_size: usize,
    rng: &mut R,
    mut listen: F,
) -> Result<EpisodeBatch, TrainError>
where
    R: Rng + ?Sized,
    F: FnMut(Numeral, &[Symbol], &mut R) -> (Numeral, Option<ListenerTrace>),
{
    check_lexicon(lexicon, dist)?;
    let mut episodes = Vec::with_capacity(batch_size);
    for _ in 0..batch_size {
        let target = dist.sample(rng);
        let expr = lexicon.entry(target).expect("lexicon covers the support");
        let tokens = tokenize(expr, speaker.vocab())?;
        let trace = speaker.speak(&tokens, rng, Mode::Sample);
        let (guess, listener) = listen(target, &trace.message, rng);
        episodes.push(Episode {
            target,
            message: trace.message.clone(),
            guess,
            reward: if guess == target { 1.0 } else { 0.0 },
            speaker: trace,
            listener,
        });
    }
    Ok(EpisodeBatch { episodes })
}

/// Plays one batch in sample mode. `dist` is the need distribution over the
/// communication range.
pub fn play_batch<R: Rng + ?Sized>(
    speaker: &Speaker,
    listener: &Listener,
    lexicon: &Lexicon,
    dist: &NeedDistribution,
    batch_size: usize,
    rng: &mut R,
) -> Result<EpisodeBatch, TrainError> {
    if listener.range() < dist.n_max() {
        return Err(TrainError::ListenerTooSmall { listener: listener.range(), needed: dist.n_max() });
    }
    play_batch_with(speaker, lexicon, dist, batch_size, rng, |_, message, rng| {
        let t = listener.listen(message, rng, Mode::Sample);
        (t.guess, Some(t))
    })
}

fn baseline(batch: &EpisodeBatch) -> f64 {
    batch.mean_reward()
}

/// Gradients of the batch surrogate loss for `(speaker, listener)`.
pub fn batch_gradients(pair: &AgentPair, batch: &EpisodeBatch) -> (Vec<f64>, Vec<f64>) {
    let n = batch.len().max(1) as f64;
    let b = baseline(batch);
    let beta = pair.config.entropy_coefficient / n;
    let speaker_beta = if pair.config.speaker_entropy { beta } else { 0.0 };
    let mut gs = vec![0.0; pair.speaker.params.len()];
    let mut gl = vec![0.0; pair.listener.params.len()];
    for e in &batch.episodes {
        let coef = (e.reward - b) / n;
        if coef != 0.0 || speaker_beta != 0.0 {
            pair.speaker.backward(&e.speaker, coef, speaker_beta, &mut gs);
        }
        if let Some(l) = &e.listener {
            if coef != 0.0 || beta != 0.0 {
                pair.listener.backward(l, coef, beta, &mut gl);
            }
        }
    }
    (gs, gl)
}

/// The batch surrogate losses `(speaker, listener)` recomputed from the
/// current parameters with the batch's actions and rewards held fixed.
pub fn surrogate_loss(pair: &AgentPair, batch: &EpisodeBatch) -> (f64, f64) {
    let n = batch.len().max(1) as f64;
    let b = baseline(batch);
    let beta = pair.config.entropy_coefficient;
    let (mut ls, mut ll) = (0.0, 0.0);
    for e in &batch.episodes {
        let adv = e.reward - b;
        let (lp, h) = pair.speaker.score(&e.speaker.tokens, &e.message);
        ls += -adv * lp;
        if pair.config.speaker_entropy {
            ls -= beta * h;
        }
        if e.listener.is_some() {
            let (lp, h) = pair.listener.score(&e.message, e.guess);
            ll += -adv * lp - beta * h;
        }
    }
    (ls / n, ll / n)
}

/// One Adam step per agent on the REINFORCE surrogate
/// `-(r - b) Σ log π` (listener also `- β H`), `b` the batch mean reward.
pub fn reinforce_update(pair: &mut AgentPair, batch: &EpisodeBatch) -> Result<LossDiagnostics, TrainError> {
    let (gs, gl) = batch_gradients(pair, batch);
    if !gs.iter().all(|g| g.is_finite()) {
        return Err(TrainError::NonFiniteGradient { agent: "speaker" });
    }
    if !gl.iter().all(|g| g.is_finite()) {
        return Err(TrainError::NonFiniteGradient { agent: "listener" });
    }
    let n = batch.len().max(1) as f64;
    let b = baseline(batch);
    let beta = pair.config.entropy_coefficient;
    let mut diag = LossDiagnostics { speaker_loss: 0.0, listener_loss: 0.0, mean_reward: b, listener_entropy: 0.0 };
    for e in &batch.episodes {
        let adv = e.reward - b;
        diag.speaker_loss -= adv * e.speaker.log_probs.iter().sum::<f64>() / n;
        if let Some(l) = &e.listener {
            diag.listener_loss += (-adv * l.log_prob - beta * l.entropy) / n;
            diag.listener_entropy += l.entropy / n;
        }
    }
    pair.speaker_opt.step(&mut pair.speaker.params, &gs);
    pair.listener_opt.step(&mut pair.listener.params, &gl);
    Ok(diag)
}

/// Probability under `dist` that greedy speaker and listener agree on the
/// target.
pub fn greedy_accuracy(
    speaker: &Speaker,
    listener: &Listener,
    lexicon: &Lexicon,
    dist: &NeedDistribution,
) -> Result<f64, TrainError> {
    check_lexicon(lexicon, dist)?;
    let mut hits = Vec::with_capacity(dist.n_max() as usize);
    for n in 1..=dist.n_max() {
        let tokens = tokenize(lexicon.entry(n).expect("covered"), speaker.vocab())?;
        let message = speaker.speak_greedy(&tokens);
        hits.push(if listener.listen_greedy(&message) == n { 1.0 } else { 0.0 });
    }
    Ok(dist.expectation(hits))
}

/// Trains for `epochs` batches on a fixed lexicon and returns the greedy
/// accuracy afterwards.
pub fn pretrain<R: Rng + ?Sized>(
    pair: &mut AgentPair,
    lexicon: &Lexicon,
    dist: &NeedDistribution,
    epochs: usize,
    rng: &mut R,
) -> Result<f64, TrainError> {
    for _ in 0..epochs {
        let batch = pair.play_batch(lexicon, dist, rng)?;
        reinforce_update(pair, &batch)?;
    }
    pair.accuracy(lexicon, dist)
}
