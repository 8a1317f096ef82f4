//! Central finite-difference check of the REINFORCE surrogate gradients.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::game::{batch_gradients, surrogate_loss, AgentPair};
use super::AgentConfig;
use crate::grammar::DmPair;
use crate::lexicon::compute_lmin;
use crate::metrics::NeedDistribution;

/// Finite-difference step.
pub const STEP: f64 = 1e-5;
/// Gradients smaller than this are compared on an absolute scale.
pub const MAGNITUDE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub seed: u64,
    pub parameters: usize,
    pub mean_reward: f64,
    pub max_relative_error: f64,
}

/// A two-layer-deep policy small enough for exhaustive finite differences.
pub fn tiny_config() -> AgentConfig {
    AgentConfig {
        embedding_dim: 3,
        hidden_dim: 4,
        batch_size: 16,
        message_alphabet_size: 3,
        numeral_range: 3,
        speaker_entropy: true,
        init_scale: 0.5,
        ..AgentConfig::default()
    }
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(MAGNITUDE_FLOOR)
}

fn check_params(
    pair: &mut AgentPair,
    analytic: &[f64],
    select: fn(&mut AgentPair) -> &mut Vec<f64>,
    loss: impl Fn(&AgentPair) -> f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, &a) in analytic.iter().enumerate() {
        let orig = select(pair)[k];
        select(pair)[k] = orig + STEP;
        let up = loss(pair);
        select(pair)[k] = orig - STEP;
        let down = loss(pair);
        select(pair)[k] = orig;
        worst = worst.max(relative_error(a, (up - down) / (2.0 * STEP)));
    }
    worst
}

pub fn gradient_check(seed: u64) -> GradCheckReport {
    let config = tiny_config();
    let mut pair = AgentPair::new(config.clone(), seed).expect("valid config");
    let dm = DmPair::new([1], [2], config.numeral_range).expect("valid grammar");
    let lexicon = compute_lmin(&dm).expect("covers");
    let dist = NeedDistribution::new(config.numeral_range);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let batch = pair.play_batch(&lexicon, &dist, &mut rng).expect("valid batch");
    let (gs, gl) = batch_gradients(&pair, &batch);
    let es = check_params(&mut pair, &gs, |p| &mut p.speaker.params, |p| surrogate_loss(p, &batch).0);
    let el = check_params(&mut pair, &gl, |p| &mut p.listener.params, |p| surrogate_loss(p, &batch).1);
    GradCheckReport {
        seed,
        parameters: gs.len() + gl.len(),
        mean_reward: batch.mean_reward(),
        max_relative_error: es.max(el),
    }
}
