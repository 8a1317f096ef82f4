use rand::Rng;

use super::nn::{argmax, axpy, entropy, policy_logit_grad, softmax, Dense, Layout, Lstm, LstmStep};
use super::{AgentConfig, Mode, Symbol, Vocab};

/// Maps an expression's token sequence to a message of the same length, one
/// symbol per step.
#[derive(Debug, Clone, PartialEq)]
pub struct Speaker {
    layout: Layout,
    pub(crate) params: Vec<f64>,
    vocab: Vocab,
    embed: usize,
    embed_dim: usize,
    lstm: Lstm,
    head: Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerTrace {
    pub tokens: Vec<usize>,
    pub message: Vec<Symbol>,
    /// `log π(message[t])` for each step.
    pub log_probs: Vec<f64>,
    pub(crate) probs: Vec<Vec<f64>>,
    pub(crate) steps: Vec<LstmStep>,
}

impl SpeakerTrace {
    /// Per-step output distributions.
    pub fn distributions(&self) -> &[Vec<f64>] {
        &self.probs
    }
}

impl Speaker {
    pub fn new<R: Rng + ?Sized>(config: &AgentConfig, rng: &mut R) -> Self {
        let vocab = Vocab::new(config.numeral_range);
        let mut layout = Layout::default();
        let embed = layout.add("speaker.embed", vocab.len(), config.embedding_dim);
        let lstm = Lstm::new(&mut layout, "speaker.lstm", config.embedding_dim, config.hidden_dim);
        let head = Dense::new(&mut layout, "speaker.head", config.hidden_dim, config.message_alphabet_size);
        let params = layout.init_uniform(config.init_scale, rng);
        Speaker { layout, params, vocab, embed, embed_dim: config.embedding_dim, lstm, head }
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn embedding(&self, token: usize) -> &[f64] {
        let at = self.embed + token * self.embed_dim;
        &self.params[at..at + self.embed_dim]
    }

    fn forward(&self, tokens: &[usize]) -> (Vec<LstmStep>, Vec<Vec<f64>>) {
        let h0 = vec![0.0; self.lstm.hidden];
        let mut steps: Vec<LstmStep> = Vec::with_capacity(tokens.len());
        let mut probs = Vec::with_capacity(tokens.len());
        for &tok in tokens {
            let (h, c) = steps.last().map_or((&h0, &h0), |s| (&s.h, &s.c));
            let s = self.lstm.step(&self.params, self.embedding(tok), h, c);
            probs.push(softmax(&self.head.forward(&self.params, &s.h)));
            steps.push(s);
        }
        (steps, probs)
    }

    /// Emits one symbol per input token.
    pub fn speak<R: Rng + ?Sized>(&self, tokens: &[usize], rng: &mut R, mode: Mode) -> SpeakerTrace {
        assert!(!tokens.is_empty(), "empty token sequence");
        let (steps, probs) = self.forward(tokens);
        let message: Vec<Symbol> = probs
            .iter()
            .map(|p| match mode {
                Mode::Greedy => argmax(p),
                Mode::Sample => sample_index(p, rng),
            })
            .collect();
        let log_probs = probs.iter().zip(&message).map(|(p, &m)| p[m].ln()).collect();
        SpeakerTrace { tokens: tokens.to_vec(), message, log_probs, probs, steps }
    }

    pub fn speak_greedy(&self, tokens: &[usize]) -> Vec<Symbol> {
        let (_, probs) = self.forward(tokens);
        probs.iter().map(|p| argmax(p)).collect()
    }

    /// `(Σ_t log π(message[t]), Σ_t H_t)` with the message forced.
    pub fn score(&self, tokens: &[usize], message: &[Symbol]) -> (f64, f64) {
        let (_, probs) = self.forward(tokens);
        probs.iter().zip(message).fold((0.0, 0.0), |(lp, h), (p, &m)| (lp + p[m].ln(), h + entropy(p)))
    }

    /// Accumulates the gradient of `-coef · Σ_t log π(m_t) - beta · Σ_t H_t`.
    pub fn backward(&self, trace: &SpeakerTrace, coef: f64, beta: f64, grad: &mut [f64]) {
        let nh = self.lstm.hidden;
        let mut dh_next = vec![0.0; nh];
        let mut dc_next = vec![0.0; nh];
        for t in (0..trace.steps.len()).rev() {
            let s = &trace.steps[t];
            let dlogits = policy_logit_grad(&trace.probs[t], trace.message[t], coef, beta);
            let mut dh = self.head.backward(&self.params, grad, &s.h, &dlogits);
            axpy(1.0, &dh_next, &mut dh);
            let (dx, dh_prev, dc_prev) = self.lstm.backward(&self.params, grad, s, &dh, &dc_next);
            let at = self.embed + trace.tokens[t] * self.embed_dim;
            axpy(1.0, &dx, &mut grad[at..at + self.embed_dim]);
            dh_next = dh_prev;
            dc_next = dc_prev;
        }
    }
}

pub(crate) fn sample_index<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    p.iter().rposition(|&x| x > 0.0).unwrap_or(p.len() - 1)
}
