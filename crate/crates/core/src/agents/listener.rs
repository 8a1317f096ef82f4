use rand::Rng;

use super::nn::{argmax, axpy, entropy, policy_logit_grad, softmax, Dense, Layout, Lstm, LstmStep};
use super::speaker::sample_index;
use super::{AgentConfig, Mode, Symbol};
use crate::grammar::Numeral;

/// Reads a whole message, then classifies it as a numeral in
/// `1..=numeral_range`.
#[derive(Debug, Clone, PartialEq)]
pub struct Listener {
    layout: Layout,
    pub(crate) params: Vec<f64>,
    alphabet: usize,
    range: Numeral,
    embed: usize,
    embed_dim: usize,
    lstm: Lstm,
    head: Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ListenerTrace {
    pub message: Vec<Symbol>,
    pub guess: Numeral,
    pub log_prob: f64,
    pub entropy: f64,
    pub(crate) probs: Vec<f64>,
    pub(crate) steps: Vec<LstmStep>,
}

impl ListenerTrace {
    /// Distribution over `1..=range`, index `n - 1`.
    pub fn distribution(&self) -> &[f64] {
        &self.probs
    }
}

impl Listener {
    pub fn new<R: Rng + ?Sized>(config: &AgentConfig, rng: &mut R) -> Self {
        let mut layout = Layout::default();
        let embed = layout.add("listener.embed", config.message_alphabet_size, config.embedding_dim);
        let lstm = Lstm::new(&mut layout, "listener.lstm", config.embedding_dim, config.hidden_dim);
        let head = Dense::new(&mut layout, "listener.head", config.hidden_dim, config.numeral_range as usize);
        let params = layout.init_uniform(config.init_scale, rng);
        Listener {
            layout,
            params,
            alphabet: config.message_alphabet_size,
            range: config.numeral_range,
            embed,
            embed_dim: config.embedding_dim,
            lstm,
            head,
        }
    }

    pub fn range(&self) -> Numeral {
        self.range
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

    fn forward(&self, message: &[Symbol]) -> (Vec<LstmStep>, Vec<f64>) {
        assert!(!message.is_empty(), "empty message");
        let h0 = vec![0.0; self.lstm.hidden];
        let mut steps: Vec<LstmStep> = Vec::with_capacity(message.len());
        for &sym in message {
            assert!(sym < self.alphabet, "symbol {sym} outside alphabet");
            let at = self.embed + sym * self.embed_dim;
            let (h, c) = steps.last().map_or((&h0, &h0), |s| (&s.h, &s.c));
            let s = self.lstm.step(&self.params, &self.params[at..at + self.embed_dim], h, c);
            steps.push(s);
        }
        let h = &steps.last().expect("non-empty").h;
        let probs = softmax(&self.head.forward(&self.params, h));
        (steps, probs)
    }

    pub fn listen<R: Rng + ?Sized>(&self, message: &[Symbol], rng: &mut R, mode: Mode) -> ListenerTrace {
        let (steps, probs) = self.forward(message);
        let k = match mode {
            Mode::Greedy => argmax(&probs),
            Mode::Sample => sample_index(&probs, rng),
        };
        ListenerTrace {
            message: message.to_vec(),
            guess: k as Numeral + 1,
            log_prob: probs[k].ln(),
            entropy: entropy(&probs),
            probs,
            steps,
        }
    }

    pub fn listen_greedy(&self, message: &[Symbol]) -> Numeral {
        argmax(&self.forward(message).1) as Numeral + 1
    }

    /// `(log π(guess), H)` for a forced guess.
    pub fn score(&self, message: &[Symbol], guess: Numeral) -> (f64, f64) {
        let (_, probs) = self.forward(message);
        (probs[guess as usize - 1].ln(), entropy(&probs))
    }

    /// Accumulates the gradient of `-coef · log π(guess) - beta · H`.
    pub fn backward(&self, trace: &ListenerTrace, coef: f64, beta: f64, grad: &mut [f64]) {
        let dlogits = policy_logit_grad(&trace.probs, trace.guess as usize - 1, coef, beta);
        let last = trace.steps.last().expect("non-empty");
        let mut dh = self.head.backward(&self.params, grad, &last.h, &dlogits);
        let mut dc = vec![0.0; self.lstm.hidden];
        for (t, s) in trace.steps.iter().enumerate().rev() {
            let (dx, dh_prev, dc_prev) = self.lstm.backward(&self.params, grad, s, &dh, &dc);
            let at = self.embed + trace.message[t] * self.embed_dim;
            axpy(1.0, &dx, &mut grad[at..at + self.embed_dim]);
            dh = dh_prev;
            dc = dc_prev;
        }
    }
}
