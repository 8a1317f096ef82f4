//! Minimal f64 building blocks: flat parameter layout, an LSTM cell, a dense
//! head, softmax and Adam.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
}

impl TensorSpec {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Named row-major tensors packed into one flat vector.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    tensors: Vec<TensorSpec>,
    len: usize,
}

impl Layout {
    pub fn add(&mut self, name: &str, rows: usize, cols: usize) -> usize {
        let offset = self.len;
        self.tensors.push(TensorSpec { name: name.to_string(), rows, cols, offset });
        self.len += rows * cols;
        offset
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn tensors(&self) -> &[TensorSpec] {
        &self.tensors
    }

    pub fn init_uniform<R: Rng + ?Sized>(&self, scale: f64, rng: &mut R) -> Vec<f64> {
        (0..self.len).map(|_| rng.gen_range(-scale..=scale)).collect()
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in p.iter().enumerate() {
        if x > p[best] {
            best = i;
        }
    }
    best
}

/// Gradient of `coef * (-log p[action]) - beta * H(p)` with respect to the
/// logits.
pub fn policy_logit_grad(p: &[f64], action: usize, coef: f64, beta: f64) -> Vec<f64> {
    let h = entropy(p);
    p.iter()
        .enumerate()
        .map(|(k, &pk)| {
            let onehot = if k == action { 1.0 } else { 0.0 };
            let pg = coef * (pk - onehot);
            let eg = if beta != 0.0 && pk > 0.0 { beta * pk * (pk.ln() + h) } else { 0.0 };
            pg + eg
        })
        .collect()
}

/// Dense layer `W h + b`, `W` being `out x input`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dense {
    pub input: usize,
    pub output: usize,
    pub w: usize,
    pub b: usize,
}

impl Dense {
    pub fn new(layout: &mut Layout, name: &str, input: usize, output: usize) -> Self {
        let w = layout.add(&format!("{name}.w"), output, input);
        let b = layout.add(&format!("{name}.b"), output, 1);
        Dense { input, output, w, b }
    }

    pub fn forward(&self, p: &[f64], x: &[f64]) -> Vec<f64> {
        let w = &p[self.w..self.w + self.output * self.input];
        let b = &p[self.b..self.b + self.output];
        w.chunks_exact(self.input).zip(b).map(|(row, bi)| bi + dot(row, x)).collect()
    }

    /// Accumulates parameter gradients and returns `dL/dx`.
    pub fn backward(&self, p: &[f64], g: &mut [f64], x: &[f64], dy: &[f64]) -> Vec<f64> {
        let n = self.output * self.input;
        let mut dx = vec![0.0; self.input];
        for (r, &d) in dy.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let row = self.w + r * self.input;
            axpy(d, x, &mut g[row..row + self.input]);
            axpy(d, &p[row..row + self.input], &mut dx);
            g[self.b + r] += d;
        }
        debug_assert!(self.w + n <= p.len());
        dx
    }
}

/// LSTM cell with gates ordered input, forget, cell, output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lstm {
    pub input: usize,
    pub hidden: usize,
    pub w: usize,
    pub b: usize,
}

/// Values kept from one forward step for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmStep {
    /// `[x; h_prev]`.
    pub xh: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Activated gates `[i; f; g; o]`.
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

impl Lstm {
    pub fn new(layout: &mut Layout, name: &str, input: usize, hidden: usize) -> Self {
        let w = layout.add(&format!("{name}.w"), 4 * hidden, input + hidden);
        let b = layout.add(&format!("{name}.b"), 4 * hidden, 1);
        Lstm { input, hidden, w, b }
    }

    pub fn step(&self, p: &[f64], x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> LstmStep {
        let (nh, cols) = (self.hidden, self.input + self.hidden);
        let mut xh = Vec::with_capacity(cols);
        xh.extend_from_slice(x);
        xh.extend_from_slice(h_prev);
        let w = &p[self.w..self.w + 4 * nh * cols];
        let b = &p[self.b..self.b + 4 * nh];
        let mut gates: Vec<f64> = w.chunks_exact(cols).zip(b).map(|(row, bi)| bi + dot(row, &xh)).collect();
        for (k, z) in gates.iter_mut().enumerate() {
            *z = if k / nh == 2 { z.tanh() } else { sigmoid(*z) };
        }
        let mut c = vec![0.0; nh];
        let mut tanh_c = vec![0.0; nh];
        let mut h = vec![0.0; nh];
        for j in 0..nh {
            let (i, f, g, o) = (gates[j], gates[nh + j], gates[2 * nh + j], gates[3 * nh + j]);
            c[j] = f * c_prev[j] + i * g;
            tanh_c[j] = c[j].tanh();
            h[j] = o * tanh_c[j];
        }
        LstmStep { xh, c_prev: c_prev.to_vec(), gates, c, tanh_c, h }
    }

    /// Backpropagates `dh`, `dc` through one step. Accumulates parameter
    /// gradients into `g` and returns `(dx, dh_prev, dc_prev)`.
    pub fn backward(
        &self,
        p: &[f64],
        g: &mut [f64],
        s: &LstmStep,
        dh: &[f64],
        dc: &[f64],
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (nh, cols) = (self.hidden, self.input + self.hidden);
        let mut dz = vec![0.0; 4 * nh];
        let mut dc_prev = vec![0.0; nh];
        for j in 0..nh {
            let (i, f, gg, o) = (s.gates[j], s.gates[nh + j], s.gates[2 * nh + j], s.gates[3 * nh + j]);
            let t = s.tanh_c[j];
            let dcj = dc[j] + dh[j] * o * (1.0 - t * t);
            dz[j] = dcj * gg * i * (1.0 - i);
            dz[nh + j] = dcj * s.c_prev[j] * f * (1.0 - f);
            dz[2 * nh + j] = dcj * i * (1.0 - gg * gg);
            dz[3 * nh + j] = dh[j] * t * o * (1.0 - o);
            dc_prev[j] = dcj * f;
        }
        let mut dxh = vec![0.0; cols];
        for (r, &d) in dz.iter().enumerate() {
            let row = self.w + r * cols;
            axpy(d, &s.xh, &mut g[row..row + cols]);
            axpy(d, &p[row..row + cols], &mut dxh);
            g[self.b + r] += d;
        }
        let dh_prev = dxh.split_off(self.input);
        (dxh, dh_prev, dc_prev)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(learning_rate: f64) -> Self {
        AdamConfig { learning_rate, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub config: AdamConfig,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl Adam {
    pub fn new(n: usize, config: AdamConfig) -> Self {
        Adam { config, m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        let AdamConfig { learning_rate, beta1, beta2, eps } = self.config;
        self.t += 1;
        let t = self.t as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        for k in 0..params.len() {
            let gk = grad[k];
            self.m[k] = beta1 * self.m[k] + (1.0 - beta1) * gk;
            self.v[k] = beta2 * self.v[k] + (1.0 - beta2) * gk * gk;
            let m_hat = self.m[k] / c1;
            let v_hat = self.v[k] / c2;
            params[k] -= learning_rate * m_hat / (v_hat.sqrt() + eps);
        }
    }
}
