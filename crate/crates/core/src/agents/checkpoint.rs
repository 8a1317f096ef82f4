//! Text checkpoints of an [`AgentPair`].
//!
//! ```text
//! recnum-checkpoint v1
//! config {"embedding_dim":5,...}
//! tensor speaker.embed 53 5
//! <rows*cols values, space separated>
//! ...
//! tensor speaker.adam.m 1 <n>
//! ...
//! steps speaker <t>
//! steps listener <t>
//! end
//! ```
//!
//! Tensors appear in layout order (speaker, listener), followed by the Adam
//! moments. Values use the shortest exponent form that round-trips.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::game::AgentPair;
use super::AgentConfig;

pub const HEADER: &str = "recnum-checkpoint v1";

/// Largest total parameter count a checkpoint may declare.
pub const MAX_PARAMETERS: u128 = 10_000_000;

/// Parameter count of both agents under `config`, without allocating.
pub fn parameter_count(config: &AgentConfig) -> u128 {
    let (e, h) = (config.embedding_dim as u128, config.hidden_dim as u128);
    let (a, r) = (config.message_alphabet_size as u128, config.numeral_range as u128);
    let lstm = 4 * h * (e + h) + 4 * h;
    let speaker = (r + 3) * e + lstm + h * a + a;
    let listener = a * e + lstm + h * r + r;
    speaker + listener
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

fn tensors(pair: &AgentPair) -> Vec<(String, usize, usize, &[f64])> {
    let mut out = Vec::new();
    for (layout, params) in [
        (pair.speaker.layout(), pair.speaker.params()),
        (pair.listener.layout(), pair.listener.params()),
    ] {
        for t in layout.tensors() {
            out.push((t.name.clone(), t.rows, t.cols, &params[t.range()]));
        }
    }
    for (name, opt) in [("speaker", &pair.speaker_opt), ("listener", &pair.listener_opt)] {
        out.push((format!("{name}.adam.m"), 1, opt.m.len(), opt.m.as_slice()));
        out.push((format!("{name}.adam.v"), 1, opt.v.len(), opt.v.as_slice()));
    }
    out
}

pub fn save_checkpoint<W: Write>(pair: &AgentPair, mut out: W) -> io::Result<()> {
    writeln!(out, "{HEADER}")?;
    writeln!(out, "config {}", serde_json::to_string(&pair.config).map_err(io::Error::other)?)?;
    for (name, rows, cols, values) in tensors(pair) {
        writeln!(out, "tensor {name} {rows} {cols}")?;
        let line: Vec<String> = values.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    writeln!(out, "steps speaker {}", pair.speaker_opt.t)?;
    writeln!(out, "steps listener {}", pair.listener_opt.t)?;
    writeln!(out, "end")?;
    out.flush()
}

struct Lines<R> {
    inner: io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String, CheckpointError> {
        self.line += 1;
        match self.inner.next() {
            Some(l) => Ok(l?),
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, message: impl Into<String>) -> CheckpointError {
        CheckpointError::Format { line: self.line, message: message.into() }
    }

    fn expect_prefixed<'a>(&self, text: &'a str, prefix: &str) -> Result<&'a str, CheckpointError> {
        text.strip_prefix(prefix).ok_or_else(|| self.err(format!("expected `{}`", prefix.trim_end())))
    }
}

pub fn load_checkpoint<R: BufRead>(input: R) -> Result<AgentPair, CheckpointError> {
    let mut lines = Lines { inner: input.lines(), line: 0 };
    if lines.next()? != HEADER {
        return Err(lines.err("missing checkpoint header"));
    }
    let text = lines.next()?;
    let json = lines.expect_prefixed(&text, "config ")?;
    let config: AgentConfig = serde_json::from_str(json).map_err(|e| lines.err(format!("config: {e}")))?;
    config.validate().map_err(|e| lines.err(format!("config: {e}")))?;
    if parameter_count(&config) > MAX_PARAMETERS {
        return Err(lines.err(format!("config declares more than {MAX_PARAMETERS} parameters")));
    }
    // Weights are overwritten below; the seed only shapes the layout.
    let mut pair = AgentPair::new(config, 0).map_err(|e| lines.err(e.to_string()))?;

    let expected: Vec<(String, usize, usize)> =
        tensors(&pair).into_iter().map(|(n, r, c, _)| (n, r, c)).collect();
    let mut loaded = Vec::with_capacity(expected.len());
    for (name, rows, cols) in &expected {
        let text = lines.next()?;
        let header = lines.expect_prefixed(&text, "tensor ")?;
        let want = format!("{name} {rows} {cols}");
        if header != want {
            return Err(lines.err(format!("expected tensor `{want}`, found `{header}`")));
        }
        let text = lines.next()?;
        let values = text
            .split_ascii_whitespace()
            .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| lines.err("invalid value"))?;
        if values.len() != rows * cols {
            return Err(lines.err(format!("expected {} values, found {}", rows * cols, values.len())));
        }
        loaded.push(values);
    }
    let mut steps = [0u64; 2];
    for (slot, agent) in steps.iter_mut().zip(["speaker", "listener"]) {
        let text = lines.next()?;
        let v = lines.expect_prefixed(&text, &format!("steps {agent} "))?;
        *slot = v.parse().map_err(|_| lines.err("invalid step count"))?;
    }
    if lines.next()? != "end" {
        return Err(lines.err("expected `end`"));
    }

    let mut loaded = loaded.into_iter();
    for params in [pair.speaker.params.as_mut_slice(), pair.listener.params.as_mut_slice()] {
        let mut at = 0;
        while at < params.len() {
            let v = loaded.next().expect("layout tensors");
            params[at..at + v.len()].copy_from_slice(&v);
            at += v.len();
        }
    }
    for (opt, t) in [(&mut pair.speaker_opt, steps[0]), (&mut pair.listener_opt, steps[1])] {
        opt.m = loaded.next().expect("adam m");
        opt.v = loaded.next().expect("adam v");
        opt.t = t;
    }
    Ok(pair)
}
