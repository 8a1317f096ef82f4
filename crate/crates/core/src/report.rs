//! Text formatting shared by the CSV writers.

use std::num::ParseIntError;

use thiserror::Error;

use crate::grammar::Numeral;

/// Formats `x` with at most 12 significant digits, trailing zeros removed.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `1;2;10`; empty for an empty set.
pub fn format_list<'a>(items: impl IntoIterator<Item = &'a Numeral>) -> String {
    items.into_iter().map(|n| n.to_string()).collect::<Vec<_>>().join(";")
}

/// Inverse of [`format_list`].
pub fn parse_list(s: &str) -> Result<Vec<Numeral>, ParseIntError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(|t| t.trim().parse()).collect()
}

/// Largest number of values a single `a..b` span may expand to.
pub const MAX_SPAN: Numeral = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumeralListError {
    #[error("invalid numeral `{0}`")]
    Numeral(String),
    #[error("empty span `{0}`")]
    EmptySpan(String),
    #[error("span `{0}` is longer than {MAX_SPAN}")]
    SpanTooLong(String),
}

/// Parses a command-line numeral list such as `1,2,3`, `1..9,11` or `1;4`.
/// Spans `a..b` are inclusive. Duplicates are kept.
pub fn parse_numeral_list(s: &str) -> Result<Vec<Numeral>, NumeralListError> {
    let mut out = Vec::new();
    for item in s.split([',', ';']).map(str::trim).filter(|t| !t.is_empty()) {
        let value = |t: &str| t.trim().parse::<Numeral>().map_err(|_| NumeralListError::Numeral(t.trim().into()));
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (value(a)?, value(b)?);
                if a > b {
                    return Err(NumeralListError::EmptySpan(item.into()));
                }
                if b - a >= MAX_SPAN {
                    return Err(NumeralListError::SpanTooLong(item.into()));
                }
                out.extend(a..=b);
            }
            None => out.push(value(item)?),
        }
    }
    Ok(out)
}
