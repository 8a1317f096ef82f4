//! The numeral meta-grammar.
//!
//! ```text
//! Num    = D | Phrase | Phrase + Num | Phrase - Num
//! Phrase = Num * M
//! ```
//!
//! A grammar instance fixes the digit set `D` and multiplier set `M`
//! ([`DmPair`]). Expressions ([`NumExpr`]) are trees over those sets. The text
//! form is infix with `*` binding tighter than `+`/`-`, and `+`/`-` chains
//! nesting to the right, so `2*10-1*3+1` is `2*10 - (1*3 + 1)`. A Sum or Diff
//! used as the multiplicand of a Phrase is the only construct that needs
//! parentheses: `(1*10+2)*10`. Parentheses are not symbols and do not count
//! towards complexity.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A positive integer denoted by an expression.
pub type Numeral = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("digit set D must be non-empty")]
    EmptyDigits,
    #[error("numeral {0} appears in both D and M")]
    Overlap(Numeral),
    #[error("numeral {value} outside [1, {range_max}]")]
    OutOfRange { value: Numeral, range_max: Numeral },
    #[error("range bound must be at least 1")]
    EmptyRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unexpected character {ch:?} at byte {pos}")]
    UnknownToken { ch: char, pos: usize },
    #[error("numeral literal at byte {pos} is not a valid positive integer")]
    BadLiteral { pos: usize },
    #[error("{0} is not in D")]
    NotADigit(Numeral),
    #[error("{0} is not in M")]
    NotAMultiplier(Numeral),
    #[error("malformed expression: {0}")]
    Malformed(&'static str),
    #[error("subexpression value out of bounds")]
    Value(#[from] ValueError),
}

/// Raised when a construction would denote a value outside `[1, u32::MAX]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error("difference {minuend} - {subtrahend} is not positive")]
    NonPositive { minuend: u64, subtrahend: u64 },
    #[error("value overflows the numeral type")]
    Overflow,
}

/// A grammar instance: lexicalised digits `D`, multipliers `M`, and the
/// numeral range `[1, range_max]` the grammar is meant to cover.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "DmPairRepr", into = "DmPairRepr")]
pub struct DmPair {
    digits: BTreeSet<Numeral>,
    multipliers: BTreeSet<Numeral>,
    range_max: Numeral,
}

#[derive(Serialize, Deserialize)]
struct DmPairRepr {
    digits: Vec<Numeral>,
    multipliers: Vec<Numeral>,
    range_max: Numeral,
}

impl TryFrom<DmPairRepr> for DmPair {
    type Error = GrammarError;
    fn try_from(r: DmPairRepr) -> Result<Self, Self::Error> {
        DmPair::new(r.digits, r.multipliers, r.range_max)
    }
}

impl From<DmPair> for DmPairRepr {
    fn from(dm: DmPair) -> Self {
        DmPairRepr {
            digits: dm.digits.into_iter().collect(),
            multipliers: dm.multipliers.into_iter().collect(),
            range_max: dm.range_max,
        }
    }
}

impl DmPair {
    pub fn new(
        digits: impl IntoIterator<Item = Numeral>,
        multipliers: impl IntoIterator<Item = Numeral>,
        range_max: Numeral,
    ) -> Result<Self, GrammarError> {
        if range_max == 0 {
            return Err(GrammarError::EmptyRange);
        }
        let digits: BTreeSet<Numeral> = digits.into_iter().collect();
        let multipliers: BTreeSet<Numeral> = multipliers.into_iter().collect();
        if digits.is_empty() {
            return Err(GrammarError::EmptyDigits);
        }
        if let Some(&n) = digits.intersection(&multipliers).next() {
            return Err(GrammarError::Overlap(n));
        }
        for &value in digits.iter().chain(multipliers.iter()) {
            if value == 0 || value > range_max {
                return Err(GrammarError::OutOfRange { value, range_max });
            }
        }
        Ok(DmPair { digits, multipliers, range_max })
    }

    pub fn digits(&self) -> &BTreeSet<Numeral> {
        &self.digits
    }

    pub fn multipliers(&self) -> &BTreeSet<Numeral> {
        &self.multipliers
    }

    pub fn range_max(&self) -> Numeral {
        self.range_max
    }

    pub fn is_digit(&self, n: Numeral) -> bool {
        self.digits.contains(&n)
    }

    pub fn is_multiplier(&self, n: Numeral) -> bool {
        self.multipliers.contains(&n)
    }

    /// `true` if `n` is lexicalised as either a digit or a multiplier.
    pub fn contains(&self, n: Numeral) -> bool {
        self.is_digit(n) || self.is_multiplier(n)
    }

    /// `|D| + |M|`.
    pub fn lexicon_size(&self) -> usize {
        self.digits.len() + self.multipliers.len()
    }

    /// Same sets under a different range bound.
    pub fn with_range(&self, range_max: Numeral) -> Result<Self, GrammarError> {
        DmPair::new(self.digits.iter().copied(), self.multipliers.iter().copied(), range_max)
    }
}

impl fmt::Display for DmPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, set: &BTreeSet<Numeral>) -> fmt::Result {
            f.write_str("[")?;
            for (i, n) in set.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{n}")?;
            }
            f.write_str("]")
        }
        f.write_str("D=")?;
        list(f, &self.digits)?;
        f.write_str(" M=")?;
        list(f, &self.multipliers)
    }
}

/// `multiplicand * multiplier`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Phrase {
    multiplicand: Box<NumExpr>,
    multiplier: Numeral,
}

impl Phrase {
    pub fn new(multiplicand: NumExpr, multiplier: Numeral) -> Result<Self, ValueError> {
        let value = u64::from(multiplicand.value()) * u64::from(multiplier);
        if multiplier == 0 {
            return Err(ValueError::NonPositive { minuend: 0, subtrahend: 0 });
        }
        if value > u64::from(Numeral::MAX) {
            return Err(ValueError::Overflow);
        }
        Ok(Phrase { multiplicand: Box::new(multiplicand), multiplier })
    }

    pub fn multiplicand(&self) -> &NumExpr {
        &self.multiplicand
    }

    pub fn multiplier(&self) -> Numeral {
        self.multiplier
    }

    pub fn value(&self) -> Numeral {
        self.multiplicand.value() * self.multiplier
    }

    pub fn complexity(&self) -> usize {
        self.multiplicand.complexity() + 2
    }
}

/// An expression tree. The left operand of `+`/`-` is always a [`Phrase`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NumExpr {
    Digit(Numeral),
    Phrase(Phrase),
    Sum(Phrase, Box<NumExpr>),
    Diff(Phrase, Box<NumExpr>),
}

/// A symbol of an expression: a numeral literal or an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Num(Numeral),
    Plus,
    Minus,
    Times,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(n) => write!(f, "{n}"),
            Token::Plus => f.write_str("+"),
            Token::Minus => f.write_str("-"),
            Token::Times => f.write_str("*"),
        }
    }
}

impl NumExpr {
    pub fn digit(d: Numeral) -> Result<Self, ValueError> {
        if d == 0 {
            return Err(ValueError::NonPositive { minuend: 0, subtrahend: 0 });
        }
        Ok(NumExpr::Digit(d))
    }

    pub fn phrase(multiplicand: NumExpr, multiplier: Numeral) -> Result<Self, ValueError> {
        Phrase::new(multiplicand, multiplier).map(NumExpr::Phrase)
    }

    pub fn sum(phrase: Phrase, rest: NumExpr) -> Result<Self, ValueError> {
        let value = u64::from(phrase.value()) + u64::from(rest.value());
        if value > u64::from(Numeral::MAX) {
            return Err(ValueError::Overflow);
        }
        Ok(NumExpr::Sum(phrase, Box::new(rest)))
    }

    pub fn diff(phrase: Phrase, rest: NumExpr) -> Result<Self, ValueError> {
        let (minuend, subtrahend) = (u64::from(phrase.value()), u64::from(rest.value()));
        if minuend <= subtrahend {
            return Err(ValueError::NonPositive { minuend, subtrahend });
        }
        Ok(NumExpr::Diff(phrase, Box::new(rest)))
    }

    /// The integer the expression denotes.
    pub fn value(&self) -> Numeral {
        match self {
            NumExpr::Digit(d) => *d,
            NumExpr::Phrase(p) => p.value(),
            NumExpr::Sum(p, r) => p.value() + r.value(),
            NumExpr::Diff(p, r) => p.value() - r.value(),
        }
    }

    /// Morphosyntactic complexity: the number of symbols in the expression.
    pub fn complexity(&self) -> usize {
        match self {
            NumExpr::Digit(_) => 1,
            NumExpr::Phrase(p) => p.complexity(),
            NumExpr::Sum(p, r) | NumExpr::Diff(p, r) => p.complexity() + 1 + r.complexity(),
        }
    }

    /// Symbols in rendering order; `tokens().len() == complexity()`.
    pub fn tokens(&self) -> Vec<Token> {
        let mut out = Vec::with_capacity(self.complexity());
        self.push_tokens(&mut out);
        out
    }

    fn push_tokens(&self, out: &mut Vec<Token>) {
        match self {
            NumExpr::Digit(d) => out.push(Token::Num(*d)),
            NumExpr::Phrase(p) => p.push_tokens(out),
            NumExpr::Sum(p, r) | NumExpr::Diff(p, r) => {
                p.push_tokens(out);
                out.push(if matches!(self, NumExpr::Sum(..)) { Token::Plus } else { Token::Minus });
                r.push_tokens(out);
            }
        }
    }

    /// Canonical text form, e.g. `9*10+9`.
    pub fn render(&self) -> String {
        self.to_string()
    }

    /// Checks every digit leaf against `D` and every multiplier against `M`.
    pub fn check_membership(&self, dm: &DmPair) -> Result<(), ParseError> {
        match self {
            NumExpr::Digit(d) if dm.is_digit(*d) => Ok(()),
            NumExpr::Digit(d) => Err(ParseError::NotADigit(*d)),
            NumExpr::Phrase(p) => p.check_membership(dm),
            NumExpr::Sum(p, r) | NumExpr::Diff(p, r) => {
                p.check_membership(dm)?;
                r.check_membership(dm)
            }
        }
    }

    /// Multiplier of the outermost phrase, if any.
    pub fn outer_multiplier(&self) -> Option<Numeral> {
        match self {
            NumExpr::Digit(_) => None,
            NumExpr::Phrase(p) | NumExpr::Sum(p, _) | NumExpr::Diff(p, _) => Some(p.multiplier),
        }
    }

    /// Value of the right operand of `+`/`-`, if any.
    pub fn rest_value(&self) -> Option<Numeral> {
        match self {
            NumExpr::Sum(_, r) | NumExpr::Diff(_, r) => Some(r.value()),
            _ => None,
        }
    }

    /// Parses the canonical text form produced by [`NumExpr::render`]. ASCII
    /// whitespace between symbols is ignored.
    pub fn parse(text: &str, dm: &DmPair) -> Result<NumExpr, ParseError> {
        let lexemes = lex(text)?;
        let mut parser = Parser { lexemes: &lexemes, pos: 0, depth: 0, dm };
        let expr = parser.num()?;
        if parser.pos != lexemes.len() {
            return Err(ParseError::Malformed("trailing input"));
        }
        Ok(expr)
    }
}

impl Phrase {
    fn push_tokens(&self, out: &mut Vec<Token>) {
        self.multiplicand.push_tokens(out);
        out.push(Token::Times);
        out.push(Token::Num(self.multiplier));
    }

    fn check_membership(&self, dm: &DmPair) -> Result<(), ParseError> {
        if !dm.is_multiplier(self.multiplier) {
            return Err(ParseError::NotAMultiplier(self.multiplier));
        }
        self.multiplicand.check_membership(dm)
    }
}

impl fmt::Display for Phrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.multiplicand {
            inner @ (NumExpr::Sum(..) | NumExpr::Diff(..)) => write!(f, "({inner})")?,
            inner => write!(f, "{inner}")?,
        }
        write!(f, "*{}", self.multiplier)
    }
}

impl fmt::Display for NumExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumExpr::Digit(d) => write!(f, "{d}"),
            NumExpr::Phrase(p) => write!(f, "{p}"),
            NumExpr::Sum(p, r) => write!(f, "{p}+{r}"),
            NumExpr::Diff(p, r) => write!(f, "{p}-{r}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Lexeme {
    Num(Numeral),
    Plus,
    Minus,
    Times,
    Open,
    Close,
}

fn lex(text: &str) -> Result<Vec<Lexeme>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'(' | b')' => {
                out.push(match b {
                    b'+' => Lexeme::Plus,
                    b'-' => Lexeme::Minus,
                    b'*' => Lexeme::Times,
                    b'(' => Lexeme::Open,
                    _ => Lexeme::Close,
                });
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let literal = &text[start..i];
                if literal.starts_with('0') {
                    return Err(ParseError::BadLiteral { pos: start });
                }
                let n = literal.parse::<Numeral>().map_err(|_| ParseError::BadLiteral { pos: start })?;
                out.push(Lexeme::Num(n));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('\u{fffd}');
                return Err(ParseError::UnknownToken { ch, pos: i });
            }
        }
    }
    Ok(out)
}

/// Deepest `num` nesting the parser accepts.
pub const MAX_PARSE_DEPTH: usize = 256;

struct Parser<'a> {
    lexemes: &'a [Lexeme],
    pos: usize,
    depth: usize,
    dm: &'a DmPair,
}

impl Parser<'_> {
    fn peek(&self) -> Option<Lexeme> {
        self.lexemes.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<Lexeme> {
        let l = self.peek();
        self.pos += 1;
        l
    }

    fn num(&mut self) -> Result<NumExpr, ParseError> {
        if self.depth == MAX_PARSE_DEPTH {
            return Err(ParseError::Malformed("expression nested too deeply"));
        }
        self.depth += 1;
        let expr = self.num_inner();
        self.depth -= 1;
        expr
    }

    // num := term (('+' | '-') num)?
    fn num_inner(&mut self) -> Result<NumExpr, ParseError> {
        let term = self.term()?;
        match self.peek() {
            Some(op @ (Lexeme::Plus | Lexeme::Minus)) => {
                self.pos += 1;
                let NumExpr::Phrase(phrase) = term else {
                    return Err(ParseError::Malformed("left operand of + or - must be a phrase"));
                };
                let rest = self.num()?;
                Ok(if op == Lexeme::Plus {
                    NumExpr::sum(phrase, rest)?
                } else {
                    NumExpr::diff(phrase, rest)?
                })
            }
            _ => Ok(term),
        }
    }

    // term := atom ('*' multiplier)*
    fn term(&mut self) -> Result<NumExpr, ParseError> {
        let (mut expr, parenthesised) = self.atom()?;
        let mut multiplied = false;
        while self.peek() == Some(Lexeme::Times) {
            self.pos += 1;
            match self.next() {
                Some(Lexeme::Num(m)) if self.dm.is_multiplier(m) => {
                    expr = NumExpr::phrase(expr, m)?;
                    multiplied = true;
                }
                Some(Lexeme::Num(m)) => return Err(ParseError::NotAMultiplier(m)),
                _ => return Err(ParseError::Malformed("expected a multiplier after *")),
            }
        }
        if parenthesised && !multiplied {
            return Err(ParseError::Malformed("parentheses only wrap a multiplicand"));
        }
        Ok(expr)
    }

    fn atom(&mut self) -> Result<(NumExpr, bool), ParseError> {
        match self.next() {
            Some(Lexeme::Num(d)) if self.dm.is_digit(d) => Ok((NumExpr::digit(d)?, false)),
            Some(Lexeme::Num(d)) => Err(ParseError::NotADigit(d)),
            Some(Lexeme::Open) => {
                let inner = self.num()?;
                if self.next() != Some(Lexeme::Close) {
                    return Err(ParseError::Malformed("unbalanced parenthesis"));
                }
                if !matches!(inner, NumExpr::Sum(..) | NumExpr::Diff(..)) {
                    return Err(ParseError::Malformed("redundant parentheses"));
                }
                Ok((inner, true))
            }
            Some(_) => Err(ParseError::Malformed("expected a digit or '('")),
            None => Err(ParseError::Malformed("unexpected end of input")),
        }
    }
}
