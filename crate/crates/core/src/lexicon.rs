//! Minimal-complexity lexicons (`L_min`) and coverage.
//!
//! Symbol counts are computed level by level: every value whose cheapest
//! expression has `c` symbols is discovered from values of strictly smaller
//! cost, so a value is final the first time it is reached. Intermediate
//! values are bounded by a cap (default `2 * range_max`) so that subtraction
//! can route through values above the range, e.g. `1*10*10-1` for 99.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::grammar::{DmPair, NumExpr, Numeral, Phrase};

/// Default ratio between the intermediate value cap and the range bound.
pub const DEFAULT_CAP_FACTOR: Numeral = 2;

/// Some numerals in range have no expression under the grammar.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{dm} cannot express {} of [1, {range_max}]: {}", uncovered.len(), list(uncovered))]
pub struct CoverageError {
    pub dm: DmPair,
    pub range_max: Numeral,
    pub uncovered: Vec<Numeral>,
}

fn list(ns: &[Numeral]) -> String {
    ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
}

/// Minimal symbol counts for every value in `[1, cap]`, both as a general
/// `Num` and as a `Phrase`. A count of 0 means unreachable.
#[derive(Debug, Clone)]
pub struct CostTable {
    cap: Numeral,
    num: Vec<u32>,
    phrase: Vec<u32>,
}

impl CostTable {
    /// Runs until every value in `[1, target]` is settled or no further value
    /// can be discovered.
    pub fn compute(
        digits: &BTreeSet<Numeral>,
        multipliers: &BTreeSet<Numeral>,
        target: Numeral,
        cap: Numeral,
    ) -> Self {
        let cap = cap.max(target);
        let size = cap as usize + 1;
        let mut num = vec![0u32; size];
        let mut phrase = vec![0u32; size];
        // num_levels[c] / phrase_levels[c]: values whose minimal cost is c.
        let mut num_levels: Vec<Vec<Numeral>> = vec![Vec::new(), Vec::new()];
        let mut phrase_levels: Vec<Vec<Numeral>> = vec![Vec::new(), Vec::new()];

        let mut unsettled = target as usize;
        for &d in digits.iter().filter(|&&d| d <= cap) {
            num[d as usize] = 1;
            num_levels[1].push(d);
            if d <= target {
                unsettled -= 1;
            }
        }
        let mut last_new = if num_levels[1].is_empty() { 0 } else { 1 };
        let mults: Vec<Numeral> = multipliers.iter().copied().collect();

        let mut c = 2usize;
        while unsettled > 0 && c <= 2 * last_new + 3 {
            let mut new_phrases = Vec::new();
            if c >= 3 {
                for &q in &num_levels[c - 2] {
                    for &m in &mults {
                        let p = u64::from(q) * u64::from(m);
                        if p <= u64::from(cap) && phrase[p as usize] == 0 {
                            phrase[p as usize] = c as u32;
                            new_phrases.push(p as Numeral);
                        }
                    }
                }
            }
            phrase_levels.push(new_phrases);

            let mut new_nums = Vec::new();
            let mut settle = |v: Numeral, new_nums: &mut Vec<Numeral>| {
                if num[v as usize] == 0 {
                    num[v as usize] = c as u32;
                    new_nums.push(v);
                    if v <= target {
                        unsettled -= 1;
                    }
                }
            };
            for &p in &phrase_levels[c] {
                settle(p, &mut new_nums);
            }
            // Sum/Diff: phrase cost a, rest cost b, a + 1 + b = c.
            for a in 3..c.saturating_sub(1) {
                let b = c - 1 - a;
                for &p in &phrase_levels[a] {
                    for &r in &num_levels[b] {
                        let s = p + r;
                        if s <= cap {
                            settle(s, &mut new_nums);
                        }
                        if p > r {
                            settle(p - r, &mut new_nums);
                        }
                    }
                }
            }
            if !new_nums.is_empty() {
                last_new = c;
            }
            num_levels.push(new_nums);
            c += 1;
        }
        CostTable { cap, num, phrase }
    }

    pub fn for_dm(dm: &DmPair) -> Self {
        let range = dm.range_max();
        CostTable::compute(dm.digits(), dm.multipliers(), range, range.saturating_mul(DEFAULT_CAP_FACTOR))
    }

    pub fn cap(&self) -> Numeral {
        self.cap
    }

    /// Minimal symbol count of `v` as a `Num`, if reachable.
    pub fn num_cost(&self, v: Numeral) -> Option<u32> {
        self.num.get(v as usize).copied().filter(|&c| c > 0)
    }

    /// Minimal symbol count of `v` as a `Phrase`, if reachable.
    pub fn phrase_cost(&self, v: Numeral) -> Option<u32> {
        self.phrase.get(v as usize).copied().filter(|&c| c > 0)
    }

    /// Values in `[1, range]` without an expression.
    pub fn uncovered(&self, range: Numeral) -> Vec<Numeral> {
        (1..=range).filter(|&n| self.num_cost(n).is_none()).collect()
    }
}

/// A concrete language: one expression per numeral in `[1, range_max]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    dm: DmPair,
    entries: Vec<NumExpr>,
}

impl Lexicon {
    /// Builds a lexicon from explicit entries for `1..=entries.len()`,
    /// checking values and grammar membership.
    pub fn from_entries(dm: DmPair, entries: Vec<NumExpr>) -> Result<Self, LexiconError> {
        for (i, e) in entries.iter().enumerate() {
            let n = i as Numeral + 1;
            if e.value() != n {
                return Err(LexiconError::WrongValue { numeral: n, value: e.value() });
            }
            e.check_membership(&dm).map_err(|_| LexiconError::NotInGrammar(n))?;
        }
        Ok(Lexicon { dm, entries })
    }

    pub fn dm(&self) -> &DmPair {
        &self.dm
    }

    /// Largest numeral with an entry.
    pub fn range_max(&self) -> Numeral {
        self.entries.len() as Numeral
    }

    pub fn entry(&self, n: Numeral) -> Option<&NumExpr> {
        n.checked_sub(1).and_then(|i| self.entries.get(i as usize))
    }

    /// `(numeral, expression)` pairs in increasing numeral order.
    pub fn iter(&self) -> impl Iterator<Item = (Numeral, &NumExpr)> {
        self.entries.iter().enumerate().map(|(i, e)| (i as Numeral + 1, e))
    }

    pub fn complexities(&self) -> Vec<usize> {
        self.entries.iter().map(NumExpr::complexity).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("entry for {numeral} evaluates to {value}")]
    WrongValue { numeral: Numeral, value: Numeral },
    #[error("entry for {0} uses symbols outside the grammar")]
    NotInGrammar(Numeral),
}

/// `L_min` for `dm` over `[1, dm.range_max()]`.
pub fn compute_lmin(dm: &DmPair) -> Result<Lexicon, CoverageError> {
    let range = dm.range_max();
    compute_lmin_over(dm, range, range.saturating_mul(DEFAULT_CAP_FACTOR))
}

/// `L_min` over `[1, range]` with intermediate values bounded by `cap`.
/// Digits and multipliers above `range` are allowed.
///
/// Among equal-complexity expressions the representative is chosen by, in
/// order: a digit; a bare phrase; a sum; a difference; then the larger
/// outermost multiplier; then the smaller right operand.
pub fn compute_lmin_over(dm: &DmPair, range: Numeral, cap: Numeral) -> Result<Lexicon, CoverageError> {
    let costs = CostTable::compute(dm.digits(), dm.multipliers(), range, cap);
    let uncovered = costs.uncovered(range);
    if !uncovered.is_empty() {
        return Err(CoverageError { dm: dm.clone(), range_max: range, uncovered });
    }
    let mut builder = Representatives { dm, costs: &costs, nums: HashMap::new(), phrases: HashMap::new() };
    let entries = (1..=range).map(|n| builder.num(n)).collect();
    Ok(Lexicon { dm: dm.clone(), entries })
}

/// `true` iff every numeral in `[1, dm.range_max()]` has an expression.
pub fn covers(dm: &DmPair) -> bool {
    CostTable::for_dm(dm).uncovered(dm.range_max()).is_empty()
}

/// Kind rank used for tie-breaking: lower wins.
fn kind_rank(e: &NumExpr) -> u8 {
    match e {
        NumExpr::Digit(_) => 0,
        NumExpr::Phrase(_) => 1,
        NumExpr::Sum(..) => 2,
        NumExpr::Diff(..) => 3,
    }
}

type TieKey = (u8, Reverse<Numeral>, Numeral);

fn tie_key(e: &NumExpr) -> TieKey {
    (kind_rank(e), Reverse(e.outer_multiplier().unwrap_or(0)), e.rest_value().unwrap_or(0))
}

struct Representatives<'a> {
    dm: &'a DmPair,
    costs: &'a CostTable,
    nums: HashMap<Numeral, NumExpr>,
    phrases: HashMap<Numeral, Phrase>,
}

impl Representatives<'_> {
    fn phrase(&mut self, p: Numeral) -> Phrase {
        if let Some(e) = self.phrases.get(&p) {
            return e.clone();
        }
        let cost = self.costs.phrase_cost(p).expect("phrase value must be reachable");
        // Largest multiplier first.
        let m = self
            .dm
            .multipliers()
            .iter()
            .rev()
            .copied()
            .find(|&m| p % m == 0 && self.costs.num_cost(p / m) == Some(cost - 2))
            .expect("phrase cost has a witness");
        let q = self.num(p / m);
        let phrase = Phrase::new(q, m).expect("bounded by cap");
        self.phrases.insert(p, phrase.clone());
        phrase
    }

    fn num(&mut self, v: Numeral) -> NumExpr {
        if let Some(e) = self.nums.get(&v) {
            return e.clone();
        }
        let cost = self.costs.num_cost(v).expect("value must be reachable");
        let expr = if self.dm.is_digit(v) {
            NumExpr::Digit(v)
        } else if self.costs.phrase_cost(v) == Some(cost) {
            NumExpr::Phrase(self.phrase(v))
        } else {
            // (is_sum, phrase value, rest value) for every witness of `cost`.
            let mut best: Option<(TieKey, bool, Numeral, Numeral)> = None;
            let cap = self.costs.cap();
            for p in 1..=cap {
                let Some(pc) = self.costs.phrase_cost(p) else { continue };
                if pc + 1 >= cost {
                    continue;
                }
                let witness = if p < v {
                    Some((true, v - p))
                } else if p > v {
                    Some((false, p - v))
                } else {
                    None
                };
                let Some((is_sum, r)) = witness else { continue };
                if self.costs.num_cost(r) != Some(cost - 1 - pc) {
                    continue;
                }
                let m = self.phrase_multiplier(p, pc);
                let key = (if is_sum { 2 } else { 3 }, Reverse(m), r);
                if best.as_ref().map_or(true, |b| key < b.0) {
                    best = Some((key, is_sum, p, r));
                }
            }
            let (_, is_sum, p, r) = best.expect("num cost has a witness");
            let phrase = self.phrase(p);
            let rest = self.num(r);
            if is_sum {
                NumExpr::sum(phrase, rest).expect("bounded by cap")
            } else {
                NumExpr::diff(phrase, rest).expect("positive by construction")
            }
        };
        self.nums.insert(v, expr.clone());
        expr
    }

    fn phrase_multiplier(&self, p: Numeral, cost: u32) -> Numeral {
        self.dm
            .multipliers()
            .iter()
            .rev()
            .copied()
            .find(|&m| p % m == 0 && self.costs.num_cost(p / m) == Some(cost - 2))
            .expect("phrase cost has a witness")
    }
}

/// Exhaustive enumeration of expressions by exact symbol count up to
/// `max_complexity`, all intermediate values within `[1, 2 * range_max]`.
///
/// Each level keeps one expression per value: any two same-sized expressions
/// of equal value are interchangeable as subexpressions, so this loses no
/// minimal expression. Used as a test oracle for [`compute_lmin`].
pub fn brute_force_lmin(dm: &DmPair, max_complexity: usize) -> Result<Lexicon, CoverageError> {
    let mut found = brute_force_expressions(dm, max_complexity);
    let range = dm.range_max();
    let uncovered: Vec<Numeral> = (1..=range).filter(|n| !found.contains_key(n)).collect();
    if !uncovered.is_empty() {
        return Err(CoverageError { dm: dm.clone(), range_max: range, uncovered });
    }
    let entries = (1..=range).map(|n| found.remove(&n).expect("covered")).collect();
    Ok(Lexicon { dm: dm.clone(), entries })
}

/// The partial result of [`brute_force_lmin`]: the minimal expression of every
/// numeral in range that has one within `max_complexity` symbols.
pub fn brute_force_expressions(dm: &DmPair, max_complexity: usize) -> BTreeMap<Numeral, NumExpr> {
    let range = dm.range_max();
    let cap = range.saturating_mul(DEFAULT_CAP_FACTOR);
    // by_size[k]: value -> best expression with exactly k symbols.
    let mut nums: Vec<HashMap<Numeral, NumExpr>> = vec![HashMap::new(); max_complexity + 1];
    let mut phrases: Vec<HashMap<Numeral, Phrase>> = vec![HashMap::new(); max_complexity + 1];

    fn keep(slot: &mut HashMap<Numeral, NumExpr>, e: NumExpr) {
        let v = e.value();
        match slot.get(&v) {
            Some(old) if (tie_key(old), old.render()) <= (tie_key(&e), e.render()) => {}
            _ => {
                slot.insert(v, e);
            }
        }
    }

    if max_complexity >= 1 {
        for &d in dm.digits().iter().filter(|&&d| d <= cap) {
            nums[1].insert(d, NumExpr::Digit(d));
        }
    }
    for k in 2..=max_complexity {
        if k >= 3 {
            let mut level: Vec<&NumExpr> = nums[k - 2].values().collect();
            level.sort_by_key(|e| e.value());
            let mut made = HashMap::new();
            for q in level {
                for &m in dm.multipliers() {
                    if u64::from(q.value()) * u64::from(m) > u64::from(cap) {
                        continue;
                    }
                    let ph = Phrase::new(q.clone(), m).expect("bounded");
                    let v = ph.value();
                    let better = match made.get(&v) {
                        None => true,
                        Some(old) => {
                            let (o, n) = (NumExpr::Phrase(Phrase::clone(old)), NumExpr::Phrase(ph.clone()));
                            (tie_key(&n), n.render()) < (tie_key(&o), o.render())
                        }
                    };
                    if better {
                        made.insert(v, ph);
                    }
                }
            }
            phrases[k] = made;
        }
        let mut level = HashMap::new();
        for ph in phrases[k].values() {
            keep(&mut level, NumExpr::Phrase(ph.clone()));
        }
        for a in 3..k.saturating_sub(1) {
            let b = k - 1 - a;
            for ph in phrases[a].values() {
                for rest in nums[b].values() {
                    if let Ok(e) = NumExpr::sum(ph.clone(), rest.clone()) {
                        if e.value() <= cap {
                            keep(&mut level, e);
                        }
                    }
                    if let Ok(e) = NumExpr::diff(ph.clone(), rest.clone()) {
                        keep(&mut level, e);
                    }
                }
            }
        }
        nums[k] = level;
    }

    (1..=range)
        .filter_map(|n| (1..=max_complexity).find_map(|k| nums[k].get(&n)).map(|e| (n, e.clone())))
        .collect()
}

impl fmt::Display for Lexicon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, e) in self.iter() {
            writeln!(f, "{n}\t{e}\t{}", e.complexity())?;
        }
        Ok(())
    }
}
