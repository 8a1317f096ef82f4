//! Pareto frontier of (lexicon size, average complexity), estimated with a
//! mutation-only elitist genetic algorithm.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io;

use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{DmPair, Numeral};
use crate::metrics::{avg_ms_complexity_dm, NeedDistribution, DEFAULT_SUPPORT};
use crate::mutation::{apply, MutationKind};
use crate::report::{format_list, parse_list, sig12};

/// Objective values closer than this are treated as equal.
pub const OBJECTIVE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub dm: DmPair,
    pub lexicon_size: usize,
    pub avg_complexity: f64,
}

impl Candidate {
    /// Evaluates `dm`; `None` when it does not cover the distribution's support.
    pub fn evaluate(dm: DmPair, dist: &NeedDistribution) -> Option<Self> {
        let avg_complexity = avg_ms_complexity_dm(&dm, dist).ok()?;
        Some(Candidate { lexicon_size: dm.lexicon_size(), avg_complexity, dm })
    }

    fn same_objectives(&self, other: &Candidate) -> bool {
        self.lexicon_size == other.lexicon_size
            && (self.avg_complexity - other.avg_complexity).abs() <= OBJECTIVE_TOLERANCE
    }

    /// Total order: size, then complexity, then grammar.
    fn order(&self, other: &Candidate) -> Ordering {
        self.lexicon_size
            .cmp(&other.lexicon_size)
            .then(self.avg_complexity.total_cmp(&other.avg_complexity))
            .then_with(|| self.dm.cmp(&other.dm))
    }
}

/// `a` is no worse than `b` on both objectives and strictly better on one.
pub fn dominates(a: &Candidate, b: &Candidate) -> bool {
    let no_worse = a.lexicon_size <= b.lexicon_size && a.avg_complexity <= b.avg_complexity + OBJECTIVE_TOLERANCE;
    let better = a.lexicon_size < b.lexicon_size || a.avg_complexity < b.avg_complexity - OBJECTIVE_TOLERANCE;
    no_worse && better
}

/// Maximal nondominated subset, one candidate per objective pair, sorted by
/// lexicon size.
pub fn nondominated(pop: &[Candidate]) -> Vec<Candidate> {
    let mut sorted: Vec<&Candidate> = pop.iter().collect();
    sorted.sort_by(|a, b| a.order(b));
    // Sorted by size then complexity, a candidate is nondominated iff its
    // complexity beats every smaller-or-equal-size candidate kept so far.
    let mut out: Vec<Candidate> = Vec::new();
    let mut best = f64::INFINITY;
    for c in sorted {
        if c.avg_complexity < best - OBJECTIVE_TOLERANCE {
            best = c.avg_complexity;
            out.push(c.clone());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorSet {
    /// Only the six table actions (highest/lowest element rules).
    Table,
    /// Table actions plus the same moves on a uniformly chosen element.
    Extended,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub max_mutations: usize,
    /// Bound on numerals that may enter D or M.
    pub range_max: Numeral,
    /// Metric support; candidates must cover `[1, support]`.
    pub support: Numeral,
    pub initial_max_digits: usize,
    pub initial_max_multipliers: usize,
    pub operators: OperatorSet,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 200,
            generations: 100,
            max_mutations: 3,
            range_max: DEFAULT_SUPPORT,
            support: DEFAULT_SUPPORT,
            initial_max_digits: 12,
            initial_max_multipliers: 5,
            operators: OperatorSet::Extended,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierApproximation {
    pub points: Vec<Candidate>,
    pub config: GaConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GaMove {
    Table(MutationKind),
    AddDigit,
    AddMultiplier,
    MoveToDigits,
    MoveToMultipliers,
    RemoveDigit,
    RemoveMultiplier,
}

const RANDOM_MOVES: [GaMove; 6] = [
    GaMove::AddDigit,
    GaMove::AddMultiplier,
    GaMove::MoveToDigits,
    GaMove::MoveToMultipliers,
    GaMove::RemoveDigit,
    GaMove::RemoveMultiplier,
];

fn random_move<R: Rng + ?Sized>(ops: OperatorSet, rng: &mut R) -> GaMove {
    let table = MutationKind::ALL.len();
    let total = match ops {
        OperatorSet::Table => table,
        OperatorSet::Extended => table + RANDOM_MOVES.len(),
    };
    let i = rng.gen_range(0..total);
    if i < table {
        GaMove::Table(MutationKind::ALL[i])
    } else {
        RANDOM_MOVES[i - table]
    }
}

fn apply_move<R: Rng + ?Sized>(dm: &DmPair, mv: GaMove, rng: &mut R) -> Option<DmPair> {
    let mut digits = dm.digits().clone();
    let mut multipliers = dm.multipliers().clone();
    let pick = |set: &BTreeSet<Numeral>, rng: &mut R| set.iter().copied().choose(rng);
    match mv {
        GaMove::Table(kind) => return apply(dm, kind),
        GaMove::AddDigit | GaMove::AddMultiplier => {
            let n = (1..=dm.range_max()).filter(|&n| !dm.contains(n)).choose(rng)?;
            if mv == GaMove::AddDigit {
                digits.insert(n);
            } else {
                multipliers.insert(n);
            }
        }
        GaMove::MoveToDigits => {
            let n = pick(&multipliers, rng)?;
            multipliers.remove(&n);
            digits.insert(n);
        }
        GaMove::MoveToMultipliers => {
            let n = pick(&digits, rng)?;
            digits.remove(&n);
            multipliers.insert(n);
        }
        GaMove::RemoveDigit => {
            let n = pick(&digits, rng)?;
            digits.remove(&n);
        }
        GaMove::RemoveMultiplier => {
            let n = pick(&multipliers, rng)?;
            multipliers.remove(&n);
        }
    }
    DmPair::new(digits, multipliers, dm.range_max()).ok()
}

struct Evaluator {
    dist: NeedDistribution,
    cache: HashMap<DmPair, Option<Candidate>>,
}

impl Evaluator {
    fn eval(&mut self, dm: &DmPair) -> Option<Candidate> {
        if let Some(c) = self.cache.get(dm) {
            return c.clone();
        }
        let c = Candidate::evaluate(dm.clone(), &self.dist);
        self.cache.insert(dm.clone(), c.clone());
        c
    }
}

fn random_dm<R: Rng + ?Sized>(config: &GaConfig, rng: &mut R) -> DmPair {
    let n_digits = rng.gen_range(1..=config.initial_max_digits.max(1));
    let n_mults = rng.gen_range(0..=config.initial_max_multipliers);
    let total = (n_digits + n_mults).min(config.range_max as usize);
    let mut pool: Vec<Numeral> = (1..=config.range_max).collect();
    let (chosen, _) = pool.partial_shuffle(rng, total);
    let n_digits = n_digits.min(total);
    DmPair::new(chosen[..n_digits].iter().copied(), chosen[n_digits..].iter().copied(), config.range_max)
        .expect("distinct members within range")
}

/// Standard two-objective crowding distance over a front, sorted by
/// [`Candidate::order`]. Repeated objective pairs get `-1` so that one
/// representative of each survives first.
fn crowding(front: &[Candidate]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    let reps: Vec<usize> = (0..n).filter(|&i| i == 0 || !front[i].same_objectives(&front[i - 1])).collect();
    for i in 0..n {
        if !reps.contains(&i) {
            dist[i] = -1.0;
        }
    }
    if reps.len() <= 2 {
        for &i in &reps {
            dist[i] = f64::INFINITY;
        }
        return dist;
    }
    // Sorted by size ascending means complexity descending along the front.
    let size = |i: usize| front[i].lexicon_size as f64;
    let cx = |i: usize| front[i].avg_complexity;
    let (first, last) = (reps[0], reps[reps.len() - 1]);
    let size_span = (size(last) - size(first)).max(f64::MIN_POSITIVE);
    let cx_span = (cx(first) - cx(last)).abs().max(f64::MIN_POSITIVE);
    dist[first] = f64::INFINITY;
    dist[last] = f64::INFINITY;
    for w in reps.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        dist[b] = (size(c) - size(a)) / size_span + (cx(a) - cx(c)).abs() / cx_span;
    }
    dist
}

/// Splits candidates into successive nondominated fronts (all members kept,
/// including objective duplicates).
fn fronts(mut pool: Vec<Candidate>) -> Vec<Vec<Candidate>> {
    pool.sort_by(|a, b| a.order(b));
    let mut out = Vec::new();
    while !pool.is_empty() {
        let (front, rest): (Vec<_>, Vec<_>) = pool
            .iter()
            .cloned()
            .partition(|c| !pool.iter().any(|o| dominates(o, c)));
        out.push(front);
        pool = rest;
    }
    out
}

fn survivors(pool: Vec<Candidate>, size: usize) -> Vec<Candidate> {
    let mut next = Vec::with_capacity(size);
    for front in fronts(pool) {
        if next.len() + front.len() <= size {
            next.extend(front);
            continue;
        }
        let d = crowding(&front);
        let mut idx: Vec<usize> = (0..front.len()).collect();
        // Stable: ties keep the candidate order.
        idx.sort_by(|&a, &b| d[b].total_cmp(&d[a]));
        let room = size - next.len();
        let mut keep: Vec<usize> = idx.into_iter().take(room).collect();
        keep.sort_unstable();
        next.extend(keep.into_iter().map(|i| front[i].clone()));
        break;
    }
    next
}

/// Runs the GA and returns the nondominated set of the final population.
pub fn run_ga<R: Rng + ?Sized>(config: &GaConfig, rng: &mut R) -> FrontierApproximation {
    let mut eval = Evaluator { dist: NeedDistribution::new(config.support), cache: HashMap::new() };

    let mut population: BTreeMap<DmPair, Candidate> = BTreeMap::new();
    let mut attempts = 0usize;
    while population.len() < config.population_size && attempts < config.population_size * 10_000 {
        attempts += 1;
        let dm = random_dm(config, rng);
        if population.contains_key(&dm) {
            continue;
        }
        if let Some(c) = eval.eval(&dm) {
            population.insert(dm, c);
        }
    }

    for _ in 0..config.generations {
        let current: Vec<Candidate> = population.values().cloned().collect();
        let parents = fronts(current.clone()).into_iter().next().unwrap_or_default();
        if parents.is_empty() {
            break;
        }
        let mut pool: BTreeMap<DmPair, Candidate> = population.clone();
        for _ in 0..config.population_size {
            let parent = parents.choose(rng).expect("non-empty");
            let steps = rng.gen_range(1..=config.max_mutations.max(1));
            let mut child = parent.dm.clone();
            for _ in 0..steps {
                let mv = random_move(config.operators, rng);
                if let Some(next) = apply_move(&child, mv, rng) {
                    child = next;
                }
            }
            if pool.contains_key(&child) {
                continue;
            }
            if let Some(c) = eval.eval(&child) {
                pool.insert(child, c);
            }
        }
        let merged: Vec<Candidate> = pool.into_values().collect();
        population = survivors(merged, config.population_size)
            .into_iter()
            .map(|c| (c.dm.clone(), c))
            .collect();
    }

    let all: Vec<Candidate> = population.into_values().collect();
    FrontierApproximation { points: nondominated(&all), config: config.clone() }
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) };
    let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

/// Euclidean distance from `c` to the polyline through the frontier points,
/// with both axes min-max normalised over the frontier and `c`.
pub fn distance_to_frontier(c: &Candidate, f: &FrontierApproximation) -> f64 {
    distance_to_points(c.lexicon_size as f64, c.avg_complexity, &f.points)
}

pub(crate) fn distance_to_points(x: f64, y: f64, points: &[Candidate]) -> f64 {
    assert!(!points.is_empty(), "frontier must be non-empty");
    let xs = points.iter().map(|p| p.lexicon_size as f64).chain([x]);
    let ys = points.iter().map(|p| p.avg_complexity).chain([y]);
    let (xmin, xmax) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let (ymin, ymax) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let norm = |v: f64, lo: f64, hi: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
    let p = (norm(x, xmin, xmax), norm(y, ymin, ymax));
    let mut sorted: Vec<(f64, f64)> = points
        .iter()
        .map(|q| (norm(q.lexicon_size as f64, xmin, xmax), norm(q.avg_complexity, ymin, ymax)))
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    if sorted.len() == 1 {
        return point_segment_distance(p, sorted[0], sorted[0]);
    }
    sorted
        .windows(2)
        .map(|w| point_segment_distance(p, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Error)]
pub enum FrontierCsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("no rows")]
    Empty,
}

const FRONTIER_HEADER: [&str; 4] = ["lexicon_size", "avg_ms_complexity", "D", "M"];

/// Writes `lexicon_size,avg_ms_complexity,D,M` with `;`-separated sets.
pub fn write_frontier_csv<W: io::Write>(points: &[Candidate], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FRONTIER_HEADER)?;
    for c in points {
        w.write_record([
            c.lexicon_size.to_string(),
            sig12(c.avg_complexity),
            format_list(c.dm.digits()),
            format_list(c.dm.multipliers()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// A row of a frontier CSV as written by [`write_frontier_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierRow {
    pub lexicon_size: usize,
    pub avg_complexity: f64,
    pub digits: Vec<Numeral>,
    pub multipliers: Vec<Numeral>,
}

pub fn read_frontier_csv<R: io::Read>(input: R) -> Result<Vec<FrontierRow>, FrontierCsvError> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != FRONTIER_HEADER {
        return Err(FrontierCsvError::Row { row: 0, message: format!("unexpected header {headers:?}") });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let bad = |message: String| FrontierCsvError::Row { row, message };
        if record.len() != 4 {
            return Err(bad(format!("expected 4 fields, got {}", record.len())));
        }
        let lexicon_size = record[0].parse().map_err(|e| bad(format!("lexicon_size: {e}")))?;
        let avg_complexity: f64 = record[1].parse().map_err(|e| bad(format!("avg_ms_complexity: {e}")))?;
        if !avg_complexity.is_finite() {
            return Err(bad("avg_ms_complexity is not finite".into()));
        }
        let digits = parse_list(&record[2]).map_err(|e| bad(format!("D: {e}")))?;
        let multipliers = parse_list(&record[3]).map_err(|e| bad(format!("M: {e}")))?;
        if digits.len() + multipliers.len() != lexicon_size {
            return Err(bad("lexicon_size does not match |D| + |M|".into()));
        }
        rows.push(FrontierRow { lexicon_size, avg_complexity, digits, multipliers });
    }
    if rows.is_empty() {
        return Err(FrontierCsvError::Empty);
    }
    Ok(rows)
}
