//! Need distribution and the two efficiency objectives.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use thiserror::Error;

use crate::grammar::{DmPair, Numeral};
use crate::lexicon::{compute_lmin_over, CostTable, CoverageError, Lexicon, DEFAULT_CAP_FACTOR};

/// Default upper bound of the metric support.
pub const DEFAULT_SUPPORT: Numeral = 99;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("numeral {n} outside support [1, {n_max}]")]
    OutsideSupport { n: Numeral, n_max: Numeral },
    #[error("lexicon covers [1, {lexicon}] but the support is [1, {support}]")]
    RangeMismatch { lexicon: Numeral, support: Numeral },
    #[error(transparent)]
    Coverage(#[from] CoverageError),
}

/// `P(n) ∝ n^-2` over `[1, n_max]`.
#[derive(Debug, Clone)]
pub struct NeedDistribution {
    raw: Vec<f64>,
    total: f64,
    weights: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl NeedDistribution {
    pub fn new(n_max: Numeral) -> Self {
        assert!(n_max >= 1, "support must be non-empty");
        let raw: Vec<f64> = (1..=n_max).map(|n| 1.0 / (f64::from(n) * f64::from(n))).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let sampler = WeightedIndex::new(&weights).expect("positive weights");
        NeedDistribution { raw, total, weights, sampler }
    }

    pub fn n_max(&self) -> Numeral {
        self.weights.len() as Numeral
    }

    pub fn probability(&self, n: Numeral) -> Result<f64, MetricError> {
        n.checked_sub(1)
            .and_then(|i| self.weights.get(i as usize))
            .copied()
            .ok_or(MetricError::OutsideSupport { n, n_max: self.n_max() })
    }

    /// Probabilities for `1..=n_max`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ_n P(n) c_n`, normalised after summation so that constant costs
    /// average to exactly that constant.
    pub fn expectation(&self, costs: impl IntoIterator<Item = f64>) -> f64 {
        self.raw.iter().zip(costs).map(|(w, c)| w * c).sum::<f64>() / self.total
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Numeral {
        self.sampler.sample(rng) as Numeral + 1
    }
}

impl Default for NeedDistribution {
    fn default() -> Self {
        NeedDistribution::new(DEFAULT_SUPPORT)
    }
}

/// `Σ_n P(n) · complexity(entry(n))` over the distribution's support.
pub fn avg_ms_complexity_lexicon(lex: &Lexicon, dist: &NeedDistribution) -> Result<f64, MetricError> {
    if lex.range_max() < dist.n_max() {
        return Err(MetricError::RangeMismatch { lexicon: lex.range_max(), support: dist.n_max() });
    }
    Ok(dist.expectation(lex.iter().map(|(_, e)| e.complexity() as f64)))
}

/// Average complexity of `L_min` for `dm` over the distribution's support.
///
/// The lexicon is evaluated over the support, not `dm.range_max()`, with
/// intermediate values capped at twice the support bound.
pub fn avg_ms_complexity_dm(dm: &DmPair, dist: &NeedDistribution) -> Result<f64, MetricError> {
    let support = dist.n_max();
    let costs = CostTable::compute(dm.digits(), dm.multipliers(), support, support * DEFAULT_CAP_FACTOR);
    let uncovered = costs.uncovered(support);
    if !uncovered.is_empty() {
        return Err(CoverageError { dm: dm.clone(), range_max: support, uncovered }.into());
    }
    Ok(dist.expectation((1..=support).map(|n| f64::from(costs.num_cost(n).expect("covered")))))
}

/// `L_min` of `dm` over the distribution's support.
pub fn lmin_on_support(dm: &DmPair, dist: &NeedDistribution) -> Result<Lexicon, CoverageError> {
    let support = dist.n_max();
    compute_lmin_over(dm, support, support * DEFAULT_CAP_FACTOR)
}

/// `|D| + |M|`.
pub fn lexicon_size(dm: &DmPair) -> usize {
    dm.lexicon_size()
}
