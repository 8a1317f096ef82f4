//! Experiment configuration, orchestration and reporting.

pub mod reference;
pub mod svg;

use std::collections::BTreeMap;
use std::io;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{AgentConfig, ConfigError};
use crate::bandit::{run_evolution, EvolutionConfig, EvolutionError, NeuralGame, TrajectoryRecord};
use crate::grammar::{DmPair, GrammarError, Numeral};
use crate::lexicon::CoverageError;
use crate::metrics::{avg_ms_complexity_lexicon, lmin_on_support, NeedDistribution, DEFAULT_SUPPORT};
use crate::pareto::{run_ga, Candidate, FrontierApproximation, FrontierCsvError, FrontierRow, GaConfig};
use crate::report::sig12;

use self::reference::ReferenceGrammar;
use self::svg::{Plot, Series, Style, PALETTE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub communication_range: Numeral,
    pub metric_support: Numeral,
    pub ga: GaConfig,
    pub agent: AgentConfig,
    pub evolution: EvolutionConfig,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            communication_range: 50,
            metric_support: DEFAULT_SUPPORT,
            ga: GaConfig::default(),
            agent: AgentConfig::default(),
            evolution: EvolutionConfig::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Reduced budget that runs on a laptop.
    pub fn desk_scale() -> Self {
        let mut c = ExperimentConfig::default();
        c.apply_desk_scale();
        c
    }

    pub fn apply_desk_scale(&mut self) {
        self.agent.hidden_dim = 32;
        self.evolution.max_steps = 30;
        self.evolution.inner_iterations = 2_000;
        self.evolution.pretrain_epochs = 2_000;
    }

    /// Propagates the shared ranges into the sub-configurations and checks
    /// the result.
    pub fn resolve(mut self) -> Result<Self, ExperimentError> {
        if self.communication_range == 0 || self.metric_support == 0 {
            return Err(ExperimentError::Config("ranges must be positive".into()));
        }
        self.agent.numeral_range = self.communication_range;
        self.evolution.metric_support = self.metric_support;
        self.ga.support = self.metric_support;
        self.ga.range_max = self.metric_support;
        self.agent.validate()?;
        if self.ga.population_size == 0 {
            return Err(ExperimentError::Config("ga.population_size must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.evolution.epsilon) || !(0.0..=1.0).contains(&self.evolution.alpha) {
            return Err(ExperimentError::Config("evolution.alpha and evolution.epsilon must lie in [0, 1]".into()));
        }
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid config: {0}")]
    Agent(#[from] ConfigError),
    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    FrontierCsv(#[from] FrontierCsvError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("no starting point {0}; expected 1..=8")]
    UnknownStart(usize),
}

/// One row of an `L_min` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisRow {
    pub n: Numeral,
    pub expression: String,
    pub complexity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub dm: DmPair,
    pub support: Numeral,
    pub lexicon_size: usize,
    pub avg_ms_complexity: f64,
    pub rows: Vec<AnalysisRow>,
}

/// `L_min` of `dm` over `[1, support]` with its summary statistics.
pub fn analyze(dm: &DmPair, support: Numeral) -> Result<Analysis, CoverageError> {
    let dist = NeedDistribution::new(support);
    let lexicon = lmin_on_support(dm, &dist)?;
    let avg = avg_ms_complexity_lexicon(&lexicon, &dist).expect("lexicon spans the support");
    let rows = lexicon
        .iter()
        .map(|(n, e)| AnalysisRow { n, expression: e.render(), complexity: e.complexity() })
        .collect();
    Ok(Analysis { dm: dm.clone(), support, lexicon_size: dm.lexicon_size(), avg_ms_complexity: avg, rows })
}

impl Analysis {
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "expression", "complexity"])?;
        for r in &self.rows {
            w.write_record([r.n.to_string(), r.expression.clone(), r.complexity.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        format!(
            "grammar {}\nlexicon_size {}\navg_ms_complexity {}\n",
            self.dm,
            self.lexicon_size,
            sig12(self.avg_ms_complexity)
        )
    }
}

pub fn run_pareto(config: &ExperimentConfig) -> FrontierApproximation {
    run_ga(&config.ga, &mut ChaCha8Rng::seed_from_u64(config.seed))
}

/// Where an evolution run starts.
#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    /// Starting point `1..=8`.
    Table(usize),
    Explicit(DmPair),
}

impl Start {
    pub fn resolve(&self, range: Numeral) -> Result<DmPair, ExperimentError> {
        match self {
            Start::Table(i) => {
                let g = reference::starting_point(*i).ok_or(ExperimentError::UnknownStart(*i))?;
                Ok(g.dm_disjoint(range)?)
            }
            Start::Explicit(dm) => Ok(dm.with_range(range)?),
        }
    }
}

pub fn run_evolve(config: &ExperimentConfig, start: &Start) -> Result<Vec<TrajectoryRecord>, ExperimentError> {
    let dm = start.resolve(config.communication_range)?;
    let mut game = NeuralGame::new(config.agent.clone(), config.seed, config.evolution.pretrain_epochs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0xe701_u64);
    Ok(run_evolution(&dm, config.communication_range, &config.evolution, &mut game, config.seed, &mut rng)?)
}

/// Labelled `(lexicon_size, avg_ms_complexity)` points drawn over a frontier.
#[derive(Debug, Clone, PartialEq)]
pub struct Overlay {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Reads the `lexicon_size` and `avg_ms_complexity` columns of any CSV that
/// has them (frontier and trajectory files). Rows with a non-finite
/// complexity are skipped.
pub fn read_overlay_csv<R: io::Read>(input: R) -> Result<Vec<(f64, f64)>, FrontierCsvError> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| FrontierCsvError::Row {
            row: 0,
            message: format!("missing column {name}"),
        })
    };
    let (xi, yi) = (column("lexicon_size")?, column("avg_ms_complexity")?);
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let bad = |message: String| FrontierCsvError::Row { row: i + 1, message };
        let x: usize = record.get(xi).unwrap_or("").parse().map_err(|e| bad(format!("lexicon_size: {e}")))?;
        let y: f64 = record.get(yi).unwrap_or("").parse().map_err(|e| bad(format!("avg_ms_complexity: {e}")))?;
        if y.is_finite() {
            points.push((x as f64, y));
        }
    }
    if points.is_empty() {
        return Err(FrontierCsvError::Empty);
    }
    Ok(points)
}

/// Evaluates reference grammars on `[1, support]` as frontier candidates.
pub fn reference_candidates(grammars: &[ReferenceGrammar], support: Numeral) -> Vec<(String, Candidate)> {
    let dist = NeedDistribution::new(support);
    grammars
        .iter()
        .filter_map(|g| {
            let dm = g.dm(support).ok()?;
            Some((g.name.to_string(), Candidate::evaluate(dm, &dist)?))
        })
        .collect()
}

fn frontier_series(points: &[Candidate]) -> Series {
    let pts = points.iter().map(|c| (c.lexicon_size as f64, c.avg_complexity)).collect();
    Series::new("frontier", PALETTE[0], Style::LineMarkers, pts)
}

pub fn frontier_svg(points: &[Candidate], overlays: &[Overlay]) -> String {
    let mut plot = Plot::new("Pareto frontier", "lexicon size", "average complexity");
    plot.push(frontier_series(points));
    for (i, o) in overlays.iter().enumerate() {
        plot.push(Series::new(o.label.clone(), PALETTE[1 + i % (PALETTE.len() - 1)], Style::Markers, o.points.clone()));
    }
    plot.render()
}

pub fn trajectory_svg(records: &[TrajectoryRecord], frontier: Option<&[Candidate]>) -> String {
    let mut plot = Plot::new("Grammar trajectory", "lexicon size", "average complexity");
    if let Some(points) = frontier {
        plot.push(frontier_series(points));
    }
    let path: Vec<(f64, f64)> = records.iter().map(|r| (r.lexicon_size as f64, r.avg_ms_complexity)).collect();
    if let (Some(&first), Some(&last)) = (path.first(), path.last()) {
        plot.push(Series::new("trajectory", PALETTE[1], Style::LineMarkers, path));
        plot.push(Series::new("start", PALETTE[2], Style::Markers, vec![first]));
        plot.push(Series::new("end", PALETTE[3], Style::Markers, vec![last]));
    }
    plot.render()
}

/// Number of frontier points per `|M|`.
pub fn m_cardinality_histogram(rows: &[FrontierRow]) -> Result<BTreeMap<usize, usize>, FrontierCsvError> {
    if rows.is_empty() {
        return Err(FrontierCsvError::Empty);
    }
    let mut hist = BTreeMap::new();
    for r in rows {
        *hist.entry(r.multipliers.len()).or_insert(0) += 1;
    }
    Ok(hist)
}

pub fn write_histogram_csv<W: io::Write>(hist: &BTreeMap<usize, usize>, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m_cardinality", "count"])?;
    for (m, c) in hist {
        w.write_record([m.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn histogram_svg(hist: &BTreeMap<usize, usize>) -> String {
    let bars: Vec<(String, f64)> = hist.iter().map(|(m, c)| (m.to_string(), *c as f64)).collect();
    svg::bar_chart("Frontier grammars by |M|", "|M|", "count", &bars)
}

/// `(mode, share of the mode)` of a histogram.
pub fn histogram_mode(hist: &BTreeMap<usize, usize>) -> Option<(usize, f64)> {
    let total: usize = hist.values().sum();
    let (&m, &c) = hist.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))?;
    Some((m, c as f64 / total as f64))
}
