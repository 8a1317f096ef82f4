use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use recnum::agents::gradcheck::{gradient_check, GradCheckReport};
use recnum::bandit::write_trajectory_csv;
use recnum::experiments::reference::{self, HUMAN_LANGUAGES};
use recnum::experiments::{
    analyze, frontier_svg, histogram_svg, m_cardinality_histogram, read_overlay_csv, reference_candidates,
    run_evolve, run_pareto, trajectory_svg, write_histogram_csv, ExperimentConfig, Overlay, Start,
};
use recnum::grammar::{DmPair, Numeral};
use recnum::pareto::{read_frontier_csv, write_frontier_csv, Candidate};
use recnum::report::parse_numeral_list;
use serde_json::json;

/// Recursive numeral systems: lexicon search, Pareto frontiers and
/// grammar evolution through a communication game.
#[derive(Debug, Parser)]
#[command(name = "recnum", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// JSON experiment config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Upper end of the communication range.
    #[arg(long, global = true)]
    range: Option<Numeral>,
    /// Upper end of the metric support.
    #[arg(long, global = true)]
    support: Option<Numeral>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use the reduced laptop-sized budget.
    #[arg(long, global = true)]
    desk_scale: bool,
}

#[derive(Debug, Args)]
struct GrammarArgs {
    /// Digits, e.g. `1..9,11`.
    #[arg(long = "D", value_name = "LIST")]
    digits: Option<String>,
    /// Multipliers, e.g. `10`.
    #[arg(long = "M", value_name = "LIST", default_value = "")]
    multipliers: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimal expressions, lexicon size and average complexity of a grammar.
    Analyze {
        #[command(flatten)]
        grammar: GrammarArgs,
    },
    /// Estimates the Pareto frontier with the genetic algorithm.
    Pareto {
        /// Extra CSV files with `lexicon_size` and `avg_ms_complexity` columns.
        #[arg(long)]
        overlay: Vec<PathBuf>,
        /// Also plot the reference human languages.
        #[arg(long)]
        human: bool,
    },
    /// Evolves a grammar through the communication game.
    Evolve {
        /// Starting point 1..=8 from the reference table.
        #[arg(long, conflicts_with = "digits")]
        start: Option<usize>,
        #[command(flatten)]
        grammar: GrammarArgs,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Frontier CSV drawn under the trajectory.
        #[arg(long)]
        overlay: Option<PathBuf>,
    },
    /// Histogram of |M| over a frontier CSV.
    ReportM {
        frontier: PathBuf,
    },
    /// Finite-difference check of the policy gradients.
    Gradcheck {
        #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 3])]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
}

/// A failure reported as one JSON line on stderr.
#[derive(Debug)]
struct Failure {
    kind: &'static str,
    message: String,
    code: u8,
}

impl Failure {
    fn new(kind: &'static str, message: impl ToString) -> Self {
        Failure { kind, message: message.to_string(), code: 1 }
    }
}

macro_rules! from_error {
    ($($ty:ty => $kind:literal),* $(,)?) => {
        $(impl From<$ty> for Failure {
            fn from(e: $ty) -> Self {
                Failure::new($kind, e)
            }
        })*
    };
}

from_error! {
    io::Error => "io",
    csv::Error => "csv",
    recnum::experiments::ExperimentError => "experiment",
    recnum::pareto::FrontierCsvError => "csv",
    recnum::grammar::GrammarError => "grammar",
    recnum::lexicon::CoverageError => "coverage",
    recnum::report::NumeralListError => "usage",
}

fn load_config(global: &GlobalArgs) -> Result<ExperimentConfig, Failure> {
    let mut config = match &global.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if global.desk_scale {
        config.apply_desk_scale();
    }
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    if let Some(range) = global.range {
        config.communication_range = range;
    }
    if let Some(support) = global.support {
        config.metric_support = support;
    }
    if let Some(out) = &global.out {
        config.output_dir = out.clone();
    }
    Ok(config.resolve()?)
}

fn output_dir(config: &ExperimentConfig) -> Result<&Path, Failure> {
    fs::create_dir_all(&config.output_dir)?;
    fs::write(config.output_dir.join("config.json"), config.to_json() + "\n")?;
    Ok(&config.output_dir)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, Failure> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))
}

fn grammar(args: &GrammarArgs, range: Numeral) -> Result<Option<DmPair>, Failure> {
    let Some(digits) = &args.digits else { return Ok(None) };
    let d = parse_numeral_list(digits)?;
    let m = parse_numeral_list(&args.multipliers)?;
    Ok(Some(DmPair::new(d, m, range)?))
}

fn cmd_analyze(global: &GlobalArgs, config: &ExperimentConfig, args: &GrammarArgs) -> Result<(), Failure> {
    let dm = grammar(args, config.metric_support)?.ok_or_else(|| Failure::new("usage", "--D is required"))?;
    let analysis = analyze(&dm, config.metric_support)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    out.write_all(analysis.summary().as_bytes())?;
    analysis.write_csv(&mut out)?;
    if global.out.is_some() {
        let dir = output_dir(config)?;
        analysis.write_csv(create(&dir.join("analysis.csv"))?)?;
    }
    Ok(())
}

fn cmd_pareto(config: &ExperimentConfig, overlay: &[PathBuf], human: bool) -> Result<(), Failure> {
    let dir = output_dir(config)?;
    let frontier = run_pareto(config);
    write_frontier_csv(&frontier.points, create(&dir.join("frontier.csv"))?)?;
    let mut overlays = Vec::new();
    if human {
        for (name, c) in reference_candidates(&HUMAN_LANGUAGES, config.metric_support) {
            overlays.push(Overlay { label: name, points: vec![(c.lexicon_size as f64, c.avg_complexity)] });
        }
    }
    for path in overlay {
        let file = fs::File::open(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))?;
        let points = read_overlay_csv(file).map_err(|e| Failure::new("csv", format!("{}: {e}", path.display())))?;
        let label = path.file_stem().map_or_else(|| "overlay".into(), |s| s.to_string_lossy().into_owned());
        overlays.push(Overlay { label, points });
    }
    fs::write(dir.join("frontier.svg"), frontier_svg(&frontier.points, &overlays))?;
    println!("{}", json!({ "frontier_points": frontier.points.len(), "output": dir }));
    Ok(())
}

fn cmd_evolve(
    mut config: ExperimentConfig,
    start: Option<usize>,
    args: &GrammarArgs,
    max_steps: Option<usize>,
    overlay: Option<&Path>,
) -> Result<(), Failure> {
    if let Some(n) = max_steps {
        config.evolution.max_steps = n;
    }
    let start = match (start, grammar(args, config.communication_range)?) {
        (Some(i), _) => {
            reference::starting_point(i).ok_or_else(|| Failure::new("usage", format!("no starting point {i}")))?;
            Start::Table(i)
        }
        (None, Some(dm)) => Start::Explicit(dm),
        (None, None) => return Err(Failure::new("usage", "pass --start or --D/--M")),
    };
    let frontier: Option<Vec<Candidate>> = match overlay {
        Some(path) => {
            let file = fs::File::open(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))?;
            let rows = read_frontier_csv(file)?;
            let points = rows
                .into_iter()
                .map(|r| {
                    let dm = DmPair::new(r.digits, r.multipliers, config.metric_support)?;
                    Ok(Candidate { dm, lexicon_size: r.lexicon_size, avg_complexity: r.avg_complexity })
                })
                .collect::<Result<_, Failure>>()?;
            Some(points)
        }
        None => None,
    };
    let dir = output_dir(&config)?;
    let records = run_evolve(&config, &start)?;
    write_trajectory_csv(&records, create(&dir.join("trajectory.csv"))?)?;
    fs::write(dir.join("trajectory.svg"), trajectory_svg(&records, frontier.as_deref()))?;
    let last = records.last().expect("start record");
    println!(
        "{}",
        json!({
            "steps": records.len() - 1,
            "start": records[0].dm.to_string(),
            "final": last.dm.to_string(),
            "final_avg_ms_complexity": last.avg_ms_complexity,
            "output": dir,
        })
    );
    Ok(())
}

fn cmd_report_m(config: &ExperimentConfig, frontier: &Path) -> Result<(), Failure> {
    let file = fs::File::open(frontier).map_err(|e| Failure::new("io", format!("{}: {e}", frontier.display())))?;
    let rows = read_frontier_csv(file)?;
    let hist = m_cardinality_histogram(&rows)?;
    let dir = output_dir(config)?;
    write_histogram_csv(&hist, create(&dir.join("m_cardinality.csv"))?)?;
    fs::write(dir.join("m_cardinality.svg"), histogram_svg(&hist))?;
    write_histogram_csv(&hist, io::stdout().lock())?;
    Ok(())
}

fn cmd_gradcheck(seeds: &[u64], tolerance: f64) -> Result<(), Failure> {
    let reports: Vec<GradCheckReport> = seeds.iter().map(|&s| gradient_check(s)).collect();
    for r in &reports {
        println!("{}", serde_json::to_string(r).expect("report serializes"));
    }
    let worst = reports.iter().map(|r| r.max_relative_error).fold(0.0, f64::max);
    if worst < tolerance {
        Ok(())
    } else {
        Err(Failure::new("gradcheck", format!("max relative error {worst:e} exceeds {tolerance:e}")))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = load_config(&cli.global)?;
    match &cli.command {
        Command::Analyze { grammar } => cmd_analyze(&cli.global, &config, grammar),
        Command::Pareto { overlay, human } => cmd_pareto(&config, overlay, *human),
        Command::Evolve { start, grammar, max_steps, overlay } => {
            cmd_evolve(config, *start, grammar, *max_steps, overlay.as_deref())
        }
        Command::ReportM { frontier } => cmd_report_m(&config, frontier),
        Command::Gradcheck { seeds, tolerance } => cmd_gradcheck(seeds, *tolerance),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_string();
            return Failure { kind: "usage", message, code: 2 }.into_exit();
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.into_exit(),
    }
}

impl Failure {
    fn into_exit(self) -> ExitCode {
        let line = json!({ "error": self.kind, "message": self.message });
        let _ = writeln!(io::stderr().lock(), "{line}");
        ExitCode::from(self.code)
    }
}
