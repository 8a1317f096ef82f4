//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails.

use std::process::ExitCode;
use std::thread;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use recnum::agents::gradcheck::gradient_check;
use recnum::agents::{pretrain, AgentConfig, AgentPair};
use recnum::bandit::{communication_phase, write_trajectory_csv, BanditState, SelectionRule};
use recnum::experiments::reference::{human_language, STARTING_POINTS};
use recnum::experiments::{run_evolve, run_pareto, ExperimentConfig, Start};
use recnum::grammar::{DmPair, Numeral};
use recnum::lexicon::{brute_force_lmin, compute_lmin, covers};
use recnum::metrics::NeedDistribution;
use recnum::mutation::{apply, valid_neighbors, MutationKind};
use recnum::pareto::{distance_to_frontier, write_frontier_csv, Candidate, FrontierApproximation, GaConfig};

const LMIN_GRAMMARS: usize = 20;
const LMIN_MAX_RANGE: Numeral = 40;
const LMIN_BUDGET: Duration = Duration::from_secs(60);

const TABLE4_TOLERANCE: f64 = 1e-9;
const GA_BUDGET: Duration = Duration::from_secs(300);
const GA_SEEDS: [u64; 3] = [1, 2, 3];
const SINGLE_MULTIPLIER_SHARE: f64 = 0.70;

const NORMALISATION_TOLERANCE: f64 = 1e-12;

const GRADCHECK_SEEDS: [u64; 3] = [1, 2, 3];
const GRADCHECK_TOLERANCE: f64 = 1e-4;
const GRADCHECK_BUDGET: Duration = Duration::from_secs(30);

const BANDIT_PHASES: usize = 200;
const BANDIT_ITERATIONS: usize = 500;
const BANDIT_ARMS: (f64, f64) = (0.8, 0.3);
const BANDIT_SHARE: f64 = 0.95;
const BANDIT_BUDGET: Duration = Duration::from_secs(30);

const PRETRAIN_SEED: u64 = 1;
const PRETRAIN_EPOCHS: usize = 2_000;
const PRETRAIN_RANGE: Numeral = 20;
const PRETRAIN_ACCURACY: f64 = 0.9;
const PRETRAIN_BUDGET: Duration = Duration::from_secs(300);

const EVOLVE_SEED: u64 = 1;
const EVOLVE_MIN_IMPROVED: usize = 6;
const EVOLVE_DISTANCE_REDUCTION: f64 = 0.30;
const EVOLVE_BUDGET: Duration = Duration::from_secs(3_600);

const MUTATION_CASES: usize = 1_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(budget: Duration, elapsed: Duration) -> (bool, String) {
    (elapsed <= budget, format!("{:.1}s of {}s", elapsed.as_secs_f64(), budget.as_secs()))
}

fn random_dm(rng: &mut impl Rng, range: Numeral) -> DmPair {
    let mut digits = vec![1];
    let mut multipliers = Vec::new();
    for n in 2..=range {
        match rng.gen_range(0..10) {
            0..=1 => digits.push(n),
            2 => multipliers.push(n),
            _ => {}
        }
    }
    DmPair::new(digits, multipliers, range).expect("disjoint and in range")
}

fn lmin_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut checked, mut mismatches) = (0, Vec::new());
    while checked < LMIN_GRAMMARS {
        let range = rng.gen_range(5..=LMIN_MAX_RANGE);
        let dm = random_dm(&mut rng, range);
        let Ok(oracle) = brute_force_lmin(&dm, 30) else { continue };
        checked += 1;
        match compute_lmin(&dm) {
            Ok(lex) if lex.complexities() == oracle.complexities() => {}
            _ => mismatches.push(dm.to_string()),
        }
    }
    let (fast, time) = within(LMIN_BUDGET, start.elapsed());
    outcome(
        mismatches.is_empty() && fast,
        format!("{}/{checked} grammars match the brute-force oracle; {time}", checked - mismatches.len()),
    )
}

fn ga_runs() -> (Vec<FrontierApproximation>, Duration) {
    let start = Instant::now();
    let runs = GA_SEEDS
        .iter()
        .map(|&seed| run_pareto(&ExperimentConfig { seed, ga: GaConfig::default(), ..ExperimentConfig::default() }))
        .collect();
    (runs, start.elapsed() / GA_SEEDS.len() as u32)
}

fn table4_point(runs: &[FrontierApproximation], per_run: Duration) -> Outcome {
    let dm = DmPair::new(1..=11, [12], 99).unwrap();
    let oracle_lex = brute_force_lmin(&dm, 12).expect("covers 1..99");
    let dist = NeedDistribution::new(99);
    let target = dist.expectation(oracle_lex.complexities().into_iter().map(|c| c as f64));
    let best = runs[0].points.iter().find(|c| c.lexicon_size == 12).map(|c| c.avg_complexity);
    let (fast, time) = within(GA_BUDGET, per_run);
    let pass = fast && best.is_some_and(|b| b <= target + TABLE4_TOLERANCE);
    let found = best.map_or("none".into(), |b| format!("{b:.12}"));
    outcome(pass, format!("size-12 point {found} vs D=[1..11] M=[12] {target:.12}; {time}"))
}

fn single_multiplier(runs: &[FrontierApproximation]) -> Outcome {
    let total: usize = runs.iter().map(|r| r.points.len()).sum();
    let single: usize = runs.iter().flat_map(|r| &r.points).filter(|c| c.dm.multipliers().len() == 1).count();
    let share = single as f64 / total as f64;
    let per_seed: Vec<String> = runs
        .iter()
        .map(|r| format!("{}/{}", r.points.iter().filter(|c| c.dm.multipliers().len() == 1).count(), r.points.len()))
        .collect();
    outcome(
        share >= SINGLE_MULTIPLIER_SHARE,
        format!("{single}/{total} = {share:.3} frontier points with |M|=1 (per seed {})", per_seed.join(", ")),
    )
}

fn need_distribution() -> Outcome {
    let mut problems = Vec::new();
    for support in [20, 50, 99, 1000] {
        let dist = NeedDistribution::new(support);
        let sum: f64 = dist.weights().iter().sum();
        if (sum - 1.0).abs() > NORMALISATION_TOLERANCE {
            problems.push(format!("support {support}: sum {sum}"));
        }
        let (p1, p2) = (dist.probability(1).unwrap(), dist.probability(2).unwrap());
        if p1 / p2 != 4.0 {
            problems.push(format!("support {support}: P(1)/P(2) = {}", p1 / p2));
        }
        let direct = 1.0 / (1..=support).map(|n| 1.0 / (n as f64 * n as f64)).sum::<f64>();
        if (p1 - direct).abs() > NORMALISATION_TOLERANCE {
            problems.push(format!("support {support}: P(1) {p1} vs {direct}"));
        }
    }
    let detail = if problems.is_empty() { "supports 20, 50, 99, 1000 normalised".into() } else { problems.join("; ") };
    outcome(problems.is_empty(), detail)
}

fn gradcheck() -> Outcome {
    let start = Instant::now();
    let reports: Vec<_> = GRADCHECK_SEEDS.iter().map(|&s| gradient_check(s)).collect();
    let worst = reports.iter().map(|r| r.max_relative_error).fold(0.0, f64::max);
    let (fast, time) = within(GRADCHECK_BUDGET, start.elapsed());
    outcome(worst < GRADCHECK_TOLERANCE && fast, format!("max relative error {worst:.3e} over 3 seeds; {time}"))
}

fn bandit() -> Outcome {
    let start = Instant::now();
    let mut wins = 0;
    for phase in 0..BANDIT_PHASES {
        let mut rng = ChaCha8Rng::seed_from_u64(phase as u64);
        let p = if phase % 2 == 0 { [BANDIT_ARMS.0, BANDIT_ARMS.1] } else { [BANDIT_ARMS.1, BANDIT_ARMS.0] };
        let better = usize::from(p[1] > p[0]);
        let mut state = BanditState::new(0.1, 0.2, SelectionRule::Verbatim);
        let chosen = communication_phase::<_, (), _>(&mut state, BANDIT_ITERATIONS, &mut rng, |arm, rng| {
            Ok(if rng.gen::<f64>() < p[arm] { 1.0 } else { 0.0 })
        })
        .unwrap();
        wins += usize::from(chosen == better);
    }
    let share = wins as f64 / BANDIT_PHASES as f64;
    let (fast, time) = within(BANDIT_BUDGET, start.elapsed());
    outcome(share >= BANDIT_SHARE && fast, format!("better arm adopted in {wins}/{BANDIT_PHASES} phases; {time}"))
}

fn pretraining() -> Outcome {
    let start = Instant::now();
    let config = AgentConfig { hidden_dim: 32, batch_size: 32, numeral_range: PRETRAIN_RANGE, ..AgentConfig::default() };
    let dm = human_language("English").unwrap().dm(PRETRAIN_RANGE).unwrap();
    let lexicon = compute_lmin(&dm).unwrap();
    let dist = NeedDistribution::new(PRETRAIN_RANGE);
    let mut pair = AgentPair::new(config, PRETRAIN_SEED).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(PRETRAIN_SEED);
    let accuracy = pretrain(&mut pair, &lexicon, &dist, PRETRAIN_EPOCHS, &mut rng).unwrap();
    let (fast, time) = within(PRETRAIN_BUDGET, start.elapsed());
    outcome(
        accuracy >= PRETRAIN_ACCURACY && fast,
        format!("greedy accuracy {accuracy:.4} after {PRETRAIN_EPOCHS} epochs (P(1) = {:.4}); {time}", dist.weights()[0]),
    )
}

fn trajectories(frontier: &FrontierApproximation) -> Outcome {
    let start = Instant::now();
    let mut config = ExperimentConfig::desk_scale();
    config.seed = EVOLVE_SEED;
    let config = config.resolve().unwrap();
    let dist = NeedDistribution::new(config.metric_support);
    let results: Vec<_> = thread::scope(|s| {
        let handles: Vec<_> = (1..=STARTING_POINTS.len())
            .map(|i| {
                let config = &config;
                s.spawn(move || run_evolve(config, &Start::Table(i)).expect("valid start"))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("evolution thread")).collect()
    });
    let mut improved = 0;
    let mut rows = Vec::new();
    for (i, records) in results.iter().enumerate() {
        let first = &records[0];
        let last = records.last().unwrap();
        let d0 = distance_to_frontier(&Candidate::evaluate(first.dm.clone(), &dist).unwrap(), frontier);
        let d1 = distance_to_frontier(&Candidate::evaluate(last.dm.clone(), &dist).unwrap(), frontier);
        let ok = last.avg_ms_complexity < first.avg_ms_complexity && d1 <= (1.0 - EVOLVE_DISTANCE_REDUCTION) * d0;
        improved += usize::from(ok);
        rows.push(format!(
            "#{} avg {:.3}->{:.3} dist {:.3}->{:.3}{}",
            i + 1,
            first.avg_ms_complexity,
            last.avg_ms_complexity,
            d0,
            d1,
            if ok { "" } else { " x" }
        ));
    }
    let (fast, time) = within(EVOLVE_BUDGET, start.elapsed());
    outcome(
        improved >= EVOLVE_MIN_IMPROVED && fast,
        format!("{improved}/8 starts improved [{}]; {time}", rows.join(", ")),
    )
}

fn mutation_conservativeness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violations = Vec::new();
    let mut applied = 0;
    for _ in 0..MUTATION_CASES {
        let range = rng.gen_range(2..=60);
        let dm = random_dm(&mut rng, range);
        let kind = MutationKind::ALL[rng.gen_range(0..MutationKind::ALL.len())];
        if let Some(next) = apply(&dm, kind) {
            applied += 1;
            let disjoint = next.digits().is_disjoint(next.multipliers());
            let bounded = next.digits().iter().chain(next.multipliers()).all(|&n| (1..=dm.range_max()).contains(&n));
            if next.lexicon_size().abs_diff(dm.lexicon_size()) > 1 || !disjoint || !bounded || next.digits().is_empty()
            {
                violations.push(format!("{kind} on {dm}"));
            }
        }
        for (kind, next) in valid_neighbors(&dm) {
            if !covers(&next) {
                violations.push(format!("{kind} neighbour of {dm} does not cover"));
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!("{MUTATION_CASES} cases, {applied} applicable, {} violations", violations.len()),
    )
}

fn determinism() -> Outcome {
    let pareto_csv = || {
        let mut buf = Vec::new();
        let config = ExperimentConfig { seed: 4, ..ExperimentConfig::default() };
        write_frontier_csv(&run_pareto(&config).points, &mut buf).unwrap();
        buf
    };
    let evolve_csv = || {
        let mut config = ExperimentConfig::desk_scale();
        config.seed = 4;
        config.evolution.max_steps = 2;
        config.evolution.inner_iterations = 200;
        config.evolution.pretrain_epochs = 200;
        let records = run_evolve(&config.resolve().unwrap(), &Start::Table(7)).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&records, &mut buf).unwrap();
        buf
    };
    let pareto = pareto_csv() == pareto_csv();
    let evolve = evolve_csv() == evolve_csv();
    outcome(pareto && evolve, format!("pareto identical: {pareto}, evolve identical: {evolve}"))
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |n: usize, name: &str, o: Outcome| {
        println!("[{}] {n:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failures += usize::from(!o.pass);
    };
    report(1, "L_min oracle equivalence", lmin_oracle());
    let (runs, per_run) = ga_runs();
    report(2, "size-12 frontier point", table4_point(&runs, per_run));
    report(3, "|M| = 1 dominance", single_multiplier(&runs));
    report(4, "need distribution", need_distribution());
    report(5, "gradient check", gradcheck());
    report(6, "bandit correctness", bandit());
    report(7, "pretraining learnability", pretraining());
    report(8, "trajectory improvement", trajectories(&runs[0]));
    report(9, "mutation conservativeness", mutation_conservativeness());
    report(10, "determinism", determinism());
    println!("{} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
