use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use recnum::agents::{tokenize, AgentConfig, AgentPair};
use recnum::bandit::{communication_phase, BanditState, SelectionRule};
use recnum::grammar::{DmPair, NumExpr, Numeral, Phrase};
use recnum::lexicon::{brute_force_lmin, compute_lmin, covers};
use recnum::metrics::{avg_ms_complexity_dm, NeedDistribution};
use recnum::mutation::{apply, valid_neighbors, MutationKind};
use recnum::pareto::{dominates, run_ga, GaConfig};

/// A random grammar over `[1, range]` with `1` always lexicalised.
fn random_dm(range: Numeral, seed: u64) -> DmPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut digits = vec![1];
    let mut multipliers = Vec::new();
    for n in 2..=range {
        match rng.gen_range(0..10) {
            0..=1 => digits.push(n),
            2 => multipliers.push(n),
            _ => {}
        }
    }
    DmPair::new(digits, multipliers, range).unwrap()
}

fn arb_dm(max_range: Numeral) -> impl Strategy<Value = DmPair> {
    (5..=max_range, any::<u64>()).prop_map(|(r, s)| random_dm(r, s))
}

fn arb_covering_dm(max_range: Numeral) -> impl Strategy<Value = DmPair> {
    arb_dm(max_range).prop_filter("covers its range", covers)
}

fn arb_expr() -> impl Strategy<Value = (DmPair, NumExpr)> {
    let dm = DmPair::new([1, 2, 3, 5, 7], [4, 10, 20], 1000).unwrap();
    let leaf = prop::sample::select(vec![1, 2, 3, 5, 7]).prop_map(NumExpr::Digit);
    let tree = leaf.prop_recursive(5, 32, 2, |inner| {
        let phrase = (inner.clone(), prop::sample::select(vec![4, 10, 20]))
            .prop_filter_map("bounded", |(q, m)| Phrase::new(q, m).ok());
        prop_oneof![
            phrase.clone().prop_map(NumExpr::Phrase),
            (phrase.clone(), inner.clone()).prop_filter_map("positive", |(p, r)| NumExpr::sum(p, r).ok()),
            (phrase, inner).prop_filter_map("positive", |(p, r)| NumExpr::diff(p, r).ok()),
        ]
    });
    tree.prop_map(move |e| (dm.clone(), e))
}

fn symbol_count(rendered: &str) -> usize {
    let mut count = 0;
    let mut in_number = false;
    for c in rendered.chars() {
        let digit = c.is_ascii_digit();
        if digit && !in_number {
            count += 1;
        }
        if matches!(c, '+' | '-' | '*') {
            count += 1;
        }
        in_number = digit;
    }
    count
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expressions_round_trip_and_count_symbols((dm, e) in arb_expr()) {
        let text = e.render();
        prop_assert_eq!(NumExpr::parse(&text, &dm).unwrap(), e.clone());
        prop_assert_eq!(e.complexity(), symbol_count(&text));
        prop_assert!(e.value() >= 1);
        prop_assert_eq!(e.value(), e.clone().value());
    }

    #[test]
    fn lmin_matches_the_brute_force_oracle(dm in arb_covering_dm(40)) {
        let fast = compute_lmin(&dm).unwrap();
        let slow = brute_force_lmin(&dm, 40).unwrap();
        prop_assert_eq!(fast.complexities(), slow.complexities());
        for (n, e) in fast.iter() {
            prop_assert_eq!(e.value(), n);
            prop_assert!(e.check_membership(&dm).is_ok());
        }
        prop_assert_eq!(compute_lmin(&dm).unwrap(), fast);
    }

    #[test]
    fn extra_digits_never_hurt(dm in arb_covering_dm(40), pick in any::<prop::sample::Index>()) {
        let absent: Vec<Numeral> = (1..=dm.range_max()).filter(|n| !dm.contains(*n)).collect();
        prop_assume!(!absent.is_empty());
        let n = absent[pick.index(absent.len())];
        let bigger = DmPair::new(dm.digits().iter().copied().chain([n]), dm.multipliers().iter().copied(), dm.range_max()).unwrap();
        let (before, after) = (compute_lmin(&dm).unwrap(), compute_lmin(&bigger).unwrap());
        for (a, b) in after.complexities().iter().zip(before.complexities()) {
            prop_assert!(*a <= b);
        }
        let dist = NeedDistribution::new(dm.range_max());
        let (x, y) = (avg_ms_complexity_dm(&dm, &dist).unwrap(), avg_ms_complexity_dm(&bigger, &dist).unwrap());
        prop_assert!(y <= x + 1e-12);
        prop_assert_eq!(bigger.lexicon_size(), dm.lexicon_size() + 1);
    }

    #[test]
    fn average_complexity_is_at_least_one(dm in arb_covering_dm(40)) {
        let dist = NeedDistribution::new(dm.range_max());
        let avg = avg_ms_complexity_dm(&dm, &dist).unwrap();
        prop_assert!(avg >= 1.0 - 1e-12);
        let all_digits = (1..=dm.range_max()).all(|n| dm.is_digit(n));
        prop_assert_eq!((avg - 1.0).abs() < 1e-12, all_digits);
    }

    #[test]
    fn need_distribution_normalises(n_max in 1u32..5000) {
        let dist = NeedDistribution::new(n_max);
        prop_assert!((dist.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(dist.weights().windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn neighbours_keep_invariants(dm in arb_dm(40)) {
        for (kind, next) in valid_neighbors(&dm) {
            prop_assert!(covers(&next), "{kind}");
            prop_assert!(next.digits().is_disjoint(next.multipliers()));
            prop_assert_eq!(next.range_max(), dm.range_max());
            prop_assert!(next.lexicon_size().abs_diff(dm.lexicon_size()) <= 1);
        }
    }

    #[test]
    fn bandit_q_values_stay_in_unit_interval(seed in any::<u64>(), p0 in 0.0f64..1.0, p1 in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = BanditState::new(0.1, 0.2, SelectionRule::Verbatim);
        let arm = communication_phase::<_, (), _>(&mut state, 200, &mut rng, |arm, rng| {
            let p = [p0, p1][arm];
            Ok(if rng.gen::<f64>() < p { 1.0 } else { 0.0 })
        }).unwrap();
        prop_assert!(state.q_values.iter().all(|q| (0.0..=1.0).contains(q)));
        let argmax = if state.q_values[1] > state.q_values[0] { 1 } else { 0 };
        prop_assert_eq!(arm, argmax);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn episodes_are_well_formed(seed in any::<u64>()) {
        let config = AgentConfig { hidden_dim: 6, numeral_range: 30, batch_size: 16, ..AgentConfig::default() };
        let mut pair = AgentPair::new(config, seed).unwrap();
        let dm = DmPair::new([1, 2, 3, 4, 5, 6, 7, 8, 9], [10], 30).unwrap();
        let lexicon = compute_lmin(&dm).unwrap();
        let dist = NeedDistribution::new(30);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let batch = pair.play_batch(&lexicon, &dist, &mut rng).unwrap();
        for ep in &batch.episodes {
            let tokens = tokenize(lexicon.entry(ep.target).unwrap(), pair.speaker.vocab()).unwrap();
            prop_assert_eq!(ep.message.len(), tokens.len());
            for p in ep.speaker.distributions() {
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
                prop_assert!(p.iter().all(|x| *x >= 0.0));
            }
            let listener = ep.listener.as_ref().unwrap();
            prop_assert!((listener.distribution().iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
        pair.update(&batch).unwrap();
    }

    #[test]
    fn ga_generations_never_regress(seed in any::<u64>()) {
        let config = |generations| GaConfig {
            population_size: 24,
            generations,
            range_max: 30,
            support: 30,
            ..GaConfig::default()
        };
        let before = run_ga(&config(3), &mut ChaCha8Rng::seed_from_u64(seed));
        let after = run_ga(&config(4), &mut ChaCha8Rng::seed_from_u64(seed));
        for new in &after.points {
            prop_assert!(before.points.iter().all(|old| !dominates(old, new)));
            prop_assert!(covers(&new.dm.with_range(30).unwrap()));
        }
        let mut sorted = after.points.clone();
        sorted.sort_by_key(|c| c.lexicon_size);
        prop_assert!(sorted.windows(2).all(|w| w[1].avg_complexity < w[0].avg_complexity));
    }
}

#[test]
fn move_down_then_up_is_identity_on_fixtures() {
    // M2 moves min(M) to D; M3 moves max(D) back when it is the moved value.
    for (d, m) in [(vec![1, 2, 3], vec![40, 10]), (vec![1, 4], vec![9, 25]), (vec![1], vec![30, 2])] {
        let dm = DmPair::new(d, m, 40).unwrap();
        let down = apply(&dm, MutationKind::M2).unwrap();
        let moved = *dm.multipliers().iter().next().unwrap();
        assert_eq!(down.digits().iter().next_back(), Some(&moved));
        assert_eq!(apply(&down, MutationKind::M3).unwrap(), dm);
    }
}
