#![no_main]

use libfuzzer_sys::fuzz_target;
use recnum::experiments::{m_cardinality_histogram, read_overlay_csv};
use recnum::pareto::read_frontier_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_frontier_csv(data) {
        let hist = m_cardinality_histogram(&rows).expect("non-empty");
        assert_eq!(hist.values().sum::<usize>(), rows.len());
        for r in &rows {
            assert!(r.avg_complexity.is_finite());
            assert_eq!(r.digits.len() + r.multipliers.len(), r.lexicon_size);
        }
    }
    if let Ok(points) = read_overlay_csv(data) {
        assert!(!points.is_empty());
        assert!(points.iter().all(|p| p.1.is_finite()));
    }
});
