#![no_main]

use libfuzzer_sys::fuzz_target;
use recnum::experiments::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(config) = ExperimentConfig::from_json(text) else { return };
    let echoed = ExperimentConfig::from_json(&config.to_json()).expect("echo parses");
    assert_eq!(echoed.seed, config.seed);
    if let Ok(resolved) = config.resolve() {
        assert_eq!(resolved.agent.numeral_range, resolved.communication_range);
        assert_eq!(resolved.ga.support, resolved.metric_support);
    }
});
