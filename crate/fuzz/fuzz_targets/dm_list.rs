#![no_main]

use libfuzzer_sys::fuzz_target;
use recnum::grammar::DmPair;
use recnum::lexicon::{compute_lmin, covers};
use recnum::report::{format_list, parse_list, parse_numeral_list};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let (d, m) = text.split_once('|').unwrap_or((text, ""));
    let (Ok(d), Ok(m)) = (parse_numeral_list(d), parse_numeral_list(m)) else { return };
    let range = d.iter().chain(&m).copied().max().unwrap_or(1).min(60);
    let Ok(dm) = DmPair::new(d, m, range) else { return };
    assert_eq!(parse_list(&format_list(dm.digits())).unwrap(), dm.digits().iter().copied().collect::<Vec<_>>());
    match compute_lmin(&dm) {
        Ok(lex) => {
            assert!(covers(&dm));
            for (n, e) in lex.iter() {
                assert_eq!(e.value(), n);
            }
        }
        Err(err) => {
            assert!(!covers(&dm));
            assert!(!err.uncovered.is_empty());
        }
    }
});
