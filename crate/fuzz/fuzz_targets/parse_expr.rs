#![no_main]

use libfuzzer_sys::fuzz_target;
use recnum::grammar::{DmPair, NumExpr};

// First line: `D|M` lists for the grammar; the rest is the expression.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let (header, expr) = text.split_once('\n').unwrap_or(("1..9,11|10", text));
    let (d, m) = header.split_once('|').unwrap_or((header, ""));
    let (Ok(d), Ok(m)) = (recnum::report::parse_numeral_list(d), recnum::report::parse_numeral_list(m)) else {
        return;
    };
    let Ok(dm) = DmPair::new(d, m, u32::MAX) else { return };
    if let Ok(e) = NumExpr::parse(expr, &dm) {
        let rendered = e.render();
        assert_eq!(NumExpr::parse(&rendered, &dm).as_ref(), Ok(&e));
        assert_eq!(e.tokens().len(), e.complexity());
        assert!(e.check_membership(&dm).is_ok());
    }
});
