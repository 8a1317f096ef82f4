#![no_main]

use libfuzzer_sys::fuzz_target;
use recnum::agents::checkpoint::{load_checkpoint, save_checkpoint};

fuzz_target!(|data: &[u8]| {
    if let Ok(pair) = load_checkpoint(data) {
        let mut out = Vec::new();
        save_checkpoint(&pair, &mut out).expect("in-memory write");
        let again = load_checkpoint(out.as_slice()).expect("saved checkpoint loads");
        assert_eq!(again, pair);
    }
});
