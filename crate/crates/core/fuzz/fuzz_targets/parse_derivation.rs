#![no_main]

use libfuzzer_sys::fuzz_target;
use tarski_core::kernel::{check_derivation, parse_derivation};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = parse_derivation(text) {
        // The checker must return a verdict for anything the parser accepts.
        let _ = check_derivation(&d);
    }
});
