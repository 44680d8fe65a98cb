#![no_main]

use libfuzzer_sys::fuzz_target;
use tarski_core::formula::{alpha_equal, parse_formula, render_formula};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_formula(text) {
        let back = parse_formula(&render_formula(&f)).expect("rendered formula must parse");
        assert!(alpha_equal(&f, &back));
    }
});
