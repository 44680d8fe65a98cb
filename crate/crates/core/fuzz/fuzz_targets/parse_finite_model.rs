#![no_main]

use libfuzzer_sys::fuzz_target;
use tarski_core::model::FiniteModel;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = FiniteModel::parse(text) {
        let again = FiniteModel::parse(&m.to_string()).expect("rendered model must parse");
        assert_eq!(m.to_string(), again.to_string());
    }
});
