#![no_main]

use libfuzzer_sys::fuzz_target;
use qwalk_core::io::{matrix_to_json, parse_matrix_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = parse_matrix_json(text) {
        // Seventeen significant digits make the round trip exact.
        let again = parse_matrix_json(&matrix_to_json(&m)).expect("printed matrix parses");
        assert_eq!(again, m);
    }
});
