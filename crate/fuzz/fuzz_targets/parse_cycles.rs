#![no_main]

use libfuzzer_sys::fuzz_target;
use qwalk_core::perm::Permutation;

fuzz_target!(|data: &[u8]| {
    // First byte picks the domain size, the rest is cycle text.
    let Some((&size, text)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(text) else {
        return;
    };
    let n = usize::from(size % 32);
    if let Ok(p) = Permutation::parse_cycles(text, n) {
        assert_eq!(p.degree(), n);
        // The printed form parses back to the same permutation.
        let again = Permutation::parse_cycles(&p.to_string(), n).expect("printed cycles parse");
        assert_eq!(again, p);
        assert!(p.compose(&p.inverse()).expect("same degree").is_identity());
    }
});
