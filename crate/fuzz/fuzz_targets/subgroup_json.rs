#![no_main]

use libfuzzer_sys::fuzz_target;
use qwalk_core::config::parse_subgroup_json;
use qwalk_core::symmetry::{compute_orbits, verify_automorphism};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = parse_subgroup_json(text) else {
        return;
    };
    let graph = qwalk_fuzz::s3_graph();
    if let Ok(generators) = spec.generators(&graph) {
        for g in &generators {
            assert!(verify_automorphism(g, graph.shift_map()).expect("dimensions agree"));
        }
        let orbits = compute_orbits(graph.dim(), &generators).expect("generators act on the basis");
        assert_eq!(orbits.orbits().iter().map(Vec::len).sum::<usize>(), graph.dim());
    }
});
