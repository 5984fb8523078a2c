#![no_main]

use libfuzzer_sys::fuzz_target;
use qwalk_core::config::{parse_final_spec, parse_initial_spec};
use qwalk_core::perm::Permutation;
use qwalk_core::symmetry::{compute_orbits, direction_automorphism};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let graph = qwalk_fuzz::s3_graph();
    if let Ok(finals) = parse_final_spec(&graph, text) {
        assert!(!finals.is_empty());
        assert!(finals.iter().all(|&v| v < graph.num_vertices()));
    }
    let swap = Permutation::parse_cycles("(2,3)", 3).expect("valid direction swap");
    let orbits = compute_orbits(graph.dim(), &[direction_automorphism(&graph, &swap).expect("automorphism")])
        .expect("orbits");
    if let Ok(psi) = parse_initial_spec(&graph, Some(&orbits), text) {
        assert_eq!(psi.len(), graph.dim());
        assert!((psi.norm() - 1.0).abs() < 1e-9);
    }
});
