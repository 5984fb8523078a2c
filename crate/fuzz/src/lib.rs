//! Fixtures shared by the fuzz targets.

use qwalk_core::graph::{build_cayley, ColoredGraph};
use qwalk_core::perm::{generate_group, Permutation};

/// Cayley graph of S3 on all three transpositions: vertex labels, words and
/// direction permutations all have room to go wrong on it.
pub fn s3_graph() -> ColoredGraph {
    let gens: Vec<Permutation> = ["(1,2)", "(2,3)", "(1,3)"]
        .iter()
        .map(|g| Permutation::parse_cycles(g, 3).expect("valid generator"))
        .collect();
    build_cayley(&generate_group(&gens).expect("finite group"), &gens).expect("valid Cayley graph")
}
