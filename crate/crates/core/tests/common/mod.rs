//! Helpers shared by the integration tests: building the reference graphs,
//! loading subgroup files and reference data, and matching computed orbits to
//! reference orbit listings.
#![allow(dead_code)]

pub mod criteria;

use std::path::PathBuf;

use qwalk_core::config::{parse_subgroup_json, SubgroupSpec};
use qwalk_core::graph::{build_cayley, build_hypercube, ColoredGraph};
use qwalk_core::linalg::{real, CMatrix};
use qwalk_core::perm::{generate_group, Permutation};
use qwalk_core::symmetry::{compute_orbits, quotient_graph, BasisPermutation, OrbitBasis, QuotientGraph};
use qwalk_core::walk::{induced_walk, walk_unitary, CoinRule, WalkOperator};
use serde::Deserialize;

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

/// Parses a closed-form entry: an optional sign, then a product of factors
/// (integers, decimals, or `sqrtK`), optionally over an integer denominator,
/// e.g. `-2*sqrt2/3`.
pub fn entry(text: &str) -> f64 {
    let text = text.trim();
    let (sign, body) = match text.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, text),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().expect("denominator")),
        None => (body, 1.0),
    };
    let value: f64 = num
        .split('*')
        .map(|f| match f.strip_prefix("sqrt") {
            Some(k) => k.parse::<f64>().expect("sqrt argument").sqrt(),
            None => f.parse::<f64>().expect("factor"),
        })
        .product();
    sign * value / den
}

pub fn entry_matrix(rows: &[Vec<String>]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(n, m, |i, j| real(entry(&rows[i][j])))
}

/// Named coin blocks used in the reference data.
pub fn named_block(name: &str) -> CMatrix {
    let rows: Vec<Vec<&str>> = match name {
        "1" => vec![vec!["1"]],
        "X" => vec![vec!["0", "1"], vec!["1", "0"]],
        "C1" => vec![vec!["-1/3", "2*sqrt2/3"], vec!["2*sqrt2/3", "1/3"]],
        "C2" => vec![
            vec!["-1/3", "2/3", "2/3"],
            vec!["2/3", "-1/3", "2/3"],
            vec!["2/3", "2/3", "-1/3"],
        ],
        other => panic!("unknown block {other}"),
    };
    let owned: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
    entry_matrix(&owned)
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GraphSpec {
    Cayley { degree: usize, generators: Vec<String> },
    Hypercube { n: usize },
}

#[derive(Debug, Deserialize)]
pub struct BlockSpec {
    pub orbits: Vec<usize>,
    pub block: String,
}

/// A reference entry whose printed value is replaced; the check must show the
/// printed value is inconsistent with the walk.
#[derive(Debug, Deserialize)]
pub struct Correction {
    pub entry: [usize; 2],
    pub printed: String,
}

#[derive(Debug, Deserialize)]
pub struct Reference {
    pub graph: GraphSpec,
    pub subgroup: String,
    pub orbits: Vec<Vec<String>>,
    #[serde(default)]
    pub orbit_sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub u_h: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub shift_pairs: Option<Vec<[usize; 2]>>,
    #[serde(default)]
    pub coin_blocks: Option<Vec<BlockSpec>>,
    #[serde(default)]
    pub corrections: Vec<Correction>,
    /// Printed shift pairs that were replaced in `shift_pairs`.
    #[serde(default)]
    pub printed_shift_pairs: Vec<[usize; 2]>,
}

pub fn load_reference(name: &str) -> Reference {
    let path = data_dir().join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn load_subgroup(name: &str) -> SubgroupSpec {
    let path = workspace_root().join("configs").join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_subgroup_json(&text).unwrap()
}

pub fn cayley(generators: &[&str], degree: usize) -> ColoredGraph {
    let gens: Vec<Permutation> = generators
        .iter()
        .map(|g| Permutation::parse_cycles(g, degree).unwrap())
        .collect();
    build_cayley(&generate_group(&gens).unwrap(), &gens).unwrap()
}

pub fn build_graph(spec: &GraphSpec) -> ColoredGraph {
    match spec {
        GraphSpec::Cayley { degree, generators } => {
            let gens: Vec<&str> = generators.iter().map(String::as_str).collect();
            cayley(&gens, *degree)
        }
        GraphSpec::Hypercube { n } => build_hypercube(*n).unwrap(),
    }
}

/// Flat index of `vertex:color` with a 1-based color number.
pub fn basis_ref(graph: &ColoredGraph, text: &str) -> usize {
    let (v, c) = text.rsplit_once(':').expect("vertex:color");
    let v = graph.resolve_vertex(v).unwrap_or_else(|e| panic!("{text}: {e}"));
    let c: usize = c.parse().expect("color number");
    graph.flat(v, c - 1).unwrap_or_else(|| panic!("{text}: no such color"))
}

/// Everything derived from one graph + subgroup pair under the Grover walk.
pub struct Setup {
    pub graph: ColoredGraph,
    pub generators: Vec<BasisPermutation>,
    pub u: WalkOperator,
    pub orbits: OrbitBasis,
    pub u_h: WalkOperator,
    pub quotient: QuotientGraph,
}

pub fn setup(graph: ColoredGraph, subgroup: &SubgroupSpec) -> Setup {
    let generators = subgroup.generators(&graph).unwrap();
    let u = walk_unitary(&graph, &CoinRule::Grover).unwrap();
    let orbits = compute_orbits(graph.dim(), &generators).unwrap();
    let u_h = induced_walk(&u, &orbits).unwrap();
    let quotient = quotient_graph(&graph, &orbits).unwrap();
    Setup {
        graph,
        generators,
        u,
        orbits,
        u_h,
        quotient,
    }
}

pub fn reference_setup(reference: &Reference) -> Setup {
    setup(build_graph(&reference.graph), &load_subgroup(&reference.subgroup))
}

/// For each reference orbit, the index of the computed orbit with exactly
/// the same members. Fails if any reference orbit has no such match or the
/// partitions differ in size.
pub fn match_orbits(graph: &ColoredGraph, orbits: &OrbitBasis, listing: &[Vec<String>]) -> Result<Vec<usize>, String> {
    if listing.len() != orbits.len() {
        return Err(format!("{} computed orbits, {} listed", orbits.len(), listing.len()));
    }
    let mut mapping = Vec::with_capacity(listing.len());
    for (k, members) in listing.iter().enumerate() {
        let mut flat: Vec<usize> = members.iter().map(|m| basis_ref(graph, m)).collect();
        flat.sort_unstable();
        let computed = orbits.orbit_of(flat[0]);
        if orbits.orbit(computed) != flat.as_slice() {
            return Err(format!("listed orbit {} does not match a computed orbit", k + 1));
        }
        if mapping.contains(&computed) {
            return Err(format!("listed orbit {} repeats an earlier orbit", k + 1));
        }
        mapping.push(computed);
    }
    Ok(mapping)
}

/// `A` re-indexed into the reference order: `out[i][j] = A[map[i]][map[j]]`.
pub fn reorder(a: &CMatrix, mapping: &[usize]) -> CMatrix {
    CMatrix::from_fn(mapping.len(), mapping.len(), |i, j| a[(mapping[i], mapping[j])])
}

/// Orbits obtained by applying every element of the generated group to every
/// basis index.
pub fn brute_force_orbits(dim: usize, generators: &[BasisPermutation]) -> Vec<Vec<usize>> {
    let group = qwalk_core::symmetry::close_group(dim, generators).unwrap();
    let mut seen = vec![false; dim];
    let mut out = Vec::new();
    for x in 0..dim {
        if seen[x] {
            continue;
        }
        let mut orbit: Vec<usize> = group.iter().map(|g| g.apply(x)).collect();
        orbit.sort_unstable();
        orbit.dedup();
        for &y in &orbit {
            seen[y] = true;
        }
        out.push(orbit);
    }
    out
}

/// Direction generators of `S_n` acting on all `n` hypercube directions.
pub fn hypercube_full_directions(n: usize) -> SubgroupSpec {
    let cycle: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    SubgroupSpec {
        directions: vec!["(1,2)".into(), format!("({})", cycle.join(","))],
        translations: vec![],
    }
}
