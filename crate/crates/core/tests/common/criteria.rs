//! The seven end-to-end checks. Each returns a one-line summary on success
//! and a description of the first discrepancy on failure.

use std::time::{Duration, Instant};

use qwalk_core::graph::{build_glued_trees, build_hypercube, glued_trees_symmetries, ColoredGraph};
use qwalk_core::hitting::{
    c_matrix, hitting_time, infinite_projector, pure_density, quotient_infinite_check, quotient_projector_rank,
    HittingOptions, Measurement, Tau, DEFAULT_DENSE_LIMIT, DEGENERACY_TOL, NULL_TOL,
};
use qwalk_core::linalg::{c, expm_hermitian, max_abs_diff, real, unitarity_deviation, vector_max_abs_diff, CMatrix, CVector, ONE, ZERO};
use qwalk_core::symmetry::{close_group, compute_orbits, projector_ph, BasisPermutation, OrbitBasis};
use qwalk_core::walk::{
    commutation_deviation, continuous_hamiltonian, evolve_continuous, factor_quotient_walk, quotient_hamiltonian,
    walk_unitary, CoinRule, WalkOperator,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::*;

pub type Outcome = Result<String, String>;

const GOLDEN_TOL: f64 = 1e-12;
const EVOLUTION_TOL: f64 = 1e-10;
const SERIES_TOL: f64 = 1e-6;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration, what: &str) -> Result<(), String> {
    let elapsed = start.elapsed();
    ensure(elapsed < budget, || format!("{what} took {elapsed:?}, budget {budget:?}"))
}

/// Compares every piece of reference data recorded for one graph/subgroup pair.
pub fn check_reference(name: &str) -> Outcome {
    let reference = load_reference(name);
    let s = reference_setup(&reference);
    let mapping = match_orbits(&s.graph, &s.orbits, &reference.orbits).map_err(|e| format!("{name}: {e}"))?;
    let mut checked = vec!["orbits"];
    let mut notes: Vec<String> = Vec::new();

    let brute = brute_force_orbits(s.graph.dim(), &s.generators);
    ensure(brute.as_slice() == s.orbits.orbits(), || format!("{name}: orbits differ from brute-force enumeration"))?;
    if let Some(sizes) = &reference.orbit_sizes {
        let computed: Vec<usize> = mapping.iter().map(|&k| s.orbits.orbit(k).len()).collect();
        ensure(&computed == sizes, || format!("{name}: orbit sizes {computed:?} vs {sizes:?}"))?;
        checked.push("sizes");
    }
    if let Some(rows) = &reference.u_h {
        let expected = entry_matrix(rows);
        let diff = max_abs_diff(&reorder(s.u_h.matrix(), &mapping), &expected);
        ensure(diff <= GOLDEN_TOL, || format!("{name}: U_H differs by {diff:e}"))?;
        checked.push("U_H");
        if !reference.corrections.is_empty() {
            let mut printed = expected.clone();
            for corr in &reference.corrections {
                printed[(corr.entry[0] - 1, corr.entry[1] - 1)] = real(entry(&corr.printed));
            }
            let reason = printed_inconsistency(&s, &mapping, &printed)
                .ok_or_else(|| format!("{name}: printed entries are consistent, correction unjustified"))?;
            notes.push(format!("{} printed entr(ies) corrected: {reason}", reference.corrections.len()));
        }
    }
    let factor = factor_quotient_walk(&s.u_h, &s.quotient).map_err(|e| format!("{name}: {e}"))?;
    if let Some(pairs) = &reference.shift_pairs {
        let m = mapping.len();
        let mut expected = CMatrix::identity(m, m);
        for &[a, b] in pairs {
            let (a, b) = (a - 1, b - 1);
            expected[(a, a)] = ZERO;
            expected[(b, b)] = ZERO;
            expected[(a, b)] = ONE;
            expected[(b, a)] = ONE;
        }
        let diff = max_abs_diff(&reorder(&factor.s_h, &mapping), &expected);
        ensure(diff == 0.0, || format!("{name}: S_H pairing differs"))?;
        checked.push("S_H");
        if !reference.printed_shift_pairs.is_empty() {
            let printed = &reference.printed_shift_pairs;
            let contradicted: Vec<String> = printed
                .iter()
                .filter(|&&[a, b]| {
                    let (ka, kb) = (mapping[a - 1], mapping[b - 1]);
                    !s.orbits.orbit(ka).iter().all(|&x| s.orbits.orbit_of(s.graph.partner(x)) == kb)
                })
                .map(|[a, b]| format!("({a},{b})"))
                .collect();
            ensure(!contradicted.is_empty(), || format!("{name}: printed pairs all match the shift"))?;
            let group_edges = |pairs: &[[usize; 2]]| {
                let mut edges: Vec<(usize, usize)> = pairs
                    .iter()
                    .map(|&[a, b]| {
                        let (ga, gb) = (s.quotient.graph.vertex_of(mapping[a - 1]), s.quotient.graph.vertex_of(mapping[b - 1]));
                        (ga.min(gb), ga.max(gb))
                    })
                    .collect();
                edges.sort_unstable();
                edges
            };
            ensure(group_edges(printed) == group_edges(pairs), || {
                format!("{name}: printed pairs connect different quotient vertices")
            })?;
            notes.push(format!(
                "printed pairs {} contradict the shift; quotient adjacency agrees",
                contradicted.join("")
            ));
        }
    }
    if let Some(blocks) = &reference.coin_blocks {
        let m = mapping.len();
        let mut expected = CMatrix::zeros(m, m);
        for spec in blocks {
            let block = named_block(&spec.block);
            for (i, &a) in spec.orbits.iter().enumerate() {
                for (j, &b) in spec.orbits.iter().enumerate() {
                    expected[(a - 1, b - 1)] = block[(i, j)];
                }
            }
        }
        let diff = max_abs_diff(&reorder(&factor.c_h, &mapping), &expected);
        ensure(diff <= GOLDEN_TOL, || format!("{name}: C_H differs by {diff:e}"))?;
        checked.push("C_H");
    }
    let notes = if notes.is_empty() { String::new() } else { format!(" [{}]", notes.join("; ")) };
    Ok(format!("{name}: {} orbits, matched {}{notes}", mapping.len(), checked.join("/")))
}

/// Why a printed quotient walk cannot be the Grover walk restricted to the
/// orbits: either it is not unitary, or its coin part `S_Hᵀ U` has a diagonal
/// entry other than `2k/d − 1` for an orbit holding `k` of the `d` colors at
/// each of its vertices. `None` if neither test rejects it.
fn printed_inconsistency(s: &Setup, mapping: &[usize], printed: &CMatrix) -> Option<String> {
    let deviation = unitarity_deviation(printed);
    if deviation > GOLDEN_TOL {
        return Some(format!("printed matrix is not unitary (deviation {deviation:.3})"));
    }
    let s_h = reorder(&s.quotient.graph.shift_matrix(), mapping);
    let coin = s_h.transpose() * printed;
    for (i, &k) in mapping.iter().enumerate() {
        let vertex = s.quotient.graph.vertex_of(k);
        let per_vertex = s.orbits.orbit(k).len() / s.quotient.vertex_sets[vertex].len();
        let d = s.graph.degree(s.graph.vertex_of(s.orbits.orbit(k)[0]));
        let expected = 2.0 * per_vertex as f64 / d as f64 - 1.0;
        if (coin[(i, i)].re - expected).abs() > GOLDEN_TOL {
            return Some(format!(
                "printed coin diagonal at orbit {} is {:.4}, a Grover coin gives {expected:.4}",
                i + 1,
                coin[(i, i)].re
            ));
        }
    }
    None
}

pub fn criterion_1() -> Outcome {
    let mut lines = Vec::new();
    for (names, budget) in [
        (&["s3_two_gens"][..], 1.0),
        (&["s3_three_gens_h1", "s3_three_gens_h2"][..], 1.0),
        (&["s3_three_gens_h3"][..], 1.0),
        (&["cube3_h1", "cube3_h2"][..], 1.0),
        (&["s4_star"][..], 5.0),
    ] {
        let start = Instant::now();
        for name in names {
            lines.push(check_reference(name)?);
        }
        within_budget(start, Duration::from_secs_f64(budget), &names.join("+"))?;
    }
    Ok(lines.join("; "))
}

/// Vertex-space orbits of the glued-trees column symmetries.
pub fn glued_trees_orbits(n: usize) -> OrbitBasis {
    let g = build_glued_trees(n).unwrap();
    let reps: Vec<BasisPermutation> = glued_trees_symmetries(n)
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(k, p)| BasisPermutation::new(p, format!("column swap {k}")))
        .collect();
    compute_orbits(g.num_vertices(), &reps).unwrap()
}

pub fn expected_line_hamiltonian(n: usize, gamma: f64) -> CMatrix {
    let m = 2 * n + 1;
    CMatrix::from_fn(m, m, |i, j| {
        if i == j {
            real(if i == 0 || i == n || i == 2 * n { 2.0 } else { 3.0 } * gamma)
        } else if i.abs_diff(j) == 1 {
            real(-(2.0f64).sqrt() * gamma)
        } else {
            ZERO
        }
    })
}

pub fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 2..=6 {
        for gamma in [1.0, 0.37] {
            let g = build_glued_trees(n).unwrap();
            let h = continuous_hamiltonian(&g, gamma, true).map_err(|e| e.to_string())?;
            let orbits = glued_trees_orbits(n);
            ensure(orbits.len() == 2 * n + 1, || format!("n={n}: {} orbits", orbits.len()))?;
            let h_h = quotient_hamiltonian(&h, &orbits).map_err(|e| e.to_string())?;
            let diff = max_abs_diff(&h_h, &expected_line_hamiltonian(n, gamma));
            ensure(diff <= GOLDEN_TOL, || format!("n={n}, gamma={gamma}: H_H differs by {diff:e}"))?;
            worst = worst.max(diff);
        }
    }
    within_budget(start, Duration::from_secs(1), "glued trees")?;
    Ok(format!("n=2..6 tridiagonal, max deviation {worst:.1e}"))
}

/// Measured-walk data for one configuration.
pub struct Measured {
    pub setup: Setup,
    pub measurement: Measurement,
    pub finals: Vec<usize>,
}

pub fn measured(graph: ColoredGraph, subgroup: &SubgroupSpec, finals: &[&str]) -> Measured {
    let setup = setup(graph, subgroup);
    let finals: Vec<usize> = finals.iter().map(|f| setup.graph.resolve_vertex(f).unwrap()).collect();
    let measurement = Measurement::from_vertices(&setup.graph, &finals).unwrap();
    Measured {
        setup,
        measurement,
        finals,
    }
}

pub struct InfiniteSummary {
    pub rank: usize,
    pub intersection: usize,
    pub quotient_rank: usize,
    pub p_hat: CMatrix,
}

pub fn infinite_summary(m: &Measured) -> Result<InfiniteSummary, String> {
    let p = infinite_projector(&m.setup.u, &m.measurement, DEGENERACY_TOL).map_err(|e| e.to_string())?;
    let p_h = projector_ph(&m.setup.orbits);
    let intersection = quotient_infinite_check(&p.projector, &p_h, NULL_TOL).map_err(|e| e.to_string())?;
    let quotient_rank = quotient_projector_rank(&m.setup.u_h, &m.setup.orbits, &m.measurement, DEGENERACY_TOL)
        .map_err(|e| e.to_string())?;
    ensure(intersection == quotient_rank, || {
        format!("intersection {intersection} disagrees with quotient projector rank {quotient_rank}")
    })?;
    Ok(InfiniteSummary {
        rank: p.rank,
        intersection,
        quotient_rank,
        p_hat: p.projector,
    })
}

/// Checks that `C_v` has exactly one eigenvalue at or below the null
/// tolerance and that its eigenvector is the uniform coin state.
fn single_uniform_zero(p_hat: &CMatrix, graph: &ColoredGraph, v: usize) -> Result<(), String> {
    let report = c_matrix(p_hat, graph, v).map_err(|e| e.to_string())?;
    let zeros = report.zero_eigenvalues(NULL_TOL);
    ensure(zeros == 1, || format!("C_v has {zeros} zero eigenvalues: {:?}", report.eigenvalues))?;
    let d = graph.degree(v);
    let uniform = CVector::from_element(d, real(1.0 / (d as f64).sqrt()));
    let diff = vector_max_abs_diff(&report.eigenvectors.column(0).into_owned(), &uniform);
    ensure(diff <= NULL_TOL, || format!("zero eigenvector deviates from uniform by {diff:e}"))
}

/// Runs every infinite-hitting determination and reports all of them; the
/// outcome fails if any single determination fails.
pub fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut passed = Vec::new();
    let mut failed = Vec::new();
    let mut record = |result: Result<String, String>| match result {
        Ok(note) => passed.push(note),
        Err(reason) => failed.push(reason),
    };

    record((|| {
        let s3_two = measured(cayley(&["(1,2)", "(2,3)"], 3), &load_subgroup("s3_two_gens_swap"), &["t1t2t1"]);
        let s = infinite_summary(&s3_two)?;
        ensure(s.rank == 0 && s.quotient_rank == 0, || {
            format!("s3 two generators: P̂ rank {}, quotient rank {}", s.rank, s.quotient_rank)
        })?;
        Ok("s3-two P̂=0".to_string())
    })());

    let s3 = || cayley(&["(1,2)", "(2,3)", "(1,3)"], 3);
    record((|| {
        let h1 = measured(s3(), &load_subgroup("s3_three_gens_h1"), &["t1t2"]);
        let s = infinite_summary(&h1)?;
        ensure(s.rank > 0 && s.intersection > 0, || {
            format!("s3 three generators H1: P̂ rank {}, P̂∩P_H dimension {}", s.rank, s.intersection)
        })?;
        let e = h1.setup.graph.resolve_vertex("e").unwrap();
        let cv = c_matrix(&s.p_hat, &h1.setup.graph, e).map_err(|e| e.to_string())?;
        ensure(cv.eigenvalues[0] > NULL_TOL, || format!("s3 three generators H1: C_e spectrum {:?}", cv.eigenvalues))?;
        Ok(format!("s3-three/H1 rank {} ∩{} min C_e {:.3}", s.rank, s.intersection, cv.eigenvalues[0]))
    })());

    for name in ["s3_three_gens_h2", "s3_three_gens_h3"] {
        record((|| {
            let m = measured(s3(), &load_subgroup(name), &["t1t2", "t2t1"]);
            let s = infinite_summary(&m)?;
            ensure(s.rank == 0 && s.quotient_rank == 0, || format!("{name}: P̂ rank {}", s.rank))?;
            Ok(format!("{name} P̂=0"))
        })());
    }

    let s4_star = measured(
        cayley(&["(1,2)", "(1,3)", "(1,4)"], 4),
        &load_subgroup("s4_star_directions"),
        &["t1t3t2t1", "t2t3t1t2"],
    );
    match infinite_summary(&s4_star) {
        Ok(s) => {
            record(if s.rank > 0 {
                Ok(format!("s4-star P̂ rank {}", s.rank))
            } else {
                Err("s4 star: P̂ = 0".to_string())
            });
            record(if s.intersection == 0 {
                Ok("s4-star P̂∩P_H=0".to_string())
            } else {
                Err(format!("s4 star: P̂∩P_H has dimension {}, expected 0", s.intersection))
            });
            record(
                single_uniform_zero(&s.p_hat, &s4_star.setup.graph, 0)
                    .map(|_| "s4-star C_e single uniform zero".to_string())
                    .map_err(|e| format!("s4 star: {e}")),
            );
        }
        Err(e) => record(Err(format!("s4 star: {e}"))),
    }

    record((|| {
        let cube1 = measured(build_hypercube(3).unwrap(), &load_subgroup("hypercube3_h1"), &["111"]);
        let s = infinite_summary(&cube1)?;
        ensure(s.intersection == 0, || format!("hypercube H1: P̂∩P_H dimension {}", s.intersection))?;
        let origin = cube1.setup.graph.resolve_vertex("000").unwrap();
        single_uniform_zero(&s.p_hat, &cube1.setup.graph, origin).map_err(|e| format!("hypercube H1: {e}"))?;
        Ok(format!("cube/H1 rank {} ∩0, C_000 single uniform zero", s.rank))
    })());

    record((|| {
        let cube2 = measured(build_hypercube(3).unwrap(), &load_subgroup("hypercube3_h2"), &["110"]);
        let s = infinite_summary(&cube2)?;
        ensure(s.intersection > 0, || "hypercube H2: P̂∩P_H is empty".to_string())?;
        Ok(format!("cube/H2 rank {} ∩{}", s.rank, s.intersection))
    })());

    record(within_budget(start, Duration::from_secs(30), "infinite-hitting determinations").map(|_| "in budget".into()));
    if failed.is_empty() {
        Ok(passed.join(", "))
    } else {
        Err(format!("{} (passed: {})", failed.join("; "), passed.join(", ")))
    }
}

pub fn random_state(rng: &mut StdRng, dim: usize) -> CVector {
    let v = CVector::from_fn(dim, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let norm = v.norm();
    v / real(norm)
}

/// A walk, a measurement, and a list of named initial states.
pub struct HittingCase {
    pub name: String,
    pub u: WalkOperator,
    pub measurement: Measurement,
    pub states: Vec<CVector>,
}

/// Measured walks within the dense limit: full graphs and quotients of the examples.
/// Initial states are uniform coin states at every vertex, plus random states,
/// each with its `P̂` component removed so that the hitting time is finite.
pub fn hitting_cases(random_per_case: usize, seed: u64) -> Vec<HittingCase> {
    let mut rng = StdRng::seed_from_u64(seed);
    let configs: Vec<(String, Measured)> = vec![
        ("s3-two".into(), measured(cayley(&["(1,2)", "(2,3)"], 3), &load_subgroup("s3_two_gens_swap"), &["t1t2t1"])),
        (
            "s3-three/H1".into(),
            measured(cayley(&["(1,2)", "(2,3)", "(1,3)"], 3), &load_subgroup("s3_three_gens_h1"), &["t1t2"]),
        ),
        (
            "s3-three/H3".into(),
            measured(cayley(&["(1,2)", "(2,3)", "(1,3)"], 3), &load_subgroup("s3_three_gens_h3"), &["t1t2", "t2t1"]),
        ),
        (
            "s3-three/H2".into(),
            measured(cayley(&["(1,2)", "(2,3)", "(1,3)"], 3), &load_subgroup("s3_three_gens_h2"), &["t1t2", "t2t1"]),
        ),
        (
            "s4-star".into(),
            measured(
                cayley(&["(1,2)", "(1,3)", "(1,4)"], 4),
                &load_subgroup("s4_star_directions"),
                &["t1t3t2t1", "t2t3t1t2"],
            ),
        ),
        ("cube3/H1".into(), measured(build_hypercube(3).unwrap(), &load_subgroup("hypercube3_h1"), &["111"])),
        ("cube3/H2".into(), measured(build_hypercube(3).unwrap(), &load_subgroup("hypercube3_h2"), &["110"])),
    ];
    let mut cases = Vec::new();
    for (name, m) in configs {
        let restricted = m.measurement.restrict(&m.setup.orbits).unwrap();
        let variants = [
            (format!("{name} full"), m.setup.u.clone(), m.measurement.clone(), Some(&m.setup.graph)),
            (format!("{name} quotient"), m.setup.u_h.clone(), restricted, Some(&m.setup.quotient.graph)),
        ];
        for (label, u, meas, graph) in variants {
            if u.dim() > DEFAULT_DENSE_LIMIT {
                continue;
            }
            let p_hat = infinite_projector(&u, &meas, DEGENERACY_TOL).unwrap().projector;
            let mut states = Vec::new();
            let graph = graph.unwrap();
            for v in 0..graph.num_vertices() {
                let d = graph.degree(v);
                let mut psi = CVector::from_element(u.dim(), ZERO);
                for x in graph.offset(v)..graph.offset(v) + d {
                    psi[x] = real(1.0 / (d as f64).sqrt());
                }
                states.push(psi);
            }
            for _ in 0..random_per_case {
                states.push(random_state(&mut rng, u.dim()));
            }
            let states = states
                .into_iter()
                .filter_map(|psi| {
                    let rest = &psi - &p_hat * &psi;
                    let norm = rest.norm();
                    (norm > 1e-3).then(|| rest / real(norm))
                })
                .collect();
            cases.push(HittingCase {
                name: label,
                u,
                measurement: meas,
                states,
            });
        }
    }
    cases
}

/// Closed-form τ against the truncated series for one state. Returns the
/// absolute difference, or `None` when the series has not accumulated
/// `1 − 1e−6` of hitting probability within the horizon.
pub fn compare_tau(u: &WalkOperator, m: &Measurement, psi: &CVector, horizon: usize) -> Result<Option<f64>, String> {
    let opts = HittingOptions {
        horizon: Some(horizon),
        ..Default::default()
    };
    let report = hitting_time(u, m, &pure_density(psi), &opts).map_err(|e| e.to_string())?;
    let tau = match report.tau {
        Tau::Finite(t) => t,
        other => return Err(format!("expected a finite hitting time, found {other:?}")),
    };
    if !report.series.converged {
        return Ok(None);
    }
    Ok(Some((tau - report.series.tau_truncated).abs()))
}

pub fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut compared = 0;
    let mut unconverged = Vec::new();
    let mut worst = 0.0f64;
    for case in hitting_cases(8, 0x5eed) {
        for (k, psi) in case.states.iter().enumerate() {
            match compare_tau(&case.u, &case.measurement, psi, 2_000_000)? {
                Some(diff) => {
                    ensure(diff <= SERIES_TOL, || format!("{} state {k}: |τ − Σtp| = {diff:e}", case.name))?;
                    worst = worst.max(diff);
                    compared += 1;
                }
                None => unconverged.push(format!("{}#{k}", case.name)),
            }
        }
    }
    within_budget(start, Duration::from_secs(60), "cross-method consistency")?;
    ensure(compared > 0, || "no configuration converged".to_string())?;
    Ok(format!(
        "{compared} configurations agree (max diff {worst:.1e}); {} not converged within horizon{}",
        unconverged.len(),
        if unconverged.is_empty() { String::new() } else { format!(": {}", unconverged.join(",")) }
    ))
}

/// Projected full evolution against the quotient evolution.
pub fn dynamical_equivalence(s: &Setup, rng: &mut StdRng, states: usize, steps: usize) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for _ in 0..states {
        let mut coords = random_state(rng, s.orbits.len());
        let mut full = s.orbits.lift(&coords);
        for t in 1..=steps {
            full = s.u.matrix() * full;
            coords = s.u_h.matrix() * coords;
            let projected = s.orbits.coords(&full);
            let d1 = vector_max_abs_diff(&projected, &coords);
            let d2 = vector_max_abs_diff(&s.orbits.lift(&coords), &full);
            let d = d1.max(d2);
            ensure(d <= EVOLUTION_TOL, || format!("step {t}: deviation {d:e}"))?;
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

pub fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xd1ce);
    let mut worst = 0.0f64;
    let names = [
        "s3_two_gens",
        "s3_three_gens_h1",
        "s3_three_gens_h2",
        "s3_three_gens_h3",
        "s4_star",
        "cube3_h1",
        "cube3_h2",
    ];
    for name in names {
        let s = reference_setup(&load_reference(name));
        worst = worst.max(dynamical_equivalence(&s, &mut rng, 20, 50).map_err(|e| format!("{name}: {e}"))?);
    }
    // Continuous-time walk on the glued trees and its line quotient.
    for n in 2..=6 {
        let g = build_glued_trees(n).unwrap();
        let h = continuous_hamiltonian(&g, 1.0, true).unwrap();
        let orbits = glued_trees_orbits(n);
        let h_h = quotient_hamiltonian(&h, &orbits).unwrap();
        // One propagator per time step of 0.1, applied repeatedly.
        let step_full = expm_hermitian(&h, 0.1).unwrap();
        let step_quotient = expm_hermitian(&h_h, 0.1).unwrap();
        for k in 0..20 {
            let mut coords = random_state(&mut rng, orbits.len());
            let mut full = orbits.lift(&coords);
            if k == 0 {
                // Spot-check the stepped propagator against a direct evaluation.
                let direct = evolve_continuous(&h, &full, 5.0).unwrap();
                let stepped = (0..50).fold(full.clone(), |psi, _| &step_full * psi);
                let d = vector_max_abs_diff(&direct, &stepped);
                ensure(d <= EVOLUTION_TOL, || format!("glued trees n={n}: stepping drifts by {d:e}"))?;
            }
            for step in 1..=50 {
                let t = 0.1 * step as f64;
                full = &step_full * full;
                coords = &step_quotient * coords;
                let a = orbits.coords(&full);
                let b = &coords;
                let d = vector_max_abs_diff(&a, b);
                ensure(d <= EVOLUTION_TOL, || format!("glued trees n={n} t={t}: deviation {d:e}"))?;
                worst = worst.max(d);
            }
        }
    }
    within_budget(start, Duration::from_secs(30), "dynamical equivalence")?;
    Ok(format!("{} examples + glued trees n=2..6, max deviation {worst:.1e}", names.len()))
}

pub fn criterion_6() -> Outcome {
    let start = Instant::now();
    let files = [
        ("s3_two_gens_swap", cayley(&["(1,2)", "(2,3)"], 3)),
        ("s3_three_gens_h1", cayley(&["(1,2)", "(2,3)", "(1,3)"], 3)),
        ("s3_three_gens_h2", cayley(&["(1,2)", "(2,3)", "(1,3)"], 3)),
        ("s3_three_gens_h3", cayley(&["(1,2)", "(2,3)", "(1,3)"], 3)),
        ("s4_star_directions", cayley(&["(1,2)", "(1,3)", "(1,4)"], 4)),
        ("hypercube3_h1", build_hypercube(3).unwrap()),
        ("hypercube3_h2", build_hypercube(3).unwrap()),
        ("square_direction_swap", build_hypercube(2).unwrap()),
        ("square_translations", build_hypercube(2).unwrap()),
    ];
    let mut count = 0;
    for (name, graph) in &files {
        let gens = load_subgroup(name).generators(graph).map_err(|e| format!("{name}: {e}"))?;
        let u = walk_unitary(graph, &CoinRule::Grover).unwrap();
        for sigma in close_group(graph.dim(), &gens).unwrap() {
            let dev = commutation_deviation(u.matrix(), &sigma).unwrap();
            ensure(dev <= GOLDEN_TOL, || format!("{name}: Grover walk fails {} by {dev:e}", sigma.description))?;
            count += 1;
        }
    }
    let square = build_hypercube(2).unwrap();
    let dft = walk_unitary(&square, &CoinRule::Dft).unwrap();
    let swaps = load_subgroup("square_direction_swap").generators(&square).unwrap();
    let translations = load_subgroup("square_translations").generators(&square).unwrap();
    for sigma in &swaps {
        let dev = commutation_deviation(dft.matrix(), sigma).unwrap();
        ensure(dev > 1e-3, || format!("DFT walk unexpectedly commutes with {}", sigma.description))?;
    }
    for sigma in &translations {
        let dev = commutation_deviation(dft.matrix(), sigma).unwrap();
        ensure(dev <= GOLDEN_TOL, || format!("DFT walk fails {} by {dev:e}", sigma.description))?;
    }
    within_budget(start, Duration::from_secs(5), "symmetry suite")?;
    Ok(format!(
        "Grover commutes with {count} group elements; DFT breaks {} swap(s), keeps {} translation(s)",
        swaps.len(),
        translations.len()
    ))
}

/// τ on the line quotient of the `n`-cube from `|0…0⟩ ⊗ uniform` to `1…1`.
pub fn hypercube_line_tau(n: usize) -> Result<f64, String> {
    let graph = build_hypercube(n).map_err(|e| e.to_string())?;
    let s = setup(graph, &hypercube_full_directions(n));
    let target = s.graph.resolve_vertex(&"1".repeat(n)).unwrap();
    let m = Measurement::from_vertices(&s.graph, &[target]).unwrap();
    let m_h = m.restrict(&s.orbits).map_err(|e| e.to_string())?;
    let origin = s.graph.flat(0, 0).unwrap();
    let mut psi = CVector::from_element(s.orbits.len(), ZERO);
    psi[s.orbits.orbit_of(origin)] = ONE;
    let report = hitting_time(
        &s.u_h,
        &m_h,
        &pure_density(&psi),
        &HittingOptions {
            horizon: Some(1_000_000),
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    match report.tau {
        Tau::Finite(t) => Ok(t),
        other => Err(format!("n={n}: hitting time {other:?}")),
    }
}

pub fn criterion_7() -> Outcome {
    let start = Instant::now();
    let taus: Vec<(usize, f64)> = (3..=8)
        .map(|n| hypercube_line_tau(n).map(|t| (n, t)))
        .collect::<Result<_, _>>()?;
    for w in taus.windows(2) {
        let ((n, a), (_, b)) = (w[0], w[1]);
        let bound = polynomial_envelope(n);
        ensure(b / a <= bound, || format!("τ({})/τ({n}) = {:.3} exceeds {bound:.3}", n + 1, b / a))?;
    }
    within_budget(start, Duration::from_secs(60), "hypercube scaling")?;
    let listing: Vec<String> = taus.iter().map(|(n, t)| format!("τ({n})={t:.3}")).collect();
    Ok(listing.join(" "))
}

/// Allowed growth ratio `τ(n+1)/τ(n)`: that of a cubic, `((n+1)/n)³`.
/// Any exponential `τ ~ bⁿ` with `b > 1` eventually exceeds it, since the
/// envelope tends to 1.
pub fn polynomial_envelope(n: usize) -> f64 {
    ((n as f64 + 1.0) / n as f64).powi(3)
}
