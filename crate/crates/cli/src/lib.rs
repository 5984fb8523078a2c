//! The `qwalk` command line: builds graphs, reduces walks to quotient graphs
//! and runs hitting-time analyses, writing JSON artifacts plus a manifest.
//!
//! Every command that is given `--out DIR` writes its outputs there together
//! with `manifest.json`, which records the canonical run configuration, its
//! SHA-256, the tolerances in force, tool versions and a hash of every
//! output. Nothing time- or host-dependent is recorded, so identical
//! configurations produce byte-identical directories. Without `--out`, the
//! primary JSON document goes to stdout.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use qwalk_core::config::{parse_final_spec, parse_initial_spec, parse_subgroup_json, SubgroupSpec};
use qwalk_core::graph::{build_cayley, build_glued_trees, build_hypercube, parse_graph_json, ColoredGraph};
use qwalk_core::hitting::{
    c_matrix, hitting_time, infinite_projector, pure_density, quotient_infinite_check, HittingOptions, Measurement,
    Tau, DEFAULT_DENSE_LIMIT, DEGENERACY_TOL, NULL_TOL,
};
use qwalk_core::io::{parse_matrix_json, to_json_string, MatrixJson};
use qwalk_core::linalg::{vector_max_abs_diff, CMatrix, CVector};
use qwalk_core::perm::{generate_group, Permutation};
use qwalk_core::symmetry::{close_group, compute_orbits, projector_ph, quotient_graph, OrbitBasis};
use qwalk_core::walk::{
    commutation_deviation, evolve_discrete, factor_quotient_walk, induced_walk, walk_unitary, CoinRule, CoinSpec,
    WalkOperator, CONSTRUCTION_TOL, EVOLUTION_TOL,
};

/// Exit code for a finite hitting time (and for every successful
/// non-hitting command).
pub const EXIT_OK: i32 = 0;
/// Exit code for any error.
pub const EXIT_ERROR: i32 = 1;
/// Exit code when the hitting time is infinite.
pub const EXIT_INFINITE: i32 = 10;
/// Exit code when the hitting time cannot be decided numerically.
pub const EXIT_INDETERMINATE: i32 = 11;
/// Exit code when a subgroup verifies as automorphisms but the walk does not
/// commute with all of them.
pub const EXIT_NOT_COMMUTING: i32 = 12;

/// Environment variable overriding the dense superoperator dimension cap.
pub const DENSE_LIMIT_ENV: &str = "QWALK_DENSE_LIMIT";

/// Largest walk dimension for which `hitting` also builds the full-walk
/// projector (needed for the intersection test and C-matrix spectra).
const FULL_PROJECTOR_LIMIT: usize = 1024;

#[derive(Debug, Parser)]
#[command(name = "qwalk", version, about = "Quantum walks on quotient graphs and their hitting times")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a graph and dump it with its shift matrix.
    Build(BuildArgs),
    /// Compute orbits of a subgroup and the quotient graph.
    Quotient(QuotientArgs),
    /// Build the walk operator and, with a subgroup, its quotient factors.
    Walk(WalkArgs),
    /// Hitting-time analysis of a measured walk.
    Hitting(HittingArgs),
    /// Coin blocks of the infinite-hitting projector at chosen vertices.
    CMatrix(CMatrixArgs),
    /// Check subgroup generators against the graph and the walk.
    VerifySubgroup(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(subcommand)]
    pub kind: BuildKind,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum BuildKind {
    /// Cayley graph of the group generated by `--gens` inside S_n.
    Cayley {
        /// Ambient symmetric group, `sN` or `N`.
        #[arg(long)]
        group: String,
        /// Generators in 1-based cycle notation separated by `;`.
        #[arg(long)]
        gens: String,
    },
    /// The n-dimensional hypercube.
    Hypercube {
        #[arg(long)]
        n: usize,
    },
    /// Two depth-n binary trees glued at their leaves.
    GluedTrees {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Graph JSON file, or a builder spec: `cayley:sN:GENS`, `hypercube:N`,
    /// `glued-trees:N`.
    #[arg(long)]
    pub graph: String,
}

#[derive(Debug, Args)]
pub struct CoinArgs {
    /// Coin: `grover`, `dft` or `custom:FILE` (matrix JSON).
    #[arg(long, default_value = "grover")]
    pub coin: String,
}

#[derive(Debug, Args)]
pub struct QuotientArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Subgroup JSON file.
    #[arg(long)]
    pub subgroup: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub coin: CoinArgs,
    /// Subgroup JSON file; adds the quotient walk and its factors.
    #[arg(long)]
    pub subgroup: Option<PathBuf>,
    /// Initial state; with `--steps`, records vertex probabilities.
    #[arg(long)]
    pub initial: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HittingArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub coin: CoinArgs,
    /// Subgroup JSON file; enables the intersection test and `--quotient`.
    #[arg(long)]
    pub subgroup: Option<PathBuf>,
    /// Final vertices, `label;label`.
    #[arg(long = "final")]
    pub finals: String,
    /// Initial state: `V:uniform`, `V:a1,a2,...` or `orbit:K`, joined by `;`.
    #[arg(long)]
    pub initial: String,
    /// Analyze the quotient walk instead of the full walk.
    #[arg(long)]
    pub quotient: bool,
    /// Vertices whose C-matrix spectra are reported (default: the support of
    /// the initial state).
    #[arg(long)]
    pub c_vertices: Option<String>,
    #[arg(long, default_value_t = DEGENERACY_TOL)]
    pub tol_degeneracy: f64,
    /// Steps of the truncated series (default 10·D²).
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CMatrixArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub coin: CoinArgs,
    #[arg(long = "final")]
    pub finals: String,
    /// Vertices, `label;label` (default: every vertex).
    #[arg(long)]
    pub vertex: Option<String>,
    #[arg(long, default_value_t = DEGENERACY_TOL)]
    pub tol_degeneracy: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub coin: CoinArgs,
    #[arg(long)]
    pub subgroup: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Result of a command: the exit code and the files it produced, the first
/// of which is the primary document.
pub struct Outcome {
    pub exit_code: i32,
    pub files: Vec<(String, String)>,
    pub config: Value,
    pub tolerances: Value,
}

/// Parses arguments, runs the command, writes outputs and returns the exit
/// code.
pub fn run(cli: Cli) -> Result<i32> {
    let (outcome, out) = match cli.command {
        Command::Build(a) => (cmd_build(&a)?, a.out),
        Command::Quotient(a) => (cmd_quotient(&a)?, a.out),
        Command::Walk(a) => (cmd_walk(&a)?, a.out),
        Command::Hitting(a) => (cmd_hitting(&a)?, a.out),
        Command::CMatrix(a) => (cmd_c_matrix(&a)?, a.out),
        Command::VerifySubgroup(a) => (cmd_verify(&a)?, a.out),
    };
    match out {
        Some(dir) => write_outputs(&dir, &outcome)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            // A closed reader (e.g. `| head`) is not an error for this tool.
            match writeln!(stdout, "{}", outcome.files[0].1).and_then(|()| stdout.flush()) {
                Err(err) if err.kind() != std::io::ErrorKind::BrokenPipe => {
                    return Err(err).context("writing to stdout")
                }
                _ => {}
            }
        }
    }
    Ok(outcome.exit_code)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Canonical manifest for an outcome.
pub fn manifest(command: &str, outcome: &Outcome) -> Value {
    let config = json!({ "command": command, "run": outcome.config });
    let canonical = serde_json::to_string(&config).expect("JSON values serialize");
    let outputs: BTreeMap<&str, String> = outcome
        .files
        .iter()
        .map(|(name, body)| (name.as_str(), sha256_hex(body.as_bytes())))
        .collect();
    json!({
        "tool": "qwalk",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": qwalk_core::VERSION,
        "config": config,
        "config_hash": sha256_hex(canonical.as_bytes()),
        "tolerances": outcome.tolerances,
        "exit_code": outcome.exit_code,
        "outputs": outputs,
    })
}

fn write_outputs(dir: &Path, outcome: &Outcome) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, body) in &outcome.files {
        let path = dir.join(name);
        fs::write(&path, format!("{body}\n")).with_context(|| format!("writing {}", path.display()))?;
    }
    let command = outcome.config["command"].as_str().unwrap_or("unknown").to_string();
    let body = serde_json::to_string_pretty(&manifest(&command, outcome))?;
    fs::write(dir.join("manifest.json"), format!("{body}\n")).context("writing manifest")?;
    Ok(())
}

/// The dense superoperator cap, from the environment if set.
pub fn dense_limit() -> Result<usize> {
    match std::env::var(DENSE_LIMIT_ENV) {
        Ok(text) => text
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| anyhow!("{DENSE_LIMIT_ENV} must be a positive integer, got '{text}'")),
        Err(_) => Ok(DEFAULT_DENSE_LIMIT),
    }
}

fn base_tolerances() -> Value {
    json!({ "construction": CONSTRUCTION_TOL, "evolution": EVOLUTION_TOL })
}

/// Loaded graph plus a location-independent description for the manifest.
struct LoadedGraph {
    graph: ColoredGraph,
    source: Value,
}

fn parse_degree(text: &str) -> Result<usize> {
    let digits = text.trim().trim_start_matches(['s', 'S']);
    digits
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| anyhow!("group must be `sN` or `N` with N ≥ 1, got '{text}'"))
}

fn build_cayley_graph(group: &str, gens: &str) -> Result<ColoredGraph> {
    let degree = parse_degree(group)?;
    let generators = gens
        .split(';')
        .map(str::trim)
        .filter(|g| !g.is_empty())
        .map(|g| Permutation::parse_cycles(g, degree))
        .collect::<qwalk_core::Result<Vec<_>>>()?;
    if generators.is_empty() {
        bail!("no generators given");
    }
    let group = generate_group(&generators)?;
    Ok(build_cayley(&group, &generators)?)
}

fn parse_size(text: &str, what: &str) -> Result<usize> {
    text.trim()
        .parse()
        .map_err(|_| anyhow!("{what} must be a non-negative integer, got '{text}'"))
}

/// Builds a graph from `cayley:sN:GENS`, `hypercube:N` or `glued-trees:N`.
pub fn graph_from_builder_spec(spec: &str) -> Result<Option<ColoredGraph>> {
    let Some((kind, rest)) = spec.split_once(':') else {
        return Ok(None);
    };
    let graph = match kind {
        "cayley" => {
            let (group, gens) = rest
                .split_once(':')
                .ok_or_else(|| anyhow!("cayley spec must be `cayley:sN:GENS`"))?;
            build_cayley_graph(group, gens)?
        }
        "hypercube" => build_hypercube(parse_size(rest, "hypercube dimension")?)?,
        "glued-trees" => build_glued_trees(parse_size(rest, "glued-trees depth")?)?,
        _ => return Ok(None),
    };
    Ok(Some(graph))
}

fn load_graph(args: &GraphArgs) -> Result<LoadedGraph> {
    let path = Path::new(&args.graph);
    if !path.is_file() {
        if let Some(graph) = graph_from_builder_spec(&args.graph)? {
            return Ok(LoadedGraph {
                graph,
                source: json!({ "builder": args.graph }),
            });
        }
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading graph {}", path.display()))?;
    let graph = parse_graph_json(&text).with_context(|| format!("parsing graph {}", path.display()))?;
    Ok(LoadedGraph {
        graph,
        source: json!({ "file_sha256": sha256_hex(text.as_bytes()) }),
    })
}

fn load_subgroup(path: &Path) -> Result<SubgroupSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading subgroup {}", path.display()))?;
    parse_subgroup_json(&text).with_context(|| format!("parsing subgroup {}", path.display()))
}

/// Coin rule plus its manifest description.
fn load_coin(text: &str) -> Result<(CoinRule, Value)> {
    match text {
        "grover" => Ok((CoinRule::Grover, json!("grover"))),
        "dft" => Ok((CoinRule::Dft, json!("dft"))),
        other => {
            let path = other
                .strip_prefix("custom:")
                .ok_or_else(|| anyhow!("unknown coin '{other}' (expected grover, dft or custom:FILE)"))?;
            let body = fs::read_to_string(path).with_context(|| format!("reading coin {path}"))?;
            let matrix = parse_matrix_json(&body).with_context(|| format!("parsing coin {path}"))?;
            let spec = CoinSpec::custom(matrix)?;
            Ok((CoinRule::uniform(spec), json!({ "custom_sha256": sha256_hex(body.as_bytes()) })))
        }
    }
}

fn matrix_json(m: &CMatrix) -> String {
    to_json_string(&MatrixJson::from_matrix(m))
}

/// Orbit listing: 1-based orbit numbers, `label:color` members with 1-based
/// colors, as used in the reference listings.
#[derive(Serialize)]
struct OrbitEntry {
    orbit: usize,
    size: usize,
    quotient_vertex: usize,
    members: Vec<String>,
}

fn orbit_listing(graph: &ColoredGraph, orbits: &OrbitBasis, orbit_vertex: &[usize]) -> Vec<OrbitEntry> {
    orbits
        .orbits()
        .iter()
        .enumerate()
        .map(|(k, members)| OrbitEntry {
            orbit: k + 1,
            size: members.len(),
            quotient_vertex: orbit_vertex[k] + 1,
            members: members
                .iter()
                .map(|&x| {
                    let b = graph.basis(x);
                    format!("{}:{}", graph.label(b.vertex), b.color + 1)
                })
                .collect(),
        })
        .collect()
}

fn cmd_build(args: &BuildArgs) -> Result<Outcome> {
    let (graph, spec) = match &args.kind {
        BuildKind::Cayley { group, gens } => (
            build_cayley_graph(group, gens)?,
            json!({ "kind": "cayley", "degree": parse_degree(group)?, "generators": gens }),
        ),
        BuildKind::Hypercube { n } => (build_hypercube(*n)?, json!({ "kind": "hypercube", "n": n })),
        BuildKind::GluedTrees { n } => (build_glued_trees(*n)?, json!({ "kind": "glued-trees", "n": n })),
    };
    log::info!("built graph with {} vertices, dimension {}", graph.num_vertices(), graph.dim());
    Ok(Outcome {
        exit_code: EXIT_OK,
        files: vec![
            ("graph.json".into(), to_json_string(&graph.to_json())),
            ("shift.json".into(), matrix_json(&graph.shift_matrix())),
        ],
        config: json!({ "command": "build", "graph": spec }),
        tolerances: base_tolerances(),
    })
}

fn cmd_quotient(args: &QuotientArgs) -> Result<Outcome> {
    let loaded = load_graph(&args.graph)?;
    let subgroup = load_subgroup(&args.subgroup)?;
    let graph = &loaded.graph;
    let generators = subgroup.generators(graph)?;
    let orbits = compute_orbits(graph.dim(), &generators)?;
    let quotient = quotient_graph(graph, &orbits)?;
    let orbit_vertex: Vec<usize> = (0..orbits.len())
        .map(|k| quotient.graph.vertex_of(k))
        .collect();
    let listing = orbit_listing(graph, &orbits, &orbit_vertex);
    let vertex_sets: Vec<Vec<&str>> = quotient
        .vertex_sets
        .iter()
        .map(|set| set.iter().map(|&v| graph.label(v)).collect())
        .collect();
    let summary = json!({
        "orbits": listing,
        "quotient_vertices": vertex_sets,
        "generators": generators.iter().map(|g| g.description.clone()).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        exit_code: EXIT_OK,
        files: vec![
            ("orbits.json".into(), to_json_string(&summary)),
            ("quotient_graph.json".into(), to_json_string(&quotient.graph.to_json())),
            ("projector.json".into(), matrix_json(&projector_ph(&orbits))),
        ],
        config: json!({ "command": "quotient", "graph": loaded.source, "subgroup": subgroup }),
        tolerances: base_tolerances(),
    })
}

fn cmd_walk(args: &WalkArgs) -> Result<Outcome> {
    let loaded = load_graph(&args.graph)?;
    let graph = &loaded.graph;
    let (rule, coin) = load_coin(&args.coin.coin)?;
    let u = walk_unitary(graph, &rule)?;
    let mut files = vec![("U.json".to_string(), matrix_json(u.matrix()))];
    let mut subgroup_value = Value::Null;
    let mut orbits = None;
    if let Some(path) = &args.subgroup {
        let subgroup = load_subgroup(path)?;
        let generators = subgroup.generators(graph)?;
        for g in &generators {
            let deviation = commutation_deviation(u.matrix(), g)?;
            if deviation > CONSTRUCTION_TOL {
                bail!(qwalk_core::Error::CommutationFailure {
                    generator: g.description.clone(),
                    deviation
                });
            }
        }
        let basis = compute_orbits(graph.dim(), &generators)?;
        let quotient = quotient_graph(graph, &basis)?;
        let u_h = induced_walk(&u, &basis)?;
        let factors = factor_quotient_walk(&u_h, &quotient)?;
        let blocks: Vec<Value> = factors
            .blocks
            .iter()
            .enumerate()
            .map(|(v, b)| {
                let orbit_numbers: Vec<usize> = (0..quotient.graph.degree(v))
                    .map(|k| quotient.graph.offset(v) + k + 1)
                    .collect();
                json!({ "quotient_vertex": v + 1, "orbits": orbit_numbers, "block": MatrixJson::from_matrix(b) })
            })
            .collect();
        files.push(("U_H.json".into(), matrix_json(u_h.matrix())));
        files.push(("S_H.json".into(), matrix_json(&factors.s_h)));
        files.push(("C_H.json".into(), matrix_json(&factors.c_h)));
        files.push(("C_H_blocks.json".into(), to_json_string(&blocks)));
        subgroup_value = serde_json::to_value(&subgroup)?;
        orbits = Some(basis);
    }
    if let Some(text) = &args.initial {
        let psi = parse_initial_spec(graph, orbits.as_ref(), text)?;
        files.push(("evolution.json".into(), to_json_string(&vertex_probabilities(graph, &u, &psi, args.steps)?)));
    }
    Ok(Outcome {
        exit_code: EXIT_OK,
        files,
        config: json!({
            "command": "walk",
            "graph": loaded.source,
            "coin": coin,
            "subgroup": subgroup_value,
            "initial": args.initial,
            "steps": args.steps,
        }),
        tolerances: base_tolerances(),
    })
}

/// Vertex occupation probabilities for `t = 0..=steps`.
fn vertex_probabilities(graph: &ColoredGraph, u: &WalkOperator, psi: &CVector, steps: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut state = psi.clone();
    for t in 0..=steps {
        if t > 0 {
            state = evolve_discrete(u, &state, 1)?;
        }
        out.push(
            (0..graph.num_vertices())
                .map(|v| (0..graph.degree(v)).map(|k| state[graph.offset(v) + k].norm_sqr()).sum())
                .collect(),
        );
    }
    Ok(out)
}

fn support_vertices(graph: &ColoredGraph, psi: &CVector) -> Vec<usize> {
    (0..graph.num_vertices())
        .filter(|&v| (0..graph.degree(v)).any(|k| psi[graph.offset(v) + k].norm() > NULL_TOL))
        .collect()
}

fn parse_vertex_list(graph: &ColoredGraph, text: &str) -> Result<Vec<usize>> {
    Ok(parse_final_spec(graph, text)?)
}

fn cmd_hitting(args: &HittingArgs) -> Result<Outcome> {
    if !(args.tol_degeneracy > 0.0 && args.tol_degeneracy.is_finite()) {
        bail!("--tol-degeneracy must be positive");
    }
    let loaded = load_graph(&args.graph)?;
    let graph = &loaded.graph;
    let (rule, coin) = load_coin(&args.coin.coin)?;
    let u = walk_unitary(graph, &rule)?;
    let finals = parse_final_spec(graph, &args.finals)?;
    let measurement = Measurement::from_vertices(graph, &finals)?;

    let mut subgroup_value = Value::Null;
    let mut orbits = None;
    if let Some(path) = &args.subgroup {
        let subgroup = load_subgroup(path)?;
        let generators = subgroup.generators(graph)?;
        measurement.check_symmetry(&generators)?;
        orbits = Some(compute_orbits(graph.dim(), &generators)?);
        subgroup_value = serde_json::to_value(&subgroup)?;
    }
    let psi = parse_initial_spec(graph, orbits.as_ref(), &args.initial)?;
    let opts = HittingOptions {
        degeneracy_tol: args.tol_degeneracy,
        horizon: args.horizon,
        dense_limit: dense_limit()?,
        ..HittingOptions::default()
    };

    let mut report = if args.quotient {
        let orbits = orbits
            .as_ref()
            .ok_or_else(|| anyhow!("--quotient needs --subgroup"))?;
        let coords = orbits.coords(&psi);
        let deviation = vector_max_abs_diff(&orbits.lift(&coords), &psi);
        if deviation > EVOLUTION_TOL {
            bail!("initial state is not invariant under the subgroup (deviation {deviation:e})");
        }
        let u_h = induced_walk(&u, orbits)?;
        let m_h = measurement.restrict(orbits)?;
        hitting_time(&u_h, &m_h, &pure_density(&coords), &opts)?
    } else {
        hitting_time(&u, &measurement, &pure_density(&psi), &opts)?
    };

    if graph.dim() <= FULL_PROJECTOR_LIMIT {
        let p_hat = infinite_projector(&u, &measurement, args.tol_degeneracy)?;
        if let Some(orbits) = &orbits {
            report.intersection_dim = Some(quotient_infinite_check(&p_hat.projector, &projector_ph(orbits), NULL_TOL)?);
        }
        let vertices = match &args.c_vertices {
            Some(text) => parse_vertex_list(graph, text)?,
            None => support_vertices(graph, &psi),
        };
        for v in vertices {
            let cm = c_matrix(&p_hat.projector, graph, v)?;
            report.c_matrix_spectra.insert(graph.label(v).to_string(), cm.eigenvalues);
        }
    } else {
        log::warn!(
            "walk dimension {} exceeds {FULL_PROJECTOR_LIMIT}; skipping the full-walk projector",
            graph.dim()
        );
    }

    let exit_code = match report.tau {
        Tau::Finite(_) => EXIT_OK,
        Tau::Infinite => EXIT_INFINITE,
        Tau::Indeterminate => EXIT_INDETERMINATE,
    };
    Ok(Outcome {
        exit_code,
        files: vec![("report.json".into(), to_json_string(&report))],
        config: json!({
            "command": "hitting",
            "graph": loaded.source,
            "coin": coin,
            "subgroup": subgroup_value,
            "final": args.finals,
            "initial": args.initial,
            "quotient": args.quotient,
            "c_vertices": args.c_vertices,
            "horizon": args.horizon,
        }),
        tolerances: json!({
            "construction": CONSTRUCTION_TOL,
            "evolution": EVOLUTION_TOL,
            "degeneracy": opts.degeneracy_tol,
            "null_space": NULL_TOL,
            "infinite_overlap": opts.infinite_tol,
            "dense_limit": opts.dense_limit,
        }),
    })
}

#[derive(Serialize)]
struct CMatrixEntry {
    vertex: String,
    eigenvalues: Vec<f64>,
    zero_eigenvalues: usize,
    matrix: MatrixJson,
    eigenvectors: MatrixJson,
}

fn cmd_c_matrix(args: &CMatrixArgs) -> Result<Outcome> {
    if !(args.tol_degeneracy > 0.0 && args.tol_degeneracy.is_finite()) {
        bail!("--tol-degeneracy must be positive");
    }
    let loaded = load_graph(&args.graph)?;
    let graph = &loaded.graph;
    let (rule, coin) = load_coin(&args.coin.coin)?;
    let u = walk_unitary(graph, &rule)?;
    let finals = parse_final_spec(graph, &args.finals)?;
    let measurement = Measurement::from_vertices(graph, &finals)?;
    let p_hat = infinite_projector(&u, &measurement, args.tol_degeneracy)?;
    let vertices = match &args.vertex {
        Some(text) => parse_vertex_list(graph, text)?,
        None => (0..graph.num_vertices()).collect(),
    };
    let entries = vertices
        .into_iter()
        .map(|v| {
            let cm = c_matrix(&p_hat.projector, graph, v)?;
            Ok(CMatrixEntry {
                vertex: graph.label(v).to_string(),
                zero_eigenvalues: cm.zero_eigenvalues(NULL_TOL),
                eigenvalues: cm.eigenvalues,
                matrix: MatrixJson::from_matrix(&cm.matrix),
                eigenvectors: MatrixJson::from_matrix(&cm.eigenvectors),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let doc = json!({
        "P_rank": p_hat.rank,
        "P_rank_structural": p_hat.structural_rank,
        "P_rank_accidental": p_hat.accidental_rank,
        "vertices": entries,
    });
    Ok(Outcome {
        exit_code: EXIT_OK,
        files: vec![("c_matrix.json".into(), to_json_string(&doc))],
        config: json!({
            "command": "c-matrix",
            "graph": loaded.source,
            "coin": coin,
            "final": args.finals,
            "vertex": args.vertex,
        }),
        tolerances: json!({ "degeneracy": args.tol_degeneracy, "null_space": NULL_TOL }),
    })
}

fn cmd_verify(args: &VerifyArgs) -> Result<Outcome> {
    let loaded = load_graph(&args.graph)?;
    let graph = &loaded.graph;
    let subgroup = load_subgroup(&args.subgroup)?;
    let (rule, coin) = load_coin(&args.coin.coin)?;
    let generators = subgroup.generators(graph)?;
    let u = walk_unitary(graph, &rule)?;
    let mut all_commute = true;
    let mut checks = Vec::with_capacity(generators.len());
    for g in &generators {
        let deviation = commutation_deviation(u.matrix(), g)?;
        let commutes = deviation <= CONSTRUCTION_TOL;
        all_commute &= commutes;
        checks.push(json!({
            "generator": g.description,
            "automorphism": true,
            "commutation_deviation": deviation,
            "commutes": commutes,
        }));
    }
    let group = close_group(graph.dim(), &generators)?;
    let orbits = compute_orbits(graph.dim(), &generators)?;
    let doc = json!({
        "generators": checks,
        "group_order": group.len(),
        "orbits": orbits.len(),
        "walk_commutes": all_commute,
    });
    Ok(Outcome {
        exit_code: if all_commute { EXIT_OK } else { EXIT_NOT_COMMUTING },
        files: vec![("verification.json".into(), to_json_string(&doc))],
        config: json!({
            "command": "verify-subgroup",
            "graph": loaded.source,
            "coin": coin,
            "subgroup": subgroup,
        }),
        tolerances: base_tolerances(),
    })
}
