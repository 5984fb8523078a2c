//! Coined quantum walks on symmetric graphs, their reduction to quotient
//! graphs under groups of automorphisms, and measured-walk hitting times.
//!
//! Basis convention: the walk space of a [`graph::ColoredGraph`] is spanned by
//! `|v, c⟩`, flattened vertex-major with colors in each vertex's color order.
//! All indices are 0-based; cycle notation at the text boundary is 1-based.

pub mod config;
pub mod error;
pub mod graph;
pub mod hitting;
pub mod io;
pub mod linalg;
pub mod perm;
pub mod symmetry;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{build_cayley, build_glued_trees, build_hypercube, ColoredGraph};
pub use hitting::{hitting_time, infinite_projector, HittingOptions, HittingReport, Measurement, Tau};
pub use linalg::{CMatrix, CVector};
pub use perm::{generate_group, Permutation, PermutationGroup};
pub use symmetry::{compute_orbits, BasisPermutation, OrbitBasis, QuotientGraph};
pub use walk::{walk_unitary, CoinRule, CoinSpec, WalkOperator};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
