//! Coins, the coined walk operator `U = S·C`, its symmetry checks, the
//! induced quotient walk and continuous-time Hamiltonians.
//!
//! The continuous-time propagator follows the `U = exp(iHt)` sign
//! convention; every quotient and hitting statement here is unchanged under
//! `t → −t`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::ColoredGraph;
use crate::linalg::{
    expm_hermitian, hermiticity_deviation, max_abs_diff, permutation_matrix, real, unitarity_deviation, CMatrix,
    CVector, ZERO,
};
use crate::symmetry::{BasisPermutation, OrbitBasis, QuotientGraph};

/// Tolerance for constructed operators (unitarity, commutation, structure).
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance for evolved quantities.
pub const EVOLUTION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoinKind {
    Grover,
    Dft,
    Custom,
}

#[derive(Clone, Debug)]
pub struct CoinSpec {
    pub kind: CoinKind,
    pub matrix: CMatrix,
}

impl CoinSpec {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// A user-supplied coin; must be square and unitary within 1e−12.
    pub fn custom(matrix: CMatrix) -> Result<Self> {
        let d = crate::linalg::require_square(&matrix)?;
        if d == 0 {
            return Err(Error::InvalidParameter("coin dimension must be at least 1".into()));
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation > CONSTRUCTION_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(CoinSpec {
            kind: CoinKind::Custom,
            matrix,
        })
    }
}

/// Grover diffusion `2|Ψ⟩⟨Ψ| − I` with `|Ψ⟩` the uniform direction state.
pub fn grover_coin(d: usize) -> Result<CoinSpec> {
    if d == 0 {
        return Err(Error::InvalidParameter("coin dimension must be at least 1".into()));
    }
    let off = 2.0 / d as f64;
    let matrix = CMatrix::from_fn(d, d, |i, j| real(if i == j { off - 1.0 } else { off }));
    Ok(CoinSpec {
        kind: CoinKind::Grover,
        matrix,
    })
}

/// Discrete Fourier transform `ω^{jk}/√d`, `ω = exp(2πi/d)`.
pub fn dft_coin(d: usize) -> Result<CoinSpec> {
    if d == 0 {
        return Err(Error::InvalidParameter("coin dimension must be at least 1".into()));
    }
    let norm = 1.0 / (d as f64).sqrt();
    let matrix = CMatrix::from_fn(d, d, |j, k| {
        let exponent = (j * k) % d;
        Complex64::from_polar(norm, 2.0 * PI * exponent as f64 / d as f64)
    });
    Ok(CoinSpec {
        kind: CoinKind::Dft,
        matrix,
    })
}

/// How to choose the coin at each vertex, keyed by degree so that irregular
/// graphs (quotients in particular) can be walked.
#[derive(Clone, Debug)]
pub enum CoinRule {
    Grover,
    Dft,
    Identity,
    /// One coin per degree class.
    PerDegree(BTreeMap<usize, CoinSpec>),
}

impl CoinRule {
    /// Uses `coin` at every vertex; all degrees must match its dimension.
    pub fn uniform(coin: CoinSpec) -> Self {
        CoinRule::PerDegree(BTreeMap::from([(coin.dim(), coin)]))
    }

    pub fn coin_for(&self, vertex: usize, degree: usize) -> Result<CMatrix> {
        match self {
            CoinRule::Grover => Ok(grover_coin(degree)?.matrix),
            CoinRule::Dft => Ok(dft_coin(degree)?.matrix),
            CoinRule::Identity => Ok(CMatrix::identity(degree, degree)),
            CoinRule::PerDegree(map) => map.get(&degree).map(|c| c.matrix.clone()).ok_or_else(|| {
                Error::DegreeMismatch {
                    vertex,
                    degree,
                    coin: map.keys().next().copied().unwrap_or(0),
                }
            }),
        }
    }
}

/// A unitary on either the flat basis or an orbit basis.
#[derive(Clone, Debug)]
pub struct WalkOperator {
    u: CMatrix,
}

impl WalkOperator {
    /// Wraps `u` after checking unitarity within 1e−12.
    pub fn new(u: CMatrix) -> Result<Self> {
        crate::linalg::require_square(&u)?;
        let deviation = unitarity_deviation(&u);
        if deviation > CONSTRUCTION_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(WalkOperator { u })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn into_matrix(self) -> CMatrix {
        self.u
    }
}

/// Block-diagonal coin operator: the coin for each vertex acts on that
/// vertex's colors.
pub fn coin_operator(graph: &ColoredGraph, rule: &CoinRule) -> Result<CMatrix> {
    let mut c = CMatrix::zeros(graph.dim(), graph.dim());
    for v in 0..graph.num_vertices() {
        let d = graph.degree(v);
        let block = rule.coin_for(v, d)?;
        if block.nrows() != d {
            return Err(Error::DegreeMismatch {
                vertex: v,
                degree: d,
                coin: block.nrows(),
            });
        }
        let deviation = unitarity_deviation(&block);
        if deviation > CONSTRUCTION_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        c.view_mut((graph.offset(v), graph.offset(v)), (d, d)).copy_from(&block);
    }
    Ok(c)
}

/// `U = S (I ⊗ C)` with the coin applied blockwise per vertex. Unitarity
/// follows from the unitary coin blocks and the permutation shift, so no
/// dense `U†U` check is needed.
pub fn walk_unitary(graph: &ColoredGraph, rule: &CoinRule) -> Result<WalkOperator> {
    let c = coin_operator(graph, rule)?;
    let dim = graph.dim();
    let mut u = CMatrix::zeros(dim, dim);
    // (S C)[partner(x), :] = C[x, :]
    for x in 0..dim {
        let row = graph.partner(x);
        u.row_mut(row).copy_from(&c.row(x));
    }
    Ok(WalkOperator { u })
}

/// `max |σ U σ⁻¹ − U|`.
pub fn commutation_deviation(u: &CMatrix, sigma: &BasisPermutation) -> Result<f64> {
    if sigma.dim() != u.nrows() || u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            found: sigma.dim(),
        });
    }
    let n = u.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        let sj = sigma.apply(j);
        for i in 0..n {
            worst = worst.max((u[(sigma.apply(i), sj)] - u[(i, j)]).norm());
        }
    }
    Ok(worst)
}

/// True iff `σ U σ⁻¹ = U` within 1e−12.
pub fn symmetry_commutes(u: &WalkOperator, sigma: &BasisPermutation) -> bool {
    commutation_deviation(u.matrix(), sigma).is_ok_and(|d| d < CONSTRUCTION_TOL)
}

fn check_commutes(a: &CMatrix, orbits: &OrbitBasis) -> Result<()> {
    for g in orbits.generators() {
        let deviation = commutation_deviation(a, g)?;
        if deviation >= CONSTRUCTION_TOL {
            return Err(Error::CommutationFailure {
                generator: g.description.clone(),
                deviation,
            });
        }
    }
    Ok(())
}

/// `U_H[k, l] = ⟨Õ_k|U|Õ_l⟩`, after checking `U` commutes with every
/// generator of the orbit group.
pub fn induced_walk(u: &WalkOperator, orbits: &OrbitBasis) -> Result<WalkOperator> {
    if u.dim() != orbits.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: orbits.dim(),
        });
    }
    check_commutes(u.matrix(), orbits)?;
    WalkOperator::new(orbits.restrict(u.matrix()))
}

/// `U_H = S_H · C_H` with `C_H` block diagonal over quotient vertices.
#[derive(Clone, Debug)]
pub struct QuotientFactorization {
    pub s_h: CMatrix,
    pub c_h: CMatrix,
    pub blocks: Vec<CMatrix>,
}

/// Splits `U_H` into the quotient shift and the per-vertex coin blocks.
pub fn factor_quotient_walk(u_h: &WalkOperator, quotient: &QuotientGraph) -> Result<QuotientFactorization> {
    let q = &quotient.graph;
    if u_h.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.dim(),
            found: u_h.dim(),
        });
    }
    let s_h = q.shift_matrix();
    let c_h = s_h.transpose() * u_h.matrix();
    let mut off_block = 0.0f64;
    for x in 0..q.dim() {
        for y in 0..q.dim() {
            if q.vertex_of(x) != q.vertex_of(y) {
                off_block = off_block.max(c_h[(x, y)].norm());
            }
        }
    }
    if off_block > CONSTRUCTION_TOL {
        return Err(Error::BlockStructure { deviation: off_block });
    }
    let blocks = (0..q.num_vertices())
        .map(|v| {
            let (o, d) = (q.offset(v), q.degree(v));
            c_h.view((o, o), (d, d)).into_owned()
        })
        .collect();
    let reassembled = &s_h * &c_h;
    let deviation = max_abs_diff(&reassembled, u_h.matrix());
    if deviation > CONSTRUCTION_TOL {
        return Err(Error::BlockStructure { deviation });
    }
    Ok(QuotientFactorization { s_h, c_h, blocks })
}

/// Continuous-time Hamiltonian: `γ(D − A)` in Laplacian form, or `γA` with
/// the degree term dropped (meaningful for regular graphs, where `D = dI`
/// only contributes a global phase).
pub fn continuous_hamiltonian(graph: &ColoredGraph, gamma: f64, laplacian: bool) -> Result<CMatrix> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter("gamma must be positive and finite".into()));
    }
    let a = graph.adjacency_matrix();
    if !laplacian {
        return Ok(a * real(gamma));
    }
    let n = graph.num_vertices();
    let mut h = a * real(-gamma);
    for v in 0..n {
        h[(v, v)] += real(gamma * graph.degree(v) as f64);
    }
    Ok(h)
}

/// `H_H[j, k] = ⟨Õ_j|H|Õ_k⟩` for orbits of vertex permutations.
pub fn quotient_hamiltonian(h: &CMatrix, orbits: &OrbitBasis) -> Result<CMatrix> {
    if h.nrows() != orbits.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: orbits.dim(),
        });
    }
    let deviation = hermiticity_deviation(h);
    if deviation > CONSTRUCTION_TOL {
        return Err(Error::InvalidParameter(format!("Hamiltonian is not Hermitian ({deviation:e})")));
    }
    check_commutes(h, orbits)?;
    Ok(orbits.restrict(h))
}

fn warn_if_unnormalized(state: &CVector) {
    let norm = state.norm();
    if (norm - 1.0).abs() > EVOLUTION_TOL {
        log::warn!("evolving a state of norm {norm}, not 1");
    }
}

/// `Uᵗ ψ`.
pub fn evolve_discrete(u: &WalkOperator, state: &CVector, steps: usize) -> Result<CVector> {
    if state.len() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: state.len(),
        });
    }
    warn_if_unnormalized(state);
    let mut psi = state.clone();
    for _ in 0..steps {
        psi = u.matrix() * psi;
    }
    Ok(psi)
}

/// `exp(iHt) ψ`.
pub fn evolve_continuous(h: &CMatrix, state: &CVector, t: f64) -> Result<CVector> {
    if state.len() != h.nrows() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: state.len(),
        });
    }
    warn_if_unnormalized(state);
    Ok(expm_hermitian(h, t)? * state)
}

/// Permutation matrix of an orbit permutation.
pub fn orbit_permutation_matrix(image: &[usize]) -> CMatrix {
    permutation_matrix(image)
}

/// Builds a normalized state from `(flat index, amplitude)` pairs.
pub fn state_from_amplitudes(dim: usize, amps: &[(usize, Complex64)]) -> Result<CVector> {
    let mut psi = CVector::from_element(dim, ZERO);
    for &(x, a) in amps {
        if x >= dim {
            return Err(Error::IndexOutOfRange { index: x, size: dim });
        }
        psi[x] += a;
    }
    let norm = psi.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::InvalidDensity("state has zero or non-finite norm".into()));
    }
    Ok(psi / real(norm))
}
