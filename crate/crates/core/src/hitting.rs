//! Hitting times of measured walks: each step applies `U` and then tests
//! whether the walker sits on a final vertex.
//!
//! Density operators are vectorized row-major, so `(AρB)ᵛ = (A ⊗ Bᵀ) ρᵛ`,
//! `N = (Q_f U) ⊗ (Q_f U)*` and `Y = (P_f U) ⊗ (P_f U)*`.

use std::collections::BTreeMap;

use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::error::{Error, Result};
use crate::graph::ColoredGraph;
use crate::linalg::{
    fix_phase, hermitian_eigen, hermiticity_deviation, identity, kron, null_space, real,
    unitary_eigenspaces, vectorize, CMatrix, CVector, SteinSolver, ZERO,
};
use crate::symmetry::{BasisPermutation, OrbitBasis};
use crate::walk::WalkOperator;

/// Default eigenphase clustering tolerance.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// `I − N` counts as invertible when its smallest singular value exceeds this.
pub const INVERTIBILITY_TOL: f64 = 1e-9;
/// Tolerance for null spaces and for singular value 1 in intersections.
pub const NULL_TOL: f64 = 1e-8;
/// Default cap on `D` for dense `D² × D²` superoperators.
pub const DEFAULT_DENSE_LIMIT: usize = 128;
/// Number of leading `p(t)` values kept in a report.
pub const P_PREFIX_LEN: usize = 100;

/// Projective measurement `{P_f, Q_f}` onto a set of final basis indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Measurement {
    dim: usize,
    finals: Vec<usize>,
    is_final: Vec<bool>,
}

impl Measurement {
    pub fn from_indices(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut is_final = vec![false; dim];
        for &x in indices {
            if x >= dim {
                return Err(Error::IndexOutOfRange { index: x, size: dim });
            }
            is_final[x] = true;
        }
        let finals = (0..dim).filter(|&x| is_final[x]).collect();
        Ok(Measurement { dim, finals, is_final })
    }

    /// `P_f = Σ_{v ∈ finals} |v⟩⟨v| ⊗ I_c`.
    pub fn from_vertices(graph: &ColoredGraph, vertices: &[usize]) -> Result<Self> {
        let mut indices = Vec::new();
        for &v in vertices {
            if v >= graph.num_vertices() {
                return Err(Error::IndexOutOfRange {
                    index: v,
                    size: graph.num_vertices(),
                });
            }
            indices.extend(graph.offset(v)..graph.offset(v) + graph.degree(v));
        }
        Measurement::from_indices(graph.dim(), &indices)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn final_indices(&self) -> &[usize] {
        &self.finals
    }

    pub fn is_final(&self, x: usize) -> bool {
        self.is_final[x]
    }

    pub fn rank(&self) -> usize {
        self.finals.len()
    }

    pub fn projector(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |i, j| if i == j && self.is_final[i] { real(1.0) } else { ZERO })
    }

    pub fn complement(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |i, j| if i == j && !self.is_final[i] { real(1.0) } else { ZERO })
    }

    /// Fails unless every generator maps final indices to final indices.
    pub fn check_symmetry(&self, generators: &[BasisPermutation]) -> Result<()> {
        for g in generators {
            if g.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: g.dim(),
                });
            }
            if self.finals.iter().any(|&x| !self.is_final[g.apply(x)]) {
                return Err(Error::MeasurementSymmetryViolation {
                    generator: g.description.clone(),
                });
            }
        }
        Ok(())
    }

    /// The same measurement on the orbit basis; requires that it commutes
    /// with the orbit group.
    pub fn restrict(&self, orbits: &OrbitBasis) -> Result<Measurement> {
        if orbits.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: orbits.dim(),
            });
        }
        self.check_symmetry(orbits.generators())?;
        let mut finals = Vec::new();
        for (k, orbit) in orbits.orbits().iter().enumerate() {
            let hits = orbit.iter().filter(|&&x| self.is_final[x]).count();
            if hits == orbit.len() {
                finals.push(k);
            } else if hits != 0 {
                return Err(Error::MeasurementSymmetryViolation {
                    generator: format!("orbit {k} is only partly final"),
                });
            }
        }
        Measurement::from_indices(orbits.len(), &finals)
    }

    fn zero_finals(&self, psi: &mut CVector) {
        for &x in &self.finals {
            psi[x] = ZERO;
        }
    }

    fn final_weight(&self, psi: &CVector) -> f64 {
        self.finals.iter().map(|&x| psi[x].norm_sqr()).sum()
    }
}

/// Checks Hermitian, unit trace and positive semidefinite within 1e−10.
pub fn validate_density(rho: &CMatrix) -> Result<()> {
    let n = crate::linalg::require_square(rho)?;
    if n == 0 {
        return Err(Error::InvalidDensity("empty matrix".into()));
    }
    let herm = hermiticity_deviation(rho);
    if herm > 1e-10 {
        return Err(Error::InvalidDensity(format!("not Hermitian (deviation {herm:e})")));
    }
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
        return Err(Error::InvalidDensity(format!("trace is {trace}, not 1")));
    }
    let (values, _) = hermitian_eigen(rho)?;
    if values[0] < -1e-10 {
        return Err(Error::InvalidDensity(format!("negative eigenvalue {}", values[0])));
    }
    Ok(())
}

/// `|ψ⟩⟨ψ|` for a normalized copy of `ψ`.
pub fn pure_density(psi: &CVector) -> CMatrix {
    let psi = psi / real(psi.norm());
    &psi * psi.adjoint()
}

fn check_dims(u: &WalkOperator, m: &Measurement) -> Result<()> {
    if u.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: m.dim(),
        });
    }
    Ok(())
}

/// Weighted pure components of a density operator (weights above 1e−14).
fn pure_components(rho: &CMatrix) -> Result<Vec<(f64, CVector)>> {
    let (values, vectors) = hermitian_eigen(rho)?;
    Ok(values
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 1e-14)
        .map(|(k, &w)| (w, vectors.column(k).into_owned()))
        .collect())
}

/// First-arrival probabilities `p(1..=horizon)` by iterating the measured
/// step on each pure component of `ρ₀`.
pub fn p_sequence(u: &WalkOperator, m: &Measurement, rho0: &CMatrix, horizon: usize) -> Result<Vec<f64>> {
    check_dims(u, m)?;
    validate_density(rho0)?;
    let mut comps = pure_components(rho0)?;
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let mut p = 0.0;
        for (w, psi) in comps.iter_mut() {
            *psi = u.matrix() * &*psi;
            p += *w * m.final_weight(psi);
            m.zero_finals(psi);
        }
        out.push(p);
    }
    Ok(out)
}

/// `p(t)` from the trace formula `Tr{P_f U (Q_f U)^{t−1} ρ₀ (U†Q_f)^{t−1} U† P_f}`
/// evaluated with dense density matrices.
pub fn p_sequence_trace(u: &WalkOperator, m: &Measurement, rho0: &CMatrix, horizon: usize) -> Result<Vec<f64>> {
    check_dims(u, m)?;
    validate_density(rho0)?;
    let pu = m.projector() * u.matrix();
    let qu = m.complement() * u.matrix();
    let mut rho = rho0.clone();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        out.push((&pu * &rho * pu.adjoint()).trace().re);
        rho = &qu * rho * qu.adjoint();
    }
    Ok(out)
}

/// Vectorized superoperators `(N, Y)`.
pub fn superoperators(u: &WalkOperator, m: &Measurement, dense_limit: usize) -> Result<(CMatrix, CMatrix)> {
    check_dims(u, m)?;
    if u.dim() > dense_limit {
        return Err(Error::DimensionLimit {
            dim: u.dim(),
            limit: dense_limit,
        });
    }
    let qu = m.complement() * u.matrix();
    let pu = m.projector() * u.matrix();
    Ok((kron(&qu, &qu.conjugate()), kron(&pu, &pu.conjugate())))
}

/// `p(t) = Iᵛ · (Y N^{t−1} ρᵛ)`.
pub fn p_sequence_vectorized(
    u: &WalkOperator,
    m: &Measurement,
    rho0: &CMatrix,
    horizon: usize,
    dense_limit: usize,
) -> Result<Vec<f64>> {
    validate_density(rho0)?;
    let (n, y) = superoperators(u, m, dense_limit)?;
    let identity_v = vectorize(&identity(u.dim()))?;
    let mut r = vectorize(rho0)?;
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        out.push(identity_v.dot(&(&y * &r)).re);
        r = &n * r;
    }
    Ok(out)
}

/// The projector onto eigenvectors of `U` with no final-vertex component.
#[derive(Clone, Debug)]
pub struct InfiniteProjector {
    pub projector: CMatrix,
    /// Orthonormal basis of the range, as columns.
    pub basis: CMatrix,
    pub rank: usize,
    /// `Σ max(k_i − m, 0)` over eigenspaces of multiplicity `k_i`, with `m`
    /// the number of final basis states.
    pub structural_rank: usize,
    /// Null vectors beyond the structural count.
    pub accidental_rank: usize,
    pub multiplicities: Vec<usize>,
}

/// Builds `P̂` from the spectrum of `U`: within each eigenspace, solve for
/// combinations whose final-vertex components vanish.
pub fn infinite_projector(u: &WalkOperator, m: &Measurement, degeneracy_tol: f64) -> Result<InfiniteProjector> {
    check_dims(u, m)?;
    if degeneracy_tol.is_nan() || degeneracy_tol <= 0.0 {
        return Err(Error::InvalidParameter("degeneracy tolerance must be positive".into()));
    }
    let dim = u.dim();
    let spaces = unitary_eigenspaces(u.matrix(), degeneracy_tol)?;
    let finals = m.final_indices();
    let mut columns: Vec<CVector> = Vec::new();
    let mut structural = 0;
    let mut multiplicities = Vec::with_capacity(spaces.len());
    for space in &spaces {
        let k = space.multiplicity();
        multiplicities.push(k);
        structural += k.saturating_sub(finals.len());
        let block = CMatrix::from_fn(finals.len(), k, |r, c| space.vectors[(finals[r], c)]);
        let ns = null_space(&block, NULL_TOL);
        for j in 0..ns.ncols() {
            let mut v = &space.vectors * ns.column(j);
            // Remove the numerically tiny final components exactly.
            m.zero_finals(&mut v);
            let norm = v.norm();
            columns.push(v / real(norm));
        }
    }
    let rank = columns.len();
    let mut basis = CMatrix::zeros(dim, rank);
    for (j, col) in columns.iter().enumerate() {
        basis.set_column(j, col);
    }
    let projector = &basis * basis.adjoint();
    Ok(InfiniteProjector {
        projector,
        basis,
        rank,
        structural_rank: structural.min(rank),
        accidental_rank: rank.saturating_sub(structural),
        multiplicities,
    })
}

/// `C_v`: the coin block of `P̂` at vertex `v`, with ascending eigenvalues
/// and phase-fixed eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct CMatrixReport {
    pub vertex: usize,
    pub matrix: CMatrix,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl CMatrixReport {
    /// Eigenvalues at or below `tol`.
    pub fn zero_eigenvalues(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|&&x| x <= tol).count()
    }
}

pub fn c_matrix(p_hat: &CMatrix, graph: &ColoredGraph, v: usize) -> Result<CMatrixReport> {
    if p_hat.nrows() != graph.dim() {
        return Err(Error::DimensionMismatch {
            expected: graph.dim(),
            found: p_hat.nrows(),
        });
    }
    if v >= graph.num_vertices() {
        return Err(Error::IndexOutOfRange {
            index: v,
            size: graph.num_vertices(),
        });
    }
    let (o, d) = (graph.offset(v), graph.degree(v));
    let block = p_hat.view((o, o), (d, d)).into_owned();
    let (eigenvalues, vectors) = hermitian_eigen(&block)?;
    let mut eigenvectors = vectors.clone();
    for k in 0..d {
        let fixed = fix_phase(&vectors.column(k).into_owned(), 1e-12);
        eigenvectors.set_column(k, &fixed);
    }
    Ok(CMatrixReport {
        vertex: v,
        matrix: block,
        eigenvalues,
        eigenvectors,
    })
}

/// `dim(range P̂ ∩ range P_H)`: the number of singular values of `P̂ P_H`
/// above `1 − tol`.
pub fn quotient_infinite_check(p_hat: &CMatrix, p_h: &CMatrix, tol: f64) -> Result<usize> {
    if p_hat.shape() != p_h.shape() {
        return Err(Error::DimensionMismatch {
            expected: p_hat.nrows(),
            found: p_h.nrows(),
        });
    }
    let product = p_hat * p_h;
    let values = product.singular_values();
    Ok(values.iter().filter(|&&s| s > 1.0 - tol).count())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tau {
    Finite(f64),
    Infinite,
    Indeterminate,
}

impl Tau {
    pub fn value(&self) -> Option<f64> {
        match self {
            Tau::Finite(t) => Some(*t),
            _ => None,
        }
    }
}

impl Serialize for Tau {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Tau::Finite(t) => serializer.serialize_f64(*t),
            Tau::Infinite => serializer.serialize_str("infinite"),
            Tau::Indeterminate => serializer.serialize_str("indeterminate"),
        }
    }
}

/// Truncated `Σ t p(t)` alongside the closed form.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SeriesCheck {
    pub steps: usize,
    pub tau_truncated: f64,
    pub hit_mass: f64,
    /// Probability still unmeasured after the last step.
    pub survival: f64,
    /// True once `Σ p(t) > 1 − 1e−6`.
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct HittingReport {
    pub tau: Tau,
    pub p_prefix: Vec<f64>,
    pub hit_probability: f64,
    pub p_rank: usize,
    pub structural_rank: usize,
    pub accidental_rank: usize,
    /// `⟨Ψ|P̂|Ψ⟩`, i.e. `Tr(P̂ ρ₀)`.
    pub overlap: f64,
    /// `1 − Tr(P̂ρ₀)`, the linear never-escaping complement.
    pub hit_bound_linear: f64,
    /// `(1 − Tr(P̂ρ₀))²`, the squared form.
    pub hit_bound_squared: f64,
    pub sigma_min: Option<f64>,
    pub deflated_dim: Option<usize>,
    pub series: SeriesCheck,
    pub intersection_dim: Option<usize>,
    pub c_matrix_spectra: BTreeMap<String, Vec<f64>>,
}

impl Serialize for HittingReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("tau", &self.tau)?;
        map.serialize_entry("p_prefix", &self.p_prefix)?;
        map.serialize_entry("hit_probability", &self.hit_probability)?;
        map.serialize_entry("P_rank", &self.p_rank)?;
        map.serialize_entry("P_rank_structural", &self.structural_rank)?;
        map.serialize_entry("P_rank_accidental", &self.accidental_rank)?;
        map.serialize_entry("overlap_with_P", &self.overlap)?;
        map.serialize_entry("hit_bound_linear", &self.hit_bound_linear)?;
        map.serialize_entry("hit_bound_squared", &self.hit_bound_squared)?;
        map.serialize_entry("sigma_min", &self.sigma_min)?;
        map.serialize_entry("deflated_dim", &self.deflated_dim)?;
        map.serialize_entry("series", &self.series)?;
        map.serialize_entry("intersection_dim", &self.intersection_dim)?;
        map.serialize_entry("c_matrix_spectra", &self.c_matrix_spectra)?;
        map.end()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct HittingOptions {
    pub degeneracy_tol: f64,
    /// Steps for the truncated series; `None` means `10·D²`.
    pub horizon: Option<usize>,
    pub dense_limit: usize,
    /// Overlap with `P̂` above which the hitting time is infinite.
    pub infinite_tol: f64,
}

impl Default for HittingOptions {
    fn default() -> Self {
        HittingOptions {
            degeneracy_tol: DEGENERACY_TOL,
            horizon: None,
            dense_limit: DEFAULT_DENSE_LIMIT,
            infinite_tol: NULL_TOL,
        }
    }
}

/// `τ = Tr{P U X₂ U† P}` with `X₂ = (I−N)^{-2} ρ`, from two Stein solves
/// with `M = QU`. Returns `(τ, σ_min(I − N))`; `τ` is `None` below the
/// invertibility bar.
fn closed_form(u: &CMatrix, p_f: &CMatrix, q_f: &CMatrix, rho: &CMatrix) -> Result<(Option<f64>, f64)> {
    let solver = SteinSolver::new(&(q_f * u))?;
    let sigma = solver.smallest_singular_value();
    if sigma <= INVERTIBILITY_TOL {
        return Ok((None, sigma));
    }
    let singular = || Error::Eigen("singular superoperator".into());
    let x1 = solver.solve(rho).ok_or_else(singular)?;
    let x2 = solver.solve(&x1).ok_or_else(singular)?;
    let pu = p_f * u;
    let tau = (&pu * x2 * pu.adjoint()).trace().re;
    Ok((Some(tau), sigma))
}

/// Truncated series from the pure components of `ρ₀`, stopping early once
/// the unmeasured probability falls below 1e−15.
pub fn series_check(u: &WalkOperator, m: &Measurement, rho0: &CMatrix, horizon: usize) -> Result<(SeriesCheck, Vec<f64>)> {
    check_dims(u, m)?;
    let mut comps = pure_components(rho0)?;
    let mut prefix = Vec::with_capacity(P_PREFIX_LEN.min(horizon));
    let mut tau = 0.0;
    let mut mass = 0.0;
    let mut survival = comps.iter().map(|(w, psi)| w * psi.norm_squared()).sum::<f64>();
    let mut steps = 0;
    for t in 1..=horizon {
        let mut p = 0.0;
        survival = 0.0;
        for (w, psi) in comps.iter_mut() {
            *psi = u.matrix() * &*psi;
            p += *w * m.final_weight(psi);
            m.zero_finals(psi);
            survival += *w * psi.norm_squared();
        }
        if prefix.len() < P_PREFIX_LEN {
            prefix.push(p);
        }
        tau += t as f64 * p;
        mass += p;
        steps = t;
        if survival < 1e-15 && prefix.len() >= P_PREFIX_LEN.min(horizon) {
            break;
        }
    }
    Ok((
        SeriesCheck {
            steps,
            tau_truncated: tau,
            hit_mass: mass,
            survival,
            converged: mass > 1.0 - 1e-6,
        },
        prefix,
    ))
}

/// Full hitting-time analysis for a measured walk from `ρ₀`.
///
/// `P̂` decides infinite hitting: a nonzero overlap gives `Infinite`.
/// Otherwise the closed form is evaluated, on the complement of `P̂` when
/// `P̂ ≠ 0`, provided `I − N` is safely invertible there; if it is not the
/// result is `Indeterminate`.
pub fn hitting_time(u: &WalkOperator, m: &Measurement, rho0: &CMatrix, opts: &HittingOptions) -> Result<HittingReport> {
    check_dims(u, m)?;
    validate_density(rho0)?;
    let dim = u.dim();
    if dim > opts.dense_limit {
        return Err(Error::DimensionLimit {
            dim,
            limit: opts.dense_limit,
        });
    }
    let p_hat = infinite_projector(u, m, opts.degeneracy_tol)?;
    let overlap = (&p_hat.projector * rho0).trace().re.max(0.0);

    let (tau, sigma_min, deflated_dim) = if overlap > opts.infinite_tol {
        (Tau::Infinite, None, None)
    } else if p_hat.rank == 0 {
        let (tau, sigma) = closed_form(u.matrix(), &m.projector(), &m.complement(), rho0)?;
        (tau.map_or(Tau::Indeterminate, Tau::Finite), Some(sigma), None)
    } else {
        let complement = null_space(&p_hat.basis.adjoint(), NULL_TOL);
        let w = complement;
        let wd = w.adjoint();
        let u_r = &wd * u.matrix() * &w;
        let p_r = &wd * m.projector() * &w;
        let q_r = &wd * m.complement() * &w;
        let rho_r = &wd * rho0 * &w;
        let (tau, sigma) = closed_form(&u_r, &p_r, &q_r, &rho_r)?;
        (tau.map_or(Tau::Indeterminate, Tau::Finite), Some(sigma), Some(w.ncols()))
    };

    let horizon = opts.horizon.unwrap_or(10 * dim * dim).max(1);
    let (series, p_prefix) = series_check(u, m, rho0, horizon)?;
    let hit_bound_linear = 1.0 - overlap;
    Ok(HittingReport {
        tau,
        p_prefix,
        hit_probability: series.hit_mass,
        p_rank: p_hat.rank,
        structural_rank: p_hat.structural_rank,
        accidental_rank: p_hat.accidental_rank,
        overlap,
        hit_bound_linear,
        hit_bound_squared: hit_bound_linear * hit_bound_linear,
        sigma_min,
        deflated_dim,
        series,
        intersection_dim: None,
        c_matrix_spectra: BTreeMap::new(),
    })
}

/// Rank of `P̃` built directly on the quotient walk.
pub fn quotient_projector_rank(u_h: &WalkOperator, orbits: &OrbitBasis, m: &Measurement, degeneracy_tol: f64) -> Result<usize> {
    let m_h = m.restrict(orbits)?;
    Ok(infinite_projector(u_h, &m_h, degeneracy_tol)?.rank)
}
