//! Dense complex linear algebra shared by the walk and hitting modules.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry-wise modulus of `a - b`; infinite on shape mismatch.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn vector_max_abs_diff(a: &CVector, b: &CVector) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn require_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// `max |U†U − I|`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}

/// `max |A − A†|`.
pub fn hermiticity_deviation(a: &CMatrix) -> f64 {
    if a.nrows() != a.ncols() {
        return f64::INFINITY;
    }
    max_abs_diff(a, &a.adjoint())
}

/// Permutation matrix with `P|i⟩ = |images[i]⟩`.
pub fn permutation_matrix(images: &[usize]) -> CMatrix {
    let n = images.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, &j) in images.iter().enumerate() {
        m[(j, i)] = ONE;
    }
    m
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Orthonormal basis (as columns) of `{x : m x = 0}`, using singular values
/// at or below `tol` relative to 1.
pub fn null_space(m: &CMatrix, tol: f64) -> CMatrix {
    let cols = m.ncols();
    if cols == 0 {
        return CMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return identity(cols);
    }
    // Pad to at least `cols` rows so the SVD yields a full right basis.
    let padded = if m.nrows() < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let picks: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(k, _)| k)
        .collect();
    let mut out = CMatrix::zeros(cols, picks.len());
    for (col, &k) in picks.iter().enumerate() {
        for r in 0..cols {
            out[(r, col)] = v_t[(k, r)].conj();
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian matrix: eigenvalues ascending with
/// matching eigenvector columns.
pub fn hermitian_eigen(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = require_square(a)?;
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let sym = (a + a.adjoint()) * real(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    Ok((values, vectors))
}

/// A cluster of (numerically) equal unitary eigenvalues.
#[derive(Clone, Debug)]
pub struct Eigenspace {
    pub phase: f64,
    pub eigenvalue: Complex64,
    /// Orthonormal eigenvectors as columns.
    pub vectors: CMatrix,
}

impl Eigenspace {
    pub fn multiplicity(&self) -> usize {
        self.vectors.ncols()
    }
}

/// Angular distance on the unit circle, in `[0, π]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Spectral decomposition of a unitary matrix into eigenspaces whose
/// eigenphases agree within `degeneracy_tol`.
///
/// The Hermitian part `(U+U†)/2` is diagonalized first; each group of equal
/// cosines is then split by the anti-Hermitian part `(U−U†)/2i`, which
/// commutes with it. Phases are taken from Rayleigh quotients and clustered
/// with wrap-around.
pub fn unitary_eigenspaces(u: &CMatrix, degeneracy_tol: f64) -> Result<Vec<Eigenspace>> {
    let n = require_square(u)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let ud = u.adjoint();
    let herm = (u + &ud) * real(0.5);
    let anti = (u - &ud) * c(0.0, -0.5);
    let (cos_values, cos_vectors) = hermitian_eigen(&herm)?;

    const GROUP_TOL: f64 = 1e-6;
    let mut vectors = CMatrix::zeros(n, n);
    let mut col = 0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && cos_values[end] - cos_values[end - 1] <= GROUP_TOL {
            end += 1;
        }
        let basis = cos_vectors.columns(start, end - start).into_owned();
        let restricted = basis.adjoint() * &anti * &basis;
        let (_, inner) = hermitian_eigen(&restricted)?;
        let rotated = &basis * inner;
        for k in 0..rotated.ncols() {
            vectors.set_column(col, &rotated.column(k));
            col += 1;
        }
        start = end;
    }

    let mut phased: Vec<(f64, usize)> = (0..n)
        .map(|k| {
            let v = vectors.column(k);
            let lambda = (v.adjoint() * u * v)[(0, 0)];
            (lambda.arg(), k)
        })
        .collect();
    phased.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Residual check: each column must be an eigenvector.
    let mut worst = 0.0f64;
    for &(phase, k) in &phased {
        let v = vectors.column(k);
        let lambda = Complex64::from_polar(1.0, phase);
        let r = u * v - v * lambda;
        worst = worst.max(r.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    if worst > 1e-7 {
        return Err(Error::Eigen(format!(
            "unitary eigenvector residual {worst:e} exceeds 1e-7"
        )));
    }

    // Cluster along the sorted phases; merge the last cluster into the first
    // when they meet across the branch cut at ±π.
    let mut clusters: Vec<Vec<(f64, usize)>> = Vec::new();
    for item in phased {
        match clusters.last_mut() {
            Some(last) if angular_distance(last.last().unwrap().0, item.0) <= degeneracy_tol => {
                last.push(item)
            }
            _ => clusters.push(vec![item]),
        }
    }
    if clusters.len() > 1 {
        let first = clusters[0][0].0;
        let last = clusters.last().unwrap().last().unwrap().0;
        if angular_distance(first, last) <= degeneracy_tol {
            let tail = clusters.pop().unwrap();
            clusters[0].splice(0..0, tail);
        }
    }

    let spaces = clusters
        .into_iter()
        .map(|members| {
            // Circular mean of the member phases.
            let sum: Complex64 = members.iter().map(|(p, _)| Complex64::from_polar(1.0, *p)).sum();
            let phase = sum.arg();
            let mut vecs = CMatrix::zeros(n, members.len());
            for (j, (_, k)) in members.iter().enumerate() {
                vecs.set_column(j, &vectors.column(*k));
            }
            Eigenspace {
                phase,
                eigenvalue: Complex64::from_polar(1.0, phase),
                vectors: vecs,
            }
        })
        .collect();
    Ok(spaces)
}

/// `exp(i H t)` for Hermitian `H`.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(h)?;
    let n = values.len();
    let mut scaled = vectors.clone();
    for (k, &lambda) in values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, lambda * t);
        for r in 0..n {
            scaled[(r, k)] *= phase;
        }
    }
    Ok(scaled * vectors.adjoint())
}

/// Row-major stacking of a square matrix.
pub fn vectorize(rho: &CMatrix) -> Result<CVector> {
    let n = require_square(rho)?;
    Ok(CVector::from_iterator(
        n * n,
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| rho[(i, j)]),
    ))
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &CVector) -> Result<CMatrix> {
    let n = (v.len() as f64).sqrt().round() as usize;
    if n * n != v.len() {
        return Err(Error::NotSquare {
            rows: v.len(),
            cols: 1,
        });
    }
    Ok(CMatrix::from_fn(n, n, |i, j| v[i * n + j]))
}

/// Smallest singular value of a square matrix estimated by inverse power
/// iteration on `A†A`, using LU factors of `A` and `A†`. Returns zero when a
/// factorization reports an exactly singular pivot.
pub fn smallest_singular_value(a: &CMatrix) -> Result<f64> {
    let n = require_square(a)?;
    if n == 0 {
        return Ok(f64::INFINITY);
    }
    let lu = a.clone().lu();
    let lu_adj = a.adjoint().lu();
    if !lu.is_invertible() || !lu_adj.is_invertible() {
        return Ok(0.0);
    }
    // Deterministic, generic start vector.
    let mut x = CVector::from_fn(n, |i, _| c(1.0 + (i as f64 * 0.618_033_988_75).fract(), 0.3 * ((i % 7) as f64)));
    x /= real(x.norm());
    let mut estimate = 0.0;
    for _ in 0..200 {
        let y = match lu_adj.solve(&x).and_then(|y| lu.solve(&y)) {
            Some(z) => z,
            None => return Ok(0.0),
        };
        let norm = y.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Ok(0.0);
        }
        let next = 1.0 / norm.sqrt();
        x = y / real(norm);
        if (next - estimate).abs() <= 1e-12 * next.max(1e-300) {
            estimate = next;
            break;
        }
        estimate = next;
    }
    Ok(estimate)
}

/// Complex Schur form `M = Z T Z†` with `Z` unitary and `T` upper
/// triangular.
///
/// QR iteration can stall on permutation-like matrices, so after a plain
/// attempt the decomposition is retried on `M + sI` (which has the same `Z`)
/// and then on a fixed unitary similarity of that; every result is checked by
/// reconstruction.
pub fn complex_schur(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = require_square(m)?;
    let scale = max_abs(m).max(1.0);
    let shifts = [ZERO, c(0.3, 0.7), c(-0.61, 0.23)];
    let mixer = {
        let h = CMatrix::from_fn(n, n, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            let re = ((a * 0.754_877_666 + b * 0.569_840_291).fract() - 0.5) * 2.0;
            let im = if i == j { 0.0 } else { ((a * 0.341_379_5 + b * 0.912_345_7).fract() - 0.5) * 2.0 };
            if i <= j { c(re, im) } else { c(re, -im) }
        });
        expm_hermitian(&h, 1.0)?
    };
    let attempts = shifts
        .iter()
        .map(|&s| (s, None))
        .chain(shifts.iter().skip(1).map(|&s| (s, Some(&mixer))));
    for (shift, similarity) in attempts {
        let mut a = m + CMatrix::identity(n, n) * shift;
        if let Some(w) = similarity {
            a = w.adjoint() * a * w;
        }
        let Some(schur) = nalgebra::linalg::Schur::try_new(a, f64::EPSILON, 30 * n.max(10)) else {
            continue;
        };
        let (mut z, mut t) = schur.unpack();
        if let Some(w) = similarity {
            z = w * z;
        }
        for k in 0..n {
            t[(k, k)] -= shift;
        }
        if max_abs_diff(&(&z * &t * z.adjoint()), m) <= 1e-10 * scale {
            return Ok((z, t));
        }
    }
    Err(Error::Eigen("Schur decomposition did not converge".into()))
}

/// Solver for the Stein equation `X − M X M† = C` and its adjoint
/// `X − M† X M = C`, through the complex Schur form `M = Z T Z†`.
///
/// With `N(X) = M X M†` these are `(I − N)X = C` and `(I − N)†X = C`, solved
/// in `O(n³)` without forming the `n² × n²` superoperator.
#[derive(Clone, Debug)]
pub struct SteinSolver {
    z: CMatrix,
    t: CMatrix,
}

impl SteinSolver {
    pub fn new(m: &CMatrix) -> Result<Self> {
        let (z, t) = complex_schur(m)?;
        Ok(SteinSolver { z, t })
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    /// Eigenvalues of `I − N`: `1 − λ_j conj(λ_k)` over pairs of eigenvalues
    /// of `M`; returns the smallest modulus.
    pub fn min_eigenvalue_modulus(&self) -> f64 {
        let n = self.dim();
        let mut best = f64::INFINITY;
        for j in 0..n {
            for k in 0..n {
                best = best.min((ONE - self.t[(j, j)] * self.t[(k, k)].conj()).norm());
            }
        }
        best
    }

    /// `X` with `X − M X M† = C`, or `None` when a pivot vanishes.
    pub fn solve(&self, rhs: &CMatrix) -> Option<CMatrix> {
        let y = self.solve_triangular(&(self.z.adjoint() * rhs * &self.z))?;
        Some(&self.z * y * self.z.adjoint())
    }

    /// `X` with `X − M† X M = C`, or `None` when a pivot vanishes.
    pub fn solve_adjoint(&self, rhs: &CMatrix) -> Option<CMatrix> {
        let y = self.solve_triangular_adjoint(&(self.z.adjoint() * rhs * &self.z))?;
        Some(&self.z * y * self.z.adjoint())
    }

    /// `Y − T Y T† = C` in Schur coordinates. Column `j` couples only to
    /// columns `l > j`: with `r = Σ_{l>j} Y[:,l]·conj(T[j,l])`,
    /// `(I − conj(T_jj)·T) y_j = c_j + T·r`, an upper-triangular system.
    fn solve_triangular(&self, c: &CMatrix) -> Option<CMatrix> {
        let n = self.dim();
        let t = &self.t;
        let mut y = CMatrix::zeros(n, n);
        let mut r = CVector::zeros(n);
        for j in (0..n).rev() {
            r.fill(ZERO);
            for l in (j + 1)..n {
                r.axpy(t[(j, l)].conj(), &y.column(l), ONE);
            }
            let mut b = c.column(j) + t * &r;
            let s = t[(j, j)].conj();
            for i in (0..n).rev() {
                let pivot = ONE - s * t[(i, i)];
                if pivot.norm() == 0.0 {
                    return None;
                }
                let yi = b[i] / pivot;
                y[(i, j)] = yi;
                // Substitute y_i into the rows above.
                let factor = s * yi;
                for k in 0..i {
                    b[k] += factor * t[(k, i)];
                }
            }
        }
        Some(y)
    }

    /// `Y − T† Y T = C` in Schur coordinates. Column `j` couples only to
    /// columns `l < j`: with `s = Σ_{l<j} Y[:,l]·T[l,j]`,
    /// `(I − T_jj·T†) y_j = c_j + T†·s`, a lower-triangular system.
    fn solve_triangular_adjoint(&self, c: &CMatrix) -> Option<CMatrix> {
        let n = self.dim();
        let t = &self.t;
        let mut y = CMatrix::zeros(n, n);
        let mut s = CVector::zeros(n);
        for j in 0..n {
            s.fill(ZERO);
            for l in 0..j {
                s.axpy(t[(l, j)], &y.column(l), ONE);
            }
            let mut b = c.column(j) + t.ad_mul(&s);
            let d = t[(j, j)];
            for i in 0..n {
                let pivot = ONE - d * t[(i, i)].conj();
                if pivot.norm() == 0.0 {
                    return None;
                }
                let yi = b[i] / pivot;
                y[(i, j)] = yi;
                // Row k > i of T† holds conj(T[i,k]) in column i.
                let factor = d * yi;
                for k in (i + 1)..n {
                    b[k] += factor * t[(i, k)].conj();
                }
            }
        }
        Some(y)
    }

    /// Smallest singular value of `I − N` by inverse power iteration on
    /// `(I − N)†(I − N)`, carried out in Schur coordinates (a unitary change
    /// of basis, so singular values are unchanged); zero if a solve breaks
    /// down. The estimate never falls below the true value, and it converges
    /// fastest exactly when `I − N` is close to singular, so a relative change
    /// of 1e−4 is enough to decide invertibility.
    pub fn smallest_singular_value(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            return f64::INFINITY;
        }
        let mut x = CMatrix::from_fn(n, n, |i, j| {
            let k = (i * n + j) as f64;
            c(1.0 + (k * 0.618_033_988_75).fract(), 0.3 * ((i * n + j) % 7) as f64)
        });
        x /= real(x.norm());
        let mut estimate = 0.0;
        for _ in 0..500 {
            let Some(y) = self.solve_triangular_adjoint(&x).and_then(|y| self.solve_triangular(&y)) else {
                return 0.0;
            };
            let norm = y.norm();
            if !norm.is_finite() || norm == 0.0 {
                return 0.0;
            }
            let next = 1.0 / norm.sqrt();
            x = y / real(norm);
            if (next - estimate).abs() <= 1e-4 * next.max(1e-300) {
                return next;
            }
            estimate = next;
        }
        estimate
    }
}

/// Orthonormal basis of the range of a Hermitian projector.
pub fn projector_range(p: &CMatrix, tol: f64) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(p)?;
    let keep: Vec<usize> = (0..values.len()).filter(|&k| values[k] > 0.5 && values[k] > tol).collect();
    let mut out = CMatrix::zeros(p.nrows(), keep.len());
    for (j, &k) in keep.iter().enumerate() {
        out.set_column(j, &vectors.column(k));
    }
    Ok(out)
}

/// Multiplies by a global phase so the first entry of modulus above `tol`
/// becomes real and positive.
pub fn fix_phase(v: &CVector, tol: f64) -> CVector {
    match v.iter().find(|z| z.norm() > tol) {
        Some(z) => v * (z.conj() / z.norm()),
        None => v.clone(),
    }
}
