//! Graph automorphisms acting on the `(vertex, color)` basis, their orbits,
//! orbit states and the quotient graph they induce.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Arc, ColoredGraph};
use crate::linalg::{real, CMatrix, CVector, ONE};
use crate::perm::Permutation;

/// A permutation of flat basis indices, `σ|x⟩ = |mapping(x)⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasisPermutation {
    pub mapping: Permutation,
    pub description: String,
}

impl BasisPermutation {
    pub fn new(mapping: Permutation, description: impl Into<String>) -> Self {
        BasisPermutation {
            mapping,
            description: description.into(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        BasisPermutation::new(Permutation::identity(dim), "identity")
    }

    pub fn dim(&self) -> usize {
        self.mapping.degree()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.mapping.apply(x)
    }

    pub fn matrix(&self) -> CMatrix {
        crate::linalg::permutation_matrix(self.mapping.images())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &BasisPermutation) -> Result<BasisPermutation> {
        Ok(BasisPermutation::new(
            self.mapping.compose(&other.mapping)?,
            format!("{} ∘ {}", self.description, other.description),
        ))
    }
}

/// True iff `σ S σ⁻¹ = S`, i.e. `σ(partner(x)) = partner(σ(x))` for all `x`.
pub fn verify_automorphism(sigma: &BasisPermutation, shift: &[usize]) -> Result<bool> {
    if sigma.dim() != shift.len() {
        return Err(Error::DimensionMismatch {
            expected: shift.len(),
            found: sigma.dim(),
        });
    }
    Ok((0..shift.len()).all(|x| sigma.apply(shift[x]) == shift[sigma.apply(x)]))
}

/// Recovers the integer permutation from a 0/1 shift matrix, requiring exact
/// entries.
pub fn shift_map_from_matrix(s: &CMatrix) -> Result<Vec<usize>> {
    let n = crate::linalg::require_square(s)?;
    let mut map = vec![usize::MAX; n];
    for col in 0..n {
        for row in 0..n {
            let z = s[(row, col)];
            if z == ONE {
                if map[col] != usize::MAX {
                    return Err(Error::InvalidGraph(format!("column {col} has more than one entry")));
                }
                map[col] = row;
            } else if z.norm() != 0.0 {
                return Err(Error::InvalidGraph(format!("entry ({row},{col}) is not 0 or 1")));
            }
        }
    }
    if map.contains(&usize::MAX) {
        return Err(Error::InvalidGraph("shift matrix has an empty column".into()));
    }
    Permutation::from_images(map.clone())?;
    Ok(map)
}

/// [`verify_automorphism`] against a dense shift matrix.
pub fn verify_automorphism_matrix(sigma: &BasisPermutation, s: &CMatrix) -> Result<bool> {
    if sigma.dim() != s.nrows() {
        return Err(Error::DimensionMismatch {
            expected: s.nrows(),
            found: sigma.dim(),
        });
    }
    let map = shift_map_from_matrix(s)?;
    verify_automorphism(sigma, &map)
}

/// Automorphism induced by permuting directions: every vertex's generator
/// word is rewritten letter by letter under `dir_perm`, and `|g, c⟩` goes to
/// `|g', π(c)⟩`. The result is checked against the shift.
pub fn direction_automorphism(graph: &ColoredGraph, dir_perm: &Permutation) -> Result<BasisPermutation> {
    let cd = graph.cayley().ok_or(Error::NotCayley)?;
    let d = cd.generators.len();
    if dir_perm.degree() != d {
        return Err(Error::SizeMismatch {
            left: d,
            right: dir_perm.degree(),
        });
    }
    let description = format!("direction permutation {dir_perm}");
    let n = graph.num_vertices();
    let mut vertex_image = Vec::with_capacity(n);
    for v in 0..n {
        let word: Vec<usize> = cd.words[v].iter().map(|&i| dir_perm.apply(i)).collect();
        let element = cd.evaluate(&word)?;
        match cd.vertex_of(&element) {
            Some(w) => vertex_image.push(w),
            None => return Err(Error::NotAnAutomorphism { description }),
        }
    }
    let mut images = vec![0; graph.dim()];
    for v in 0..n {
        for c in 0..d {
            images[graph.flat(v, c).expect("Cayley colors")] =
                graph.flat(vertex_image[v], dir_perm.apply(c)).expect("Cayley colors");
        }
    }
    let mapping = Permutation::from_images(images).map_err(|_| Error::NotAnAutomorphism {
        description: description.clone(),
    })?;
    let sigma = BasisPermutation::new(mapping, description.clone());
    if !verify_automorphism(&sigma, graph.shift_map())? {
        return Err(Error::NotAnAutomorphism { description });
    }
    Ok(sigma)
}

/// Left translation `|g, c⟩ ↦ |a·g, c⟩` on a Cayley graph.
pub fn left_translation(graph: &ColoredGraph, a: &Permutation) -> Result<BasisPermutation> {
    let cd = graph.cayley().ok_or(Error::NotCayley)?;
    if cd.vertex_of(a).is_none() {
        return Err(Error::NotInGroup { element: a.to_string() });
    }
    let mut images = vec![0; graph.dim()];
    for v in 0..graph.num_vertices() {
        let w = cd
            .vertex_of(&a.compose(&cd.elements[v])?)
            .ok_or(Error::NotInGroup { element: a.to_string() })?;
        for &c in graph.colors(v) {
            images[graph.flat(v, c).unwrap()] = graph.flat(w, c).unwrap();
        }
    }
    let sigma = BasisPermutation::new(
        Permutation::from_images(images)?,
        format!("left translation by {}", graph.label(cd.vertex_of(a).unwrap())),
    );
    debug_assert!(verify_automorphism(&sigma, graph.shift_map()).unwrap());
    Ok(sigma)
}

/// Lifts a vertex permutation to the coined basis by keeping each color
/// position, `|v, k-th color⟩ ↦ |π(v), k-th color⟩`.
pub fn vertex_automorphism(graph: &ColoredGraph, vertex_perm: &Permutation) -> Result<BasisPermutation> {
    if vertex_perm.degree() != graph.num_vertices() {
        return Err(Error::DimensionMismatch {
            expected: graph.num_vertices(),
            found: vertex_perm.degree(),
        });
    }
    let mut images = vec![0; graph.dim()];
    for v in 0..graph.num_vertices() {
        let w = vertex_perm.apply(v);
        if graph.degree(w) != graph.degree(v) {
            return Err(Error::NotAnAutomorphism {
                description: format!("vertex permutation {vertex_perm}"),
            });
        }
        for k in 0..graph.degree(v) {
            images[graph.offset(v) + k] = graph.offset(w) + k;
        }
    }
    Ok(BasisPermutation::new(
        Permutation::from_images(images)?,
        format!("vertex permutation {vertex_perm}"),
    ))
}

/// Partition of basis indices into orbits, with the generators that produced
/// it.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitBasis {
    dim: usize,
    orbits: Vec<Vec<usize>>,
    orbit_of: Vec<usize>,
    #[serde(skip)]
    generators: Vec<BasisPermutation>,
}

/// Orbits of the group generated by `reps` on `0..dim`. Orbits are listed by
/// smallest member, members ascending.
pub fn compute_orbits(dim: usize, reps: &[BasisPermutation]) -> Result<OrbitBasis> {
    for r in reps {
        if r.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: r.dim(),
            });
        }
    }
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for r in reps {
        for x in 0..dim {
            let (a, b) = (find(&mut parent, x), find(&mut parent, r.apply(x)));
            if a != b {
                let (lo, hi) = (a.min(b), a.max(b));
                parent[hi] = lo;
            }
        }
    }
    let mut orbit_of = vec![usize::MAX; dim];
    let mut root_to_orbit: BTreeMap<usize, usize> = BTreeMap::new();
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for (x, slot) in orbit_of.iter_mut().enumerate() {
        let root = find(&mut parent, x);
        let id = *root_to_orbit.entry(root).or_insert_with(|| {
            orbits.push(Vec::new());
            orbits.len() - 1
        });
        orbits[id].push(x);
        *slot = id;
    }
    Ok(OrbitBasis {
        dim,
        orbits,
        orbit_of,
        generators: reps.to_vec(),
    })
}

impl OrbitBasis {
    /// Every basis vector in its own orbit.
    pub fn trivial(dim: usize) -> Self {
        compute_orbits(dim, &[]).expect("no generators to mismatch")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn orbits(&self) -> &[Vec<usize>] {
        &self.orbits
    }

    pub fn orbit(&self, k: usize) -> &[usize] {
        &self.orbits[k]
    }

    pub fn orbit_of(&self, x: usize) -> usize {
        self.orbit_of[x]
    }

    pub fn representative(&self, k: usize) -> usize {
        self.orbits[k][0]
    }

    pub fn generators(&self) -> &[BasisPermutation] {
        &self.generators
    }

    /// `|Õ_k⟩ = |O_k|^{-1/2} Σ_{x∈O_k} |x⟩`.
    pub fn orbit_vector(&self, k: usize) -> CVector {
        let mut v = CVector::zeros(self.dim);
        let w = real(1.0 / (self.orbits[k].len() as f64).sqrt());
        for &x in &self.orbits[k] {
            v[x] = w;
        }
        v
    }

    /// `D × m` matrix whose columns are the orbit vectors.
    pub fn embedding(&self) -> CMatrix {
        let mut w = CMatrix::zeros(self.dim, self.len());
        for (k, orbit) in self.orbits.iter().enumerate() {
            let value = real(1.0 / (orbit.len() as f64).sqrt());
            for &x in orbit {
                w[(x, k)] = value;
            }
        }
        w
    }

    /// Quotient coordinates `⟨Õ_k|ψ⟩`.
    pub fn coords(&self, psi: &CVector) -> CVector {
        CVector::from_iterator(
            self.len(),
            self.orbits.iter().map(|orbit| {
                let s: num_complex::Complex64 = orbit.iter().map(|&x| psi[x]).sum();
                s / (orbit.len() as f64).sqrt()
            }),
        )
    }

    /// `Σ_k c_k |Õ_k⟩`.
    pub fn lift(&self, coords: &CVector) -> CVector {
        let mut v = CVector::zeros(self.dim);
        for (k, orbit) in self.orbits.iter().enumerate() {
            let value = coords[k] / (orbit.len() as f64).sqrt();
            for &x in orbit {
                v[x] = value;
            }
        }
        v
    }

    /// `W† A W` for an operator on the full space.
    pub fn restrict(&self, a: &CMatrix) -> CMatrix {
        let m = self.len();
        CMatrix::from_fn(m, m, |k, l| {
            let mut s = crate::linalg::ZERO;
            for &x in &self.orbits[k] {
                for &y in &self.orbits[l] {
                    s += a[(x, y)];
                }
            }
            s / ((self.orbits[k].len() * self.orbits[l].len()) as f64).sqrt()
        })
    }
}

/// `P_H = Σ_k |Õ_k⟩⟨Õ_k|`.
pub fn projector_ph(orbits: &OrbitBasis) -> CMatrix {
    let mut p = CMatrix::zeros(orbits.dim(), orbits.dim());
    for orbit in orbits.orbits() {
        let w = real(1.0 / orbit.len() as f64);
        for &x in orbit {
            for &y in orbit {
                p[(x, y)] = w;
            }
        }
    }
    p
}

/// The quotient graph `Γ_H` together with its relation to the original.
#[derive(Clone, Debug)]
pub struct QuotientGraph {
    pub graph: ColoredGraph,
    /// Orbit id of each original flat index; also the quotient flat index.
    pub orbit_of_basis: Vec<usize>,
    /// Original vertices collapsed into each quotient vertex, ascending.
    pub vertex_sets: Vec<Vec<usize>>,
}

/// Builds `Γ_H`: orbits sharing a vertex set form one quotient vertex (its
/// colors are those orbits in order), and orbit `O` is joined to the orbit
/// containing the shift image of its members.
pub fn quotient_graph(graph: &ColoredGraph, orbits: &OrbitBasis) -> Result<QuotientGraph> {
    if orbits.dim() != graph.dim() {
        return Err(Error::DimensionMismatch {
            expected: graph.dim(),
            found: orbits.dim(),
        });
    }
    let vertex_set = |k: usize| -> Vec<usize> {
        let mut vs: Vec<usize> = orbits.orbit(k).iter().map(|&x| graph.vertex_of(x)).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    };
    // Families of orbits with a common vertex set. Orbits at a shared vertex
    // must have identical vertex sets, which makes families contiguous in
    // canonical orbit order.
    let mut family_of_orbit = Vec::with_capacity(orbits.len());
    let mut vertex_sets: Vec<Vec<usize>> = Vec::new();
    let mut family_of_vertex = vec![usize::MAX; graph.num_vertices()];
    let mut color_in_family = Vec::with_capacity(orbits.len());
    let mut family_size: Vec<usize> = Vec::new();
    for k in 0..orbits.len() {
        let vs = vertex_set(k);
        let known = family_of_vertex[vs[0]];
        let fam = if known == usize::MAX {
            for &v in &vs {
                if family_of_vertex[v] != usize::MAX {
                    return Err(Error::OrbitsInconsistent(format!(
                        "vertex {v} lies in orbits with different vertex sets"
                    )));
                }
                family_of_vertex[v] = vertex_sets.len();
            }
            vertex_sets.push(vs);
            family_size.push(0);
            vertex_sets.len() - 1
        } else {
            if vertex_sets[known] != vs {
                return Err(Error::OrbitsInconsistent(format!(
                    "orbit {k} shares vertex {} but not its vertex set",
                    vs[0]
                )));
            }
            known
        };
        if fam + 1 != vertex_sets.len() {
            return Err(Error::OrbitsInconsistent(format!("orbit {k} breaks family contiguity")));
        }
        color_in_family.push(family_size[fam]);
        family_size[fam] += 1;
        family_of_orbit.push(fam);
    }

    let mut arcs = Vec::with_capacity(orbits.len());
    for k in 0..orbits.len() {
        let target = orbits.orbit_of(graph.partner(orbits.representative(k)));
        for &x in orbits.orbit(k) {
            if orbits.orbit_of(graph.partner(x)) != target {
                return Err(Error::OrbitsInconsistent(format!(
                    "members of orbit {k} are shifted into different orbits"
                )));
            }
        }
        if orbits.orbit(k).len() != orbits.orbit(target).len() {
            return Err(Error::OrbitsInconsistent(format!(
                "connected orbits {k} and {target} differ in size"
            )));
        }
        arcs.push(Arc {
            from: family_of_orbit[k],
            from_color: color_in_family[k],
            to: family_of_orbit[target],
            to_color: color_in_family[target],
        });
    }
    let labels = vertex_sets
        .iter()
        .map(|vs| vs.iter().map(|&v| graph.label(v)).collect::<Vec<_>>().join(","))
        .collect();
    let quotient = ColoredGraph::from_arcs(vertex_sets.len(), Some(labels), &arcs)?;
    Ok(QuotientGraph {
        graph: quotient,
        orbit_of_basis: (0..graph.dim()).map(|x| orbits.orbit_of(x)).collect(),
        vertex_sets,
    })
}

/// The orbit permutation induced by `g`, when `g` maps every orbit onto an
/// orbit.
pub fn quotient_automorphism(g: &BasisPermutation, orbits: &OrbitBasis) -> Result<Vec<usize>> {
    if g.dim() != orbits.dim() {
        return Err(Error::DimensionMismatch {
            expected: orbits.dim(),
            found: g.dim(),
        });
    }
    let mut image = Vec::with_capacity(orbits.len());
    for k in 0..orbits.len() {
        let target = orbits.orbit_of(g.apply(orbits.representative(k)));
        let fits = orbits.orbit(target).len() == orbits.orbit(k).len()
            && orbits.orbit(k).iter().all(|&x| orbits.orbit_of(g.apply(x)) == target);
        if !fits {
            return Err(Error::NotOrbitCompatible {
                description: g.description.clone(),
            });
        }
        image.push(target);
    }
    Ok(image)
}

/// Closure of a set of basis permutations under composition (for small
/// groups), identity first.
pub fn close_group(dim: usize, reps: &[BasisPermutation]) -> Result<Vec<BasisPermutation>> {
    let mut gens: Vec<Permutation> = reps.iter().map(|r| r.mapping.clone()).collect();
    if gens.is_empty() {
        gens.push(Permutation::identity(dim));
    }
    let group = crate::perm::PermutationGroup::generate(&gens)?;
    Ok(group
        .elements()
        .iter()
        .enumerate()
        .map(|(k, e)| BasisPermutation::new(e.clone(), format!("group element {k}")))
        .collect())
}
