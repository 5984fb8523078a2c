//! Text formats for subgroups, initial states and final-vertex sets.
//!
//! Subgroup files are JSON:
//! `{"directions": ["(1,2)", "(2,3)"], "translations": ["t1", "011"]}`.
//! Direction permutations act on 1-based direction numbers; translations name
//! group elements by any form accepted by
//! [`ColoredGraph::resolve_vertex`](crate::graph::ColoredGraph::resolve_vertex).

use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ColoredGraph;
use crate::linalg::{real, CVector, ZERO};
use crate::perm::Permutation;
use crate::symmetry::{direction_automorphism, left_translation, BasisPermutation, OrbitBasis};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubgroupSpec {
    #[serde(default)]
    pub directions: Vec<String>,
    #[serde(default)]
    pub translations: Vec<String>,
}

pub fn parse_subgroup_json(text: &str) -> Result<SubgroupSpec> {
    Ok(serde_json::from_str(text)?)
}

impl SubgroupSpec {
    /// Basis permutations of the listed generators, each verified against
    /// the shift of `graph`.
    pub fn generators(&self, graph: &ColoredGraph) -> Result<Vec<BasisPermutation>> {
        let cd = graph.cayley().ok_or(Error::NotCayley)?;
        let d = cd.generators.len();
        let mut out = Vec::with_capacity(self.directions.len() + self.translations.len());
        for text in &self.directions {
            out.push(direction_automorphism(graph, &Permutation::parse_cycles(text, d)?)?);
        }
        for text in &self.translations {
            let v = graph.resolve_vertex(text)?;
            out.push(left_translation(graph, &cd.elements[v])?);
        }
        Ok(out)
    }
}

/// Parses `;`-separated vertex references.
pub fn parse_final_spec(graph: &ColoredGraph, text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let v = graph.resolve_vertex(part)?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidParameter("no final vertices given".into()));
    }
    Ok(out)
}

fn parse_amplitude(text: &str) -> Result<Complex64> {
    let z = Complex64::from_str(text.trim())
        .map_err(|_| Error::InvalidParameter(format!("bad amplitude '{}'", text.trim())))?;
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite amplitude '{}'", text.trim())));
    }
    Ok(z)
}

/// Parses an initial state and normalizes it.
///
/// Terms are separated by `;`. Each term is `VERTEX:uniform` (equal weight on
/// every color at the vertex), `VERTEX:a1,a2,…` (one complex amplitude per
/// color, in color order) or `orbit:K` (the uniform orbit state of the 1-based
/// orbit `K`, which needs `orbits`).
pub fn parse_initial_spec(graph: &ColoredGraph, orbits: Option<&OrbitBasis>, text: &str) -> Result<CVector> {
    let mut psi = CVector::from_element(graph.dim(), ZERO);
    let mut terms = 0;
    for term in text.split(';').map(str::trim).filter(|t| !t.is_empty()) {
        terms += 1;
        let (head, tail) = term
            .rsplit_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("term '{term}' lacks ':'")))?;
        let (head, tail) = (head.trim(), tail.trim());
        if head == "orbit" {
            let orbits = orbits.ok_or_else(|| Error::InvalidParameter("orbit states need a subgroup".into()))?;
            let k: usize = tail
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad orbit number '{tail}'")))?;
            if k == 0 || k > orbits.len() {
                return Err(Error::IndexOutOfRange { index: k, size: orbits.len() });
            }
            psi += orbits.orbit_vector(k - 1);
            continue;
        }
        let v = graph.resolve_vertex(head)?;
        let (o, d) = (graph.offset(v), graph.degree(v));
        if tail == "uniform" {
            for x in o..o + d {
                psi[x] += real(1.0 / (d as f64).sqrt());
            }
        } else {
            let amps = tail.split(',').map(parse_amplitude).collect::<Result<Vec<_>>>()?;
            if amps.len() != d {
                return Err(Error::SizeMismatch { left: d, right: amps.len() });
            }
            for (k, a) in amps.into_iter().enumerate() {
                psi[o + k] += a;
            }
        }
    }
    if terms == 0 {
        return Err(Error::InvalidParameter("empty initial state".into()));
    }
    let norm = psi.norm();
    if norm.is_nan() || norm <= 1e-300 || !norm.is_finite() {
        return Err(Error::InvalidParameter("initial state has zero or non-finite norm".into()));
    }
    Ok(psi / real(norm))
}
