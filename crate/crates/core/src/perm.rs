//! Permutations of `{1..n}` and explicitly enumerated permutation groups.
//!
//! Storage is 0-based. Cycle notation at the text boundary is 1-based, so
//! `"(1,2,3)"` sends 1 to 2, 2 to 3 and 3 to 1.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of elements `generate_group` will enumerate.
pub const GROUP_ORDER_LIMIT: usize = 1 << 20;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// Builds a permutation from 0-based images, rejecting anything that is
    /// not a bijection.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::NotABijection { size: n });
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    /// Parses a product of disjoint cycles over `{1..n}`. Entries may be
    /// separated by commas or whitespace; empty text and `()` are the identity.
    pub fn parse_cycles(text: &str, n: usize) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        let bytes = text.as_bytes();
        let mut pos = 0;

        let skip_ws = |pos: &mut usize| {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
        };

        loop {
            skip_ws(&mut pos);
            if pos >= bytes.len() {
                break;
            }
            if bytes[pos] != b'(' {
                return Err(Error::CycleSyntax {
                    position: pos,
                    message: "expected `(`".into(),
                });
            }
            pos += 1;
            let mut cycle = Vec::new();
            loop {
                skip_ws(&mut pos);
                if pos >= bytes.len() {
                    return Err(Error::CycleSyntax {
                        position: pos,
                        message: "unterminated cycle".into(),
                    });
                }
                if bytes[pos] == b')' {
                    pos += 1;
                    break;
                }
                if !cycle.is_empty() && bytes[pos] == b',' {
                    pos += 1;
                    skip_ws(&mut pos);
                }
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                if start == pos {
                    return Err(Error::CycleSyntax {
                        position: pos,
                        message: "expected a positive integer".into(),
                    });
                }
                let value: usize = text[start..pos].parse().map_err(|_| Error::CycleSyntax {
                    position: start,
                    message: "integer overflow".into(),
                })?;
                if value == 0 || value > n {
                    return Err(Error::IndexOutOfRange {
                        index: value,
                        size: n,
                    });
                }
                let idx = value - 1;
                if used[idx] {
                    return Err(Error::RepeatedElement { element: value });
                }
                used[idx] = true;
                cycle.push(idx);
            }
            // `()` is the identity, matching how the identity prints.
            for (k, &from) in cycle.iter().enumerate() {
                images[from] = cycle[(k + 1) % cycle.len()];
            }
        }
        Ok(Permutation { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::SizeMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        Ok(Permutation {
            images: other.images.iter().map(|&j| self.images[j]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.degree()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    /// Disjoint cycles of length ≥ 2, each starting at its smallest element,
    /// ordered by that element. 0-based.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut next = self.images[start];
            while next != start {
                seen[next] = true;
                cycle.push(next);
                next = self.images[next];
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(images: Vec<usize>) -> Result<Self> {
        Permutation::from_images(images)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.images
    }
}

/// Cycle notation, 1-based; the identity prints as `()`.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("()");
        }
        for cycle in cycles {
            f.write_str("(")?;
            for (k, i) in cycle.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", i + 1)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{}", self)
    }
}

/// A finitely generated permutation group with all elements enumerated.
///
/// Elements appear in breadth-first order from the identity, extending each
/// element by right multiplication with the generators in declared order.
/// `words[k]` is the generator word that first reached `elements[k]`.
#[derive(Clone, Debug)]
pub struct PermutationGroup {
    degree: usize,
    generators: Vec<Permutation>,
    elements: Vec<Permutation>,
    words: Vec<Vec<usize>>,
    index: HashMap<Permutation, usize>,
}

impl PermutationGroup {
    pub fn generate(generators: &[Permutation]) -> Result<Self> {
        Self::generate_with_limit(generators, GROUP_ORDER_LIMIT)
    }

    pub fn generate_with_limit(generators: &[Permutation], limit: usize) -> Result<Self> {
        let first = generators.first().ok_or(Error::NoGenerators)?;
        let degree = first.degree();
        for g in generators {
            if g.degree() != degree {
                return Err(Error::SizeMismatch {
                    left: degree,
                    right: g.degree(),
                });
            }
        }

        let identity = Permutation::identity(degree);
        let mut elements = vec![identity.clone()];
        let mut words: Vec<Vec<usize>> = vec![Vec::new()];
        let mut index = HashMap::from([(identity, 0)]);
        let mut queue = VecDeque::from([0usize]);

        while let Some(k) = queue.pop_front() {
            for (gi, g) in generators.iter().enumerate() {
                let next = elements[k].compose(g)?;
                if index.contains_key(&next) {
                    continue;
                }
                if elements.len() >= limit {
                    return Err(Error::GroupTooLarge { limit });
                }
                let mut word = words[k].clone();
                word.push(gi);
                index.insert(next.clone(), elements.len());
                queue.push_back(elements.len());
                elements.push(next);
                words.push(word);
            }
        }

        Ok(PermutationGroup {
            degree,
            generators: generators.to_vec(),
            elements,
            words,
            index,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn element(&self, k: usize) -> &Permutation {
        &self.elements[k]
    }

    pub fn word(&self, k: usize) -> &[usize] {
        &self.words[k]
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.index.contains_key(p)
    }
}

impl PartialEq for PermutationGroup {
    fn eq(&self, other: &Self) -> bool {
        self.generators == other.generators && self.elements == other.elements
    }
}

#[derive(Serialize, Deserialize)]
struct GroupJson {
    degree: usize,
    generators: Vec<Permutation>,
    elements: Vec<Permutation>,
}

impl Serialize for PermutationGroup {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        GroupJson {
            degree: self.degree,
            generators: self.generators.clone(),
            elements: self.elements.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PermutationGroup {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = GroupJson::deserialize(deserializer)?;
        let group = PermutationGroup::generate(&raw.generators).map_err(D::Error::custom)?;
        if group.degree != raw.degree || group.elements != raw.elements {
            return Err(D::Error::custom(
                "element list does not match the closure of the generators",
            ));
        }
        Ok(group)
    }
}

/// Free-function form of [`Permutation::parse_cycles`].
pub fn parse_cycles(text: &str, n: usize) -> Result<Permutation> {
    Permutation::parse_cycles(text, n)
}

/// Free-function form of [`Permutation::compose`].
pub fn compose(p: &Permutation, q: &Permutation) -> Result<Permutation> {
    p.compose(q)
}

/// Free-function form of [`PermutationGroup::generate`].
pub fn generate_group(generators: &[Permutation]) -> Result<PermutationGroup> {
    PermutationGroup::generate(generators)
}
