//! Colored graphs built from half-edges, with builders for Cayley graphs,
//! hypercubes and glued binary trees.
//!
//! Every vertex `v` carries an ordered color list `C_v`; the walk basis is
//! `|v, c⟩` flattened vertex-major with colors in `C_v` order. Each half-edge
//! `(v, c)` is paired with exactly one partner `(w, c')`, and pairing is an
//! involution, so the shift operator is the permutation `|v,c⟩ ↦ |w,c'⟩`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{permutation_matrix, real, CMatrix};
use crate::perm::{Permutation, PermutationGroup};

/// A position in the flat `(vertex, color)` basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisIndex {
    pub vertex: usize,
    pub color: usize,
    pub flat: usize,
}

/// Group data attached to a Cayley graph. `elements[v]` is the group element
/// labelling vertex `v` and `words[v]` a generator word (color indices) that
/// evaluates to it by right multiplication from the identity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CayleyData {
    pub generators: Vec<Permutation>,
    pub elements: Vec<Permutation>,
    pub words: Vec<Vec<usize>>,
    #[serde(skip)]
    index: HashMap<Permutation, usize>,
}

impl CayleyData {
    fn new(generators: Vec<Permutation>, elements: Vec<Permutation>, words: Vec<Vec<usize>>) -> Self {
        let index = elements.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        CayleyData {
            generators,
            elements,
            words,
            index,
        }
    }

    pub fn vertex_of(&self, element: &Permutation) -> Option<usize> {
        self.index.get(element).copied()
    }

    /// Evaluates a generator word by right multiplication from the identity.
    pub fn evaluate(&self, word: &[usize]) -> Result<Permutation> {
        let degree = self.generators.first().map(|g| g.degree()).unwrap_or(0);
        let mut acc = Permutation::identity(degree);
        for &letter in word {
            let g = self.generators.get(letter).ok_or(Error::IndexOutOfRange {
                index: letter,
                size: self.generators.len(),
            })?;
            acc = acc.compose(g)?;
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug)]
pub struct ColoredGraph {
    colors: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    partner: Vec<usize>,
    labels: Vec<String>,
    cayley: Option<CayleyData>,
}

/// One directed half-edge pairing `(v, c) → (w, c')`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Arc {
    pub from: usize,
    pub from_color: usize,
    pub to: usize,
    pub to_color: usize,
}

impl ColoredGraph {
    /// Builds a graph from every directed half-edge pairing. Each `(v, c)`
    /// must occur exactly once as a source, the reverse pairing must be
    /// present, and every vertex needs at least one color. `C_v` is the set of
    /// colors used at `v`, in ascending order.
    pub fn from_arcs(num_vertices: usize, labels: Option<Vec<String>>, arcs: &[Arc]) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        // Every vertex needs an outgoing half-edge; checking this first keeps
        // a bogus vertex count from driving a huge allocation.
        if num_vertices > arcs.len() {
            return Err(Error::InvalidGraph(format!(
                "{num_vertices} vertices but only {} half-edges",
                arcs.len()
            )));
        }
        let mut colors: Vec<Vec<usize>> = vec![Vec::new(); num_vertices];
        for a in arcs {
            if a.from >= num_vertices || a.to >= num_vertices {
                return Err(Error::IndexOutOfRange {
                    index: a.from.max(a.to),
                    size: num_vertices,
                });
            }
            colors[a.from].push(a.from_color);
        }
        for (v, cs) in colors.iter_mut().enumerate() {
            cs.sort_unstable();
            if cs.is_empty() {
                return Err(Error::InvalidGraph(format!("vertex {v} has degree 0")));
            }
            if cs.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!(
                    "vertex {v} has a repeated outgoing color"
                )));
            }
        }
        let mut offsets = Vec::with_capacity(num_vertices + 1);
        offsets.push(0);
        for cs in &colors {
            offsets.push(offsets.last().unwrap() + cs.len());
        }
        let position = |v: usize, color: usize, colors: &[Vec<usize>]| -> Option<usize> {
            colors[v].binary_search(&color).ok()
        };
        let dim = *offsets.last().unwrap();
        let mut partner = vec![usize::MAX; dim];
        for a in arcs {
            let src = offsets[a.from] + position(a.from, a.from_color, &colors).expect("color recorded");
            let dst = match position(a.to, a.to_color, &colors) {
                Some(p) => offsets[a.to] + p,
                None => {
                    return Err(Error::InvalidGraph(format!(
                        "arc ({},{})→({},{}) has no reverse arc",
                        a.from, a.from_color, a.to, a.to_color
                    )))
                }
            };
            partner[src] = dst;
        }
        for (x, &y) in partner.iter().enumerate() {
            if partner[y] != x {
                return Err(Error::InvalidGraph(format!(
                    "half-edge pairing is not an involution at flat index {x}"
                )));
            }
        }
        let labels = match labels {
            Some(l) if l.len() == num_vertices => l,
            Some(l) => {
                return Err(Error::InvalidGraph(format!(
                    "{} labels for {} vertices",
                    l.len(),
                    num_vertices
                )))
            }
            None => (0..num_vertices).map(|v| v.to_string()).collect(),
        };
        Ok(ColoredGraph {
            colors,
            offsets,
            partner,
            labels,
            cayley: None,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.colors.len()
    }

    /// Dimension of the walk space, `Σ_v |C_v|`.
    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.colors[v].len()
    }

    /// `Some(d)` when every vertex has degree `d`.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.degree(0);
        (0..self.num_vertices()).all(|v| self.degree(v) == d).then_some(d)
    }

    pub fn colors(&self, v: usize) -> &[usize] {
        &self.colors[v]
    }

    pub fn offset(&self, v: usize) -> usize {
        self.offsets[v]
    }

    pub fn flat(&self, v: usize, color: usize) -> Option<usize> {
        let p = self.colors.get(v)?.binary_search(&color).ok()?;
        Some(self.offsets[v] + p)
    }

    pub fn basis(&self, flat: usize) -> BasisIndex {
        let vertex = self.vertex_of(flat);
        BasisIndex {
            vertex,
            color: self.colors[vertex][flat - self.offsets[vertex]],
            flat,
        }
    }

    pub fn vertex_of(&self, flat: usize) -> usize {
        self.offsets.partition_point(|&o| o <= flat) - 1
    }

    /// Flat index reached by moving along the half-edge at `flat`.
    pub fn partner(&self, flat: usize) -> usize {
        self.partner[flat]
    }

    /// The shift as an integer permutation of flat indices.
    pub fn shift_map(&self) -> &[usize] {
        &self.partner
    }

    pub fn arcs(&self) -> Vec<Arc> {
        (0..self.dim())
            .map(|x| {
                let a = self.basis(x);
                let b = self.basis(self.partner[x]);
                Arc {
                    from: a.vertex,
                    from_color: a.color,
                    to: b.vertex,
                    to_color: b.color,
                }
            })
            .collect()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn cayley(&self) -> Option<&CayleyData> {
        self.cayley.as_ref()
    }

    /// Resolves a vertex reference: an exact label, `#k` for index `k`, and
    /// on Cayley graphs also a generator word (`e`, `t2t1`, ...) or a group
    /// element in cycle notation.
    pub fn resolve_vertex(&self, text: &str) -> Result<usize> {
        let text = text.trim();
        if let Some(v) = self.labels.iter().position(|l| l == text) {
            return Ok(v);
        }
        if let Some(rest) = text.strip_prefix('#') {
            if let Ok(v) = rest.parse::<usize>() {
                if v < self.num_vertices() {
                    return Ok(v);
                }
            }
        }
        if let Some(cd) = &self.cayley {
            if let Some(word) = parse_word(text) {
                if word.iter().all(|&l| l < cd.generators.len()) {
                    let element = cd.evaluate(&word)?;
                    return cd
                        .vertex_of(&element)
                        .ok_or_else(|| Error::UnknownLabel(text.to_string()));
                }
            }
            if text.starts_with('(') {
                let degree = cd.generators[0].degree();
                if let Ok(p) = Permutation::parse_cycles(text, degree) {
                    return cd.vertex_of(&p).ok_or_else(|| Error::UnknownLabel(text.to_string()));
                }
            }
        }
        Err(Error::UnknownLabel(text.to_string()))
    }

    /// Dense shift matrix `S` with `S|x⟩ = |partner(x)⟩`.
    pub fn shift_matrix(&self) -> CMatrix {
        permutation_matrix(&self.partner)
    }

    /// Vertex adjacency: entry `(v, w)` counts half-edges at `v` leading to `w`.
    pub fn adjacency_matrix(&self) -> CMatrix {
        let n = self.num_vertices();
        let mut a = CMatrix::zeros(n, n);
        for x in 0..self.dim() {
            let v = self.vertex_of(x);
            let w = self.vertex_of(self.partner[x]);
            a[(v, w)] += real(1.0);
        }
        a
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            num_vertices: self.num_vertices(),
            vertex_labels: self.labels.clone(),
            arcs: self
                .arcs()
                .into_iter()
                .map(|a| [a.from, a.from_color, a.to, a.to_color])
                .collect(),
            cayley: self.cayley.clone(),
        }
    }

    pub fn from_json(json: GraphJson) -> Result<Self> {
        let arcs: Vec<Arc> = json
            .arcs
            .iter()
            .map(|a| Arc {
                from: a[0],
                from_color: a[1],
                to: a[2],
                to_color: a[3],
            })
            .collect();
        let labels = if json.vertex_labels.is_empty() {
            None
        } else {
            Some(json.vertex_labels)
        };
        let mut g = ColoredGraph::from_arcs(json.num_vertices, labels, &arcs)?;
        if let Some(cd) = json.cayley {
            g.attach_cayley(CayleyData::new(cd.generators, cd.elements, cd.words))?;
        }
        Ok(g)
    }

    /// Attaches group data after checking it against the arc structure:
    /// color `i` at vertex `g` must lead to `g·s_i`, and each word must
    /// evaluate to its vertex's element.
    fn attach_cayley(&mut self, cd: CayleyData) -> Result<()> {
        let n = self.num_vertices();
        let d = cd.generators.len();
        if cd.elements.len() != n || cd.words.len() != n || cd.index.len() != n {
            return Err(Error::InvalidGraph("Cayley data does not match vertex count".into()));
        }
        for v in 0..n {
            if self.colors[v] != (0..d).collect::<Vec<_>>() {
                return Err(Error::InvalidGraph(format!(
                    "vertex {v} colors do not match the {d} generators"
                )));
            }
            if cd.evaluate(&cd.words[v])? != cd.elements[v] {
                return Err(Error::InvalidGraph(format!("word of vertex {v} does not evaluate to its element")));
            }
            for (i, s) in cd.generators.iter().enumerate() {
                let target = cd.elements[v].compose(s)?;
                let w = self.vertex_of(self.partner[self.offsets[v] + i]);
                if cd.vertex_of(&target) != Some(w) {
                    return Err(Error::InvalidGraph(format!(
                        "color {i} at vertex {v} does not follow generator {s}"
                    )));
                }
            }
        }
        self.cayley = Some(cd);
        Ok(())
    }
}

/// Serialized graph: every directed half-edge as `[v, c, w, c']`, 0-based.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphJson {
    pub num_vertices: usize,
    #[serde(default)]
    pub vertex_labels: Vec<String>,
    pub arcs: Vec<[usize; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cayley: Option<CayleyData>,
}

pub fn parse_graph_json(text: &str) -> Result<ColoredGraph> {
    let json: GraphJson = serde_json::from_str(text)?;
    ColoredGraph::from_json(json)
}

/// Parses `e` or `t<i>t<j>...` (1-based generator numbers) into 0-based
/// letters.
pub fn parse_word(text: &str) -> Option<Vec<usize>> {
    if text == "e" {
        return Some(Vec::new());
    }
    let mut out = Vec::new();
    for part in text.split('t').skip(1) {
        let k: usize = part.parse().ok()?;
        out.push(k.checked_sub(1)?);
    }
    (text.starts_with('t') && !out.is_empty()).then_some(out)
}

/// Label for a generator word: `e` or `t1t2...`.
pub fn word_label(word: &[usize]) -> String {
    if word.is_empty() {
        "e".into()
    } else {
        word.iter().map(|i| format!("t{}", i + 1)).collect()
    }
}

/// Cayley graph `Γ(G, S)`: vertex `k` is `group.elements()[k]`, and color `i`
/// at `g` leads to `g·s_i`, arriving on the color `j` with `s_j = s_i⁻¹`.
pub fn build_cayley(group: &PermutationGroup, generating_set: &[Permutation]) -> Result<ColoredGraph> {
    if generating_set.is_empty() {
        return Err(Error::InvalidParameter("generating set is empty; degree 0 is not allowed".into()));
    }
    let inverse_color: Vec<usize> = generating_set
        .iter()
        .map(|s| {
            if !group.contains(s) {
                return Err(Error::NotInGroup { element: s.to_string() });
            }
            let inv = s.inverse();
            generating_set
                .iter()
                .position(|t| *t == inv)
                .ok_or(Error::NotInverseClosed { generator: s.to_string() })
        })
        .collect::<Result<_>>()?;
    if generating_set.iter().any(|s| s.is_identity()) {
        return Err(Error::InvalidParameter("the identity cannot be a generator".into()));
    }
    for (i, s) in generating_set.iter().enumerate() {
        if generating_set[..i].contains(s) {
            return Err(Error::InvalidParameter(format!("generator {s} is repeated")));
        }
    }

    let n = group.order();
    let mut arcs = Vec::with_capacity(n * generating_set.len());
    for (v, g) in group.elements().iter().enumerate() {
        for (i, s) in generating_set.iter().enumerate() {
            let w = group.index_of(&g.compose(s)?).expect("group is closed");
            arcs.push(Arc {
                from: v,
                from_color: i,
                to: w,
                to_color: inverse_color[i],
            });
        }
    }

    // Words by breadth-first search over colors in order from the identity.
    let mut words: Vec<Option<Vec<usize>>> = vec![None; n];
    words[0] = Some(Vec::new());
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for (i, s) in generating_set.iter().enumerate() {
            let w = group.index_of(&group.element(v).compose(s)?).expect("group is closed");
            if words[w].is_none() {
                let mut word = words[v].clone().unwrap();
                word.push(i);
                words[w] = Some(word);
                queue.push_back(w);
            }
        }
    }
    let words: Vec<Vec<usize>> = words
        .into_iter()
        .map(|w| w.ok_or_else(|| Error::InvalidParameter("generating set does not generate the group".into())))
        .collect::<Result<_>>()?;
    let labels = words.iter().map(|w| word_label(w)).collect();

    let mut graph = ColoredGraph::from_arcs(n, Some(labels), &arcs)?;
    graph.attach_cayley(CayleyData::new(
        generating_set.to_vec(),
        group.elements().to_vec(),
        words,
    ))?;
    Ok(graph)
}

/// Bit-string label of a hypercube vertex, most significant bit first.
pub fn hypercube_label(v: usize, n: usize) -> String {
    (0..n).rev().map(|b| if v >> b & 1 == 1 { '1' } else { '0' }).collect()
}

/// The `n`-dimensional hypercube as the Cayley graph of `Z₂ⁿ`.
///
/// Vertex index is the integer value of its bit-string label. Color `d`
/// flips bit `d` counted from the right, so direction 1 (color 0) joins
/// `…00` to `…01`. The group is realized as permutations of `2n` points with
/// generator `d` the transposition of points `2d` and `2d+1`.
pub fn build_hypercube(n: usize) -> Result<ColoredGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("hypercube dimension must be at least 1".into()));
    }
    if n > 20 {
        return Err(Error::InvalidParameter("hypercube dimension above 20 is not supported".into()));
    }
    let size = 1usize << n;
    let mut arcs = Vec::with_capacity(size * n);
    for v in 0..size {
        for d in 0..n {
            arcs.push(Arc {
                from: v,
                from_color: d,
                to: v ^ (1 << d),
                to_color: d,
            });
        }
    }
    let labels = (0..size).map(|v| hypercube_label(v, n)).collect();
    let mut graph = ColoredGraph::from_arcs(size, Some(labels), &arcs)?;

    let generators: Vec<Permutation> = (0..n)
        .map(|d| {
            let mut images: Vec<usize> = (0..2 * n).collect();
            images.swap(2 * d, 2 * d + 1);
            Permutation::from_images(images)
        })
        .collect::<Result<_>>()?;
    let mut elements = Vec::with_capacity(size);
    let mut words = Vec::with_capacity(size);
    for v in 0..size {
        let word: Vec<usize> = (0..n).filter(|d| v >> d & 1 == 1).collect();
        let mut images: Vec<usize> = (0..2 * n).collect();
        for &d in &word {
            images.swap(2 * d, 2 * d + 1);
        }
        elements.push(Permutation::from_images(images)?);
        words.push(word);
    }
    graph.attach_cayley(CayleyData::new(generators, elements, words))?;
    Ok(graph)
}

/// Layout of the glued-trees graph: two complete binary trees of depth `n`
/// whose leaves coincide, giving columns `j = 0..=2n` of size
/// `2^min(j, 2n−j)`. Vertices are numbered column by column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluedTreesLayout {
    pub depth: usize,
    pub column_offsets: Vec<usize>,
}

impl GluedTreesLayout {
    pub fn new(depth: usize) -> Self {
        let mut column_offsets = vec![0];
        for j in 0..=2 * depth {
            let size = 1usize << j.min(2 * depth - j);
            column_offsets.push(column_offsets.last().unwrap() + size);
        }
        GluedTreesLayout { depth, column_offsets }
    }

    pub fn num_columns(&self) -> usize {
        2 * self.depth + 1
    }

    pub fn column_size(&self, j: usize) -> usize {
        self.column_offsets[j + 1] - self.column_offsets[j]
    }

    pub fn vertex(&self, column: usize, index: usize) -> usize {
        self.column_offsets[column] + index
    }

    pub fn num_vertices(&self) -> usize {
        *self.column_offsets.last().unwrap()
    }

    pub fn column_of(&self, v: usize) -> usize {
        self.column_offsets.partition_point(|&o| o <= v) - 1
    }
}

/// Glued binary trees of depth `n`. The leaves of the left tree are the
/// leaves of the right tree (identity matching), so the central column has
/// `2^n` vertices of degree 2.
///
/// Colors: at a root, 0 and 1 lead to its children; at an internal node, 0
/// and 1 lead to its children (away from its own root) and 2 to its parent;
/// at a central vertex, 0 leads to the left parent and 1 to the right parent.
pub fn build_glued_trees(n: usize) -> Result<ColoredGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("glued-trees depth must be at least 1".into()));
    }
    if n > 16 {
        return Err(Error::InvalidParameter("glued-trees depth above 16 is not supported".into()));
    }
    let layout = GluedTreesLayout::new(n);
    let mut arcs = Vec::new();
    let mut link = |parent: usize, child_color: usize, child: usize, parent_color: usize| {
        arcs.push(Arc {
            from: parent,
            from_color: child_color,
            to: child,
            to_color: parent_color,
        });
        arcs.push(Arc {
            from: child,
            from_color: parent_color,
            to: parent,
            to_color: child_color,
        });
    };
    // Tree level `l` (distance from the root) of each side.
    let left_column = |l: usize| l;
    let right_column = |l: usize| 2 * n - l;
    for l in 0..n {
        for i in 0..(1usize << l) {
            for b in 0..2 {
                let child_index = 2 * i + b;
                let (left_up, right_up) = if l + 1 == n { (0, 1) } else { (2, 2) };
                link(
                    layout.vertex(left_column(l), i),
                    b,
                    layout.vertex(left_column(l + 1), child_index),
                    left_up,
                );
                link(
                    layout.vertex(right_column(l), i),
                    b,
                    layout.vertex(right_column(l + 1), child_index),
                    right_up,
                );
            }
        }
    }
    let labels = (0..layout.num_vertices())
        .map(|v| {
            let j = layout.column_of(v);
            format!("c{}.{}", j, v - layout.column_offsets[j])
        })
        .collect();
    ColoredGraph::from_arcs(layout.num_vertices(), Some(labels), &arcs)
}

/// Vertex permutations generating the subtree-swap symmetries of the glued
/// trees: for every left node, exchange its two subtrees together with the
/// mirrored subtrees on the right side.
pub fn glued_trees_symmetries(n: usize) -> Result<Vec<Permutation>> {
    if n == 0 {
        return Err(Error::InvalidParameter("glued-trees depth must be at least 1".into()));
    }
    let layout = GluedTreesLayout::new(n);
    let mut out = Vec::new();
    for j in 0..n {
        for k in 0..(1usize << j) {
            let mut images: Vec<usize> = (0..layout.num_vertices()).collect();
            for l in (j + 1)..=n {
                let flip = 1usize << (l - j - 1);
                for i in 0..(1usize << l) {
                    if i >> (l - j) == k {
                        images[layout.vertex(l, i)] = layout.vertex(l, i ^ flip);
                        let right = 2 * n - l;
                        images[layout.vertex(right, i)] = layout.vertex(right, i ^ flip);
                    }
                }
            }
            out.push(Permutation::from_images(images)?);
        }
    }
    Ok(out)
}
