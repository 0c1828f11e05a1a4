//! Connected polarized weighted multigraphs.
//!
//! Loops and parallel edges are first-class: every vertex keeps an explicit
//! list of half-edges, and a loop contributes two of them to its vertex.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub genus: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub u: usize,
    pub v: usize,
    pub length: Rational,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }

    /// The endpoint opposite to `p` (for a loop, `p` itself).
    pub fn other(&self, p: usize) -> usize {
        if self.u == p {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfEdge {
    pub edge: usize,
    pub other: usize,
}

/// Validated, immutable polarized weighted graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizedWeightedGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    half_edges: Vec<Vec<HalfEdge>>,
    genus: u32,
}

/// Wire format: `{"vertices":[{"id":"u","genus":0}],"edges":[{"id":"e1","u":"u","v":"v","length":"3/2"}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphSpec {
    pub vertices: Vec<VertexSpec>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexSpec {
    pub id: String,
    #[serde(default)]
    pub genus: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub id: String,
    pub u: String,
    pub v: String,
    pub length: serde_json::Value,
}

/// Integer-valued function on the vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Divisor {
    pub values: BTreeMap<String, i64>,
    #[serde(skip)]
    pub by_index: Vec<i64>,
}

impl Divisor {
    pub fn degree(&self) -> i64 {
        self.by_index.iter().sum()
    }

    pub fn is_effective(&self) -> bool {
        self.by_index.iter().all(|&k| k >= 0)
    }

    pub fn get(&self, id: &str) -> Option<i64> {
        self.values.get(id).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockKind {
    Loop,
    Bridge,
    TwoConnected,
}

#[derive(Debug, Clone)]
pub struct Block {
    pub kind: BlockKind,
    /// The block with its induced polarization.
    pub graph: PolarizedWeightedGraph,
    /// Indices into the parent's vertex list.
    pub vertices: Vec<usize>,
    /// Indices into the parent's edge list.
    pub edges: Vec<usize>,
}

/// Blocks together with the bipartite block-cut tree.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub blocks: Vec<Block>,
    /// Separating vertices (parent indices).
    pub cut_vertices: Vec<usize>,
    /// Tree edges `(block index, position in cut_vertices)`.
    pub tree_edges: Vec<(usize, usize)>,
}

impl BlockDecomposition {
    pub fn is_tree(&self) -> bool {
        let nodes = self.blocks.len() + self.cut_vertices.len();
        if nodes == 0 {
            return true;
        }
        if self.tree_edges.len() + 1 != nodes {
            return false;
        }
        let mut uf = UnionFind::new(nodes);
        for &(b, c) in &self.tree_edges {
            if !uf.union(b, self.blocks.len() + c) {
                return false;
            }
        }
        true
    }
}

/// Edge-length profile by type: non-bridges, and bridges split by the genus
/// of the smaller side.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeProfile {
    pub delta: Rational,
    pub delta0: Rational,
    /// Keyed by `h = min(h, g - h)`. Only non-polarized inputs can produce
    /// `h = 0` (a genus-zero tree hanging off a bridge).
    pub delta_h: BTreeMap<u32, Rational>,
}

/// Output of [`PolarizedWeightedGraph::contract_all_but`].
#[derive(Debug, Clone)]
pub struct Contraction {
    pub graph: PolarizedWeightedGraph,
    /// Old vertex id to new vertex id.
    pub vertex_map: BTreeMap<String, String>,
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut x = x;
        while self.parent[x] != r {
            let next = self.parent[x];
            self.parent[x] = r;
            x = next;
        }
        r
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

impl PolarizedWeightedGraph {
    /// Builds and validates a graph from resolved vertices and edges.
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        let mut seen = HashSet::new();
        for v in &vertices {
            if !seen.insert(v.id.as_str()) {
                return Err(Error::DuplicateId(v.id.clone()));
            }
        }
        let mut seen = HashSet::new();
        for e in &edges {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::DuplicateId(e.id.clone()));
            }
            if e.u >= vertices.len() || e.v >= vertices.len() {
                return Err(Error::Input(format!("edge `{}` has a dangling endpoint", e.id)));
            }
            if !e.length.is_positive() {
                return Err(Error::NonPositiveLength(e.id.clone()));
            }
        }
        let mut half_edges = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            half_edges[e.u].push(HalfEdge { edge: i, other: e.v });
            half_edges[e.v].push(HalfEdge { edge: i, other: e.u });
        }
        let mut uf = UnionFind::new(vertices.len());
        for e in &edges {
            uf.union(e.u, e.v);
        }
        if (0..vertices.len()).any(|i| uf.find(i) != 0) {
            return Err(Error::DisconnectedGraph);
        }
        let b1 = edges.len() + 1 - vertices.len();
        let genus = b1 as u32 + vertices.iter().map(|v| v.genus).sum::<u32>();
        Ok(PolarizedWeightedGraph { vertices, edges, half_edges, genus })
    }

    /// Resolves string endpoints and parses lengths exactly.
    pub fn validate(spec: &GraphSpec) -> Result<Self> {
        let index: HashMap<&str, usize> = spec
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.as_str(), i))
            .collect();
        let vertices = spec
            .vertices
            .iter()
            .map(|v| Vertex { id: v.id.clone(), genus: v.genus })
            .collect();
        let mut edges = Vec::with_capacity(spec.edges.len());
        for e in &spec.edges {
            let u = *index.get(e.u.as_str()).ok_or_else(|| Error::UnknownVertex(e.u.clone()))?;
            let v = *index.get(e.v.as_str()).ok_or_else(|| Error::UnknownVertex(e.v.clone()))?;
            let length = rational::from_json(&e.length)?;
            edges.push(Edge { id: e.id.clone(), u, v, length });
        }
        Self::new(vertices, edges)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: GraphSpec =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("graph json: {e}")))?;
        Self::validate(&spec)
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexSpec { id: v.id.clone(), genus: v.genus })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    id: e.id.clone(),
                    u: self.vertices[e.u].id.clone(),
                    v: self.vertices[e.v].id.clone(),
                    length: serde_json::Value::String(rational::format(&e.length)),
                })
                .collect(),
        }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn half_edges(&self, p: usize) -> &[HalfEdge] {
        &self.half_edges[p]
    }

    pub fn vertex_index(&self, id: &str) -> Result<usize> {
        self.vertices
            .iter()
            .position(|v| v.id == id)
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn edge_index(&self, id: &str) -> Result<usize> {
        self.edges
            .iter()
            .position(|e| e.id == id)
            .ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    pub fn first_betti(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
    }

    /// `b1 + Σ q(p)`.
    pub fn genus(&self) -> u32 {
        self.genus
    }

    /// Number of emanating half-edges; a loop counts twice.
    pub fn valency(&self, p: usize) -> usize {
        self.half_edges[p].len()
    }

    pub fn total_length(&self) -> Rational {
        self.edges.iter().map(|e| &e.length).sum()
    }

    fn canonical_values(&self) -> Vec<i64> {
        (0..self.vertices.len())
            .map(|p| self.valency(p) as i64 - 2 + 2 * self.vertices[p].genus as i64)
            .collect()
    }

    /// `K(p) = v(p) - 2 + 2 q(p)`.
    pub fn canonical_divisor(&self) -> Divisor {
        let by_index = self.canonical_values();
        let values = self
            .vertices
            .iter()
            .zip(&by_index)
            .map(|(v, &k)| (v.id.clone(), k))
            .collect();
        Divisor { values, by_index }
    }

    pub fn is_stable(&self) -> bool {
        self.canonical_values().iter().all(|&k| k > 0)
    }

    /// Checks the polarization inequality `K >= 0` at every vertex.
    pub fn check_polarized(&self) -> Result<()> {
        match self.canonical_values().iter().position(|&k| k < 0) {
            Some(p) => Err(Error::NotPolarized(self.vertices[p].id.clone())),
            None => Ok(()),
        }
    }

    /// Same combinatorics, new edge lengths keyed by edge id.
    pub fn with_lengths(&self, lengths: &BTreeMap<String, Rational>) -> Result<Self> {
        let mut edges = self.edges.clone();
        for e in &mut edges {
            e.length = lengths
                .get(&e.id)
                .cloned()
                .ok_or_else(|| Error::Input(format!("no length given for edge `{}`", e.id)))?;
        }
        for id in lengths.keys() {
            self.edge_index(id)?;
        }
        Self::new(self.vertices.clone(), edges)
    }

    /// Multiplies every edge length by `c > 0`.
    pub fn scaled(&self, c: &Rational) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge { length: &e.length * c, ..e.clone() })
            .collect();
        Self::new(self.vertices.clone(), edges)
    }

    /// Same graph with a different polarization.
    pub fn with_genera(&self, genera: &[u32]) -> Result<Self> {
        if genera.len() != self.vertices.len() {
            return Err(Error::Input("polarization has the wrong length".into()));
        }
        let vertices = self
            .vertices
            .iter()
            .zip(genera)
            .map(|(v, &g)| Vertex { id: v.id.clone(), genus: g })
            .collect();
        Self::new(vertices, self.edges.clone())
    }

    /// The minimal model: every vertex with `v = 2` and `q = 0` is suppressed
    /// and its two incident edges are merged (lengths add). The merged edge
    /// is named `a+b` after the two edges it replaces.
    pub fn minimal_model(&self) -> Result<Self> {
        if self.genus < 2 {
            return Err(Error::GenusTooSmall(self.genus));
        }
        self.check_polarized()?;
        let mut current = self.clone();
        loop {
            let found = (0..current.vertices.len()).find(|&p| {
                current.vertices[p].genus == 0
                    && current.valency(p) == 2
                    && current.half_edges[p][0].edge != current.half_edges[p][1].edge
            });
            let Some(p) = found else {
                return Ok(current);
            };
            current = current.suppress(p)?;
        }
    }

    fn suppress(&self, p: usize) -> Result<Self> {
        let (h1, h2) = (self.half_edges[p][0], self.half_edges[p][1]);
        let (e1, e2) = (&self.edges[h1.edge], &self.edges[h2.edge]);
        let remap = |i: usize| if i > p { i - 1 } else { i };
        let merged = Edge {
            id: format!("{}+{}", e1.id, e2.id),
            u: remap(h1.other),
            v: remap(h2.other),
            length: &e1.length + &e2.length,
        };
        let mut edges = Vec::with_capacity(self.edges.len() - 1);
        for (i, e) in self.edges.iter().enumerate() {
            if i == h1.edge.min(h2.edge) {
                edges.push(merged.clone());
            } else if i != h1.edge && i != h2.edge {
                edges.push(Edge { u: remap(e.u), v: remap(e.v), ..e.clone() });
            }
        }
        let mut vertices = self.vertices.clone();
        vertices.remove(p);
        Self::new(vertices, edges)
    }

    /// Biconnected components of the non-loop edges (Hopcroft–Tarjan with an
    /// edge stack) plus one block per loop.
    fn edge_blocks(&self) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut time = 0;
        let mut stack = Vec::new();
        let mut out = Vec::new();

        // Iterative DFS; each frame is (vertex, parent edge, next half-edge).
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            disc[root] = time;
            low[root] = time;
            time += 1;
            let mut frames: Vec<(usize, Option<usize>, usize)> = vec![(root, None, 0)];
            while let Some(&mut (u, pe, ref mut next)) = frames.last_mut() {
                if *next < self.half_edges[u].len() {
                    let h = self.half_edges[u][*next];
                    *next += 1;
                    let e = &self.edges[h.edge];
                    if e.is_loop() || Some(h.edge) == pe {
                        continue;
                    }
                    let w = h.other;
                    if disc[w] == usize::MAX {
                        stack.push(h.edge);
                        disc[w] = time;
                        low[w] = time;
                        time += 1;
                        frames.push((w, Some(h.edge), 0));
                    } else if disc[w] < disc[u] {
                        stack.push(h.edge);
                        low[u] = low[u].min(disc[w]);
                    }
                } else {
                    frames.pop();
                    if let (Some(&(parent, _, _)), Some(edge)) = (frames.last(), pe) {
                        low[parent] = low[parent].min(low[u]);
                        if low[u] >= disc[parent] {
                            let mut comp = Vec::new();
                            while let Some(x) = stack.pop() {
                                comp.push(x);
                                if x == edge {
                                    break;
                                }
                            }
                            comp.sort_unstable();
                            out.push(comp);
                        }
                    }
                }
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.is_loop() {
                out.push(vec![i]);
            }
        }
        out.sort();
        out
    }

    /// Genus `b1 + Σq` of the connected piece of `G` minus `removed` that
    /// contains each vertex, indexed by vertex.
    fn component_genera(&self, removed: &HashSet<usize>) -> Vec<u32> {
        let n = self.vertices.len();
        let mut uf = UnionFind::new(n);
        for (i, e) in self.edges.iter().enumerate() {
            if !removed.contains(&i) {
                uf.union(e.u, e.v);
            }
        }
        let mut edges_in = vec![0i64; n];
        let mut verts_in = vec![0i64; n];
        let mut q_in = vec![0i64; n];
        for p in 0..n {
            let r = uf.find(p);
            verts_in[r] += 1;
            q_in[r] += self.vertices[p].genus as i64;
        }
        for (i, e) in self.edges.iter().enumerate() {
            if !removed.contains(&i) {
                let r = uf.find(e.u);
                edges_in[r] += 1;
            }
        }
        (0..n)
            .map(|p| {
                let r = uf.find(p);
                (edges_in[r] - verts_in[r] + 1 + q_in[r]) as u32
            })
            .collect()
    }

    /// Block decomposition with induced polarizations: at each vertex `p` of
    /// a block `H`, `q_H(p)` is the genus of the piece of `G` minus the edges
    /// of `H` that contains `p`. Every block then has the genus of `G`.
    pub fn blocks(&self) -> BlockDecomposition {
        let comps = self.edge_blocks();
        let mut blocks = Vec::with_capacity(comps.len());
        let mut membership: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for (bi, comp) in comps.iter().enumerate() {
            let removed: HashSet<usize> = comp.iter().copied().collect();
            let genera = self.component_genera(&removed);
            let mut verts: Vec<usize> = comp
                .iter()
                .flat_map(|&e| [self.edges[e].u, self.edges[e].v])
                .collect();
            verts.sort_unstable();
            verts.dedup();
            for &p in &verts {
                membership[p].push(bi);
            }
            let local: HashMap<usize, usize> =
                verts.iter().enumerate().map(|(i, &p)| (p, i)).collect();
            let vertices = verts
                .iter()
                .map(|&p| Vertex { id: self.vertices[p].id.clone(), genus: genera[p] })
                .collect();
            let edges = comp
                .iter()
                .map(|&e| {
                    let ed = &self.edges[e];
                    Edge { id: ed.id.clone(), u: local[&ed.u], v: local[&ed.v], length: ed.length.clone() }
                })
                .collect();
            let graph = Self::new(vertices, edges).expect("blocks are connected");
            let kind = if comp.len() == 1 && self.edges[comp[0]].is_loop() {
                BlockKind::Loop
            } else if comp.len() == 1 {
                BlockKind::Bridge
            } else {
                BlockKind::TwoConnected
            };
            blocks.push(Block { kind, graph, vertices: verts, edges: comp.clone() });
        }
        let mut cut_vertices = Vec::new();
        let mut tree_edges = Vec::new();
        for (p, bs) in membership.iter().enumerate() {
            if bs.len() >= 2 {
                let c = cut_vertices.len();
                cut_vertices.push(p);
                tree_edges.extend(bs.iter().map(|&b| (b, c)));
            }
        }
        BlockDecomposition { blocks, cut_vertices, tree_edges }
    }

    /// Bridge flags by edge index.
    pub fn bridges(&self) -> Vec<bool> {
        let mut out = vec![false; self.edges.len()];
        for comp in self.edge_blocks() {
            if comp.len() == 1 && !self.edges[comp[0]].is_loop() {
                out[comp[0]] = true;
            }
        }
        out
    }

    pub fn is_bridgeless(&self) -> bool {
        !self.bridges().iter().any(|&b| b)
    }

    /// Topological 2-connectivity of the metric graph: a single loop counts,
    /// a single edge segment does not.
    pub fn is_two_connected(&self) -> bool {
        let comps = self.edge_blocks();
        comps.len() == 1 && (comps[0].len() > 1 || self.edges[comps[0][0]].is_loop())
    }

    /// Type `h` of a bridge: the genus of the smaller side after removal.
    pub fn bridge_type(&self, e: usize) -> u32 {
        let genera = self.component_genera(&HashSet::from([e]));
        let side = genera[self.edges[e].u];
        side.min(self.genus - side)
    }

    pub fn edge_profile(&self) -> EdgeProfile {
        let bridges = self.bridges();
        let mut delta0 = Rational::zero();
        let mut delta_h: BTreeMap<u32, Rational> = BTreeMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            if bridges[i] {
                *delta_h.entry(self.bridge_type(i)).or_insert_with(Rational::zero) += &e.length;
            } else {
                delta0 += &e.length;
            }
        }
        EdgeProfile { delta: self.total_length(), delta0, delta_h }
    }

    /// Contracts every edge except `e`. Contracting a non-loop edge merges its
    /// endpoints and adds their genera; contracting a loop adds one to the
    /// genus of its vertex. Each new vertex takes the id of its first member.
    pub fn contract_all_but(&self, e: usize) -> Result<Contraction> {
        if e >= self.edges.len() {
            return Err(Error::UnknownEdge(e.to_string()));
        }
        let n = self.vertices.len();
        let mut uf = UnionFind::new(n);
        for (i, ed) in self.edges.iter().enumerate() {
            if i != e {
                uf.union(ed.u, ed.v);
            }
        }
        let mut class_index: BTreeMap<usize, usize> = BTreeMap::new();
        for p in 0..n {
            let r = uf.find(p);
            let next = class_index.len();
            class_index.entry(r).or_insert(next);
        }
        let k = class_index.len();
        let mut verts = vec![0i64; k];
        let mut edges_in = vec![0i64; k];
        let mut q = vec![0i64; k];
        let mut ids = vec![String::new(); k];
        for p in 0..n {
            let c = class_index[&uf.find(p)];
            if verts[c] == 0 {
                ids[c] = self.vertices[p].id.clone();
            }
            verts[c] += 1;
            q[c] += self.vertices[p].genus as i64;
        }
        for (i, ed) in self.edges.iter().enumerate() {
            if i != e {
                edges_in[class_index[&uf.find(ed.u)]] += 1;
            }
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&c| {
            (0..n).find(|&p| class_index[&uf.find(p)] == c).unwrap_or(usize::MAX)
        });
        let vertices: Vec<Vertex> = order
            .iter()
            .map(|&c| Vertex {
                id: ids[c].clone(),
                genus: (edges_in[c] - verts[c] + 1 + q[c]) as u32,
            })
            .collect();
        let pos: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let ed = &self.edges[e];
        let edge = Edge {
            id: ed.id.clone(),
            u: pos[&class_index[&uf.find(ed.u)]],
            v: pos[&class_index[&uf.find(ed.v)]],
            length: ed.length.clone(),
        };
        let vertex_map = (0..n)
            .map(|p| (self.vertices[p].id.clone(), ids[class_index[&uf.find(p)]].clone()))
            .collect();
        let graph = Self::new(vertices, vec![edge])?;
        Ok(Contraction { graph, vertex_map })
    }

    /// The graph with edge `e` removed, or `None` if that disconnects it.
    pub fn delete_edge(&self, e: usize) -> Option<Self> {
        let mut edges = self.edges.clone();
        edges.remove(e);
        Self::new(self.vertices.clone(), edges).ok()
    }

    pub fn is_point(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Convenience constructor used throughout tests and fixtures:
/// `(id, genus)` pairs and `(id, u, v, length)` quadruples.
pub fn build(vertices: &[(&str, u32)], edges: &[(&str, &str, &str, Rational)]) -> Result<PolarizedWeightedGraph> {
    let spec = GraphSpec {
        vertices: vertices
            .iter()
            .map(|&(id, genus)| VertexSpec { id: id.to_string(), genus })
            .collect(),
        edges: edges
            .iter()
            .map(|(id, u, v, l)| EdgeSpec {
                id: id.to_string(),
                u: u.to_string(),
                v: v.to_string(),
                length: serde_json::Value::String(rational::format(l)),
            })
            .collect(),
    };
    PolarizedWeightedGraph::validate(&spec)
}

/// Named fixture graphs.
pub mod fixtures {
    use super::*;
    use crate::rational::int;

    /// Two vertices joined by `k` parallel edges.
    pub fn banana(lengths: &[Rational], q: (u32, u32)) -> PolarizedWeightedGraph {
        let names: Vec<String> = (1..=lengths.len()).map(|i| format!("e{i}")).collect();
        let edges: Vec<_> = names
            .iter()
            .zip(lengths)
            .map(|(n, l)| (n.as_str(), "u", "v", l.clone()))
            .collect();
        build(&[("u", q.0), ("v", q.1)], &edges).expect("banana")
    }

    /// Two-gon of genus `g` with vertex genera `h` and `g - h - 1`.
    pub fn two_gon(g: u32, h: u32, m1: Rational, m2: Rational) -> PolarizedWeightedGraph {
        banana(&[m1, m2], (h, g - h - 1))
    }

    /// Three parallel edges.
    pub fn theta(m: [Rational; 3]) -> PolarizedWeightedGraph {
        banana(&m, (0, 0))
    }

    /// Loop `a` at `u`, bridge `b` from `u` to `v`, loop `c` at `v`.
    pub fn dumbbell(a: Rational, b: Rational, c: Rational) -> PolarizedWeightedGraph {
        build(
            &[("u", 0), ("v", 0)],
            &[("a", "u", "u", a), ("b", "u", "v", b), ("c", "v", "v", c)],
        )
        .expect("dumbbell")
    }

    /// One vertex of genus `q` carrying loops of the given lengths.
    pub fn loops(lengths: &[Rational], q: u32) -> PolarizedWeightedGraph {
        let names: Vec<String> = (1..=lengths.len()).map(|i| format!("l{i}")).collect();
        let edges: Vec<_> = names
            .iter()
            .zip(lengths)
            .map(|(n, l)| (n.as_str(), "p", "p", l.clone()))
            .collect();
        build(&[("p", q)], &edges).expect("loops")
    }

    pub fn segment(h: u32, k: u32, len: Rational) -> PolarizedWeightedGraph {
        build(&[("u", h), ("v", k)], &[("e", "u", "v", len)]).expect("segment")
    }

    pub fn point(q: u32) -> PolarizedWeightedGraph {
        build(&[("p", q)], &[]).expect("point")
    }

    /// Complete graph on four vertices, `q ≡ 0`.
    pub fn k4(lengths: [Rational; 6]) -> PolarizedWeightedGraph {
        let pairs = [("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")];
        let names: Vec<String> = (1..=6).map(|i| format!("e{i}")).collect();
        let edges: Vec<_> = pairs
            .iter()
            .zip(&names)
            .zip(lengths)
            .map(|((&(u, v), n), l)| (n.as_str(), u, v, l))
            .collect();
        build(&[("a", 0), ("b", 0), ("c", 0), ("d", 0)], &edges).expect("k4")
    }

    pub fn k4_unit() -> PolarizedWeightedGraph {
        k4(std::array::from_fn(|_| int(1)))
    }

    /// Chain of `k` loops joined by bridges: loop, bridge, loop, ..., loop.
    pub fn caterpillar(k: usize, len: &Rational) -> PolarizedWeightedGraph {
        let ids: Vec<String> = (0..k).map(|i| format!("p{i}")).collect();
        let mut names = Vec::new();
        for i in 0..k {
            names.push((format!("l{i}"), i, i));
            if i + 1 < k {
                names.push((format!("b{i}"), i, i + 1));
            }
        }
        let verts: Vec<_> = ids.iter().map(|s| (s.as_str(), 0)).collect();
        let edges: Vec<_> = names
            .iter()
            .map(|(n, a, b)| (n.as_str(), ids[*a].as_str(), ids[*b].as_str(), len.clone()))
            .collect();
        build(&verts, &edges).expect("caterpillar")
    }

    pub fn unit() -> Rational {
        Rational::one()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn validation_errors() {
        let two = build(&[("u", 1), ("v", 1)], &[("e", "u", "v", int(1))]).unwrap();
        assert_eq!(two.genus(), 2);
        assert_eq!(build(&[("u", 1), ("v", 1)], &[]).unwrap_err(), Error::DisconnectedGraph);
        assert_eq!(
            build(&[("u", 1), ("v", 1)], &[("e", "u", "v", int(0))]).unwrap_err(),
            Error::NonPositiveLength("e".into())
        );
        assert_eq!(build(&[], &[]).unwrap_err(), Error::EmptyVertexSet);
        assert!(matches!(
            build(&[("u", 1)], &[("e", "u", "w", int(1))]),
            Err(Error::UnknownVertex(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"vertices":[{"id":"u","genus":0},{"id":"v","genus":1}],
            "edges":[{"id":"e1","u":"u","v":"v","length":"3/2"},{"id":"e2","u":"u","v":"v","length":2}]}"#;
        let g = PolarizedWeightedGraph::from_json(text).unwrap();
        assert_eq!(g.edges()[0].length, ratio(3, 2));
        assert_eq!(g.edges()[1].length, int(2));
        let back = serde_json::to_string(&g.to_spec()).unwrap();
        assert_eq!(PolarizedWeightedGraph::from_json(&back).unwrap(), g);
    }

    #[test]
    fn genus_examples() {
        assert_eq!(theta([unit(), unit(), unit()]).genus(), 2);
        assert_eq!(loops(&[unit()], 1).genus(), 2);
        assert_eq!(segment(2, 3, unit()).genus(), 5);
    }

    #[test]
    fn canonical_divisor_examples() {
        let g = 5;
        let lengths: Vec<_> = (0..=g).map(|_| unit()).collect();
        let k = banana(&lengths, (0, 0)).canonical_divisor();
        assert_eq!(k.by_index, vec![g as i64 - 1, g as i64 - 1]);
        let k = two_gon(5, 2, unit(), unit()).canonical_divisor();
        assert_eq!(k.by_index, vec![4, 4]);
        assert_eq!(point(3).canonical_divisor().by_index, vec![4]);
        for gr in [banana(&lengths, (0, 0)), dumbbell(unit(), unit(), unit()), k4_unit()] {
            assert_eq!(gr.canonical_divisor().degree(), 2 * gr.genus() as i64 - 2);
        }
    }

    #[test]
    fn stability() {
        assert!(!two_gon(3, 0, unit(), unit()).is_stable());
        assert!(theta([unit(), unit(), unit()]).is_stable());
        let path = build(&[("a", 1), ("m", 0), ("b", 1)], &[("x", "a", "m", int(1)), ("y", "m", "b", int(1))]).unwrap();
        assert!(!path.is_stable());
    }

    #[test]
    fn minimal_model_suppresses_subdivisions() {
        let sub = build(
            &[("u", 0), ("v", 0), ("w", 0)],
            &[("e1", "u", "v", int(1)), ("e2", "u", "v", int(2)), ("e3a", "u", "w", int(1)), ("e3b", "w", "v", ratio(1, 2))],
        )
        .unwrap();
        let mm = sub.minimal_model().unwrap();
        assert_eq!(mm.vertices().len(), 2);
        assert_eq!(mm.edges().len(), 3);
        let merged = mm.edges().iter().find(|e| e.id == "e3a+e3b").unwrap();
        assert_eq!(merged.length, ratio(3, 2));
        assert!(mm.is_stable());
        let th = theta([unit(), int(2), int(3)]);
        assert_eq!(th.minimal_model().unwrap(), th);
        let circle = loops(&[unit()], 0);
        assert_eq!(circle.minimal_model().unwrap_err(), Error::GenusTooSmall(1));
    }

    #[test]
    fn minimal_model_of_subdivided_loop() {
        // A loop at p subdivided at w: p -a- w -b- p with an extra loop at p.
        let g = build(
            &[("p", 0), ("w", 0)],
            &[("a", "p", "w", int(1)), ("b", "w", "p", int(2)), ("l", "p", "p", int(1))],
        )
        .unwrap();
        let mm = g.minimal_model().unwrap();
        assert_eq!(mm.vertices().len(), 1);
        assert!(mm.edges().iter().all(|e| e.is_loop()));
        assert_eq!(mm.total_length(), int(4));
    }

    #[test]
    fn dumbbell_blocks() {
        let d = dumbbell(int(1), int(2), int(3));
        let bd = d.blocks();
        assert_eq!(bd.blocks.len(), 3);
        assert!(bd.is_tree());
        for b in &bd.blocks {
            assert_eq!(b.graph.genus(), 2);
        }
        let bridge = bd.blocks.iter().find(|b| b.kind == BlockKind::Bridge).unwrap();
        assert_eq!(bridge.graph.vertices().iter().map(|v| v.genus).collect::<Vec<_>>(), vec![1, 1]);
        let lp = bd.blocks.iter().filter(|b| b.kind == BlockKind::Loop).count();
        assert_eq!(lp, 2);
        for b in bd.blocks.iter().filter(|b| b.kind == BlockKind::Loop) {
            assert_eq!(b.graph.vertices()[0].genus, 1);
        }
    }

    #[test]
    fn simple_block_cases() {
        let th = theta([unit(), unit(), unit()]);
        let bd = th.blocks();
        assert_eq!(bd.blocks.len(), 1);
        assert_eq!(bd.blocks[0].kind, BlockKind::TwoConnected);
        assert_eq!(bd.blocks[0].graph, th);
        let seg = segment(1, 1, unit()).blocks();
        assert_eq!(seg.blocks.len(), 1);
        assert_eq!(seg.blocks[0].kind, BlockKind::Bridge);
        assert!(point(2).blocks().blocks.is_empty());
    }

    #[test]
    fn two_connectivity() {
        assert!(loops(&[unit()], 1).is_two_connected());
        assert!(!segment(1, 1, unit()).is_two_connected());
        assert!(theta([unit(), unit(), unit()]).is_two_connected());
        assert!(!loops(&[unit(), unit()], 0).is_two_connected());
        assert!(!dumbbell(unit(), unit(), unit()).is_two_connected());
        assert!(k4_unit().is_two_connected());
    }

    #[test]
    fn profiles() {
        let d = dumbbell(int(1), int(2), int(3)).edge_profile();
        assert_eq!(d.delta0, int(4));
        assert_eq!(d.delta_h.get(&1), Some(&int(2)));
        assert_eq!(d.delta, int(6));
        let b = banana(&[int(1), int(2), int(3)], (0, 0)).edge_profile();
        assert_eq!(b.delta0, int(6));
        assert!(b.delta_h.is_empty());
        let t = two_gon(4, 1, int(2), int(5)).edge_profile();
        assert_eq!(t.delta0, int(7));
    }

    #[test]
    fn contractions() {
        let th = theta([int(1), int(2), int(3)]);
        let c = th.contract_all_but(0).unwrap();
        assert_eq!(c.graph.vertices().len(), 1);
        assert_eq!(c.graph.vertices()[0].genus, 1);
        assert_eq!(c.graph.edges()[0].length, int(1));
        assert!(c.graph.edges()[0].is_loop());
        let d = dumbbell(int(1), int(2), int(3));
        let c = d.contract_all_but(1).unwrap();
        assert_eq!(c.graph.vertices().iter().map(|v| v.genus).collect::<Vec<_>>(), vec![1, 1]);
        assert!(!c.graph.edges()[0].is_loop());
        let tg = two_gon(4, 1, int(1), int(1));
        let c = tg.contract_all_but(0).unwrap();
        assert_eq!(c.graph.vertices()[0].genus, 3);
        assert_eq!(c.vertex_map["v"], "u");
    }

    #[test]
    fn caterpillar_shape() {
        let c = caterpillar(3, &unit());
        assert_eq!(c.genus(), 3);
        assert_eq!(c.blocks().blocks.len(), 5);
        let p = c.edge_profile();
        assert_eq!(p.delta_h.get(&1), Some(&int(2)));
    }
}
