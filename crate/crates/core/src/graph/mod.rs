//! Marked dual graphs of nodal curves and level structures on them.
//!
//! A dual graph has one vertex per irreducible component (labelled by the
//! genus of its normalization), one edge per node and one leg per marked
//! point. Every edge is an ordered pair of half-edges `(edge, 0)` and
//! `(edge, 1)` sitting over `ends[0]` and `ends[1]`; the half-edge id used in
//! the exchange formats is `"<edge id>.<side>"`.

mod canon;
mod enumerate;
mod stabilize;

pub(crate) use canon::next_permutation;
pub use canon::{canonical_encoding, canonical_form, isomorphic, CanonicalForm, ColoredGraph};
pub use enumerate::{enumerate_level_structures, level_graph_colors, ordered_partition_count, DEFAULT_ENUMERATION_CAP};
pub use stabilize::{stabilize_graph, ContractionMap};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::GraphError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub id: String,
    pub genus: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: String,
    pub ends: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Leg {
    pub id: String,
    pub vertex: usize,
    pub mu: i64,
}

/// One side of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfEdge {
    pub edge: usize,
    pub side: usize,
}

impl HalfEdge {
    pub fn new(edge: usize, side: usize) -> Self {
        debug_assert!(side < 2);
        HalfEdge { edge, side }
    }

    pub fn opposite(self) -> Self {
        HalfEdge {
            edge: self.edge,
            side: 1 - self.side,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedDualGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    legs: Vec<Leg>,
}

impl MarkedDualGraph {
    /// Builds a graph, rejecting duplicate ids and dangling references.
    /// Connectivity and stability are left to [`validate`].
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>, legs: Vec<Leg>) -> Result<Self, GraphError> {
        check_unique("vertex", vertices.iter().map(|v| v.id.as_str()))?;
        check_unique("edge", edges.iter().map(|e| e.id.as_str()))?;
        check_unique("leg", legs.iter().map(|l| l.id.as_str()))?;
        for e in &edges {
            for &end in &e.ends {
                if end >= vertices.len() {
                    return Err(GraphError::UnknownVertex {
                        location: format!("edge `{}`", e.id),
                        id: end.to_string(),
                    });
                }
            }
        }
        for l in &legs {
            if l.vertex >= vertices.len() {
                return Err(GraphError::UnknownVertex {
                    location: format!("leg `{}`", l.id),
                    id: l.vertex.to_string(),
                });
            }
        }
        Ok(MarkedDualGraph { vertices, edges, legs })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn leg_index(&self, id: &str) -> Option<usize> {
        self.legs.iter().position(|l| l.id == id)
    }

    /// Vertex carrying the given half-edge.
    pub fn half_vertex(&self, h: HalfEdge) -> usize {
        self.edges[h.edge].ends[h.side]
    }

    pub fn half_id(&self, h: HalfEdge) -> String {
        format!("{}.{}", self.edges[h.edge].id, h.side)
    }

    /// Parses `"<edge>.<side>"`.
    pub fn parse_half(&self, id: &str) -> Option<HalfEdge> {
        let (edge, side) = id.rsplit_once('.')?;
        let side = match side {
            "0" => 0,
            "1" => 1,
            _ => return None,
        };
        Some(HalfEdge::new(self.edge_index(edge)?, side))
    }

    /// All half-edges sitting over `v`; a self-loop contributes both sides.
    pub fn halves_at(&self, v: usize) -> Vec<HalfEdge> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            for side in 0..2 {
                if e.ends[side] == v {
                    out.push(HalfEdge::new(i, side));
                }
            }
        }
        out
    }

    pub fn legs_at(&self, v: usize) -> Vec<usize> {
        (0..self.legs.len()).filter(|&l| self.legs[l].vertex == v).collect()
    }

    /// Number of edge ends plus legs at `v`.
    pub fn valence(&self, v: usize) -> usize {
        self.halves_at(v).len() + self.legs_at(v).len()
    }

    /// Arithmetic genus `sum g_v + |E| - |V| + 1` (assumes connectivity).
    pub fn genus(&self) -> i64 {
        let g: i64 = self.vertices.iter().map(|v| v.genus as i64).sum();
        g + self.edges.len() as i64 - self.vertices.len() as i64 + 1
    }

    pub fn mu_sum(&self) -> i64 {
        self.legs.iter().map(|l| l.mu).sum()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                for side in 0..2 {
                    if e.ends[side] == v && !seen[e.ends[1 - side]] {
                        seen[e.ends[1 - side]] = true;
                        stack.push(e.ends[1 - side]);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// `2 g(v) - 2 + valence(v)`; stable vertices have this positive.
    pub fn stability_excess(&self, v: usize) -> i64 {
        2 * self.vertices[v].genus as i64 - 2 + self.valence(v) as i64
    }

    /// Whether `v` carries a leg with positive mu.
    pub fn has_marked_zero(&self, v: usize) -> bool {
        self.legs.iter().any(|l| l.vertex == v && l.mu > 0)
    }

    /// Legs in the relative-homology base set Z: marked points with mu >= 0.
    pub fn zero_legs(&self) -> Vec<usize> {
        (0..self.legs.len()).filter(|&l| self.legs[l].mu >= 0).collect()
    }

    /// Returns a copy with the mu-labels replaced, in leg order.
    pub fn with_mu(&self, mu: &[i64]) -> Result<Self, GraphError> {
        if mu.len() != self.legs.len() {
            return Err(GraphError::Invalid {
                location: "mu".into(),
                message: format!("{} entries for {} legs", mu.len(), self.legs.len()),
            });
        }
        let mut g = self.clone();
        for (leg, &m) in g.legs.iter_mut().zip(mu) {
            leg.mu = m;
        }
        Ok(g)
    }
}

fn check_unique<'a>(kind: &'static str, ids: impl Iterator<Item = &'a str>) -> Result<(), GraphError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(GraphError::DuplicateId {
                kind,
                id: id.to_string(),
            });
        }
    }
    Ok(())
}

/// Convenience builder keyed by string ids.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    vertices: Vec<Vertex>,
    edges: Vec<(String, String, String)>,
    legs: Vec<(String, String, i64)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(mut self, id: &str, genus: u32) -> Self {
        self.vertices.push(Vertex {
            id: id.to_string(),
            genus,
        });
        self
    }

    pub fn edge(mut self, id: &str, a: &str, b: &str) -> Self {
        self.edges.push((id.to_string(), a.to_string(), b.to_string()));
        self
    }

    pub fn leg(mut self, id: &str, vertex: &str, mu: i64) -> Self {
        self.legs.push((id.to_string(), vertex.to_string(), mu));
        self
    }

    pub fn build(self) -> Result<MarkedDualGraph, GraphError> {
        let index: HashMap<&str, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.as_str(), i))
            .collect();
        let lookup = |loc: String, id: &str| {
            index.get(id).copied().ok_or(GraphError::UnknownVertex {
                location: loc,
                id: id.to_string(),
            })
        };
        let mut edges = Vec::new();
        for (id, a, b) in &self.edges {
            edges.push(Edge {
                id: id.clone(),
                ends: [lookup(format!("edge `{id}`"), a)?, lookup(format!("edge `{id}`"), b)?],
            });
        }
        let mut legs = Vec::new();
        for (id, v, mu) in &self.legs {
            legs.push(Leg {
                id: id.clone(),
                vertex: lookup(format!("leg `{id}`"), v)?,
                mu: *mu,
            });
        }
        MarkedDualGraph::new(self.vertices.clone(), edges, legs)
    }
}

/// Result of [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphDiagnostics {
    pub connected: bool,
    pub genus: i64,
    pub mu_sum: i64,
    /// Ids of vertices with `2g - 2 + valence <= 0`.
    pub unstable_vertices: Vec<String>,
}

impl GraphDiagnostics {
    pub fn is_stable(&self) -> bool {
        self.connected && self.unstable_vertices.is_empty()
    }
}

pub fn validate(graph: &MarkedDualGraph) -> GraphDiagnostics {
    let unstable_vertices = (0..graph.vertex_count())
        .filter(|&v| graph.stability_excess(v) <= 0)
        .map(|v| graph.vertices[v].id.clone())
        .collect();
    GraphDiagnostics {
        connected: graph.is_connected(),
        genus: graph.genus(),
        mu_sum: graph.mu_sum(),
        unstable_vertices,
    }
}

/// A normalized level function: the attained levels are exactly `0, -1, ..., -L`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelStructure {
    levels: Vec<i64>,
}

impl LevelStructure {
    /// Normalizes an arbitrary integer level assignment by order-preserving relabeling.
    pub fn normalized(raw: &[i64]) -> Self {
        let distinct: BTreeSet<i64> = raw.iter().copied().collect();
        let rank: BTreeMap<i64, i64> = distinct
            .iter()
            .rev()
            .enumerate()
            .map(|(i, &l)| (l, -(i as i64)))
            .collect();
        LevelStructure {
            levels: raw.iter().map(|l| rank[l]).collect(),
        }
    }

    pub fn for_graph(graph: &MarkedDualGraph, raw: &[i64]) -> Result<Self, GraphError> {
        if raw.len() != graph.vertex_count() {
            return Err(GraphError::LevelArity {
                expected: graph.vertex_count(),
                got: raw.len(),
            });
        }
        Ok(Self::normalized(raw))
    }

    /// Every vertex on level 0.
    pub fn flat(n: usize) -> Self {
        LevelStructure { levels: vec![0; n] }
    }

    pub fn level(&self, v: usize) -> i64 {
        self.levels[v]
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.levels
    }

    pub fn min_level(&self) -> i64 {
        self.levels.iter().copied().min().unwrap_or(0)
    }

    /// Attained levels from the top down.
    pub fn attained(&self) -> Vec<i64> {
        (self.min_level()..=0).rev().collect()
    }

    pub fn is_horizontal(&self, graph: &MarkedDualGraph, e: usize) -> bool {
        let [a, b] = graph.edges()[e].ends;
        self.levels[a] == self.levels[b]
    }

    /// The side of `e` playing the role of `q_e^+`: the higher end, or at
    /// horizontal edges the end whose vertex id is lexicographically smaller
    /// (side 0 for self-loops).
    pub fn upper_half(&self, graph: &MarkedDualGraph, e: usize) -> HalfEdge {
        let [a, b] = graph.edges()[e].ends;
        let side = match self.levels[a].cmp(&self.levels[b]) {
            std::cmp::Ordering::Greater => 0,
            std::cmp::Ordering::Less => 1,
            std::cmp::Ordering::Equal => {
                if graph.vertices()[b].id < graph.vertices()[a].id {
                    1
                } else {
                    0
                }
            }
        };
        HalfEdge::new(e, side)
    }

    pub fn lower_half(&self, graph: &MarkedDualGraph, e: usize) -> HalfEdge {
        self.upper_half(graph, e).opposite()
    }

    /// `(l(e+), l(e-))`.
    pub fn edge_levels(&self, graph: &MarkedDualGraph, e: usize) -> (i64, i64) {
        let up = self.upper_half(graph, e);
        (
            self.levels[graph.half_vertex(up)],
            self.levels[graph.half_vertex(up.opposite())],
        )
    }
}

/// A piece of the graph cut out by levels: either the subgraph of levels
/// `<= i`, or the level-`i` slice with a half-leg `h(q_e^+)` for every edge
/// running from level `i` to a lower level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSubcomplex {
    pub level: i64,
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub legs: Vec<usize>,
    pub half_legs: Vec<HalfEdge>,
}

impl LevelSubcomplex {
    pub fn contains_vertex(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

pub fn subcomplex_leq(graph: &MarkedDualGraph, levels: &LevelStructure, i: i64) -> LevelSubcomplex {
    let vertices: Vec<usize> = (0..graph.vertex_count()).filter(|&v| levels.level(v) <= i).collect();
    let inside = |v: usize| levels.level(v) <= i;
    let edges = (0..graph.edge_count())
        .filter(|&e| graph.edges()[e].ends.iter().all(|&v| inside(v)))
        .collect();
    let legs = (0..graph.legs().len())
        .filter(|&l| inside(graph.legs()[l].vertex))
        .collect();
    LevelSubcomplex {
        level: i,
        vertices,
        edges,
        legs,
        half_legs: Vec::new(),
    }
}

pub fn subcomplex_eq(graph: &MarkedDualGraph, levels: &LevelStructure, i: i64) -> LevelSubcomplex {
    let vertices: Vec<usize> = (0..graph.vertex_count()).filter(|&v| levels.level(v) == i).collect();
    let mut edges = Vec::new();
    let mut half_legs = Vec::new();
    for e in 0..graph.edge_count() {
        let (up, down) = levels.edge_levels(graph, e);
        if up == i && down == i {
            edges.push(e);
        } else if up == i && down < i {
            half_legs.push(levels.upper_half(graph, e));
        }
    }
    let legs = (0..graph.legs().len())
        .filter(|&l| levels.level(graph.legs()[l].vertex) == i)
        .collect();
    LevelSubcomplex {
        level: i,
        vertices,
        edges,
        legs,
        half_legs,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn dollar() -> MarkedDualGraph {
        GraphBuilder::new()
            .vertex("v1", 0)
            .vertex("v2", 0)
            .edge("q1", "v1", "v2")
            .edge("q2", "v1", "v2")
            .edge("q3", "v1", "v2")
            .leg("p", "v1", -3)
            .leg("z1", "v2", 1)
            .leg("z2", "v2", 1)
            .leg("z3", "v2", 1)
            .build()
            .unwrap()
    }

    #[test]
    fn theta_graph_is_stable_genus_two() {
        let g = GraphBuilder::new()
            .vertex("a", 0)
            .vertex("b", 0)
            .edge("e1", "a", "b")
            .edge("e2", "a", "b")
            .edge("e3", "a", "b")
            .build()
            .unwrap();
        let d = validate(&g);
        assert!(d.connected);
        assert_eq!(d.genus, 2);
        assert!(d.is_stable());
    }

    #[test]
    fn dollar_graph_diagnostics() {
        let d = validate(&dollar());
        assert_eq!(d.genus, 2);
        assert_eq!(d.mu_sum, 0);
        assert!(d.is_stable());
    }

    #[test]
    fn single_leg_vertex_is_unstable() {
        let g = GraphBuilder::new().vertex("v", 0).leg("x", "v", 0).build().unwrap();
        let d = validate(&g);
        assert_eq!(d.unstable_vertices, vec!["v".to_string()]);
        assert!(!d.is_stable());
    }

    #[test]
    fn structural_errors_name_the_location() {
        let err = GraphBuilder::new()
            .vertex("v", 0)
            .edge("e", "v", "w")
            .build()
            .unwrap_err();
        assert_eq!(
            err,
            GraphError::UnknownVertex {
                location: "edge `e`".into(),
                id: "w".into()
            }
        );
        let err = GraphBuilder::new().vertex("v", 0).vertex("v", 1).build().unwrap_err();
        assert!(matches!(err, GraphError::DuplicateId { kind: "vertex", .. }));
    }

    #[test]
    fn disconnected_graph_reported() {
        let g = GraphBuilder::new().vertex("a", 1).vertex("b", 1).build().unwrap();
        assert!(!validate(&g).connected);
    }

    #[test]
    fn normalization_compresses_levels() {
        let l = LevelStructure::normalized(&[-7, 0, -3, -7]);
        assert_eq!(l.as_slice(), &[-2, 0, -1, -2]);
        assert_eq!(l.attained(), vec![0, -1, -2]);
    }

    #[test]
    fn dollar_subcomplexes() {
        let g = dollar();
        let levels = LevelStructure::normalized(&[0, -1]);
        let below = subcomplex_leq(&g, &levels, -1);
        assert_eq!(below.vertices, vec![1]);
        assert!(below.edges.is_empty());
        assert_eq!(below.legs, vec![1, 2, 3]);

        let whole = subcomplex_leq(&g, &levels, 0);
        assert_eq!(whole.vertices, vec![0, 1]);
        assert_eq!(whole.edges, vec![0, 1, 2]);

        assert!(subcomplex_leq(&g, &levels, -5).vertices.is_empty());

        let top = subcomplex_eq(&g, &levels, 0);
        assert_eq!(top.vertices, vec![0]);
        assert_eq!(top.legs, vec![0]);
        assert_eq!(
            top.half_legs,
            vec![HalfEdge::new(0, 0), HalfEdge::new(1, 0), HalfEdge::new(2, 0)]
        );
    }

    #[test]
    fn horizontal_slice_keeps_horizontal_edge() {
        let g = GraphBuilder::new()
            .vertex("v1", 1)
            .vertex("v2", 0)
            .vertex("v3", 0)
            .edge("q1", "v1", "v2")
            .edge("q2", "v1", "v3")
            .edge("q3", "v2", "v3")
            .leg("z1", "v1", 1)
            .leg("p", "v1", -3)
            .leg("z2", "v2", 1)
            .leg("z3", "v3", 1)
            .build()
            .unwrap();
        let levels = LevelStructure::normalized(&[0, -1, -1]);
        let slice = subcomplex_eq(&g, &levels, -1);
        assert_eq!(slice.vertices, vec![1, 2]);
        assert_eq!(slice.edges, vec![2]);
        assert_eq!(slice.legs, vec![2, 3]);
        assert!(slice.half_legs.is_empty());
    }

    #[test]
    fn upper_half_convention() {
        let g = dollar();
        let flat = LevelStructure::flat(2);
        // equal levels: lexicographically smaller vertex id is the + side
        assert_eq!(flat.upper_half(&g, 0), HalfEdge::new(0, 0));
        let tilted = LevelStructure::normalized(&[-1, 0]);
        assert_eq!(tilted.upper_half(&g, 0), HalfEdge::new(0, 1));
        assert_eq!(tilted.edge_levels(&g, 0), (0, -1));
    }

    #[test]
    fn half_ids_round_trip() {
        let g = dollar();
        let h = HalfEdge::new(2, 1);
        assert_eq!(g.half_id(h), "q3.1");
        assert_eq!(g.parse_half("q3.1"), Some(h));
        assert_eq!(g.parse_half("q3.2"), None);
        assert_eq!(g.parse_half("nope.0"), None);
    }
}
