//! Relative first homology `H_1(Γ, Z; Z)` of a dual graph, where `Z` is the
//! set of marked points with non-negative label, and its level filtration.
//!
//! 1-cells are the edges (oriented from side 0 to side 1) and the legs in
//! `Z`, each oriented from its vertex out to the marked point. Since the
//! marked points are collapsed, the boundary of a leg cell is `-v`.

use std::collections::BTreeMap;

use crate::error::EvError;
use crate::graph::{HalfEdge, LevelStructure, MarkedDualGraph};
use crate::linalg::integer_kernel;
use crate::twr::PointRef;

/// Indices of the legs in `Z`: marked zeros and unlabeled points (`mu >= 0`).
pub fn z_legs(graph: &MarkedDualGraph) -> Vec<usize> {
    graph.zero_legs()
}

/// An integer chain on edges and legs whose boundary vanishes modulo `Z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelativeCycle {
    pub edges: Vec<i64>,
    pub legs: Vec<i64>,
}

impl RelativeCycle {
    pub fn zero(graph: &MarkedDualGraph) -> Self {
        RelativeCycle {
            edges: vec![0; graph.edge_count()],
            legs: vec![0; graph.legs().len()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.edges.iter().chain(&self.legs).all(|&c| c == 0)
    }

    pub fn add_scaled(&mut self, other: &RelativeCycle, k: i64) {
        for (a, b) in self.edges.iter_mut().zip(&other.edges) {
            *a += k * b;
        }
        for (a, b) in self.legs.iter_mut().zip(&other.legs) {
            *a += k * b;
        }
    }

    /// Boundary in `C_0`, one entry per vertex (leg endpoints are collapsed).
    pub fn boundary(&self, graph: &MarkedDualGraph) -> Vec<i64> {
        let mut b = vec![0; graph.vertex_count()];
        for (e, &c) in self.edges.iter().enumerate() {
            let [a, z] = graph.edges()[e].ends;
            b[z] += c;
            b[a] -= c;
        }
        for (l, &c) in self.legs.iter().enumerate() {
            b[graph.legs()[l].vertex] -= c;
        }
        b
    }

    /// A cycle is admissible if its boundary vanishes and it only uses legs in `Z`.
    pub fn is_cycle(&self, graph: &MarkedDualGraph) -> bool {
        self.boundary(graph).iter().all(|&x| x == 0)
            && self
                .legs
                .iter()
                .enumerate()
                .all(|(l, &c)| c == 0 || graph.legs()[l].mu >= 0)
    }

    /// Vertices touched by the support.
    pub fn support(&self, graph: &MarkedDualGraph) -> Vec<usize> {
        let mut vs: Vec<usize> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .flat_map(|(e, _)| graph.edges()[e].ends)
            .chain(
                self.legs
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(l, _)| graph.legs()[l].vertex),
            )
            .collect();
        vs.sort();
        vs.dedup();
        vs
    }

    /// Highest level met by the support; `None` for the zero chain.
    pub fn top_level(&self, graph: &MarkedDualGraph, levels: &LevelStructure) -> Option<i64> {
        self.support(graph).into_iter().map(|v| levels.level(v)).max()
    }
}

fn kernel_on(
    graph: &MarkedDualGraph,
    edge_ok: &dyn Fn(usize) -> bool,
    vertex_ok: &dyn Fn(usize) -> bool,
) -> Vec<RelativeCycle> {
    let edges: Vec<usize> = (0..graph.edge_count()).filter(|&e| edge_ok(e)).collect();
    let legs: Vec<usize> = z_legs(graph)
        .into_iter()
        .filter(|&l| vertex_ok(graph.legs()[l].vertex))
        .collect();
    let ncols = edges.len() + legs.len();
    if ncols == 0 {
        return Vec::new();
    }
    let mut rows = vec![vec![0i64; ncols]; graph.vertex_count()];
    for (j, &e) in edges.iter().enumerate() {
        let [a, z] = graph.edges()[e].ends;
        rows[z][j] += 1;
        rows[a][j] -= 1;
    }
    for (j, &l) in legs.iter().enumerate() {
        rows[graph.legs()[l].vertex][edges.len() + j] -= 1;
    }
    integer_kernel(&rows, ncols)
        .into_iter()
        .map(|k| {
            let mut c = RelativeCycle::zero(graph);
            for (j, &e) in edges.iter().enumerate() {
                c.edges[e] = k[j];
            }
            for (j, &l) in legs.iter().enumerate() {
                c.legs[l] = k[edges.len() + j];
            }
            c
        })
        .collect()
}

/// A basis of `H_1(Γ, Z; Z)`.
pub fn relative_h1(graph: &MarkedDualGraph) -> Vec<RelativeCycle> {
    kernel_on(graph, &|_| true, &|_| true)
}

/// `|E| - |V| + 1 + max(|Z| - 1, 0)` for a connected graph.
pub fn expected_rank(graph: &MarkedDualGraph) -> usize {
    let z = z_legs(graph).len();
    graph.edge_count() + 1 + z.saturating_sub(1) - graph.vertex_count()
}

/// Generators of `L_{<=i}` for every attained level `i`, top level first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelFiltration {
    pub steps: Vec<(i64, Vec<RelativeCycle>)>,
    /// A basis of the full lattice together with the top level of each element.
    pub basis: Vec<(RelativeCycle, i64)>,
}

impl LevelFiltration {
    /// Generators of `L_{<=i}`; empty below the lowest level.
    pub fn at(&self, i: i64) -> &[RelativeCycle] {
        if i > 0 {
            return self.steps.first().map_or(&[], |s| &s.1);
        }
        self.steps
            .iter()
            .find(|(l, _)| *l == i)
            .map_or(&[], |(_, g)| g.as_slice())
    }
}

pub fn level_filtration(graph: &MarkedDualGraph, levels: &LevelStructure) -> LevelFiltration {
    let steps: Vec<(i64, Vec<RelativeCycle>)> = levels
        .attained()
        .into_iter()
        .map(|i| {
            let inside = |v: usize| levels.level(v) <= i;
            let gens = kernel_on(graph, &|e| graph.edges()[e].ends.iter().all(|&v| inside(v)), &inside);
            (i, gens)
        })
        .collect();
    let basis = steps
        .first()
        .map(|(_, g)| g.clone())
        .unwrap_or_default()
        .into_iter()
        .map(|c| {
            let top = c.top_level(graph, levels).unwrap_or(0);
            (c, top)
        })
        .collect();
    LevelFiltration { steps, basis }
}

/// A chain on the level-`i` slice: integer coefficients on the points of
/// level-`i` components, each cell oriented from the vertex to the point.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LevelChain {
    pub level: i64,
    pub cells: BTreeMap<PointRef, i64>,
}

impl LevelChain {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn add(&mut self, p: PointRef, c: i64) {
        let entry = self.cells.entry(p).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.cells.remove(&p);
        }
    }
}

/// Restricts a cycle supported on `Γ_{<=i}` to the level-`i` slice, cutting
/// downward edges at their upper end.
pub fn restrict_to_level(
    c: &RelativeCycle,
    graph: &MarkedDualGraph,
    levels: &LevelStructure,
    i: i64,
) -> Result<LevelChain, EvError> {
    if c.top_level(graph, levels).is_some_and(|t| t > i) {
        return Err(EvError::NotSupported { level: i });
    }
    let mut out = LevelChain {
        level: i,
        cells: BTreeMap::new(),
    };
    for (e, &k) in c.edges.iter().enumerate() {
        if k == 0 {
            continue;
        }
        for side in 0..2 {
            let h = HalfEdge::new(e, side);
            if levels.level(graph.half_vertex(h)) == i {
                out.add(PointRef::Half(h), if side == 0 { k } else { -k });
            }
        }
    }
    for (l, &k) in c.legs.iter().enumerate() {
        if k != 0 && levels.level(graph.legs()[l].vertex) == i {
            out.add(PointRef::Leg(l), k);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::dollar;
    use crate::graph::GraphBuilder;

    fn theta() -> MarkedDualGraph {
        GraphBuilder::new()
            .vertex("a", 0)
            .vertex("b", 0)
            .edge("e1", "a", "b")
            .edge("e2", "a", "b")
            .edge("e3", "a", "b")
            .build()
            .unwrap()
    }

    #[test]
    fn ranks() {
        assert_eq!(relative_h1(&theta()).len(), 2);
        assert_eq!(relative_h1(&dollar()).len(), 4);
        assert_eq!(expected_rank(&dollar()), 4);
        let single = GraphBuilder::new().vertex("v", 1).leg("z", "v", 2).build().unwrap();
        assert_eq!(relative_h1(&single).len(), 0);
        for c in relative_h1(&dollar()) {
            assert!(c.is_cycle(&dollar()));
        }
    }

    #[test]
    fn dollar_filtration() {
        let g = dollar();
        let levels = LevelStructure::normalized(&[0, -1]);
        let f = level_filtration(&g, &levels);
        assert_eq!(f.at(0).len(), 4);
        assert_eq!(f.at(-1).len(), 2);
        assert!(f.at(-2).is_empty());
        let tops: Vec<i64> = f.basis.iter().map(|b| b.1).collect();
        assert_eq!(tops.iter().filter(|&&t| t == -1).count(), 2);
        for c in f.at(-1) {
            assert!(c.edges.iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn restriction_of_a_loop() {
        let g = dollar();
        let levels = LevelStructure::normalized(&[0, -1]);
        // q1 forward, q2 backward
        let mut c = RelativeCycle::zero(&g);
        c.edges[0] = 1;
        c.edges[1] = -1;
        assert!(c.is_cycle(&g));
        let top = restrict_to_level(&c, &g, &levels, 0).unwrap();
        let expected: BTreeMap<PointRef, i64> = [
            (PointRef::Half(HalfEdge::new(0, 0)), 1),
            (PointRef::Half(HalfEdge::new(1, 0)), -1),
        ]
        .into_iter()
        .collect();
        assert_eq!(top.cells, expected);
        assert_eq!(
            restrict_to_level(&c, &g, &levels, -1).unwrap_err(),
            EvError::NotSupported { level: -1 }
        );
    }

    #[test]
    fn restriction_below_is_empty() {
        let g = dollar();
        let levels = LevelStructure::normalized(&[0, -1]);
        let f = level_filtration(&g, &levels);
        for c in f.at(-1) {
            assert!(restrict_to_level(c, &g, &levels, 0).unwrap().is_empty());
            assert!(!restrict_to_level(c, &g, &levels, -1).unwrap().is_empty());
        }
    }
}
