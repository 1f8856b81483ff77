use super::{Edge, HalfEdge, Leg, MarkedDualGraph, Vertex};
use crate::error::GraphError;

/// How a prestable graph maps onto its stabilization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionMap {
    /// Source vertex to target vertex; `None` for contracted components.
    pub vertex_map: Vec<Option<usize>>,
    /// Source edge to target edge; the edges of a contracted bridge chain all
    /// map to the merged edge, edges of removed tails map to `None`.
    pub edge_map: Vec<Option<usize>>,
    /// Source leg to target leg (legs keep their order).
    pub leg_map: Vec<usize>,
    /// For every target edge, the source half-edges at its two sides.
    pub half_origin: Vec<[HalfEdge; 2]>,
}

impl ContractionMap {
    /// Target half-edge that a surviving source half-edge becomes.
    pub fn map_half(&self, h: HalfEdge) -> Option<HalfEdge> {
        let e = self.edge_map[h.edge]?;
        let side = self.half_origin[e].iter().position(|&o| o == h)?;
        Some(HalfEdge::new(e, side))
    }
}

struct WorkEdge {
    id: String,
    ends: [usize; 2],
    origin: [HalfEdge; 2],
    members: Vec<usize>,
    alive: bool,
}

/// Contracts unstable components: genus-0 vertices with at most two special
/// points (edge ends plus legs). Rational tails are removed, a vertex with
/// one leg and one edge hands its leg to the neighbour, and rational bridges
/// are replaced by a single edge. A merged edge keeps the smallest id of its
/// chain, with `ends[0]` the far end of that edge.
pub fn stabilize_graph(graph: &MarkedDualGraph) -> Result<(MarkedDualGraph, ContractionMap), GraphError> {
    if graph.vertex_count() == 0 {
        return Err(GraphError::Empty);
    }
    if !graph.is_connected() {
        return Err(GraphError::Disconnected);
    }
    let n = graph.vertex_count();
    let mut alive = vec![true; n];
    let mut edges: Vec<WorkEdge> = graph
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| WorkEdge {
            id: e.id.clone(),
            ends: e.ends,
            origin: [HalfEdge::new(i, 0), HalfEdge::new(i, 1)],
            members: vec![i],
            alive: true,
        })
        .collect();
    let mut leg_vertex: Vec<usize> = graph.legs().iter().map(|l| l.vertex).collect();

    loop {
        let halves_at = |edges: &[WorkEdge], v: usize| -> Vec<(usize, usize)> {
            let mut out = Vec::new();
            for (i, e) in edges.iter().enumerate() {
                if e.alive {
                    for side in 0..2 {
                        if e.ends[side] == v {
                            out.push((i, side));
                        }
                    }
                }
            }
            out
        };
        let unstable = (0..n).find(|&v| {
            alive[v]
                && graph.vertices()[v].genus == 0
                && halves_at(&edges, v).len() + leg_vertex.iter().filter(|&&x| x == v).count() <= 2
        });
        let Some(v) = unstable else { break };
        let halves = halves_at(&edges, v);
        let legs: Vec<usize> = (0..leg_vertex.len()).filter(|&l| leg_vertex[l] == v).collect();
        match (halves.as_slice(), legs.as_slice()) {
            ([(e, side)], []) => {
                edges[*e].alive = false;
                let _ = side;
                alive[v] = false;
            }
            ([(e, side)], [l]) => {
                let u = edges[*e].ends[1 - side];
                if u == v {
                    return Err(GraphError::Unstabilizable);
                }
                leg_vertex[*l] = u;
                edges[*e].alive = false;
                alive[v] = false;
            }
            ([(e1, s1), (e2, s2)], []) if e1 != e2 => {
                let (keep, ks, other, os) = if edges[*e1].id <= edges[*e2].id {
                    (*e1, *s1, *e2, *s2)
                } else {
                    (*e2, *s2, *e1, *s1)
                };
                let far_keep = (edges[keep].ends[1 - ks], edges[keep].origin[1 - ks]);
                let far_other = (edges[other].ends[1 - os], edges[other].origin[1 - os]);
                let moved = std::mem::take(&mut edges[other].members);
                edges[other].alive = false;
                let k = &mut edges[keep];
                k.ends = [far_keep.0, far_other.0];
                k.origin = [far_keep.1, far_other.1];
                k.members.extend(moved);
                alive[v] = false;
            }
            _ => return Err(GraphError::Unstabilizable),
        }
    }

    let mut vertex_map = vec![None; n];
    let mut vertices = Vec::new();
    for v in 0..n {
        if alive[v] {
            vertex_map[v] = Some(vertices.len());
            vertices.push(Vertex {
                id: graph.vertices()[v].id.clone(),
                genus: graph.vertices()[v].genus,
            });
        }
    }
    let mut order: Vec<usize> = (0..edges.len()).filter(|&i| edges[i].alive).collect();
    order.sort_by_key(|&i| edges[i].members.iter().min().copied());
    let mut edge_map = vec![None; graph.edge_count()];
    let mut new_edges = Vec::new();
    let mut half_origin = Vec::new();
    for i in order {
        let e = &edges[i];
        for &m in &e.members {
            edge_map[m] = Some(new_edges.len());
        }
        new_edges.push(Edge {
            id: e.id.clone(),
            ends: [vertex_map[e.ends[0]].unwrap(), vertex_map[e.ends[1]].unwrap()],
        });
        half_origin.push(e.origin);
    }
    let legs = graph
        .legs()
        .iter()
        .zip(&leg_vertex)
        .map(|(l, &v)| Leg {
            id: l.id.clone(),
            vertex: vertex_map[v].unwrap(),
            mu: l.mu,
        })
        .collect();
    let stable = MarkedDualGraph::new(vertices, new_edges, legs)?;
    let map = ContractionMap {
        vertex_map,
        edge_map,
        leg_map: (0..graph.legs().len()).collect(),
        half_origin,
    };
    Ok((stable, map))
}
