//! Combinatorial admissible covers of a genus-0 target tree, and membership
//! certificates obtained by stabilizing their sources.

use std::collections::BTreeMap;
use std::fmt;

use crate::graph::{canonical_form, stabilize_graph, ColoredGraph, HalfEdge, Leg, MarkedDualGraph};

/// A stable tree of rational curves with two distinguished legs over 0 and infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetTree {
    pub graph: MarkedDualGraph,
    pub zero_leg: usize,
    pub infinity_leg: usize,
}

/// Where every vertex, edge and leg of the source goes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoverMap {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub legs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombinatorialCover {
    /// Source curve; leg labels are ignored, multiplicities come from `leg_mults`.
    pub source: MarkedDualGraph,
    pub target: TargetTree,
    pub map: CoverMap,
    /// Per source edge, the multiplicities at sides 0 and 1.
    pub half_mults: Vec<[u32; 2]>,
    pub leg_mults: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverIssue {
    pub clause: &'static str,
    pub location: String,
    pub message: String,
}

impl fmt::Display for CoverIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.clause, self.location, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoverReport {
    pub issues: Vec<CoverIssue>,
    pub degree: Option<u32>,
    pub local_degrees: Vec<Option<u32>>,
    /// Multiplicities over 0 and over infinity, decreasing.
    pub zero_profile: Vec<u32>,
    pub infinity_profile: Vec<u32>,
}

impl CoverReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn summary(&self) -> String {
        self.issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
    }

    fn push(&mut self, clause: &'static str, location: impl Into<String>, message: impl Into<String>) {
        self.issues.push(CoverIssue {
            clause,
            location: location.into(),
            message: message.into(),
        });
    }
}

/// A special point of a target vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum TPoint {
    Half(HalfEdge),
    Leg(usize),
}

fn check_target(t: &TargetTree, r: &mut CoverReport) {
    let g = &t.graph;
    if !g.is_connected() || g.edge_count() + 1 != g.vertex_count() {
        r.push("target", "target", "target is not a tree");
    }
    for (v, vx) in g.vertices().iter().enumerate() {
        if vx.genus != 0 {
            r.push(
                "target",
                format!("target vertex `{}`", vx.id),
                "target components must be rational",
            );
        }
        if g.valence(v) < 3 {
            r.push(
                "target",
                format!("target vertex `{}`", vx.id),
                "target component is unstable",
            );
        }
    }
    let n = g.legs().len();
    if t.zero_leg >= n || t.infinity_leg >= n || t.zero_leg == t.infinity_leg {
        r.push("target", "target", "zero and infinity legs must be two distinct legs");
    }
}

pub fn validate_cover(c: &CombinatorialCover) -> CoverReport {
    let mut r = CoverReport::default();
    check_target(&c.target, &mut r);
    let s = &c.source;
    let t = &c.target.graph;
    if c.map.vertices.len() != s.vertex_count()
        || c.map.edges.len() != s.edge_count()
        || c.map.legs.len() != s.legs().len()
        || c.half_mults.len() != s.edge_count()
        || c.leg_mults.len() != s.legs().len()
    {
        r.push("shape", "map", "map or multiplicities do not cover the source");
        return r;
    }
    if c.map.vertices.iter().any(|&x| x >= t.vertex_count())
        || c.map.edges.iter().any(|&x| x >= t.edge_count())
        || c.map.legs.iter().any(|&x| x >= t.legs().len())
    {
        r.push("shape", "map", "map points outside the target");
        return r;
    }
    if !r.is_valid() {
        return r;
    }

    // preimages of every target point, as (source vertex, multiplicity)
    let mut over: BTreeMap<TPoint, Vec<(usize, u32, String)>> = BTreeMap::new();
    for (e, edge) in s.edges().iter().enumerate() {
        let te = c.map.edges[e];
        let tends = t.edges()[te].ends;
        let [m0, m1] = c.half_mults[e];
        if m0 != m1 {
            r.push(
                "node-multiplicity",
                format!("edge `{}`", edge.id),
                format!("multiplicities {m0} and {m1} differ"),
            );
        }
        for side in 0..2 {
            let v = edge.ends[side];
            let tv = c.map.vertices[v];
            let Some(tside) = tends.iter().position(|&x| x == tv) else {
                r.push(
                    "morphism",
                    format!("edge `{}`", edge.id),
                    format!(
                        "end `{}` does not lie over an end of target edge `{}`",
                        s.vertices()[v].id,
                        t.edges()[te].id
                    ),
                );
                continue;
            };
            if edge.ends[0] == edge.ends[1] || c.map.vertices[edge.ends[1 - side]] == tv {
                r.push(
                    "morphism",
                    format!("edge `{}`", edge.id),
                    "both ends lie over the same target vertex",
                );
                continue;
            }
            over.entry(TPoint::Half(HalfEdge::new(te, tside))).or_default().push((
                v,
                c.half_mults[e][side],
                s.half_id(HalfEdge::new(e, side)),
            ));
        }
    }
    for (l, leg) in s.legs().iter().enumerate() {
        let tl = c.map.legs[l];
        if t.legs()[tl].vertex != c.map.vertices[leg.vertex] {
            r.push(
                "morphism",
                format!("leg `{}`", leg.id),
                format!("target leg `{}` is on another component", t.legs()[tl].id),
            );
            continue;
        }
        over.entry(TPoint::Leg(tl))
            .or_default()
            .push((leg.vertex, c.leg_mults[l], leg.id.clone()));
    }
    if c.half_mults.iter().flatten().chain(&c.leg_mults).any(|&m| m == 0) {
        r.push("multiplicity", "source", "multiplicities must be positive");
    }
    if !r.is_valid() {
        return r;
    }

    // local degrees: the same over every special point of the image vertex
    let mut local = vec![None; s.vertex_count()];
    for v in 0..s.vertex_count() {
        let tv = c.map.vertices[v];
        let points = t
            .halves_at(tv)
            .into_iter()
            .map(TPoint::Half)
            .chain(t.legs_at(tv).into_iter().map(TPoint::Leg));
        let mut degrees = BTreeMap::new();
        for p in points {
            let d: u32 = over
                .get(&p)
                .map_or(0, |pre| pre.iter().filter(|x| x.0 == v).map(|x| x.1).sum());
            degrees.insert(p, d);
        }
        let distinct: Vec<u32> = {
            let mut d: Vec<u32> = degrees.values().copied().collect();
            d.sort();
            d.dedup();
            d
        };
        let loc = format!("vertex `{}`", s.vertices()[v].id);
        match distinct.as_slice() {
            [d] if *d > 0 => local[v] = Some(*d),
            _ => r.push(
                "local-degree",
                &loc,
                format!("fiber degrees over the special points are {distinct:?}"),
            ),
        }
        if let Some(d) = local[v] {
            let ram: i64 = s
                .halves_at(v)
                .iter()
                .map(|h| c.half_mults[h.edge][h.side] as i64 - 1)
                .chain(s.legs_at(v).iter().map(|&l| c.leg_mults[l] as i64 - 1))
                .sum();
            let lhs = 2 * s.vertices()[v].genus as i64 - 2;
            let rhs = -2 * d as i64 + ram;
            if lhs != rhs {
                r.push(
                    "riemann-hurwitz",
                    &loc,
                    format!("2g - 2 = {lhs} but -2d + ramification = {rhs}"),
                );
            }
        }
    }
    r.local_degrees = local.clone();

    let mut totals = vec![0u32; t.vertex_count()];
    for v in 0..s.vertex_count() {
        totals[c.map.vertices[v]] += local[v].unwrap_or(0);
    }
    let mut distinct = totals.clone();
    distinct.sort();
    distinct.dedup();
    match distinct.as_slice() {
        [d] if *d > 0 => r.degree = Some(*d),
        _ => r.push(
            "degree",
            "target",
            format!("degrees over the target components are {totals:?}"),
        ),
    }

    let profile = |tl: usize| -> Vec<u32> {
        let mut p: Vec<u32> = over
            .get(&TPoint::Leg(tl))
            .map(|pre| pre.iter().map(|x| x.1).collect())
            .unwrap_or_default();
        p.sort_unstable_by(|a, b| b.cmp(a));
        p
    };
    for tl in 0..t.legs().len() {
        if tl == c.target.zero_leg || tl == c.target.infinity_leg {
            continue;
        }
        let p = profile(tl);
        if p.iter().skip(1).any(|&m| m > 1) || p.first().is_some_and(|&m| m > 2) {
            r.push(
                "branching",
                format!("target leg `{}`", t.legs()[tl].id),
                format!("profile {p:?} is not simple"),
            );
        }
    }
    if let Some(d) = r.degree {
        for tl in 0..t.legs().len() {
            let total: u32 = profile(tl).iter().sum();
            let covered = over.get(&TPoint::Leg(tl)).map_or(0, |pre| pre.len());
            if total != d && covered > 0 {
                r.push(
                    "fiber",
                    format!("target leg `{}`", t.legs()[tl].id),
                    format!("fiber degree {total} differs from the degree {d}"),
                );
            }
        }
    }
    if c.target.zero_leg < t.legs().len() && c.target.infinity_leg < t.legs().len() {
        r.zero_profile = profile(c.target.zero_leg);
        r.infinity_profile = profile(c.target.infinity_leg);
    }
    r
}

/// Outcome of the admissible-cover route.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverVerdict {
    pub member: bool,
    pub reasons: Vec<String>,
    /// The stabilized source with the markings over 0 and infinity.
    pub stabilized: Option<MarkedDualGraph>,
}

fn leg_labelled(g: &MarkedDualGraph) -> ColoredGraph {
    ColoredGraph {
        vertex_colors: g.vertices().iter().map(|v| format!("g{}", v.genus)).collect(),
        edges: g
            .edges()
            .iter()
            .map(|e| (e.ends, [String::new(), String::new()], String::new()))
            .collect(),
        legs: g
            .legs()
            .iter()
            .map(|l| (l.vertex, format!("{}|{}", l.id, l.mu)))
            .collect(),
    }
}

/// Whether the cover certifies that `stable` (with its labels) lies in the closure:
/// its source, marked only over 0 and infinity, stabilizes to `stable`.
pub fn closure_via_covers(stable: &MarkedDualGraph, cover: &CombinatorialCover) -> CoverVerdict {
    let report = validate_cover(cover);
    if !report.is_valid() {
        return CoverVerdict {
            member: false,
            reasons: report.issues.iter().map(|i| i.to_string()).collect(),
            stabilized: None,
        };
    }
    let s = &cover.source;
    let legs: Vec<Leg> = s
        .legs()
        .iter()
        .enumerate()
        .filter_map(|(l, leg)| {
            let tl = cover.map.legs[l];
            let m = cover.leg_mults[l] as i64;
            let mu = if tl == cover.target.zero_leg {
                m
            } else if tl == cover.target.infinity_leg {
                -m
            } else {
                return None;
            };
            Some(Leg {
                id: leg.id.clone(),
                vertex: leg.vertex,
                mu,
            })
        })
        .collect();
    let marked = match MarkedDualGraph::new(s.vertices().to_vec(), s.edges().to_vec(), legs) {
        Ok(g) => g,
        Err(e) => {
            return CoverVerdict {
                member: false,
                reasons: vec![e.to_string()],
                stabilized: None,
            }
        }
    };
    let (stabilized, _) = match stabilize_graph(&marked) {
        Ok(x) => x,
        Err(e) => {
            return CoverVerdict {
                member: false,
                reasons: vec![e.to_string()],
                stabilized: None,
            }
        }
    };
    let mut reasons = Vec::new();
    if stabilized.genus() != stable.genus() {
        reasons.push(format!(
            "stabilized source has genus {}, expected {}",
            stabilized.genus(),
            stable.genus()
        ));
    }
    if canonical_form(&leg_labelled(&stabilized)) != canonical_form(&leg_labelled(stable)) {
        reasons.push("stabilized source is not isomorphic to the given curve".into());
    }
    CoverVerdict {
        member: reasons.is_empty(),
        reasons,
        stabilized: Some(stabilized),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    /// `z -> z^2` on a two-component target: X over t1 meets a tail over t2.
    fn smooth_with_tail(node_mults: [u32; 2]) -> (MarkedDualGraph, CombinatorialCover) {
        let x = GraphBuilder::new()
            .vertex("X", 0)
            .leg("z1", "X", 1)
            .leg("z2", "X", 1)
            .leg("p", "X", -2)
            .build()
            .unwrap();
        let target = GraphBuilder::new()
            .vertex("t1", 0)
            .vertex("t2", 0)
            .edge("n", "t1", "t2")
            .leg("0", "t1", 0)
            .leg("inf", "t1", 0)
            .leg("b1", "t2", 0)
            .leg("b2", "t2", 0)
            .build()
            .unwrap();
        let source = GraphBuilder::new()
            .vertex("X", 0)
            .vertex("Y", 0)
            .edge("e1", "X", "Y")
            .leg("z1", "X", 0)
            .leg("z2", "X", 0)
            .leg("p", "X", 0)
            .leg("y1", "Y", 0)
            .leg("y2", "Y", 0)
            .leg("y3", "Y", 0)
            .build()
            .unwrap();
        let cover = CombinatorialCover {
            source,
            target: TargetTree {
                graph: target,
                zero_leg: 0,
                infinity_leg: 1,
            },
            map: CoverMap {
                vertices: vec![0, 1],
                edges: vec![0],
                legs: vec![0, 0, 1, 2, 3, 3],
            },
            half_mults: vec![node_mults],
            leg_mults: vec![1, 1, 2, 2, 1, 1],
        };
        (x, cover)
    }

    #[test]
    fn tail_cover_is_valid_and_certifies() {
        let (x, cover) = smooth_with_tail([2, 2]);
        let r = validate_cover(&cover);
        assert!(r.is_valid(), "{}", r.summary());
        assert_eq!(r.degree, Some(2));
        assert_eq!(r.zero_profile, vec![1, 1]);
        assert_eq!(r.infinity_profile, vec![2]);
        let v = closure_via_covers(&x, &cover);
        assert!(v.member, "{:?}", v.reasons);
    }

    #[test]
    fn unequal_node_multiplicities() {
        let (_, cover) = smooth_with_tail([2, 1]);
        let r = validate_cover(&cover);
        assert!(r.issues.iter().any(|i| i.clause == "node-multiplicity"));
    }

    #[test]
    fn wrong_genus_is_rejected() {
        let (_, cover) = smooth_with_tail([2, 2]);
        let other = GraphBuilder::new()
            .vertex("X", 1)
            .leg("z1", "X", 1)
            .leg("z2", "X", 1)
            .leg("p", "X", -2)
            .build()
            .unwrap();
        let v = closure_via_covers(&other, &cover);
        assert!(!v.member);
        assert!(v.reasons.iter().any(|r| r.contains("genus")));
    }

    #[test]
    fn relabeling_target_vertices_is_harmless() {
        let (_, mut cover) = smooth_with_tail([2, 2]);
        let t = &cover.target.graph;
        let swapped = GraphBuilder::new()
            .vertex("t2", 0)
            .vertex("t1", 0)
            .edge("n", "t1", "t2")
            .leg("0", "t1", 0)
            .leg("inf", "t1", 0)
            .leg("b1", "t2", 0)
            .leg("b2", "t2", 0)
            .build()
            .unwrap();
        assert_eq!(swapped.legs().len(), t.legs().len());
        cover.target.graph = swapped;
        cover.map.vertices = vec![1, 0];
        assert!(validate_cover(&cover).is_valid());
    }
}
