//! The canonical twist of a twistable rational function into a twisted one,
//! and the inverse stabilization.
//!
//! Levels of the source are doubled so that the intermediate levels sit at odd
//! integers: `i+ = 2i + 1` and `i- = 2i - 1`, whence `(i - 1)+ = i-`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::TwistError;
use crate::ev::{evaluation_system, unknown_name};
use crate::graph::{stabilize_graph, ContractionMap, Edge, HalfEdge, LevelStructure, MarkedDualGraph, Vertex};
use crate::homology::{relative_h1, RelativeCycle};
use crate::linalg::ConstraintSpace;
use crate::twr::{
    validate_twdr, validate_twr, Clause, CriticalLeg, Decoration, PointKind, PointOrder, PointRef, Report,
};

/// A decorated level graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Twr {
    pub graph: MarkedDualGraph,
    pub levels: LevelStructure,
    pub dec: Decoration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistResult {
    pub twisted: Twr,
    /// Inserted bridge vertices, one per split edge.
    pub bridges: Vec<usize>,
    /// For every source edge, the appended second half of its split, if any.
    pub split: Vec<Option<usize>>,
    /// The contraction of the twisted graph back onto the source.
    pub map: ContractionMap,
}

fn fresh(base: String, taken: &BTreeSet<String>) -> String {
    let mut id = base;
    while taken.contains(&id) {
        id.push('\'');
    }
    id
}

/// The bridge orders `(-ord(q0) - 2, -ord(q1) - 2)` facing sides 0 and 1.
fn bridge_order(facing: PointOrder) -> PointOrder {
    let ord_df = -facing.ord_df - 2;
    let kind = if ord_df <= -2 {
        PointKind::Pole
    } else if facing.is_pole() {
        PointKind::Zero
    } else {
        PointKind::Regular
    };
    PointOrder { ord_df, kind }
}

pub fn twist(graph: &MarkedDualGraph, levels: &LevelStructure, dec: &Decoration) -> Result<TwistResult, TwistError> {
    let report = validate_twr(graph, levels, dec);
    if !report.is_valid() {
        return Err(TwistError::InvalidTwr(report.summary()));
    }
    let n = graph.vertex_count();
    let m = graph.edge_count();
    let mut vertex_ids: BTreeSet<String> = graph.vertices().iter().map(|v| v.id.clone()).collect();
    let mut edge_ids: BTreeSet<String> = graph.edges().iter().map(|e| e.id.clone()).collect();
    let mut point_ids: BTreeSet<String> = graph
        .legs()
        .iter()
        .map(|l| l.id.clone())
        .chain(dec.critical.iter().map(|c| c.id.clone()))
        .collect();

    let mut vertices = graph.vertices().to_vec();
    let mut edges = graph.edges().to_vec();
    let mut halves = dec.halves.clone();
    let mut critical = dec.critical.clone();
    let mut raw: Vec<i64> = levels.as_slice().iter().map(|l| 2 * l).collect();
    let mut bridges = Vec::new();
    let mut split = vec![None; m];
    let mut half_origin: Vec<[HalfEdge; 2]> = (0..m).map(|e| [HalfEdge::new(e, 0), HalfEdge::new(e, 1)]).collect();
    let mut edge_map: Vec<Option<usize>> = (0..m).map(Some).collect();

    let mut add_critical = |critical: &mut Vec<CriticalLeg>, vertex: usize, base: &str, count: i64| {
        for k in 0..count {
            let id = fresh(format!("c:{base}:{k}"), &point_ids);
            point_ids.insert(id.clone());
            critical.push(CriticalLeg { id, vertex, ord_df: 1 });
        }
    };

    for e in 0..m {
        let s = dec.edge_sum(e);
        if s == -2 {
            continue;
        }
        let [v0, v1] = graph.edges()[e].ends;
        let [o0, o1] = dec.halves[e];
        let b = vertices.len();
        let vid = fresh(format!("b:{}", graph.edges()[e].id), &vertex_ids);
        vertex_ids.insert(vid.clone());
        vertices.push(Vertex {
            id: vid.clone(),
            genus: 0,
        });
        let level = if o1.is_pole() {
            2 * levels.level(v1) + 1
        } else if o0.is_pole() {
            2 * levels.level(v0) + 1
        } else {
            2 * levels.level(v0).min(levels.level(v1)) - 1
        };
        raw.push(level);
        let eid = fresh(format!("{}'", graph.edges()[e].id), &edge_ids);
        edge_ids.insert(eid.clone());
        let e2 = edges.len();
        edges[e].ends = [v0, b];
        edges.push(Edge { id: eid, ends: [b, v1] });
        halves[e] = [o0, bridge_order(o0)];
        halves.push([bridge_order(o1), o1]);
        add_critical(&mut critical, b, &vid, s + 2);
        bridges.push(b);
        split[e] = Some(e2);
        half_origin[e] = [HalfEdge::new(e, 0), HalfEdge::new(e2, 1)];
        edge_map.push(Some(e));
    }
    let new_graph = MarkedDualGraph::new(vertices, edges, graph.legs().to_vec())?;
    for v in 0..n {
        let residual = dec.balance(graph, v).residual;
        let base = graph.vertices()[v].id.clone();
        add_critical(&mut critical, v, &base, residual);
    }
    let values = dec
        .values
        .iter()
        .map(|(p, f)| {
            let q = match *p {
                PointRef::Half(h) if h.side == 1 && split[h.edge].is_some() => {
                    PointRef::Half(HalfEdge::new(split[h.edge].unwrap(), 1))
                }
                other => other,
            };
            (q, f.clone())
        })
        .collect();
    let new_dec = Decoration {
        halves,
        legs: dec.legs.clone(),
        critical,
        values,
    };
    let new_levels = LevelStructure::normalized(&raw);
    let report = validate_twdr(&new_graph, &new_levels, &new_dec);
    if !report.is_valid() {
        return Err(TwistError::InvalidTwdr(report.summary()));
    }
    let mut vertex_map: Vec<Option<usize>> = (0..n).map(Some).collect();
    vertex_map.resize(new_graph.vertex_count(), None);
    Ok(TwistResult {
        twisted: Twr {
            graph: new_graph,
            levels: new_levels,
            dec: new_dec,
        },
        bridges,
        split,
        map: ContractionMap {
            vertex_map,
            edge_map,
            leg_map: (0..graph.legs().len()).collect(),
            half_origin,
        },
    })
}

/// Genus-0 vertices with at most two special points, critical legs ignored.
pub fn unstable_vertices(graph: &MarkedDualGraph) -> Vec<usize> {
    (0..graph.vertex_count())
        .filter(|&v| graph.vertices()[v].genus == 0 && graph.valence(v) <= 2)
        .collect()
}

/// Unstable components carry no marked point and are never local maxima.
pub fn check_local_max(graph: &MarkedDualGraph, levels: &LevelStructure) -> Report {
    let mut r = Report::default();
    for v in unstable_vertices(graph) {
        let loc = format!("vertex `{}`", graph.vertices()[v].id);
        if !graph.legs_at(v).is_empty() {
            r.push(
                Clause::LocalMaxMarked,
                &loc,
                "unstable component carries a marked point",
            );
        }
        let halves = graph.halves_at(v);
        if halves.len() == 2 {
            let here = levels.level(v);
            if halves
                .iter()
                .all(|h| levels.level(graph.half_vertex(h.opposite())) <= here)
            {
                r.push(Clause::LocalMaxLevel, &loc, "unstable component is a local maximum");
            }
        }
    }
    r
}

/// Contracts the unstable components of a twisted rational function and
/// forgets its extra critical points.
pub fn stabilize(
    graph: &MarkedDualGraph,
    levels: &LevelStructure,
    dec: &Decoration,
) -> Result<(Twr, ContractionMap), TwistError> {
    let report = validate_twdr(graph, levels, dec);
    if !report.is_valid() {
        return Err(TwistError::InvalidTwdr(report.summary()));
    }
    let lm = check_local_max(graph, levels);
    if !lm.is_valid() {
        return Err(TwistError::LocalMax(lm.summary()));
    }
    let (stable, map) = stabilize_graph(graph)?;
    let halves = map
        .half_origin
        .iter()
        .map(|[a, b]| [dec.half(*a), dec.half(*b)])
        .collect();
    let mut values = BTreeMap::new();
    for (p, f) in &dec.values {
        let q = match *p {
            PointRef::Half(h) => map.map_half(h).map(PointRef::Half),
            PointRef::Leg(l) => Some(PointRef::Leg(map.leg_map[l])),
            PointRef::Critical(_) => None,
        };
        if let Some(q) = q {
            values.insert(q, f.clone());
        }
    }
    let stable_dec = Decoration {
        halves,
        legs: map.leg_map.iter().map(|&l| dec.legs[l]).collect(),
        critical: Vec::new(),
        values,
    };
    let raw: Vec<i64> = (0..graph.vertex_count())
        .filter(|&v| map.vertex_map[v].is_some())
        .map(|v| levels.level(v))
        .collect();
    let stable_levels = LevelStructure::normalized(&raw);
    let report = validate_twr(&stable, &stable_levels, &stable_dec);
    if !report.is_valid() {
        return Err(TwistError::BadStabilization(report.summary()));
    }
    Ok((
        Twr {
            graph: stable,
            levels: stable_levels,
            dec: stable_dec,
        },
        map,
    ))
}

/// Outcome of comparing a twisted function with its stabilization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushforwardReport {
    /// Every pushed-forward basis cycle is a relative cycle whose top level
    /// did not go up.
    pub cycles_push_forward: bool,
    /// Both evaluation systems cut out the same space on the shared unknowns.
    pub constraints_agree: bool,
    pub shared_unknowns: Vec<String>,
    pub source: ConstraintSpace,
    pub target: ConstraintSpace,
}

impl PushforwardReport {
    pub fn is_ok(&self) -> bool {
        self.cycles_push_forward && self.constraints_agree
    }
}

fn push_cycle(c: &RelativeCycle, target: &MarkedDualGraph, map: &ContractionMap) -> RelativeCycle {
    let mut out = RelativeCycle::zero(target);
    for (e, origin) in map.half_origin.iter().enumerate() {
        // the coefficient of any member edge of a chain is the coefficient of its side-0 edge
        out.edges[e] = c.edges[origin[0].edge];
    }
    for (l, &k) in c.legs.iter().enumerate() {
        out.legs[map.leg_map[l]] += k;
    }
    out
}

pub fn pushforward_check(twisted: &Twr, stable: &Twr, map: &ContractionMap) -> Result<PushforwardReport, TwistError> {
    let g1 = &twisted.graph;
    let g0 = &stable.graph;
    let mut cycles_ok = true;
    let stable_level = |v: usize| twisted.levels.level(v);
    for c in relative_h1(g1) {
        let top = c.top_level(g1, &twisted.levels);
        let p = push_cycle(&c, g0, map);
        if !p.is_cycle(g0) {
            cycles_ok = false;
            continue;
        }
        let pushed_top = p
            .support(g0)
            .into_iter()
            .filter_map(|w| map.vertex_map.iter().position(|&x| x == Some(w)))
            .map(stable_level)
            .max();
        if pushed_top.is_some() && pushed_top > top {
            cycles_ok = false;
        }
    }

    let mut rename = BTreeMap::new();
    for v in 0..g1.vertex_count() {
        if map.vertex_map[v].is_none() {
            continue;
        }
        for p in twisted.dec.points_at(g1, v) {
            let target = match p {
                PointRef::Half(h) => map.map_half(h).map(PointRef::Half),
                PointRef::Leg(l) => Some(PointRef::Leg(map.leg_map[l])),
                PointRef::Critical(_) => None,
            };
            if let Some(t) = target {
                rename.insert(unknown_name(g1, &twisted.dec, p), unknown_name(g0, &stable.dec, t));
            }
        }
    }
    let sys1 = evaluation_system(g1, &twisted.levels, &twisted.dec)?;
    let sys0 = evaluation_system(g0, &stable.levels, &stable.dec)?;
    let forms1: Vec<_> = sys1.all_forms().iter().map(|f| f.rename(&rename)).collect();
    let unknowns1: Vec<String> = sys1
        .unknowns
        .iter()
        .map(|u| rename.get(u).cloned().unwrap_or_else(|| u.clone()))
        .collect();
    let space1 = ConstraintSpace::over(&forms1, &unknowns1);
    let space0 = sys0.combined();
    let shared: Vec<String> = space0
        .unknowns()
        .iter()
        .filter(|u| space1.unknowns().binary_search(u).is_ok())
        .cloned()
        .collect();
    let source = space1.project(&shared);
    let target = space0.project(&shared);
    Ok(PushforwardReport {
        cycles_push_forward: cycles_ok,
        constraints_agree: source.same_solutions(&target),
        shared_unknowns: shared,
        source,
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::dollar;
    use crate::graph::GraphBuilder;

    fn horizontal() -> Twr {
        let graph = GraphBuilder::new()
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
        let zp = [PointOrder::zero(1), PointOrder::pole(1)];
        let rr = [PointOrder::regular(1), PointOrder::regular(1)];
        let dec = Decoration::from_halves(&graph, vec![zp, zp, rr]);
        Twr {
            graph,
            levels: LevelStructure::normalized(&[0, -1, -1]),
            dec,
        }
    }

    #[test]
    fn horizontal_twist_inserts_bridge_below() {
        let t = horizontal();
        let r = twist(&t.graph, &t.levels, &t.dec).unwrap();
        let tw = &r.twisted;
        assert_eq!(r.bridges, vec![3]);
        assert_eq!(tw.graph.vertices()[3].id, "b:q3");
        assert_eq!(tw.levels.as_slice(), &[0, -1, -1, -2]);
        let on_bridge = tw.dec.critical.iter().filter(|c| c.vertex == 3).count();
        assert_eq!(on_bridge, 2);
        let on_v1 = tw.dec.critical.iter().filter(|c| c.vertex == 0).count();
        assert_eq!(on_v1, 4);
        assert!(check_local_max(&tw.graph, &tw.levels).is_valid());
        let (back, _) = stabilize(&tw.graph, &tw.levels, &tw.dec).unwrap();
        assert_eq!(back, t);
        assert!(back.levels.is_horizontal(&back.graph, 2));
    }

    #[test]
    fn dollar_twist_only_marks_criticals() {
        let graph = dollar();
        let levels = LevelStructure::normalized(&[0, -1]);
        let dec = Decoration::from_halves(&graph, vec![[PointOrder::regular(1), PointOrder::pole(1)]; 3]);
        let r = twist(&graph, &levels, &dec).unwrap();
        assert!(r.bridges.is_empty());
        assert_eq!(r.twisted.dec.critical.len(), 6);
        let (back, map) = stabilize(&r.twisted.graph, &r.twisted.levels, &r.twisted.dec).unwrap();
        assert_eq!(back.dec, dec);
        let rep = pushforward_check(&r.twisted, &back, &map).unwrap();
        assert!(rep.is_ok());
    }

    #[test]
    fn pole_side_bridge_sits_just_above_the_pole() {
        // edge with orders (1, -2): s = -1
        let graph = GraphBuilder::new()
            .vertex("a", 1)
            .vertex("b", 1)
            .edge("e", "a", "b")
            .leg("z", "a", 2)
            .leg("p", "a", -2)
            .leg("w", "b", 2)
            .leg("r", "b", -1)
            .build()
            .unwrap();
        let levels = LevelStructure::normalized(&[0, -1]);
        let dec = Decoration::from_halves(&graph, vec![[PointOrder::regular(2), PointOrder::pole(1)]]);
        assert!(
            validate_twr(&graph, &levels, &dec).is_valid(),
            "{}",
            validate_twr(&graph, &levels, &dec).summary()
        );
        let r = twist(&graph, &levels, &dec).unwrap();
        let tw = &r.twisted;
        assert_eq!(tw.levels.as_slice(), &[0, -2, -1]);
        assert_eq!(tw.dec.halves[0][1], PointOrder::pole(2));
        assert_eq!(tw.dec.halves[1][0], PointOrder::zero(1));
        let (back, map) = stabilize(&tw.graph, &tw.levels, &tw.dec).unwrap();
        assert_eq!(back.graph, graph);
        assert_eq!(back.dec, dec);
        assert!(pushforward_check(tw, &back, &map).unwrap().is_ok());
    }

    #[test]
    fn horizontal_pushforward_agrees() {
        let t = horizontal();
        let r = twist(&t.graph, &t.levels, &t.dec).unwrap();
        let rep = pushforward_check(&r.twisted, &t, &r.map).unwrap();
        assert!(rep.cycles_push_forward);
        assert!(rep.constraints_agree);
    }

    #[test]
    fn local_max_violations() {
        let g = GraphBuilder::new()
            .vertex("a", 1)
            .vertex("b", 1)
            .vertex("m", 0)
            .edge("e", "a", "m")
            .edge("f", "m", "b")
            .build()
            .unwrap();
        let r = check_local_max(&g, &LevelStructure::normalized(&[-1, -1, 0]));
        assert!(r.has(Clause::LocalMaxLevel));
        assert!(check_local_max(&g, &LevelStructure::normalized(&[0, -2, -1])).is_valid());
        let tail = GraphBuilder::new()
            .vertex("a", 1)
            .vertex("t", 0)
            .edge("e", "a", "t")
            .leg("p", "t", -1)
            .leg("z", "a", 1)
            .build()
            .unwrap();
        let r = check_local_max(&tail, &LevelStructure::normalized(&[0, -1]));
        assert!(r.has(Clause::LocalMaxMarked));
    }

    #[test]
    fn invalid_input_is_rejected() {
        let t = horizontal();
        let err = twist(&t.graph, &LevelStructure::flat(3), &t.dec).unwrap_err();
        assert!(matches!(err, TwistError::InvalidTwr(_)));
    }
}
