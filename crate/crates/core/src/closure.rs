//! Certificates that a marked stable curve lies in the closure of the double
//! ramification locus: a level structure, a twistable rational function on
//! it, a solvable evaluation system and realizable branch data per component.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::Zero;

use crate::error::{GraphError, HurwitzError};
use crate::ev::{evaluation_system, kind_zero_forms, EvaluationSystem, ValueAssignment};
use crate::graph::{
    canonical_form, enumerate_level_structures, CanonicalForm, HalfEdge, LevelStructure, MarkedDualGraph,
    DEFAULT_ENUMERATION_CAP,
};
use crate::hurwitz::{component_problem, exists_with_cap, realize_genus0, rh_check, Coord, HurwitzProblem};
use crate::linalg::{ConstraintSpace, LinearForm, Q};
use crate::twr::{decorated_colors, validate_twr, Decoration, PointKind, PointOrder, PointRef};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Every condition checked with exact values on genus-0 components.
    AcceptedExact,
    /// Combinatorially valid, with values solvable over Q but not realized.
    AcceptedModuloGenericity,
    Rejected(String),
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        !matches!(self, Verdict::Rejected(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::AcceptedExact => f.write_str("accepted-exact"),
            Verdict::AcceptedModuloGenericity => f.write_str("accepted-modulo-genericity"),
            Verdict::Rejected(r) => write!(f, "rejected: {r}"),
        }
    }
}

/// Realizability of one component's branch data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentCheck {
    pub vertex: String,
    pub problem: HurwitzProblem,
    pub rh: bool,
    /// `None` when the degree exceeds the brute-force cap.
    pub exists: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub levels: LevelStructure,
    pub dec: Decoration,
    /// Evaluation constraints of every level together with `f(x) = 0` at nodal zeros.
    pub constraints: ConstraintSpace,
    pub components: Vec<ComponentCheck>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

/// Exact genus-0 data: per vertex id, a scale and coordinates for its points.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Genus0Witness {
    pub vertices: BTreeMap<String, VertexWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexWitness {
    pub scale: Q,
    /// Point id (leg, half-edge `e.s` or critical leg) to coordinate.
    pub points: BTreeMap<String, Coord>,
}

fn reject(reason: impl Into<String>) -> Verdict {
    Verdict::Rejected(reason.into())
}

/// Evaluation system plus the vanishing of `f` at declared nodal zeros.
pub fn full_constraints(
    sys: &EvaluationSystem,
    graph: &MarkedDualGraph,
    dec: &Decoration,
    values: &ValueAssignment,
) -> ConstraintSpace {
    sys.combined_with(&kind_zero_forms(graph, dec, values))
}

struct Checked {
    constraints: ConstraintSpace,
    components: Vec<ComponentCheck>,
    verdict: Verdict,
    notes: Vec<String>,
}

fn check(
    graph: &MarkedDualGraph,
    levels: &LevelStructure,
    dec: &Decoration,
    sys: &EvaluationSystem,
    values: &ValueAssignment,
    cap: u32,
    cache: &mut HashMap<HurwitzProblem, Result<bool, HurwitzError>>,
) -> Checked {
    let constraints = full_constraints(sys, graph, dec, values);
    let mut out = Checked {
        constraints,
        components: Vec::new(),
        verdict: Verdict::AcceptedModuloGenericity,
        notes: Vec::new(),
    };
    let report = validate_twr(graph, levels, dec);
    if !report.is_valid() {
        out.verdict = reject(report.summary());
        return out;
    }
    if !out.constraints.is_consistent() {
        out.verdict = reject("evaluation constraints have no solution");
        return out;
    }
    for v in 0..graph.vertex_count() {
        let vid = graph.vertices()[v].id.clone();
        let cp = match component_problem(graph, dec, v, values, &out.constraints) {
            Ok(cp) => cp,
            Err(e) => {
                out.verdict = reject(format!("vertex `{vid}`: {e}"));
                return out;
            }
        };
        let p = cp.problem;
        let rh = rh_check(&p);
        let exists = if p.degree <= cap {
            let r = cache
                .entry(p.clone())
                .or_insert_with(|| exists_with_cap(&p, cap))
                .clone();
            match r {
                Ok(b) => Some(b),
                Err(e) => {
                    out.verdict = reject(format!("vertex `{vid}`: {e}"));
                    return out;
                }
            }
        } else {
            out.notes.push(format!(
                "vertex `{vid}`: degree {} above the Hurwitz cap, existence unchecked",
                p.degree
            ));
            None
        };
        let failed = !rh || exists == Some(false);
        out.components.push(ComponentCheck {
            vertex: vid.clone(),
            problem: p,
            rh,
            exists,
        });
        if failed {
            out.verdict = reject(format!("vertex `{vid}`: branch data is not realizable"));
            return out;
        }
    }
    if graph.vertices().iter().any(|v| v.genus > 0) {
        out.notes
            .push("positive-genus components: value coincidences are not realized exactly".into());
    }
    out
}

/// Re-checks a proposed certificate. A genus-0 witness upgrades the verdict to exact.
pub fn verify_certificate(
    graph: &MarkedDualGraph,
    mu: &[i64],
    levels: &LevelStructure,
    dec: &Decoration,
    witness: Option<&Genus0Witness>,
) -> Result<Certificate, GraphError> {
    let graph = graph.with_mu(mu)?;
    if levels.as_slice().len() != graph.vertex_count() {
        return Err(GraphError::LevelArity {
            expected: graph.vertex_count(),
            got: levels.as_slice().len(),
        });
    }
    let cap = crate::hurwitz::hurwitz_cap();
    let mut cache = HashMap::new();
    let (sys, values) = match ValueAssignment::symbolic(&graph, dec)
        .and_then(|values| evaluation_system(&graph, levels, dec).map(|s| (s, values)))
    {
        Ok(x) => x,
        Err(e) => {
            return Ok(Certificate {
                levels: levels.clone(),
                dec: dec.clone(),
                constraints: ConstraintSpace::new(&[]),
                components: Vec::new(),
                verdict: reject(e.to_string()),
                notes: Vec::new(),
            })
        }
    };
    let mut c = check(&graph, levels, dec, &sys, &values, cap, &mut cache);
    if c.verdict.is_accepted() {
        if let Some(w) = witness {
            match check_witness(&graph, levels, dec, w) {
                Ok(()) => c.verdict = Verdict::AcceptedExact,
                Err(reason) => c.notes.push(format!("witness not accepted: {reason}")),
            }
        }
    }
    Ok(Certificate {
        levels: levels.clone(),
        dec: dec.clone(),
        constraints: c.constraints,
        components: c.components,
        verdict: c.verdict,
        notes: c.notes,
    })
}

/// Builds every component function from the witness, checks its orders
/// against the decoration, and evaluates the system on the exact values.
pub fn check_witness(
    graph: &MarkedDualGraph,
    levels: &LevelStructure,
    dec: &Decoration,
    w: &Genus0Witness,
) -> Result<(), String> {
    let mut exact = dec.clone();
    for v in 0..graph.vertex_count() {
        let vx = &graph.vertices()[v];
        if vx.genus != 0 {
            return Err(format!("vertex `{}` has positive genus", vx.id));
        }
        let vw = w
            .vertices
            .get(&vx.id)
            .ok_or_else(|| format!("no data for vertex `{}`", vx.id))?;
        let points = dec.points_at(graph, v);
        let coord = |p: PointRef| -> Result<Coord, String> {
            let id = dec.point_id(graph, p);
            vw.points
                .get(&id)
                .cloned()
                .ok_or_else(|| format!("no coordinate for `{id}`"))
        };
        let mut zeros = Vec::new();
        let mut poles = Vec::new();
        for &p in &points {
            let o = dec.order_at(p);
            match o.kind {
                PointKind::Zero => zeros.push((coord(p)?, o.mult() as u32)),
                PointKind::Pole => poles.push((coord(p)?, o.mult() as u32)),
                PointKind::Regular => {}
            }
        }
        let f = realize_genus0(&zeros, &poles, vw.scale.clone()).map_err(|e| format!("vertex `{}`: {e}", vx.id))?;
        for &p in &points {
            let o = dec.order_at(p);
            let z = coord(p)?;
            if o.kind == PointKind::Regular {
                let m = f.local_multiplicity(&z).map_err(|e| e.to_string())?;
                if m != o.mult() as u32 {
                    return Err(format!(
                        "`{}` has multiplicity {m}, expected {}",
                        dec.point_id(graph, p),
                        o.mult()
                    ));
                }
                let value = f.value_at(&z).map_err(|e| e.to_string())?;
                if value.is_zero() {
                    return Err(format!("`{}` is an unexpected zero", dec.point_id(graph, p)));
                }
                exact.values.insert(p, LinearForm::constant(value));
            } else if o.kind == PointKind::Zero {
                exact.values.insert(p, LinearForm::zero());
            }
        }
    }
    let sys = evaluation_system(graph, levels, &exact).map_err(|e| e.to_string())?;
    for l in &sys.levels {
        if l.vanishing() != crate::ev::Vanishing::Yes {
            return Err(format!("level {} does not vanish on the exact values", l.level));
        }
    }
    Ok(())
}

/// Limits for the exhaustive search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBounds {
    /// Largest multiplicity at a node; defaults to the positive mass of mu.
    pub max_mult: Option<i64>,
    pub max_levels: Option<usize>,
    pub hurwitz_cap: u32,
    pub level_cap: u128,
    /// Candidate decorations examined per level structure.
    pub assignment_cap: u64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            max_mult: None,
            max_levels: None,
            hurwitz_cap: crate::hurwitz::hurwitz_cap(),
            level_cap: DEFAULT_ENUMERATION_CAP,
            assignment_cap: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub certificates: Vec<Certificate>,
    /// Level structures whose assignment enumeration hit the cap.
    pub exhausted: Vec<String>,
    pub level_structures: usize,
}

impl SearchOutcome {
    pub fn is_member(&self) -> bool {
        !self.certificates.is_empty()
    }
}

/// Orders chosen so far on the two sides of an edge.
type Partial = [Option<PointOrder>; 2];

struct Enumerator<'a> {
    graph: &'a MarkedDualGraph,
    levels: &'a LevelStructure,
    order: Vec<HalfEdge>,
    /// Vertex completed after assigning position `i`, if any.
    completes: Vec<Option<usize>>,
    max_mult: i64,
    cap: u64,
    visited: u64,
    leg_orders: Vec<PointOrder>,
}

impl Enumerator<'_> {
    fn options(&self, h: HalfEdge) -> Vec<PointOrder> {
        let here = self.levels.level(self.graph.half_vertex(h));
        let there = self.levels.level(self.graph.half_vertex(h.opposite()));
        let mut out = Vec::new();
        for m in 1..=self.max_mult {
            if here < there {
                out.push(PointOrder::pole(m));
            }
            out.push(PointOrder::zero(m));
            out.push(PointOrder::regular(m));
        }
        out
    }

    fn vertex_ok(&self, v: usize, cur: &[Partial]) -> bool {
        let g = self.graph;
        let mut degree = 0;
        let mut zeros = 0;
        let mut ord = 0;
        let orders = g
            .halves_at(v)
            .into_iter()
            .map(|h| cur[h.edge][h.side].unwrap())
            .chain(g.legs_at(v).into_iter().map(|l| self.leg_orders[l]));
        for o in orders {
            ord += o.ord_df;
            match o.kind {
                PointKind::Pole => degree += o.mult(),
                PointKind::Zero => zeros += o.mult(),
                PointKind::Regular => {}
            }
        }
        let marked = g.has_marked_zero(v);
        degree >= 1
            && degree <= self.max_mult
            && zeros <= degree
            && (!marked || zeros == degree)
            && 2 * g.vertices()[v].genus as i64 - 2 - ord >= 0
    }

    fn run(&mut self, i: usize, cur: &mut Vec<Partial>, visit: &mut dyn FnMut(&[Partial])) -> bool {
        if i == self.order.len() {
            self.visited += 1;
            visit(cur);
            return self.visited < self.cap;
        }
        let h = self.order[i];
        for o in self.options(h) {
            cur[h.edge][h.side] = Some(o);
            if let Some(other) = cur[h.edge][1 - h.side] {
                if o.ord_df + other.ord_df < -2 {
                    continue;
                }
            }
            if let Some(v) = self.completes[i] {
                if !self.vertex_ok(v, cur) {
                    continue;
                }
            }
            if !self.run(i + 1, cur, visit) {
                cur[h.edge][h.side] = None;
                return false;
            }
        }
        cur[h.edge][h.side] = None;
        true
    }
}

/// Every certificate within the bounds, one per isomorphism class of
/// decorated level graphs, in enumeration order.
pub fn search(graph: &MarkedDualGraph, mu: &[i64], bounds: &SearchBounds) -> Result<SearchOutcome, GraphError> {
    let graph = graph.with_mu(mu)?;
    let positive: i64 = mu.iter().filter(|&&m| m > 0).sum();
    let max_mult = bounds.max_mult.unwrap_or(positive).max(1);
    let structures = enumerate_level_structures(&graph, bounds.max_levels, bounds.level_cap)?;
    let leg_orders: Vec<PointOrder> = graph.legs().iter().map(|l| PointOrder::for_leg(l.mu)).collect();
    let mut seen: BTreeSet<CanonicalForm> = BTreeSet::new();
    let mut certificates = Vec::new();
    let mut exhausted = Vec::new();
    let mut cache = HashMap::new();

    let mut order = Vec::new();
    let mut completes = Vec::new();
    for v in 0..graph.vertex_count() {
        let hs = graph.halves_at(v);
        let start = order.len();
        order.extend(hs);
        completes.extend(std::iter::repeat_n(None, order.len() - start));
        if order.len() > start {
            *completes.last_mut().unwrap() = Some(v);
        }
    }
    let vertex_without_halves: Vec<usize> = (0..graph.vertex_count())
        .filter(|&v| graph.halves_at(v).is_empty())
        .collect();

    for levels in &structures {
        let base = Decoration::from_halves(&graph, vec![[PointOrder::regular(1); 2]; graph.edge_count()]);
        let values = ValueAssignment::symbolic(&graph, &base).map_err(|e| GraphError::Invalid {
            location: "values".into(),
            message: e.to_string(),
        })?;
        let sys = evaluation_system(&graph, levels, &base).map_err(|e| GraphError::Invalid {
            location: "levels".into(),
            message: e.to_string(),
        })?;
        let mut en = Enumerator {
            graph: &graph,
            levels,
            order: order.clone(),
            completes: completes.clone(),
            max_mult,
            cap: bounds.assignment_cap,
            visited: 0,
            leg_orders: leg_orders.clone(),
        };
        let mut cur = vec![[None; 2]; graph.edge_count()];
        let mut found = Vec::new();
        let complete = en.run(0, &mut cur, &mut |assignment| {
            let halves: Vec<[PointOrder; 2]> = assignment.iter().map(|[a, b]| [a.unwrap(), b.unwrap()]).collect();
            let dec = Decoration::from_halves(&graph, halves);
            if vertex_without_halves
                .iter()
                .any(|&v| !en_vertex_ok(&graph, &dec, v, max_mult))
            {
                return;
            }
            found.push(dec);
        });
        if !complete {
            exhausted.push(format!(
                "levels {:?}: stopped after {} decorations",
                levels.as_slice(),
                bounds.assignment_cap
            ));
        }
        for dec in found {
            // pole halves carry no value; everything else matches the base assignment
            let mut vals = values.clone();
            drop_pole_values(&dec, &mut vals);
            let c = check(&graph, levels, &dec, &sys, &vals, bounds.hurwitz_cap, &mut cache);
            if !c.verdict.is_accepted() {
                continue;
            }
            if !seen.insert(canonical_form(&decorated_colors(&graph, levels, &dec))) {
                continue;
            }
            certificates.push(Certificate {
                levels: levels.clone(),
                dec,
                constraints: c.constraints,
                components: c.components,
                verdict: c.verdict,
                notes: c.notes,
            });
        }
    }
    Ok(SearchOutcome {
        certificates,
        exhausted,
        level_structures: structures.len(),
    })
}

fn en_vertex_ok(graph: &MarkedDualGraph, dec: &Decoration, v: usize, max_mult: i64) -> bool {
    let b = dec.balance(graph, v);
    b.degree >= 1
        && b.degree <= max_mult
        && b.zero_mass <= b.degree
        && (!b.marked_zero || b.zero_mass == b.degree)
        && b.residual >= 0
}

fn drop_pole_values(dec: &Decoration, vals: &mut ValueAssignment) {
    let mut kept = ValueAssignment::default();
    for (p, f) in vals.iter() {
        if !dec.order_at(*p).is_pole() {
            kept.insert(*p, f.clone());
        }
    }
    *vals = kept;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::dollar;
    use crate::graph::GraphBuilder;

    fn space(list: &[&str]) -> ConstraintSpace {
        ConstraintSpace::new(&list.iter().map(|s| s.parse().unwrap()).collect::<Vec<LinearForm>>())
    }

    #[test]
    fn dollar_search_finds_both_top_cases() {
        let g = dollar();
        let out = search(&g, &[-3, 1, 1, 1], &SearchBounds::default()).unwrap();
        assert_eq!(out.level_structures, 3);
        assert!(out.exhausted.is_empty());
        assert_eq!(out.certificates.len(), 2);
        for c in &out.certificates {
            assert_eq!(c.levels.as_slice(), &[0, -1]);
            assert_eq!(c.verdict, Verdict::AcceptedModuloGenericity);
        }
        let equal = space(&["?v1:q1.0 - ?v1:q2.0", "?v1:q2.0 - ?v1:q3.0"]);
        let zero = space(&["?v1:q1.0", "?v1:q2.0", "?v1:q3.0"]);
        let shared: Vec<String> = ["v1:q1.0", "v1:q2.0", "v1:q3.0"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let found: Vec<ConstraintSpace> = out
            .certificates
            .iter()
            .map(|c| c.constraints.project(&shared))
            .collect();
        assert!(found.iter().any(|s| s.same_solutions(&equal)));
        assert!(found.iter().any(|s| s.same_solutions(&zero)));
    }

    #[test]
    fn compact_type_node_order_is_forced() {
        let g = GraphBuilder::new()
            .vertex("a", 1)
            .vertex("b", 1)
            .edge("e", "a", "b")
            .leg("z", "a", 2)
            .leg("p", "b", -2)
            .build()
            .unwrap();
        let out = search(&g, &[2, -2], &SearchBounds::default()).unwrap();
        assert!(!out.certificates.is_empty());
        for c in &out.certificates {
            // a carries the zero and must lie above b with a pole of order 2 at its node
            assert_eq!(c.levels.as_slice(), &[-1, 0]);
            assert_eq!(c.dec.halves[0][0], PointOrder::pole(2));
        }
    }

    #[test]
    fn impossible_balance_gives_nothing() {
        // a single vertex whose function would need poles but has only zeros
        let g = GraphBuilder::new()
            .vertex("a", 0)
            .vertex("b", 0)
            .edge("e1", "a", "b")
            .edge("e2", "a", "b")
            .edge("e3", "a", "b")
            .leg("z1", "a", 1)
            .leg("z2", "b", 1)
            .leg("p", "b", -1)
            .build()
            .unwrap();
        let out = search(
            &g,
            &[1, 2, -3],
            &SearchBounds {
                max_mult: Some(1),
                ..SearchBounds::default()
            },
        )
        .unwrap();
        assert!(out.certificates.is_empty());
    }

    #[test]
    fn violated_edge_sum_is_rejected() {
        let g = dollar();
        let levels = LevelStructure::normalized(&[0, -1]);
        let mut dec = Decoration::from_halves(&g, vec![[PointOrder::regular(1), PointOrder::pole(1)]; 3]);
        dec.halves[0] = [PointOrder::regular(1), PointOrder::pole(2)];
        let c = verify_certificate(&g, &[-3, 1, 1, 1], &levels, &dec, None).unwrap();
        assert!(!c.verdict.is_accepted());
    }

    #[test]
    fn genus_zero_witness_is_exact() {
        let g = GraphBuilder::new()
            .vertex("v1", 0)
            .vertex("v2", 0)
            .edge("q1", "v1", "v2")
            .edge("q2", "v1", "v2")
            .edge("q3", "v1", "v2")
            .leg("z1", "v1", 1)
            .leg("p1", "v1", -1)
            .leg("z2", "v2", 1)
            .leg("p2", "v2", -1)
            .build()
            .unwrap();
        let levels = LevelStructure::flat(2);
        let dec = Decoration::from_halves(&g, vec![[PointOrder::regular(1); 2]; 3]);
        let mut w = Genus0Witness::default();
        for (v, s) in [("v1", 0), ("v2", 1)] {
            let mut points = BTreeMap::new();
            points.insert(format!("z{}", s + 1), Coord::Finite(crate::linalg::q(0)));
            points.insert(format!("p{}", s + 1), Coord::Infinity);
            for l in 1..=3 {
                points.insert(format!("q{l}.{s}"), Coord::Finite(crate::linalg::q(l)));
            }
            w.vertices.insert(
                v.to_string(),
                VertexWitness {
                    scale: crate::linalg::q(1),
                    points,
                },
            );
        }
        let c = verify_certificate(&g, &[1, -1, 1, -1], &levels, &dec, Some(&w)).unwrap();
        assert_eq!(c.verdict, Verdict::AcceptedExact, "{:?}", c.notes);
        // moving one node value breaks the horizontal condition
        w.vertices
            .get_mut("v2")
            .unwrap()
            .points
            .insert("q3.1".into(), Coord::Finite(crate::linalg::q(7)));
        let c = verify_certificate(&g, &[1, -1, 1, -1], &levels, &dec, Some(&w)).unwrap();
        assert_eq!(c.verdict, Verdict::AcceptedModuloGenericity);
    }
}
