//! Partitions, decorations and the validity conditions for twistable rational
//! functions (TWR) and their fully marked refinements (TWDR).
//!
//! A decoration records, for every point of every component (leg, half-edge
//! or marked critical point), the order of `df_v` there together with the
//! kind of the point: a pole of `f_v`, a zero of `f_v`, or a point where
//! `f_v` is finite and non-zero. The multiplicity `mult_x f` follows from the
//! pair, since `ord_x df = mult - 1` away from poles and `-mult - 1` at poles.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::GraphError;
use crate::graph::{ColoredGraph, HalfEdge, LevelStructure, MarkedDualGraph};
use crate::linalg::LinearForm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointKind {
    Pole,
    Zero,
    Regular,
}

/// Order of `df` at a point plus the kind of the point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointOrder {
    pub ord_df: i64,
    pub kind: PointKind,
}

/// `ord_x df` from the multiplicity of `f` at `x`.
pub fn ord_df(mult: i64, at_pole: bool) -> i64 {
    if at_pole {
        -mult - 1
    } else {
        mult - 1
    }
}

impl PointOrder {
    pub fn pole(mult: i64) -> Self {
        PointOrder {
            ord_df: ord_df(mult, true),
            kind: PointKind::Pole,
        }
    }

    pub fn zero(mult: i64) -> Self {
        PointOrder {
            ord_df: ord_df(mult, false),
            kind: PointKind::Zero,
        }
    }

    pub fn regular(mult: i64) -> Self {
        PointOrder {
            ord_df: ord_df(mult, false),
            kind: PointKind::Regular,
        }
    }

    /// The order prescribed at a leg with label `mu`.
    pub fn for_leg(mu: i64) -> Self {
        match mu.signum() {
            1 => Self::zero(mu),
            -1 => Self::pole(-mu),
            _ => Self::regular(1),
        }
    }

    pub fn mult(&self) -> i64 {
        match self.kind {
            PointKind::Pole => -self.ord_df - 1,
            _ => self.ord_df + 1,
        }
    }

    /// `ord_x f`.
    pub fn ord_f(&self) -> i64 {
        match self.kind {
            PointKind::Pole => -self.mult(),
            PointKind::Zero => self.mult(),
            PointKind::Regular => 0,
        }
    }

    pub fn is_pole(&self) -> bool {
        self.kind == PointKind::Pole
    }

    /// Whether the pair is internally consistent (`ord df = -1` never occurs).
    pub fn is_consistent(&self) -> bool {
        match self.kind {
            PointKind::Pole => self.ord_df <= -2,
            _ => self.ord_df >= 0,
        }
    }

    /// Short label such as `P2`, `Z1` or `R3` (kind and multiplicity).
    pub fn label(&self) -> String {
        let k = match self.kind {
            PointKind::Pole => 'P',
            PointKind::Zero => 'Z',
            PointKind::Regular => 'R',
        };
        format!("{k}{}", self.mult())
    }
}

/// An extra marked critical point of `f_v` (an element of the set C).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CriticalLeg {
    pub id: String,
    pub vertex: usize,
    pub ord_df: i64,
}

/// A point of the normalization of some component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointRef {
    Half(HalfEdge),
    Leg(usize),
    Critical(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoration {
    /// Per edge, the orders at sides 0 and 1.
    pub halves: Vec<[PointOrder; 2]>,
    /// Per leg of the graph.
    pub legs: Vec<PointOrder>,
    pub critical: Vec<CriticalLeg>,
    /// Explicit values of `f_v` at points; all other finite points are unknowns.
    pub values: BTreeMap<PointRef, LinearForm>,
}

impl Decoration {
    /// Leg orders taken from the mu-labels, half-edge orders as given.
    pub fn from_halves(graph: &MarkedDualGraph, halves: Vec<[PointOrder; 2]>) -> Self {
        Decoration {
            halves,
            legs: graph.legs().iter().map(|l| PointOrder::for_leg(l.mu)).collect(),
            critical: Vec::new(),
            values: BTreeMap::new(),
        }
    }

    pub fn half(&self, h: HalfEdge) -> PointOrder {
        self.halves[h.edge][h.side]
    }

    pub fn order_at(&self, p: PointRef) -> PointOrder {
        match p {
            PointRef::Half(h) => self.half(h),
            PointRef::Leg(l) => self.legs[l],
            PointRef::Critical(c) => PointOrder::regular(self.critical[c].ord_df + 1),
        }
    }

    pub fn edge_sum(&self, e: usize) -> i64 {
        self.halves[e][0].ord_df + self.halves[e][1].ord_df
    }

    /// All points on vertex `v`: half-edges, legs, then critical legs.
    pub fn points_at(&self, graph: &MarkedDualGraph, v: usize) -> Vec<PointRef> {
        let mut out: Vec<PointRef> = graph.halves_at(v).into_iter().map(PointRef::Half).collect();
        out.extend(graph.legs_at(v).into_iter().map(PointRef::Leg));
        out.extend(
            (0..self.critical.len())
                .filter(|&c| self.critical[c].vertex == v)
                .map(PointRef::Critical),
        );
        out
    }

    pub fn point_vertex(&self, graph: &MarkedDualGraph, p: PointRef) -> usize {
        match p {
            PointRef::Half(h) => graph.half_vertex(h),
            PointRef::Leg(l) => graph.legs()[l].vertex,
            PointRef::Critical(c) => self.critical[c].vertex,
        }
    }

    pub fn point_id(&self, graph: &MarkedDualGraph, p: PointRef) -> String {
        match p {
            PointRef::Half(h) => graph.half_id(h),
            PointRef::Leg(l) => graph.legs()[l].id.clone(),
            PointRef::Critical(c) => self.critical[c].id.clone(),
        }
    }

    /// Resolves a point id (half-edge `e.s`, leg id or critical leg id).
    pub fn parse_point(&self, graph: &MarkedDualGraph, id: &str) -> Option<PointRef> {
        if let Some(l) = graph.leg_index(id) {
            return Some(PointRef::Leg(l));
        }
        if let Some(c) = self.critical.iter().position(|c| c.id == id) {
            return Some(PointRef::Critical(c));
        }
        graph.parse_half(id).map(PointRef::Half)
    }

    /// Same graph and orders, no explicit values.
    pub fn without_values(&self) -> Self {
        Decoration {
            values: BTreeMap::new(),
            ..self.clone()
        }
    }

    pub fn balance(&self, graph: &MarkedDualGraph, v: usize) -> VertexBalance {
        let mut b = VertexBalance {
            degree: 0,
            zero_mass: 0,
            marked_zero: graph.has_marked_zero(v),
            ord_sum: 0,
            residual: 0,
        };
        for p in self.points_at(graph, v) {
            let o = self.order_at(p);
            b.ord_sum += o.ord_df;
            match o.kind {
                PointKind::Pole => b.degree += o.mult(),
                PointKind::Zero => b.zero_mass += o.mult(),
                PointKind::Regular => {}
            }
        }
        b.residual = 2 * graph.vertices()[v].genus as i64 - 2 - b.ord_sum;
        b
    }
}

/// Degree bookkeeping of `f_v` on one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexBalance {
    /// Total pole multiplicity, the degree of `f_v`.
    pub degree: i64,
    /// Total multiplicity of the declared zeros.
    pub zero_mass: i64,
    pub marked_zero: bool,
    /// Sum of `ord df` over all declared points.
    pub ord_sum: i64,
    /// `2g - 2 - ord_sum`: the ramification left for unmarked critical points.
    pub residual: i64,
}

impl VertexBalance {
    /// Multiplicity of zeros not at declared points.
    pub fn unmarked_zeros(&self) -> i64 {
        self.degree - self.zero_mass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Clause {
    Shape,
    OrderOfVanishing,
    MatchingOrder,
    LevelCompatibility,
    Horizontal,
    CanonicalDegree,
    CriticalLeg,
    ExtensionTyping,
    Values,
    LocalMaxMarked,
    LocalMaxLevel,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Clause::Shape => "shape",
            Clause::OrderOfVanishing => "order-of-vanishing",
            Clause::MatchingOrder => "matching-order",
            Clause::LevelCompatibility => "level-compatibility",
            Clause::Horizontal => "horizontal-edge",
            Clause::CanonicalDegree => "canonical-degree",
            Clause::CriticalLeg => "critical-leg",
            Clause::ExtensionTyping => "extension-typing",
            Clause::Values => "values",
            Clause::LocalMaxMarked => "local-max-marked",
            Clause::LocalMaxLevel => "local-max-level",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub clause: Clause,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.clause, self.location, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Report {
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, clause: Clause) -> bool {
        self.violations.iter().any(|v| v.clause == clause)
    }

    pub(crate) fn push(&mut self, clause: Clause, location: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            clause,
            location: location.into(),
            message: message.into(),
        });
    }

    pub fn summary(&self) -> String {
        self.violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// `(mu_1 - 1, ..., mu_n - 1)`; the entries must sum to zero.
pub fn associated_partition(mu: &[i64]) -> Result<Vec<i64>, GraphError> {
    let s: i64 = mu.iter().sum();
    if s != 0 {
        return Err(GraphError::Invalid {
            location: "mu".into(),
            message: format!("entries sum to {s}, expected 0"),
        });
    }
    Ok(mu.iter().map(|m| m - 1).collect())
}

/// Whether `mu_hat = (mu - 1, tail)` with a positive tail and total `2g - 2`.
pub fn check_extension(mu_hat: &[i64], mu: &[i64], g: i64) -> bool {
    mu_hat.len() >= mu.len()
        && mu_hat.iter().zip(mu).all(|(a, m)| *a == m - 1)
        && mu_hat[mu.len()..].iter().all(|&x| x > 0)
        && mu_hat.iter().sum::<i64>() == 2 * g - 2
}

fn check_shape(graph: &MarkedDualGraph, levels: &LevelStructure, dec: &Decoration, r: &mut Report) -> bool {
    let mut ok = true;
    if levels.as_slice().len() != graph.vertex_count() {
        r.push(Clause::Shape, "levels", "level map does not match the vertex set");
        ok = false;
    }
    if dec.halves.len() != graph.edge_count() {
        r.push(Clause::Shape, "orders", "half-edge orders do not match the edge set");
        ok = false;
    }
    if dec.legs.len() != graph.legs().len() {
        r.push(Clause::Shape, "orders", "leg orders do not match the leg set");
        ok = false;
    }
    for c in &dec.critical {
        if c.vertex >= graph.vertex_count() {
            r.push(Clause::Shape, format!("critical leg `{}`", c.id), "unknown vertex");
            ok = false;
        }
    }
    ok
}

/// Checks shared by TWR and TWDR validation; `exact` selects the TWDR form
/// of the node condition.
fn check_common(graph: &MarkedDualGraph, levels: &LevelStructure, dec: &Decoration, exact: bool, r: &mut Report) {
    for e in 0..graph.edge_count() {
        for side in 0..2 {
            let h = HalfEdge::new(e, side);
            let o = dec.half(h);
            if !o.is_consistent() {
                r.push(
                    Clause::OrderOfVanishing,
                    graph.half_id(h),
                    format!("ord df = {} is impossible for a {:?} point", o.ord_df, o.kind),
                );
            }
        }
    }
    for (l, leg) in graph.legs().iter().enumerate() {
        let o = dec.legs[l];
        let ok = match leg.mu.signum() {
            0 => o.kind == PointKind::Regular && o.ord_df >= 0,
            _ => o == PointOrder::for_leg(leg.mu),
        };
        if !ok {
            r.push(
                Clause::OrderOfVanishing,
                format!("leg `{}`", leg.id),
                format!("order {} does not match mu = {}", o.label(), leg.mu),
            );
        }
    }
    for c in &dec.critical {
        if c.ord_df < 1 {
            r.push(
                Clause::CriticalLeg,
                format!("critical leg `{}`", c.id),
                format!("ord df = {} is not positive", c.ord_df),
            );
        }
    }
    for v in 0..graph.vertex_count() {
        let b = dec.balance(graph, v);
        let loc = format!("vertex `{}`", graph.vertices()[v].id);
        if b.degree < 1 {
            r.push(Clause::OrderOfVanishing, &loc, "f_v has no pole, so it is constant");
        }
        if b.marked_zero && b.zero_mass != b.degree {
            r.push(
                Clause::OrderOfVanishing,
                &loc,
                format!(
                    "component has marked zeros, so its zeros ({}) must exhaust the degree {}",
                    b.zero_mass, b.degree
                ),
            );
        } else if b.zero_mass > b.degree {
            r.push(
                Clause::OrderOfVanishing,
                &loc,
                format!("zero mass {} exceeds the degree {}", b.zero_mass, b.degree),
            );
        }
        if exact && b.residual != 0 {
            r.push(
                Clause::CanonicalDegree,
                &loc,
                format!("sum of ord df is {}, expected {}", b.ord_sum, b.ord_sum + b.residual),
            );
        } else if b.residual < 0 {
            r.push(
                Clause::OrderOfVanishing,
                &loc,
                format!("declared ramification exceeds Riemann-Hurwitz by {}", -b.residual),
            );
        }
    }
    for e in 0..graph.edge_count() {
        let id = &graph.edges()[e].id;
        let s = dec.edge_sum(e);
        if exact && s != -2 {
            r.push(
                Clause::MatchingOrder,
                format!("edge `{id}`"),
                format!("ord df sum {s}, expected -2"),
            );
        } else if s < -2 {
            r.push(
                Clause::MatchingOrder,
                format!("edge `{id}`"),
                format!("ord df sum {s} < -2"),
            );
        }
        for side in 0..2 {
            let h = HalfEdge::new(e, side);
            if dec.half(h).is_pole() {
                let here = levels.level(graph.half_vertex(h));
                let there = levels.level(graph.half_vertex(h.opposite()));
                if here >= there {
                    r.push(
                        Clause::LevelCompatibility,
                        graph.half_id(h),
                        format!("pole at level {here} is not below the opposite level {there}"),
                    );
                }
            }
        }
    }
    for (p, value) in &dec.values {
        let o = dec.order_at(*p);
        let loc = dec.point_id(graph, *p);
        match o.kind {
            PointKind::Pole => r.push(Clause::Values, loc, "a pole has no finite value"),
            PointKind::Zero if value.is_constant() && !value.is_zero() => {
                r.push(Clause::Values, loc, "a zero of f must have value 0")
            }
            _ => {}
        }
    }
}

/// Validates a decoration as a twistable rational function compatible with `levels`.
pub fn validate_twr(graph: &MarkedDualGraph, levels: &LevelStructure, dec: &Decoration) -> Report {
    let mut r = Report::default();
    if check_shape(graph, levels, dec, &mut r) {
        check_common(graph, levels, dec, false, &mut r);
    }
    r
}

/// Validates a fully marked decoration as a twisted rational function.
pub fn validate_twdr(graph: &MarkedDualGraph, levels: &LevelStructure, dec: &Decoration) -> Report {
    let mut r = Report::default();
    if !check_shape(graph, levels, dec, &mut r) {
        return r;
    }
    check_common(graph, levels, dec, true, &mut r);
    for e in 0..graph.edge_count() {
        if levels.is_horizontal(graph, e) {
            r.push(
                Clause::Horizontal,
                format!("edge `{}`", graph.edges()[e].id),
                "a twisted rational function has no horizontal edges",
            );
        }
    }
    let (mu, mut mu_hat): (Vec<i64>, Vec<i64>) = graph
        .legs()
        .iter()
        .enumerate()
        .filter(|(_, l)| l.mu != 0)
        .map(|(i, l)| (l.mu, dec.legs[i].ord_df))
        .unzip();
    mu_hat.extend(dec.critical.iter().map(|c| c.ord_df));
    // an unlabeled point where df vanishes is a critical point that happens to be marked
    mu_hat.extend(
        graph
            .legs()
            .iter()
            .zip(&dec.legs)
            .filter(|(l, o)| l.mu == 0 && o.ord_df > 0)
            .map(|(_, o)| o.ord_df),
    );
    if !check_extension(&mu_hat, &mu, graph.genus()) {
        r.push(
            Clause::ExtensionTyping,
            "type",
            format!("{mu_hat:?} does not extend the partition associated to {mu:?}"),
        );
    }
    r
}

/// Colored graph of a decorated level graph, for deduplication up to isomorphism.
pub fn decorated_colors(graph: &MarkedDualGraph, levels: &LevelStructure, dec: &Decoration) -> ColoredGraph {
    let mut cg = crate::graph::level_graph_colors(graph, Some(levels));
    for (e, edge) in cg.edges.iter_mut().enumerate() {
        edge.1 = [dec.halves[e][0].label(), dec.halves[e][1].label()];
    }
    for (l, leg) in cg.legs.iter_mut().enumerate() {
        leg.1 = format!("{}|{}", leg.1, dec.legs[l].label());
    }
    cg.legs
        .extend(dec.critical.iter().map(|c| (c.vertex, format!("c{}", c.ord_df))));
    cg
}
