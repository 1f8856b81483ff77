//! JSON exchange formats.
//!
//! One self-describing document carries a graph and, optionally, levels, a
//! decoration, an admissible cover and a genus-0 witness. Rationals are
//! written `"p/q"`, symbolic unknowns `"?name"`. Every reader error carries a
//! JSON pointer into the document.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;
use serde_json::{json, Map, Value};

use crate::closure::{Genus0Witness, VertexWitness};
use crate::cover::{CombinatorialCover, CoverMap, TargetTree};
use crate::error::FormatError;
use crate::graph::{Edge, HalfEdge, Leg, LevelStructure, MarkedDualGraph, Vertex};
use crate::hurwitz::Coord;
use crate::linalg::{parse_rational, LinearForm, Q};
use crate::twr::{CriticalLeg, Decoration, PointKind, PointOrder, PointRef};

pub const FORMAT_VERSION: u64 = 1;

/// A parsed input document.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub graph: MarkedDualGraph,
    pub levels: Option<LevelStructure>,
    pub decoration: Option<Decoration>,
    pub cover: Option<CombinatorialCover>,
    pub witness: Option<Genus0Witness>,
}

impl Bundle {
    pub fn new(graph: MarkedDualGraph) -> Self {
        Bundle {
            graph,
            levels: None,
            decoration: None,
            cover: None,
            witness: None,
        }
    }
}

/// Escapes one reference token (`~` and `/`).
pub fn escape_token(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

fn child(ptr: &str, token: &str) -> String {
    format!("{ptr}/{}", escape_token(token))
}

fn idx(ptr: &str, i: usize) -> String {
    format!("{ptr}/{i}")
}

fn object<'a>(v: &'a Value, ptr: &str) -> Result<&'a Map<String, Value>, FormatError> {
    v.as_object()
        .ok_or_else(|| FormatError::schema(ptr, "expected an object"))
}

fn array<'a>(v: &'a Value, ptr: &str) -> Result<&'a Vec<Value>, FormatError> {
    v.as_array()
        .ok_or_else(|| FormatError::schema(ptr, "expected an array"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, ptr: &str) -> Result<&'a Value, FormatError> {
    obj.get(key)
        .ok_or_else(|| FormatError::schema(ptr, format!("missing field `{key}`")))
}

fn string<'a>(v: &'a Value, ptr: &str) -> Result<&'a str, FormatError> {
    v.as_str().ok_or_else(|| FormatError::schema(ptr, "expected a string"))
}

fn int(v: &Value, ptr: &str) -> Result<i64, FormatError> {
    v.as_i64()
        .ok_or_else(|| FormatError::schema(ptr, "expected an integer"))
}

fn boolean(v: &Value, ptr: &str) -> Result<bool, FormatError> {
    v.as_bool()
        .ok_or_else(|| FormatError::schema(ptr, "expected a boolean"))
}

fn rational(v: &Value, ptr: &str) -> Result<Q, FormatError> {
    match v {
        Value::String(s) => parse_rational(s).ok_or_else(|| FormatError::schema(ptr, format!("bad rational `{s}`"))),
        Value::Number(_) => Ok(Q::from_integer(int(v, ptr)?.into())),
        _ => Err(FormatError::schema(ptr, "expected a rational \"p/q\"")),
    }
}

/// `"p/q"`, or the bare integer when the denominator is one.
pub fn rational_string(x: &Q) -> String {
    x.to_string()
}

/// Reads `"p/q"`, `"?name"` or a linear combination in the display syntax.
pub fn parse_value(s: &str) -> Option<LinearForm> {
    if let Some(x) = parse_rational(s) {
        return Some(LinearForm::constant(x));
    }
    s.parse().ok()
}

pub fn form_string(f: &LinearForm) -> String {
    f.to_string()
}

/// Reads a graph object; a `"levels"` map inside it is returned alongside.
pub fn graph_from_value(v: &Value, ptr: &str) -> Result<(MarkedDualGraph, Option<LevelStructure>), FormatError> {
    let obj = object(v, ptr)?;
    let vptr = child(ptr, "vertices");
    let mut vertices = Vec::new();
    let mut vindex = BTreeMap::new();
    for (i, x) in array(field(obj, "vertices", ptr)?, &vptr)?.iter().enumerate() {
        let p = idx(&vptr, i);
        let o = object(x, &p)?;
        let id = string(field(o, "id", &p)?, &child(&p, "id"))?.to_string();
        let genus = match o.get("genus") {
            Some(g) => {
                let g = int(g, &child(&p, "genus"))?;
                u32::try_from(g).map_err(|_| FormatError::schema(child(&p, "genus"), "genus must be non-negative"))?
            }
            None => 0,
        };
        if vindex.insert(id.clone(), i).is_some() {
            return Err(FormatError::schema(
                child(&p, "id"),
                format!("duplicate vertex id `{id}`"),
            ));
        }
        vertices.push(Vertex { id, genus });
    }
    let vertex_ref = |x: &Value, p: &str| -> Result<usize, FormatError> {
        let id = string(x, p)?;
        vindex
            .get(id)
            .copied()
            .ok_or_else(|| FormatError::schema(p, format!("unknown vertex `{id}`")))
    };
    let mut edges = Vec::new();
    if let Some(es) = obj.get("edges") {
        let eptr = child(ptr, "edges");
        for (i, x) in array(es, &eptr)?.iter().enumerate() {
            let p = idx(&eptr, i);
            let o = object(x, &p)?;
            let id = string(field(o, "id", &p)?, &child(&p, "id"))?.to_string();
            let endp = child(&p, "ends");
            let ends = array(field(o, "ends", &p)?, &endp)?;
            if ends.len() != 2 {
                return Err(FormatError::schema(endp, "an edge has exactly two ends"));
            }
            let a = vertex_ref(&ends[0], &idx(&endp, 0))?;
            let b = vertex_ref(&ends[1], &idx(&endp, 1))?;
            edges.push(Edge { id, ends: [a, b] });
        }
    }
    let mut legs = Vec::new();
    if let Some(ls) = obj.get("legs") {
        let lptr = child(ptr, "legs");
        for (i, x) in array(ls, &lptr)?.iter().enumerate() {
            let p = idx(&lptr, i);
            let o = object(x, &p)?;
            let id = string(field(o, "id", &p)?, &child(&p, "id"))?.to_string();
            let vertex = vertex_ref(field(o, "vertex", &p)?, &child(&p, "vertex"))?;
            let mu = match o.get("mu") {
                Some(m) => int(m, &child(&p, "mu"))?,
                None => 0,
            };
            legs.push(Leg { id, vertex, mu });
        }
    }
    let graph = MarkedDualGraph::new(vertices, edges, legs)?;
    let levels = match obj.get("levels") {
        Some(l) => Some(levels_from_value(&graph, l, &child(ptr, "levels"))?),
        None => None,
    };
    Ok((graph, levels))
}

/// `{vid: int}` covering every vertex.
pub fn levels_from_value(graph: &MarkedDualGraph, v: &Value, ptr: &str) -> Result<LevelStructure, FormatError> {
    let obj = object(v, ptr)?;
    let mut raw = vec![None; graph.vertex_count()];
    for (k, x) in obj {
        let p = child(ptr, k);
        let vi = graph
            .vertex_index(k)
            .ok_or_else(|| FormatError::schema(&p, format!("unknown vertex `{k}`")))?;
        raw[vi] = Some(int(x, &p)?);
    }
    let mut out = Vec::with_capacity(raw.len());
    for (vi, r) in raw.into_iter().enumerate() {
        match r {
            Some(l) => out.push(l),
            None => {
                return Err(FormatError::schema(
                    ptr,
                    format!("no level for vertex `{}`", graph.vertices()[vi].id),
                ))
            }
        }
    }
    Ok(LevelStructure::for_graph(graph, &out)?)
}

pub fn levels_to_value(graph: &MarkedDualGraph, levels: &LevelStructure) -> Value {
    let mut m = Map::new();
    for (vi, v) in graph.vertices().iter().enumerate() {
        m.insert(v.id.clone(), json!(levels.level(vi)));
    }
    Value::Object(m)
}

pub fn graph_to_value(graph: &MarkedDualGraph, levels: Option<&LevelStructure>) -> Value {
    let vertices: Vec<Value> = graph
        .vertices()
        .iter()
        .map(|v| json!({"id": v.id, "genus": v.genus}))
        .collect();
    let edges: Vec<Value> = graph
        .edges()
        .iter()
        .map(|e| {
            json!({
                "id": e.id,
                "ends": [graph.vertices()[e.ends[0]].id, graph.vertices()[e.ends[1]].id],
            })
        })
        .collect();
    let legs: Vec<Value> = graph
        .legs()
        .iter()
        .map(|l| json!({"id": l.id, "vertex": graph.vertices()[l.vertex].id, "mu": l.mu}))
        .collect();
    let mut out = json!({"vertices": vertices, "edges": edges, "legs": legs});
    if let Some(levels) = levels {
        out["levels"] = levels_to_value(graph, levels);
    }
    out
}

fn order_from_value(v: &Value, ptr: &str, default_zero: bool) -> Result<PointOrder, FormatError> {
    let o = object(v, ptr)?;
    let ord_df = int(field(o, "ord_df", ptr)?, &child(ptr, "ord_df"))?;
    let pole = boolean(field(o, "pole", ptr)?, &child(ptr, "pole"))?;
    let zero = match o.get("zero") {
        Some(z) => boolean(z, &child(ptr, "zero"))?,
        None => default_zero && !pole,
    };
    let kind = match (pole, zero) {
        (true, true) => return Err(FormatError::schema(ptr, "a point cannot be both a pole and a zero")),
        (true, false) => PointKind::Pole,
        (false, true) => PointKind::Zero,
        (false, false) => PointKind::Regular,
    };
    let order = PointOrder { ord_df, kind };
    if !order.is_consistent() {
        return Err(FormatError::schema(
            ptr,
            format!("ord_df {ord_df} is impossible at a {} point", kind_word(kind)),
        ));
    }
    Ok(order)
}

fn kind_word(k: PointKind) -> &'static str {
    match k {
        PointKind::Pole => "pole",
        PointKind::Zero => "zero",
        PointKind::Regular => "regular",
    }
}

fn order_to_value(o: PointOrder) -> Value {
    let mut m = json!({"ord_df": o.ord_df, "pole": o.is_pole()});
    if o.kind == PointKind::Zero {
        m["zero"] = json!(true);
    }
    m
}

/// Splits a `"vid:point"` key; vertex ids may themselves contain colons.
fn split_value_key(graph: &MarkedDualGraph, dec: &Decoration, key: &str) -> Option<(usize, PointRef)> {
    for (i, _) in key.match_indices(':') {
        let (vid, pid) = (&key[..i], &key[i + 1..]);
        if let (Some(v), Some(p)) = (graph.vertex_index(vid), dec.parse_point(graph, pid)) {
            return Some((v, p));
        }
    }
    None
}

/// Reads a decoration against `graph`. Every half-edge needs an order; leg
/// orders default to those implied by their labels.
pub fn decoration_from_value(graph: &MarkedDualGraph, v: &Value, ptr: &str) -> Result<Decoration, FormatError> {
    let obj = object(v, ptr)?;
    let mut dec = Decoration::from_halves(graph, vec![[PointOrder::regular(1); 2]; graph.edge_count()]);

    if let Some(cs) = obj.get("critical") {
        let cptr = child(ptr, "critical");
        for (i, x) in array(cs, &cptr)?.iter().enumerate() {
            let p = idx(&cptr, i);
            let o = object(x, &p)?;
            let id = string(field(o, "id", &p)?, &child(&p, "id"))?.to_string();
            let vid = string(field(o, "vertex", &p)?, &child(&p, "vertex"))?;
            let vertex = graph
                .vertex_index(vid)
                .ok_or_else(|| FormatError::schema(child(&p, "vertex"), format!("unknown vertex `{vid}`")))?;
            let ord_df = int(field(o, "ord_df", &p)?, &child(&p, "ord_df"))?;
            if ord_df < 1 {
                return Err(FormatError::schema(
                    child(&p, "ord_df"),
                    "a critical leg has ord_df >= 1",
                ));
            }
            if graph.leg_index(&id).is_some() || dec.critical.iter().any(|c| c.id == id) {
                return Err(FormatError::schema(
                    child(&p, "id"),
                    format!("duplicate point id `{id}`"),
                ));
            }
            dec.critical.push(CriticalLeg { id, vertex, ord_df });
        }
    }

    let optr = child(ptr, "orders");
    let orders = object(field(obj, "orders", ptr)?, &optr)?;
    let mut seen = BTreeSet::new();
    for (k, x) in orders {
        let p = child(&optr, k);
        match dec.parse_point(graph, k) {
            Some(PointRef::Half(h)) => {
                dec.halves[h.edge][h.side] = order_from_value(x, &p, false)?;
                seen.insert((h.edge, h.side));
            }
            Some(PointRef::Leg(l)) => {
                dec.legs[l] = order_from_value(x, &p, graph.legs()[l].mu > 0)?;
            }
            Some(PointRef::Critical(c)) => {
                let o = order_from_value(x, &p, false)?;
                if o != PointOrder::regular(dec.critical[c].ord_df + 1) {
                    return Err(FormatError::schema(
                        p,
                        "critical legs are regular points of the declared ord_df",
                    ));
                }
            }
            None => return Err(FormatError::schema(p, format!("unknown point `{k}`"))),
        }
    }
    for e in 0..graph.edge_count() {
        for side in 0..2 {
            if !seen.contains(&(e, side)) {
                return Err(FormatError::schema(
                    &optr,
                    format!(
                        "missing order for half-edge `{}`",
                        graph.half_id(HalfEdge::new(e, side))
                    ),
                ));
            }
        }
    }

    if let Some(m) = obj.get("marked_zero_vertices") {
        let mptr = child(ptr, "marked_zero_vertices");
        let mut listed = BTreeSet::new();
        for (i, x) in array(m, &mptr)?.iter().enumerate() {
            let p = idx(&mptr, i);
            let vid = string(x, &p)?;
            let vi = graph
                .vertex_index(vid)
                .ok_or_else(|| FormatError::schema(&p, format!("unknown vertex `{vid}`")))?;
            listed.insert(vi);
        }
        let actual: BTreeSet<usize> = (0..graph.vertex_count())
            .filter(|&v| graph.has_marked_zero(v))
            .collect();
        if listed != actual {
            return Err(FormatError::schema(
                mptr,
                "marked zero vertices must be exactly those carrying a leg with mu > 0",
            ));
        }
    }

    if let Some(vals) = obj.get("values") {
        let vptr = child(ptr, "values");
        for (k, x) in object(vals, &vptr)? {
            let p = child(&vptr, k);
            let (_, point) = split_value_key(graph, &dec, k)
                .ok_or_else(|| FormatError::schema(&p, format!("`{k}` is not `vertex:point`")))?;
            let (vid, _) = k.split_at(k.len() - dec.point_id(graph, point).len() - 1);
            if dec.point_vertex(graph, point) != graph.vertex_index(vid).unwrap_or(usize::MAX) {
                return Err(FormatError::schema(&p, format!("point does not lie on vertex `{vid}`")));
            }
            let s = string(x, &p)?;
            let form = parse_value(s).ok_or_else(|| FormatError::schema(&p, format!("bad value `{s}`")))?;
            dec.values.insert(point, form);
        }
    }
    Ok(dec)
}

pub fn decoration_to_value(graph: &MarkedDualGraph, dec: &Decoration) -> Value {
    let mut orders = Map::new();
    for e in 0..graph.edge_count() {
        for side in 0..2 {
            let h = HalfEdge::new(e, side);
            orders.insert(graph.half_id(h), order_to_value(dec.half(h)));
        }
    }
    for (l, leg) in graph.legs().iter().enumerate() {
        orders.insert(leg.id.clone(), order_to_value(dec.legs[l]));
    }
    let marked: Vec<&str> = (0..graph.vertex_count())
        .filter(|&v| graph.has_marked_zero(v))
        .map(|v| graph.vertices()[v].id.as_str())
        .collect();
    let mut out = json!({"orders": orders, "marked_zero_vertices": marked});
    if !dec.critical.is_empty() {
        let cs: Vec<Value> = dec
            .critical
            .iter()
            .map(|c| json!({"id": c.id, "vertex": graph.vertices()[c.vertex].id, "ord_df": c.ord_df}))
            .collect();
        out["critical"] = Value::Array(cs);
    }
    if !dec.values.is_empty() {
        let mut vals = Map::new();
        for (&p, f) in &dec.values {
            let vid = &graph.vertices()[dec.point_vertex(graph, p)].id;
            vals.insert(format!("{vid}:{}", dec.point_id(graph, p)), json!(form_string(f)));
        }
        out["values"] = Value::Object(vals);
    }
    out
}

fn coord_from_value(v: &Value, ptr: &str) -> Result<Coord, FormatError> {
    if v.as_str() == Some("inf") {
        return Ok(Coord::Infinity);
    }
    Ok(Coord::Finite(rational(v, ptr)?))
}

fn coord_to_value(c: &Coord) -> Value {
    match c {
        Coord::Finite(x) => json!(rational_string(x)),
        Coord::Infinity => json!("inf"),
    }
}

/// `{vid: {"scale": "p/q", "points": {point: "p/q" | "inf"}}}`.
pub fn witness_from_value(graph: &MarkedDualGraph, v: &Value, ptr: &str) -> Result<Genus0Witness, FormatError> {
    let mut w = Genus0Witness::default();
    for (vid, x) in object(v, ptr)? {
        let p = child(ptr, vid);
        if graph.vertex_index(vid).is_none() {
            return Err(FormatError::schema(p, format!("unknown vertex `{vid}`")));
        }
        let o = object(x, &p)?;
        let scale = match o.get("scale") {
            Some(s) => rational(s, &child(&p, "scale"))?,
            None => Q::one(),
        };
        let pp = child(&p, "points");
        let mut points = BTreeMap::new();
        for (pid, c) in object(field(o, "points", &p)?, &pp)? {
            points.insert(pid.clone(), coord_from_value(c, &child(&pp, pid))?);
        }
        w.vertices.insert(vid.clone(), VertexWitness { scale, points });
    }
    Ok(w)
}

pub fn witness_to_value(w: &Genus0Witness) -> Value {
    let mut out = Map::new();
    for (vid, vw) in &w.vertices {
        let points: Map<String, Value> = vw.points.iter().map(|(k, c)| (k.clone(), coord_to_value(c))).collect();
        out.insert(
            vid.clone(),
            json!({"scale": rational_string(&vw.scale), "points": points}),
        );
    }
    Value::Object(out)
}

/// Reads a cover: `{"source": graph, "target": graph + "zero_leg" /
/// "infinity_leg", "map": ..., "mults": ...}`.
///
/// The map is either `{"vertices":{..},"edges":{..},"legs":{..}}` or a flat
/// `{source_item: target_item}` when source ids are unambiguous across
/// categories. `"mults"` is keyed by half-edge `e.s`, edge id (both sides) or
/// leg id; unlisted items have multiplicity one.
pub fn cover_from_value(v: &Value, ptr: &str) -> Result<CombinatorialCover, FormatError> {
    let obj = object(v, ptr)?;
    let (source, _) = graph_from_value(field(obj, "source", ptr)?, &child(ptr, "source"))?;
    let tptr = child(ptr, "target");
    let tv = field(obj, "target", ptr)?;
    let (tgraph, _) = graph_from_value(tv, &tptr)?;
    let tobj = object(tv, &tptr)?;
    let special = |key: &str| -> Result<usize, FormatError> {
        let p = child(&tptr, key);
        let id = string(field(tobj, key, &tptr)?, &p)?;
        tgraph
            .leg_index(id)
            .ok_or_else(|| FormatError::schema(p, format!("unknown target leg `{id}`")))
    };
    let zero_leg = special("zero_leg")?;
    let infinity_leg = special("infinity_leg")?;

    let mptr = child(ptr, "map");
    let mobj = object(field(obj, "map", ptr)?, &mptr)?;
    let mut vmap = vec![None; source.vertex_count()];
    let mut emap = vec![None; source.edge_count()];
    let mut lmap = vec![None; source.legs().len()];
    let structured =
        mobj.keys().all(|k| matches!(k.as_str(), "vertices" | "edges" | "legs")) && mobj.values().all(Value::is_object);
    let mut assign = |cat: &str, sid: &str, tid: &str, p: &str| -> Result<(), FormatError> {
        let (slot, target) = match cat {
            "vertices" => (source.vertex_index(sid).map(|i| &mut vmap[i]), tgraph.vertex_index(tid)),
            "edges" => (source.edge_index(sid).map(|i| &mut emap[i]), tgraph.edge_index(tid)),
            _ => (source.leg_index(sid).map(|i| &mut lmap[i]), tgraph.leg_index(tid)),
        };
        let slot = slot.ok_or_else(|| FormatError::schema(p, format!("unknown source item `{sid}`")))?;
        let target = target.ok_or_else(|| FormatError::schema(p, format!("unknown target item `{tid}`")))?;
        *slot = Some(target);
        Ok(())
    };
    if structured {
        for (cat, m) in mobj {
            let cp = child(&mptr, cat);
            for (sid, t) in m.as_object().into_iter().flatten() {
                let p = child(&cp, sid);
                assign(cat, sid, string(t, &p)?, &p)?;
            }
        }
    } else {
        for (sid, t) in mobj {
            let p = child(&mptr, sid);
            let cats: Vec<&str> = [
                ("vertices", source.vertex_index(sid).is_some()),
                ("edges", source.edge_index(sid).is_some()),
                ("legs", source.leg_index(sid).is_some()),
            ]
            .into_iter()
            .filter(|c| c.1)
            .map(|c| c.0)
            .collect();
            match cats.as_slice() {
                [cat] => assign(cat, sid, string(t, &p)?, &p)?,
                [] => return Err(FormatError::schema(p, format!("unknown source item `{sid}`"))),
                _ => {
                    return Err(FormatError::schema(
                        p,
                        format!("`{sid}` is ambiguous, use the structured map"),
                    ))
                }
            }
        }
    }
    let complete = |name: &str, ids: Vec<&str>, m: Vec<Option<usize>>| -> Result<Vec<usize>, FormatError> {
        m.into_iter()
            .zip(ids)
            .map(|(x, id)| x.ok_or_else(|| FormatError::schema(&mptr, format!("{name} `{id}` is not mapped"))))
            .collect()
    };
    let vertices = complete(
        "vertex",
        source.vertices().iter().map(|x| x.id.as_str()).collect(),
        vmap,
    )?;
    let edges = complete("edge", source.edges().iter().map(|x| x.id.as_str()).collect(), emap)?;
    let legs = complete("leg", source.legs().iter().map(|x| x.id.as_str()).collect(), lmap)?;

    let mut half_mults = vec![[1u32; 2]; source.edge_count()];
    let mut leg_mults = vec![1u32; source.legs().len()];
    if let Some(ms) = obj.get("mults") {
        let mp = child(ptr, "mults");
        for (k, x) in object(ms, &mp)? {
            let p = child(&mp, k);
            let m = int(x, &p)?;
            let m = u32::try_from(m).map_err(|_| FormatError::schema(&p, "multiplicity must be non-negative"))?;
            if let Some(l) = source.leg_index(k) {
                leg_mults[l] = m;
            } else if let Some(e) = source.edge_index(k) {
                half_mults[e] = [m, m];
            } else if let Some(h) = source.parse_half(k) {
                half_mults[h.edge][h.side] = m;
            } else {
                return Err(FormatError::schema(p, format!("unknown source item `{k}`")));
            }
        }
    }
    Ok(CombinatorialCover {
        source,
        target: TargetTree {
            graph: tgraph,
            zero_leg,
            infinity_leg,
        },
        map: CoverMap { vertices, edges, legs },
        half_mults,
        leg_mults,
    })
}

pub fn cover_to_value(c: &CombinatorialCover) -> Value {
    let s = &c.source;
    let t = &c.target.graph;
    let mut target = graph_to_value(t, None);
    target["zero_leg"] = json!(t.legs()[c.target.zero_leg].id);
    target["infinity_leg"] = json!(t.legs()[c.target.infinity_leg].id);
    let vertices: Map<String, Value> = s
        .vertices()
        .iter()
        .zip(&c.map.vertices)
        .map(|(v, &x)| (v.id.clone(), json!(t.vertices()[x].id)))
        .collect();
    let edges: Map<String, Value> = s
        .edges()
        .iter()
        .zip(&c.map.edges)
        .map(|(e, &x)| (e.id.clone(), json!(t.edges()[x].id)))
        .collect();
    let legs: Map<String, Value> = s
        .legs()
        .iter()
        .zip(&c.map.legs)
        .map(|(l, &x)| (l.id.clone(), json!(t.legs()[x].id)))
        .collect();
    let mut mults = Map::new();
    for (e, m) in c.half_mults.iter().enumerate() {
        for (side, &k) in m.iter().enumerate() {
            mults.insert(s.half_id(HalfEdge::new(e, side)), json!(k));
        }
    }
    for (l, &k) in c.leg_mults.iter().enumerate() {
        mults.insert(s.legs()[l].id.clone(), json!(k));
    }
    json!({
        "source": graph_to_value(s, None),
        "target": target,
        "map": {"vertices": vertices, "edges": edges, "legs": legs},
        "mults": mults,
    })
}

fn check_version(obj: &Map<String, Value>) -> Result<(), FormatError> {
    match obj.get("version") {
        None => Ok(()),
        Some(v) if v.as_u64() == Some(FORMAT_VERSION) => Ok(()),
        Some(_) => Err(FormatError::schema(
            "/version",
            format!("unsupported version, expected {FORMAT_VERSION}"),
        )),
    }
}

/// Reads a document: either a bundle with a `"graph"` member or a bare graph.
pub fn bundle_from_value(v: &Value) -> Result<Bundle, FormatError> {
    let obj = object(v, "")?;
    check_version(obj)?;
    let (graph, inner_levels) = match obj.get("graph") {
        Some(g) => graph_from_value(g, "/graph")?,
        None => graph_from_value(v, "")?,
    };
    let mut b = Bundle::new(graph);
    b.levels = match (obj.get("graph").and(obj.get("levels")), inner_levels) {
        (Some(l), _) => Some(levels_from_value(&b.graph, l, "/levels")?),
        (None, l) => l,
    };
    if let Some(d) = obj.get("decoration") {
        b.decoration = Some(decoration_from_value(&b.graph, d, "/decoration")?);
    }
    if let Some(c) = obj.get("cover") {
        b.cover = Some(cover_from_value(c, "/cover")?);
    }
    if let Some(w) = obj.get("witness") {
        b.witness = Some(witness_from_value(&b.graph, w, "/witness")?);
    }
    Ok(b)
}

pub fn parse_bundle(text: &str) -> Result<Bundle, FormatError> {
    let v: Value = serde_json::from_str(text)?;
    bundle_from_value(&v)
}

pub fn bundle_to_value(b: &Bundle) -> Value {
    let mut out = json!({"version": FORMAT_VERSION, "graph": graph_to_value(&b.graph, None)});
    if let Some(l) = &b.levels {
        out["levels"] = levels_to_value(&b.graph, l);
    }
    if let Some(d) = &b.decoration {
        out["decoration"] = decoration_to_value(&b.graph, d);
    }
    if let Some(c) = &b.cover {
        out["cover"] = cover_to_value(c);
    }
    if let Some(w) = &b.witness {
        out["witness"] = witness_to_value(w);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::dollar;

    fn dollar_doc() -> Value {
        json!({
            "version": 1,
            "graph": {
                "vertices": [{"id": "v1", "genus": 0}, {"id": "v2", "genus": 0}, {"id": "v3", "genus": 0}],
                "edges": [
                    {"id": "q1", "ends": ["v1", "v2"]},
                    {"id": "q2", "ends": ["v1", "v2"]},
                    {"id": "q3", "ends": ["v1", "v3"]},
                    {"id": "q4", "ends": ["v1", "v3"]}
                ],
                "legs": [{"id": "p", "vertex": "v1", "mu": -4}, {"id": "z", "vertex": "v3", "mu": 4}],
                "levels": {"v1": 0, "v2": -1, "v3": -1}
            }
        })
    }

    #[test]
    fn graph_round_trip() {
        let b = bundle_from_value(&dollar_doc()).unwrap();
        assert_eq!(b.levels.as_ref().unwrap().as_slice(), &[0, -1, -1]);
        let again = bundle_from_value(&bundle_to_value(&b)).unwrap();
        assert_eq!(again.graph, b.graph);
        assert_eq!(again.levels, b.levels);
    }

    #[test]
    fn errors_carry_pointers() {
        let mut doc = dollar_doc();
        doc["graph"]["edges"][2]["ends"][1] = json!("v9");
        match bundle_from_value(&doc) {
            Err(FormatError::Schema { pointer, .. }) => assert_eq!(pointer, "/graph/edges/2/ends/1"),
            other => panic!("{other:?}"),
        }
        doc = dollar_doc();
        doc["version"] = json!(2);
        assert!(matches!(bundle_from_value(&doc), Err(FormatError::Schema { pointer, .. }) if pointer == "/version"));
    }

    #[test]
    fn decoration_round_trip_with_values() {
        let g = dollar();
        let mut doc = json!({"orders": {}, "values": {"v2:q1.1": "3/2", "v2:q3.0": "?a"}});
        for e in ["q1", "q2", "q3"] {
            doc["orders"][format!("{e}.0")] = json!({"ord_df": -2, "pole": true});
            doc["orders"][format!("{e}.1")] = json!({"ord_df": 0, "pole": false});
        }
        let err = decoration_from_value(&g, &doc, "/decoration").unwrap_err();
        assert!(err.to_string().contains("does not lie on vertex"), "{err}");
        doc["values"] = json!({"v2:q1.1": "3/2", "v2:q3.1": "?a + 1/2"});
        let dec = decoration_from_value(&g, &doc, "/decoration").unwrap();
        assert_eq!(dec.values.len(), 2);
        let back = decoration_from_value(&g, &decoration_to_value(&g, &dec), "").unwrap();
        assert_eq!(back, dec);
    }

    #[test]
    fn missing_half_order_is_reported() {
        let g = dollar();
        let doc = json!({"orders": {"q1.0": {"ord_df": -2, "pole": true}}});
        let err = decoration_from_value(&g, &doc, "/decoration").unwrap_err();
        assert!(
            err.to_string().starts_with("/decoration/orders: missing order"),
            "{err}"
        );
    }

    #[test]
    fn pointer_tokens_are_escaped() {
        assert_eq!(escape_token("a/b~c"), "a~1b~0c");
    }
}
