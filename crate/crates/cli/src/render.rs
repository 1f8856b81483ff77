//! JSON renderings of library results, and the plain-text view behind `--pretty`.

use serde_json::{json, Map, Value};

use drclosure::closure::{Certificate, SearchOutcome};
use drclosure::cover::CoverReport;
use drclosure::ev::{EvaluationSystem, LevelEvaluation};
use drclosure::graph::{ContractionMap, GraphDiagnostics, MarkedDualGraph};
use drclosure::json::{decoration_to_value, graph_to_value, levels_to_value};
use drclosure::linalg::ConstraintSpace;
use drclosure::twist::Twr;
use drclosure::twr::Report;

pub fn diagnostics(d: &GraphDiagnostics) -> Value {
    json!({
        "connected": d.connected,
        "genus": d.genus,
        "mu_sum": d.mu_sum,
        "stable": d.is_stable(),
        "unstable_vertices": d.unstable_vertices,
    })
}

pub fn report(r: &Report) -> Value {
    let v: Vec<Value> = r
        .violations
        .iter()
        .map(|v| json!({"clause": v.clause.to_string(), "location": v.location, "message": v.message}))
        .collect();
    json!({"valid": r.is_valid(), "violations": v})
}

pub fn space(s: &ConstraintSpace) -> Value {
    let forms: Vec<String> = s.forms().iter().map(ToString::to_string).collect();
    json!({
        "consistent": s.is_consistent(),
        "constraints": forms,
        "solution_dim": s.dimension(),
    })
}

pub fn level(l: &LevelEvaluation) -> Value {
    let mut v = space(&l.space);
    v["vanishes"] = match l.vanishing() {
        drclosure::ev::Vanishing::Yes => json!(true),
        drclosure::ev::Vanishing::No => json!(false),
        drclosure::ev::Vanishing::Conditional => json!("conditional"),
    };
    v
}

pub fn system(sys: &EvaluationSystem, only: Option<i64>) -> Value {
    let mut out = Map::new();
    for l in &sys.levels {
        if only.map_or(true, |i| i == l.level) {
            out.insert(l.level.to_string(), level(l));
        }
    }
    Value::Object(out)
}

pub fn twr(t: &Twr) -> Value {
    json!({
        "version": drclosure::json::FORMAT_VERSION,
        "graph": graph_to_value(&t.graph, None),
        "levels": levels_to_value(&t.graph, &t.levels),
        "decoration": decoration_to_value(&t.graph, &t.dec),
    })
}

/// Source items keyed by id, mapped to target ids (`null` when contracted).
pub fn contraction(map: &ContractionMap, source: &MarkedDualGraph, target: &MarkedDualGraph) -> Value {
    let vertices: Map<String, Value> = source
        .vertices()
        .iter()
        .zip(&map.vertex_map)
        .map(|(v, t)| (v.id.clone(), json!(t.map(|t| target.vertices()[t].id.clone()))))
        .collect();
    let edges: Map<String, Value> = source
        .edges()
        .iter()
        .zip(&map.edge_map)
        .map(|(e, t)| (e.id.clone(), json!(t.map(|t| target.edges()[t].id.clone()))))
        .collect();
    let legs: Map<String, Value> = source
        .legs()
        .iter()
        .zip(&map.leg_map)
        .map(|(l, &t)| (l.id.clone(), json!(target.legs()[t].id)))
        .collect();
    json!({"vertices": vertices, "edges": edges, "legs": legs})
}

pub fn cover_report(r: &CoverReport) -> Value {
    let issues: Vec<Value> = r
        .issues
        .iter()
        .map(|i| json!({"clause": i.clause, "location": i.location, "message": i.message}))
        .collect();
    json!({
        "valid": r.is_valid(),
        "degree": r.degree,
        "zero_profile": r.zero_profile,
        "infinity_profile": r.infinity_profile,
        "issues": issues,
    })
}

pub fn certificate(graph: &MarkedDualGraph, c: &Certificate) -> Value {
    let components: Vec<Value> = c
        .components
        .iter()
        .map(|k| {
            json!({
                "vertex": k.vertex,
                "degree": k.problem.degree,
                "genus": k.problem.genus,
                "profiles": k.problem.profiles,
                "rh": k.rh,
                "exists": k.exists,
            })
        })
        .collect();
    json!({
        "levels": levels_to_value(graph, &c.levels),
        "decoration": decoration_to_value(graph, &c.dec),
        "constraints": space(&c.constraints),
        "components": components,
        "verdict": c.verdict.to_string(),
        "notes": c.notes,
    })
}

pub fn search(graph: &MarkedDualGraph, o: &SearchOutcome) -> Value {
    let certs: Vec<Value> = o.certificates.iter().map(|c| certificate(graph, c)).collect();
    json!({
        "member": if o.is_member() { "yes" } else { "no-within-bounds" },
        "level_structures": o.level_structures,
        "exhausted": o.exhausted,
        "certificates": certs,
    })
}

/// Indented `key: value` lines; scalars inline, short scalar lists joined.
pub fn text(v: &Value) -> String {
    let mut out = String::new();
    write_text(v, 0, &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.is_empty() => Some("-".into()),
        Value::Object(o) if o.is_empty() => Some("-".into()),
        Value::Array(a) if a.iter().all(|x| !x.is_array() && !x.is_object()) => Some(
            a.iter()
                .map(|x| scalar(x).unwrap_or_default())
                .collect::<Vec<_>>()
                .join(", "),
        ),
        Value::Array(_) | Value::Object(_) => None,
        other => Some(other.to_string()),
    }
}

fn write_text(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(o) => {
            for (k, x) in o {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        write_text(x, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}[{i}]\n"));
                        write_text(x, depth + 1, out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}
