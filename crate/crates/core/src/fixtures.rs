//! The worked examples as JSON fixtures, with expected outputs.
//!
//! A fixture file is a bundle plus `"name"`, `"description"` and `"expect"`.
//! When it has `"variants"`, each variant is the base document with the
//! variant's members laid over it (its `"expect"` merged into the base one),
//! and only the variants are checked.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use serde_json::{Map, Value};

use crate::closure::{search, verify_certificate, Certificate, SearchBounds};
use crate::cover::{closure_via_covers, validate_cover};
use crate::error::FormatError;
use crate::ev::evaluation_system;
use crate::graph::{canonical_form, enumerate_level_structures, level_graph_colors, validate, DEFAULT_ENUMERATION_CAP};
use crate::json::{bundle_from_value, levels_from_value, Bundle};
use crate::linalg::{ConstraintSpace, LinearForm};
use crate::twist::{stabilize, twist};
use crate::twr::{validate_twdr, validate_twr};

const SOURCES: &[(&str, &str)] = &[
    ("unmarked_zeros", include_str!("../fixtures/unmarked_zeros.json")),
    ("horizontal_nodes", include_str!("../fixtures/horizontal_nodes.json")),
    ("partial_order", include_str!("../fixtures/partial_order.json")),
    ("level_dependence", include_str!("../fixtures/level_dependence.json")),
    ("dollar_curves", include_str!("../fixtures/dollar_curves.json")),
    ("cherry", include_str!("../fixtures/cherry.json")),
];

#[derive(Debug, Clone)]
pub struct Case {
    /// `fixture` or `fixture/variant`.
    pub label: String,
    pub bundle: Bundle,
    pub expect: Map<String, Value>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub description: String,
    pub cases: Vec<Case>,
}

impl Fixture {
    pub fn case(&self, label: &str) -> Option<&Case> {
        self.cases
            .iter()
            .find(|c| c.label == label || c.label.rsplit('/').next() == Some(label))
    }
}

/// One checked expectation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub case: String,
    pub key: String,
    pub ok: bool,
    pub detail: String,
}

fn overlay(base: &Value, top: &Value) -> Value {
    let mut out = base.clone();
    if let (Some(o), Some(t)) = (out.as_object_mut(), top.as_object()) {
        for (k, v) in t {
            if k == "expect" {
                let mut e = o.get("expect").cloned().unwrap_or_else(|| Value::Object(Map::new()));
                if let (Some(e), Some(v)) = (e.as_object_mut(), v.as_object()) {
                    e.extend(v.clone());
                }
                o.insert(k.clone(), e);
            } else {
                o.insert(k.clone(), v.clone());
            }
        }
        o.remove("variants");
    }
    out
}

fn case_from_value(label: String, v: &Value) -> Result<Case, FormatError> {
    let bundle = bundle_from_value(v)?;
    let expect = match v.get("expect") {
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return Err(FormatError::schema("/expect", "expected an object")),
        None => Map::new(),
    };
    Ok(Case { label, bundle, expect })
}

/// Parses a fixture document.
pub fn parse_fixture(text: &str) -> Result<Fixture, FormatError> {
    let v: Value = serde_json::from_str(text)?;
    let name = v
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| FormatError::schema("/name", "a fixture needs a name"))?
        .to_string();
    let description = v.get("description").and_then(Value::as_str).unwrap_or("").to_string();
    let mut cases = Vec::new();
    match v.get("variants") {
        Some(Value::Array(vs)) => {
            for (i, var) in vs.iter().enumerate() {
                let vname = var
                    .get("name")
                    .and_then(Value::as_str)
                    .ok_or_else(|| FormatError::schema(format!("/variants/{i}/name"), "a variant needs a name"))?;
                let merged = overlay(&v, var);
                let case = case_from_value(format!("{name}/{vname}"), &merged).map_err(|e| match e {
                    FormatError::Schema { pointer, message } => FormatError::Schema {
                        pointer: format!("/variants/{i}{pointer}"),
                        message,
                    },
                    other => other,
                })?;
                cases.push(case);
            }
        }
        Some(_) => return Err(FormatError::schema("/variants", "expected an array")),
        None => cases.push(case_from_value(name.clone(), &v)?),
    }
    Ok(Fixture {
        name,
        description,
        cases,
    })
}

/// Every bundled fixture, in a fixed order.
pub fn all() -> Vec<Fixture> {
    SOURCES
        .iter()
        .map(|(name, text)| parse_fixture(text).unwrap_or_else(|e| panic!("fixture {name}: {e}")))
        .collect()
}

pub fn by_name(name: &str) -> Option<Fixture> {
    SOURCES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_fixture(text).expect("bundled fixture parses"))
}

/// Reads a list of forms in display syntax.
pub fn parse_forms(v: &Value) -> Result<Vec<LinearForm>, String> {
    let list = v.as_array().ok_or("expected a list of forms")?;
    list.iter()
        .map(|f| {
            let s = f.as_str().ok_or("expected a string")?;
            s.parse::<LinearForm>().map_err(|e| e.to_string())
        })
        .collect()
}

/// Nonzero forms as primitive integer vectors over their joint unknowns,
/// deduplicated up to sign.
pub fn primitive_set(forms: &[LinearForm], unknowns: &[String]) -> BTreeSet<Vec<BigInt>> {
    forms
        .iter()
        .filter(|f| !f.is_zero())
        .map(|f| f.primitive_vector(unknowns))
        .collect()
}

fn joint_unknowns(a: &[LinearForm], b: &[LinearForm]) -> Vec<String> {
    let set: BTreeSet<String> = a
        .iter()
        .chain(b)
        .flat_map(|f| f.unknowns().map(str::to_string))
        .collect();
    set.into_iter().collect()
}

fn show(forms: &[LinearForm]) -> String {
    let v: Vec<String> = forms.iter().filter(|f| !f.is_zero()).map(|f| f.to_string()).collect();
    format!("[{}]", v.join(", "))
}

fn level_key(k: &str) -> Result<i64, String> {
    k.parse().map_err(|_| format!("bad level `{k}`"))
}

struct Checker<'a> {
    case: &'a Case,
    search: Option<Result<Vec<Certificate>, String>>,
}

impl Checker<'_> {
    fn parts(&self) -> Result<(&crate::graph::LevelStructure, &crate::twr::Decoration), String> {
        let b = &self.case.bundle;
        match (&b.levels, &b.decoration) {
            (Some(l), Some(d)) => Ok((l, d)),
            _ => Err("needs levels and a decoration".into()),
        }
    }

    fn certificates(&mut self) -> Result<&Vec<Certificate>, String> {
        if self.search.is_none() {
            let g = &self.case.bundle.graph;
            let mu: Vec<i64> = g.legs().iter().map(|l| l.mu).collect();
            let r = search(g, &mu, &SearchBounds::default())
                .map(|o| o.certificates)
                .map_err(|e| e.to_string());
            self.search = Some(r);
        }
        self.search.as_ref().unwrap().as_ref().map_err(Clone::clone)
    }

    fn level_constraints(&self, expected: &Value, verbatim: bool) -> Result<(), String> {
        let (levels, dec) = self.parts()?;
        let sys = evaluation_system(&self.case.bundle.graph, levels, dec).map_err(|e| e.to_string())?;
        compare_levels(&sys, expected, verbatim)
    }

    fn run(&mut self, key: &str, expected: &Value) -> Result<(), String> {
        let b = &self.case.bundle;
        let g = &b.graph;
        let want_bool = || expected.as_bool().ok_or_else(|| format!("`{key}` expects a boolean"));
        match key {
            "twr_valid" | "twdr_valid" => {
                let (levels, dec) = self.parts()?;
                let r = if key == "twr_valid" {
                    validate_twr(g, levels, dec)
                } else {
                    validate_twdr(g, levels, dec)
                };
                agree(want_bool()?, r.is_valid(), &r.summary())
            }
            "stable" => {
                let d = validate(g);
                agree(
                    want_bool()?,
                    d.connected && d.is_stable(),
                    &format!("unstable: {:?}", d.unstable_vertices),
                )
            }
            "level_constraints" => self.level_constraints(expected, false),
            "level_forms" => self.level_constraints(expected, true),
            "level_count" => {
                let n = enumerate_level_structures(g, None, DEFAULT_ENUMERATION_CAP)
                    .map_err(|e| e.to_string())?
                    .len();
                agree_num(expected, n)
            }
            "stabilization" => {
                let (levels, dec) = self.parts()?;
                let (st, _) = stabilize(g, levels, dec).map_err(|e| e.to_string())?;
                let o = expected.as_object().ok_or("`stabilization` expects an object")?;
                if let Some(n) = o.get("levels") {
                    agree_num(n, st.levels.attained().len()).map_err(|e| format!("levels: {e}"))?;
                }
                if let Some(n) = o.get("horizontal_edges") {
                    let h = (0..st.graph.edge_count())
                        .filter(|&e| st.levels.is_horizontal(&st.graph, e))
                        .count();
                    agree_num(n, h).map_err(|e| format!("horizontal edges: {e}"))?;
                }
                if let Some(c) = o.get("level_constraints") {
                    let sys = evaluation_system(&st.graph, &st.levels, &st.dec).map_err(|e| e.to_string())?;
                    compare_levels(&sys, c, false)?;
                }
                if let Some(r) = o.get("round_trip") {
                    let t = twist(&st.graph, &st.levels, &st.dec).map_err(|e| e.to_string())?;
                    let (back, _) =
                        stabilize(&t.twisted.graph, &t.twisted.levels, &t.twisted.dec).map_err(|e| e.to_string())?;
                    agree(
                        r.as_bool().unwrap_or(true),
                        back == st,
                        "twist of the stabilization differs",
                    )?;
                }
                Ok(())
            }
            "twist_round_trip" => {
                let (levels, dec) = self.parts()?;
                let t = twist(g, levels, dec).map_err(|e| e.to_string())?;
                let twdr = validate_twdr(&t.twisted.graph, &t.twisted.levels, &t.twisted.dec);
                if !twdr.is_valid() {
                    return Err(format!(
                        "twist output is not a twisted rational function: {}",
                        twdr.summary()
                    ));
                }
                let (back, _) =
                    stabilize(&t.twisted.graph, &t.twisted.levels, &t.twisted.dec).map_err(|e| e.to_string())?;
                let same = back.graph == *g && back.levels == *levels && back.dec == *dec;
                agree(want_bool()?, same, "stabilize(twist) differs from the input")
            }
            "cover_valid" | "cover_closure" => {
                let c = b.cover.as_ref().ok_or("needs a cover")?;
                if key == "cover_valid" {
                    let r = validate_cover(c);
                    agree(want_bool()?, r.is_valid(), &r.summary())
                } else {
                    let v = closure_via_covers(g, c);
                    agree(want_bool()?, v.member, &v.reasons.join("; "))
                }
            }
            "witness_verdict" => {
                let (levels, dec) = self.parts()?;
                let w = b.witness.as_ref().ok_or("needs a witness")?;
                let mu: Vec<i64> = g.legs().iter().map(|l| l.mu).collect();
                let c = verify_certificate(g, &mu, levels, dec, Some(w)).map_err(|e| e.to_string())?;
                let got = c.verdict.to_string();
                let want = expected.as_str().ok_or("`witness_verdict` expects a string")?;
                if got == want {
                    Ok(())
                } else {
                    Err(format!("verdict {got}, expected {want}; {}", c.notes.join("; ")))
                }
            }
            "closure_member" => {
                let want = want_bool()?;
                let n = self.certificates()?.len();
                agree(want, n > 0, &format!("{n} certificates"))
            }
            "accepted_level_structures" => {
                let certs = self.certificates()?;
                let classes: BTreeSet<_> = certs
                    .iter()
                    .map(|c| canonical_form(&level_graph_colors(g, Some(&c.levels))))
                    .collect();
                agree_num(expected, classes.len())
            }
            "certificate_families" => {
                let families = parse_families(g, expected)?;
                let certs = self.certificates()?.clone();
                compare_families(g, &certs, &families)
            }
            other => Err(format!("unknown expectation `{other}`")),
        }
    }
}

fn agree(want: bool, got: bool, detail: &str) -> Result<(), String> {
    if want == got {
        Ok(())
    } else {
        Err(format!("got {got}, expected {want}: {detail}"))
    }
}

fn agree_num(expected: &Value, got: usize) -> Result<(), String> {
    match expected.as_u64() {
        Some(n) if n as usize == got => Ok(()),
        Some(n) => Err(format!("got {got}, expected {n}")),
        None => Err("expected a count".into()),
    }
}

/// Per listed level: equal solution sets, or with `verbatim` equal sets of
/// primitive integer forms.
fn compare_levels(sys: &crate::ev::EvaluationSystem, expected: &Value, verbatim: bool) -> Result<(), String> {
    let o = expected.as_object().ok_or("expected a map from level to forms")?;
    for (k, v) in o {
        let i = level_key(k)?;
        let want = parse_forms(v).map_err(|e| format!("level {i}: {e}"))?;
        let got: Vec<LinearForm> = sys.level(i).map(|l| l.forms.clone()).unwrap_or_default();
        let ok = if verbatim {
            let u = joint_unknowns(&want, &got);
            primitive_set(&want, &u) == primitive_set(&got, &u)
        } else {
            ConstraintSpace::new(&want).same_solutions(&ConstraintSpace::new(&got))
        };
        if !ok {
            return Err(format!("level {i}: got {}, expected {}", show(&got), show(&want)));
        }
    }
    Ok(())
}

type Family = (Vec<i64>, ConstraintSpace);

fn parse_families(g: &crate::graph::MarkedDualGraph, v: &Value) -> Result<Vec<Family>, String> {
    let list = v.as_array().ok_or("expected a list of families")?;
    list.iter()
        .enumerate()
        .map(|(i, f)| {
            let levels = f.get("levels").ok_or(format!("family {i}: missing levels"))?;
            let levels = levels_from_value(g, levels, "").map_err(|e| format!("family {i}: {e}"))?;
            let forms = parse_forms(f.get("constraints").unwrap_or(&Value::Array(Vec::new())))
                .map_err(|e| format!("family {i}: {e}"))?;
            Ok((levels.as_slice().to_vec(), ConstraintSpace::new(&forms)))
        })
        .collect()
}

/// Every certificate lies in a listed family and every family is attained.
fn compare_families(
    g: &crate::graph::MarkedDualGraph,
    certs: &[Certificate],
    families: &[Family],
) -> Result<(), String> {
    let mut hit = vec![false; families.len()];
    for c in certs {
        let pos = families
            .iter()
            .position(|(l, s)| l.as_slice() == c.levels.as_slice() && s.same_solutions(&c.constraints));
        match pos {
            Some(i) => hit[i] = true,
            None => {
                return Err(format!(
                    "unexpected certificate on levels {:?} with constraints {}",
                    named_levels(g, c.levels.as_slice()),
                    show(&c.constraints.forms())
                ))
            }
        }
    }
    if let Some(i) = hit.iter().position(|h| !h) {
        return Err(format!(
            "family {i} on levels {:?} has no certificate",
            named_levels(g, &families[i].0)
        ));
    }
    Ok(())
}

fn named_levels(g: &crate::graph::MarkedDualGraph, l: &[i64]) -> BTreeMap<String, i64> {
    g.vertices()
        .iter()
        .map(|v| v.id.clone())
        .zip(l.iter().copied())
        .collect()
}

/// Checks every expectation of one case, in key order.
pub fn check_case(case: &Case) -> Vec<Outcome> {
    let mut ch = Checker { case, search: None };
    case.expect
        .iter()
        .map(|(k, v)| {
            let r = ch.run(k, v);
            Outcome {
                case: case.label.clone(),
                key: k.clone(),
                ok: r.is_ok(),
                detail: r.err().unwrap_or_default(),
            }
        })
        .collect()
}

pub fn check(f: &Fixture) -> Vec<Outcome> {
    f.cases.iter().flat_map(check_case).collect()
}
