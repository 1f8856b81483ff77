//! `drclosure`: command-line front end for the closure criterion.
//!
//! Every subcommand prints one JSON document on standard output. Exit codes:
//! 0 for success or a positive verdict, 1 for a negative verdict, 2 for an
//! error (the JSON then carries `error` and, for malformed input, `pointer`).

mod render;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use drclosure::closure::{full_constraints, search, verify_certificate, SearchBounds};
use drclosure::cover::{closure_via_covers, validate_cover};
use drclosure::ev::{evaluation_system, ValueAssignment};
use drclosure::graph::{enumerate_level_structures, validate, DEFAULT_ENUMERATION_CAP};
use drclosure::hurwitz::{exists_with_cap, hurwitz_cap, rh_check, HurwitzProblem};
use drclosure::json::{levels_to_value, parse_bundle, Bundle};
use drclosure::twist::{stabilize, twist};
use drclosure::twr::{validate_twdr, validate_twr};
use drclosure::{fixtures, FormatError, HurwitzError};

#[derive(Parser)]
#[command(
    name = "drclosure",
    version,
    about = "Closure membership for double ramification loci"
)]
struct Cli {
    /// Print an indented plain-text summary instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Input document; `-` reads standard input.
    #[arg(conflicts_with = "fixture")]
    file: Option<PathBuf>,
    /// A bundled fixture, as `name` or `name/variant`.
    #[arg(long)]
    fixture: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Graph diagnostics, and TWR / TWDR validation when levels and a decoration are present.
    Validate(Input),
    /// Enumerate level structures up to isomorphism.
    Levels {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        max_levels: Option<usize>,
    },
    /// Evaluation morphism, level by level.
    Ev {
        #[command(flatten)]
        input: Input,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "all")]
        level: Option<i64>,
        #[arg(long)]
        all: bool,
    },
    /// All constraints of the decoration: every level plus nodal zeros.
    Constraints(Input),
    /// Twist a TWR into a twisted rational function.
    Twist(Input),
    /// Stabilize a twisted rational function.
    Stabilize(Input),
    /// Existence of a connected cover of P^1 with given branch profiles.
    Hurwitz {
        #[arg(long)]
        degree: u32,
        #[arg(long, default_value_t = 0)]
        genus: u32,
        /// Comma-separated partition of the degree; repeat per branch point.
        #[arg(long)]
        profile: Vec<String>,
        /// Number of copies of the last profile.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Validate an admissible cover and compare its stabilization with the graph.
    Cover(Input),
    /// Search for a certificate of closure membership.
    CheckClosure {
        /// Input document; `-` reads standard input.
        #[arg(long, conflicts_with = "fixture")]
        graph: Option<PathBuf>,
        /// A bundled fixture, as `name` or `name/variant`.
        #[arg(long)]
        fixture: Option<String>,
        /// Leg labels in leg order; defaults to the labels in the file.
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
        /// `key=value` pairs: max_mult, max_levels, hurwitz_cap, level_cap, assignment_cap.
        #[arg(long, value_delimiter = ',')]
        bounds: Vec<String>,
    },
    /// List the bundled fixtures, or check their expected outputs.
    Fixtures {
        #[arg(long)]
        check: bool,
        /// Restrict to one fixture.
        #[arg(long)]
        name: Option<String>,
    },
}

/// A failure reported with exit code 2.
struct Failure {
    message: String,
    pointer: Option<String>,
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Schema { pointer, message } => Failure {
                message,
                pointer: Some(if pointer.is_empty() { "/".into() } else { pointer }),
            },
            other => Failure {
                message: other.to_string(),
                pointer: None,
            },
        }
    }
}

fn fail(message: impl ToString) -> Failure {
    Failure {
        message: message.to_string(),
        pointer: None,
    }
}

fn read_text(path: &PathBuf) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(fail)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn load(input: &Input) -> Result<Bundle, Failure> {
    match (&input.file, &input.fixture) {
        (Some(p), _) => Ok(parse_bundle(&read_text(p)?)?),
        (None, Some(name)) => {
            let (fname, variant) = match name.split_once('/') {
                Some((f, v)) => (f, Some(v)),
                None => (name.as_str(), None),
            };
            let f = fixtures::by_name(fname).ok_or_else(|| fail(format!("no fixture `{fname}`")))?;
            let case = match variant {
                Some(v) => f.case(v),
                None => f.cases.first(),
            };
            Ok(case.ok_or_else(|| fail(format!("no case `{name}`")))?.bundle.clone())
        }
        (None, None) => Err(fail("no input: give a file or --fixture")),
    }
}

fn with_twr(b: &Bundle) -> Result<(&drclosure::graph::LevelStructure, &drclosure::Decoration), Failure> {
    match (&b.levels, &b.decoration) {
        (Some(l), Some(d)) => Ok((l, d)),
        (None, _) => Err(Failure {
            message: "levels are required".into(),
            pointer: Some("/levels".into()),
        }),
        (_, None) => Err(Failure {
            message: "a decoration is required".into(),
            pointer: Some("/decoration".into()),
        }),
    }
}

fn parse_profile(s: &str) -> Result<Vec<u32>, Failure> {
    s.split(',')
        .map(|x| x.trim().parse::<u32>().map_err(|_| fail(format!("bad profile `{s}`"))))
        .collect()
}

fn parse_bounds(items: &[String]) -> Result<SearchBounds, Failure> {
    let mut b = SearchBounds::default();
    for item in items.iter().filter(|s| !s.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| fail(format!("bound `{item}` is not key=value")))?;
        let bad = || fail(format!("bad value in `{item}`"));
        match k.trim() {
            "max_mult" => b.max_mult = Some(v.trim().parse().map_err(|_| bad())?),
            "max_levels" => b.max_levels = Some(v.trim().parse().map_err(|_| bad())?),
            "hurwitz_cap" => b.hurwitz_cap = v.trim().parse().map_err(|_| bad())?,
            "level_cap" => b.level_cap = v.trim().parse().map_err(|_| bad())?,
            "assignment_cap" => b.assignment_cap = v.trim().parse().map_err(|_| bad())?,
            other => return Err(fail(format!("unknown bound `{other}`"))),
        }
    }
    Ok(b)
}

fn run(cmd: Command) -> Result<(Value, u8), Failure> {
    match cmd {
        Command::Validate(input) => {
            let b = load(&input)?;
            let d = validate(&b.graph);
            let mut ok = d.connected;
            let mut out = json!({"graph": render::diagnostics(&d)});
            if let (Some(l), Some(dec)) = (&b.levels, &b.decoration) {
                let twr = validate_twr(&b.graph, l, dec);
                let twdr = validate_twdr(&b.graph, l, dec);
                ok &= twr.is_valid();
                out["twr"] = render::report(&twr);
                out["twdr"] = render::report(&twdr);
            }
            out["valid"] = json!(ok);
            Ok((out, if ok { 0 } else { 1 }))
        }
        Command::Levels { input, max_levels } => {
            let b = load(&input)?;
            let ls = enumerate_level_structures(&b.graph, max_levels, DEFAULT_ENUMERATION_CAP).map_err(fail)?;
            let all: Vec<Value> = ls.iter().map(|l| levels_to_value(&b.graph, l)).collect();
            Ok((json!({"count": ls.len(), "level_structures": all}), 0))
        }
        Command::Ev { input, level, all } => {
            let b = load(&input)?;
            let (l, dec) = with_twr(&b)?;
            let sys = evaluation_system(&b.graph, l, dec).map_err(fail)?;
            if !all && level.is_none() {
                return Err(fail("give --level i or --all"));
            }
            if let Some(i) = level {
                if sys.level(i).is_none() {
                    return Err(fail(format!("level {i} is not attained")));
                }
            }
            let out = render::system(&sys, level);
            let negative = out
                .as_object()
                .into_iter()
                .flatten()
                .any(|(_, v)| v["vanishes"] == json!(false));
            Ok((out, if negative { 1 } else { 0 }))
        }
        Command::Constraints(input) => {
            let b = load(&input)?;
            let (l, dec) = with_twr(&b)?;
            let values = ValueAssignment::symbolic(&b.graph, dec).map_err(fail)?;
            let sys = evaluation_system(&b.graph, l, dec).map_err(fail)?;
            let space = full_constraints(&sys, &b.graph, dec, &values);
            let mut out = render::space(&space);
            out["unknowns"] = json!(space.unknowns());
            let code = if space.is_consistent() { 0 } else { 1 };
            Ok((out, code))
        }
        Command::Twist(input) => {
            let b = load(&input)?;
            let (l, dec) = with_twr(&b)?;
            let r = twist(&b.graph, l, dec).map_err(fail)?;
            let g = &r.twisted.graph;
            let mut out = render::twr(&r.twisted);
            out["bridges"] = json!(r
                .bridges
                .iter()
                .map(|&v| g.vertices()[v].id.clone())
                .collect::<Vec<_>>());
            out["map"] = render::contraction(&r.map, g, &b.graph);
            Ok((out, 0))
        }
        Command::Stabilize(input) => {
            let b = load(&input)?;
            let (l, dec) = with_twr(&b)?;
            let (st, map) = stabilize(&b.graph, l, dec).map_err(fail)?;
            let mut out = render::twr(&st);
            out["map"] = render::contraction(&map, &b.graph, &st.graph);
            Ok((out, 0))
        }
        Command::Hurwitz {
            degree,
            genus,
            profile,
            count,
        } => {
            let mut profiles = profile
                .iter()
                .map(|p| parse_profile(p))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(n) = count {
                let last = profiles.pop().ok_or_else(|| fail("--count needs a --profile"))?;
                profiles.extend(std::iter::repeat(last).take(n));
            }
            let p = HurwitzProblem::new(degree, genus, profiles);
            let rh = rh_check(&p);
            match exists_with_cap(&p, hurwitz_cap()) {
                Ok(e) => Ok((json!({"rh": rh, "exists": e, "cap_hit": false}), if e { 0 } else { 1 })),
                Err(HurwitzError::CapExceeded { .. }) => Ok((json!({"rh": rh, "exists": null, "cap_hit": true}), 1)),
                Err(e) => Err(fail(e)),
            }
        }
        Command::Cover(input) => {
            let b = load(&input)?;
            let c = b.cover.as_ref().ok_or_else(|| Failure {
                message: "a cover is required".into(),
                pointer: Some("/cover".into()),
            })?;
            let r = validate_cover(c);
            let v = closure_via_covers(&b.graph, c);
            let ok = r.is_valid() && v.member;
            let out = json!({
                "cover": render::cover_report(&r),
                "closure": {"member": v.member, "reasons": v.reasons},
                "valid": ok,
            });
            Ok((out, if ok { 0 } else { 1 }))
        }
        Command::CheckClosure {
            graph,
            fixture,
            mu,
            bounds,
        } => {
            let b = load(&Input { file: graph, fixture })?;
            let mu: Vec<i64> = match mu {
                Some(s) => s
                    .split(',')
                    .map(|x| x.trim().parse().map_err(|_| fail(format!("bad mu `{s}`"))))
                    .collect::<Result<_, _>>()?,
                None => b.graph.legs().iter().map(|l| l.mu).collect(),
            };
            let bounds = parse_bounds(&bounds)?;
            let g = b.graph.with_mu(&mu).map_err(fail)?;
            let mut o = search(&g, &mu, &bounds).map_err(fail)?;
            if let (Some(w), Some(l), Some(d)) = (&b.witness, &b.levels, &b.decoration) {
                let c = verify_certificate(&g, &mu, l, d, Some(w)).map_err(fail)?;
                if c.verdict.is_accepted() {
                    o.certificates.retain(|x| !(x.levels == c.levels && x.dec == c.dec));
                    o.certificates.insert(0, c);
                }
            }
            let code = if o.is_member() { 0 } else { 1 };
            Ok((render::search(&g, &o), code))
        }
        Command::Fixtures { check, name } => {
            let all: Vec<_> = fixtures::all()
                .into_iter()
                .filter(|f| name.as_deref().map_or(true, |n| f.name == n))
                .collect();
            if all.is_empty() {
                return Err(fail("no matching fixture"));
            }
            if !check {
                let list: Vec<Value> = all
                    .iter()
                    .map(|f| {
                        json!({
                            "name": f.name,
                            "description": f.description,
                            "cases": f.cases.iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                return Ok((json!({"fixtures": list}), 0));
            }
            let outcomes: Vec<_> = all.iter().flat_map(fixtures::check).collect();
            let failed = outcomes.iter().filter(|o| !o.ok).count();
            let results: Vec<Value> = outcomes
                .iter()
                .map(|o| json!({"case": o.case, "key": o.key, "ok": o.ok, "detail": o.detail}))
                .collect();
            let out = json!({"passed": outcomes.len() - failed, "failed": failed, "results": results});
            Ok((out, if failed == 0 { 0 } else { 1 }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (out, code) = match run(cli.command) {
        Ok(x) => x,
        Err(f) => {
            eprintln!(
                "drclosure: {}{}",
                f.pointer.as_deref().map(|p| format!("{p}: ")).unwrap_or_default(),
                f.message
            );
            let mut v = json!({"error": f.message});
            if let Some(p) = f.pointer {
                v["pointer"] = json!(p);
            }
            (v, 2)
        }
    };
    if cli.pretty {
        print!("{}", render::text(&out));
    } else {
        println!("{out}");
    }
    ExitCode::from(code)
}
