use serde_json::Value;

use super::report::{fmt_num, num, obj, strs};
use super::{events_file, Cli, CliError, Command, Outcome, EXIT_NEGATIVE, EXIT_OK};
use crate::error::Error;
use crate::famspec::{self, SpecDocument};
use crate::framework::{common_refinement_with, Witness};
use crate::histories::{
    consistency_check, label_matches, probabilities_with, ConsistencyOptions, Family, Predicate, EPS_SUPPORT,
};
use crate::relativistic::{commutation_check, embed_events, Commutation, TaggedEvent};
use crate::scenarios::{self, Scenario, SCENARIO_NAMES};

type CResult<T> = Result<T, CliError>;

enum Source {
    Scenario(Box<Scenario>),
    Doc(Box<SpecDocument>),
}

impl Source {
    fn family(&self, name: &str) -> CResult<&Family> {
        let (found, names): (Result<&Family, Error>, Vec<&str>) = match self {
            Source::Scenario(s) => (s.family(name), s.families().iter().map(|f| f.name()).collect()),
            Source::Doc(d) => (d.family(name), d.families().iter().map(|f| f.name()).collect()),
        };
        found.map_err(|_| CliError::input(format!("unknown family `{name}`; available: {}", names.join(", "))))
    }
}

fn scenario(name: &str) -> CResult<Scenario> {
    scenarios::build(name).map_err(|e| match e {
        Error::UnknownName(_) => CliError::usage(format!(
            "unknown scenario `{name}`; expected one of {}",
            SCENARIO_NAMES.join(", ")
        )),
        e => e.into(),
    })
}

fn read(path: &std::path::Path) -> CResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn source(cli: &Cli) -> CResult<Source> {
    match (&cli.global.scenario, &cli.global.file) {
        (Some(s), None) => Ok(Source::Scenario(Box::new(scenario(s)?))),
        (None, Some(p)) => {
            let text = read(p)?;
            famspec::parse(&text)
                .map(|d| Source::Doc(Box::new(d)))
                .map_err(|d| CliError::input(format!("{}:{}:{}: {}", p.display(), d.line, d.column, d.message)))
        }
        _ => Err(CliError::usage("give exactly one of --scenario NAME and --file PATH")),
    }
}

fn required<'a>(v: &'a Option<String>, flag: &str) -> CResult<&'a str> {
    v.as_deref().ok_or_else(|| CliError::usage(format!("missing required --{flag}")))
}

fn options(cli: &Cli) -> CResult<ConsistencyOptions> {
    let mut o = ConsistencyOptions::default();
    for (v, slot, flag) in [
        (cli.global.tol_rel, &mut o.eps_rel, "tol-rel"),
        (cli.global.tol_abs, &mut o.eps_abs, "tol-abs"),
    ] {
        if let Some(x) = v {
            if !(x.is_finite() && x >= 0.0) {
                return Err(CliError::usage(format!("--{flag} must be a finite non-negative number")));
            }
            *slot = x;
        }
    }
    Ok(o)
}

fn predicate(text: &str, flag: &str) -> CResult<Predicate> {
    Predicate::parse(text).map_err(|e| CliError::usage(format!("--{flag}: {e}")))
}

pub(super) fn dispatch(cli: &Cli) -> CResult<Outcome> {
    match &cli.command {
        Command::Check { family } => check(cli, required(family, "family")?),
        Command::Probs {
            family,
            given,
            target,
            event,
        } => probs(cli, required(family, "family")?, given.as_deref(), target.as_deref(), event.as_deref()),
        Command::Compat { family } => match family.as_slice() {
            [a, b] => compat(cli, a, b),
            _ => Err(CliError::usage("compat needs exactly two --family arguments")),
        },
        Command::Scenario { name, suite } => {
            let name = name
                .as_deref()
                .or(cli.global.scenario.as_deref())
                .ok_or_else(|| CliError::usage("missing scenario name"))?;
            run_scenario(name, *suite)
        }
        Command::Embed { events } => embed(cli, events.as_deref()),
    }
}

fn check(cli: &Cli, name: &str) -> CResult<Outcome> {
    let src = source(cli)?;
    let f = src.family(name)?;
    let r = consistency_check(f, &options(cli)?)?;
    let violations: Vec<Value> = r
        .violations
        .iter()
        .map(|v| {
            obj([
                ("alpha", Value::String(v.alpha.to_string())),
                ("beta", Value::String(v.beta.to_string())),
                ("overlap", num(v.overlap)),
                ("normalized", num(v.normalized)),
            ])
        })
        .collect();
    let mut text = format!(
        "family {name}: {}\n  pairs checked: {}\n  max normalized overlap: {}\n",
        if r.consistent { "consistent" } else { "inconsistent" },
        r.pairs_checked,
        fmt_num(r.max_normalized_overlap)
    );
    let mut csv = vec![vec!["alpha".into(), "beta".into(), "overlap".into(), "normalized".into()]];
    for v in &r.violations {
        text.push_str(&format!(
            "  violation: {} ~ {}  |<K,K'>| = {}  normalized = {}\n",
            v.alpha,
            v.beta,
            fmt_num(v.overlap),
            fmt_num(v.normalized)
        ));
        csv.push(vec![v.alpha.to_string(), v.beta.to_string(), fmt_num(v.overlap), fmt_num(v.normalized)]);
    }
    Ok(Outcome {
        code: if r.consistent { EXIT_OK } else { EXIT_NEGATIVE },
        results: obj([
            ("family", Value::String(name.into())),
            ("consistent", Value::Bool(r.consistent)),
            ("pairs_checked", Value::from(r.pairs_checked)),
            ("max_normalized_overlap", num(r.max_normalized_overlap)),
            ("violations", Value::Array(violations)),
        ]),
        text,
        csv,
    })
}

fn probs(cli: &Cli, name: &str, given: Option<&str>, target: Option<&str>, event: Option<&str>) -> CResult<Outcome> {
    if given.is_some() && target.is_none() {
        return Err(CliError::usage("--given needs --target"));
    }
    let target = target.map(|t| predicate(t, "target")).transpose()?;
    let given = given.map(|g| predicate(g, "given")).transpose()?;
    let event: Option<Vec<String>> = event.map(|e| e.split(',').map(|s| s.trim().to_string()).collect());
    if event.as_ref().is_some_and(|e| e.iter().any(String::is_empty)) {
        return Err(CliError::usage("--event labels must be non-empty"));
    }
    let src = source(cli)?;
    let f = src.family(name)?;
    let table = match probabilities_with(f, &options(cli)?) {
        Ok(t) => t,
        Err(e @ Error::InconsistentFamily { .. }) => {
            return Ok(Outcome {
                code: EXIT_NEGATIVE,
                results: obj([
                    ("family", Value::String(name.into())),
                    ("consistent", Value::Bool(false)),
                    ("error", Value::String(e.to_string())),
                ]),
                text: format!("family {name}: {e}\n"),
                csv: vec![vec!["error".into()], vec![e.to_string()]],
            })
        }
        Err(e) => return Err(e.into()),
    };
    let support = table.sorted_support(EPS_SUPPORT);
    let rows: Vec<Value> = support
        .iter()
        .map(|(h, p)| {
            obj([
                ("history", Value::String(h.to_string())),
                ("labels", strs(&h.labels())),
                ("probability", num(*p)),
            ])
        })
        .collect();
    let mut text = format!("family {name}: {} histories with nonzero probability\n", support.len());
    let mut csv = vec![vec!["history".into(), "probability".into()]];
    for (h, p) in &support {
        text.push_str(&format!("  {}  {h}\n", fmt_num(*p)));
        csv.push(vec![h.to_string(), fmt_num(*p)]);
    }
    let mut results = obj([
        ("family", Value::String(name.into())),
        ("consistent", Value::Bool(true)),
        ("probabilities", Value::Array(rows)),
    ]);
    let sum = |keep: &dyn Fn(&crate::histories::History) -> bool| -> f64 {
        table.entries.iter().filter(|(h, _)| keep(h)).map(|(_, p)| p).sum()
    };
    if let Some(labels) = &event {
        let p = sum(&|h| labels.iter().all(|l| h.labels().iter().any(|m| label_matches(m, l))));
        text.push_str(&format!("Pr({}) = {}\n", labels.join(","), fmt_num(p)));
        csv.push(vec![format!("event {}", labels.join(",")), fmt_num(p)]);
        results["event"] = obj([("labels", strs(labels)), ("probability", num(p))]);
    }
    if let Some(t) = &target {
        let check = |p: &Predicate| -> CResult<()> {
            // surface unknown times and labels instead of silently matching nothing
            crate::histories::predicate_probability(f, p).map(|_| ()).map_err(CliError::from)
        };
        check(t)?;
        let (p, key) = match &given {
            Some(g) => {
                check(g)?;
                let pg = sum(&|h| g.matches(f, h));
                if pg <= EPS_SUPPORT {
                    return Err(CliError::input(Error::ZeroConditionProbability.to_string()));
                }
                (sum(&|h| g.matches(f, h) && t.matches(f, h)) / pg, "conditional")
            }
            None => (sum(&|h| t.matches(f, h)), "target"),
        };
        let describe = |p: &Predicate| {
            p.clauses
                .iter()
                .map(|(t, ls)| format!("{t}={}", ls.join("|")))
                .collect::<Vec<_>>()
                .join(",")
        };
        let label = match &given {
            Some(g) => format!("Pr({} | {})", describe(t), describe(g)),
            None => format!("Pr({})", describe(t)),
        };
        text.push_str(&format!("{label} = {}\n", fmt_num(p)));
        csv.push(vec![label.clone(), fmt_num(p)]);
        let mut q = obj([("target", Value::String(describe(t))), ("probability", num(p))]);
        if let Some(g) = &given {
            q["given"] = Value::String(describe(g));
        }
        results[key] = q;
    }
    Ok(Outcome {
        code: EXIT_OK,
        results,
        text,
        csv,
    })
}

fn compat(cli: &Cli, a: &str, b: &str) -> CResult<Outcome> {
    let src = source(cli)?;
    let (f, g) = (src.family(a)?, src.family(b)?);
    let v = common_refinement_with(f, g, &options(cli)?)?;
    let witness = match &v.witness {
        None => Value::Null,
        Some(Witness::Kinematic {
            time,
            left,
            right,
            commutator_norm,
        }) => obj([
            ("kind", Value::String("kinematic".into())),
            ("time", Value::String(time.clone())),
            ("left", Value::String(left.clone())),
            ("right", Value::String(right.clone())),
            ("commutator_norm", num(*commutator_norm)),
        ]),
        Some(Witness::Dynamic(r)) => obj([
            ("kind", Value::String("dynamic".into())),
            ("violations", Value::from(r.violations.len())),
            ("max_normalized_overlap", num(r.max_normalized_overlap)),
        ]),
    };
    let class = v.classification.as_str();
    let mut text = format!("{a} vs {b}: {class}\n");
    match &v.witness {
        Some(Witness::Kinematic {
            time,
            left,
            right,
            commutator_norm,
        }) => text.push_str(&format!(
            "  at {time}: [{left}, {right}] has norm {}\n",
            fmt_num(*commutator_norm)
        )),
        Some(Witness::Dynamic(r)) => text.push_str(&format!(
            "  product family inconsistent: {} violating pairs, max normalized overlap {}\n",
            r.violations.len(),
            fmt_num(r.max_normalized_overlap)
        )),
        None => {}
    }
    Ok(Outcome {
        code: if v.compatible { EXIT_OK } else { EXIT_NEGATIVE },
        results: obj([
            ("family_a", Value::String(a.into())),
            ("family_b", Value::String(b.into())),
            ("classification", Value::String(class.into())),
            ("compatible", Value::Bool(v.compatible)),
            ("witness", witness),
        ]),
        text,
        csv: vec![
            vec!["family_a".into(), "family_b".into(), "classification".into()],
            vec![a.into(), b.into(), class.into()],
        ],
    })
}

fn run_scenario(name: &str, suite: bool) -> CResult<Outcome> {
    let scn = scenario(name)?;
    let outcomes = scn.run_expectations();
    let mut passed = outcomes.iter().all(|o| o.passed);
    let mut text = format!("scenario {name}\n");
    let mut csv = vec![vec![
        "status".into(),
        "provenance".into(),
        "description".into(),
        "family".into(),
        "query".into(),
        "expected".into(),
        "actual".into(),
    ]];
    let rows: Vec<Value> = outcomes
        .iter()
        .map(|o| {
            let status = if o.passed { "PASS" } else { "FAIL" };
            let actual = o.actual.map(fmt_num).unwrap_or_else(|| o.error.clone().unwrap_or_default());
            text.push_str(&format!(
                "  {status} [{}] {}: {} = {} (expected {})\n",
                o.provenance.as_str(),
                o.description,
                o.query,
                actual,
                o.expected
            ));
            csv.push(vec![
                status.into(),
                o.provenance.as_str().into(),
                o.description.clone(),
                o.family.clone().unwrap_or_default(),
                o.query.clone(),
                o.expected.clone(),
                actual,
            ]);
            obj([
                ("description", Value::String(o.description.clone())),
                ("family", o.family.clone().map_or(Value::Null, Value::String)),
                ("query", Value::String(o.query.clone())),
                ("expected", Value::String(o.expected.clone())),
                ("actual", o.actual.map_or(Value::Null, num)),
                ("error", o.error.clone().map_or(Value::Null, Value::String)),
                ("passed", Value::Bool(o.passed)),
                ("provenance", Value::String(o.provenance.as_str().into())),
            ])
        })
        .collect();
    let mut results = obj([
        ("scenario", Value::String(name.into())),
        ("expectations", Value::Array(rows)),
    ]);
    if suite {
        let defect = scn
            .frames()
            .values()
            .flat_map(|p| p.steps().iter().map(|s| s.unitarity_defect()))
            .fold(0.0, f64::max);
        let unitary = defect < crate::hilbert::TOL_UNITARY;
        let (pairs, max_norm) = side_commutation(&scn)?;
        let commute = max_norm < 1e-12;
        passed &= unitary && commute;
        text.push_str(&format!(
            "  {} step unitarity: max defect {}\n  {} local commutation: {pairs} spacelike pairs, max norm {}\n",
            if unitary { "PASS" } else { "FAIL" },
            fmt_num(defect),
            if commute { "PASS" } else { "FAIL" },
            fmt_num(max_norm)
        ));
        results["suite"] = obj([
            ("max_unitarity_defect", num(defect)),
            ("spacelike_pairs", Value::from(pairs)),
            ("max_commutator_norm", num(max_norm)),
        ]);
    }
    results["passed"] = Value::Bool(passed);
    text.push_str(if passed { "all checks passed\n" } else { "some checks failed\n" });
    Ok(Outcome {
        code: if passed { EXIT_OK } else { EXIT_NEGATIVE },
        results,
        text,
        csv,
    })
}

/// Commutators of every spacelike pair of events drawn from two different sides.
fn side_commutation(scn: &Scenario) -> CResult<(usize, f64)> {
    let sides: Vec<&scenarios::Side> = scn.sides().values().collect();
    let (mut pairs, mut max_norm) = (0, 0.0f64);
    for (i, a) in sides.iter().enumerate() {
        for b in &sides[i + 1..] {
            for ea in &a.events {
                for eb in &b.events {
                    let (x, y) = (scn.event(ea)?, scn.event(eb)?);
                    if x.projector.is_none() || y.projector.is_none() {
                        continue;
                    }
                    if let Commutation::Norm(n) = commutation_check(scn, x, y)? {
                        pairs += 1;
                        max_norm = max_norm.max(n);
                    }
                }
            }
        }
    }
    Ok((pairs, max_norm))
}

fn embed(cli: &Cli, subset: Option<&str>) -> CResult<Outcome> {
    let events: Vec<TaggedEvent> = match (&cli.global.scenario, &cli.global.file) {
        (Some(s), None) => scenario(s)?.events().to_vec(),
        (None, Some(p)) => events_file::parse_events(&read(p)?)?,
        _ => return Err(CliError::usage("give exactly one of --scenario NAME and --file PATH")),
    };
    let events = match subset {
        None => events,
        Some(ids) => ids
            .split(',')
            .map(|id| {
                let id = id.trim();
                events
                    .iter()
                    .find(|e| e.id == id)
                    .cloned()
                    .ok_or_else(|| CliError::input(format!("unknown event `{id}`")))
            })
            .collect::<CResult<Vec<_>>>()?,
    };
    match embed_events(&events) {
        Ok(emb) => {
            let mut text = format!(
                "embedded {} events, slope bound {}\n",
                emb.order.len(),
                fmt_num(emb.slope_bound)
            );
            let mut csv = vec![vec!["event".into(), "x".into(), "t".into()]];
            let surfaces: Vec<Value> = emb
                .foliation
                .surfaces
                .iter()
                .map(|(id, s)| {
                    let knots: Vec<String> = s.knots().iter().map(|(x, t)| format!("({x}, {t})")).collect();
                    text.push_str(&format!("  {id}: {}\n", knots.join(" ")));
                    for (x, t) in s.knots() {
                        csv.push(vec![id.clone(), fmt_num(*x), fmt_num(*t)]);
                    }
                    obj([
                        ("event", Value::String(id.clone())),
                        (
                            "knots",
                            Value::Array(s.knots().iter().map(|(x, t)| Value::Array(vec![num(*x), num(*t)])).collect()),
                        ),
                    ])
                })
                .collect();
            Ok(Outcome {
                code: EXIT_OK,
                results: obj([
                    ("embedded", Value::Bool(true)),
                    ("order", strs(&emb.order)),
                    ("slope_bound", num(emb.slope_bound)),
                    ("surfaces", Value::Array(surfaces)),
                ]),
                text,
                csv,
            })
        }
        Err(Error::EmbeddingImpossible { entangled, other }) => {
            let msg = format!("entangled event `{entangled}` is forced both before and after `{other}`");
            Ok(Outcome {
                code: EXIT_NEGATIVE,
                results: obj([
                    ("embedded", Value::Bool(false)),
                    (
                        "witness",
                        obj([
                            ("entangled", Value::String(entangled.clone())),
                            ("other", Value::String(other.clone())),
                        ]),
                    ),
                ]),
                text: format!("embedding impossible: {msg}\n"),
                csv: vec![
                    vec!["entangled".into(), "other".into()],
                    vec![entangled, other],
                ],
            })
        }
        Err(e @ Error::InvalidGeometry(_)) => Ok(Outcome {
            code: EXIT_NEGATIVE,
            results: obj([("embedded", Value::Bool(false)), ("error", Value::String(e.to_string()))]),
            text: format!("embedding failed: {e}\n"),
            csv: vec![vec!["error".into()], vec![e.to_string()]],
        }),
        Err(e) => Err(e.into()),
    }
}
