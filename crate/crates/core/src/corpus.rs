//! Shipped programs and the counting-abstraction model generator.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::sync::Arc;

use crate::eval::{data_to_expr, Data};
use crate::lang::*;

pub const SELF_INTERPRETER_SRC: &str = include_str!("../../../corpus/self_interpreter.l");
pub const SYNAPSE_SRC: &str = include_str!("../../../corpus/synapse.l");
pub const SYNAPSE_MUTANT_SRC: &str = include_str!("../../../corpus/synapse_unsafe_mutant.l");
pub const SYNAPSE_SPEC_SRC: &str = include_str!("../../../corpus/protocols/synapse.spec");

/// Interpreter functions, in definition order.
pub const INTERPRETER_FUNCTIONS: [&str; 12] =
    ["Int", "Eval", "EvalCall", "Matching", "Match", "PutVar", "PutV", "CheckRepVar", "Eq", "ContEq", "LookFor", "Subst"];

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error("program name {0} collides with an interpreter function")]
    NameCollision(String),
    #[error("protocol spec line {line}: {msg}")]
    Spec { line: usize, msg: String },
}

/// The self-interpreter with a `Prog` function returning, for each name,
/// the encoded definition list of that program.
pub fn self_interpreter(programs: &BTreeMap<String, Data>) -> Result<Program, CorpusError> {
    let mut p = parse_program_unchecked(SELF_INTERPRETER_SRC)?;
    let mut prog = FunDef { arity: 1, rules: Vec::new(), span: Span::default() };
    for (name, defs) in programs {
        if INTERPRETER_FUNCTIONS.contains(&name.as_str()) || name == "Prog" {
            return Err(CorpusError::NameCollision(name.clone()));
        }
        let lhs = Pattern::SymCons(Symbol::Ident(Arc::from(name.as_str())), Box::new(Pattern::Nil));
        prog.rules.push(Rule::new(vec![lhs], data_to_expr(defs)));
    }
    p.defs.insert(Arc::from("Prog"), prog);
    let diags = validate(&p);
    if has_errors(&diags) {
        return Err(LangError::Invalid(diags).into());
    }
    Ok(p)
}

pub fn synapse_model() -> Program {
    parse_program(SYNAPSE_SRC).expect("shipped Synapse model parses")
}

pub fn synapse_mutant() -> Program {
    parse_program(SYNAPSE_MUTANT_SRC).expect("shipped Synapse mutant parses")
}

// ---------------------------------------------------------------------------
// Protocol specs.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Initial {
    Zero,
    Param,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counter {
    pub name: String,
    pub initial: Initial,
}

/// `counter >= k`, or `counter == k` when `exact`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bound {
    pub counter: usize,
    pub k: u32,
    pub exact: bool,
}

/// `counter := c1 + c2 + ... + constant`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Update {
    pub counter: usize,
    pub terms: Vec<usize>,
    pub constant: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub name: String,
    /// Disjunction of conjunctions.
    pub guard: Vec<Vec<Bound>>,
    pub updates: Vec<Update>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountingProtocolSpec {
    pub name: String,
    pub counters: Vec<Counter>,
    pub events: Vec<Event>,
    pub unsafe_states: Vec<Vec<Bound>>,
    /// Marks specs whose tables come from outside this repository.
    pub external: bool,
}

impl CountingProtocolSpec {
    fn counter(&self, name: &str) -> Option<usize> {
        self.counters.iter().position(|c| c.name == name)
    }
}

struct SpecParser<'a> {
    spec: &'a mut CountingProtocolSpec,
    line: usize,
}

impl SpecParser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, CorpusError> {
        Err(CorpusError::Spec { line: self.line, msg: msg.into() })
    }

    fn counter(&self, name: &str) -> Result<usize, CorpusError> {
        match self.spec.counter(name) {
            Some(i) => Ok(i),
            None => self.err(format!("undeclared counter {name}")),
        }
    }

    fn conj(&self, text: &str) -> Result<Vec<Bound>, CorpusError> {
        let mut out = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (exact, (lhs, rhs)) = match (part.split_once(">="), part.split_once("==")) {
                (Some(x), _) => (false, x),
                (None, Some(x)) => (true, x),
                _ => return self.err(format!("expected `counter >= k` or `counter == k`, found `{part}`")),
            };
            let counter = self.counter(lhs.trim())?;
            let k: u32 = match rhs.trim().parse() {
                Ok(k) => k,
                Err(_) => return self.err(format!("bad bound `{}`", rhs.trim())),
            };
            if k > 2 {
                return self.err("bounds above 2 are not supported");
            }
            if k > 0 || exact {
                out.push(Bound { counter, k, exact });
            }
        }
        Ok(out)
    }

    fn update(&self, text: &str) -> Result<Update, CorpusError> {
        let Some((lhs, rhs)) = text.split_once(":=") else {
            return self.err(format!("expected `counter := expr`, found `{text}`"));
        };
        let counter = self.counter(lhs.trim())?;
        let mut terms = Vec::new();
        let mut constant = 0i64;
        let normalized = rhs.replace('-', "+-");
        for tok in normalized.split('+').map(str::trim).filter(|s| !s.is_empty()) {
            let (neg, body) = match tok.strip_prefix('-') {
                Some(b) => (true, b.trim()),
                None => (false, tok),
            };
            if let Ok(n) = body.parse::<i64>() {
                constant += if neg { -n } else { n };
            } else if neg {
                return self.err("counters may only be added");
            } else {
                let c = self.counter(body)?;
                if terms.contains(&c) {
                    return self.err(format!("counter {body} added twice"));
                }
                terms.push(c);
            }
        }
        Ok(Update { counter, terms, constant })
    }
}

/// Parses the line-based protocol format:
///
/// ```text
/// protocol Synapse
/// counter Invalid param
/// counter Dirty 0
/// event rm when Invalid >= 1 do Dirty := 0, Valid := Valid + 1
/// unsafe Dirty >= 2
/// ```
///
/// Guards are `,`-conjunctions joined by `|`. `#` starts a comment.
pub fn parse_protocol_spec(text: &str) -> Result<CountingProtocolSpec, CorpusError> {
    let mut spec = CountingProtocolSpec {
        name: String::new(),
        counters: Vec::new(),
        events: Vec::new(),
        unsafe_states: Vec::new(),
        external: false,
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let p = SpecParser { spec: &mut spec, line: i + 1 };
        match kw {
            "protocol" => p.spec.name = rest.to_string(),
            "source" => p.spec.external = rest == "external",
            "counter" => {
                let mut it = rest.split_whitespace();
                let (Some(name), Some(init), None) = (it.next(), it.next(), it.next()) else {
                    return p.err("expected `counter Name param|0`");
                };
                if !is_identifier(name) {
                    return p.err(format!("bad counter name {name}"));
                }
                if p.spec.counter(name).is_some() {
                    return p.err(format!("counter {name} declared twice"));
                }
                let initial = match init {
                    "param" => Initial::Param,
                    "0" => Initial::Zero,
                    _ => return p.err("initial value must be `param` or `0`"),
                };
                p.spec.counters.push(Counter { name: name.to_string(), initial });
            }
            "event" => {
                let (name, body) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                if !is_identifier(name) {
                    return p.err(format!("bad event name {name}"));
                }
                let body = body.trim();
                let (guard_src, upd_src) = match body.split_once(" do ") {
                    Some((g, u)) => (g.trim(), Some(u.trim())),
                    None => match body.strip_prefix("do ") {
                        Some(u) => ("", Some(u.trim())),
                        None => (body, None),
                    },
                };
                let guard_src = guard_src.strip_prefix("when").map(str::trim).unwrap_or(guard_src);
                let guard = if guard_src.is_empty() {
                    vec![Vec::new()]
                } else {
                    guard_src.split('|').map(|c| p.conj(c)).collect::<Result<_, _>>()?
                };
                let mut updates = Vec::new();
                for u in upd_src.into_iter().flat_map(|u| u.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
                    let u = p.update(u)?;
                    if updates.iter().any(|x: &Update| x.counter == u.counter) {
                        return p.err("counter updated twice");
                    }
                    updates.push(u);
                }
                p.spec.events.push(Event { name: name.to_string(), guard, updates });
            }
            "unsafe" => {
                let c = p.conj(rest)?;
                p.spec.unsafe_states.push(c);
            }
            _ => return p.err(format!("unknown keyword {kw}")),
        }
    }
    if spec.name.is_empty() {
        return Err(CorpusError::Spec { line: 0, msg: "missing `protocol` line".into() });
    }
    let params = spec.counters.iter().filter(|c| c.initial == Initial::Param).count();
    if params != 1 {
        return Err(CorpusError::Spec { line: 0, msg: format!("expected one parameterized counter, found {params}") });
    }
    Ok(spec)
}

fn is_identifier(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Copy, Debug, Default)]
pub struct GenOptions {
    /// Emit rules for events without updates.
    pub identity_events: bool,
}

/// Variable names: first letter plus `s`, falling back to the whole name.
fn var_names(spec: &CountingProtocolSpec) -> Vec<String> {
    let short: Vec<String> =
        spec.counters.iter().map(|c| format!("{}s", c.name[..1].to_ascii_lowercase())).collect();
    short
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let clash = short.iter().filter(|t| *t == s).count() > 1 || s == "time";
            if clash {
                spec.counters[i].name.to_ascii_lowercase()
            } else {
                s.clone()
            }
        })
        .collect()
}

fn ones(n: u32) -> String {
    (0..n).map(|_| "I ").collect()
}

/// Per counter: the number of I's a guard demands and whether the counter
/// is pinned to exactly that value.
#[derive(Clone, Copy, Debug, Default)]
struct Need {
    k: u32,
    exact: bool,
}

fn counter_value(n: Need, var: &str) -> String {
    if n.exact {
        ones(n.k).trim_end().to_string()
    } else {
        format!("{}e.{var}", ones(n.k))
    }
}

fn state_pattern(spec: &CountingProtocolSpec, vars: &[String], need: &[Need]) -> String {
    spec.counters
        .iter()
        .zip(vars)
        .zip(need)
        .map(|((c, v), n)| {
            let val = counter_value(*n, v);
            if val.is_empty() {
                format!("({})", c.name)
            } else {
                format!("({} {val})", c.name)
            }
        })
        .collect::<Vec<_>>()
        .join(" : ")
}

fn needs(spec: &CountingProtocolSpec, conj: &[Bound]) -> Result<Vec<Need>, CorpusError> {
    let mut need = vec![Need::default(); spec.counters.len()];
    for b in conj {
        let n = &mut need[b.counter];
        match (n.exact, b.exact) {
            (true, true) if n.k != b.k => {
                return Err(CorpusError::Spec { line: 0, msg: "contradictory guard".into() });
            }
            (true, false) if b.k > n.k => {
                return Err(CorpusError::Spec { line: 0, msg: "contradictory guard".into() });
            }
            (true, _) => {}
            (false, true) if b.k < n.k => {
                return Err(CorpusError::Spec { line: 0, msg: "contradictory guard".into() });
            }
            (false, true) => *n = Need { k: b.k, exact: true },
            (false, false) => n.k = n.k.max(b.k),
        }
    }
    Ok(need)
}

/// Value of an update over the pattern `(C I^k e.c)`: the known I's of the
/// summed counters plus the constant, followed by their unknown rests
/// appended right to left.
fn update_expr(spec: &CountingProtocolSpec, vars: &[String], need: &[Need], u: &Update) -> Result<String, CorpusError> {
    let known: i64 = u.terms.iter().map(|&t| i64::from(need[t].k)).sum::<i64>() + u.constant;
    if known < 0 {
        return Err(CorpusError::Spec {
            line: 0,
            msg: format!("update of {} may go negative under its guard", spec.counters[u.counter].name),
        });
    }
    let mut acc: Option<String> = None;
    for &t in u.terms.iter().filter(|&&t| !need[t].exact) {
        let v = format!("e.{}", vars[t]);
        acc = Some(match acc {
            None => v,
            Some(inner) => format!("Append(({v}) : ({inner}))"),
        });
    }
    Ok(format!("{}{}", ones(known as u32), acc.unwrap_or_default()).trim_end().to_string())
}

/// Builds a model with the Main/Loop/Event/Append/Test skeleton.
pub fn generate_model(spec: &CountingProtocolSpec, opts: GenOptions) -> Result<Program, CorpusError> {
    let text = generate_model_source(spec, opts)?;
    Ok(parse_program(&text)?)
}

pub fn generate_model_source(spec: &CountingProtocolSpec, opts: GenOptions) -> Result<String, CorpusError> {
    let vars = var_names(spec);
    let zero = vec![Need::default(); spec.counters.len()];
    let plain = state_pattern(spec, &vars, &zero);
    let param = spec.counters.iter().position(|c| c.initial == Initial::Param).expect("validated");
    let mut s = String::new();
    let init: Vec<String> = spec
        .counters
        .iter()
        .zip(&vars)
        .map(|(c, v)| match c.initial {
            Initial::Param => format!("({} I e.{v})", c.name),
            Initial::Zero => format!("({})", c.name),
        })
        .collect();
    writeln!(s, "-- Generated from protocol {}.\n", spec.name).unwrap();
    writeln!(s, "Main {{\n    (e.time) : (e.{}) => Loop((e.time) : {});\n}}\n", vars[param], init.join(" : ")).unwrap();
    writeln!(
        s,
        "Loop {{\n    ([]) : {plain} => Test({plain});\n    (s.t : e.time) : {plain} => Loop((e.time) : Event(s.t : {plain}));\n}}\n"
    )
    .unwrap();
    s.push_str("Event {\n");
    for ev in &spec.events {
        if ev.updates.is_empty() && !opts.identity_events {
            continue;
        }
        for conj in &ev.guard {
            let need = needs(spec, conj)?;
            let lhs = state_pattern(spec, &vars, &need);
            let mut parts = Vec::new();
            for (i, c) in spec.counters.iter().enumerate() {
                let val = match ev.updates.iter().find(|u| u.counter == i) {
                    Some(u) => update_expr(spec, &vars, &need, u)?,
                    None => counter_value(need[i], &vars[i]),
                };
                parts.push(if val.is_empty() { format!("({})", c.name) } else { format!("({} {val})", c.name) });
            }
            writeln!(s, "    {} : {lhs} => {};", ev.name, parts.join(" : ")).unwrap();
        }
    }
    s.push_str("}\n\n");
    s.push_str("Append {\n    ([]) : (e.ys) => e.ys;\n    (s.x : e.xs) : (e.ys) => s.x : Append((e.xs) : (e.ys));\n}\n\n");
    s.push_str("Test {\n");
    for conj in &spec.unsafe_states {
        writeln!(s, "    {} => False;", state_pattern(spec, &vars, &needs(spec, conj)?)).unwrap();
    }
    writeln!(s, "    {plain} => True;\n}}").unwrap();
    Ok(s)
}

pub fn synapse_spec() -> CountingProtocolSpec {
    parse_protocol_spec(SYNAPSE_SPEC_SRC).expect("shipped Synapse spec parses")
}
