use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ast::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub function: String,
    pub rule: Option<usize>,
    pub span: Span,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.span.line, self.span.col, self.message)?;
        match self.rule {
            Some(r) => write!(f, " (in {}, rule {})", self.function, r + 1),
            None => write!(f, " (in {})", self.function),
        }
    }
}

/// Marker symbols of the program encoding.
pub const RESERVED_IDENTS: [&str; 2] = ["Call", "Var"];
pub const RESERVED_CHARS: [char; 2] = ['*', '='];

fn is_reserved(s: &Symbol) -> bool {
    match s {
        Symbol::Ident(n) => RESERVED_IDENTS.contains(&&**n),
        Symbol::Char(c) => RESERVED_CHARS.contains(c),
    }
}

/// Checks arity consistency, call targets and rhs variables. Use of the
/// encoding's marker symbols yields warnings.
pub fn validate(p: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (name, def) in &p.defs {
        let mut reserved = BTreeSet::new();
        for (ri, rule) in def.rules.iter().enumerate() {
            let diag = |severity, message: String| Diagnostic {
                severity,
                function: name.to_string(),
                rule: Some(ri),
                span: rule.span,
                message,
            };
            if rule.lhs.len() != def.arity {
                out.push(diag(
                    Severity::Error,
                    format!("arity mismatch: {name} takes {} arguments, rule has {}", def.arity, rule.lhs.len()),
                ));
            }
            let mut bound: BTreeMap<Var, ()> = BTreeMap::new();
            for pat in &rule.lhs {
                for v in pat.vars() {
                    bound.insert(v, ());
                }
                pat.to_expr().visit_syms(&mut |s| {
                    if is_reserved(s) {
                        reserved.insert(sym_text(s));
                    }
                });
            }
            let mut free = BTreeSet::new();
            rule.rhs.visit_vars(&mut |v| {
                if !bound.contains_key(v) {
                    free.insert(v.to_string());
                }
            });
            for v in free {
                out.push(diag(Severity::Error, format!("free variable {v}")));
            }
            let mut bad_calls = BTreeSet::new();
            rule.rhs.visit_calls(&mut |f, n| match p.defs.get(f) {
                None => {
                    bad_calls.insert(format!("call to undefined function {f}"));
                }
                Some(d) if d.arity != n => {
                    bad_calls.insert(format!("call to {f} with {n} arguments, expected {}", d.arity));
                }
                Some(_) => {}
            });
            for m in bad_calls {
                out.push(diag(Severity::Error, m));
            }
            rule.rhs.visit_syms(&mut |s| {
                if is_reserved(s) {
                    reserved.insert(sym_text(s));
                }
            });
        }
        for s in reserved {
            out.push(Diagnostic {
                severity: Severity::Warning,
                function: name.to_string(),
                rule: None,
                span: def.span,
                message: format!("symbol {s} is reserved by the program encoding"),
            });
        }
    }
    out
}

fn sym_text(s: &Symbol) -> String {
    let mut out = String::new();
    super::print::print_symbol(s, &mut out);
    out
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}
