use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

/// An atom of L: a character literal or an alphanumeric identifier.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Char(char),
    Ident(Arc<str>),
}

impl Symbol {
    pub fn ident(s: &str) -> Symbol {
        Symbol::Ident(Arc::from(s))
    }

    pub fn is_ident(&self, s: &str) -> bool {
        matches!(self, Symbol::Ident(x) if &**x == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    S,
    E,
}

impl VarKind {
    pub fn prefix(self) -> char {
        match self {
            VarKind::S => 's',
            VarKind::E => 'e',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub kind: VarKind,
    pub name: Arc<str>,
}

impl Var {
    pub fn s(name: &str) -> Var {
        Var { kind: VarKind::S, name: Arc::from(name) }
    }

    pub fn e(name: &str) -> Var {
        Var { kind: VarKind::E, name: Arc::from(name) }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.kind.prefix(), self.name)
    }
}

/// Expressions. `Var` always holds an e-variable; a lone s-variable is a
/// `Cons` of an `SVar` term onto `Nil`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(Var),
    Cons(Term, Box<Expr>),
    Call(Arc<str>, Vec<Expr>),
    Append(Box<Expr>, Box<Expr>),
    Nil,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    SVar(Var),
    Paren(Box<Expr>),
    Sym(Symbol),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    /// An e-variable binding the whole remaining sequence.
    Var(Var),
    SVarCons(Var, Box<Pattern>),
    ParenCons(Box<Pattern>, Box<Pattern>),
    SymCons(Symbol, Box<Pattern>),
    Nil,
}

/// Source position, ignored by equality so that reparsed programs compare
/// equal to the originals.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub lhs: Vec<Pattern>,
    pub rhs: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunDef {
    pub arity: usize,
    pub rules: Vec<Rule>,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub defs: IndexMap<Arc<str>, FunDef>,
}

impl Program {
    pub fn get(&self, name: &str) -> Option<&FunDef> {
        self.defs.get(name)
    }

    pub fn add_rule(&mut self, name: &str, rule: Rule) {
        let arity = rule.lhs.len();
        self.defs
            .entry(Arc::from(name))
            .or_insert_with(|| FunDef { arity, rules: Vec::new(), span: Span::default() })
            .rules
            .push(rule);
    }

    pub fn rule_count(&self) -> usize {
        self.defs.values().map(|d| d.rules.len()).sum()
    }
}

impl Rule {
    pub fn new(lhs: Vec<Pattern>, rhs: Expr) -> Rule {
        Rule { lhs, rhs, span: Span::default() }
    }
}

/// One item of a flat sequence, used to build canonical expressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Term(Term),
    EVar(Var),
    Call(Arc<str>, Vec<Expr>),
}

impl Expr {
    /// Builds the canonical expression for a flat item sequence: maximal
    /// runs of terms ending in at most one non-term, joined by a
    /// left-nested `Append`.
    pub fn from_items(items: Vec<Item>) -> Expr {
        let mut parts: Vec<Expr> = Vec::new();
        let mut terms: Vec<Term> = Vec::new();
        for it in items {
            match it {
                Item::Term(t) => terms.push(t),
                Item::EVar(v) => parts.push(cons_all(std::mem::take(&mut terms), Expr::Var(v))),
                Item::Call(f, a) => parts.push(cons_all(std::mem::take(&mut terms), Expr::Call(f, a))),
            }
        }
        if !terms.is_empty() {
            parts.push(cons_all(terms, Expr::Nil));
        }
        let mut it = parts.into_iter();
        let Some(first) = it.next() else {
            return Expr::Nil;
        };
        it.fold(first, |acc, p| Expr::Append(Box::new(acc), Box::new(p)))
    }

    /// Flattens the expression into items, dissolving `Append` and `Nil`.
    pub fn items(&self) -> Vec<Item> {
        let mut out = Vec::new();
        self.push_items(&mut out);
        out
    }

    fn push_items(&self, out: &mut Vec<Item>) {
        match self {
            Expr::Var(v) => out.push(Item::EVar(v.clone())),
            Expr::Cons(t, rest) => {
                out.push(Item::Term(t.clone()));
                rest.push_items(out);
            }
            Expr::Call(f, a) => out.push(Item::Call(f.clone(), a.clone())),
            Expr::Append(a, b) => {
                a.push_items(out);
                b.push_items(out);
            }
            Expr::Nil => {}
        }
    }

    /// Rebuilds the expression in canonical shape, recursively.
    pub fn canonical(&self) -> Expr {
        let items = self
            .items()
            .into_iter()
            .map(|it| match it {
                Item::Term(Term::Paren(e)) => Item::Term(Term::Paren(Box::new(e.canonical()))),
                Item::Call(f, a) => Item::Call(f, a.iter().map(Expr::canonical).collect()),
                other => other,
            })
            .collect();
        Expr::from_items(items)
    }

    pub fn sym(s: Symbol, rest: Expr) -> Expr {
        Expr::Cons(Term::Sym(s), Box::new(rest))
    }

    pub fn paren(inner: Expr, rest: Expr) -> Expr {
        Expr::Cons(Term::Paren(Box::new(inner)), Box::new(rest))
    }

    pub fn has_call(&self) -> bool {
        match self {
            Expr::Call(..) => true,
            Expr::Var(_) | Expr::Nil => false,
            Expr::Cons(t, rest) => matches!(t, Term::Paren(e) if e.has_call()) || rest.has_call(),
            Expr::Append(a, b) => a.has_call() || b.has_call(),
        }
    }

    pub fn has_append(&self) -> bool {
        match self {
            Expr::Append(..) => true,
            Expr::Var(_) | Expr::Nil => false,
            Expr::Call(_, a) => a.iter().any(Expr::has_append),
            Expr::Cons(t, rest) => matches!(t, Term::Paren(e) if e.has_append()) || rest.has_append(),
        }
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(&Var)) {
        match self {
            Expr::Var(v) => f(v),
            Expr::Nil => {}
            Expr::Cons(t, rest) => {
                match t {
                    Term::SVar(v) => f(v),
                    Term::Paren(e) => e.visit_vars(f),
                    Term::Sym(_) => {}
                }
                rest.visit_vars(f);
            }
            Expr::Call(_, a) => a.iter().for_each(|e| e.visit_vars(f)),
            Expr::Append(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    pub fn visit_calls(&self, f: &mut impl FnMut(&str, usize)) {
        match self {
            Expr::Var(_) | Expr::Nil => {}
            Expr::Cons(t, rest) => {
                if let Term::Paren(e) = t {
                    e.visit_calls(f);
                }
                rest.visit_calls(f);
            }
            Expr::Call(name, a) => {
                f(name, a.len());
                a.iter().for_each(|e| e.visit_calls(f));
            }
            Expr::Append(a, b) => {
                a.visit_calls(f);
                b.visit_calls(f);
            }
        }
    }

    pub fn visit_syms(&self, f: &mut impl FnMut(&Symbol)) {
        match self {
            Expr::Var(_) | Expr::Nil => {}
            Expr::Cons(t, rest) => {
                match t {
                    Term::Sym(s) => f(s),
                    Term::Paren(e) => e.visit_syms(f),
                    Term::SVar(_) => {}
                }
                rest.visit_syms(f);
            }
            Expr::Call(_, a) => a.iter().for_each(|e| e.visit_syms(f)),
            Expr::Append(a, b) => {
                a.visit_syms(f);
                b.visit_syms(f);
            }
        }
    }
}

fn cons_all(terms: Vec<Term>, tail: Expr) -> Expr {
    terms.into_iter().rev().fold(tail, |acc, t| Expr::Cons(t, Box::new(acc)))
}

/// Number of occurrences of `v` in `e`.
pub fn multiplicity(v: &Var, e: &Expr) -> usize {
    let mut n = 0;
    e.visit_vars(&mut |w| {
        if w == v {
            n += 1;
        }
    });
    n
}

impl Pattern {
    /// The injection of patterns into expressions.
    pub fn to_expr(&self) -> Expr {
        match self {
            Pattern::Var(v) => Expr::Var(v.clone()),
            Pattern::SVarCons(v, rest) => Expr::Cons(Term::SVar(v.clone()), Box::new(rest.to_expr())),
            Pattern::ParenCons(inner, rest) => {
                Expr::Cons(Term::Paren(Box::new(inner.to_expr())), Box::new(rest.to_expr()))
            }
            Pattern::SymCons(s, rest) => Expr::Cons(Term::Sym(s.clone()), Box::new(rest.to_expr())),
            Pattern::Nil => Expr::Nil,
        }
    }

    /// Left inverse of [`Pattern::to_expr`]. Fails on calls, appends and
    /// e-variables outside tail position.
    pub fn from_expr(e: &Expr) -> Option<Pattern> {
        match e {
            Expr::Var(v) if v.kind == VarKind::E => Some(Pattern::Var(v.clone())),
            Expr::Var(_) => None,
            Expr::Nil => Some(Pattern::Nil),
            Expr::Cons(t, rest) => {
                let rest = Box::new(Pattern::from_expr(rest)?);
                Some(match t {
                    Term::SVar(v) => Pattern::SVarCons(v.clone(), rest),
                    Term::Sym(s) => Pattern::SymCons(s.clone(), rest),
                    Term::Paren(inner) => Pattern::ParenCons(Box::new(Pattern::from_expr(inner)?), rest),
                })
            }
            Expr::Call(..) | Expr::Append(..) => None,
        }
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(&Var)) {
        match self {
            Pattern::Var(v) => f(v),
            Pattern::SVarCons(v, rest) => {
                f(v);
                rest.visit_vars(f);
            }
            Pattern::ParenCons(inner, rest) => {
                inner.visit_vars(f);
                rest.visit_vars(f);
            }
            Pattern::SymCons(_, rest) => rest.visit_vars(f),
            Pattern::Nil => {}
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.visit_vars(&mut |v| out.push(v.clone()));
        out
    }
}
