//! Seeded generators of programs and data.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use scpv_core::config::{Clock, PExpr, Seg};
use scpv_core::eval::{DTerm, Data};
use scpv_core::lang::{Expr, FunDef, Item, Pattern, Program, Rule, Span, Symbol, Term, Var, VarKind};

const SYMS: [&str; 4] = ["A", "B", "I", "Nil0"];
const CHARS: [char; 3] = ['a', 'b', '0'];

pub fn symbol(rng: &mut impl Rng) -> Symbol {
    if rng.gen_bool(0.5) {
        Symbol::ident(SYMS.choose(rng).unwrap())
    } else {
        Symbol::Char(*CHARS.choose(rng).unwrap())
    }
}

fn fresh(k: VarKind, next_var: &mut u32) -> Var {
    *next_var += 1;
    Var { kind: k, name: Arc::from(format!("v{next_var}")) }
}

pub fn pattern(rng: &mut impl Rng, depth: u32, next_var: &mut u32) -> Pattern {
    let len = rng.gen_range(0..4);
    let mut tail = if rng.gen_bool(0.5) { Pattern::Var(fresh(VarKind::E, next_var)) } else { Pattern::Nil };
    for _ in 0..len {
        let r = rng.gen_range(0..10);
        tail = if r < 4 {
            Pattern::SymCons(symbol(rng), Box::new(tail))
        } else if r < 7 || depth == 0 {
            Pattern::SVarCons(fresh(VarKind::S, next_var), Box::new(tail))
        } else {
            Pattern::ParenCons(Box::new(pattern(rng, depth - 1, next_var)), Box::new(tail))
        };
    }
    tail
}

/// Terms followed by at most one e-variable or call, so no `++` arises.
fn expr(rng: &mut impl Rng, depth: u32, vars: &[Var], funs: &[Arc<str>]) -> Expr {
    let mut items = Vec::new();
    let svars: Vec<&Var> = vars.iter().filter(|v| v.kind == VarKind::S).collect();
    let evars: Vec<&Var> = vars.iter().filter(|v| v.kind == VarKind::E).collect();
    for _ in 0..rng.gen_range(0..4) {
        let r = rng.gen_range(0..10);
        let t = if r < 2 && !svars.is_empty() {
            Term::SVar((*svars.choose(rng).unwrap()).clone())
        } else if r < 4 && depth > 0 {
            Term::Paren(Box::new(expr(rng, depth - 1, vars, funs)))
        } else {
            Term::Sym(symbol(rng))
        };
        items.push(Item::Term(t));
    }
    match rng.gen_range(0..3) {
        0 if !evars.is_empty() => items.push(Item::EVar((*evars.choose(rng).unwrap()).clone())),
        1 if depth > 0 => {
            let f = funs.choose(rng).unwrap().clone();
            items.push(Item::Call(f, vec![expr(rng, depth - 1, vars, funs)]));
        }
        _ => {}
    }
    Expr::from_items(items)
}

/// A valid program of unary functions without `++`.
pub fn program(rng: &mut impl Rng) -> Program {
    let n = rng.gen_range(1..=3);
    let funs: Vec<Arc<str>> = ["F", "Go", "H2"].iter().take(n).map(|s| Arc::from(*s)).collect();
    let mut p = Program::default();
    for f in &funs {
        let mut rules = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let mut next_var = 0;
            let lhs = pattern(rng, 2, &mut next_var);
            let vars = lhs.vars();
            let rhs = expr(rng, 2, &vars, &funs);
            rules.push(Rule { lhs: vec![lhs], rhs, span: Span::default() });
        }
        p.defs.insert(f.clone(), FunDef { arity: 1, rules, span: Span::default() });
    }
    p
}

pub fn data(rng: &mut impl Rng, depth: u32, max_len: usize) -> Data {
    (0..rng.gen_range(0..=max_len))
        .map(|_| {
            if depth > 0 && rng.gen_bool(0.3) {
                DTerm::paren(data(rng, depth - 1, max_len))
            } else {
                DTerm::Sym(symbol(rng))
            }
        })
        .collect()
}

pub fn ones(n: usize) -> Data {
    (0..n).map(|_| DTerm::ident("I")).collect()
}

/// `(events) (I^n)`. Some events are outside `alphabet`.
pub fn well_formed_input(rng: &mut impl Rng, alphabet: &[&str], max_len: usize) -> Data {
    let stream = (0..rng.gen_range(0..=max_len))
        .map(|_| if rng.gen_ratio(1, 12) { DTerm::ident("bogus") } else { DTerm::ident(alphabet.choose(rng).unwrap()) })
        .collect();
    vec![DTerm::paren(stream), DTerm::paren(ones(rng.gen_range(0..4)))]
}

/// Inputs of either the expected shape or arbitrary data.
pub fn any_input(rng: &mut impl Rng, alphabet: &[&str], max_len: usize) -> Data {
    if rng.gen_bool(0.7) {
        well_formed_input(rng, alphabet, max_len)
    } else {
        data(rng, 2, 4)
    }
}

/// Parameterized data whose parameters are fresh and distinct.
pub fn param_data(rng: &mut impl Rng, depth: u32, clock: &mut Clock) -> PExpr {
    let mut out = Vec::new();
    for _ in 0..rng.gen_range(0..4) {
        let r = rng.gen_range(0..10);
        out.push(if r < 3 {
            Seg::Sym(symbol(rng))
        } else if r < 5 {
            clock.fresh_s()
        } else if r < 8 {
            clock.fresh_e()
        } else if depth > 0 {
            Seg::Paren(param_data(rng, depth - 1, clock))
        } else {
            Seg::Sym(symbol(rng))
        });
    }
    PExpr(out)
}

