//! The program and data encoding consumed by the self-interpreter, and its
//! left inverse.

use std::fmt;
use std::sync::Arc;

use crate::eval::{DTerm, Data};
use crate::lang::*;

pub const CALL: &str = "Call";
pub const VAR: &str = "Var";
pub const STAR: char = '*';
pub const EQ: char = '=';

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("function {0} is not unary")]
    NotUnary(String),
    #[error("function {0} uses `++`")]
    UsesAppend(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("decode error at {path}: {msg}")]
pub struct DecodeError {
    pub path: DataPath,
    pub msg: String,
}

/// Position inside nested data: the index at each paren level.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DataPath(pub Vec<usize>);

impl fmt::Display for DataPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "/");
        }
        for i in &self.0 {
            write!(f, "/{i}")?;
        }
        Ok(())
    }
}

fn sym(d: &mut Data, s: Symbol) {
    d.push(DTerm::Sym(s));
}

fn var_term(kind: char, name: &str) -> DTerm {
    DTerm::paren(vec![DTerm::ident(VAR), DTerm::ch(kind), DTerm::ident(name)])
}

pub fn encode_data(d: &[DTerm]) -> Data {
    d.iter()
        .map(|t| match t {
            DTerm::Sym(_) => t.clone(),
            DTerm::Paren(x) => {
                let mut inner = vec![DTerm::ch(STAR)];
                inner.extend(encode_data(x));
                DTerm::paren(inner)
            }
        })
        .collect()
}

/// Inverse of [`encode_data`] on its image.
pub fn decode_data(d: &[DTerm]) -> Option<Data> {
    d.iter()
        .map(|t| match t {
            DTerm::Sym(s) if !s.is_ident(CALL) && !s.is_ident(VAR) => Some(t.clone()),
            DTerm::Paren(x) => match x.split_first() {
                Some((DTerm::Sym(Symbol::Char(STAR)), rest)) => Some(DTerm::paren(decode_data(rest)?)),
                _ => None,
            },
            DTerm::Sym(_) => None,
        })
        .collect()
}

pub fn encode_expr(e: &Expr) -> Result<Data, EncodeError> {
    let mut out = Vec::new();
    enc_expr(e, &mut out)?;
    Ok(out)
}

fn enc_expr(e: &Expr, out: &mut Data) -> Result<(), EncodeError> {
    match e {
        Expr::Nil => {}
        Expr::Var(v) => out.push(var_term('e', &v.name)),
        Expr::Cons(t, rest) => {
            match t {
                Term::SVar(v) => out.push(var_term('s', &v.name)),
                Term::Sym(s) => sym(out, s.clone()),
                Term::Paren(x) => {
                    let mut inner = vec![DTerm::ch(STAR)];
                    enc_expr(x, &mut inner)?;
                    out.push(DTerm::paren(inner));
                }
            }
            enc_expr(rest, out)?;
        }
        Expr::Call(f, args) => {
            if args.len() != 1 {
                return Err(EncodeError::NotUnary(f.to_string()));
            }
            let mut inner = vec![DTerm::ident(CALL), DTerm::Sym(Symbol::Ident(f.clone()))];
            enc_expr(&args[0], &mut inner)?;
            out.push(DTerm::paren(inner));
        }
        Expr::Append(..) => return Err(EncodeError::UsesAppend(String::new())),
    }
    Ok(())
}

/// The list of encoded definitions, one parenthesized term per function
/// in definition order.
pub fn encode_defs(p: &Program) -> Result<Data, EncodeError> {
    let mut defs = Vec::new();
    for (name, def) in &p.defs {
        if def.arity != 1 {
            return Err(EncodeError::NotUnary(name.to_string()));
        }
        let mut d = vec![DTerm::Sym(Symbol::Ident(name.clone()))];
        for r in &def.rules {
            if r.rhs.has_append() {
                return Err(EncodeError::UsesAppend(name.to_string()));
            }
            let pat = encode_expr(&r.lhs[0].to_expr())?;
            let rhs = encode_expr(&r.rhs).map_err(|e| match e {
                EncodeError::UsesAppend(_) => EncodeError::UsesAppend(name.to_string()),
                other => other,
            })?;
            d.push(DTerm::paren(vec![DTerm::paren(pat), DTerm::ch(EQ), DTerm::paren(rhs)]));
        }
        defs.push(DTerm::paren(d));
    }
    Ok(defs)
}

/// `( defs )`: the whole program as one parenthesized term.
pub fn encode_program(p: &Program) -> Result<Data, EncodeError> {
    Ok(vec![DTerm::paren(encode_defs(p)?)])
}

struct Decoder {
    path: Vec<usize>,
}

impl Decoder {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, DecodeError> {
        Err(DecodeError { path: DataPath(self.path.clone()), msg: msg.into() })
    }

    fn ident_at(&self, t: Option<&DTerm>, what: &str) -> Result<Arc<str>, DecodeError> {
        match t {
            Some(DTerm::Sym(Symbol::Ident(n))) => Ok(n.clone()),
            _ => self.err(format!("expected {what}")),
        }
    }

    fn var(&mut self, x: &[DTerm]) -> Result<Option<Var>, DecodeError> {
        match x {
            [DTerm::Sym(v), DTerm::Sym(Symbol::Char(k)), name] if v.is_ident(VAR) => {
                let name = self.ident_at(Some(name), "variable name")?;
                let kind = match k {
                    's' => VarKind::S,
                    'e' => VarKind::E,
                    _ => return self.err("variable kind must be 's' or 'e'"),
                };
                Ok(Some(Var { kind, name }))
            }
            [DTerm::Sym(v), ..] if v.is_ident(VAR) => self.err("malformed variable"),
            _ => Ok(None),
        }
    }

    fn expr(&mut self, d: &[DTerm]) -> Result<Expr, DecodeError> {
        let mut items = Vec::new();
        for (i, t) in d.iter().enumerate() {
            self.path.push(i);
            let last = i + 1 == d.len();
            let item = match t {
                DTerm::Sym(s) if s.is_ident(CALL) || s.is_ident(VAR) => return self.err("bare marker symbol"),
                DTerm::Sym(s) => Item::Term(Term::Sym(s.clone())),
                DTerm::Paren(x) => {
                    if let Some(v) = self.var(x)? {
                        match v.kind {
                            VarKind::S => Item::Term(Term::SVar(v)),
                            VarKind::E if last => Item::EVar(v),
                            VarKind::E => return self.err("e-variable must end its sequence"),
                        }
                    } else {
                        match x.split_first() {
                            Some((DTerm::Sym(Symbol::Char(STAR)), rest)) => {
                                Item::Term(Term::Paren(Box::new(self.expr(rest)?)))
                            }
                            Some((DTerm::Sym(c), rest)) if c.is_ident(CALL) => {
                                if !last {
                                    return self.err("call must end its sequence");
                                }
                                let f = self.ident_at(rest.first(), "function name")?;
                                let arg = self.expr(&rest[1..])?;
                                Item::Call(f, vec![arg])
                            }
                            _ => return self.err("parenthesized term lacks a marker"),
                        }
                    }
                }
            };
            items.push(item);
            self.path.pop();
        }
        Ok(Expr::from_items(items))
    }

    fn pattern(&mut self, d: &[DTerm]) -> Result<Pattern, DecodeError> {
        let e = self.expr(d)?;
        match Pattern::from_expr(&e) {
            Some(p) => Ok(p),
            None => self.err("pattern contains a call"),
        }
    }

    fn rule(&mut self, t: &DTerm) -> Result<Rule, DecodeError> {
        let DTerm::Paren(x) = t else {
            return self.err("rule must be parenthesized");
        };
        match x.as_slice() {
            [DTerm::Paren(p), DTerm::Sym(Symbol::Char(EQ)), DTerm::Paren(r)] => {
                self.path.push(0);
                let lhs = self.pattern(p)?;
                self.path.pop();
                self.path.push(2);
                let rhs = self.expr(r)?;
                self.path.pop();
                Ok(Rule::new(vec![lhs], rhs))
            }
            _ => self.err("rule must have the shape ((pat) '=' (exp))"),
        }
    }

    fn defs(&mut self, d: &[DTerm]) -> Result<Program, DecodeError> {
        let mut prog = Program::default();
        for (i, t) in d.iter().enumerate() {
            self.path.push(i);
            let DTerm::Paren(x) = t else {
                return self.err("definition must be parenthesized");
            };
            let name = self.ident_at(x.first(), "function name")?;
            if prog.defs.contains_key(&name) {
                return self.err(format!("function {name} defined twice"));
            }
            let mut rules = Vec::new();
            for (j, r) in x.iter().enumerate().skip(1) {
                self.path.push(j);
                rules.push(self.rule(r)?);
                self.path.pop();
            }
            prog.defs.insert(name, FunDef { arity: 1, rules, span: Span::default() });
            self.path.pop();
        }
        Ok(prog)
    }
}

/// Decodes an encoded expression; `[]` decodes to `Nil`.
pub fn decode_expr(d: &[DTerm]) -> Result<Expr, DecodeError> {
    Decoder { path: Vec::new() }.expr(d)
}

pub fn decode_defs(d: &[DTerm]) -> Result<Program, DecodeError> {
    Decoder { path: Vec::new() }.defs(d)
}

/// Decodes `( defs )`. An empty datum is not a program.
pub fn decode_program(d: &[DTerm]) -> Result<Program, DecodeError> {
    let mut dec = Decoder { path: Vec::new() };
    match d {
        [DTerm::Paren(x)] if !x.is_empty() => {
            dec.path.push(0);
            dec.defs(x)
        }
        [] => dec.err("empty datum is not a program"),
        _ => dec.err("program must be one parenthesized list of definitions"),
    }
}
