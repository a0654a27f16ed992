//! Reference call-by-value evaluator over ground data.

use std::sync::Arc;

use crate::lang::*;

/// A ground term: a symbol or a parenthesized sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DTerm {
    Sym(Symbol),
    Paren(Arc<Vec<DTerm>>),
}

/// Ground data: a flat sequence of ground terms (the `++`-free form).
pub type Data = Vec<DTerm>;

impl DTerm {
    pub fn paren(d: Data) -> DTerm {
        DTerm::Paren(Arc::new(d))
    }

    pub fn ident(s: &str) -> DTerm {
        DTerm::Sym(Symbol::ident(s))
    }

    pub fn ch(c: char) -> DTerm {
        DTerm::Sym(Symbol::Char(c))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalOutcome {
    Value(Data),
    Undefined,
}

impl EvalOutcome {
    pub fn value(&self) -> Option<&Data> {
        match self {
            EvalOutcome::Value(d) => Some(d),
            EvalOutcome::Undefined => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("step budget exhausted")]
    FuelExhausted,
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("{0} expects {1} arguments, got {2}")]
    Arity(String, usize, usize),
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("repeated e-variable {0} is not supported in this position")]
    Unsupported(String),
}

pub const DEFAULT_FUEL: u64 = 10_000_000;

/// Variable bindings produced by ground matching. An s-variable is bound
/// to a one-symbol sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Env {
    binds: Vec<(Var, Data)>,
}

impl Env {
    pub fn get(&self, v: &Var) -> Option<&Data> {
        self.binds.iter().rev().find(|(w, _)| w == v).map(|(_, d)| d)
    }

    pub fn bind(&mut self, v: Var, d: Data) {
        self.binds.push((v, d));
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Var, Data)> {
        self.binds.iter()
    }

    pub fn len(&self) -> usize {
        self.binds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.binds.is_empty()
    }
}

/// Matches `pat` against `d`, extending `env`. Repeated variables must be
/// bound to equal values.
pub fn match_ground(pat: &Pattern, d: &[DTerm], env: Env) -> Option<Env> {
    let mut env = env;
    if match_into(pat, d, &mut env) {
        Some(env)
    } else {
        None
    }
}

fn match_into(pat: &Pattern, d: &[DTerm], env: &mut Env) -> bool {
    match pat {
        Pattern::Nil => d.is_empty(),
        Pattern::Var(v) => match env.get(v) {
            Some(b) => b.as_slice() == d,
            None => {
                env.bind(v.clone(), d.to_vec());
                true
            }
        },
        Pattern::SymCons(s, rest) => match d.first() {
            Some(DTerm::Sym(x)) if x == s => match_into(rest, &d[1..], env),
            _ => false,
        },
        Pattern::SVarCons(v, rest) => match d.first() {
            Some(t @ DTerm::Sym(_)) => {
                match env.get(v) {
                    Some(b) => {
                        if b.len() != 1 || &b[0] != t {
                            return false;
                        }
                    }
                    None => env.bind(v.clone(), vec![t.clone()]),
                }
                match_into(rest, &d[1..], env)
            }
            _ => false,
        },
        Pattern::ParenCons(inner, rest) => match d.first() {
            Some(DTerm::Paren(x)) => match_into(inner, x, env) && match_into(rest, &d[1..], env),
            _ => false,
        },
    }
}

enum Stop {
    Undefined,
    Error(EvalError),
}

impl From<EvalError> for Stop {
    fn from(e: EvalError) -> Stop {
        Stop::Error(e)
    }
}

struct Machine<'p> {
    prog: &'p Program,
    fuel: u64,
}

impl Machine<'_> {
    fn eval(&mut self, e: &Expr, env: &Env, out: &mut Data) -> Result<(), Stop> {
        match e {
            Expr::Nil => Ok(()),
            Expr::Var(v) => {
                let b = env.get(v).ok_or_else(|| EvalError::Unbound(v.to_string()))?;
                out.extend_from_slice(b);
                Ok(())
            }
            Expr::Cons(t, rest) => {
                match t {
                    Term::Sym(s) => out.push(DTerm::Sym(s.clone())),
                    Term::SVar(v) => {
                        let b = env.get(v).ok_or_else(|| EvalError::Unbound(v.to_string()))?;
                        out.extend_from_slice(b);
                    }
                    Term::Paren(inner) => {
                        let mut d = Vec::new();
                        self.eval(inner, env, &mut d)?;
                        out.push(DTerm::paren(d));
                    }
                }
                self.eval(rest, env, out)
            }
            Expr::Append(a, b) => {
                self.eval(a, env, out)?;
                self.eval(b, env, out)
            }
            Expr::Call(f, args) => {
                let vals = self.eval_args(args, env)?;
                let r = self.apply(f, vals)?;
                out.extend(r);
                Ok(())
            }
        }
    }

    fn eval_args(&mut self, args: &[Expr], env: &Env) -> Result<Vec<Data>, Stop> {
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            let mut d = Vec::new();
            self.eval(a, env, &mut d)?;
            vals.push(d);
        }
        Ok(vals)
    }

    /// Applies `f`; a call in tail position of the fired rule is iterated
    /// in place rather than recursed into.
    fn apply(&mut self, f: &str, args: Vec<Data>) -> Result<Data, Stop> {
        let mut name: Arc<str> = Arc::from(f);
        let mut args = args;
        loop {
            let def = self.prog.get(&name).ok_or_else(|| EvalError::UnknownFunction(name.to_string()))?;
            if def.arity != args.len() {
                return Err(EvalError::Arity(name.to_string(), def.arity, args.len()).into());
            }
            if self.fuel == 0 {
                return Err(EvalError::FuelExhausted.into());
            }
            self.fuel -= 1;
            let mut fired = None;
            for rule in &def.rules {
                let mut env = Env::default();
                if rule.lhs.iter().zip(&args).all(|(p, a)| match_into(p, a, &mut env)) {
                    fired = Some((rule, env));
                    break;
                }
            }
            let Some((rule, env)) = fired else {
                return Err(Stop::Undefined);
            };
            if let Expr::Call(g, gargs) = &rule.rhs {
                args = self.eval_args(gargs, &env)?;
                name = g.clone();
                continue;
            }
            let mut out = Vec::new();
            self.eval(&rule.rhs, &env, &mut out)?;
            return Ok(out);
        }
    }
}

/// Evaluates `fname(args)` with the given step budget.
pub fn eval_call(p: &Program, fname: &str, args: &[Data], fuel: u64) -> Result<EvalOutcome, EvalError> {
    let mut m = Machine { prog: p, fuel };
    match m.apply(fname, args.to_vec()) {
        Ok(d) => Ok(EvalOutcome::Value(d)),
        Err(Stop::Undefined) => Ok(EvalOutcome::Undefined),
        Err(Stop::Error(e)) => Err(e),
    }
}

/// Evaluates a closed expression (calls allowed, no variables).
pub fn eval_expr(p: &Program, e: &Expr, fuel: u64) -> Result<EvalOutcome, EvalError> {
    let mut m = Machine { prog: p, fuel };
    let mut out = Vec::new();
    match m.eval(e, &Env::default(), &mut out) {
        Ok(()) => Ok(EvalOutcome::Value(out)),
        Err(Stop::Undefined) => Ok(EvalOutcome::Undefined),
        Err(Stop::Error(e)) => Err(e),
    }
}

pub fn data_to_expr(d: &[DTerm]) -> Expr {
    d.iter().rev().fold(Expr::Nil, |acc, t| {
        let term = match t {
            DTerm::Sym(s) => Term::Sym(s.clone()),
            DTerm::Paren(x) => Term::Paren(Box::new(data_to_expr(x))),
        };
        Expr::Cons(term, Box::new(acc))
    })
}

/// Converts a variable-free, call-free expression to data.
pub fn expr_to_data(e: &Expr) -> Option<Data> {
    let mut out = Vec::new();
    for it in e.items() {
        match it {
            Item::Term(Term::Sym(s)) => out.push(DTerm::Sym(s)),
            Item::Term(Term::Paren(x)) => out.push(DTerm::paren(expr_to_data(&x)?)),
            _ => return None,
        }
    }
    Some(out)
}

pub fn print_data(d: &[DTerm]) -> String {
    print_expr(&data_to_expr(d))
}

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error(transparent)]
    Syntax(#[from] LangError),
    #[error("data literal may not contain variables or calls")]
    NotGround,
}

/// Parses a comma-separated list of ground data literals.
pub fn parse_data_args(text: &str) -> Result<Vec<Data>, DataError> {
    parse_args(text)?.iter().map(|e| expr_to_data(e).ok_or(DataError::NotGround)).collect()
}

pub fn parse_data(text: &str) -> Result<Data, DataError> {
    expr_to_data(&parse_expr(text)?).ok_or(DataError::NotGround)
}

/// Runs `f` on a thread with a large stack; the evaluator and the engine
/// recurse along the structure of data and process trees.
pub fn with_big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new()
        .stack_size(1 << 30)
        .spawn(f)
        .expect("spawn worker thread")
        .join()
        .unwrap_or_else(|e| std::panic::resume_unwind(e))
}
