//! Parameterized expressions, timed applications and configurations.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::lang::{self, Expr, Item, Pattern, Symbol, Term, Var, VarKind};

pub type ParamId = u32;

/// One segment of a `++`-normal sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Seg {
    Sym(Symbol),
    SPar(ParamId),
    EPar(ParamId),
    Paren(PExpr),
    Call(Box<App>),
    Bullet,
}

/// A flat segment sequence. Appends and `[]` never appear inside.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PExpr(pub Vec<Seg>);

/// A function application labeled with its creation time. Equality and
/// hashing ignore the label; compare `time` explicitly where it matters.
#[derive(Clone, Debug, PartialOrd, Ord)]
pub struct App {
    pub name: Arc<str>,
    pub args: Vec<PExpr>,
    pub time: u64,
}

impl PartialEq for App {
    fn eq(&self, o: &App) -> bool {
        self.name == o.name && self.args == o.args
    }
}

impl Eq for App {}

impl Hash for App {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.name.hash(h);
        self.args.hash(h);
    }
}

/// A stack of timed applications; entry 0 is the top. Every entry but the
/// top, and the tail when the stack is non-empty, holds one bullet.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub stack: Vec<App>,
    pub tail: PExpr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamKind {
    S,
    E,
}

/// Source of time labels and fresh parameter ids for one run.
#[derive(Clone, Debug, Default)]
pub struct Clock {
    next_time: u64,
    next_param: ParamId,
}

impl Clock {
    pub fn new() -> Clock {
        Clock::default()
    }

    pub fn starting_params_at(p: ParamId) -> Clock {
        Clock { next_time: 0, next_param: p }
    }

    pub fn tick(&mut self) -> u64 {
        let t = self.next_time;
        self.next_time += 1;
        t
    }

    pub fn fresh(&mut self) -> ParamId {
        let p = self.next_param;
        self.next_param += 1;
        p
    }

    pub fn fresh_e(&mut self) -> Seg {
        Seg::EPar(self.fresh())
    }

    pub fn fresh_s(&mut self) -> Seg {
        Seg::SPar(self.fresh())
    }

    pub fn now(&self) -> u64 {
        self.next_time
    }
}

impl PExpr {
    pub fn new() -> PExpr {
        PExpr(Vec::new())
    }

    pub fn bullet() -> PExpr {
        PExpr(vec![Seg::Bullet])
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_bullet(&self) -> bool {
        self.0.len() == 1 && self.0[0] == Seg::Bullet
    }

    pub fn has_call(&self) -> bool {
        self.0.iter().any(|s| match s {
            Seg::Call(_) => true,
            Seg::Paren(x) => x.has_call(),
            _ => false,
        })
    }

    /// Passive: no function application anywhere.
    pub fn is_passive(&self) -> bool {
        !self.has_call()
    }

    pub fn has_bullet(&self) -> bool {
        self.0.iter().any(|s| match s {
            Seg::Bullet => true,
            Seg::Paren(x) => x.has_bullet(),
            Seg::Call(a) => a.args.iter().any(PExpr::has_bullet),
            _ => false,
        })
    }

    /// Bullets outside function applications.
    pub fn upper_bullets(&self) -> usize {
        self.0
            .iter()
            .map(|s| match s {
                Seg::Bullet => 1,
                Seg::Paren(x) => x.upper_bullets(),
                _ => 0,
            })
            .sum()
    }

    pub fn is_ground(&self) -> bool {
        self.0.iter().all(|s| match s {
            Seg::Sym(_) => true,
            Seg::Paren(x) => x.is_ground(),
            _ => false,
        })
    }

    /// Replaces every bullet (outside applications) by `v`.
    pub fn fill_bullet(&self, v: &PExpr) -> PExpr {
        let mut out = Vec::with_capacity(self.0.len() + v.0.len());
        for s in &self.0 {
            match s {
                Seg::Bullet => out.extend(v.0.iter().cloned()),
                Seg::Paren(x) => out.push(Seg::Paren(x.fill_bullet(v))),
                other => out.push(other.clone()),
            }
        }
        PExpr(out)
    }

    pub fn visit_params(&self, f: &mut impl FnMut(ParamId, ParamKind)) {
        for s in &self.0 {
            match s {
                Seg::SPar(p) => f(*p, ParamKind::S),
                Seg::EPar(p) => f(*p, ParamKind::E),
                Seg::Paren(x) => x.visit_params(f),
                Seg::Call(a) => a.args.iter().for_each(|x| x.visit_params(f)),
                Seg::Sym(_) | Seg::Bullet => {}
            }
        }
    }

    pub fn params(&self) -> Vec<(ParamId, ParamKind)> {
        let mut out = Vec::new();
        collect_params(std::iter::once(self), &mut out);
        out
    }

    /// Total number of segments, counting nested ones.
    pub fn size(&self) -> usize {
        self.0
            .iter()
            .map(|s| match s {
                Seg::Paren(x) => 1 + x.size(),
                Seg::Call(a) => 1 + a.args.iter().map(PExpr::size).sum::<usize>(),
                _ => 1,
            })
            .sum()
    }
}

fn collect_params<'a>(it: impl Iterator<Item = &'a PExpr>, out: &mut Vec<(ParamId, ParamKind)>) {
    for e in it {
        e.visit_params(&mut |p, k| {
            if !out.iter().any(|(q, _)| *q == p) {
                out.push((p, k));
            }
        });
    }
}

impl From<Vec<Seg>> for PExpr {
    fn from(v: Vec<Seg>) -> PExpr {
        PExpr(v)
    }
}

impl Configuration {
    pub fn new(stack: Vec<App>, tail: PExpr) -> Configuration {
        Configuration { stack, tail }
    }

    pub fn passive(tail: PExpr) -> Configuration {
        Configuration { stack: Vec::new(), tail }
    }

    pub fn len(&self) -> usize {
        self.stack.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stack.is_empty()
    }

    pub fn top(&self) -> Option<&App> {
        self.stack.first()
    }

    fn exprs(&self) -> impl Iterator<Item = &PExpr> {
        self.stack.iter().flat_map(|a| a.args.iter()).chain(std::iter::once(&self.tail))
    }

    /// Parameters in order of first occurrence.
    pub fn params(&self) -> Vec<(ParamId, ParamKind)> {
        let mut out = Vec::new();
        collect_params(self.exprs(), &mut out);
        out
    }

    /// Rebuilds the raw expression with `v` in place of the top entry.
    pub fn plug(&self, v: PExpr) -> PExpr {
        let mut cur = v;
        for app in self.stack.iter().skip(1) {
            let filled = App {
                name: app.name.clone(),
                args: app.args.iter().map(|a| a.fill_bullet(&cur)).collect(),
                time: app.time,
            };
            cur = PExpr(vec![Seg::Call(Box::new(filled))]);
        }
        self.tail.fill_bullet(&cur)
    }

    /// The raw expression this configuration denotes.
    pub fn to_raw(&self) -> PExpr {
        match self.stack.first() {
            None => self.tail.clone(),
            Some(top) => self.plug(PExpr(vec![Seg::Call(Box::new(top.clone()))])),
        }
    }

    pub fn apply(&self, th: &Subst) -> Configuration {
        Configuration {
            stack: self.stack.iter().map(|a| a.apply(th)).collect(),
            tail: apply_subst(&self.tail, th),
        }
    }

    /// Checks the bullet and time-label invariants.
    pub fn check(&self) -> Result<(), String> {
        let mut times: Vec<u64> = self.stack.iter().map(|a| a.time).collect();
        times.sort_unstable();
        if times.windows(2).any(|w| w[0] == w[1]) {
            return Err(format!("repeated time label in {self}"));
        }
        for (i, a) in self.stack.iter().enumerate() {
            let n: usize = a.args.iter().map(PExpr::upper_bullets).sum();
            let want = usize::from(i > 0);
            if n != want {
                return Err(format!("entry {i} holds {n} bullets in {self}"));
            }
            for arg in &a.args {
                for s in &arg.0 {
                    if let Seg::Call(c) = s {
                        if c.args.iter().any(PExpr::has_bullet) {
                            return Err(format!("bullet under an application in {self}"));
                        }
                    }
                }
            }
        }
        let tb = self.tail.upper_bullets();
        if !self.stack.is_empty() && tb != 1 {
            return Err(format!("tail holds {tb} bullets in {self}"));
        }
        if self.stack.is_empty() && self.tail.has_bullet() {
            return Err(format!("bullet in passive configuration {self}"));
        }
        if self.tail.has_call() {
            return Err(format!("active tail in {self}"));
        }
        Ok(())
    }
}

impl App {
    pub fn apply(&self, th: &Subst) -> App {
        App { name: self.name.clone(), args: self.args.iter().map(|a| apply_subst(a, th)).collect(), time: self.time }
    }
}

/// Substitution on parameters. S-parameters map to one symbol-valued
/// segment.
pub type Subst = BTreeMap<ParamId, PExpr>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("s-parameter s.{0} bound to a non-symbol {1}")]
pub struct KindError(pub ParamId, pub String);

/// Checks that S-parameters are bound to single symbol segments. `kinds`
/// gives the kind of every parameter in the domain.
pub fn check_kinds(th: &Subst, kinds: &HashMap<ParamId, ParamKind>) -> Result<(), KindError> {
    for (p, v) in th {
        if kinds.get(p) == Some(&ParamKind::S) && !matches!(v.0.as_slice(), [Seg::Sym(_)] | [Seg::SPar(_)]) {
            return Err(KindError(*p, v.to_string()));
        }
    }
    Ok(())
}

pub fn apply_subst(e: &PExpr, th: &Subst) -> PExpr {
    if th.is_empty() {
        return e.clone();
    }
    let mut out = Vec::with_capacity(e.0.len());
    for s in &e.0 {
        match s {
            Seg::EPar(p) | Seg::SPar(p) => match th.get(p) {
                Some(v) => out.extend(v.0.iter().cloned()),
                None => out.push(s.clone()),
            },
            Seg::Paren(x) => out.push(Seg::Paren(apply_subst(x, th))),
            Seg::Call(a) => out.push(Seg::Call(Box::new(a.apply(th)))),
            Seg::Sym(_) | Seg::Bullet => out.push(s.clone()),
        }
    }
    PExpr(out)
}

/// `θ1` then `θ2`: applying the result equals applying θ1 and then θ2.
pub fn compose(th1: &Subst, th2: &Subst) -> Subst {
    let mut out: Subst = th1.iter().map(|(p, v)| (*p, apply_subst(v, th2))).collect();
    for (p, v) in th2 {
        out.entry(*p).or_insert_with(|| v.clone());
    }
    out
}

/// True when θ only renames parameters injectively, keeping kinds.
pub fn is_renaming(th: &Subst, kinds: &HashMap<ParamId, ParamKind>) -> bool {
    let mut seen = std::collections::HashSet::new();
    th.iter().all(|(p, v)| match (kinds.get(p), v.0.as_slice()) {
        (Some(ParamKind::E), [Seg::EPar(q)]) | (Some(ParamKind::S), [Seg::SPar(q)]) => seen.insert(*q),
        _ => false,
    })
}

// ---------------------------------------------------------------------------
// Conversion from the surface language.

/// Maps surface variables to parameters.
#[derive(Clone, Debug, Default)]
pub struct VarBinding {
    pub binds: Vec<(Var, PExpr)>,
}

impl VarBinding {
    pub fn get(&self, v: &Var) -> Option<&PExpr> {
        self.binds.iter().find(|(w, _)| w == v).map(|(_, e)| e)
    }

    pub fn insert(&mut self, v: Var, e: PExpr) {
        self.binds.push((v, e));
    }
}

/// Instantiates a rule right-hand side. New applications are labeled in
/// preorder, outer application first.
pub fn instantiate(e: &Expr, env: &VarBinding, clock: &mut Clock) -> PExpr {
    let mut out = Vec::new();
    inst_into(e, env, clock, &mut out);
    PExpr(out)
}

fn inst_into(e: &Expr, env: &VarBinding, clock: &mut Clock, out: &mut Vec<Seg>) {
    match e {
        Expr::Nil => {}
        Expr::Var(v) => out.extend(env.get(v).expect("rhs variable bound by lhs").0.iter().cloned()),
        Expr::Cons(t, rest) => {
            match t {
                Term::Sym(s) => out.push(Seg::Sym(s.clone())),
                Term::SVar(v) => out.extend(env.get(v).expect("rhs variable bound by lhs").0.iter().cloned()),
                Term::Paren(x) => {
                    let mut inner = Vec::new();
                    inst_into(x, env, clock, &mut inner);
                    out.push(Seg::Paren(PExpr(inner)));
                }
            }
            inst_into(rest, env, clock, out);
        }
        Expr::Call(f, args) => {
            let time = clock.tick();
            let args = args
                .iter()
                .map(|a| {
                    let mut v = Vec::new();
                    inst_into(a, env, clock, &mut v);
                    PExpr(v)
                })
                .collect();
            out.push(Seg::Call(Box::new(App { name: f.clone(), args, time })));
        }
        Expr::Append(a, b) => {
            inst_into(a, env, clock, out);
            inst_into(b, env, clock, out);
        }
    }
}

/// Converts an expression with free variables, binding each variable to a
/// fresh parameter on first occurrence.
pub fn from_surface(e: &Expr, binding: &mut VarBinding, clock: &mut Clock) -> PExpr {
    let mut vars = Vec::new();
    e.visit_vars(&mut |v| vars.push(v.clone()));
    for v in vars {
        if binding.get(&v).is_none() {
            let seg = match v.kind {
                VarKind::S => clock.fresh_s(),
                VarKind::E => clock.fresh_e(),
            };
            binding.insert(v, PExpr(vec![seg]));
        }
    }
    instantiate(e, binding, clock)
}

pub fn param_var(p: ParamId, k: ParamKind) -> Var {
    match k {
        ParamKind::S => Var::s(&p.to_string()),
        ParamKind::E => Var::e(&p.to_string()),
    }
}

/// Converts to a surface expression; parameters become variables named by
/// their ids. Bullets are not representable.
pub fn to_surface(e: &PExpr) -> Expr {
    Expr::from_items(e.0.iter().map(seg_item).collect())
}

fn seg_item(s: &Seg) -> Item {
    match s {
        Seg::Sym(x) => Item::Term(Term::Sym(x.clone())),
        Seg::SPar(p) => Item::Term(Term::SVar(param_var(*p, ParamKind::S))),
        Seg::EPar(p) => Item::EVar(param_var(*p, ParamKind::E)),
        Seg::Paren(x) => Item::Term(Term::Paren(Box::new(to_surface(x)))),
        Seg::Call(a) => Item::Call(a.name.clone(), a.args.iter().map(to_surface).collect()),
        Seg::Bullet => panic!("bullet has no surface form"),
    }
}

pub fn to_pattern(e: &PExpr) -> Option<Pattern> {
    Pattern::from_expr(&to_surface(e))
}

pub fn from_data(d: &[crate::eval::DTerm]) -> PExpr {
    use crate::eval::DTerm;
    PExpr(
        d.iter()
            .map(|t| match t {
                DTerm::Sym(s) => Seg::Sym(s.clone()),
                DTerm::Paren(x) => Seg::Paren(from_data(x)),
            })
            .collect(),
    )
}

pub fn to_data(e: &PExpr) -> Option<crate::eval::Data> {
    use crate::eval::DTerm;
    e.0.iter()
        .map(|s| match s {
            Seg::Sym(x) => Some(DTerm::Sym(x.clone())),
            Seg::Paren(x) => Some(DTerm::paren(to_data(x)?)),
            _ => None,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Decomposition into a stack.

/// Result of splitting a raw expression into a configuration.
#[derive(Clone, Debug)]
pub enum Decomposed {
    Passive(PExpr),
    /// The leftmost application chain; `ctx` is the raw expression with the
    /// outermost chain application replaced by a bullet.
    Stack { stack: Vec<App>, ctx: PExpr },
}

/// Replaces the leftmost application outside other applications by a
/// bullet.
fn extract_leftmost(e: &PExpr) -> Option<(PExpr, App)> {
    for (i, s) in e.0.iter().enumerate() {
        let hit = match s {
            Seg::Call(a) => Some((Seg::Bullet, (**a).clone())),
            Seg::Paren(x) => extract_leftmost(x).map(|(x2, a)| (Seg::Paren(x2), a)),
            _ => None,
        };
        if let Some((seg, app)) = hit {
            let mut v = e.0.clone();
            v[i] = seg;
            return Some((PExpr(v), app));
        }
    }
    None
}

pub fn decompose(raw: &PExpr) -> Decomposed {
    let Some((ctx, mut app)) = extract_leftmost(raw) else {
        return Decomposed::Passive(raw.clone());
    };
    let mut rev = Vec::new();
    'outer: loop {
        for i in 0..app.args.len() {
            if let Some((arg, inner)) = extract_leftmost(&app.args[i]) {
                app.args[i] = arg;
                rev.push(std::mem::replace(&mut app, inner));
                continue 'outer;
            }
        }
        break;
    }
    rev.push(app);
    rev.reverse();
    Decomposed::Stack { stack: rev, ctx }
}

// ---------------------------------------------------------------------------
// Printing.

/// Printing options: time labels and canonical parameter renaming.
#[derive(Clone, Copy, Debug, Default)]
pub struct PrintOpts {
    pub labels: bool,
}

pub struct Printer {
    opts: PrintOpts,
    rename: Option<HashMap<ParamId, u32>>,
}

impl Printer {
    pub fn new(opts: PrintOpts) -> Printer {
        Printer { opts, rename: None }
    }

    /// Parameters are renumbered by first occurrence; labels are dropped.
    pub fn canonical() -> Printer {
        Printer { opts: PrintOpts { labels: false }, rename: Some(HashMap::new()) }
    }

    fn param(&mut self, p: ParamId) -> u32 {
        match &mut self.rename {
            None => p,
            Some(m) => {
                let n = m.len() as u32;
                *m.entry(p).or_insert(n)
            }
        }
    }

    pub fn pexpr(&mut self, e: &PExpr, out: &mut String) {
        if e.0.is_empty() {
            out.push_str("[]");
            return;
        }
        for (i, s) in e.0.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            self.seg(s, out);
        }
    }

    fn seg(&mut self, s: &Seg, out: &mut String) {
        match s {
            Seg::Sym(x) => lang::print_symbol(x, out),
            Seg::SPar(p) => {
                let n = self.param(*p);
                write!(out, "s.{n}").unwrap();
            }
            Seg::EPar(p) => {
                let n = self.param(*p);
                write!(out, "e.{n}").unwrap();
            }
            Seg::Bullet => out.push('•'),
            Seg::Paren(x) => {
                out.push('(');
                if !x.0.is_empty() {
                    self.pexpr(x, out);
                }
                out.push(')');
            }
            Seg::Call(a) => self.app(a, out),
        }
    }

    pub fn app(&mut self, a: &App, out: &mut String) {
        out.push_str(&a.name);
        if self.opts.labels {
            write!(out, "#{}", a.time).unwrap();
        }
        out.push('(');
        for (i, x) in a.args.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            self.pexpr(x, out);
        }
        out.push(')');
    }

    pub fn config(&mut self, c: &Configuration, out: &mut String) {
        for a in &c.stack {
            self.app(a, out);
            out.push_str(", ");
        }
        self.pexpr(&c.tail, out);
    }
}

impl fmt::Display for PExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        Printer::new(PrintOpts { labels: true }).pexpr(self, &mut s);
        f.write_str(&s)
    }
}

impl fmt::Display for App {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        Printer::new(PrintOpts { labels: true }).app(self, &mut s);
        f.write_str(&s)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        Printer::new(PrintOpts { labels: true }).config(self, &mut s);
        f.write_str(&s)
    }
}

/// Key identifying a configuration up to parameter renaming and labels.
pub fn canonical_key(c: &Configuration) -> String {
    let mut s = String::new();
    Printer::canonical().config(c, &mut s);
    s
}

pub fn kinds_of(c: &Configuration) -> HashMap<ParamId, ParamKind> {
    c.params().into_iter().collect()
}
