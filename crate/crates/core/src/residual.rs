//! Reading a residual program off a completely folded process graph.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use crate::config::*;
use crate::engine::{Graph, Kind, NodeId};
use crate::lang::{self, Program, Rule};
use crate::transform;

#[derive(Debug, thiserror::Error)]
pub enum ResidualError {
    #[error("process graph is incomplete: node {0} is {1}")]
    IncompleteGraph(NodeId, &'static str),
    #[error("entry must be a single application, got {0}")]
    Entry(String),
    #[error("residual pattern is not expressible: {0}")]
    Pattern(String),
    #[error("residual program is invalid:\n{0}")]
    Invalid(String),
}

const SEQ: &str = "Seq";
const ABORT: &str = "Abort";

struct Builder<'g> {
    g: &'g Graph,
    /// Nodes that become residual functions regardless of where they occur.
    targets: BTreeSet<NodeId>,
    requested: BTreeSet<NodeId>,
    work: VecDeque<NodeId>,
    names: HashMap<NodeId, Arc<str>>,
    uses_seq: bool,
    uses_abort: bool,
}

/// One candidate rule; `None` marks a case where no rule of the source applies.
type Case = (Vec<PExpr>, Option<PExpr>);

impl<'g> Builder<'g> {
    fn name(&mut self, n: NodeId) -> Arc<str> {
        self.names.entry(n).or_insert_with(|| Arc::from(format!("F{n}"))).clone()
    }

    fn params(&self, n: NodeId) -> Vec<(ParamId, ParamKind)> {
        self.g.nodes[n].cfg.params()
    }

    fn request(&mut self, n: NodeId) -> Arc<str> {
        if self.requested.insert(n) {
            self.work.push_back(n);
        }
        self.name(n)
    }

    fn call(&mut self, n: NodeId, args: Vec<PExpr>) -> PExpr {
        let name = self.request(n);
        let args = if args.is_empty() { vec![PExpr::new()] } else { args };
        PExpr(vec![Seg::Call(Box::new(App { name, args, time: 0 }))])
    }

    fn param_args(&self, n: NodeId) -> Vec<PExpr> {
        self.params(n).into_iter().map(|(p, k)| PExpr(vec![par(p, k)])).collect()
    }

    /// Residual expression computing the value of `n`.
    fn code(&mut self, n: NodeId) -> Result<PExpr, ResidualError> {
        if self.targets.contains(&n) || matches!(self.g.nodes[n].kind, Kind::Driven { .. }) {
            let args = self.param_args(n);
            return Ok(self.call(n, args));
        }
        self.inline(n)
    }

    fn inline(&mut self, n: NodeId) -> Result<PExpr, ResidualError> {
        let node = &self.g.nodes[n];
        match &node.kind {
            Kind::Passive => Ok(node.cfg.tail.clone()),
            Kind::Wrap { ctx, child } => {
                let (ctx, child) = (ctx.clone(), *child);
                Ok(ctx.fill_bullet(&self.code(child)?))
            }
            Kind::Let { first, h, cont } => {
                let (first, h, cont) = (*first, *h, *cont);
                let v = self.code(first)?;
                let body = self.code(cont)?;
                let mut uses = 0;
                body.visit_params(&mut |p, _| uses += usize::from(p == h));
                if uses == 0 {
                    // The value is unused but its definedness still matters.
                    self.uses_seq = true;
                    return Ok(PExpr(vec![Seg::Call(Box::new(App {
                        name: Arc::from(SEQ),
                        args: vec![v, body],
                        time: 0,
                    }))]));
                }
                Ok(apply_subst(&body, &[(h, v)].into_iter().collect()))
            }
            Kind::Fold { target, theta, args } | Kind::Gen { child: target, theta, args } => {
                let (target, mut theta, args) = (*target, theta.clone(), args.clone());
                for (p, a) in args {
                    theta.insert(p, self.code(a)?);
                }
                let call_args = self.param_args(target).iter().map(|a| apply_subst(a, &theta)).collect();
                Ok(self.call(target, call_args))
            }
            Kind::Driven { .. } => {
                let args = self.param_args(n);
                Ok(self.call(n, args))
            }
            Kind::Open => Err(ResidualError::IncompleteGraph(n, "open")),
            Kind::Removed => Err(ResidualError::IncompleteGraph(n, "removed")),
        }
    }

    /// Rules of the function rooted at `n`, with `base` as the argument
    /// patterns before narrowing.
    fn cases(&mut self, n: NodeId, base: &[PExpr], acc: &Subst, out: &mut Vec<Case>) -> Result<(), ResidualError> {
        let Kind::Driven { branches } = &self.g.nodes[n].kind else {
            let rhs = self.inline(n)?;
            out.push((base.iter().map(|b| apply_subst(b, acc)).collect(), Some(apply_subst(&rhs, acc))));
            return Ok(());
        };
        for (sigma, child) in branches.clone() {
            let th = compose(acc, &sigma);
            match child {
                None => out.push((base.iter().map(|b| apply_subst(b, &th)).collect(), None)),
                Some(c) if matches!(self.g.nodes[c].kind, Kind::Driven { .. }) && !self.targets.contains(&c) => {
                    self.cases(c, base, &th, out)?;
                }
                Some(c) => {
                    let rhs = self.code(c)?;
                    out.push((base.iter().map(|b| apply_subst(b, &th)).collect(), Some(rhs)));
                }
            }
        }
        Ok(())
    }

    fn emit(&mut self, prog: &mut Program, name: &str, mut cases: Vec<Case>) -> Result<(), ResidualError> {
        // A case covered by an earlier one is unreachable.
        let mut live: Vec<Case> = Vec::with_capacity(cases.len());
        for c in cases.drain(..) {
            if !live.iter().any(|(l, _)| transform::match_args(l, &c.0).is_some()) {
                live.push(c);
            }
        }
        let cases = live;
        for (i, (lhs, rhs)) in cases.iter().enumerate() {
            let rhs = match rhs {
                Some(r) => r.clone(),
                None => {
                    let shadowed = cases[i + 1..]
                        .iter()
                        .any(|(l2, r2)| r2.is_some() && lhs.iter().zip(l2).all(|(a, b)| may_overlap(&a.0, &b.0)));
                    if !shadowed {
                        continue;
                    }
                    self.uses_abort = true;
                    PExpr(vec![Seg::Call(Box::new(App { name: Arc::from(ABORT), args: vec![PExpr::new()], time: 0 }))])
                }
            };
            let lhs = if lhs.is_empty() { vec![PExpr::new()] } else { lhs.clone() };
            let pats = lhs
                .iter()
                .map(|p| to_pattern(p).ok_or_else(|| ResidualError::Pattern(p.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            prog.add_rule(name, Rule::new(pats, to_surface(&rhs)));
        }
        if prog.get(name).is_none() {
            // Every case is stuck: a function without rules.
            let arity = cases.first().map_or(1, |(l, _)| l.len().max(1));
            prog.defs.insert(
                Arc::from(name),
                lang::FunDef { arity, rules: Vec::new(), span: lang::Span::default() },
            );
        }
        Ok(())
    }
}

fn par(p: ParamId, k: ParamKind) -> Seg {
    match k {
        ParamKind::S => Seg::SPar(p),
        ParamKind::E => Seg::EPar(p),
    }
}

/// Whether some data could match both patterns. Conservative: answers
/// `true` when unsure.
pub fn may_overlap(x: &[Seg], y: &[Seg]) -> bool {
    match (x.first(), y.first()) {
        (None, None) => true,
        (Some(Seg::EPar(_)), _) | (_, Some(Seg::EPar(_))) => true,
        (None, Some(_)) | (Some(_), None) => false,
        (Some(Seg::Sym(a)), Some(Seg::Sym(b))) => a == b && may_overlap(&x[1..], &y[1..]),
        (Some(Seg::Sym(_) | Seg::SPar(_)), Some(Seg::Sym(_) | Seg::SPar(_))) => may_overlap(&x[1..], &y[1..]),
        (Some(Seg::Paren(p)), Some(Seg::Paren(q))) => may_overlap(&p.0, &q.0) && may_overlap(&x[1..], &y[1..]),
        (Some(Seg::Sym(_) | Seg::SPar(_)), Some(Seg::Paren(_))) | (Some(Seg::Paren(_)), Some(Seg::Sym(_) | Seg::SPar(_))) => {
            false
        }
        _ => true,
    }
}

/// Builds the residual program. The entry function keeps the name and
/// argument patterns of the entry application.
pub fn build_residual(g: &Graph, entry: &PExpr) -> Result<Program, ResidualError> {
    let [Seg::Call(app)] = entry.0.as_slice() else {
        return Err(ResidualError::Entry(entry.to_string()));
    };
    if app.args.iter().any(PExpr::has_call) {
        return Err(ResidualError::Entry(entry.to_string()));
    }
    let mut targets = BTreeSet::new();
    for node in &g.nodes {
        match &node.kind {
            Kind::Fold { target, .. } => {
                targets.insert(*target);
            }
            Kind::Gen { child, .. } => {
                targets.insert(*child);
            }
            _ => {}
        }
    }
    let mut b = Builder {
        g,
        targets,
        requested: BTreeSet::new(),
        work: VecDeque::new(),
        names: HashMap::new(),
        uses_seq: false,
        uses_abort: false,
    };
    let mut prog = Program::default();
    let entry_name = app.name.to_string();

    let mut cases = Vec::new();
    if b.targets.contains(&g.root) {
        let rhs = b.code(g.root)?;
        cases.push((app.args.clone(), Some(rhs)));
    } else {
        b.cases(g.root, &app.args, &Subst::new(), &mut cases)?;
    }
    b.emit(&mut prog, &entry_name, cases)?;

    while let Some(n) = b.work.pop_front() {
        let name = b.name(n);
        if name.as_ref() == entry_name {
            return Err(ResidualError::Entry(format!("entry name {entry_name} collides with a residual function")));
        }
        let base = b.param_args(n);
        let mut cases = Vec::new();
        b.cases(n, &base, &Subst::new(), &mut cases)?;
        b.emit(&mut prog, &name, cases)?;
    }

    for (helper, used, src) in [
        (SEQ, b.uses_seq, "Seq { e.x, e.y => e.y; }"),
        (ABORT, b.uses_abort, "Abort { (Never) => []; }"),
    ] {
        if !used {
            continue;
        }
        if prog.get(helper).is_some() {
            return Err(ResidualError::Entry(format!("{helper} is reserved for residual helpers")));
        }
        let h = lang::parse_program_unchecked(src).expect("helper source parses");
        prog.defs.extend(h.defs);
    }

    let diags = lang::validate(&prog);
    if lang::has_errors(&diags) {
        let msg = diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n");
        return Err(ResidualError::Invalid(msg));
    }
    Ok(prog)
}
