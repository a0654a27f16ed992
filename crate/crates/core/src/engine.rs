//! The unfold-fold loop over a process graph.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::json;

use crate::config::*;
use crate::driving::{self, DriveError, Outcome, StepResult};
use crate::lang::{Expr, Program};
use crate::relations::{self, Embedder, Restriction, TurchinWitness, WhistleDecision};
use crate::transform::{self, TransformError};

pub type NodeId = usize;

#[derive(Clone, Debug)]
pub enum Kind {
    /// Waiting to be processed. The tail is a bullet.
    Open,
    /// Unfolded one step; `None` marks a branch where no rule applies.
    Driven { branches: Vec<(Subst, Option<NodeId>)> },
    Passive,
    /// A passive context around the child's value.
    Wrap { ctx: PExpr, child: NodeId },
    /// `cont` with `e.h` bound to the value of `first`.
    Let { first: NodeId, h: ParamId, cont: NodeId },
    /// `target·θ`. Bindings whose images contain applications are computed
    /// by the `args` nodes.
    Fold { target: NodeId, theta: Subst, args: Vec<(ParamId, NodeId)> },
    /// `child·θ`, replacing the subtree of a generalized configuration.
    Gen { child: NodeId, theta: Subst, args: Vec<(ParamId, NodeId)> },
    Removed,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub cfg: Configuration,
    pub kind: Kind,
    pub parent: Option<NodeId>,
    pub depth: usize,
    skips: u32,
}

impl Node {
    pub fn children(&self) -> Vec<NodeId> {
        match &self.kind {
            Kind::Driven { branches } => branches.iter().filter_map(|(_, c)| *c).collect(),
            Kind::Wrap { child, .. } => vec![*child],
            Kind::Let { first, cont, .. } => vec![*first, *cont],
            Kind::Fold { args, .. } => args.iter().map(|(_, n)| *n).collect(),
            Kind::Gen { child, args, .. } => std::iter::once(*child).chain(args.iter().map(|(_, n)| *n)).collect(),
            Kind::Open | Kind::Passive | Kind::Removed => Vec::new(),
        }
    }

    pub fn is_live(&self) -> bool {
        !matches!(self.kind, Kind::Removed)
    }
}

#[derive(Clone, Debug)]
pub struct Graph {
    pub nodes: Vec<Node>,
    pub root: NodeId,
}

#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_nodes: usize,
    pub max_depth: usize,
    pub time_budget: Duration,
    /// Transitive steps taken along one chain before it is driven normally.
    pub transitive_cap: u32,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits { max_nodes: 200_000, max_depth: 5_000, time_budget: Duration::from_secs(120), transitive_cap: 100_000 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub enum TraceLevel {
    Off,
    /// Whistle, fold, generalization and split events.
    #[default]
    Events,
    /// Also every driving step.
    Full,
}

impl TraceLevel {
    /// Reads `SCPV_TRACE_LEVEL` (`off`, `events`, `full` or 0-2).
    pub fn from_env() -> TraceLevel {
        match std::env::var("SCPV_TRACE_LEVEL").as_deref() {
            Ok("0" | "off") => TraceLevel::Off,
            Ok("2" | "full") => TraceLevel::Full,
            _ => TraceLevel::Events,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub limits: Limits,
    pub restriction: Restriction,
    pub trace_level: TraceLevel,
    /// Fold onto any processed node equal up to renaming, not only ancestors.
    pub global_folds: bool,
    /// Also fold onto any processed node the configuration is an instance of.
    pub instance_folds: bool,
}

impl Default for Options {
    fn default() -> Options {
        Options {
            limits: Limits::default(),
            restriction: Restriction::default(),
            trace_level: TraceLevel::default(),
            global_folds: true,
            instance_folds: true,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Stats {
    pub nodes: usize,
    pub driven: usize,
    pub transitive_skips: u64,
    pub whistle_acts: usize,
    pub folds: usize,
    pub renaming_folds: usize,
    pub instance_folds: usize,
    pub generalizations: usize,
    pub splits: usize,
    pub reopened: usize,
    pub msg_checks: usize,
    pub msg_ok: usize,
    pub fold_checks: usize,
    pub fold_ok: usize,
    /// Fold or generalization between configurations sharing a timed
    /// `Matching` application.
    pub corollary_violations: usize,
    /// Whistle acting on `Match`-headed configurations of one big-step whose
    /// constant patterns are strictly embedded.
    pub prop1_violations: usize,
    pub prop1_checked: usize,
    pub first_generalization: Option<String>,
    pub first_generalization_shape: Option<bool>,
    pub elapsed_ms: u128,
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("budget exceeded: {what}")]
    Budget { what: String, stats: Box<Stats> },
    #[error(transparent)]
    Drive(#[from] DriveError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("bad entry: {0}")]
    Entry(String),
}

/// One supercompilation run.
pub struct Engine<'p> {
    prog: &'p Program,
    opts: Options,
    clock: Clock,
    nodes: Vec<Node>,
    stack: Vec<NodeId>,
    keys: HashMap<String, NodeId>,
    /// Driven nodes by the function names of their stacks.
    shapes: HashMap<Vec<Arc<str>>, Vec<NodeId>>,
    fold_sources: HashMap<NodeId, Vec<NodeId>>,
    emb: Embedder,
    stats: Stats,
    started: Instant,
    trace: Option<Box<dyn Write + Send>>,
}

impl<'p> Engine<'p> {
    pub fn new(prog: &'p Program, opts: Options) -> Engine<'p> {
        let emb = Embedder::new(opts.restriction);
        Engine {
            prog,
            opts,
            clock: Clock::new(),
            nodes: Vec::new(),
            stack: Vec::new(),
            keys: HashMap::new(),
            shapes: HashMap::new(),
            fold_sources: HashMap::new(),
            emb,
            stats: Stats::default(),
            started: Instant::now(),
            trace: None,
        }
    }

    pub fn with_trace(mut self, w: Box<dyn Write + Send>) -> Self {
        self.trace = Some(w);
        self
    }

    pub fn clock_mut(&mut self) -> &mut Clock {
        &mut self.clock
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    fn emit(&mut self, level: TraceLevel, ev: serde_json::Value) {
        if self.opts.trace_level < level || level == TraceLevel::Off {
            return;
        }
        if let Some(w) = self.trace.as_mut() {
            let mut obj = ev;
            obj["v"] = json!(1);
            if writeln!(w, "{obj}").is_err() {
                log::warn!("trace write failed; tracing disabled");
                self.trace = None;
            }
        }
    }

    /// Supercompiles the raw entry expression.
    pub fn run(&mut self, entry: &PExpr) -> Result<Graph, EngineError> {
        self.started = Instant::now();
        let root = self.new_node(Configuration::passive(PExpr::new()), None)?;
        self.fill(root, entry.clone())?;
        while let Some(n) = self.stack.pop() {
            if !matches!(self.nodes[n].kind, Kind::Open) {
                continue;
            }
            self.check_time()?;
            self.process(n)?;
        }
        self.stats.elapsed_ms = self.started.elapsed().as_millis();
        self.stats.nodes = self.nodes.iter().filter(|n| n.is_live()).count();
        if let Some(w) = self.trace.as_mut() {
            let _ = w.flush();
        }
        Ok(Graph { nodes: std::mem::take(&mut self.nodes), root })
    }

    fn budget(&self, what: String) -> EngineError {
        let mut s = self.stats.clone();
        s.elapsed_ms = self.started.elapsed().as_millis();
        s.nodes = self.nodes.len();
        EngineError::Budget { what, stats: Box::new(s) }
    }

    fn check_time(&self) -> Result<(), EngineError> {
        if self.started.elapsed() > self.opts.limits.time_budget {
            return Err(self.budget(format!("time budget of {:?}", self.opts.limits.time_budget)));
        }
        Ok(())
    }

    fn new_node(&mut self, cfg: Configuration, parent: Option<NodeId>) -> Result<NodeId, EngineError> {
        if self.nodes.len() >= self.opts.limits.max_nodes {
            return Err(self.budget(format!("{} nodes", self.opts.limits.max_nodes)));
        }
        let (depth, skips) = match parent {
            Some(p) => (self.nodes[p].depth + 1, 0),
            None => (0, 0),
        };
        if depth > self.opts.limits.max_depth {
            return Err(self.budget(format!("depth {}", self.opts.limits.max_depth)));
        }
        debug_assert!(matches!(cfg.check(), Ok(())) || cfg.tail.has_call(), "{}", cfg);
        self.nodes.push(Node { cfg, kind: Kind::Open, parent, depth, skips });
        Ok(self.nodes.len() - 1)
    }

    /// Turns `n` into the node for the raw expression: a passive value, an
    /// open stack, a stack under a passive context, or a let when the
    /// context still holds applications.
    fn fill(&mut self, n: NodeId, raw: PExpr) -> Result<(), EngineError> {
        match decompose(&raw) {
            Decomposed::Passive(e) => {
                self.nodes[n].cfg = Configuration::passive(e);
                self.nodes[n].kind = Kind::Passive;
            }
            Decomposed::Stack { stack, ctx } => {
                let open = Configuration { stack, tail: PExpr::bullet() };
                if ctx.is_bullet() {
                    self.nodes[n].cfg = open;
                    self.nodes[n].kind = Kind::Open;
                    self.stack.push(n);
                } else if ctx.is_passive() {
                    self.nodes[n].cfg = Configuration { stack: open.stack.clone(), tail: ctx.clone() };
                    let child = self.new_node(open, Some(n))?;
                    self.nodes[child].skips = self.nodes[n].skips;
                    self.nodes[n].kind = Kind::Wrap { ctx, child };
                    self.stack.push(child);
                } else {
                    let h = self.clock.fresh();
                    self.nodes[n].cfg = Configuration { stack: open.stack.clone(), tail: ctx.clone() };
                    let first = self.new_node(open, Some(n))?;
                    self.nodes[first].skips = self.nodes[n].skips;
                    let cont = self.new_node(Configuration::passive(PExpr::new()), Some(n))?;
                    self.nodes[n].kind = Kind::Let { first, h, cont };
                    // The continuation runs after the subtree of `first`.
                    self.fill(cont, ctx.fill_bullet(&PExpr(vec![Seg::EPar(h)])))?;
                    self.stack.push(first);
                }
            }
        }
        Ok(())
    }

    fn process(&mut self, n: NodeId) -> Result<(), EngineError> {
        let mut stepped = None;
        while matches!(self.nodes[n].kind, Kind::Open) {
            let cfg = self.nodes[n].cfg.clone();
            let r = driving::drive(&cfg, self.prog, &mut self.clock)?;
            let transitive = self.nodes[n].skips < self.opts.limits.transitive_cap
                && driving::is_transitive_result(&r)
                && matches!(&r, StepResult::Branches(bs) if matches!(bs[0].outcome, Outcome::Next { .. }));
            if !transitive {
                stepped = Some(r);
                break;
            }
            let StepResult::Branches(mut bs) = r else { unreachable!() };
            let Outcome::Next { raw, .. } = bs.remove(0).outcome else { unreachable!() };
            self.nodes[n].skips += 1;
            self.stats.transitive_skips += 1;
            if self.opts.trace_level >= TraceLevel::Full {
                self.emit(TraceLevel::Full, json!({"ev": "TransitiveSkip", "node": n, "cfg": cfg.to_string()}));
            }
            self.fill(n, raw)?;
            if matches!(self.nodes[n].kind, Kind::Open) {
                // `fill` scheduled it again; it is being handled right here.
                if self.stack.last() == Some(&n) {
                    self.stack.pop();
                }
            } else {
                return Ok(());
            }
            self.check_time()?;
        }
        let Some(step) = stepped else { return Ok(()) };
        let cfg = self.nodes[n].cfg.clone();

        if self.opts.global_folds {
            let key = canonical_key(&cfg);
            if let Some(&t) = self.keys.get(&key) {
                if t != n && self.nodes[t].is_live() {
                    if let Some(th) = transform::fold_instance(&self.nodes[t].cfg, &cfg) {
                        self.stats.renaming_folds += 1;
                        return self.make_fold(n, t, th);
                    }
                }
            }
        }

        let path = self.driven_path(n);
        let decision = relations::whistle(path.iter().map(|&a| (a, &self.nodes[a].cfg)), &cfg, &mut self.emb);
        let acted_on = match &decision {
            WhistleDecision::Act { ancestor, .. } => Some(*ancestor),
            WhistleDecision::Continue => None,
        };
        self.check_prop1(&path, &cfg, acted_on);
        if let WhistleDecision::Act { ancestor, witness } = decision {
            // Folding by a previous configuration comes before splitting
            // and generalization.
            if self.opts.instance_folds {
                if let Some((t, th)) = self.instance_target(&path, &cfg) {
                    self.stats.instance_folds += 1;
                    return self.make_fold(n, t, th);
                }
            }
            return self.act(n, ancestor, witness);
        }
        self.drive_node(n, step)
    }

    fn drive_node(&mut self, n: NodeId, step: StepResult) -> Result<(), EngineError> {
        let StepResult::Branches(bs) = step else {
            unreachable!("open nodes have a non-empty stack")
        };
        self.stats.driven += 1;
        if self.opts.trace_level >= TraceLevel::Full {
            let cfg = self.nodes[n].cfg.to_string();
            self.emit(TraceLevel::Full, json!({"ev": "Drive", "node": n, "cfg": cfg, "branches": bs.len()}));
        }
        let mut branches = Vec::with_capacity(bs.len());
        let mut created = Vec::new();
        for b in bs {
            match b.outcome {
                Outcome::Next { raw, .. } => {
                    let c = self.new_node(Configuration::passive(PExpr::new()), Some(n))?;
                    created.push((c, raw));
                    branches.push((b.contraction, Some(c)));
                }
                Outcome::Stuck => branches.push((b.contraction, None)),
            }
        }
        self.nodes[n].kind = Kind::Driven { branches };
        let key = canonical_key(&self.nodes[n].cfg);
        self.keys.entry(key).or_insert(n);
        self.shapes.entry(shape(&self.nodes[n].cfg)).or_default().push(n);
        // Reverse order so the first branch is taken first.
        for (c, raw) in created.into_iter().rev() {
            self.fill(c, raw)?;
        }
        Ok(())
    }

    /// A processed configuration that `c` is an instance of, trying the
    /// ancestors nearest first. Pairs inside one interpreter big-step are
    /// skipped.
    fn instance_target(&self, path: &[NodeId], c: &Configuration) -> Option<(NodeId, Subst)> {
        let cands = self.shapes.get(&shape(c))?;
        let on_path: Vec<NodeId> = path.iter().rev().copied().filter(|a| cands.contains(a)).collect();
        for &t in on_path.iter().chain(cands.iter().filter(|t| !on_path.contains(t))) {
            let tc = &self.nodes[t].cfg;
            if !matches!(self.nodes[t].kind, Kind::Driven { .. }) || share_timed(tc, c, "Matching") {
                continue;
            }
            if let Some(th) = transform::fold_instance(tc, c) {
                return Some((t, th));
            }
        }
        None
    }

    /// Driven ancestors of `n`, oldest first.
    fn driven_path(&self, n: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut p = self.nodes[n].parent;
        while let Some(x) = p {
            if matches!(self.nodes[x].kind, Kind::Driven { .. }) {
                out.push(x);
            }
            p = self.nodes[x].parent;
        }
        out.reverse();
        out
    }

    fn act(&mut self, n: NodeId, a: NodeId, w: TurchinWitness) -> Result<(), EngineError> {
        self.stats.whistle_acts += 1;
        let ca = self.nodes[a].cfg.clone();
        let c = self.nodes[n].cfg.clone();
        self.emit(
            TraceLevel::Events,
            json!({"ev": "WhistleAct", "node": n, "ancestor": a, "l": w.l, "delta": w.delta,
                   "implicit_context": w.implicit_context, "cfg": c.to_string(), "ancestor_cfg": ca.to_string()}),
        );
        if !w.implicit_context {
            return self.split_node(a, w.l);
        }
        let k = ca.len();
        if c.len() == k {
            return match transform::fold_instance(&ca, &c) {
                Some(th) => self.make_fold(n, a, th),
                None => self.generalize(a, n, &ca, &c),
            };
        }
        // The top `k` entries of the current configuration are compared as a
        // separate task; the rest continues with its result.
        let h = self.clock.fresh();
        let (p2, rest) = transform::split_task(&c, k + 1, h)?;
        match transform::fold_instance(&ca, &p2) {
            Some(th) => {
                let first = self.new_node(p2, Some(n))?;
                let cont = self.new_node(rest, Some(n))?;
                self.nodes[n].kind = Kind::Let { first, h, cont };
                self.stats.splits += 1;
                self.emit(TraceLevel::Events, json!({"ev": "TaskSplit", "node": n, "l": k + 1, "h": h}));
                self.stack.push(cont);
                self.make_fold(first, a, th)
            }
            None => self.generalize(a, n, &ca, &p2),
        }
    }

    /// Replaces the ancestor by the most specific generalization of it and
    /// `c2`, or folds `n` when that generalization is only a renaming.
    fn generalize(&mut self, a: NodeId, n: NodeId, ca: &Configuration, c2: &Configuration) -> Result<(), EngineError> {
        let g = match transform::msg(ca, c2, &mut self.clock) {
            Ok(g) => g,
            Err(e) => {
                log::warn!("generalization refused ({e}); splitting off the top entry");
                let c = self.nodes[n].cfg.clone();
                if c.len() >= 2 {
                    return self.split_node(n, 2);
                }
                let step = driving::drive(&c, self.prog, &mut self.clock)?;
                return self.drive_node(n, step);
            }
        };
        self.stats.msg_checks += 1;
        let ok = transform::instance_holds(&g.gen, &g.theta1, ca) && transform::instance_holds(&g.gen, &g.theta2, c2);
        if ok {
            self.stats.msg_ok += 1;
        } else {
            log::error!("msg equation failed for {ca} and {c2}");
        }
        if let Some(inv) = transform::invert_renaming(&g.theta1) {
            let th = compose(&inv, &g.theta2);
            if transform::instance_holds(ca, &th, c2) {
                return self.fold_current(n, a, c2, th);
            }
        }
        self.check_corollary(ca, c2);
        if self.stats.first_generalization.is_none() {
            self.stats.first_generalization = Some(g.gen.to_string());
            self.stats.first_generalization_shape = Some(first_gen_shape(&g.gen));
        }
        self.stats.generalizations += 1;
        self.emit(
            TraceLevel::Events,
            json!({"ev": "Generalize", "node": n, "ancestor": a, "gen": g.gen.to_string(),
                   "theta1": subst_json(&g.theta1), "theta2": subst_json(&g.theta2), "equations_hold": ok}),
        );
        self.remove_subtree(a);
        let child = self.new_node(g.gen, Some(a))?;
        let args = self.arg_tasks(a, &g.theta1)?;
        self.nodes[a].kind = Kind::Gen { child, theta: g.theta1, args };
        self.stack.push(child);
        Ok(())
    }

    /// Folds the configuration `c2` of the current task onto `a`. When `c2`
    /// is only the top of `n`, the split is made first.
    fn fold_current(&mut self, n: NodeId, a: NodeId, c2: &Configuration, th: Subst) -> Result<(), EngineError> {
        let c = self.nodes[n].cfg.clone();
        if c.len() == c2.len() {
            return self.make_fold(n, a, th);
        }
        let h = self.clock.fresh();
        let (p2, rest) = transform::split_task(&c, c2.len() + 1, h)?;
        let first = self.new_node(p2, Some(n))?;
        let cont = self.new_node(rest, Some(n))?;
        self.nodes[n].kind = Kind::Let { first, h, cont };
        self.stats.splits += 1;
        self.stack.push(cont);
        self.make_fold(first, a, th)
    }

    fn make_fold(&mut self, n: NodeId, target: NodeId, th: Subst) -> Result<(), EngineError> {
        let (tc, c) = (self.nodes[target].cfg.clone(), self.nodes[n].cfg.clone());
        self.stats.fold_checks += 1;
        let ok = transform::instance_holds(&tc, &th, &c);
        if ok {
            self.stats.fold_ok += 1;
        } else {
            log::error!("fold equation failed: {tc} against {c}");
        }
        self.check_corollary(&tc, &c);
        self.stats.folds += 1;
        self.emit(
            TraceLevel::Events,
            json!({"ev": "Fold", "node": n, "target": target, "theta": subst_json(&th), "equation_holds": ok}),
        );
        let args = self.arg_tasks(n, &th)?;
        self.nodes[n].kind = Kind::Fold { target, theta: th, args };
        self.fold_sources.entry(target).or_default().push(n);
        Ok(())
    }

    /// Nodes computing the substitution images that contain applications.
    fn arg_tasks(&mut self, owner: NodeId, th: &Subst) -> Result<Vec<(ParamId, NodeId)>, EngineError> {
        let mut out = Vec::new();
        for (p, v) in th {
            if v.has_call() {
                let t = self.new_node(Configuration::passive(PExpr::new()), Some(owner))?;
                self.fill(t, v.clone())?;
                out.push((*p, t));
            }
        }
        Ok(out)
    }

    /// Splits the configuration of `a` before entry `l`, discarding what was
    /// built below it.
    fn split_node(&mut self, a: NodeId, l: usize) -> Result<(), EngineError> {
        let ca = self.nodes[a].cfg.clone();
        self.remove_subtree(a);
        let h = self.clock.fresh();
        let (prefix, rest) = transform::split_task(&ca, l, h)?;
        let first = self.new_node(prefix, Some(a))?;
        let cont = self.new_node(rest, Some(a))?;
        self.nodes[a].kind = Kind::Let { first, h, cont };
        self.stats.splits += 1;
        self.emit(TraceLevel::Events, json!({"ev": "TaskSplit", "node": a, "l": l, "h": h}));
        self.stack.push(cont);
        self.stack.push(first);
        Ok(())
    }

    fn remove_subtree(&mut self, a: NodeId) {
        let mut todo = self.nodes[a].children();
        let mut removed = Vec::new();
        while let Some(x) = todo.pop() {
            if !self.nodes[x].is_live() {
                continue;
            }
            todo.extend(self.nodes[x].children());
            if let Kind::Fold { target, .. } = self.nodes[x].kind {
                if let Some(v) = self.fold_sources.get_mut(&target) {
                    v.retain(|&s| s != x);
                }
            }
            self.nodes[x].kind = Kind::Removed;
            removed.push(x);
        }
        self.keys.retain(|_, v| self.nodes[*v].is_live());
        for v in self.shapes.values_mut() {
            v.retain(|&x| matches!(self.nodes[x].kind, Kind::Driven { .. }));
        }
        // Folds from outside onto removed nodes have to be redone.
        for r in removed {
            for s in self.fold_sources.remove(&r).unwrap_or_default() {
                if !self.nodes[s].is_live() || !matches!(self.nodes[s].kind, Kind::Fold { .. }) {
                    continue;
                }
                let args: Vec<NodeId> = self.nodes[s].children();
                for x in args {
                    self.mark_removed(x);
                }
                self.nodes[s].kind = Kind::Open;
                self.stats.reopened += 1;
                self.stack.push(s);
            }
        }
    }

    fn mark_removed(&mut self, x: NodeId) {
        let mut todo = vec![x];
        while let Some(y) = todo.pop() {
            if self.nodes[y].is_live() {
                todo.extend(self.nodes[y].children());
                self.nodes[y].kind = Kind::Removed;
            }
        }
    }

    /// Before the first generalization, a Match-headed configuration whose
    /// ground pattern is strictly embedded in that of a Match-headed ancestor
    /// of the same big-step must not make the whistle act on that ancestor.
    fn check_prop1(&mut self, path: &[NodeId], c: &Configuration, acted_on: Option<NodeId>) {
        if self.stats.generalizations > 0 {
            return;
        }
        let Some(q) = match_pattern(c) else { return };
        for &a in path {
            let ca = &self.nodes[a].cfg;
            let Some(p) = match_pattern(ca) else { continue };
            if !share_timed(ca, c, "Matching") || !relations::strict_embed(q, p) {
                continue;
            }
            self.stats.prop1_checked += 1;
            if acted_on == Some(a) {
                self.stats.prop1_violations += 1;
                log::warn!("whistle acted inside one big-step: {ca} / {c}");
            }
        }
    }

    fn check_corollary(&mut self, x: &Configuration, y: &Configuration) {
        if share_timed(x, y, "Matching") {
            self.stats.corollary_violations += 1;
            log::warn!("fold or generalization inside one big-step: {x} / {y}");
        }
    }
}

fn match_pattern(c: &Configuration) -> Option<&PExpr> {
    let top = c.top()?;
    (&*top.name == "Match").then(|| &top.args[0]).filter(|p| p.is_ground())
}

fn shape(c: &Configuration) -> Vec<Arc<str>> {
    c.stack.iter().map(|a| a.name.clone()).collect()
}

fn share_timed(x: &Configuration, y: &Configuration, name: &str) -> bool {
    x.stack.iter().any(|a| &*a.name == name && y.stack.iter().any(|b| &*b.name == name && b.time == a.time))
}

/// `Match([], _, ([])), Match(_, _, •), Matching(•, ...), Eval(•, ...)`.
pub fn first_gen_shape(g: &Configuration) -> bool {
    let s = &g.stack;
    if s.len() < 4 {
        return false;
    }
    let bullet_at = |a: &App, i: usize| a.args.get(i).is_some_and(PExpr::is_bullet);
    &*s[0].name == "Match"
        && s[0].args.len() == 3
        && s[0].args[0].is_empty()
        && s[0].args[2].0.as_slice() == [Seg::Paren(PExpr::new())]
        && &*s[1].name == "Match"
        && bullet_at(&s[1], 2)
        && &*s[2].name == "Matching"
        && bullet_at(&s[2], 0)
        && &*s[3].name == "Eval"
        && s[3].args.first().is_some_and(|a| a.0.first() == Some(&Seg::Bullet))
}

fn subst_json(th: &Subst) -> serde_json::Value {
    th.iter().map(|(p, v)| (format!("{p}"), json!(v.to_string()))).collect::<serde_json::Map<_, _>>().into()
}

/// Converts an entry expression with free variables into a raw expression
/// over fresh parameters.
pub fn entry_expr(e: &Expr, clock: &mut Clock) -> (PExpr, Vec<(ParamId, ParamKind)>) {
    let mut b = VarBinding::default();
    let raw = from_surface(e, &mut b, clock);
    let params = raw.params();
    (raw, params)
}

/// Result of [`supercompile`].
pub struct Supercompiled {
    pub graph: Graph,
    pub entry: PExpr,
    pub entry_params: Vec<(ParamId, ParamKind)>,
    pub stats: Stats,
}

pub fn supercompile(
    p: &Program,
    entry: &Expr,
    opts: Options,
    trace: Option<Box<dyn Write + Send>>,
) -> Result<Supercompiled, EngineError> {
    let mut eng = Engine::new(p, opts);
    if let Some(t) = trace {
        eng = eng.with_trace(t);
    }
    let (raw, params) = entry_expr(entry, eng.clock_mut());
    let mut calls_ok = Ok(());
    entry.visit_calls(&mut |f, n| {
        if calls_ok.is_ok() {
            match p.get(f) {
                None => calls_ok = Err(EngineError::Entry(format!("unknown function {f}"))),
                Some(d) if d.arity != n => {
                    calls_ok = Err(EngineError::Entry(format!("{f} expects {} arguments", d.arity)))
                }
                _ => {}
            }
        }
    });
    calls_ok?;
    let graph = eng.run(&raw)?;
    let stats = eng.stats().clone();
    Ok(Supercompiled { graph, entry: raw, entry_params: params, stats })
}

pub fn entry_name(e: &Expr) -> Option<Arc<str>> {
    match e {
        Expr::Call(f, _) => Some(f.clone()),
        _ => None,
    }
}
