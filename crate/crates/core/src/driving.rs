//! One-step symbolic unfolding of configurations.

use crate::config::*;
use crate::lang::{FunDef, Pattern, Program, Symbol};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Rule `rule` fired; `raw` is the successor before decomposition.
    Next { rule: usize, raw: PExpr },
    /// No rule applies under this contraction.
    Stuck,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub contraction: Subst,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    Branches(Vec<Branch>),
    Passive(PExpr),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DriveError {
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("{0} applied to {1} arguments, expects {2}")]
    Arity(String, usize, usize),
    #[error("driving not supported: {0}")]
    NotSupported(String),
}

/// Outcome of matching one pattern against parameterized data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchStep {
    Ok,
    Fail,
    /// The E-parameter must be split before matching can proceed.
    SplitE(ParamId),
    /// The S-parameter must be compared with a symbol.
    EqS(ParamId, Symbol),
    /// Two S-parameters must be compared; the first is replaced by the second.
    EqSS(ParamId, ParamId),
    NotSupported(String),
}

/// Matches `pat` against the whole of `d`, extending `env`.
pub fn match_pattern(pat: &Pattern, d: &[Seg], env: &mut VarBinding) -> MatchStep {
    use MatchStep::*;
    match pat {
        Pattern::Var(v) => match env.get(v) {
            Some(b) => {
                if b.0.as_slice() == d {
                    Ok
                } else if b.is_ground() && PExpr(d.to_vec()).is_ground() {
                    Fail
                } else {
                    NotSupported(format!("repeated {v} against open data"))
                }
            }
            None => {
                env.insert(v.clone(), PExpr(d.to_vec()));
                Ok
            }
        },
        Pattern::Nil => match d.first() {
            None => Ok,
            Some(Seg::EPar(p)) => SplitE(*p),
            Some(Seg::Call(_)) => NotSupported("application in matched data".into()),
            Some(_) => Fail,
        },
        Pattern::SymCons(s, rest) => match d.first() {
            None => Fail,
            Some(Seg::Sym(x)) if x == s => match_pattern(rest, &d[1..], env),
            Some(Seg::SPar(q)) => EqS(*q, s.clone()),
            Some(Seg::EPar(p)) => SplitE(*p),
            Some(Seg::Call(_)) => NotSupported("application in matched data".into()),
            Some(_) => Fail,
        },
        Pattern::SVarCons(v, rest) => {
            let Some(head) = d.first() else {
                return Fail;
            };
            match head {
                Seg::Sym(_) | Seg::SPar(_) => {}
                Seg::EPar(p) => return SplitE(*p),
                Seg::Call(_) => return NotSupported("application in matched data".into()),
                _ => return Fail,
            }
            match env.get(v).map(|b| b.0.clone()) {
                Some(b) => match (b.as_slice(), head) {
                    ([Seg::Sym(x)], Seg::Sym(y)) if x != y => return Fail,
                    ([Seg::Sym(x)], Seg::SPar(q)) => return EqS(*q, x.clone()),
                    ([Seg::SPar(q)], Seg::Sym(y)) => return EqS(*q, y.clone()),
                    ([Seg::SPar(p)], Seg::SPar(q)) if p != q => return EqSS(*q, *p),
                    ([x], y) if x == y => {}
                    _ => return NotSupported(format!("bad binding of {v}")),
                },
                None => env.insert(v.clone(), PExpr(vec![head.clone()])),
            }
            match_pattern(rest, &d[1..], env)
        }
        Pattern::ParenCons(inner, rest) => match d.first() {
            None => Fail,
            Some(Seg::Paren(x)) => match match_pattern(inner, &x.0, env) {
                Ok => match_pattern(rest, &d[1..], env),
                other => other,
            },
            Some(Seg::EPar(p)) => SplitE(*p),
            Some(Seg::Call(_)) => NotSupported("application in matched data".into()),
            Some(_) => Fail,
        },
    }
}

/// The three shapes an unknown sequence can take.
pub fn split_cases(clock: &mut Clock) -> [PExpr; 3] {
    let s = clock.fresh_s();
    let e1 = clock.fresh_e();
    let e2 = clock.fresh_e();
    let e3 = clock.fresh_e();
    [PExpr::new(), PExpr(vec![s, e1]), PExpr(vec![Seg::Paren(PExpr(vec![e2])), e3])]
}

struct Driver<'a> {
    def: &'a FunDef,
    clock: &'a mut Clock,
    only: Option<usize>,
    out: Vec<Branch>,
}

impl Driver<'_> {
    fn run(&mut self, cfg: Configuration, from: usize, theta: Subst) -> Result<(), DriveError> {
        let mut r = from;
        while r < self.def.rules.len() {
            if self.only.is_some_and(|o| o != r) {
                r += 1;
                continue;
            }
            let rule = &self.def.rules[r];
            let top = &cfg.stack[0];
            let mut env = VarBinding::default();
            let mut step = MatchStep::Ok;
            for (p, a) in rule.lhs.iter().zip(&top.args) {
                step = match_pattern(p, &a.0, &mut env);
                if step != MatchStep::Ok {
                    break;
                }
            }
            match step {
                MatchStep::Ok => {
                    let rhs = instantiate(&rule.rhs, &env, self.clock);
                    let raw = cfg.plug(rhs);
                    self.out.push(Branch { contraction: theta, outcome: Outcome::Next { rule: r, raw } });
                    return Ok(());
                }
                MatchStep::Fail => r += 1,
                MatchStep::SplitE(p) => {
                    for case in split_cases(self.clock) {
                        let th: Subst = [(p, case)].into_iter().collect();
                        let next = cfg.apply(&th);
                        self.run(next, r, compose(&theta, &th))?;
                    }
                    return Ok(());
                }
                MatchStep::EqS(q, s) => {
                    let th: Subst = [(q, PExpr(vec![Seg::Sym(s)]))].into_iter().collect();
                    self.run(cfg.apply(&th), r, compose(&theta, &th))?;
                    r += 1;
                }
                MatchStep::EqSS(q, s) => {
                    let th: Subst = [(q, PExpr(vec![Seg::SPar(s)]))].into_iter().collect();
                    self.run(cfg.apply(&th), r, compose(&theta, &th))?;
                    r += 1;
                }
                MatchStep::NotSupported(m) => {
                    log::warn!("driving {}: {m}", cfg.stack[0].name);
                    return Err(DriveError::NotSupported(m));
                }
            }
        }
        self.out.push(Branch { contraction: theta, outcome: Outcome::Stuck });
        Ok(())
    }
}

fn drive_with(c: &Configuration, p: &Program, clock: &mut Clock, only: Option<usize>) -> Result<StepResult, DriveError> {
    let Some(top) = c.stack.first() else {
        return Ok(StepResult::Passive(c.tail.clone()));
    };
    let def = p.get(&top.name).ok_or_else(|| DriveError::UnknownFunction(top.name.to_string()))?;
    if def.arity != top.args.len() {
        return Err(DriveError::Arity(top.name.to_string(), top.args.len(), def.arity));
    }
    let mut d = Driver { def, clock, only, out: Vec::new() };
    d.run(c.clone(), 0, Subst::new())?;
    Ok(StepResult::Branches(d.out))
}

/// Unfolds the top entry of `c` by one rewriting step, enumerating the
/// narrowings its rules require in rule order. Sibling contractions are
/// disjoint up to rule order: an instance belongs to the first branch
/// whose contraction covers it.
pub fn drive(c: &Configuration, p: &Program, clock: &mut Clock) -> Result<StepResult, DriveError> {
    drive_with(c, p, clock, None)
}

/// Fires rule `rule` alone on the top entry, narrowing as needed, and
/// returns the first successor. Used to replay a given rule sequence.
pub fn fire_rule(c: &Configuration, p: &Program, rule: usize, clock: &mut Clock) -> Option<(Subst, PExpr)> {
    match drive_with(c, p, clock, Some(rule)).ok()? {
        StepResult::Branches(bs) => bs.into_iter().find_map(|b| match b.outcome {
            Outcome::Next { raw, .. } => Some((b.contraction, raw)),
            Outcome::Stuck => None,
        }),
        StepResult::Passive(_) => None,
    }
}

/// Exactly one branch, with an identity contraction.
pub fn is_transitive_result(r: &StepResult) -> bool {
    match r {
        StepResult::Branches(bs) => bs.len() == 1 && bs[0].contraction.is_empty(),
        StepResult::Passive(_) => false,
    }
}

pub fn is_transitive(c: &Configuration, p: &Program) -> bool {
    let mut probe = Clock::starting_params_at(u32::MAX / 2);
    drive(c, p, &mut probe).is_ok_and(|r| is_transitive_result(&r))
}
