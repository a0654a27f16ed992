//! Generalization, instance checking and task splitting.

use std::collections::HashMap;

use crate::config::*;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("configurations cannot be generalized: {0}")]
    Incompatible(String),
    #[error("split index {l} out of range for a stack of {k} entries")]
    SplitRange { l: usize, k: usize },
}

/// `gen` with `gen·θ1 = C1` and `gen·θ2 = C2`.
#[derive(Clone, Debug)]
pub struct Generalization {
    pub gen: Configuration,
    pub theta1: Subst,
    pub theta2: Subst,
}

struct Generalizer<'a> {
    clock: &'a mut Clock,
    theta1: Subst,
    theta2: Subst,
    memo: HashMap<(Vec<Seg>, Vec<Seg>), Seg>,
}

impl Generalizer<'_> {
    fn var(&mut self, x: &[Seg], y: &[Seg], s_kind: bool) -> Result<Seg, TransformError> {
        if x.contains(&Seg::Bullet) || y.contains(&Seg::Bullet) {
            return Err(TransformError::Incompatible("bullet outside alignment".into()));
        }
        let key = (x.to_vec(), y.to_vec());
        if let Some(s) = self.memo.get(&key) {
            return Ok(s.clone());
        }
        let seg = if s_kind { self.clock.fresh_s() } else { self.clock.fresh_e() };
        let (Seg::SPar(p) | Seg::EPar(p)) = seg else { unreachable!() };
        self.theta1.insert(p, PExpr(x.to_vec()));
        self.theta2.insert(p, PExpr(y.to_vec()));
        self.memo.insert(key, seg.clone());
        Ok(seg)
    }

    fn pair(&mut self, x: &Seg, y: &Seg) -> Result<Option<Seg>, TransformError> {
        Ok(match (x, y) {
            (Seg::Paren(p), Seg::Paren(q)) => Some(Seg::Paren(self.seq(&p.0, &q.0)?)),
            (Seg::Call(a), Seg::Call(b)) if a.name == b.name && a.args.len() == b.args.len() => {
                Some(Seg::Call(Box::new(self.app(a, b)?)))
            }
            (Seg::Sym(_) | Seg::SPar(_), Seg::Sym(_) | Seg::SPar(_)) => Some(self.var(
                std::slice::from_ref(x),
                std::slice::from_ref(y),
                true,
            )?),
            _ => None,
        })
    }

    fn app(&mut self, a: &App, b: &App) -> Result<App, TransformError> {
        let args = a.args.iter().zip(&b.args).map(|(p, q)| self.seq(&p.0, &q.0)).collect::<Result<_, _>>()?;
        Ok(App { name: a.name.clone(), args, time: a.time })
    }

    /// Greedy left-to-right alignment: equal segments are kept, compatible
    /// pairs refined, and the stretch up to the nearest equal pair becomes
    /// one E-parameter.
    fn seq(&mut self, x: &[Seg], y: &[Seg]) -> Result<PExpr, TransformError> {
        // The segments holding the bullet are aligned with each other first.
        let holds = |s: &Seg| matches!(s, Seg::Bullet) || matches!(s, Seg::Paren(p) if p.has_bullet());
        if let (Some(bi), Some(bj)) = (x.iter().position(holds), y.iter().position(holds)) {
            let mut out = self.seq_free(&x[..bi], &y[..bj])?.0;
            match (&x[bi], &y[bj]) {
                (Seg::Bullet, Seg::Bullet) => out.push(Seg::Bullet),
                (Seg::Paren(p), Seg::Paren(q)) => out.push(Seg::Paren(self.seq(&p.0, &q.0)?)),
                _ => return Err(TransformError::Incompatible("bullets at different depths".into())),
            }
            out.extend(self.seq(&x[bi + 1..], &y[bj + 1..])?.0);
            return Ok(PExpr(out));
        }
        self.seq_free(x, y)
    }

    fn seq_free(&mut self, x: &[Seg], y: &[Seg]) -> Result<PExpr, TransformError> {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < x.len() && j < y.len() {
            if x[i] == y[j] {
                out.push(x[i].clone());
                i += 1;
                j += 1;
                continue;
            }
            if let Some(s) = self.pair(&x[i], &y[j])? {
                out.push(s);
                i += 1;
                j += 1;
                continue;
            }
            match nearest_anchor(x, i, y, j) {
                Some((i2, j2)) => {
                    out.push(self.var(&x[i..i2], &y[j..j2], false)?);
                    i = i2;
                    j = j2;
                }
                None => break,
            }
        }
        if i < x.len() || j < y.len() {
            out.push(self.var(&x[i..], &y[j..], false)?);
        }
        Ok(PExpr(out))
    }
}

/// The equal pair `(i2, j2)` with the least `i2 + j2`.
fn nearest_anchor(x: &[Seg], i: usize, y: &[Seg], j: usize) -> Option<(usize, usize)> {
    let total = (x.len() - i) + (y.len() - j);
    for d in 1..total {
        for di in 0..=d {
            let (i2, j2) = (i + di, j + d - di);
            if i2 < x.len() && j2 < y.len() && x[i2] == y[j2] {
                return Some((i2, j2));
            }
        }
    }
    None
}

/// Most specific generalization of two configurations with the same stack
/// shape. The result carries the time labels of `c1`.
pub fn msg(c1: &Configuration, c2: &Configuration, clock: &mut Clock) -> Result<Generalization, TransformError> {
    if c1.stack.len() != c2.stack.len() {
        return Err(TransformError::Incompatible("stack lengths differ".into()));
    }
    if let Some((a, b)) = c1.stack.iter().zip(&c2.stack).find(|(a, b)| a.name != b.name || a.args.len() != b.args.len()) {
        return Err(TransformError::Incompatible(format!("{} against {}", a.name, b.name)));
    }
    let mut g = Generalizer { clock, theta1: Subst::new(), theta2: Subst::new(), memo: HashMap::new() };
    let stack = c1.stack.iter().zip(&c2.stack).map(|(a, b)| g.app(a, b)).collect::<Result<Vec<_>, _>>()?;
    let tail = g.seq(&c1.tail.0, &c2.tail.0)?;
    Ok(Generalization { gen: Configuration { stack, tail }, theta1: g.theta1, theta2: g.theta2 })
}

/// Checks `gen·θ = c`.
pub fn instance_holds(gen: &Configuration, th: &Subst, c: &Configuration) -> bool {
    gen.apply(th) == *c
}

const MATCH_BUDGET: usize = 200_000;

type Cont<'k> = dyn FnMut(&mut Matcher, &mut Subst) -> bool + 'k;

struct Matcher {
    budget: usize,
}

impl Matcher {
    fn seq(&mut self, p: &[Seg], d: &[Seg], th: &mut Subst, k: &mut Cont<'_>) -> bool {
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        let Some((h, rest)) = p.split_first() else {
            return d.is_empty() && k(self, th);
        };
        match h {
            Seg::EPar(x) => {
                if let Some(v) = th.get(x).cloned() {
                    return d.starts_with(&v.0) && self.seq(rest, &d[v.0.len()..], th, k);
                }
                let limit = d.iter().position(|s| *s == Seg::Bullet).unwrap_or(d.len());
                if rest.is_empty() {
                    if limit != d.len() {
                        return false;
                    }
                    th.insert(*x, PExpr(d.to_vec()));
                    if k(self, th) {
                        return true;
                    }
                    th.remove(x);
                    return false;
                }
                for n in 0..=limit {
                    th.insert(*x, PExpr(d[..n].to_vec()));
                    if self.seq(rest, &d[n..], th, k) {
                        return true;
                    }
                    th.remove(x);
                }
                false
            }
            Seg::SPar(x) => match d.first() {
                Some(s @ (Seg::Sym(_) | Seg::SPar(_))) => {
                    if let Some(v) = th.get(x) {
                        return v.0.as_slice() == std::slice::from_ref(s) && self.seq(rest, &d[1..], th, k);
                    }
                    th.insert(*x, PExpr(vec![s.clone()]));
                    if self.seq(rest, &d[1..], th, k) {
                        return true;
                    }
                    th.remove(x);
                    false
                }
                _ => false,
            },
            Seg::Paren(q) => match d.first() {
                Some(Seg::Paren(r)) => {
                    let d_rest = &d[1..];
                    self.seq(&q.0, &r.0, th, &mut |me: &mut Matcher, th: &mut Subst| me.seq(rest, d_rest, th, k))
                }
                _ => false,
            },
            Seg::Call(a) => match d.first() {
                Some(Seg::Call(b)) if a.name == b.name && a.args.len() == b.args.len() => {
                    let d_rest = &d[1..];
                    self.args(&a.args, &b.args, th, &mut |me: &mut Matcher, th: &mut Subst| me.seq(rest, d_rest, th, k))
                }
                _ => false,
            },
            Seg::Sym(_) | Seg::Bullet => d.first() == Some(h) && self.seq(rest, &d[1..], th, k),
        }
    }

    fn args(&mut self, ps: &[PExpr], ds: &[PExpr], th: &mut Subst, k: &mut Cont<'_>) -> bool {
        match (ps.split_first(), ds.split_first()) {
            (None, None) => k(self, th),
            (Some((p, pr)), Some((d, dr))) => {
                self.seq(&p.0, &d.0, th, &mut |me: &mut Matcher, th: &mut Subst| me.args(pr, dr, th, k))
            }
            _ => false,
        }
    }
}

fn as_seq(c: &Configuration) -> Vec<Seg> {
    let mut v: Vec<Seg> = c.stack.iter().map(|a| Seg::Call(Box::new(a.clone()))).collect();
    v.push(Seg::Paren(c.tail.clone()));
    v
}

/// Finds `θ` with `ancestor·θ = current`, ignoring time labels.
pub fn fold_instance(ancestor: &Configuration, current: &Configuration) -> Option<Subst> {
    if ancestor.stack.len() != current.stack.len()
        || ancestor.stack.iter().zip(&current.stack).any(|(a, b)| a.name != b.name)
    {
        return None;
    }
    let (p, d) = (as_seq(ancestor), as_seq(current));
    let mut th = Subst::new();
    let mut m = Matcher { budget: MATCH_BUDGET };
    if m.seq(&p, &d, &mut th, &mut |_, _| true) {
        // Parameters bound to themselves carry no information.
        th.retain(|k, v| !matches!(v.0.as_slice(), [Seg::EPar(q)] | [Seg::SPar(q)] if q == k));
        debug_assert!(instance_holds(ancestor, &th, current));
        Some(th)
    } else {
        None
    }
}

/// Splits at the 1-based index `l`: the prefix task holds entries
/// `1..l-1` over a bullet tail, the context task holds the rest with the
/// prefix result flowing in through the fresh parameter `h`.
pub fn split_task(c: &Configuration, l: usize, h: ParamId) -> Result<(Configuration, Configuration), TransformError> {
    let k = c.stack.len();
    if l < 2 || l > k + 1 {
        return Err(TransformError::SplitRange { l, k });
    }
    let hole = PExpr(vec![Seg::EPar(h)]);
    let prefix = Configuration { stack: c.stack[..l - 1].to_vec(), tail: PExpr::bullet() };
    let mut rest: Vec<App> = c.stack[l - 1..].to_vec();
    let context = match rest.first_mut() {
        Some(top) => {
            for a in top.args.iter_mut() {
                *a = a.fill_bullet(&hole);
            }
            Configuration { stack: rest, tail: c.tail.clone() }
        }
        None => Configuration { stack: Vec::new(), tail: c.tail.fill_bullet(&hole) },
    };
    Ok((prefix, context))
}

/// Finds `θ` with `patterns·θ = data`, argument by argument.
pub fn match_args(patterns: &[PExpr], data: &[PExpr]) -> Option<Subst> {
    let mut th = Subst::new();
    let mut m = Matcher { budget: MATCH_BUDGET };
    m.args(patterns, data, &mut th, &mut |_, _| true).then_some(th)
}

/// The inverse of a renaming.
pub fn invert_renaming(th: &Subst) -> Option<Subst> {
    let mut out = Subst::new();
    for (p, v) in th {
        let seg = match v.0.as_slice() {
            [Seg::EPar(q)] => (*q, Seg::EPar(*p)),
            [Seg::SPar(q)] => (*q, Seg::SPar(*p)),
            _ => return None,
        };
        if out.insert(seg.0, PExpr(vec![seg.1])).is_some() {
            return None;
        }
    }
    Some(out)
}
