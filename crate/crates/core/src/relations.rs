//! Homeomorphic embedding with the base-case restriction, Turchin's
//! relation on timed stacks, and the whistle composed from both.

use std::collections::HashMap;

use crate::config::*;

/// Which paren pairs with an empty left side are excluded from coupling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Restriction {
    /// No exclusion: the plain closure.
    Plain,
    /// `([])` does not couple with `(σ)` or `(s.x)`.
    #[default]
    Simplest,
    /// `([])` does not couple with any one-term parenthesis.
    Extended,
}

/// Embedding checker with memo tables keyed by slice addresses, valid for
/// the lifetime of the borrowed inputs of one query.
pub struct Embedder {
    restriction: Restriction,
    reach_memo: HashMap<(usize, usize, usize, usize, usize), usize>,
    couple_memo: HashMap<(usize, usize), bool>,
}

impl Embedder {
    pub fn new(restriction: Restriction) -> Embedder {
        Embedder { restriction, reach_memo: HashMap::new(), couple_memo: HashMap::new() }
    }

    fn clear(&mut self) {
        self.reach_memo.clear();
        self.couple_memo.clear();
    }

    pub fn embed(&mut self, a: &PExpr, b: &PExpr) -> bool {
        self.clear();
        let r = self.reach(&a.0, 0, &b.0) == a.0.len();
        self.clear();
        r
    }

    pub fn embed_app(&mut self, a: &App, b: &App) -> bool {
        self.clear();
        let r = self.couple_apps(a, b);
        self.clear();
        r
    }

    /// Largest `j` such that `a[i..j]` embeds into `b`.
    fn reach(&mut self, a: &[Seg], i: usize, b: &[Seg]) -> usize {
        if i == a.len() || b.is_empty() {
            return i;
        }
        let key = (a.as_ptr() as usize, a.len(), i, b.as_ptr() as usize, b.len());
        if let Some(&r) = self.reach_memo.get(&key) {
            return r;
        }
        let mut pos = i;
        for atom in b {
            if pos == a.len() {
                break;
            }
            let mut best = pos;
            if self.couple(&a[pos], atom) {
                best = pos + 1;
            }
            match atom {
                Seg::Paren(x) => best = best.max(self.reach(a, pos, &x.0)),
                Seg::Call(app) => {
                    for arg in &app.args {
                        best = best.max(self.reach(a, pos, &arg.0));
                    }
                }
                _ => {}
            }
            pos = best;
        }
        self.reach_memo.insert(key, pos);
        pos
    }

    fn couple(&mut self, x: &Seg, y: &Seg) -> bool {
        match (x, y) {
            (Seg::Sym(p), Seg::Sym(q)) => p == q,
            (Seg::SPar(_), Seg::SPar(_)) | (Seg::EPar(_), Seg::EPar(_)) | (Seg::Bullet, Seg::Bullet) => true,
            (Seg::Paren(p), Seg::Paren(q)) => {
                let key = (x as *const Seg as usize, y as *const Seg as usize);
                if let Some(&r) = self.couple_memo.get(&key) {
                    return r;
                }
                let r = !self.restricted(p, q) && self.reach(&p.0, 0, &q.0) == p.0.len();
                self.couple_memo.insert(key, r);
                r
            }
            (Seg::Call(p), Seg::Call(q)) => {
                let key = (x as *const Seg as usize, y as *const Seg as usize);
                if let Some(&r) = self.couple_memo.get(&key) {
                    return r;
                }
                let r = self.couple_apps(p, q);
                self.couple_memo.insert(key, r);
                r
            }
            _ => false,
        }
    }

    fn couple_apps(&mut self, p: &App, q: &App) -> bool {
        p.name == q.name
            && p.args.len() == q.args.len()
            && p.args.iter().zip(&q.args).all(|(s, t)| self.reach(&s.0, 0, &t.0) == s.0.len())
    }

    fn restricted(&self, inner_l: &PExpr, inner_r: &PExpr) -> bool {
        if !inner_l.is_empty() {
            return false;
        }
        match self.restriction {
            Restriction::Plain => false,
            Restriction::Simplest => matches!(inner_r.0.as_slice(), [Seg::Sym(_)] | [Seg::SPar(_)]),
            Restriction::Extended => inner_r.0.len() == 1 && !matches!(inner_r.0[0], Seg::EPar(_) | Seg::Call(_)),
        }
    }
}

/// The restricted embedding `a ⪯ b`.
pub fn embed(a: &PExpr, b: &PExpr) -> bool {
    Embedder::new(Restriction::default()).embed(a, b)
}

/// `a ≺ b`: embedded and different.
pub fn strict_embed(a: &PExpr, b: &PExpr) -> bool {
    a != b && embed(a, b)
}

/// Witness of `C_i ⊲ C_j`. Indices are 0-based: the prefixes are the top
/// `l - 1` entries and the context is the shared bottom of both stacks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TurchinWitness {
    /// Split index in the 1-based numbering of the stack entries.
    pub l: usize,
    pub prefix_i: Vec<App>,
    pub prefix_j: Vec<App>,
    pub context: Vec<App>,
    /// `m - k`: entries of `C_j` between its prefix and the context.
    pub delta: usize,
    /// No entry is shared; the common bullet tail serves as the context.
    pub implicit_context: bool,
}

fn same_timed(a: &App, b: &App) -> bool {
    a.name == b.name && a.time == b.time
}

/// Turchin's relation on two timed configurations of one path, `ci`
/// generated before `cj`.
pub fn turchin(ci: &Configuration, cj: &Configuration) -> Option<TurchinWitness> {
    let (k, m) = (ci.stack.len(), cj.stack.len());
    if k == 0 || k > m {
        return None;
    }
    let delta = m - k;
    let shared = (0..k).take_while(|&t| same_timed(&ci.stack[k - 1 - t], &cj.stack[m - 1 - t])).count();
    if shared == k {
        return None;
    }
    if shared == 0 && !(ci.tail.is_bullet() && cj.tail.is_bullet()) {
        return None;
    }
    let l = k - shared + 1;
    let prefix_i = &ci.stack[..l - 1];
    let prefix_j = &cj.stack[..l - 1];
    if prefix_i.iter().zip(prefix_j).any(|(a, b)| a.name != b.name) {
        return None;
    }
    Some(TurchinWitness {
        l,
        prefix_i: prefix_i.to_vec(),
        prefix_j: prefix_j.to_vec(),
        context: ci.stack[k - shared..].to_vec(),
        delta,
        implicit_context: shared == 0,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WhistleDecision<Id> {
    Continue,
    Act { ancestor: Id, witness: TurchinWitness },
}

/// Scans the ancestors oldest-first for a Turchin witness whose prefixes
/// embed entry by entry.
pub fn whistle<'a, Id: Copy + 'a>(
    path: impl IntoIterator<Item = (Id, &'a Configuration)>,
    current: &Configuration,
    emb: &mut Embedder,
) -> WhistleDecision<Id> {
    for (id, anc) in path {
        if let Some(w) = turchin(anc, current) {
            if w.prefix_i.iter().zip(&w.prefix_j).all(|(a, b)| emb.embed_app(a, b)) {
                return WhistleDecision::Act { ancestor: id, witness: w };
            }
        }
    }
    WhistleDecision::Continue
}
