//! Two slow deciders for the restricted embedding over ground expressions
//! built from symbols and parentheses.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use rand::Rng;
use scpv_core::config::{PExpr, Seg};
use scpv_core::lang::Symbol;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum T {
    A,
    I,
    P(Vec<T>),
}

pub type E = Vec<T>;

pub fn size(e: &[T]) -> usize {
    e.iter().map(|t| match t {
        T::P(x) => 1 + size(x),
        _ => 1,
    }).sum()
}

pub fn to_pexpr(e: &[T]) -> PExpr {
    PExpr(
        e.iter()
            .map(|t| match t {
                T::A => Seg::Sym(Symbol::Char('a')),
                T::I => Seg::Sym(Symbol::ident("I")),
                T::P(x) => Seg::Paren(to_pexpr(x)),
            })
            .collect(),
    )
}

/// Every expression of exactly `n` size units.
pub fn all_of_size(n: usize, memo: &mut HashMap<usize, Rc<Vec<E>>>) -> Rc<Vec<E>> {
    if let Some(v) = memo.get(&n) {
        return v.clone();
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
    } else {
        for k in 1..=n {
            let mut heads = Vec::new();
            if k == 1 {
                heads.push(T::A);
                heads.push(T::I);
            }
            for inner in all_of_size(k - 1, memo).iter() {
                heads.push(T::P(inner.clone()));
            }
            for rest in all_of_size(n - k, memo).iter() {
                for h in &heads {
                    let mut e = vec![h.clone()];
                    e.extend(rest.iter().cloned());
                    out.push(e);
                }
            }
        }
    }
    let v = Rc::new(out);
    memo.insert(n, v.clone());
    v
}

/// `(s) ⪯ (t)` is withheld when `s` is empty and `t` a single symbol.
fn restricted(s: &[T], t: &[T]) -> bool {
    s.is_empty() && matches!(t, [T::A] | [T::I])
}

/// The least relation closed under the generating rules and transitivity,
/// computed as the set of everything below `b`.
#[derive(Default)]
pub struct Closure {
    memo: HashMap<E, Rc<HashSet<E>>>,
}

impl Closure {
    pub fn below(&mut self, b: &E) -> Rc<HashSet<E>> {
        if let Some(s) = self.memo.get(b) {
            return s.clone();
        }
        let mut s: HashSet<E> = HashSet::new();
        s.insert(Vec::new());
        s.insert(b.clone());
        if let Some((beta, t)) = b.split_first() {
            let t = t.to_vec();
            // t ⪯ β : t
            s.extend(self.below(&t).iter().cloned());
            // t ⪯ (t)
            if let (T::P(inner), true) = (beta, t.is_empty()) {
                let down = self.below(inner);
                s.extend(down.iter().cloned());
                for x in down.iter() {
                    if !restricted(x, inner) {
                        s.insert(vec![T::P(x.clone())]);
                    }
                }
            }
            // α : s ⪯ β : t
            if !t.is_empty() {
                let heads: Vec<T> = self
                    .below(&vec![beta.clone()])
                    .iter()
                    .filter(|x| x.len() == 1)
                    .map(|x| x[0].clone())
                    .collect();
                let tails = self.below(&t);
                for h in &heads {
                    for r in tails.iter() {
                        let mut e = vec![h.clone()];
                        e.extend(r.iter().cloned());
                        s.insert(e);
                    }
                }
            }
        }
        // x ++ y ⪯ b1 ++ b2, `++` being a binary function.
        for k in 1..b.len() {
            let (l, r) = (self.below(&b[..k].to_vec()), self.below(&b[k..].to_vec()));
            for x in l.iter() {
                for y in r.iter() {
                    let mut e = x.clone();
                    e.extend(y.iter().cloned());
                    s.insert(e);
                }
            }
        }
        // Transitivity; each set below is already closed.
        let firsts: Vec<E> = s.iter().filter(|x| *x != b).cloned().collect();
        for x in firsts {
            let d = self.below(&x);
            s.extend(d.iter().cloned());
        }
        let r = Rc::new(s);
        self.memo.insert(b.clone(), r.clone());
        r
    }

    pub fn holds(&mut self, a: &E, b: &E) -> bool {
        // Generating facts `[] ⪯ t` and `t ⪯ t`, answered without the set.
        a.is_empty() || a == b || self.below(b).contains(a)
    }
}

/// Structural recursion over both sequences, with no sharing of work.
pub fn recursive(a: &[T], b: &[T]) -> bool {
    let Some((beta, t)) = b.split_first() else {
        return a.is_empty();
    };
    if a.is_empty() || recursive(a, t) {
        return true;
    }
    if let T::P(u) = beta {
        // A nonempty chunk of `a` goes inside the parenthesis.
        for k in 1..=a.len() {
            if recursive(&a[..k], u) && recursive(&a[k..], t) {
                return true;
            }
        }
    }
    let (alpha, s) = a.split_first().unwrap();
    let couples = match (alpha, beta) {
        (T::P(p), T::P(q)) => !restricted(p, q) && recursive(p, q),
        _ => alpha == beta,
    };
    couples && recursive(s, t)
}

/// A random expression of size at most `budget`.
pub fn random_expr(rng: &mut impl Rng, budget: usize) -> Vec<T> {
    let mut out = Vec::new();
    let mut left = budget;
    while left > 0 && rng.gen_ratio(7, 8) {
        let r = rng.gen_range(0..5);
        if r < 2 && left >= 2 {
            let inner_budget = rng.gen_range(0..left);
            let inner = random_expr(rng, inner_budget);
            left -= 1 + size(&inner);
            out.push(T::P(inner));
        } else {
            left -= 1;
            out.push(if r % 2 == 0 { T::A } else { T::I });
        }
    }
    out
}
