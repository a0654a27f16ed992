mod support;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scpv_core::config::{PExpr, Seg};
use scpv_core::lang::Symbol;
use scpv_core::relations::{embed, strict_embed, Embedder, Restriction};
use support::embed_oracle::{self, Closure, T};

/// Pairs whose sizes sum to at most this are checked exhaustively.
const EXHAUSTIVE_TOTAL_SIZE: usize = 8;
const RANDOM_PAIRS: usize = 10_000;
const RANDOM_MAX_SIZE: usize = 20;

fn implementation(a: &[T], b: &[T]) -> bool {
    embed(&embed_oracle::to_pexpr(a), &embed_oracle::to_pexpr(b))
}

#[test]
fn exhaustive_agreement_with_the_closure() {
    let mut memo = HashMap::new();
    let mut closure = Closure::default();
    let mut checked = 0usize;
    for nb in 0..=EXHAUSTIVE_TOTAL_SIZE {
        let bs = embed_oracle::all_of_size(nb, &mut memo);
        for na in 0..=EXHAUSTIVE_TOTAL_SIZE - nb {
            let as_ = embed_oracle::all_of_size(na, &mut memo);
            for b in bs.iter() {
                for a in as_.iter() {
                    let want = closure.holds(a, b);
                    assert_eq!(implementation(a, b), want, "{a:?} ⪯ {b:?}");
                    assert_eq!(embed_oracle::recursive(a, b), want, "recursive oracle on {a:?} ⪯ {b:?}");
                    checked += 1;
                }
            }
        }
    }
    println!("checked {checked} pairs");
    assert!(checked > 1_000_000);
}

#[test]
fn random_agreement_with_the_recursive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut positives = 0;
    for _ in 0..RANDOM_PAIRS {
        let b = embed_oracle::random_expr(&mut rng, RANDOM_MAX_SIZE);
        // Sampling `a` from pieces of `b` keeps positives frequent.
        let a = if rng.gen_bool(0.5) {
            let n = rng.gen_range(0..=b.len());
            b.iter().filter(|_| rng.gen_bool(0.7)).take(n).cloned().collect::<Vec<_>>()
        } else {
            embed_oracle::random_expr(&mut rng, RANDOM_MAX_SIZE.min(embed_oracle::size(&b)))
        };
        assert!(embed_oracle::size(&a) <= RANDOM_MAX_SIZE && embed_oracle::size(&b) <= RANDOM_MAX_SIZE);
        let want = embed_oracle::recursive(&a, &b);
        positives += usize::from(want);
        assert_eq!(implementation(&a, &b), want, "{a:?} ⪯ {b:?}");
    }
    assert!(positives > RANDOM_PAIRS / 10 && positives < RANDOM_PAIRS * 9 / 10, "{positives} positives");
}

fn sym(c: char) -> Seg {
    Seg::Sym(Symbol::Char(c))
}

fn paren(x: Vec<Seg>) -> Seg {
    Seg::Paren(PExpr(x))
}

#[test]
fn a_term_embeds_in_its_parenthesization() {
    for t in [sym('a'), Seg::SPar(1), paren(vec![sym('a')]), Seg::EPar(2)] {
        assert!(embed(&PExpr(vec![t.clone()]), &PExpr(vec![paren(vec![t])])));
    }
}

#[test]
fn variables_embed_in_variables_of_their_kind() {
    assert!(embed(&PExpr(vec![Seg::EPar(1)]), &PExpr(vec![Seg::EPar(2)])));
    assert!(embed(&PExpr(vec![Seg::SPar(1)]), &PExpr(vec![Seg::SPar(2)])));
    assert!(!embed(&PExpr(vec![Seg::EPar(1)]), &PExpr(vec![Seg::SPar(2)])));
}

#[test]
fn empty_parenthesis_does_not_embed_in_a_parenthesized_symbol() {
    let empty = PExpr(vec![paren(vec![])]);
    assert!(!embed(&empty, &PExpr(vec![paren(vec![sym('a')])])));
    assert!(!embed(&empty, &PExpr(vec![paren(vec![Seg::SPar(3)])])));
    assert!(embed(&empty, &PExpr(vec![paren(vec![sym('a'), sym('a')])])));
    assert!(Embedder::new(Restriction::Plain).embed(&empty, &PExpr(vec![paren(vec![sym('a')])])));
    // The extended variant also withholds a parenthesized parenthesis.
    let nested = PExpr(vec![paren(vec![paren(vec![sym('a')])])]);
    assert!(embed(&empty, &nested));
    assert!(!Embedder::new(Restriction::Extended).embed(&empty, &nested));
}

#[test]
fn strict_embedding_excludes_equality() {
    let x = PExpr(vec![sym('a')]);
    assert!(!strict_embed(&x, &x));
    assert!(strict_embed(&x, &PExpr(vec![sym('a'), sym('b')])));
}
