mod support;

use std::collections::HashSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scpv_core::corpus;
use scpv_core::encoding::{self, decode_data, decode_defs, decode_program, encode_data, encode_defs, encode_expr, encode_program};
use scpv_core::eval::parse_data;
use scpv_core::lang::{self, parse_program, Expr};

fn models() -> Vec<lang::Program> {
    let mut out = vec![corpus::synapse_model(), corpus::synapse_mutant()];
    for entry in std::fs::read_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus/protocols")).unwrap() {
        let spec = corpus::parse_protocol_spec(&std::fs::read_to_string(entry.unwrap().path()).unwrap()).unwrap();
        for identity_events in [false, true] {
            out.push(corpus::generate_model(&spec, corpus::GenOptions { identity_events }).unwrap());
        }
    }
    out
}

#[test]
fn models_roundtrip() {
    for p in models() {
        assert_eq!(decode_defs(&encode_defs(&p).unwrap()).unwrap(), p);
        assert_eq!(decode_program(&encode_program(&p).unwrap()).unwrap(), p);
    }
}

#[test]
fn variables_and_calls_have_fixed_shapes() {
    let e = lang::parse_expr("s.x ('a' e.y) F(e.y)").unwrap();
    let want = parse_data("(Var 's' x) ('*' 'a' (Var 'e' y)) (Call F (Var 'e' y))").unwrap();
    assert_eq!(encode_expr(&e).unwrap(), want);
}

#[test]
fn unencodable_programs_are_rejected() {
    let p = parse_program("F { e.x, e.y => e.x; }").unwrap();
    assert!(matches!(encode_defs(&p), Err(encoding::EncodeError::NotUnary(_))));
    let p = parse_program("F { e.x => F(e.x) ++ e.x; }").unwrap();
    assert!(matches!(encode_defs(&p), Err(encoding::EncodeError::UsesAppend(_))));
}

#[test]
fn malformed_encodings_report_a_path() {
    let bad = parse_data("(F ((Var 'e' x) '=' (Var 'q' x)))").unwrap();
    let err = decode_defs(&bad).unwrap_err();
    assert!(!err.msg.is_empty());
}

#[test]
fn encoding_is_injective_on_random_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut seen = std::collections::HashMap::new();
    let mut distinct = HashSet::new();
    for _ in 0..1000 {
        let p = support::gen::program(&mut rng);
        let text = lang::print_program(&p);
        let enc = format!("{:?}", encode_defs(&p).unwrap());
        if let Some(prev) = seen.insert(enc, text.clone()) {
            assert_eq!(prev, text, "two programs share an encoding");
        }
        distinct.insert(text);
        assert_eq!(decode_defs(&encode_defs(&p).unwrap()).unwrap(), p);
    }
    // The generator must actually produce variety for the check to mean anything.
    assert!(distinct.len() > 900, "{}", distinct.len());
}

#[test]
fn data_encoding_marks_parentheses() {
    let d = parse_data("a (b (c))").unwrap();
    assert_eq!(encode_data(&d), parse_data("a ('*' b ('*' c))").unwrap());
    assert_eq!(decode_data(&encode_data(&d)).unwrap(), d);
    assert_eq!(decode_data(&parse_data("(b)").unwrap()), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn encoding_respects_cons(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = support::gen::data(&mut rng, 3, 5);
        let Some((t, rest)) = d.split_first() else { return Ok(()) };
        let mut joined = encode_data(std::slice::from_ref(t));
        joined.extend(encode_data(rest));
        prop_assert_eq!(encode_data(&d), joined);
        let e = scpv_core::eval::data_to_expr(&d);
        let Expr::Cons(head, tail) = &e else { unreachable!() };
        let mut joined = encode_expr(&Expr::Cons(head.clone(), Box::new(Expr::Nil))).unwrap();
        joined.extend(encode_expr(tail).unwrap());
        prop_assert_eq!(encode_expr(&e).unwrap(), joined);
    }

    #[test]
    fn data_roundtrips(seed in any::<u64>()) {
        let d = support::gen::data(&mut ChaCha8Rng::seed_from_u64(seed), 3, 5);
        prop_assert_eq!(decode_data(&encode_data(&d)), Some(d));
    }
}

