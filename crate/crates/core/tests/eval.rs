mod support;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scpv_core::config::{self, decompose, Clock, Configuration, Decomposed};
use scpv_core::corpus;
use scpv_core::driving::{self, Outcome, StepResult};
use scpv_core::eval::{self, parse_data, print_data, EvalError, EvalOutcome, DEFAULT_FUEL};
use scpv_core::lang::{self, parse_program};

fn run(p: &lang::Program, f: &str, arg: &str) -> EvalOutcome {
    eval::eval_call(p, f, &[parse_data(arg).unwrap()], DEFAULT_FUEL).unwrap()
}

fn value(s: &str) -> EvalOutcome {
    EvalOutcome::Value(parse_data(s).unwrap())
}

#[test]
fn synapse_test_function() {
    let p = corpus::synapse_model();
    assert_eq!(run(&p, "Test", "(Invalid)(Dirty)(Valid I)"), value("True"));
    assert_eq!(run(&p, "Test", "(Invalid)(Dirty I)(Valid I)"), value("False"));
    assert_eq!(run(&p, "Test", "(Invalid)(Dirty I I)(Valid)"), value("False"));
    assert_eq!(run(&p, "Test", "(Dirty)"), EvalOutcome::Undefined);
}

#[test]
fn synapse_runs() {
    let p = corpus::synapse_model();
    // One process reads, then writes after a hit: one dirty copy.
    assert_eq!(run(&p, "Main", "(rm wh2) ()"), value("True"));
    assert_eq!(run(&p, "Main", "() (I I)"), value("True"));
    // rm needs an invalid copy.
    assert_eq!(run(&p, "Main", "(rm rm) ()"), EvalOutcome::Undefined);
    assert_eq!(run(&p, "Main", "(bogus) ()"), EvalOutcome::Undefined);
    assert_eq!(run(&p, "Event", "rm (Invalid I I) (Dirty I) (Valid)"), value("(Invalid I I) (Dirty) (Valid I)"));
}

#[test]
fn mutant_reaches_false() {
    let p = corpus::synapse_mutant();
    // wm leaves the valid copy in place next to the dirty one.
    assert_eq!(run(&p, "Main", "(rm wm) (I)"), value("False"));
}

#[test]
fn append_concatenates() {
    let p = corpus::synapse_model();
    assert_eq!(run(&p, "Append", "(I 'a') ((x) y)"), value("I 'a' (x) y"));
}

#[test]
fn undefined_arguments_make_the_call_undefined() {
    let p = parse_program("F { e.x => G(H(e.x)); } G { e.y => 'k'; } H { 'a' => []; }").unwrap();
    assert_eq!(run(&p, "F", "'a'"), value("'k'"));
    assert_eq!(run(&p, "F", "'b'"), EvalOutcome::Undefined);
}

#[test]
fn rules_are_tried_in_order() {
    let p = parse_program("F { s.x e.y => First; 'a' => Second; [] => Third; }").unwrap();
    assert_eq!(run(&p, "F", "'a'"), value("First"));
    assert_eq!(run(&p, "F", ""), value("Third"));
}

#[test]
fn repeated_variables_compare_data() {
    let p = parse_program("Eq { (e.x) (e.x) => True; (e.x) (e.y) => False; }").unwrap();
    assert_eq!(run(&p, "Eq", "(a (b)) (a (b))"), value("True"));
    assert_eq!(run(&p, "Eq", "(a (b)) (a b)"), value("False"));
}

#[test]
fn fuel_bounds_divergence() {
    let p = parse_program("Loop { e.x => Loop(e.x); }").unwrap();
    assert_eq!(eval::eval_call(&p, "Loop", &[vec![]], 1000), Err(EvalError::FuelExhausted));
}

#[test]
fn data_literals_print_back() {
    for s in ["", "'a'", "(Invalid I) (Dirty)", "((()) x)"] {
        let d = parse_data(s).unwrap();
        assert_eq!(parse_data(&print_data(&d)).unwrap(), d);
    }
    assert!(parse_data("e.x").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn evaluation_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = support::gen::any_input(&mut rng, &["rm", "wh2", "wm"], 8);
        let p = corpus::synapse_model();
        let a = eval::eval_call(&p, "Main", std::slice::from_ref(&d), DEFAULT_FUEL);
        let b = eval::eval_call(&p, "Main", &[d], DEFAULT_FUEL);
        prop_assert_eq!(a, b);
    }

    /// One driving step on a ground configuration has one branch, and the
    /// successor evaluates to the same outcome.
    #[test]
    fn driving_agrees_with_evaluation(seed in any::<u64>(), steps in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = corpus::synapse_model();
        let d = support::gen::any_input(&mut rng, &["rm", "wh2", "wm"], 6);
        let want = eval::eval_call(&p, "Main", std::slice::from_ref(&d), DEFAULT_FUEL).unwrap();
        let mut clock = Clock::new();
        let call = lang::Expr::Call("Main".into(), vec![eval::data_to_expr(&d)]);
        let mut raw = config::from_surface(&call, &mut Default::default(), &mut clock);
        for _ in 0..steps {
            let cfg = match decompose(&raw) {
                Decomposed::Passive(_) => break,
                Decomposed::Stack { stack, ctx } => Configuration::new(stack, ctx),
            };
            let StepResult::Branches(bs) = driving::drive(&cfg, &p, &mut clock).unwrap() else { unreachable!() };
            prop_assert_eq!(bs.len(), 1);
            prop_assert!(bs[0].contraction.is_empty());
            match &bs[0].outcome {
                Outcome::Next { raw: next, .. } => raw = next.clone(),
                Outcome::Stuck => {
                    prop_assert_eq!(&want, &EvalOutcome::Undefined);
                    return Ok(());
                }
            }
            let got = eval::eval_expr(&p, &config::to_surface(&raw), DEFAULT_FUEL).unwrap();
            prop_assert_eq!(&got, &want);
        }
    }
}
