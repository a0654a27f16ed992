mod support;

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scpv_core::config::{self, apply_subst, from_data, App, Clock, Configuration, PExpr, ParamId, Seg, Subst};
use scpv_core::driving::{self, Outcome, StepResult};
use scpv_core::eval::{self, DTerm, Data, EvalOutcome};
use scpv_core::lang::{Expr, FunDef, Program, Rule, Span, Symbol};
use scpv_core::transform::match_args;

fn ground(rng: &mut impl Rng, e: &PExpr) -> (Subst, Data) {
    let mut g = Subst::new();
    for (p, k) in e.params() {
        let v = match k {
            config::ParamKind::S => vec![DTerm::Sym(support::gen::symbol(rng))],
            config::ParamKind::E => support::gen::data(rng, 1, 2),
        };
        g.insert(p, from_data(&v));
    }
    let d = config::to_data(&apply_subst(e, &g)).unwrap();
    (g, d)
}

/// `F` with rules marked by their index.
fn marked_program(rng: &mut impl Rng) -> Program {
    let mut rules = Vec::new();
    for i in 0..rng.gen_range(1..=3) {
        let mut n = 0;
        let lhs = support::gen::pattern(rng, 2, &mut n);
        rules.push(Rule::new(vec![lhs], Expr::sym(Symbol::ident(&format!("R{i}")), Expr::Nil)));
    }
    let mut p = Program::default();
    p.defs.insert(Arc::from("F"), FunDef { arity: 1, rules, span: Span::default() });
    p
}

fn covers(theta: &Subst, g: &Subst) -> bool {
    let dom: Vec<ParamId> = theta.keys().copied().filter(|p| g.contains_key(p)).collect();
    let pats: Vec<PExpr> = dom.iter().map(|p| theta[p].clone()).collect();
    let data: Vec<PExpr> = dom.iter().map(|p| g[p].clone()).collect();
    match_args(&pats, &data).is_some()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Each ground instance behaves as the first branch covering it says,
    /// and some branch always covers it.
    #[test]
    fn narrowing_is_sound_and_complete(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = marked_program(&mut rng);
        let mut clock = Clock::new();
        let d = support::gen::param_data(&mut rng, 2, &mut clock);
        let cfg = Configuration::new(
            vec![App { name: Arc::from("F"), args: vec![d.clone()], time: clock.tick() }],
            PExpr::bullet(),
        );
        let r = driving::drive(&cfg, &p, &mut clock);
        let Ok(StepResult::Branches(bs)) = r else { return Err(TestCaseError::fail(format!("{r:?}"))) };
        for b in &bs {
            if let Outcome::Next { raw, .. } = &b.outcome {
                prop_assert!(!raw.has_bullet());
            }
            prop_assert!(cfg.apply(&b.contraction).check().is_ok());
        }
        for _ in 0..50 {
            let (g, data) = ground(&mut rng, &d);
            let want = eval::eval_call(&p, "F", &[data], 1000).unwrap();
            // Contractions carry no negative information: an instance
            // belongs to the first sibling covering it.
            let first = bs.iter().find(|b| covers(&b.contraction, &g));
            let Some(b) = first else { return Err(TestCaseError::fail(format!("no branch covers {g:?} for {d}"))) };
            match (&b.outcome, &want) {
                (Outcome::Next { rule, .. }, EvalOutcome::Value(v)) => {
                    prop_assert_eq!(v, &vec![DTerm::ident(&format!("R{rule}"))]);
                }
                (Outcome::Stuck, EvalOutcome::Undefined) => {}
                (o, w) => return Err(TestCaseError::fail(format!("{d}: branch {o:?} but evaluation gives {w:?}"))),
            }
        }
    }
}

#[test]
fn passive_configurations_are_not_driven() {
    let p = Program::default();
    let mut clock = Clock::new();
    let c = Configuration::passive(PExpr(vec![Seg::Sym(Symbol::ident("X"))]));
    assert!(matches!(driving::drive(&c, &p, &mut clock), Ok(StepResult::Passive(_))));
}

#[test]
fn unknown_functions_are_errors() {
    let p = Program::default();
    let mut clock = Clock::new();
    let c = Configuration::new(vec![App { name: Arc::from("G"), args: vec![PExpr::new()], time: 0 }], PExpr::bullet());
    assert!(driving::drive(&c, &p, &mut clock).is_err());
}

#[test]
fn e_parameters_split_three_ways() {
    let mut clock = Clock::new();
    let cases = driving::split_cases(&mut clock);
    let shapes: Vec<String> = cases.iter().map(|c| c.to_string()).collect();
    assert_eq!(shapes.len(), 3);
    assert!(cases.iter().any(|c| c.is_empty()));
}
