mod support;

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scpv_core::config::{App, Clock, Configuration, PExpr, Seg};
use scpv_core::transform::{fold_instance, instance_holds, invert_renaming, msg, split_task};

/// `F(d1), G(d2 •), •` with labels 10 and 11.
fn config(rng: &mut impl Rng, clock: &mut Clock, depth: usize) -> Configuration {
    let mut stack = vec![App { name: Arc::from("F"), args: vec![support::gen::param_data(rng, 2, clock)], time: 10 }];
    for i in 1..depth {
        let mut arg = support::gen::param_data(rng, 1, clock).0;
        let at = rng.gen_range(0..=arg.len());
        arg.insert(at, Seg::Bullet);
        stack.push(App { name: Arc::from(format!("G{i}")), args: vec![PExpr(arg)], time: 10 + i as u64 });
    }
    Configuration::new(stack, PExpr::bullet())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn msg_equations_hold(seed in any::<u64>(), depth in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut clock = Clock::new();
        let c1 = config(&mut rng, &mut clock, depth);
        // Same labels and shape, different contents.
        let mut rng2 = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let c2 = config(&mut rng2, &mut clock, depth);
        let g = msg(&c1, &c2, &mut clock).unwrap();
        prop_assert!(instance_holds(&g.gen, &g.theta1, &c1));
        prop_assert!(instance_holds(&g.gen, &g.theta2, &c2));
        prop_assert!(g.gen.check().is_ok());
        // Both sides are found again as instances.
        for c in [&c1, &c2] {
            let th = fold_instance(&g.gen, c);
            prop_assert!(th.is_some(), "{} is not an instance of {}", c, g.gen);
            prop_assert!(instance_holds(&g.gen, &th.unwrap(), c));
        }
    }

    #[test]
    fn msg_of_a_configuration_with_itself_is_a_renaming(seed in any::<u64>(), depth in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut clock = Clock::new();
        let c = config(&mut rng, &mut clock, depth);
        let g = msg(&c, &c, &mut clock).unwrap();
        prop_assert!(invert_renaming(&g.theta1).is_some(), "{:?}", g.theta1);
    }

    #[test]
    fn fold_instance_is_checked_by_reapplication(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut clock = Clock::new();
        let c1 = config(&mut rng, &mut clock, 2);
        let c2 = config(&mut rng, &mut clock, 2);
        if let Some(th) = fold_instance(&c1, &c2) {
            prop_assert!(instance_holds(&c1, &th, &c2));
        }
    }

    #[test]
    fn splitting_then_plugging_restores_the_configuration(seed in any::<u64>(), depth in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut clock = Clock::new();
        let c = config(&mut rng, &mut clock, depth);
        let l = rng.gen_range(2..=depth + 1);
        let h = clock.fresh();
        let (prefix, rest) = split_task(&c, l, h).unwrap();
        prop_assert_eq!(prefix.len(), l - 1);
        prop_assert!(prefix.check().is_ok() && rest.check().is_ok() || rest.is_empty());
        let v = prefix.to_raw();
        let hole: scpv_core::config::Subst = [(h, v)].into_iter().collect();
        prop_assert_eq!(scpv_core::config::apply_subst(&rest.to_raw(), &hole), c.to_raw());
    }
}

#[test]
fn msg_rejects_different_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut clock = Clock::new();
    let a = config(&mut rng, &mut clock, 1);
    let b = config(&mut rng, &mut clock, 2);
    assert!(msg(&a, &b, &mut clock).is_err());
}

#[test]
fn split_index_is_checked() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut clock = Clock::new();
    let c = config(&mut rng, &mut clock, 2);
    assert!(split_task(&c, 1, 99).is_err());
    assert!(split_task(&c, 4, 99).is_err());
}
