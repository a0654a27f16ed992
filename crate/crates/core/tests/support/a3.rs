//! The path of the non-transitivity example for Turchin's relation.

use scpv_core::config::{self, decompose, Clock, Configuration, Decomposed, VarBinding};
use scpv_core::driving::fire_rule;
use scpv_core::lang::{parse_expr, parse_program, Program};

const SRC: &str = "
Main { e.xs => C(Fb(Fab(e.xs))); }
Fab {
    [] => 'c';
    'a' : e.xs => 'b' : Fab(e.xs);
    e.xs => Fc(Fab(e.xs));
}
Fc {
    [] => [];
    'c' : e.xs => 'd' : 'd';
    s.y : e.xs => s.y : Fc(e.xs);
}
F {
    [] => [];
    e.xs => Fc(Fab(e.xs));
}
Fb {
    [] => [];
    'b' : e.xs => 'b' : e.xs;
    s.y : e.xs => E(s.y : Fb(F(e.xs)));
}
C { e.x => e.x; }
E { e.x => e.x; }
";

fn step(p: &Program, c: &Configuration, rule: usize, clock: &mut Clock) -> Configuration {
    let (_, raw) = fire_rule(c, p, rule, clock).expect("rule fires");
    match decompose(&raw) {
        Decomposed::Stack { stack, ctx } => Configuration::new(stack, ctx),
        Decomposed::Passive(_) => panic!("path ended early"),
    }
}

pub fn path() -> Vec<Configuration> {
    let p = parse_program(SRC).unwrap();
    let mut clock = Clock::new();
    let raw = config::from_surface(&parse_expr("Main(e.xs)").unwrap(), &mut VarBinding::default(), &mut clock);
    let Decomposed::Stack { stack, ctx } = decompose(&raw) else { unreachable!() };
    let mut out = vec![Configuration::new(stack, ctx)];
    // R0, R3, R1, R5, R11, R8 as indices within their functions.
    for rule in [0, 2, 0, 1, 2, 1] {
        let next = step(&p, out.last().unwrap(), rule, &mut clock);
        out.push(next);
    }
    out
}

pub fn show(apps: &[config::App]) -> String {
    apps.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")
}
