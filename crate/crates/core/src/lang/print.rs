use std::fmt::Write;

use super::ast::*;

pub fn print_symbol(s: &Symbol, out: &mut String) {
    match s {
        Symbol::Ident(n) => out.push_str(n),
        Symbol::Char(c) => {
            out.push('\'');
            match c {
                '\'' => out.push_str("\\'"),
                '\\' => out.push_str("\\\\"),
                '\n' => out.push_str("\\n"),
                '\t' => out.push_str("\\t"),
                c => out.push(*c),
            }
            out.push('\'');
        }
    }
}

fn print_term(t: &Term, out: &mut String) {
    match t {
        Term::SVar(v) => write!(out, "{v}").unwrap(),
        Term::Sym(s) => print_symbol(s, out),
        Term::Paren(e) => {
            out.push('(');
            if **e != Expr::Nil {
                print_expr_into(e, out);
            }
            out.push(')');
        }
    }
}

pub fn print_expr_into(e: &Expr, out: &mut String) {
    match e {
        Expr::Nil => out.push_str("[]"),
        Expr::Var(v) => write!(out, "{v}").unwrap(),
        Expr::Cons(t, rest) => {
            print_term(t, out);
            if **rest != Expr::Nil {
                out.push(' ');
                print_expr_into(rest, out);
            }
        }
        Expr::Call(f, args) => {
            out.push_str(f);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                print_expr_into(a, out);
            }
            out.push(')');
        }
        Expr::Append(a, b) => {
            print_expr_into(a, out);
            out.push_str(" ++ ");
            print_expr_into(b, out);
        }
    }
}

/// Prints an expression; the argument is canonicalized first so that the
/// output always reparses to the canonical form.
pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    print_expr_into(&e.canonical(), &mut out);
    out
}

pub fn print_pattern(p: &Pattern) -> String {
    print_expr(&p.to_expr())
}

pub fn print_rule(r: &Rule) -> String {
    let lhs: Vec<String> = r.lhs.iter().map(print_pattern).collect();
    format!("{} => {};", lhs.join(", "), print_expr(&r.rhs))
}

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for (i, (name, def)) in p.defs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "{name} {{").unwrap();
        for r in &def.rules {
            writeln!(out, "    {}", print_rule(r)).unwrap();
        }
        out.push_str("}\n");
    }
    out
}
