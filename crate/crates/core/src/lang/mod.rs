//! Abstract syntax, concrete syntax and validation for L.

mod ast;
mod parse;
mod print;
mod validate;

pub use ast::*;
pub use parse::{parse_args, parse_expr, parse_program, parse_program_unchecked};
pub use print::{print_expr, print_pattern, print_program, print_rule, print_symbol};
pub use validate::{has_errors, validate, Diagnostic, Severity, RESERVED_CHARS, RESERVED_IDENTS};

#[derive(Debug, thiserror::Error)]
pub enum LangError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
}
