//! Lexer and recursive-descent parser for the `.l` concrete syntax.

use std::sync::Arc;

use super::ast::*;
use super::validate::{validate, Severity};
use super::LangError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    /// Identifier; the flag is set when `(` follows with no whitespace.
    Ident(Arc<str>, bool),
    Char(char),
    SVar(Arc<str>),
    EVar(Arc<str>),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Nil,
    Colon,
    Comma,
    Semi,
    Arrow,
    Concat,
    Eof,
}

#[derive(Clone, Debug)]
struct Lexeme {
    tok: Tok,
    span: Span,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn syntax(span: Span, msg: impl Into<String>) -> LangError {
    LangError::Syntax { line: span.line, col: span.col, msg: msg.into() }
}

fn lex(text: &str) -> Result<Vec<Lexeme>, LangError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let simple = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ':' => Some(Tok::Colon),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            _ => None,
        };
        if let Some(tok) = simple {
            bump!();
            out.push(Lexeme { tok, span });
            continue;
        }
        match c {
            '[' => {
                bump!();
                if chars.get(i) != Some(&']') {
                    return Err(syntax(span, "expected `]` after `[`"));
                }
                bump!();
                out.push(Lexeme { tok: Tok::Nil, span });
            }
            '=' => {
                bump!();
                if chars.get(i) != Some(&'>') {
                    return Err(syntax(span, "expected `=>`"));
                }
                bump!();
                out.push(Lexeme { tok: Tok::Arrow, span });
            }
            '+' => {
                bump!();
                if chars.get(i) != Some(&'+') {
                    return Err(syntax(span, "expected `++`"));
                }
                bump!();
                out.push(Lexeme { tok: Tok::Concat, span });
            }
            '\'' => {
                bump!();
                let ch = match chars.get(i) {
                    None => return Err(syntax(span, "unterminated character literal")),
                    Some('\\') => {
                        bump!();
                        let e = match chars.get(i) {
                            Some('n') => '\n',
                            Some('t') => '\t',
                            Some('\\') => '\\',
                            Some('\'') => '\'',
                            _ => return Err(syntax(span, "bad escape in character literal")),
                        };
                        bump!();
                        e
                    }
                    Some(&ch) => {
                        bump!();
                        ch
                    }
                };
                if chars.get(i) != Some(&'\'') {
                    return Err(syntax(span, "character literal must hold exactly one character"));
                }
                bump!();
                out.push(Lexeme { tok: Tok::Char(ch), span });
            }
            c if is_ident_char(c) => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    bump!();
                }
                let word: String = chars[start..i].iter().collect();
                if (word == "s" || word == "e") && chars.get(i) == Some(&'.') {
                    bump!();
                    let vstart = i;
                    while i < chars.len() && is_ident_char(chars[i]) {
                        bump!();
                    }
                    if vstart == i {
                        return Err(syntax(span, "expected variable name after `.`"));
                    }
                    let name: Arc<str> = chars[vstart..i].iter().collect::<String>().into();
                    let tok = if word == "s" { Tok::SVar(name) } else { Tok::EVar(name) };
                    out.push(Lexeme { tok, span });
                } else {
                    let call = chars.get(i) == Some(&'(');
                    out.push(Lexeme { tok: Tok::Ident(word.into(), call), span });
                }
            }
            other => return Err(syntax(span, format!("unexpected character {other:?}"))),
        }
    }
    out.push(Lexeme { tok: Tok::Eof, span: Span { line, col } });
    Ok(out)
}

struct Parser {
    toks: Vec<Lexeme>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), LangError> {
        if *self.peek() == t {
            self.next();
            Ok(())
        } else {
            Err(syntax(self.span(), format!("expected {what}, found {}", describe(self.peek()))))
        }
    }

    fn program(&mut self) -> Result<Program, LangError> {
        let mut prog = Program::default();
        while *self.peek() != Tok::Eof {
            let span = self.span();
            let name = match self.next() {
                Tok::Ident(n, _) => n,
                t => return Err(syntax(span, format!("expected function name, found {}", describe(&t)))),
            };
            if prog.defs.contains_key(&name) {
                return Err(syntax(span, format!("function {name} defined twice")));
            }
            self.expect(Tok::LBrace, "`{`")?;
            let mut rules = Vec::new();
            while *self.peek() != Tok::RBrace {
                rules.push(self.rule()?);
                match self.peek() {
                    Tok::Semi => {
                        self.next();
                    }
                    Tok::RBrace => {}
                    t => return Err(syntax(self.span(), format!("expected `;`, found {}", describe(t)))),
                }
            }
            self.next();
            let arity = rules.first().map_or(0, |r: &Rule| r.lhs.len());
            prog.defs.insert(name, FunDef { arity, rules, span });
        }
        Ok(prog)
    }

    fn rule(&mut self) -> Result<Rule, LangError> {
        let span = self.span();
        let mut lhs = Vec::new();
        loop {
            let pspan = self.span();
            let e = self.expr()?;
            let p = Pattern::from_expr(&e)
                .ok_or_else(|| syntax(pspan, "patterns may not contain calls or `++`"))?;
            lhs.push(p);
            if *self.peek() == Tok::Comma {
                self.next();
            } else {
                break;
            }
        }
        self.expect(Tok::Arrow, "`=>`")?;
        let rhs = self.expr()?;
        Ok(Rule { lhs, rhs, span })
    }

    fn expr(&mut self) -> Result<Expr, LangError> {
        let mut items = self.seq()?;
        while *self.peek() == Tok::Concat {
            self.next();
            items.extend(self.seq()?);
        }
        Ok(Expr::from_items(items))
    }

    fn seq(&mut self) -> Result<Vec<Item>, LangError> {
        let mut items = Vec::new();
        let mut after_colon = false;
        loop {
            let span = self.span();
            let item = match self.peek().clone() {
                Tok::Ident(name, false) => {
                    self.next();
                    Item::Term(Term::Sym(Symbol::Ident(name)))
                }
                Tok::Ident(name, true) => {
                    self.next();
                    self.next();
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        loop {
                            args.push(self.expr()?);
                            if *self.peek() == Tok::Comma {
                                self.next();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen, "`)` closing the argument list")?;
                    Item::Call(name, args)
                }
                Tok::Char(c) => {
                    self.next();
                    Item::Term(Term::Sym(Symbol::Char(c)))
                }
                Tok::SVar(n) => {
                    self.next();
                    Item::Term(Term::SVar(Var { kind: VarKind::S, name: n }))
                }
                Tok::EVar(n) => {
                    self.next();
                    Item::EVar(Var { kind: VarKind::E, name: n })
                }
                Tok::LParen => {
                    self.next();
                    let inner = if *self.peek() == Tok::RParen { Expr::Nil } else { self.expr()? };
                    self.expect(Tok::RParen, "`)`")?;
                    Item::Term(Term::Paren(Box::new(inner)))
                }
                Tok::Nil => {
                    self.next();
                    if self.starts_item() || *self.peek() == Tok::Colon {
                        return Err(syntax(span, "`[]` must end its sequence"));
                    }
                    return Ok(items);
                }
                _ => {
                    if items.is_empty() || after_colon {
                        return Err(syntax(span, format!("expected an expression, found {}", describe(self.peek()))));
                    }
                    return Ok(items);
                }
            };
            let is_term = matches!(item, Item::Term(_));
            items.push(item);
            if *self.peek() == Tok::Colon {
                if !is_term {
                    return Err(syntax(self.span(), "only a term may precede `:`; use `++`"));
                }
                self.next();
                after_colon = true;
                continue;
            }
            after_colon = false;
            if !is_term && self.starts_item() {
                return Err(syntax(self.span(), "an e-variable or call must end its sequence; use `++`"));
            }
            if !self.starts_item() {
                return Ok(items);
            }
        }
    }

    fn starts_item(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(..) | Tok::Char(_) | Tok::SVar(_) | Tok::EVar(_) | Tok::LParen | Tok::Nil
        )
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(n, _) => format!("identifier `{n}`"),
        Tok::Char(c) => format!("character {c:?}"),
        Tok::SVar(n) => format!("`s.{n}`"),
        Tok::EVar(n) => format!("`e.{n}`"),
        Tok::Eof => "end of input".into(),
        other => format!("{other:?}"),
    }
}

/// Parses and validates a program. Warnings are dropped; errors fail.
pub fn parse_program(text: &str) -> Result<Program, LangError> {
    let prog = parse_program_unchecked(text)?;
    let errors: Vec<_> = validate(&prog).into_iter().filter(|d| d.severity == Severity::Error).collect();
    if errors.is_empty() {
        Ok(prog)
    } else {
        Err(LangError::Invalid(errors))
    }
}

/// Parses without running validation.
pub fn parse_program_unchecked(text: &str) -> Result<Program, LangError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let mut prog = p.program()?;
    // A definition without rules takes its arity from its first call site.
    let mut seen = std::collections::HashMap::new();
    for def in prog.defs.values() {
        for r in &def.rules {
            r.rhs.visit_calls(&mut |f, n| {
                seen.entry(f.to_string()).or_insert(n);
            });
        }
    }
    for (name, def) in prog.defs.iter_mut() {
        if def.rules.is_empty() {
            def.arity = seen.get(&**name).copied().unwrap_or(0);
        }
    }
    Ok(prog)
}

/// Parses a single expression; free variables are allowed.
pub fn parse_expr(text: &str) -> Result<Expr, LangError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    if *p.peek() == Tok::Eof {
        return Ok(Expr::Nil);
    }
    let e = p.expr()?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(e)
}

/// Parses a comma-separated list of expressions.
pub fn parse_args(text: &str) -> Result<Vec<Expr>, LangError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    if *p.peek() == Tok::Eof {
        return Ok(vec![Expr::Nil]);
    }
    let mut out = vec![p.expr()?];
    while *p.peek() == Tok::Comma {
        p.next();
        out.push(p.expr()?);
    }
    p.expect(Tok::Eof, "end of input")?;
    Ok(out)
}
