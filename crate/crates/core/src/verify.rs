//! Safety verification of protocol models, directly or through the
//! self-interpreter.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::config::{self, Clock, PExpr, VarBinding};
use crate::corpus::{self, CorpusError};
use crate::encoding::{self, EncodeError};
use crate::engine::{self, EngineError, Options, Stats};
use crate::eval::{self, DTerm, Data, EvalError, EvalOutcome};
use crate::lang::{self, Expr, Program, Symbol};
use crate::residual::{self, ResidualError};

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Residual(#[from] ResidualError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Lang(#[from] lang::LangError),
    #[error("{0}")]
    Entry(String),
}

/// Where the unsafe symbol occurs in a program.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub function: String,
    pub rule: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SafetyVerdict {
    pub safe: bool,
    pub witnesses: Vec<Witness>,
}

/// Scans every right-hand side for `symbol`.
pub fn verify_safety(p: &Program, symbol: &Symbol) -> SafetyVerdict {
    let mut witnesses = Vec::new();
    for (name, def) in &p.defs {
        for (i, r) in def.rules.iter().enumerate() {
            let mut hit = false;
            r.rhs.visit_syms(&mut |s| hit |= s == symbol);
            if hit {
                witnesses.push(Witness { function: name.to_string(), rule: i });
            }
        }
    }
    SafetyVerdict { safe: witnesses.is_empty(), witnesses }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    Direct,
    Indirect,
}

/// An entry application whose arguments may contain variables; ground
/// inputs are turned into residual arguments by matching.
#[derive(Clone, Debug)]
pub struct EntryTemplate {
    pub expr: Expr,
    pub fname: String,
}

impl EntryTemplate {
    pub fn parse(text: &str) -> Result<EntryTemplate, VerifyError> {
        let expr = lang::parse_expr(text)?;
        match &expr {
            Expr::Call(f, args) if !args.iter().any(Expr::has_call) => {
                Ok(EntryTemplate { fname: f.to_string(), expr })
            }
            _ => Err(VerifyError::Entry(format!("entry must be one application over passive arguments: {text}"))),
        }
    }

    /// The template with its variables as parameters.
    pub fn raw(&self) -> PExpr {
        let mut clock = Clock::new();
        config::from_surface(&self.expr, &mut VarBinding::default(), &mut clock)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PassReport {
    pub pass: usize,
    pub entry: String,
    #[serde(skip)]
    pub residual: Program,
    pub residual_functions: usize,
    pub verdict: SafetyVerdict,
    pub stats: Stats,
    pub elapsed_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub mode: Mode,
    pub passes: Vec<PassReport>,
    pub safe: bool,
}

impl Report {
    pub fn last(&self) -> &PassReport {
        self.passes.last().expect("at least one pass")
    }
}

pub struct VerifyOptions {
    pub engine: Options,
    pub passes: usize,
    pub unsafe_symbol: Symbol,
    pub program_name: String,
    /// Overrides the first-pass entry.
    pub entry: Option<String>,
}

impl Default for VerifyOptions {
    fn default() -> VerifyOptions {
        VerifyOptions {
            engine: Options::default(),
            passes: 1,
            unsafe_symbol: Symbol::ident("False"),
            program_name: "Synapse".into(),
            entry: None,
        }
    }
}

/// `Main(<lhs of the first Main rule>)`.
pub fn direct_entry(model: &Program) -> Result<String, VerifyError> {
    let def = model.get("Main").ok_or_else(|| VerifyError::Entry("model has no Main".into()))?;
    let rule = def.rules.first().ok_or_else(|| VerifyError::Entry("Main has no rules".into()))?;
    let args: Vec<String> = rule.lhs.iter().map(lang::print_pattern).collect();
    Ok(format!("Main({})", args.join(", ")))
}

pub fn indirect_entry(name: &str) -> String {
    format!("Int((Call Main e.d), (Prog {name}))")
}

/// The program the first pass runs on.
pub fn first_pass_program(model: &Program, mode: Mode, name: &str) -> Result<Program, VerifyError> {
    Ok(match mode {
        Mode::Direct => model.clone(),
        Mode::Indirect => {
            let mut progs = BTreeMap::new();
            progs.insert(name.to_string(), encoding::encode_defs(model)?);
            corpus::self_interpreter(&progs)?
        }
    })
}

pub fn supercompile_entry(
    p: &Program,
    entry: &str,
    opts: &Options,
    trace: Option<Box<dyn Write + Send>>,
) -> Result<(Program, Stats), VerifyError> {
    let t = EntryTemplate::parse(entry)?;
    let sc = engine::supercompile(p, &t.expr, opts.clone(), trace)?;
    let prog = residual::build_residual(&sc.graph, &sc.entry)?;
    Ok((prog, sc.stats))
}

/// Runs `passes` supercompilations, each on the residual of the previous
/// one. The residual entry function keeps the name and argument patterns of
/// the entry, so every pass uses the same entry. The verdict is that of the
/// last pass.
pub fn verify_protocol(
    model: &Program,
    mode: Mode,
    o: &VerifyOptions,
    mut trace: impl FnMut(usize) -> Option<Box<dyn Write + Send>>,
) -> Result<Report, VerifyError> {
    let entry = match (&o.entry, mode) {
        (Some(e), _) => e.clone(),
        (None, Mode::Direct) => direct_entry(model)?,
        (None, Mode::Indirect) => indirect_entry(&o.program_name),
    };
    let mut prog = first_pass_program(model, mode, &o.program_name)?;
    let mut passes = Vec::new();
    for pass in 1..=o.passes.max(1) {
        let started = Instant::now();
        let mut eopts = o.engine.clone();
        eopts.limits.time_budget = eopts.limits.time_budget.saturating_sub(Duration::from_millis(
            passes.iter().map(|p: &PassReport| p.elapsed_ms as u64).sum(),
        ));
        let (residual, stats) = supercompile_entry(&prog, &entry, &eopts, trace(pass))?;
        let verdict = verify_safety(&residual, &o.unsafe_symbol);
        passes.push(PassReport {
            pass,
            entry: entry.clone(),
            residual_functions: residual.defs.len(),
            residual: residual.clone(),
            verdict,
            stats,
            elapsed_ms: started.elapsed().as_millis(),
        });
        prog = residual;
    }
    let safe = passes.last().is_some_and(|p| p.verdict.safe);
    Ok(Report { mode, passes, safe })
}

/// Outcomes of the model and of a residual on one input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Agreement {
    pub expected: EvalOutcome,
    pub got: EvalOutcome,
}

impl Agreement {
    pub fn holds(&self) -> bool {
        self.expected == self.got
    }
}

/// Runs `Main(input)` on the model and the corresponding entry on a residual
/// built with the default entry of `mode`. Indirect residuals answer with
/// encoded data, which is decoded before comparison.
pub fn agreement(
    model: &Program,
    residual: &Program,
    mode: Mode,
    program_name: &str,
    input: &Data,
    fuel: u64,
) -> Result<Agreement, EvalError> {
    let expected = eval::eval_call(model, "Main", std::slice::from_ref(input), fuel)?;
    let got = match mode {
        Mode::Direct => eval::eval_call(residual, "Main", std::slice::from_ref(input), fuel)?,
        Mode::Indirect => {
            let mut call = vec![DTerm::ident(encoding::CALL), DTerm::ident("Main")];
            call.extend(encoding::encode_data(input));
            let args = [vec![DTerm::paren(call)], vec![DTerm::paren(vec![DTerm::ident("Prog"), DTerm::ident(program_name)])]];
            match eval::eval_call(residual, "Int", &args, fuel)? {
                EvalOutcome::Value(v) => match encoding::decode_data(&v) {
                    Some(d) => EvalOutcome::Value(d),
                    // Not the image of any value; never equal to a model result.
                    None => EvalOutcome::Value(vec![DTerm::ident("Call"), DTerm::paren(v)]),
                },
                EvalOutcome::Undefined => EvalOutcome::Undefined,
            }
        }
    };
    Ok(Agreement { expected, got })
}
