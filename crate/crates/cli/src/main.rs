use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scpv_core::engine::{EngineError, Limits, Options, TraceLevel};
use scpv_core::eval::{self, DTerm, Data, EvalOutcome};
use scpv_core::lang::{self, Program, Symbol};
use scpv_core::verify::{self, Mode, Report, VerifyError, VerifyOptions};
use scpv_core::{corpus, encoding};

const EXIT_SAFE: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_UNDEFINED: u8 = 2;
const EXIT_UNSAFE: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "scpv", version, about = "Supercompilation-based verification of counting protocol models")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate FUNCTION on comma-separated ground arguments.
    Run {
        program: PathBuf,
        function: String,
        #[arg(default_value = "")]
        args: String,
        #[arg(long, default_value_t = eval::DEFAULT_FUEL)]
        fuel: u64,
    },
    /// Check that the unsafe symbol is unreachable in a protocol model.
    Verify {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = CliMode::Direct)]
        mode: CliMode,
        #[arg(long, default_value_t = 1)]
        passes: usize,
        #[arg(long, default_value = "False")]
        unsafe_symbol: String,
        /// Name under which the model is known to the self-interpreter.
        #[arg(long, default_value = "Synapse")]
        program_name: String,
        /// Overrides the first-pass entry application.
        #[arg(long)]
        entry: Option<String>,
        /// Compare the last residual against the model on this many random streams.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 8)]
        max_stream: usize,
        #[arg(long)]
        residual_out: Option<PathBuf>,
        #[arg(long)]
        report_json: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Print the encoding of a program's definitions as `.l` data.
    Encode {
        program: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Supercompile one entry application and print the residual program.
    Supercompile {
        program: PathBuf,
        #[arg(long)]
        entry: String,
        /// Load PROGRAM into the self-interpreter under this name first.
        #[arg(long)]
        interpret_as: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Generate a model from a counting protocol spec.
    Generate {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit rules for events that change no counter.
        #[arg(long)]
        identity_events: bool,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum CliMode {
    Direct,
    Indirect,
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long)]
    max_nodes: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    time_budget_s: Option<u64>,
    /// JSON-lines event trace; SCPV_TRACE_LEVEL sets the detail.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl EngineArgs {
    fn options(&self) -> Options {
        let mut limits = Limits::default();
        if let Some(n) = self.max_nodes {
            limits.max_nodes = n;
        }
        if let Some(d) = self.max_depth {
            limits.max_depth = d;
        }
        if let Some(t) = self.time_budget_s {
            limits.time_budget = Duration::from_secs(t);
        }
        Options { limits, trace_level: TraceLevel::from_env(), ..Options::default() }
    }

    /// Trace sink for pass `pass`; later passes append.
    fn trace_sink(&self, pass: usize) -> Option<Box<dyn Write + Send>> {
        let path = self.trace.as_ref()?;
        let file = if pass <= 1 { File::create(path) } else { OpenOptions::new().append(true).open(path) };
        match file {
            Ok(f) => {
                let mut w = BufWriter::new(f);
                let _ = writeln!(w, "{}", serde_json::json!({"v": 1, "ev": "Pass", "pass": pass}));
                Some(Box::new(w))
            }
            Err(e) => {
                log::error!("cannot open trace file {}: {e}", path.display());
                None
            }
        }
    }
}

fn read_program(path: &Path) -> Result<Program> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    lang::parse_program(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_out(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_symbol(s: &str) -> Symbol {
    match lang::parse_expr(s).ok().and_then(|e| eval::expr_to_data(&e)) {
        Some(d) if d.len() == 1 && matches!(d[0], DTerm::Sym(_)) => {
            let DTerm::Sym(sym) = &d[0] else { unreachable!() };
            sym.clone()
        }
        _ => Symbol::ident(s),
    }
}

/// `(events) (I^n)` with events drawn from `alphabet` plus one symbol no
/// rule expects, so that undefined runs are sampled too.
fn random_input(rng: &mut ChaCha8Rng, alphabet: &[Symbol], max_len: usize) -> Data {
    let len = rng.gen_range(0..=max_len);
    let stream = (0..len)
        .map(|_| {
            if rng.gen_ratio(1, 16) {
                DTerm::ident("nop")
            } else {
                DTerm::Sym(alphabet[rng.gen_range(0..alphabet.len())].clone())
            }
        })
        .collect();
    let procs = (0..rng.gen_range(0..4)).map(|_| DTerm::ident("I")).collect();
    vec![DTerm::paren(stream), DTerm::paren(procs)]
}

/// Event names: the leading symbols of the Event rules.
fn event_alphabet(model: &Program) -> Vec<Symbol> {
    let mut out: Vec<Symbol> = Vec::new();
    if let Some(def) = model.get("Event") {
        for r in &def.rules {
            if let Some(lang::Pattern::SymCons(s, _)) = r.lhs.first() {
                if !out.contains(s) {
                    out.push(s.clone());
                }
            }
        }
    }
    out
}

fn print_report(r: &Report) {
    for p in &r.passes {
        let s = &p.stats;
        println!(
            "pass {}: {}, {} residual functions, {} nodes, {} driven, {} whistle acts, {} folds, {} generalizations, {} splits, {} ms",
            p.pass,
            if p.verdict.safe { "safe" } else { "unsafe" },
            p.residual_functions,
            s.nodes,
            s.driven,
            s.whistle_acts,
            s.folds,
            s.generalizations,
            s.splits,
            p.elapsed_ms
        );
        println!(
            "  msg checks {}/{}, fold checks {}/{}, prop1 checked {} violations {}, corollary violations {}",
            s.msg_ok, s.msg_checks, s.fold_ok, s.fold_checks, s.prop1_checked, s.prop1_violations, s.corollary_violations
        );
        for w in &p.verdict.witnesses {
            println!("  unsafe symbol in {} rule {}", w.function, w.rule + 1);
        }
    }
    println!("verdict: {} after {} pass(es)", if r.safe { "safe" } else { "unsafe" }, r.passes.len());
}

fn budget_exit(e: &anyhow::Error) -> bool {
    matches!(e.downcast_ref::<VerifyError>(), Some(VerifyError::Engine(EngineError::Budget { .. })))
        || matches!(e.downcast_ref::<EngineError>(), Some(EngineError::Budget { .. }))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Run { program, function, args, fuel } => {
            let p = read_program(&program)?;
            if p.get(&function).is_none() {
                bail!("no function {function} in {}", program.display());
            }
            let args = eval::parse_data_args(&args)?;
            match eval::eval_call(&p, &function, &args, fuel)? {
                EvalOutcome::Value(d) => {
                    println!("{}", eval::print_data(&d));
                    Ok(EXIT_SAFE)
                }
                EvalOutcome::Undefined => {
                    println!("Undefined");
                    Ok(EXIT_UNDEFINED)
                }
            }
        }
        Cmd::Verify {
            model,
            mode,
            passes,
            unsafe_symbol,
            program_name,
            entry,
            samples,
            max_stream,
            residual_out,
            report_json,
            engine,
        } => {
            let m = read_program(&model)?;
            let mode = match mode {
                CliMode::Direct => Mode::Direct,
                CliMode::Indirect => Mode::Indirect,
            };
            let custom_entry = entry.is_some();
            let o = VerifyOptions {
                engine: engine.options(),
                passes,
                unsafe_symbol: parse_symbol(&unsafe_symbol),
                program_name: program_name.clone(),
                entry,
            };
            let report = verify::verify_protocol(&m, mode, &o, |pass| engine.trace_sink(pass))?;
            print_report(&report);
            if let Some(path) = &residual_out {
                fs::write(path, lang::print_program(&report.last().residual))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = &report_json {
                fs::write(path, serde_json::to_string_pretty(&report)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if samples > 0 {
                if custom_entry {
                    bail!("--samples needs the default entry");
                }
                let alphabet = event_alphabet(&m);
                if alphabet.is_empty() {
                    bail!("model has no Event rules to sample from");
                }
                let mut rng = ChaCha8Rng::seed_from_u64(engine.seed);
                let mut agree = 0;
                for _ in 0..samples {
                    let d = random_input(&mut rng, &alphabet, max_stream);
                    let a = verify::agreement(&m, &report.last().residual, mode, &program_name, &d, eval::DEFAULT_FUEL)?;
                    if a.holds() {
                        agree += 1;
                    } else {
                        println!("  disagreement on {}: model {:?}, residual {:?}", eval::print_data(&d), a.expected, a.got);
                    }
                }
                println!("residual agrees with the model on {agree}/{samples} sampled inputs (seed {})", engine.seed);
                if agree != samples {
                    return Ok(EXIT_ERROR);
                }
            }
            Ok(if report.safe { EXIT_SAFE } else { EXIT_UNSAFE })
        }
        Cmd::Encode { program, out } => {
            let p = read_program(&program)?;
            let d = encoding::encode_defs(&p)?;
            write_out(out.as_ref(), &format!("{}\n", eval::print_data(&d)))?;
            Ok(EXIT_SAFE)
        }
        Cmd::Supercompile { program, entry, interpret_as, out, engine } => {
            let mut p = read_program(&program)?;
            if let Some(name) = &interpret_as {
                p = verify::first_pass_program(&p, Mode::Indirect, name)?;
            }
            let (res, stats) = verify::supercompile_entry(&p, &entry, &engine.options(), engine.trace_sink(1))?;
            write_out(out.as_ref(), &lang::print_program(&res))?;
            eprintln!(
                "{} residual functions, {} nodes, {} folds, {} generalizations; msg checks {}/{}, fold checks {}/{}",
                res.defs.len(),
                stats.nodes,
                stats.folds,
                stats.generalizations,
                stats.msg_ok,
                stats.msg_checks,
                stats.fold_ok,
                stats.fold_checks
            );
            Ok(EXIT_SAFE)
        }
        Cmd::Generate { spec, out, identity_events } => {
            let text = fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let s = corpus::parse_protocol_spec(&text)?;
            let src = corpus::generate_model_source(&s, corpus::GenOptions { identity_events })?;
            write_out(out.as_ref(), &src)?;
            Ok(EXIT_SAFE)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = eval::with_big_stack(move || match run(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            if budget_exit(&e) {
                EXIT_BUDGET
            } else {
                EXIT_ERROR
            }
        }
    });
    ExitCode::from(code)
}
