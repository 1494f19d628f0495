//! The `krealize` command line, as a library so tests can drive it without
//! spawning a process.

pub mod golden;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use krealize_core::combinators::{fixture_entry, fixture_table, numeral};
use krealize_core::compile::{compile_closed, compile_lambda};
use krealize_core::derivation::{check_derivation, parse_derivation};
use krealize_core::kam::{run, run_final, Terminal, DEFAULT_BUDGET};
use krealize_core::pole::{Pole, DEFAULT_DEPTH};
use krealize_core::realizer::{extract, generate, Kind, PipelineInputs};
use krealize_core::star::{
    bbot_member, default_window, meet, star, star_numeral, BMember, BProcess,
};
use krealize_core::suite;
use krealize_core::syntax::{
    parse_bprocess, parse_condition, parse_cterm, parse_lambda, parse_process, parse_stack,
    parse_term, print_condition, print_lambda, print_process, print_stack, print_term,
    PrintOptions, PrintStyle,
};
use krealize_core::truth::parse_formula;
use krealize_core::{Process, Term};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_SUITE: i32 = 3;

/// Environment variable overriding the default step budget.
pub const MAX_STEPS_VAR: &str = "KREALIZE_MAX_STEPS";

#[derive(Debug, Parser)]
#[command(
    name = "krealize",
    version,
    about = "Classical realizability workbench"
)]
pub struct Cli {
    /// Line-delimited JSON output with fields kind, input, result, steps.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write every application as `(t)u`.
    #[arg(long, global = true)]
    paper_style: bool,
    /// Fewest parentheses.
    #[arg(long, global = true, conflicts_with = "paper_style")]
    plain: bool,
    /// Print numerals in brace notation.
    #[arg(long, global = true)]
    sugar: bool,
    /// Step budget; defaults to $KREALIZE_MAX_STEPS, then 100000.
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse text and print it back in canonical form.
    Parse {
        text: String,
        #[arg(long, value_enum, default_value_t = Category::Term)]
        category: Category,
        /// Print a term as its head and argument list.
        #[arg(long)]
        spine: bool,
    },
    /// Compile a λ-term to a combinator term.
    Compile {
        text: String,
        /// Reject free variables.
        #[arg(long)]
        closed: bool,
    },
    /// Run a process on the machine.
    Run {
        process: String,
        /// Print every state.
        #[arg(long)]
        trace: bool,
        /// With --trace, only print the first and last N states.
        #[arg(long)]
        keep: Option<usize>,
    },
    /// The starred translation of a combinator term.
    Star { term: String },
    /// The numeral n̄, or n̄* with --star.
    Numeral {
        n: usize,
        #[arg(long)]
        star: bool,
    },
    /// A named fixture term.
    Fixture {
        name: Option<String>,
        #[arg(long, value_enum)]
        form: Option<Form>,
        /// List the fixtures.
        #[arg(long)]
        list: bool,
    },
    /// Pole membership queries.
    Pole {
        #[command(subcommand)]
        query: PoleQuery,
    },
    /// Generate θ or τ for a formula.
    Gen {
        #[arg(long, value_parser = parse_kind)]
        kind: Kind,
        #[arg(long)]
        formula: PathBuf,
    },
    /// Assemble the extracted program from its pieces.
    Extract {
        #[arg(long)]
        phi0: PathBuf,
        #[arg(long)]
        formula: PathBuf,
        #[arg(long)]
        h: Option<PathBuf>,
        #[arg(long)]
        delta: Option<PathBuf>,
    },
    /// Check a derivation file.
    CheckProof { file: PathBuf },
    /// Run the property suite: `all` or a criterion number.
    Suite {
        #[arg(default_value = "all")]
        which: String,
    },
}

#[derive(Debug, Subcommand)]
enum PoleQuery {
    /// Is `ξ ⋆ π` in the pole?
    Member {
        process: String,
        #[command(flatten)]
        pole: PoleArgs,
    },
    /// Is `(ξ, p) ⋆ (π, q)` in the extended pole?
    Bmember {
        bprocess: String,
        #[command(flatten)]
        pole: PoleArgs,
        /// Values of n to try, `a..b`; defaults to dom..dom+6.
        #[arg(long)]
        window: Option<String>,
    },
}

#[derive(Debug, Args)]
struct PoleArgs {
    #[arg(long, value_enum, default_value_t = PoleKind::Thread)]
    kind: PoleKind,
    #[arg(long, default_value_t = 0)]
    i: u8,
    #[arg(long, default_value_t = 0)]
    j: u8,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    depth: u32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PoleKind {
    Thread,
    Global,
    Empty,
    Everything,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Category {
    Cterm,
    Term,
    Stack,
    Process,
    Lambda,
    Condition,
    Bprocess,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Form {
    Printed,
    Lambda,
}

fn parse_kind(s: &str) -> Result<Kind, String> {
    Kind::from_name(s)
        .ok_or_else(|| format!("unknown kind {s:?}; expected theta0, theta1, tau0 or tau1"))
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("step budget of {0} exhausted")]
    Budget(usize),
    #[error("suite failed")]
    Suite,
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Suite => EXIT_SUITE,
        }
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Serialize)]
struct Record<'a> {
    kind: &'a str,
    input: &'a str,
    result: Value,
    steps: Option<usize>,
}

struct Ctx<'o> {
    out: &'o mut dyn Write,
    json: bool,
    opts: PrintOptions,
    budget: usize,
    seed: u64,
}

impl Ctx<'_> {
    /// One result: the text form in plain mode, a JSON line otherwise.
    fn emit(&mut self, kind: &str, input: &str, text: &str, result: Value, steps: Option<usize>) {
        let line = if self.json {
            serde_json::to_string(&Record {
                kind,
                input,
                result,
                steps,
            })
            .expect("records serialize")
        } else {
            text.to_string()
        };
        let _ = writeln!(self.out, "{line}");
    }

    fn emit_text(&mut self, kind: &str, input: &str, text: &str) {
        self.emit(kind, input, text, Value::String(text.to_string()), None);
    }

    fn term(&self, t: &Term) -> String {
        print_term(t, &self.opts)
    }

    fn process(&self, p: &Process) -> String {
        print_process(p, &self.opts)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A term file holds a λ-term, compiled when it has binders.
fn read_term(path: &Path) -> Result<Term, CliError> {
    let text = read(path)?;
    let l = parse_lambda(text.trim()).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(compile_lambda(&l))
}

fn budget_from_env() -> Result<usize, CliError> {
    match std::env::var(MAX_STEPS_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{MAX_STEPS_VAR}={v:?} is not a step count"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn parse_window(s: &str) -> Result<Range<u64>, CliError> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| usage(format!("window {s:?} is not a..b")))?;
    let a = a
        .trim()
        .parse()
        .map_err(|_| usage(format!("bad window start {a:?}")))?;
    let b = b
        .trim()
        .parse()
        .map_err(|_| usage(format!("bad window end {b:?}")))?;
    Ok(a..b)
}

fn pole_of(a: &PoleArgs) -> Pole {
    match a.kind {
        PoleKind::Thread => Pole::Thread {
            i: a.i,
            j: a.j,
            depth: a.depth,
        },
        PoleKind::Global => Pole::Global { depth: a.depth },
        PoleKind::Empty => Pole::Empty,
        PoleKind::Everything => Pole::Everything,
    }
}

/// Parse `argv` (program name first), run the command, and return the exit
/// code. Results go to `out`, diagnostics to `err`.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            if !matches!(e, CliError::Suite) {
                let _ = writeln!(err, "krealize: {e}");
            }
            e.code()
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let budget = match cli.budget {
        Some(b) => b,
        None => budget_from_env()?,
    };
    let opts = PrintOptions {
        style: if cli.paper_style {
            PrintStyle::Paper
        } else if cli.plain {
            PrintStyle::Plain
        } else {
            PrintStyle::Grouped
        },
        numerals: cli.sugar,
        star_names: true,
    };
    let mut cx = Ctx {
        out,
        json: cli.json,
        opts,
        budget,
        seed: cli.seed,
    };
    match cli.command {
        Command::Parse {
            text,
            category,
            spine,
        } => cmd_parse(&mut cx, &text, category, spine),
        Command::Compile { text, closed } => {
            let l = parse_lambda(&text).map_err(usage)?;
            let t = if closed {
                compile_closed(&l).map_err(usage)?
            } else {
                compile_lambda(&l)
            };
            let s = cx.term(&t);
            cx.emit_text("compile", &text, &s);
            Ok(())
        }
        Command::Run {
            process,
            trace,
            keep,
        } => cmd_run(&mut cx, &process, trace, keep),
        Command::Star { term } => {
            let t = parse_term(&term).map_err(usage)?;
            let s = star(&t).map_err(usage)?;
            let s = cx.term(&s);
            cx.emit_text("star", &term, &s);
            Ok(())
        }
        Command::Numeral { n, star } => {
            let t = if star { star_numeral(n) } else { numeral(n) };
            let s = cx.term(&t);
            cx.emit_text("numeral", &n.to_string(), &s);
            Ok(())
        }
        Command::Fixture { name, form, list } => cmd_fixture(&mut cx, name, form, list),
        Command::Pole { query } => cmd_pole(&mut cx, query),
        Command::Gen { kind, formula } => {
            let src = read(&formula)?;
            let f = parse_formula(src.trim())
                .map_err(|e| usage(format!("{}: {e}", formula.display())))?;
            let s = cx.term(&generate(kind, &f));
            cx.emit_text("gen", src.trim(), &s);
            Ok(())
        }
        Command::Extract {
            phi0,
            formula,
            h,
            delta,
        } => {
            let src = read(&formula)?;
            let f = parse_formula(src.trim())
                .map_err(|e| usage(format!("{}: {e}", formula.display())))?;
            let mut inputs = PipelineInputs::with_stubs(read_term(&phi0)?, f);
            if let Some(h) = h {
                inputs.h = read_term(&h)?;
            }
            if let Some(d) = delta {
                inputs.delta = read_term(&d)?;
            }
            let phi = extract(&inputs).map_err(usage)?;
            let s = cx.term(&phi);
            cx.emit_text("extract", src.trim(), &s);
            Ok(())
        }
        Command::CheckProof { file } => {
            let src = read(&file)?;
            let d =
                parse_derivation(&src).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            let input = file.display().to_string();
            match check_derivation(&d) {
                Ok(acc) => {
                    let mut text = String::from("accepted: ");
                    let ctx: Vec<String> = acc
                        .context
                        .iter()
                        .map(|(x, a)| format!("{x}: {a}"))
                        .collect();
                    if !ctx.is_empty() {
                        text.push_str(&ctx.join("; "));
                        text.push(' ');
                    }
                    text.push_str(&format!(
                        "|- {} : {}",
                        print_lambda(&acc.term, &cx.opts),
                        acc.formula
                    ));
                    cx.emit(
                        "check-proof",
                        &input,
                        &text,
                        json!({"accepted": true, "judgment": text}),
                        None,
                    );
                }
                Err(rej) => {
                    let text = format!("rejected: {rej}");
                    cx.emit(
                        "check-proof",
                        &input,
                        &text,
                        json!({"accepted": false, "node": rej.node, "reason": rej.reason.to_string()}),
                        None,
                    );
                }
            }
            Ok(())
        }
        Command::Suite { which } => cmd_suite(&mut cx, &which),
    }
}

fn cmd_parse(cx: &mut Ctx, text: &str, category: Category, spine: bool) -> Result<(), CliError> {
    let printed = match category {
        Category::Cterm | Category::Term => {
            let t = if matches!(category, Category::Cterm) {
                parse_cterm(text)
            } else {
                parse_term(text)
            }
            .map_err(usage)?;
            if spine {
                let (h, args) = t.spine();
                let args: Vec<String> = args.iter().map(|a| cx.term(a)).collect();
                format!("{} [{}]", cx.term(&h), args.join(", "))
            } else {
                cx.term(&t)
            }
        }
        Category::Stack => print_stack(&parse_stack(text).map_err(usage)?, &cx.opts),
        Category::Process => cx.process(&parse_process(text).map_err(usage)?),
        Category::Lambda => print_lambda(&parse_lambda(text).map_err(usage)?, &cx.opts),
        Category::Condition => print_condition(&parse_condition(text).map_err(usage)?),
        Category::Bprocess => {
            let (t, p, s, q) = parse_bprocess(text).map_err(usage)?;
            format!(
                "({}, {}) * ({}, {})",
                cx.term(&t),
                print_condition(&p),
                print_stack(&s, &cx.opts),
                print_condition(&q)
            )
        }
    };
    cx.emit_text("parse", text, &printed);
    Ok(())
}

fn terminal_text(t: Terminal) -> String {
    match t {
        Terminal::Stuck(r) => format!("stuck ({r})"),
        Terminal::Budget => "budget".to_string(),
    }
}

fn cmd_run(cx: &mut Ctx, text: &str, trace: bool, keep: Option<usize>) -> Result<(), CliError> {
    let p = parse_process(text).map_err(usage)?;
    let (terminal, steps) = if trace {
        let tr = run(&p, cx.budget);
        if cx.json {
            for (k, s) in tr.states.iter().enumerate() {
                let s = cx.process(s);
                cx.emit("step", text, "", Value::String(s), Some(k));
            }
            let fin = terminal_text(tr.terminal);
            cx.emit("run", text, "", Value::String(fin), Some(tr.steps()));
        } else {
            let rendered = tr.render(&cx.opts, keep);
            let _ = write!(cx.out, "{rendered}");
        }
        (tr.terminal, tr.steps())
    } else {
        let fin = run_final(&p, cx.budget);
        let state = cx.process(&fin.state);
        let text_out = format!(
            "{state}\n{} after {} steps",
            terminal_text(fin.terminal),
            fin.steps
        );
        cx.emit(
            "run",
            text,
            &text_out,
            json!({"state": state, "terminal": terminal_text(fin.terminal)}),
            Some(fin.steps),
        );
        (fin.terminal, fin.steps)
    };
    match terminal {
        Terminal::Budget => Err(CliError::Budget(steps)),
        Terminal::Stuck(_) => Ok(()),
    }
}

fn cmd_fixture(
    cx: &mut Ctx,
    name: Option<String>,
    form: Option<Form>,
    list: bool,
) -> Result<(), CliError> {
    if list {
        for f in fixture_table() {
            let t = cx.term(&f.term());
            let text = format!("{} = {t}", f.name);
            cx.emit("fixture", f.name, &text, Value::String(t), None);
        }
        return Ok(());
    }
    let name = name.ok_or_else(|| usage("fixture needs a name or --list"))?;
    let entry = fixture_entry(&name).map_err(usage)?;
    let t = match form {
        None => entry.term(),
        Some(Form::Printed) => entry
            .printed
            .clone()
            .ok_or_else(|| usage(format!("{name} has no printed form")))?,
        Some(Form::Lambda) => entry
            .lambda
            .clone()
            .ok_or_else(|| usage(format!("{name} has no λ-form")))?,
    };
    let s = cx.term(&t);
    cx.emit_text("fixture", &name, &s);
    Ok(())
}

fn cmd_pole(cx: &mut Ctx, query: PoleQuery) -> Result<(), CliError> {
    match query {
        PoleQuery::Member { process, pole } => {
            let p = parse_process(&process).map_err(usage)?;
            let v = pole_of(&pole).explain(&p, cx.budget);
            let text = format!("{}\nevent: {}", v.answer, v.event);
            cx.emit(
                "pole",
                &process,
                &text,
                json!({"answer": v.answer.as_str(), "event": v.event}),
                Some(v.steps),
            );
        }
        PoleQuery::Bmember {
            bprocess,
            pole,
            window,
        } => {
            let (t, p, s, q) = parse_bprocess(&bprocess).map_err(usage)?;
            let bp = BProcess(Process::new(t, s), meet(&p, &q));
            let window = match window {
                Some(w) => parse_window(&w)?,
                None => default_window(&bp.1),
            };
            let verdict = bbot_member(&bp, &pole_of(&pole), window, cx.budget);
            let text = verdict.to_string();
            let witness = match verdict {
                BMember::NotInBot(n) => json!(n),
                _ => Value::Null,
            };
            cx.emit(
                "bmember",
                &bprocess,
                &text,
                json!({"answer": text, "witness": witness}),
                None,
            );
        }
    }
    Ok(())
}

fn cmd_suite(cx: &mut Ctx, which: &str) -> Result<(), CliError> {
    let ids: Vec<u8> = if which == "all" {
        suite::CRITERIA.to_vec()
    } else {
        let id = which.parse::<u8>().map_err(|_| {
            usage(format!(
                "suite takes `all` or a criterion number, not {which:?}"
            ))
        })?;
        if !suite::CRITERIA.contains(&id) {
            return Err(usage(format!(
                "no criterion {id}; criteria are 1 to {}",
                suite::CRITERIA.len()
            )));
        }
        vec![id]
    };
    let mut ok = true;
    for id in ids {
        let r = suite::run_criterion(id, cx.seed);
        ok &= r.passed();
        let text = r.to_string();
        let result = json!({
            "id": r.id,
            "title": r.title,
            "passed": r.passed(),
            "failures": r.failures,
            "notes": r.notes,
            "elapsed_ms": r.elapsed.as_millis() as u64,
        });
        cx.emit("criterion", &id.to_string(), &text, result, Some(r.checks));
        if !cx.json {
            for f in r.failures.iter().take(10) {
                let _ = writeln!(cx.out, "  {f}");
            }
        }
    }
    if ok {
        Ok(())
    } else {
        Err(CliError::Suite)
    }
}
