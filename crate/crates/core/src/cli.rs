//! The `goi` command line: compile, reduce, translate and check terms.
//!
//! Every command prints to stdout unless `--out DIR` is given, in which case
//! it writes a fixed file name inside that directory. Exit codes: 0 success,
//! 1 a check failed, 2 bad input or I/O error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::check::{self, CheckConfig, Suite};
use crate::label::{initialize, parse_labelled, LabelledTerm};
use crate::net::{to_dot, to_json, translate_with, validate, Translation};
use crate::rewrite::{reduce, trace_records, Calculus, Configuration};
use crate::term::{compile, parse_cterm, parse_lambda, FreshSupply, LambdaTerm};

#[derive(Debug, Parser)]
#[command(name = "goi", version, about = "Labelled closed-reduction λ-calculi and their weighted proof-nets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a λ-term into a linear λc-term.
    Compile {
        /// Term text, a file name, or `-` for stdin.
        input: String,
        #[arg(long, value_enum, default_value_t = TermFormat::Text, env = "GOI_FORMAT")]
        format: TermFormat,
        #[arg(long, env = "GOI_OUT")]
        out: Option<PathBuf>,
    },
    /// Reduce a term to normal form, printing one JSON record per step.
    Reduce {
        input: String,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = TraceFormat::Json, env = "GOI_FORMAT")]
        format: TraceFormat,
    },
    /// Translate a term into a weighted proof-net.
    Net {
        input: String,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = NetFormat::Dot, env = "GOI_FORMAT")]
        format: NetFormat,
    },
    /// Run a property suite over the corpus and any extra terms.
    Check {
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        #[command(flatten)]
        run: RunArgs,
        /// Largest enumerated term size.
        #[arg(long, default_value_t = 7, env = "GOI_CORPUS_MAX_SIZE")]
        corpus_max_size: usize,
        /// Extra λ-term to check (repeatable).
        #[arg(long = "term")]
        terms: Vec<String>,
    },
}

/// Options shared by the commands that reduce or translate.
#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    #[arg(long, default_value = "lcf", value_parser = parse_calculus, env = "GOI_CALCULUS")]
    pub calculus: Calculus,
    /// Defaults to cbv for lcf and cbn for lca.
    #[arg(long, value_parser = parse_translation, env = "GOI_TRANSLATION")]
    pub translation: Option<Translation>,
    #[arg(long, default_value_t = 10_000, env = "GOI_FUEL")]
    pub fuel: usize,
    /// Step bound for path walks; 0 means four times the larger edge count.
    #[arg(long, default_value_t = 64, env = "GOI_MAX_STEPS")]
    pub max_steps: usize,
    #[arg(long, env = "GOI_OUT")]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    fn translation(&self) -> Translation {
        self.translation.unwrap_or(check::translation_for(self.calculus))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TermFormat {
    Text,
    Math,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NetFormat {
    Dot,
    Json,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
}

fn parse_calculus(s: &str) -> Result<Calculus, String> {
    s.parse()
}

fn parse_translation(s: &str) -> Result<Translation, String> {
    s.parse()
}

#[derive(Debug)]
struct CliError(String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

fn read_input(input: &str) -> Result<String, CliError> {
    if input == "-" {
        return Ok(std::io::read_to_string(std::io::stdin())?);
    }
    let p = Path::new(input);
    if p.is_file() {
        return Ok(fs::read_to_string(p)?);
    }
    Ok(input.to_string())
}

/// Reads a plain λ-term (compiled and initialised), an unlabelled λc-term
/// (initialised) or a labelled term.
pub fn parse_input(text: &str) -> Result<LabelledTerm, String> {
    let text = text.trim();
    if let Ok(t) = parse_lambda(text) {
        let (c, s) = compile(&t, FreshSupply::new());
        return Ok(initialize(&c, s).0);
    }
    if let Ok(c) = parse_cterm(text) {
        let names = c.names();
        return Ok(initialize(&c, FreshSupply::avoiding(names)).0);
    }
    parse_labelled(text).map_err(|e| e.to_string())
}

fn emit(out: Option<&Path>, file: &str, body: &str) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(file), body)?;
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn run_command(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Compile { input, format, out } => {
            let t = parse_lambda(read_input(&input)?.trim())?;
            let c = compile(&t, FreshSupply::new()).0;
            let s = match format {
                TermFormat::Text => c.to_string(),
                TermFormat::Math => c.to_math(),
            };
            emit(out.as_deref(), "compiled.txt", &(s + "\n"))?;
            Ok(0)
        }
        Command::Reduce { input, run, format } => {
            let t = parse_input(&read_input(&input)?).map_err(CliError)?;
            let trace = reduce(&Configuration::new(t), run.calculus, run.fuel)?;
            let mut body = String::new();
            for r in trace_records(&trace, run.calculus) {
                match format {
                    TraceFormat::Json => body += &serde_json::to_string(&r)?,
                    TraceFormat::Text => body += &format!("{} {} {:?} {}", r.step, r.rule, r.position, r.term_printed),
                }
                body.push('\n');
            }
            emit(run.out.as_deref(), "trace.jsonl", &body)?;
            Ok(0)
        }
        Command::Net { input, run, format } => {
            let t = parse_input(&read_input(&input)?).map_err(CliError)?;
            let net = translate_with(&t, 0, run.translation())?;
            let bad = validate(&net, true);
            if let Some(v) = bad.first() {
                return Err(CliError(format!("translated net is malformed: {v:?}")));
            }
            let (file, body) = match format {
                NetFormat::Dot => ("net.dot", to_dot(&net)),
                NetFormat::Json => ("net.json", to_json(&net) + "\n"),
            };
            emit(run.out.as_deref(), file, &body)?;
            Ok(0)
        }
        Command::Check { suite, run, corpus_max_size, terms } => {
            let extra = terms.iter().map(|t| parse_lambda(t)).collect::<Result<Vec<LambdaTerm>, _>>()?;
            let cfg = CheckConfig {
                corpus_max_size,
                fuel: run.fuel,
                bound: (run.max_steps > 0).then_some(run.max_steps),
                translation: run.translation,
                extra,
                ..CheckConfig::default()
            };
            let report = if suite == Suite::Invariance {
                let (report, steps) = check::invariance_steps(&cfg, run.calculus);
                if let Some(dir) = &run.out {
                    let lines: Vec<String> = steps.iter().map(serde_json::to_string).collect::<Result<_, _>>()?;
                    emit(Some(dir), "invariance-steps.jsonl", &(lines.join("\n") + "\n"))?;
                }
                report
            } else {
                check::run_suite(suite, &cfg, run.calculus)
            };
            let json = serde_json::to_string_pretty(&report)? + "\n";
            match &run.out {
                Some(dir) => {
                    emit(Some(dir), &format!("{}.json", report.suite.replace('/', "-")), &json)?;
                    println!("{report}");
                }
                None => print!("{json}"),
            }
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_command(cli.command) {
        Ok(code) => code,
        Err(CliError(msg)) => {
            eprintln!("{}", serde_json::json!({ "error": msg }));
            2
        }
    }
}
