//! Implementation of the `bimetric3` command-line tool.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use bimetric3::canonical::CanonicalForm;
use bimetric3::classifier::ClassId;
use bimetric3::document::{
    canonicalize_document, classify_document, to_json, CanonicalDoc, EntryMatrix, PairDocument,
    ResultDocument, VerifyReport,
};
use bimetric3::invariants::Mode;
use bimetric3::matrix::Matrix3;
use bimetric3::numeric::FloatToleranceConfig;
use bimetric3::scalar::{format_rational, parse_rational, Entry, Scalar, Q};
use bimetric3::testkit::{rng_from_seed, sample_with};
use bimetric3::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "bimetric3",
    version,
    about = "Classify and canonicalize pairs of 3×3 symmetric forms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report the class and invariants of a pair.
    Classify(PairArgs),
    /// Report the class, canonical form, transform and residual of a pair.
    Canonicalize(PairArgs),
    /// Write a random pair of a given class, plus a `.truth.json` sidecar.
    Generate(GenerateArgs),
    /// Check a result document against its pair.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Float,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Float => Mode::Float,
        }
    }
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// Pair document, `-` for stdin, or a directory of documents.
    #[arg(long, short, default_value = "-")]
    pub input: PathBuf,
    /// Output file (or directory in batch mode); stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Override the mode implied by the entries.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Residual tolerance for the canonical form.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Worker threads for directory input.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub class: ClassId,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Canonical parameters, e.g. `a=2,b=1,c=3`; drawn at random when absent.
    #[arg(long)]
    pub params: Option<String>,
    /// Entry bound of the random integer congruence.
    #[arg(long, default_value_t = 5)]
    pub bound: i64,
    /// Entry type of the written document.
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    /// Pair document path; the sidecar goes next to it.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Pair document.
    pub pair: PathBuf,
    /// Result document produced by `canonicalize`.
    pub result: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Ground truth written next to a generated pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthDocument {
    pub class: ClassId,
    pub seed: u64,
    pub bound: i64,
    pub canonical: CanonicalDoc,
    /// `T` with `pair = (Tᵀ g_can T, Tᵀ ǧ_can T)`.
    pub congruence: EntryMatrix,
}

/// A failure together with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

fn input_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::InvalidSignature { .. }
        | Error::InvalidParams(_)
        | Error::ModeMismatch
        | Error::SingularMatrix
        | Error::PreconditionViolated(_) => EXIT_INPUT,
        Error::AmbiguousClassification(_) | Error::ResidualTooLarge { .. } => EXIT_FAILURE,
        Error::InternalInvariantViolation(_) => EXIT_INTERNAL,
    }
}

/// Runs a parsed command and returns the process exit code. Diagnostics go to `err`.
pub fn run(cli: Cli, err: &mut dyn Write) -> i32 {
    let outcome = match cli.command {
        Command::Classify(a) => run_pair(&a, false, err),
        Command::Canonicalize(a) => run_pair(&a, true, err),
        Command::Generate(a) => run_generate(&a),
        Command::Verify(a) => run_verify(&a, err),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| input_failure(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| input_failure(format!("{}: {e}", path.display())))
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let res = match path {
        Some(p) => fs::write(p, text),
        None => io::stdout().write_all(text.as_bytes()),
    };
    res.map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("write failed: {e}"),
    })
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| input_failure(format!("invalid {what}: {e}")))
}

fn entry_text(e: &Entry) -> String {
    match e {
        Entry::Text(s) => s.clone(),
        Entry::Number(n) => n.to_string(),
    }
}

fn matrix_text(m: &EntryMatrix, indent: usize) -> String {
    let cells: Vec<Vec<String>> = m
        .iter()
        .map(|r| r.iter().map(entry_text).collect())
        .collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    cells
        .iter()
        .map(|r| {
            let row: Vec<String> = r.iter().map(|c| format!("{c:>width$}")).collect();
            format!("[{}]", row.join(" "))
        })
        .collect::<Vec<_>>()
        .join(&format!("\n{}", " ".repeat(indent)))
}

/// Aligned `key  value` lines.
pub fn result_text(doc: &ResultDocument) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(out, "{k:<12}  {v}");
    };
    line("class", doc.class.to_string());
    line("conditions", doc.conditions.clone());
    line("mode", format!("{:?}", doc.mode).to_uppercase());
    let inv = &doc.invariants;
    line("a0", entry_text(&inv.a0));
    line("a1", entry_text(&inv.a1));
    line("a2", entry_text(&inv.a2));
    line("D2", entry_text(&inv.d2));
    line("D3", entry_text(&inv.d3));
    for (name, v) in [
        ("sigma0", inv.sigma0.map(i32::from)),
        ("sigma1", inv.sigma1.map(i32::from)),
        ("sigma2", inv.sigma2.map(i32::from)),
        ("sigma3", inv.sigma3.map(i32::from)),
    ] {
        if let Some(v) = v {
            line(name, format!("{v:+}").replace("+0", "0"));
        }
    }
    if let Some(c) = &doc.canonical {
        let params: Vec<String> = c
            .params
            .iter()
            .map(|(k, v)| format!("{k}={}", entry_text(v)))
            .collect();
        line("params", params.join(", "));
        line("g", matrix_text(&c.g, 14));
        line("g_check", matrix_text(&c.g_check, 14));
    }
    if let Some(t) = &doc.transform {
        let m: EntryMatrix = t.map(|r| r.map(|v| Entry::Text(format!("{v:.12}"))));
        line("transform", matrix_text(&m, 14));
    }
    if let Some(r) = doc.residual {
        line("residual", format!("{r:.3e}"));
    }
    for w in &doc.warnings {
        line("warning", w.clone());
    }
    out
}

fn render_result(doc: &ResultDocument, format: Format) -> String {
    match format {
        Format::Json => to_json(doc),
        Format::Text => result_text(doc),
    }
}

fn process_text(text: &str, args: &PairArgs, canonical: bool) -> Result<ResultDocument, Failure> {
    let pair: PairDocument = parse_json(text, "pair document")?;
    let input = pair.to_pair(args.mode.map(Mode::from))?;
    let cfg = FloatToleranceConfig::default();
    let doc = if canonical {
        canonicalize_document(&input, &cfg, args.tol)?
    } else {
        classify_document(&input, &cfg)?
    };
    Ok(doc)
}

fn run_pair(args: &PairArgs, canonical: bool, err: &mut dyn Write) -> Result<i32, Failure> {
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(input_failure(format!(
            "--tol must be positive, got {}",
            args.tol
        )));
    }
    if args.input.is_dir() {
        return run_batch(args, canonical, err);
    }
    let text = read_text(&args.input)?;
    let doc = process_text(&text, args, canonical)?;
    write_text(args.output.as_deref(), &render_result(&doc, args.format))?;
    Ok(EXIT_OK)
}

fn is_pair_file(p: &Path) -> bool {
    let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
    name.ends_with(".json") && !name.ends_with(".truth.json") && !name.ends_with(".result.json")
}

/// Processes every pair document in a directory independently.
fn run_batch(args: &PairArgs, canonical: bool, err: &mut dyn Write) -> Result<i32, Failure> {
    let out_dir = args
        .output
        .clone()
        .ok_or_else(|| input_failure("directory input requires --output <directory>"))?;
    fs::create_dir_all(&out_dir)
        .map_err(|e| input_failure(format!("{}: {e}", out_dir.display())))?;
    let mut files: Vec<PathBuf> = fs::read_dir(&args.input)
        .map_err(|e| input_failure(format!("{}: {e}", args.input.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| is_pair_file(p))
        .collect();
    files.sort();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| input_failure(format!("thread pool: {e}")))?;
    let ext = match args.format {
        Format::Json => "result.json",
        Format::Text => "result.txt",
    };
    let outcomes: Vec<(PathBuf, Result<(), Failure>)> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let res = read_text(path)
                    .and_then(|t| process_text(&t, args, canonical))
                    .and_then(|doc| {
                        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("pair");
                        let target = out_dir.join(format!("{stem}.{ext}"));
                        write_text(Some(&target), &render_result(&doc, args.format))
                    });
                (path.clone(), res)
            })
            .collect()
    });

    let mut code = EXIT_OK;
    for (path, res) in outcomes {
        if let Err(f) = res {
            let _ = writeln!(err, "{}: {}", path.display(), f.message);
            code = code.max(f.code);
        }
    }
    Ok(code)
}

/// Parses `a=2,b=1/3,c=-4` into the class's parameter order.
pub fn parse_params(class: ClassId, text: &str) -> Result<Vec<Q>, Failure> {
    let mut given = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| {
            input_failure(format!("parameter '{item}' is not of the form name=value"))
        })?;
        let k = k.trim();
        if !class.param_names().contains(&k) {
            return Err(input_failure(format!(
                "{class} has no parameter '{k}' (expected {})",
                class.param_names().join(", ")
            )));
        }
        given.insert(k.to_string(), parse_rational(v)?);
    }
    class
        .param_names()
        .iter()
        .map(|n| {
            given
                .remove(*n)
                .ok_or_else(|| input_failure(format!("{class} requires parameter '{n}'")))
        })
        .collect()
}

fn sidecar_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("pair");
    output.with_file_name(format!("{stem}.truth.json"))
}

fn run_generate(args: &GenerateArgs) -> Result<i32, Failure> {
    if args.bound < 1 {
        return Err(input_failure(format!(
            "--bound must be at least 1, got {}",
            args.bound
        )));
    }
    let params = match &args.params {
        Some(text) => {
            let p = parse_params(args.class, text)?;
            CanonicalForm::new(args.class, p.clone())?;
            Some(p)
        }
        None => None,
    };
    let sample = sample_with(
        &mut rng_from_seed(args.seed),
        args.class,
        params,
        args.bound,
    )?;
    let label = Some(format!("{} seed={}", args.class, args.seed));
    let pair = match args.mode {
        ModeArg::Exact => PairDocument::from_exact(&sample.pair, label),
        ModeArg::Float => PairDocument::from_float(&sample.pair.to_f64(), label),
    };
    let pair_text = match args.format {
        Format::Json => to_json(&pair),
        Format::Text => format!(
            "g        {}\ng_check  {}\n",
            matrix_text(&pair.g, 9),
            matrix_text(&pair.g_check, 9)
        ),
    };
    write_text(args.output.as_deref(), &pair_text)?;

    if let Some(out) = &args.output {
        let exact_form = sample.truth.map(|v| Scalar::Exact(v.clone()));
        let truth = TruthDocument {
            class: args.class,
            seed: args.seed,
            bound: args.bound,
            canonical: CanonicalDoc::from_form(&exact_form),
            congruence: congruence_entries(&sample.congruence),
        };
        write_text(Some(&sidecar_path(out)), &to_json(&truth))?;
    }
    Ok(EXIT_OK)
}

fn congruence_entries(t: &Matrix3<Q>) -> EntryMatrix {
    std::array::from_fn(|i| std::array::from_fn(|j| Entry::Text(format_rational(&t[(i, j)]))))
}

pub fn verify_text(report: &VerifyReport) -> String {
    let mut out = String::new();
    for c in &report.checks {
        let _ = writeln!(
            out,
            "{} {}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    out
}

fn run_verify(args: &VerifyArgs, err: &mut dyn Write) -> Result<i32, Failure> {
    let pair: PairDocument = parse_json(&read_text(&args.pair)?, "pair document")?;
    let result: ResultDocument = parse_json(&read_text(&args.result)?, "result document")?;
    let report = bimetric3::document::verify_documents(
        &pair,
        &result,
        &FloatToleranceConfig::default(),
        args.tol,
    )?;
    let text = match args.format {
        Format::Text => verify_text(&report),
        Format::Json => to_json(&serde_json::json!({
            "pass": report.pass(),
            "checks": report.checks,
        })),
    };
    write_text(args.output.as_deref(), &text)?;
    if report.pass() {
        Ok(EXIT_OK)
    } else {
        if args.output.is_some() || args.format == Format::Json {
            let _ = err.write_all(verify_text(&report).as_bytes());
        }
        Ok(EXIT_FAILURE)
    }
}
