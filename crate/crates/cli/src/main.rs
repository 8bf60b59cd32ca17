//! `conepersist`: validate documents, apply the site functors, compute
//! distances and run the property suites. Every report is one JSON line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use conepersist::cone::{ConeSpec, GaugeSpec};
use conepersist::conv1d::{convolution_distance, RaySheaf};
use conepersist::doc::{module_from_doc, Document, ModuleDoc, Payload};
use conepersist::interleave::{interleaving_distance, DecisionOptions, DistanceMode, DistanceResult, DEFAULT_BUDGET};
use conepersist::par::Parallelism;
use conepersist::persist::ArrModule;
use conepersist::rat::{parse_rvec, RVec};
use conepersist::sites::{alpha_star, beta_inv, beta_star, GammaModule};
use conepersist::suites::{run_case, run_suite, Suite};
use conepersist::{Error, Rat};

#[derive(Parser)]
#[command(name = "conepersist", version, about = "Persistence modules over convex cones")]
struct Cli {
    /// Require every input document to use this prime field.
    #[arg(long, global = true)]
    field: Option<u32>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check that a document parses and satisfies its invariants.
    Validate { path: PathBuf },
    /// Apply a site functor to a module document.
    Functor {
        #[arg(value_enum)]
        name: FunctorName,
        input: PathBuf,
        output: PathBuf,
    },
    /// Distance between two documents.
    Distance {
        #[arg(value_enum)]
        kind: DistanceKind,
        a: PathBuf,
        b: PathBuf,
        /// Direction `v`, e.g. "1,1/2". Must lie in the interior of the antipodal cone.
        #[arg(long, allow_hyphen_values = true)]
        direction: Option<String>,
        #[arg(long, value_enum, default_value = "exact", conflicts_with = "tol")]
        mode: Mode,
        /// Bisect to this bracket width instead of searching exactly.
        #[arg(long)]
        tol: Option<String>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        /// Write the interleaving witness here when one is found.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Run a seeded property suite.
    Check {
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Replay a single case by its case seed.
        #[arg(long)]
        case: Option<u64>,
        /// Run cases one after another.
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctorName {
    BetaStar,
    BetaInv,
    AlphaStar,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceKind {
    Interleaving,
    Convolution,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
}

/// Outcome of a command: a report line and an exit code.
struct Outcome {
    line: String,
    code: u8,
}

fn line<T: Serialize>(t: &T) -> String {
    serde_json::to_string(t).expect("reports serialize")
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    command: &'a str,
    error: &'static str,
    message: String,
    lo: Option<Rat>,
    hi: Option<Rat>,
}

fn exit_code(e: &Error) -> (u8, &'static str) {
    match e {
        Error::Parse(_) => (2, "parse"),
        Error::Invariant(_) | Error::Dimension { .. } => (3, "invariant"),
        Error::Domain(_) => (4, "domain"),
        Error::Budget { .. } | Error::BudgetBracket { .. } => (5, "budget"),
    }
}

fn failure(command: &str, e: Error) -> Outcome {
    let (code, error) = exit_code(&e);
    let (lo, hi) = match &e {
        Error::BudgetBracket { lo, hi } => (Some((**lo).clone()), Some((**hi).clone())),
        _ => (None, None),
    };
    Outcome { line: line(&ErrorReport { command, error, message: e.to_string(), lo, hi }), code }
}

fn read_doc(path: &Path, field: Option<u32>) -> Result<Document, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let doc = Document::from_json(&text)?;
    if let Some(p) = field {
        let found = match &doc.payload {
            Payload::ArrModule(m) | Payload::GammaModule(m) => Some(m.field),
            Payload::Morphism(m) => Some(m.src.field),
            Payload::Witness(w) => Some(w.f.src.field),
            _ => None,
        };
        if let Some(q) = found.filter(|&q| q != p) {
            return Err(Error::Domain(format!("document is over F_{q}, expected F_{p}")));
        }
    }
    Ok(doc)
}

fn write_doc(path: &Path, doc: &Document) -> Result<(), Error> {
    fs::write(path, doc.to_json() + "\n").map_err(|e| Error::Domain(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct ValidateReport<'a> {
    command: &'a str,
    path: String,
    kind: &'a str,
    valid: bool,
}

fn validate(path: &Path, field: Option<u32>) -> Result<Outcome, Error> {
    let doc = read_doc(path, field)?;
    doc.validate()?;
    let r = ValidateReport { command: "validate", path: path.display().to_string(), kind: doc.kind(), valid: true };
    Ok(Outcome { line: line(&r), code: 0 })
}

fn as_module(d: &ModuleDoc) -> Result<ArrModule, Error> {
    module_from_doc(d)
}

fn as_gamma(doc: &Document, functor: &str) -> Result<GammaModule, Error> {
    match &doc.payload {
        Payload::GammaModule(m) => GammaModule::new(as_module(m)?),
        other => Err(Error::Domain(format!("{functor} takes a gamma-module, got {}", other.kind()))),
    }
}

#[derive(Serialize)]
struct FunctorReport<'a> {
    command: &'a str,
    functor: &'a str,
    input: String,
    output: String,
    kind: &'a str,
    zero: bool,
}

fn functor(name: FunctorName, input: &Path, output: &Path, field: Option<u32>) -> Result<Outcome, Error> {
    let doc = read_doc(input, field)?;
    let (fname, out, zero) = match name {
        FunctorName::BetaStar => {
            let m = match &doc.payload {
                Payload::ArrModule(m) | Payload::GammaModule(m) => as_module(m)?,
                other => return Err(Error::Domain(format!("beta-star takes a module, got {}", other.kind()))),
            };
            let g = beta_star(&m);
            ("beta-star", Document::gamma_module(&g), g.is_zero())
        }
        FunctorName::BetaInv => {
            let m = beta_inv(&as_gamma(&doc, "beta-inv")?);
            ("beta-inv", Document::arr_module(&m), m.is_zero())
        }
        FunctorName::AlphaStar => {
            let m = alpha_star(&as_gamma(&doc, "alpha-star")?);
            ("alpha-star", Document::arr_module(&m), m.is_zero())
        }
    };
    write_doc(output, &out)?;
    let r = FunctorReport {
        command: "functor",
        functor: fname,
        input: input.display().to_string(),
        output: output.display().to_string(),
        kind: out.kind(),
        zero,
    };
    Ok(Outcome { line: line(&r), code: 0 })
}

#[derive(Serialize)]
struct DistanceReport<'a> {
    command: &'a str,
    kind: &'a str,
    value: String,
    attained: bool,
    bracket: Option<(Rat, Rat)>,
    witness_path: Option<String>,
}

fn module_of(doc: &Document) -> Result<ArrModule, Error> {
    match &doc.payload {
        Payload::ArrModule(m) => as_module(m),
        Payload::GammaModule(m) => Ok(GammaModule::new(as_module(m)?)?.into_module()),
        other => Err(Error::Domain(format!("interleaving distance takes modules, got {}", other.kind()))),
    }
}

fn sheaf_of(doc: &Document) -> Result<RaySheaf, Error> {
    match &doc.payload {
        Payload::RaySheaf(f) => Ok(RaySheaf::new(f.births().to_vec())),
        other => Err(Error::Domain(format!("convolution distance takes ray sheaves, got {}", other.kind()))),
    }
}

#[allow(clippy::too_many_arguments)]
fn distance(
    kind: DistanceKind,
    a: &Path,
    b: &Path,
    direction: Option<&str>,
    tol: Option<&str>,
    budget: usize,
    witness: Option<&Path>,
    field: Option<u32>,
) -> Result<Outcome, Error> {
    let (da, db) = (read_doc(a, field)?, read_doc(b, field)?);
    let dir: Option<RVec> = direction.map(parse_rvec).transpose()?;
    let mode = match tol {
        Some(t) => DistanceMode::Tolerance(t.parse::<Rat>()?),
        None => DistanceMode::Exact,
    };
    let (kname, res): (&str, DistanceResult) = match kind {
        DistanceKind::Interleaving => {
            let (f, g) = (module_of(&da)?, module_of(&db)?);
            let v = dir.unwrap_or_else(|| f.complex().cone().antipode().interior_witness());
            let opts = DecisionOptions { budget, parallelism: Parallelism::Parallel };
            ("interleaving", interleaving_distance(&f, &g, &v, &mode, &opts)?)
        }
        DistanceKind::Convolution => {
            let (f, g) = (sheaf_of(&da)?, sheaf_of(&db)?);
            let v = dir.unwrap_or_else(|| vec![Rat::one()]);
            let gauge = GaugeSpec::new(ConeSpec::nonpositive_orthant(1), v)?;
            ("convolution", convolution_distance(&f, &g, &gauge, budget)?)
        }
    };
    let mut witness_path = None;
    if let (Some(path), Some(w)) = (witness, &res.witness) {
        write_doc(path, &Document::witness(w))?;
        witness_path = Some(path.display().to_string());
    }
    let r = DistanceReport {
        command: "distance",
        kind: kname,
        value: res.value.to_string(),
        attained: res.attained,
        bracket: res.bracket.clone(),
        witness_path,
    };
    Ok(Outcome { line: line(&r), code: 0 })
}

#[derive(Serialize)]
struct CaseReport<'a> {
    command: &'a str,
    suite: &'a str,
    case: u64,
    pass: bool,
    detail: String,
}

#[derive(Serialize)]
struct CheckReport<'a> {
    command: &'a str,
    #[serde(flatten)]
    report: &'a conepersist::suites::SuiteReport,
}

fn check(suite: &str, seed: u64, count: usize, case: Option<u64>, sequential: bool) -> Result<Outcome, Error> {
    let s: Suite = suite.parse()?;
    if let Some(cs) = case {
        let o = run_case(s, cs)?;
        let r = CaseReport { command: "check", suite: s.name(), case: cs, pass: o.pass, detail: o.detail };
        return Ok(Outcome { line: line(&r), code: if o.pass { 0 } else { 1 } });
    }
    let par = if sequential { Parallelism::Sequential } else { Parallelism::Parallel };
    let rep = run_suite(s, seed, count, par);
    let code = if rep.ok() { 0 } else { 1 };
    Ok(Outcome { line: line(&CheckReport { command: "check", report: &rep }), code })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let field = cli.field;
    let (name, res) = match &cli.cmd {
        Cmd::Validate { path } => ("validate", validate(path, field)),
        Cmd::Functor { name, input, output } => ("functor", functor(*name, input, output, field)),
        Cmd::Distance { kind, a, b, direction, mode: _, tol, budget, witness } => (
            "distance",
            distance(*kind, a, b, direction.as_deref(), tol.as_deref(), *budget, witness.as_deref(), field),
        ),
        Cmd::Check { suite, seed, count, case, sequential } => ("check", check(suite, *seed, *count, *case, *sequential)),
    };
    let out = res.unwrap_or_else(|e| failure(name, e));
    println!("{}", out.line);
    ExitCode::from(out.code)
}
