//! `operadforge`: normal forms, compositions, enumerations, verification
//! suites and DOT renderings for W-constructions of finite label operads.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use operadforge::bemonoid::{verify_lemma1, ELevel, ObM};
use operadforge::freeop::DecoratedJson;
use operadforge::homotopy_lab::{
    find_tau_counterexample, homotopy_suite, truncated_suite, HomotopyError, Time,
};
use operadforge::opcore::fixtures::{BoolOr, ConstantWords, Parity, Pt};
use operadforge::opcore::{check_axioms, is_unitary, FiniteOperad, Operad, OperadError, OperadJson, Product, Truncated};
use operadforge::wcons::{confluence_suite, lemma2_suite, Kind, Variant, WCons, WElement, WError};

/// Largest arity `enumerate` lists for unbounded operads.
const ENUMERATE_MAX: usize = 5;

#[derive(Parser, Debug)]
#[command(name = "operadforge", version, about = "W-constructions of finite operads")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// W, W', tauW or tauW' (default: from the input file, else W).
    #[arg(long, global = true)]
    variant: Option<String>,
    /// Arity bound of the truncated variants.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Random seed; OPERADFORGE_SEED takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of random samples for the verification suites.
    #[arg(long, global = true, visible_alias = "count")]
    samples: Option<usize>,
    /// Time sample (rational `p/q` or `inf`); repeatable.
    #[arg(long = "t", global = true)]
    times: Vec<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Label operad: obm, boolor, parity, band, idempotent, pt, or a JSON file.
    #[arg(long, global = true, default_value = "obm")]
    operad: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the normal form of a decorated tree.
    Normalize { file: PathBuf },
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Largest arity checked.
        #[arg(long, default_value_t = 3)]
        r: usize,
        /// Simplicial dimension.
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Vertex bound for random trees.
        #[arg(long, default_value_t = 6)]
        max_vertices: usize,
    },
    /// List the elements of the label operad in arity `r`.
    Enumerate { r: usize },
    /// Compose two decorated trees: `a ∘_i b`.
    Compose { a: PathBuf, i: usize, b: PathBuf },
    /// Render a decorated tree as Graphviz DOT.
    Render { file: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Axioms,
    Lemma1,
    Lemma2,
    Confluence,
    Homotopy,
    Truncated,
    Tau,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Json { path: String, line: usize, column: usize, message: String },
    #[error(transparent)]
    W(#[from] WError),
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
    #[error(transparent)]
    Operad(#[from] OperadError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::W(WError::Truncation(_) | WError::ArityBound { .. })
            | CliError::Homotopy(HomotopyError::W(WError::Truncation(_) | WError::ArityBound { .. })) => 2,
            _ => 1,
        }
    }
}

/// What a command prints and how it exits.
struct Outcome {
    stdout: String,
    summary: Option<String>,
    success: bool,
}

struct Settings {
    variant: Option<String>,
    k: Option<usize>,
    seed: u64,
    samples: Option<usize>,
    times: Vec<Time>,
    format: Format,
}

impl Settings {
    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn variant_or(&self, json: Option<&str>, default: Kind) -> Result<Variant, CliError> {
        let kind = match self.variant.as_deref().or(json) {
            Some(s) => s.parse()?,
            None => default,
        };
        Ok(Variant::new(kind, self.k))
    }
}

/// A command generic over the label operad.
trait Job {
    fn run<O: Operad + Clone>(self, op: O, s: &Settings) -> Result<Outcome, CliError>;
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::Json {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn run_bounded<O: Operad + Clone, J: Job>(op: O, s: &Settings, job: J) -> Result<Outcome, CliError> {
    match s.k {
        Some(k) => job.run(Truncated::new(op, k), s),
        None => job.run(op, s),
    }
}

fn dispatch<J: Job>(operad: &str, s: &Settings, job: J) -> Result<Outcome, CliError> {
    match operad {
        "obm" => match s.k {
            Some(k) => job.run(ObM::truncated(k), s),
            None => job.run(ObM::new(), s),
        },
        "boolor" => run_bounded(BoolOr::unbounded(), s, job),
        "parity" => run_bounded(Parity::unbounded(), s, job),
        "band" => job.run(ConstantWords::left_zero_band(s.k), s),
        "idempotent" => job.run(ConstantWords::idempotent(s.k), s),
        "pt" => job.run(Pt::new(s.k.unwrap_or(ENUMERATE_MAX)), s),
        path => {
            let json: OperadJson = read_json(Path::new(path))?;
            let op = FiniteOperad::from_json(&json)?;
            let op = match s.k {
                Some(k) => op.truncate(k),
                None => op,
            };
            job.run(op, s)
        }
    }
}

fn render_element<O: Operad>(wc: &WCons<O>, w: &WElement<O::Elem>, format: Format) -> String {
    match format {
        Format::Json => {
            serde_json::to_string_pretty(&wc.to_json(w)).expect("serialisable") + "\n"
        }
        Format::Text => wc.to_text(w) + "\n",
        Format::Dot => wc.to_dot(w),
    }
}

fn element_outcome<O: Operad>(wc: &WCons<O>, w: &WElement<O::Elem>, format: Format) -> Outcome {
    Outcome { stdout: render_element(wc, w, format), summary: None, success: true }
}

struct NormalizeJob(PathBuf);

impl Job for NormalizeJob {
    fn run<O: Operad + Clone>(self, op: O, s: &Settings) -> Result<Outcome, CliError> {
        let json: DecoratedJson = read_json(&self.0)?;
        let mut variant = s.variant_or(json.variant.as_deref(), Kind::W)?;
        variant.k = s.k.or(json.k);
        let wc = WCons::new(op, variant)?;
        let w = wc.from_json(&json)?;
        Ok(element_outcome(&wc, &wc.normalize(&w)?, s.format))
    }
}

struct RenderJob(PathBuf);

impl Job for RenderJob {
    fn run<O: Operad + Clone>(self, op: O, s: &Settings) -> Result<Outcome, CliError> {
        let json: DecoratedJson = read_json(&self.0)?;
        let mut variant = s.variant_or(json.variant.as_deref(), Kind::W)?;
        variant.k = s.k.or(json.k);
        let wc = WCons::new(op, variant)?;
        let w = wc.from_json(&json)?;
        let format = if s.format == Format::Json { Format::Dot } else { s.format };
        Ok(element_outcome(&wc, &w, format))
    }
}

struct ComposeJob {
    a: PathBuf,
    i: usize,
    b: PathBuf,
}

impl Job for ComposeJob {
    fn run<O: Operad + Clone>(self, op: O, s: &Settings) -> Result<Outcome, CliError> {
        let ja: DecoratedJson = read_json(&self.a)?;
        let jb: DecoratedJson = read_json(&self.b)?;
        let mut variant = s.variant_or(ja.variant.as_deref(), Kind::W)?;
        variant.k = s.k.or(ja.k);
        let wc = WCons::new(op, variant)?;
        let a = wc.normalize(&wc.from_json(&ja)?)?;
        let b = wc.normalize(&wc.from_json(&jb)?)?;
        if self.i == 0 || self.i > a.arity() {
            return Err(CliError::Usage(format!("slot {} out of range for arity {}", self.i, a.arity())));
        }
        Ok(element_outcome(&wc, &wc.w_compose(&a, self.i, &b)?, s.format))
    }
}

struct EnumerateJob(usize);

impl Job for EnumerateJob {
    fn run<O: Operad + Clone>(self, op: O, s: &Settings) -> Result<Outcome, CliError> {
        let r = self.0;
        let rmax = op.bound().unwrap_or(ENUMERATE_MAX);
        if r > rmax {
            return Err(CliError::Usage(format!("arity {r} above rmax {rmax}")));
        }
        let elems: Vec<String> = op.elements(r).iter().map(|p| op.display(p)).collect();
        let stdout = match s.format {
            Format::Json => {
                serde_json::to_string_pretty(&json!({
                    "operad": op.name(),
                    "arity": r,
                    "count": elems.len(),
                    "elements": elems,
                }))
                .expect("serialisable")
                    + "\n"
            }
            _ => {
                let mut out: String = elems.iter().map(|e| format!("{e}\n")).collect();
                out.push_str(&format!("count: {}\n", elems.len()));
                out
            }
        };
        Ok(Outcome { stdout, summary: None, success: true })
    }
}

struct VerifyJob {
    suite: Suite,
    r: usize,
    n: usize,
    max_vertices: usize,
}

fn report(suite: Suite, passed: bool, summary: String, body: Value) -> Outcome {
    let name = format!("{suite:?}").to_lowercase();
    let doc = json!({ "suite": name, "passed": passed, "summary": summary, "report": body });
    Outcome {
        stdout: serde_json::to_string_pretty(&doc).expect("serialisable") + "\n",
        summary: Some(format!("{name}: {} ({summary})", if passed { "PASS" } else { "FAIL" })),
        success: passed,
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serialisable")
}

impl Job for VerifyJob {
    fn run<O: Operad + Clone>(self, op: O, s: &Settings) -> Result<Outcome, CliError> {
        let mut rng = s.rng();
        match self.suite {
            Suite::Axioms => {
                let rep = check_axioms(&op, self.r);
                let summary = format!("{} checks, {} violations", rep.checks, rep.violation_count);
                Ok(report(self.suite, rep.passed(), summary, to_value(&rep)))
            }
            Suite::Lemma1 => {
                let rep = verify_lemma1(self.r, self.n, s.samples.unwrap_or(10_000), &mut rng);
                let summary = format!(
                    "{} object, {} simplex, {} factorisation checks; {} violations",
                    rep.object_checks,
                    rep.simplex_checks,
                    rep.unit_factorization_checks,
                    rep.violations.len()
                );
                Ok(report(self.suite, rep.passed(), summary, to_value(&rep)))
            }
            Suite::Lemma2 => {
                let level = match s.k {
                    Some(k) => ELevel::truncated(self.n, k),
                    None => ELevel::new(self.n),
                };
                let wc = WCons::new(Product::new(level, op), Variant::new(Kind::W, s.k))?;
                let rep = lemma2_suite(&wc, s.samples.unwrap_or(1000), self.max_vertices, &mut rng)?;
                let summary = format!(
                    "{} samples, {} identities, {} failures",
                    rep.samples,
                    rep.trivial,
                    rep.failures.len()
                );
                Ok(report(self.suite, rep.passed(), summary, to_value(&rep)))
            }
            Suite::Confluence => {
                let kinds: Vec<Kind> = match &s.variant {
                    Some(v) => vec![v.parse()?],
                    None if is_unitary(&op) => Kind::ALL.to_vec(),
                    None => vec![Kind::W, Kind::WPrime],
                };
                let mut reports = Vec::new();
                let mut passed = true;
                let mut failures = 0;
                for kind in kinds {
                    let wc = WCons::new(op.clone(), Variant::new(kind, s.k))?;
                    let rep = confluence_suite(&wc, s.samples.unwrap_or(1000), 5, self.max_vertices, &mut rng)?;
                    passed &= rep.passed();
                    failures += rep.failures.len();
                    reports.push(to_value(&rep));
                }
                let summary = format!("{} variants, {failures} failures", reports.len());
                Ok(report(self.suite, passed, summary, Value::Array(reports)))
            }
            Suite::Homotopy => {
                let variant = s.variant_or(None, Kind::TauWPrime)?;
                if variant.has_unit_relation() {
                    return Err(CliError::Usage(format!("the height homotopy needs W' or tauW', got {variant}")));
                }
                let wc = WCons::new(op, variant)?;
                let times = if s.times.is_empty() { Time::standard_samples() } else { s.times.clone() };
                let rep = homotopy_suite(&wc, s.samples.unwrap_or(500), &times, self.max_vertices, &mut rng)?;
                let needs_witness = variant.is_tau();
                let passed = rep.passed() && (!needs_witness || rep.classical_failure_count > 0);
                let summary = format!(
                    "{} pairs, {} checks, {} rho failures, {} classical failures",
                    rep.pairs,
                    rep.checks,
                    rep.failures.len(),
                    rep.classical_failure_count
                );
                Ok(report(self.suite, passed, summary, to_value(&rep)))
            }
            Suite::Truncated => {
                let ks = match s.k {
                    Some(k) => vec![k],
                    None => vec![2, 3],
                };
                let kind = s.variant_or(None, Kind::W)?.kind;
                let mut reports = Vec::new();
                let mut passed = true;
                let mut failures = 0;
                for k in ks {
                    let wc = WCons::new(Truncated::new(op.clone(), k), Variant::new(kind, Some(k)))?;
                    let rep = truncated_suite(&wc, s.samples.unwrap_or(200), self.max_vertices, &mut rng)?;
                    passed &= rep.passed();
                    failures += rep.failures.len();
                    reports.push(to_value(&rep));
                }
                let summary = format!("{} bounds, {failures} failures", reports.len());
                Ok(report(self.suite, passed, summary, Value::Array(reports)))
            }
            Suite::Tau => {
                let variant = s.variant_or(None, Kind::TauWPrime)?;
                let wc = WCons::new(op, variant)?;
                let bound = self.max_vertices.min(4);
                match find_tau_counterexample(&wc, bound)? {
                    Some(w) => {
                        let body = json!({
                            "t": w.t.to_string(),
                            "unreduced": wc.to_json(&w.pair.left),
                            "reduced": wc.to_json(&w.pair.right),
                            "classical_images": [wc.to_json(&w.classical.0), wc.to_json(&w.classical.1)],
                            "rho_images": [wc.to_json(&w.rho.0), wc.to_json(&w.rho.1)],
                        });
                        let summary = format!(
                            "witness at t = {}: {} vs {}",
                            w.t,
                            wc.to_text(&w.pair.left),
                            wc.to_text(&w.pair.right)
                        );
                        Ok(report(self.suite, true, summary, body))
                    }
                    None => Ok(report(self.suite, false, format!("no witness within {bound} vertices"), Value::Null)),
                }
            }
        }
    }
}

fn settings(cli: &Cli) -> Result<Settings, CliError> {
    let seed = match std::env::var("OPERADFORGE_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("OPERADFORGE_SEED is not an integer: {v:?}")))?,
        Err(_) => cli.seed,
    };
    let times = cli.times.iter().map(|t| t.parse()).collect::<Result<Vec<Time>, _>>()?;
    Ok(Settings {
        variant: cli.variant.clone(),
        k: cli.k,
        seed,
        samples: cli.samples,
        times,
        format: cli.format,
    })
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let s = settings(&cli)?;
    let operad = cli.operad.as_str();
    match cli.command {
        Command::Normalize { file } => dispatch(operad, &s, NormalizeJob(file)),
        Command::Render { file } => dispatch(operad, &s, RenderJob(file)),
        Command::Compose { a, i, b } => dispatch(operad, &s, ComposeJob { a, i, b }),
        Command::Enumerate { r } => dispatch(operad, &s, EnumerateJob(r)),
        Command::Verify { suite, r, n, max_vertices } => {
            // Axioms of an unbounded operad are checked on its truncation.
            let s = if suite == Suite::Axioms && s.k.is_none() && operad == "obm" {
                Settings { k: Some(r), ..s }
            } else {
                s
            };
            dispatch(operad, &s, VerifyJob { suite, r, n, max_vertices })
        }
    }
}

fn main() -> ExitCode {
    // Usage errors exit with 1; 2 is reserved for truncation violations.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            if let Some(summary) = out.summary {
                eprintln!("{summary}");
            }
            if out.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
