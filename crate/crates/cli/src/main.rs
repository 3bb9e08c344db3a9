use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use maxsing::builder::{self, FamilyAdapter, FamilySpec, Phi, RunConfig, RunStatus, SequenceTrace, DEFAULT_MAX_NORM_BITS};
use maxsing::geometry::rat_to_decimal;
use maxsing::multilinear::KLinearMapFile;
use maxsing::quadric::QuadricFile;
use maxsing::verifier::{self, AuditOptions, DEFAULT_COST_LIMIT};
use maxsing::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_AUDIT: u8 = 3;

#[derive(Parser)]
#[command(name = "maxsing", version, about = "Build and audit sequences of rational points converging to maximally singular points")]
struct Cli {
    /// Bits of precision for certified square roots and logarithms
    #[arg(long, global = true, env = "MAXSING_PRECISION_BITS", default_value_t = 64)]
    precision: u32,

    /// Worker threads for enumeration (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a trace
    Gen(GenArgs),
    /// Audit a trace and write the report as JSON
    Verify(VerifyArgs),
    /// Print certified exponent lower bounds along a trace
    Exponent(ExponentArgs),
    /// Exhaustive best approximations to the limit of a trace
    Bruteforce(BruteArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyKind {
    Grassmann,
    Prodforms,
    Quadric,
    Klinear,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyKind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Map file (klinear) or form file (quadric; default is x0x1 + x2x3)
    #[arg(long)]
    file: Option<PathBuf>,
    /// Decay function: `log3x` or `pow p/q`
    #[arg(long, num_args = 1..=2, required = true)]
    phi: Vec<String>,
    /// Number of points to build
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Refuse steps whose squared norm needs more bits than this
    #[arg(long, default_value_t = DEFAULT_MAX_NORM_BITS)]
    max_norm_bits: u64,
    /// Output path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    trace: PathBuf,
    /// Also enumerate all primitive points up to this norm
    #[arg(long)]
    bruteforce_xmax: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_COST_LIMIT)]
    cost_limit: u128,
    /// Report path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExponentArgs {
    trace: PathBuf,
    #[arg(long)]
    json: bool,
    /// Decimal digits in the table
    #[arg(long, default_value_t = 6)]
    digits: usize,
}

#[derive(Args)]
struct BruteArgs {
    trace: PathBuf,
    #[arg(long)]
    xmax: u64,
    #[arg(long, default_value_t = DEFAULT_COST_LIMIT)]
    cost_limit: u128,
    #[arg(long)]
    json: bool,
}

#[derive(Debug)]
struct Fail {
    code: u8,
    msg: String,
}

fn fail(code: u8, msg: impl Into<String>) -> Fail {
    Fail { code, msg: msg.into() }
}

fn usage(e: impl std::fmt::Display) -> Fail {
    fail(EXIT_USAGE, e.to_string())
}

/// Budget-type errors exit 2, everything else is a configuration problem.
fn from_core(e: Error) -> Fail {
    match e {
        Error::BudgetExhausted(_) | Error::HeightExhausted { .. } | Error::NoValidMultiplier(_) | Error::TooLarge { .. } => {
            fail(EXIT_BUDGET, e.to_string())
        }
        _ => usage(e),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Fail> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_trace(path: &Path) -> Result<SequenceTrace, Fail> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    SequenceTrace::from_json(&text).map_err(usage)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Fail> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn family_spec(a: &GenArgs) -> Result<FamilySpec, Fail> {
    let nk = || match (a.n, a.k) {
        (Some(n), Some(k)) => Ok((n, k)),
        _ => Err(usage("this family needs --n and --k")),
    };
    Ok(match a.family {
        FamilyKind::Grassmann => {
            let (n, k) = nk()?;
            FamilySpec::Grassmann { n, k }
        }
        FamilyKind::Prodforms => {
            let (n, k) = nk()?;
            FamilySpec::Prodforms { n, k }
        }
        FamilyKind::Klinear => {
            let path = a.file.as_deref().ok_or_else(|| usage("klinear needs --file"))?;
            FamilySpec::Klinear { map: read_json::<KLinearMapFile>(path)? }
        }
        FamilyKind::Quadric => match a.file.as_deref() {
            Some(path) => FamilySpec::Quadric { form: read_json::<QuadricFile>(path)? },
            None => FamilyAdapter::split4().spec().clone(),
        },
    })
}

fn cmd_gen(a: &GenArgs, precision: u32) -> Result<(), Fail> {
    let phi: Phi = a.phi.join(" ").parse().map_err(usage)?;
    let spec = family_spec(a)?;
    let adapter = FamilyAdapter::from_spec(&spec, a.seed).map_err(usage)?;
    let cfg = RunConfig { phi, steps: a.steps, seed: a.seed, precision_bits: precision, max_norm_bits: a.max_norm_bits, start: None };
    let out = builder::run(&adapter, &cfg).map_err(usage)?;
    emit(a.out.as_deref(), &out.trace.to_json())?;
    match &out.trace.status {
        RunStatus::Complete => {
            eprintln!("built {} points", out.trace.len());
            Ok(())
        }
        RunStatus::BudgetExhausted { reason } | RunStatus::Failed { reason } => {
            Err(fail(EXIT_BUDGET, format!("stopped after {} of {} points: {reason}", out.trace.len(), a.steps)))
        }
    }
}

fn cmd_verify(a: &VerifyArgs, precision: u32) -> Result<(), Fail> {
    let trace = read_trace(&a.trace)?;
    let opts = AuditOptions { precision_bits: precision, bruteforce_xmax: a.bruteforce_xmax, cost_limit: a.cost_limit };
    let report = verifier::audit(&trace, &opts).map_err(from_core)?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    emit(a.out.as_deref(), &text)?;
    match &report.first_failure {
        None => {
            eprintln!("audit passed: {} points", trace.len());
            Ok(())
        }
        Some(f) => Err(fail(EXIT_AUDIT, format!("audit failed: {f}"))),
    }
}

fn cmd_exponent(a: &ExponentArgs, precision: u32) -> Result<(), Fail> {
    let trace = read_trace(&a.trace)?;
    let report = verifier::exponent_report(&trace, precision).map_err(usage)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report.records).expect("records serialize"));
    } else {
        print!("{}", report.table(a.digits));
    }
    Ok(())
}

fn cmd_bruteforce(a: &BruteArgs, precision: u32) -> Result<(), Fail> {
    let trace = read_trace(&a.trace)?;
    let limit = builder::limit_point(&trace).map_err(usage)?;
    let profile = verifier::brute_force_profile(&limit, a.xmax, precision, a.cost_limit).map_err(from_core)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&profile).expect("profile serializes"));
        return Ok(());
    }
    println!("{:>6}  {:>14}  {:>14}  argmin", "X", "lo", "hi");
    for r in &profile.rows {
        println!("{:>6}  {:>14}  {:>14}  {}", r.x, rat_to_decimal(&r.interval.lo, 10), rat_to_decimal(&r.interval.hi, 10), r.argmin);
    }
    eprintln!("{} primitive points enumerated", profile.candidates);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let res = match &cli.command {
        Command::Gen(a) => cmd_gen(a, cli.precision),
        Command::Verify(a) => cmd_verify(a, cli.precision),
        Command::Exponent(a) => cmd_exponent(a, cli.precision),
        Command::Bruteforce(a) => cmd_bruteforce(a, cli.precision),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
