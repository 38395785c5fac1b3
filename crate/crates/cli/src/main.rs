//! `gkm`: build, verify and query generalised Kac-Moody algebras.
//!
//! Exit codes: 0 success, 1 internal or IO failure, 2 usage error,
//! 3 verification failure.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use gkm_core::checks::{torus_hierarchy_check, verify, Suite, VerifyOptions};
use gkm_core::dump::{AlgebraDumpV1, Provenance};
use gkm_core::liealg::root_to_string;
use gkm_core::sampling::DEFAULT_BUDGET;
use gkm_core::scalar::{format_rational, parse_rational, Rational};
use gkm_core::wigner::{self, SpinTriple};
use gkm_core::{GkmAlgebra, GkmError, Manifold, RootSpaceLabel, SurdScalar, VerificationReport};

/// Directory holding the persistent Wigner 3j cache.
const CACHE_ENV: &str = "GKM_WIGNER_CACHE";

#[derive(Parser)]
#[command(name = "gkm", version, about = "Exact generalised Kac-Moody algebras over tori, the two-sphere and SU(2)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Build an algebra and write its JSON dump.
    Build {
        /// su2, su3, u1 or u1^n.
        #[arg(long)]
        algebra: String,
        /// s1, t<n>, s2, s3 or s3-integer.
        #[arg(long)]
        manifold: String,
        #[arg(long)]
        cutoff: u32,
        /// Comma-separated central charges, one per operator D_j (default all 1).
        #[arg(long)]
        charges: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Include the full generator bracket table.
        #[arg(long)]
        brackets: bool,
    },
    /// Run a verification suite on a dump.
    Verify {
        file: PathBuf,
        #[arg(long, default_value = "all", value_parser = Suite::NAMES)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Basis and dimension of the root space g_(α, n).
    Roots {
        file: PathBuf,
        /// A root as comma-separated rationals, `0`, or `+α` / `-α` for rank one.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// Eigenvalues of D_1..D_r, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        n: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Exact Wigner 3j, Clebsch-Gordan or Gaunt coefficients. Labels are
    /// integers or halves written `p/2`; with `--doubled` every label is
    /// twice its value.
    Wigner {
        #[arg(long = "3j", num_args = 6, allow_hyphen_values = true, value_names = ["J1", "J2", "J3", "M1", "M2", "M3"])]
        three_j: Option<Vec<String>>,
        /// <j1 m1; j2 m2 | j3 m3>.
        #[arg(long, num_args = 6, allow_hyphen_values = true, value_names = ["J1", "M1", "J2", "M2", "J3", "M3"])]
        cg: Option<Vec<String>>,
        /// Coefficient of ρ_{l3 m3} in ρ_{l1 m1} ρ_{l2 m2} on the two-sphere.
        #[arg(long, num_args = 6, allow_hyphen_values = true, value_names = ["L1", "M1", "L2", "M2", "L3", "M3"])]
        gaunt: Option<Vec<String>>,
        #[arg(long)]
        doubled: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check the embedding ĝ(𝕋ⁿ⁻¹) ⊂ ĝ(𝕋ⁿ) under m ↦ (m, shift).
    Hierarchy {
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cutoff: u32,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        shift: i64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

enum Failure {
    Usage(String),
    Internal(String),
    Verification,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Internal(_) => 1,
            Self::Usage(_) => 2,
            Self::Verification => 3,
        }
    }
}

/// Errors caused by the command-line arguments map to exit code 2.
fn usage(e: GkmError) -> Failure {
    match e {
        GkmError::InvalidInput(_)
        | GkmError::UnknownAlgebra(_)
        | GkmError::UnsupportedManifold(_)
        | GkmError::NotSemisimple(_)
        | GkmError::Parse(_) => Failure::Usage(e.to_string()),
        other => Failure::Internal(other.to_string()),
    }
}

fn internal(e: impl ToString) -> Failure {
    Failure::Internal(e.to_string())
}

fn parse_list(s: &str) -> Result<Vec<Rational>, Failure> {
    s.trim_matches(|c| c == '(' || c == ')')
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_rational(p.trim()).map_err(usage))
        .collect()
}

fn load(file: &Path) -> Result<GkmAlgebra, Failure> {
    let text = fs::read_to_string(file).map_err(|e| internal(format!("{}: {e}", file.display())))?;
    let dump = AlgebraDumpV1::from_json(&text).map_err(|e| internal(format!("{}: {e}", file.display())))?;
    dump.to_algebra().map_err(|e| internal(format!("{}: {e}", file.display())))
}

fn with_cache<T>(f: impl FnOnce() -> Result<T, Failure>) -> Result<T, Failure> {
    let dir = std::env::var_os(CACHE_ENV).map(PathBuf::from);
    if let Some(dir) = &dir {
        wigner::load_cache(dir).map_err(internal)?;
    }
    let out = f()?;
    if let Some(dir) = &dir {
        fs::create_dir_all(dir).map_err(internal)?;
        wigner::save_cache(dir).map_err(internal)?;
    }
    Ok(out)
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON values serialise"));
}

fn cmd_build(
    algebra: &str,
    manifold: &str,
    cutoff: u32,
    charges: Option<&str>,
    out: &Path,
    brackets: bool,
) -> Result<(), Failure> {
    let m = Manifold::parse(manifold).map_err(usage)?;
    gkm_core::liealg::BaseKind::parse(algebra).map_err(usage)?;
    let charges = match charges {
        Some(s) => parse_list(s)?,
        None => vec![Rational::from_integer(1.into()); m.rank()],
    };
    if charges.len() != m.rank() {
        return Err(Failure::Usage(format!("{m} needs {} central charges, got {}", m.rank(), charges.len())));
    }
    let alg = with_cache(|| GkmAlgebra::build(algebra, m, cutoff, charges.clone()).map_err(internal))?;
    let mut parameters = BTreeMap::new();
    parameters.insert("algebra".to_string(), algebra.to_string());
    parameters.insert("manifold".to_string(), m.to_string());
    parameters.insert("cutoff".to_string(), cutoff.to_string());
    parameters.insert("charges".to_string(), charges.iter().map(format_rational).collect::<Vec<_>>().join(","));
    let provenance = Provenance {
        tool: "gkm".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        parameters,
        created: chrono::Utc::now().to_rfc3339(),
    };
    let dump = AlgebraDumpV1::from_algebra(&alg, brackets, provenance);
    fs::write(out, dump.to_json().map_err(internal)?).map_err(|e| internal(format!("{}: {e}", out.display())))?;
    eprintln!("wrote {} ({} generators)", out.display(), alg.generator_count());
    Ok(())
}

fn emit_report(report: &VerificationReport, format: Format) {
    match format {
        Format::Json => print_json(&serde_json::to_value(report).expect("report serialises")),
        Format::Text => print!("{report}"),
    }
}

fn cmd_verify(file: &Path, suite: &str, seed: u64, budget: usize, format: Format) -> Result<(), Failure> {
    let suite: Suite = suite.parse().map_err(usage)?;
    let alg = load(file)?;
    let opts = VerifyOptions { seed, budget, source: Some(file.display().to_string()) };
    let report = verify(&alg, suite, &opts);
    emit_report(&report, format);
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn cmd_roots(file: &Path, alpha: &str, n: &str, format: Format) -> Result<(), Failure> {
    let alg = load(file)?;
    let Some(cw) = alg.cw.as_ref() else {
        return Err(Failure::Usage(format!("base algebra {} has no roots", alg.base.name())));
    };
    let alpha = match alpha.trim() {
        "0" => cw.zero_root(),
        s @ ("+α" | "-α" | "+a" | "-a" | "α" | "a") => {
            if cw.rank() != 1 {
                return Err(Failure::Usage(format!("'{s}' is ambiguous for rank {}", cw.rank())));
            }
            let positive = cw.roots.iter().find(|r| r[0] > Rational::from_integer(0.into())).expect("rank one has a positive root");
            if s.starts_with('-') {
                positive.iter().map(|x| -x).collect()
            } else {
                positive.clone()
            }
        }
        s => parse_list(s)?,
    };
    let n = parse_list(n)?;
    let label = RootSpaceLabel { alpha, n };
    let basis = alg.root_space(&label).map_err(usage)?;
    let by_degree = alg.root_space_by_degree(&label).map_err(usage)?;
    let n_str: Vec<String> = label.n.iter().map(format_rational).collect();
    match format {
        Format::Json => print_json(&json!({
            "alpha": label.alpha.iter().map(format_rational).collect::<Vec<_>>(),
            "n": n_str,
            "dimension": basis.len(),
            "basis": basis.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "by_degree": by_degree.iter().map(|(d, v)| (d.to_string(), v.len())).collect::<BTreeMap<_, _>>(),
        })),
        Format::Text => {
            println!("g_({}, ({})) dimension {}", root_to_string(&label.alpha), n_str.join(","), basis.len());
            for e in &basis {
                println!("  {e}");
            }
        }
    }
    Ok(())
}

/// A label as an integer or `p/2`, returned doubled.
fn doubled_label(s: &str, doubled: bool) -> Result<i64, Failure> {
    let bad = || Failure::Usage(format!("malformed angular-momentum label '{s}'"));
    if doubled {
        return s.parse::<i64>().map_err(|_| bad());
    }
    let q = parse_rational(s).map_err(|_| bad())?;
    let twice = q * Rational::from_integer(2.into());
    if !twice.is_integer() {
        return Err(bad());
    }
    twice.to_integer().try_into().map_err(|_| bad())
}

fn labels(v: &[String], doubled: bool) -> Result<[i64; 6], Failure> {
    let mut out = [0; 6];
    for (slot, s) in out.iter_mut().zip(v) {
        *slot = doubled_label(s, doubled)?;
    }
    Ok(out)
}

fn nonneg(x: i64) -> Result<u32, Failure> {
    u32::try_from(x).map_err(|_| Failure::Usage(format!("j = {} must be nonnegative", x as f64 / 2.0)))
}

fn small(x: i64) -> Result<i32, Failure> {
    i32::try_from(x).map_err(|_| Failure::Usage(format!("label {x} out of range")))
}

fn cmd_wigner(
    three_j: Option<Vec<String>>,
    cg: Option<Vec<String>>,
    gaunt: Option<Vec<String>>,
    doubled: bool,
    format: Format,
) -> Result<(), Failure> {
    let value: SurdScalar = with_cache(|| match (three_j, cg, gaunt) {
        (Some(v), None, None) => {
            let l = labels(&v, doubled)?;
            let t = SpinTriple::doubled(nonneg(l[0])?, nonneg(l[1])?, nonneg(l[2])?, small(l[3])?, small(l[4])?, small(l[5])?)
                .map_err(usage)?;
            wigner::wigner3j(&t).map_err(usage)
        }
        (None, Some(v), None) => {
            let l = labels(&v, doubled)?;
            let t = SpinTriple::doubled(nonneg(l[0])?, nonneg(l[2])?, nonneg(l[4])?, small(l[1])?, small(l[3])?, small(l[5])?)
                .map_err(usage)?;
            wigner::clebsch_gordan(&t).map_err(usage)
        }
        (None, None, Some(v)) => {
            let l = labels(&v, doubled)?;
            if l.iter().any(|x| x % 2 != 0) {
                return Err(Failure::Usage("Gaunt labels must be integers".into()));
            }
            let h: Vec<i64> = l.iter().map(|x| x / 2).collect();
            wigner::gaunt_normalized(nonneg(h[0])?, small(h[1])?, nonneg(h[2])?, small(h[3])?, nonneg(h[4])?, small(h[5])?)
                .map_err(usage)
        }
        _ => Err(Failure::Usage("give exactly one of --3j, --cg, --gaunt".into())),
    })?;
    let float = value.to_f64();
    match format {
        Format::Json => print_json(&json!({
            "exact": value.to_string(),
            "terms": serde_json::to_value(&value).map_err(internal)?,
            "float": float,
        })),
        Format::Text if value.is_zero() => println!("0"),
        Format::Text => println!("{value}  ≈ {}", value.to_significant(16)),
    }
    Ok(())
}

fn cmd_hierarchy(algebra: &str, n: usize, cutoff: u32, shift: i64, format: Format) -> Result<(), Failure> {
    let check = torus_hierarchy_check(algebra, n, cutoff, shift).map_err(usage)?;
    let passed = check.passed;
    let mut report = VerificationReport::default();
    report.push(check);
    emit_report(&report, format);
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Build { algebra, manifold, cutoff, charges, out, brackets } => {
            cmd_build(&algebra, &manifold, cutoff, charges.as_deref(), &out, brackets)
        }
        Command::Verify { file, suite, seed, budget, format } => cmd_verify(&file, &suite, seed, budget, format),
        Command::Roots { file, alpha, n, format } => cmd_roots(&file, &alpha, &n, format),
        Command::Wigner { three_j, cg, gaunt, doubled, format } => cmd_wigner(three_j, cg, gaunt, doubled, format),
        Command::Hierarchy { algebra, n, cutoff, shift, format } => cmd_hierarchy(&algebra, n, cutoff, shift, format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(msg) => eprintln!("error: {msg}\n\nRun `gkm --help` for usage."),
                Failure::Internal(msg) => eprintln!("error: {msg}"),
                Failure::Verification => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
