//! The `qcert` command-line interface.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::cert::Certificate;
use crate::certify::{certify, CertifyOptions, MethodChoice};
use crate::error::{Error, Result};
use crate::gen::{corpus, Kind};
use crate::poly::{parse_poly, HomogPoly};
use crate::sdp::SdpOptions;
use crate::sos::sos_check;
use crate::sphere::{min_on_sphere, SphereOptions};
use crate::verify::{verify_certificate, DEFAULT_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_REJECTED: i32 = 2;
pub const EXIT_FAILED: i32 = 3;
pub const EXIT_INPUT: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

pub const SEED_ENV: &str = "QC_SEED";

#[derive(Parser, Debug)]
#[command(name = "qcert", version, about = "Nonnegativity certificates for quaternary quartics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a certificate f = p / qmult.
    Certify(CertifyArgs),
    /// Check a certificate against a polynomial.
    Verify(VerifyArgs),
    /// Decide whether a form is a sum of squares.
    CheckSos(InputArgs),
    /// Minimize a quartic on the unit sphere.
    MinSphere(MinArgs),
    /// Print seeded test polynomials, one per line.
    Gen(GenArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// File containing the polynomial; lines starting with '#' are ignored.
    #[arg(long, conflicts_with = "poly")]
    input: Option<PathBuf>,
    /// Polynomial text, e.g. "x0^4 + x1^4".
    #[arg(long, allow_hyphen_values = true)]
    poly: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Auto,
    Structured,
    Direct,
}

impl From<MethodArg> for MethodChoice {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => MethodChoice::Auto,
            MethodArg::Structured => MethodChoice::Structured,
            MethodArg::Direct => MethodChoice::Direct,
        }
    }
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Certify every file in this directory; --out then names the output directory.
    #[arg(long, conflicts_with_all = ["input", "poly"])]
    batch: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Output file (directory with --batch); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    cert: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Write the machine-readable report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MinArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 32)]
    starts: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Sos,
    Soseps,
    Choilam,
    Indefinite,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Number of random quadratic squares in sos instances.
    #[arg(long, default_value_t = 4)]
    squares: usize,
    /// Write one file per polynomial into this directory instead of stdout.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// A failure carrying its exit code.
struct Exit {
    code: i32,
    message: String,
}

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Rejected { .. } => EXIT_REJECTED,
            Error::Parse(_) | Error::Io(_) | Error::Json(_) | Error::InvalidInput(_) => EXIT_INPUT,
            _ => EXIT_FAILED,
        };
        Exit {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: String) -> Exit {
    Exit {
        code: EXIT_USAGE,
        message,
    }
}

/// Seed from the flag, else from `QC_SEED`, else 0.
fn resolve_seed(flag: Option<u64>) -> std::result::Result<u64, Exit> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn read_poly_file(path: &Path) -> Result<HomogPoly> {
    let text = fs::read_to_string(path)?;
    let body: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    Ok(parse_poly(&body.join(" "))?)
}

fn read_input(args: &InputArgs) -> std::result::Result<HomogPoly, Exit> {
    match (&args.input, &args.poly) {
        (Some(path), None) => Ok(read_poly_file(path)?),
        (None, Some(text)) => Ok(parse_poly(text).map_err(Error::from)?),
        _ => Err(usage("exactly one of --input or --poly is required".into())),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn certify_options(method: MethodArg, tol: f64, seed: u64) -> CertifyOptions {
    CertifyOptions {
        method: method.into(),
        tol,
        sphere: SphereOptions {
            seed,
            ..Default::default()
        },
        sdp: SdpOptions::default(),
    }
}

fn describe_rejection(e: &Error) -> Option<String> {
    match e {
        Error::Rejected { witness, value } => Some(format!("rejected: f({witness:?}) = {value:e}")),
        _ => None,
    }
}

fn run_certify(args: CertifyArgs) -> std::result::Result<i32, Exit> {
    let seed = resolve_seed(args.seed)?;
    let opts = certify_options(args.method, args.tol, seed);
    if let Some(dir) = &args.batch {
        return run_batch(dir, args.out.as_deref(), &opts);
    }
    let f = read_input(&args.input)?;
    match certify(&f, &opts) {
        Ok(cert) => {
            write_or_print(args.out.as_deref(), &cert.to_json()?)?;
            eprintln!(
                "certified via {} with residual {:.3e} ({} squares)",
                cert.method,
                cert.residual,
                cert.num_squares()
            );
            Ok(EXIT_OK)
        }
        Err(e) => {
            if let Some(line) = describe_rejection(&e) {
                println!("{line}");
            }
            Err(e.into())
        }
    }
}

fn run_batch(dir: &Path, out: Option<&Path>, opts: &CertifyOptions) -> std::result::Result<i32, Exit> {
    let out_dir = out.unwrap_or(dir).to_path_buf();
    fs::create_dir_all(&out_dir).map_err(Error::from)?;
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(Error::from)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_none_or(|x| x != "json"))
        .collect();
    files.sort();
    let results: Vec<(PathBuf, i32, String)> = files
        .par_iter()
        .map(|path| {
            let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let target = out_dir.join(format!("{stem}.cert.json"));
            let outcome = read_poly_file(path)
                .and_then(|f| certify(&f, opts))
                .and_then(|c| Ok(fs::write(&target, c.to_json()?).map(|_| c)?));
            match outcome {
                Ok(c) => (path.clone(), EXIT_OK, format!("{} residual {:.3e}", c.method, c.residual)),
                Err(e) => {
                    let msg = describe_rejection(&e).unwrap_or_else(|| e.to_string());
                    (path.clone(), Exit::from(e).code, msg)
                }
            }
        })
        .collect();
    let mut worst = EXIT_OK;
    for (path, code, msg) in &results {
        println!("{}\t{}\t{}", path.display(), code, msg);
        worst = worst.max(*code);
    }
    Ok(worst)
}

fn run_verify(args: VerifyArgs) -> std::result::Result<i32, Exit> {
    let f = read_input(&args.input)?;
    let text = fs::read_to_string(&args.cert).map_err(Error::from)?;
    let cert = Certificate::from_json(&text)?;
    let report = verify_certificate(&f, &cert, args.tol);
    if let Some(path) = &args.report {
        fs::write(path, serde_json::to_string_pretty(&report).map_err(Error::from)?).map_err(Error::from)?;
    }
    print!("{}", report.summary());
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn run_check_sos(args: InputArgs) -> std::result::Result<i32, Exit> {
    let f = read_input(&args)?;
    let check = sos_check(&f, &SdpOptions::default())?;
    println!("{}", check.verdict);
    eprintln!("phase-I optimum t* = {:e}, status {:?}", check.t_star, check.status);
    Ok(EXIT_OK)
}

fn run_min_sphere(args: MinArgs) -> std::result::Result<i32, Exit> {
    let f = read_input(&args.input)?;
    let opts = SphereOptions {
        seed: resolve_seed(args.seed)?,
        n_starts: args.starts,
        ..Default::default()
    };
    let m = min_on_sphere(&f, &opts)?;
    let out = serde_json::json!({
        "xstar": m.xstar,
        "value": m.value,
        "grad_tangent_norm": m.grad_tangent_norm,
        "classification": m.classification,
    });
    println!("{}", serde_json::to_string_pretty(&out).map_err(Error::from)?);
    Ok(EXIT_OK)
}

fn run_gen(args: GenArgs) -> std::result::Result<i32, Exit> {
    let seed = resolve_seed(args.seed)?;
    let kind = match args.kind {
        KindArg::Sos => Kind::Sos,
        KindArg::Soseps => Kind::SosEps,
        KindArg::Choilam => Kind::ChoiLam,
        KindArg::Indefinite => Kind::Indefinite,
    };
    let polys = corpus(kind, seed, args.count, args.eps, args.squares);
    match &args.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(Error::from)?;
            for (i, f) in polys.iter().enumerate() {
                fs::write(dir.join(format!("{i:04}.txt")), format!("{f}\n")).map_err(Error::from)?;
            }
        }
        None => {
            for f in &polys {
                println!("{f}");
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parses `argv` (including the program name) and runs the subcommand,
/// returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Certify(a) => run_certify(a),
        Command::Verify(a) => run_verify(a),
        Command::CheckSos(a) => run_check_sos(a),
        Command::MinSphere(a) => run_min_sphere(a),
        Command::Gen(a) => run_gen(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qcert: {}", e.message);
            e.code
        }
    }
}
