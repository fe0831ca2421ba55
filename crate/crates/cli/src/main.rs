//! `sonc`: certified SONC lower bounds from the command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sonc_conic::{export_cbf, SolverSettings};
use sonc_core::bench::{load_specs, run_bench, write_csv, write_csv_file};
use sonc_core::certificate::Certificate;
use sonc_core::certify::{verify, verify_exact_with, DEFAULT_MAX_DENOMINATOR, DEFAULT_VERIFY_TOL};
use sonc_core::exponent::Exponent;
use sonc_core::medseq::{med_set, med_set_odd};
use sonc_core::pipeline::{bound_problem, sonc_lower_bound, BoundConfig};
use sonc_core::poly::infer_nvars;
use sonc_core::{parse_poly, qlin, SoncError, SparsePoly};

const GRAMMAR: &str = "\
Polynomial files hold one expression in x1..xn, e.g.
    x1^4*x2^2 + x1^2*x2^4 + 1 - 3*x1^2*x2^2
Terms are `coeff*x1^e1*x2^e2...`; exponents may be rationals like x1^(3/2).
Lines starting with # are ignored.";

#[derive(Parser)]
#[command(name = "sonc", version, about = "Certified lower bounds for sparse polynomials via sums of nonnegative circuits", after_help = GRAMMAR)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PolyArgs {
    /// Polynomial file.
    poly: PathBuf,
    /// Number of variables (default: largest index used).
    #[arg(long)]
    nvars: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a certified lower bound.
    Bound {
        #[command(flatten)]
        input: PolyArgs,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        /// Write the certificate as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print solver iterations.
        #[arg(long)]
        verbose: bool,
    },
    /// Check a certificate against a polynomial.
    Certify {
        #[command(flatten)]
        input: PolyArgs,
        cert: PathBuf,
        #[arg(long, default_value_t = DEFAULT_VERIFY_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Run benchmark specs from a JSON file.
    Bench {
        specs: PathBuf,
        /// CSV output (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        /// Leave the time columns at zero for reproducible output.
        #[arg(long)]
        no_timings: bool,
    },
    /// Write the cone program in CBF.
    ExportCbf {
        #[command(flatten)]
        input: PolyArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the rational mediated set of a circuit as JSON.
    Medset {
        /// Trellis points separated by `;`, coordinates by `,`.
        #[arg(long)]
        trellis: String,
        #[arg(long)]
        beta: String,
        /// Use the odd-parity construction.
        #[arg(long)]
        odd: bool,
    },
}

enum Failure {
    Usage(String),
    Rejected(String),
}

impl From<SoncError> for Failure {
    fn from(e: SoncError) -> Self {
        match e {
            SoncError::Io(_) | SoncError::Parse { .. } | SoncError::Json(_) | SoncError::Invalid(_) | SoncError::Dimension { .. } => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Rejected(other.to_string()),
        }
    }
}

fn read_poly(args: &PolyArgs) -> Result<SparsePoly, Failure> {
    let text = std::fs::read_to_string(&args.poly).map_err(|e| Failure::Usage(format!("{}: {e}", args.poly.display())))?;
    let body: String = text.lines().filter(|l| !l.trim_start().starts_with('#')).collect::<Vec<_>>().join(" ");
    let n = args.nvars.unwrap_or_else(|| infer_nvars(&body).max(1));
    parse_poly(&body, n).map_err(|e| Failure::Usage(format!("{}: {e}\n\n{GRAMMAR}", args.poly.display())))
}

fn parse_point(s: &str) -> Result<Exponent, Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    Exponent::from_strings(&parts).ok_or_else(|| Failure::Usage(format!("bad point `{s}`")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Bound { input, tol, max_iter, out, verbose } => {
            let f = read_poly(&input)?;
            let config = BoundConfig { solver: SolverSettings { tol, max_iter, verbose }, ..Default::default() };
            let res = sonc_lower_bound(&f, &config)?;
            let shown = if res.xi.abs() < 5e-7 { 0.0 } else { res.xi };
            println!("xi_socp = {shown:.6}");
            println!("status = {}", res.status);
            if let Some(r) = res.report.exact_residual {
                println!("exact_residual = {r:.3e}");
            }
            println!("time_total_s = {:.3}", res.report.time_total_s);
            if let (Some(path), Some(cert)) = (out, &res.certificate) {
                cert.save(&path)?;
            }
            if res.status.is_certified() {
                Ok(())
            } else {
                Err(Failure::Rejected(format!("no verified certificate ({})", res.status)))
            }
        }
        Command::Certify { input, cert, tol, samples } => {
            let f = read_poly(&input)?;
            let c = Certificate::load(&cert)?;
            let exact = verify_exact_with(&c, &f, tol, DEFAULT_MAX_DENOMINATOR)?;
            let report = verify(&c, &f, samples, 0)?;
            println!("xi = {}", c.xi);
            println!("exact_residual = {:.3e}", exact.residual);
            println!("numeric_residual = {:.3e}", report.numeric_residual);
            if exact.pass {
                println!("valid");
                Ok(())
            } else {
                Err(Failure::Rejected("certificate does not match the polynomial".into()))
            }
        }
        Command::Bench { specs, out, threads, no_timings } => {
            let specs = load_specs(&specs)?;
            let rows = run_bench(&specs, &BoundConfig::default(), threads, !no_timings)?;
            match out {
                Some(p) => write_csv_file(&rows, &p)?,
                None => write_csv(&rows, std::io::stdout().lock())?,
            }
            Ok(())
        }
        Command::ExportCbf { input, out } => {
            let f = read_poly(&input)?;
            let bp = bound_problem(&f, &BoundConfig::default())?
                .ok_or_else(|| Failure::Rejected("an inner term lies outside the Newton polytope of the outer terms".into()))?;
            write_file(&out, &export_cbf(&bp.problem))
        }
        Command::Medset { trellis, beta, odd } => {
            let trellis: Vec<Exponent> = trellis.split(';').map(parse_point).collect::<Result<_, _>>()?;
            let beta = parse_point(&beta)?;
            let weights = qlin::barycentric(&trellis, &beta).ok_or_else(|| Failure::Usage("beta is not in the affine hull of the trellis".into()))?;
            let ms = if odd { med_set_odd(&trellis, &beta, &weights) } else { med_set(&trellis, &beta, &weights) }?;
            let text = serde_json::to_string_pretty(&ms).map_err(|e| Failure::Rejected(e.to_string()))?;
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rejected(msg)) => {
            eprintln!("sonc: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("sonc: {msg}");
            ExitCode::from(2)
        }
    }
}
