use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use grayforge::construct::{construct, FamilyRequest};
use grayforge::io::{export_csv, ProfileFile};
use grayforge::params::{Branch, Sign};
use grayforge::report::Tolerances;
use grayforge::sweep::{self, SweepResult};
use grayforge::verify::{run_checks, Check};
use grayforge::Error;

const EXIT_IO: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_CHECK_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "grayforge", version, about = "Construct and verify cohomogeneity-one Gray metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a profile for one family and write it as JSON.
    Construct {
        #[command(subcommand)]
        family: FamilyArgs,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Run curvature checks on a profile file.
    Verify {
        path: PathBuf,
        /// Comma-separated check names; defaults to every check that applies.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<Check>,
        /// Tolerance override, `name=value`; repeatable.
        #[arg(long = "tol", value_parser = parse_override)]
        tolerances: Vec<(String, f64)>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a parameter sweep.
    Sweep {
        #[command(subcommand)]
        kind: SweepKind,
        #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
        format: Format,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Write profile samples and Ricci eigenvalues as CSV.
    Export {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FamilyArgs {
    GraySymmetric {
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
    },
    GrayAsymmetric {
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, value_parser = parse_branch, allow_negative_numbers = true, default_value = "minus")]
        branch: Branch,
    },
    Einstein {
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        k: u32,
    },
    Kahler {
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        #[arg(long, allow_negative_numbers = true)]
        d: f64,
    },
    Product {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = 2)]
        genus: u32,
    },
}

#[derive(Subcommand)]
enum SweepKind {
    /// Einstein member count per genus.
    EinsteinCount {
        #[arg(long, default_value_t = 2)]
        genus_min: u32,
        #[arg(long, default_value_t = 6)]
        genus_max: u32,
    },
    /// Bisection bracket for the asymmetric threshold.
    Eta {
        #[arg(long, default_value_t = 2.0)]
        lower: f64,
        #[arg(long, default_value_t = 2.1)]
        upper: f64,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
    /// `eps_s` over a list of `s`.
    EpsS {
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5,2,3")]
        s: Vec<f64>,
        #[arg(long, allow_negative_numbers = true, default_value_t = -1)]
        eps: i8,
    },
    /// Kähler feasibility over an `(s, D)` grid.
    KahlerWindow {
        #[command(flatten)]
        s: Range,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4")]
        d: Vec<f64>,
    },
}

#[derive(Args)]
struct Range {
    #[arg(long, default_value_t = 0.1)]
    s_min: f64,
    #[arg(long, default_value_t = 2.5)]
    s_max: f64,
    #[arg(long, default_value_t = 25)]
    s_n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_override(raw: &str) -> Result<(String, f64), String> {
    let (name, value) = raw.split_once('=').ok_or("expected name=value")?;
    let value = value.parse().map_err(|e| format!("bad value '{value}': {e}"))?;
    Ok((name.trim().to_string(), value))
}

fn parse_branch(raw: &str) -> Result<Branch, String> {
    match raw {
        "minus" | "-1" => Ok(Branch::Minus),
        "zero" | "0" => Ok(Branch::Zero),
        "plus" | "1" | "+1" => Ok(Branch::Plus),
        _ => Err(format!("unknown branch '{raw}' (minus, zero, plus)")),
    }
}

/// File when a path is given, otherwise stdout.
fn sink(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Ok,
    ChecksFailed,
}

fn run_construct(family: FamilyArgs, out: Option<PathBuf>, tol: &Tolerances) -> anyhow::Result<Result<Outcome, Error>> {
    let request = match family {
        FamilyArgs::GraySymmetric { genus, k, x } => FamilyRequest::GraySymmetric { genus, k, x },
        FamilyArgs::GrayAsymmetric { genus, k, branch } => FamilyRequest::GrayAsymmetric { genus, k, branch },
        FamilyArgs::Einstein { genus, k } => FamilyRequest::Einstein { genus, k },
        FamilyArgs::Kahler { s, d } => FamilyRequest::Kahler { s, d },
        FamilyArgs::Product { alpha, genus } => FamilyRequest::Product { alpha, genus },
    };
    let file = match construct(&request, tol) {
        Ok(f) => f,
        Err(e) => return Ok(Err(e)),
    };
    let json = file.to_json()?;
    let mut w = sink(out.as_deref())?;
    w.write_all(json.as_bytes())?;
    w.flush()?;
    log::info!(
        "{:?} profile: a = {:.12}, {} samples",
        file.family_tag,
        file.a,
        file.t_grid.len()
    );
    Ok(Ok(Outcome::Ok))
}

fn run_verify(path: &Path, checks: Vec<Check>, overrides: Vec<(String, f64)>, out: Option<PathBuf>, mut tol: Tolerances) -> anyhow::Result<Outcome> {
    for (name, value) in overrides {
        tol.set(&name, value)?;
    }
    let file = ProfileFile::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let checks = if checks.is_empty() {
        Check::defaults(file.family_tag)
    } else {
        checks
    };
    let summary = run_checks(&file, &checks, &tol)?;
    for report in &summary.reports {
        let verdict = if report.passed() { "pass" } else { "FAIL" };
        eprintln!("{verdict:>4}  {}", report.title);
        for e in report.failures() {
            eprintln!("      {}: {:e} > {:e}", e.name, e.value, e.tolerance);
        }
    }
    let mut w = sink(out.as_deref())?;
    writeln!(w, "{}", summary.to_json()?)?;
    w.flush()?;
    Ok(if summary.passed {
        Outcome::Ok
    } else {
        Outcome::ChecksFailed
    })
}

fn run_sweep(kind: SweepKind, format: Format, out: Option<PathBuf>) -> anyhow::Result<Outcome> {
    let result: SweepResult = match kind {
        SweepKind::EinsteinCount { genus_min, genus_max } => {
            let genera: Vec<u32> = (genus_min..=genus_max).collect();
            sweep::einstein_count(&genera)
        }
        SweepKind::Eta { lower, upper, tol } => sweep::eta(lower, upper, tol)?,
        SweepKind::EpsS { s, eps } => {
            let eps = Sign::try_from(eps).map_err(|e| anyhow::anyhow!("{e}"))?;
            sweep::eps_s_curve(&s, eps)
        }
        SweepKind::KahlerWindow { s, d } => sweep::kahler_window(&sweep::linspace(s.s_min, s.s_max, s.s_n), &d),
    };
    let mut w = sink(out.as_deref())?;
    match format {
        Format::Csv => result.write_csv(&mut w)?,
        Format::Json => writeln!(w, "{}", result.to_json()?)?,
    }
    w.flush()?;
    Ok(Outcome::Ok)
}

fn run_export(path: &Path, out: Option<PathBuf>) -> anyhow::Result<Outcome> {
    let file = ProfileFile::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut w = sink(out.as_deref())?;
    export_csv(&file.profile(), &mut w)?;
    w.flush()?;
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let tol = match Tolerances::from_env() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO);
        }
    };

    let result = match cli.command {
        Command::Construct { family, out } => match run_construct(family, out, &tol) {
            Ok(Err(e)) => {
                // Parameters outside a family's admissible range count as
                // infeasible, like a failed existence certificate.
                eprintln!("error: {e}");
                let code = if e.is_infeasible() || matches!(e, Error::InvalidParams(_)) {
                    EXIT_INFEASIBLE
                } else {
                    EXIT_IO
                };
                return ExitCode::from(code);
            }
            Ok(Ok(o)) => Ok(o),
            Err(e) => Err(e),
        },
        Command::Verify { path, checks, tolerances, out } => run_verify(&path, checks, tolerances, out, tol),
        Command::Sweep { kind, format, out } => run_sweep(kind, format, out),
        Command::Export { path, out } => run_export(&path, out),
    };

    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_IO)
        }
    }
}
