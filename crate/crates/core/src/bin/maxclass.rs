use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use maxclass::arrangement::{Arrangement, DEFAULT_BRUTE_FORCE_CAP};
use maxclass::basis::{builtin_basis, parse_basis_spec, FunctionBasis, Point};
use maxclass::floyd::{build_design_matrix, DEFAULT_EPSILON};
use maxclass::harness::{
    format_points, parse_points, run_demo, run_trials, run_verify, sample_points, DistributionKind, SamplingSpec,
    VerifyOptions, DEFAULT_PRECISION_BITS,
};
use maxclass::setsystem::{vc_dimension, SetSystem};
use maxclass::{Error, Result};

/// Decide whether a Dudley class restricted to a point sample is maximum.
///
/// Exit codes: 0 verified maximum, 1 verified non-maximum, 2 approximate or
/// undecided, 3 error.
#[derive(Parser)]
#[command(name = "maxclass", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct BasisArgs {
    /// Basis spec file (`dim:`, `f0:` and `f:` lines).
    #[arg(long, value_name = "FILE", conflicts_with = "family")]
    basis_file: Option<PathBuf>,
    /// Built-in family: disks, monomials, poly_threshold, trig.
    #[arg(long)]
    family: Option<String>,
    /// Family parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", requires = "family")]
    params: Vec<String>,
}

#[derive(Args)]
struct SampleArgs {
    /// Points file (`k=<k>` header, comma-separated coordinates).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["seed", "n"])]
    points: Option<PathBuf>,
    /// Seed for generated samples.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of generated points.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    dist: DistArgs,
}

#[derive(Args)]
struct DistArgs {
    /// uniform, uniform:LOW,HIGH, gaussian or gaussian:MEAN,SIGMA.
    #[arg(long, default_value = "uniform")]
    dist: String,
    /// Generated coordinates are multiples of 2^-bits.
    #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
    bits: u32,
}

#[derive(Args)]
struct CheckArgs {
    /// List every failing subset and test every restriction.
    #[arg(long)]
    exhaustive: bool,
    /// Cross-check the cell enumeration by brute force.
    #[arg(long)]
    oracle: bool,
    /// Zero band for approximate arithmetic.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Append per-phase timings (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct OutArgs {
    /// Write the text output here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Also write a JSON rendering.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run both determinant conditions, enumerate cells and report.
    Verify {
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[command(flatten)]
        check: CheckArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Print the realized set system in set-system file format.
    Enumerate {
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        sample: SampleArgs,
        /// Cross-check the cell enumeration by brute force.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// VC dimension of a set-system file or of a realized system.
    Vcdim {
        /// Set-system file; otherwise the system is enumerated from a basis.
        #[arg(long, value_name = "FILE")]
        system: Option<PathBuf>,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Generate a seeded points file.
    Sample {
        /// Ambient dimension.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Run a fixed scenario: disks, poly_threshold, trig, halfspace_violation.
    Demo {
        name: String,
        #[command(flatten)]
        check: CheckArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Repeat verification over consecutive seeds.
    Trial {
        #[command(flatten)]
        basis: BasisArgs,
        #[arg(long)]
        n: usize,
        /// First seed; trial i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        dist: DistArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn load_basis(args: &BasisArgs) -> Result<FunctionBasis> {
    match (&args.basis_file, &args.family) {
        (Some(path), None) => {
            let basis = parse_basis_spec(&std::fs::read_to_string(path)?)?;
            Ok(basis.with_name(path.display().to_string()))
        }
        (None, Some(family)) => {
            let mut params = BTreeMap::new();
            for p in &args.params {
                let (k, v) = p
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidParam(format!("expected KEY=VALUE, got `{p}`")))?;
                params.insert(k.trim().to_string(), v.trim().to_string());
            }
            builtin_basis(family, &params)
        }
        _ => Err(Error::InvalidInput(
            "give exactly one of --basis-file or --family".into(),
        )),
    }
}

fn sampling_spec(dist: &DistArgs, n: usize, k: usize, seed: u64) -> Result<SamplingSpec> {
    let kind: DistributionKind = dist.dist.parse()?;
    Ok(SamplingSpec::new(&kind, n, k, seed).with_precision_bits(dist.bits))
}

/// Points plus a provenance line.
fn load_points(args: &SampleArgs, k: usize) -> Result<(Vec<Point>, String)> {
    if let Some(path) = &args.points {
        let points = parse_points(&std::fs::read_to_string(path)?)?;
        if let Some(p) = points.iter().find(|p| p.dim() != k) {
            return Err(Error::Dimension(format!(
                "point ({p}) has dimension {}, basis expects {k}",
                p.dim()
            )));
        }
        return Ok((points, format!("file {}", path.display())));
    }
    let n = args
        .n
        .ok_or_else(|| Error::InvalidInput("give --points, or --n (with an optional --seed)".into()))?;
    let spec = sampling_spec(&args.dist, n, k, args.seed.unwrap_or(0))?;
    Ok((sample_points(&spec)?, spec.describe()))
}

fn check_options(check: &CheckArgs, source: String) -> VerifyOptions {
    VerifyOptions {
        exhaustive: check.exhaustive,
        oracle: check.oracle,
        oracle_cap: DEFAULT_BRUTE_FORCE_CAP,
        epsilon: check.epsilon,
        timing: check.timing,
        source,
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn realized_system(basis: &FunctionBasis, points: &[Point], oracle: bool, epsilon: f64) -> Result<SetSystem> {
    let dm = build_design_matrix(basis, points)?;
    let arrangement = Arrangement::from_design(&dm, epsilon)?;
    let cells = arrangement.enumerate_cells()?;
    if oracle {
        let brute = arrangement.brute_force_cells(DEFAULT_BRUTE_FORCE_CAP)?;
        if brute.system != cells.system {
            return Err(Error::InvalidInput(
                "incremental enumeration and brute force disagree; this is a defect".into(),
            ));
        }
    }
    Ok(cells.system)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Verify {
            basis,
            sample,
            check,
            out,
        } => {
            let basis = load_basis(&basis)?;
            let (points, source) = load_points(&sample, basis.dim())?;
            let report = run_verify(&basis, &points, &check_options(&check, source))?;
            emit(&report.to_text(), out.out.as_deref())?;
            if let Some(path) = &out.json {
                std::fs::write(path, report.to_json())?;
            }
            Ok(report.exit_code())
        }
        Command::Enumerate {
            basis,
            sample,
            oracle,
            epsilon,
            out,
        } => {
            let basis = load_basis(&basis)?;
            let (points, _) = load_points(&sample, basis.dim())?;
            let system = realized_system(&basis, &points, oracle, epsilon)?;
            emit(&system.to_file_string(), out.as_deref())?;
            Ok(0)
        }
        Command::Vcdim {
            system,
            basis,
            sample,
            out,
        } => {
            let system = match system {
                Some(path) => SetSystem::parse_file(&std::fs::read_to_string(path)?)?,
                None => {
                    let basis = load_basis(&basis)?;
                    let (points, _) = load_points(&sample, basis.dim())?;
                    realized_system(&basis, &points, false, DEFAULT_EPSILON)?
                }
            };
            let text = format!(
                "ground: {}\nsets: {}\nvc_dimension: {}\n",
                system.ground_size(),
                system.len(),
                vc_dimension(&system)
            );
            emit(&text, out.as_deref())?;
            Ok(0)
        }
        Command::Sample {
            dim,
            n,
            seed,
            dist,
            out,
        } => {
            let spec = sampling_spec(&dist, n, dim, seed)?;
            emit(&format_points(&sample_points(&spec)?, dim), out.as_deref())?;
            Ok(0)
        }
        Command::Demo { name, check, out } => {
            let report = run_demo(&name, &check_options(&check, String::new()))?;
            emit(&report.to_text(), out.out.as_deref())?;
            if let Some(path) = &out.json {
                std::fs::write(path, report.to_json())?;
            }
            Ok(report.exit_code())
        }
        Command::Trial {
            basis,
            n,
            seed,
            trials,
            dist,
            out,
        } => {
            let basis = load_basis(&basis)?;
            let spec = sampling_spec(&dist, n, basis.dim(), seed)?;
            let summary = run_trials(&basis, &spec, trials)?;
            emit(&summary.to_text(), out.out.as_deref())?;
            if let Some(path) = &out.json {
                std::fs::write(
                    path,
                    serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n",
                )?;
            }
            Ok(if summary.maximum_count == trials { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
