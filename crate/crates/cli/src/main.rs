//! `gkb`: divergences, bounds, extremal pairs, verification sweeps and plot
//! data from the command line.
//!
//! Exit codes: 0 success, 1 a verification suite found violations, 2 bad
//! flags or input documents, 3 dimension mismatch, 4 output could not be
//! written.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gkb_core::verify::{
    allocation_grid, check_allocation_inequality, check_scalar_inequalities, check_trace_inequality, sweep_infimum,
    sweep_symmetry, sweep_triangle, write_csv, ScalarGrid, SweepConfig, VerificationReport,
};
use gkb_core::{
    embed_in_frame, extremal_inf_pair, extremal_sup_pair, inf_reverse_kl, kl, parse_gaussian, sup_reverse_kl,
    sup_reverse_kl_series, triangle_bound, triangle_bound_series, Error,
};

use output::{fmt, write_atomically};

#[derive(Parser)]
#[command(name = "gkb", version, about = "KL divergence bounds for multivariate Gaussians")]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward and reverse KL divergence between two Gaussian JSON files.
    Kl { file1: PathBuf, file2: PathBuf },
    /// Evaluate a bound.
    Bound(BoundArgs),
    /// Write a pair of Gaussians that attains a bound.
    Extremal(ExtremalArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Log-spaced table of the supremum bound and its small-budget expansion.
    PlotData(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundKind {
    Sup,
    Inf,
    Triangle,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct BoundArgs {
    kind: BoundKind,
    /// Forward budget for `sup`.
    #[arg(long)]
    eps: Option<f64>,
    /// Forward budget for `inf`.
    #[arg(long = "M")]
    m: Option<f64>,
    #[arg(long)]
    eps1: Option<f64>,
    #[arg(long)]
    eps2: Option<f64>,
    /// Print the small-budget expansion instead (sup and triangle).
    #[arg(long)]
    series: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExtremalKind {
    Sup,
    Inf,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct ExtremalArgs {
    kind: ExtremalKind,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long = "M")]
    m: Option<f64>,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Push the pair through a random well-conditioned affine map.
    #[arg(long)]
    frame_seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Symmetry,
    Infimum,
    Triangle,
    Allocation,
    Trace,
    Scalar,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct VerifyArgs {
    suite: Suite,
    /// Budgets for `symmetry`.
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.5, 2.0])]
    eps: Vec<f64>,
    /// Budgets for `infimum`.
    #[arg(long = "M", value_delimiter = ',', default_values_t = [0.01, 0.5, 2.0])]
    m: Vec<f64>,
    /// First budgets for `triangle`; cells are all (eps1, eps2) combinations.
    #[arg(long, value_delimiter = ',', default_values_t = [0.001, 0.1, 1.0])]
    eps1: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.001, 0.1, 1.0])]
    eps2: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 5, 20])]
    dims: Vec<usize>,
    /// Random trials per cell.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Points per axis of the allocation scan.
    #[arg(long, default_value_t = 9)]
    theta_points: usize,
    /// Write every trial to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Multiply the checked bound by 0.99 (test hook).
    #[arg(long, hide = true)]
    corrupt_bound: bool,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long, default_value_t = 1e-4)]
    eps_min: f64,
    #[arg(long, default_value_t = 10.0)]
    eps_max: f64,
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DimensionMismatch { .. } => 3,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn require(value: Option<f64>, flag: &str) -> Result<f64, Failure> {
    value.ok_or_else(|| Failure::usage(format!("missing required flag {flag}")))
}

fn read_gaussian(path: &PathBuf) -> Result<gkb_core::Gaussian, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    parse_gaussian(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn cmd_kl(file1: &PathBuf, file2: &PathBuf) -> CmdResult {
    let g1 = read_gaussian(file1)?;
    let g2 = read_gaussian(file2)?;
    let forward = kl(&g1, &g2)?;
    let reverse = kl(&g2, &g1)?;
    println!("forward {}", fmt(forward));
    println!("reverse {}", fmt(reverse));
    Ok(0)
}

fn cmd_bound(args: &BoundArgs) -> CmdResult {
    match args.kind {
        BoundKind::Sup => {
            let eps = require(args.eps, "--eps")?;
            if args.series {
                println!("series {}", fmt(sup_reverse_kl_series(eps)?));
            } else {
                let b = sup_reverse_kl(eps)?;
                println!("bound {}", fmt(b.value));
                if let Some(l) = b.extremal_eigenvalue {
                    println!("extremal_eigenvalue {}", fmt(l));
                }
            }
        }
        BoundKind::Inf => {
            let m = require(args.m, "--M")?;
            if args.series {
                return Err(Failure::usage("--series is not available for inf"));
            }
            let b = inf_reverse_kl(m)?;
            println!("bound {}", fmt(b.value));
            if let Some(l) = b.extremal_eigenvalue {
                println!("extremal_eigenvalue {}", fmt(l));
            }
        }
        BoundKind::Triangle => {
            let eps1 = require(args.eps1, "--eps1")?;
            let eps2 = require(args.eps2, "--eps2")?;
            if args.series {
                println!("series {}", fmt(triangle_bound_series(eps1, eps2)?));
            } else {
                println!("bound {}", fmt(triangle_bound(eps1, eps2)?.value));
            }
        }
    }
    Ok(0)
}

fn cmd_extremal(args: &ExtremalArgs) -> CmdResult {
    let pair = match args.kind {
        ExtremalKind::Sup => extremal_sup_pair(require(args.eps, "--eps")?, args.dim)?,
        ExtremalKind::Inf => extremal_inf_pair(require(args.m, "--M")?, args.dim)?,
    };
    let pair = match args.frame_seed {
        Some(seed) => embed_in_frame(&pair, &gkb_core::verify::random_affine(args.dim, seed)?)?,
        None => pair,
    };
    let json = pair.to_json() + "\n";
    match &args.out {
        Some(path) => {
            write_atomically(path, json.as_bytes())?;
            println!("forward {}", fmt(pair.forward_kl()?));
            println!("reverse {}", fmt(pair.reverse_kl()?));
        }
        None => print!("{json}"),
    }
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let mut cfg = SweepConfig::default().with_trials(args.trials).with_seed(args.seed);
    if args.corrupt_bound {
        cfg.bound_scale = 0.99;
    }
    let report: VerificationReport = match args.suite {
        Suite::Symmetry => sweep_symmetry(&args.eps, &args.dims, &cfg)?,
        Suite::Infimum => sweep_infimum(&args.m, &args.dims, &cfg)?,
        Suite::Triangle => {
            let cells: Vec<(f64, f64)> = args
                .eps1
                .iter()
                .flat_map(|&a| args.eps2.iter().map(move |&b| (a, b)))
                .collect();
            sweep_triangle(&cells, &args.dims, &cfg)?
        }
        Suite::Allocation => {
            let values = [0.0, 0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0, 7.0, 10.0];
            check_allocation_inequality(&allocation_grid(&values)?, args.theta_points)?
        }
        Suite::Trace => {
            let mut merged: Option<VerificationReport> = None;
            for &dim in &args.dims {
                let r = check_trace_inequality(dim, args.trials, args.seed)?;
                merged = Some(match merged {
                    None => r,
                    Some(m) => {
                        let mut trials = m.trials;
                        trials.extend(r.trials);
                        VerificationReport::from_records("trace", args.seed, m.tolerance, 0.0, trials, vec![])
                    }
                });
            }
            merged.ok_or_else(|| Failure::usage("--dims must not be empty"))?
        }
        Suite::Scalar => check_scalar_inequalities(&ScalarGrid {
            seed: args.seed,
            ..ScalarGrid::default()
        })?,
    };
    if let Some(path) = &args.csv {
        let mut buf = Vec::new();
        write_csv(&report, &mut buf)?;
        write_atomically(path, &buf)?;
    }
    println!("{}", report.summary());
    for s in report.skipped.iter().take(5) {
        eprintln!("skipped {} dim={} trial={}: {}", s.cell, s.dim, s.trial, s.reason);
    }
    Ok(if report.passed() { 0 } else { 1 })
}

fn cmd_plot_data(args: &PlotArgs) -> CmdResult {
    let (lo, hi) = (args.eps_min, args.eps_max);
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Failure::usage(format!("need 0 < --eps-min < --eps-max, got {lo} and {hi}")));
    }
    if args.points < 2 {
        return Err(Failure::usage("--points must be at least 2"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut text = String::from("eps,sup_bound,series\n");
    for i in 0..args.points {
        let eps = match i {
            0 => lo,
            _ if i == args.points - 1 => hi,
            _ => (a + (b - a) * i as f64 / (args.points - 1) as f64).exp(),
        };
        let bound = sup_reverse_kl(eps)?.value;
        let series = sup_reverse_kl_series(eps)?;
        text.push_str(&format!("{},{},{}\n", fmt(eps), fmt(bound), fmt(series)));
    }
    match &args.out {
        Some(path) => write_atomically(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("GKB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("GKB_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Kl { file1, file2 } => cmd_kl(file1, file2),
        Command::Bound(a) => cmd_bound(a),
        Command::Extremal(a) => cmd_extremal(a),
        Command::Verify(a) => cmd_verify(a),
        Command::PlotData(a) => cmd_plot_data(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("gkb: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
