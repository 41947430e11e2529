use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nsfom::harness::config::{parse_method_label, ProblemKind, DEFAULT_ALPHA};
use nsfom::harness::{export_qq_data, fit_rate_from_csv, run_experiment, ExperimentConfig, MethodSpec, ProblemSpec};
use nsfom::problems::{TargetColumn, DEFAULT_BATCH_SIZE};
use nsfom::schedules::validate_alpha;
use nsfom::{AlphaMode, Error, Result, SampleMode};

const ALL_METHODS: &str = "nsfom-pm,nsfom-em,nsfom-rm,sfom-pm,sfom-em,sfom-rm";

#[derive(Parser)]
#[command(name = "nsfom", version, about = "Normalized stochastic first-order methods with momentum")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run methods x replications on one problem and write CSV/JSON outputs.
    Bench(BenchArgs),
    /// Fit a log-log slope to a per-method output CSV.
    FitRate {
        csv: PathBuf,
        #[arg(long, default_value = "grad_norm")]
        column: String,
        /// Ignore rows with fewer oracle calls.
        #[arg(long, default_value_t = 1)]
        min_calls: usize,
    },
    /// Write normal QQ-plot data for one numeric CSV column.
    Qq {
        csv: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "synthetic-df", value_parser = parse_problem)]
    problem: ProblemKind,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 200)]
    m: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Zero-based index or header name; defaults to the last column.
    #[arg(long, default_value = "last")]
    target_col: String,
    #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
    batch_size: usize,
    #[arg(long, default_value = ALL_METHODS)]
    methods: String,
    #[arg(long, value_parser = parse_alpha, conflicts_with = "alpha_unknown")]
    alpha: Option<f64>,
    #[arg(long)]
    alpha_unknown: bool,
    #[arg(long, default_value_t = 2)]
    p: u32,
    /// Oracle-call horizon.
    #[arg(long, default_value_t = 500)]
    k: usize,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Overrides every method's default step-size multiplier.
    #[arg(long, value_parser = parse_positive)]
    eta_scale: Option<f64>,
    #[arg(long, default_value = "shared", value_parser = parse_sample_mode)]
    sample_mode: SampleMode,
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

fn parse_problem(s: &str) -> std::result::Result<ProblemKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let a: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    validate_alpha(a).map_err(|e| e.to_string())
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("'{s}' is not a positive number")),
    }
}

fn parse_sample_mode(s: &str) -> std::result::Result<SampleMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn bench(args: BenchArgs) -> Result<()> {
    let alpha_mode = if args.alpha_unknown {
        AlphaMode::Unknown
    } else {
        AlphaMode::Known(args.alpha.unwrap_or(DEFAULT_ALPHA))
    };
    let methods = args
        .methods
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|label| {
            let (method, rule) = parse_method_label(label)?;
            MethodSpec::new(method, rule, alpha_mode, args.p, args.eta_scale)
        })
        .collect::<Result<Vec<_>>>()?;
    let problem = match args.problem {
        ProblemKind::SyntheticDf => ProblemSpec::SyntheticDf { n: args.n, m: args.m },
        ProblemKind::Quadratic => ProblemSpec::Quadratic { n: args.n },
        ProblemKind::CsvRr => ProblemSpec::CsvRr {
            path: args
                .csv
                .ok_or_else(|| Error::PreconditionViolated("--problem csv-rr requires --csv".into()))?,
            target: args.target_col.parse::<TargetColumn>()?,
            batch_size: args.batch_size,
        },
    };
    let mut cfg = ExperimentConfig::new(methods, problem, args.k, args.reps, args.seed);
    cfg.sample_mode = args.sample_mode;
    cfg.workers = args.workers;
    cfg.output_dir = Some(args.out.clone());
    let out = run_experiment(&cfg)?;
    println!("f* = {:e}", out.fstar);
    println!("{:<10} {:>12} {:>16} {:>16}", "method", "oracle_calls", "rel_obj_gap", "rel_grad_norm");
    for s in &out.series {
        let last = s.last();
        println!(
            "{:<10} {:>12} {:>16.6e} {:>16.6e}",
            s.label, last.oracle_calls, last.rel_obj_gap.median, last.rel_grad_norm.median
        );
    }
    println!("wrote {} files to {}", out.files.len(), args.out.display());
    Ok(())
}

fn qq(csv_path: PathBuf, column: String, out: PathBuf) -> Result<()> {
    let io = |e: csv::Error| Error::Io {
        path: csv_path.clone(),
        source: std::io::Error::other(e.to_string()),
    };
    let mut reader = csv::Reader::from_path(&csv_path).map_err(io)?;
    let idx = reader
        .headers()
        .map_err(io)?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::PreconditionViolated(format!("no column '{column}'")))?;
    let mut samples = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(io)?;
        let v = rec[idx].trim().parse::<f64>().map_err(|_| Error::Parse {
            path: csv_path.clone(),
            row: i + 2,
            column: idx + 1,
            message: format!("not a number: '{}'", &rec[idx]),
        })?;
        samples.push(v);
    }
    let points = export_qq_data(&samples, &out)?;
    println!("wrote {} points to {}", points.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench(args) => bench(args),
        Command::FitRate { csv, column, min_calls } => fit_rate_from_csv(&csv, &column, min_calls).map(|fit| {
            println!("slope = {:.6} ± {:.6} ({} points)", fit.slope, fit.stderr, fit.points);
        }),
        Command::Qq { csv, column, out } => qq(csv, column, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
