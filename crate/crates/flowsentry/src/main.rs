//! Command-line entry point: load or synthesize flow data, configure
//! detectors, run ratio sweeps or single fit/score points, emit results.
//!
//! Exit status: 0 success, 1 runtime failure, 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flowsentry::dataset::{generate_synthetic, load_csv, write_csv, LabeledDataset};
use flowsentry::detector::{DetectorConfig, DetectorKind, Params};
use flowsentry::sweep::{emit_results, run_sweep, OutputFormat, SweepConfig, DEFAULT_RATIOS};

#[derive(Parser)]
#[command(
    name = "flowsentry",
    about = "Unsupervised outlier detection on network-flow records with a class-imbalance sweep harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the benign-ratio sweep and write results plus plot data.
    Sweep(SweepArgs),
    /// Fit and evaluate all selected detectors at a single ratio point;
    /// prints a TSV table to stdout.
    FitScore(FitScoreArgs),
    /// Write a synthetic flow CSV fixture.
    Synth(SynthArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Flow CSV to ingest (header row, numeric features, textual label column).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Generate synthetic data instead of reading a CSV.
    #[arg(long, conflicts_with = "data")]
    synth: bool,
    #[arg(long, default_value_t = 2000)]
    n_benign: usize,
    #[arg(long, default_value_t = 100)]
    n_attack: usize,
    /// Feature count for synthetic data.
    #[arg(long, default_value_t = 8)]
    p: usize,
    /// Distance between the benign and attack cluster centers.
    #[arg(long, default_value_t = 6.0)]
    separation: f64,
    /// Name of the label column.
    #[arg(long, default_value = "Label")]
    label_column: String,
    /// Label value mapped to the attack class; anything else is benign.
    #[arg(long, default_value = "Attack")]
    attack_value: String,
}

#[derive(Args)]
struct DetectorArgs {
    /// Comma-separated detector kinds (default: all seven).
    #[arg(long, value_delimiter = ',')]
    detectors: Vec<String>,
    /// Dotted hyperparameter overrides, repeatable: --set iforest.trees=200
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Assumed anomaly fraction for the prediction threshold.
    #[arg(long, default_value_t = 0.1)]
    contamination: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    detectors: DetectorArgs,
    /// Ratio grid: "start:end:step" or a comma-separated list.
    #[arg(long)]
    ratios: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Worker threads for sweep points (0 = automatic).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Skip train-fitted z-score standardization.
    #[arg(long)]
    no_standardize: bool,
    /// Emit zeros in the fit_ms/score_ms columns so output bytes are
    /// reproducible across runs.
    #[arg(long)]
    no_timings: bool,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct FitScoreArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    detectors: DetectorArgs,
    /// Single benign ratio to evaluate.
    #[arg(long, default_value_t = 0.9)]
    ratio: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    #[arg(long)]
    no_standardize: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 2000)]
    n_benign: usize,
    #[arg(long, default_value_t = 100)]
    n_attack: usize,
    #[arg(long, default_value_t = 8)]
    p: usize,
    #[arg(long, default_value_t = 6.0)]
    separation: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path.
    #[arg(long, default_value = "synth.csv")]
    out: PathBuf,
    #[arg(long, default_value = "Label")]
    label_column: String,
    #[arg(long, default_value = "Attack")]
    attack_value: String,
}

/// Usage-level failure: wrong flags or values, exit status 2.
struct UsageError(String);

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("FLOWSENTRY_SEED")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(200)
}

fn parse_detectors(args: &DetectorArgs, seed: u64) -> Result<Vec<DetectorConfig>, UsageError> {
    let mut params = Params::default();
    for kv in &args.overrides {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| UsageError(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        params.set(key, value).map_err(|e| UsageError(e.to_string()))?;
    }
    if !(args.contamination > 0.0 && args.contamination <= 0.5) {
        return Err(UsageError(format!(
            "--contamination must be in (0, 0.5], got {}",
            args.contamination
        )));
    }

    let kinds: Vec<DetectorKind> = if args.detectors.is_empty() {
        DetectorKind::ALL.to_vec()
    } else {
        args.detectors
            .iter()
            .map(|name| name.parse().map_err(|e: flowsentry::Error| UsageError(e.to_string())))
            .collect::<Result<_, _>>()?
    };

    Ok(kinds
        .into_iter()
        .map(|kind| DetectorConfig {
            kind,
            params: params.clone(),
            contamination: args.contamination,
            seed,
        })
        .collect())
}

fn parse_ratios(spec: Option<&str>) -> Result<Vec<f64>, UsageError> {
    let Some(spec) = spec else {
        return Ok(DEFAULT_RATIOS.to_vec());
    };
    let bad = |s: &str| UsageError(format!("cannot parse ratio spec `{s}`"));
    let ratios: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(spec));
        }
        let start: f64 = parts[0].parse().map_err(|_| bad(spec))?;
        let end: f64 = parts[1].parse().map_err(|_| bad(spec))?;
        let step: f64 = parts[2].parse().map_err(|_| bad(spec))?;
        if !(step > 0.0) || end < start {
            return Err(bad(spec));
        }
        let mut out = Vec::new();
        let mut i = 0u32;
        loop {
            let r = start + step * f64::from(i);
            if r > end + 1e-12 {
                break;
            }
            out.push(r);
            i += 1;
        }
        out
    } else {
        spec.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad(spec)))
            .collect::<Result<_, _>>()?
    };
    if ratios.is_empty() || ratios.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(UsageError(format!("ratios must lie strictly inside (0,1): {spec}")));
    }
    Ok(ratios)
}

fn load_data(args: &DataArgs, seed: u64) -> Result<Result<LabeledDataset, flowsentry::Error>, UsageError> {
    if args.synth {
        return Ok(generate_synthetic(args.n_benign, args.n_attack, args.p, args.separation, seed));
    }
    let Some(path) = &args.data else {
        return Err(UsageError("exactly one data source required: --data <PATH> or --synth".into()));
    };
    Ok(load_csv(path, &args.label_column, &args.attack_value).map(|report| {
        if report.dropped_rows > 0 {
            eprintln!("dropped {} rows with non-finite features", report.dropped_rows);
        }
        report.data
    }))
}

fn cmd_sweep(args: &SweepArgs) -> Result<Result<(), flowsentry::Error>, UsageError> {
    let seed = resolve_seed(args.seed);
    let detectors = parse_detectors(&args.detectors, seed)?;
    let ratios = parse_ratios(args.ratios.as_deref())?;
    let format = match args.format.as_str() {
        "csv" => OutputFormat::Csv,
        "json" => OutputFormat::Json,
        other => return Err(UsageError(format!("--format must be csv or json, got `{other}`"))),
    };
    let data = match load_data(&args.data, flowsentry::rng::derive_seed(seed, 0xda7a))? {
        Ok(d) => d,
        Err(e) => return Ok(Err(e)),
    };

    let config = SweepConfig {
        ratios,
        detectors,
        train_fraction: args.train_fraction,
        master_seed: seed,
        repeats: args.repeats,
        standardize: !args.no_standardize,
        workers: args.workers,
        record_timings: !args.no_timings,
    };
    Ok(run_sweep(&config, &data).and_then(|results| {
        emit_results(&results, &args.out, format)?;
        eprintln!(
            "wrote {} records to {}",
            results.len(),
            args.out.join("results.*").display()
        );
        Ok(())
    }))
}

fn cmd_fit_score(args: &FitScoreArgs) -> Result<Result<(), flowsentry::Error>, UsageError> {
    let seed = resolve_seed(args.seed);
    let detectors = parse_detectors(&args.detectors, seed)?;
    if !(args.ratio > 0.0 && args.ratio < 1.0) {
        return Err(UsageError(format!("--ratio must be in (0,1), got {}", args.ratio)));
    }
    let data = match load_data(&args.data, flowsentry::rng::derive_seed(seed, 0xda7a))? {
        Ok(d) => d,
        Err(e) => return Ok(Err(e)),
    };

    let config = SweepConfig {
        ratios: vec![args.ratio],
        detectors,
        train_fraction: args.train_fraction,
        master_seed: seed,
        standardize: !args.no_standardize,
        ..SweepConfig::default()
    };
    Ok(run_sweep(&config, &data).map(|results| {
        println!("detector\tsplit\tbenign_ratio\tauc\taccuracy\tn_rows\tn_attack\twarnings");
        for r in &results {
            let field = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:.6}"));
            println!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.detector,
                if matches!(r.split, flowsentry::sweep::Split::Train) { "train" } else { "test" },
                r.benign_ratio,
                field(r.auc),
                field(r.accuracy),
                r.n_rows,
                r.n_attack,
                r.warnings
            );
        }
    }))
}

fn cmd_synth(args: &SynthArgs) -> Result<(), flowsentry::Error> {
    let seed = resolve_seed(args.seed);
    let data = generate_synthetic(args.n_benign, args.n_attack, args.p, args.separation, seed)?;
    write_csv(&data, &args.out, &args.label_column, &args.attack_value, "Benign")?;
    eprintln!("wrote {} rows to {}", data.n_rows(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::FitScore(args) => cmd_fit_score(args),
        Command::Synth(args) => Ok(cmd_synth(args)),
    };
    match outcome {
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Ok(Err(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
        Ok(Ok(())) => ExitCode::SUCCESS,
    }
}
