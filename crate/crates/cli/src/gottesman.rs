use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use c4bench_core::circuit::PrepKind;
use c4bench_core::gottesman::{
    generated_corpus, load_corpus, parse_corpus, run_benchmark, Arm, BenchOptions, BenchmarkRow, CorpusEntry,
    ProtocolParams, DEFAULT_DIRICHLET_SAMPLES,
};

use crate::{config_error, csv_text, emit, fmt_num, read_input, CommonArgs, RunConfig, EXIT_OK};

/// Shots per circuit when sampling and `--shots` is absent.
pub const DEFAULT_SHOTS: usize = 1050;

#[derive(Clone, Debug, Args)]
pub struct GottesmanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Exact output distributions instead of sampled shots.
    #[arg(long)]
    pub exact: bool,
    /// Run freshly generated Type 1 / Type 2 families instead of the corpus.
    #[arg(long)]
    pub generate: bool,
    /// Read base circuits from a corpus file instead of the built-in one.
    #[arg(long, value_name = "FILE", conflicts_with = "generate")]
    pub corpus: Option<PathBuf>,
    /// Maximum depth for `--generate`.
    #[arg(long, default_value_t = 8)]
    pub max_depth: usize,
    /// Circuits per depth or period for `--generate`.
    #[arg(long, default_value_t = 2)]
    pub rounds: usize,
    /// Maximum block period for `--generate`.
    #[arg(long, default_value_t = 4)]
    pub max_period: usize,
    /// Dirichlet draws per uncertainty envelope.
    #[arg(long, default_value_t = DEFAULT_DIRICHLET_SAMPLES)]
    pub dirichlet_samples: usize,
}

fn corpus(args: &GottesmanArgs, seed: Option<u64>) -> Result<Vec<CorpusEntry>> {
    if args.generate {
        let params = ProtocolParams { t: args.max_depth, r: args.rounds, p: args.max_period };
        let seed = seed.ok_or_else(|| config_error("--generate needs --seed"))?;
        return generated_corpus(&params, seed).map_err(|e| config_error(e.to_string()));
    }
    match &args.corpus {
        Some(path) => parse_corpus(&read_input(path)?).map_err(|e| config_error(format!("{}: {e}", path.display()))),
        None => Ok(load_corpus()),
    }
}

fn to_record(r: &BenchmarkRow) -> Vec<String> {
    vec![
        r.index.to_string(),
        r.prep.to_string(),
        r.arm.to_string(),
        r.shots.to_string(),
        fmt_num(r.retained_fraction),
        fmt_num(r.tvd),
        fmt_num(r.ci_low),
        fmt_num(r.ci_high),
    ]
}

/// Mean TVD of `arm` rows for `prep`, if any.
pub fn mean_tvd(rows: &[BenchmarkRow], prep: PrepKind, arm: Arm) -> Option<f64> {
    let v: Vec<f64> = rows.iter().filter(|r| r.prep == prep && r.arm == arm).map(|r| r.tvd).collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn benchmark_rows(args: &GottesmanArgs, cfg: &RunConfig) -> Result<Vec<BenchmarkRow>> {
    let (shots, seed) = if args.exact {
        (None, cfg.seed.unwrap_or(0))
    } else {
        (Some(cfg.shots.unwrap_or(DEFAULT_SHOTS)), cfg.require_seed()?)
    };
    if args.dirichlet_samples == 0 {
        return Err(config_error("--dirichlet-samples must be positive"));
    }
    let entries = corpus(args, cfg.seed)?;
    let opts = BenchOptions { shots, backend: cfg.backend, seed, dirichlet_samples: args.dirichlet_samples };
    let mut rows = Vec::with_capacity(2 * entries.len());
    for arm in Arm::ALL {
        rows.extend(run_benchmark(&entries, &cfg.noise, arm, &opts)?);
    }
    rows.sort_by_key(|r| (r.index, r.arm == Arm::Physical));
    Ok(rows)
}

pub fn cmd_gottesman(args: &GottesmanArgs) -> Result<i32> {
    let cfg = RunConfig::from_args(&args.common)?;
    let rows = benchmark_rows(args, &cfg)?;
    emit(cfg.out.as_deref(), &csv_text(&BenchmarkRow::HEADER, rows.iter().map(to_record))?)?;
    for prep in PrepKind::ALL {
        if let (Some(l), Some(p)) = (mean_tvd(&rows, prep, Arm::Logical), mean_tvd(&rows, prep, Arm::Physical)) {
            eprintln!("{prep} mean_tvd logical={} physical={}", fmt_num(l), fmt_num(p));
        }
    }
    Ok(EXIT_OK)
}
