use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use c4bench_core::tomography::{
    analyze, analyze_matrix, bell_prep, mh_reconstruct, synth_dataset, FidelityRow, MhOptions, TomoDataset, METRICS,
};

use crate::{config_error, csv_text, emit, fmt_num, read_input, CommonArgs, RunConfig, EXIT_OK};

/// Shots per setting when synthesizing and `--shots` is absent.
pub const DEFAULT_SHOTS: usize = 2000;

pub const HEADER: [&str; 4] = ["metric", "estimate", "ci_low", "ci_high"];

#[derive(Clone, Debug, Args)]
pub struct TomoArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Reconstruct from this dataset instead of synthesizing one.
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    /// Also write the synthesized dataset here.
    #[arg(long, value_name = "FILE", conflicts_with = "dataset")]
    pub save_dataset: Option<PathBuf>,
    /// Total Metropolis-Hastings steps.
    #[arg(long, default_value_t = MhOptions::default().n_steps)]
    pub steps: usize,
    #[arg(long, default_value_t = MhOptions::default().burn_in)]
    pub burn_in: usize,
    /// Keep every n-th post-burn-in state as a posterior sample.
    #[arg(long, default_value_t = MhOptions::default().thin)]
    pub thin: usize,
}

fn to_record(r: &FidelityRow) -> Vec<String> {
    vec![r.metric.clone(), fmt_num(r.estimate), fmt_num(r.ci_low), fmt_num(r.ci_high)]
}

pub fn fidelity_rows(args: &TomoArgs, cfg: &RunConfig) -> Result<Vec<FidelityRow>> {
    let seed = cfg.require_seed()?;
    if args.steps <= args.burn_in || args.thin == 0 {
        return Err(config_error("need --steps > --burn-in and --thin ≥ 1"));
    }
    let data = match &args.dataset {
        Some(path) => {
            TomoDataset::from_json(&read_input(path)?).map_err(|e| config_error(format!("{}: {e}", path.display())))?
        }
        None => {
            let shots = cfg.shots.unwrap_or(DEFAULT_SHOTS) as u64;
            let d = synth_dataset(&bell_prep(), Some(&cfg.noise), shots, seed)?;
            if let Some(path) = &args.save_dataset {
                fs::write(path, d.to_json()).with_context(|| format!("writing {}", path.display()))?;
            }
            d
        }
    };
    let opts = MhOptions { n_steps: args.steps, burn_in: args.burn_in, thin: args.thin, seed };
    let state = mh_reconstruct(&data, &cfg.noise.readout(), &opts)?;
    eprintln!("acceptance={} step_size={}", fmt_num(state.acceptance), fmt_num(state.step_size));
    for (name, f) in METRICS.iter().zip(analyze_matrix(&state.max_likelihood)?) {
        eprintln!("max_likelihood {name}={}", fmt_num(f));
    }
    Ok(analyze(&state)?)
}

pub fn cmd_tomo(args: &TomoArgs) -> Result<i32> {
    let cfg = RunConfig::from_args(&args.common)?;
    let rows = fidelity_rows(args, &cfg)?;
    emit(cfg.out.as_deref(), &csv_text(&HEADER, rows.iter().map(to_record))?)?;
    Ok(EXIT_OK)
}
