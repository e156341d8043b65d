use anyhow::Result;
use clap::{Args, ValueEnum};

use c4bench_core::aim::{circuit_tvds, run_grid, GridOptions, GridRow, GridSummary, SiamParams};
use c4bench_core::noise::NoiseParams;

use crate::{config_error, csv_text, emit, fmt_num, CommonArgs, RunConfig, EXIT_OK};

/// Shots per basis circuit when sampling and `--shots` is absent.
pub const DEFAULT_SHOTS: usize = 1000;

pub const SCAN_HEADER: [&str; 4] = ["gr_overrotation_mrad", "geomean_logical", "geomean_physical", "reversed_circuits"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AimAction {
    Run,
}

#[derive(Clone, Debug, Args)]
pub struct AimArgs {
    /// Optional action word; `aim` and `aim run` are the same.
    #[arg(value_enum)]
    pub action: Option<AimAction>,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Exact output distributions instead of sampled shots.
    #[arg(long)]
    pub exact: bool,
    /// GR over-rotation values in mrad; one summary line per value.
    #[arg(long, value_delimiter = ',', value_name = "MRAD,...")]
    pub scan_gr: Vec<f64>,
}

fn grid_options(args: &AimArgs, cfg: &RunConfig) -> Result<GridOptions> {
    Ok(if args.exact {
        GridOptions { shots: None, backend: cfg.backend, seed: cfg.seed.unwrap_or(0) }
    } else {
        GridOptions { shots: Some(cfg.shots.unwrap_or(DEFAULT_SHOTS)), backend: cfg.backend, seed: cfg.require_seed()? }
    })
}

fn to_record(r: &GridRow) -> Vec<String> {
    vec![
        fmt_num(r.params.u),
        fmt_num(r.params.v),
        r.result.arm.to_string(),
        r.shots_z.to_string(),
        r.shots_x.to_string(),
        fmt_num(r.retained_z),
        fmt_num(r.retained_x),
        fmt_num(r.result.estimate),
        fmt_num(r.result.exact),
        fmt_num(r.result.relative_error),
        fmt_num(r.result.sem),
    ]
}

fn summary_line(s: &GridSummary) -> String {
    format!(
        "geomean_relative_error logical={} physical={}",
        fmt_num(s.geomean_logical),
        fmt_num(s.geomean_physical)
    )
}

/// Circuits (parameter point × basis) whose encoded TVD exceeds the physical one.
pub fn reversed_circuits(params: &[SiamParams], noise: &NoiseParams) -> Result<usize> {
    Ok(circuit_tvds(params, noise)?.iter().filter(|t| t.logical > t.physical).count())
}

pub fn cmd_aim(args: &AimArgs) -> Result<i32> {
    let cfg = RunConfig::from_args(&args.common)?;
    let opts = grid_options(args, &cfg)?;
    let params = SiamParams::grid();
    if args.scan_gr.is_empty() {
        let summary = run_grid(&params, &cfg.noise, &opts)?;
        emit(cfg.out.as_deref(), &csv_text(&GridRow::HEADER, summary.rows.iter().map(to_record))?)?;
        eprintln!("{}", summary_line(&summary));
        return Ok(EXIT_OK);
    }
    let mut records = Vec::new();
    for &mrad in &args.scan_gr {
        if !mrad.is_finite() {
            return Err(config_error(format!("--scan-gr: bad value {mrad}")));
        }
        let noise = NoiseParams { gr_overrotation: mrad * 1e-3, ..cfg.noise.clone() };
        noise.validate().map_err(|e| config_error(e.to_string()))?;
        let summary = run_grid(&params, &noise, &opts)?;
        let reversed = reversed_circuits(&params, &noise)?;
        eprintln!("{} mrad: {} reversed={reversed}", fmt_num(mrad), summary_line(&summary));
        records.push(vec![
            fmt_num(mrad),
            fmt_num(summary.geomean_logical),
            fmt_num(summary.geomean_physical),
            reversed.to_string(),
        ]);
    }
    emit(cfg.out.as_deref(), &csv_text(&SCAN_HEADER, records)?)?;
    Ok(EXIT_OK)
}
