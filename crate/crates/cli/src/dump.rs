use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use c4bench_core::aim::{build_encoded, build_physical, optimize, SiamParams};
use c4bench_core::circuit::{compile_encoded, compile_unencoded, Basis, LogicalCircuit, LogicalGate, PrepKind};
use c4bench_core::gottesman::Arm;

use crate::{config_error, emit, EXIT_OK};

#[derive(Clone, Debug, Args)]
pub struct DumpArgs {
    #[arg(long, default_value = "PREP_00")]
    pub prep: String,
    /// Space-separated logical layers, e.g. "HH CX".
    #[arg(long, default_value = "")]
    pub layers: String,
    #[arg(long, default_value = "z")]
    pub basis: String,
    /// `logical` (encoded) or `physical` (unencoded).
    #[arg(long, default_value = "logical")]
    pub arm: String,
    /// Dump the ansatz circuit at optimized angles for `U,V` instead.
    #[arg(long, value_delimiter = ',', value_name = "U,V")]
    pub aim: Option<Vec<f64>>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn cmd_dump_circuit(args: &DumpArgs) -> Result<i32> {
    let bad = |e: c4bench_core::Error| config_error(e.to_string());
    let basis: Basis = args.basis.parse().map_err(bad)?;
    let arm: Arm = args.arm.parse().map_err(bad)?;
    let circuit = match &args.aim {
        Some(uv) => {
            if uv.len() != 2 {
                return Err(config_error("--aim expects U,V"));
            }
            let a = optimize(&SiamParams::new(uv[0], uv[1]))?;
            match arm {
                Arm::Logical => build_encoded(&a, basis),
                Arm::Physical => build_physical(&a, basis),
            }
        }
        None => {
            let prep: PrepKind = args.prep.parse().map_err(bad)?;
            let layers = args.layers.split_whitespace().map(str::parse).collect::<Result<Vec<LogicalGate>, _>>().map_err(bad)?;
            let lc = LogicalCircuit::new(prep, layers).in_basis(basis);
            match arm {
                Arm::Logical => compile_encoded(&lc),
                Arm::Physical => compile_unencoded(&lc),
            }
        }
    };
    emit(args.out.as_deref(), &circuit.to_text())?;
    Ok(EXIT_OK)
}
