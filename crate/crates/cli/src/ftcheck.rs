use std::ops::Range;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde_json::{json, Value};

use c4bench_core::aim::{build_encoded, encoded_layout, encoded_sections, ideal_distribution as aim_ideal, optimize, SiamParams};
use c4bench_core::circuit::{compile_encoded, ideal_distribution, Basis, LogicalCircuit, LogicalGate, NativeCircuit, PrepKind};
use c4bench_core::code::{ft_check, ft_check_native, CodeLayout, FtReport};
use c4bench_core::gottesman::load_corpus;

use crate::{config_error, emit, read_input, EXIT_CHECK_FAILED, EXIT_OK};

#[derive(Clone, Debug, Args)]
pub struct FtcheckArgs {
    /// Check one native circuit from a text file instead of the built-in set.
    /// Decoded with the layout of `--prep` against the ideal of `--layers`.
    #[arg(long, value_name = "FILE")]
    pub circuit: Option<PathBuf>,
    /// Check a single logical circuit with this preparation.
    #[arg(long)]
    pub prep: Option<String>,
    /// Space-separated logical layers, e.g. "HH CX".
    #[arg(long, default_value = "")]
    pub layers: String,
    #[arg(long, default_value = "z")]
    pub basis: String,
    /// JSON report destination; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// One checked circuit and the gate windows where escapes are expected.
#[derive(Clone, Debug)]
pub struct CheckedCircuit {
    pub name: String,
    pub basis: Basis,
    pub report: FtReport,
    pub allowed: Vec<Range<usize>>,
}

impl CheckedCircuit {
    /// Violations outside the allowed windows. A window admits faults strictly
    /// after its first gate and strictly before its end.
    pub fn unexpected(&self) -> usize {
        self.report
            .violations
            .iter()
            .filter(|v| !self.allowed.iter().any(|w| v.location_index > w.start && v.location_index < w.end))
            .count()
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "basis": self.basis.to_string(),
            "n_locations": self.report.n_locations,
            "n_insertions": self.report.n_insertions,
            "allowed_windows": self.allowed.iter().map(|w| [w.start, w.end]).collect::<Vec<_>>(),
            "unexpected_violations": self.unexpected(),
            "violations": serde_json::to_value(&self.report.violations).expect("violations serialize"),
        })
    }
}

fn parse_layers(text: &str) -> Result<Vec<LogicalGate>> {
    text.split_whitespace()
        .map(|s| s.parse::<LogicalGate>().map_err(|e| config_error(e.to_string())))
        .collect()
}

fn logical(lc: LogicalCircuit, name: String) -> CheckedCircuit {
    CheckedCircuit { name, basis: lc.basis, report: ft_check(&lc), allowed: Vec::new() }
}

/// Every preparation alone and followed by each single gate of the alphabet.
pub fn table_checks() -> Vec<CheckedCircuit> {
    let mut out = Vec::new();
    for prep in PrepKind::ALL {
        out.push(logical(LogicalCircuit::new(prep, vec![]), format!("table/{prep}")));
        for g in LogicalGate::ALL {
            out.push(logical(LogicalCircuit::new(prep, vec![g]), format!("table/{prep}/{g}")));
        }
    }
    out
}

pub fn corpus_checks() -> Vec<CheckedCircuit> {
    load_corpus().iter().map(|e| logical(e.logical(), format!("corpus/{}", e.index))).collect()
}

/// Encoded ansatz circuits on the parameter grid; faults inside the two
/// rotation gadgets are allowed to escape.
pub fn aim_checks() -> Result<Vec<CheckedCircuit>> {
    let mut out = Vec::new();
    for p in SiamParams::grid() {
        let a = optimize(&p)?;
        for basis in [Basis::Z, Basis::X] {
            let s = encoded_sections(&a, basis);
            let report = ft_check_native(&build_encoded(&a, basis), &encoded_layout(basis), basis, &aim_ideal(&a, basis));
            let mut allowed = vec![s.rx];
            allowed.extend(s.zz);
            out.push(CheckedCircuit { name: format!("aim/U={}/V={}", p.u, p.v), basis, report, allowed });
        }
    }
    Ok(out)
}

fn single_check(args: &FtcheckArgs) -> Result<CheckedCircuit> {
    let prep: PrepKind = args.prep.as_deref().unwrap_or("PREP_00").parse().map_err(|e| config_error(format!("{e}")))?;
    let basis: Basis = args.basis.parse().map_err(|e| config_error(format!("{e}")))?;
    let lc = LogicalCircuit::new(prep, parse_layers(&args.layers)?).in_basis(basis);
    let (circuit, name) = match &args.circuit {
        Some(path) => {
            let c = NativeCircuit::from_text(&read_input(path)?).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
            (c, path.display().to_string())
        }
        None => (compile_encoded(&lc), format!("{prep} {}", args.layers.trim())),
    };
    let report = ft_check_native(&circuit, &CodeLayout::for_prep(prep), basis, &ideal_distribution(&lc));
    Ok(CheckedCircuit { name, basis, report, allowed: Vec::new() })
}

pub fn report_json(checked: &[CheckedCircuit]) -> Value {
    let unexpected: usize = checked.iter().map(CheckedCircuit::unexpected).sum();
    json!({
        "passed": unexpected == 0,
        "n_circuits": checked.len(),
        "n_insertions": checked.iter().map(|c| c.report.n_insertions).sum::<usize>(),
        "unexpected_violations": unexpected,
        "circuits": checked.iter().map(CheckedCircuit::to_json).collect::<Vec<_>>(),
    })
}

pub fn cmd_ftcheck(args: &FtcheckArgs) -> Result<i32> {
    let checked = if args.circuit.is_some() || args.prep.is_some() {
        vec![single_check(args)?]
    } else {
        let mut all = table_checks();
        all.extend(corpus_checks());
        all.extend(aim_checks()?);
        all
    };
    let report = report_json(&checked);
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    emit(args.out.as_deref(), &text)?;
    let failed: Vec<&str> = checked.iter().filter(|c| c.unexpected() > 0).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        eprintln!("ftcheck: {} circuits, no unexpected violations", checked.len());
        Ok(EXIT_OK)
    } else {
        eprintln!("ftcheck: unexpected violations in {}", failed.join(", "));
        Ok(EXIT_CHECK_FAILED)
    }
}
