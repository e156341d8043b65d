use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{dirichlet_envelope, tvd, TvdEstimate, DEFAULT_DIRICHLET_SAMPLES};
use super::{ideal_distribution, CorpusEntry};
use crate::circuit::{compile_encoded, compile_unencoded, Basis, PrepKind};
use crate::code::{decode_table, physical_counts, physical_table, postselect, CodeLayout};
use crate::error::{Error, Result};
use crate::noise::NoiseParams;
use crate::rng::{derive_seed, stream};
use crate::sim::{exact_distribution, simulate_shots, Backend};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Logical,
    Physical,
}

impl Arm {
    pub const ALL: [Arm; 2] = [Arm::Logical, Arm::Physical];

    fn tag(self) -> u64 {
        match self {
            Arm::Logical => 0,
            Arm::Physical => 1,
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arm::Logical => "logical",
            Arm::Physical => "physical",
        })
    }
}

impl FromStr for Arm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logical" => Ok(Arm::Logical),
            "physical" => Ok(Arm::Physical),
            _ => Err(Error::InvalidArgument(format!("unknown arm `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BenchOptions {
    /// `None` evaluates the exact distribution without sampling noise.
    pub shots: Option<usize>,
    pub backend: Backend,
    pub seed: u64,
    pub dirichlet_samples: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { shots: None, backend: Backend::Auto, seed: 0, dirichlet_samples: DEFAULT_DIRICHLET_SAMPLES }
    }
}

/// One line of the results CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub index: usize,
    pub prep: PrepKind,
    pub arm: Arm,
    pub shots: u64,
    pub retained_fraction: f64,
    pub tvd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl BenchmarkRow {
    pub const HEADER: [&'static str; 8] = ["index", "prep", "arm", "shots", "retained_fraction", "tvd", "ci_low", "ci_high"];

    fn new(entry: &CorpusEntry, arm: Arm, e: TvdEstimate) -> Self {
        BenchmarkRow {
            index: entry.index,
            prep: entry.prep,
            arm,
            shots: e.n_shots,
            retained_fraction: e.retained_fraction,
            tvd: e.point,
            ci_low: e.lower,
            ci_high: e.upper,
        }
    }
}

pub fn evaluate_entry(entry: &CorpusEntry, noise: &NoiseParams, arm: Arm, opts: &BenchOptions) -> Result<TvdEstimate> {
    let lc = entry.logical();
    let ideal = ideal_distribution(entry);
    let circuit = match arm {
        Arm::Logical => compile_encoded(&lc),
        Arm::Physical => compile_unencoded(&lc),
    };
    let layout = CodeLayout::for_prep(entry.prep);
    match opts.shots {
        None => {
            let table = exact_distribution(&circuit, Some(noise))?;
            let d = match arm {
                Arm::Logical => decode_table(&table, &layout, Basis::Z),
                Arm::Physical => physical_table(&table),
            };
            Ok(TvdEstimate::exact(tvd(&d.normalized()?, &ideal), d.retained()))
        }
        Some(n) => {
            let seed = derive_seed(opts.seed, &[entry.index as u64, arm.tag()]);
            let records = simulate_shots(&circuit, Some(noise), n, seed, opts.backend)?;
            let (counts, kept) = match arm {
                Arm::Logical => postselect(&records, &layout, Basis::Z)?,
                Arm::Physical => physical_counts(&records)?,
            };
            let mut rng = stream(seed, &[u64::MAX - 1]);
            let mut e = dirichlet_envelope(&counts.counts, &ideal, opts.dirichlet_samples, 0.68, &mut rng)?;
            e.retained_fraction = kept;
            Ok(e)
        }
    }
}

/// Evaluates every entry, in parallel, returning rows in corpus order.
pub fn run_benchmark(corpus: &[CorpusEntry], noise: &NoiseParams, arm: Arm, opts: &BenchOptions) -> Result<Vec<BenchmarkRow>> {
    corpus
        .par_iter()
        .map(|e| evaluate_entry(e, noise, arm, opts).map(|t| BenchmarkRow::new(e, arm, t)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gottesman::load_corpus;

    #[test]
    fn noiseless_exact_is_perfect() {
        let corpus = load_corpus();
        let ideal = NoiseParams::ideal();
        for arm in Arm::ALL {
            let rows = run_benchmark(&corpus, &ideal, arm, &BenchOptions::default()).unwrap();
            assert_eq!(rows.len(), 147);
            for r in &rows {
                assert!(r.tvd < 1e-9, "{arm} {}: {}", r.index, r.tvd);
                assert!((r.retained_fraction - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sampled_run_is_deterministic() {
        let corpus: Vec<_> = load_corpus().into_iter().take(6).collect();
        let noise = NoiseParams::default();
        let opts = BenchOptions { shots: Some(300), seed: 4, dirichlet_samples: 1000, ..Default::default() };
        let a = run_benchmark(&corpus, &noise, Arm::Logical, &opts).unwrap();
        let b = run_benchmark(&corpus, &noise, Arm::Logical, &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.shots > 0 && r.shots <= 300 && r.ci_low <= r.ci_high));
    }

    #[test]
    fn arm_labels_round_trip() {
        for a in Arm::ALL {
            assert_eq!(a.to_string().parse::<Arm>().unwrap(), a);
        }
    }
}
