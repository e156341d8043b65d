//! Gottesman-style logical benchmarking: random Type 1 and periodic Type 2
//! circuit families, the fixed 147-circuit corpus, and TVD statistics.

mod bench;
mod stats;

use rand::Rng;

use crate::circuit::{ideal_distribution as logical_ideal, LogicalCircuit, LogicalGate, PrepKind};
use crate::error::{Error, Result};

pub use bench::{evaluate_entry, run_benchmark, Arm, BenchOptions, BenchmarkRow};
pub use stats::{dirichlet_envelope, multinomial, shots_to_distinguish, tvd, Distinguish, TvdEstimate, DEFAULT_DIRICHLET_SAMPLES};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProtocolParams {
    /// Maximum depth.
    pub t: usize,
    /// Randomization rounds.
    pub r: usize,
    /// Maximum period.
    pub p: usize,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams { t: 8, r: 2, p: 4 }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        if self.t == 0 || self.r == 0 || self.p == 0 || self.p > self.t {
            return Err(Error::InvalidArgument(format!("need T ≥ 1, r ≥ 1, 1 ≤ p ≤ T; got {self:?}")));
        }
        Ok(())
    }

    pub fn type1_bound(&self) -> f64 {
        (self.r * (self.t + 1)) as f64
    }

    pub fn type2_bound(&self) -> f64 {
        (self.r * self.t) as f64 * ((self.p as f64).ln() + 1.0)
    }
}

fn random_layers<R: Rng>(n: usize, rng: &mut R) -> Vec<LogicalGate> {
    (0..n).map(|_| LogicalGate::ALL[rng.random_range(0..LogicalGate::ALL.len())]).collect()
}

/// For each depth t in 1..=T, r circuits of t uniformly drawn layers.
pub fn generate_type1<R: Rng>(params: &ProtocolParams, rng: &mut R) -> Vec<Vec<LogicalGate>> {
    (1..=params.t)
        .flat_map(|t| (0..params.r).map(move |_| t))
        .map(|t| random_layers(t, rng))
        .collect()
}

/// For each period q in 1..=p, r circuits made of a random q-layer block
/// repeated ⌊T/q⌋ times.
pub fn generate_type2<R: Rng>(params: &ProtocolParams, rng: &mut R) -> Vec<Vec<LogicalGate>> {
    let mut out = Vec::new();
    for q in 1..=params.p {
        for _ in 0..params.r {
            let block = random_layers(q, rng);
            out.push(block.iter().copied().cycle().take(q * (params.t / q)).collect());
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub index: usize,
    pub prep: PrepKind,
    pub layers: Vec<LogicalGate>,
}

impl CorpusEntry {
    pub fn logical(&self) -> LogicalCircuit {
        LogicalCircuit::new(self.prep, self.layers.clone())
    }
}

const CORPUS_TEXT: &str = include_str!("../../data/corpus.txt");

/// Expands base circuits into (PREP_00, PREP_0PLUS, PREP_BELL) triples.
pub fn expand_bases(bases: &[Vec<LogicalGate>]) -> Vec<CorpusEntry> {
    bases
        .iter()
        .enumerate()
        .flat_map(|(b, layers)| {
            PrepKind::ALL.iter().enumerate().map(move |(k, &prep)| CorpusEntry {
                index: 3 * b + k,
                prep,
                layers: layers.clone(),
            })
        })
        .collect()
}

/// Parses the corpus format: `start-end label label …` per base circuit.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>> {
    let mut bases = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: lineno + 1, msg };
        let mut tok = line.split_whitespace();
        let range = tok.next().unwrap_or_default();
        let (lo, hi) = range.split_once('-').ok_or_else(|| err(format!("bad range `{range}`")))?;
        let lo: usize = lo.parse().map_err(|_| err(format!("bad range `{range}`")))?;
        let hi: usize = hi.parse().map_err(|_| err(format!("bad range `{range}`")))?;
        if lo != 3 * bases.len() || hi != lo + 2 {
            return Err(err(format!("range `{range}` out of sequence")));
        }
        let layers = tok.map(|t| t.parse::<LogicalGate>()).collect::<Result<Vec<_>>>().map_err(|e| err(e.to_string()))?;
        bases.push(layers);
    }
    Ok(expand_bases(&bases))
}

pub fn corpus_to_text(entries: &[CorpusEntry]) -> String {
    let mut out = String::new();
    for chunk in entries.chunks(3) {
        let lo = chunk[0].index;
        let labels: Vec<String> = chunk[0].layers.iter().map(|g| g.to_string()).collect();
        let line = format!("{}-{} {}", lo, lo + 2, labels.join(" "));
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// The bundled 147-entry corpus.
pub fn load_corpus() -> Vec<CorpusEntry> {
    parse_corpus(CORPUS_TEXT).expect("bundled corpus parses")
}

/// Type 1 then Type 2 circuits, each under the three preparations.
pub fn generated_corpus(params: &ProtocolParams, seed: u64) -> Result<Vec<CorpusEntry>> {
    params.validate()?;
    let mut rng = crate::rng::stream(seed, &[0x6705]);
    let mut bases = generate_type1(params, &mut rng);
    bases.extend(generate_type2(params, &mut rng));
    Ok(expand_bases(&bases))
}

/// Noiseless Z-basis distribution over (ℓ1, ℓ2).
pub fn ideal_distribution(entry: &CorpusEntry) -> [f64; 4] {
    logical_ideal(&entry.logical())
}

pub fn is_uniform(d: &[f64; 4]) -> bool {
    d.iter().all(|p| (p - 0.25).abs() < 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use LogicalGate::*;

    #[test]
    fn corpus_shape_and_anchors() {
        let c = load_corpus();
        assert_eq!(c.len(), 147);
        assert_eq!(c[0].prep, PrepKind::Prep00);
        assert_eq!(c[0].layers, vec![HH]);
        assert_eq!(c[75].prep, PrepKind::Prep00);
        assert_eq!(c[75].layers, vec![XC]);
        assert_eq!(c[49].layers, Vec::<LogicalGate>::new());
        assert_eq!(c[146].layers, vec![HH, HH, IX, IZ, HH, IZ, ZI, IX]);
        for (i, e) in c.iter().enumerate() {
            assert_eq!(e.index, i);
            assert_eq!(e.prep, PrepKind::ALL[i % 3]);
            assert!(e.layers.len() <= 8);
        }
    }

    #[test]
    fn corpus_round_trips() {
        let c = load_corpus();
        assert_eq!(parse_corpus(&corpus_to_text(&c)).unwrap(), c);
    }

    #[test]
    fn parse_rejects_gaps_and_unknown_labels() {
        assert!(parse_corpus("3-5 HH\n").is_err());
        assert!(parse_corpus("0-2 QQ\n").is_err());
    }

    #[test]
    fn ideal_examples() {
        let c = load_corpus();
        assert!(is_uniform(&ideal_distribution(&c[0])));
        let e = CorpusEntry { index: 0, prep: PrepKind::Prep00, layers: vec![XC, IZ] };
        assert_eq!(ideal_distribution(&e).iter().filter(|&&p| p > 1e-12).count(), 1);
    }

    #[test]
    fn exactly_ten_uniform_prep00_bases() {
        let n = load_corpus()
            .iter()
            .filter(|e| e.prep == PrepKind::Prep00 && is_uniform(&ideal_distribution(e)))
            .count();
        assert_eq!(n, 10);
    }

    #[test]
    fn default_family_sizes() {
        let p = ProtocolParams::default();
        let mut rng = crate::rng::stream(1, &[]);
        let t1 = generate_type1(&p, &mut rng);
        assert_eq!(t1.len(), 16);
        let t2 = generate_type2(&p, &mut rng);
        assert!((t2.len() as f64) <= p.type2_bound());
        let depths: Vec<usize> = t2.iter().map(|c| c.len()).collect();
        assert_eq!(depths, vec![8, 8, 8, 8, 6, 6, 8, 8]);
        let one = ProtocolParams { t: 1, r: 1, p: 1 };
        let t1 = generate_type1(&one, &mut rng);
        assert_eq!(t1.len(), 1);
        assert_eq!(t1[0].len(), 1);
    }

    #[test]
    fn periodic_blocks_repeat() {
        let p = ProtocolParams::default();
        let t2 = generate_type2(&p, &mut crate::rng::stream(5, &[]));
        let c = &t2[6];
        assert_eq!(&c[..4], &c[4..]);
    }

    #[test]
    fn generation_is_seeded() {
        let p = ProtocolParams::default();
        assert_eq!(generated_corpus(&p, 9).unwrap(), generated_corpus(&p, 9).unwrap());
        assert_ne!(generated_corpus(&p, 9).unwrap(), generated_corpus(&p, 10).unwrap());
    }

    proptest! {
        #[test]
        fn counting_bounds_hold(t in 1usize..=10, r in 1usize..=10, p_raw in 1usize..=10, seed in any::<u64>()) {
            let p = p_raw.min(t);
            let params = ProtocolParams { t, r, p };
            let mut rng = crate::rng::stream(seed, &[]);
            let t1 = generate_type1(&params, &mut rng);
            let t2 = generate_type2(&params, &mut rng);
            prop_assert!(t1.len() as f64 <= params.type1_bound());
            prop_assert!(t2.len() as f64 <= params.type2_bound() + 1e-9);
            prop_assert!(t1.iter().chain(&t2).all(|c| !c.is_empty() && c.len() <= t));
        }
    }
}
