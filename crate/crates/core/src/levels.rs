//! Five-level atom basis, single-site Kraus channels, readout POVMs and
//! outcome tables.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, C64};

pub const N_LEVELS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Q0,
    Q1,
    Leak0,
    Leak1,
    Lost,
}

impl Level {
    pub const ALL: [Level; N_LEVELS] = [Level::Q0, Level::Q1, Level::Leak0, Level::Leak1, Level::Lost];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Level {
        Level::ALL[i]
    }

    pub fn is_qubit(self) -> bool {
        matches!(self, Level::Q0 | Level::Q1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Dark,
    Bright,
    Lost,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Dark, Outcome::Bright, Outcome::Lost];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn bit(self) -> Option<u8> {
        match self {
            Outcome::Dark => Some(0),
            Outcome::Bright => Some(1),
            Outcome::Lost => None,
        }
    }
}

/// Bright/dark misclassification. `eps0` is dark read as bright, `eps1`
/// bright read as dark.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Readout {
    pub eps0: f64,
    pub eps1: f64,
}

impl Readout {
    pub fn perfect() -> Readout {
        Readout { eps0: 0.0, eps1: 0.0 }
    }

    /// `p[outcome][level]`: diagonal of the POVM element for each outcome.
    pub fn povm(&self) -> [[f64; N_LEVELS]; 3] {
        let (e0, e1) = (self.eps0, self.eps1);
        [
            [1.0 - e0, e1, 1.0 - e0, e1, 0.0],
            [e0, 1.0 - e1, e0, 1.0 - e1, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0],
        ]
    }
}

/// Kraus channel given as a list of operators on `5^k` dimensional space.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    pub operators: Vec<DMatrix<C64>>,
}

impl KrausChannel {
    pub fn new(operators: Vec<DMatrix<C64>>) -> Result<Self> {
        let dim = operators.first().map(|k| k.nrows()).unwrap_or(0);
        for k in &operators {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: k.nrows() });
            }
        }
        let ch = KrausChannel { operators };
        let defect = ch.completeness_defect();
        if defect > 1e-10 {
            return Err(Error::NotTracePreserving(defect));
        }
        Ok(ch)
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    pub fn identity(dim: usize) -> Self {
        KrausChannel { operators: vec![DMatrix::identity(dim, dim)] }
    }

    /// Single-site Z with probability `p`; Z acts only on the qubit levels.
    pub fn phase_flip(p: f64) -> Self {
        let mut z = DMatrix::identity(N_LEVELS, N_LEVELS);
        z[(1, 1)] = C64::new(-1.0, 0.0);
        let id: DMatrix<C64> = DMatrix::identity(N_LEVELS, N_LEVELS);
        KrausChannel {
            operators: vec![id * C64::new((1.0 - p).sqrt(), 0.0), z * C64::new(p.sqrt(), 0.0)],
        }
    }

    /// Jump operators √m[d][s] |d⟩⟨s| for every nonzero entry, plus the
    /// diagonal no-jump operator.
    pub fn from_transitions(m: &[[f64; N_LEVELS]; N_LEVELS]) -> Result<Self> {
        let mut ops = Vec::new();
        let mut no_jump = DMatrix::zeros(N_LEVELS, N_LEVELS);
        for s in 0..N_LEVELS {
            let total: f64 = (0..N_LEVELS).map(|d| m[d][s]).sum();
            if total > 1.0 + 1e-12 {
                return Err(Error::NotTracePreserving(total - 1.0));
            }
            no_jump[(s, s)] = C64::new((1.0 - total).max(0.0).sqrt(), 0.0);
            for (d, row) in m.iter().enumerate() {
                if row[s] > 0.0 {
                    let mut k = DMatrix::zeros(N_LEVELS, N_LEVELS);
                    k[(d, s)] = C64::new(row[s].sqrt(), 0.0);
                    ops.push(k);
                }
            }
        }
        ops.insert(0, no_jump);
        Ok(KrausChannel { operators: ops })
    }

    /// Unitary on the qubit levels, identity on leak and lost.
    pub fn from_qubit_unitary(u: &Mat2) -> Self {
        KrausChannel { operators: vec![lift_qubit_op(u)] }
    }

    /// Apply `self` first, then `next`.
    pub fn then(&self, next: &KrausChannel) -> Self {
        let mut ops = Vec::with_capacity(self.operators.len() * next.operators.len());
        for b in &next.operators {
            for a in &self.operators {
                ops.push(b * a);
            }
        }
        KrausChannel { operators: ops }
    }

    /// Max-entry deviation of Σ K†K from the identity.
    pub fn completeness_defect(&self) -> f64 {
        let dim = self.dim();
        let mut sum = DMatrix::<C64>::zeros(dim, dim);
        for k in &self.operators {
            sum += k.adjoint() * k;
        }
        let id = DMatrix::<C64>::identity(dim, dim);
        (sum - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// 2x2 qubit operator as a 5x5 single-site operator.
pub fn lift_qubit_op(u: &Mat2) -> DMatrix<C64> {
    let mut k = DMatrix::identity(N_LEVELS, N_LEVELS);
    for i in 0..2 {
        for j in 0..2 {
            k[(i, j)] = u[i][j];
        }
    }
    k
}

/// A single shot: one readout class per site.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShotRecord {
    pub outcomes: Vec<Outcome>,
}

impl ShotRecord {
    pub fn any_lost(&self) -> bool {
        self.outcomes.contains(&Outcome::Lost)
    }

    pub fn bit(&self, site: usize) -> Option<u8> {
        self.outcomes[site].bit()
    }

    /// Bits of the non-lost sites, in site order.
    pub fn bitstring(&self) -> Vec<u8> {
        self.outcomes.iter().filter_map(|o| o.bit()).collect()
    }
}

/// Joint readout probabilities over {dark, bright, lost}^n. Index is base 3
/// with site 0 the most significant digit.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeTable {
    pub n_sites: usize,
    pub probs: Vec<f64>,
}

impl OutcomeTable {
    /// Converts level populations (base-5 index) into readout probabilities.
    pub fn from_populations(n_sites: usize, pops: &[f64], readout: &Readout) -> Self {
        let povm = readout.povm();
        let map: Vec<Vec<f64>> = povm.iter().map(|r| r.to_vec()).collect();
        let probs = mode_transform(pops, n_sites, N_LEVELS, 3, &map);
        OutcomeTable { n_sites, probs }
    }

    pub fn outcomes_of(&self, index: usize) -> Vec<Outcome> {
        let mut out = vec![Outcome::Dark; self.n_sites];
        let mut rem = index;
        for k in (0..self.n_sites).rev() {
            out[k] = Outcome::ALL[rem % 3];
            rem /= 3;
        }
        out
    }

    pub fn index_of(outcomes: &[Outcome]) -> usize {
        outcomes.iter().fold(0, |acc, o| acc * 3 + o.index())
    }

    pub fn prob(&self, outcomes: &[Outcome]) -> f64 {
        self.probs[Self::index_of(outcomes)]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Nonzero entries as (record, probability).
    pub fn support(&self) -> impl Iterator<Item = (ShotRecord, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (ShotRecord { outcomes: self.outcomes_of(i) }, p))
    }

    /// Draws i.i.d. records by inverse-CDF lookup.
    pub fn sample<R: Rng>(&self, n_shots: usize, rng: &mut R) -> Vec<ShotRecord> {
        let mut cdf = Vec::with_capacity(self.probs.len());
        let mut acc = 0.0;
        for &p in &self.probs {
            acc += p.max(0.0);
            cdf.push(acc);
        }
        (0..n_shots)
            .map(|_| {
                let u = rng.random::<f64>() * acc;
                let i = cdf.partition_point(|&c| c <= u).min(self.probs.len() - 1);
                ShotRecord { outcomes: self.outcomes_of(i) }
            })
            .collect()
    }
}

/// Applies the same `dout x din` stochastic map to every site of a product
/// index space (site 0 most significant).
pub(crate) fn mode_transform(
    input: &[f64],
    n_sites: usize,
    din: usize,
    dout: usize,
    map: &[Vec<f64>],
) -> Vec<f64> {
    let mut cur = input.to_vec();
    for k in 0..n_sites {
        let prefix = dout.pow(k as u32);
        let suffix = din.pow((n_sites - k - 1) as u32);
        let mut next = vec![0.0; prefix * dout * suffix];
        for a in 0..prefix {
            for l in 0..din {
                let src = &cur[(a * din + l) * suffix..(a * din + l + 1) * suffix];
                if src.iter().all(|&v| v == 0.0) {
                    continue;
                }
                for (o, row) in map.iter().enumerate() {
                    let w = row[l];
                    if w == 0.0 {
                        continue;
                    }
                    let dst = &mut next[(a * dout + o) * suffix..(a * dout + o + 1) * suffix];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += w * s;
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hadamard, Pauli};

    fn single(level: Level) -> Vec<f64> {
        let mut v = vec![0.0; N_LEVELS];
        v[level.index()] = 1.0;
        v
    }

    #[test]
    fn readout_of_pure_levels() {
        let r = Readout { eps0: 0.004, eps1: 0.028 };
        let t = OutcomeTable::from_populations(1, &single(Level::Q1), &r);
        assert!((t.probs[1] - 0.972).abs() < 1e-15);
        assert!((t.probs[0] - 0.028).abs() < 1e-15);
        let t = OutcomeTable::from_populations(1, &single(Level::Q0), &r);
        assert!((t.probs[0] - 0.996).abs() < 1e-15);
        assert!((t.probs[1] - 0.004).abs() < 1e-15);
        let t = OutcomeTable::from_populations(1, &single(Level::Lost), &r);
        assert_eq!(t.probs, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn mode_transform_matches_direct_product() {
        let r = Readout { eps0: 0.1, eps1: 0.2 };
        let povm = r.povm();
        let pops: Vec<f64> = (0..25).map(|i| (i as f64 + 1.0) / 325.0).collect();
        let t = OutcomeTable::from_populations(2, &pops, &r);
        for o0 in 0..3 {
            for o1 in 0..3 {
                let mut want = 0.0;
                for l0 in 0..5 {
                    for l1 in 0..5 {
                        want += povm[o0][l0] * povm[o1][l1] * pops[l0 * 5 + l1];
                    }
                }
                assert!((t.probs[o0 * 3 + o1] - want).abs() < 1e-15);
            }
        }
        assert!((t.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outcome_indexing_round_trips() {
        let t = OutcomeTable { n_sites: 3, probs: vec![0.0; 27] };
        for i in 0..27 {
            assert_eq!(OutcomeTable::index_of(&t.outcomes_of(i)), i);
        }
    }

    #[test]
    fn transition_channel_is_complete() {
        let mut m = [[0.0; N_LEVELS]; N_LEVELS];
        m[4][1] = 0.25;
        m[1][1] = 0.1;
        m[0][3] = 0.5;
        let ch = KrausChannel::from_transitions(&m).unwrap();
        assert!(ch.completeness_defect() < 1e-14);
        m[2][3] = 0.6;
        assert!(KrausChannel::from_transitions(&m).is_err());
    }

    #[test]
    fn composed_channels_stay_complete() {
        let a = KrausChannel::phase_flip(0.3);
        let b = KrausChannel::from_qubit_unitary(&hadamard());
        let c = KrausChannel::from_qubit_unitary(&Pauli::Y.matrix());
        assert!(a.then(&b).then(&c).completeness_defect() < 1e-14);
    }

    #[test]
    fn sampling_is_seeded() {
        use rand::SeedableRng;
        let t = OutcomeTable { n_sites: 1, probs: vec![0.2, 0.5, 0.3] };
        let a = t.sample(50, &mut rand_chacha::ChaCha8Rng::seed_from_u64(3));
        let b = t.sample(50, &mut rand_chacha::ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }
}
