//! The [[4,2,2]] code: codewords, Z- and X-basis decoding with post-selection,
//! logical density matrices and the single-fault checker.

mod ft;
mod logical;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::circuit::{Basis, PrepKind};
use crate::error::{Error, Result};
use crate::levels::{Outcome, OutcomeTable, ShotRecord};
use crate::linalg::C64;

pub use ft::{ft_check, ft_check_native, FtReport, FtViolation};
pub use logical::{logical_density, logical_pauli, pauli_string, stabilizer, XxxxMode};

/// Data bits of the four codeword components, atom 0 most significant.
pub const CODEWORD_BITS: [[u8; 2]; 4] = [[0b0000, 0b1111], [0b0011, 0b1100], [0b0101, 0b1010], [0b0110, 0b1001]];

/// Codeword |ℓ1 ℓ2⟩_L as a 16-entry state vector.
pub fn codeword(l1: u8, l2: u8) -> DVector<C64> {
    let mut v = DVector::zeros(16);
    for x in CODEWORD_BITS[(2 * l1 + l2) as usize] {
        v[x as usize] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecodeResult {
    Accepted { l1: u8, l2: u8 },
    RejectedParity,
    RejectedFlag,
    RejectedLoss,
}

impl DecodeResult {
    /// Logical outcome index 2·ℓ1 + ℓ2 for accepted results.
    pub fn logical_index(self) -> Option<usize> {
        match self {
            DecodeResult::Accepted { l1, l2 } => Some((2 * l1 + l2) as usize),
            _ => None,
        }
    }
}

fn even(bits: [u8; 4]) -> bool {
    bits.iter().fold(0, |a, b| a ^ b) == 0
}

pub fn decode_z(bits: [u8; 4]) -> DecodeResult {
    if !even(bits) {
        return DecodeResult::RejectedParity;
    }
    DecodeResult::Accepted { l1: bits[0] ^ bits[1], l2: bits[0] ^ bits[2] }
}

pub fn decode_x(bits: [u8; 4]) -> DecodeResult {
    if !even(bits) {
        return DecodeResult::RejectedParity;
    }
    DecodeResult::Accepted { l1: bits[0] ^ bits[2], l2: bits[0] ^ bits[1] }
}

/// Which circuit labels carry the four data atoms and the flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeLayout {
    pub data: [usize; 4],
    pub flags: Vec<usize>,
}

impl CodeLayout {
    /// Layout of the compiled benchmarking circuits.
    pub fn for_prep(prep: PrepKind) -> Self {
        CodeLayout { data: [0, 1, 2, 3], flags: if prep.has_flag() { vec![4] } else { vec![] } }
    }

    /// Loss, then flag, then parity.
    pub fn decode(&self, outcomes: &[Outcome], basis: Basis) -> DecodeResult {
        if outcomes.contains(&Outcome::Lost) {
            return DecodeResult::RejectedLoss;
        }
        if self.flags.iter().any(|&f| outcomes[f] == Outcome::Bright) {
            return DecodeResult::RejectedFlag;
        }
        let bits = self.data.map(|s| outcomes[s].bit().expect("not lost"));
        match basis {
            Basis::Z => decode_z(bits),
            Basis::X => decode_x(bits),
        }
    }
}

/// Histogram over the four logical (or two-bit physical) outcomes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsTable {
    pub counts: [u64; 4],
}

impl CountsTable {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn frequencies(&self) -> Result<[f64; 4]> {
        let n = self.total();
        if n == 0 {
            return Err(Error::EmptySelection);
        }
        Ok(self.counts.map(|c| c as f64 / n as f64))
    }
}

/// Post-selects encoded shots. Returns the accepted logical histogram and
/// the kept fraction.
pub fn postselect(records: &[ShotRecord], layout: &CodeLayout, basis: Basis) -> Result<(CountsTable, f64)> {
    if records.is_empty() {
        return Err(Error::EmptyCounts);
    }
    let mut t = CountsTable::default();
    for r in records {
        if let Some(i) = layout.decode(&r.outcomes, basis).logical_index() {
            t.counts[i] += 1;
        }
    }
    let kept = t.total() as f64 / records.len() as f64;
    Ok((t, kept))
}

/// Unencoded two-atom shots: drop any shot with a lost atom.
pub fn physical_counts(records: &[ShotRecord]) -> Result<(CountsTable, f64)> {
    if records.is_empty() {
        return Err(Error::EmptyCounts);
    }
    let mut t = CountsTable::default();
    for r in records {
        if let (Some(a), Some(b)) = (r.bit(0), r.bit(1)) {
            t.counts[(2 * a + b) as usize] += 1;
        }
    }
    let kept = t.total() as f64 / records.len() as f64;
    Ok((t, kept))
}

/// Exact counterpart of [`postselect`]: accepted mass per logical outcome and
/// the rejected mass per reason.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DecodedDistribution {
    pub accepted: [f64; 4],
    pub rejected_loss: f64,
    pub rejected_flag: f64,
    pub rejected_parity: f64,
}

impl DecodedDistribution {
    pub fn retained(&self) -> f64 {
        self.accepted.iter().sum()
    }

    pub fn normalized(&self) -> Result<[f64; 4]> {
        let r = self.retained();
        if r <= 0.0 {
            return Err(Error::EmptySelection);
        }
        Ok(self.accepted.map(|a| a / r))
    }

    fn add(&mut self, d: DecodeResult, p: f64) {
        match d {
            DecodeResult::Accepted { l1, l2 } => self.accepted[(2 * l1 + l2) as usize] += p,
            DecodeResult::RejectedLoss => self.rejected_loss += p,
            DecodeResult::RejectedFlag => self.rejected_flag += p,
            DecodeResult::RejectedParity => self.rejected_parity += p,
        }
    }
}

pub fn decode_table(table: &OutcomeTable, layout: &CodeLayout, basis: Basis) -> DecodedDistribution {
    let mut out = DecodedDistribution::default();
    for (i, &p) in table.probs.iter().enumerate() {
        if p != 0.0 {
            out.add(layout.decode(&table.outcomes_of(i), basis), p);
        }
    }
    out
}

/// Two-atom physical readout with loss rejection.
pub fn physical_table(table: &OutcomeTable) -> DecodedDistribution {
    let mut out = DecodedDistribution::default();
    for (i, &p) in table.probs.iter().enumerate() {
        let o = table.outcomes_of(i);
        match (o[0].bit(), o[1].bit()) {
            (Some(a), Some(b)) => out.accepted[(2 * a + b) as usize] += p,
            _ => out.rejected_loss += p,
        }
    }
    out
}
