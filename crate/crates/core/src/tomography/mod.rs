//! Four-atom state tomography of the logical Bell preparation: 81 local
//! Pauli settings, synthetic data, Metropolis-Hastings reconstruction and
//! code-aware fidelities.

mod analyze;
mod mh;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{compile_encoded, Builder, LogicalCircuit, NativeCircuit, PrepKind, FRAC_PI_2, FRAC_PI_4, PI};
use crate::error::{Error, Result};
use crate::levels::{Level, Outcome, OutcomeTable};
use crate::linalg::{Pauli, C64};
use crate::noise::NoiseParams;
use crate::rng::stream;
use crate::sim::{exact_distribution, exact_state};

pub use analyze::{analyze, analyze_matrix, logical_bell, Fidelities, FidelityRow, METRICS};
pub use mh::{linear_inversion, log_likelihood, mh_reconstruct, MhOptions, ReconstructedState};

pub const N_DATA: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TomoSetting(pub [Pauli; N_DATA]);

impl fmt::Display for TomoSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.0 {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for TomoSetting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let ps: Vec<Pauli> = s
            .chars()
            .map(Pauli::from_symbol)
            .collect::<Option<_>>()
            .ok_or_else(|| Error::InvalidArgument(format!("bad setting `{s}`")))?;
        let arr: [Pauli; N_DATA] = ps.try_into().map_err(|_| Error::InvalidArgument(format!("bad setting `{s}`")))?;
        Ok(TomoSetting(arr))
    }
}

/// All 81 settings, atom 0 varying slowest, X < Y < Z.
pub fn settings() -> Vec<TomoSetting> {
    (0..81)
        .map(|mut k| {
            let mut s = [Pauli::X; N_DATA];
            for site in (0..N_DATA).rev() {
                s[site] = Pauli::ALL[k % 3];
                k /= 3;
            }
            TomoSetting(s)
        })
        .collect()
}

/// Counts per setting over the 16 outcomes (atom 0 most significant), after
/// discarding shots with a lost atom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomoDataset {
    pub shots: u64,
    pub counts: BTreeMap<String, [u64; 16]>,
}

impl TomoDataset {
    pub fn from_json(s: &str) -> Result<Self> {
        let d: TomoDataset = serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dataset serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.counts.is_empty() {
            return Err(Error::EmptyCounts);
        }
        for (k, c) in &self.counts {
            k.parse::<TomoSetting>()?;
            if c.iter().sum::<u64>() > self.shots {
                return Err(Error::InvalidArgument(format!("setting {k} has more counts than shots")));
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> Vec<(TomoSetting, [u64; 16])> {
        self.counts.iter().map(|(k, c)| (k.parse().expect("validated key"), *c)).collect()
    }
}

/// Rotates the listed atoms so that a Z readout measures the chosen Pauli,
/// with outcome 0 for eigenvalue +1. Atoms outside the lists are untouched.
fn basis_change(b: &mut Builder, x_sites: &[usize], y_sites: &[usize]) {
    if !x_sites.is_empty() {
        b.gr(-FRAC_PI_4, FRAC_PI_2).rz_each(x_sites, PI).gr(FRAC_PI_4, FRAC_PI_2);
    }
    if !y_sites.is_empty() {
        b.gr(FRAC_PI_4, 0.0).rz_each(y_sites, PI).gr(-FRAC_PI_4, 0.0);
    }
}

/// `prep` followed by the basis change for `setting` on labels 0..4.
pub fn setting_circuit(prep: &NativeCircuit, setting: TomoSetting) -> Result<NativeCircuit> {
    if prep.n_sites < N_DATA {
        return Err(Error::InvalidArgument(format!("tomography needs {N_DATA} atoms, circuit has {}", prep.n_sites)));
    }
    let mut b = Builder::new(prep.n_sites);
    b.append(&prep.gates);
    let pick = |p: Pauli| (0..N_DATA).filter(|&k| setting.0[k] == p).collect::<Vec<_>>();
    basis_change(&mut b, &pick(Pauli::X), &pick(Pauli::Y));
    Ok(b.measure())
}

fn data_counts(table: &OutcomeTable, n: usize, rng: &mut crate::rng::Rng) -> [u64; 16] {
    let mut counts = [0u64; 16];
    for rec in table.sample(n, rng) {
        if rec.outcomes[..N_DATA].contains(&Outcome::Lost) {
            continue;
        }
        let idx = (0..N_DATA).fold(0, |acc, k| 2 * acc + rec.bit(k).expect("not lost") as usize);
        counts[idx] += 1;
    }
    counts
}

/// The encoded logical Bell preparation without its terminal measurement.
pub fn bell_prep() -> NativeCircuit {
    let mut c = compile_encoded(&LogicalCircuit::new(PrepKind::PrepBell, vec![]));
    c.measured = false;
    c
}

/// Samples `shots` per setting from the exact outcome distribution.
pub fn synth_dataset(prep: &NativeCircuit, noise: Option<&NoiseParams>, shots: u64, seed: u64) -> Result<TomoDataset> {
    let all = settings();
    let counts = all
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let table = exact_distribution(&setting_circuit(prep, s)?, noise)?;
            let mut rng = stream(seed, &[i as u64]);
            Ok((s.to_string(), data_counts(&table, shots as usize, &mut rng)))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(TomoDataset { shots, counts })
}

fn qubit_value(l: Level) -> Option<usize> {
    match l {
        Level::Q0 | Level::Leak0 => Some(0),
        Level::Q1 | Level::Leak1 => Some(1),
        Level::Lost => None,
    }
}

/// The prepared four-atom state as a qubit density matrix, with a leaked
/// atom counted as the qubit level it reads out as, coherences to leaked
/// levels dropped, and configurations with a lost atom discarded.
pub fn effective_state(prep: &NativeCircuit, noise: &NoiseParams) -> Result<DMatrix<C64>> {
    if prep.n_sites != N_DATA {
        return Err(Error::InvalidArgument(format!("expected {N_DATA} atoms")));
    }
    let (state, map) = exact_state(prep, noise)?;
    if map.iter().enumerate().any(|(i, &m)| i != m) {
        return Err(Error::InvalidArgument("relabelled preparations are not supported".into()));
    }
    let full = state.to_dense();
    let dim = full.nrows();
    let levels = |mut i: usize| {
        let mut ls = [Level::Q0; N_DATA];
        for k in (0..N_DATA).rev() {
            ls[k] = Level::from_index(i % 5);
            i /= 5;
        }
        ls
    };
    let mut out = DMatrix::<C64>::zeros(16, 16);
    for r in 0..dim {
        let lr = levels(r);
        let Some(qr) = lr.iter().try_fold(0, |acc, &l| qubit_value(l).map(|b| 2 * acc + b)) else { continue };
        for c in 0..dim {
            let lc = levels(c);
            let compatible = (0..N_DATA).all(|k| (lr[k].is_qubit() && lc[k].is_qubit()) || lr[k] == lc[k]);
            if !compatible {
                continue;
            }
            let Some(qc) = lc.iter().try_fold(0, |acc, &l| qubit_value(l).map(|b| 2 * acc + b)) else { continue };
            out[(qr, qc)] += full[(r, c)];
        }
    }
    let t = out.trace().re;
    if t <= 0.0 {
        return Err(Error::ZeroProjection);
    }
    Ok(out / C64::new(t, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{decode_z, DecodeResult};

    #[test]
    fn enumeration() {
        let s = settings();
        assert_eq!(s.len(), 81);
        let set: std::collections::BTreeSet<_> = s.iter().collect();
        assert_eq!(set.len(), 81);
        assert_eq!(s[0].to_string(), "XXXX");
        assert_eq!(s[80].to_string(), "ZZZZ");
        assert_eq!(s[1].to_string(), "XXXY");
        for t in &s {
            assert_eq!(t.to_string().parse::<TomoSetting>().unwrap(), *t);
        }
    }

    #[test]
    fn basis_change_measures_each_pauli() {
        // One atom prepared in the +1 eigenstate of each Pauli must read 0.
        for (target, prep) in [(Pauli::X, (FRAC_PI_2, FRAC_PI_2)), (Pauli::Y, (FRAC_PI_2, PI)), (Pauli::Z, (0.0, 0.0))] {
            let mut b = Builder::new(4);
            b.gr(prep.0, prep.1);
            let p = b.finish();
            let s = TomoSetting([target; 4]);
            let t = exact_distribution(&setting_circuit(&p, s).unwrap(), None).unwrap();
            let all_dark = OutcomeTable::index_of(&[Outcome::Dark; 4]);
            assert!((t.probs[all_dark] - 1.0).abs() < 1e-12, "{target:?}");
        }
    }

    #[test]
    fn all_z_counts_sit_on_codewords() {
        let d = synth_dataset(&bell_prep(), None, 500, 1).unwrap();
        let z = d.counts["ZZZZ"];
        for (i, &c) in z.iter().enumerate() {
            if c > 0 {
                let bits = [(i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1].map(|b| b as u8);
                match decode_z(bits) {
                    DecodeResult::Accepted { l1, l2 } => assert_eq!(l1, l2),
                    other => panic!("{other:?}"),
                }
            }
        }
        assert_eq!(z.iter().sum::<u64>(), 500);
    }

    #[test]
    fn synthesis_is_seeded_and_round_trips() {
        let noise = NoiseParams::default();
        let a = synth_dataset(&bell_prep(), Some(&noise), 200, 5).unwrap();
        let b = synth_dataset(&bell_prep(), Some(&noise), 200, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(TomoDataset::from_json(&a.to_json()).unwrap(), a);
        assert!(a.counts.values().all(|c| c.iter().sum::<u64>() <= 200));
    }

    #[test]
    fn effective_state_of_ideal_prep_is_bell() {
        let rho = effective_state(&bell_prep(), &NoiseParams::ideal()).unwrap();
        let psi = logical_bell();
        let f = (psi.adjoint() * &rho * &psi)[(0, 0)].re;
        assert!((f - 1.0).abs() < 1e-12);
        let noisy = effective_state(&bell_prep(), &NoiseParams::default()).unwrap();
        assert!((noisy.trace().re - 1.0).abs() < 1e-12);
        assert!((&noisy - noisy.adjoint()).camax() < 1e-12);
    }
}
