//! Exhaustive single-fault check: insert one Pauli on one atom at one point in
//! the noiseless compiled circuit and test whether any wrong logical outcome
//! survives post-selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{compile_encoded, ideal_distribution, Basis, LogicalCircuit, NativeCircuit};
use crate::levels::Outcome;
use crate::linalg::Pauli;
use crate::sim::{ideal_pure_run, Fault, PureState};

use super::{CodeLayout, DecodedDistribution};

/// Wrong-outcome mass below this counts as zero.
pub const FT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FtViolation {
    /// Number of native gates executed before the fault.
    pub location_index: usize,
    pub site: usize,
    pub pauli: Pauli,
    /// Accepted probability mass that disagrees with the ideal distribution.
    pub accepted_error_probability: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FtReport {
    pub n_locations: usize,
    pub n_insertions: usize,
    pub violations: Vec<FtViolation>,
}

impl FtReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Decoded distribution of a noiseless final state (no readout error).
pub(crate) fn decode_pure(state: &PureState, map: &[usize], layout: &CodeLayout, basis: Basis) -> DecodedDistribution {
    let amps = state.qubit_amplitudes().expect("noiseless state has no leaked atoms");
    let n = state.n_sites();
    let mut out = DecodedDistribution::default();
    let mut outcomes = vec![Outcome::Dark; n];
    for (x, a) in amps.iter().enumerate() {
        let p = a.norm_sqr();
        if p < 1e-16 {
            continue;
        }
        for (label, &phys) in map.iter().enumerate() {
            outcomes[label] = if (x >> (n - 1 - phys)) & 1 == 1 { Outcome::Bright } else { Outcome::Dark };
        }
        out.add(layout.decode(&outcomes, basis), p);
    }
    out
}

/// Accepted mass that the ideal distribution cannot explain.
fn wrong_mass(d: &DecodedDistribution, ideal: &[f64; 4]) -> f64 {
    let kept = d.retained();
    0.5 * d.accepted.iter().zip(ideal).map(|(q, i)| (q - kept * i).abs()).sum::<f64>()
}

pub fn ft_check_native(circuit: &NativeCircuit, layout: &CodeLayout, basis: Basis, ideal: &[f64; 4]) -> FtReport {
    let n_locations = circuit.gates.len() + 1;
    let faults: Vec<Fault> = (0..n_locations)
        .flat_map(|after_gates| {
            (0..circuit.n_sites).flat_map(move |site| Pauli::ALL.map(|pauli| Fault { after_gates, site, pauli }))
        })
        .collect();
    let violations: Vec<FtViolation> = faults
        .par_iter()
        .filter_map(|&f| {
            let (state, map) = ideal_pure_run(circuit, Some(f));
            let wrong = wrong_mass(&decode_pure(&state, &map, layout, basis), ideal);
            (wrong > FT_TOLERANCE).then_some(FtViolation {
                location_index: f.after_gates,
                site: f.site,
                pauli: f.pauli,
                accepted_error_probability: wrong,
            })
        })
        .collect();
    FtReport { n_locations, n_insertions: faults.len(), violations }
}

pub fn ft_check(lc: &LogicalCircuit) -> FtReport {
    ft_check_native(&compile_encoded(lc), &CodeLayout::for_prep(lc.prep), lc.basis, &ideal_distribution(lc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{LogicalGate, NativeGate, PrepKind};

    #[test]
    fn noiseless_run_matches_ideal() {
        for prep in PrepKind::ALL {
            let lc = LogicalCircuit::new(prep, vec![LogicalGate::HH, LogicalGate::CX]);
            let c = compile_encoded(&lc);
            let (s, map) = ideal_pure_run(&c, None);
            let d = decode_pure(&s, &map, &CodeLayout::for_prep(prep), Basis::Z);
            assert!((d.retained() - 1.0).abs() < 1e-12);
            assert!(wrong_mass(&d, &ideal_distribution(&lc)) < 1e-12);
        }
    }

    #[test]
    fn bit_flip_before_readout_is_caught() {
        let lc = LogicalCircuit::new(PrepKind::Prep00, vec![]);
        let c = compile_encoded(&lc);
        let last = c.gates.len();
        for site in 0..4 {
            let (s, map) = ideal_pure_run(&c, Some(Fault { after_gates: last, site, pauli: Pauli::X }));
            let d = decode_pure(&s, &map, &CodeLayout::for_prep(lc.prep), Basis::Z);
            assert!(d.retained() < 1e-12);
            assert!((d.rejected_parity - 1.0).abs() < 1e-12);
        }
        assert!(ft_check(&lc).passed());
    }

    #[test]
    fn bell_with_hadamards_passes() {
        let r = ft_check(&LogicalCircuit::new(PrepKind::PrepBell, vec![LogicalGate::HH]));
        assert!(r.passed(), "{:?}", r.violations);
        assert_eq!(r.n_insertions, r.n_locations * 4 * 3);
    }

    #[test]
    fn unflagged_zero_zero_prep_is_caught() {
        // Dropping the flag couplings leaves a weight-two error path undetected.
        let lc = LogicalCircuit::new(PrepKind::Prep00, vec![]);
        let mut c = compile_encoded(&lc);
        c.gates.retain(|g| !matches!(g, NativeGate::Cz { b: 4, .. }));
        let r = ft_check_native(&c, &CodeLayout::for_prep(lc.prep), Basis::Z, &ideal_distribution(&lc));
        assert!(!r.passed());
    }
}
