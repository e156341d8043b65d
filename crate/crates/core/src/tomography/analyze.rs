use nalgebra::{DMatrix, DVector, Vector4};
use serde::{Deserialize, Serialize};

use super::{ReconstructedState, N_DATA};
use crate::code::{logical_density, stabilizer, XxxxMode};
use crate::error::{Error, Result};
use crate::linalg::{Pauli, C64};

pub const METRICS: [&str; 4] = ["physical_pair", "zzzz_projected", "zzzz_projected_xxxx_traced", "both_projected"];

/// (|0000⟩ + |0110⟩ + |1001⟩ + |1111⟩)/2: Bell pairs on atoms (0,3) and (1,2).
pub fn logical_bell() -> DVector<C64> {
    let mut v = DVector::zeros(1 << N_DATA);
    for i in [0b0000, 0b0110, 0b1001, 0b1111] {
        v[i] = C64::new(0.5, 0.0);
    }
    v
}

/// The four fidelities, in `METRICS` order.
pub type Fidelities = [f64; 4];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityRow {
    pub metric: String,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Two-atom reduced state on (a, b), index 2·bit_a + bit_b.
fn reduced_pair(rho: &DMatrix<C64>, a: usize, b: usize) -> DMatrix<C64> {
    let bit = |i: usize, k: usize| (i >> (N_DATA - 1 - k)) & 1;
    let others: Vec<usize> = (0..N_DATA).filter(|&k| k != a && k != b).collect();
    let mut out = DMatrix::zeros(4, 4);
    for r in 0..rho.nrows() {
        for c in 0..rho.ncols() {
            if others.iter().all(|&k| bit(r, k) == bit(c, k)) {
                out[(2 * bit(r, a) + bit(r, b), 2 * bit(c, a) + bit(c, b))] += rho[(r, c)];
            }
        }
    }
    out
}

fn phi_plus_fidelity4(rho: &DMatrix<C64>) -> f64 {
    0.5 * (rho[(0, 0)] + rho[(0, 3)] + rho[(3, 0)] + rho[(3, 3)]).re
}

pub fn analyze_matrix(rho: &DMatrix<C64>) -> Result<Fidelities> {
    if rho.nrows() != 1 << N_DATA {
        return Err(Error::DimensionMismatch { expected: 1 << N_DATA, got: rho.nrows() });
    }
    let pair = 0.5 * (phi_plus_fidelity4(&reduced_pair(rho, 0, 3)) + phi_plus_fidelity4(&reduced_pair(rho, 1, 2)));

    let psi = logical_bell();
    let overlap = (psi.adjoint() * rho * &psi)[(0, 0)].re;
    let zz = stabilizer(Pauli::Z);
    let accept = 0.5 * (rho.trace() + (rho * zz).trace()).re;
    if accept <= 1e-12 {
        return Err(Error::ZeroProjection);
    }

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell2 = Vector4::new(C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0));
    let logical = |mode| -> Result<f64> {
        let l = logical_density(rho, true, mode)?;
        Ok((bell2.adjoint() * l * bell2)[(0, 0)].re)
    };
    Ok([pair, overlap / accept, logical(XxxxMode::Trace)?, logical(XxxxMode::Project)?])
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Fidelities of the posterior mean with central 95% intervals over the
/// posterior samples.
pub fn analyze(state: &ReconstructedState) -> Result<Vec<FidelityRow>> {
    let point = analyze_matrix(&state.mean)?;
    let per_sample = state.samples.iter().map(analyze_matrix).collect::<Result<Vec<_>>>()?;
    Ok((0..4)
        .map(|m| {
            let mut v: Vec<f64> = per_sample.iter().map(|f| f[m]).collect();
            v.sort_by(f64::total_cmp);
            let (lo, hi) = if v.is_empty() { (point[m], point[m]) } else { (percentile(&v, 0.025), percentile(&v, 0.975)) };
            FidelityRow { metric: METRICS[m].to_string(), estimate: point[m], ci_low: lo, ci_high: hi }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noisy_reconstruction(seed: u64) -> (ReconstructedState, [f64; 4]) {
        use crate::noise::NoiseParams;
        use crate::tomography::{effective_state, mh_reconstruct, synth_dataset, bell_prep, MhOptions};
        let noise = NoiseParams::default();
        let exact = analyze_matrix(&effective_state(&bell_prep(), &noise).unwrap()).unwrap();
        let d = synth_dataset(&bell_prep(), Some(&noise), 2000, seed).unwrap();
        let s = mh_reconstruct(&d, &noise.readout(), &MhOptions { seed, ..Default::default() }).unwrap();
        (s, exact)
    }

    #[test]
    fn stabilizer_conditioning_is_monotone_and_tracks_exact() {
        for seed in 0..5 {
            let (s, exact) = noisy_reconstruction(seed);
            let f = analyze_matrix(&s.mean).unwrap();
            for m in 1..4 {
                assert!(f[m - 1] <= f[m], "seed {seed}: {f:?}");
            }
            for m in 0..4 {
                assert!((f[m] - exact[m]).abs() < 0.02, "seed {seed} {}: {} vs {}", METRICS[m], f[m], exact[m]);
            }
        }
    }

    #[test]
    fn independent_chains_agree() {
        use crate::noise::NoiseParams;
        use crate::tomography::{mh_reconstruct, synth_dataset, bell_prep, MhOptions};
        let noise = NoiseParams::default();
        let d = synth_dataset(&bell_prep(), Some(&noise), 2000, 11).unwrap();
        let rows: Vec<_> = [1, 2]
            .into_iter()
            .map(|seed| analyze(&mh_reconstruct(&d, &noise.readout(), &MhOptions { seed, ..Default::default() }).unwrap()).unwrap())
            .collect();
        for (a, b) in rows[0].iter().zip(&rows[1]) {
            let half = (a.ci_high - a.ci_low) / 2.0 + (b.ci_high - b.ci_low) / 2.0;
            assert!((a.estimate - b.estimate).abs() <= half, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn ideal_bell_scores_one() {
        let psi = logical_bell();
        let f = analyze_matrix(&(&psi * psi.adjoint())).unwrap();
        for x in f {
            assert!((x - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn maximally_mixed() {
        let rho = DMatrix::<C64>::identity(16, 16) / C64::new(16.0, 0.0);
        let f = analyze_matrix(&rho).unwrap();
        assert!((f[3] - 0.25).abs() < 1e-12);
        assert!((f[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn single_bit_flip_is_removed_by_projection() {
        // Mix in X on atom 0, which leaves the ZZZZ-even space.
        let psi = logical_bell();
        let mut flipped = DVector::zeros(16);
        for i in 0..16 {
            flipped[i ^ 0b1000] = psi[i];
        }
        let rho = (&psi * psi.adjoint()) * C64::new(0.9, 0.0) + (&flipped * flipped.adjoint()) * C64::new(0.1, 0.0);
        let f = analyze_matrix(&rho).unwrap();
        assert!((f[0] - 0.95).abs() < 1e-12);
        assert!((f[1] - 1.0).abs() < 1e-12);
        assert!((f[3] - 1.0).abs() < 1e-12);
    }
}
