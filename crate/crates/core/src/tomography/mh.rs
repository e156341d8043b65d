use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{TomoDataset, N_DATA};
use crate::code::pauli_string;
use crate::error::{Error, Result};
use crate::levels::Readout;
use crate::linalg::{Pauli, C64};
use crate::rng::stream;

const DIM: usize = 1 << N_DATA;
const N_PAULI: usize = 1 << (2 * N_DATA);
const ML_ITERATIONS: usize = 5000;

fn code(p: Pauli) -> usize {
    match p {
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

fn site_bit(k: usize) -> usize {
    1 << (N_DATA - 1 - k)
}

/// ⟨P⟩ for all 256 Pauli strings, string index Σ code(P_k)·4^(3−k).
fn expectations(rho: &DMatrix<C64>) -> [f64; N_PAULI] {
    let mut out = [0.0; N_PAULI];
    for (idx, slot) in out.iter_mut().enumerate() {
        let (x, z, ny) = masks(idx);
        // P|i⟩ = i^ny (−1)^{|i∧z|} |i⊕x⟩, so tr(ρP) = Σ_i phase(i) ρ[i, i⊕x].
        let iy = C64::new(0.0, 1.0).powu(ny);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..DIM {
            let sign = if (i & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            acc += rho[(i, i ^ x)] * sign;
        }
        *slot = (acc * iy).re;
    }
    out
}

/// Precomputed linear map from Pauli expectations to outcome probabilities.
struct Model {
    /// Per setting: Pauli index per subset, weights [outcome][subset], counts.
    terms: Vec<([usize; DIM], [[f64; DIM]; DIM], [u64; DIM])>,
}

impl Model {
    fn new(data: &TomoDataset, readout: &Readout) -> Result<Self> {
        data.validate()?;
        let (e0, e1) = (readout.eps0, readout.eps1);
        let a = [1.0 - e0 + e1, 1.0 + e0 - e1];
        let c = [1.0 - e0 - e1, -(1.0 - e0 - e1)];
        let mut terms = Vec::new();
        for (s, counts) in data.entries() {
            let mut pidx = [0usize; DIM];
            let mut w = [[0.0; DIM]; DIM];
            for t in 0..DIM {
                for k in 0..N_DATA {
                    if t & site_bit(k) != 0 {
                        pidx[t] += code(s.0[k]) << (2 * (N_DATA - 1 - k));
                    }
                }
                for (o, row) in w.iter_mut().enumerate() {
                    let mut prod = 1.0 / DIM as f64;
                    for k in 0..N_DATA {
                        let ok = usize::from(o & site_bit(k) != 0);
                        prod *= if t & site_bit(k) != 0 { c[ok] } else { a[ok] };
                    }
                    row[t] = prod;
                }
            }
            terms.push((pidx, w, counts));
        }
        if terms.iter().all(|t| t.2.iter().sum::<u64>() == 0) {
            return Err(Error::EmptyCounts);
        }
        Ok(Model { terms })
    }

    fn log_likelihood(&self, rho: &DMatrix<C64>) -> f64 {
        let e = expectations(rho);
        let mut ll = 0.0;
        for (pidx, w, counts) in &self.terms {
            let ev: [f64; DIM] = std::array::from_fn(|t| e[pidx[t]]);
            for o in 0..DIM {
                if counts[o] == 0 {
                    continue;
                }
                let p: f64 = w[o].iter().zip(&ev).map(|(a, b)| a * b).sum();
                if p <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                ll += counts[o] as f64 * p.ln();
            }
        }
        ll
    }
}

/// (x mask, z mask, number of Y factors) of a Pauli string index.
fn masks(idx: usize) -> (usize, usize, u32) {
    let (mut x, mut z, mut ny) = (0usize, 0usize, 0u32);
    for k in 0..N_DATA {
        match (idx >> (2 * (N_DATA - 1 - k))) & 3 {
            1 => x |= site_bit(k),
            2 => {
                x |= site_bit(k);
                z |= site_bit(k);
                ny += 1;
            }
            3 => z |= site_bit(k),
            _ => {}
        }
    }
    (x, z, ny)
}

impl Model {
    /// Σ_{setting, outcome} (n / p) E as a matrix; the fixed point of
    /// ρ ↦ RρR is the maximum-likelihood state.
    fn r_operator(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let e = expectations(rho);
        let mut coef = [0.0; N_PAULI];
        for (pidx, w, counts) in &self.terms {
            let ev: [f64; DIM] = std::array::from_fn(|t| e[pidx[t]]);
            for o in 0..DIM {
                if counts[o] == 0 {
                    continue;
                }
                let p: f64 = w[o].iter().zip(&ev).map(|(a, b)| a * b).sum();
                let f = counts[o] as f64 / p.max(1e-300);
                for t in 0..DIM {
                    coef[pidx[t]] += f * w[o][t];
                }
            }
        }
        let mut r = DMatrix::<C64>::zeros(DIM, DIM);
        for (idx, &cf) in coef.iter().enumerate() {
            if cf == 0.0 {
                continue;
            }
            let (x, z, ny) = masks(idx);
            let iy = C64::new(0.0, 1.0).powu(ny) * cf;
            for i in 0..DIM {
                let sign = if (i & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                r[(i ^ x, i)] += iy * sign;
            }
        }
        r
    }

    /// Iterates ρ ↦ RρR / tr(RρR) until the likelihood stalls.
    fn maximize(&self, start: DMatrix<C64>, max_iter: usize) -> DMatrix<C64> {
        let mut rho = start;
        let mut ll = self.log_likelihood(&rho);
        for _ in 0..max_iter {
            let r = self.r_operator(&rho);
            let next = &r * &rho * &r;
            let t = next.trace().re;
            let next = next / C64::new(t, 0.0);
            let next_ll = self.log_likelihood(&next);
            if !(next_ll > ll) {
                break;
            }
            let done = next_ll - ll < 1e-10 * ll.abs().max(1.0);
            rho = next;
            ll = next_ll;
            if done {
                break;
            }
        }
        rho
    }
}

/// Multinomial log-likelihood of the dataset under `rho`, with the readout
/// confusion folded in.
pub fn log_likelihood(rho: &DMatrix<C64>, data: &TomoDataset, readout: &Readout) -> Result<f64> {
    Ok(Model::new(data, readout)?.log_likelihood(rho))
}

fn hermitian_eigen(rho: &DMatrix<C64>) -> SymmetricEigen<C64, nalgebra::Dyn> {
    let h = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(h)
}

/// Clips negative eigenvalues and renormalizes.
fn psd_projection(rho: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = hermitian_eigen(rho);
    let vals = eig.eigenvalues.map(|v| v.max(0.0));
    let total: f64 = vals.iter().sum();
    let d = DMatrix::from_diagonal(&vals.map(|v| C64::new(v / total, 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Linear-inversion estimate from readout-corrected Pauli averages, projected
/// to the nearest PSD unit-trace matrix by eigenvalue clipping.
pub fn linear_inversion(data: &TomoDataset, readout: &Readout) -> Result<DMatrix<C64>> {
    data.validate()?;
    let scale = 1.0 - readout.eps0 - readout.eps1;
    let bias = readout.eps1 - readout.eps0;
    let f = |bit: usize| ((if bit == 0 { 1.0 } else { -1.0 }) - bias) / scale;
    let mut sums = [0.0; N_PAULI];
    let mut norms = [0.0; N_PAULI];
    for (s, counts) in data.entries() {
        let n: u64 = counts.iter().sum();
        if n == 0 {
            continue;
        }
        for t in 1..DIM {
            let mut pidx = 0;
            for k in 0..N_DATA {
                if t & site_bit(k) != 0 {
                    pidx += code(s.0[k]) << (2 * (N_DATA - 1 - k));
                }
            }
            let mut acc = 0.0;
            for (o, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let v: f64 = (0..N_DATA).filter(|&k| t & site_bit(k) != 0).map(|k| f(usize::from(o & site_bit(k) != 0))).product();
                acc += c as f64 * v;
            }
            sums[pidx] += acc;
            norms[pidx] += n as f64;
        }
    }
    let mut rho = DMatrix::<C64>::identity(DIM, DIM) / C64::new(DIM as f64, 0.0);
    for idx in 1..N_PAULI {
        if norms[idx] == 0.0 {
            continue;
        }
        let ops: [Option<Pauli>; N_DATA] = std::array::from_fn(|k| match (idx >> (2 * (N_DATA - 1 - k))) & 3 {
            1 => Some(Pauli::X),
            2 => Some(Pauli::Y),
            3 => Some(Pauli::Z),
            _ => None,
        });
        rho += pauli_string(ops) * C64::new(sums[idx] / norms[idx] / DIM as f64, 0.0);
    }
    Ok(psd_projection(&rho))
}

#[derive(Clone, Copy, Debug)]
pub struct MhOptions {
    pub n_steps: usize,
    pub burn_in: usize,
    /// Keep every `thin`-th post-burn-in state as a sample.
    pub thin: usize,
    pub seed: u64,
}

impl Default for MhOptions {
    fn default() -> Self {
        MhOptions { n_steps: 40_000, burn_in: 15_000, thin: 25, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct ReconstructedState {
    /// Posterior mean over every post-burn-in step.
    pub mean: DMatrix<C64>,
    pub samples: Vec<DMatrix<C64>>,
    pub max_likelihood: DMatrix<C64>,
    pub max_log_likelihood: f64,
    /// Acceptance rate after burn-in.
    pub acceptance: f64,
    pub step_size: f64,
}

fn density(a: &DMatrix<C64>) -> DMatrix<C64> {
    let rho = a * a.adjoint();
    let t = rho.trace().re;
    rho / C64::new(t, 0.0)
}

fn normalized(a: DMatrix<C64>) -> DMatrix<C64> {
    let n = a.norm();
    a / C64::new(n, 0.0)
}

/// Random walk over A on the unit Frobenius sphere with ρ = AA†/tr(AA†).
/// A uniform point on the sphere gives the Hilbert-Schmidt measure on ρ, so
/// the stationary law is the posterior under that flat prior. The step size
/// is tuned toward 20-40% acceptance during burn-in.
pub fn mh_reconstruct(data: &TomoDataset, readout: &Readout, opts: &MhOptions) -> Result<ReconstructedState> {
    if opts.n_steps <= opts.burn_in || opts.thin == 0 {
        return Err(Error::InvalidArgument(format!("need n_steps > burn_in and thin ≥ 1, got {opts:?}")));
    }
    let model = Model::new(data, readout)?;
    let mut rng = stream(opts.seed, &[0x70]);

    let lin = linear_inversion(data, readout)?;
    let mixed = lin * C64::new(0.99, 0.0) + DMatrix::identity(DIM, DIM) * C64::new(0.01 / DIM as f64, 0.0);
    let start = model.maximize(mixed, ML_ITERATIONS);
    let eig = hermitian_eigen(&start);
    let sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| C64::new(v.max(0.0).sqrt(), 0.0)));
    let mut a = normalized(&eig.eigenvectors * sqrt * eig.eigenvectors.adjoint());
    let mut rho = density(&a);
    let mut ll = model.log_likelihood(&rho);
    if !ll.is_finite() {
        return Err(Error::ZeroLikelihood);
    }

    let mut step = 0.01;
    let mut window_accepts = 0usize;
    let mut accepts = 0usize;
    let mut best = (rho.clone(), ll);
    let mut sum = DMatrix::<C64>::zeros(DIM, DIM);
    let mut samples = Vec::new();
    const WINDOW: usize = 100;

    for i in 0..opts.n_steps {
        let noise = DMatrix::from_fn(DIM, DIM, |_, _| {
            C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        });
        let cand = normalized(&a + noise * C64::new(step, 0.0));
        let cand_rho = density(&cand);
        let cand_ll = model.log_likelihood(&cand_rho);
        let accept = cand_ll.is_finite() && (cand_ll >= ll || rng.random::<f64>().ln() < cand_ll - ll);
        if accept {
            a = cand;
            rho = cand_rho;
            ll = cand_ll;
            if ll > best.1 {
                best = (rho.clone(), ll);
            }
        }
        if i < opts.burn_in {
            window_accepts += usize::from(accept);
            if (i + 1) % WINDOW == 0 {
                let rate = window_accepts as f64 / WINDOW as f64;
                if rate < 0.2 {
                    step *= 0.5 + rate;
                } else if rate > 0.4 {
                    step *= 0.6 + rate;
                }
                window_accepts = 0;
            }
        } else {
            accepts += usize::from(accept);
            sum += &rho;
            if (i - opts.burn_in) % opts.thin == 0 {
                samples.push(rho.clone());
            }
        }
    }
    let kept = (opts.n_steps - opts.burn_in) as f64;
    Ok(ReconstructedState {
        mean: sum / C64::new(kept, 0.0),
        samples,
        max_likelihood: best.0,
        max_log_likelihood: best.1,
        acceptance: accepts as f64 / kept,
        step_size: step,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{logical_bell, settings, synth_dataset, bell_prep};
    use super::*;
    use crate::circuit::Builder;
    use crate::noise::NoiseParams;
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

    fn fidelity(rho: &DMatrix<C64>, psi: &nalgebra::DVector<C64>) -> f64 {
        (psi.adjoint() * rho * psi)[(0, 0)].re
    }

    #[test]
    fn expectations_match_dense_traces() {
        let mut rng = stream(2, &[]);
        let a = DMatrix::from_fn(DIM, DIM, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let rho = density(&a);
        let e = expectations(&rho);
        for idx in [0usize, 1, 6, 27, 100, 201, 255] {
            let ops: [Option<Pauli>; N_DATA] = std::array::from_fn(|k| match (idx >> (2 * (N_DATA - 1 - k))) & 3 {
                1 => Some(Pauli::X),
                2 => Some(Pauli::Y),
                3 => Some(Pauli::Z),
                _ => None,
            });
            let direct = (&rho * pauli_string(ops)).trace().re;
            assert!((direct - e[idx]).abs() < 1e-12, "{idx}");
        }
    }

    #[test]
    fn model_probabilities_are_normalized() {
        let d = synth_dataset(&bell_prep(), None, 10, 0).unwrap();
        let m = Model::new(&d, &Readout { eps0: 0.004, eps1: 0.028 }).unwrap();
        let rho = density(&DMatrix::from_fn(DIM, DIM, |r, c| C64::new((r * c % 7) as f64, (r + c) as f64 * 0.1)));
        let e = expectations(&rho);
        for (pidx, w, _) in &m.terms {
            let total: f64 = (0..DIM).map(|o| (0..DIM).map(|t| w[o][t] * e[pidx[t]]).sum::<f64>()).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn truth_beats_maximally_mixed() {
        let d = synth_dataset(&bell_prep(), None, 300, 4).unwrap();
        let r = Readout::perfect();
        let psi = logical_bell();
        let truth = &psi * psi.adjoint();
        let mixed = DMatrix::<C64>::identity(DIM, DIM) / C64::new(DIM as f64, 0.0);
        assert!(log_likelihood(&truth, &d, &r).unwrap() >= log_likelihood(&mixed, &d, &r).unwrap());
    }

    #[test]
    fn rejects_bad_options_and_empty_data() {
        let d = synth_dataset(&bell_prep(), None, 10, 0).unwrap();
        let r = Readout::perfect();
        assert!(mh_reconstruct(&d, &r, &MhOptions { n_steps: 10, burn_in: 10, ..Default::default() }).is_err());
        let mut empty = d.clone();
        for c in empty.counts.values_mut() {
            *c = [0; 16];
        }
        assert!(mh_reconstruct(&empty, &r, &MhOptions::default()).is_err());
    }

    #[test]
    fn product_state_reconstructs() {
        // |0+0+⟩ up to phases.
        use crate::circuit::{FRAC_PI_2, PI};
        let mut b = Builder::new(4);
        b.gr(FRAC_PI_2, FRAC_PI_2).rz(0, PI).rz(2, PI).gr(FRAC_PI_2, FRAC_PI_2);
        let prep = b.finish();
        let d = synth_dataset(&prep, None, 2000, 9).unwrap();
        let s = mh_reconstruct(&d, &Readout::perfect(), &MhOptions { seed: 1, ..Default::default() }).unwrap();
        let truth = crate::tomography::effective_state(&prep, &NoiseParams::ideal()).unwrap();
        let f = (&truth * &s.mean).trace().re;
        assert!(f >= 0.99, "fidelity {f}, acceptance {}", s.acceptance);
        assert!((0.1..=0.5).contains(&s.acceptance), "{}", s.acceptance);
    }

    #[test]
    fn noiseless_bell_reconstructs() {
        let d = synth_dataset(&bell_prep(), None, 2000, 3).unwrap();
        let s = mh_reconstruct(&d, &Readout::perfect(), &MhOptions { seed: 2, ..Default::default() }).unwrap();
        let ml = fidelity(&s.max_likelihood, &logical_bell());
        assert!(ml >= 0.999, "ml fidelity {ml}");
        // The posterior mean sits lower: with a near-pure truth the prior's
        // volume keeps ~15 small eigenvalues at O(1/shots) each.
        let mean = fidelity(&s.mean, &logical_bell());
        assert!(mean > 0.99 && mean < ml, "mean fidelity {mean}");
    }

    #[test]
    fn settings_cover_dataset() {
        let d = synth_dataset(&bell_prep(), None, 1, 0).unwrap();
        assert_eq!(d.counts.len(), settings().len());
        assert_eq!("XYZX".parse::<super::super::TomoSetting>().unwrap().to_string(), "XYZX");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn parameterization_gives_states(seed in any::<u64>()) {
            let mut rng = stream(seed, &[]);
            let a = DMatrix::from_fn(DIM, DIM, |_, _| C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)));
            let rho = density(&normalized(a));
            prop_assert!((rho.trace().re - 1.0).abs() < 1e-9);
            prop_assert!((&rho - rho.adjoint()).camax() < 1e-12);
            let min = hermitian_eigen(&rho).eigenvalues.min();
            prop_assert!(min > -1e-9);
        }
    }
}
