//! Monte Carlo trajectories. Each trajectory holds a sector configuration plus
//! a state vector over the atoms currently in qubit levels; noise channels are
//! unravelled into randomly selected Kraus branches.

use nalgebra::DVector;
use rand::Rng;

use crate::levels::{Level, Outcome, Readout, ShotRecord, N_LEVELS};
use crate::linalg::{Mat2, C64};
use crate::noise::TransitionMatrix;

use super::blocks::{insert_bit, level_of_sector, qubit_bit, qubit_count, sector, sector_of, with_sector, QUBIT};
use super::Register;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Debug)]
pub struct PureState {
    n_sites: usize,
    key: u32,
    amps: Vec<C64>,
}

impl PureState {
    pub fn from_levels(levels: &[Level]) -> Self {
        let n = levels.len();
        let mut key = 0;
        let mut idx = 0usize;
        for (s, l) in levels.iter().enumerate() {
            let sec = sector_of(l.index());
            key = with_sector(key, s, sec);
            if sec == QUBIT {
                idx = (idx << 1) | l.index();
            }
        }
        let m = qubit_count(key, n);
        let mut amps = vec![ZERO; 1 << m];
        amps[idx] = C64::new(1.0, 0.0);
        PureState { n_sites: n, key, amps }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn level_of(&self, site: usize) -> Option<Level> {
        let s = sector(self.key, site);
        (s != QUBIT).then(|| Level::from_index(level_of_sector(s)))
    }

    /// Full 5^n amplitude vector (site 0 most significant).
    pub fn to_dense(&self) -> DVector<C64> {
        let n = self.n_sites;
        let dim = N_LEVELS.pow(n as u32);
        let stride = |s: usize| N_LEVELS.pow((n - 1 - s) as u32);
        let mut base = 0;
        let mut strides = Vec::new();
        for s in 0..n {
            let sec = sector(self.key, s);
            if sec == QUBIT {
                strides.push(stride(s));
            } else {
                base += level_of_sector(sec) * stride(s);
            }
        }
        let m = strides.len();
        let mut out = DVector::zeros(dim);
        for (x, a) in self.amps.iter().enumerate() {
            let idx = strides
                .iter()
                .enumerate()
                .fold(base, |acc, (j, st)| acc + ((x >> (m - 1 - j)) & 1) * st);
            out[idx] = *a;
        }
        out
    }

    /// Qubit amplitudes when every atom is in a qubit level.
    pub fn qubit_amplitudes(&self) -> Option<&[C64]> {
        (self.key == 0).then_some(&self.amps[..])
    }

    fn renormalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    /// Projective level measurement of every atom.
    pub fn sample_levels<R: Rng>(&self, rng: &mut R) -> Vec<Level> {
        let u: f64 = rng.random::<f64>() * self.norm().powi(2);
        let mut acc = 0.0;
        let mut pick = self.amps.len() - 1;
        for (x, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr();
            if u < acc {
                pick = x;
                break;
            }
        }
        let m = qubit_count(self.key, self.n_sites);
        let mut j = 0;
        (0..self.n_sites)
            .map(|s| {
                let sec = sector(self.key, s);
                if sec == QUBIT {
                    j += 1;
                    Level::from_index((pick >> (m - j)) & 1)
                } else {
                    Level::from_index(level_of_sector(sec))
                }
            })
            .collect()
    }

    /// Samples levels, then misclassifies each atom according to `readout`.
    pub fn sample_record<R: Rng>(&self, readout: &Readout, rng: &mut R) -> ShotRecord {
        let povm = readout.povm();
        let outcomes = self
            .sample_levels(rng)
            .into_iter()
            .map(|l| {
                let i = l.index();
                if l == Level::Lost {
                    Outcome::Lost
                } else if rng.random::<f64>() < povm[0][i] {
                    Outcome::Dark
                } else {
                    Outcome::Bright
                }
            })
            .collect();
        ShotRecord { outcomes }
    }

    fn bit_weights(&self, b: usize) -> [f64; 2] {
        let mut w = [0.0; 2];
        for (x, a) in self.amps.iter().enumerate() {
            w[(x >> b) & 1] += a.norm_sqr();
        }
        w
    }

    fn unitary_inner(&mut self, site: usize, u: &Mat2) {
        if sector(self.key, site) != QUBIT {
            return;
        }
        let (_, b) = qubit_bit(self.key, self.n_sites, site);
        let mask = 1 << b;
        for x0 in (0..self.amps.len()).filter(|x| x & mask == 0) {
            let x1 = x0 | mask;
            let (a0, a1) = (self.amps[x0], self.amps[x1]);
            self.amps[x0] = u[0][0] * a0 + u[0][1] * a1;
            self.amps[x1] = u[1][0] * a0 + u[1][1] * a1;
        }
    }

    fn cz_inner(&mut self, a: usize, c: usize) {
        if sector(self.key, a) != QUBIT || sector(self.key, c) != QUBIT {
            return;
        }
        let (_, ba) = qubit_bit(self.key, self.n_sites, a);
        let (_, bc) = qubit_bit(self.key, self.n_sites, c);
        let both = (1 << ba) | (1 << bc);
        for (x, amp) in self.amps.iter_mut().enumerate() {
            if x & both == both {
                *amp = -*amp;
            }
        }
    }

    /// Moves a qubit atom fixed at bit value `s` into leaked/lost level `dst`.
    fn leave_qubit(&mut self, site: usize, s: usize, dst: usize) {
        let (_, b) = qubit_bit(self.key, self.n_sites, site);
        let h = self.amps.len() / 2;
        self.amps = (0..h).map(|x| self.amps[insert_bit(x, b, s)]).collect();
        self.key = with_sector(self.key, site, sector_of(dst));
    }

    fn enter_qubit(&mut self, site: usize, v: usize) {
        self.key = with_sector(self.key, site, QUBIT);
        let (_, b) = qubit_bit(self.key, self.n_sites, site);
        let h = self.amps.len();
        let mut amps = vec![ZERO; 2 * h];
        for (x, a) in self.amps.iter().enumerate() {
            amps[insert_bit(x, b, v)] = *a;
        }
        self.amps = amps;
    }

    /// Unravels the transition channel on one atom using `u ∈ [0,1)`.
    pub fn transitions_with(&mut self, site: usize, m: &TransitionMatrix, u: f64) {
        let out_sum: Vec<f64> = (0..N_LEVELS).map(|s| (0..N_LEVELS).map(|d| m[d][s]).sum()).collect();
        let sec = sector(self.key, site);
        if sec != QUBIT {
            let src = level_of_sector(sec);
            let mut acc = 0.0;
            for (dst, row) in m.iter().enumerate() {
                acc += row[src];
                if u < acc {
                    match dst {
                        0 | 1 => self.enter_qubit(site, dst),
                        _ => self.key = with_sector(self.key, site, sector_of(dst)),
                    }
                    return;
                }
            }
            return;
        }
        let (_, b) = qubit_bit(self.key, self.n_sites, site);
        let w = self.bit_weights(b);
        let mut acc = 0.0;
        for s in 0..2 {
            for (dst, row) in m.iter().enumerate() {
                acc += row[s] * w[s];
                if u < acc {
                    if dst < 2 {
                        let mask = 1 << b;
                        let mut amps = vec![ZERO; self.amps.len()];
                        for (x, a) in self.amps.iter().enumerate() {
                            if (x >> b) & 1 == s {
                                amps[(x & !mask) | (dst << b)] = *a;
                            }
                        }
                        self.amps = amps;
                    } else {
                        self.leave_qubit(site, s, dst);
                    }
                    self.renormalize();
                    return;
                }
            }
        }
        let keep = [(1.0 - out_sum[0]).max(0.0).sqrt(), (1.0 - out_sum[1]).max(0.0).sqrt()];
        for (x, a) in self.amps.iter_mut().enumerate() {
            *a *= keep[(x >> b) & 1];
        }
        self.renormalize();
    }
}

/// A trajectory bound to the random stream that drives its branch choices.
pub struct Trajectory<'a, R: Rng> {
    pub state: PureState,
    pub rng: &'a mut R,
}

impl<R: Rng> Register for Trajectory<'_, R> {
    fn n_sites(&self) -> usize {
        self.state.n_sites
    }

    fn unitary(&mut self, site: usize, u: &Mat2) {
        self.state.unitary_inner(site, u);
    }

    fn cz(&mut self, a: usize, b: usize) {
        assert_ne!(a, b, "CZ needs distinct sites");
        self.state.cz_inner(a, b);
    }

    fn phase_flip(&mut self, site: usize, p: f64) {
        if self.rng.random::<f64>() < p {
            self.state.unitary_inner(site, &crate::linalg::Pauli::Z.matrix());
        }
    }

    fn transitions(&mut self, site: usize, m: &TransitionMatrix) {
        let u = self.rng.random::<f64>();
        self.state.transitions_with(site, m, u);
    }
}

/// Noiseless register without randomness, for error-insertion sweeps.
impl Register for PureState {
    fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn unitary(&mut self, site: usize, u: &Mat2) {
        self.unitary_inner(site, u);
    }

    fn cz(&mut self, a: usize, b: usize) {
        assert_ne!(a, b, "CZ needs distinct sites");
        self.cz_inner(a, b);
    }

    fn phase_flip(&mut self, _site: usize, p: f64) {
        assert!(p == 0.0, "a bare pure state cannot carry a mixed channel");
    }

    fn transitions(&mut self, _site: usize, m: &TransitionMatrix) {
        assert!(
            m.iter().flatten().all(|&v| v == 0.0),
            "a bare pure state cannot carry a mixed channel"
        );
    }
}
