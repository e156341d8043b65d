//! Exact mixed-state engine exploiting the sector structure of the noise model.
//!
//! Gates act only on the qubit levels and every noise process either keeps an
//! atom's sector or moves it incoherently. The state therefore stays a direct
//! sum over sector configurations (each atom: qubit, leak0, leak1 or lost), and
//! each configuration carries a density matrix over its qubit atoms only.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::levels::N_LEVELS;
use crate::linalg::{Mat2, C64};
use crate::noise::TransitionMatrix;

use super::Register;

pub(crate) const QUBIT: u32 = 0;
const ZERO: C64 = C64::new(0.0, 0.0);

/// Sector code of a level: 0 for either qubit level, otherwise 1..=3.
pub(crate) fn sector_of(level: usize) -> u32 {
    if level < 2 {
        QUBIT
    } else {
        (level - 1) as u32
    }
}

pub(crate) fn level_of_sector(sector: u32) -> usize {
    debug_assert!(sector != QUBIT);
    sector as usize + 1
}

pub(crate) fn sector(key: u32, site: usize) -> u32 {
    (key >> (2 * site)) & 3
}

pub(crate) fn with_sector(key: u32, site: usize, s: u32) -> u32 {
    (key & !(3 << (2 * site))) | (s << (2 * site))
}

/// Bit of `site` inside a qubit index for `key`, with the lowest-numbered
/// qubit atom as the most significant bit. Also returns the qubit count.
pub(crate) fn qubit_bit(key: u32, n_sites: usize, site: usize) -> (usize, usize) {
    let m = (0..n_sites).filter(|&s| sector(key, s) == QUBIT).count();
    let pos = (0..site).filter(|&s| sector(key, s) == QUBIT).count();
    (m, m - 1 - pos)
}

pub(crate) fn qubit_count(key: u32, n_sites: usize) -> usize {
    (0..n_sites).filter(|&s| sector(key, s) == QUBIT).count()
}

/// Inserts bit value `v` at position `b`.
#[inline]
pub(crate) fn insert_bit(x: usize, b: usize, v: usize) -> usize {
    ((x >> b) << (b + 1)) | (v << b) | (x & ((1 << b) - 1))
}

/// Accumulates `w * rho` into `target[key]`.
fn accumulate(target: &mut BTreeMap<u32, Vec<C64>>, key: u32, rho: &[C64], w: f64) {
    let slot = target.entry(key).or_insert_with(|| vec![ZERO; rho.len()]);
    for (t, v) in slot.iter_mut().zip(rho) {
        *t += v * w;
    }
}

#[derive(Clone, Debug)]
pub struct BlockState {
    n_sites: usize,
    blocks: BTreeMap<u32, Vec<C64>>,
}

impl BlockState {
    /// Product of per-site diagonal states.
    pub fn product_diagonal(pops: &[[f64; N_LEVELS]]) -> Self {
        let n = pops.len();
        let mut blocks = BTreeMap::new();
        for key in 0..(1u32 << (2 * n)) {
            let mut weight = 1.0;
            let mut qubit_diag: Vec<f64> = vec![1.0];
            for (site, p) in pops.iter().enumerate() {
                let s = sector(key, site);
                if s == QUBIT {
                    let mut next = Vec::with_capacity(qubit_diag.len() * 2);
                    for &d in &qubit_diag {
                        next.push(d * p[0]);
                        next.push(d * p[1]);
                    }
                    qubit_diag = next;
                } else {
                    weight *= p[level_of_sector(s)];
                }
            }
            if weight == 0.0 || qubit_diag.iter().all(|&d| d == 0.0) {
                continue;
            }
            let d = qubit_diag.len();
            let mut data = vec![ZERO; d * d];
            for (i, &v) in qubit_diag.iter().enumerate() {
                data[i * d + i] = C64::new(weight * v, 0.0);
            }
            blocks.insert(key, data);
        }
        BlockState { n_sites: n, blocks }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn trace(&self) -> f64 {
        self.blocks
            .values()
            .map(|b| {
                let d = (b.len() as f64).sqrt() as usize;
                (0..d).map(|i| b[i * d + i].re).sum::<f64>()
            })
            .sum()
    }

    /// Qubit-subspace block (every atom in a qubit level), unnormalized.
    pub fn qubit_block(&self) -> DMatrix<C64> {
        let d = 1usize << self.n_sites;
        match self.blocks.get(&0) {
            Some(b) => DMatrix::from_row_slice(d, d, b),
            None => DMatrix::zeros(d, d),
        }
    }

    fn full_index_parts(&self, key: u32) -> (usize, Vec<usize>) {
        let n = self.n_sites;
        let stride = |s: usize| N_LEVELS.pow((n - 1 - s) as u32);
        let mut base = 0;
        let mut qubit_strides = Vec::new();
        for s in 0..n {
            let sec = sector(key, s);
            if sec == QUBIT {
                qubit_strides.push(stride(s));
            } else {
                base += level_of_sector(sec) * stride(s);
            }
        }
        (base, qubit_strides)
    }

    fn full_index(base: usize, strides: &[usize], x: usize) -> usize {
        let m = strides.len();
        strides
            .iter()
            .enumerate()
            .fold(base, |acc, (j, st)| acc + ((x >> (m - 1 - j)) & 1) * st)
    }

    /// Level populations, indexed base 5 with site 0 most significant.
    pub fn populations(&self) -> Vec<f64> {
        let mut out = vec![0.0; N_LEVELS.pow(self.n_sites as u32)];
        for (&key, b) in &self.blocks {
            let (base, strides) = self.full_index_parts(key);
            let d = 1usize << strides.len();
            for x in 0..d {
                out[Self::full_index(base, &strides, x)] += b[x * d + x].re;
            }
        }
        out
    }

    /// Materializes the full 5^n density matrix.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let dim = N_LEVELS.pow(self.n_sites as u32);
        let mut out = DMatrix::zeros(dim, dim);
        for (&key, b) in &self.blocks {
            let (base, strides) = self.full_index_parts(key);
            let d = 1usize << strides.len();
            for r in 0..d {
                let fr = Self::full_index(base, &strides, r);
                for c in 0..d {
                    out[(fr, Self::full_index(base, &strides, c))] = b[r * d + c];
                }
            }
        }
        out
    }

    fn for_qubit_blocks(&mut self, site: usize, mut f: impl FnMut(&mut [C64], usize, usize)) {
        let n = self.n_sites;
        for (&key, b) in self.blocks.iter_mut() {
            if sector(key, site) != QUBIT {
                continue;
            }
            let (m, bit) = qubit_bit(key, n, site);
            f(b, 1 << m, bit);
        }
    }
}

fn apply_1q(rho: &mut [C64], d: usize, b: usize, u: &Mat2) {
    let mask = 1 << b;
    for c in 0..d {
        for r0 in (0..d).filter(|r| r & mask == 0) {
            let r1 = r0 | mask;
            let (x0, x1) = (rho[r0 * d + c], rho[r1 * d + c]);
            rho[r0 * d + c] = u[0][0] * x0 + u[0][1] * x1;
            rho[r1 * d + c] = u[1][0] * x0 + u[1][1] * x1;
        }
    }
    let uc = [[u[0][0].conj(), u[0][1].conj()], [u[1][0].conj(), u[1][1].conj()]];
    for r in 0..d {
        let row = &mut rho[r * d..(r + 1) * d];
        for c0 in (0..d).filter(|c| c & mask == 0) {
            let c1 = c0 | mask;
            let (y0, y1) = (row[c0], row[c1]);
            row[c0] = y0 * uc[0][0] + y1 * uc[0][1];
            row[c1] = y0 * uc[1][0] + y1 * uc[1][1];
        }
    }
}

/// Sub-block with bit `b` fixed to `v` in both rows and columns.
fn extract(rho: &[C64], d: usize, b: usize, v: usize) -> Vec<C64> {
    let h = d / 2;
    let mut out = vec![ZERO; h * h];
    for r in 0..h {
        let fr = insert_bit(r, b, v);
        for c in 0..h {
            out[r * h + c] = rho[fr * d + insert_bit(c, b, v)];
        }
    }
    out
}

/// `rho ⊗ |v⟩⟨v|` with the new qubit at bit `b`, scaled by `w`, accumulated.
fn insert_into(target: &mut [C64], rho: &[C64], h: usize, b: usize, v: usize, w: f64) {
    let d = 2 * h;
    for r in 0..h {
        let fr = insert_bit(r, b, v);
        for c in 0..h {
            target[fr * d + insert_bit(c, b, v)] += rho[r * h + c] * w;
        }
    }
}

impl Register for BlockState {
    fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn unitary(&mut self, site: usize, u: &Mat2) {
        self.for_qubit_blocks(site, |rho, d, b| apply_1q(rho, d, b, u));
    }

    fn cz(&mut self, a: usize, c: usize) {
        assert_ne!(a, c, "CZ needs distinct sites");
        let n = self.n_sites;
        for (&key, rho) in self.blocks.iter_mut() {
            if sector(key, a) != QUBIT || sector(key, c) != QUBIT {
                continue;
            }
            let (_, ba) = qubit_bit(key, n, a);
            let (m, bc) = qubit_bit(key, n, c);
            let d = 1usize << m;
            let both = (1 << ba) | (1 << bc);
            for r in 0..d {
                let sr = r & both == both;
                for col in 0..d {
                    if sr != (col & both == both) {
                        rho[r * d + col] = -rho[r * d + col];
                    }
                }
            }
        }
    }

    fn phase_flip(&mut self, site: usize, p: f64) {
        let f = 1.0 - 2.0 * p;
        self.for_qubit_blocks(site, |rho, d, b| {
            let mask = 1 << b;
            for r in 0..d {
                for c in 0..d {
                    if (r ^ c) & mask != 0 {
                        rho[r * d + c] *= f;
                    }
                }
            }
        });
    }

    fn transitions(&mut self, site: usize, m: &TransitionMatrix) {
        let n = self.n_sites;
        let out_sum: Vec<f64> = (0..N_LEVELS).map(|s| (0..N_LEVELS).map(|d| m[d][s]).sum()).collect();
        let mut next: BTreeMap<u32, Vec<C64>> = BTreeMap::new();
        let blocks = std::mem::take(&mut self.blocks);
        for (key, rho) in blocks {
            let sec = sector(key, site);
            if sec == QUBIT {
                let (mq, b) = qubit_bit(key, n, site);
                let d = 1usize << mq;
                let mask = 1 << b;
                let keep = [(1.0 - out_sum[0]).max(0.0).sqrt(), (1.0 - out_sum[1]).max(0.0).sqrt()];
                let mut same = rho.clone();
                for r in 0..d {
                    for c in 0..d {
                        same[r * d + c] *= keep[(r & mask) >> b] * keep[(c & mask) >> b];
                    }
                }
                let halves = [extract(&rho, d, b, 0), extract(&rho, d, b, 1)];
                for (s, half) in halves.iter().enumerate() {
                    for dst in 0..2 {
                        let w = m[dst][s];
                        if w > 0.0 {
                            insert_into(&mut same, half, d / 2, b, dst, w);
                        }
                    }
                    for dst in 2..N_LEVELS {
                        let w = m[dst][s];
                        if w > 0.0 {
                            accumulate(&mut next, with_sector(key, site, sector_of(dst)), half, w);
                        }
                    }
                }
                accumulate(&mut next, key, &same, 1.0);
            } else {
                let src = level_of_sector(sec);
                let stay = 1.0 - out_sum[src] + m[src][src];
                if stay > 0.0 {
                    accumulate(&mut next, key, &rho, stay);
                }
                for dst in 2..N_LEVELS {
                    let w = m[dst][src];
                    if dst != src && w > 0.0 {
                        accumulate(&mut next, with_sector(key, site, sector_of(dst)), &rho, w);
                    }
                }
                let new_key = with_sector(key, site, QUBIT);
                let (mq, b) = qubit_bit(new_key, n, site);
                let h = 1usize << (mq - 1);
                for dst in 0..2 {
                    let w = m[dst][src];
                    if w > 0.0 {
                        let slot = next.entry(new_key).or_insert_with(|| vec![ZERO; 4 * h * h]);
                        insert_into(slot, &rho, h, b, dst, w);
                    }
                }
            }
        }
        self.blocks = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gr_matrix, hadamard, rz_matrix};
    use crate::noise::NoiseParams;
    use crate::sim::dense::DensityMatrix;

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn both(pops: &[[f64; 5]]) -> (BlockState, DensityMatrix) {
        (BlockState::product_diagonal(pops), DensityMatrix::product_diagonal(pops))
    }

    #[test]
    fn insert_bit_places_value() {
        assert_eq!(insert_bit(0b11, 1, 0), 0b101);
        assert_eq!(insert_bit(0b11, 0, 0), 0b110);
        assert_eq!(insert_bit(0b00, 2, 1), 0b100);
    }

    #[test]
    fn product_state_matches_dense() {
        let pops = [[0.1, 0.5, 0.1, 0.3, 0.0], [0.2, 0.2, 0.2, 0.2, 0.2]];
        let (b, d) = both(&pops);
        assert!(max_diff(&b.to_dense(), &d.data) < 1e-15);
        assert!((b.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gate_and_noise_sequence_matches_dense() {
        let noise = NoiseParams::default();
        let mut heavy = noise.cz_transition_matrix;
        for row in heavy.iter_mut() {
            for v in row.iter_mut() {
                *v *= 40.0;
            }
        }
        let pops = [[0.05, 0.8, 0.05, 0.1, 0.0], [0.3, 0.6, 0.0, 0.1, 0.0], [0.0, 1.0, 0.0, 0.0, 0.0]];
        let (mut b, mut d) = both(&pops);
        let ops: Vec<Box<dyn Fn(&mut dyn Register)>> = vec![
            Box::new(|r| r.unitary(0, &gr_matrix(1.1, 0.3))),
            Box::new(|r| r.unitary(1, &hadamard())),
            Box::new(|r| r.unitary(2, &gr_matrix(0.7, -1.0))),
            Box::new(|r| r.cz(0, 2)),
            Box::new(|r| r.phase_flip(2, 0.2)),
            Box::new(move |r| r.transitions(0, &heavy)),
            Box::new(|r| r.unitary(0, &rz_matrix(0.4))),
            Box::new(move |r| r.transitions(2, &heavy)),
            Box::new(|r| r.cz(1, 0)),
            Box::new(|r| r.unitary(1, &gr_matrix(2.0, 0.9))),
            Box::new(move |r| r.transitions(1, &heavy)),
            Box::new(|r| r.unitary(2, &gr_matrix(-0.6, 0.2))),
        ];
        for op in &ops {
            op(&mut b);
            op(&mut d);
            assert!(max_diff(&b.to_dense(), &d.data) < 1e-13);
        }
        assert!((b.trace() - 1.0).abs() < 1e-12);
        let pops_b = b.populations();
        let pops_d = d.populations();
        for (x, y) in pops_b.iter().zip(&pops_d) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}
