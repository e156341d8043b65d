//! Dense 5^n density matrices. Exponential in memory, so used directly only for
//! small registers and as a reference for the block engine.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::levels::{lift_qubit_op, KrausChannel, Level, OutcomeTable, Readout, N_LEVELS};
use crate::linalg::{unitarity_defect2, Mat2, C64};
use crate::noise::TransitionMatrix;

use super::Register;

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub n_sites: usize,
    pub data: DMatrix<C64>,
}

/// Full-register index of a per-site level assignment (site 0 most significant).
pub fn level_index(levels: &[Level]) -> usize {
    levels.iter().fold(0, |acc, l| acc * N_LEVELS + l.index())
}

/// Embeds a `5^k` operator acting on `sites` (in that order) into the full
/// `5^n` space.
pub fn embed_operator(op: &DMatrix<C64>, sites: &[usize], n_sites: usize) -> Result<DMatrix<C64>> {
    let k = sites.len();
    let want = N_LEVELS.pow(k as u32);
    if op.nrows() != want || op.ncols() != want {
        return Err(Error::DimensionMismatch { expected: want, got: op.nrows() });
    }
    for (i, &s) in sites.iter().enumerate() {
        if s >= n_sites {
            return Err(Error::SiteOutOfRange { site: s, n_sites });
        }
        if sites[..i].contains(&s) {
            return Err(Error::SameSite(s));
        }
    }
    let dim = N_LEVELS.pow(n_sites as u32);
    let stride = |s: usize| N_LEVELS.pow((n_sites - 1 - s) as u32);
    let local = |full: usize| -> usize {
        sites.iter().fold(0, |acc, &s| acc * N_LEVELS + (full / stride(s)) % N_LEVELS)
    };
    let clear = |full: usize| -> usize {
        sites.iter().fold(full, |acc, &s| acc - ((full / stride(s)) % N_LEVELS) * stride(s))
    };
    let with_local = |base: usize, mut loc: usize| -> usize {
        let mut out = base;
        for &s in sites.iter().rev() {
            out += (loc % N_LEVELS) * stride(s);
            loc /= N_LEVELS;
        }
        out
    };
    let mut full = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let base = clear(col);
        let lc = local(col);
        for lr in 0..want {
            let v = op[(lr, lc)];
            if v != C64::new(0.0, 0.0) {
                full[(with_local(base, lr), col)] = v;
            }
        }
    }
    Ok(full)
}

/// Single-qubit unitary on one site, identity on that site's leak and lost
/// levels and on every other site.
pub fn embed_single_qubit(u: &Mat2, site: usize, n_sites: usize) -> Result<DMatrix<C64>> {
    let defect = unitarity_defect2(u);
    if defect > 1e-12 {
        return Err(Error::NotUnitary(defect));
    }
    embed_operator(&lift_qubit_op(u), &[site], n_sites)
}

impl DensityMatrix {
    pub fn from_levels(levels: &[Level]) -> Self {
        let n = levels.len();
        let dim = N_LEVELS.pow(n as u32);
        let mut data = DMatrix::zeros(dim, dim);
        let i = level_index(levels);
        data[(i, i)] = C64::new(1.0, 0.0);
        DensityMatrix { n_sites: n, data }
    }

    pub fn from_pure(n_sites: usize, amps: &DVector<C64>) -> Self {
        DensityMatrix { n_sites, data: amps * amps.adjoint() }
    }

    /// Product of per-site diagonal states.
    pub fn product_diagonal(pops: &[[f64; N_LEVELS]]) -> Self {
        let n = pops.len();
        let dim = N_LEVELS.pow(n as u32);
        let mut data = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            let mut w = 1.0;
            let mut rem = i;
            for site in (0..n).rev() {
                w *= pops[site][rem % N_LEVELS];
                rem /= N_LEVELS;
            }
            data[(i, i)] = C64::new(w, 0.0);
        }
        DensityMatrix { n_sites: n, data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.data - self.data.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.data + self.data.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn apply_operator(&mut self, u: &DMatrix<C64>) {
        self.data = u * &self.data * u.adjoint();
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(Error::SameSite(a));
        }
        for s in [a, b] {
            if s >= self.n_sites {
                return Err(Error::SiteOutOfRange { site: s, n_sites: self.n_sites });
            }
        }
        let n = self.n_sites;
        let dim = self.dim();
        let level = |i: usize, s: usize| (i / N_LEVELS.pow((n - 1 - s) as u32)) % N_LEVELS;
        let sign: Vec<f64> = (0..dim)
            .map(|i| if level(i, a) == 1 && level(i, b) == 1 { -1.0 } else { 1.0 })
            .collect();
        for r in 0..dim {
            for c in 0..dim {
                self.data[(r, c)] *= sign[r] * sign[c];
            }
        }
        Ok(())
    }

    /// Diagonal of ρ indexed by level assignment.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.data[(i, i)].re).collect()
    }

    pub fn measure_terminal(&self, readout: &Readout) -> OutcomeTable {
        OutcomeTable::from_populations(self.n_sites, &self.populations(), readout)
    }
}

/// ρ' = Σ K ρ K† with the channel acting on `sites`.
pub fn apply_channel(rho: &DensityMatrix, ch: &KrausChannel, sites: &[usize]) -> Result<DensityMatrix> {
    let mut out = DMatrix::zeros(rho.dim(), rho.dim());
    for k in &ch.operators {
        let full = embed_operator(k, sites, rho.n_sites)?;
        out += &full * &rho.data * full.adjoint();
    }
    Ok(DensityMatrix { n_sites: rho.n_sites, data: out })
}

impl Register for DensityMatrix {
    fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn unitary(&mut self, site: usize, u: &Mat2) {
        let full = embed_single_qubit(u, site, self.n_sites).expect("valid single-qubit gate");
        self.apply_operator(&full);
    }

    fn cz(&mut self, a: usize, b: usize) {
        self.apply_cz(a, b).expect("valid CZ");
    }

    fn phase_flip(&mut self, site: usize, p: f64) {
        *self = apply_channel(self, &KrausChannel::phase_flip(p), &[site]).expect("valid site");
    }

    fn transitions(&mut self, site: usize, m: &TransitionMatrix) {
        let ch = KrausChannel::from_transitions(m).expect("valid transition matrix");
        *self = apply_channel(self, &ch, &[site]).expect("valid site");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hadamard, identity2, Pauli};

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_embeds_to_identity() {
        for n in 1..=3 {
            for s in 0..n {
                let e = embed_single_qubit(&identity2(), s, n).unwrap();
                let dim = 5usize.pow(n as u32);
                assert!(max_diff(&e, &DMatrix::identity(dim, dim)) < 1e-15);
            }
        }
    }

    #[test]
    fn pauli_x_permutes_qubit_levels_only() {
        let e = embed_single_qubit(&Pauli::X.matrix(), 0, 1).unwrap();
        let one = C64::new(1.0, 0.0);
        assert_eq!(e[(1, 0)], one);
        assert_eq!(e[(0, 1)], one);
        for l in 2..5 {
            assert_eq!(e[(l, l)], one);
        }
    }

    #[test]
    fn hadamard_squared_is_identity() {
        let e = embed_single_qubit(&hadamard(), 1, 2).unwrap();
        assert!(max_diff(&(&e * &e), &DMatrix::identity(25, 25)) < 1e-12);
    }

    #[test]
    fn embed_rejects_bad_sites() {
        assert!(embed_single_qubit(&identity2(), 2, 2).is_err());
        let op = DMatrix::identity(25, 25);
        assert!(embed_operator(&op, &[1, 1], 2).is_err());
    }

    #[test]
    fn cz_phases() {
        let mut rho = DensityMatrix::from_levels(&[Level::Q1, Level::Q1]);
        let before = rho.data.clone();
        rho.apply_cz(0, 1).unwrap();
        assert!(max_diff(&rho.data, &before) < 1e-15);
        assert!(rho.apply_cz(1, 1).is_err());
        // Phase shows up on coherences between |11⟩ and anything else.
        let mut amps = DVector::zeros(25);
        amps[level_index(&[Level::Q1, Level::Q1])] = C64::new(0.6, 0.0);
        amps[level_index(&[Level::Q1, Level::Leak1])] = C64::new(0.8, 0.0);
        let mut rho = DensityMatrix::from_pure(2, &amps);
        rho.apply_cz(0, 1).unwrap();
        let i = level_index(&[Level::Q1, Level::Q1]);
        let j = level_index(&[Level::Q1, Level::Leak1]);
        assert!((rho.data[(i, j)] + C64::new(0.48, 0.0)).norm() < 1e-15);
        assert!((rho.data[(j, j)] - C64::new(0.64, 0.0)).norm() < 1e-15);
        rho.apply_cz(0, 1).unwrap();
        assert!((rho.data[(i, j)] - C64::new(0.48, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn identity_channel_and_full_dephasing() {
        let mut amps = DVector::zeros(5);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        amps[0] = C64::new(s, 0.0);
        amps[1] = C64::new(s, 0.0);
        let rho = DensityMatrix::from_pure(1, &amps);
        let same = apply_channel(&rho, &KrausChannel::identity(5), &[0]).unwrap();
        assert!(max_diff(&same.data, &rho.data) < 1e-15);
        let deph = apply_channel(&rho, &KrausChannel::phase_flip(0.5), &[0]).unwrap();
        assert!(deph.data[(0, 1)].norm() < 1e-15);
        assert!((deph.data[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(apply_channel(&rho, &KrausChannel::identity(25), &[0]).is_err());
    }

    #[test]
    fn measure_sums_to_one() {
        let pops = [[0.1, 0.2, 0.3, 0.25, 0.15], [0.0, 0.5, 0.5, 0.0, 0.0]];
        let rho = DensityMatrix::product_diagonal(&pops);
        let t = rho.measure_terminal(&Readout { eps0: 0.004, eps1: 0.028 });
        assert!((t.total() - 1.0).abs() < 1e-12);
    }
}
