//! Single-impurity Anderson model at half filling: the two-qubit reduced
//! Hamiltonian, a two-angle variational ansatz on |φ+⟩, and its encoded and
//! unencoded circuits.

mod circuits;
mod estimate;

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, Vector2, Vector4};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};

pub use circuits::{build_encoded, build_physical, encoded_layout, encoded_sections, ideal_distribution, EncodedSections};
pub use estimate::{
    circuit_tvds, estimate_energy, geometric_mean, run_grid, CircuitTvd, EnergyResult, GridOptions, GridRow, GridSummary,
};

/// The experiment grid.
pub const GRID_U: [f64; 3] = [1.0, 5.0, 9.0];
pub const GRID_V: [f64; 3] = [-9.0, -1.0, 7.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiamParams {
    pub u: f64,
    pub v: f64,
}

impl SiamParams {
    pub fn new(u: f64, v: f64) -> Self {
        SiamParams { u, v }
    }

    pub fn grid() -> Vec<SiamParams> {
        GRID_U.iter().flat_map(|&u| GRID_V.iter().map(move |&v| SiamParams { u, v })).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzAngles {
    pub alpha: f64,
    pub beta: f64,
}

/// Reduces an angle mod 2π into (−π, π]. Small magnitudes keep the relative
/// RZ over-rotation small and make ±β mirror images under noise.
pub fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

impl AnsatzAngles {
    pub fn new(alpha: f64, beta: f64) -> Self {
        AnsatzAngles { alpha: reduce_angle(alpha), beta: reduce_angle(beta) }
    }
}

#[derive(Clone, Copy)]
enum P {
    X,
    Z,
}

/// Real Pauli string on `n` qubits, qubit k on bit k of the basis index.
fn pauli_string(n: usize, ops: &[(usize, P)]) -> DMatrix<f64> {
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut row = col;
        let mut sign = 1.0;
        for &(q, p) in ops {
            match p {
                P::X => row ^= 1 << q,
                P::Z => {
                    if (col >> q) & 1 == 1 {
                        sign = -sign;
                    }
                }
            }
        }
        m[(row, col)] = sign;
    }
    m
}

/// Bravyi-Kitaev form on orbitals (I↑, B↑, I↓, B↓) → qubits 0..4.
pub fn bk_hamiltonian(p: &SiamParams) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(16, 16);
    let zz = pauli_string(4, &[(0, P::Z), (2, P::Z)]);
    let hop = pauli_string(4, &[(0, P::X)]) - pauli_string(4, &[(0, P::X), (1, P::Z)])
        - pauli_string(4, &[(1, P::Z), (2, P::X), (3, P::Z)])
        + pauli_string(4, &[(2, P::X)]);
    (zz - id) * (p.u / 4.0) + hop * (p.v / 2.0)
}

/// Reduced Hamiltonian on |z2 z0⟩; basis index z0 + 2·z2.
pub fn h2q_matrix(p: &SiamParams) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(4, 4);
    let zz = pauli_string(2, &[(0, P::Z), (1, P::Z)]);
    let xs = pauli_string(2, &[(0, P::X)]) + pauli_string(2, &[(1, P::X)]);
    (zz - id) * (p.u / 4.0) + xs * p.v
}

/// The half-filling block of the four-qubit form: qubit 1 set, qubit 3 clear.
pub fn half_filling_block(p: &SiamParams) -> DMatrix<f64> {
    let h = bk_hamiltonian(p);
    let idx = |j: usize| (j & 1) | 0b10 | ((j >> 1) << 2);
    DMatrix::from_fn(4, 4, |r, c| h[(idx(r), idx(c))])
}

pub fn exact_ground_energy(p: &SiamParams) -> f64 {
    -p.u / 4.0 - (p.u * p.u / 16.0 + 4.0 * p.v * p.v).sqrt()
}

pub fn eigenvalues(h: DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

fn rx_on(psi: &mut Vector4<C64>, bit: usize, theta: f64) {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let ms = C64::new(0.0, -s);
    for i in 0..4 {
        if (i >> bit) & 1 == 0 {
            let j = i | (1 << bit);
            let (a, b) = (psi[i], psi[j]);
            psi[i] = a * c + b * ms;
            psi[j] = a * ms + b * c;
        }
    }
}

/// U(α, β)|φ+⟩ in the reduced basis.
pub fn ansatz_state(a: &AnsatzAngles) -> Vector4<C64> {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut psi = Vector4::new(h, ZERO, ZERO, h);
    rx_on(&mut psi, 0, a.alpha);
    for i in 0..4 {
        let parity = ((i & 1) ^ (i >> 1)) as f64;
        // exp(−iβ Z0Z2 / 2): eigenvalue +1 on even parity.
        let phase = -a.beta / 2.0 * (1.0 - 2.0 * parity);
        psi[i] *= C64::from_polar(1.0, phase);
    }
    psi
}

pub fn ansatz_energy(a: &AnsatzAngles, p: &SiamParams) -> f64 {
    let psi = ansatz_state(a);
    let h: Matrix4<C64> = Matrix4::from_fn(|r, c| h2q_matrix(p)[(r, c)] * ONE);
    (psi.adjoint() * h * psi)[(0, 0)].re
}

fn energy_at(x: Vector2<f64>, p: &SiamParams) -> f64 {
    ansatz_energy(&AnsatzAngles { alpha: x[0], beta: x[1] }, p)
}

/// Exact gradient by the parameter-shift rule; each angle enters once as
/// exp(−iθP/2).
pub fn ansatz_gradient(a: &AnsatzAngles, p: &SiamParams) -> [f64; 2] {
    let x = Vector2::new(a.alpha, a.beta);
    let g = gradient_at(x, p);
    [g[0], g[1]]
}

fn gradient_at(x: Vector2<f64>, p: &SiamParams) -> Vector2<f64> {
    let shift = |k: usize, s: f64| {
        let mut y = x;
        y[k] += s;
        energy_at(y, p)
    };
    Vector2::new(
        (shift(0, PI / 2.0) - shift(0, -PI / 2.0)) / 2.0,
        (shift(1, PI / 2.0) - shift(1, -PI / 2.0)) / 2.0,
    )
}

/// BFGS with Armijo backtracking from one start point.
fn bfgs(x0: Vector2<f64>, p: &SiamParams) -> (Vector2<f64>, f64) {
    let mut x = x0;
    let mut f = energy_at(x, p);
    let mut g = gradient_at(x, p);
    let mut hinv = nalgebra::Matrix2::<f64>::identity();
    for _ in 0..500 {
        if g.norm() < 1e-12 {
            break;
        }
        let mut d = -(hinv * g);
        if d.dot(&g) >= 0.0 {
            hinv = nalgebra::Matrix2::identity();
            d = -g;
        }
        let mut step = 1.0;
        let (mut xn, mut fn_) = (x + d, energy_at(x + d, p));
        while fn_ > f + 1e-4 * step * d.dot(&g) && step > 1e-12 {
            step *= 0.5;
            xn = x + d * step;
            fn_ = energy_at(xn, p);
        }
        let gn = gradient_at(xn, p);
        let s = xn - x;
        let y = gn - g;
        let sy = s.dot(&y);
        if sy > 1e-16 {
            let rho = 1.0 / sy;
            let i = nalgebra::Matrix2::<f64>::identity();
            hinv = (i - s * y.transpose() * rho) * hinv * (i - y * s.transpose() * rho) + s * s.transpose() * rho;
        }
        let done = (f - fn_).abs() < 1e-16 && s.norm() < 1e-14;
        x = xn;
        f = fn_;
        g = gn;
        if done {
            break;
        }
    }
    (x, f)
}

pub const RESTARTS: usize = 8;

/// Best of eight BFGS runs from uniform random starts. The starts are seeded
/// from the parameters so the result is a pure function of (U, V).
pub fn optimize(p: &SiamParams) -> Result<AnsatzAngles> {
    let mut rng = crate::rng::stream(p.u.to_bits() ^ p.v.to_bits().rotate_left(17), &[0xa1a]);
    let mut best: Option<(Vector2<f64>, f64)> = None;
    for _ in 0..RESTARTS {
        let x0 = Vector2::new(rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
        let (x, f) = bfgs(x0, p);
        if best.is_none_or(|(_, bf)| f < bf) {
            best = Some((x, f));
        }
    }
    let (x, f) = best.expect("at least one restart");
    let exact = exact_ground_energy(p);
    if (f - exact).abs() > 1e-8 {
        return Err(Error::NoConvergence { best: f, exact });
    }
    Ok(AnsatzAngles::new(x[0], x[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, proptest};

    #[test]
    fn zero_params_give_zero_operator() {
        assert!(bk_hamiltonian(&SiamParams::new(0.0, 0.0)).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn bk_commutes_with_z1_and_z3() {
        let h = bk_hamiltonian(&SiamParams::new(5.0, -1.0));
        for q in [1, 3] {
            let z = pauli_string(4, &[(q, P::Z)]);
            assert!((&h * &z - &z * &h).amax() < 1e-14);
        }
    }

    #[test]
    fn half_filling_block_is_reduced_form() {
        for p in SiamParams::grid() {
            assert!((half_filling_block(&p) - h2q_matrix(&p)).amax() < 1e-14);
        }
    }

    #[test]
    fn quoted_energies() {
        assert!((exact_ground_energy(&SiamParams::new(1.0, -1.0)) + 2.27).abs() < 0.01);
        assert!((exact_ground_energy(&SiamParams::new(9.0, -9.0)) + 20.39).abs() < 0.01);
    }

    #[test]
    fn bell_state_has_zero_energy() {
        for p in SiamParams::grid() {
            assert!(ansatz_energy(&AnsatzAngles::new(0.0, 0.0), &p).abs() < 1e-14);
        }
    }

    #[test]
    fn optimizer_reaches_ground_energy_on_grid() {
        for p in SiamParams::grid() {
            let a = optimize(&p).unwrap();
            assert!((ansatz_energy(&a, &p) - exact_ground_energy(&p)).abs() < 1e-8, "{p:?}");
        }
    }

    #[test]
    fn v_sign_symmetry_and_v_zero() {
        for u in GRID_U {
            for v in GRID_V {
                let a = ansatz_energy(&optimize(&SiamParams::new(u, v)).unwrap(), &SiamParams::new(u, v));
                let b = ansatz_energy(&optimize(&SiamParams::new(u, -v)).unwrap(), &SiamParams::new(u, -v));
                assert!((a - b).abs() < 1e-8);
            }
            let p = SiamParams::new(u, 0.0);
            assert!((exact_ground_energy(&p) + u / 2.0).abs() < 1e-14);
            assert!((ansatz_energy(&optimize(&p).unwrap(), &p) + u / 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = crate::rng::stream(21, &[]);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let p = SiamParams::new(rng.random_range(0.0..10.0), rng.random_range(-10.0..10.0));
            let a = AnsatzAngles { alpha: rng.random_range(0.0..TAU), beta: rng.random_range(0.0..TAU) };
            let g = ansatz_gradient(&a, &p);
            let h = 1e-5;
            let fd_a = (ansatz_energy(&AnsatzAngles { alpha: a.alpha + h, ..a }, &p)
                - ansatz_energy(&AnsatzAngles { alpha: a.alpha - h, ..a }, &p))
                / (2.0 * h);
            let fd_b = (ansatz_energy(&AnsatzAngles { beta: a.beta + h, ..a }, &p)
                - ansatz_energy(&AnsatzAngles { beta: a.beta - h, ..a }, &p))
                / (2.0 * h);
            worst = worst.max((g[0] - fd_a).abs()).max((g[1] - fd_b).abs());
        }
        assert!(worst < 1e-6, "{worst}");
    }

    proptest! {
        #[test]
        fn closed_form_matches_eigensolver(u in -10.0f64..10.0, v in -10.0f64..10.0) {
            let p = SiamParams::new(u, v);
            let e = eigenvalues(h2q_matrix(&p));
            prop_assert!((e[0] - exact_ground_energy(&p)).abs() < 1e-10);
            let full = eigenvalues(bk_hamiltonian(&p));
            for x in &e {
                prop_assert!(full.iter().any(|y| (x - y).abs() < 1e-10));
            }
            prop_assert!((eigenvalues(half_filling_block(&p))[0] - exact_ground_energy(&p)).abs() < 1e-10);
        }
    }
}
