use std::ops::Range;

use super::{ansatz_state, AnsatzAngles};
use crate::circuit::{Basis, Builder, NativeCircuit, FRAC_PI_2, FRAC_PI_4, PI};
use crate::code::CodeLayout;
use crate::linalg::C64;

/// Noiseless outcome distribution, index 2ℓ1 + ℓ2 where ℓ1 is the qubit the
/// α rotation acts on. In the X basis ℓ = 1 means eigenvalue −1.
pub fn ideal_distribution(a: &AnsatzAngles, basis: Basis) -> [f64; 4] {
    let mut psi = ansatz_state(a);
    if basis == Basis::X {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for bit in 0..2 {
            for i in 0..4 {
                if (i >> bit) & 1 == 0 {
                    let j = i | (1 << bit);
                    let (x, y) = (psi[i], psi[j]);
                    psi[i] = (x + y) * h;
                    psi[j] = (x - y) * h;
                }
            }
        }
    }
    let mut out = [0.0; 4];
    for (i, amp) in psi.iter().enumerate() {
        out[2 * (i & 1) + (i >> 1)] = C64::norm_sqr(amp);
    }
    out
}

/// CNOT as a Hadamard-conjugated CZ.
fn cnot(b: &mut Builder, control: usize, target: usize) {
    b.hadamard(&[target]).cz(control, target).hadamard(&[target]);
}

/// Two atoms: Bell pair, RX(α) on atom 0, and in the X basis the ZZ(β) block
/// and a Hadamard on both atoms. The ZZ block has no effect on Z-basis
/// statistics and is left out there.
pub fn build_physical(a: &AnsatzAngles, basis: Basis) -> NativeCircuit {
    let mut b = Builder::new(2);
    b.gr(FRAC_PI_2, FRAC_PI_2).cz(0, 1).hadamard(&[1]);
    b.rx(0, a.alpha);
    if basis == Basis::X {
        cnot(&mut b, 0, 1);
        b.rz(1, a.beta);
        cnot(&mut b, 0, 1);
        b.gr(-FRAC_PI_2, FRAC_PI_2);
    }
    b.measure()
}

/// Gate index ranges of the two non-transversal gadgets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedSections {
    pub bell: Range<usize>,
    pub rx: Range<usize>,
    pub zz: Option<Range<usize>>,
    pub readout: Range<usize>,
}

/// Atom 0 is the RX flag, atoms 1..=4 hold the code block, atom 5 is the ZZ
/// flag which also reads out ZZZZ. Z-basis circuits drop atom 5.
pub fn encoded_layout(basis: Basis) -> CodeLayout {
    CodeLayout {
        data: [1, 2, 3, 4],
        flags: match basis {
            Basis::Z => vec![0],
            Basis::X => vec![0, 5],
        },
    }
}

fn build_encoded_inner(a: &AnsatzAngles, basis: Basis) -> (NativeCircuit, EncodedSections) {
    let mut b = Builder::new(if basis == Basis::X { 6 } else { 5 });
    // Bell pairs (1,4) and (2,3); the global pulses leave the flags in |0⟩.
    b.gr(FRAC_PI_2, FRAC_PI_2).cz(1, 4).cz(2, 3).gr(FRAC_PI_2, 0.0);
    b.rz(1, FRAC_PI_2).rz(2, FRAC_PI_2).gr(FRAC_PI_2, -FRAC_PI_2);
    let bell = 0..b.len();

    // exp(−iα X̄1/2) via the top flag: CNOTs from the flag onto atoms 1 and 3
    // map X on the flag to X X X.
    let start = b.len();
    b.hadamard(&[0, 1, 3]).cz(0, 1).cz(0, 3).hadamard(&[1, 3]);
    b.rx(0, a.alpha);
    b.hadamard(&[1, 3]).cz(0, 1).cz(0, 3).hadamard(&[0, 1, 3]);
    let rx = start..b.len();

    let mut zz = None;
    if basis == Basis::X {
        // Parity of atoms 2,3 onto the bottom flag, RZ(β), then uncompute
        // with atoms 1,4 so the flag ends holding the ZZZZ parity.
        let start = b.len();
        b.hadamard(&[5]).cz(2, 5).cz(3, 5);
        b.rx(5, a.beta);
        b.cz(1, 5).cz(4, 5).hadamard(&[5]);
        zz = Some(start..b.len());
    }

    let start = b.len();
    match basis {
        Basis::Z => {}
        Basis::X => {
            b.gr(-FRAC_PI_4, FRAC_PI_2).rz(0, PI).rz(5, PI).gr(-FRAC_PI_4, FRAC_PI_2);
        }
    }
    let readout = start..b.len();
    (b.measure(), EncodedSections { bell, rx, zz, readout })
}

pub fn build_encoded(a: &AnsatzAngles, basis: Basis) -> NativeCircuit {
    build_encoded_inner(a, basis).0
}

pub fn encoded_sections(a: &AnsatzAngles, basis: Basis) -> EncodedSections {
    build_encoded_inner(a, basis).1
}
