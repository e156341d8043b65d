//! Lowering of logical circuits to native gates, encoded and unencoded.
//!
//! Encoded circuits use data atoms 0..4 and, for the |00⟩ preparation, flag
//! atom 4. Unencoded circuits use atoms 0 and 1 for the two logical qubits.

use super::logical::{Basis, LogicalCircuit, LogicalGate, PrepKind};
use super::{NativeCircuit, NativeGate};

pub use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Circuit builder that tracks virtual Z: after an odd number of global Z
/// frames, GR angles are emitted negated.
#[derive(Clone, Debug)]
pub struct Builder {
    circuit: NativeCircuit,
    negate: bool,
}

impl Builder {
    pub fn new(n_sites: usize) -> Self {
        Builder { circuit: NativeCircuit::new(n_sites), negate: false }
    }

    pub fn n_sites(&self) -> usize {
        self.circuit.n_sites
    }

    fn push(&mut self, g: NativeGate) -> &mut Self {
        self.circuit.push(g).expect("builder emits valid gates");
        self
    }

    pub fn gr(&mut self, theta: f64, phi: f64) -> &mut Self {
        let theta = if self.negate { -theta } else { theta };
        self.push(NativeGate::GlobalRotation { theta, phi })
    }

    pub fn rz(&mut self, site: usize, theta: f64) -> &mut Self {
        self.push(NativeGate::LocalZ { site, theta })
    }

    pub fn rz_each(&mut self, sites: &[usize], theta: f64) -> &mut Self {
        for &s in sites {
            self.rz(s, theta);
        }
        self
    }

    pub fn cz(&mut self, a: usize, b: usize) -> &mut Self {
        self.push(NativeGate::Cz { a, b })
    }

    pub fn swap_labels(&mut self, a: usize, b: usize) -> &mut Self {
        let mut perm: Vec<usize> = (0..self.n_sites()).collect();
        perm.swap(a, b);
        self.push(NativeGate::Relabel { perm })
    }

    /// Z on every atom, absorbed into the sign of later GR angles.
    pub fn virtual_z(&mut self) -> &mut Self {
        self.negate = !self.negate;
        let sites = (0..self.n_sites()).collect();
        self.push(NativeGate::VirtualGlobalZ { sites })
    }

    /// Hadamard (up to phase) on `sites`, identity elsewhere.
    pub fn hadamard(&mut self, sites: &[usize]) -> &mut Self {
        self.gr(-FRAC_PI_4, FRAC_PI_2).rz_each(sites, PI).gr(FRAC_PI_4, FRAC_PI_2)
    }

    /// RX(θ) on one site, identity elsewhere.
    pub fn rx(&mut self, site: usize, theta: f64) -> &mut Self {
        self.gr(-FRAC_PI_2, FRAC_PI_2).rz(site, theta).gr(FRAC_PI_2, FRAC_PI_2)
    }

    /// Appends already-lowered gates verbatim. GR angles are taken as
    /// emitted; VZ markers still flip the frame for later builder calls.
    pub fn append(&mut self, gates: &[NativeGate]) -> &mut Self {
        for g in gates {
            if let NativeGate::VirtualGlobalZ { .. } = g {
                self.negate = !self.negate;
            }
            self.push(g.clone());
        }
        self
    }

    pub fn len(&self) -> usize {
        self.circuit.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circuit.gates.is_empty()
    }

    pub fn finish(self) -> NativeCircuit {
        self.circuit
    }

    pub fn measure(mut self) -> NativeCircuit {
        self.circuit.measure();
        self.circuit
    }
}

fn encoded_prep(b: &mut Builder, prep: PrepKind) {
    match prep {
        PrepKind::PrepBell => {
            b.gr(FRAC_PI_2, FRAC_PI_2).cz(0, 3).cz(1, 2).gr(FRAC_PI_2, 0.0);
            b.rz(0, FRAC_PI_2).rz(1, FRAC_PI_2).gr(FRAC_PI_2, -FRAC_PI_2);
        }
        PrepKind::Prep0Plus => {
            b.gr(FRAC_PI_2, FRAC_PI_2).cz(0, 1).cz(2, 3).gr(FRAC_PI_2, 0.0);
            b.rz(0, FRAC_PI_2).rz(2, FRAC_PI_2).gr(FRAC_PI_2, -FRAC_PI_2);
        }
        PrepKind::Prep00 => {
            b.gr(FRAC_PI_2, FRAC_PI_2).cz(1, 2).cz(0, 1).rz(0, -FRAC_PI_2).rz(3, FRAC_PI_2);
            b.gr(FRAC_PI_2, FRAC_PI_2).cz(2, 3).rz(1, -FRAC_PI_2).rz(4, -FRAC_PI_2);
            b.gr(FRAC_PI_2, PI).cz(0, 4).cz(3, 4).gr(FRAC_PI_2, FRAC_PI_2);
            b.rz(2, FRAC_PI_2).rz(4, FRAC_PI_2).gr(-FRAC_PI_2, FRAC_PI_2);
        }
    }
}

/// Encoded lowering of one logical gate. `flag` selects the flag-preserving
/// HH template.
pub(crate) fn encoded_gate(b: &mut Builder, g: LogicalGate, flag: bool) {
    match g {
        LogicalGate::XI => {
            b.gr(-FRAC_PI_2, FRAC_PI_2).rz(0, PI).rz(2, PI).gr(FRAC_PI_2, FRAC_PI_2);
        }
        LogicalGate::IX => {
            b.gr(-FRAC_PI_2, FRAC_PI_2).rz(0, PI).rz(1, PI).gr(FRAC_PI_2, FRAC_PI_2);
        }
        LogicalGate::ZI => {
            b.rz(0, PI).rz(1, PI);
        }
        LogicalGate::IZ => {
            b.rz(0, PI).rz(2, PI);
        }
        LogicalGate::CZ => {
            b.rz(0, FRAC_PI_2).rz(1, -FRAC_PI_2).rz(2, -FRAC_PI_2).rz(3, FRAC_PI_2);
        }
        LogicalGate::CX => {
            b.swap_labels(0, 1);
        }
        LogicalGate::XC => {
            b.swap_labels(0, 2);
        }
        LogicalGate::HH => {
            if flag {
                b.gr(-FRAC_PI_4, FRAC_PI_2).rz(4, PI).gr(-FRAC_PI_4, FRAC_PI_2);
            } else {
                b.gr(FRAC_PI_2, -FRAC_PI_2);
            }
            b.virtual_z().swap_labels(1, 2);
        }
    }
}

/// Rotates every data atom from the X eigenbasis to Z; a flag atom is left in
/// |0⟩ up to phase.
pub(crate) fn encoded_x_readout(b: &mut Builder, flag_sites: &[usize]) {
    if flag_sites.is_empty() {
        b.gr(-FRAC_PI_2, FRAC_PI_2);
    } else {
        b.gr(-FRAC_PI_4, FRAC_PI_2).rz_each(flag_sites, PI).gr(-FRAC_PI_4, FRAC_PI_2);
    }
}

pub fn compile_encoded(lc: &LogicalCircuit) -> NativeCircuit {
    let flag = lc.prep.has_flag();
    let mut b = Builder::new(if flag { 5 } else { 4 });
    encoded_prep(&mut b, lc.prep);
    for &g in &lc.layers {
        encoded_gate(&mut b, g, flag);
    }
    if lc.basis == Basis::X {
        encoded_x_readout(&mut b, if flag { &[4] } else { &[] });
    }
    b.measure()
}

fn unencoded_gate(b: &mut Builder, g: LogicalGate) {
    match g {
        LogicalGate::XI => {
            b.rx(0, PI);
        }
        LogicalGate::IX => {
            b.rx(1, PI);
        }
        LogicalGate::ZI => {
            b.rz(0, PI);
        }
        LogicalGate::IZ => {
            b.rz(1, PI);
        }
        LogicalGate::CZ => {
            b.cz(0, 1);
        }
        LogicalGate::CX => {
            b.hadamard(&[1]).cz(0, 1).hadamard(&[1]);
        }
        LogicalGate::XC => {
            b.hadamard(&[0]).cz(0, 1).hadamard(&[0]);
        }
        LogicalGate::HH => {
            b.gr(FRAC_PI_2, -FRAC_PI_2).virtual_z();
        }
    }
}

pub fn compile_unencoded(lc: &LogicalCircuit) -> NativeCircuit {
    let mut b = Builder::new(2);
    match lc.prep {
        PrepKind::Prep00 => {}
        PrepKind::Prep0Plus => {
            b.hadamard(&[1]);
        }
        PrepKind::PrepBell => {
            b.gr(FRAC_PI_2, FRAC_PI_2).cz(0, 1).hadamard(&[1]);
        }
    }
    for &g in &lc.layers {
        unencoded_gate(&mut b, g);
    }
    if lc.basis == Basis::X {
        b.gr(-FRAC_PI_2, FRAC_PI_2);
    }
    b.measure()
}
