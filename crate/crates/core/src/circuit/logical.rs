//! Two-qubit logical circuits and their ideal semantics. Logical basis index
//! is 2·ℓ1 + ℓ2 (first logical qubit most significant).

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LogicalGate {
    XI,
    IX,
    ZI,
    IZ,
    HH,
    CZ,
    CX,
    XC,
}

impl LogicalGate {
    pub const ALL: [LogicalGate; 8] = [
        LogicalGate::XI,
        LogicalGate::IX,
        LogicalGate::ZI,
        LogicalGate::IZ,
        LogicalGate::HH,
        LogicalGate::CZ,
        LogicalGate::CX,
        LogicalGate::XC,
    ];

    pub fn unitary(self) -> Matrix4<C64> {
        let l = C64::new(1.0, 0.0);
        let h = C64::new(0.5, 0.0);
        let perm = |p: [usize; 4]| {
            let mut m = Matrix4::zeros();
            for (src, &dst) in p.iter().enumerate() {
                m[(dst, src)] = l;
            }
            m
        };
        match self {
            LogicalGate::XI => perm([2, 3, 0, 1]),
            LogicalGate::IX => perm([1, 0, 3, 2]),
            LogicalGate::ZI => Matrix4::from_diagonal(&Vector4::new(l, l, -l, -l)),
            LogicalGate::IZ => Matrix4::from_diagonal(&Vector4::new(l, -l, l, -l)),
            LogicalGate::CZ => Matrix4::from_diagonal(&Vector4::new(l, l, l, -l)),
            LogicalGate::CX => perm([0, 1, 3, 2]),
            LogicalGate::XC => perm([0, 3, 2, 1]),
            LogicalGate::HH => Matrix4::new(h, h, h, h, h, -h, h, -h, h, h, -h, -h, h, -h, -h, h),
        }
    }
}

impl fmt::Display for LogicalGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for LogicalGate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        LogicalGate::ALL
            .into_iter()
            .find(|g| g.to_string() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown logical gate `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PrepKind {
    #[serde(rename = "PREP_00")]
    Prep00,
    #[serde(rename = "PREP_0PLUS")]
    Prep0Plus,
    #[serde(rename = "PREP_BELL")]
    PrepBell,
}

impl PrepKind {
    pub const ALL: [PrepKind; 3] = [PrepKind::Prep00, PrepKind::Prep0Plus, PrepKind::PrepBell];

    pub fn label(self) -> &'static str {
        match self {
            PrepKind::Prep00 => "PREP_00",
            PrepKind::Prep0Plus => "PREP_0PLUS",
            PrepKind::PrepBell => "PREP_BELL",
        }
    }

    /// Whether the encoded preparation carries a flag atom.
    pub fn has_flag(self) -> bool {
        self == PrepKind::Prep00
    }

    /// Ideal logical state vector.
    pub fn state(self) -> Vector4<C64> {
        let z = C64::new(0.0, 0.0);
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self {
            PrepKind::Prep00 => Vector4::new(C64::new(1.0, 0.0), z, z, z),
            PrepKind::Prep0Plus => Vector4::new(s, s, z, z),
            PrepKind::PrepBell => Vector4::new(s, z, z, s),
        }
    }
}

impl fmt::Display for PrepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PrepKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "PREP_00" => Ok(PrepKind::Prep00),
            "PREP_0PLUS" | "PREP_0+" => Ok(PrepKind::Prep0Plus),
            "PREP_BELL" => Ok(PrepKind::PrepBell),
            _ => Err(Error::InvalidArgument(format!("unknown preparation `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if *self == Basis::Z { "z" } else { "x" })
    }
}

impl FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "Z" | "z" => Ok(Basis::Z),
            "X" | "x" => Ok(Basis::X),
            _ => Err(Error::InvalidArgument(format!("unknown basis `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LogicalCircuit {
    pub prep: PrepKind,
    pub layers: Vec<LogicalGate>,
    pub basis: Basis,
}

impl LogicalCircuit {
    pub fn new(prep: PrepKind, layers: Vec<LogicalGate>) -> Self {
        LogicalCircuit { prep, layers, basis: Basis::Z }
    }

    pub fn in_basis(mut self, basis: Basis) -> Self {
        self.basis = basis;
        self
    }
}

/// Product of the layer unitaries, first layer applied first.
pub fn ideal_logical_unitary(layers: &[LogicalGate]) -> Matrix4<C64> {
    layers.iter().fold(Matrix4::identity(), |acc, g| g.unitary() * acc)
}

pub fn ideal_state(lc: &LogicalCircuit) -> Vector4<C64> {
    ideal_logical_unitary(&lc.layers) * lc.prep.state()
}

/// Outcome probabilities over (ℓ1, ℓ2), or over the logical X outcomes when
/// the circuit measures in X.
pub fn ideal_distribution(lc: &LogicalCircuit) -> [f64; 4] {
    let mut psi = ideal_state(lc);
    if lc.basis == Basis::X {
        psi = LogicalGate::HH.unitary() * psi;
    }
    let mut out = [0.0; 4];
    for (o, a) in out.iter_mut().zip(psi.iter()) {
        *o = a.norm_sqr();
    }
    out
}
