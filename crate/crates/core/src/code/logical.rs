//! Logical two-qubit density matrices from physical four-atom states.

use nalgebra::{DMatrix, Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::linalg::{Pauli, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XxxxMode {
    /// Condition on XXXX = +1.
    Project,
    /// Discard coherences between XXXX sectors (partial trace over the parity).
    Trace,
}

fn mat2(p: Option<Pauli>) -> Matrix2<C64> {
    let m = p.map(|p| p.matrix()).unwrap_or_else(crate::linalg::identity2);
    Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

/// Tensor product of single-atom Paulis, atom 0 most significant.
pub fn pauli_string(ops: [Option<Pauli>; 4]) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for p in ops {
        let m = mat2(p);
        out = out.kronecker(&DMatrix::from_fn(2, 2, |r, c| m[(r, c)]));
    }
    out
}

/// XXXX or ZZZZ.
pub fn stabilizer(p: Pauli) -> DMatrix<C64> {
    pauli_string([Some(p); 4])
}

/// Physical representative of the logical Pauli `p1 ⊗ p2` in the frame
/// Z̄1 = Z0Z1, Z̄2 = Z0Z2, X̄1 = X0X2, X̄2 = X0X1, Ȳ = iX̄Z̄. None of these
/// act on atom 3 with X or Y.
pub fn logical_pauli(p1: Option<Pauli>, p2: Option<Pauli>) -> DMatrix<C64> {
    use Pauli::{X, Z};
    let x1 = pauli_string([Some(X), None, Some(X), None]);
    let z1 = pauli_string([Some(Z), Some(Z), None, None]);
    let x2 = pauli_string([Some(X), Some(X), None, None]);
    let z2 = pauli_string([Some(Z), None, Some(Z), None]);
    let i = C64::new(0.0, 1.0);
    let one = |xs: &DMatrix<C64>, zs: &DMatrix<C64>, p: Option<Pauli>| match p {
        None => DMatrix::identity(16, 16),
        Some(Pauli::X) => xs.clone(),
        Some(Pauli::Z) => zs.clone(),
        Some(Pauli::Y) => xs * zs * i,
    };
    one(&x1, &z1, p1) * one(&x2, &z2, p2)
}

fn project(rho: &DMatrix<C64>, stab: Pauli) -> Result<DMatrix<C64>> {
    let id = DMatrix::<C64>::identity(16, 16);
    let pi = (id + stabilizer(stab)) * C64::new(0.5, 0.0);
    let out = &pi * rho * &pi;
    let t = out.trace().re;
    if t < 1e-12 {
        return Err(Error::ZeroProjection);
    }
    Ok(out / C64::new(t, 0.0))
}

/// Two-qubit logical state reconstructed from logical Pauli expectations.
pub fn logical_density(rho: &DMatrix<C64>, project_zzzz: bool, xxxx: XxxxMode) -> Result<Matrix4<C64>> {
    if rho.nrows() != 16 || rho.ncols() != 16 {
        return Err(Error::DimensionMismatch { expected: 16, got: rho.nrows() });
    }
    let mut r = rho.clone();
    if project_zzzz {
        r = project(&r, Pauli::Z)?;
    }
    if xxxx == XxxxMode::Project {
        r = project(&r, Pauli::X)?;
    }
    let paulis = [None, Some(Pauli::X), Some(Pauli::Y), Some(Pauli::Z)];
    let mut out = Matrix4::zeros();
    for &a in &paulis {
        for &b in &paulis {
            let expect = (&r * logical_pauli(a, b)).trace();
            let ma = mat2(a);
            let mb = mat2(b);
            out += ma.kronecker(&mb) * expect * C64::new(0.25, 0.0);
        }
    }
    Ok(out)
}
