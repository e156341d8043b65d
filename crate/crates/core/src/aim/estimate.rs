use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_encoded, build_physical, encoded_layout, exact_ground_energy, ideal_distribution, optimize, AnsatzAngles, SiamParams};
use crate::circuit::Basis;
use crate::code::{decode_table, physical_counts, physical_table, postselect, DecodedDistribution};
use crate::error::{Error, Result};
use crate::gottesman::{tvd, Arm};
use crate::noise::NoiseParams;
use crate::rng::derive_seed;
use crate::sim::{exact_distribution, simulate_shots, Backend};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyResult {
    pub estimate: f64,
    pub exact: f64,
    pub relative_error: f64,
    pub arm: Arm,
    pub sem: f64,
}

/// Energy from post-selected Z- and X-basis histograms over (ℓ1, ℓ2). The
/// weights may be counts or probabilities scaled by a nominal shot count.
pub fn estimate_energy(z: &[f64; 4], x: &[f64; 4], p: &SiamParams, arm: Arm) -> Result<EnergyResult> {
    let nz: f64 = z.iter().sum();
    let nx: f64 = x.iter().sum();
    if nz <= 0.0 || nx <= 0.0 {
        return Err(Error::EmptySelection);
    }
    let zz = (z[0] - z[1] - z[2] + z[3]) / nz;
    // Per-shot value of X0 + X2 is ±2 or 0.
    let xs = 2.0 * (x[0] - x[3]) / nx;
    let xs2 = 4.0 * (x[0] + x[3]) / nx;
    let estimate = p.u * (zz - 1.0) / 4.0 + p.v * xs;
    let var = (p.u / 4.0).powi(2) * (1.0 - zz * zz).max(0.0) / nz + p.v * p.v * (xs2 - xs * xs).max(0.0) / nx;
    let exact = exact_ground_energy(p);
    Ok(EnergyResult { estimate, exact, relative_error: ((estimate - exact) / exact).abs(), arm, sem: var.sqrt() })
}

#[derive(Clone, Copy, Debug)]
pub struct GridOptions {
    /// `None` uses exact distributions.
    pub shots: Option<usize>,
    pub backend: Backend,
    pub seed: u64,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { shots: None, backend: Backend::Auto, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub params: SiamParams,
    pub angles: AnsatzAngles,
    pub shots_z: u64,
    pub shots_x: u64,
    pub retained_z: f64,
    pub retained_x: f64,
    pub result: EnergyResult,
}

impl GridRow {
    pub const HEADER: [&'static str; 11] = [
        "U", "V", "arm", "basis_shots_z", "basis_shots_x", "retained_z", "retained_x", "energy", "exact", "relative_error", "sem",
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub rows: Vec<GridRow>,
    pub geomean_logical: f64,
    pub geomean_physical: f64,
}

pub fn geometric_mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    (xs.iter().map(|x| x.ln()).sum::<f64>() / xs.len() as f64).exp()
}

fn circuit_for(arm: Arm, a: &AnsatzAngles, basis: Basis) -> crate::circuit::NativeCircuit {
    match arm {
        Arm::Logical => build_encoded(a, basis),
        Arm::Physical => build_physical(a, basis),
    }
}

fn decode_exact(arm: Arm, a: &AnsatzAngles, basis: Basis, noise: &NoiseParams) -> Result<DecodedDistribution> {
    let table = exact_distribution(&circuit_for(arm, a, basis), Some(noise))?;
    Ok(match arm {
        Arm::Logical => decode_table(&table, &encoded_layout(basis), basis),
        Arm::Physical => physical_table(&table),
    })
}

/// Kept histogram, kept shots and retained fraction for one basis.
fn basis_data(
    arm: Arm,
    a: &AnsatzAngles,
    basis: Basis,
    noise: &NoiseParams,
    opts: &GridOptions,
    seed: u64,
) -> Result<([f64; 4], u64, f64)> {
    match opts.shots {
        None => {
            let d = decode_exact(arm, a, basis, noise)?;
            Ok((d.normalized()?, 0, d.retained()))
        }
        Some(n) => {
            let records = simulate_shots(&circuit_for(arm, a, basis), Some(noise), n, seed, opts.backend)?;
            let (counts, kept) = match arm {
                Arm::Logical => postselect(&records, &encoded_layout(basis), basis)?,
                Arm::Physical => physical_counts(&records)?,
            };
            Ok((counts.counts.map(|c| c as f64), counts.total(), kept))
        }
    }
}

fn grid_row(idx: usize, p: SiamParams, a: AnsatzAngles, arm: Arm, noise: &NoiseParams, opts: &GridOptions) -> Result<GridRow> {
    let tag = |b: u64| derive_seed(opts.seed, &[idx as u64, arm as u64, b]);
    let (z, shots_z, retained_z) = basis_data(arm, &a, Basis::Z, noise, opts, tag(0))?;
    let (x, shots_x, retained_x) = basis_data(arm, &a, Basis::X, noise, opts, tag(1))?;
    let result = estimate_energy(&z, &x, &p, arm)?;
    Ok(GridRow { params: p, angles: a, shots_z, shots_x, retained_z, retained_x, result })
}

/// Optimizes every grid point, then estimates energies in both arms.
pub fn run_grid(params: &[SiamParams], noise: &NoiseParams, opts: &GridOptions) -> Result<GridSummary> {
    let angles = params.iter().map(optimize).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, Arm)> = (0..params.len()).flat_map(|i| Arm::ALL.map(|arm| (i, arm))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(i, arm)| grid_row(i, params[i], angles[i], arm, noise, opts))
        .collect::<Result<Vec<_>>>()?;
    let gm = |arm: Arm| {
        let errs: Vec<f64> = rows.iter().filter(|r| r.result.arm == arm).map(|r| r.result.relative_error).collect();
        geometric_mean(&errs)
    };
    Ok(GridSummary { geomean_logical: gm(Arm::Logical), geomean_physical: gm(Arm::Physical), rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitTvd {
    pub params: SiamParams,
    pub basis: Basis,
    pub logical: f64,
    pub physical: f64,
}

/// Exact per-circuit TVD from the ideal outcome distribution, both arms.
pub fn circuit_tvds(params: &[SiamParams], noise: &NoiseParams) -> Result<Vec<CircuitTvd>> {
    let angles = params.iter().map(optimize).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, Basis)> = (0..params.len()).flat_map(|i| [Basis::Z, Basis::X].map(|b| (i, b))).collect();
    jobs.par_iter()
        .map(|&(i, basis)| {
            let a = angles[i];
            let ideal = ideal_distribution(&a, basis);
            let l = decode_exact(Arm::Logical, &a, basis, noise)?.normalized()?;
            let ph = decode_exact(Arm::Physical, &a, basis, noise)?.normalized()?;
            Ok(CircuitTvd { params: params[i], basis, logical: tvd(&l, &ideal), physical: tvd(&ph, &ideal) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_counts_give_zero_energy() {
        let z = [500.0, 0.0, 0.0, 500.0];
        let x = [500.0, 0.0, 0.0, 500.0];
        let r = estimate_energy(&z, &x, &SiamParams::new(5.0, -1.0), Arm::Physical).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert!(estimate_energy(&[0.0; 4], &x, &SiamParams::new(5.0, -1.0), Arm::Physical).is_err());
    }

    #[test]
    fn ideal_distributions_reproduce_ansatz_energy() {
        for p in SiamParams::grid() {
            let a = optimize(&p).unwrap();
            let r = estimate_energy(&ideal_distribution(&a, Basis::Z), &ideal_distribution(&a, Basis::X), &p, Arm::Logical).unwrap();
            assert!((r.estimate - super::super::ansatz_energy(&a, &p)).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_grid_is_exact() {
        let s = run_grid(&SiamParams::grid(), &NoiseParams::ideal(), &GridOptions::default()).unwrap();
        assert_eq!(s.rows.len(), 18);
        assert!(s.geomean_logical < 1e-3 && s.geomean_physical < 1e-3);
        for pair in s.rows.chunks(2) {
            assert!((pair[0].result.estimate - pair[1].result.estimate).abs() < 1e-9);
        }
    }

    #[test]
    fn noiseless_sampled_estimate() {
        let p = SiamParams::new(5.0, -1.0);
        let opts = GridOptions { shots: Some(1_000_000), backend: Backend::Exact, seed: 3 };
        let s = run_grid(&[p], &NoiseParams::ideal(), &opts).unwrap();
        for r in &s.rows {
            assert!(r.result.relative_error < 1e-2, "{:?}", r.result);
            assert!((r.result.estimate - r.result.exact).abs() < 5.0 * r.result.sem + 1e-9);
        }
    }

    #[test]
    fn default_noise_favours_encoding() {
        let s = run_grid(&SiamParams::grid(), &NoiseParams::default(), &GridOptions::default()).unwrap();
        assert!(s.geomean_logical < s.geomean_physical, "{} vs {}", s.geomean_logical, s.geomean_physical);
    }

    #[test]
    fn mirrored_v_agrees_within_shot_noise() {
        let noise = NoiseParams::default();
        let opts = GridOptions { shots: Some(20_000), backend: Backend::Exact, seed: 8 };
        for u in [1.0, 9.0] {
            let p = SiamParams::new(u, -1.0);
            let q = SiamParams::new(u, 1.0);
            let a = optimize(&p).unwrap();
            let m = AnsatzAngles::new(a.alpha, -a.beta);
            for arm in Arm::ALL {
                let r1 = grid_row(0, p, a, arm, &noise, &opts).unwrap().result;
                let r2 = grid_row(1, q, m, arm, &noise, &opts).unwrap().result;
                let sigma = (r1.sem.powi(2) + r2.sem.powi(2)).sqrt();
                assert!((r1.estimate - r2.estimate).abs() < 4.0 * sigma, "{arm} {r1:?} {r2:?}");
            }
        }
    }
}
