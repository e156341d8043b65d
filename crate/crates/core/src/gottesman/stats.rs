use rand::Rng;
use rand_distr::{Binomial, Dirichlet, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream;

pub const DEFAULT_DIRICHLET_SAMPLES: usize = 10_000;
const ENVELOPE_MASS: f64 = 0.68;
const RESAMPLES: usize = 200;
const DISJOINT_FRACTION: f64 = 0.9;
const MAX_SHOTS: u64 = 10_000_000;

pub fn tvd(p: &[f64; 4], q: &[f64; 4]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvdEstimate {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub n_shots: u64,
    pub retained_fraction: f64,
}

impl TvdEstimate {
    /// An estimate with no sampling uncertainty.
    pub fn exact(point: f64, retained_fraction: f64) -> Self {
        TvdEstimate { point, lower: point, upper: point, n_shots: 0, retained_fraction }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn disjoint(&self, other: &TvdEstimate) -> bool {
        self.upper < other.lower || other.upper < self.lower
    }
}

/// Narrowest window over sorted samples containing `mass` of them.
fn narrowest_window(sorted: &[f64], mass: f64) -> (f64, f64) {
    let n = sorted.len();
    let k = ((mass * n as f64).ceil() as usize).clamp(1, n);
    let mut best = (sorted[0], sorted[k - 1]);
    for i in 1..=n - k {
        let (lo, hi) = (sorted[i], sorted[i + k - 1]);
        if hi - lo < best.1 - best.0 {
            best = (lo, hi);
        }
    }
    best
}

/// TVD point estimate with a Dirichlet(counts + 1) posterior envelope.
pub fn dirichlet_envelope<R: Rng>(
    counts: &[u64; 4],
    ideal: &[f64; 4],
    n_samples: usize,
    mass: f64,
    rng: &mut R,
) -> Result<TvdEstimate> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyCounts);
    }
    if n_samples == 0 || !(0.0..=1.0).contains(&mass) {
        return Err(Error::InvalidArgument(format!("n_samples={n_samples}, mass={mass}")));
    }
    let freq = counts.map(|c| c as f64 / total as f64);
    let alpha = counts.map(|c| c as f64 + 1.0);
    let dir = Dirichlet::new(alpha).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut samples: Vec<f64> = (0..n_samples).map(|_| tvd(&dir.sample(rng), ideal)).collect();
    samples.sort_by(f64::total_cmp);
    let (lower, upper) = narrowest_window(&samples, mass);
    Ok(TvdEstimate { point: tvd(&freq, ideal), lower, upper, n_shots: total, retained_fraction: 1.0 })
}

/// Multinomial draw by sequential conditional binomials.
pub fn multinomial<R: Rng>(n: u64, p: &[f64; 4], rng: &mut R) -> [u64; 4] {
    let mut out = [0u64; 4];
    let mut left = n;
    let mut mass_left = 1.0;
    for i in 0..3 {
        if left == 0 {
            break;
        }
        let pi = if mass_left > 0.0 { (p[i] / mass_left).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(left, pi).expect("valid binomial").sample(rng);
        out[i] = k;
        left -= k;
        mass_left -= p[i];
    }
    out[3] = left;
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Distinguish {
    Shots(u64),
    /// Not separable within the searched shot budget.
    Saturated,
}

fn shot_grid() -> Vec<u64> {
    // Eight points per decade from 10 to MAX_SHOTS.
    let mut g: Vec<u64> = (0..=48).map(|k| 10f64.powf(1.0 + k as f64 / 8.0).round() as u64).collect();
    g.dedup();
    g
}

fn separated_at(n: u64, logical: &[f64; 4], physical: &[f64; 4], ideal: &[f64; 4], seed: u64) -> bool {
    let hits = (0..RESAMPLES)
        .into_par_iter()
        .filter(|&k| {
            let mut rng = stream(seed, &[n, k as u64]);
            let cl = multinomial(n, logical, &mut rng);
            let cp = multinomial(n, physical, &mut rng);
            let el = dirichlet_envelope(&cl, ideal, DEFAULT_DIRICHLET_SAMPLES, ENVELOPE_MASS, &mut rng);
            let ep = dirichlet_envelope(&cp, ideal, DEFAULT_DIRICHLET_SAMPLES, ENVELOPE_MASS, &mut rng);
            matches!((el, ep), (Ok(a), Ok(b)) if a.disjoint(&b))
        })
        .count();
    hits as f64 >= DISJOINT_FRACTION * RESAMPLES as f64
}

/// Smallest grid shot count at which the two arms' envelopes separate in at
/// least 90% of 200 synthetic resamples. Separation is treated as monotone
/// in n, so the grid is bisected.
pub fn shots_to_distinguish(logical: &[f64; 4], physical: &[f64; 4], ideal: &[f64; 4], seed: u64) -> Distinguish {
    let grid = shot_grid();
    debug_assert_eq!(*grid.last().unwrap(), MAX_SHOTS);
    let ok = |i: usize| separated_at(grid[i], logical, physical, ideal, seed);
    if !ok(grid.len() - 1) {
        return Distinguish::Saturated;
    }
    let (mut lo, mut hi) = (0usize, grid.len() - 1);
    if ok(lo) {
        return Distinguish::Shots(grid[lo]);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Distinguish::Shots(grid[hi])
}
