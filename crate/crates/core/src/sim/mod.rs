//! Circuit simulation over five-level atoms.
//!
//! Three engines share one gate-application routine:
//! [`blocks::BlockState`] (exact, sector-decomposed), [`dense::DensityMatrix`]
//! (exact, dense, small registers only) and [`trajectory::Trajectory`]
//! (sampled).

pub mod blocks;
pub mod dense;
pub mod trajectory;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{NativeCircuit, NativeGate};
use crate::error::{Error, Result};
use crate::levels::{Level, OutcomeTable, ShotRecord, N_LEVELS};
use crate::linalg::{Mat2, Pauli};
use crate::noise::{NoiseParams, TransitionMatrix};
use crate::rng;

pub use blocks::BlockState;
pub use dense::{apply_channel, embed_operator, embed_single_qubit, DensityMatrix};
pub use trajectory::{PureState, Trajectory};

/// Largest register handled by the exact engine.
pub const MAX_EXACT_SITES: usize = 8;

/// State operations needed to run a native circuit under noise.
pub trait Register {
    fn n_sites(&self) -> usize;
    /// Single-qubit unitary on the qubit levels of `site`.
    fn unitary(&mut self, site: usize, u: &Mat2);
    fn cz(&mut self, a: usize, b: usize);
    /// Z on the qubit levels with probability `p`.
    fn phase_flip(&mut self, site: usize, p: f64);
    /// Spontaneous transitions `m[dest][source]`.
    fn transitions(&mut self, site: usize, m: &TransitionMatrix);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Trajectory,
    Auto,
}

impl Backend {
    /// Auto picks exact for up to five atoms.
    pub fn resolve(self, n_sites: usize) -> Backend {
        match self {
            Backend::Auto if n_sites <= 5 => Backend::Exact,
            Backend::Auto => Backend::Trajectory,
            b => b,
        }
    }
}

/// Pauli error inserted after `after_gates` native gates on physical atom `site`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fault {
    pub after_gates: usize,
    pub site: usize,
    pub pauli: Pauli,
}

fn is_zero(m: &TransitionMatrix) -> bool {
    m.iter().flatten().all(|&v| v == 0.0)
}

/// Runs the gate list on `reg`. Returns the final label map: label `i` lives on
/// physical atom `map[i]`.
pub fn drive<R: Register>(reg: &mut R, circuit: &NativeCircuit, noise: &NoiseParams, fault: Option<Fault>) -> Vec<usize> {
    let n = circuit.n_sites;
    let mut map: Vec<usize> = (0..n).collect();
    let cz_jumps = !is_zero(&noise.cz_transition_matrix);
    let rz_jumps = !is_zero(&noise.rz_transition_matrix);
    let inject = |reg: &mut R, done: usize| {
        if let Some(f) = fault {
            if f.after_gates == done {
                reg.unitary(f.site, &f.pauli.matrix());
            }
        }
    };
    inject(reg, 0);
    for (i, gate) in circuit.gates.iter().enumerate() {
        match gate {
            NativeGate::GlobalRotation { theta, phi } => {
                let u = noise.noisy_gr(*theta, *phi);
                for site in 0..n {
                    reg.unitary(site, &u);
                }
            }
            NativeGate::LocalZ { site, theta } => {
                let p = map[*site];
                reg.unitary(p, &noise.noisy_rz(*theta));
                if rz_jumps {
                    reg.transitions(p, &noise.rz_transition_matrix);
                }
            }
            NativeGate::Cz { a, b } => {
                let (pa, pb) = (map[*a], map[*b]);
                reg.cz(pa, pb);
                for p in [pa, pb] {
                    if noise.cz_phase_error > 0.0 {
                        reg.phase_flip(p, noise.cz_phase_error);
                    }
                    if cz_jumps {
                        reg.transitions(p, &noise.cz_transition_matrix);
                    }
                }
            }
            NativeGate::Relabel { perm } => {
                map = perm.iter().map(|&j| map[j]).collect();
            }
            NativeGate::VirtualGlobalZ { .. } => {}
        }
        inject(reg, i + 1);
    }
    map
}

fn check_capacity(circuit: &NativeCircuit) -> Result<()> {
    if circuit.n_sites > MAX_EXACT_SITES {
        return Err(Error::CapacityExceeded {
            backend: "exact",
            max: MAX_EXACT_SITES,
            n_sites: circuit.n_sites,
        });
    }
    Ok(())
}

/// Prepared register before the first gate: lossy per-site populations
/// followed by the preparation pulse.
pub fn prepared_block_state(n_sites: usize, noise: &NoiseParams) -> BlockState {
    let pops = vec![noise.prep_populations(); n_sites];
    let mut state = BlockState::product_diagonal(&pops);
    let pulse = noise.prep_pulse();
    for site in 0..n_sites {
        state.unitary(site, &pulse);
    }
    state
}

/// Exact final state (before readout) and the label map.
pub fn exact_state(circuit: &NativeCircuit, noise: &NoiseParams) -> Result<(BlockState, Vec<usize>)> {
    check_capacity(circuit)?;
    let mut state = prepared_block_state(circuit.n_sites, noise);
    let map = drive(&mut state, circuit, noise, None);
    Ok((state, map))
}

/// Rewrites a physical-atom table so index positions follow circuit labels.
pub fn relabel_table(table: &OutcomeTable, map: &[usize]) -> OutcomeTable {
    if map.iter().enumerate().all(|(i, &p)| i == p) {
        return table.clone();
    }
    let mut probs = vec![0.0; table.probs.len()];
    for (i, &p) in table.probs.iter().enumerate() {
        let phys = table.outcomes_of(i);
        let labelled: Vec<_> = map.iter().map(|&m| phys[m]).collect();
        probs[OutcomeTable::index_of(&labelled)] += p;
    }
    OutcomeTable { n_sites: table.n_sites, probs }
}

/// Relabels level populations in the same way as [`relabel_table`].
pub fn relabel_populations(n_sites: usize, pops: &[f64], map: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; pops.len()];
    for (i, &p) in pops.iter().enumerate() {
        let mut levels = vec![0; n_sites];
        let mut rem = i;
        for s in (0..n_sites).rev() {
            levels[s] = rem % N_LEVELS;
            rem /= N_LEVELS;
        }
        let idx = map.iter().fold(0, |acc, &m| acc * N_LEVELS + levels[m]);
        out[idx] += p;
    }
    out
}

/// Exact readout distribution, indexed by circuit labels. `None` means noiseless.
pub fn exact_distribution(circuit: &NativeCircuit, noise: Option<&NoiseParams>) -> Result<OutcomeTable> {
    let ideal = NoiseParams::ideal();
    let noise = noise.unwrap_or(&ideal);
    let (state, map) = exact_state(circuit, noise)?;
    let table = OutcomeTable::from_populations(circuit.n_sites, &state.populations(), &noise.readout());
    Ok(relabel_table(&table, &map))
}

/// One trajectory shot with its own random stream.
pub fn trajectory_shot(circuit: &NativeCircuit, noise: &NoiseParams, seed: u64, shot: u64) -> ShotRecord {
    let mut rng = rng::stream(seed, &[shot]);
    let pops = noise.prep_populations();
    let levels: Vec<Level> = (0..circuit.n_sites)
        .map(|_| {
            let u: f64 = rand::Rng::random(&mut rng);
            let mut acc = 0.0;
            for (l, &p) in pops.iter().enumerate() {
                acc += p;
                if u < acc {
                    return Level::from_index(l);
                }
            }
            Level::Q1
        })
        .collect();
    let mut state = PureState::from_levels(&levels);
    let pulse = noise.prep_pulse();
    for site in 0..circuit.n_sites {
        state.unitary(site, &pulse);
    }
    let mut traj = Trajectory { state, rng: &mut rng };
    let map = drive(&mut traj, circuit, noise, None);
    let state = traj.state;
    let rec = state.sample_record(&noise.readout(), &mut rng);
    ShotRecord { outcomes: map.iter().map(|&m| rec.outcomes[m]).collect() }
}

/// Trajectory samples. Deterministic for a fixed seed regardless of thread count.
pub fn sample_shots(circuit: &NativeCircuit, noise: Option<&NoiseParams>, n_shots: usize, seed: u64) -> Vec<ShotRecord> {
    let ideal = NoiseParams::ideal();
    let noise = noise.unwrap_or(&ideal);
    (0..n_shots as u64)
        .into_par_iter()
        .map(|i| trajectory_shot(circuit, noise, seed, i))
        .collect()
}

/// Shots drawn from the exact distribution.
pub fn sample_exact(circuit: &NativeCircuit, noise: Option<&NoiseParams>, n_shots: usize, seed: u64) -> Result<Vec<ShotRecord>> {
    let table = exact_distribution(circuit, noise)?;
    Ok(table.sample(n_shots, &mut rng::stream(seed, &[u64::MAX])))
}

/// Shots from the selected backend.
pub fn simulate_shots(
    circuit: &NativeCircuit,
    noise: Option<&NoiseParams>,
    n_shots: usize,
    seed: u64,
    backend: Backend,
) -> Result<Vec<ShotRecord>> {
    match backend.resolve(circuit.n_sites) {
        Backend::Trajectory => Ok(sample_shots(circuit, noise, n_shots, seed)),
        _ => sample_exact(circuit, noise, n_shots, seed),
    }
}

/// Noiseless pure-state run from |0…0⟩ with an optional inserted Pauli.
pub fn ideal_pure_run(circuit: &NativeCircuit, fault: Option<Fault>) -> (PureState, Vec<usize>) {
    let mut state = PureState::from_levels(&vec![Level::Q0; circuit.n_sites]);
    let map = drive(&mut state, circuit, &NoiseParams::ideal(), fault);
    (state, map)
}

/// Empirical distribution of records over the outcome table index.
pub fn empirical_table(n_sites: usize, records: &[ShotRecord]) -> OutcomeTable {
    let mut probs = vec![0.0; 3usize.pow(n_sites as u32)];
    for r in records {
        probs[OutcomeTable::index_of(&r.outcomes)] += 1.0;
    }
    let n = records.len() as f64;
    probs.iter_mut().for_each(|p| *p /= n);
    OutcomeTable { n_sites, probs }
}

/// Total variation distance between two outcome tables.
pub fn table_tvd(a: &OutcomeTable, b: &OutcomeTable) -> f64 {
    0.5 * a.probs.iter().zip(&b.probs).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
