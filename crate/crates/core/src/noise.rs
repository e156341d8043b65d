//! Calibrated five-level noise model: lossy state preparation, CZ dephasing and
//! spontaneous transitions, coherent GR and RZ over-rotation, RZ leakage, and
//! bright/dark misclassification at readout.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levels::{KrausChannel, Readout, N_LEVELS};
use crate::linalg::{gr_matrix, rz_matrix, Mat2};

/// Transition probabilities, `m[dest][source]`.
pub type TransitionMatrix = [[f64; N_LEVELS]; N_LEVELS];

const PPM: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    pub prep_p: f64,
    pub prep_q: f64,
    pub cz_phase_error: f64,
    pub cz_transition_matrix: TransitionMatrix,
    pub gr_overrotation: f64,
    pub rz_relative_overrotation: f64,
    pub rz_transition_matrix: TransitionMatrix,
    pub meas_eps0: f64,
    pub meas_eps1: f64,
}

fn scale_ppm(m: [[f64; N_LEVELS]; N_LEVELS]) -> TransitionMatrix {
    m.map(|row| row.map(|v| v * PPM))
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            prep_p: 0.006,
            prep_q: 0.046,
            cz_phase_error: 0.0035,
            cz_transition_matrix: scale_ppm([
                [17.4, 185.0, 4.9, 165.4, 0.0],
                [18.5, 197.5, 4.6, 177.7, 0.0],
                [31.1, 420.3, 45.8, 1210.0, 0.0],
                [42.1, 590.2, 52.9, 1901.0, 0.0],
                [0.0, 5000.0, 0.0, 0.0, 0.0],
            ]),
            gr_overrotation: 0.0345,
            rz_relative_overrotation: 0.012,
            rz_transition_matrix: scale_ppm([
                [0.0, 207.2, 0.0, 0.0, 0.0],
                [0.0, 223.1, 0.0, 0.0, 0.0],
                [0.0, 364.3, 0.0, 0.0, 0.0],
                [0.0, 524.0, 0.0, 0.0, 0.0],
                [0.0; 5],
            ]),
            meas_eps0: 0.004,
            meas_eps1: 0.028,
        }
    }
}

const SCALAR_FIELDS: [&str; 7] = [
    "prep_p",
    "prep_q",
    "cz_phase_error",
    "gr_overrotation",
    "rz_relative_overrotation",
    "meas_eps0",
    "meas_eps1",
];

impl NoiseParams {
    /// Every mechanism switched off.
    pub fn ideal() -> Self {
        NoiseParams {
            prep_p: 0.0,
            prep_q: 0.0,
            cz_phase_error: 0.0,
            cz_transition_matrix: [[0.0; N_LEVELS]; N_LEVELS],
            gr_overrotation: 0.0,
            rz_relative_overrotation: 0.0,
            rz_transition_matrix: [[0.0; N_LEVELS]; N_LEVELS],
            meas_eps0: 0.0,
            meas_eps1: 0.0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: NoiseParams =
            serde_json::from_str(text).map_err(|e| Error::InvalidNoise(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("noise params serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, v: f64| -> Result<()> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidNoise(format!("{name} = {v} is not a probability")))
            }
        };
        prob("prep_p", self.prep_p)?;
        prob("prep_q", self.prep_q)?;
        prob("prep_p + prep_q", self.prep_p + self.prep_q)?;
        prob("cz_phase_error", self.cz_phase_error)?;
        prob("meas_eps0", self.meas_eps0)?;
        prob("meas_eps1", self.meas_eps1)?;
        for v in [self.gr_overrotation, self.rz_relative_overrotation] {
            if !v.is_finite() {
                return Err(Error::InvalidNoise("non-finite over-rotation".into()));
            }
        }
        for (name, m) in [
            ("cz_transition_matrix", &self.cz_transition_matrix),
            ("rz_transition_matrix", &self.rz_transition_matrix),
        ] {
            for s in 0..N_LEVELS {
                let mut col = 0.0;
                for (d, row) in m.iter().enumerate() {
                    prob(&format!("{name}[{d}][{s}]"), row[s])?;
                    col += row[s];
                }
                if col > 1.0 + 1e-12 {
                    return Err(Error::InvalidNoise(format!(
                        "{name} column {s} sums to {col} > 1"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Copy with the named fields replaced. Scalar fields use their JSON name;
    /// matrix entries use `matrix.dest.source`.
    pub fn scaled(&self, overrides: &BTreeMap<String, f64>) -> Result<Self> {
        let mut out = self.clone();
        for (key, &value) in overrides {
            let parts: Vec<&str> = key.split('.').collect();
            match parts.as_slice() {
                [name] => {
                    let slot = match *name {
                        "prep_p" => &mut out.prep_p,
                        "prep_q" => &mut out.prep_q,
                        "cz_phase_error" => &mut out.cz_phase_error,
                        "gr_overrotation" => &mut out.gr_overrotation,
                        "rz_relative_overrotation" => &mut out.rz_relative_overrotation,
                        "meas_eps0" => &mut out.meas_eps0,
                        "meas_eps1" => &mut out.meas_eps1,
                        _ => return Err(Error::UnknownParameter(key.clone())),
                    };
                    *slot = value;
                }
                [name, d, s] => {
                    let m = match *name {
                        "cz_transition_matrix" => &mut out.cz_transition_matrix,
                        "rz_transition_matrix" => &mut out.rz_transition_matrix,
                        _ => return Err(Error::UnknownParameter(key.clone())),
                    };
                    let idx = |t: &str| {
                        t.parse::<usize>()
                            .ok()
                            .filter(|&i| i < N_LEVELS)
                            .ok_or_else(|| Error::UnknownParameter(key.clone()))
                    };
                    m[idx(d)?][idx(s)?] = value;
                }
                _ => return Err(Error::UnknownParameter(key.clone())),
            }
        }
        out.validate()?;
        Ok(out)
    }

    pub fn scalar_field_names() -> &'static [&'static str] {
        &SCALAR_FIELDS
    }

    /// Per-site level populations before the preparation pulse.
    pub fn prep_populations(&self) -> [f64; N_LEVELS] {
        let (p, q) = (self.prep_p, self.prep_q);
        [p / 2.0, 1.0 - p - q, p / 2.0, q, 0.0]
    }

    /// Preparation π-pulse about x, including over-rotation.
    pub fn prep_pulse(&self) -> Mat2 {
        self.noisy_gr(std::f64::consts::PI, 0.0)
    }

    pub fn noisy_gr_angle(&self, theta: f64) -> f64 {
        theta + self.gr_overrotation
    }

    pub fn noisy_gr(&self, theta: f64, phi: f64) -> Mat2 {
        gr_matrix(self.noisy_gr_angle(theta), phi)
    }

    pub fn noisy_rz_angle(&self, theta: f64) -> f64 {
        theta * (1.0 + self.rz_relative_overrotation)
    }

    pub fn noisy_rz(&self, theta: f64) -> Mat2 {
        rz_matrix(self.noisy_rz_angle(theta))
    }

    pub fn cz_jump_channel(&self) -> KrausChannel {
        KrausChannel::from_transitions(&self.cz_transition_matrix)
            .expect("validated transition matrix")
    }

    pub fn rz_jump_channel(&self) -> KrausChannel {
        KrausChannel::from_transitions(&self.rz_transition_matrix)
            .expect("validated transition matrix")
    }

    /// Single-site CZ noise: Z with probability `cz_phase_error`, then the
    /// transition channel.
    pub fn cz_site_channel(&self) -> KrausChannel {
        KrausChannel::phase_flip(self.cz_phase_error).then(&self.cz_jump_channel())
    }

    pub fn readout(&self) -> Readout {
        Readout {
            eps0: self.meas_eps0,
            eps1: self.meas_eps1,
        }
    }
}

/// Total jump probability out of `source`, excluding the same-level entry.
pub fn leakage_from(m: &TransitionMatrix, source: usize) -> f64 {
    (0..N_LEVELS).filter(|&d| d != source).map(|d| m[d][source]).sum()
}
