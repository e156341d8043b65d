//! Native-gate circuits for the neutral-atom register and their text format.

mod compile;
mod logical;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::format::sig;

pub use compile::{compile_encoded, compile_unencoded, Builder, FRAC_PI_2, FRAC_PI_4, PI};
pub use logical::{
    ideal_distribution, ideal_logical_unitary, ideal_state, Basis, LogicalCircuit, LogicalGate, PrepKind,
};

#[derive(Clone, Debug, PartialEq)]
pub enum NativeGate {
    /// Rotation by `theta` about cos φ X + sin φ Y on every atom.
    GlobalRotation { theta: f64, phi: f64 },
    LocalZ { site: usize, theta: f64 },
    Cz { a: usize, b: usize },
    /// After this gate, label `i` refers to the atom previously labelled `perm[i]`.
    Relabel { perm: Vec<usize> },
    /// Bookkeeping marker for a virtual Z on the listed labels; it has no
    /// physical effect because later GR angles are already negated.
    VirtualGlobalZ { sites: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct NativeCircuit {
    pub n_sites: usize,
    pub gates: Vec<NativeGate>,
    pub measured: bool,
}

impl NativeCircuit {
    pub fn new(n_sites: usize) -> Self {
        NativeCircuit { n_sites, gates: Vec::new(), measured: false }
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites {
            Err(Error::SiteOutOfRange { site, n_sites: self.n_sites })
        } else {
            Ok(())
        }
    }

    pub fn push(&mut self, gate: NativeGate) -> Result<()> {
        if self.measured {
            return Err(Error::GateAfterMeasure);
        }
        match &gate {
            NativeGate::GlobalRotation { .. } => {}
            NativeGate::LocalZ { site, .. } => self.check_site(*site)?,
            NativeGate::Cz { a, b } => {
                self.check_site(*a)?;
                self.check_site(*b)?;
                if a == b {
                    return Err(Error::SameSite(*a));
                }
            }
            NativeGate::Relabel { perm } => {
                let mut seen = vec![false; self.n_sites];
                if perm.len() != self.n_sites {
                    return Err(Error::InvalidPermutation(perm.clone()));
                }
                for &p in perm {
                    if p >= self.n_sites || seen[p] {
                        return Err(Error::InvalidPermutation(perm.clone()));
                    }
                    seen[p] = true;
                }
            }
            NativeGate::VirtualGlobalZ { sites } => {
                for &s in sites {
                    self.check_site(s)?;
                }
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn measure(&mut self) {
        self.measured = true;
    }

    pub fn count_cz(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, NativeGate::Cz { .. })).count()
    }

    pub fn count_gr(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, NativeGate::GlobalRotation { .. })).count()
    }

    pub fn count_rz(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, NativeGate::LocalZ { .. })).count()
    }

    /// Number of gates that act on atoms (everything except relabels and
    /// virtual-Z markers).
    pub fn physical_len(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| !matches!(g, NativeGate::Relabel { .. } | NativeGate::VirtualGlobalZ { .. }))
            .count()
    }

    /// Line-oriented dump, one gate per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# sites {}", self.n_sites).unwrap();
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        for g in &self.gates {
            match g {
                NativeGate::GlobalRotation { theta, phi } => {
                    writeln!(out, "GR {} {}", sig(*theta, 12), sig(*phi, 12))
                }
                NativeGate::LocalZ { site, theta } => writeln!(out, "RZ {} {}", site, sig(*theta, 12)),
                NativeGate::Cz { a, b } => writeln!(out, "CZ {a} {b}"),
                NativeGate::Relabel { perm } => writeln!(out, "RELABEL {}", join(perm)),
                NativeGate::VirtualGlobalZ { sites } => writeln!(out, "VZ {}", join(sites)),
            }
            .unwrap();
        }
        if self.measured {
            out.push_str("MEASURE\n");
        }
        out
    }

    /// Parses [`NativeCircuit::to_text`] output. Without a `# sites` header the
    /// register size is inferred from the largest index.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut declared: Option<usize> = None;
        let mut gates = Vec::new();
        let mut measured = false;
        let mut max_site = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |msg: &str| Error::Parse { line: lineno + 1, msg: msg.to_string() };
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(n) = rest.strip_prefix("sites") {
                    declared = Some(n.trim().parse().map_err(|_| err("bad site count"))?);
                }
                continue;
            }
            if measured {
                return Err(err("gate after MEASURE"));
            }
            let mut tok = line.split_whitespace();
            let op = tok.next().unwrap_or_default();
            let args: Vec<&str> = tok.collect();
            let float = |s: &str| s.parse::<f64>().map_err(|_| err("bad number"));
            let idx = |s: &str| s.parse::<usize>().map_err(|_| err("bad index"));
            let gate = match (op, args.len()) {
                ("GR", 2) => NativeGate::GlobalRotation { theta: float(args[0])?, phi: float(args[1])? },
                ("RZ", 2) => NativeGate::LocalZ { site: idx(args[0])?, theta: float(args[1])? },
                ("CZ", 2) => NativeGate::Cz { a: idx(args[0])?, b: idx(args[1])? },
                ("RELABEL", _) => {
                    NativeGate::Relabel { perm: args.iter().map(|a| idx(a)).collect::<Result<_>>()? }
                }
                ("VZ", _) => NativeGate::VirtualGlobalZ {
                    sites: args.iter().map(|a| idx(a)).collect::<Result<_>>()?,
                },
                ("MEASURE", 0) => {
                    measured = true;
                    continue;
                }
                _ => return Err(err(&format!("unrecognized gate `{line}`"))),
            };
            match &gate {
                NativeGate::LocalZ { site, .. } => max_site = max_site.max(*site + 1),
                NativeGate::Cz { a, b } => max_site = max_site.max(a.max(b) + 1),
                NativeGate::Relabel { perm } => max_site = max_site.max(perm.len()),
                NativeGate::VirtualGlobalZ { sites } => {
                    max_site = max_site.max(sites.iter().map(|s| s + 1).max().unwrap_or(0))
                }
                NativeGate::GlobalRotation { .. } => {}
            }
            gates.push((lineno + 1, gate));
        }
        let mut c = NativeCircuit::new(declared.unwrap_or(max_site.max(1)));
        for (line, g) in gates {
            c.push(g).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        }
        c.measured = measured;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut c = NativeCircuit::new(3);
        c.push(NativeGate::GlobalRotation { theta: FRAC_PI_2, phi: -FRAC_PI_4 }).unwrap();
        c.push(NativeGate::LocalZ { site: 2, theta: PI }).unwrap();
        c.push(NativeGate::Cz { a: 0, b: 1 }).unwrap();
        c.push(NativeGate::Relabel { perm: vec![1, 0, 2] }).unwrap();
        c.push(NativeGate::VirtualGlobalZ { sites: vec![0, 1, 2] }).unwrap();
        c.measure();
        let text = c.to_text();
        assert!(text.contains("GR 1.57079632679 -0.785398163397\n"));
        assert!(text.ends_with("MEASURE\n"));
        let back = NativeCircuit::from_text(&text).unwrap();
        assert_eq!(back.n_sites, 3);
        assert_eq!(back.gates.len(), 5);
        assert!(back.measured);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn rejects_malformed_circuits() {
        let mut c = NativeCircuit::new(2);
        assert!(c.push(NativeGate::Cz { a: 1, b: 1 }).is_err());
        assert!(c.push(NativeGate::LocalZ { site: 2, theta: 0.0 }).is_err());
        assert!(c.push(NativeGate::Relabel { perm: vec![0, 0] }).is_err());
        c.measure();
        assert_eq!(c.push(NativeGate::GlobalRotation { theta: 0.0, phi: 0.0 }), Err(Error::GateAfterMeasure));
        assert!(NativeCircuit::from_text("MEASURE\nCZ 0 1\n").is_err());
        assert!(NativeCircuit::from_text("FOO 1\n").is_err());
    }
}
