//! Prover behaviours.

use crate::error::{Error, Result};
use crate::qudit::{Gate, GateKind};
use serde::{Deserialize, Serialize};

/// Pauli deviation `X^x Z^z` on one vertex. On a measured vertex it acts
/// right before the computational-basis readout of the rotated qudit, so only
/// its X part matters (it shifts the report by `x`); on an output it is a
/// physical Pauli on the returned register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliAttack {
    pub vertex: usize,
    pub x: u32,
    pub z: u32,
}

/// A gate the prover applies just before the measurement at position
/// `before` of the public order (`before = order.len()` means after the
/// last one). Sites `< n_vertices` are vertices, `n_vertices + k` is ancilla `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedGate {
    pub before: usize,
    pub gate: Gate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProverStrategy {
    Honest,
    PauliAttack { attacks: Vec<PauliAttack> },
    UnitaryAttack { ancillas: usize, gates: Vec<TimedGate> },
}

pub const MAX_ANCILLAS: usize = 2;

impl ProverStrategy {
    pub fn is_pauli(&self) -> bool {
        !matches!(self, ProverStrategy::UnitaryAttack { .. })
    }

    /// Net `(x, z)` per vertex for Pauli strategies.
    pub fn pauli_table(&self, n: usize, d: u32) -> Result<Vec<(u32, u32)>> {
        let mut t = vec![(0, 0); n];
        if let ProverStrategy::PauliAttack { attacks } = self {
            for a in attacks {
                if a.vertex >= n {
                    return Err(Error::MalformedStrategy(format!("attack on vertex {} of {n}", a.vertex)));
                }
                t[a.vertex].0 = (t[a.vertex].0 + a.x) % d;
                t[a.vertex].1 = (t[a.vertex].1 + a.z) % d;
            }
        }
        Ok(t)
    }

    pub fn validate(&self, n: usize, n_rounds: usize, d: u32) -> Result<()> {
        match self {
            ProverStrategy::Honest => Ok(()),
            ProverStrategy::PauliAttack { .. } => self.pauli_table(n, d).map(|_| ()),
            ProverStrategy::UnitaryAttack { ancillas, gates } => {
                if *ancillas > MAX_ANCILLAS {
                    return Err(Error::MalformedStrategy(format!("{ancillas} ancillas exceed {MAX_ANCILLAS}")));
                }
                for tg in gates {
                    if tg.before > n_rounds {
                        return Err(Error::MalformedStrategy(format!("gate scheduled at round {}", tg.before)));
                    }
                    if tg.gate.sites.len() != tg.gate.arity() {
                        return Err(Error::MalformedStrategy(format!("{} has the wrong number of sites", tg.gate.name())));
                    }
                    for &s in &tg.gate.sites {
                        if s >= n + ancillas {
                            return Err(Error::MalformedStrategy(format!("site {s} is not held by the prover")));
                        }
                    }
                    if let GateKind::Pauli(p) = &tg.gate.kind {
                        if p.d() != d {
                            return Err(Error::MalformedStrategy("Pauli over the wrong modulus".into()));
                        }
                    }
                }
                Ok(())
            }
        }
    }
}
