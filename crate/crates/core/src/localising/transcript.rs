//! Ordered message log between verifier and prover, with communication counters.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    VerifierToProver,
    ProverToVerifier,
}

/// What a prepared qudit is: `|basis⟩`, or `Z^{z} Rotation(angle)|+₀⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDescriptor {
    pub vertex: usize,
    pub basis: Option<u32>,
    pub angle: (u32, u32, u32),
    pub z: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    /// One prepared qudit (quantum channel).
    State(StateDescriptor),
    /// Measurement vector `δ` as a dit triple.
    Delta { vertex: usize, delta: (u32, u32, u32) },
    /// Reported outcome `b`.
    Outcome { vertex: usize, value: u32 },
    /// Padded logical measurement outcomes `b̃` of the encoded phase.
    LogicalOutcome { wire: usize, values: Vec<u32> },
    /// Toffoli teleportation correction selector `r̃`.
    Correction { gate: usize, values: Vec<u32> },
    /// Padded syndrome readout after the amplification decode.
    Syndrome { instance: usize, values: Vec<u32> },
}

impl Payload {
    fn direction(&self) -> Direction {
        match self {
            Payload::Outcome { .. } | Payload::LogicalOutcome { .. } | Payload::Syndrome { .. } => {
                Direction::ProverToVerifier
            },
            _ => Direction::VerifierToProver,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub quantum_states_sent: u64,
    pub dits_to_prover: u64,
    pub dits_to_verifier: u64,
    pub rounds: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub round: u64,
    pub direction: Direction,
    pub payload: Payload,
    pub counters: Counters,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    messages: Vec<Message>,
    counters: Counters,
    last: Option<Direction>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a message. A change of direction starts a new round.
    pub fn push(&mut self, payload: Payload) {
        let dir = payload.direction();
        if self.last != Some(dir) {
            self.counters.rounds += 1;
            self.last = Some(dir);
        }
        match &payload {
            Payload::State(_) => self.counters.quantum_states_sent += 1,
            Payload::Delta { .. } => self.counters.dits_to_prover += 3,
            Payload::Outcome { .. } => self.counters.dits_to_verifier += 1,
            Payload::LogicalOutcome { values, .. } | Payload::Syndrome { values, .. } => {
                self.counters.dits_to_verifier += values.len() as u64
            }
            Payload::Correction { values, .. } => self.counters.dits_to_prover += values.len() as u64,
        }
        self.messages.push(Message { round: self.counters.rounds, direction: dir, payload, counters: self.counters });
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn deltas(&self) -> Vec<(usize, (u32, u32, u32))> {
        self.messages
            .iter()
            .filter_map(|m| match m.payload {
                Payload::Delta { vertex, delta } => Some((vertex, delta)),
                _ => None,
            })
            .collect()
    }

    pub fn outcomes(&self) -> Vec<(usize, u32)> {
        self.messages
            .iter()
            .filter_map(|m| match m.payload {
                Payload::Outcome { vertex, value } => Some((vertex, value)),
                _ => None,
            })
            .collect()
    }

    /// Every `δ_i` is immediately followed by the outcome for the same vertex.
    pub fn check_alternation(&self) -> Result<()> {
        let mut pending: Option<usize> = None;
        for (k, m) in self.messages.iter().enumerate() {
            match (&m.payload, pending) {
                (Payload::Delta { vertex, .. }, None) => pending = Some(*vertex),
                (Payload::Outcome { vertex, .. }, Some(v)) if *vertex == v => pending = None,
                (Payload::Delta { .. } | Payload::Outcome { .. }, _) => {
                    return Err(Error::Alternation(format!("message {k} breaks δ/b alternation")));
                }
                (_, Some(_)) => return Err(Error::Alternation(format!("message {k} interleaves a δ/b pair"))),
                _ => {}
            }
        }
        if pending.is_some() {
            return Err(Error::Alternation("last δ has no outcome".into()));
        }
        Ok(())
    }

    /// Counters recomputed from the message list agree with the running ones.
    pub fn counters_consistent(&self) -> bool {
        let mut t = Transcript::new();
        for m in &self.messages {
            t.push(m.payload.clone());
        }
        t.counters == self.counters
    }

    /// JSON lines `{round, direction, kind, payload…, counters}`.
    pub fn write_jsonl<W: Write>(&self, w: &mut W) -> Result<()> {
        for m in &self.messages {
            serde_json::to_writer(&mut *w, m)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf)?;
        Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
    }
}
