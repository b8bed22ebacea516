//! Amplification codes standing in for the fault-tolerant encoding of the
//! computation. Only X-type error detection matters for the trap analysis.

use crate::error::{Error, Result};
use crate::qudit::Gate;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmplificationCode {
    /// No encoding; distance 1.
    Identity,
    /// `|a⟩ ↦ |a, a, …, a⟩` on `k` qudits: every X pattern that is not a
    /// uniform shift is detected, so distance `k`.
    Repetition { k: usize },
}

impl AmplificationCode {
    pub fn repetition(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::CodeParams("repetition length must be positive".into()));
        }
        Ok(AmplificationCode::Repetition { k })
    }

    pub fn length(&self) -> usize {
        match self {
            AmplificationCode::Identity => 1,
            AmplificationCode::Repetition { k } => *k,
        }
    }

    /// Minimum number of X-hit sites an undetected logical error needs (`d₁`).
    pub fn distance(&self) -> usize {
        self.length()
    }

    /// Syndrome fires for this X-exponent pattern.
    pub fn detects(&self, x: &[u32]) -> bool {
        match self {
            AmplificationCode::Identity => false,
            AmplificationCode::Repetition { .. } => x.windows(2).any(|w| w[0] != w[1]),
        }
    }

    /// Undetected and logically non-trivial.
    pub fn corrupts(&self, x: &[u32]) -> bool {
        !self.detects(x) && x.iter().any(|&e| e != 0)
    }

    /// Encoder on `sites` (first site carries the data).
    pub fn encode_circuit(&self, sites: &[usize]) -> Vec<Gate> {
        sites[1..].iter().map(|&t| Gate::cx(sites[0], t)).collect()
    }

    /// `CX⁻¹` cascade: leaves the data on `sites[0]` and the syndrome
    /// `x_j − x_0` on the others.
    pub fn decode_circuit(&self, sites: &[usize], d: u32) -> Vec<Gate> {
        sites[1..].iter().rev().flat_map(|&t| Gate::cx(sites[0], t).repeated(d - 1)).collect()
    }
}
