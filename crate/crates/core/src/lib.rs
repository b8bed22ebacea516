//! Simulation and property-testing harness for trap-based verifiable blind
//! delegated quantum computation over qudits.
//!
//! The crate is layered bottom-up:
//!
//! * [`qudit`]: arithmetic over `F_d`, the generalized Pauli group, Clifford
//!   conjugation and diagonal phase-polynomial rotations.
//! * [`statevector`]: dense state vectors, density matrices and metrics.
//! * [`mbqc`]: open graphs, flows, measurement patterns and honest execution.
//! * [`graphs`]: trapified graph builders (dotted-complete, dotted-line,
//!   output gadgets) and trap assignments.
//! * [`localising`]: the verifier/prover state machines of the localising
//!   protocol together with the transcript channel and blindness checks.
//! * [`polycode`]: the signed polynomial code.
//! * [`abe`]: logical circuits on encoded qudits and Toffoli teleportation.
//! * [`frame`]: twirling, Pauli-frame propagation and detection bounds.
//! * [`hybrid`]: the end-to-end hybrid protocol and communication counting.

pub mod abe;
pub mod error;
pub mod frame;
pub mod graphs;
pub mod hybrid;
pub mod localising;
pub mod mbqc;
pub mod polycode;
pub mod qudit;
pub mod rng;
pub mod statevector;
pub mod stats;

pub use error::{Error, Result};

/// Simulation backend selector shared by the protocol drivers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Dense amplitudes, exact but exponential in the register size.
    Statevector,
    /// Pauli-frame bookkeeping, restricted to Pauli prover strategies.
    Frame,
}
