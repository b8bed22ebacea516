//! Logical circuits on padded signed-polynomial blocks and Toffoli gate
//! teleportation through the resource `Σ_{a,b} |a, b, ab⟩`.
//!
//! Teleporting `|x, y, z⟩` on targets `T₁T₂T₃` into the resource `R₁R₂R₃`:
//! `T₁ −= R₁`, `T₂ −= R₂`, `R₃ += T₃`, then `F` on `T₃` and a Z readout of
//! all three targets, giving `m₁ = x − a`, `m₂ = y − b` and `m₃`. The
//! resource then holds `|x − m₁, y − m₂, z + (x − m₁)(y − m₂)⟩` with the phase
//! `ω^{m₃(R₃ − R₁R₂)}`, which the correction
//! `CZ₁₂^{m₃} Z₃^{−m₃}`, `X₁^{m₁} X₂^{m₂}`, `CX(R₂→R₃)^{m₁} CX(R₁→R₃)^{m₂} X₃^{−m₁m₂}`
//! (applied in that order) turns into `|x, y, z + xy⟩`.

use crate::error::{Error, Result};
use crate::localising::{Payload, Transcript};
use crate::polycode::{detect_and_decode, encode_state, transversal_gates, update_pauli_key, CodeParams, Decoded, LogicalClifford, PauliKey, SignKey};
use crate::qudit::{md, Gate, PauliOp};
use crate::statevector::{checked_dim, StateVector, MAX_DIM};
use crate::stats::{total_variation, uniform_within_sigma};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogicalKind {
    CX,
    F,
    S,
    Z,
    X,
    T,
    Toffoli,
}

impl LogicalKind {
    fn arity(self) -> usize {
        match self {
            LogicalKind::CX => 2,
            LogicalKind::Toffoli => 3,
            _ => 1,
        }
    }

    pub(crate) fn clifford(self) -> Option<LogicalClifford> {
        match self {
            LogicalKind::CX => Some(LogicalClifford::CX),
            LogicalKind::F => Some(LogicalClifford::F),
            LogicalKind::S => Some(LogicalClifford::S),
            LogicalKind::Z => Some(LogicalClifford::Z),
            LogicalKind::X => Some(LogicalClifford::X),
            LogicalKind::T | LogicalKind::Toffoli => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalGate {
    pub gate: LogicalKind,
    pub wires: Vec<usize>,
}

impl LogicalGate {
    pub fn new(gate: LogicalKind, wires: Vec<usize>) -> Self {
        LogicalGate { gate, wires }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalCircuit {
    wires: usize,
    gates: Vec<LogicalGate>,
}

impl LogicalCircuit {
    pub fn new(wires: usize, gates: Vec<LogicalGate>) -> Result<Self> {
        for g in &gates {
            if g.wires.len() != g.gate.arity() {
                return Err(Error::Wiring(format!("{:?} takes {} wires", g.gate, g.gate.arity())));
            }
            for (i, &w) in g.wires.iter().enumerate() {
                if w >= wires {
                    return Err(Error::Wiring(format!("wire {w} of {wires}")));
                }
                if g.wires[..i].contains(&w) {
                    return Err(Error::Wiring(format!("wire {w} repeats in {:?}", g.gate)));
                }
            }
        }
        Ok(LogicalCircuit { wires, gates })
    }

    /// Parse a JSON list of `{gate, wires}`; the wire count is one past the
    /// largest index.
    pub fn from_json(s: &str) -> Result<Self> {
        let gates: Vec<LogicalGate> = serde_json::from_str(s)?;
        let wires = gates.iter().flat_map(|g| g.wires.iter()).max().map_or(0, |w| w + 1);
        Self::new(wires, gates)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.gates)?)
    }

    pub fn wires(&self) -> usize {
        self.wires
    }

    pub fn gates(&self) -> &[LogicalGate] {
        &self.gates
    }

    pub fn toffoli_count(&self) -> usize {
        self.gates.iter().filter(|g| g.gate == LogicalKind::Toffoli).count()
    }

    pub fn is_clifford(&self) -> bool {
        self.gates.iter().all(|g| g.gate.clifford().is_some())
    }

    /// The circuit as plain qudit gates on `wires` sites.
    pub fn unencoded(&self, d: u32) -> Vec<Gate> {
        self.gates
            .iter()
            .map(|g| {
                let w = &g.wires;
                match g.gate {
                    LogicalKind::CX => Gate::cx(w[0], w[1]),
                    LogicalKind::F => Gate::f(w[0]),
                    LogicalKind::S => Gate::s(w[0]),
                    LogicalKind::Z => Gate::pauli(PauliOp::single(d, 1, 0, 0, 1), vec![w[0]]),
                    LogicalKind::X => Gate::pauli(PauliOp::single(d, 1, 0, 1, 0), vec![w[0]]),
                    LogicalKind::T => Gate::t(w[0]),
                    LogicalKind::Toffoli => Gate::toffoli(w[0], w[1], w[2]),
                }
            })
            .collect()
    }
}

/// `Toffoli · |+₀⟩|+₀⟩|0⟩ = (1/d) Σ_{a,b} |a, b, ab⟩`.
pub fn toffoli_state(d: u32) -> Result<StateVector> {
    crate::qudit::check_prime(d)?;
    if d == 2 {
        return Err(Error::GateUnsupported { gate: "Toffoli resource".into(), d });
    }
    let mut st = StateVector::plus(d, 2)?;
    st.append(&StateVector::zero(d, 1)?)?;
    st.apply_gate(&Gate::toffoli(0, 1, 2))?;
    Ok(st)
}

/// One teleportation exchange: the prover's padded readout `b̃` and the
/// verifier's reply `r̃` fixing the Clifford correction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToffoliRound {
    pub b_tilde: [u32; 3],
    pub r_tilde: [u32; 3],
    /// Correction on the renumbered register.
    pub correction: Vec<Gate>,
    /// Where the resource wires sit once the targets are gone.
    pub output_sites: [usize; 3],
}

fn check_wiring(targets: [usize; 3], resource: [usize; 3], n: usize) -> Result<()> {
    let all = [targets[0], targets[1], targets[2], resource[0], resource[1], resource[2]];
    for (i, &s) in all.iter().enumerate() {
        if s >= n {
            return Err(Error::Wiring(format!("site {s} of {n}")));
        }
        if all[..i].contains(&s) {
            return Err(Error::Wiring(format!("site {s} used twice")));
        }
    }
    Ok(())
}

pub fn entangling_circuit(d: u32, t: [usize; 3], r: [usize; 3]) -> Vec<Gate> {
    let mut g = Gate::cx(r[0], t[0]).repeated(d - 1);
    g.extend(Gate::cx(r[1], t[1]).repeated(d - 1));
    g.push(Gate::cx(t[2], r[2]));
    g.push(Gate::f(t[2]));
    g
}

/// The Clifford correction for readout `m` on resource sites `r`.
pub fn toffoli_correction(d: u32, m: [u32; 3], r: [usize; 3]) -> Vec<Gate> {
    let mut g = Vec::new();
    g.extend(Gate::cz(r[0], r[1]).repeated(m[2]));
    g.push(Gate::pauli(PauliOp::single(d, 1, 0, 0, md(-(m[2] as i64), d)), vec![r[2]]));
    g.push(Gate::pauli(PauliOp::single(d, 1, 0, m[0], 0), vec![r[0]]));
    g.push(Gate::pauli(PauliOp::single(d, 1, 0, m[1], 0), vec![r[1]]));
    g.extend(Gate::cx(r[1], r[2]).repeated(m[0]));
    g.extend(Gate::cx(r[0], r[2]).repeated(m[1]));
    g.push(Gate::pauli(PauliOp::single(d, 1, 0, md(-((m[0] * m[1]) as i64), d), 0), vec![r[2]]));
    g.retain(|x| !matches!(&x.kind, crate::qudit::GateKind::Pauli(p) if p.is_identity_up_to_phase()));
    g
}

/// Teleport a Toffoli from `targets` into `resource` on a padded register.
/// `key` is the verifier's pad on every site. The measured targets leave the
/// register and the key, so later sites move down; the round records where
/// the resource ended up.
pub fn teleport_toffoli<R: Rng + ?Sized>(
    state: &mut StateVector,
    targets: [usize; 3],
    resource: [usize; 3],
    key: &mut PauliKey,
    rng: &mut R,
) -> Result<ToffoliRound> {
    let d = state.d();
    let n = state.n_sites();
    check_wiring(targets, resource, n)?;
    if key.n_sites() != n {
        return Err(Error::DimensionMismatch(key.n_sites(), n));
    }
    let ent = entangling_circuit(d, targets, resource);
    state.apply_circuit(&ent)?;
    let k = update_pauli_key(key, &ent)?;
    // Prover: Z readout of the targets, highest site first so the
    // remaining indices stay valid.
    let mut b = [0u32; 3];
    let mut by_site: Vec<usize> = (0..3).collect();
    by_site.sort_by_key(|&i| std::cmp::Reverse(targets[i]));
    for &i in &by_site {
        b[i] = state.measure_computational(targets[i], rng)?;
    }
    // Verifier: strip the X pad, reply with the correction label.
    let mut m = [0u32; 3];
    for i in 0..3 {
        m[i] = md(b[i] as i64 - k.x()[targets[i]] as i64, d);
    }
    let k = k.without_sites(&targets);
    let moved = resource.map(|r| r - targets.iter().filter(|&&t| t < r).count());
    let corr = toffoli_correction(d, m, moved);
    state.apply_circuit(&corr)?;
    *key = update_pauli_key(&k, &corr)?;
    Ok(ToffoliRound { b_tilde: b, r_tilde: m, correction: corr, output_sites: moved })
}

/// Distributions of `r̃` and `b̃` over an ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub samples: usize,
    pub r_tv_from_uniform: f64,
    pub b_tv_from_uniform: f64,
    /// Every cell count within `4σ` of `samples/d³`.
    pub r_uniform_4sigma: bool,
    pub b_uniform_4sigma: bool,
    pub r_counts: Vec<u64>,
}

fn cell(v: [u32; 3], d: u32) -> usize {
    ((v[0] * d + v[1]) * d + v[2]) as usize
}

fn counts(rounds: &[ToffoliRound], d: u32, pick: impl Fn(&ToffoliRound) -> [u32; 3]) -> Vec<u64> {
    let mut c = vec![0u64; (d * d * d) as usize];
    for r in rounds {
        c[cell(pick(r), d)] += 1;
    }
    c
}

/// Compare the correction traffic of an ensemble against uniform. Needs at
/// least `10·d³` rounds.
pub fn correction_leakage_check(rounds: &[ToffoliRound], d: u32) -> Result<LeakageReport> {
    let cells = (d * d * d) as usize;
    if rounds.len() < 10 * cells {
        return Err(Error::InsufficientSamples(format!("{} rounds for {cells} cells", rounds.len())));
    }
    let n = rounds.len();
    let rc = counts(rounds, d, |r| r.r_tilde);
    let bc = counts(rounds, d, |r| r.b_tilde);
    let uni = vec![1.0 / cells as f64; cells];
    let freq = |c: &[u64]| c.iter().map(|&k| k as f64 / n as f64).collect::<Vec<_>>();
    Ok(LeakageReport {
        samples: n,
        r_tv_from_uniform: total_variation(&freq(&rc), &uni)?,
        b_tv_from_uniform: total_variation(&freq(&bc), &uni)?,
        r_uniform_4sigma: uniform_within_sigma(&rc, 4.0),
        b_uniform_4sigma: uniform_within_sigma(&bc, 4.0),
        r_counts: rc,
    })
}

/// Total variation between the `r̃` histograms of two ensembles.
pub fn ensemble_distance(a: &[ToffoliRound], b: &[ToffoliRound], d: u32) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientSamples("empty ensemble".into()));
    }
    let fa: Vec<f64> = counts(a, d, |r| r.r_tilde).iter().map(|&k| k as f64 / a.len() as f64).collect();
    let fb: Vec<f64> = counts(b, d, |r| r.r_tilde).iter().map(|&k| k as f64 / b.len() as f64).collect();
    total_variation(&fa, &fb)
}

/// Padded, encoded logical wires held by the prover, with the verifier's keys.
#[derive(Clone, Debug)]
pub struct EncodedRegister {
    pub params: CodeParams,
    pub sign: SignKey,
    pub wires: usize,
    pub state: StateVector,
    pub key: PauliKey,
}

impl EncodedRegister {
    /// Encode `logical` and pad it with a fresh uniform Pauli key.
    pub fn inject<R: Rng + ?Sized>(logical: &StateVector, params: CodeParams, sign: SignKey, rng: &mut R) -> Result<Self> {
        let mut state = encode_state(logical, &params, &sign)?;
        let key = PauliKey::random(params.d(), state.n_sites(), rng);
        key.encrypt(&mut state)?;
        Ok(EncodedRegister { wires: logical.n_sites(), params, sign, state, key })
    }

    pub fn decrypted(&self) -> Result<StateVector> {
        let mut s = self.state.clone();
        self.key.decrypt(&mut s)?;
        Ok(s)
    }

    fn block(&self, w: usize) -> Vec<usize> {
        let m = self.params.m();
        (w * m..(w + 1) * m).collect()
    }

    /// Apply one logical gate transversally and update the pad.
    pub fn apply(&mut self, g: &LogicalGate) -> Result<()> {
        match g.gate.clifford() {
            Some(c) => {
                let gates = transversal_gates(c, &g.wires, &self.params, &self.sign)?;
                self.state.apply_circuit(&gates)?;
                self.key = update_pauli_key(&self.key, &gates)?;
                Ok(())
            }
            None if g.gate == LogicalKind::Toffoli => {
                // Three more padded blocks for the resource.
                let sites = (self.wires + 3) * self.params.m();
                checked_dim(self.params.d(), sites, MAX_DIM)?;
                Err(Error::Backend("encoded Toffoli teleportation on amplitudes".into()))
            }
            None => Err(Error::NotClifford(format!("{:?} on encoded blocks", g.gate))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LogicalRun {
    pub raw: Vec<Vec<u32>>,
    pub unpadded: Vec<Vec<u32>>,
    pub decoded: Vec<Decoded>,
    pub accept: bool,
    pub transcript: Transcript,
}

impl LogicalRun {
    pub fn logical_values(&self) -> Option<Vec<u32>> {
        self.decoded.iter().map(|d| if let Decoded::Accept(a) = d { Some(*a) } else { None }).collect()
    }
}

/// Apply `circuit` to the register, measure every physical qudit and run the
/// verifier's detection. `shifts[i]` is an X shift the prover adds to
/// physical qudit `i` right before readout.
pub fn run_logical_circuit<R: Rng + ?Sized>(
    circuit: &LogicalCircuit,
    reg: &mut EncodedRegister,
    shifts: &[u32],
    rng: &mut R,
) -> Result<LogicalRun> {
    if circuit.wires() > reg.wires {
        return Err(Error::Wiring(format!("{} wires for {} blocks", circuit.wires(), reg.wires)));
    }
    let n = reg.state.n_sites();
    if !shifts.is_empty() && shifts.len() != n {
        return Err(Error::DimensionMismatch(shifts.len(), n));
    }
    for g in circuit.gates() {
        reg.apply(g)?;
    }
    let d = reg.params.d();
    if !shifts.is_empty() {
        let x: Vec<u32> = shifts.iter().map(|s| s % d).collect();
        reg.state.apply_pauli(&PauliOp::from_xz(d, &x, &vec![0; n]))?;
    }
    let mut transcript = Transcript::new();
    let (mut raw, mut unpadded, mut decoded) = (Vec::new(), Vec::new(), Vec::new());
    // Readout removes sites, so always take the first remaining one.
    for w in 0..reg.wires {
        let sites = reg.block(w);
        let b: Vec<u32> = sites.iter().map(|_| reg.state.measure_computational(0, rng)).collect::<Result<_>>()?;
        transcript.push(Payload::LogicalOutcome { wire: w, values: b.clone() });
        let y = reg.key.unpad_readout(&sites, &b);
        decoded.push(detect_and_decode(&y, &reg.params, &reg.sign)?);
        raw.push(b);
        unpadded.push(y);
    }
    let accept = decoded.iter().all(|d| matches!(d, Decoded::Accept(_)));
    Ok(LogicalRun { raw, unpadded, decoded, accept, transcript })
}

/// Push a distribution over `m`-strings through `detect_and_decode`. Index
/// `a < d` is `Accept(a)`, index `d` is `Reject`.
pub fn decode_distribution(probs: &[f64], params: &CodeParams, sign: &SignKey) -> Result<Vec<f64>> {
    let d = params.d();
    let m = params.m();
    let dim = checked_dim(d, m, MAX_DIM)?;
    if probs.len() != dim {
        return Err(Error::DimensionMismatch(probs.len(), dim));
    }
    let mut out = vec![0.0; d as usize + 1];
    for (idx, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut y = vec![0; m];
        let mut k = idx;
        for s in (0..m).rev() {
            y[s] = (k % d as usize) as u32;
            k /= d as usize;
        }
        match detect_and_decode(&y, params, sign)? {
            Decoded::Accept(a) => out[a as usize] += p,
            Decoded::Reject => out[d as usize] += p,
        }
    }
    Ok(out)
}
