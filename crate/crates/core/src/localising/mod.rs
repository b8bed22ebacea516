//! The localising protocol: a verifier and a prover exchanging prepared
//! qudits, measurement vectors `δ` and outcomes `b` over a transcript, with
//! traps deciding acceptance. The output stays with the prover at a fixed
//! position, one-time padded under a Pauli key only the verifier knows.

mod blindness;
mod code;
mod strategy;
mod transcript;

pub use blindness::{blindness_check, blindness_per_vertex, BlindnessReport};
pub use code::AmplificationCode;
pub use strategy::{PauliAttack, ProverStrategy, TimedGate, MAX_ANCILLAS};
pub use transcript::{Counters, Direction, Message, Payload, StateDescriptor, Transcript};

use crate::error::{Error, Result};
use crate::frame::{propagate_frame, FrameOutcome, PauliFrame};
use crate::graphs::{draw_assignment, TrapAssignment, TrapifiedGraph};
use crate::mbqc::{actual_angle, byproduct_signals, GraphRegister, MeasurementPattern, Role};
use crate::qudit::{gate_matrix, md, AngleVector, CMatrix, Gate, PauliOp};
use crate::statevector::{DensityMatrix, StateVector};
use crate::Backend;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Indicator {
    Acc,
    Rej,
}

/// The verifier's secret vector: pre-rotations, outcome pads, dummy values
/// and trap placement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifierSecrets {
    pub assignment: TrapAssignment,
    pub theta: Vec<AngleVector>,
    pub r: Vec<u32>,
    pub dummies: Vec<u32>,
}

/// A trapified graph carrying a computation: the free angles of every chain.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalisingInstance {
    d: u32,
    graph: TrapifiedGraph,
    free_angles: Vec<Vec<AngleVector>>,
}

impl LocalisingInstance {
    pub fn new(d: u32, graph: TrapifiedGraph, free_angles: Vec<Vec<AngleVector>>) -> Result<Self> {
        crate::qudit::check_prime(d)?;
        if graph.gadgets().is_empty() {
            return Err(Error::Parameter("gadgets are not attached".into()));
        }
        if free_angles.len() != graph.chains().len() {
            return Err(Error::DimensionMismatch(free_angles.len(), graph.chains().len()));
        }
        for (c, fa) in graph.chains().iter().zip(&free_angles) {
            if fa.len() != 2 * c.len() - 2 {
                return Err(Error::DimensionMismatch(fa.len(), 2 * c.len() - 2));
            }
            if fa.iter().any(|a| a.d() != d) {
                return Err(Error::ModulusMismatch(d, fa[0].d()));
            }
        }
        Ok(LocalisingInstance { d, graph, free_angles })
    }

    /// Every angle zero: each chain prepares `F^{2ℓ}|+₀⟩ = |+₀⟩`.
    pub fn identity(d: u32, graph: TrapifiedGraph) -> Result<Self> {
        let free = graph.chains().iter().map(|c| vec![AngleVector::zero(d); 2 * c.len() - 2]).collect();
        Self::new(d, graph, free)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn graph(&self) -> &TrapifiedGraph {
        &self.graph
    }

    pub fn free_angles(&self) -> &[Vec<AngleVector>] {
        &self.free_angles
    }

    pub fn pattern(&self, a: &TrapAssignment) -> Result<MeasurementPattern> {
        self.graph.pattern(self.d, a, &self.free_angles)
    }

    /// Ideal output on `O′`, computed directly as `Π F·Rotation(φ)†` on `|+₀⟩`
    /// per chain, without any graph state.
    pub fn ideal_output(&self) -> Result<StateVector> {
        let d = self.d;
        let f = gate_matrix(&Gate::f(0), d)?;
        let mut out = StateVector::zero(d, 0)?;
        for free in &self.free_angles {
            let mut angles = free.clone();
            angles.push(AngleVector::zero(d));
            angles.push(AngleVector::zero(d));
            let mut u = CMatrix::identity(d as usize, d as usize);
            for a in &angles {
                u = &f * a.rotation_matrix().adjoint() * u;
            }
            let plus = nalgebra::DVector::from_element(d as usize, num_complex::Complex64::new(1.0 / (d as f64).sqrt(), 0.0));
            out.append(&StateVector::single(d, (u * plus).iter().copied().collect())?)?;
        }
        Ok(out)
    }
}

pub fn draw_secrets<R: Rng + ?Sized>(inst: &LocalisingInstance, rng: &mut R) -> Result<VerifierSecrets> {
    let assignment = draw_assignment(&inst.graph, rng)?;
    secrets_for_assignment(inst, assignment, rng)
}

/// Fresh uniform pads, pre-rotations and dummy values for a fixed assignment.
pub fn secrets_for_assignment<R: Rng + ?Sized>(
    inst: &LocalisingInstance,
    assignment: TrapAssignment,
    rng: &mut R,
) -> Result<VerifierSecrets> {
    let d = inst.d;
    let roles = inst.graph.roles(&assignment)?;
    let space = AngleVector::space_size(d);
    let theta = roles
        .iter()
        .map(|r| if *r == Role::Output { AngleVector::zero(d) } else { AngleVector::from_index(d, rng.gen_range(0..space)) })
        .collect();
    let r = roles.iter().map(|_| rng.gen_range(0..d)).collect();
    let dummies = roles.iter().map(|r| if *r == Role::Dummy { rng.gen_range(0..d) } else { 0 }).collect();
    Ok(VerifierSecrets { assignment, theta, r, dummies })
}

/// The state the verifier sends for vertex `v`: `|d_v⟩` for dummies,
/// otherwise `Z^{z} Rotation(θ_v)|+₀⟩`. The exponent `z` pre-cancels the
/// `Z^{d_j}` every dummy neighbor `j` imprints through `cZ`; outputs use
/// `θ = 0` and add the pad `Z^{r_v}`.
pub fn prepare_vertex(p: &MeasurementPattern, v: usize, s: &VerifierSecrets) -> StateDescriptor {
    let d = p.d();
    let pre: i64 = p.graph().neighbors(v).iter().filter(|&&w| p.role(w) == Role::Dummy).map(|&w| s.dummies[w] as i64).sum();
    match p.role(v) {
        Role::Dummy => StateDescriptor { vertex: v, basis: Some(s.dummies[v] % d), angle: (0, 0, 0), z: 0 },
        Role::Output => StateDescriptor { vertex: v, basis: None, angle: (0, 0, 0), z: md(s.r[v] as i64 - pre, d) },
        _ => StateDescriptor { vertex: v, basis: None, angle: s.theta[v].coeffs(), z: md(-pre, d) },
    }
}

pub fn descriptor_state(desc: &StateDescriptor, d: u32) -> Result<StateVector> {
    match desc.basis {
        Some(k) => StateVector::basis(d, &[k]),
        None => {
            let (a, b, c) = desc.angle;
            let v = AngleVector::new(d, a as i64, b as i64, c as i64)?;
            let mut st = StateVector::rotated_plus(&v);
            if desc.z != 0 {
                st.apply_pauli(&PauliOp::single(d, 1, 0, 0, desc.z))?;
            }
            Ok(st)
        }
    }
}

/// `δ_v = φ′_v + θ_v + (r_v, 0, 0)`, with `φ′ = 0` off the computation.
pub fn delta_message(v: usize, p: &MeasurementPattern, s: &VerifierSecrets, signals: &[Option<u32>]) -> Result<AngleVector> {
    let d = p.d();
    let base = match p.role(v) {
        Role::Computation => actual_angle(v, p, signals)?,
        Role::Trap | Role::Dummy => AngleVector::zero(d),
        Role::Output => return Err(Error::InvalidRole(format!("output {v} is never measured"))),
    };
    base.compose(&s.theta[v])?.compose(&AngleVector::z_power(d, s.r[v]))
}

/// Signal `b − r` (mod `d`).
pub fn record_outcome(b: u32, r: u32, d: u32) -> u32 {
    md(b as i64 - r as i64, d)
}

/// Verifier key on `O′`: the returned register equals `K|ψ_c⟩` (up to phase)
/// for an honest prover.
pub fn output_key(p: &MeasurementPattern, s: &VerifierSecrets, signals: &[Option<u32>]) -> Result<PauliOp> {
    let d = p.d();
    let outs = p.graph().outputs();
    let mut x = Vec::new();
    let mut z = Vec::new();
    for &o in outs {
        let (sx, sz) = byproduct_signals(p, o, signals)?;
        x.push(md(-(sx as i64), d));
        z.push(md(s.r[o] as i64 - sz as i64, d));
    }
    Ok(PauliOp::from_xz(d, &x, &z))
}

#[derive(Clone, Debug)]
pub struct LocalisingRun {
    pub indicator: Indicator,
    pub transcript: Transcript,
    pub secrets: VerifierSecrets,
    pub pattern: MeasurementPattern,
    pub signals: Vec<Option<u32>>,
    pub output_key: PauliOp,
    /// Vertices of `O′`, in register order.
    pub output_sites: Vec<usize>,
    /// Prover-held output register (statevector backend), ancillas traced out.
    pub prover_output: Option<DensityMatrix>,
    /// Frame prediction (frame backend, or on request).
    pub frame: Option<FrameOutcome>,
    pub peak_sites: usize,
}

impl LocalisingRun {
    /// The verifier strips its key: `K⁻¹ ρ K`.
    pub fn decoded_output(&self) -> Result<DensityMatrix> {
        let rho = self.prover_output.as_ref().ok_or(Error::Backend("no amplitudes on this backend".into()))?;
        let kinv = self.output_key.inverse().matrix();
        rho.apply_unitary(&kinv)
    }

    pub fn trap_signals(&self) -> Vec<(usize, u32)> {
        (0..self.signals.len())
            .filter(|&v| self.pattern.role(v) == Role::Trap)
            .map(|v| (v, self.signals[v].unwrap_or(0)))
            .collect()
    }
}

pub fn run_localising<R: Rng + ?Sized>(
    inst: &LocalisingInstance,
    strategy: &ProverStrategy,
    backend: Backend,
    rng: &mut R,
) -> Result<LocalisingRun> {
    let secrets = draw_secrets(inst, rng)?;
    run_localising_with(inst, secrets, strategy, backend, rng)
}

pub fn run_localising_with<R: Rng + ?Sized>(
    inst: &LocalisingInstance,
    secrets: VerifierSecrets,
    strategy: &ProverStrategy,
    backend: Backend,
    rng: &mut R,
) -> Result<LocalisingRun> {
    let p = inst.pattern(&secrets.assignment)?;
    let n = p.graph().n_vertices();
    strategy.validate(n, p.order().len(), inst.d)?;
    match backend {
        Backend::Statevector => run_statevector(inst, p, secrets, strategy, rng),
        Backend::Frame => {
            if !strategy.is_pauli() {
                return Err(Error::Backend("unitary attacks need the statevector backend".into()));
            }
            run_frame(inst, p, secrets, strategy, rng)
        }
    }
}

fn send_states(p: &MeasurementPattern, s: &VerifierSecrets, t: &mut Transcript) -> Vec<StateDescriptor> {
    let descs: Vec<StateDescriptor> = (0..p.graph().n_vertices()).map(|v| prepare_vertex(p, v, s)).collect();
    for desc in &descs {
        t.push(Payload::State(desc.clone()));
    }
    descs
}

fn run_statevector<R: Rng + ?Sized>(
    inst: &LocalisingInstance,
    p: MeasurementPattern,
    secrets: VerifierSecrets,
    strategy: &ProverStrategy,
    rng: &mut R,
) -> Result<LocalisingRun> {
    let d = inst.d;
    let n = p.graph().n_vertices();
    let mut transcript = Transcript::new();
    let descs = send_states(&p, &secrets, &mut transcript);
    let init = descs.iter().map(|x| descriptor_state(x, d)).collect::<Result<Vec<_>>>()?;
    let mut reg = GraphRegister::new(d, p.graph().adjacency().to_vec(), init)?;
    let pauli = strategy.pauli_table(n, d)?;
    let (ancilla_slots, timed) = match strategy {
        ProverStrategy::UnitaryAttack { ancillas, gates } => {
            let slots = (0..*ancillas).map(|_| reg.add_ancilla(StateVector::zero(d, 1)?)).collect::<Result<Vec<_>>>()?;
            (slots, gates.clone())
        }
        _ => (Vec::new(), Vec::new()),
    };
    let to_slot = |s: usize| if s < n { s } else { ancilla_slots[s - n] };
    let apply_round = |reg: &mut GraphRegister, round: usize| -> Result<()> {
        for tg in timed.iter().filter(|tg| tg.before == round) {
            let sites = tg.gate.sites.iter().map(|&s| to_slot(s)).collect();
            reg.apply_gate(&Gate::new(tg.gate.kind.clone(), sites))?;
        }
        Ok(())
    };
    let mut signals = vec![None; n];
    let mut rejected = false;
    let order = p.order().to_vec();
    for (round, &v) in order.iter().enumerate() {
        apply_round(&mut reg, round)?;
        let delta = delta_message(v, &p, &secrets, &signals)?;
        transcript.push(Payload::Delta { vertex: v, delta: delta.coeffs() });
        // Prover: a basis-state dummy nobody touched stays in product, so its
        // rotated outcome is uniform and independent of the rest.
        let raw = if p.role(v) == Role::Dummy && reg.is_untouched_basis(v) {
            reg.discard(v, rng)?;
            rng.gen_range(0..d)
        } else {
            reg.measure(v, &delta, rng)?
        };
        let b = (raw + pauli[v].0) % d;
        transcript.push(Payload::Outcome { vertex: v, value: b });
        let s = record_outcome(b, secrets.r[v], d);
        match p.role(v) {
            Role::Computation => signals[v] = Some(s),
            Role::Trap => {
                signals[v] = Some(s);
                rejected |= s != 0;
            }
            _ => {}
        }
    }
    apply_round(&mut reg, order.len())?;
    let outs = p.graph().outputs().to_vec();
    for &o in &outs {
        reg.apply_xz(o, pauli[o].0, pauli[o].1)?;
    }
    let prover_output = Some(reg.reduced_density(&outs)?);
    let output_key = output_key(&p, &secrets, &signals)?;
    Ok(LocalisingRun {
        indicator: if rejected { Indicator::Rej } else { Indicator::Acc },
        transcript,
        secrets,
        pattern: p,
        signals,
        output_key,
        output_sites: outs,
        prover_output,
        frame: None,
        peak_sites: reg.peak_sites(),
    })
}

fn run_frame<R: Rng + ?Sized>(
    inst: &LocalisingInstance,
    p: MeasurementPattern,
    secrets: VerifierSecrets,
    strategy: &ProverStrategy,
    rng: &mut R,
) -> Result<LocalisingRun> {
    let d = inst.d;
    let n = p.graph().n_vertices();
    let frame = PauliFrame::from_strategy(d, n, strategy)?;
    let fo = propagate_frame(&p, &frame)?;
    let mut transcript = Transcript::new();
    send_states(&p, &secrets, &mut transcript);
    let mut signals = vec![None; n];
    let mut rejected = false;
    for &v in p.order() {
        let delta = delta_message(v, &p, &secrets, &signals)?;
        transcript.push(Payload::Delta { vertex: v, delta: delta.coeffs() });
        // Honest outcomes of computation measurements are uniform; traps are
        // deterministic. The frame supplies the deviation of the report.
        let s = match p.role(v) {
            Role::Computation => (rng.gen_range(0..d) + fo.shifts[v]) % d,
            Role::Trap => fo.shifts[v] % d,
            _ => rng.gen_range(0..d),
        };
        let b = (s + secrets.r[v]) % d;
        transcript.push(Payload::Outcome { vertex: v, value: b });
        match p.role(v) {
            Role::Computation => signals[v] = Some(s),
            Role::Trap => {
                signals[v] = Some(s);
                rejected |= s != 0;
            }
            _ => {}
        }
    }
    let output_key = output_key(&p, &secrets, &signals)?;
    Ok(LocalisingRun {
        indicator: if rejected { Indicator::Rej } else { Indicator::Acc },
        transcript,
        secrets,
        output_sites: p.graph().outputs().to_vec(),
        pattern: p,
        signals,
        output_key,
        prover_output: None,
        frame: Some(fo),
        peak_sites: 0,
    })
}

#[cfg(test)]
mod tests;
