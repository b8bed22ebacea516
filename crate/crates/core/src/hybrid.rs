//! The hybrid protocol end to end. Localising sub-protocols deliver amplified,
//! padded code blocks; the prover strips the amplification layer and reports
//! its syndrome; logical Cliffords run transversally on the signed polynomial
//! code while the verifier updates Pauli keys; the verifier accepts only when
//! the trap indicator and the code indicator both accept.
//!
//! Every sub-graph carries the identity computation and is executed on the
//! Pauli-frame backend. The encoded logical input is placed on its outputs
//! under the frame residual and the instance output key, the state an
//! encoding computation returns under the same Pauli deviation.

use crate::abe::LogicalCircuit;
use crate::error::{Error, Result};
use crate::frame::{epsilon_budget, EpsilonBudget};
use crate::graphs::{attach_gadgets, build_dotted_complete_chains, dotted_complete_size, TRIPLE};
use crate::localising::{
    run_localising, AmplificationCode, Counters, Indicator, LocalisingInstance, LocalisingRun, Payload, PauliAttack,
    ProverStrategy, Transcript,
};
use crate::polycode::{
    codeword_set, compose_keys, detect_and_decode, encode_state, transversal_gates, update_pauli_key, CodeParams,
    Decoded, PauliKey, SignKey,
};
use crate::qudit::{check_prime, conjugate_circuit, md, Gate, PauliOp};
use crate::rng::{seeded, session_rng};
use crate::statevector::{pure_trace_distance, StateVector};
use crate::stats::{binomial_sigma, log_log_fit, LogLogFit};
use crate::Backend;
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::sync::Arc;

/// `c′ = 1/|S_γ|`.
pub const C_PRIME: f64 = 1.0 / TRIPLE as f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Security {
    /// Amplification distance, realised by a repetition code of length `d₁`
    /// (`d₁ = 0` means no amplification).
    pub d1: usize,
    /// Code degree `p = d₂`; blocks have `m = 2·d₂ + 1` qudits.
    pub d2: usize,
}

/// What a sub-graph instance prepares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Purpose {
    Input { wire: usize },
    Resource { gate: usize, slot: usize },
}

#[derive(Clone, Debug)]
pub struct HybridPlan {
    circuit: LogicalCircuit,
    security: Security,
    params: CodeParams,
    sign: SignKey,
    amplification: AmplificationCode,
    chain_len: usize,
    subgraph: Arc<LocalisingInstance>,
    instances: Vec<Purpose>,
}

/// Plan with a fresh uniform sign key and one triple per chain.
pub fn plan<R: Rng + ?Sized>(circuit: &LogicalCircuit, security: Security, d: u32, rng: &mut R) -> Result<HybridPlan> {
    let sign = SignKey::random(2 * security.d2 + 1, rng);
    plan_with_sign(circuit, security, d, 1, sign)
}

pub fn plan_with_sign(
    circuit: &LogicalCircuit,
    security: Security,
    d: u32,
    chain_len: usize,
    sign: SignKey,
) -> Result<HybridPlan> {
    check_prime(d)?;
    if d == 2 {
        return Err(Error::CodeParams("the hybrid protocol needs an odd prime".into()));
    }
    if security.d2 == 0 {
        return Err(Error::CodeParams("d₂ must be at least 1".into()));
    }
    let m = 2 * security.d2 + 1;
    if d as usize <= m {
        return Err(Error::CodeParams(format!("m = {m} is not below d = {d}")));
    }
    if chain_len == 0 {
        return Err(Error::Parameter("chains need at least one triple".into()));
    }
    if sign.len() != m {
        return Err(Error::DimensionMismatch(sign.len(), m));
    }
    let params = CodeParams::new(d, security.d2, None)?;
    let amplification =
        if security.d1 == 0 { AmplificationCode::Identity } else { AmplificationCode::repetition(security.d1)? };
    let chains = m * amplification.length();
    let graph = attach_gadgets(build_dotted_complete_chains(chains * chain_len, chains)?)?;
    let subgraph = Arc::new(LocalisingInstance::identity(d, graph)?);
    let mut instances: Vec<Purpose> = (0..circuit.wires()).map(|wire| Purpose::Input { wire }).collect();
    for (gate, g) in circuit.gates().iter().enumerate() {
        if g.gate == crate::abe::LogicalKind::Toffoli {
            instances.extend((0..3).map(|slot| Purpose::Resource { gate, slot }));
        }
    }
    Ok(HybridPlan { circuit: circuit.clone(), security, params, sign, amplification, chain_len, subgraph, instances })
}

impl HybridPlan {
    pub fn circuit(&self) -> &LogicalCircuit {
        &self.circuit
    }

    pub fn security(&self) -> Security {
        self.security
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn sign(&self) -> &SignKey {
        &self.sign
    }

    pub fn amplification(&self) -> AmplificationCode {
        self.amplification
    }

    pub fn chain_len(&self) -> usize {
        self.chain_len
    }

    pub fn subgraph(&self) -> &LocalisingInstance {
        &self.subgraph
    }

    pub fn instances(&self) -> &[Purpose] {
        &self.instances
    }

    /// Physical qudits of the code block each instance delivers.
    pub fn qudits_per_instance(&self) -> usize {
        self.params.m()
    }

    pub fn subgraph_size(&self) -> usize {
        self.subgraph.graph().n_vertices()
    }

    pub fn redraw_sign<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.sign = SignKey::random(self.params.m(), rng);
    }

    pub fn budget(&self) -> Result<EpsilonBudget> {
        epsilon_budget(self.security.d1 as u32, self.security.d2 as u32, C_PRIME)
    }

    /// Output `j·k + r` carries copy `r` of physical qudit `j`.
    fn copies(&self) -> usize {
        self.amplification.length()
    }

    fn data_sites(&self) -> Vec<usize> {
        (0..self.params.m()).map(|j| j * self.copies()).collect()
    }

    fn syndrome_sites(&self) -> Vec<usize> {
        let k = self.copies();
        (0..self.params.m() * k).filter(|s| s % k != 0).collect()
    }

    fn decode_gates(&self) -> Vec<Gate> {
        let k = self.copies();
        (0..self.params.m())
            .flat_map(|j| self.amplification.decode_circuit(&(j * k..(j + 1) * k).collect::<Vec<_>>(), self.params.d()))
            .collect()
    }

    /// The logical circuit as transversal gates on `wires · m` qudits.
    pub fn transversal_circuit(&self) -> Result<Vec<Gate>> {
        let mut out = Vec::new();
        for g in self.circuit.gates() {
            let c = g.gate.clifford().ok_or_else(|| Error::NotClifford(format!("{:?} on encoded blocks", g.gate)))?;
            out.extend(transversal_gates(c, &g.wires, &self.params, &self.sign)?);
        }
        Ok(out)
    }

    /// Unencoded circuit output on `|0…0⟩`.
    pub fn ideal_logical(&self) -> Result<StateVector> {
        let d = self.params.d();
        let mut st = StateVector::zero(d, self.circuit.wires())?;
        st.apply_circuit(&self.circuit.unencoded(d))?;
        Ok(st)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceStrategy {
    pub instance: usize,
    pub strategy: ProverStrategy,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HybridStrategy {
    #[serde(default)]
    pub localising: Vec<InstanceStrategy>,
    /// X shift per physical qudit right before the logical readout.
    #[serde(default)]
    pub readout_shifts: Vec<u32>,
}

impl HybridStrategy {
    pub fn honest() -> Self {
        Self::default()
    }

    pub fn validate(&self, plan: &HybridPlan) -> Result<()> {
        let mut seen = vec![false; plan.instances.len()];
        for s in &self.localising {
            match seen.get_mut(s.instance) {
                None => return Err(Error::MalformedStrategy(format!("no instance {}", s.instance))),
                Some(true) => return Err(Error::MalformedStrategy(format!("instance {} listed twice", s.instance))),
                Some(f) => *f = true,
            }
        }
        let n = plan.circuit.wires() * plan.params.m();
        if !self.readout_shifts.is_empty() && self.readout_shifts.len() != n {
            return Err(Error::MalformedStrategy(format!("{} readout shifts for {n} qudits", self.readout_shifts.len())));
        }
        Ok(())
    }

    fn for_instance(&self, i: usize) -> ProverStrategy {
        self.localising.iter().find(|s| s.instance == i).map(|s| s.strategy.clone()).unwrap_or(ProverStrategy::Honest)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCount {
    pub phase: String,
    pub counters: Counters,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommReport {
    pub quantum_states_sent: u64,
    pub dits_to_prover: u64,
    pub dits_to_verifier: u64,
    pub rounds: u64,
    pub phases: Vec<PhaseCount>,
}

fn add(a: Counters, b: Counters) -> Counters {
    Counters {
        quantum_states_sent: a.quantum_states_sent + b.quantum_states_sent,
        dits_to_prover: a.dits_to_prover + b.dits_to_prover,
        dits_to_verifier: a.dits_to_verifier + b.dits_to_verifier,
        rounds: a.rounds + b.rounds,
    }
}

impl CommReport {
    fn from_phases(phases: Vec<PhaseCount>) -> Self {
        let t = phases.iter().fold(Counters::default(), |acc, p| add(acc, p.counters));
        CommReport {
            quantum_states_sent: t.quantum_states_sent,
            dits_to_prover: t.dits_to_prover,
            dits_to_verifier: t.dits_to_verifier,
            rounds: t.rounds,
            phases,
        }
    }

    /// Quantum states plus classical dits in both directions.
    pub fn total(&self) -> u64 {
        self.quantum_states_sent + self.dits_to_prover + self.dits_to_verifier
    }
}

fn localising_counts(n_vertices: u64, n_outputs: u64) -> Counters {
    let measured = n_vertices - n_outputs;
    Counters {
        quantum_states_sent: n_vertices,
        dits_to_prover: 3 * measured,
        dits_to_verifier: measured,
        rounds: if measured == 0 { 1 } else { 2 * measured },
    }
}

/// Exact counts from the construction alone.
pub fn count_communication(plan: &HybridPlan) -> CommReport {
    let g = plan.subgraph.graph();
    let per = localising_counts(g.n_vertices() as u64, g.outputs().len() as u64);
    let n_inst = plan.instances.len() as u64;
    let localising = Counters {
        quantum_states_sent: per.quantum_states_sent * n_inst,
        dits_to_prover: per.dits_to_prover * n_inst,
        dits_to_verifier: per.dits_to_verifier * n_inst,
        rounds: per.rounds * n_inst,
    };
    let m = plan.params.m() as u64;
    let syn = m * (plan.copies() as u64 - 1);
    let decode = if syn == 0 {
        Counters::default()
    } else {
        Counters { dits_to_verifier: syn * n_inst, rounds: 1, ..Counters::default() }
    };
    let t = plan.circuit.toffoli_count() as u64;
    let abe = Counters {
        quantum_states_sent: 0,
        dits_to_prover: 3 * t,
        dits_to_verifier: 3 * m * t + plan.circuit.wires() as u64 * m,
        rounds: 2 * t + 1,
    };
    CommReport::from_phases(vec![
        PhaseCount { phase: "localising".into(), counters: localising },
        PhaseCount { phase: "decode".into(), counters: decode },
        PhaseCount { phase: "abe".into(), counters: abe },
    ])
}

/// `t + n`: logical gates plus wires.
pub fn computation_size(circuit: &LogicalCircuit) -> usize {
    circuit.wires() + circuit.gates().len()
}

/// One dotted-complete graph for the whole computation, with `k·ℓ` triples
/// per unit of computation size and an unencoded readout of every wire.
pub fn monolithic_count(circuit: &LogicalCircuit, security: Security, chain_len: usize) -> CommReport {
    let k = security.d1.max(1);
    let m_prime = k * chain_len * computation_size(circuit);
    let outputs = (circuit.wires() * k) as u64;
    let n = dotted_complete_size(m_prime) as u64 + (TRIPLE as u64 + 1) * outputs;
    CommReport::from_phases(vec![PhaseCount { phase: "monolithic".into(), counters: localising_counts(n, outputs) }])
}

/// Three wires and `n − 3` gates alternating Toffoli and F.
pub fn scaling_circuit(n: usize) -> Result<LogicalCircuit> {
    use crate::abe::{LogicalGate, LogicalKind};
    if n < 4 {
        return Err(Error::Parameter(format!("computation size {n} is below 4")));
    }
    let gates = (0..n - 3)
        .map(|i| {
            if i % 2 == 0 {
                LogicalGate::new(LogicalKind::Toffoli, vec![0, 1, 2])
            } else {
                LogicalGate::new(LogicalKind::F, vec![(i / 2) % 3])
            }
        })
        .collect();
    LogicalCircuit::new(3, gates)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub hybrid: CommReport,
    pub monolithic: CommReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingReport {
    pub security: Security,
    pub d: u32,
    pub points: Vec<ScalingPoint>,
    pub hybrid_fit: LogLogFit,
    pub monolithic_fit: LogLogFit,
}

pub fn scaling_fit(ns: &[usize], counts: &[u64]) -> Result<LogLogFit> {
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    log_log_fit(&xs, &ys)
}

/// Constructed counts over `grid` for the hybrid plan and the monolithic
/// baseline, and the fitted exponents of their totals.
pub fn scaling_series(grid: &[usize], security: Security, d: u32) -> Result<ScalingReport> {
    if grid.len() < 3 {
        return Err(Error::InsufficientSamples(format!("{} grid points, need at least 3", grid.len())));
    }
    let mut points = Vec::new();
    for &n in grid {
        let c = scaling_circuit(n)?;
        let p = plan_with_sign(&c, security, d, 1, SignKey::plus(2 * security.d2 + 1))?;
        points.push(ScalingPoint { n, hybrid: count_communication(&p), monolithic: monolithic_count(&c, security, 1) });
    }
    let hy: Vec<u64> = points.iter().map(|p| p.hybrid.total()).collect();
    let mo: Vec<u64> = points.iter().map(|p| p.monolithic.total()).collect();
    Ok(ScalingReport {
        security,
        d,
        hybrid_fit: scaling_fit(grid, &hy)?,
        monolithic_fit: scaling_fit(grid, &mo)?,
        points,
    })
}

#[derive(Clone, Debug)]
pub struct HybridRun {
    /// Decoded logical values when the code indicator accepts.
    pub outcome: Option<Vec<u32>>,
    /// Traps of every sub-protocol and every amplification syndrome.
    pub indicator1: Indicator,
    /// Code detection on every readout block.
    pub indicator2: Indicator,
    /// Logical X shift each wire carries into its readout, `None` where the
    /// code rejects it. Simulation bookkeeping, never seen by either party.
    pub logical_shift: Vec<Option<u32>>,
    /// Fidelity of the unpadded blocks with the ideal encoded output
    /// (statevector backend).
    pub fidelity: Option<f64>,
    /// Trace distance to the same ideal state (statevector backend).
    pub trace_distance: Option<f64>,
    pub comm: CommReport,
    pub localising: Vec<LocalisingRun>,
    pub decode_transcript: Transcript,
    pub abe_transcript: Transcript,
}

impl HybridRun {
    pub fn accepted(&self) -> bool {
        self.indicator1 == Indicator::Acc && self.indicator2 == Indicator::Acc
    }

    /// Accepted while the readout distribution is shifted away from the ideal.
    pub fn incorrect(&self) -> bool {
        self.accepted() && self.logical_shift.iter().any(|s| matches!(s, Some(v) if *v != 0))
    }

    fn transcripts(&self) -> Vec<(&'static str, Option<usize>, &Transcript)> {
        let mut out: Vec<_> = self.localising.iter().enumerate().map(|(i, r)| ("localising", Some(i), &r.transcript)).collect();
        out.push(("decode", None, &self.decode_transcript));
        out.push(("abe", None, &self.abe_transcript));
        out
    }

    /// One JSON object per message, tagged with its phase and instance.
    pub fn write_jsonl<W: Write>(&self, w: &mut W) -> Result<()> {
        for (phase, instance, t) in self.transcripts() {
            for m in t.messages() {
                let line = serde_json::json!({ "phase": phase, "instance": instance, "message": m });
                writeln!(w, "{line}")?;
            }
        }
        Ok(())
    }
}

fn x_only_key(d: u32, shifts: &[u32]) -> PauliKey {
    PauliKey::from_pauli(&PauliOp::from_xz(d, shifts, &vec![0; shifts.len()]))
}

pub fn run_hybrid<R: Rng + ?Sized>(
    plan: &HybridPlan,
    strategy: &HybridStrategy,
    backend: Backend,
    rng: &mut R,
) -> Result<HybridRun> {
    strategy.validate(plan)?;
    if plan.circuit.toffoli_count() > 0 {
        return Err(Error::Backend("encoded Toffoli teleportation is counted but not simulated".into()));
    }
    let d = plan.params.d();
    let m = plan.params.m();
    let wires = plan.circuit.wires();

    // Sub-protocols share no quantum state; each gets its own stream.
    let seeds: Vec<u64> = plan.instances.iter().map(|_| rng.gen()).collect();
    let localising = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| run_localising(&plan.subgraph, &strategy.for_instance(i), Backend::Frame, &mut seeded(s)))
        .collect::<Result<Vec<_>>>()?;
    let traps_ok = localising.iter().all(|r| r.indicator == Indicator::Acc);

    // Prover decodes the amplification layer and reports padded syndromes.
    let dec = plan.decode_gates();
    let data = plan.data_sites();
    let syn = plan.syndrome_sites();
    let mut decode_transcript = Transcript::new();
    let mut syndromes_ok = true;
    let mut key = PauliKey::zero(d, 0);
    let mut err = PauliKey::zero(d, 0);
    for (i, run) in localising.iter().enumerate() {
        let residual = &run.frame.as_ref().ok_or(Error::Backend("sub-protocol without a frame".into()))?.residual;
        let kp = conjugate_circuit(&dec, &run.output_key)?;
        let ep = conjugate_circuit(&dec, residual)?;
        if !syn.is_empty() {
            let raw: Vec<u32> = syn.iter().map(|&s| (kp.x_at(s) + ep.x_at(s)) % d).collect();
            syndromes_ok &= syn.iter().zip(&raw).all(|(&s, &b)| md(b as i64 - kp.x_at(s) as i64, d) == 0);
            decode_transcript.push(Payload::Syndrome { instance: i, values: raw });
        }
        key.extend(&PauliKey::from_pauli(&kp.restrict(&data)));
        err.extend(&PauliKey::from_pauli(&ep.restrict(&data)));
    }

    // Logical Cliffords: the prover applies them, the verifier updates keys.
    let gates = plan.transversal_circuit()?;
    let final_key = update_pauli_key(&key, &gates)?;
    let mut final_err = update_pauli_key(&err, &gates)?;
    if !strategy.readout_shifts.is_empty() {
        final_err = compose_keys(&final_err, &x_only_key(d, &strategy.readout_shifts))?;
    }
    let blocks: Vec<Vec<usize>> = (0..wires).map(|w| (w * m..(w + 1) * m).collect()).collect();
    let logical_shift = blocks
        .iter()
        .map(|b| {
            let e: Vec<u32> = b.iter().map(|&s| final_err.x()[s]).collect();
            Ok(match detect_and_decode(&e, &plan.params, &plan.sign)? {
                Decoded::Accept(v) => Some(v),
                Decoded::Reject => None,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (raw, fidelity, trace_distance) = match backend {
        Backend::Statevector => {
            let mut st = encode_state(&StateVector::zero(d, wires)?, &plan.params, &plan.sign)?;
            err.encrypt(&mut st)?;
            key.encrypt(&mut st)?;
            st.apply_circuit(&gates)?;
            if !strategy.readout_shifts.is_empty() {
                x_only_key(d, &strategy.readout_shifts).encrypt(&mut st)?;
            }
            let mut plain = st.clone();
            final_key.decrypt(&mut plain)?;
            let ideal = encode_state(&plan.ideal_logical()?, &plan.params, &plan.sign)?;
            let fidelity = plain.overlap(&ideal)?;
            let td = pure_trace_distance(&plain, &ideal)?;
            // Readout removes sites, so always take the first remaining one.
            let raw = blocks
                .iter()
                .map(|b| b.iter().map(|_| st.measure_computational(0, rng)).collect::<Result<Vec<u32>>>())
                .collect::<Result<Vec<_>>>()?;
            (raw, Some(fidelity), Some(td))
        }
        Backend::Frame => {
            let mut ideal = plan.ideal_logical()?;
            let mut raw = Vec::new();
            for b in &blocks {
                let a = ideal.measure_computational(0, rng)?;
                let words = codeword_set(a, &plan.params, &plan.sign)?;
                let y = &words[rng.gen_range(0..words.len())];
                raw.push(
                    b.iter().zip(y).map(|(&s, &c)| (c + final_err.x()[s] + final_key.x()[s]) % d).collect::<Vec<u32>>(),
                );
            }
            (raw, None, None)
        }
    };

    let mut abe_transcript = Transcript::new();
    let mut decoded = Vec::new();
    for (w, (b, values)) in blocks.iter().zip(raw).enumerate() {
        let y = final_key.unpad_readout(b, &values);
        abe_transcript.push(Payload::LogicalOutcome { wire: w, values });
        decoded.push(detect_and_decode(&y, &plan.params, &plan.sign)?);
    }
    let outcome: Option<Vec<u32>> =
        decoded.iter().map(|x| if let Decoded::Accept(a) = x { Some(*a) } else { None }).collect();

    let mut phases = vec![PhaseCount {
        phase: "localising".into(),
        counters: localising.iter().fold(Counters::default(), |acc, r| add(acc, r.transcript.counters())),
    }];
    phases.push(PhaseCount { phase: "decode".into(), counters: decode_transcript.counters() });
    phases.push(PhaseCount { phase: "abe".into(), counters: abe_transcript.counters() });
    let flag = |ok: bool| if ok { Indicator::Acc } else { Indicator::Rej };
    Ok(HybridRun {
        indicator1: flag(traps_ok && syndromes_ok),
        indicator2: flag(outcome.is_some()),
        outcome,
        logical_shift,
        fidelity,
        trace_distance,
        comm: CommReport::from_phases(phases),
        localising,
        decode_transcript,
        abe_transcript,
    })
}

/// Attack families for the verifiability estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HybridAttack {
    /// `X^{shift_j}` on every amplification copy of physical qudit `j` among
    /// one instance's outputs. Traps and syndromes never see it.
    OutputShift { instance: usize, shift: Vec<u32> },
    /// A uniform non-zero X on one uniform member of `footprint` distinct
    /// triples of one instance, redrawn for every sample.
    RandomFrame { instance: usize, footprint: usize },
    /// Fixed X shifts on the physical qudits at readout.
    Readout { shifts: Vec<u32> },
}

impl HybridAttack {
    pub fn strategy<R: Rng + ?Sized>(&self, plan: &HybridPlan, rng: &mut R) -> Result<HybridStrategy> {
        let d = plan.params.d();
        let g = plan.subgraph.graph();
        let localised = |instance: usize, attacks: Vec<PauliAttack>| HybridStrategy {
            localising: vec![InstanceStrategy { instance, strategy: ProverStrategy::PauliAttack { attacks } }],
            readout_shifts: Vec::new(),
        };
        match self {
            HybridAttack::OutputShift { instance, shift } => {
                if shift.len() != plan.params.m() {
                    return Err(Error::DimensionMismatch(shift.len(), plan.params.m()));
                }
                let outs = g.outputs();
                let k = plan.copies();
                let attacks = (0..outs.len())
                    .filter(|c| shift[c / k] % d != 0)
                    .map(|c| PauliAttack { vertex: outs[c], x: shift[c / k] % d, z: 0 })
                    .collect();
                Ok(localised(*instance, attacks))
            }
            HybridAttack::RandomFrame { instance, footprint } => {
                let parts = g.partition();
                if *footprint > parts.len() {
                    return Err(Error::Parameter(format!("footprint {footprint} exceeds {} triples", parts.len())));
                }
                let attacks = sample(rng, parts.len(), *footprint)
                    .into_iter()
                    .map(|t| PauliAttack {
                        vertex: parts[t][rng.gen_range(0..TRIPLE)],
                        x: rng.gen_range(1..d),
                        z: rng.gen_range(0..d),
                    })
                    .collect();
                Ok(localised(*instance, attacks))
            }
            HybridAttack::Readout { shifts } => {
                Ok(HybridStrategy { localising: Vec::new(), readout_shifts: shifts.clone() })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifiabilityReport {
    pub attack: HybridAttack,
    pub samples: usize,
    pub accepted: u64,
    pub incorrect: u64,
    pub p_incorrect: f64,
    /// Binomial standard error at the budget value.
    pub sigma: f64,
    pub budget: EpsilonBudget,
}

impl VerifiabilityReport {
    pub fn within_budget(&self, k: f64) -> bool {
        self.p_incorrect <= self.budget.eps + k * self.sigma
    }
}

/// `Pr[both ACC ∧ incorrect]` over fresh sign keys and verifier secrets, on
/// the frame backend. Sample `i` uses stream `i` of `master`.
pub fn estimate_verifiability(
    plan: &HybridPlan,
    attack: &HybridAttack,
    samples: usize,
    master: u64,
) -> Result<VerifiabilityReport> {
    estimate_verifiability_on(plan, attack, samples, master, Backend::Frame)
}

/// [`estimate_verifiability`] with the ABE phase on `backend`.
pub fn estimate_verifiability_on(
    plan: &HybridPlan,
    attack: &HybridAttack,
    samples: usize,
    master: u64,
    backend: Backend,
) -> Result<VerifiabilityReport> {
    if samples == 0 {
        return Err(Error::InsufficientSamples("no samples".into()));
    }
    let flags = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = session_rng(master, i);
            let mut p = plan.clone();
            p.redraw_sign(&mut rng);
            let st = attack.strategy(&p, &mut rng)?;
            let run = run_hybrid(&p, &st, backend, &mut rng)?;
            Ok((run.accepted(), run.incorrect()))
        })
        .collect::<Result<Vec<_>>>()?;
    let accepted = flags.iter().filter(|f| f.0).count() as u64;
    let incorrect = flags.iter().filter(|f| f.1).count() as u64;
    let budget = plan.budget()?;
    Ok(VerifiabilityReport {
        attack: attack.clone(),
        samples,
        accepted,
        incorrect,
        p_incorrect: incorrect as f64 / samples as f64,
        sigma: binomial_sigma(budget.eps.min(1.0), samples),
        budget,
    })
}

#[cfg(test)]
mod tests;
