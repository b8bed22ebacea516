use super::*;
use crate::abe::{LogicalGate, LogicalKind};
use crate::graphs::VertexKind;
use crate::polycode::shift_accepted;
use crate::rng::seeded;

fn circuit(wires: usize, gates: &[(LogicalKind, &[usize])]) -> LogicalCircuit {
    LogicalCircuit::new(wires, gates.iter().map(|(k, w)| LogicalGate::new(*k, w.to_vec())).collect()).unwrap()
}

fn fs() -> LogicalCircuit {
    circuit(1, &[(LogicalKind::F, &[0]), (LogicalKind::S, &[0])])
}

#[test]
fn plan_structure() {
    let mut rng = seeded(1);
    let c = circuit(2, &[(LogicalKind::F, &[0]), (LogicalKind::CX, &[0, 1])]);
    let p = plan(&c, Security { d1: 3, d2: 1 }, 5, &mut rng).unwrap();
    assert_eq!(p.instances().len(), 2);
    assert_eq!(p.qudits_per_instance(), 3);
    assert_eq!(p.subgraph().graph().outputs().len(), 9);

    let with_t = circuit(3, &[(LogicalKind::F, &[0]), (LogicalKind::Toffoli, &[0, 1, 2])]);
    let q = plan(&with_t, Security { d1: 3, d2: 1 }, 5, &mut rng).unwrap();
    let without = plan(&circuit(3, &[(LogicalKind::F, &[0])]), Security { d1: 3, d2: 1 }, 5, &mut rng).unwrap();
    assert_eq!(q.instances().len(), without.instances().len() + 3);
    assert_eq!(q.instances()[3], Purpose::Resource { gate: 1, slot: 0 });
    // Sub-graph size depends on the security parameters only.
    assert_eq!(q.subgraph_size(), without.subgraph_size());
}

#[test]
fn plan_rejects_small_modulus() {
    let mut rng = seeded(2);
    assert!(matches!(plan(&fs(), Security { d1: 1, d2: 2 }, 5, &mut rng), Err(Error::CodeParams(_))));
    assert!(plan(&fs(), Security { d1: 1, d2: 1 }, 2, &mut rng).is_err());
    assert!(plan(&fs(), Security { d1: 1, d2: 0 }, 5, &mut rng).is_err());
    assert!(plan(&fs(), Security { d1: 1, d2: 1 }, 9, &mut rng).is_err());
}

#[test]
fn honest_fs_accepts_with_ideal_output() {
    let mut rng = seeded(3);
    for _ in 0..4 {
        let p = plan(&fs(), Security { d1: 3, d2: 1 }, 5, &mut rng).unwrap();
        let run = run_hybrid(&p, &HybridStrategy::honest(), Backend::Statevector, &mut rng).unwrap();
        assert_eq!(run.indicator1, Indicator::Acc);
        assert_eq!(run.indicator2, Indicator::Acc);
        assert!(run.fidelity.unwrap() > 1.0 - 1e-12);
        assert!(!run.incorrect());
        assert_eq!(run.outcome.as_ref().unwrap().len(), 1);
    }
}

/// F·S·F on |0⟩ is a fixed non-basis state; the logical readout distribution
/// over many honest runs follows the unencoded oracle.
#[test]
fn honest_readout_distribution_matches_unencoded() {
    let c = circuit(1, &[(LogicalKind::F, &[0]), (LogicalKind::S, &[0]), (LogicalKind::F, &[0])]);
    let d = 5;
    let mut oracle = StateVector::zero(d, 1).unwrap();
    oracle.apply_circuit(&[Gate::f(0), Gate::s(0), Gate::f(0)]).unwrap();
    let want = oracle.site_probabilities(0).unwrap();
    let mut rng = seeded(4);
    let n = 600;
    let mut counts = [0usize; 5];
    for _ in 0..n {
        let p = plan(&c, Security { d1: 1, d2: 1 }, d, &mut rng).unwrap();
        let run = run_hybrid(&p, &HybridStrategy::honest(), Backend::Statevector, &mut rng).unwrap();
        assert!(run.accepted());
        counts[run.outcome.unwrap()[0] as usize] += 1;
    }
    for a in 0..5 {
        let f = counts[a] as f64 / n as f64;
        assert!(crate::stats::within_sigma(f, want[a], n, 4.0), "a={a}: {f} vs {}", want[a]);
    }
}

#[test]
fn honest_multi_wire_clifford() {
    let mut rng = seeded(5);
    let c = circuit(2, &[(LogicalKind::F, &[0]), (LogicalKind::CX, &[0, 1]), (LogicalKind::S, &[1]), (LogicalKind::X, &[0])]);
    for backend in [Backend::Statevector, Backend::Frame] {
        let p = plan(&c, Security { d1: 2, d2: 1 }, 5, &mut rng).unwrap();
        let run = run_hybrid(&p, &HybridStrategy::honest(), backend, &mut rng).unwrap();
        assert!(run.accepted());
        if backend == Backend::Statevector {
            assert!(run.fidelity.unwrap() > 1.0 - 1e-12);
        }
        // Both wires read the same value before the final X on wire 0.
        let o = run.outcome.unwrap();
        assert_eq!(o[0], (o[1] + 1) % 5);
    }
}

#[test]
fn toffoli_runs_are_refused() {
    let mut rng = seeded(6);
    let c = circuit(3, &[(LogicalKind::Toffoli, &[0, 1, 2])]);
    let p = plan(&c, Security { d1: 1, d2: 1 }, 5, &mut rng).unwrap();
    assert!(matches!(run_hybrid(&p, &HybridStrategy::honest(), Backend::Statevector, &mut rng), Err(Error::Backend(_))));
    // Counting still works.
    let cr = count_communication(&p);
    assert_eq!(cr.phases[2].counters.dits_to_verifier, 3 * 3 + 3 * 3);
}

#[test]
fn malformed_strategies() {
    let mut rng = seeded(7);
    let p = plan(&fs(), Security { d1: 1, d2: 1 }, 5, &mut rng).unwrap();
    let bad_instance = HybridStrategy {
        localising: vec![InstanceStrategy { instance: 4, strategy: ProverStrategy::Honest }],
        readout_shifts: vec![],
    };
    assert!(matches!(run_hybrid(&p, &bad_instance, Backend::Frame, &mut rng), Err(Error::MalformedStrategy(_))));
    let twice = HybridStrategy {
        localising: vec![
            InstanceStrategy { instance: 0, strategy: ProverStrategy::Honest },
            InstanceStrategy { instance: 0, strategy: ProverStrategy::Honest },
        ],
        readout_shifts: vec![],
    };
    assert!(run_hybrid(&p, &twice, Backend::Frame, &mut rng).is_err());
    let short = HybridStrategy { localising: vec![], readout_shifts: vec![1] };
    assert!(run_hybrid(&p, &short, Backend::Frame, &mut rng).is_err());
}

#[test]
fn comm_report_matches_transcripts_and_construction() {
    let mut rng = seeded(8);
    for sec in [Security { d1: 1, d2: 1 }, Security { d1: 3, d2: 1 }] {
        let c = circuit(2, &[(LogicalKind::F, &[0]), (LogicalKind::CX, &[0, 1])]);
        let p = plan(&c, sec, 5, &mut rng).unwrap();
        let run = run_hybrid(&p, &HybridStrategy::honest(), Backend::Frame, &mut rng).unwrap();
        assert_eq!(run.comm, count_communication(&p));
        let summed = run
            .localising
            .iter()
            .map(|r| r.transcript.counters())
            .chain([run.decode_transcript.counters(), run.abe_transcript.counters()])
            .fold(Counters::default(), add);
        assert_eq!(summed.quantum_states_sent, run.comm.quantum_states_sent);
        assert_eq!(summed.dits_to_prover + summed.dits_to_verifier, run.comm.dits_to_prover + run.comm.dits_to_verifier);
        assert_eq!(summed.rounds, run.comm.rounds);
        assert_eq!(run.comm.quantum_states_sent, 2 * p.subgraph_size() as u64);
        for r in &run.localising {
            assert!(r.transcript.counters_consistent());
            r.transcript.check_alternation().unwrap();
        }
    }
}

#[test]
fn jsonl_has_one_line_per_message() {
    let mut rng = seeded(9);
    let p = plan(&fs(), Security { d1: 2, d2: 1 }, 5, &mut rng).unwrap();
    let run = run_hybrid(&p, &HybridStrategy::honest(), Backend::Frame, &mut rng).unwrap();
    let mut buf = Vec::new();
    run.write_jsonl(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let n: usize = run.localising.iter().map(|r| r.transcript.messages().len()).sum::<usize>()
        + run.decode_transcript.messages().len()
        + run.abe_transcript.messages().len();
    assert_eq!(text.lines().count(), n);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["phase"], "localising");
}

/// Z on any measured vertex is absorbed by the rotated readout.
#[test]
fn z_on_measured_vertices_is_harmless() {
    let mut rng = seeded(10);
    let p = plan(&fs(), Security { d1: 2, d2: 1 }, 5, &mut rng).unwrap();
    let g = p.subgraph().graph();
    let attacks: Vec<PauliAttack> = (0..g.n_vertices())
        .filter(|&v| matches!(g.kind(v), VertexKind::Primary { .. } | VertexKind::Edge { .. }))
        .map(|v| PauliAttack { vertex: v, x: 0, z: 1 + (v as u32 % 4) })
        .collect();
    let st = HybridStrategy {
        localising: vec![InstanceStrategy { instance: 0, strategy: ProverStrategy::PauliAttack { attacks } }],
        readout_shifts: vec![],
    };
    for _ in 0..5 {
        let run = run_hybrid(&p, &st, Backend::Statevector, &mut rng).unwrap();
        assert!(run.accepted());
        assert!(run.fidelity.unwrap() > 1.0 - 1e-12);
        assert!(!run.incorrect());
    }
}

/// An X on a single amplification copy trips the syndrome.
#[test]
fn single_copy_shift_trips_syndrome() {
    let mut rng = seeded(11);
    let p = plan(&fs(), Security { d1: 3, d2: 1 }, 5, &mut rng).unwrap();
    let out = p.subgraph().graph().outputs()[1];
    let st = HybridStrategy {
        localising: vec![InstanceStrategy {
            instance: 0,
            strategy: ProverStrategy::PauliAttack { attacks: vec![PauliAttack { vertex: out, x: 2, z: 0 }] },
        }],
        readout_shifts: vec![],
    };
    let run = run_hybrid(&p, &st, Backend::Frame, &mut rng).unwrap();
    assert_eq!(run.localising[0].indicator, Indicator::Acc);
    assert_eq!(run.indicator1, Indicator::Rej);
}

/// A shift on every copy passes traps and syndromes, so the code alone
/// decides; its verdict matches `shift_accepted` on the shift pattern.
#[test]
fn uniform_output_shift_reaches_the_code() {
    let mut rng = seeded(12);
    for _ in 0..30 {
        let p = plan(&circuit(1, &[]), Security { d1: 2, d2: 1 }, 5, &mut rng).unwrap();
        let shift: Vec<u32> = (0..3).map(|_| rng.gen_range(0..5)).collect();
        let st = HybridAttack::OutputShift { instance: 0, shift: shift.clone() }.strategy(&p, &mut rng).unwrap();
        let run = run_hybrid(&p, &st, Backend::Statevector, &mut rng).unwrap();
        assert_eq!(run.indicator1, Indicator::Acc);
        assert_eq!(run.indicator2 == Indicator::Acc, shift_accepted(&shift, p.params(), p.sign()).unwrap());
        if let Some(o) = run.outcome {
            // Empty circuit on |0⟩: the readout is exactly the logical shift.
            assert_eq!(Some(o[0]), run.logical_shift[0]);
        }
    }
}

/// Same seed on both backends: identical indicators and, for a circuit with
/// a deterministic ideal readout, identical outcomes.
#[test]
fn frame_and_statevector_backends_agree() {
    let c = circuit(1, &[(LogicalKind::F, &[0]), (LogicalKind::F, &[0]), (LogicalKind::X, &[0])]);
    let mut rng = seeded(13);
    for i in 0..40u64 {
        let p = plan(&c, Security { d1: 2, d2: 1 }, 5, &mut rng).unwrap();
        let attack = match i % 3 {
            0 => HybridAttack::RandomFrame { instance: 0, footprint: 2 },
            1 => HybridAttack::OutputShift { instance: 0, shift: (0..3).map(|_| rng.gen_range(0..5)).collect() },
            _ => HybridAttack::Readout { shifts: (0..3).map(|_| rng.gen_range(0..5)).collect() },
        };
        let st = attack.strategy(&p, &mut rng).unwrap();
        let a = run_hybrid(&p, &st, Backend::Statevector, &mut seeded(100 + i)).unwrap();
        let b = run_hybrid(&p, &st, Backend::Frame, &mut seeded(100 + i)).unwrap();
        assert_eq!(a.indicator1, b.indicator1);
        assert_eq!(a.indicator2, b.indicator2);
        assert_eq!(a.outcome, b.outcome);
        assert_eq!(a.logical_shift, b.logical_shift);
        assert_eq!(a.incorrect(), b.incorrect());
    }
}

#[test]
fn verifiability_within_budget() {
    let mut rng = seeded(14);
    let p = plan(&circuit(1, &[(LogicalKind::F, &[0])]), Security { d1: 3, d2: 1 }, 5, &mut rng).unwrap();
    for attack in [
        HybridAttack::OutputShift { instance: 0, shift: vec![1, 1, 1] },
        HybridAttack::RandomFrame { instance: 0, footprint: 4 },
        HybridAttack::Readout { shifts: vec![1, 2, 3] },
    ] {
        let r = estimate_verifiability(&p, &attack, 600, 15).unwrap();
        assert!(r.within_budget(4.0), "{r:?}");
    }
}

#[test]
fn verifiability_is_replayable() {
    let mut rng = seeded(16);
    let p = plan(&fs(), Security { d1: 1, d2: 1 }, 5, &mut rng).unwrap();
    let a = HybridAttack::OutputShift { instance: 0, shift: vec![2, 0, 3] };
    assert_eq!(estimate_verifiability(&p, &a, 64, 3).unwrap(), estimate_verifiability(&p, &a, 64, 3).unwrap());
}

/// Empirical mutual information between the first δ of two sub-protocols.
#[test]
fn sub_protocol_views_are_independent() {
    let mut rng = seeded(17);
    let c = circuit(2, &[]);
    let p = plan(&c, Security { d1: 0, d2: 1 }, 5, &mut rng).unwrap();
    let n = 3000;
    let mut joint = [[0f64; 5]; 5];
    for _ in 0..n {
        let run = run_hybrid(&p, &HybridStrategy::honest(), Backend::Frame, &mut rng).unwrap();
        let a = run.localising[0].transcript.deltas()[0].1 .0 as usize;
        let b = run.localising[1].transcript.deltas()[0].1 .0 as usize;
        joint[a][b] += 1.0 / n as f64;
    }
    let pa: Vec<f64> = (0..5).map(|a| joint[a].iter().sum()).collect();
    let pb: Vec<f64> = (0..5).map(|b| (0..5).map(|a| joint[a][b]).sum()).collect();
    let mut mi = 0.0;
    for a in 0..5 {
        for b in 0..5 {
            if joint[a][b] > 0.0 {
                mi += joint[a][b] * (joint[a][b] / (pa[a] * pb[b])).ln();
            }
        }
    }
    assert!(mi < 0.02, "mutual information {mi}");
}

#[test]
fn scaling_exponents() {
    let r = scaling_series(&[4, 8, 16, 32, 64], Security { d1: 3, d2: 1 }, 5).unwrap();
    assert!((r.hybrid_fit.slope - 1.0).abs() < 0.1, "{}", r.hybrid_fit.slope);
    assert!((r.monolithic_fit.slope - 2.0).abs() < 0.1, "{}", r.monolithic_fit.slope);
    assert!(scaling_series(&[4, 8], Security { d1: 3, d2: 1 }, 5).is_err());
    assert!(scaling_circuit(3).is_err());
}

/// Doubling `d₁` at fixed `n` grows the hybrid total by a bounded factor.
#[test]
fn doubling_d1_is_polylog_bounded() {
    let c = scaling_circuit(16).unwrap();
    let count = |d1| {
        count_communication(&plan_with_sign(&c, Security { d1, d2: 1 }, 5, 1, SignKey::plus(3)).unwrap()).total() as f64
    };
    let ratio = count(6) / count(3);
    // Sub-graphs are dotted-complete on `m·d₁` triples: quadratic in d₁.
    assert!(ratio > 1.0 && ratio <= 4.5, "{ratio}");
}

#[test]
fn monolithic_matches_built_graph() {
    let c = scaling_circuit(6).unwrap();
    let r = monolithic_count(&c, Security { d1: 1, d2: 1 }, 1);
    let g = attach_gadgets(build_dotted_complete_chains(6, 3).unwrap()).unwrap();
    assert_eq!(r.quantum_states_sent, g.n_vertices() as u64);
    assert_eq!(r.dits_to_verifier, (g.n_vertices() - g.outputs().len()) as u64);
}
