use super::*;
use crate::frame::{propagate_frame, PauliFrame};
use crate::graphs::{attach_gadgets, build_dotted_complete, build_dotted_line};
use crate::mbqc::{Flow, OpenGraph};
use crate::rng::seeded;
use crate::statevector::StateVector;

fn line_instance(d: u32, l: usize) -> LocalisingInstance {
    LocalisingInstance::identity(d, attach_gadgets(build_dotted_line(l).unwrap()).unwrap()).unwrap()
}

fn forced(l: usize) -> TrapAssignment {
    TrapAssignment { trap: vec![0; l], computation: vec![1; l] }
}

fn zero_secrets(inst: &LocalisingInstance, a: TrapAssignment) -> VerifierSecrets {
    let n = inst.graph().n_vertices();
    let d = inst.d();
    VerifierSecrets { assignment: a, theta: vec![AngleVector::zero(d); n], r: vec![0; n], dummies: vec![0; n] }
}

fn ideal_density(inst: &LocalisingInstance) -> DensityMatrix {
    inst.ideal_output().unwrap().to_density().unwrap()
}

#[test]
fn dummy_prepares_its_basis_value() {
    let inst = line_instance(2, 2);
    let s = zero_secrets(&inst, forced(2));
    let p = inst.pattern(&s.assignment).unwrap();
    let dummy = (0..p.graph().n_vertices()).find(|&v| p.role(v) == Role::Dummy).unwrap();
    let st = descriptor_state(&prepare_vertex(&p, dummy, &s), 2).unwrap();
    assert!((st.overlap(&StateVector::basis(2, &[0]).unwrap()).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn trap_prepares_rotated_plus() {
    let inst = line_instance(2, 2);
    let mut s = zero_secrets(&inst, forced(2));
    let p = inst.pattern(&s.assignment).unwrap();
    let trap = inst.graph().trap_primary(&s.assignment, 0);
    s.theta[trap] = AngleVector::qubit(1);
    let st = descriptor_state(&prepare_vertex(&p, trap, &s), 2).unwrap();
    assert!((st.overlap(&StateVector::rotated_plus(&AngleVector::qubit(1))).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn dummy_neighbor_shifts_angle_by_pi() {
    let inst = line_instance(2, 2);
    let mut s = zero_secrets(&inst, forced(2));
    let p = inst.pattern(&s.assignment).unwrap();
    let v = (0..p.graph().n_vertices())
        .find(|&v| p.role(v) == Role::Computation && p.graph().neighbors(v).iter().any(|&w| p.role(w) == Role::Dummy))
        .unwrap();
    let dummies: Vec<usize> = p.graph().neighbors(v).iter().copied().filter(|&w| p.role(w) == Role::Dummy).collect();
    s.dummies[dummies[0]] = 1;
    s.theta[v] = AngleVector::qubit(3);
    let desc = prepare_vertex(&p, v, &s);
    assert_eq!(desc.z, 1);
    let st = descriptor_state(&desc, 2).unwrap();
    let want = StateVector::rotated_plus(&AngleVector::qubit(7));
    assert!((st.overlap(&want).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn delta_examples() {
    let mut inst = line_instance(2, 2);
    let mut free = inst.free_angles().to_vec();
    free[0][0] = AngleVector::qubit(2);
    inst = LocalisingInstance::new(2, inst.graph().clone(), free).unwrap();
    let mut s = zero_secrets(&inst, forced(2));
    let p = inst.pattern(&s.assignment).unwrap();
    let first = p.order().iter().copied().find(|&v| p.role(v) == Role::Computation).unwrap();
    let signals = vec![None; p.graph().n_vertices()];
    assert_eq!(delta_message(first, &p, &s, &signals).unwrap(), AngleVector::qubit(2));
    s.theta[first] = AngleVector::qubit(1);
    s.r[first] = 1;
    assert_eq!(delta_message(first, &p, &s, &signals).unwrap(), AngleVector::qubit(7));
    let out = p.graph().outputs()[0];
    assert!(matches!(delta_message(out, &p, &s, &signals), Err(Error::InvalidRole(_))));
}

#[test]
fn honest_trap_outcome_is_its_pad() {
    for d in [2u32, 3] {
        let inst = line_instance(d, 2);
        let mut rng = seeded(7);
        for _ in 0..20 {
            let run = run_localising(&inst, &ProverStrategy::Honest, Backend::Statevector, &mut rng).unwrap();
            for (t, sig) in run.trap_signals() {
                assert_eq!(sig, 0);
                let b = run.transcript.outcomes().iter().find(|(v, _)| *v == t).unwrap().1;
                assert_eq!(b, run.secrets.r[t]);
            }
        }
    }
}

#[test]
fn record_outcome_examples() {
    assert_eq!(record_outcome(3, 0, 5), 3);
    assert_eq!(record_outcome(1, 1, 2), 0);
    assert_eq!(record_outcome(3, 4, 5), 4);
}

#[test]
fn honest_reduced_identity_accepts_with_fidelity_one() {
    for d in [2u32, 3] {
        let inst = line_instance(d, 2);
        let ideal = ideal_density(&inst);
        let mut rng = seeded(11);
        for _ in 0..10 {
            let run = run_localising(&inst, &ProverStrategy::Honest, Backend::Statevector, &mut rng).unwrap();
            assert_eq!(run.indicator, Indicator::Acc);
            let out = run.decoded_output().unwrap();
            assert!((out.fidelity(&ideal).unwrap() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn honest_random_angles_match_direct_product() {
    let mut rng = seeded(12);
    for d in [2u32, 3, 5] {
        let g = attach_gadgets(build_dotted_line(2).unwrap()).unwrap();
        let space = AngleVector::space_size(d);
        let free = vec![(0..2).map(|_| AngleVector::from_index(d, rng.gen_range(0..space))).collect()];
        let inst = LocalisingInstance::new(d, g, free).unwrap();
        let ideal = ideal_density(&inst);
        for _ in 0..5 {
            let run = run_localising(&inst, &ProverStrategy::Honest, Backend::Statevector, &mut rng).unwrap();
            assert_eq!(run.indicator, Indicator::Acc);
            assert!(run.decoded_output().unwrap().trace_distance(&ideal).unwrap() < 1e-9);
        }
    }
}

#[test]
fn two_chains_on_dotted_complete() {
    let g = attach_gadgets(crate::graphs::build_dotted_complete_chains(2, 2).unwrap()).unwrap();
    let free = vec![vec![], vec![]];
    let inst = LocalisingInstance::new(2, g, free).unwrap();
    let ideal = ideal_density(&inst);
    let mut rng = seeded(13);
    let run = run_localising(&inst, &ProverStrategy::Honest, Backend::Statevector, &mut rng).unwrap();
    assert_eq!(run.indicator, Indicator::Acc);
    assert_eq!(run.output_sites.len(), 2);
    assert!(run.decoded_output().unwrap().trace_distance(&ideal).unwrap() < 1e-9);
}

#[test]
fn x_on_trap_rejects() {
    let inst = line_instance(2, 2);
    let a = forced(2);
    let trap = inst.graph().trap_primary(&a, 1);
    let strat = ProverStrategy::PauliAttack { attacks: vec![PauliAttack { vertex: trap, x: 1, z: 0 }] };
    let mut rng = seeded(3);
    for _ in 0..20 {
        let s = secrets_for_assignment(&inst, a.clone(), &mut rng).unwrap();
        let run = run_localising_with(&inst, s, &strat, Backend::Statevector, &mut rng).unwrap();
        assert_eq!(run.indicator, Indicator::Rej);
    }
}

#[test]
fn z_only_attack_accepts_and_matches_frame() {
    let inst = line_instance(3, 2);
    let ideal = inst.ideal_output().unwrap();
    let mut rng = seeded(4);
    for _ in 0..10 {
        let s = draw_secrets(&inst, &mut rng).unwrap();
        let p = inst.pattern(&s.assignment).unwrap();
        let v = p.computation_vertices()[1];
        let strat = ProverStrategy::PauliAttack { attacks: vec![PauliAttack { vertex: v, x: 0, z: 2 }] };
        let run = run_localising_with(&inst, s, &strat, Backend::Statevector, &mut rng).unwrap();
        assert_eq!(run.indicator, Indicator::Acc);
        let fo = propagate_frame(&run.pattern, &PauliFrame::from_strategy(3, p.graph().n_vertices(), &strat).unwrap()).unwrap();
        assert!(fo.residual.is_identity_up_to_phase());
        let out = run.decoded_output().unwrap();
        assert!(out.trace_distance(&ideal.to_density().unwrap()).unwrap() < 1e-9);
    }
}

#[test]
fn pauli_attacks_match_frame_prediction() {
    let mut rng = seeded(5);
    for d in [2u32, 3] {
        let g = attach_gadgets(build_dotted_line(2).unwrap()).unwrap();
        let space = AngleVector::space_size(d);
        let mut free = vec![AngleVector::zero(d); 2];
        free[0] = AngleVector::from_index(d, rng.gen_range(0..space));
        let inst = LocalisingInstance::new(d, g, vec![free]).unwrap();
        let ideal = inst.ideal_output().unwrap();
        let n = inst.graph().n_vertices();
        for _ in 0..30 {
            let attacks = (0..rng.gen_range(1..4))
                .map(|_| PauliAttack { vertex: rng.gen_range(0..n), x: rng.gen_range(0..d), z: rng.gen_range(0..d) })
                .collect();
            let strat = ProverStrategy::PauliAttack { attacks };
            let run = run_localising(&inst, &strat, Backend::Statevector, &mut rng).unwrap();
            let fo = propagate_frame(&run.pattern, &PauliFrame::from_strategy(d, n, &strat).unwrap()).unwrap();
            assert_eq!(run.indicator == Indicator::Acc, fo.accepts());
            let mut want = ideal.clone();
            want.apply_pauli(&fo.residual).unwrap();
            let got = run.decoded_output().unwrap();
            assert!(got.trace_distance(&want.to_density().unwrap()).unwrap() < 1e-8);
        }
    }
}

#[test]
fn frame_backend_reports_same_indicator() {
    let inst = line_instance(2, 2);
    let a = forced(2);
    let trap = inst.graph().trap_primary(&a, 0);
    let strat = ProverStrategy::PauliAttack { attacks: vec![PauliAttack { vertex: trap, x: 1, z: 1 }] };
    let mut rng = seeded(6);
    let s = secrets_for_assignment(&inst, a, &mut rng).unwrap();
    let run = run_localising_with(&inst, s, &strat, Backend::Frame, &mut rng).unwrap();
    assert_eq!(run.indicator, Indicator::Rej);
    assert!(run.decoded_output().is_err());
    let honest = run_localising(&inst, &ProverStrategy::Honest, Backend::Frame, &mut rng).unwrap();
    assert_eq!(honest.indicator, Indicator::Acc);
}

#[test]
fn unitary_attack_needs_statevector() {
    let inst = line_instance(2, 2);
    let strat = ProverStrategy::UnitaryAttack { ancillas: 1, gates: vec![TimedGate { before: 0, gate: Gate::cx(0, inst.graph().n_vertices()) }] };
    let mut rng = seeded(8);
    assert!(matches!(run_localising(&inst, &strat, Backend::Frame, &mut rng), Err(Error::Backend(_))));
    let run = run_localising(&inst, &strat, Backend::Statevector, &mut rng).unwrap();
    assert!(run.prover_output.unwrap().is_valid(1e-9));
}

#[test]
fn unitary_x_on_trap_rejects() {
    let inst = line_instance(3, 2);
    let a = forced(2);
    let trap = inst.graph().trap_primary(&a, 0);
    let mut rng = seeded(9);
    let s = secrets_for_assignment(&inst, a, &mut rng).unwrap();
    let p = inst.pattern(&s.assignment).unwrap();
    let round = p.order().iter().position(|&v| v == trap).unwrap();
    // X^{-1} before the rotated readout commutes past the pad and shifts the
    // outcome.
    let gate = Gate::pauli(PauliOp::single(3, 1, 0, 1, 0), vec![trap]);
    let strat = ProverStrategy::UnitaryAttack { ancillas: 0, gates: vec![TimedGate { before: round, gate }] };
    let run = run_localising_with(&inst, s, &strat, Backend::Statevector, &mut rng).unwrap();
    assert_eq!(run.indicator, Indicator::Rej);
}

#[test]
fn malformed_strategies_are_rejected() {
    let inst = line_instance(2, 2);
    let n = inst.graph().n_vertices();
    let mut rng = seeded(10);
    let bad = ProverStrategy::PauliAttack { attacks: vec![PauliAttack { vertex: n, x: 1, z: 0 }] };
    assert!(matches!(run_localising(&inst, &bad, Backend::Statevector, &mut rng), Err(Error::MalformedStrategy(_))));
    let too_many = ProverStrategy::UnitaryAttack { ancillas: 3, gates: vec![] };
    assert!(matches!(run_localising(&inst, &too_many, Backend::Statevector, &mut rng), Err(Error::MalformedStrategy(_))));
}

#[test]
fn output_position_is_fixed() {
    let inst = LocalisingInstance::identity(2, attach_gadgets(build_dotted_complete(2).unwrap()).unwrap()).unwrap();
    let mut rng = seeded(14);
    let first = run_localising(&inst, &ProverStrategy::Honest, Backend::Frame, &mut rng).unwrap().output_sites;
    for _ in 0..50 {
        let run = run_localising(&inst, &ProverStrategy::Honest, Backend::Frame, &mut rng).unwrap();
        assert_eq!(run.output_sites, first);
    }
}

#[test]
fn transcript_replays_bit_exact() {
    let inst = line_instance(3, 2);
    let a = run_localising(&inst, &ProverStrategy::Honest, Backend::Statevector, &mut seeded(99)).unwrap();
    let b = run_localising(&inst, &ProverStrategy::Honest, Backend::Statevector, &mut seeded(99)).unwrap();
    assert_eq!(a.transcript.to_jsonl().unwrap(), b.transcript.to_jsonl().unwrap());
    assert!(a.transcript.check_alternation().is_ok());
    assert!(a.transcript.counters_consistent());
}

fn small_line(d: u32, angles: Vec<AngleVector>) -> MeasurementPattern {
    let n = angles.len();
    let mut roles = vec![Role::Computation; n];
    roles[n - 1] = Role::Output;
    MeasurementPattern::new(d, OpenGraph::line(n).unwrap(), roles, angles, Flow::line(n), None).unwrap()
}

#[test]
fn blindness_two_vertex_angles() {
    let a = small_line(2, vec![AngleVector::qubit(1), AngleVector::zero(2)]);
    let b = small_line(2, vec![AngleVector::qubit(6), AngleVector::zero(2)]);
    assert!(blindness_check(&a, &b).unwrap().distance < 1e-9);
    assert!(blindness_check(&a, &a).unwrap().distance < 1e-9);
}

#[test]
fn blindness_three_vertex_line() {
    let a = small_line(2, vec![AngleVector::qubit(1), AngleVector::qubit(2), AngleVector::zero(2)]);
    let b = small_line(2, vec![AngleVector::qubit(5), AngleVector::qubit(0), AngleVector::zero(2)]);
    let rep = blindness_check(&a, &b).unwrap();
    assert_eq!(rep.outcome_strings, 4);
    assert!(rep.distance < 1e-9);
}

#[test]
fn blindness_detects_a_leaky_view() {
    // Without pre-rotations the δ values reveal the angles outright; check the
    // distance function can see that by comparing blocks with disjoint keys.
    let a = small_line(2, vec![AngleVector::qubit(1), AngleVector::zero(2)]);
    let b = small_line(2, vec![AngleVector::qubit(2), AngleVector::zero(2)]);
    let va = blindness::leaky_view(&a).unwrap();
    let vb = blindness::leaky_view(&b).unwrap();
    assert!((blindness::view_distance(&va, &vb) - 1.0).abs() < 1e-9);
}

#[test]
fn blindness_skeleton_mismatch() {
    let a = small_line(2, vec![AngleVector::qubit(1), AngleVector::zero(2)]);
    let b = small_line(2, vec![AngleVector::qubit(1), AngleVector::zero(2), AngleVector::zero(2)]);
    assert!(matches!(blindness_check(&a, &b), Err(Error::SkeletonMismatch(_))));
    let c = small_line(3, vec![AngleVector::zero(3), AngleVector::zero(3)]);
    assert!(matches!(blindness_check(&a, &c), Err(Error::SkeletonMismatch(_))));
}

#[test]
fn blindness_per_vertex_pad() {
    for d in [2u32, 3, 5] {
        assert!(blindness_per_vertex(d).unwrap() < 1e-9);
    }
}
