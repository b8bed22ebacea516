use super::*;
use crate::qudit::{gate_matrix, GateKind};
use crate::rng::seeded;
use crate::stats::binomial_sigma;
use proptest::prelude::*;
use rand::Rng;

fn p1() -> CodeParams {
    CodeParams::new(5, 1, None).unwrap()
}

fn random_state<R: Rng>(d: u32, n: usize, rng: &mut R) -> StateVector {
    let dim = (d as usize).pow(n as u32);
    StateVector::from_amplitudes(d, n, (0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).unwrap()
}

/// Direct matrix of a logical gate on the logical register.
fn logical_matrix_apply(g: LogicalClifford, wires: &[usize], st: &mut StateVector) {
    let d = st.d();
    let gate = match g {
        LogicalClifford::X => Gate::pauli(PauliOp::single(d, 1, 0, 1, 0), vec![wires[0]]),
        LogicalClifford::Z => Gate::pauli(PauliOp::single(d, 1, 0, 0, 1), vec![wires[0]]),
        LogicalClifford::F => Gate::f(wires[0]),
        LogicalClifford::S => Gate::s(wires[0]),
        LogicalClifford::CX => Gate::cx(wires[0], wires[1]),
    };
    st.apply_gate(&gate).unwrap();
}

#[test]
fn codewords_of_one() {
    let mut words = codeword_set(1, &p1(), &SignKey::plus(3)).unwrap();
    words.sort();
    let mut want = vec![vec![1, 1, 1], vec![2, 3, 4], vec![3, 0, 2], vec![4, 2, 0], vec![0, 4, 3]];
    want.sort();
    assert_eq!(words, want);
}

#[test]
fn zero_word_encodes_zero() {
    assert!(codeword_set(0, &p1(), &SignKey::plus(3)).unwrap().contains(&vec![0, 0, 0]));
}

#[test]
fn flipped_sign_negates_its_coordinate() {
    let plus = codeword_set(1, &p1(), &SignKey::plus(3)).unwrap();
    let k = SignKey::new(vec![1, -1, 1]).unwrap();
    let flipped = codeword_set(1, &p1(), &k).unwrap();
    for (a, b) in plus.iter().zip(&flipped) {
        assert_eq!(a[0], b[0]);
        assert_eq!((a[1] + b[1]) % 5, 0);
        assert_eq!(a[2], b[2]);
    }
}

#[test]
fn encoded_one_has_five_equal_amplitudes() {
    let st = encode_quantum(1, &p1(), &SignKey::plus(3)).unwrap();
    let support: Vec<_> = st.amplitudes().iter().filter(|a| a.norm() > 1e-12).collect();
    assert_eq!(support.len(), 5);
    for a in support {
        assert!((a.re - 1.0 / 5f64.sqrt()).abs() < 1e-12 && a.im.abs() < 1e-12);
    }
    let zero = encode_quantum(0, &p1(), &SignKey::plus(3)).unwrap();
    assert!(zero.inner(&st).unwrap().norm() < 1e-12);
}

#[test]
fn decode_examples() {
    let k = SignKey::plus(3);
    assert_eq!(detect_and_decode(&[1, 1, 1], &p1(), &k).unwrap(), Decoded::Accept(1));
    assert_eq!(detect_and_decode(&[1, 1, 2], &p1(), &k).unwrap(), Decoded::Reject);
    assert!(detect_and_decode(&[1, 1], &p1(), &k).is_err());
}

#[test]
fn lagrange_weights_recover_constant_term() {
    let params = CodeParams::new(7, 2, None).unwrap();
    let lam = params.lagrange_at_zero();
    let mut rng = seeded(3);
    for _ in 0..50 {
        let coeffs: Vec<u32> = (0..5).map(|_| rng.gen_range(0..7)).collect();
        let s: u64 = params.eval_points().iter().zip(&lam).map(|(&x, &l)| params.eval(&coeffs, x) as u64 * l as u64).sum();
        assert_eq!((s % 7) as u32, coeffs[0]);
    }
}

#[test]
fn interpolation_reproduces_values() {
    let mut rng = seeded(4);
    let pts = [1u32, 2, 3, 5, 6];
    for _ in 0..100 {
        let vals: Vec<u32> = (0..5).map(|_| rng.gen_range(0..7)).collect();
        let c = interpolate(&pts, &vals, 7);
        let params = CodeParams::new(7, 2, Some(pts.to_vec())).unwrap();
        for (x, v) in pts.iter().zip(&vals) {
            assert_eq!(params.eval(&c, *x), *v);
        }
    }
}

#[test]
fn parameter_errors() {
    assert!(matches!(CodeParams::new(5, 2, None), Err(Error::CodeParams(_))));
    assert!(matches!(CodeParams::new(7, 1, Some(vec![1, 1, 2])), Err(Error::CodeParams(_))));
    assert!(matches!(CodeParams::new(7, 1, Some(vec![0, 1, 2])), Err(Error::CodeParams(_))));
    assert!(matches!(CodeParams::new(6, 1, None), Err(Error::NotPrime(6))));
    assert!(SignKey::new(vec![1, 0, -1]).is_err());
}

#[test]
fn worst_shift_p1_is_at_most_half() {
    let (e, rate) = worst_shift_acceptance(&p1()).unwrap();
    assert!(e.iter().any(|&v| v != 0));
    assert!(rate <= 0.5);
}

#[test]
fn worst_shift_p2_sampled_below_quarter() {
    let params = CodeParams::new(7, 2, None).unwrap();
    let (e, exact) = worst_shift_acceptance(&params).unwrap();
    assert!(exact <= 0.25);
    let n = 100_000;
    let rate = sampled_shift_acceptance(&e, &params, n, &mut seeded(8)).unwrap();
    assert!(rate <= 0.25 + 3.0 * binomial_sigma(0.25, n));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]
    #[test]
    fn codewords_decode_to_their_value(a in 0u32..5, bits in 0usize..8, pick in 0usize..5) {
        let params = p1();
        let key = SignKey::all(3)[bits].clone();
        let words = codeword_set(a, &params, &key).unwrap();
        prop_assert_eq!(detect_and_decode(&words[pick], &params, &key).unwrap(), Decoded::Accept(a));
    }
}

#[test]
fn transversal_gates_act_logically() {
    let params = p1();
    let mut rng = seeded(5);
    for key in SignKey::all(3) {
        for g in [LogicalClifford::X, LogicalClifford::Z, LogicalClifford::F, LogicalClifford::S] {
            let logical = random_state(5, 1, &mut rng);
            let mut enc = encode_state(&logical, &params, &key).unwrap();
            enc.apply_circuit(&transversal_gates(g, &[0], &params, &key).unwrap()).unwrap();
            let mut want = logical.clone();
            logical_matrix_apply(g, &[0], &mut want);
            let want = encode_state(&want, &params, &key).unwrap();
            assert!((enc.overlap(&want).unwrap() - 1.0).abs() < 1e-9, "{g:?} {key:?}");
        }
    }
}

#[test]
fn transversal_cx_between_blocks() {
    let params = p1();
    let mut rng = seeded(6);
    let key = SignKey::new(vec![1, -1, -1]).unwrap();
    for wires in [[0usize, 1], [1, 0]] {
        let logical = random_state(5, 2, &mut rng);
        let mut enc = encode_state(&logical, &params, &key).unwrap();
        enc.apply_circuit(&transversal_gates(LogicalClifford::CX, &wires, &params, &key).unwrap()).unwrap();
        let mut want = logical.clone();
        logical_matrix_apply(LogicalClifford::CX, &wires, &mut want);
        let want = encode_state(&want, &params, &key).unwrap();
        assert!((enc.overlap(&want).unwrap() - 1.0).abs() < 1e-9);
    }
    assert!(transversal_gates(LogicalClifford::CX, &[0, 0], &params, &key).is_err());
}

#[test]
fn fourier_key_update() {
    let d = 5;
    let key = PauliKey::from_pauli(&PauliOp::from_xz(d, &[1, 2, 0], &[3, 0, 4]));
    let gates: Vec<Gate> = (0..3).map(Gate::f).collect();
    let new = update_pauli_key(&key, &gates).unwrap();
    for i in 0..3 {
        assert_eq!(new.x()[i], md(-(key.z()[i] as i64), d));
        assert_eq!(new.z()[i], key.x()[i]);
    }
    assert_eq!(update_pauli_key(&key, &[]).unwrap(), key);
    assert!(matches!(update_pauli_key(&key, &[Gate::toffoli(0, 1, 2)]), Err(Error::NotClifford(_))));
}

#[test]
fn sequential_updates_compose() {
    let mut rng = seeded(7);
    let key = PauliKey::random(5, 3, &mut rng);
    let a = vec![Gate::f(0), Gate::cx(0, 2), Gate::s(1)];
    let b = vec![Gate::mul(3, 2), Gate::cz(1, 2)];
    let step = update_pauli_key(&update_pauli_key(&key, &a).unwrap(), &b).unwrap();
    let all: Vec<Gate> = a.into_iter().chain(b).collect();
    assert_eq!(step, update_pauli_key(&key, &all).unwrap());
}

#[test]
fn decrypt_after_update_matches_plain_evolution() {
    let params = p1();
    let mut rng = seeded(8);
    for _ in 0..20 {
        let key = SignKey::random(3, &mut rng);
        let logical = random_state(5, 1, &mut rng);
        let plain = encode_state(&logical, &params, &key).unwrap();
        let pad = PauliKey::random(5, 3, &mut rng);
        let mut padded = plain.clone();
        pad.encrypt(&mut padded).unwrap();
        let mut evolved = plain.clone();
        let mut k = pad.clone();
        for g in [LogicalClifford::F, LogicalClifford::S, LogicalClifford::Z, LogicalClifford::X] {
            let gates = transversal_gates(g, &[0], &params, &key).unwrap();
            padded.apply_circuit(&gates).unwrap();
            evolved.apply_circuit(&gates).unwrap();
            k = update_pauli_key(&k, &gates).unwrap();
        }
        k.decrypt(&mut padded).unwrap();
        assert!((padded.overlap(&evolved).unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn mul_gate_is_a_permutation() {
    let m = gate_matrix(&Gate::new(GateKind::Mul(2), vec![0]), 5).unwrap();
    assert_eq!(m[(2, 1)], Complex64::new(1.0, 0.0));
    assert_eq!(m[(4, 2)], Complex64::new(1.0, 0.0));
}
