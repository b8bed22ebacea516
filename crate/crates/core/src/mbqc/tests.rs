use super::*;
use crate::qudit::{gate_matrix, CMatrix, Gate};
use crate::rng::seeded;
use proptest::prelude::*;
use rand::Rng;

fn line_pattern(d: u32, angles: Vec<AngleVector>) -> MeasurementPattern {
    let n = angles.len();
    let mut roles = vec![Role::Computation; n];
    roles[n - 1] = Role::Output;
    MeasurementPattern::new(d, OpenGraph::line(n).unwrap(), roles, angles, Flow::line(n), None).unwrap()
}

/// 2×k grid, rows `0..k` and `k..2k`, flow along the rows.
fn grid_pattern(d: u32, k: usize, angles: Vec<AngleVector>) -> MeasurementPattern {
    let mut edges = Vec::new();
    for c in 0..k {
        edges.push((c, k + c));
        if c + 1 < k {
            edges.push((c, c + 1));
            edges.push((k + c, k + c + 1));
        }
    }
    let g = OpenGraph::new(2 * k, &edges, vec![0, k], vec![k - 1, 2 * k - 1]).unwrap();
    let f = (0..2 * k).map(|v| ((v % k) + 1 < k).then_some(v + 1)).collect();
    let levels = (0..2 * k).map(|v| v % k).collect();
    let roles = (0..2 * k).map(|v| if v % k == k - 1 { Role::Output } else { Role::Computation }).collect();
    MeasurementPattern::new(d, g, roles, angles, Flow { f, levels }, None).unwrap()
}

/// Dense oracle: full graph state, every measured vertex projected onto the
/// zero-outcome element of its base basis, no adaptation.
fn branch_zero_oracle(p: &MeasurementPattern, input: &StateVector) -> StateVector {
    let d = p.d();
    let n = p.graph().n_vertices();
    let inputs = p.graph().inputs().to_vec();
    let mut st = input.clone();
    let mut site_of = vec![usize::MAX; n];
    for (k, &v) in inputs.iter().enumerate() {
        site_of[v] = k;
    }
    for v in 0..n {
        if site_of[v] == usize::MAX {
            site_of[v] = st.n_sites();
            let s = if p.role(v) == Role::Dummy { StateVector::basis(d, &[0]) } else { StateVector::plus(d, 1) };
            st.append(&s.unwrap()).unwrap();
        }
    }
    for (a, b) in p.graph().edges() {
        st.apply_gate(&Gate::cz(site_of[a], site_of[b])).unwrap();
    }
    // Vertices listed in register-site order.
    let mut alive: Vec<usize> = (0..n).collect();
    alive.sort_by_key(|&v| site_of[v]);
    for &v in p.order() {
        let pos = alive.iter().position(|&w| w == v).unwrap();
        let site = pos;
        match p.role(v) {
            Role::Dummy => {
                st.project_computational(site, 0).unwrap();
            }
            _ => {
                st.project_rotated(site, &p.angle(v), 0).unwrap();
            }
        }
        alive.remove(pos);
    }
    let order: Vec<usize> = p.graph().outputs().iter().map(|o| alive.iter().position(|w| w == o).unwrap()).collect();
    st.permuted(&order).unwrap()
}

#[test]
fn line_flow_examples() {
    let g = OpenGraph::line(3).unwrap();
    assert!(verify_flow(&g, &Flow::line(3)).unwrap());
    let bad = Flow { f: vec![Some(2), Some(2), None], levels: vec![0, 1, 2] };
    assert!(!verify_flow(&g, &bad).unwrap());
    let into_input = Flow { f: vec![Some(1), Some(0), None], levels: vec![0, 1, 2] };
    assert_eq!(verify_flow(&g, &into_input), Err(Error::FlowRange(1)));
}

#[test]
fn line_dependencies() {
    let g = OpenGraph::line(3).unwrap();
    let (dx, dz) = dependencies_from_flow(&g, &Flow::line(3));
    assert_eq!(dx, vec![vec![], vec![0], vec![1]]);
    assert_eq!(dz, vec![vec![], vec![], vec![0]]);
    let single = OpenGraph::new(1, &[], vec![0], vec![0]).unwrap();
    let (dx, dz) = dependencies_from_flow(&single, &Flow { f: vec![None], levels: vec![0] });
    assert!(dx[0].is_empty() && dz[0].is_empty());
}

#[test]
fn actual_angle_examples() {
    let p = line_pattern(2, vec![AngleVector::qubit(0), AngleVector::qubit(1), AngleVector::qubit(0)]);
    assert_eq!(actual_angle(1, &p, &[Some(0), None, None]).unwrap(), AngleVector::qubit(1));
    let p3 = line_pattern(2, vec![AngleVector::qubit(0), AngleVector::qubit(0), AngleVector::qubit(1), AngleVector::qubit(0)]);
    // Vertex 2 has D^X = {1} and D^Z = {0}.
    assert_eq!(actual_angle(2, &p3, &[Some(1), Some(1), None, None]).unwrap(), AngleVector::qubit(3));
    assert_eq!(actual_angle(2, &p3, &[Some(1), None, None, None]), Err(Error::DependencyOrder(2)));
}

#[test]
fn two_vertex_line_is_fourier() {
    let p = line_pattern(2, vec![AngleVector::zero(2); 2]);
    let plus = StateVector::plus(2, 1).unwrap();
    let mut rng = seeded(3);
    for _ in 0..8 {
        let out = execute_pattern(&p, &plus, Backend::Statevector, &mut rng).unwrap().output;
        assert!(out.overlap(&StateVector::zero(2, 1).unwrap()).unwrap() > 1.0 - 1e-12);
    }
    assert!(execute_pattern(&p, &plus, Backend::Frame, &mut rng).is_err());
}

#[test]
fn line_implements_fourier_rotation_product() {
    let mut rng = seeded(11);
    for d in [2u32, 3, 5] {
        for _ in 0..5 {
            let n = rng.gen_range(2..=5);
            let angles: Vec<AngleVector> =
                (0..n).map(|_| AngleVector::from_index(d, rng.gen_range(0..AngleVector::space_size(d)))).collect();
            let p = line_pattern(d, angles.clone());
            let input = StateVector::single(d, (0..d).map(|k| num_complex::Complex64::new(1.0 + k as f64, -(k as f64))).collect()).unwrap();
            let mut u = CMatrix::identity(d as usize, d as usize);
            let f = gate_matrix(&Gate::f(0), d).unwrap();
            for a in &angles[..n - 1] {
                u = &f * a.rotation_matrix().adjoint() * u;
            }
            let want = StateVector::single(d, (u * nalgebra::DVector::from_vec(input.amplitudes().to_vec())).iter().copied().collect()).unwrap();
            let got = execute_pattern(&p, &input, Backend::Statevector, &mut rng).unwrap().output;
            assert!(got.overlap(&want).unwrap() > 1.0 - 1e-9, "d={d} n={n}");
        }
    }
}

fn all_strings(d: u32, m: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out.into_iter().flat_map(|s| (0..d).map(move |j| [s.clone(), vec![j]].concat())).collect();
    }
    out
}

fn assert_deterministic(p: &MeasurementPattern, input: &StateVector) {
    let oracle = branch_zero_oracle(p, input);
    let m = p.computation_vertices().len();
    for branch in all_strings(p.d(), m) {
        let got = execute_pattern_forced(p, input, &branch).unwrap().output;
        assert!(got.overlap(&oracle).unwrap() > 1.0 - 1e-9, "branch {branch:?}");
    }
}

#[test]
fn grid_determinism_exhaustive() {
    let mut rng = seeded(5);
    for (d, k) in [(2u32, 4usize), (3, 3), (5, 2)] {
        let angles: Vec<AngleVector> =
            (0..2 * k).map(|_| AngleVector::from_index(d, rng.gen_range(0..AngleVector::space_size(d)))).collect();
        let p = grid_pattern(d, k, angles);
        let input = StateVector::plus(d, 2).unwrap();
        let mut input2 = input.clone();
        input2.apply_gate(&Gate::t(0)).unwrap();
        assert_deterministic(&p, &input2);
    }
}

#[test]
fn line_determinism_exhaustive() {
    let mut rng = seeded(6);
    for (d, n) in [(2u32, 9usize), (3, 7), (5, 5), (7, 4)] {
        let angles: Vec<AngleVector> =
            (0..n).map(|_| AngleVector::from_index(d, rng.gen_range(0..AngleVector::space_size(d)))).collect();
        assert_deterministic(&line_pattern(d, angles), &StateVector::rotated_plus(&AngleVector::new(d, 1, 1, 1).unwrap()));
    }
}

#[test]
fn lazy_register_keeps_width_small() {
    let p = line_pattern(2, vec![AngleVector::zero(2); 12]);
    let e = execute_pattern(&p, &StateVector::plus(2, 1).unwrap(), Backend::Statevector, &mut seeded(0)).unwrap();
    assert!(e.peak_sites <= 3, "peak {}", e.peak_sites);
}

#[test]
fn json_round_trip() {
    let p = grid_pattern(3, 3, (0..6).map(|k| AngleVector::new(3, k, 2 * k, 3 * k).unwrap()).collect());
    let s = p.to_json().unwrap();
    assert_eq!(MeasurementPattern::from_json(&s).unwrap(), p);
    let tampered = s.replacen("\"x_deps\": []", "\"x_deps\": [4]", 1);
    assert!(MeasurementPattern::from_json(&tampered).is_err());
}

/// Brute force over every ordered pair with an explicit `⪯` relation matrix.
fn brute_force_flow(g: &OpenGraph, fl: &Flow) -> bool {
    let n = g.n_vertices();
    let prec: Vec<Vec<bool>> = (0..n).map(|x| (0..n).map(|y| x == y || fl.levels[x] < fl.levels[y]).collect()).collect();
    let adj: Vec<Vec<bool>> = (0..n).map(|x| (0..n).map(|y| g.neighbors(x).contains(&y)).collect()).collect();
    for x in 0..n {
        if g.outputs().contains(&x) {
            continue;
        }
        let fx = fl.f[x].unwrap();
        if !adj[x][fx] || !(prec[x][fx] && x != fx) {
            return false;
        }
        for y in 0..n {
            if y != x && adj[y][fx] && !prec[x][y] {
                return false;
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]
    #[test]
    fn verify_flow_matches_brute_force(
        n in 2usize..=10,
        seed in any::<u64>(),
    ) {
        let mut rng = seeded(seed);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(0.35) {
                    edges.push((a, b));
                }
            }
        }
        let n_in = rng.gen_range(0..=n / 2);
        let inputs: Vec<usize> = (0..n_in).collect();
        let outputs: Vec<usize> = (n - rng.gen_range(1..=n / 2)..n).collect();
        let g = OpenGraph::new(n, &edges, inputs.clone(), outputs.clone()).unwrap();
        let non_inputs: Vec<usize> = (0..n).filter(|v| !inputs.contains(v)).collect();
        let f = (0..n)
            .map(|v| (!outputs.contains(&v)).then(|| if rng.gen_bool(0.6) && !g.neighbors(v).is_empty() {
                let ns: Vec<usize> = g.neighbors(v).iter().copied().filter(|w| !inputs.contains(w)).collect();
                if ns.is_empty() { non_inputs[rng.gen_range(0..non_inputs.len())] } else { ns[rng.gen_range(0..ns.len())] }
            } else {
                non_inputs[rng.gen_range(0..non_inputs.len())]
            }))
            .collect();
        let levels = if rng.gen_bool(0.5) { (0..n).collect() } else { (0..n).map(|_| rng.gen_range(0..n)).collect() };
        let fl = Flow { f, levels };
        prop_assert_eq!(verify_flow(&g, &fl).unwrap(), brute_force_flow(&g, &fl));
    }
}
