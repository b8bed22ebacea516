use super::{check_prime, inv_mod, root_of_unity, AngleVector, CMatrix, PauliOp};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Gate kinds of the qudit library.
///
/// For `d = 2`, `S = diag(1, i)` and `T = diag(1, e^{iπ/4})`, the qubit gates
/// whose angles generate the eight-element qubit set. For odd `d`,
/// `S|a⟩ = ω^{a(a+1)/2}|a⟩` and `T|a⟩ = ω^{a³}|a⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "arg")]
pub enum GateKind {
    F,
    S,
    T,
    T3,
    CX,
    CZ,
    Toffoli,
    /// `|a⟩ ↦ |c·a⟩` for non-zero `c`.
    Mul(u32),
    Pauli(PauliOp),
    Rotation(AngleVector),
}

/// A gate together with the register sites it acts on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub sites: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, sites: Vec<usize>) -> Self {
        Gate { kind, sites }
    }

    pub fn f(s: usize) -> Self {
        Gate::new(GateKind::F, vec![s])
    }

    pub fn s(s: usize) -> Self {
        Gate::new(GateKind::S, vec![s])
    }

    pub fn t(s: usize) -> Self {
        Gate::new(GateKind::T, vec![s])
    }

    pub fn cx(c: usize, t: usize) -> Self {
        Gate::new(GateKind::CX, vec![c, t])
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Gate::new(GateKind::CZ, vec![a, b])
    }

    pub fn toffoli(a: usize, b: usize, c: usize) -> Self {
        Gate::new(GateKind::Toffoli, vec![a, b, c])
    }

    pub fn mul(c: u32, s: usize) -> Self {
        Gate::new(GateKind::Mul(c), vec![s])
    }

    pub fn pauli(p: PauliOp, sites: Vec<usize>) -> Self {
        Gate::new(GateKind::Pauli(p), sites)
    }

    pub fn rotation(v: AngleVector, s: usize) -> Self {
        Gate::new(GateKind::Rotation(v), vec![s])
    }

    pub fn name(&self) -> String {
        match &self.kind {
            GateKind::F => "F".into(),
            GateKind::S => "S".into(),
            GateKind::T => "T".into(),
            GateKind::T3 => "T3".into(),
            GateKind::CX => "CX".into(),
            GateKind::CZ => "CZ".into(),
            GateKind::Toffoli => "Toffoli".into(),
            GateKind::Mul(c) => format!("Mul({c})"),
            GateKind::Pauli(_) => "Pauli".into(),
            GateKind::Rotation(v) => format!("Rotation{:?}", v.coeffs()),
        }
    }

    pub fn arity(&self) -> usize {
        match &self.kind {
            GateKind::F | GateKind::S | GateKind::T | GateKind::T3 | GateKind::Mul(_) | GateKind::Rotation(_) => 1,
            GateKind::CX | GateKind::CZ => 2,
            GateKind::Toffoli => 3,
            GateKind::Pauli(p) => p.n_sites(),
        }
    }

    pub fn is_clifford(&self) -> bool {
        matches!(
            self.kind,
            GateKind::F | GateKind::S | GateKind::CX | GateKind::CZ | GateKind::Mul(_) | GateKind::Pauli(_)
        )
    }

    /// Repeat the gate `k` times (gate powers).
    pub fn repeated(&self, k: u32) -> Vec<Gate> {
        (0..k).map(|_| self.clone()).collect()
    }

    pub(crate) fn check_sites(&self, n: usize) -> Result<()> {
        if self.sites.len() != self.arity() {
            return Err(Error::Wiring(format!("{} expects {} sites", self.name(), self.arity())));
        }
        for (i, &s) in self.sites.iter().enumerate() {
            if s >= n {
                return Err(Error::SiteOutOfRange { site: s, n });
            }
            if self.sites[..i].contains(&s) {
                return Err(Error::RepeatedSite);
            }
        }
        Ok(())
    }
}

fn diag(entries: Vec<Complex64>) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(entries))
}

/// Exact unitary of a gate on its own sites (site order as listed).
pub fn gate_matrix(g: &Gate, d: u32) -> Result<CMatrix> {
    check_prime(d)?;
    let du = d as usize;
    let m = match &g.kind {
        GateKind::F => {
            let s = 1.0 / (d as f64).sqrt();
            CMatrix::from_fn(du, du, |b, a| root_of_unity((a * b) as i64, d) * s)
        }
        GateKind::S => {
            if d == 2 {
                diag(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)])
            } else {
                diag((0..du).map(|a| root_of_unity((a * (a + 1) / 2) as i64, d)).collect())
            }
        }
        GateKind::T => {
            if d == 2 {
                diag(vec![Complex64::new(1.0, 0.0), root_of_unity(1, 8)])
            } else {
                diag((0..du).map(|a| root_of_unity((a * a * a) as i64, d)).collect())
            }
        }
        GateKind::T3 => {
            if d != 3 {
                return Err(Error::GateUnsupported { gate: "T3".into(), d });
            }
            diag((0..3).map(|a: i64| root_of_unity((a * a * a) % 9, 9)).collect())
        }
        GateKind::CX => CMatrix::from_fn(du * du, du * du, |row, col| {
            let (a, b) = (col / du, col % du);
            let target = a * du + (a + b) % du;
            if row == target {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
        GateKind::CZ => diag((0..du * du).map(|i| root_of_unity(((i / du) * (i % du)) as i64, d)).collect()),
        GateKind::Toffoli => {
            let n = du * du * du;
            CMatrix::from_fn(n, n, |row, col| {
                let (a, b, c) = (col / (du * du), (col / du) % du, col % du);
                let target = (a * du + b) * du + (c + a * b) % du;
                if row == target {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        }
        GateKind::Mul(c) => {
            let c = (*c % d) as usize;
            if c == 0 {
                return Err(Error::Parameter("Mul(0) is not invertible".into()));
            }
            CMatrix::from_fn(du, du, |row, col| {
                if row == (c * col) % du {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        }
        GateKind::Pauli(p) => {
            if p.d() != d {
                return Err(Error::ModulusMismatch(p.d(), d));
            }
            p.matrix()
        }
        GateKind::Rotation(v) => {
            if v.d() != d {
                return Err(Error::ModulusMismatch(v.d(), d));
            }
            v.rotation_matrix()
        }
    };
    Ok(m)
}

/// Images `(g X_s g†, g Z_s g†)` for each site `s` of the gate, as operators on
/// the gate's own sites.
fn generator_images(g: &Gate, d: u32) -> Result<Vec<(PauliOp, PauliOp)>> {
    let k = g.arity();
    let x = |s: usize, e: u32| PauliOp::single(d, k, s, e, 0);
    let z = |s: usize, e: u32| PauliOp::single(d, k, s, 0, e);
    let mul = |a: PauliOp, b: PauliOp| super::pauli_mul(&a, &b).expect("same shape");
    Ok(match &g.kind {
        GateKind::F => vec![(z(0, 1), x(0, d - 1))],
        GateKind::S => {
            let ph = if d == 2 { 1 } else { 2 };
            vec![(PauliOp::single(d, 1, 0, 1, 1).with_phase(ph), z(0, 1))]
        }
        GateKind::CX => vec![
            (PauliOp::from_xz(d, &[1, 1], &[0, 0]), z(0, 1)),
            (x(1, 1), PauliOp::from_xz(d, &[0, 0], &[d - 1, 1])),
        ],
        GateKind::CZ => vec![
            (mul(x(0, 1), z(1, 1)), z(0, 1)),
            (mul(z(0, 1), x(1, 1)), z(1, 1)),
        ],
        GateKind::Mul(c) => {
            let c = *c % d;
            if c == 0 {
                return Err(Error::Parameter("Mul(0) is not invertible".into()));
            }
            vec![(x(0, c), z(0, inv_mod(c, d)))]
        }
        GateKind::Pauli(q) => {
            let qi = q.inverse();
            (0..k)
                .map(|s| {
                    let cx = mul(mul(q.clone(), x(s, 1)), qi.clone());
                    let cz = mul(mul(q.clone(), z(s, 1)), qi.clone());
                    (cx, cz)
                })
                .collect()
        }
        _ => return Err(Error::NotClifford(g.name())),
    })
}

/// `g · p · g†` for a Clifford gate, phase included.
pub fn clifford_conjugate(g: &Gate, p: &PauliOp) -> Result<PauliOp> {
    if !g.is_clifford() {
        return Err(Error::NotClifford(g.name()));
    }
    let d = p.d();
    if let GateKind::Pauli(q) = &g.kind {
        if q.d() != d {
            return Err(Error::ModulusMismatch(q.d(), d));
        }
    }
    let n = p.n_sites();
    g.check_sites(n)?;
    let images = generator_images(g, d)?;
    // Sites outside the gate are untouched; rebuild p site by site.
    let mut out = PauliOp::identity(d, n).with_phase(p.phase_exp() as i64);
    for site in 0..n {
        let (xe, ze) = (p.x_at(site), p.z_at(site));
        if xe == 0 && ze == 0 {
            continue;
        }
        let factor = match g.sites.iter().position(|&s| s == site) {
            None => PauliOp::single(d, n, site, xe, ze),
            Some(k) => {
                let (ix, iz) = &images[k];
                let local = super::pauli_mul(&ix.pow(xe), &iz.pow(ze))?;
                local.embed(n, &g.sites)
            }
        };
        out = super::pauli_mul(&out, &factor)?;
    }
    Ok(out)
}

/// Conjugate through a gate sequence applied left to right.
pub fn conjugate_circuit(gates: &[Gate], p: &PauliOp) -> Result<PauliOp> {
    let mut acc = p.clone();
    for g in gates {
        acc = clifford_conjugate(g, &acc)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::{max_abs_diff, unitarity_defect};
    use proptest::prelude::*;

    /// Embed a gate matrix into an `n`-site register (oracle for checks).
    pub(crate) fn embed(g: &Gate, d: u32, n: usize) -> CMatrix {
        let u = gate_matrix(g, d).unwrap();
        let du = d as usize;
        let dim = du.pow(n as u32);
        let k = g.sites.len();
        CMatrix::from_fn(dim, dim, |row, col| {
            let digits = |mut i: usize| {
                let mut v = vec![0usize; n];
                for s in (0..n).rev() {
                    v[s] = i % du;
                    i /= du;
                }
                v
            };
            let (r, c) = (digits(row), digits(col));
            for s in 0..n {
                if !g.sites.contains(&s) && r[s] != c[s] {
                    return Complex64::new(0.0, 0.0);
                }
            }
            let mut ri = 0;
            let mut ci = 0;
            for j in 0..k {
                ri = ri * du + r[g.sites[j]];
                ci = ci * du + c[g.sites[j]];
            }
            u[(ri, ci)]
        })
    }

    #[test]
    fn qubit_fourier_is_hadamard() {
        let h = gate_matrix(&Gate::f(0), 2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((h[(0, 0)].re - s).abs() < 1e-15 && (h[(1, 1)].re + s).abs() < 1e-15);
        assert!((h[(0, 1)].re - s).abs() < 1e-15 && (h[(1, 0)].re - s).abs() < 1e-15);
    }

    #[test]
    fn t_gate_exponents_d5() {
        let t = gate_matrix(&Gate::t(0), 5).unwrap();
        for (a, e) in [0i64, 1, 3, 2, 4].into_iter().enumerate() {
            assert!((t[(a, a)] - root_of_unity(e, 5)).norm() < 1e-12);
        }
    }

    #[test]
    fn toffoli_d3_is_permutation() {
        let u = gate_matrix(&Gate::toffoli(0, 1, 2), 3).unwrap();
        for col in 0..27 {
            let (a, b, c) = (col / 9, (col / 3) % 3, col % 3);
            let row = a * 9 + b * 3 + (c + a * b) % 3;
            for r in 0..27 {
                let want = if r == row { 1.0 } else { 0.0 };
                assert!((u[(r, col)] - Complex64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn t3_requires_qutrits() {
        assert!(gate_matrix(&Gate::new(GateKind::T3, vec![0]), 5).is_err());
        assert!(gate_matrix(&Gate::new(GateKind::T3, vec![0]), 3).is_ok());
    }

    #[test]
    fn all_gates_unitary() {
        for d in [2u32, 3, 5, 7] {
            let mut gates = vec![Gate::f(0), Gate::s(0), Gate::t(0), Gate::cx(0, 1), Gate::cz(0, 1), Gate::toffoli(0, 1, 2)];
            for c in 1..d {
                gates.push(Gate::mul(c, 0));
            }
            gates.push(Gate::rotation(AngleVector::new(d, 1, 2, 3).unwrap(), 0));
            if d == 3 {
                gates.push(Gate::new(GateKind::T3, vec![0]));
            }
            for g in gates {
                assert!(unitarity_defect(&gate_matrix(&g, d).unwrap()) < 1e-12, "{} d={d}", g.name());
            }
        }
    }

    fn check_conj(g: &Gate, p: &PauliOp, n: usize) {
        let d = p.d();
        let img = clifford_conjugate(g, p).unwrap();
        let u = embed(g, d, n);
        let lhs = &u * p.matrix() * u.adjoint();
        assert!(max_abs_diff(&lhs, &img.matrix()) < 1e-10, "gate {} on {:?} -> {:?}", g.name(), p, img);
    }

    #[test]
    fn fourier_maps_x_to_z() {
        for d in [2u32, 3, 5, 7, 11] {
            let img = clifford_conjugate(&Gate::f(0), &PauliOp::single(d, 1, 0, 1, 0)).unwrap();
            assert_eq!(img, PauliOp::single(d, 1, 0, 0, 1));
            check_conj(&Gate::f(0), &PauliOp::single(d, 1, 0, 1, 0), 1);
        }
    }

    #[test]
    fn cx_spreads_control_x() {
        for d in [2u32, 3, 5] {
            let img = clifford_conjugate(&Gate::cx(0, 1), &PauliOp::single(d, 2, 0, 1, 0)).unwrap();
            assert_eq!(img, PauliOp::from_xz(d, &[1, 1], &[0, 0]));
            check_conj(&Gate::cx(0, 1), &PauliOp::single(d, 2, 0, 1, 0), 2);
        }
    }

    #[test]
    fn identity_is_fixed() {
        for g in [Gate::f(0), Gate::s(1), Gate::cx(1, 0), Gate::cz(0, 1), Gate::mul(2, 0)] {
            assert!(clifford_conjugate(&g, &PauliOp::identity(5, 2)).unwrap().is_identity());
        }
    }

    #[test]
    fn non_clifford_rejected() {
        let p = PauliOp::single(5, 1, 0, 1, 0);
        assert_eq!(clifford_conjugate(&Gate::t(0), &p), Err(Error::NotClifford("T".into())));
        assert!(clifford_conjugate(&Gate::rotation(AngleVector::zero(5), 0), &p).is_err());
    }

    fn arb_clifford(d: u32, n: usize) -> impl Strategy<Value = Gate> {
        let pair = (0..n, 0..n).prop_filter("distinct", |(a, b)| a != b);
        prop_oneof![
            (0..n).prop_map(Gate::f),
            (0..n).prop_map(Gate::s),
            pair.clone().prop_map(|(a, b)| Gate::cx(a, b)),
            pair.prop_map(|(a, b)| Gate::cz(a, b)),
            (1..d, 0..n).prop_map(|(c, s)| Gate::mul(c, s)),
            (0..d, 0..d, 0..n).prop_map(move |(x, z, s)| Gate::pauli(PauliOp::single(d, 1, 0, x, z), vec![s])),
        ]
    }

    fn arb_case() -> impl Strategy<Value = (Gate, Gate, PauliOp)> {
        prop::sample::select(vec![2u32, 3, 5]).prop_flat_map(|d| {
            let n = 2usize;
            (
                arb_clifford(d, n),
                arb_clifford(d, n),
                prop::collection::vec(0..d, n),
                prop::collection::vec(0..d, n),
                0..(2 * d) as i64,
            )
                .prop_map(move |(g, h, x, z, ph)| (g, h, PauliOp::new(d, x, z, ph).unwrap()))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn conjugation_matches_matrices((g, _h, p) in arb_case()) {
            let d = p.d();
            let img = clifford_conjugate(&g, &p).unwrap();
            let u = embed(&g, d, 2);
            let lhs = &u * p.matrix() * u.adjoint();
            prop_assert!(max_abs_diff(&lhs, &img.matrix()) < 1e-10);
        }

        #[test]
        fn conjugation_is_group_action((g, h, p) in arb_case()) {
            // (g·h) P (g·h)† = g (h P h†) g†, the product applied as h then g.
            let d = p.d();
            let composed = conjugate_circuit(&[h.clone(), g.clone()], &p).unwrap();
            let u = embed(&g, d, 2) * embed(&h, d, 2);
            let lhs = &u * p.matrix() * u.adjoint();
            prop_assert!(max_abs_diff(&lhs, &composed.matrix()) < 1e-10);
            prop_assert_eq!(composed, clifford_conjugate(&g, &clifford_conjugate(&h, &p).unwrap()).unwrap());
        }
    }
}
