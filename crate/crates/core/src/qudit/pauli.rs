use super::{check_prime, kron_all, md, root_of_unity, CMatrix};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `ω_{2d}^{phase} · ⊗_j X^{x_j} Z^{z_j}` with `X|a⟩ = |a+1⟩`, `Z|a⟩ = ω_d^a|a⟩`.
///
/// The phase is kept modulo `2d` so that `i = ω_4` is representable for
/// qubits with the same code path as odd primes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliOp {
    d: u32,
    x: Vec<u32>,
    z: Vec<u32>,
    phase: u32,
}

impl PauliOp {
    pub fn new(d: u32, x: Vec<u32>, z: Vec<u32>, phase: i64) -> Result<Self> {
        check_prime(d)?;
        if x.len() != z.len() {
            return Err(Error::SiteMismatch(x.len(), z.len()));
        }
        let x = x.into_iter().map(|v| v % d).collect();
        let z = z.into_iter().map(|v| v % d).collect();
        Ok(PauliOp { d, x, z, phase: md(phase, 2 * d) })
    }

    pub fn identity(d: u32, n: usize) -> Self {
        PauliOp { d, x: vec![0; n], z: vec![0; n], phase: 0 }
    }

    /// `X^x Z^z` on one site of an `n`-site register.
    pub fn single(d: u32, n: usize, site: usize, x: u32, z: u32) -> Self {
        let mut p = PauliOp::identity(d, n);
        p.x[site] = x % d;
        p.z[site] = z % d;
        p
    }

    pub fn from_xz(d: u32, x: &[u32], z: &[u32]) -> Self {
        assert_eq!(x.len(), z.len());
        PauliOp {
            d,
            x: x.iter().map(|v| v % d).collect(),
            z: z.iter().map(|v| v % d).collect(),
            phase: 0,
        }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n_sites(&self) -> usize {
        self.x.len()
    }

    pub fn x_exps(&self) -> &[u32] {
        &self.x
    }

    pub fn z_exps(&self) -> &[u32] {
        &self.z
    }

    pub fn phase_exp(&self) -> u32 {
        self.phase
    }

    pub fn x_at(&self, site: usize) -> u32 {
        self.x[site]
    }

    pub fn z_at(&self, site: usize) -> u32 {
        self.z[site]
    }

    pub fn is_identity(&self) -> bool {
        self.phase == 0 && self.is_identity_up_to_phase()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.iter().all(|&v| v == 0) && self.z.iter().all(|&v| v == 0)
    }

    /// Same operator up to a global phase.
    pub fn eq_up_to_phase(&self, other: &PauliOp) -> bool {
        self.d == other.d && self.x == other.x && self.z == other.z
    }

    pub fn without_phase(&self) -> PauliOp {
        PauliOp { phase: 0, ..self.clone() }
    }

    pub fn with_phase(mut self, phase: i64) -> PauliOp {
        self.phase = md(phase, 2 * self.d);
        self
    }

    /// Number of sites with a non-zero X exponent (X- or Y-like components).
    pub fn x_weight(&self) -> usize {
        self.x.iter().filter(|&&v| v != 0).count()
    }

    /// Number of sites acted on non-trivially.
    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).filter(|(a, b)| **a != 0 || **b != 0).count()
    }

    pub fn set_site(&mut self, site: usize, x: u32, z: u32) {
        self.x[site] = x % self.d;
        self.z[site] = z % self.d;
    }

    /// Restriction to a list of sites (phase dropped).
    pub fn restrict(&self, sites: &[usize]) -> PauliOp {
        PauliOp {
            d: self.d,
            x: sites.iter().map(|&s| self.x[s]).collect(),
            z: sites.iter().map(|&s| self.z[s]).collect(),
            phase: 0,
        }
    }

    /// Embed a `k`-site operator into an `n`-site register at `sites`.
    pub fn embed(&self, n: usize, sites: &[usize]) -> PauliOp {
        assert_eq!(sites.len(), self.n_sites());
        let mut out = PauliOp::identity(self.d, n);
        for (k, &s) in sites.iter().enumerate() {
            out.x[s] = self.x[k];
            out.z[s] = self.z[k];
        }
        out.phase = self.phase;
        out
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &PauliOp) -> PauliOp {
        assert_eq!(self.d, other.d);
        let mut x = self.x.clone();
        x.extend_from_slice(&other.x);
        let mut z = self.z.clone();
        z.extend_from_slice(&other.z);
        PauliOp { d: self.d, x, z, phase: (self.phase + other.phase) % (2 * self.d) }
    }

    pub fn inverse(&self) -> PauliOp {
        // (X^x Z^z)^{-1} = Z^{-z} X^{-x} = ω^{xz} X^{-x} Z^{-z}
        let d = self.d;
        let mut ph = -(self.phase as i64);
        for (a, b) in self.x.iter().zip(&self.z) {
            ph += 2 * ((*a as i64 * *b as i64) % d as i64);
        }
        PauliOp {
            d,
            x: self.x.iter().map(|v| (d - v) % d).collect(),
            z: self.z.iter().map(|v| (d - v) % d).collect(),
            phase: md(ph, 2 * d),
        }
    }

    pub fn pow(&self, k: u32) -> PauliOp {
        let mut acc = PauliOp::identity(self.d, self.n_sites());
        for _ in 0..k {
            acc = pauli_mul(&acc, self).expect("same shape");
        }
        acc
    }

    /// Dense matrix in site order (site 0 is the most significant digit).
    pub fn matrix(&self) -> CMatrix {
        let d = self.d as usize;
        let mats: Vec<CMatrix> = self
            .x
            .iter()
            .zip(&self.z)
            .map(|(&x, &z)| {
                let mut m = CMatrix::zeros(d, d);
                for a in 0..d {
                    m[((a + x as usize) % d, a)] = root_of_unity((z as usize * a) as i64, self.d);
                }
                m
            })
            .collect();
        let ph = root_of_unity(self.phase as i64, 2 * self.d);
        kron_all(&mats).map(|v| v * ph)
    }

    /// Apply to a single computational basis index; returns (new index, phase).
    pub fn act_on_basis(&self, digits: &mut [u32]) -> Complex64 {
        let mut e: i64 = 0;
        for (k, dg) in digits.iter_mut().enumerate() {
            e += 2 * (self.z[k] as i64) * (*dg as i64);
            *dg = (*dg + self.x[k]) % self.d;
        }
        e += self.phase as i64;
        root_of_unity(e, 2 * self.d)
    }
}

/// Group product `p · q` with exact phase.
pub fn pauli_mul(p: &PauliOp, q: &PauliOp) -> Result<PauliOp> {
    if p.d != q.d {
        return Err(Error::ModulusMismatch(p.d, q.d));
    }
    if p.n_sites() != q.n_sites() {
        return Err(Error::SiteMismatch(p.n_sites(), q.n_sites()));
    }
    let d = p.d;
    // X^a Z^b X^c Z^e = ω^{bc} X^{a+c} Z^{b+e}
    let mut ph = p.phase as i64 + q.phase as i64;
    for k in 0..p.n_sites() {
        ph += 2 * ((p.z[k] as i64 * q.x[k] as i64) % d as i64);
    }
    Ok(PauliOp {
        d,
        x: p.x.iter().zip(&q.x).map(|(a, b)| (a + b) % d).collect(),
        z: p.z.iter().zip(&q.z).map(|(a, b)| (a + b) % d).collect(),
        phase: md(ph, 2 * d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::max_abs_diff;
    use proptest::prelude::*;

    #[test]
    fn zx_is_phase_times_xz_for_d5() {
        let z = PauliOp::single(5, 1, 0, 0, 1);
        let x = PauliOp::single(5, 1, 0, 1, 0);
        let zx = pauli_mul(&z, &x).unwrap();
        assert_eq!(zx.x_exps(), &[1]);
        assert_eq!(zx.z_exps(), &[1]);
        assert_eq!(zx.phase_exp(), 2);
        let prod = z.matrix() * x.matrix();
        assert!(max_abs_diff(&prod, &zx.matrix()) < 1e-12);
    }

    #[test]
    fn xzxz_is_minus_identity_for_qubits() {
        let x = PauliOp::single(2, 1, 0, 1, 0);
        let z = PauliOp::single(2, 1, 0, 0, 1);
        let mut acc = PauliOp::identity(2, 1);
        for g in [&x, &z, &x, &z] {
            acc = pauli_mul(&acc, g).unwrap();
        }
        assert!(acc.is_identity_up_to_phase());
        assert_eq!(acc.phase_exp(), 2);
        let m = x.matrix() * z.matrix() * x.matrix() * z.matrix();
        assert!((m[(0, 0)] + Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((m[(1, 1)] + Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn identity_left_unit() {
        let p = PauliOp::new(3, vec![1, 2], vec![0, 1], 5).unwrap();
        assert_eq!(pauli_mul(&PauliOp::identity(3, 2), &p).unwrap(), p);
    }

    #[test]
    fn mismatches_are_errors() {
        let a = PauliOp::identity(3, 1);
        assert_eq!(pauli_mul(&a, &PauliOp::identity(5, 1)), Err(Error::ModulusMismatch(3, 5)));
        assert_eq!(pauli_mul(&a, &PauliOp::identity(3, 2)), Err(Error::SiteMismatch(1, 2)));
    }

    #[test]
    fn inverse_cancels() {
        for d in [2u32, 3, 5] {
            let p = PauliOp::new(d, vec![1, d - 1], vec![d - 1, 1], 3).unwrap();
            assert!(pauli_mul(&p, &p.inverse()).unwrap().is_identity());
            assert!(pauli_mul(&p.inverse(), &p).unwrap().is_identity());
        }
    }

    fn arb_pauli() -> impl Strategy<Value = (PauliOp, PauliOp)> {
        (prop::sample::select(vec![2u32, 3, 5]), 1usize..=2).prop_flat_map(|(d, n)| {
            let one = (
                prop::collection::vec(0..d, n),
                prop::collection::vec(0..d, n),
                0..(2 * d) as i64,
            );
            (one.clone(), one).prop_map(move |((x1, z1, p1), (x2, z2, p2))| {
                (
                    PauliOp::new(d, x1, z1, p1).unwrap(),
                    PauliOp::new(d, x2, z2, p2).unwrap(),
                )
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn product_matches_matrix_product((p, q) in arb_pauli()) {
            let r = pauli_mul(&p, &q).unwrap();
            let m = p.matrix() * q.matrix();
            prop_assert!(max_abs_diff(&m, &r.matrix()) < 1e-10);
        }
    }
}
