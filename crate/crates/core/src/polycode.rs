//! The signed polynomial code: `|a⟩ ↦ Σ_{f(0)=a, deg f ≤ p} |k₁f(α₁), …, k_m f(α_m)⟩`
//! over `F_d` with `m = 2p + 1 < d` evaluation points and a secret sign key
//! `k ∈ {±1}^m`.
//!
//! Every logical Clifford is transversal. With `λ_i` the Lagrange weights of
//! the points at zero (`Σ λ_i g(α_i) = g(0)` for `deg g ≤ 2p`):
//!
//! * `X_L = ⊗ X^{k_i}` and `Z_L = ⊗ Z^{k_i λ_i}`,
//! * `CX_L = ⊗ CX` between equal positions of two blocks,
//! * `F_L = ⊗ F·Mul(λ_i)`, since `Σ λ_i f(α_i) g(α_i) = f(0) g(0)`,
//! * `S_L = ⊗ S^{λ_i} Z^{λ_i (k_i − 1)/2}`, using `a² = Σ λ_i f(α_i)²`.

use crate::error::{Error, Result};
use crate::qudit::{check_prime, conjugate_circuit, inv_mod, md, pauli_mul, Gate, PauliOp};
use crate::statevector::StateVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    d: u32,
    p: usize,
    eval_points: Vec<u32>,
}

impl CodeParams {
    /// Points default to `1, 2, …, m`.
    pub fn new(d: u32, p: usize, eval_points: Option<Vec<u32>>) -> Result<Self> {
        check_prime(d)?;
        if p == 0 {
            return Err(Error::CodeParams("degree bound p must be at least 1".into()));
        }
        let m = 2 * p + 1;
        if m as u64 >= d as u64 {
            return Err(Error::CodeParams(format!("m = {m} must be below d = {d}")));
        }
        let pts = eval_points.unwrap_or_else(|| (1..=m as u32).collect());
        if pts.len() != m {
            return Err(Error::CodeParams(format!("{} points given, {m} needed", pts.len())));
        }
        let mut seen = vec![false; d as usize];
        for &x in &pts {
            if x == 0 || x >= d {
                return Err(Error::CodeParams(format!("point {x} is not a non-zero element of F_{d}")));
            }
            if std::mem::replace(&mut seen[x as usize], true) {
                return Err(Error::CodeParams(format!("point {x} repeats")));
            }
        }
        Ok(CodeParams { d, p, eval_points: pts })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m(&self) -> usize {
        self.eval_points.len()
    }

    pub fn eval_points(&self) -> &[u32] {
        &self.eval_points
    }

    /// `λ_i = Π_{j≠i} α_j / (α_j − α_i)`.
    pub fn lagrange_at_zero(&self) -> Vec<u32> {
        let d = self.d;
        let pts = &self.eval_points;
        (0..pts.len())
            .map(|i| {
                let mut num = 1u64;
                let mut den = 1u64;
                for j in (0..pts.len()).filter(|&j| j != i) {
                    num = num * pts[j] as u64 % d as u64;
                    den = den * md(pts[j] as i64 - pts[i] as i64, d) as u64 % d as u64;
                }
                (num * inv_mod(den as u32, d) as u64 % d as u64) as u32
            })
            .collect()
    }

    fn eval(&self, coeffs: &[u32], x: u32) -> u32 {
        let d = self.d as u64;
        coeffs.iter().rev().fold(0u64, |acc, &c| (acc * x as u64 + c as u64) % d) as u32
    }
}

/// Entries are `+1` or `−1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignKey {
    k: Vec<i8>,
}

impl SignKey {
    pub fn new(k: Vec<i8>) -> Result<Self> {
        if k.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::CodeParams("sign key entries must be ±1".into()));
        }
        Ok(SignKey { k })
    }

    pub fn plus(m: usize) -> Self {
        SignKey { k: vec![1; m] }
    }

    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        SignKey { k: (0..m).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect() }
    }

    /// All `2^m` keys.
    pub fn all(m: usize) -> Vec<SignKey> {
        (0..1usize << m).map(|bits| SignKey { k: (0..m).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect() }).collect()
    }

    pub fn entries(&self) -> &[i8] {
        &self.k
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Coordinate-wise `k_i · y_i` (its own inverse).
    pub fn apply(&self, y: &[u32], d: u32) -> Vec<u32> {
        y.iter().zip(&self.k).map(|(&v, &s)| md(s as i64 * v as i64, d)).collect()
    }
}

fn check_key(params: &CodeParams, key: &SignKey) -> Result<()> {
    if key.len() != params.m() {
        return Err(Error::DimensionMismatch(key.len(), params.m()));
    }
    Ok(())
}

/// All `d^p` codewords of the logical value `a`, ordered by the polynomial's
/// non-constant coefficients.
pub fn codeword_set(a: u32, params: &CodeParams, key: &SignKey) -> Result<Vec<Vec<u32>>> {
    check_key(params, key)?;
    let d = params.d;
    let count = (d as usize).pow(params.p as u32);
    let mut out = Vec::with_capacity(count);
    for idx in 0..count {
        let mut coeffs = vec![a % d];
        let mut k = idx;
        for _ in 0..params.p {
            coeffs.push((k % d as usize) as u32);
            k /= d as usize;
        }
        let y: Vec<u32> = params.eval_points.iter().map(|&x| params.eval(&coeffs, x)).collect();
        out.push(key.apply(&y, d));
    }
    Ok(out)
}

fn string_index(y: &[u32], d: u32) -> usize {
    y.iter().fold(0usize, |acc, &v| acc * d as usize + v as usize)
}

/// Uniform superposition over the codewords of `a`.
pub fn encode_quantum(a: u32, params: &CodeParams, key: &SignKey) -> Result<StateVector> {
    let words = codeword_set(a, params, key)?;
    let d = params.d;
    let dim = crate::statevector::checked_dim(d, params.m(), crate::statevector::MAX_DIM)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    let w = Complex64::new(1.0 / (words.len() as f64).sqrt(), 0.0);
    for y in &words {
        amps[string_index(y, d)] += w;
    }
    StateVector::from_amplitudes(d, params.m(), amps)
}

/// Linear extension of [`encode_quantum`] to a `w`-qudit logical state, one
/// block of `m` qudits per logical qudit.
pub fn encode_state(logical: &StateVector, params: &CodeParams, key: &SignKey) -> Result<StateVector> {
    let d = params.d;
    let w = logical.n_sites();
    let blocks: Vec<StateVector> = (0..d).map(|a| encode_quantum(a, params, key)).collect::<Result<_>>()?;
    let dim = crate::statevector::checked_dim(d, w * params.m(), crate::statevector::MAX_DIM)?;
    let mut acc = vec![Complex64::new(0.0, 0.0); dim];
    for (idx, amp) in logical.amplitudes().iter().enumerate() {
        if amp.norm() < 1e-15 {
            continue;
        }
        let mut digits = vec![0u32; w];
        let mut k = idx;
        for s in (0..w).rev() {
            digits[s] = (k % d as usize) as u32;
            k /= d as usize;
        }
        let mut term = StateVector::zero(d, 0)?;
        for &a in &digits {
            term.append(&blocks[a as usize])?;
        }
        for (slot, x) in acc.iter_mut().zip(term.amplitudes()) {
            *slot += x * amp;
        }
    }
    StateVector::from_amplitudes(d, w * params.m(), acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", content = "value", rename_all = "lowercase")]
pub enum Decoded {
    Accept(u32),
    Reject,
}

/// Coefficients (low degree first) of the interpolant through
/// `(α_i, values_i)`, of degree below `m`.
pub fn interpolate(points: &[u32], values: &[u32], d: u32) -> Vec<u32> {
    let m = points.len();
    let mut out = vec![0u64; m];
    for i in 0..m {
        // Basis polynomial Π_{j≠i} (x − α_j) / (α_i − α_j).
        let mut basis = vec![1u64];
        let mut den = 1u64;
        for j in (0..m).filter(|&j| j != i) {
            let neg = md(-(points[j] as i64), d) as u64;
            let mut next = vec![0u64; basis.len() + 1];
            for (k, &c) in basis.iter().enumerate() {
                next[k] = (next[k] + c * neg) % d as u64;
                next[k + 1] = (next[k + 1] + c) % d as u64;
            }
            basis = next;
            den = den * md(points[i] as i64 - points[j] as i64, d) as u64 % d as u64;
        }
        let scale = values[i] as u64 * inv_mod(den as u32, d) as u64 % d as u64;
        for (k, c) in basis.iter().enumerate() {
            out[k] = (out[k] + c * scale) % d as u64;
        }
    }
    out.into_iter().map(|c| c as u32).collect()
}

/// Undo the sign key, interpolate through all `m` points and accept `f(0)`
/// iff the degree is at most `p`.
pub fn detect_and_decode(measured: &[u32], params: &CodeParams, key: &SignKey) -> Result<Decoded> {
    check_key(params, key)?;
    if measured.len() != params.m() {
        return Err(Error::DimensionMismatch(measured.len(), params.m()));
    }
    let unsigned = key.apply(measured, params.d);
    let coeffs = interpolate(&params.eval_points, &unsigned, params.d);
    if coeffs[params.p + 1..].iter().all(|&c| c == 0) {
        Ok(Decoded::Accept(coeffs[0]))
    } else {
        Ok(Decoded::Reject)
    }
}

/// Whether adding the X shift `e` to a codeword goes unnoticed under `key`.
pub fn shift_accepted(e: &[u32], params: &CodeParams, key: &SignKey) -> Result<bool> {
    Ok(matches!(detect_and_decode(e, params, key)?, Decoded::Accept(_)))
}

/// Worst non-zero shift and its acceptance rate over all `2^m` keys.
pub fn worst_shift_acceptance(params: &CodeParams) -> Result<(Vec<u32>, f64)> {
    let d = params.d as usize;
    let m = params.m();
    let keys = SignKey::all(m);
    let total = d.pow(m as u32);
    let mut worst = (vec![0; m], -1.0);
    for idx in 1..total {
        let mut k = idx;
        let e: Vec<u32> = (0..m)
            .map(|_| {
                let v = (k % d) as u32;
                k /= d;
                v
            })
            .collect();
        let mut acc = 0usize;
        for key in &keys {
            if shift_accepted(&e, params, key)? {
                acc += 1;
            }
        }
        let rate = acc as f64 / keys.len() as f64;
        if rate > worst.1 {
            worst = (e, rate);
        }
    }
    Ok(worst)
}

/// Monte-Carlo acceptance rate of a fixed shift over uniform keys.
pub fn sampled_shift_acceptance<R: Rng + ?Sized>(e: &[u32], params: &CodeParams, samples: usize, rng: &mut R) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InsufficientSamples("no keys sampled".into()));
    }
    let mut acc = 0usize;
    for _ in 0..samples {
        if shift_accepted(e, params, &SignKey::random(params.m(), rng))? {
            acc += 1;
        }
    }
    Ok(acc as f64 / samples as f64)
}

/// Logical Cliffords acting on encoded blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogicalClifford {
    X,
    Z,
    F,
    S,
    CX,
}

/// Physical gates realizing `gate` on blocks `wires` (block `w` holds sites
/// `w·m … w·m + m − 1`).
pub fn transversal_gates(gate: LogicalClifford, wires: &[usize], params: &CodeParams, key: &SignKey) -> Result<Vec<Gate>> {
    check_key(params, key)?;
    let d = params.d;
    let m = params.m();
    let need = if gate == LogicalClifford::CX { 2 } else { 1 };
    if wires.len() != need || (need == 2 && wires[0] == wires[1]) {
        return Err(Error::Wiring(format!("{gate:?} needs {need} distinct wires")));
    }
    let lam = params.lagrange_at_zero();
    let site = |w: usize, i: usize| w * m + i;
    let k = |i: usize| md(key.k[i] as i64, d);
    let mut gates = Vec::new();
    for i in 0..m {
        let s = site(wires[0], i);
        match gate {
            LogicalClifford::X => gates.push(Gate::pauli(PauliOp::single(d, 1, 0, k(i), 0), vec![s])),
            LogicalClifford::Z => gates.push(Gate::pauli(PauliOp::single(d, 1, 0, 0, (k(i) as u64 * lam[i] as u64 % d as u64) as u32), vec![s])),
            LogicalClifford::F => {
                gates.push(Gate::mul(lam[i], s));
                gates.push(Gate::f(s));
            }
            LogicalClifford::S => {
                for _ in 0..lam[i] {
                    gates.push(Gate::s(s));
                }
                if key.k[i] == -1 {
                    gates.push(Gate::pauli(PauliOp::single(d, 1, 0, 0, md(-(lam[i] as i64), d)), vec![s]));
                }
            }
            LogicalClifford::CX => gates.push(Gate::cx(s, site(wires[1], i))),
        }
    }
    Ok(gates)
}

/// Quantum one-time pad `X^{x} Z^{z}` per physical qudit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliKey {
    d: u32,
    x: Vec<u32>,
    z: Vec<u32>,
}

impl PauliKey {
    pub fn zero(d: u32, n: usize) -> Self {
        PauliKey { d, x: vec![0; n], z: vec![0; n] }
    }

    pub fn random<R: Rng + ?Sized>(d: u32, n: usize, rng: &mut R) -> Self {
        PauliKey { d, x: (0..n).map(|_| rng.gen_range(0..d)).collect(), z: (0..n).map(|_| rng.gen_range(0..d)).collect() }
    }

    pub fn from_pauli(p: &PauliOp) -> Self {
        PauliKey { d: p.d(), x: p.x_exps().to_vec(), z: p.z_exps().to_vec() }
    }

    pub fn to_pauli(&self) -> PauliOp {
        PauliOp::from_xz(self.d, &self.x, &self.z)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n_sites(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[u32] {
        &self.x
    }

    pub fn z(&self) -> &[u32] {
        &self.z
    }

    pub fn set(&mut self, site: usize, x: u32, z: u32) {
        self.x[site] = x % self.d;
        self.z[site] = z % self.d;
    }

    /// `P ↦ P ⊗ Q` on fresh sites.
    pub fn extend(&mut self, other: &PauliKey) {
        self.x.extend_from_slice(&other.x);
        self.z.extend_from_slice(&other.z);
    }

    /// The key with `sites` dropped.
    pub fn without_sites(&self, sites: &[usize]) -> PauliKey {
        let keep: Vec<usize> = (0..self.x.len()).filter(|s| !sites.contains(s)).collect();
        PauliKey { d: self.d, x: keep.iter().map(|&s| self.x[s]).collect(), z: keep.iter().map(|&s| self.z[s]).collect() }
    }

    /// Pad a state: `|ψ⟩ ↦ K|ψ⟩`.
    pub fn encrypt(&self, st: &mut StateVector) -> Result<()> {
        st.apply_pauli(&self.to_pauli())
    }

    /// `|ψ⟩ ↦ K⁻¹|ψ⟩`.
    pub fn decrypt(&self, st: &mut StateVector) -> Result<()> {
        st.apply_pauli(&self.to_pauli().inverse())
    }

    /// Strip the X pad from a computational-basis readout.
    pub fn unpad_readout(&self, sites: &[usize], raw: &[u32]) -> Vec<u32> {
        sites.iter().zip(raw).map(|(&s, &b)| md(b as i64 - self.x[s] as i64, self.d)).collect()
    }
}

/// Key after the prover applies the Clifford `gates` to a padded state:
/// `U K |ψ⟩ = (U K U†) U|ψ⟩`. Phases are dropped.
pub fn update_pauli_key(key: &PauliKey, gates: &[Gate]) -> Result<PauliKey> {
    let p = conjugate_circuit(gates, &key.to_pauli())?;
    Ok(PauliKey::from_pauli(&p.without_phase()))
}

/// Combine two keys on the same sites.
pub fn compose_keys(a: &PauliKey, b: &PauliKey) -> Result<PauliKey> {
    Ok(PauliKey::from_pauli(&pauli_mul(&a.to_pauli(), &b.to_pauli())?.without_phase()))
}

#[cfg(test)]
mod tests;
