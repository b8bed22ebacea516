//! Dense state vectors and density matrices over `n` qudit sites.
//!
//! Basis index `Σ_s a_s d^{n-1-s}`: site 0 is the most significant digit,
//! matching [`crate::qudit::kron`].

use crate::error::{Error, Result};
use crate::qudit::{check_prime, gate_matrix, root_of_unity, AngleVector, CMatrix, Gate, GateKind, PauliOp};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use std::io::{Read, Write};

/// Largest supported register dimension `dⁿ`.
pub const MAX_DIM: u64 = 2_000_000;
/// Largest density-matrix dimension.
pub const MAX_DENSITY_DIM: u64 = 4096;

const ZERO_NORM: f64 = 1e-14;

pub(crate) fn checked_dim(d: u32, n: usize, ceiling: u64) -> Result<usize> {
    let dim = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if dim > ceiling as u128 {
        return Err(Error::DimensionOverflow { dim, ceiling });
    }
    Ok(dim as usize)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    d: u32,
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n` sites.
    pub fn zero(d: u32, n: usize) -> Result<Self> {
        check_prime(d)?;
        let dim = checked_dim(d, n, MAX_DIM)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { d, n, amps })
    }

    pub fn basis(d: u32, digits: &[u32]) -> Result<Self> {
        let mut s = Self::zero(d, digits.len())?;
        let mut idx = 0usize;
        for &a in digits {
            idx = idx * d as usize + (a % d) as usize;
        }
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[idx] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// `|+₀⟩^{⊗n}`.
    pub fn plus(d: u32, n: usize) -> Result<Self> {
        let mut s = Self::zero(d, n)?;
        let a = Complex64::new(1.0 / (s.amps.len() as f64).sqrt(), 0.0);
        s.amps.iter_mut().for_each(|x| *x = a);
        Ok(s)
    }

    /// Single site state from explicit amplitudes (normalized here).
    pub fn single(d: u32, amps: Vec<Complex64>) -> Result<Self> {
        Self::from_amplitudes(d, 1, amps)
    }

    pub fn from_amplitudes(d: u32, n: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        check_prime(d)?;
        let dim = checked_dim(d, n, MAX_DIM)?;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch(amps.len(), dim));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < ZERO_NORM {
            return Err(Error::ZeroNormBranch);
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(StateVector { d, n, amps })
    }

    /// `Rotation(v)|+₀⟩`, the measurement-plane states used for preparation.
    pub fn rotated_plus(v: &AngleVector) -> Self {
        let d = v.d();
        let s = 1.0 / (d as f64).sqrt();
        let amps = v.diagonal().into_iter().map(|c| c * s).collect();
        StateVector { d, n: 1, amps }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    fn stride(&self, site: usize) -> usize {
        (self.d as usize).pow((self.n - 1 - site) as u32)
    }

    fn digit(&self, idx: usize, site: usize) -> usize {
        (idx / self.stride(site)) % self.d as usize
    }

    /// Tensor `other` onto the end of the register.
    pub fn append(&mut self, other: &StateVector) -> Result<()> {
        if other.d != self.d {
            return Err(Error::ModulusMismatch(self.d, other.d));
        }
        checked_dim(self.d, self.n + other.n, MAX_DIM)?;
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        self.amps = amps;
        self.n += other.n;
        Ok(())
    }

    fn check_sites(&self, sites: &[usize]) -> Result<()> {
        for (i, &s) in sites.iter().enumerate() {
            if s >= self.n {
                return Err(Error::SiteOutOfRange { site: s, n: self.n });
            }
            if sites[..i].contains(&s) {
                return Err(Error::RepeatedSite);
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        g.check_sites(self.n)?;
        if let GateKind::Pauli(p) = &g.kind {
            if p.d() != self.d {
                return Err(Error::ModulusMismatch(self.d, p.d()));
            }
            return self.apply_pauli(&p.embed(self.n, &g.sites));
        }
        let u = gate_matrix(g, self.d)?;
        self.apply_unitary(&u, &g.sites)
    }

    pub fn apply_circuit(&mut self, gates: &[Gate]) -> Result<()> {
        gates.iter().try_for_each(|g| self.apply_gate(g))
    }

    /// Apply a `d^k × d^k` matrix to the listed sites (first site most significant).
    pub fn apply_unitary(&mut self, u: &CMatrix, sites: &[usize]) -> Result<()> {
        self.check_sites(sites)?;
        let du = self.d as usize;
        let k = sites.len();
        let local = du.pow(k as u32);
        if u.nrows() != local || u.ncols() != local {
            return Err(Error::DimensionMismatch(u.nrows(), local));
        }
        let strides: Vec<usize> = sites.iter().map(|&s| self.stride(s)).collect();
        let offsets: Vec<usize> = (0..local)
            .map(|j| {
                let mut off = 0;
                let mut r = j;
                for i in (0..k).rev() {
                    off += (r % du) * strides[i];
                    r /= du;
                }
                off
            })
            .collect();
        let is_diag = (0..local).all(|r| (0..local).all(|c| r == c || u[(r, c)] == Complex64::new(0.0, 0.0)));
        let bases: Vec<usize> = (0..self.dim()).filter(|&idx| strides.iter().all(|&st| (idx / st) % du == 0)).collect();
        if is_diag {
            for &b in &bases {
                for (j, off) in offsets.iter().enumerate() {
                    self.amps[b + off] *= u[(j, j)];
                }
            }
            return Ok(());
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); local];
        // One non-zero entry per column: a phased permutation.
        let monomial: Option<Vec<(usize, Complex64)>> = (0..local)
            .map(|c| {
                let mut nz = (0..local).filter(|&r| u[(r, c)] != Complex64::new(0.0, 0.0));
                match (nz.next(), nz.next()) {
                    (Some(r), None) => Some((r, u[(r, c)])),
                    _ => None,
                }
            })
            .collect();
        if let Some(perm) = monomial {
            for &b in &bases {
                for (j, off) in offsets.iter().enumerate() {
                    buf[j] = self.amps[b + off];
                }
                for (c, &(r, v)) in perm.iter().enumerate() {
                    self.amps[b + offsets[r]] = v * buf[c];
                }
            }
            return Ok(());
        }
        for &b in &bases {
            for (j, off) in offsets.iter().enumerate() {
                buf[j] = self.amps[b + off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, v) in buf.iter().enumerate() {
                    acc += u[(r, c)] * v;
                }
                self.amps[b + off] = acc;
            }
        }
        Ok(())
    }

    /// Apply a Pauli word on the whole register.
    pub fn apply_pauli(&mut self, p: &PauliOp) -> Result<()> {
        if p.d() != self.d {
            return Err(Error::ModulusMismatch(self.d, p.d()));
        }
        if p.n_sites() != self.n {
            return Err(Error::SiteMismatch(p.n_sites(), self.n));
        }
        let d = self.d as usize;
        let global = root_of_unity(p.phase_exp() as i64, 2 * self.d);
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (idx, amp) in self.amps.iter().enumerate() {
            let mut r = idx;
            let mut target = 0usize;
            let mut zexp = 0usize;
            let mut place = 1usize;
            for s in (0..self.n).rev() {
                let a = r % d;
                r /= d;
                zexp += p.z_at(s) as usize * a;
                target += ((a + p.x_at(s) as usize) % d) * place;
                place *= d;
            }
            out[target] = amp * global * root_of_unity((zexp % d) as i64, self.d);
        }
        self.amps = out;
        Ok(())
    }

    /// Reorder sites: site `k` of the result is site `order[k]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<StateVector> {
        if order.len() != self.n {
            return Err(Error::SiteMismatch(order.len(), self.n));
        }
        self.check_sites(order)?;
        let d = self.d as usize;
        let mut amps = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (idx, a) in self.amps.iter().enumerate() {
            let new = order.iter().fold(0, |acc, &s| acc * d + self.digit(idx, s));
            amps[new] = *a;
        }
        Ok(StateVector { d: self.d, n: self.n, amps })
    }

    /// Computational-basis outcome distribution of one site.
    pub fn site_probabilities(&self, site: usize) -> Result<Vec<f64>> {
        self.check_sites(&[site])?;
        let mut p = vec![0.0; self.d as usize];
        for (idx, a) in self.amps.iter().enumerate() {
            p[self.digit(idx, site)] += a.norm_sqr();
        }
        Ok(p)
    }

    /// Collapse `site` onto `outcome` and remove it. Returns the branch probability.
    pub fn project_computational(&mut self, site: usize, outcome: u32) -> Result<f64> {
        self.check_sites(&[site])?;
        let d = self.d as usize;
        let stride = self.stride(site);
        let o = (outcome % self.d) as usize;
        let mut amps = Vec::with_capacity(self.dim() / d);
        for (idx, a) in self.amps.iter().enumerate() {
            if (idx / stride) % d == o {
                amps.push(*a);
            }
        }
        let prob: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if prob < ZERO_NORM {
            return Err(Error::ZeroNormBranch);
        }
        let s = prob.sqrt();
        amps.iter_mut().for_each(|a| *a /= s);
        self.amps = amps;
        self.n -= 1;
        Ok(prob)
    }

    pub fn measure_computational<R: Rng + ?Sized>(&mut self, site: usize, rng: &mut R) -> Result<u32> {
        let probs = self.site_probabilities(site)?;
        let j = sample_index(&probs, rng);
        self.project_computational(site, j as u32)?;
        Ok(j as u32)
    }

    /// Map the rotated basis `{Z^{-j} Rotation(v)|+₀⟩}` of `site` onto `{|j⟩}`.
    fn rotate_to_computational(&mut self, site: usize, v: &AngleVector) -> Result<()> {
        if v.d() != self.d {
            return Err(Error::ModulusMismatch(self.d, v.d()));
        }
        let inv = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(v.diagonal().into_iter().map(|c| c.conj()).collect()));
        self.apply_unitary(&inv, &[site])?;
        self.apply_gate(&Gate::f(site))
    }

    /// Outcome distribution of a rotated-basis measurement, state untouched.
    pub fn rotated_probabilities(&self, site: usize, v: &AngleVector) -> Result<Vec<f64>> {
        let mut c = self.clone();
        c.rotate_to_computational(site, v)?;
        c.site_probabilities(site)
    }

    /// Measure `site` in the basis `{Z^{-j} Rotation(v)|+₀⟩}_j`; outcome `j`
    /// labels the `j`-th element. The site is removed from the register.
    pub fn measure_rotated<R: Rng + ?Sized>(&mut self, site: usize, v: &AngleVector, rng: &mut R) -> Result<u32> {
        self.rotate_to_computational(site, v)?;
        self.measure_computational(site, rng)
    }

    /// Post-select a rotated-basis outcome. Returns the branch probability.
    pub fn project_rotated(&mut self, site: usize, v: &AngleVector, outcome: u32) -> Result<f64> {
        self.rotate_to_computational(site, v)?;
        self.project_computational(site, outcome)
    }

    /// Reduced density matrix on `keep` (in the listed order).
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix> {
        self.check_sites(keep)?;
        let d = self.d as usize;
        let dk = checked_dim(self.d, keep.len(), MAX_DENSITY_DIM)?;
        let dr = self.dim() / dk;
        let rest: Vec<usize> = (0..self.n).filter(|s| !keep.contains(s)).collect();
        let mut m = DMatrix::<Complex64>::zeros(dk, dr);
        for (idx, a) in self.amps.iter().enumerate() {
            let ki = keep.iter().fold(0, |acc, &s| acc * d + self.digit(idx, s));
            let ri = rest.iter().fold(0, |acc, &s| acc * d + self.digit(idx, s));
            m[(ki, ri)] = *a;
        }
        Ok(DensityMatrix { d: self.d, n: keep.len(), mat: &m * m.adjoint() })
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let keep: Vec<usize> = (0..self.n).collect();
        self.reduced_density(&keep)
    }

    /// Debug dump: magic `QSV1`, `d` and `n` as little-endian u32, then
    /// interleaved little-endian f64 re/im pairs.
    pub fn write_qsv1<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(b"QSV1")?;
        w.write_all(&self.d.to_le_bytes())?;
        w.write_all(&(self.n as u32).to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_qsv1<R: Read>(r: &mut R) -> Result<Self> {
        let mut head = [0u8; 12];
        r.read_exact(&mut head)?;
        if &head[..4] != b"QSV1" {
            return Err(Error::Serde("bad QSV1 magic".into()));
        }
        let d = u32::from_le_bytes(head[4..8].try_into().unwrap());
        let n = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
        let dim = checked_dim(d, n, MAX_DIM)?;
        let mut amps = Vec::with_capacity(dim);
        let mut buf = [0u8; 16];
        for _ in 0..dim {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
            amps.push(Complex64::new(re, im));
        }
        Self::from_amplitudes(d, n, amps)
    }
}

pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (j, &p) in probs.iter().enumerate() {
        if u < p {
            return j;
        }
        u -= p;
    }
    // Rounding can leave u just above the last bucket.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    d: u32,
    n: usize,
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn from_matrix(d: u32, n: usize, mat: CMatrix) -> Result<Self> {
        let dim = checked_dim(d, n, MAX_DENSITY_DIM)?;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch(mat.nrows(), dim));
        }
        Ok(DensityMatrix { d, n, mat })
    }

    pub fn maximally_mixed(d: u32, n: usize) -> Result<Self> {
        let dim = checked_dim(d, n, MAX_DENSITY_DIM)?;
        Ok(DensityMatrix { d, n, mat: CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0) })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// Convex combination `Σ wᵢ ρᵢ`.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        let first = &parts.first().ok_or(Error::Parameter("empty mixture".into()))?.1;
        let mut mat = CMatrix::zeros(first.mat.nrows(), first.mat.ncols());
        for (w, r) in parts {
            if r.mat.shape() != mat.shape() {
                return Err(Error::DimensionMismatch(r.mat.nrows(), mat.nrows()));
            }
            mat += &r.mat * Complex64::new(*w, 0.0);
        }
        Ok(DensityMatrix { d: first.d, n: first.n, mat })
    }

    /// Hermitian, unit trace and positive semidefinite within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        let herm = (&self.mat - self.mat.adjoint()).iter().all(|c| c.norm() <= tol);
        let tr = (self.trace() - Complex64::new(1.0, 0.0)).norm() <= tol;
        herm && tr && self.eigenvalues().iter().all(|&e| e >= -tol)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.mat + self.mat.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().collect()
    }

    pub fn apply_unitary(&self, u: &CMatrix) -> Result<Self> {
        if u.shape() != self.mat.shape() {
            return Err(Error::DimensionMismatch(u.nrows(), self.mat.nrows()));
        }
        Ok(DensityMatrix { d: self.d, n: self.n, mat: u * &self.mat * u.adjoint() })
    }

    /// Trace out every site not in `keep`; kept sites stay in the listed order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        for (i, &s) in keep.iter().enumerate() {
            if s >= self.n {
                return Err(Error::SiteOutOfRange { site: s, n: self.n });
            }
            if keep[..i].contains(&s) {
                return Err(Error::RepeatedSite);
            }
        }
        let d = self.d as usize;
        let rest: Vec<usize> = (0..self.n).filter(|s| !keep.contains(s)).collect();
        let dim = self.mat.nrows();
        let digit = |idx: usize, s: usize| (idx / d.pow((self.n - 1 - s) as u32)) % d;
        let split: Vec<(usize, usize)> = (0..dim)
            .map(|idx| {
                let k = keep.iter().fold(0, |acc, &s| acc * d + digit(idx, s));
                let r = rest.iter().fold(0, |acc, &s| acc * d + digit(idx, s));
                (k, r)
            })
            .collect();
        let dk = d.pow(keep.len() as u32);
        let mut out = CMatrix::zeros(dk, dk);
        for i in 0..dim {
            for j in 0..dim {
                if split[i].1 == split[j].1 {
                    out[(split[i].0, split[j].0)] += self.mat[(i, j)];
                }
            }
        }
        Ok(DensityMatrix { d: self.d, n: keep.len(), mat: out })
    }

    fn check_same(&self, o: &DensityMatrix) -> Result<()> {
        if self.mat.shape() != o.mat.shape() {
            return Err(Error::DimensionMismatch(self.mat.nrows(), o.mat.nrows()));
        }
        Ok(())
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, o: &DensityMatrix) -> Result<f64> {
        self.check_same(o)?;
        let diff = DensityMatrix { d: self.d, n: self.n, mat: &self.mat - &o.mat };
        Ok((0.5 * diff.eigenvalues().iter().map(|e| e.abs()).sum::<f64>()).clamp(0.0, 1.0))
    }

    /// Uhlmann fidelity `(tr √(√ρ σ √ρ))²`.
    pub fn fidelity(&self, o: &DensityMatrix) -> Result<f64> {
        self.check_same(o)?;
        let root = hermitian_sqrt(&self.mat);
        let inner = &root * &o.mat * &root;
        let s: f64 = DensityMatrix { d: self.d, n: self.n, mat: inner }.eigenvalues().iter().map(|e| e.max(0.0).sqrt()).sum();
        Ok((s * s).clamp(0.0, 1.0))
    }
}

fn hermitian_sqrt(m: &CMatrix) -> CMatrix {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let vals = eig.eigenvalues.map(|e| Complex64::new(e.max(0.0).sqrt(), 0.0));
    &eig.eigenvectors * CMatrix::from_diagonal(&vals) * eig.eigenvectors.adjoint()
}

/// Trace distance between two equally sized pure states.
pub fn pure_trace_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    // sqrt(1-c^2) = |a - e^{iφ}b| sqrt((1+c)/2) with φ = arg⟨b|a⟩, no cancellation near c = 1.
    let ip = b.inner(a)?;
    let c = ip.norm();
    let phase = if c > 0.0 { ip / c } else { Complex64::new(1.0, 0.0) };
    let diff: f64 = a.amps.iter().zip(&b.amps).map(|(x, y)| (x - phase * y).norm_sqr()).sum();
    Ok((diff.sqrt() * ((1.0 + c.min(1.0)) / 2.0).sqrt()).min(1.0))
}
