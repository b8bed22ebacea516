use super::{check_prime, md, root_of_unity, CMatrix};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Coefficients `(a, b, c)` of the diagonal rotation
/// `|k⟩ ↦ ω_d^{c·k³ + b·k(k+1)/2 + a·k} |k⟩`, i.e. `T^c S^b Z^a`.
///
/// * `d = 3`: `c` lives mod 9 and the cubic term is `ω_9^{c·k³}`.
/// * `d = 2`: the vector collapses to one angle `a·π/4` (`a` mod 8) and
///   `b = c = 0`; the rotation is `diag(1, e^{i a π/4})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AngleVector {
    d: u32,
    a: u32,
    b: u32,
    c: u32,
}

fn moduli(d: u32) -> (u32, u32, u32) {
    match d {
        2 => (8, 1, 1),
        3 => (3, 3, 9),
        _ => (d, d, d),
    }
}

impl AngleVector {
    /// For `d = 2` the inputs are folded as `a + 2b + c` (units of `π/4`), so
    /// `b` acts like the qubit `S` and `c` like the qubit `T`.
    pub fn new(d: u32, a: i64, b: i64, c: i64) -> Result<Self> {
        check_prime(d)?;
        Ok(Self::new_unchecked(d, a, b, c))
    }

    pub(crate) fn new_unchecked(d: u32, a: i64, b: i64, c: i64) -> Self {
        let (ma, mb, mc) = moduli(d);
        if d == 2 {
            AngleVector { d, a: md(a + 2 * b + c, 8), b: 0, c: 0 }
        } else {
            AngleVector { d, a: md(a, ma), b: md(b, mb), c: md(c, mc) }
        }
    }

    pub fn zero(d: u32) -> Self {
        AngleVector { d, a: 0, b: 0, c: 0 }
    }

    /// Qubit angle `k·π/4`.
    pub fn qubit(k: i64) -> Self {
        AngleVector { d: 2, a: md(k, 8), b: 0, c: 0 }
    }

    /// The rotation `Z^r`: `(r, 0, 0)` for odd `d`, angle `r·π` for qubits.
    pub fn z_power(d: u32, r: u32) -> Self {
        if d == 2 {
            Self::qubit(4 * r as i64)
        } else {
            Self::new_unchecked(d, r as i64, 0, 0)
        }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn coeffs(&self) -> (u32, u32, u32) {
        (self.a, self.b, self.c)
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0 && self.c == 0
    }

    /// Sizes of the coefficient ranges, i.e. the full vector space.
    pub fn moduli(d: u32) -> (u32, u32, u32) {
        moduli(d)
    }

    /// Every vector of the space, in lexicographic `(a, b, c)` order.
    pub fn all(d: u32) -> Vec<AngleVector> {
        let (ma, mb, mc) = moduli(d);
        let mut out = Vec::with_capacity((ma * mb * mc) as usize);
        for a in 0..ma {
            for b in 0..mb {
                for c in 0..mc {
                    out.push(AngleVector { d, a, b, c });
                }
            }
        }
        out
    }

    /// Dense index in `0..|space|` matching the order of [`AngleVector::all`].
    pub fn index(&self) -> usize {
        let (_, mb, mc) = moduli(self.d);
        ((self.a * mb + self.b) * mc + self.c) as usize
    }

    pub fn from_index(d: u32, idx: usize) -> Self {
        let (_, mb, mc) = moduli(d);
        let idx = idx as u32;
        AngleVector { d, a: idx / (mb * mc), b: (idx / mc) % mb, c: idx % mc }
    }

    pub fn space_size(d: u32) -> usize {
        let (ma, mb, mc) = moduli(d);
        (ma * mb * mc) as usize
    }

    /// Componentwise sum; the rotations multiply.
    pub fn compose(&self, other: &AngleVector) -> Result<AngleVector> {
        if self.d != other.d {
            return Err(Error::ModulusMismatch(self.d, other.d));
        }
        Ok(self.add(other))
    }

    pub(crate) fn add(&self, o: &AngleVector) -> AngleVector {
        let (ma, mb, mc) = moduli(self.d);
        AngleVector {
            d: self.d,
            a: (self.a + o.a) % ma,
            b: (self.b + o.b) % mb,
            c: (self.c + o.c) % mc,
        }
    }

    pub fn neg(&self) -> AngleVector {
        let (ma, mb, mc) = moduli(self.d);
        AngleVector { d: self.d, a: (ma - self.a) % ma, b: (mb - self.b) % mb, c: (mc - self.c) % mc }
    }

    pub fn sub(&self, o: &AngleVector) -> AngleVector {
        self.add(&o.neg())
    }

    /// Phase of the `k`-th diagonal entry as `(numerator, denominator)` of a
    /// fraction of a full turn.
    pub fn phase_turns(&self, k: u32) -> (i64, u32) {
        let (a, b, c, k) = (self.a as i64, self.b as i64, self.c as i64, k as i64);
        let t2 = k * (k + 1) / 2;
        match self.d {
            2 => (a * k, 8),
            3 => (c * k * k * k + 3 * (b * t2 + a * k), 9),
            d => (c * k * k * k + b * t2 + a * k, d),
        }
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.d)
            .map(|k| {
                let (num, den) = self.phase_turns(k);
                root_of_unity(num, den)
            })
            .collect()
    }

    pub fn rotation_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.diagonal()))
    }

    /// `v'` with `Rot(v') ∝ X^{-s} Rot(v) X^{s}`: the phase polynomial evaluated
    /// at `k + s`, re-expanded in the `(k, k(k+1)/2, k³)` basis.
    pub fn shift(&self, s: u32) -> AngleVector {
        let d = self.d;
        let s = (s % d) as i64;
        let (a, b, c) = (self.a as i64, self.b as i64, self.c as i64);
        match d {
            2 => {
                if s == 1 {
                    self.neg()
                } else {
                    *self
                }
            }
            3 => {
                // c(k+s)^3 in ω_9 units; 3c·s·k² and 3c·s²·k drop to ω_3.
                let cm = c % 3;
                let na = a + b * s + cm * s * s - cm * s;
                let nb = b + 2 * cm * s;
                Self::new_unchecked(3, na, nb, c)
            }
            _ => {
                // (k+s)^3 = k^3 + 3s k^2 + 3s^2 k + s^3 and k^2 = 2·k(k+1)/2 − k.
                let na = a + b * s + 3 * c * s * s - 3 * c * s;
                let nb = b + 6 * c * s;
                Self::new_unchecked(d, na, nb, c)
            }
        }
    }

    /// `Rot(v') ∝ Z^{-z} X^{-x} Rot(v) X^{x}`. Measuring a state carrying the
    /// byproduct `X^{-x} Z^{-z}` with `v'` reproduces measuring the clean state
    /// with `v` under the same outcome labels. For qubits this is
    /// `(−1)^x α + zπ`.
    pub fn adapt(&self, x_shift: u32, z_shift: u32) -> AngleVector {
        let shifted = self.shift(x_shift);
        shifted.sub(&AngleVector::z_power(self.d, z_shift % self.d))
    }

    /// Whether the rotation lies in the Clifford group (no cubic component;
    /// for qubits a multiple of `π/2`).
    pub fn is_clifford(&self) -> bool {
        if self.d == 2 {
            self.a % 2 == 0
        } else {
            self.c == 0
        }
    }

    /// For Clifford vectors, the `t` with `X^{-x} Rot(v) X^{x} ∝ Z^{t} Rot(v)`.
    pub fn x_conjugation_z_shift(&self, x: u32) -> Option<u32> {
        if !self.is_clifford() {
            return None;
        }
        let d = self.d;
        let x = x % d;
        Some(if d == 2 { ((self.a / 2) * x) % 2 } else { (self.b * x) % d })
    }
}

/// Free-function form of [`AngleVector::adapt`].
pub fn adapt_angle_under_pauli(v: &AngleVector, x_shift: u32, z_shift: u32) -> AngleVector {
    v.adapt(x_shift, z_shift)
}
