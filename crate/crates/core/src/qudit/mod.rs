//! Arithmetic over `F_d`, the generalized Pauli group, the qudit gate set and
//! diagonal phase-polynomial rotations.

mod angle;
mod gates;
mod pauli;

pub use angle::{adapt_angle_under_pauli, AngleVector};
pub use gates::{clifford_conjugate, conjugate_circuit, gate_matrix, Gate, GateKind};
pub use pauli::{pauli_mul, PauliOp};

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Dense complex matrix used for gate and density-matrix oracles.
pub type CMatrix = DMatrix<Complex64>;

/// Trial-division primality test; moduli here are tiny.
pub fn is_prime(d: u32) -> bool {
    if d < 2 {
        return false;
    }
    let mut k = 2u32;
    while k * k <= d {
        if d % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

pub fn check_prime(d: u32) -> Result<()> {
    if is_prime(d) {
        Ok(())
    } else {
        Err(Error::NotPrime(d))
    }
}

/// Reduce a signed integer into `[0, m)`.
#[inline]
pub fn md(x: i64, m: u32) -> u32 {
    x.rem_euclid(m as i64) as u32
}

/// Modular inverse for prime `p`; `a` must be non-zero mod `p`.
pub fn inv_mod(a: u32, p: u32) -> u32 {
    let a = a % p;
    assert!(a != 0, "zero has no inverse mod {p}");
    pow_mod(a, p - 2, p)
}

pub fn pow_mod(b: u32, mut e: u32, m: u32) -> u32 {
    let mut acc: u64 = 1 % m as u64;
    let mut base = (b % m) as u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m as u64;
        }
        base = base * base % m as u64;
        e >>= 1;
    }
    acc as u32
}

/// `exp(2πi · num / den)`.
#[inline]
pub fn root_of_unity(num: i64, den: u32) -> Complex64 {
    let t = (num.rem_euclid(den as i64)) as f64 / den as f64;
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t)
}

/// An element of `F_d` together with its (prime) modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dit {
    value: u32,
    modulus: u32,
}

impl Dit {
    pub fn new(value: i64, modulus: u32) -> Result<Self> {
        check_prime(modulus)?;
        Ok(Dit { value: md(value, modulus), modulus })
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    pub fn add(self, other: Dit) -> Result<Dit> {
        self.same(other)?;
        Ok(Dit { value: (self.value + other.value) % self.modulus, modulus: self.modulus })
    }

    pub fn sub(self, other: Dit) -> Result<Dit> {
        self.same(other)?;
        Ok(Dit { value: (self.value + self.modulus - other.value) % self.modulus, modulus: self.modulus })
    }

    pub fn mul(self, other: Dit) -> Result<Dit> {
        self.same(other)?;
        Ok(Dit {
            value: ((self.value as u64 * other.value as u64) % self.modulus as u64) as u32,
            modulus: self.modulus,
        })
    }

    pub fn neg(self) -> Dit {
        Dit { value: (self.modulus - self.value) % self.modulus, modulus: self.modulus }
    }

    pub fn inv(self) -> Option<Dit> {
        if self.value == 0 {
            None
        } else {
            Some(Dit { value: inv_mod(self.value, self.modulus), modulus: self.modulus })
        }
    }

    fn same(self, other: Dit) -> Result<()> {
        if self.modulus != other.modulus {
            Err(Error::ModulusMismatch(self.modulus, other.modulus))
        } else {
            Ok(())
        }
    }
}

/// Kronecker product of two square matrices in site order (`a` is the more
/// significant site).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all(ms: &[CMatrix]) -> CMatrix {
    let mut acc = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for m in ms {
        acc = kron(&acc, m);
    }
    acc
}

/// Largest deviation of `U†U` from the identity.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let p = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Max-abs entrywise distance between two matrices after removing a global
/// phase from `b` (aligned on the largest entry of `a`).
pub fn distance_up_to_phase(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let (mut bi, mut bj, mut best) = (0, 0, -1.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if a[(i, j)].norm() > best {
                best = a[(i, j)].norm();
                bi = i;
                bj = j;
            }
        }
    }
    let phase = if b[(bi, bj)].norm() > 1e-12 {
        a[(bi, bj)] / b[(bi, bj)] * (b[(bi, bj)].norm() / a[(bi, bj)].norm())
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - b[(i, j)] * phase).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
