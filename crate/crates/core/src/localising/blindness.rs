//! Prover-view comparison between two computations on one skeleton.
//!
//! For a fixed string of reported outcomes the `δ` messages are a function of
//! the secrets, so the prover's view is block diagonal in `δ`: each block is
//! the (unnormalized) average of the prepared product states that produce it.

use super::{delta_message, descriptor_state, prepare_vertex, VerifierSecrets};
use crate::error::{Error, Result};
use crate::graphs::TrapAssignment;
use crate::mbqc::{MeasurementPattern, Role};
use crate::qudit::{kron_all, AngleVector, CMatrix};
use crate::statevector::DensityMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Secret spaces beyond this are refused by the exhaustive mode.
pub const MAX_SECRETS: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlindnessReport {
    /// Largest trace distance over the reported outcome strings.
    pub distance: f64,
    pub outcome_strings: usize,
    pub secrets_enumerated: usize,
}

type View = BTreeMap<Vec<(u32, u32, u32)>, CMatrix>;

fn check_skeletons(a: &MeasurementPattern, b: &MeasurementPattern) -> Result<()> {
    if a.d() != b.d() {
        return Err(Error::SkeletonMismatch(format!("d = {} vs {}", a.d(), b.d())));
    }
    if a.graph() != b.graph() {
        return Err(Error::SkeletonMismatch("graphs differ".into()));
    }
    if a.order() != b.order() {
        return Err(Error::SkeletonMismatch("measurement orders differ".into()));
    }
    if a.roles() != b.roles() {
        return Err(Error::SkeletonMismatch("vertex roles differ".into()));
    }
    Ok(())
}

fn secret_count(p: &MeasurementPattern) -> usize {
    let d = p.d() as usize;
    let space = AngleVector::space_size(p.d());
    p.roles()
        .iter()
        .map(|r| match r {
            Role::Output => d,
            Role::Dummy => space * d * d,
            _ => space * d,
        })
        .product()
}

fn secrets_at(p: &MeasurementPattern, mut idx: usize) -> VerifierSecrets {
    let d = p.d();
    let space = AngleVector::space_size(d);
    let n = p.graph().n_vertices();
    let mut s = VerifierSecrets {
        assignment: TrapAssignment { trap: vec![], computation: vec![] },
        theta: vec![AngleVector::zero(d); n],
        r: vec![0; n],
        dummies: vec![0; n],
    };
    for v in 0..n {
        s.r[v] = (idx % d as usize) as u32;
        idx /= d as usize;
        if p.role(v) != Role::Output {
            s.theta[v] = AngleVector::from_index(d, idx % space);
            idx /= space;
        }
        if p.role(v) == Role::Dummy {
            s.dummies[v] = (idx % d as usize) as u32;
            idx /= d as usize;
        }
    }
    s
}

fn view(p: &MeasurementPattern, b: &[u32]) -> Result<View> {
    let d = p.d();
    let n = p.graph().n_vertices();
    let total = secret_count(p);
    let w = Complex64::new(1.0 / total as f64, 0.0);
    let mut out = View::new();
    for idx in 0..total {
        let s = secrets_at(p, idx);
        let mut signals = vec![None; n];
        let mut key = Vec::new();
        for (k, &v) in p.order().iter().enumerate() {
            key.push(delta_message(v, p, &s, &signals)?.coeffs());
            if matches!(p.role(v), Role::Computation | Role::Trap) {
                signals[v] = Some(super::record_outcome(b[k], s.r[v], d));
            }
        }
        let mats = (0..n)
            .map(|v| descriptor_state(&prepare_vertex(p, v, &s), d).and_then(|st| st.to_density()).map(|r| r.matrix().clone()))
            .collect::<Result<Vec<_>>>()?;
        let rho = kron_all(&mats) * w;
        let dim = rho.nrows();
        *out.entry(key).or_insert_with(|| CMatrix::zeros(dim, dim)) += rho;
    }
    Ok(out)
}

fn trace_norm(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().map(|e| e.abs()).sum()
}

pub(super) fn view_distance(a: &View, b: &View) -> f64 {
    let mut keys: Vec<&Vec<(u32, u32, u32)>> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut total = 0.0;
    for k in keys {
        total += match (a.get(k), b.get(k)) {
            (Some(x), Some(y)) => trace_norm(&(x - y)),
            (Some(x), None) | (None, Some(x)) => trace_norm(x),
            (None, None) => 0.0,
        };
    }
    0.5 * total
}

/// View with every secret fixed to zero, so `δ` is the bare angle.
#[cfg(test)]
pub(super) fn leaky_view(p: &MeasurementPattern) -> Result<View> {
    let d = p.d();
    let n = p.graph().n_vertices();
    let s = secrets_at(p, 0);
    let signals = vec![Some(0); n];
    let key = p.order().iter().map(|&v| delta_message(v, p, &s, &signals).map(|x| x.coeffs())).collect::<Result<Vec<_>>>()?;
    let mats = (0..n)
        .map(|v| descriptor_state(&prepare_vertex(p, v, &s), d).and_then(|st| st.to_density()).map(|r| r.matrix().clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(View::from([(key, kron_all(&mats))]))
}

/// Exhaustive prover-view trace distance between two patterns that share a
/// graph, order and roles but may differ in their angles.
pub fn blindness_check(a: &MeasurementPattern, b: &MeasurementPattern) -> Result<BlindnessReport> {
    check_skeletons(a, b)?;
    let total = secret_count(a);
    if total > MAX_SECRETS {
        return Err(Error::Parameter(format!("{total} secret values exceed {MAX_SECRETS}")));
    }
    let d = a.d();
    let rounds = a.order().len();
    let strings = (d as usize).pow(rounds as u32);
    let mut worst = 0.0f64;
    for idx in 0..strings {
        let mut k = idx;
        let bs: Vec<u32> = (0..rounds)
            .map(|_| {
                let x = (k % d as usize) as u32;
                k /= d as usize;
                x
            })
            .collect();
        worst = worst.max(view_distance(&view(a, &bs)?, &view(b, &bs)?));
    }
    Ok(BlindnessReport { distance: worst, outcome_strings: strings, secrets_enumerated: total })
}

/// Single-vertex pad argument: for every adapted angle `φ′` the joint
/// distribution of `δ` and the prepared state is `uniform ⊗ I/d`. Returns the
/// largest trace distance from that product over all `φ′`.
pub fn blindness_per_vertex(d: u32) -> Result<f64> {
    crate::qudit::check_prime(d)?;
    let space = AngleVector::space_size(d);
    let n_secrets = (space * d as usize) as f64;
    let mut worst = 0.0f64;
    for phi in AngleVector::all(d) {
        let mut blocks: BTreeMap<usize, CMatrix> = BTreeMap::new();
        for theta in AngleVector::all(d) {
            for r in 0..d {
                let delta = phi.compose(&theta)?.compose(&AngleVector::z_power(d, r))?;
                let st = crate::statevector::StateVector::rotated_plus(&theta).to_density()?;
                let m = st.matrix() * Complex64::new(1.0 / n_secrets, 0.0);
                *blocks.entry(delta.index()).or_insert_with(|| CMatrix::zeros(d as usize, d as usize)) += m;
            }
        }
        let target = DensityMatrix::maximally_mixed(d, 1)?.matrix() * Complex64::new(1.0 / space as f64, 0.0);
        let mut dist = 0.0;
        for k in 0..space {
            dist += match blocks.get(&k) {
                Some(m) => trace_norm(&(m - &target)),
                None => trace_norm(&target),
            };
        }
        worst = worst.max(0.5 * dist);
    }
    Ok(worst)
}
