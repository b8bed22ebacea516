//! Pauli twirling, propagation of Pauli attacks through an honest execution,
//! and the trap detection bounds.

use crate::error::{Error, Result};
use crate::graphs::{draw_assignment, TrapifiedGraph, VertexKind, TRIPLE};
use crate::localising::ProverStrategy;
use crate::mbqc::{MeasurementPattern, Role};
use crate::qudit::{md, CMatrix, PauliOp};
use crate::statevector::DensityMatrix;
use crate::stats::binomial_sigma;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// `Σ_P P†QP ρ P†Q′†P` over the full Pauli group of `ρ`'s register
/// (phases dropped), returning the largest entry modulus. For qubits this is
/// the usual `Σ PQP ρ PQ′P`.
pub fn twirl_sum(q: &PauliOp, q2: &PauliOp, rho: &DensityMatrix) -> Result<f64> {
    let d = rho.d();
    let n = rho.n_sites();
    if q.d() != d || q2.d() != d {
        return Err(Error::ModulusMismatch(d, if q.d() != d { q.d() } else { q2.d() }));
    }
    if q.n_sites() != n || q2.n_sites() != n {
        return Err(Error::SiteMismatch(q.n_sites().max(q2.n_sites()), n));
    }
    let (qm, q2m) = (q.matrix(), q2.matrix().adjoint());
    let dim = rho.matrix().nrows();
    let mut acc = CMatrix::zeros(dim, dim);
    let total = (d as usize).pow(2 * n as u32);
    for idx in 0..total {
        let mut k = idx;
        let mut x = vec![0; n];
        let mut z = vec![0; n];
        for s in 0..n {
            x[s] = (k % d as usize) as u32;
            k /= d as usize;
            z[s] = (k % d as usize) as u32;
            k /= d as usize;
        }
        let p = PauliOp::from_xz(d, &x, &z).matrix();
        let pd = p.adjoint();
        acc += &pd * &qm * &p * rho.matrix() * &pd * &q2m * &p;
    }
    Ok(acc.iter().map(|c| c.norm()).fold(0.0, f64::max))
}

/// Per-vertex attack `X^x Z^z` over `F_d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliFrame {
    d: u32,
    attacks: Vec<(u32, u32)>,
}

impl PauliFrame {
    pub fn new(d: u32, n: usize) -> Self {
        PauliFrame { d, attacks: vec![(0, 0); n] }
    }

    pub fn from_strategy(d: u32, n: usize, s: &ProverStrategy) -> Result<Self> {
        if !s.is_pauli() {
            return Err(Error::MalformedStrategy("not a Pauli strategy".into()));
        }
        Ok(PauliFrame { d, attacks: s.pauli_table(n, d)? })
    }

    pub fn to_strategy(&self) -> ProverStrategy {
        let attacks = self
            .attacks
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != (0, 0))
            .map(|(vertex, &(x, z))| crate::localising::PauliAttack { vertex, x, z })
            .collect();
        ProverStrategy::PauliAttack { attacks }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n_sites(&self) -> usize {
        self.attacks.len()
    }

    pub fn set(&mut self, v: usize, x: u32, z: u32) -> Result<()> {
        if v >= self.attacks.len() {
            return Err(Error::SiteOutOfRange { site: v, n: self.attacks.len() });
        }
        self.attacks[v] = (x % self.d, z % self.d);
        Ok(())
    }

    pub fn get(&self, v: usize) -> (u32, u32) {
        self.attacks[v]
    }

    pub fn is_empty(&self) -> bool {
        self.attacks.iter().all(|a| *a == (0, 0))
    }

    /// `w_γ`: primaries of triple `γ` with a non-zero X exponent (X- or Y-like).
    pub fn triple_weights(&self, g: &TrapifiedGraph) -> Result<Vec<usize>> {
        self.check(g)?;
        Ok(g.partition().iter().map(|s| s.iter().filter(|&&v| self.attacks[v].0 != 0).count()).collect())
    }

    /// Total footprint over the trapified region.
    pub fn footprint(&self, g: &TrapifiedGraph) -> Result<usize> {
        Ok(self.triple_weights(g)?.iter().sum())
    }

    /// Sites outside the trapified region (the gadgets and subdivision
    /// vertices) that carry a non-trivial attack.
    pub fn untrapped_sites(&self, g: &TrapifiedGraph) -> Vec<usize> {
        (0..self.attacks.len().min(g.n_vertices()))
            .filter(|&v| self.attacks[v] != (0, 0) && !matches!(g.kind(v), VertexKind::Primary { .. }))
            .collect()
    }

    fn check(&self, g: &TrapifiedGraph) -> Result<()> {
        if self.attacks.len() != g.n_vertices() {
            return Err(Error::DimensionMismatch(self.attacks.len(), g.n_vertices()));
        }
        Ok(())
    }
}

/// Frame prediction for one execution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameOutcome {
    /// Deviation of every measured signal from its honest value.
    pub shifts: Vec<u32>,
    pub trap_flips: Vec<usize>,
    /// `𝓔` on `O′`: the decoded output is `E|ψ⟩` up to phase.
    pub residual: PauliOp,
}

impl FrameOutcome {
    pub fn accepts(&self) -> bool {
        self.trap_flips.is_empty()
    }
}

/// Push the attack through the pattern. A measured vertex carrying the
/// accumulated error `X^{e_x} Z^{e_z}` and the attack `X^{a}` reports
/// `a − e_z + t` off its honest signal, where `t` comes from conjugating its
/// angle by `X^{e_x}`; the wrong signal then leaves `X^{shift}` on `f(v)` and
/// `Z^{shift}` on the rest of `N(f(v))`.
pub fn propagate_frame(p: &MeasurementPattern, frame: &PauliFrame) -> Result<FrameOutcome> {
    let d = p.d();
    let n = p.graph().n_vertices();
    if frame.d != d {
        return Err(Error::ModulusMismatch(d, frame.d));
    }
    if frame.n_sites() != n {
        return Err(Error::DimensionMismatch(frame.n_sites(), n));
    }
    let active = |v: usize| matches!(p.role(v), Role::Computation | Role::Output);
    let mut err = vec![(0u32, 0u32); n];
    let mut shifts = vec![0u32; n];
    let mut trap_flips = Vec::new();
    for &v in p.order() {
        let (ax, _) = frame.attacks[v];
        match p.role(v) {
            Role::Computation => {
                let (ex, ez) = err[v];
                let t = if ex == 0 {
                    0
                } else {
                    p.angle(v).x_conjugation_z_shift(ex).ok_or(Error::NotClifford(format!("angle at vertex {v}")))?
                };
                let shift = md(ax as i64 - ez as i64 + t as i64, d);
                shifts[v] = shift;
                if shift != 0 {
                    let fv = p.flow().f[v].ok_or(Error::FlowUndefined(v))?;
                    err[fv].0 = (err[fv].0 + shift) % d;
                    for &y in p.graph().neighbors(fv) {
                        if y != v && active(y) {
                            err[y].1 = (err[y].1 + shift) % d;
                        }
                    }
                }
            }
            Role::Trap => {
                shifts[v] = md(ax as i64 - err[v].1 as i64, d);
                if shifts[v] != 0 {
                    trap_flips.push(v);
                }
            }
            _ => {}
        }
    }
    let outs = p.graph().outputs();
    let x: Vec<u32> = outs.iter().map(|&o| (err[o].0 + frame.attacks[o].0) % d).collect();
    let z: Vec<u32> = outs.iter().map(|&o| (err[o].1 + frame.attacks[o].1) % d).collect();
    Ok(FrameOutcome { shifts, trap_flips, residual: PauliOp::from_xz(d, &x, &z) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DetectMode {
    Exact,
    MonteCarlo { samples: usize },
}

pub const EXACT_LIMIT: u128 = 1_000_000;

/// Trap detection statistics of one frame over the verifier's placements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub mode: DetectMode,
    pub c_prime: f64,
    pub d1: usize,
    pub footprint: usize,
    pub w_table: Vec<usize>,
    /// `Pr[all traps silent]`.
    pub p_silent: f64,
    /// `Pr[silent ∧ footprint ≥ d₁]`.
    pub p_bad: f64,
    /// `Pr[silent ∧ at least d₁ computation primaries hit]`.
    pub p_bad_refined: f64,
    /// Standard error of `p_bad` (0 in exact mode).
    pub sigma: f64,
    /// `Π_γ (1 − w_γ c′)`.
    pub analytic_silent: f64,
    /// `(1 − c′)^{Σ w}`.
    pub bound: f64,
    /// `(1 − c′)^{d₁}`.
    pub bound_d1: f64,
}

impl DetectionReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn csv_header() -> &'static str {
        "mode,samples,c_prime,d1,footprint,w_table,p_silent,p_bad,p_bad_refined,sigma,analytic_silent,bound,bound_d1"
    }

    pub fn to_csv_row(&self) -> String {
        let (mode, samples) = match self.mode {
            DetectMode::Exact => ("exact", 0),
            DetectMode::MonteCarlo { samples } => ("mc", samples),
        };
        let w: Vec<String> = self.w_table.iter().map(|w| w.to_string()).collect();
        format!(
            "{mode},{samples},{},{},{},{},{},{},{},{},{},{},{}",
            self.c_prime,
            self.d1,
            self.footprint,
            w.join(";"),
            self.p_silent,
            self.p_bad,
            self.p_bad_refined,
            self.sigma,
            self.analytic_silent,
            self.bound,
            self.bound_d1
        )
    }

    /// `p_bad ≤ bound + k·σ`.
    pub fn dominated(&self, k: f64) -> bool {
        self.p_bad <= self.bound_d1.max(self.bound.min(1.0)) + k * self.sigma + 1e-12
    }
}

/// Accept-and-corrupt probabilities of `frame`. Exact mode enumerates the
/// `(|S|·(|S|−1))^{m′}` placements and falls back to sampling above
/// [`EXACT_LIMIT`].
pub fn accept_and_corrupt<R: Rng + ?Sized>(
    frame: &PauliFrame,
    g: &TrapifiedGraph,
    d1: usize,
    mode: DetectMode,
    rng: &mut R,
) -> Result<DetectionReport> {
    let w_table = frame.triple_weights(g)?;
    let footprint: usize = w_table.iter().sum();
    let m = g.partition().len();
    let c_prime = 1.0 / TRIPLE as f64;
    let per = (TRIPLE * (TRIPLE - 1)) as u128;
    let hit = |v: usize| frame.attacks[v].0 != 0;
    let mode = match mode {
        DetectMode::Exact if per.checked_pow(m as u32).map_or(true, |c| c > EXACT_LIMIT) => {
            DetectMode::MonteCarlo { samples: 100_000 }
        }
        other => other,
    };
    let pairs: Vec<(usize, usize)> =
        (0..TRIPLE).flat_map(|t| (0..TRIPLE).filter(move |&c| c != t).map(move |c| (t, c))).collect();
    let (mut silent, mut bad, mut refined, total) = (0u64, 0u64, 0u64, match mode {
        DetectMode::Exact => per.pow(m as u32) as u64,
        DetectMode::MonteCarlo { samples } => samples as u64,
    });
    if total == 0 {
        return Err(Error::InsufficientSamples("no samples requested".into()));
    }
    let mut tally = |trap: &[usize], comp: &[usize]| {
        let quiet = (0..m).all(|gm| !hit(g.partition()[gm][trap[gm]]));
        if quiet {
            silent += 1;
            if footprint >= d1 {
                bad += 1;
            }
            if (0..m).filter(|&gm| hit(g.partition()[gm][comp[gm]])).count() >= d1 {
                refined += 1;
            }
        }
    };
    match mode {
        DetectMode::Exact => {
            let mut trap = vec![0; m];
            let mut comp = vec![0; m];
            for idx in 0..total {
                let mut k = idx as usize;
                for gm in 0..m {
                    let (t, c) = pairs[k % pairs.len()];
                    k /= pairs.len();
                    trap[gm] = t;
                    comp[gm] = c;
                }
                tally(&trap, &comp);
            }
        }
        DetectMode::MonteCarlo { samples } => {
            for _ in 0..samples {
                let a = draw_assignment(g, rng)?;
                tally(&a.trap, &a.computation);
            }
        }
    }
    let n = total as f64;
    let p_bad = bad as f64 / n;
    let sigma = match mode {
        DetectMode::Exact => 0.0,
        DetectMode::MonteCarlo { samples } => binomial_sigma(p_bad, samples),
    };
    Ok(DetectionReport {
        mode,
        c_prime,
        d1,
        footprint,
        analytic_silent: w_table.iter().map(|&w| 1.0 - w as f64 * c_prime).product(),
        w_table,
        p_silent: silent as f64 / n,
        p_bad,
        p_bad_refined: refined as f64 / n,
        sigma,
        bound: (1.0 - c_prime).powi(footprint as i32),
        bound_d1: (1.0 - c_prime).powi(d1 as i32),
    })
}

/// Security budget of the hybrid protocol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonBudget {
    pub eps1: f64,
    pub eps2: f64,
    pub eps: f64,
    /// `c = (1 − c′)^{−1/2}`, so that `ε₁ = 1/c^{d₁}`.
    pub c: f64,
    /// `1/c^{d₁}`, printed next to `ε₁` for comparison.
    pub eps1_inverse_power: f64,
}

pub fn epsilon_budget(d1: u32, d2: u32, c_prime: f64) -> Result<EpsilonBudget> {
    if d2 < 1 {
        return Err(Error::Parameter("d₂ must be at least 1".into()));
    }
    if !(c_prime > 0.0 && c_prime < 1.0) {
        return Err(Error::Parameter(format!("c′ = {c_prime} is outside (0, 1)")));
    }
    let eps1 = (1.0 - c_prime).powi(d1 as i32).sqrt();
    let eps2 = 0.5f64.powi(d2 as i32);
    let c = (1.0 - c_prime).powf(-0.5);
    Ok(EpsilonBudget { eps1, eps2, eps: eps1 + eps2, c, eps1_inverse_power: c.powi(-(d1 as i32)) })
}

/// `|0…0⟩⟨0…0|`, a common twirl test input.
pub fn zero_density(d: u32, n: usize) -> Result<DensityMatrix> {
    let dim = (d as usize).pow(n as u32);
    let mut m = CMatrix::zeros(dim, dim);
    m[(0, 0)] = Complex64::new(1.0, 0.0);
    DensityMatrix::from_matrix(d, n, m)
}
