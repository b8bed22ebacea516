//! Lazily entangled graph-state register.
//!
//! All `cZ` gates commute, so an edge only has to be applied before the first
//! non-diagonal operation on one of its endpoints. Vertices enter the dense
//! register when a neighbor is materialized and leave it when measured, which
//! keeps the live width near the graph's pathwidth instead of its size.

use crate::error::{Error, Result};
use crate::qudit::{AngleVector, CMatrix, Gate, GateKind, PauliOp};
use crate::statevector::{DensityMatrix, StateVector};
use rand::Rng;
use std::collections::HashSet;

#[derive(Clone, Debug)]
pub struct GraphRegister {
    d: u32,
    adj: Vec<Vec<usize>>,
    pending: Vec<Option<StateVector>>,
    site: Vec<Option<usize>>,
    gone: Vec<bool>,
    applied: HashSet<(usize, usize)>,
    state: StateVector,
    peak: usize,
}

impl GraphRegister {
    /// `init[v]` is the single-site state vertex `v` is prepared in.
    pub fn new(d: u32, adj: Vec<Vec<usize>>, init: Vec<StateVector>) -> Result<Self> {
        if adj.len() != init.len() {
            return Err(Error::DimensionMismatch(adj.len(), init.len()));
        }
        for st in &init {
            if st.n_sites() != 1 || st.d() != d {
                return Err(Error::DimensionMismatch(st.n_sites(), 1));
            }
        }
        let n = adj.len();
        Ok(GraphRegister {
            d,
            adj,
            pending: init.into_iter().map(Some).collect(),
            site: vec![None; n],
            gone: vec![false; n],
            applied: HashSet::new(),
            state: StateVector::zero(d, 0)?,
            peak: 0,
        })
    }

    /// Replace the pending states of `vertices` by a joint state and bring them live.
    pub fn load_joint(&mut self, vertices: &[usize], st: &StateVector) -> Result<()> {
        if st.n_sites() != vertices.len() {
            return Err(Error::SiteMismatch(st.n_sites(), vertices.len()));
        }
        for &v in vertices {
            if v >= self.pending.len() || self.pending[v].is_none() {
                return Err(Error::Parameter(format!("vertex {v} is not pending")));
            }
        }
        let base = self.state.n_sites();
        self.state.append(st)?;
        for (k, &v) in vertices.iter().enumerate() {
            self.pending[v] = None;
            self.site[v] = Some(base + k);
        }
        self.peak = self.peak.max(self.state.n_sites());
        Ok(())
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n_slots(&self) -> usize {
        self.site.len()
    }

    pub fn is_gone(&self, slot: usize) -> bool {
        self.gone[slot]
    }

    /// Largest number of simultaneously live sites so far.
    pub fn peak_sites(&self) -> usize {
        self.peak
    }

    pub fn live_sites(&self) -> usize {
        self.state.n_sites()
    }

    /// Extra slot outside the graph (prover ancillas). Returns its slot id.
    pub fn add_ancilla(&mut self, st: StateVector) -> Result<usize> {
        let slot = self.site.len();
        self.adj.push(Vec::new());
        self.pending.push(None);
        self.site.push(Some(self.state.n_sites()));
        self.gone.push(false);
        self.state.append(&st)?;
        self.peak = self.peak.max(self.state.n_sites());
        Ok(slot)
    }

    fn bring_live(&mut self, slot: usize) -> Result<usize> {
        if self.gone[slot] {
            return Err(Error::Parameter(format!("slot {slot} was already measured")));
        }
        if let Some(s) = self.site[slot] {
            return Ok(s);
        }
        let st = self.pending[slot].take().expect("pending state of an unprepared slot");
        let s = self.state.n_sites();
        self.state.append(&st)?;
        self.site[slot] = Some(s);
        self.peak = self.peak.max(self.state.n_sites());
        Ok(s)
    }

    /// Apply every not-yet-applied edge at `v`.
    pub fn materialize(&mut self, v: usize) -> Result<()> {
        self.bring_live(v)?;
        for w in self.adj[v].clone() {
            let key = (v.min(w), v.max(w));
            if self.applied.contains(&key) {
                continue;
            }
            if let Some(k) = self.pending_basis_digit(w) {
                // cZ with a basis state |k⟩ only applies Z^k here and leaves
                // |k⟩ in product, so w can stay out of the register.
                self.applied.insert(key);
                if k != 0 {
                    let sv = self.site[v].unwrap();
                    let p = PauliOp::single(self.d, 1, 0, 0, k);
                    self.state.apply_gate(&Gate::new(GateKind::Pauli(p), vec![sv]))?;
                }
                continue;
            }
            self.bring_live(w)?;
            let (sv, sw) = (self.site[v].unwrap(), self.site[w].unwrap());
            self.state.apply_gate(&Gate::cz(sv, sw))?;
            self.applied.insert(key);
        }
        Ok(())
    }

    fn sites_of(&mut self, slots: &[usize]) -> Result<Vec<usize>> {
        for &s in slots {
            if s >= self.site.len() {
                return Err(Error::SiteOutOfRange { site: s, n: self.site.len() });
            }
            self.materialize(s)?;
        }
        Ok(slots.iter().map(|&s| self.site[s].unwrap()).collect())
    }

    /// Apply a gate whose `sites` are slot ids.
    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        let sites = self.sites_of(&g.sites)?;
        self.state.apply_gate(&Gate::new(g.kind.clone(), sites))
    }

    pub fn apply_unitary(&mut self, u: &CMatrix, slots: &[usize]) -> Result<()> {
        let sites = self.sites_of(slots)?;
        self.state.apply_unitary(u, &sites)
    }

    /// `X^x Z^z` on one slot.
    pub fn apply_xz(&mut self, slot: usize, x: u32, z: u32) -> Result<()> {
        if x % self.d == 0 && z % self.d == 0 {
            return Ok(());
        }
        let p = PauliOp::single(self.d, 1, 0, x, z);
        self.apply_gate(&Gate::new(GateKind::Pauli(p), vec![slot]))
    }

    fn remove(&mut self, slot: usize) {
        let s = self.site[slot].take().unwrap();
        for t in self.site.iter_mut().flatten() {
            if *t > s {
                *t -= 1;
            }
        }
        self.gone[slot] = true;
    }

    /// Measure in `{Z^{-j} Rotation(v)|+₀⟩}` and drop the slot.
    pub fn measure<R: Rng + ?Sized>(&mut self, slot: usize, v: &AngleVector, rng: &mut R) -> Result<u32> {
        let s = self.sites_of(&[slot])?[0];
        let out = self.state.measure_rotated(s, v, rng)?;
        self.remove(slot);
        Ok(out)
    }

    /// Post-select a rotated measurement outcome. Returns its probability.
    pub fn project(&mut self, slot: usize, v: &AngleVector, outcome: u32) -> Result<f64> {
        let s = self.sites_of(&[slot])?[0];
        let p = self.state.project_rotated(s, v, outcome)?;
        self.remove(slot);
        Ok(p)
    }

    /// Outcome distribution for a rotated measurement, without measuring.
    pub fn probabilities(&mut self, slot: usize, v: &AngleVector) -> Result<Vec<f64>> {
        let s = self.sites_of(&[slot])?[0];
        self.state.rotated_probabilities(s, v)
    }

    pub fn measure_computational<R: Rng + ?Sized>(&mut self, slot: usize, rng: &mut R) -> Result<u32> {
        let s = self.sites_of(&[slot])?[0];
        let out = self.state.measure_computational(s, rng)?;
        self.remove(slot);
        Ok(out)
    }

    /// Drop a slot whose outcome nobody reads. Sampling a computational
    /// measurement is one unravelling of the partial trace.
    pub fn discard<R: Rng + ?Sized>(&mut self, slot: usize, rng: &mut R) -> Result<()> {
        if self.gone[slot] {
            return Ok(());
        }
        if let Some(k) = self.pending_basis_digit(slot) {
            // Never entangled: cZ with |k⟩ only leaves Z^k on each neighbor.
            self.pending[slot] = None;
            self.gone[slot] = true;
            for w in self.adj[slot].clone() {
                if self.applied.insert((slot.min(w), slot.max(w))) && k != 0 {
                    let p = PauliOp::single(self.d, 1, 0, 0, k);
                    match self.pending[w].as_mut() {
                        Some(st) => st.apply_pauli(&p)?,
                        None => {
                            let sw = self.bring_live(w)?;
                            self.state.apply_gate(&Gate::new(GateKind::Pauli(p), vec![sw]))?;
                        }
                    }
                }
            }
            return Ok(());
        }
        self.measure_computational(slot, rng).map(|_| ())
    }

    /// Still an unentangled basis state that no operation has touched.
    pub fn is_untouched_basis(&self, slot: usize) -> bool {
        self.pending_basis_digit(slot).is_some()
    }

    fn pending_basis_digit(&self, slot: usize) -> Option<u32> {
        let st = self.pending[slot].as_ref()?;
        let amps = st.amplitudes();
        let nz: Vec<usize> = (0..amps.len()).filter(|&k| amps[k].norm() > 1e-12).collect();
        (nz.len() == 1).then(|| nz[0] as u32)
    }

    /// Reduced state of `slots` with all their edges applied.
    pub fn reduced_density(&mut self, slots: &[usize]) -> Result<DensityMatrix> {
        let sites = self.sites_of(slots)?;
        self.state.reduced_density(&sites)
    }

    /// The full remaining state ordered as `slots`; every other slot must be gone.
    pub fn final_state(&mut self, slots: &[usize]) -> Result<StateVector> {
        let sites = self.sites_of(slots)?;
        if sites.len() != self.state.n_sites() {
            return Err(Error::Parameter(format!(
                "{} live sites remain but {} were requested",
                self.state.n_sites(),
                sites.len()
            )));
        }
        self.state.permuted(&sites)
    }
}
