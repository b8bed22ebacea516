//! Open graphs, flows, measurement patterns and honest pattern execution.

mod register;

pub use register::GraphRegister;

use crate::error::{Error, Result};
use crate::qudit::{md, AngleVector, PauliOp};
use crate::statevector::StateVector;
use crate::Backend;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenGraph {
    n: usize,
    adj: Vec<Vec<usize>>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
}

impl OpenGraph {
    pub fn new(n: usize, edges: &[(usize, usize)], inputs: Vec<usize>, outputs: Vec<usize>) -> Result<Self> {
        let mut sets = vec![BTreeSet::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::SiteOutOfRange { site: a.max(b), n });
            }
            if a == b {
                return Err(Error::Parameter(format!("self-loop at {a}")));
            }
            sets[a].insert(b);
            sets[b].insert(a);
        }
        for &v in inputs.iter().chain(&outputs) {
            if v >= n {
                return Err(Error::SiteOutOfRange { site: v, n });
            }
        }
        Ok(OpenGraph { n, adj: sets.into_iter().map(|s| s.into_iter().collect()).collect(), inputs, outputs })
    }

    /// Path `0 – 1 – … – (n−1)` with input 0 and output `n−1`.
    pub fn line(n: usize) -> Result<Self> {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges, vec![0], vec![n - 1])
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adj
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for (a, ns) in self.adj.iter().enumerate() {
            for &b in ns {
                if a < b {
                    e.push((a, b));
                }
            }
        }
        e
    }

    pub fn n_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }
}

/// `f: O^c → I^c` with the order `⪯` stored as levels:
/// for distinct `x, y`, `x ≺ y` iff `level(x) < level(y)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    pub f: Vec<Option<usize>>,
    pub levels: Vec<usize>,
}

impl Flow {
    /// The line flow `f(i) = i + 1`, `level(i) = i`.
    pub fn line(n: usize) -> Self {
        Flow { f: (0..n).map(|i| (i + 1 < n).then_some(i + 1)).collect(), levels: (0..n).collect() }
    }
}

/// Flow conditions on the subgraph induced by `active` vertices.
pub(crate) fn check_flow(g: &OpenGraph, fl: &Flow, active: &[bool]) -> Result<bool> {
    let n = g.n_vertices();
    if fl.f.len() != n || fl.levels.len() != n {
        return Err(Error::InvalidFlow(format!("flow has {} entries for {} vertices", fl.f.len(), n)));
    }
    let is_out = |v: usize| g.outputs.contains(&v);
    let is_in = |v: usize| g.inputs.contains(&v);
    for x in (0..n).filter(|&x| active[x] && !is_out(x)) {
        let fx = fl.f[x].ok_or(Error::FlowUndefined(x))?;
        if fx >= n || is_in(fx) || !active[fx] {
            return Err(Error::FlowRange(x));
        }
        if !g.is_adjacent(x, fx) {
            return Ok(false); // F0
        }
        if fl.levels[x] >= fl.levels[fx] {
            return Ok(false); // F1
        }
        for &y in g.neighbors(fx) {
            if y != x && active[y] && fl.levels[x] >= fl.levels[y] {
                return Ok(false); // F2
            }
        }
    }
    Ok(true)
}

/// Flow conditions F0–F2 for every measured vertex.
pub fn verify_flow(g: &OpenGraph, fl: &Flow) -> Result<bool> {
    check_flow(g, fl, &vec![true; g.n_vertices()])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Computation,
    Trap,
    Dummy,
    Output,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPattern {
    d: u32,
    graph: OpenGraph,
    roles: Vec<Role>,
    angles: Vec<AngleVector>,
    flow: Flow,
    dx: Vec<Vec<usize>>,
    dz: Vec<Vec<usize>>,
    order: Vec<usize>,
}

impl MeasurementPattern {
    /// The flow is checked on the subgraph of computation and output vertices;
    /// traps and dummies are cut off from it once dummies are placed. Traps and
    /// dummies get angle zero. `order` defaults to level order with index
    /// tie-break.
    pub fn new(
        d: u32,
        graph: OpenGraph,
        roles: Vec<Role>,
        angles: Vec<AngleVector>,
        flow: Flow,
        order: Option<Vec<usize>>,
    ) -> Result<Self> {
        crate::qudit::check_prime(d)?;
        let n = graph.n_vertices();
        if roles.len() != n {
            return Err(Error::DimensionMismatch(roles.len(), n));
        }
        if angles.len() != n {
            return Err(Error::DimensionMismatch(angles.len(), n));
        }
        for (v, r) in roles.iter().enumerate() {
            let is_out = graph.outputs.contains(&v);
            if is_out != (*r == Role::Output) {
                return Err(Error::InvalidRole(format!("vertex {v}: outputs and output roles must coincide")));
            }
            if graph.inputs.contains(&v) && matches!(r, Role::Trap | Role::Dummy) {
                return Err(Error::InvalidRole(format!("input {v} must be a computation vertex")));
            }
            if angles[v].d() != d {
                return Err(Error::ModulusMismatch(angles[v].d(), d));
            }
        }
        let angles = angles
            .into_iter()
            .zip(&roles)
            .map(|(a, r)| if matches!(r, Role::Trap | Role::Dummy) { AngleVector::zero(d) } else { a })
            .collect();
        let active: Vec<bool> = roles.iter().map(|r| matches!(r, Role::Computation | Role::Output)).collect();
        if !check_flow(&graph, &flow, &active)? {
            return Err(Error::InvalidFlow("conditions F0–F2 fail".into()));
        }
        let (dx, dz) = dependencies_on(&graph, &flow, &active);
        let order = match order {
            Some(o) => o,
            None => {
                let mut o: Vec<usize> = (0..n).filter(|&v| roles[v] != Role::Output).collect();
                o.sort_by_key(|&v| (flow.levels[v], v));
                o
            }
        };
        let p = MeasurementPattern { d, graph, roles, angles, flow, dx, dz, order };
        p.check_order()?;
        Ok(p)
    }

    fn check_order(&self) -> Result<()> {
        let n = self.graph.n_vertices();
        let mut pos = vec![usize::MAX; n];
        for (k, &v) in self.order.iter().enumerate() {
            if v >= n || pos[v] != usize::MAX || self.roles[v] == Role::Output {
                return Err(Error::Parameter(format!("measurement order entry {v} is invalid")));
            }
            pos[v] = k;
        }
        for v in 0..n {
            if self.roles[v] != Role::Output && pos[v] == usize::MAX {
                return Err(Error::Parameter(format!("vertex {v} is never measured")));
            }
            if self.roles[v] == Role::Computation {
                // The order must linearize ⪯ on the computation subgraph.
                for &s in self.dx[v].iter().chain(&self.dz[v]) {
                    if pos[s] > pos[v] {
                        return Err(Error::DependencyOrder(v));
                    }
                }
                let fv = self.flow.f[v].unwrap();
                if self.roles[fv] != Role::Output && pos[fv] < pos[v] {
                    return Err(Error::DependencyOrder(fv));
                }
            }
        }
        Ok(())
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn graph(&self) -> &OpenGraph {
        &self.graph
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn role(&self, v: usize) -> Role {
        self.roles[v]
    }

    pub fn angle(&self, v: usize) -> AngleVector {
        self.angles[v]
    }

    pub fn angles(&self) -> &[AngleVector] {
        &self.angles
    }

    pub fn flow(&self) -> &Flow {
        &self.flow
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn x_deps(&self, v: usize) -> &[usize] {
        &self.dx[v]
    }

    pub fn z_deps(&self, v: usize) -> &[usize] {
        &self.dz[v]
    }

    pub fn dependencies(&self) -> (&[Vec<usize>], &[Vec<usize>]) {
        (&self.dx, &self.dz)
    }

    pub fn computation_vertices(&self) -> Vec<usize> {
        self.order.iter().copied().filter(|&v| self.roles[v] == Role::Computation).collect()
    }

    pub fn with_angles(&self, angles: Vec<AngleVector>) -> Result<Self> {
        Self::new(self.d, self.graph.clone(), self.roles.clone(), angles, self.flow.clone(), Some(self.order.clone()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&PatternJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: PatternJson = serde_json::from_str(s)?;
        j.into_pattern()
    }
}

/// `(D^X, D^Z)` on the active subgraph: `i ∈ D^X_{f(i)}` and `i ∈ D^Z_j` for
/// every active `j ~ f(i)`, `j ≠ i`.
fn dependencies_on(g: &OpenGraph, fl: &Flow, active: &[bool]) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let n = g.n_vertices();
    let mut dx = vec![Vec::new(); n];
    let mut dz = vec![Vec::new(); n];
    for i in 0..n {
        if !active[i] || g.outputs.contains(&i) {
            continue;
        }
        let Some(fi) = fl.f[i] else { continue };
        dx[fi].push(i);
        for &j in g.neighbors(fi) {
            if j != i && active[j] {
                dz[j].push(i);
            }
        }
    }
    (dx, dz)
}

/// Flow-rule dependency sets for an open graph with a verified flow.
pub fn dependencies_from_flow(g: &OpenGraph, fl: &Flow) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    dependencies_on(g, fl, &vec![true; g.n_vertices()])
}

/// Signals `(Σ_{D^X} s, Σ_{D^Z} s)` mod `d` for vertex `v`.
pub fn byproduct_signals(p: &MeasurementPattern, v: usize, signals: &[Option<u32>]) -> Result<(u32, u32)> {
    let sum = |deps: &[usize]| -> Result<u32> {
        let mut acc = 0i64;
        for &s in deps {
            acc += signals.get(s).copied().flatten().ok_or(Error::DependencyOrder(v))? as i64;
        }
        Ok(md(acc, p.d))
    };
    Ok((sum(&p.dx[v])?, sum(&p.dz[v])?))
}

/// `φ′_v`: the base angle adapted to the byproducts of earlier outcomes.
pub fn actual_angle(v: usize, p: &MeasurementPattern, signals: &[Option<u32>]) -> Result<AngleVector> {
    let (sx, sz) = byproduct_signals(p, v, signals)?;
    Ok(p.angles[v].adapt(sx, sz))
}

/// Result of one honest run.
#[derive(Clone, Debug)]
pub struct Execution {
    /// Output state on `graph.outputs()` in order, byproducts corrected.
    pub output: StateVector,
    pub outcomes: Vec<Option<u32>>,
    pub peak_sites: usize,
}

enum Outcomes<'a, R: Rng + ?Sized> {
    Sample(&'a mut R),
    Forced(&'a [u32]),
}

/// Honest execution: computation and output vertices start in `|+₀⟩` (inputs
/// in `input`), traps in `|+₀⟩`, dummies in `|0⟩`.
pub fn execute_pattern<R: Rng + ?Sized>(
    p: &MeasurementPattern,
    input: &StateVector,
    backend: Backend,
    rng: &mut R,
) -> Result<Execution> {
    if backend != Backend::Statevector {
        return Err(Error::Backend("pattern execution needs amplitudes".into()));
    }
    run(p, input, Outcomes::Sample(rng))
}

/// As [`execute_pattern`] with the computation outcomes fixed, listed in
/// measurement order. Errors on a zero-probability branch.
pub fn execute_pattern_forced(p: &MeasurementPattern, input: &StateVector, outcomes: &[u32]) -> Result<Execution> {
    run::<rand_chacha::ChaCha20Rng>(p, input, Outcomes::Forced(outcomes))
}

fn run<R: Rng + ?Sized>(p: &MeasurementPattern, input: &StateVector, mut choose: Outcomes<'_, R>) -> Result<Execution> {
    let d = p.d;
    let n = p.graph.n_vertices();
    let init: Vec<StateVector> = (0..n)
        .map(|v| match p.roles[v] {
            Role::Dummy => StateVector::basis(d, &[0]),
            _ => StateVector::plus(d, 1),
        })
        .collect::<Result<_>>()?;
    let mut reg = GraphRegister::new(d, p.graph.adjacency().to_vec(), init)?;
    if !p.graph.inputs.is_empty() || input.n_sites() != 0 {
        reg.load_joint(&p.graph.inputs, input)?;
    }
    let mut signals = vec![None; n];
    let mut forced_idx = 0;
    let mut scratch = crate::rng::seeded(0);
    for &v in &p.order {
        match p.roles[v] {
            Role::Dummy => reg.discard(v, &mut scratch)?,
            Role::Trap => {
                let s = match &mut choose {
                    Outcomes::Sample(r) => reg.measure(v, &AngleVector::zero(d), *r)?,
                    Outcomes::Forced(_) => {
                        reg.project(v, &AngleVector::zero(d), 0)?;
                        0
                    }
                };
                signals[v] = Some(s);
            }
            Role::Computation => {
                let phi = actual_angle(v, p, &signals)?;
                let s = match &mut choose {
                    Outcomes::Sample(r) => reg.measure(v, &phi, *r)?,
                    Outcomes::Forced(list) => {
                        let s = *list.get(forced_idx).ok_or(Error::Parameter("too few forced outcomes".into()))? % d;
                        forced_idx += 1;
                        reg.project(v, &phi, s)?;
                        s
                    }
                };
                signals[v] = Some(s);
            }
            Role::Output => unreachable!("outputs are never in the order"),
        }
    }
    // Byproduct X^{-sx} Z^{-sz} on each output; undo it up to phase.
    for &o in &p.graph.outputs {
        let (sx, sz) = byproduct_signals(p, o, &signals)?;
        reg.apply_xz(o, sx, sz)?;
    }
    let output = reg.final_state(&p.graph.outputs)?;
    Ok(Execution { output, outcomes: signals, peak_sites: reg.peak_sites() })
}

/// Byproduct on the outputs implied by a set of signals, as a Pauli on the
/// output register.
pub fn output_byproduct(p: &MeasurementPattern, signals: &[Option<u32>]) -> Result<PauliOp> {
    let d = p.d;
    let outs = &p.graph.outputs;
    let mut x = Vec::with_capacity(outs.len());
    let mut z = Vec::with_capacity(outs.len());
    for &o in outs {
        let (sx, sz) = byproduct_signals(p, o, signals)?;
        x.push((d - sx) % d);
        z.push((d - sz) % d);
    }
    Ok(PauliOp::from_xz(d, &x, &z))
}

#[derive(Serialize, Deserialize)]
struct VertexJson {
    id: usize,
    role: Role,
    angle: (u32, u32, u32),
    neighbors: Vec<usize>,
    flow: Option<usize>,
    level: usize,
    x_deps: Vec<usize>,
    z_deps: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct PatternJson {
    d: u32,
    vertices: Vec<VertexJson>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    order: Vec<usize>,
}

impl From<&MeasurementPattern> for PatternJson {
    fn from(p: &MeasurementPattern) -> Self {
        let vertices = (0..p.graph.n_vertices())
            .map(|v| VertexJson {
                id: v,
                role: p.roles[v],
                angle: p.angles[v].coeffs(),
                neighbors: p.graph.neighbors(v).to_vec(),
                flow: p.flow.f[v],
                level: p.flow.levels[v],
                x_deps: p.dx[v].clone(),
                z_deps: p.dz[v].clone(),
            })
            .collect();
        PatternJson {
            d: p.d,
            vertices,
            inputs: p.graph.inputs.clone(),
            outputs: p.graph.outputs.clone(),
            order: p.order.clone(),
        }
    }
}

impl PatternJson {
    fn into_pattern(self) -> Result<MeasurementPattern> {
        let n = self.vertices.len();
        let mut edges = Vec::new();
        for (k, v) in self.vertices.iter().enumerate() {
            if v.id != k {
                return Err(Error::Serde(format!("vertex ids must be 0..{n} in order")));
            }
            for &w in &v.neighbors {
                if k < w {
                    edges.push((k, w));
                }
            }
        }
        let graph = OpenGraph::new(n, &edges, self.inputs, self.outputs)?;
        let d = self.d;
        let angles = self
            .vertices
            .iter()
            .map(|v| AngleVector::new(d, v.angle.0 as i64, v.angle.1 as i64, v.angle.2 as i64))
            .collect::<Result<Vec<_>>>()?;
        let flow = Flow { f: self.vertices.iter().map(|v| v.flow).collect(), levels: self.vertices.iter().map(|v| v.level).collect() };
        let roles = self.vertices.iter().map(|v| v.role).collect();
        let p = MeasurementPattern::new(d, graph, roles, angles, flow, Some(self.order))?;
        for (k, v) in self.vertices.iter().enumerate() {
            if p.dx[k] != v.x_deps || p.dz[k] != v.z_deps {
                return Err(Error::Serde(format!("dependency lists of vertex {k} disagree with the flow")));
            }
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests;
