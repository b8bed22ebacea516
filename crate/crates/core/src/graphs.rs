//! Trapified graph builders: the dotted-complete graph, its reduced
//! dotted-line variant, output gadgets and trap assignments.
//!
//! Primary vertices come in triples `S_γ = {3γ, 3γ+1, 3γ+2}`. The computation
//! runs along chains of consecutive triples; each chain ends in a gadget whose
//! bottom vertex is the fixed output.

use crate::error::{Error, Result};
use crate::mbqc::{Flow, MeasurementPattern, OpenGraph, Role};
use crate::qudit::AngleVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// `|S_γ|`.
pub const TRIPLE: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    DottedComplete,
    /// Edges only between consecutive triples (the reduced variant).
    DottedLine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Primary { triple: usize, member: usize },
    /// Subdivision vertex of the edge between primaries `u < v`.
    Edge { u: usize, v: usize },
    GadgetRow { gadget: usize, member: usize },
    Bottom { gadget: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gadget {
    pub triple: usize,
    pub row: [usize; TRIPLE],
    pub bottom: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrapifiedGraph {
    family: Family,
    kinds: Vec<VertexKind>,
    edges: Vec<(usize, usize)>,
    partition: Vec<[usize; TRIPLE]>,
    chains: Vec<Vec<usize>>,
    gadgets: Vec<Gadget>,
    edge_index: std::collections::BTreeMap<(usize, usize), usize>,
}

/// Per-triple secret positions within `S_γ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrapAssignment {
    pub trap: Vec<usize>,
    pub computation: Vec<usize>,
}

impl TrapAssignment {
    pub fn dummy(&self, triple: usize) -> usize {
        TRIPLE * (TRIPLE - 1) / 2 - self.trap[triple] - self.computation[triple]
    }
}

fn primaries_with_edges(family: Family, n_triples: usize) -> TrapifiedGraph {
    let n_primary = TRIPLE * n_triples;
    let mut kinds: Vec<VertexKind> =
        (0..n_primary).map(|p| VertexKind::Primary { triple: p / TRIPLE, member: p % TRIPLE }).collect();
    let mut edges = Vec::new();
    let mut edge_index = std::collections::BTreeMap::new();
    let mut subdivide = |u: usize, v: usize, kinds: &mut Vec<VertexKind>| {
        let e = kinds.len();
        kinds.push(VertexKind::Edge { u, v });
        edges.push((u, e));
        edges.push((v, e));
        edge_index.insert((u, v), e);
    };
    match family {
        Family::DottedComplete => {
            for u in 0..n_primary {
                for v in u + 1..n_primary {
                    subdivide(u, v, &mut kinds);
                }
            }
        }
        Family::DottedLine => {
            for g in 0..n_triples.saturating_sub(1) {
                for j in 0..TRIPLE {
                    for k in 0..TRIPLE {
                        subdivide(TRIPLE * g + j, TRIPLE * (g + 1) + k, &mut kinds);
                    }
                }
            }
        }
    }
    TrapifiedGraph {
        family,
        kinds,
        edges,
        partition: (0..n_triples).map(|g| [TRIPLE * g, TRIPLE * g + 1, TRIPLE * g + 2]).collect(),
        chains: vec![(0..n_triples).collect()],
        gadgets: Vec::new(),
        edge_index,
    }
}

/// `K_{3m′}` with every edge subdivided, one computation chain.
pub fn build_dotted_complete(m_prime: usize) -> Result<TrapifiedGraph> {
    build_dotted_complete_chains(m_prime, 1)
}

/// `K_{3m′}` dotted, with the triples split into `n_chains` equal consecutive
/// chains (one output per chain).
pub fn build_dotted_complete_chains(m_prime: usize, n_chains: usize) -> Result<TrapifiedGraph> {
    if m_prime == 0 || n_chains == 0 || m_prime % n_chains != 0 {
        return Err(Error::Parameter(format!("m′ = {m_prime} must be a positive multiple of {n_chains} chains")));
    }
    let mut g = primaries_with_edges(Family::DottedComplete, m_prime);
    let len = m_prime / n_chains;
    g.chains = (0..n_chains).map(|c| (c * len..(c + 1) * len).collect()).collect();
    Ok(g)
}

/// Reduced variant: `L` triples in a line, consecutive triples joined by the
/// 9 subdivided edges of `K_{3,3}`.
pub fn build_dotted_line(l: usize) -> Result<TrapifiedGraph> {
    if l == 0 {
        return Err(Error::Parameter("need at least one triple".into()));
    }
    Ok(primaries_with_edges(Family::DottedLine, l))
}

/// Vertex count of the dotted-complete graph: `3m′ + C(3m′, 2)`.
pub fn dotted_complete_size(m_prime: usize) -> usize {
    (9 * m_prime * m_prime + 3 * m_prime) / 2
}

/// One gadget on the last triple of every chain: row vertex `g_j ~ S_γ[j]`,
/// all `g_j ~ o`.
pub fn attach_gadgets(mut g: TrapifiedGraph) -> Result<TrapifiedGraph> {
    if !g.gadgets.is_empty() {
        return Err(Error::GadgetsAttached);
    }
    if g.partition.is_empty() {
        return Err(Error::NoPartition);
    }
    for (gi, chain) in g.chains.clone().iter().enumerate() {
        let triple = *chain.last().unwrap();
        let mut row = [0; TRIPLE];
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = g.kinds.len();
            g.kinds.push(VertexKind::GadgetRow { gadget: gi, member: j });
            g.edges.push((g.partition[triple][j], *slot));
        }
        let bottom = g.kinds.len();
        g.kinds.push(VertexKind::Bottom { gadget: gi });
        for &r in &row {
            g.edges.push((r, bottom));
        }
        g.gadgets.push(Gadget { triple, row, bottom });
    }
    Ok(g)
}

/// Uniform trap position per triple, then the computation position uniform
/// over the remaining two.
pub fn draw_assignment<R: Rng + ?Sized>(g: &TrapifiedGraph, rng: &mut R) -> Result<TrapAssignment> {
    if g.partition.is_empty() {
        return Err(Error::NoPartition);
    }
    let mut trap = Vec::with_capacity(g.partition.len());
    let mut computation = Vec::with_capacity(g.partition.len());
    for _ in &g.partition {
        let t = rng.gen_range(0..TRIPLE);
        let rest: Vec<usize> = (0..TRIPLE).filter(|&k| k != t).collect();
        trap.push(t);
        computation.push(rest[rng.gen_range(0..rest.len())]);
    }
    Ok(TrapAssignment { trap, computation })
}

impl TrapifiedGraph {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn is_reduced(&self) -> bool {
        self.family == Family::DottedLine
    }

    pub fn n_vertices(&self) -> usize {
        self.kinds.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn kind(&self, v: usize) -> VertexKind {
        self.kinds[v]
    }

    pub fn partition(&self) -> &[[usize; TRIPLE]] {
        &self.partition
    }

    pub fn chains(&self) -> &[Vec<usize>] {
        &self.chains
    }

    pub fn gadgets(&self) -> &[Gadget] {
        &self.gadgets
    }

    /// Bottom vertices, the fixed output system `O′`.
    pub fn outputs(&self) -> Vec<usize> {
        self.gadgets.iter().map(|g| g.bottom).collect()
    }

    pub fn open_graph(&self) -> Result<OpenGraph> {
        OpenGraph::new(self.n_vertices(), &self.edges, vec![], self.outputs())
    }

    /// Public measurement layers (independent of any secret): triple `γ`'s
    /// primaries at `2γ`, an edge vertex at `2γ_max − 1` (or `2γ + 1` inside
    /// a triple), the gadget row after every primary, bottoms last.
    pub fn levels(&self) -> Vec<usize> {
        let top = 2 * self.partition.len();
        self.kinds
            .iter()
            .map(|k| match *k {
                VertexKind::Primary { triple, .. } => 2 * triple,
                VertexKind::Edge { u, v } => {
                    let (tu, tv) = (u / TRIPLE, v / TRIPLE);
                    if tu == tv {
                        2 * tu + 1
                    } else {
                        2 * tv - 1
                    }
                }
                VertexKind::GadgetRow { .. } => top,
                VertexKind::Bottom { .. } => top + 1,
            })
            .collect()
    }

    /// Measurement order: by level, then index. Bottoms are excluded.
    pub fn measurement_order(&self) -> Vec<usize> {
        let levels = self.levels();
        let mut o: Vec<usize> =
            (0..self.n_vertices()).filter(|&v| !matches!(self.kinds[v], VertexKind::Bottom { .. })).collect();
        o.sort_by_key(|&v| (levels[v], v));
        o
    }

    fn check_assignment(&self, a: &TrapAssignment) -> Result<()> {
        let n = self.partition.len();
        if a.trap.len() != n || a.computation.len() != n {
            return Err(Error::DimensionMismatch(a.trap.len(), n));
        }
        for g in 0..n {
            if a.trap[g] >= TRIPLE || a.computation[g] >= TRIPLE || a.trap[g] == a.computation[g] {
                return Err(Error::InvalidRole(format!("triple {g} has an inconsistent assignment")));
            }
        }
        if self.gadgets.is_empty() {
            return Err(Error::Parameter("gadgets are not attached".into()));
        }
        Ok(())
    }

    pub fn computation_primary(&self, a: &TrapAssignment, triple: usize) -> usize {
        self.partition[triple][a.computation[triple]]
    }

    pub fn trap_primary(&self, a: &TrapAssignment, triple: usize) -> usize {
        self.partition[triple][a.trap[triple]]
    }

    /// Vertex sequence of each chain: `c_0, e, c_1, …, c_last, g, o`.
    pub fn computation_chains(&self, a: &TrapAssignment) -> Result<Vec<Vec<usize>>> {
        self.check_assignment(a)?;
        let mut out = Vec::new();
        for (ci, chain) in self.chains.iter().enumerate() {
            let mut seq: Vec<usize> = Vec::new();
            for (k, &t) in chain.iter().enumerate() {
                let c = self.computation_primary(a, t);
                if k > 0 {
                    let prev = *seq.last().unwrap();
                    let key = (prev.min(c), prev.max(c));
                    seq.push(*self.edge_index.get(&key).ok_or(Error::Wiring(format!("no edge vertex for {key:?}")))?);
                }
                seq.push(c);
            }
            let gadget = &self.gadgets[ci];
            seq.push(gadget.row[a.computation[gadget.triple]]);
            seq.push(gadget.bottom);
            out.push(seq);
        }
        Ok(out)
    }

    pub fn roles(&self, a: &TrapAssignment) -> Result<Vec<Role>> {
        let chains = self.computation_chains(a)?;
        let mut roles = vec![Role::Dummy; self.n_vertices()];
        for (t, members) in self.partition.iter().enumerate() {
            roles[members[a.trap[t]]] = Role::Trap;
        }
        for seq in &chains {
            for &v in &seq[..seq.len() - 1] {
                roles[v] = Role::Computation;
            }
            roles[*seq.last().unwrap()] = Role::Output;
        }
        Ok(roles)
    }

    /// Pattern for an assignment. `free_angles[c]` lists the angles of chain
    /// `c`'s vertices before its last primary (`2ℓ − 2` of them); the last
    /// primary and its gadget row vertex are measured at angle zero.
    pub fn pattern(&self, d: u32, a: &TrapAssignment, free_angles: &[Vec<AngleVector>]) -> Result<MeasurementPattern> {
        self.pattern_with_inputs(d, a, free_angles, false)
    }

    /// As [`Self::pattern`], optionally declaring each chain's first vertex an
    /// input of the open graph.
    pub fn pattern_with_inputs(
        &self,
        d: u32,
        a: &TrapAssignment,
        free_angles: &[Vec<AngleVector>],
        chain_inputs: bool,
    ) -> Result<MeasurementPattern> {
        let chains = self.computation_chains(a)?;
        if free_angles.len() != chains.len() {
            return Err(Error::DimensionMismatch(free_angles.len(), chains.len()));
        }
        let n = self.n_vertices();
        let mut angles = vec![AngleVector::zero(d); n];
        let mut f = vec![None; n];
        let levels = self.levels();
        for (seq, free) in chains.iter().zip(free_angles) {
            if free.len() != seq.len() - 3 {
                return Err(Error::DimensionMismatch(free.len(), seq.len() - 3));
            }
            for (k, v) in free.iter().enumerate() {
                angles[seq[k]] = *v;
            }
            for w in seq.windows(2) {
                f[w[0]] = Some(w[1]);
            }
        }
        // Vertices off the computation subgraph are ignored by the flow
        // check; give them a placeholder.
        for (v, slot) in f.iter_mut().enumerate() {
            if slot.is_none() && !matches!(self.kinds[v], VertexKind::Bottom { .. }) {
                *slot = Some(v);
            }
        }
        let inputs = if chain_inputs { chains.iter().map(|s| s[0]).collect() } else { vec![] };
        let graph = OpenGraph::new(n, &self.edges, inputs, self.outputs())?;
        MeasurementPattern::new(
            d,
            graph,
            self.roles(a)?,
            angles,
            Flow { f, levels },
            Some(self.measurement_order()),
        )
    }

    /// Skeleton export: per-vertex kind, neighbors and public level, plus the
    /// partition and gadget descriptors.
    pub fn to_json(&self) -> Result<String> {
        let og = self.open_graph()?;
        let levels = self.levels();
        let vertices: Vec<serde_json::Value> = (0..self.n_vertices())
            .map(|v| {
                serde_json::json!({
                    "id": v,
                    "kind": self.kinds[v],
                    "neighbors": og.neighbors(v),
                    "level": levels[v],
                })
            })
            .collect();
        Ok(serde_json::to_string_pretty(&serde_json::json!({
            "family": self.family,
            "reduced": self.is_reduced(),
            "vertices": vertices,
            "outputs": self.outputs(),
            "partition": self.partition,
            "chains": self.chains,
            "gadgets": self.gadgets,
        }))?)
    }
}
