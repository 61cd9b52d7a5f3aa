//! Measurement graphs and merged measurement codes.
//!
//! Sign convention: the vertex check of the lowest support qubit carries the
//! sign of the measured operator, so `∏ A_v = 𝓛` including sign; deformed
//! checks keep the sign of the original check.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::config::{expander_degree, Caps};
use crate::error::{Error, Result};
use crate::f2la::{self, BitVector};
use crate::graphkit::{
    build_expander_with, cellulate, decongest_with, greedy_partition, relative_expansion, thicken, BasisPartition,
    CycleBasis, EdgeOrigin, Expansion, MultiGraph,
};
use crate::paulicode::{anticommute_set, ldpc_profile, Pauli, PauliOperator, StabilizerCode};

/// Measurement graph with its port function and measured cycle basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortedGraph {
    pub graph: MultiGraph,
    /// Code qubit to vertex.
    pub port: BTreeMap<usize, usize>,
    pub basis: CycleBasis,
}

impl PortedGraph {
    pub fn new(graph: MultiGraph, port: BTreeMap<usize, usize>, basis: CycleBasis) -> Result<Self> {
        let pg = PortedGraph { graph, port, basis };
        pg.check_port()?;
        Ok(pg)
    }

    pub fn check_port(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for (&q, &v) in &self.port {
            if v >= self.graph.num_vertices() {
                return Err(Error::invalid(format!("qubit {q} ported to missing vertex {v}")));
            }
            if !seen.insert(v) {
                return Err(Error::invalid(format!("port is not injective at vertex {v}")));
            }
        }
        Ok(())
    }

    /// Port restricted to a set of qubits.
    pub fn restricted(&self, qubits: &[usize]) -> Result<PortedGraph> {
        let mut port = BTreeMap::new();
        for &q in qubits {
            let v = self.port.get(&q).ok_or_else(|| Error::invalid(format!("qubit {q} has no port")))?;
            port.insert(q, *v);
        }
        Ok(PortedGraph { graph: self.graph.clone(), port, basis: self.basis.clone() })
    }

    pub fn port_vertices(&self) -> Vec<usize> {
        self.port.values().copied().collect()
    }
}

/// Joins two measurement graphs with `d` edges between their first `d`
/// port vertices. `b`'s qubits follow the first `n_a`; each consecutive pair
/// of bridge edges closes one new cycle through shortest paths on both sides.
pub fn bridge_ported(a: &PortedGraph, n_a: usize, b: &PortedGraph, d: usize) -> Result<PortedGraph> {
    let (pa, pb) = (a.port_vertices(), b.port_vertices());
    if d == 0 || d > pa.len() || d > pb.len() {
        return Err(Error::invalid(format!("cannot place {d} bridge edges between ports of size {} and {}", pa.len(), pb.len())));
    }
    let (va, ea) = (a.graph.num_vertices(), a.graph.num_edges());
    let mut graph = a.graph.clone();
    for _ in 0..b.graph.num_vertices() {
        graph.add_vertex();
    }
    for &(u, v) in b.graph.edges() {
        graph.add_edge(u + va, v + va);
    }
    let bridge: Vec<usize> = (0..d).map(|i| graph.add_edge(pa[i], pb[i] + va)).collect();
    let mut cycles: Vec<Vec<usize>> = a.basis.cycles.clone();
    cycles.extend(b.basis.cycles.iter().map(|c| c.iter().map(|e| e + ea).collect()));
    for i in 1..d {
        let left = a.graph.shortest_path(pa[i - 1], pa[i], None).ok_or_else(|| Error::invalid("left graph is disconnected"))?;
        let right = b.graph.shortest_path(pb[i - 1], pb[i], None).ok_or_else(|| Error::invalid("right graph is disconnected"))?;
        let mut c = vec![bridge[i - 1], bridge[i]];
        c.extend(left);
        c.extend(right.into_iter().map(|e| e + ea));
        cycles.push(c);
    }
    let mut port = a.port.clone();
    port.extend(b.port.iter().map(|(&q, &v)| (q + n_a, v + va)));
    let basis = CycleBasis::new(graph.num_edges(), cycles);
    PortedGraph::new(graph, port, basis)
}

/// Edge set with odd incidence exactly on `targets`, restricted to `within`
/// when given. Existence comes from a GF(2) solve; the returned set is the
/// smaller of the forest T-join and a closest-pair path pairing.
pub fn path_matching(g: &MultiGraph, targets: &[usize], within: Option<&[usize]>) -> Option<Vec<usize>> {
    let mut t: Vec<usize> = targets.to_vec();
    t.sort_unstable();
    t.dedup();
    if t.is_empty() {
        return Some(Vec::new());
    }
    if t.len() % 2 == 1 {
        return None;
    }
    let allowed: Vec<bool> = match within {
        None => vec![true; g.num_edges()],
        Some(w) => {
            let mut a = vec![false; g.num_edges()];
            for &e in w {
                a[e] = true;
            }
            a
        }
    };
    let cols: Vec<usize> = (0..g.num_edges()).filter(|&e| allowed[e]).collect();
    let m = g.incidence().select_columns(&cols);
    let rhs = BitVector::from_indices(g.num_vertices(), t.iter().copied());
    f2la::solve(&m, &rhs)?;

    // forest T-join: a tree edge is used iff the subtree below it holds an odd
    // number of targets
    let mut is_target = vec![false; g.num_vertices()];
    for &v in &t {
        is_target[v] = true;
    }
    let mut visited = vec![false; g.num_vertices()];
    let mut join = Vec::new();
    for root in 0..g.num_vertices() {
        if visited[root] {
            continue;
        }
        let tree = g.bfs_tree(root, Some(&allowed));
        let mut odd = vec![false; g.num_vertices()];
        for &v in &tree.order {
            visited[v] = true;
            odd[v] = is_target[v];
        }
        for &v in tree.order.iter().rev() {
            if let Some((p, e)) = tree.parent[v] {
                if odd[v] {
                    join.push(e);
                    odd[p] ^= true;
                }
            }
        }
    }
    join.sort_unstable();

    // closest pairs by BFS distance
    let mut remaining = t.clone();
    let mut pairing = vec![false; g.num_edges()];
    while !remaining.is_empty() {
        let mut best: Option<(usize, usize, Vec<usize>)> = None;
        for (i, &a) in remaining.iter().enumerate() {
            let tree = g.bfs_tree(a, Some(&allowed));
            for &b in &remaining[i + 1..] {
                if let Some(p) = tree.path_to_root(b) {
                    if best.as_ref().is_none_or(|x| p.len() < x.2.len()) {
                        best = Some((a, b, p));
                    }
                }
            }
        }
        let Some((a, b, p)) = best else { break };
        for e in p {
            pairing[e] ^= true;
        }
        remaining.retain(|&v| v != a && v != b);
    }
    let pairing: Vec<usize> = (0..g.num_edges()).filter(|&e| pairing[e]).collect();
    if remaining.is_empty() && pairing.len() < join.len() {
        Some(pairing)
    } else {
        Some(join)
    }
}

/// Origin of a check of a merged code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckOrigin {
    Vertex { vertex: usize },
    Cycle { cycle: usize },
    Deformed { check: usize, matching: Vec<usize> },
}

/// The code `Q(𝓛, G, f)` on `n + |E|` qubits; edge `e` is qubit `n + e`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergedCode {
    pub base: StabilizerCode,
    pub operator: PauliOperator,
    pub graph: MultiGraph,
    pub port: BTreeMap<usize, usize>,
    pub basis: CycleBasis,
    pub vertex_checks: Vec<PauliOperator>,
    pub cycle_checks: Vec<PauliOperator>,
    pub deformed_checks: Vec<PauliOperator>,
    /// Matching used by each base check; empty when no deformation.
    pub matchings: Vec<Vec<usize>>,
}

impl MergedCode {
    pub fn n_base(&self) -> usize {
        self.base.n()
    }

    pub fn n_total(&self) -> usize {
        self.base.n() + self.graph.num_edges()
    }

    pub fn edge_qubit(&self, e: usize) -> usize {
        self.base.n() + e
    }

    /// All checks: vertex, then cycle, then deformed.
    pub fn checks(&self) -> Vec<PauliOperator> {
        let mut c = self.vertex_checks.clone();
        c.extend(self.cycle_checks.iter().cloned());
        c.extend(self.deformed_checks.iter().cloned());
        c
    }

    pub fn provenance(&self) -> Vec<CheckOrigin> {
        let mut p: Vec<CheckOrigin> =
            (0..self.vertex_checks.len()).map(|v| CheckOrigin::Vertex { vertex: v }).collect();
        p.extend((0..self.cycle_checks.len()).map(|c| CheckOrigin::Cycle { cycle: c }));
        p.extend(
            self.matchings
                .iter()
                .enumerate()
                .map(|(i, m)| CheckOrigin::Deformed { check: i, matching: m.clone() }),
        );
        p
    }

    pub fn code(&self) -> StabilizerCode {
        StabilizerCode::new(self.n_total(), self.checks()).expect("merged checks commute")
    }

    /// Re-derives every structural invariant from scratch.
    pub fn verify(&self) -> Result<()> {
        let checks = self.checks();
        for i in 0..checks.len() {
            for j in i + 1..checks.len() {
                if checks[i].anticommutes_with(&checks[j]) {
                    return Err(Error::invalid(format!("merged checks {i} and {j} anticommute")));
                }
            }
        }
        let mut prod = PauliOperator::identity(self.n_total());
        for a in &self.vertex_checks {
            prod = prod.mul_commuting(a);
        }
        let target = self.operator.extended(self.n_total());
        if prod != target {
            return Err(Error::invalid(format!("product of vertex checks is {prod}, expected {target}")));
        }
        for (i, s) in self.base.generators().iter().enumerate() {
            let k = anticommute_set(s, &self.operator);
            let mut want: Vec<usize> = k.iter().map(|q| self.port[q]).collect();
            want.sort_unstable();
            if self.graph.odd_vertices(&self.matchings[i]) != want {
                return Err(Error::invalid(format!("matching of check {i} has the wrong odd vertices")));
            }
        }
        Ok(())
    }
}

/// Builds `Q(𝓛, G, f)` with matchings from [`path_matching`].
pub fn build_merged_code(code: &StabilizerCode, l: &PauliOperator, pg: &PortedGraph) -> Result<MergedCode> {
    build_merged_code_with(code, l, pg, |_, targets| path_matching(&pg.graph, targets, None))
}

/// Same as [`build_merged_code`] with a caller-chosen matching rule
/// `matcher(check index, target vertices)`.
pub fn build_merged_code_with(
    code: &StabilizerCode,
    l: &PauliOperator,
    pg: &PortedGraph,
    mut matcher: impl FnMut(usize, &[usize]) -> Option<Vec<usize>>,
) -> Result<MergedCode> {
    let n = code.n();
    if l.n() != n {
        return Err(Error::invalid(format!("operator acts on {} qubits, code has {n}", l.n())));
    }
    if l.is_identity() {
        return Err(Error::invalid("cannot measure the identity"));
    }
    if let Some(i) = code.generators().iter().position(|s| s.anticommutes_with(l)) {
        return Err(Error::invalid(format!("operator anticommutes with check {i}")));
    }
    let support = l.support();
    let domain: Vec<usize> = pg.port.keys().copied().collect();
    if domain != support {
        return Err(Error::invalid(format!("port domain {domain:?} differs from operator support {support:?}")));
    }
    pg.check_port()?;
    let g = &pg.graph;
    let total = n + g.num_edges();

    let mut vertex_checks = Vec::with_capacity(g.num_vertices());
    let mut owner = vec![None; g.num_vertices()];
    for (&q, &v) in &pg.port {
        owner[v] = Some(q);
    }
    for (v, own) in owner.iter().enumerate() {
        let mut a = PauliOperator::identity(total);
        for &(_, e) in g.neighbors(v) {
            a.set(n + e, Pauli::Z);
        }
        if let Some(q) = *own {
            a.set(q, l.get(q));
            if q == support[0] {
                a.set_negative(l.is_negative());
            }
        }
        vertex_checks.push(a);
    }

    let cycle_checks = pg
        .basis
        .cycles
        .iter()
        .map(|c| PauliOperator::on(total, c.iter().map(|&e| n + e), Pauli::X))
        .collect();

    let mut deformed = Vec::with_capacity(code.generators().len());
    let mut matchings = Vec::with_capacity(code.generators().len());
    for (i, s) in code.generators().iter().enumerate() {
        let k = anticommute_set(s, l);
        let mut ext = s.extended(total);
        if k.is_empty() {
            matchings.push(Vec::new());
        } else {
            let targets: Vec<usize> = k.iter().map(|q| pg.port[q]).collect();
            let mu = matcher(i, &targets).ok_or_else(|| {
                Error::Capability(format!("no path matching for check {i} ({s}) on vertices {targets:?}"))
            })?;
            for &e in &mu {
                ext.set(n + e, Pauli::X);
            }
            matchings.push(mu);
        }
        deformed.push(ext);
    }

    Ok(MergedCode {
        base: code.clone(),
        operator: l.clone(),
        graph: g.clone(),
        port: pg.port.clone(),
        basis: pg.basis.clone(),
        vertex_checks,
        cycle_checks,
        deformed_checks: deformed,
        matchings,
    })
}

/// Where an edge of a built measurement graph came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphEdge {
    Horizontal { base_edge: usize, level: usize },
    Vertical { vertex: usize, level: usize },
    Chord { level: usize },
}

/// Bookkeeping from [`build_measurement_graph`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphBuild {
    pub ported: PortedGraph,
    pub base_graph: MultiGraph,
    pub base_basis: CycleBasis,
    pub partition: BasisPartition,
    pub levels: usize,
    pub expander: Expansion,
    pub edge_origin: Vec<GraphEdge>,
    /// Base vertex and level of every vertex.
    pub vertex_origin: Vec<(usize, usize)>,
    /// `ℓ (Δ + δ + 1) |L|` with δ the expander degree.
    pub edge_bound: usize,
}

/// Shared pipeline: decongest, partition, thicken and cellulate a base graph
/// whose first vertices carry the port.
pub(crate) struct Pipeline {
    pub graph: MultiGraph,
    pub basis: CycleBasis,
    pub base_basis: CycleBasis,
    pub partition: BasisPartition,
    pub levels: usize,
    pub edge_origin: Vec<GraphEdge>,
    pub vertex_origin: Vec<(usize, usize)>,
    pub base_vertices: usize,
    pub base_edges: usize,
}

impl Pipeline {
    pub fn vertex(&self, v: usize, level: usize) -> usize {
        level * self.base_vertices + v
    }

    pub fn horizontal(&self, e: usize, level: usize) -> usize {
        level * self.base_edges + e
    }
}

pub(crate) fn thicken_pipeline(
    base: &MultiGraph,
    beta: Ratio<u64>,
    seed: u64,
    caps: &Caps,
    label: &str,
) -> Result<Pipeline> {
    let base_basis = decongest_with(base, crate::config::derive_seed(seed, label), caps.retries)?;
    let partition = greedy_partition(&base_basis);
    let inv = if *beta.numer() == 0 { 1 } else { beta.recip().ceil().to_integer() as usize };
    let levels = partition.t.max(inv).max(1);
    let th = thicken(base, levels);
    let mut graph = th.graph.clone();
    let mut edge_origin: Vec<GraphEdge> = th
        .edge_origin
        .iter()
        .map(|o| match *o {
            EdgeOrigin::Horizontal { edge, level } => GraphEdge::Horizontal { base_edge: edge, level },
            EdgeOrigin::Vertical { vertex, level } => GraphEdge::Vertical { vertex, level },
        })
        .collect();
    let mut cycles = th.squares(base);
    for (level, part) in partition.parts.iter().enumerate() {
        for &ci in part {
            let lifted = th.lift(&base_basis.cycles[ci], level);
            if lifted.len() <= 2 {
                cycles.push(lifted);
                continue;
            }
            let cell = cellulate(&mut graph, &lifted)?;
            edge_origin.extend(cell.chords.iter().map(|_| GraphEdge::Chord { level }));
            cycles.extend(cell.triangles.iter().map(|t| t.to_vec()));
        }
    }
    let basis = CycleBasis::new(graph.num_edges(), cycles);
    basis.validate(&graph)?;
    Ok(Pipeline {
        graph,
        basis,
        base_basis,
        partition,
        levels,
        edge_origin,
        vertex_origin: th.vertex_origin,
        base_vertices: base.num_vertices(),
        base_edges: base.num_edges(),
    })
}

/// Measurement graph for `l`: per-check matchings and an expander on the
/// support, decongested, thickened `max(t, ⌈1/β⌉)` times and cellulated.
pub fn build_measurement_graph(
    code: &StabilizerCode,
    l: &PauliOperator,
    beta: Ratio<u64>,
    seed: u64,
    caps: &Caps,
) -> Result<GraphBuild> {
    if let Some(i) = code.generators().iter().position(|s| s.anticommutes_with(l)) {
        return Err(Error::invalid(format!("operator anticommutes with check {i}")));
    }
    let support = l.support();
    if support.is_empty() {
        return Err(Error::invalid("cannot measure the identity"));
    }
    let index: BTreeMap<usize, usize> = support.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let mut base = MultiGraph::new(support.len());
    for s in code.generators() {
        let k: Vec<usize> = anticommute_set(s, l).iter().map(|q| index[q]).collect();
        for pair in k.chunks(2) {
            if let [a, b] = *pair {
                if !base.has_edge(a, b) {
                    base.add_edge(a, b);
                }
            }
        }
    }
    let profile = ldpc_profile(code);
    let degree = expander_degree(profile);
    let exp = build_expander_with(
        support.len(),
        beta,
        degree,
        crate::config::derive_seed(seed, "graph-expander"),
        caps.exact_cheeger,
        caps.retries,
    )?;
    for &(a, b) in exp.graph.edges() {
        if !base.has_edge(a, b) {
            base.add_edge(a, b);
        }
    }
    let p = thicken_pipeline(&base, beta, seed, caps, "graph-decongest")?;
    let port: BTreeMap<usize, usize> = support.iter().enumerate().map(|(i, &q)| (q, p.vertex(i, 0))).collect();
    let edge_bound = p.levels * (profile.delta + degree + 1) * support.len();
    Ok(GraphBuild {
        ported: PortedGraph::new(p.graph, port, p.basis)?,
        base_graph: base,
        base_basis: p.base_basis,
        partition: p.partition,
        levels: p.levels,
        expander: exp.certificate,
        edge_origin: p.edge_origin,
        vertex_origin: p.vertex_origin,
        edge_bound,
    })
}

/// Result of checking the graph desiderata.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesiderataReport {
    pub connected: bool,
    pub max_degree: usize,
    pub basis_congestion: usize,
    pub basis_max_length: usize,
    pub matching_max_size: usize,
    pub matching_max_edge_load: usize,
    pub relative_beta: Option<Expansion>,
    pub flags: DesiderataFlags,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesiderataFlags {
    pub port: bool,
    pub connected: bool,
    pub degree: bool,
    pub basis: bool,
    pub congestion: bool,
    pub cycle_length: bool,
    pub matchings: bool,
    pub matching_size: bool,
    pub edge_load: bool,
    pub expansion: bool,
}

impl DesiderataFlags {
    pub fn all(&self) -> bool {
        self.port
            && self.connected
            && self.degree
            && self.basis
            && self.congestion
            && self.cycle_length
            && self.matchings
            && self.matching_size
            && self.edge_load
            && self.expansion
    }
}

impl DesiderataReport {
    pub fn pass(&self) -> bool {
        self.flags.all()
    }

    /// Flags re-derived from the numeric fields and caps.
    pub fn recompute_flags(&self, caps: &Caps, omega: usize) -> DesiderataFlags {
        DesiderataFlags {
            port: self.flags.port,
            connected: self.connected,
            degree: self.max_degree <= caps.max_degree,
            basis: self.flags.basis,
            congestion: self.basis_congestion <= caps.max_congestion,
            cycle_length: self.basis_max_length <= caps.max_cycle_length,
            matchings: self.flags.matchings,
            matching_size: self.matching_max_size <= caps.max_matching_size.unwrap_or(omega),
            edge_load: self.matching_max_edge_load <= caps.max_edge_load,
            expansion: self.relative_beta.is_some_and(|b| b.beta.at_least(Ratio::from_integer(1))),
        }
    }
}

/// Graph-only items shared by both desiderata checks.
pub(crate) fn graph_items(
    g: &MultiGraph,
    basis: &CycleBasis,
    port_vertices: &[usize],
    d: usize,
    caps: &Caps,
) -> DesiderataReport {
    let mut diagnostics = Vec::new();
    let connected = g.is_connected();
    if !connected {
        diagnostics.push(format!("graph has {} components", g.components().1));
    }
    let max_degree = g.max_degree();
    let basis_ok = match basis.validate(g) {
        Ok(()) => true,
        Err(e) => {
            diagnostics.push(format!("cycle basis: {e}"));
            false
        }
    };
    let mut b = basis.clone();
    b.recount();
    let relative_beta = match relative_expansion(g, port_vertices, d, caps.exact_cheeger) {
        Ok(x) => Some(x),
        Err(e) => {
            diagnostics.push(format!("expansion: {e}"));
            None
        }
    };
    let flags = DesiderataFlags {
        port: true,
        connected,
        degree: max_degree <= caps.max_degree,
        basis: basis_ok,
        congestion: b.rho <= caps.max_congestion,
        cycle_length: b.max_length <= caps.max_cycle_length,
        matchings: true,
        matching_size: true,
        edge_load: true,
        expansion: relative_beta.is_some_and(|x| x.beta.at_least(Ratio::from_integer(1))),
    };
    if !flags.degree {
        diagnostics.push(format!("max degree {max_degree} exceeds cap {}", caps.max_degree));
    }
    if !flags.congestion {
        diagnostics.push(format!("congestion {} exceeds cap {}", b.rho, caps.max_congestion));
    }
    if !flags.cycle_length {
        diagnostics.push(format!("cycle length {} exceeds cap {}", b.max_length, caps.max_cycle_length));
    }
    if let Some(x) = relative_beta {
        if !flags.expansion {
            diagnostics.push(format!("relative expansion {} below 1 ({:?})", x.beta, x.kind));
        }
    }
    DesiderataReport {
        connected,
        max_degree,
        basis_congestion: b.rho,
        basis_max_length: b.max_length,
        matching_max_size: 0,
        matching_max_edge_load: 0,
        relative_beta,
        flags,
        diagnostics,
    }
}

/// Evaluates the graph desiderata for measuring `l` with `pg`.
pub fn check_desiderata(
    pg: &PortedGraph,
    code: &StabilizerCode,
    l: &PauliOperator,
    d: usize,
    caps: &Caps,
) -> DesiderataReport {
    let mut r = graph_items(&pg.graph, &pg.basis, &pg.port_vertices(), d, caps);
    let support = l.support();
    let domain: Vec<usize> = pg.port.keys().copied().collect();
    if let Err(e) = pg.check_port() {
        r.flags.port = false;
        r.diagnostics.push(e.to_string());
    }
    if domain != support {
        r.flags.port = false;
        r.diagnostics.push(format!("port domain {domain:?} is not the operator support {support:?}"));
    }
    let omega = ldpc_profile(code).omega;
    let mut load = vec![0usize; pg.graph.num_edges()];
    if r.flags.port {
        for (i, s) in code.generators().iter().enumerate() {
            let k = anticommute_set(s, l);
            if k.is_empty() {
                continue;
            }
            let targets: Vec<usize> = k.iter().map(|q| pg.port[q]).collect();
            match path_matching(&pg.graph, &targets, None) {
                Some(m) => {
                    r.matching_max_size = r.matching_max_size.max(m.len());
                    for e in m {
                        load[e] += 1;
                    }
                }
                None => {
                    r.flags.matchings = false;
                    r.diagnostics.push(format!("no path matching for check {i}"));
                }
            }
        }
    } else {
        r.flags.matchings = false;
    }
    r.matching_max_edge_load = load.into_iter().max().unwrap_or(0);
    let cap = caps.max_matching_size.unwrap_or(omega);
    r.flags.matching_size = r.matching_max_size <= cap;
    r.flags.edge_load = r.matching_max_edge_load <= caps.max_edge_load;
    if !r.flags.matching_size {
        r.diagnostics.push(format!("matching size {} exceeds cap {cap}", r.matching_max_size));
    }
    if !r.flags.edge_load {
        r.diagnostics.push(format!("matching edge load {} exceeds cap {}", r.matching_max_edge_load, caps.max_edge_load));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphkit::fundamental_cycle_basis;
    use crate::paulicode::{distance_bruteforce, fixtures, logical_basis, Distance};

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn matching_examples() {
        let path = MultiGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(path_matching(&path, &[], None), Some(vec![]));
        assert_eq!(path_matching(&path, &[0, 2], None), Some(vec![0, 1]));
        let tri = MultiGraph::from_edges(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(path_matching(&tri, &[0, 1, 2], None), None);
        assert_eq!(path_matching(&tri, &[0, 2], None), Some(vec![2]));
        assert_eq!(path_matching(&tri, &[0, 2], Some(&[0, 1])), Some(vec![0, 1]));
        assert_eq!(path_matching(&tri, &[0, 2], Some(&[0])), None);
    }

    #[test]
    fn four_two_two_single_edge() {
        let code = fixtures::four_two_two();
        let l = p("ZIZI");
        let g = MultiGraph::from_edges(2, &[(0, 1)]).unwrap();
        let pg = PortedGraph::new(g.clone(), BTreeMap::from([(0, 0), (2, 1)]), fundamental_cycle_basis(&g)).unwrap();
        let m = build_merged_code(&code, &l, &pg).unwrap();
        m.verify().unwrap();
        assert_eq!(m.vertex_checks.len(), 2);
        assert!(m.cycle_checks.is_empty());
        assert_eq!(m.deformed_checks[0].to_string(), "+XXXXX");
        assert_eq!(m.deformed_checks[1].to_string(), "+ZZZZI");
        assert_eq!(m.code().k(), code.k() - 1);
    }

    #[test]
    fn sign_goes_on_first_vertex() {
        let code = fixtures::four_two_two();
        let l = p("-ZIZI");
        let g = MultiGraph::from_edges(2, &[(0, 1)]).unwrap();
        let pg = PortedGraph::new(g.clone(), BTreeMap::from([(0, 0), (2, 1)]), fundamental_cycle_basis(&g)).unwrap();
        let m = build_merged_code(&code, &l, &pg).unwrap();
        m.verify().unwrap();
        assert!(m.vertex_checks[0].is_negative());
    }

    #[test]
    fn no_deformation_needed() {
        let code = StabilizerCode::new(3, vec![p("ZZI"), p("IZZ")]).unwrap();
        let l = p("ZZZ");
        let g = MultiGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let port = BTreeMap::from([(0, 0), (1, 1), (2, 2)]);
        let pg = PortedGraph::new(g.clone(), port, fundamental_cycle_basis(&g)).unwrap();
        let m = build_merged_code(&code, &l, &pg).unwrap();
        m.verify().unwrap();
        for (a, b) in m.deformed_checks.iter().zip(code.generators()) {
            assert_eq!(a, &b.extended(m.n_total()));
        }
    }

    #[test]
    fn precondition_errors() {
        let code = fixtures::four_two_two();
        let g = MultiGraph::from_edges(2, &[(0, 1)]).unwrap();
        let pg = PortedGraph::new(g.clone(), BTreeMap::from([(0, 0), (2, 1)]), fundamental_cycle_basis(&g)).unwrap();
        assert!(build_merged_code(&code, &p("ZIII"), &pg).is_err());
        assert!(build_merged_code(&code, &p("ZZII"), &pg).is_err());
        let bad = PortedGraph { port: BTreeMap::from([(0, 0), (2, 0)]), ..pg };
        assert!(bad.check_port().is_err());
    }

    #[test]
    fn steane_measurement_graph() {
        let code = fixtures::steane();
        let caps = Caps::for_measurement_graph(ldpc_profile(&code));
        let logicals = logical_basis(&code);
        for l in &logicals {
            let b = build_measurement_graph(&code, l, Ratio::from_integer(1), 5, &caps).unwrap();
            assert!(b.ported.graph.num_edges() <= b.edge_bound);
            let r = check_desiderata(&b.ported, &code, l, 3, &caps);
            assert!(r.pass(), "{:?}", r.diagnostics);
            let m = build_merged_code(&code, l, &b.ported).unwrap();
            m.verify().unwrap();
            assert_eq!(m.code().k(), 0);
            if m.n_total() <= 22 {
                assert_eq!(distance_bruteforce(&m.code(), 22).unwrap(), Distance::NoLogical);
            }
        }
    }

    #[test]
    fn disconnected_graph_fails() {
        let code = fixtures::four_two_two();
        let l = p("ZIZI");
        let g = MultiGraph::new(2);
        let pg = PortedGraph::new(g.clone(), BTreeMap::from([(0, 0), (2, 1)]), fundamental_cycle_basis(&g)).unwrap();
        let r = check_desiderata(&pg, &code, &l, 2, &Caps::default());
        assert!(!r.flags.connected && !r.pass());
    }
}
