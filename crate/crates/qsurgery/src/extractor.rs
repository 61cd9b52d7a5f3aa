//! Extractors, extractor-augmented blocks and bridges.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{derive_seed, expander_degree, rng_for, Caps};
use crate::error::{Error, Result};
use crate::graphkit::{build_expander_with, relative_expansion, CycleBasis, Expansion, MultiGraph};
use crate::paulicode::{ldpc_profile, PauliOperator, StabilizerCode};
use crate::surgery::{
    build_merged_code_with, graph_items, path_matching, thicken_pipeline, DesiderataReport, GraphEdge, MergedCode,
    PortedGraph,
};

/// Coarse edge class used for export and styling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeClass {
    Horizontal,
    Vertical,
    Chord,
    Bridge,
}

/// Extractor graph ported on a set of code qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractorGraph {
    /// Number of code qubits.
    pub n: usize,
    pub graph: MultiGraph,
    /// Code qubit to level-0 vertex.
    pub port: BTreeMap<usize, usize>,
    pub basis: CycleBasis,
    /// `E_i` for every code check.
    pub check_edge_sets: Vec<Vec<usize>>,
    /// Expansion parameter `t` the graph was built for.
    pub t: usize,
    pub levels: Vec<usize>,
    pub edge_class: Vec<EdgeClass>,
    pub edge_level: Vec<usize>,
    /// `ℓ (2Δ + δ + 1) n` summed over joined parts.
    pub edge_bound: usize,
    pub expander: Vec<Expansion>,
}

impl ExtractorGraph {
    pub fn port_vertices(&self) -> Vec<usize> {
        self.port.values().copied().collect()
    }

    pub fn ported(&self) -> PortedGraph {
        PortedGraph { graph: self.graph.clone(), port: self.port.clone(), basis: self.basis.clone() }
    }

    /// Max number of `E_i` sets containing one edge.
    pub fn edge_set_load(&self) -> usize {
        let mut load = vec![0usize; self.graph.num_edges()];
        for set in &self.check_edge_sets {
            for &e in set {
                load[e] += 1;
            }
        }
        load.into_iter().max().unwrap_or(0)
    }

    pub fn to_dot(&self) -> String {
        let owner: BTreeMap<usize, usize> = self.port.iter().map(|(&q, &v)| (v, q)).collect();
        self.graph.to_dot(
            "extractor",
            &|v| match owner.get(&v) {
                Some(q) => format!("shape=box, label=\"q{q}\""),
                None => String::new(),
            },
            &|e| {
                let (style, color) = match self.edge_class[e] {
                    EdgeClass::Horizontal => ("solid", "black"),
                    EdgeClass::Vertical => ("dashed", "gray"),
                    EdgeClass::Chord => ("dotted", "blue"),
                    EdgeClass::Bridge => ("bold", "red"),
                };
                format!("style={style}, color={color}, level={}", self.edge_level[e])
            },
        )
    }
}

/// Extractor on all code qubits.
pub fn build_extractor(code: &StabilizerCode, beta: Ratio<u64>, seed: u64, caps: &Caps) -> Result<ExtractorGraph> {
    build_partial_extractor(code, &(0..code.n()).collect::<Vec<_>>(), beta, seed, caps)
}

/// Extractor ported on `t_set` only: one cycle through each check's ported
/// support, an expander overlay, then decongestion, thickening and
/// cellulation.
pub fn build_partial_extractor(
    code: &StabilizerCode,
    t_set: &[usize],
    beta: Ratio<u64>,
    seed: u64,
    caps: &Caps,
) -> Result<ExtractorGraph> {
    let mut t_sorted = t_set.to_vec();
    t_sorted.sort_unstable();
    t_sorted.dedup();
    if t_sorted.is_empty() {
        return Err(Error::invalid("extractor needs at least one ported qubit"));
    }
    if let Some(&q) = t_sorted.iter().find(|&&q| q >= code.n()) {
        return Err(Error::invalid(format!("qubit {q} out of range")));
    }
    let index: BTreeMap<usize, usize> = t_sorted.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let mut base = MultiGraph::new(t_sorted.len());
    let mut check_cycles = Vec::with_capacity(code.generators().len());
    for s in code.generators() {
        let verts: Vec<usize> = s.support().iter().filter_map(|q| index.get(q).copied()).collect();
        let mut cyc = Vec::new();
        if verts.len() == 2 {
            cyc.push(base.add_edge(verts[0], verts[1]));
            cyc.push(base.add_edge(verts[0], verts[1]));
        } else if verts.len() > 2 {
            for i in 0..verts.len() {
                cyc.push(base.add_edge(verts[i], verts[(i + 1) % verts.len()]));
            }
        }
        check_cycles.push(cyc);
    }
    let profile = ldpc_profile(code);
    let degree = expander_degree(profile);
    let exp = build_expander_with(
        t_sorted.len(),
        beta,
        degree,
        derive_seed(seed, "extractor-expander"),
        caps.exact_cheeger,
        caps.retries,
    )?;
    for &(a, b) in exp.graph.edges() {
        if !base.has_edge(a, b) {
            base.add_edge(a, b);
        }
    }
    let p = thicken_pipeline(&base, beta, seed, caps, "extractor-decongest")?;
    let port: BTreeMap<usize, usize> = t_sorted.iter().enumerate().map(|(i, &q)| (q, p.vertex(i, 0))).collect();
    let check_edge_sets = check_cycles
        .iter()
        .map(|c| {
            let mut set: Vec<usize> = (0..p.levels).flat_map(|l| c.iter().map(move |&e| (l, e))).map(|(l, e)| p.horizontal(e, l)).collect();
            set.sort_unstable();
            set
        })
        .collect();
    let (edge_class, edge_level) = p
        .edge_origin
        .iter()
        .map(|o| match *o {
            GraphEdge::Horizontal { level, .. } => (EdgeClass::Horizontal, level),
            GraphEdge::Vertical { level, .. } => (EdgeClass::Vertical, level),
            GraphEdge::Chord { level } => (EdgeClass::Chord, level),
        })
        .unzip();
    Ok(ExtractorGraph {
        n: code.n(),
        graph: p.graph,
        port,
        basis: p.basis,
        check_edge_sets,
        t: t_sorted.len().min(code.n()),
        levels: vec![p.levels],
        edge_class,
        edge_level,
        edge_bound: p.levels * (2 * profile.delta + degree + 1) * code.n(),
        expander: vec![exp.certificate],
    })
}

/// All nonempty even subsets of `items`.
fn even_subsets(items: &[usize]) -> Vec<Vec<usize>> {
    let w = items.len();
    (1u64..(1u64 << w))
        .filter(|m| m.count_ones() % 2 == 0)
        .map(|m| (0..w).filter(|&i| m >> i & 1 == 1).map(|i| items[i]).collect())
        .collect()
}

/// Evaluates the extractor desiderata with expansion parameter `d`.
pub fn check_extractor_desiderata(x: &ExtractorGraph, code: &StabilizerCode, d: usize, caps: &Caps) -> DesiderataReport {
    let mut r = graph_items(&x.graph, &x.basis, &x.port_vertices(), d, caps);
    if code.n() != x.n || x.check_edge_sets.len() != code.generators().len() {
        r.flags.port = false;
        r.diagnostics.push("extractor was built for a different code".into());
        return r;
    }
    let omega = ldpc_profile(code).omega;
    for (i, s) in code.generators().iter().enumerate() {
        let ported: Vec<usize> = s.support().iter().filter_map(|q| x.port.get(q).copied()).collect();
        for k in even_subsets(&ported) {
            match path_matching(&x.graph, &k, Some(&x.check_edge_sets[i])) {
                Some(m) => r.matching_max_size = r.matching_max_size.max(m.len()),
                None => {
                    r.flags.matchings = false;
                    r.diagnostics.push(format!("check {i}: no matching inside its edge set for vertices {k:?}"));
                    break;
                }
            }
        }
    }
    r.matching_max_edge_load = x.edge_set_load();
    let cap = caps.max_matching_size.unwrap_or(omega);
    r.flags.matching_size = r.matching_max_size <= cap;
    r.flags.edge_load = r.matching_max_edge_load <= caps.max_edge_load;
    if !r.flags.matching_size {
        r.diagnostics.push(format!("matching size {} exceeds cap {cap}", r.matching_max_size));
    }
    if !r.flags.edge_load {
        r.diagnostics.push(format!("edge-set load {} exceeds cap {}", r.matching_max_edge_load, caps.max_edge_load));
    }
    r
}

/// Optional coupling between a code-side node and an extractor-side node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Data qubit `qubit` to vertex check `H_X[vertex]`.
    Port { qubit: usize, vertex: usize },
    /// Check `H[S_check]` to edge qubit `Q_X[edge]`.
    CheckEdge { check: usize, edge: usize },
}

/// Fixed-connectivity inventory of a code plus its extractor.
///
/// Data qubits: code qubits `0..n`, then `Q_X[e]` at `n + e`. Checks: `H[S_i]`
/// at `i`, then `H_X[v]`, then `H_X[C]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EacBlock {
    pub code: StabilizerCode,
    pub xgraph: ExtractorGraph,
    pub data_qubits: usize,
    pub check_qubits: usize,
    /// Fixed check-to-data adjacency.
    pub adjacency: Vec<Vec<usize>>,
    pub couplings: Vec<Coupling>,
}

impl EacBlock {
    pub fn vertex_check(&self, v: usize) -> usize {
        self.code.generators().len() + v
    }

    pub fn cycle_check(&self, c: usize) -> usize {
        self.code.generators().len() + self.xgraph.graph.num_vertices() + c
    }

    pub fn total_qubits(&self) -> usize {
        self.data_qubits + self.check_qubits
    }

    /// Degree of every check and data node counting all couplings.
    pub fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let mut check = self.adjacency.iter().map(|a| a.len()).collect::<Vec<_>>();
        let mut data = vec![0usize; self.data_qubits];
        for a in &self.adjacency {
            for &q in a {
                data[q] += 1;
            }
        }
        let n = self.code.n();
        for c in &self.couplings {
            match *c {
                Coupling::Port { qubit, vertex } => {
                    check[self.vertex_check(vertex)] += 1;
                    data[qubit] += 1;
                }
                Coupling::CheckEdge { check: i, edge } => {
                    check[i] += 1;
                    data[n + edge] += 1;
                }
            }
        }
        (check, data)
    }
}

/// Tanner inventory of a code with its extractor.
pub fn build_eac_tanner(code: &StabilizerCode, x: &ExtractorGraph) -> Result<EacBlock> {
    if code.n() != x.n || x.check_edge_sets.len() != code.generators().len() {
        return Err(Error::invalid("extractor was built for a different code"));
    }
    let n = code.n();
    let g = &x.graph;
    let mut adjacency: Vec<Vec<usize>> = code.generators().iter().map(|s| s.support()).collect();
    for v in 0..g.num_vertices() {
        let mut a: Vec<usize> = g.neighbors(v).iter().map(|&(_, e)| n + e).collect();
        a.sort_unstable();
        adjacency.push(a);
    }
    for c in &x.basis.cycles {
        adjacency.push(c.iter().map(|&e| n + e).collect());
    }
    let mut couplings: Vec<Coupling> = x.port.iter().map(|(&q, &v)| Coupling::Port { qubit: q, vertex: v }).collect();
    for (i, set) in x.check_edge_sets.iter().enumerate() {
        couplings.extend(set.iter().map(|&e| Coupling::CheckEdge { check: i, edge: e }));
    }
    Ok(EacBlock {
        code: code.clone(),
        xgraph: x.clone(),
        data_qubits: n + g.num_edges(),
        check_qubits: code.generators().len() + g.num_vertices() + x.basis.len(),
        adjacency,
        couplings,
    })
}

/// Merged code for one operator plus the couplings it switches on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instantiation {
    pub merged: MergedCode,
    pub active: Vec<Coupling>,
}

/// Measures `l` on a block by activating couplings; matchings stay inside
/// the recorded edge sets.
pub fn instantiate_measurement(block: &EacBlock, l: &PauliOperator) -> Result<Instantiation> {
    instantiate_on(&block.code, &block.xgraph, l)
}

/// Same as [`instantiate_measurement`] on a bare extractor graph.
pub fn instantiate_on(code: &StabilizerCode, x: &ExtractorGraph, l: &PauliOperator) -> Result<Instantiation> {
    if l.n() != code.n() {
        return Err(Error::invalid("operator size does not match the code"));
    }
    if !code.is_logical(l) {
        return Err(Error::invalid(format!("{l} is not a nontrivial logical operator")));
    }
    let support = l.support();
    if let Some(q) = support.iter().find(|q| !x.port.contains_key(q)) {
        return Err(Error::Capability(format!("qubit {q} is outside the extractor port")));
    }
    let pg = x.ported().restricted(&support)?;
    let merged = build_merged_code_with(code, l, &pg, |i, targets| {
        path_matching(&x.graph, targets, Some(&x.check_edge_sets[i]))
    })?;
    let mut active: Vec<Coupling> = support.iter().map(|&q| Coupling::Port { qubit: q, vertex: x.port[&q] }).collect();
    for (i, m) in merged.matchings.iter().enumerate() {
        active.extend(m.iter().map(|&e| Coupling::CheckEdge { check: i, edge: e }));
    }
    Ok(Instantiation { merged, active })
}

/// Differences between two instantiations on one extractor.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralDiff {
    /// Internal differences; must be empty.
    pub skeleton: Vec<String>,
    /// Checks whose coupling part differs.
    pub coupling_checks: Vec<usize>,
}

impl StructuralDiff {
    pub fn only_couplings(&self) -> bool {
        self.skeleton.is_empty()
    }
}

/// Compares two merged codes on one extractor. Allowed differences: the
/// code-qubit part (and sign) of vertex checks and the edge part of deformed
/// checks.
pub fn structural_diff(a: &MergedCode, b: &MergedCode) -> StructuralDiff {
    let mut d = StructuralDiff::default();
    if a.graph != b.graph {
        d.skeleton.push("graphs differ".into());
    }
    if a.n_base() != b.n_base() || a.n_total() != b.n_total() {
        d.skeleton.push("qubit counts differ".into());
        return d;
    }
    let n = a.n_base();
    let m = a.graph.num_edges();
    if a.cycle_checks != b.cycle_checks {
        d.skeleton.push("cycle checks differ".into());
    }
    if a.vertex_checks.len() != b.vertex_checks.len() || a.deformed_checks.len() != b.deformed_checks.len() {
        d.skeleton.push("check counts differ".into());
        return d;
    }
    for (v, (x, y)) in a.vertex_checks.iter().zip(&b.vertex_checks).enumerate() {
        if x.restrict(n, m).unsigned() != y.restrict(n, m).unsigned() {
            d.skeleton.push(format!("vertex check {v} differs on edge qubits"));
        }
        if x.restrict(0, n) != y.restrict(0, n) {
            d.coupling_checks.push(v);
        }
    }
    let off = a.vertex_checks.len() + a.cycle_checks.len();
    for (i, (x, y)) in a.deformed_checks.iter().zip(&b.deformed_checks).enumerate() {
        if x.restrict(0, n) != y.restrict(0, n) {
            d.skeleton.push(format!("deformed check {i} differs on code qubits"));
        }
        if x.restrict(n, m).unsigned() != y.restrict(n, m).unsigned() {
            d.coupling_checks.push(off + i);
        }
    }
    d
}

/// Edge of a bridge cycle relative to the two joined systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BridgeEdge {
    Left(usize),
    Right(usize),
    Bridge(usize),
}

/// `d` vertex-disjoint edges between two port sets with the cycles they close.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bridge {
    /// `(left vertex, right vertex)` per bridge edge.
    pub pairs: Vec<(usize, usize)>,
    pub cycles: Vec<Vec<BridgeEdge>>,
    /// Congestion and max length of the joined basis.
    pub rho: usize,
    pub max_length: usize,
    /// Bounds the construction was held to.
    pub rho_bound: usize,
    pub length_bound: usize,
    pub expansion: Option<Expansion>,
}

impl Bridge {
    /// One data qubit per edge and one check per new cycle.
    pub fn qubits(&self) -> (usize, usize) {
        (self.pairs.len(), self.cycles.len())
    }
}

/// Walk of `d` port vertices where consecutive vertices are joined by a
/// short path; prefers a simple path inside the port-induced subgraph.
fn port_walk(x: &ExtractorGraph, d: usize, rng: &mut impl Rng) -> Option<(Vec<usize>, Vec<Vec<usize>>)> {
    let ports = x.port_vertices();
    if d == 0 || d > ports.len() {
        return None;
    }
    let is_port: BTreeSet<usize> = ports.iter().copied().collect();
    let allowed: Vec<bool> =
        x.graph.edges().iter().map(|&(u, v)| is_port.contains(&u) && is_port.contains(&v)).collect();
    // seeded DFS for a simple path of d vertices within the port subgraph
    for _ in 0..32 {
        let start = *ports.choose(rng)?;
        let mut path = vec![start];
        let mut edges: Vec<Vec<usize>> = Vec::new();
        let mut on_path: BTreeSet<usize> = BTreeSet::from([start]);
        let mut stuck = 0;
        while path.len() < d && stuck < 4 * d {
            let at = *path.last().expect("nonempty");
            let mut options: Vec<(usize, usize)> = x
                .graph
                .neighbors(at)
                .iter()
                .copied()
                .filter(|&(w, e)| allowed[e] && !on_path.contains(&w))
                .collect();
            options.shuffle(rng);
            match options.first() {
                Some(&(w, e)) => {
                    path.push(w);
                    edges.push(vec![e]);
                    on_path.insert(w);
                }
                None if path.len() > 1 => {
                    let w = path.pop().expect("nonempty");
                    on_path.remove(&w);
                    edges.pop();
                    stuck += 1;
                }
                None => break,
            }
        }
        if path.len() == d {
            return Some((path, edges));
        }
    }
    // fall back to a BFS order over the whole graph with shortest connecting paths
    let start = *ports.choose(rng)?;
    let tree = x.graph.bfs_tree(start, None);
    let picked: Vec<usize> = tree.order.iter().copied().filter(|v| is_port.contains(v)).take(d).collect();
    if picked.len() < d {
        return None;
    }
    let edges = picked.windows(2).map(|w| x.graph.shortest_path(w[0], w[1], None).expect("connected")).collect();
    Some((picked, edges))
}

/// Joins systems into one graph. `qubit_offset` and `check_offset` place each
/// part in the joined code; parts sharing check indices get merged edge sets.
pub(crate) fn join_systems(
    parts: &[&ExtractorGraph],
    qubit_offset: &[usize],
    check_offset: &[usize],
    n: usize,
    num_checks: usize,
    links: &[(usize, usize, &Bridge)],
) -> ExtractorGraph {
    let mut graph = MultiGraph::new(0);
    let mut voff = Vec::new();
    let mut eoff = Vec::new();
    let mut port = BTreeMap::new();
    let mut sets = vec![Vec::new(); num_checks];
    let mut cycles = Vec::new();
    let mut edge_class = Vec::new();
    let mut edge_level = Vec::new();
    let mut levels = Vec::new();
    let mut expander = Vec::new();
    let mut edge_bound = 0;
    for (k, x) in parts.iter().enumerate() {
        let vo = graph.num_vertices();
        let eo = graph.num_edges();
        for _ in 0..x.graph.num_vertices() {
            graph.add_vertex();
        }
        for &(u, v) in x.graph.edges() {
            graph.add_edge(u + vo, v + vo);
        }
        for (&q, &v) in &x.port {
            port.insert(q + qubit_offset[k], v + vo);
        }
        for (i, set) in x.check_edge_sets.iter().enumerate() {
            sets[i + check_offset[k]].extend(set.iter().map(|&e| e + eo));
        }
        cycles.extend(x.basis.cycles.iter().map(|c| c.iter().map(|&e| e + eo).collect::<Vec<_>>()));
        edge_class.extend(x.edge_class.iter().copied());
        edge_level.extend(x.edge_level.iter().copied());
        levels.extend(x.levels.iter().copied());
        expander.extend(x.expander.iter().copied());
        edge_bound += x.edge_bound;
        voff.push(vo);
        eoff.push(eo);
    }
    for &(a, b, bridge) in links {
        let mut ids = Vec::new();
        for &(u, v) in &bridge.pairs {
            ids.push(graph.add_edge(u + voff[a], v + voff[b]));
            edge_class.push(EdgeClass::Bridge);
            edge_level.push(0);
        }
        for c in &bridge.cycles {
            cycles.push(
                c.iter()
                    .map(|be| match *be {
                        BridgeEdge::Left(e) => e + eoff[a],
                        BridgeEdge::Right(e) => e + eoff[b],
                        BridgeEdge::Bridge(i) => ids[i],
                    })
                    .collect(),
            );
        }
    }
    for s in sets.iter_mut() {
        s.sort_unstable();
        s.dedup();
    }
    let t = parts.iter().map(|x| x.t).min().unwrap_or(0);
    let t = links.iter().map(|l| l.2.pairs.len()).fold(t, usize::min);
    ExtractorGraph {
        n,
        basis: CycleBasis::new(graph.num_edges(), cycles),
        graph,
        port,
        check_edge_sets: sets,
        t,
        levels,
        edge_class,
        edge_level,
        edge_bound,
        expander,
    }
}

fn make_bridge(
    x1: &ExtractorGraph,
    x2: &ExtractorGraph,
    d: usize,
    seed: u64,
    caps: &Caps,
    join: &dyn Fn(&Bridge) -> ExtractorGraph,
) -> Result<(ExtractorGraph, Bridge)> {
    let p1 = x1.port.len();
    let p2 = x2.port.len();
    if d == 0 || d > p1.min(p2) {
        return Err(Error::invalid(format!("bridge size {d} must be between 1 and min({p1}, {p2})")));
    }
    let rho_bound = x1.basis.rho.max(x2.basis.rho) + 2;
    let length_bound = x1.basis.max_length.max(x2.basis.max_length).max(8);
    let mut rng = rng_for(seed, "bridge");
    let mut last = String::new();
    for _ in 0..caps.retries.max(1) {
        let (Some((a, pa)), Some((b, pb))) = (port_walk(x1, d, &mut rng), port_walk(x2, d, &mut rng)) else {
            return Err(Error::invalid("port sets too small for the bridge"));
        };
        let pairs: Vec<(usize, usize)> = a.iter().copied().zip(b.iter().copied()).collect();
        let cycles: Vec<Vec<BridgeEdge>> = (0..d.saturating_sub(1))
            .map(|j| {
                let mut c = vec![BridgeEdge::Bridge(j), BridgeEdge::Bridge(j + 1)];
                c.extend(pa[j].iter().map(|&e| BridgeEdge::Left(e)));
                c.extend(pb[j].iter().map(|&e| BridgeEdge::Right(e)));
                c
            })
            .collect();
        let mut bridge = Bridge {
            pairs,
            cycles,
            rho: 0,
            max_length: 0,
            rho_bound,
            length_bound,
            expansion: None,
        };
        let joined = join(&bridge);
        let mut basis = joined.basis.clone();
        basis.recount();
        bridge.rho = basis.rho;
        bridge.max_length = basis.max_length;
        if basis.rho <= rho_bound && basis.max_length <= length_bound && basis.validate(&joined.graph).is_ok() {
            let t = x1.t.min(x2.t).min(d);
            bridge.expansion = relative_expansion(&joined.graph, &joined.port_vertices(), t, caps.exact_cheeger).ok();
            return Ok((joined, bridge));
        }
        let bad: Vec<usize> = joined
            .basis
            .cycles
            .iter()
            .enumerate()
            .filter(|(_, c)| c.len() > length_bound)
            .map(|(i, _)| i)
            .collect();
        last = format!("congestion {} (bound {rho_bound}), long cycles {bad:?}", basis.rho);
    }
    Err(Error::BudgetExhausted(format!("bridge construction failed after {} attempts: {last}", caps.retries)))
}

/// Bridges extractors of two codes into an extractor of their union; the
/// second code's qubits and checks follow the first's.
pub fn bridge_extractors(
    x1: &ExtractorGraph,
    x2: &ExtractorGraph,
    d: usize,
    seed: u64,
    caps: &Caps,
) -> Result<(ExtractorGraph, Bridge)> {
    let c1 = x1.check_edge_sets.len();
    let c2 = x2.check_edge_sets.len();
    make_bridge(x1, x2, d, seed, caps, &|b| {
        join_systems(&[x1, x2], &[0, x1.n], &[0, c1], x1.n + x2.n, c1 + c2, &[(0, 1, b)])
    })
}

/// Bridges two partial extractors of the same code ported on disjoint sets.
/// Edge sets of a check are merged, so an operator whose deformation needs a
/// matching across the two sides has none.
pub fn bridge_partial_extractors(
    x1: &ExtractorGraph,
    x2: &ExtractorGraph,
    d: usize,
    seed: u64,
    caps: &Caps,
) -> Result<(ExtractorGraph, Bridge)> {
    if x1.n != x2.n || x1.check_edge_sets.len() != x2.check_edge_sets.len() {
        return Err(Error::invalid("partial extractors belong to different codes"));
    }
    if x1.port.keys().any(|q| x2.port.contains_key(q)) {
        return Err(Error::invalid("partial extractor ports overlap"));
    }
    let c = x1.check_edge_sets.len();
    make_bridge(x1, x2, d, seed, caps, &|b| join_systems(&[x1, x2], &[0, 0], &[0, 0], x1.n, c, &[(0, 1, b)]))
}

/// Checks whose support meets both port sets of a partial bridge; their
/// matchings cannot cross the bridge.
pub fn straddling_checks(code: &StabilizerCode, x1: &ExtractorGraph, x2: &ExtractorGraph) -> Vec<usize> {
    code.generators()
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            let sup = s.support();
            sup.iter().any(|q| x1.port.contains_key(q)) && sup.iter().any(|q| x2.port.contains_key(q))
        })
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paulicode::{fixtures, logical_basis};

    fn caps_for(code: &StabilizerCode) -> Caps {
        Caps::for_extractor(ldpc_profile(code))
    }

    #[test]
    fn four_two_two_extractor() {
        let code = fixtures::four_two_two();
        let caps = caps_for(&code);
        let x = build_extractor(&code, Ratio::from_integer(1), 1, &caps).unwrap();
        assert!(x.graph.num_edges() <= x.edge_bound);
        let r = check_extractor_desiderata(&x, &code, 2, &caps);
        assert!(r.pass(), "{:?}", r.diagnostics);
        let block = build_eac_tanner(&code, &x).unwrap();
        assert_eq!(block.data_qubits, 4 + x.graph.num_edges());
        assert_eq!(block.check_qubits, 2 + x.graph.num_vertices() + x.basis.len());
    }

    #[test]
    fn digon_for_weight_two_check() {
        let code = fixtures::repetition2();
        let x = build_extractor(&code, Ratio::from_integer(1), 0, &Caps::default()).unwrap();
        let set = &x.check_edge_sets[0];
        let level0: Vec<usize> = set.iter().copied().filter(|&e| x.edge_level[e] == 0).collect();
        assert_eq!(level0.len(), 2);
        assert_eq!(x.graph.edge(level0[0]), x.graph.edge(level0[1]));
    }

    #[test]
    fn removed_edge_set_fails() {
        let code = fixtures::four_two_two();
        let caps = caps_for(&code);
        let mut x = build_extractor(&code, Ratio::from_integer(1), 1, &caps).unwrap();
        x.check_edge_sets[0].clear();
        let r = check_extractor_desiderata(&x, &code, 2, &caps);
        assert!(!r.flags.matchings);
    }

    #[test]
    fn uniform_instantiation() {
        let code = fixtures::four_two_two();
        let caps = caps_for(&code);
        let x = build_extractor(&code, Ratio::from_integer(1), 2, &caps).unwrap();
        let block = build_eac_tanner(&code, &x).unwrap();
        let ls = logical_basis(&code);
        let a = instantiate_measurement(&block, &ls[0]).unwrap();
        let b = instantiate_measurement(&block, &ls[1]).unwrap();
        a.merged.verify().unwrap();
        b.merged.verify().unwrap();
        let diff = structural_diff(&a.merged, &b.merged);
        assert!(diff.only_couplings(), "{:?}", diff.skeleton);
        assert!(!diff.coupling_checks.is_empty());
        assert_ne!(a.active, b.active);
        let s = code.generators()[0].clone();
        assert!(instantiate_measurement(&block, &s).is_err());
    }

    #[test]
    fn tanner_degrees() {
        let code = fixtures::steane();
        let caps = caps_for(&code);
        let x = build_extractor(&code, Ratio::from_integer(1), 3, &caps).unwrap();
        let block = build_eac_tanner(&code, &x).unwrap();
        let (check, _) = block.degrees();
        let ported: BTreeSet<usize> = x.port.values().copied().collect();
        for v in 0..x.graph.num_vertices() {
            assert_eq!(check[block.vertex_check(v)], x.graph.degree(v) + usize::from(ported.contains(&v)));
        }
    }

    #[test]
    fn small_bridges() {
        let e = ExtractorGraph {
            n: 1,
            graph: MultiGraph::from_edges(2, &[(0, 1)]).unwrap(),
            port: BTreeMap::from([(0, 0)]),
            basis: CycleBasis::empty(1),
            check_edge_sets: vec![],
            t: 1,
            levels: vec![1],
            edge_class: vec![EdgeClass::Horizontal],
            edge_level: vec![0],
            edge_bound: 1,
            expander: vec![],
        };
        let (j, b) = bridge_extractors(&e, &e, 1, 0, &Caps::default()).unwrap();
        assert_eq!(b.pairs.len(), 1);
        assert!(b.cycles.is_empty());
        assert_eq!(j.graph.num_edges(), 3);

        let sq = MultiGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let c = ExtractorGraph {
            n: 4,
            basis: CycleBasis::new(4, vec![vec![0, 1, 2, 3]]),
            graph: sq,
            port: (0..4).map(|q| (q, q)).collect(),
            check_edge_sets: vec![],
            t: 2,
            levels: vec![1],
            edge_class: vec![EdgeClass::Horizontal; 4],
            edge_level: vec![0; 4],
            edge_bound: 4,
            expander: vec![],
        };
        let (j, b) = bridge_extractors(&c, &c, 2, 0, &Caps::default()).unwrap();
        assert_eq!(b.cycles.len(), 1);
        assert!(b.max_length <= 8);
        j.basis.validate(&j.graph).unwrap();
        assert!(b.expansion.unwrap().beta.at_least(Ratio::from_integer(1)));
    }
}
