//! Architectures of extractor-augmented blocks joined by bridges.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::config::{derive_seed, Caps};
use crate::error::{Error, Result};
use crate::extractor::{
    bridge_extractors, build_eac_tanner, build_extractor, check_extractor_desiderata, instantiate_on, join_systems, Bridge, EacBlock, ExtractorGraph,
    Instantiation,
};
use crate::graphkit::MultiGraph;
use crate::paulicode::{PauliOperator, StabilizerCode};
use crate::surgery::DesiderataReport;

/// Graph on blocks; an edge is a bridge placement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockMap {
    pub graph: MultiGraph,
    pub degree_cap: usize,
}

impl BlockMap {
    pub fn new(blocks: usize, edges: &[(usize, usize)], degree_cap: usize) -> Result<Self> {
        let graph = MultiGraph::from_edges(blocks, edges)?;
        for &(a, b) in edges {
            if graph.edges_between(a, b).len() > 1 {
                return Err(Error::invalid(format!("block map repeats edge ({a}, {b})")));
            }
        }
        if graph.max_degree() > degree_cap {
            return Err(Error::invalid(format!("block degree {} exceeds cap {degree_cap}", graph.max_degree())));
        }
        if blocks > 0 && !graph.is_connected() {
            log::warn!("block map is disconnected; cross-component measurements are impossible");
        }
        Ok(BlockMap { graph, degree_cap })
    }

    pub fn line(blocks: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..blocks).map(|b| (b - 1, b)).collect();
        BlockMap::new(blocks, &edges, 2).expect("line is simple")
    }

    /// Cycle on `blocks ≥ 3` blocks; fewer blocks give a line.
    pub fn cycle(blocks: usize) -> Self {
        if blocks < 3 {
            return BlockMap::line(blocks);
        }
        let edges: Vec<(usize, usize)> = (0..blocks).map(|b| (b, (b + 1) % blocks)).collect();
        BlockMap::new(blocks, &edges, 2).expect("cycle is simple")
    }

    pub fn num_blocks(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.graph.has_edge(a, b)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Repr {
            blocks: usize,
            edges: Vec<(usize, usize)>,
            #[serde(default = "default_cap")]
            degree_cap: usize,
        }
        fn default_cap() -> usize {
            4
        }
        let r: Repr = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
        BlockMap::new(r.blocks, &r.edges, r.degree_cap)
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "blocks": self.num_blocks(),
            "edges": self.graph.edges(),
            "degree_cap": self.degree_cap,
        })
        .to_string()
    }

    pub fn to_dot(&self) -> String {
        self.graph.to_dot("blockmap", &|_| String::new(), &|_| String::new())
    }

    /// Greedy maximal matching in edge order; unmatched blocks are singletons.
    pub fn pair_partition(&self) -> Vec<Vec<usize>> {
        let mut used = vec![false; self.num_blocks()];
        let mut parts = Vec::new();
        for &(a, b) in self.graph.edges() {
            if !used[a] && !used[b] {
                used[a] = true;
                used[b] = true;
                parts.push(vec![a.min(b), a.max(b)]);
            }
        }
        parts.extend((0..self.num_blocks()).filter(|&v| !used[v]).map(|v| vec![v]));
        parts.sort();
        parts
    }

    /// BFS spanning tree of the subgraph induced by `part`, rooted at its
    /// lowest block; `None` if the part is disconnected.
    pub fn spanning_tree(&self, part: &[usize]) -> Option<Vec<usize>> {
        let set: BTreeSet<usize> = part.iter().copied().collect();
        let root = *set.iter().next()?;
        let allowed: Vec<bool> = self.graph.edges().iter().map(|&(a, b)| set.contains(&a) && set.contains(&b)).collect();
        let tree = self.graph.bfs_tree(root, Some(&allowed));
        if set.iter().any(|&v| !tree.reaches(v)) {
            return None;
        }
        let mut edges = tree.tree_edges();
        edges.sort_unstable();
        Some(edges)
    }
}

/// `count` copies of one EAC block built on `code`.
pub fn uniform_blocks(code: &StabilizerCode, count: usize, beta: Ratio<u64>, seed: u64, caps: &Caps) -> Result<Vec<EacBlock>> {
    let x = build_extractor(code, beta, seed, caps)?;
    let block = build_eac_tanner(code, &x)?;
    Ok(vec![block; count])
}

/// Derived counts of an architecture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchParams {
    pub blocks: usize,
    /// Computational logical qubits: one per block is the ancilla.
    pub workspace: usize,
    pub logical_qubits: usize,
    pub block_qubits: usize,
    pub bridge_data: usize,
    pub bridge_checks: usize,
    pub total_qubits: usize,
    /// Bridges per block `R / B`.
    pub alpha: f64,
    /// Max bridges on one block.
    pub max_bridges_per_block: usize,
    /// Block size over code length, when uniform.
    pub lambda: Option<f64>,
    pub d: usize,
    /// `B (λn + α(2d − 1))` in the uniform case.
    pub formula_total: Option<f64>,
}

/// Blocks, block map and one bridge per map edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub blocks: Vec<EacBlock>,
    pub map: BlockMap,
    /// Bridge for map edge `i`, oriented from the lower to the higher block.
    pub bridges: Vec<Bridge>,
    pub d: usize,
    pub params: ArchParams,
}

/// Builds one bridge per block-map edge.
pub fn assemble(blocks: Vec<EacBlock>, map: BlockMap, d: usize, seed: u64, caps: &Caps) -> Result<Architecture> {
    if blocks.len() != map.num_blocks() {
        return Err(Error::invalid(format!("{} blocks for a map on {} blocks", blocks.len(), map.num_blocks())));
    }
    let mut bridges = Vec::with_capacity(map.graph.num_edges());
    for (i, &(a, b)) in map.graph.edges().iter().enumerate() {
        let (lo, hi) = (a.min(b), a.max(b));
        let (joined, bridge) =
            bridge_extractors(&blocks[lo].xgraph, &blocks[hi].xgraph, d, derive_seed(seed, &format!("bridge-{i}")), caps)
                .map_err(|e| Error::invalid(format!("bridge on map edge {i} ({lo}, {hi}): {e}")))?;
        let union = blocks[lo].code.direct_sum(&blocks[hi].code);
        let report = check_extractor_desiderata(&joined, &union, joined.t, caps);
        if !report.flags.basis || !report.flags.connected || !report.flags.matchings {
            return Err(Error::invalid(format!("bridged system on edge {i} fails: {:?}", report.diagnostics)));
        }
        bridges.push(bridge);
    }
    let mut arch = Architecture { blocks, map, bridges, d, params: empty_params() };
    arch.params = parameters(&arch);
    Ok(arch)
}

fn empty_params() -> ArchParams {
    ArchParams {
        blocks: 0,
        workspace: 0,
        logical_qubits: 0,
        block_qubits: 0,
        bridge_data: 0,
        bridge_checks: 0,
        total_qubits: 0,
        alpha: 0.0,
        max_bridges_per_block: 0,
        lambda: None,
        d: 0,
        formula_total: None,
    }
}

/// Counts from the inventories, plus the closed formula when uniform.
pub fn parameters(a: &Architecture) -> ArchParams {
    let b = a.blocks.len();
    let block_qubits: usize = a.blocks.iter().map(|x| x.total_qubits()).sum();
    let (bridge_data, bridge_checks) =
        a.bridges.iter().map(|x| x.qubits()).fold((0, 0), |(d, c), (x, y)| (d + x, c + y));
    let logical_qubits: usize = a.blocks.iter().map(|x| x.code.k()).sum();
    let r = a.bridges.len();
    let alpha = if b == 0 { 0.0 } else { r as f64 / b as f64 };
    let uniform = b > 0
        && a.blocks.iter().all(|x| x.code == a.blocks[0].code && x.total_qubits() == a.blocks[0].total_qubits());
    let lambda = uniform.then(|| a.blocks[0].total_qubits() as f64 / a.blocks[0].code.n() as f64);
    let formula_total = lambda
        .map(|l| b as f64 * (l * a.blocks[0].code.n() as f64 + alpha * (2.0 * a.d as f64 - 1.0)));
    ArchParams {
        blocks: b,
        workspace: a.blocks.iter().map(|x| x.code.k().saturating_sub(1)).sum(),
        logical_qubits,
        block_qubits,
        bridge_data,
        bridge_checks,
        total_qubits: block_qubits + bridge_data + bridge_checks,
        alpha,
        max_bridges_per_block: a.map.graph.max_degree(),
        lambda,
        d: a.d,
        formula_total,
    }
}

/// Activation of one part of a parallel measurement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartPlan {
    pub blocks: Vec<usize>,
    /// Map edges whose bridges are switched on.
    pub active_bridges: Vec<usize>,
    pub operator: PauliOperator,
    pub instantiation: Instantiation,
}

/// Activation plan for simultaneous measurements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelPlan {
    pub parts: Vec<PartPlan>,
    pub inactive_bridges: Vec<usize>,
}

/// Qubit offset of each block in the architecture's concatenated code.
pub fn block_offsets(a: &Architecture) -> Vec<usize> {
    let mut off = Vec::with_capacity(a.blocks.len());
    let mut acc = 0;
    for b in &a.blocks {
        off.push(acc);
        acc += b.code.n();
    }
    off
}

/// Joined extractor and code of a connected set of blocks along the given
/// map edges.
pub fn joined_system(a: &Architecture, blocks: &[usize], edges: &[usize]) -> (ExtractorGraph, StabilizerCode) {
    let local: BTreeMap<usize, usize> = blocks.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let parts: Vec<&ExtractorGraph> = blocks.iter().map(|&b| &a.blocks[b].xgraph).collect();
    let mut qoff = Vec::new();
    let mut coff = Vec::new();
    let (mut nq, mut nc) = (0, 0);
    let mut code: Option<StabilizerCode> = None;
    for &b in blocks {
        qoff.push(nq);
        coff.push(nc);
        nq += a.blocks[b].code.n();
        nc += a.blocks[b].code.generators().len();
        code = Some(match code {
            None => a.blocks[b].code.clone(),
            Some(c) => c.direct_sum(&a.blocks[b].code),
        });
    }
    let links: Vec<(usize, usize, &Bridge)> = edges
        .iter()
        .map(|&e| {
            let (u, v) = a.map.graph.edge(e);
            (local[&u.min(v)], local[&u.max(v)], &a.bridges[e])
        })
        .collect();
    (join_systems(&parts, &qoff, &coff, nq, nc, &links), code.expect("nonempty part"))
}

/// Plans one measurement per part. Each operator is given on the
/// concatenation of all blocks' qubits.
pub fn plan_parallel(a: &Architecture, parts: &[Vec<usize>], ops: &[PauliOperator]) -> Result<ParallelPlan> {
    if parts.len() != ops.len() {
        return Err(Error::invalid("one operator per part is required"));
    }
    let offsets = block_offsets(a);
    let total: usize = a.blocks.iter().map(|b| b.code.n()).sum();
    let mut seen = BTreeSet::new();
    let mut plan = ParallelPlan { parts: Vec::new(), inactive_bridges: Vec::new() };
    let mut active_all = BTreeSet::new();
    for (part, op) in parts.iter().zip(ops) {
        if op.n() != total {
            return Err(Error::invalid(format!("operator acts on {} qubits, architecture has {total}", op.n())));
        }
        let mut blocks = part.clone();
        blocks.sort_unstable();
        blocks.dedup();
        for &b in &blocks {
            if b >= a.blocks.len() {
                return Err(Error::invalid(format!("block {b} out of range")));
            }
            if !seen.insert(b) {
                return Err(Error::invalid(format!("block {b} appears in two parts")));
            }
        }
        let tree = a.map.spanning_tree(&blocks).ok_or_else(|| Error::invalid(format!("part {blocks:?} is disconnected")))?;
        let in_part: BTreeSet<usize> = blocks.iter().flat_map(|&b| offsets[b]..offsets[b] + a.blocks[b].code.n()).collect();
        if let Some(q) = op.support().into_iter().find(|q| !in_part.contains(q)) {
            return Err(Error::invalid(format!("operator touches qubit {q} outside part {blocks:?}")));
        }
        let (joined, code) = joined_system(a, &blocks, &tree);
        let local: Vec<usize> = blocks.iter().flat_map(|&b| offsets[b]..offsets[b] + a.blocks[b].code.n()).collect();
        let mut lop = PauliOperator::identity(local.len());
        for (i, &q) in local.iter().enumerate() {
            lop.set(i, op.get(q));
        }
        lop.set_negative(op.is_negative());
        let instantiation = instantiate_on(&code, &joined, &lop)?;
        active_all.extend(tree.iter().copied());
        plan.parts.push(PartPlan { blocks, active_bridges: tree, operator: op.clone(), instantiation });
    }
    plan.inactive_bridges = (0..a.map.graph.num_edges()).filter(|e| !active_all.contains(e)).collect();
    Ok(plan)
}

/// Desiderata of the joined system of `blocks` with every internal bridge on.
pub fn check_joined(a: &Architecture, blocks: &[usize], caps: &Caps) -> Result<DesiderataReport> {
    let tree = a.map.spanning_tree(blocks).ok_or_else(|| Error::invalid("part is disconnected"))?;
    let (joined, code) = joined_system(a, blocks, &tree);
    Ok(check_extractor_desiderata(&joined, &code, joined.t, caps))
}

/// Manifest JSON: blocks, bridges, params and activation recipes.
pub fn manifest(a: &Architecture, recipes: &BTreeMap<String, ParallelPlan>) -> serde_json::Value {
    serde_json::json!({
        "blocks": a.blocks.iter().map(|b| serde_json::json!({
            "n": b.code.n(),
            "k": b.code.k(),
            "data_qubits": b.data_qubits,
            "check_qubits": b.check_qubits,
        })).collect::<Vec<_>>(),
        "block_map": serde_json::from_str::<serde_json::Value>(&a.map.to_json()).expect("valid json"),
        "bridges": a.bridges.iter().map(|b| serde_json::json!({
            "pairs": b.pairs,
            "cycles": b.cycles.len(),
            "rho": b.rho,
            "max_length": b.max_length,
            "expansion": b.expansion,
        })).collect::<Vec<_>>(),
        "params": a.params,
        "recipes": recipes.iter().map(|(k, p)| (k.clone(), serde_json::json!({
            "parts": p.parts.iter().map(|x| serde_json::json!({
                "blocks": x.blocks,
                "active_bridges": x.active_bridges,
                "operator": x.operator,
                "couplings": x.instantiation.active,
            })).collect::<Vec<_>>(),
            "inactive_bridges": p.inactive_bridges,
        }))).collect::<serde_json::Map<_, _>>(),
    })
}
