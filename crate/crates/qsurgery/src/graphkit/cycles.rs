use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MultiGraph;
use crate::config::rng_for;
use crate::error::{Error, Result};
use crate::f2la::{self, BitMatrix};

/// An ordered list of cycles, each a sorted list of edge ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleBasis {
    pub cycles: Vec<Vec<usize>>,
    pub rho: usize,
    pub max_length: usize,
    /// Order used by [`greedy_partition`].
    pub ordering: Vec<usize>,
    pub num_edges: usize,
}

impl CycleBasis {
    pub fn new(num_edges: usize, mut cycles: Vec<Vec<usize>>) -> Self {
        for c in cycles.iter_mut() {
            c.sort_unstable();
        }
        let ordering = (0..cycles.len()).collect();
        let mut b = CycleBasis { cycles, rho: 0, max_length: 0, ordering, num_edges };
        b.recount();
        b
    }

    pub fn empty(num_edges: usize) -> Self {
        Self::new(num_edges, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    /// Number of cycles through each edge.
    pub fn loads(&self) -> Vec<usize> {
        let mut l = vec![0; self.num_edges];
        for c in &self.cycles {
            for &e in c {
                l[e] += 1;
            }
        }
        l
    }

    /// Recomputes `rho` and `max_length` from the cycles.
    pub fn recount(&mut self) {
        self.rho = self.loads().into_iter().max().unwrap_or(0);
        self.max_length = self.cycles.iter().map(|c| c.len()).max().unwrap_or(0);
    }

    pub fn with_ordering(mut self, ordering: Vec<usize>) -> Self {
        let mut check = ordering.clone();
        check.sort_unstable();
        assert!(check.iter().copied().eq(0..self.cycles.len()), "ordering must be a permutation");
        self.ordering = ordering;
        self
    }

    /// Cycles sharing an edge with each cycle.
    pub fn overlap_lists(&self) -> Vec<Vec<usize>> {
        let mut by_edge: Vec<Vec<usize>> = vec![Vec::new(); self.num_edges];
        for (i, c) in self.cycles.iter().enumerate() {
            for &e in c {
                by_edge[e].push(i);
            }
        }
        let mut out = vec![Vec::new(); self.cycles.len()];
        for list in by_edge {
            for &a in &list {
                for &b in &list {
                    if a != b {
                        out[a].push(b);
                    }
                }
            }
        }
        for l in out.iter_mut() {
            l.sort_unstable();
            l.dedup();
        }
        out
    }

    /// Largest number of later cycles (in `ordering`) that any cycle overlaps.
    pub fn max_later_overlap(&self) -> usize {
        let mut pos = vec![0; self.cycles.len()];
        for (p, &i) in self.ordering.iter().enumerate() {
            pos[i] = p;
        }
        self.overlap_lists()
            .iter()
            .enumerate()
            .map(|(i, l)| l.iter().filter(|&&j| pos[j] > pos[i]).count())
            .max()
            .unwrap_or(0)
    }

    /// Checks that the cycles are independent, lie in the cycle space of
    /// `g` and span it.
    pub fn validate(&self, g: &MultiGraph) -> Result<()> {
        if self.num_edges != g.num_edges() {
            return Err(Error::invalid("basis and graph disagree on edge count"));
        }
        let inc = g.incidence();
        let mut rows = Vec::with_capacity(self.cycles.len());
        for (i, c) in self.cycles.iter().enumerate() {
            let v = g.edge_vector(c);
            if v.weight() != c.len() {
                return Err(Error::invalid(format!("cycle {i} repeats an edge")));
            }
            if !inc.mul_vec(&v).is_zero() {
                return Err(Error::invalid(format!("cycle {i} is not closed")));
            }
            rows.push(v);
        }
        let m = BitMatrix::from_rows(g.num_edges(), rows)?;
        if f2la::rank(&m) != self.cycles.len() {
            return Err(Error::invalid("cycles are linearly dependent"));
        }
        if self.cycles.len() != g.cycle_rank() {
            return Err(Error::invalid(format!(
                "{} cycles but the cycle space has dimension {}",
                self.cycles.len(),
                g.cycle_rank()
            )));
        }
        Ok(())
    }
}

/// Partition of a basis into edge-disjoint groups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisPartition {
    pub parts: Vec<Vec<usize>>,
    pub t: usize,
}

fn fundamental_from_tree(g: &MultiGraph, order_seed: Option<&mut ChaCha8Rng>) -> Vec<Vec<usize>> {
    let n = g.num_vertices();
    let mut in_tree = vec![false; g.num_edges()];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    let mut roots: Vec<usize> = (0..n).collect();
    let mut rng = order_seed;
    if let Some(r) = rng.as_deref_mut() {
        roots.shuffle(r);
    }
    for root in roots {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut queue = vec![root];
        let mut i = 0;
        while i < queue.len() {
            let u = queue[i];
            i += 1;
            let mut nbrs: Vec<(usize, usize)> = g.neighbors(u).to_vec();
            if let Some(r) = rng.as_deref_mut() {
                nbrs.shuffle(r);
            }
            for (w, e) in nbrs {
                if depth[w] == usize::MAX {
                    depth[w] = depth[u] + 1;
                    parent[w] = Some((u, e));
                    in_tree[e] = true;
                    queue.push(w);
                }
            }
        }
    }
    let tree = super::SpanningTree { root: 0, parent, depth, order: Vec::new() };
    let mut cycles = Vec::new();
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if !in_tree[e] {
            let mut c = tree.path(u, v);
            c.push(e);
            cycles.push(c);
        }
    }
    cycles
}

/// Fundamental cycles of a BFS spanning forest rooted at the lowest index of
/// each component.
pub fn fundamental_cycle_basis(g: &MultiGraph) -> CycleBasis {
    CycleBasis::new(g.num_edges(), fundamental_from_tree(g, None))
}

/// `log2(|V|) * ln(2|E|)`.
pub fn congestion_bound(num_vertices: usize, num_edges: usize) -> f64 {
    if num_vertices == 0 || num_edges == 0 {
        return 0.0;
    }
    (num_vertices as f64).log2() * (2.0 * num_edges as f64).ln()
}

/// Congestion always accepted. Two cycles of a theta graph share an edge,
/// so no smaller value is reachable in general.
pub const CONGESTION_FLOOR: usize = 2;

/// Whether a basis meets both decongestion bounds on a graph of this size.
pub fn meets_decongestion_bounds(b: &CycleBasis, num_vertices: usize, num_edges: usize) -> bool {
    if b.is_empty() {
        return true;
    }
    let log_v = (num_vertices as f64).log2();
    (b.rho <= CONGESTION_FLOOR || (b.rho as f64) < congestion_bound(num_vertices, num_edges))
        && (b.max_later_overlap() as f64) <= log_v * b.rho as f64
}

fn is_simple_cycle(g: &MultiGraph, edges: &[usize]) -> bool {
    if edges.len() < 2 {
        return false;
    }
    let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
    for &e in edges {
        let (u, v) = g.edge(e);
        *deg.entry(u).or_default() += 1;
        *deg.entry(v).or_default() += 1;
    }
    if deg.values().any(|&d| d != 2) {
        return false;
    }
    // degree two everywhere; connected iff a walk covers every edge
    let mut used = vec![false; edges.len()];
    let start = g.edge(edges[0]).0;
    let mut at = start;
    let mut steps = 0;
    loop {
        let Some(k) = (0..edges.len()).find(|&k| {
            let (u, v) = g.edge(edges[k]);
            !used[k] && (u == at || v == at)
        }) else {
            break;
        };
        used[k] = true;
        let (u, v) = g.edge(edges[k]);
        at = if u == at { v } else { u };
        steps += 1;
        if at == start {
            break;
        }
    }
    steps == edges.len()
}

fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            out.push(b[j]);
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    out
}

/// Replaces cycles by their sum with an overlapping cycle while that lowers
/// the load profile and keeps every cycle simple.
fn improve(g: &MultiGraph, cycles: &mut [Vec<usize>]) {
    let mut loads = vec![0usize; g.num_edges()];
    for c in cycles.iter() {
        for &e in c {
            loads[e] += 1;
        }
    }
    for _pass in 0..64 {
        let mut changed = false;
        let cur_max = loads.iter().copied().max().unwrap_or(0);
        for i in 0..cycles.len() {
            for j in 0..cycles.len() {
                if i == j {
                    continue;
                }
                let cand = xor_sorted(&cycles[i], &cycles[j]);
                if cand.len() == cycles[i].len() + cycles[j].len() {
                    continue;
                }
                let mut gain: i64 = 0;
                let mut over = false;
                let mut k = 0;
                for &e in &cycles[j] {
                    while k < cycles[i].len() && cycles[i][k] < e {
                        k += 1;
                    }
                    let l = loads[e] as i64;
                    if k < cycles[i].len() && cycles[i][k] == e {
                        gain += 1 - 2 * l;
                    } else {
                        gain += 2 * l + 1;
                        if loads[e] + 1 > cur_max {
                            over = true;
                        }
                    }
                }
                if over || gain >= 0 || !is_simple_cycle(g, &cand) {
                    continue;
                }
                for &e in &cycles[i] {
                    loads[e] -= 1;
                }
                for &e in &cand {
                    loads[e] += 1;
                }
                cycles[i] = cand;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// Ordering that repeatedly takes the cycle with the fewest overlaps among
/// those not yet placed.
fn degeneracy_ordering(b: &CycleBasis) -> Vec<usize> {
    let lists = b.overlap_lists();
    let r = lists.len();
    let mut count: Vec<usize> = lists.iter().map(|l| l.len()).collect();
    let mut placed = vec![false; r];
    let mut order = Vec::with_capacity(r);
    for _ in 0..r {
        let i = (0..r).filter(|&i| !placed[i]).min_by_key(|&i| (count[i], i)).expect("remaining");
        placed[i] = true;
        order.push(i);
        for &j in &lists[i] {
            if !placed[j] {
                count[j] -= 1;
            }
        }
    }
    order
}

/// Low-congestion ordered cycle basis of a connected graph.
pub fn decongest(g: &MultiGraph, seed: u64) -> Result<CycleBasis> {
    decongest_with(g, seed, 64)
}

/// [`decongest`] with an explicit restart budget.
pub fn decongest_with(g: &MultiGraph, seed: u64, retries: usize) -> Result<CycleBasis> {
    if g.num_vertices() < 2 {
        return Ok(CycleBasis::empty(g.num_edges()));
    }
    if !g.is_connected() {
        return Err(Error::invalid("decongestion needs a connected graph"));
    }
    let (skel, kept) = g.simple_skeleton();
    // parallel bundles become chains of digons
    let mut digons = Vec::new();
    let mut bundles: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (id, &(u, v)) in g.edges().iter().enumerate() {
        bundles.entry((u.min(v), u.max(v))).or_default().push(id);
    }
    for ids in bundles.values() {
        for w in ids.windows(2) {
            digons.push(vec![w[0], w[1]]);
        }
    }
    let mut rng = rng_for(seed, "decongest");
    let mut best: Option<CycleBasis> = None;
    for attempt in 0..retries.max(1) {
        let mut cycles = if attempt == 0 {
            fundamental_from_tree(&skel, None)
        } else {
            let mut r = ChaCha8Rng::seed_from_u64(rng.gen());
            fundamental_from_tree(&skel, Some(&mut r))
        };
        improve(&skel, &mut cycles);
        let mut all: Vec<Vec<usize>> =
            cycles.into_iter().map(|c| c.into_iter().map(|e| kept[e]).collect()).collect();
        all.extend(digons.iter().cloned());
        let mut b = CycleBasis::new(g.num_edges(), all);
        let ord = degeneracy_ordering(&b);
        b = b.with_ordering(ord);
        if meets_decongestion_bounds(&b, g.num_vertices(), g.num_edges()) {
            return Ok(b);
        }
        if best.as_ref().is_none_or(|x| b.rho < x.rho) {
            best = Some(b);
        }
    }
    let b = best.expect("at least one attempt");
    Err(Error::BudgetExhausted(format!(
        "no basis within bounds after {retries} restarts; best congestion {} vs bound {:.3}, later overlap {}",
        b.rho,
        congestion_bound(g.num_vertices(), g.num_edges()),
        b.max_later_overlap()
    )))
}

/// Reverse-order greedy partition: cycles are visited from last to first in
/// the basis ordering and each goes to the first part it does not overlap.
pub fn greedy_partition(basis: &CycleBasis) -> BasisPartition {
    let mut parts: Vec<Vec<usize>> = Vec::new();
    let mut used: Vec<Vec<bool>> = Vec::new();
    for &i in basis.ordering.iter().rev() {
        let c = &basis.cycles[i];
        let slot = used.iter().position(|u| c.iter().all(|&e| !u[e]));
        let j = match slot {
            Some(j) => j,
            None => {
                parts.push(Vec::new());
                used.push(vec![false; basis.num_edges]);
                parts.len() - 1
            }
        };
        for &e in c {
            used[j][e] = true;
        }
        parts[j].push(i);
    }
    for p in parts.iter_mut() {
        p.sort_unstable();
    }
    let t = parts.len();
    BasisPartition { parts, t }
}
