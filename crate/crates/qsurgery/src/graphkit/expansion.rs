use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::MultiGraph;
use crate::config::rng_for;
use crate::error::{Error, Result};

/// Default vertex limit for exhaustive cut enumeration.
pub const EXACT_LIMIT: usize = 22;

/// Port-count limit for the min-cut route.
pub const MINCUT_PORT_LIMIT: usize = 16;

/// An expansion constant; `Infinite` when no subset constrains it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Beta {
    Finite(Ratio<u64>),
    Infinite,
}

impl Beta {
    pub fn new(num: u64, den: u64) -> Self {
        Beta::Finite(Ratio::new(num, den))
    }

    pub fn at_least(&self, r: Ratio<u64>) -> bool {
        match self {
            Beta::Infinite => true,
            Beta::Finite(b) => *b >= r,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Beta::Infinite => f64::INFINITY,
            Beta::Finite(b) => *b.numer() as f64 / *b.denom() as f64,
        }
    }
}

impl PartialOrd for Beta {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Beta {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Beta::Infinite, Beta::Infinite) => Ordering::Equal,
            (Beta::Infinite, _) => Ordering::Greater,
            (_, Beta::Infinite) => Ordering::Less,
            (Beta::Finite(a), Beta::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Infinite => f.write_str("inf"),
            Beta::Finite(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Beta::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl Serialize for Beta {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "inf" {
            return Ok(Beta::Infinite);
        }
        let (n, dd) = s.split_once('/').unwrap_or((&s, "1"));
        let n: u64 = n.parse().map_err(serde::de::Error::custom)?;
        let dd: u64 = dd.parse().map_err(serde::de::Error::custom)?;
        if dd == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Beta::new(n, dd))
    }
}

/// How an expansion value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// Enumeration of every vertex subset.
    Exhaustive,
    /// One minimum cut per port bipartition; exact.
    MinCut,
    /// Laplacian bound `λ₂ / 2`; a lower bound only.
    Spectral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expansion {
    pub beta: Beta,
    pub kind: CertificateKind,
}

impl Expansion {
    pub fn is_exact(&self) -> bool {
        self.kind != CertificateKind::Spectral
    }
}

/// Neighbour masks split by multiplicity layer.
fn layered_adjacency(g: &MultiGraph) -> Vec<Vec<u64>> {
    let n = g.num_vertices();
    let mut mult = vec![vec![0u32; n]; n];
    for &(u, v) in g.edges() {
        mult[u][v] += 1;
        mult[v][u] += 1;
    }
    (0..n)
        .map(|v| {
            let top = mult[v].iter().copied().max().unwrap_or(0);
            (1..=top)
                .map(|k| (0..n).filter(|&w| mult[v][w] >= k).fold(0u64, |m, w| m | (1 << w)))
                .collect()
        })
        .collect()
}

/// Calls `f(U, |δU|)` for every `U` not containing the last vertex.
fn for_each_cut(g: &MultiGraph, mut f: impl FnMut(u64, u64)) {
    let n = g.num_vertices();
    if n < 2 {
        return;
    }
    let adj = layered_adjacency(g);
    let deg: Vec<u64> = (0..n).map(|v| g.degree(v) as u64).collect();
    let mut u: u64 = 0;
    let mut boundary: i64 = 0;
    for i in 1u64..(1u64 << (n - 1)) {
        let v = i.trailing_zeros() as usize;
        let bit = 1u64 << v;
        let inside: i64 = adj[v].iter().map(|m| (m & u & !bit).count_ones() as i64).sum();
        let delta = deg[v] as i64 - 2 * inside;
        if u & bit == 0 {
            boundary += delta;
        } else {
            boundary -= delta;
        }
        u ^= bit;
        f(u, boundary as u64);
    }
}

struct Best {
    num: u64,
    den: u64,
}

impl Best {
    fn offer(best: &mut Option<Best>, num: u64, den: u64) {
        match best {
            Some(b) if num * b.den >= b.num * den => {}
            _ => *best = Some(Best { num, den }),
        }
    }

    fn into_beta(b: Option<Best>) -> Beta {
        b.map_or(Beta::Infinite, |b| Beta::new(b.num, b.den))
    }
}

/// Cheeger constant by enumeration; refuses graphs above [`EXACT_LIMIT`].
pub fn cheeger_exact(g: &MultiGraph) -> Result<Beta> {
    let n = g.num_vertices();
    relative_cheeger_exact_with(g, &(0..n).collect::<Vec<_>>(), n, EXACT_LIMIT)
}

/// Relative Cheeger constant `β_t(G, P)` by enumeration.
pub fn relative_cheeger_exact(g: &MultiGraph, port: &[usize], t: usize) -> Result<Beta> {
    relative_cheeger_exact_with(g, port, t, EXACT_LIMIT)
}

pub fn relative_cheeger_exact_with(g: &MultiGraph, port: &[usize], t: usize, limit: usize) -> Result<Beta> {
    let n = g.num_vertices();
    if n > limit.min(63) {
        return Err(Error::CapExceeded(format!(
            "exhaustive expansion limited to {} vertices, graph has {n}",
            limit.min(63)
        )));
    }
    let pmask = port_mask(n, port)?;
    let np = pmask.count_ones() as u64;
    let t = t as u64;
    let mut best = None;
    for_each_cut(g, |u, boundary| {
        let inside = (u & pmask).count_ones() as u64;
        let m = t.min(inside).min(np - inside);
        if m > 0 {
            Best::offer(&mut best, boundary, m);
        }
    });
    Ok(Best::into_beta(best))
}

fn port_mask(n: usize, port: &[usize]) -> Result<u64> {
    let mut m = 0u64;
    for &p in port {
        if p >= n {
            return Err(Error::invalid(format!("port vertex {p} out of range")));
        }
        m |= 1 << p;
    }
    Ok(m)
}

/// Unit-capacity flow network for undirected multigraphs.
struct FlowNet {
    head: Vec<usize>,
    next: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<i32>,
}

impl FlowNet {
    fn new(n: usize) -> Self {
        FlowNet { head: vec![usize::MAX; n], next: Vec::new(), to: Vec::new(), cap: Vec::new() }
    }

    fn arc(&mut self, u: usize, v: usize, c: i32, back: i32) {
        for (a, b, cc) in [(u, v, c), (v, u, back)] {
            self.to.push(b);
            self.cap.push(cc);
            self.next.push(self.head[a]);
            self.head[a] = self.to.len() - 1;
        }
    }

    /// Augments until the flow reaches `limit` or no path remains.
    fn max_flow(&mut self, s: usize, t: usize, limit: u64) -> u64 {
        let n = self.head.len();
        let mut flow = 0u64;
        while flow < limit {
            let mut pred = vec![usize::MAX; n];
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                if u == t {
                    break;
                }
                let mut a = self.head[u];
                while a != usize::MAX {
                    let w = self.to[a];
                    if self.cap[a] > 0 && !seen[w] {
                        seen[w] = true;
                        pred[w] = a;
                        q.push_back(w);
                    }
                    a = self.next[a];
                }
            }
            if !seen[t] {
                break;
            }
            let mut v = t;
            while v != s {
                let a = pred[v];
                self.cap[a] -= 1;
                self.cap[a ^ 1] += 1;
                v = self.to[a ^ 1];
            }
            flow += 1;
        }
        flow
    }
}

/// `β_t(G, P)` via one minimum cut per bipartition of the port set. Exact
/// for any graph size; cost grows as `2^|P|`.
pub fn relative_cheeger_mincut(g: &MultiGraph, port: &[usize], t: usize) -> Result<Beta> {
    let mut port = port.to_vec();
    port.sort_unstable();
    port.dedup();
    let np = port.len();
    if np > MINCUT_PORT_LIMIT {
        return Err(Error::CapExceeded(format!(
            "min-cut expansion limited to {MINCUT_PORT_LIMIT} ports, got {np}"
        )));
    }
    if let Some(&p) = port.iter().find(|&&p| p >= g.num_vertices()) {
        return Err(Error::invalid(format!("port vertex {p} out of range")));
    }
    if np < 2 || t == 0 {
        return Ok(Beta::Infinite);
    }
    let n = g.num_vertices();
    let (s, sink) = (n, n + 1);
    let big = g.num_edges() as i32 + 1;
    let mut best: Option<Best> = None;
    // the last port stays on the sink side; the complement gives the same cut
    for mask in 1u64..(1u64 << (np - 1)) {
        let inside = mask.count_ones() as u64;
        let m = (t as u64).min(inside).min(np as u64 - inside);
        let limit = match &best {
            Some(b) => (b.num * m).div_ceil(b.den),
            None => u64::MAX,
        };
        let mut net = FlowNet::new(n + 2);
        for &(u, v) in g.edges() {
            net.arc(u, v, 1, 1);
        }
        for (i, &p) in port.iter().enumerate() {
            if mask >> i & 1 == 1 {
                net.arc(s, p, big, 0);
            } else {
                net.arc(p, sink, big, 0);
            }
        }
        let f = net.max_flow(s, sink, limit);
        if f < limit {
            Best::offer(&mut best, f, m);
        }
    }
    Ok(Best::into_beta(best))
}

/// Second-smallest Laplacian eigenvalue.
pub fn algebraic_connectivity(g: &MultiGraph) -> f64 {
    let n = g.num_vertices();
    if n < 2 {
        return 0.0;
    }
    let mut l = DMatrix::<f64>::zeros(n, n);
    for &(u, v) in g.edges() {
        l[(u, u)] += 1.0;
        l[(v, v)] += 1.0;
        l[(u, v)] -= 1.0;
        l[(v, u)] -= 1.0;
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(l).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    ev[1]
}

/// Rational lower bound on the Cheeger constant from `λ₂ / 2`, rounded down
/// with a margin for floating-point error.
pub fn spectral_cheeger_lower_bound(g: &MultiGraph) -> Beta {
    if g.num_vertices() < 2 {
        return Beta::Infinite;
    }
    let half = algebraic_connectivity(g) / 2.0 - 1e-9;
    let scaled = (half * 1e6).floor().max(0.0) as u64;
    Beta::new(scaled, 1_000_000)
}

/// `β_t(G, P)` by the cheapest exact route available, falling back to the
/// spectral lower bound (valid because `min(t, |U∩P|, |P∖U|)` never exceeds
/// `min(|U|, |V∖U|)`).
pub fn relative_expansion(g: &MultiGraph, port: &[usize], t: usize, exact_limit: usize) -> Result<Expansion> {
    if g.num_vertices() <= exact_limit.min(63) {
        let beta = relative_cheeger_exact_with(g, port, t, exact_limit)?;
        return Ok(Expansion { beta, kind: CertificateKind::Exhaustive });
    }
    if port.len() <= MINCUT_PORT_LIMIT {
        let beta = relative_cheeger_mincut(g, port, t)?;
        return Ok(Expansion { beta, kind: CertificateKind::MinCut });
    }
    let beta = if port.len() < 2 || t == 0 { Beta::Infinite } else { spectral_cheeger_lower_bound(g) };
    Ok(Expansion { beta, kind: CertificateKind::Spectral })
}

/// Certified random regular-ish graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expander {
    pub graph: MultiGraph,
    pub certificate: Expansion,
}

/// Hamiltonian cycle plus random matchings, resampled until the Cheeger
/// constant is certified at least `target`.
pub fn build_expander(n: usize, target: Ratio<u64>, max_degree: usize, seed: u64) -> Result<Expander> {
    build_expander_with(n, target, max_degree, seed, EXACT_LIMIT, 64)
}

pub fn build_expander_with(
    n: usize,
    target: Ratio<u64>,
    max_degree: usize,
    seed: u64,
    exact_limit: usize,
    retries: usize,
) -> Result<Expander> {
    let exhaustive = |g: MultiGraph| -> Result<Expander> {
        let beta = relative_cheeger_exact_with(&g, &(0..g.num_vertices()).collect::<Vec<_>>(), g.num_vertices(), 63)?;
        Ok(Expander { graph: g, certificate: Expansion { beta, kind: CertificateKind::Exhaustive } })
    };
    match n {
        0 => return Err(Error::invalid("expander needs at least one vertex")),
        1 => return exhaustive(MultiGraph::new(1)),
        2 => return exhaustive(MultiGraph::from_edges(2, &[(0, 1)])?),
        3 => return exhaustive(MultiGraph::from_edges(3, &[(0, 1), (1, 2), (2, 0)])?),
        _ => {}
    }
    if max_degree < 2 {
        return Err(Error::invalid("expander degree must be at least 2"));
    }
    let mut rng = rng_for(seed, "expander");
    let mut best = Beta::new(0, 1);
    for _ in 0..retries.max(1) {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut g = MultiGraph::new(n);
        for i in 0..n {
            g.add_edge(perm[i], perm[(i + 1) % n]);
        }
        for _ in 2..max_degree {
            perm.shuffle(&mut rng);
            for pair in perm.chunks(2) {
                if let [a, b] = *pair {
                    if !g.has_edge(a, b) && g.degree(a) < max_degree && g.degree(b) < max_degree {
                        g.add_edge(a, b);
                    }
                }
            }
        }
        let cert = if n <= exact_limit {
            exhaustive(g.clone())?.certificate
        } else {
            Expansion { beta: spectral_cheeger_lower_bound(&g), kind: CertificateKind::Spectral }
        };
        if cert.beta.at_least(target) {
            return Ok(Expander { graph: g, certificate: cert });
        }
        best = best.max(cert.beta);
    }
    Err(Error::BudgetExhausted(format!(
        "no expander on {n} vertices with degree <= {max_degree} reached {}/{} in {retries} samples (best {best})",
        target.numer(),
        target.denom()
    )))
}
