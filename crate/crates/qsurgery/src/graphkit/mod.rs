//! Graphs, cycle bases, thickening, cellulation and expansion.

mod cycles;
mod expansion;
mod thicken;

pub use cycles::*;
pub use expansion::*;
pub use thicken::*;

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2la::{BitMatrix, BitVector};

/// Undirected multigraph without self-loops. Edge ids are stable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct MultiGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, usize)>>,
}

#[derive(Clone, Serialize, Deserialize)]
struct GraphRepr {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<GraphRepr> for MultiGraph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        MultiGraph::from_edges(r.vertices, &r.edges)
    }
}

impl From<MultiGraph> for GraphRepr {
    fn from(g: MultiGraph) -> Self {
        GraphRepr { vertices: g.n, edges: g.edges }
    }
}

impl MultiGraph {
    pub fn new(n: usize) -> Self {
        MultiGraph { n, edges: Vec::new(), adj: vec![Vec::new(); n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = MultiGraph::new(n);
        for &(u, v) in edges {
            g.try_add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn try_add_edge(&mut self, u: usize, v: usize) -> Result<usize> {
        if u >= self.n || v >= self.n {
            return Err(Error::invalid(format!("edge ({u}, {v}) out of range for {} vertices", self.n)));
        }
        if u == v {
            return Err(Error::invalid(format!("self-loop at vertex {u}")));
        }
        Ok(self.add_edge(u, v))
    }

    /// Adds `(u, v)` and returns its id. Panics on self-loops.
    pub fn add_edge(&mut self, u: usize, v: usize) -> usize {
        assert!(u != v, "self-loop at vertex {u}");
        assert!(u < self.n && v < self.n, "edge out of range");
        let id = self.edges.len();
        self.edges.push((u, v));
        self.adj[u].push((v, id));
        self.adj[v].push((u, id));
        id
    }

    pub fn add_vertex(&mut self) -> usize {
        self.n += 1;
        self.adj.push(Vec::new());
        self.n - 1
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> (usize, usize) {
        self.edges[id]
    }

    /// `(neighbour, edge id)` pairs in insertion order.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].iter().any(|&(w, _)| w == v)
    }

    pub fn edges_between(&self, u: usize, v: usize) -> Vec<usize> {
        self.adj[u].iter().filter(|&&(w, _)| w == v).map(|&(_, e)| e).collect()
    }

    /// Vertex-by-edge incidence matrix.
    pub fn incidence(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.n, self.edges.len());
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            m.set(u, id, true);
            m.set(v, id, true);
        }
        m
    }

    /// Component label per vertex and the component count.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.n];
        let mut c = 0;
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = c;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &(w, _) in &self.adj[u] {
                    if label[w] == usize::MAX {
                        label[w] = c;
                        queue.push_back(w);
                    }
                }
            }
            c += 1;
        }
        (label, c)
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().1 == 1
    }

    /// Dimension of the cycle space.
    pub fn cycle_rank(&self) -> usize {
        self.edges.len() + self.components().1 - self.n
    }

    /// BFS tree from `root` using only edges where `allowed` is true.
    pub fn bfs_tree(&self, root: usize, allowed: Option<&[bool]>) -> SpanningTree {
        let mut parent = vec![None; self.n];
        let mut depth = vec![usize::MAX; self.n];
        let mut order = vec![root];
        depth[root] = 0;
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            i += 1;
            for &(w, e) in &self.adj[u] {
                if allowed.is_some_and(|a| !a[e]) {
                    continue;
                }
                if depth[w] == usize::MAX {
                    depth[w] = depth[u] + 1;
                    parent[w] = Some((u, e));
                    order.push(w);
                }
            }
        }
        SpanningTree { root, parent, depth, order }
    }

    /// Shortest path from `s` to `t` as edge ids, over allowed edges.
    pub fn shortest_path(&self, s: usize, t: usize, allowed: Option<&[bool]>) -> Option<Vec<usize>> {
        let tree = self.bfs_tree(s, allowed);
        tree.path_to_root(t).map(|mut p| {
            p.reverse();
            p
        })
    }

    /// Subgraph on the listed vertices, renumbered in the given order.
    /// Returns the subgraph and the original id of each kept edge.
    pub fn induced(&self, vertices: &[usize]) -> (MultiGraph, Vec<usize>) {
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let mut g = MultiGraph::new(vertices.len());
        let mut orig = Vec::new();
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            if index[u] != usize::MAX && index[v] != usize::MAX {
                g.add_edge(index[u], index[v]);
                orig.push(id);
            }
        }
        (g, orig)
    }

    /// Edge-list text: `|V|` on the first line, then `u v` per edge.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hl, header) = lines.next().ok_or_else(|| Error::parse(0, "missing vertex count"))?;
        let n: usize = header.parse().map_err(|_| Error::parse(hl, format!("expected vertex count, got {header:?}")))?;
        let mut g = MultiGraph::new(n);
        for (ln, line) in lines {
            let nums: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::parse(ln, format!("bad vertex {t:?}"))))
                .collect::<Result<_>>()?;
            if nums.len() != 2 {
                return Err(Error::parse(ln, "expected `u v`"));
            }
            g.try_add_edge(nums[0], nums[1]).map_err(|e| Error::parse(ln, e.to_string()))?;
        }
        Ok(g)
    }

    /// DOT export; `vertex_attrs` and `edge_attrs` add per-item attributes.
    pub fn to_dot(
        &self,
        name: &str,
        vertex_attrs: &dyn Fn(usize) -> String,
        edge_attrs: &dyn Fn(usize) -> String,
    ) -> String {
        let mut s = format!("graph {name} {{\n");
        for v in 0..self.n {
            let a = vertex_attrs(v);
            if a.is_empty() {
                let _ = writeln!(s, "  {v};");
            } else {
                let _ = writeln!(s, "  {v} [{a}];");
            }
        }
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            let a = edge_attrs(id);
            if a.is_empty() {
                let _ = writeln!(s, "  {u} -- {v} [id=e{id}];");
            } else {
                let _ = writeln!(s, "  {u} -- {v} [id=e{id}, {a}];");
            }
        }
        s.push_str("}\n");
        s
    }

    /// Indicator vector over edge ids.
    pub fn edge_vector(&self, edges: &[usize]) -> BitVector {
        let mut v = BitVector::zeros(self.edges.len());
        for &e in edges {
            v.flip(e);
        }
        v
    }

    /// Vertices with odd incidence in an edge multiset.
    pub fn odd_vertices(&self, edges: &[usize]) -> Vec<usize> {
        let mut odd = vec![false; self.n];
        for &e in edges {
            let (u, v) = self.edges[e];
            odd[u] ^= true;
            odd[v] ^= true;
        }
        (0..self.n).filter(|&v| odd[v]).collect()
    }

    /// Simple graph on the same vertices keeping the lowest-id edge of every
    /// parallel bundle; also returns the kept ids.
    pub fn simple_skeleton(&self) -> (MultiGraph, Vec<usize>) {
        let mut g = MultiGraph::new(self.n);
        let mut kept = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            if seen.insert((u.min(v), u.max(v))) {
                g.add_edge(u, v);
                kept.push(id);
            }
        }
        (g, kept)
    }
}

/// Rooted spanning tree of one component.
#[derive(Clone, Debug)]
pub struct SpanningTree {
    pub root: usize,
    /// `(parent vertex, edge id)` per reached non-root vertex.
    pub parent: Vec<Option<(usize, usize)>>,
    /// `usize::MAX` for unreached vertices.
    pub depth: Vec<usize>,
    /// Vertices in BFS order.
    pub order: Vec<usize>,
}

impl SpanningTree {
    pub fn reaches(&self, v: usize) -> bool {
        self.depth[v] != usize::MAX
    }

    /// Edges from `v` up to the root, `None` when unreached.
    pub fn path_to_root(&self, mut v: usize) -> Option<Vec<usize>> {
        if !self.reaches(v) {
            return None;
        }
        let mut path = Vec::new();
        while let Some((p, e)) = self.parent[v] {
            path.push(e);
            v = p;
        }
        Some(path)
    }

    /// Tree path between two reached vertices as edge ids.
    pub fn path(&self, mut a: usize, mut b: usize) -> Vec<usize> {
        let mut left = Vec::new();
        let mut right = Vec::new();
        while self.depth[a] > self.depth[b] {
            let (p, e) = self.parent[a].expect("reached");
            left.push(e);
            a = p;
        }
        while self.depth[b] > self.depth[a] {
            let (p, e) = self.parent[b].expect("reached");
            right.push(e);
            b = p;
        }
        while a != b {
            let (pa, ea) = self.parent[a].expect("reached");
            let (pb, eb) = self.parent[b].expect("reached");
            left.push(ea);
            right.push(eb);
            a = pa;
            b = pb;
        }
        right.reverse();
        left.extend(right);
        left
    }

    pub fn tree_edges(&self) -> Vec<usize> {
        let mut e: Vec<usize> = self.parent.iter().flatten().map(|&(_, e)| e).collect();
        e.sort_unstable();
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_roundtrip() {
        let g = MultiGraph::from_edges(3, &[(0, 1), (1, 2), (0, 1)]).unwrap();
        let h = MultiGraph::from_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(g.edges(), h.edges());
        assert!(MultiGraph::from_edge_list("2\n0 0\n").is_err());
        let err = MultiGraph::from_edge_list("2\n0 1\n0 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn tree_paths() {
        let g = MultiGraph::from_edges(5, &[(0, 1), (1, 2), (0, 3), (3, 4)]).unwrap();
        let t = g.bfs_tree(0, None);
        assert_eq!(t.path(2, 4), vec![1, 0, 2, 3]);
        assert_eq!(g.odd_vertices(&t.path(2, 4)), vec![2, 4]);
        assert_eq!(g.cycle_rank(), 0);
    }

    #[test]
    fn components_and_dot() {
        let g = MultiGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(g.components().1, 2);
        assert!(!g.is_connected());
        let dot = g.to_dot("g", &|v| format!("label=\"{v}\""), &|_| String::new());
        assert!(dot.contains("2 -- 3"));
    }
}
