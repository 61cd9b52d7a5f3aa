use serde::{Deserialize, Serialize};

use super::{CycleBasis, MultiGraph};
use crate::error::{Error, Result};

/// Where an edge of a thickened graph came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeOrigin {
    /// Copy of base edge `edge` on `level`.
    Horizontal { edge: usize, level: usize },
    /// Rung joining `(vertex, level)` and `(vertex, level + 1)`.
    Vertical { vertex: usize, level: usize },
}

/// `G □ J_ℓ` with provenance. Levels are numbered from 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thickened {
    pub graph: MultiGraph,
    pub levels: usize,
    pub base_vertices: usize,
    pub base_edges: usize,
    pub vertex_origin: Vec<(usize, usize)>,
    pub edge_origin: Vec<EdgeOrigin>,
}

impl Thickened {
    pub fn vertex(&self, v: usize, level: usize) -> usize {
        level * self.base_vertices + v
    }

    pub fn horizontal(&self, e: usize, level: usize) -> usize {
        level * self.base_edges + e
    }

    pub fn vertical(&self, v: usize, level: usize) -> usize {
        assert!(level + 1 < self.levels);
        self.levels * self.base_edges + level * self.base_vertices + v
    }

    /// Copy of a base edge set on one level.
    pub fn lift(&self, edges: &[usize], level: usize) -> Vec<usize> {
        edges.iter().map(|&e| self.horizontal(e, level)).collect()
    }

    /// The `|E|·(ℓ−1)` squares between consecutive levels.
    pub fn squares(&self, base: &MultiGraph) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for r in 0..self.levels.saturating_sub(1) {
            for (e, &(u, v)) in base.edges().iter().enumerate() {
                out.push(vec![
                    self.horizontal(e, r),
                    self.horizontal(e, r + 1),
                    self.vertical(u, r),
                    self.vertical(v, r),
                ]);
            }
        }
        out
    }
}

/// Cartesian product with the path on `levels` vertices. Horizontal edges
/// come first, level by level, then the rungs.
pub fn thicken(g: &MultiGraph, levels: usize) -> Thickened {
    assert!(levels >= 1, "at least one level");
    let (nv, ne) = (g.num_vertices(), g.num_edges());
    let mut out = MultiGraph::new(nv * levels);
    let mut edge_origin = Vec::with_capacity(ne * levels + nv * (levels - 1));
    for r in 0..levels {
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            out.add_edge(r * nv + u, r * nv + v);
            edge_origin.push(EdgeOrigin::Horizontal { edge: e, level: r });
        }
    }
    for r in 0..levels - 1 {
        for v in 0..nv {
            out.add_edge(r * nv + v, (r + 1) * nv + v);
            edge_origin.push(EdgeOrigin::Vertical { vertex: v, level: r });
        }
    }
    let vertex_origin = (0..levels).flat_map(|r| (0..nv).map(move |v| (v, r))).collect();
    Thickened { graph: out, levels, base_vertices: nv, base_edges: ne, vertex_origin, edge_origin }
}

/// Squares plus each base cycle lifted to its assigned level.
pub fn thickened_cycle_basis(
    base: &MultiGraph,
    t: &Thickened,
    base_basis: &CycleBasis,
    level_of: &[usize],
) -> Result<CycleBasis> {
    if level_of.len() != base_basis.len() {
        return Err(Error::invalid("one level per base cycle required"));
    }
    if let Some(&bad) = level_of.iter().find(|&&l| l >= t.levels) {
        return Err(Error::invalid(format!("level {bad} out of range for {} levels", t.levels)));
    }
    let mut cycles = t.squares(base);
    for (c, &l) in base_basis.cycles.iter().zip(level_of) {
        cycles.push(t.lift(c, l));
    }
    Ok(CycleBasis::new(t.graph.num_edges(), cycles))
}

/// Result of [`cellulate`]: new chord edge ids and triangles as edge ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cellulation {
    pub chords: Vec<usize>,
    pub triangles: Vec<[usize; 3]>,
}

/// Vertices of a simple cycle in walk order, with the edge leaving each.
/// The walk starts at the first endpoint of the lowest edge id.
pub fn cycle_walk(g: &MultiGraph, cycle: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    if cycle.len() < 2 {
        return Err(Error::invalid("a cycle needs at least two edges"));
    }
    let mut sorted = cycle.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != cycle.len() {
        return Err(Error::invalid("cycle repeats an edge"));
    }
    let mut used = vec![false; sorted.len()];
    let start = g.edge(sorted[0]).0;
    let mut verts = vec![start];
    let mut order = Vec::with_capacity(sorted.len());
    let mut at = start;
    // first step uses the lowest edge so the direction is fixed
    let mut next = Some(0);
    while order.len() < sorted.len() {
        let k = match next.take() {
            Some(k) => k,
            None => match (0..sorted.len()).find(|&k| {
                let (u, v) = g.edge(sorted[k]);
                !used[k] && (u == at || v == at)
            }) {
                Some(k) => k,
                None => return Err(Error::invalid("edge set is not a single cycle")),
            },
        };
        used[k] = true;
        let (u, v) = g.edge(sorted[k]);
        at = if u == at { v } else { u };
        order.push(sorted[k]);
        if order.len() < sorted.len() {
            if at == start {
                return Err(Error::invalid("edge set is not a single simple cycle"));
            }
            if verts.contains(&at) {
                return Err(Error::invalid("cycle revisits a vertex"));
            }
            verts.push(at);
        }
    }
    if at != start {
        return Err(Error::invalid("edge set does not close"));
    }
    Ok((verts, order))
}

/// Splits a simple cycle of length `w ≥ 3` into `w − 2` triangles by adding
/// zig-zag chords to `g`.
pub fn cellulate(g: &mut MultiGraph, cycle: &[usize]) -> Result<Cellulation> {
    let (verts, cyc) = cycle_walk(g, cycle)?;
    let w = verts.len();
    if w < 3 {
        return Err(Error::invalid("cellulation needs a cycle of length at least 3"));
    }
    let mut chords = Vec::new();
    let mut triangles = Vec::new();
    let (mut lo, mut hi) = (0usize, w - 1);
    let mut closing = cyc[w - 1];
    let mut cut_high = true;
    while hi - lo > 2 {
        if cut_high {
            let c = g.add_edge(verts[lo], verts[hi - 1]);
            triangles.push([cyc[hi - 1], closing, c]);
            closing = c;
            hi -= 1;
        } else {
            let c = g.add_edge(verts[lo + 1], verts[hi]);
            triangles.push([cyc[lo], closing, c]);
            closing = c;
            lo += 1;
        }
        chords.push(closing);
        cut_high = !cut_high;
    }
    triangles.push([cyc[lo], cyc[lo + 1], closing]);
    Ok(Cellulation { chords, triangles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphkit::fundamental_cycle_basis;

    fn cycle_graph(w: usize) -> MultiGraph {
        let mut g = MultiGraph::new(w);
        for i in 0..w {
            g.add_edge(i, (i + 1) % w);
        }
        g
    }

    #[test]
    fn thicken_counts() {
        let j2 = MultiGraph::from_edges(2, &[(0, 1)]).unwrap();
        let sq = thicken(&j2, 2);
        assert_eq!((sq.graph.num_vertices(), sq.graph.num_edges()), (4, 4));
        let tri = cycle_graph(3);
        let t = thicken(&tri, 3);
        assert_eq!((t.graph.num_vertices(), t.graph.num_edges()), (9, 15));
        let same = thicken(&tri, 1);
        assert_eq!(same.graph.edges(), tri.edges());
    }

    #[test]
    fn thickened_basis_dimension() {
        let tri = cycle_graph(3);
        let t = thicken(&tri, 2);
        let b = thickened_cycle_basis(&tri, &t, &fundamental_cycle_basis(&tri), &[1]).unwrap();
        assert_eq!(b.len(), 4);
        b.validate(&t.graph).unwrap();
        let path = MultiGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let t = thicken(&path, 3);
        let b = thickened_cycle_basis(&path, &t, &fundamental_cycle_basis(&path), &[]).unwrap();
        assert_eq!(b.len(), 4);
        b.validate(&t.graph).unwrap();
        assert!(thickened_cycle_basis(&tri, &t, &fundamental_cycle_basis(&tri), &[3]).is_err());
    }

    fn triangle_sum(g: &MultiGraph, c: &Cellulation) -> Vec<usize> {
        let mut v = g.edge_vector(&[]);
        for t in &c.triangles {
            for &e in t {
                v.flip(e);
            }
        }
        v.ones()
    }

    #[test]
    fn cellulate_examples() {
        for (w, chords) in [(3, 0), (4, 1), (5, 2), (9, 6)] {
            let mut g = cycle_graph(w);
            let cyc: Vec<usize> = (0..w).collect();
            let c = cellulate(&mut g, &cyc).unwrap();
            assert_eq!(c.chords.len(), chords);
            assert_eq!(c.triangles.len(), w - 2);
            assert_eq!(triangle_sum(&g, &c), cyc);
            for t in &c.triangles {
                assert_eq!(g.odd_vertices(t).len(), 0);
            }
            assert!(g.max_degree() <= 4);
        }
    }

    #[test]
    fn cellulate_rejects_non_simple() {
        let mut g = MultiGraph::from_edges(2, &[(0, 1), (0, 1)]).unwrap();
        assert!(cellulate(&mut g, &[0, 1]).is_err());
        let mut g = MultiGraph::from_edges(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)]).unwrap();
        assert!(cellulate(&mut g, &[0, 1, 2, 3, 4, 5]).is_err());
    }
}
