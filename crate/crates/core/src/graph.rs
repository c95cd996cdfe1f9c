//! Labelled graphs on at most 32 vertices stored as adjacency bit masks,
//! together with the connectivity classes used by the cluster sums:
//! connected, 2-connected, and the white/black classes `D(W,B)` and `C(W,B)`.
//!
//! Vertices are numbered `0..n`. A vertex set is a `u32` mask.

use std::fmt;

use crate::error::{check_bound, Error, Result};

/// Set of vertices, bit `i` for vertex `i`.
pub type VertexSet = u32;

/// Largest vertex count a [`LabelledGraph`] can hold.
pub const MAX_VERTICES: usize = 32;

/// Largest vertex count [`enumerate_graphs`] accepts.
pub const MAX_ENUMERATION: usize = 16;

/// Simple undirected graph on the vertex set `0..n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabelledGraph {
    n: u8,
    adj: [u32; MAX_VERTICES],
}

impl fmt::Debug for LabelledGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LabelledGraph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

/// Mask with the lowest `n` bits set.
#[inline]
pub fn full_set(n: usize) -> VertexSet {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Number of vertex pairs of an `n`-vertex graph.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Vertex pairs `(i, j)`, `i < j`, in edge-mask bit order:
/// `(0,1), (0,2), .., (0,n-1), (1,2), ..`.
pub fn edge_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(pair_count(n));
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Iterates over the members of a vertex set in increasing order.
#[inline]
pub fn vertices(mut set: VertexSet) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if set == 0 {
            None
        } else {
            let v = set.trailing_zeros() as usize;
            set &= set - 1;
            Some(v)
        }
    })
}

impl LabelledGraph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Result<Self> {
        check_bound("vertex count", n, 1, MAX_VERTICES)?;
        Ok(Self {
            n: n as u8,
            adj: [0; MAX_VERTICES],
        })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for &(i, j) in edges {
            if i >= n || j >= n || i == j {
                return Err(Error::Domain(format!("invalid edge ({i}, {j}) for n = {n}")));
            }
            g.add_edge(i, j);
        }
        Ok(g)
    }

    /// Graph whose edges are the set bits of `mask` in [`edge_pairs`] order.
    pub fn from_edge_mask(n: usize, mask: u128) -> Result<Self> {
        let mut g = Self::empty(n)?;
        let pairs = pair_count(n);
        if pairs < 128 && mask >> pairs != 0 {
            return Err(Error::Domain(format!("edge mask has bits beyond {pairs} pairs")));
        }
        let mut bit = 0;
        for i in 0..n {
            for j in i + 1..n {
                if bit < 128 && mask >> bit & 1 == 1 {
                    g.add_edge(i, j);
                }
                bit += 1;
            }
        }
        Ok(g)
    }

    /// Inverse of [`LabelledGraph::from_edge_mask`]. Only meaningful for `n <= 16`.
    pub fn edge_mask(&self) -> u128 {
        let mut mask = 0u128;
        let mut bit = 0;
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                if self.has_edge(i, j) {
                    mask |= 1u128 << bit;
                }
                bit += 1;
            }
        }
        mask
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn vertex_set(&self) -> VertexSet {
        full_set(self.n())
    }

    /// Neighbors of `v` as a vertex set.
    #[inline]
    pub fn neighbors(&self, v: usize) -> VertexSet {
        self.adj[v]
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i] >> j & 1 == 1
    }

    pub fn add_edge(&mut self, i: usize, j: usize) {
        debug_assert!(i != j && i < self.n() && j < self.n());
        self.adj[i] |= 1 << j;
        self.adj[j] |= 1 << i;
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) {
        self.adj[i] &= !(1 << j);
        self.adj[j] &= !(1 << i);
    }

    pub fn edge_count(&self) -> usize {
        self.adj[..self.n()]
            .iter()
            .map(|a| a.count_ones() as usize)
            .sum::<usize>()
            / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |i| vertices(self.adj[i] & !full_set(i + 1)).map(move |j| (i, j)))
    }

    /// Vertices reachable from `start` using only vertices of `within`.
    #[inline]
    pub fn reach(&self, start: VertexSet, within: VertexSet) -> VertexSet {
        let mut seen = start & within;
        let mut frontier = seen;
        while frontier != 0 {
            let mut next = 0;
            for v in vertices(frontier) {
                next |= self.adj[v];
            }
            frontier = next & within & !seen;
            seen |= frontier;
        }
        seen
    }

    /// Whether the subgraph induced on `set` is connected. Sets with at most
    /// one vertex count as connected.
    #[inline]
    pub fn is_connected_within(&self, set: VertexSet) -> bool {
        if set.count_ones() <= 1 {
            return true;
        }
        let first = set & set.wrapping_neg();
        self.reach(first, set) == set
    }

    /// Graph with `v` and its edges deleted, remaining vertices relabelled in
    /// increasing order. The second component maps new labels to old ones.
    pub fn remove_vertex(&self, v: usize) -> Result<(LabelledGraph, Vec<usize>)> {
        if v >= self.n() {
            return Err(Error::Domain(format!(
                "vertex {v} not in graph on {} vertices",
                self.n()
            )));
        }
        self.induced(self.vertex_set() & !(1 << v))
    }

    /// Subgraph induced on `set`, relabelled order-preservingly.
    pub fn induced(&self, set: VertexSet) -> Result<(LabelledGraph, Vec<usize>)> {
        let labels: Vec<usize> = vertices(set & self.vertex_set()).collect();
        let mut g = Self::empty(labels.len().max(1))?;
        if labels.is_empty() {
            return Err(Error::Domain("induced subgraph on the empty set".into()));
        }
        for (a, &i) in labels.iter().enumerate() {
            for (b, &j) in labels.iter().enumerate().skip(a + 1) {
                if self.has_edge(i, j) {
                    g.add_edge(a, b);
                }
            }
        }
        Ok((g, labels))
    }
}

/// Iterator over all labelled graphs on `n` vertices in increasing edge-mask order.
#[derive(Debug, Clone)]
pub struct GraphIter {
    n: usize,
    next: u128,
    end: u128,
}

impl Iterator for GraphIter {
    type Item = LabelledGraph;

    fn next(&mut self) -> Option<LabelledGraph> {
        if self.next >= self.end {
            return None;
        }
        let mask = self.next;
        self.next += 1;
        Some(LabelledGraph::from_edge_mask(self.n, mask).expect("mask within range"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.end - self.next;
        let left = usize::try_from(left).unwrap_or(usize::MAX);
        (left, Some(left))
    }
}

/// Number of labelled graphs on `n` vertices, `2^(n(n-1)/2)`.
pub fn graph_total(n: usize) -> u128 {
    let p = pair_count(n);
    if p >= 128 {
        u128::MAX
    } else {
        1u128 << p
    }
}

/// All `2^(n(n-1)/2)` graphs on `n` vertices, each exactly once.
pub fn enumerate_graphs(n: usize) -> Result<GraphIter> {
    check_bound("vertex count", n, 1, MAX_ENUMERATION)?;
    Ok(GraphIter {
        n,
        next: 0,
        end: graph_total(n),
    })
}

/// The graphs with edge masks in `start..end`, for sharding a sweep.
pub fn enumerate_graphs_range(n: usize, start: u128, end: u128) -> Result<GraphIter> {
    check_bound("vertex count", n, 1, MAX_ENUMERATION)?;
    let total = graph_total(n);
    Ok(GraphIter {
        n,
        next: start.min(total),
        end: end.min(total),
    })
}

pub fn is_connected(g: &LabelledGraph) -> bool {
    g.is_connected_within(g.vertex_set())
}

/// 2-connectivity by deleting each vertex in turn. The single edge on two
/// vertices counts as 2-connected.
pub fn is_two_connected(g: &LabelledGraph) -> Result<bool> {
    let n = g.n();
    if n < 2 {
        return Err(Error::Domain("2-connectivity needs at least 2 vertices".into()));
    }
    if n == 2 {
        return Ok(g.has_edge(0, 1));
    }
    let all = g.vertex_set();
    if !g.is_connected_within(all) {
        return Ok(false);
    }
    Ok((0..n).all(|v| g.is_connected_within(all & !(1 << v))))
}

/// Cut vertices via depth-first low-link numbers.
pub fn articulation_points(g: &LabelledGraph) -> VertexSet {
    fn dfs(
        g: &LabelledGraph,
        v: usize,
        parent: Option<usize>,
        timer: &mut u32,
        disc: &mut [u32],
        low: &mut [u32],
        cut: &mut VertexSet,
    ) {
        *timer += 1;
        disc[v] = *timer;
        low[v] = *timer;
        let mut children = 0;
        for w in vertices(g.neighbors(v)) {
            if disc[w] == 0 {
                children += 1;
                dfs(g, w, Some(v), timer, disc, low, cut);
                low[v] = low[v].min(low[w]);
                if parent.is_some() && low[w] >= disc[v] {
                    *cut |= 1 << v;
                }
            } else if Some(w) != parent {
                low[v] = low[v].min(disc[w]);
            }
        }
        if parent.is_none() && children > 1 {
            *cut |= 1 << v;
        }
    }

    let n = g.n();
    let mut disc = [0u32; MAX_VERTICES];
    let mut low = [0u32; MAX_VERTICES];
    let mut timer = 0;
    let mut cut = 0;
    for v in 0..n {
        if disc[v] == 0 {
            dfs(g, v, None, &mut timer, &mut disc, &mut low, &mut cut);
        }
    }
    cut
}

/// A white/black coloring of the vertices of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VertexBipartition {
    pub white: VertexSet,
    pub black: VertexSet,
}

impl VertexBipartition {
    pub fn new(white: VertexSet, black: VertexSet) -> Result<Self> {
        if white == 0 {
            return Err(Error::Domain("white set must be nonempty".into()));
        }
        if white & black != 0 {
            return Err(Error::Domain("white and black sets intersect".into()));
        }
        Ok(Self { white, black })
    }

    /// Whites `0..whites`, blacks `whites..whites+blacks`.
    pub fn leading(whites: usize, blacks: usize) -> Result<Self> {
        Self::new(full_set(whites), full_set(whites + blacks) & !full_set(whites))
    }

    pub fn vertex_set(&self) -> VertexSet {
        self.white | self.black
    }

    fn check_cover(&self, g: &LabelledGraph) -> Result<()> {
        if self.vertex_set() != g.vertex_set() {
            return Err(Error::Domain(format!(
                "bipartition covers {:#b} but graph has vertex set {:#b}",
                self.vertex_set(),
                g.vertex_set()
            )));
        }
        Ok(())
    }
}

/// Every black vertex reaches a white one inside `within`.
#[inline]
fn blacks_reach_whites(g: &LabelledGraph, white: VertexSet, black: VertexSet, within: VertexSet) -> bool {
    let reached = g.reach(white, within);
    black & !reached == 0
}

/// `D(W,B)` membership for the subgraph induced on `W ∪ B`.
pub fn in_class_d_on(g: &LabelledGraph, white: VertexSet, black: VertexSet) -> bool {
    if white.count_ones() == 1 {
        return black == 0;
    }
    let all = white | black;
    if !blacks_reach_whites(g, white, black, all) {
        return false;
    }
    vertices(all).all(|v| {
        let bit = 1u32 << v;
        blacks_reach_whites(g, white & !bit, black & !bit, all & !bit)
    })
}

/// `C(W,B)` membership for the subgraph induced on `W ∪ B`.
#[inline]
pub fn in_class_c_on(g: &LabelledGraph, white: VertexSet, black: VertexSet) -> bool {
    blacks_reach_whites(g, white, black, white | black)
}

/// Membership in `D̂(I'; L; J∖L)`: the graph lies in `D(I' ∪ L, J∖L)` and every
/// vertex of `L ∪ J∖L` reaches `I'`.
pub fn in_class_dhat_on(g: &LabelledGraph, iprime: VertexSet, l: VertexSet, jrest: VertexSet) -> bool {
    let all = iprime | l | jrest;
    in_class_d_on(g, iprime | l, jrest) && g.reach(iprime, all) == all
}

/// Whether `g` belongs to `D(W,B)`; the bipartition must cover the vertex set.
pub fn in_class_d(g: &LabelledGraph, wb: &VertexBipartition) -> Result<bool> {
    if wb.white == 0 {
        return Err(Error::Domain("white set must be nonempty".into()));
    }
    wb.check_cover(g)?;
    Ok(in_class_d_on(g, wb.white, wb.black))
}

/// Whether `g` belongs to `C(W,B)`; the bipartition must cover the vertex set.
pub fn in_class_c(g: &LabelledGraph, wb: &VertexBipartition) -> Result<bool> {
    if wb.white == 0 {
        return Err(Error::Domain("white set must be nonempty".into()));
    }
    wb.check_cover(g)?;
    Ok(in_class_c_on(g, wb.white, wb.black))
}

/// Result of deleting one vertex.
#[derive(Debug, Clone)]
pub struct VertexDecomposition {
    /// Neighbors of the removed vertex, in the labels of `reduced`.
    pub neighbors: VertexSet,
    /// Remaining graph, relabelled order-preservingly.
    pub reduced: LabelledGraph,
    /// `labels[k]` is the original label of vertex `k` of `reduced`.
    pub labels: Vec<usize>,
}

impl VertexDecomposition {
    /// The complement of `neighbors` in the reduced graph.
    pub fn non_neighbors(&self) -> VertexSet {
        self.reduced.vertex_set() & !self.neighbors
    }
}

pub fn decompose_at_vertex(g: &LabelledGraph, v: usize) -> Result<VertexDecomposition> {
    if g.n() < 2 {
        return Err(Error::Domain("cannot split off a vertex of a 1-vertex graph".into()));
    }
    let (reduced, labels) = g.remove_vertex(v)?;
    let old = g.neighbors(v);
    let neighbors = labels
        .iter()
        .enumerate()
        .filter(|&(_, &o)| old >> o & 1 == 1)
        .fold(0, |acc, (k, _)| acc | 1 << k);
    Ok(VertexDecomposition {
        neighbors,
        reduced,
        labels,
    })
}

/// Exact counts of the graph classes on `n` labelled vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphClassCount {
    pub n: usize,
    pub total: u128,
    pub connected: u128,
    pub two_connected: u128,
}

/// Counts by exhaustive sweep, split into `shards` contiguous mask ranges.
pub fn count_classes(n: usize, shards: usize) -> Result<GraphClassCount> {
    use rayon::prelude::*;

    check_bound("vertex count", n, 1, MAX_ENUMERATION)?;
    let total = graph_total(n);
    let shards = shards.max(1) as u128;
    let step = total.div_ceil(shards);
    let parts: Vec<(u128, u128)> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let iter = enumerate_graphs_range(n, k * step, (k + 1) * step).expect("n checked");
            let mut connected = 0u128;
            let mut two = 0u128;
            for g in iter {
                if is_connected(&g) {
                    connected += 1;
                    if n >= 2 && is_two_connected(&g).expect("n >= 2") {
                        two += 1;
                    }
                }
            }
            (connected, two)
        })
        .collect();
    let (connected, two_connected) = parts.iter().fold((0, 0), |(c, t), &(a, b)| (c + a, t + b));
    Ok(GraphClassCount {
        n,
        total,
        connected,
        two_connected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> LabelledGraph {
        LabelledGraph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap()
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(enumerate_graphs(1).unwrap().count(), 1);
        assert_eq!(enumerate_graphs(3).unwrap().count(), 8);
        assert_eq!(enumerate_graphs(5).unwrap().count(), 1024);
        assert!(matches!(enumerate_graphs(0), Err(Error::Bound { .. })));
        assert!(matches!(enumerate_graphs(17), Err(Error::Bound { .. })));
    }

    #[test]
    fn enumeration_is_mask_order() {
        for (k, g) in enumerate_graphs(4).unwrap().enumerate() {
            assert_eq!(g.edge_mask(), k as u128);
        }
        let shard: Vec<_> = enumerate_graphs_range(4, 10, 20)
            .unwrap()
            .map(|g| g.edge_mask())
            .collect();
        assert_eq!(shard, (10..20).collect::<Vec<u128>>());
    }

    #[test]
    fn adjacency_invariants() {
        for g in enumerate_graphs(5).unwrap() {
            for i in 0..5 {
                assert_eq!(g.neighbors(i) >> i & 1, 0);
                for j in 0..5 {
                    assert_eq!(g.has_edge(i, j), g.has_edge(j, i));
                }
            }
            assert_eq!(g.edge_count(), g.edge_mask().count_ones() as usize);
            assert_eq!(g.edges().count(), g.edge_count());
        }
    }

    #[test]
    fn small_connectivity() {
        let two = LabelledGraph::empty(2).unwrap();
        assert!(!is_connected(&two));
        let edge = LabelledGraph::from_edges(2, &[(0, 1)]).unwrap();
        assert!(is_connected(&edge));
        assert!(is_connected(&LabelledGraph::empty(1).unwrap()));
        assert!(is_two_connected(&edge).unwrap());
        assert!(!is_two_connected(&two).unwrap());
        assert!(is_two_connected(&LabelledGraph::empty(1).unwrap()).is_err());
    }

    #[test]
    fn triangle_and_path() {
        assert!(is_two_connected(&triangle()).unwrap());
        let path = LabelledGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(!is_two_connected(&path).unwrap());
        assert_eq!(articulation_points(&path), 0b010);
    }

    #[test]
    fn class_d_examples() {
        // Two whites, no blacks: every graph on {0,1} qualifies.
        let wb = VertexBipartition::leading(2, 0).unwrap();
        for g in enumerate_graphs(2).unwrap() {
            assert!(in_class_d(&g, &wb).unwrap());
        }
        // Single white with a black vertex: the class is empty.
        let wb = VertexBipartition::new(0b01, 0b10).unwrap();
        for g in enumerate_graphs(2).unwrap() {
            assert!(!in_class_d(&g, &wb).unwrap());
        }
        // W = {0,1}, B = {2}: exactly the graphs containing both black edges.
        let wb = VertexBipartition::leading(2, 1).unwrap();
        let members: Vec<_> = enumerate_graphs(3)
            .unwrap()
            .filter(|g| in_class_d(g, &wb).unwrap())
            .collect();
        assert_eq!(members.len(), 2);
        assert!(members.iter().all(|g| g.has_edge(0, 2) && g.has_edge(1, 2)));
    }

    #[test]
    fn class_c_examples() {
        let wb = VertexBipartition::leading(3, 0).unwrap();
        assert!(enumerate_graphs(3).unwrap().all(|g| in_class_c(&g, &wb).unwrap()));
        let wb = VertexBipartition::new(0b01, 0b10).unwrap();
        let edge = LabelledGraph::from_edges(2, &[(0, 1)]).unwrap();
        assert!(in_class_c(&edge, &wb).unwrap());
        // W = {0,1}, B = {2}: the black vertex needs an edge to 0 or to 1.
        let wb = VertexBipartition::leading(2, 1).unwrap();
        let count = enumerate_graphs(3)
            .unwrap()
            .filter(|g| in_class_c(g, &wb).unwrap())
            .count();
        assert_eq!(count, 6);
    }

    #[test]
    fn class_errors() {
        let g = triangle();
        assert!(VertexBipartition::new(0, 0b111).is_err());
        let partial = VertexBipartition::new(0b01, 0b10).unwrap();
        assert!(in_class_d(&g, &partial).is_err());
        assert!(in_class_c(&g, &partial).is_err());
    }

    #[test]
    fn d_implies_c() {
        for n in 2..=5 {
            for whites in 2..=n {
                let wb = VertexBipartition::leading(whites, n - whites).unwrap();
                for g in enumerate_graphs(n).unwrap() {
                    if in_class_d(&g, &wb).unwrap() {
                        assert!(in_class_c(&g, &wb).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn decomposition_examples() {
        let d = decompose_at_vertex(&triangle(), 0).unwrap();
        assert_eq!(d.neighbors, 0b11);
        assert_eq!(d.reduced.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(d.labels, vec![1, 2]);

        let star = LabelledGraph::from_edges(4, &[(2, 0), (2, 1), (2, 3)]).unwrap();
        let d = decompose_at_vertex(&star, 2).unwrap();
        assert_eq!(d.reduced.edge_count(), 0);
        assert_eq!(d.neighbors, 0b111);
        assert_eq!(d.labels, vec![0, 1, 3]);
    }

    #[test]
    fn class_counts_small() {
        let c = count_classes(4, 3).unwrap();
        assert_eq!((c.total, c.connected, c.two_connected), (64, 38, 10));
        let c = count_classes(5, 1).unwrap();
        assert_eq!((c.connected, c.two_connected), (728, 238));
    }
}
