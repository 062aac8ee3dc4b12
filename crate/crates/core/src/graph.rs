//! The dynamic bipartite input graph.
//!
//! Vertices live on two fixed sides; only edges change over time. Every
//! other layer of the pipeline reads degrees and adjacency from here.

use std::fmt;

use thiserror::Error;

use crate::DetHashSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// A vertex, identified by its side and its index on that side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId {
    pub side: Side,
    pub index: u32,
}

impl VertexId {
    pub const fn left(index: u32) -> Self {
        VertexId { side: Side::Left, index }
    }

    pub const fn right(index: u32) -> Self {
        VertexId { side: Side::Right, index }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::Left => write!(f, "L{}", self.index),
            Side::Right => write!(f, "R{}", self.index),
        }
    }
}

/// An edge between a left and a right vertex. Ordered by `(left, right)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    left: u32,
    right: u32,
}

impl Edge {
    pub const fn new(left: u32, right: u32) -> Self {
        Edge { left, right }
    }

    /// Builds an edge from two endpoints given in any order.
    pub fn between(a: VertexId, b: VertexId) -> Result<Self, GraphError> {
        match (a.side, b.side) {
            (Side::Left, Side::Right) => Ok(Edge::new(a.index, b.index)),
            (Side::Right, Side::Left) => Ok(Edge::new(b.index, a.index)),
            _ => Err(GraphError::SameSide(a, b)),
        }
    }

    pub const fn left(self) -> VertexId {
        VertexId::left(self.left)
    }

    pub const fn right(self) -> VertexId {
        VertexId::right(self.right)
    }

    pub const fn left_index(self) -> u32 {
        self.left
    }

    pub const fn right_index(self) -> u32 {
        self.right
    }

    pub fn endpoints(self) -> (VertexId, VertexId) {
        (self.left(), self.right())
    }

    pub fn has_endpoint(self, v: VertexId) -> bool {
        match v.side {
            Side::Left => v.index == self.left,
            Side::Right => v.index == self.right,
        }
    }

    /// The endpoint that is not `v`. `v` must be an endpoint.
    pub fn other(self, v: VertexId) -> VertexId {
        debug_assert!(self.has_endpoint(v), "{v} is not an endpoint of {self}");
        match v.side {
            Side::Left => self.right(),
            Side::Right => self.left(),
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(L{},R{})", self.left, self.right)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {0} is already present")]
    DuplicateEdge(Edge),
    #[error("edge {0} is not present")]
    MissingEdge(Edge),
    #[error("endpoints {0} and {1} are on the same side")]
    SameSide(VertexId, VertexId),
    #[error("vertex {0} is out of range")]
    OutOfRange(VertexId),
}

/// Maps vertices of both sides onto one dense index range: left vertices
/// first, then right vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexSpace {
    pub n_left: u32,
    pub n_right: u32,
}

impl VertexSpace {
    pub const fn new(n_left: u32, n_right: u32) -> Self {
        VertexSpace { n_left, n_right }
    }

    pub fn total(self) -> usize {
        self.n_left as usize + self.n_right as usize
    }

    pub fn contains(self, v: VertexId) -> bool {
        match v.side {
            Side::Left => v.index < self.n_left,
            Side::Right => v.index < self.n_right,
        }
    }

    pub fn contains_edge(self, e: Edge) -> bool {
        e.left < self.n_left && e.right < self.n_right
    }

    #[inline]
    pub fn dense(self, v: VertexId) -> usize {
        match v.side {
            Side::Left => v.index as usize,
            Side::Right => self.n_left as usize + v.index as usize,
        }
    }

    #[inline]
    pub fn vertex(self, dense: usize) -> VertexId {
        if dense < self.n_left as usize {
            VertexId::left(dense as u32)
        } else {
            VertexId::right((dense - self.n_left as usize) as u32)
        }
    }

    pub fn vertices(self) -> impl Iterator<Item = VertexId> {
        (0..self.n_left)
            .map(VertexId::left)
            .chain((0..self.n_right).map(VertexId::right))
    }

    pub fn check(self, v: VertexId) -> Result<(), GraphError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(GraphError::OutOfRange(v))
        }
    }

    pub fn check_edge(self, e: Edge) -> Result<(), GraphError> {
        self.check(e.left())?;
        self.check(e.right())
    }
}

/// The evolving bipartite graph `G`. Vertex counts are fixed at
/// construction; edges are inserted and deleted one at a time.
#[derive(Clone, Debug)]
pub struct DynBipartiteGraph {
    space: VertexSpace,
    adjacency: Vec<DetHashSet<VertexId>>,
    edge_count: usize,
}

impl DynBipartiteGraph {
    pub fn new(n_left: u32, n_right: u32) -> Self {
        let space = VertexSpace::new(n_left, n_right);
        DynBipartiteGraph {
            space,
            adjacency: vec![DetHashSet::default(); space.total()],
            edge_count: 0,
        }
    }

    pub fn space(&self) -> VertexSpace {
        self.space
    }

    pub fn n_left(&self) -> u32 {
        self.space.n_left
    }

    pub fn n_right(&self) -> u32 {
        self.space.n_right
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.space.contains_edge(e) && self.adjacency[e.left as usize].contains(&e.right())
    }

    pub fn insert_edge(&mut self, e: Edge) -> Result<(), GraphError> {
        self.space.check_edge(e)?;
        let (l, r) = (self.space.dense(e.left()), self.space.dense(e.right()));
        if !self.adjacency[l].insert(e.right()) {
            return Err(GraphError::DuplicateEdge(e));
        }
        self.adjacency[r].insert(e.left());
        self.edge_count += 1;
        Ok(())
    }

    pub fn delete_edge(&mut self, e: Edge) -> Result<(), GraphError> {
        self.space.check_edge(e)?;
        let (l, r) = (self.space.dense(e.left()), self.space.dense(e.right()));
        if !self.adjacency[l].remove(&e.right()) {
            return Err(GraphError::MissingEdge(e));
        }
        self.adjacency[r].remove(&e.left());
        self.edge_count -= 1;
        Ok(())
    }

    pub fn degree(&self, v: VertexId) -> Result<usize, GraphError> {
        self.space.check(v)?;
        Ok(self.adjacency[self.space.dense(v)].len())
    }

    /// Degree without range checking; panics on an invalid vertex.
    #[inline]
    pub fn degree_of(&self, v: VertexId) -> usize {
        self.adjacency[self.space.dense(v)].len()
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adjacency[self.space.dense(v)].iter().copied()
    }

    /// All incident edges of `v`, sorted.
    pub fn incident_edges(&self, v: VertexId) -> Vec<Edge> {
        let mut out: Vec<Edge> = self
            .neighbors(v)
            .map(|u| Edge::between(v, u).expect("adjacency is bipartite"))
            .collect();
        out.sort_unstable();
        out
    }

    /// All edges, sorted by `(left, right)`.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_count);
        for l in 0..self.space.n_left {
            out.extend(self.adjacency[l as usize].iter().map(|r| Edge::new(l, r.index)));
        }
        out.sort_unstable();
        out
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(|a| a.len()).max().unwrap_or(0)
    }

    /// Full rescan of the structural invariants: symmetric adjacency,
    /// bipartite neighbors and `m = Σ d(v) / 2`.
    pub fn check_consistency(&self) -> Result<(), String> {
        let mut degree_sum = 0usize;
        for (dense, adj) in self.adjacency.iter().enumerate() {
            let v = self.space.vertex(dense);
            degree_sum += adj.len();
            for &u in adj {
                if u.side == v.side || !self.space.contains(u) {
                    return Err(format!("bad neighbor {u} of {v}"));
                }
                if !self.adjacency[self.space.dense(u)].contains(&v) {
                    return Err(format!("asymmetric adjacency {v} -> {u}"));
                }
            }
        }
        if degree_sum != 2 * self.edge_count {
            return Err(format!(
                "degree sum {degree_sum} does not match edge count {}",
                self.edge_count
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    #[test]
    fn insert_single_edge() {
        let mut g = DynBipartiteGraph::new(2, 2);
        g.insert_edge(Edge::new(0, 1)).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(VertexId::left(0)).unwrap(), 1);
        assert_eq!(g.degree(VertexId::right(1)).unwrap(), 1);
        assert_eq!(g.degree(VertexId::left(1)).unwrap(), 0);
    }

    #[test]
    fn duplicate_and_missing_edges_are_rejected() {
        let mut g = DynBipartiteGraph::new(2, 2);
        g.insert_edge(Edge::new(0, 1)).unwrap();
        assert_eq!(g.insert_edge(Edge::new(0, 1)), Err(GraphError::DuplicateEdge(Edge::new(0, 1))));
        assert_eq!(g.edge_count(), 1);

        let mut empty = DynBipartiteGraph::new(2, 2);
        assert_eq!(empty.delete_edge(Edge::new(0, 0)), Err(GraphError::MissingEdge(Edge::new(0, 0))));
    }

    #[test]
    fn invalid_endpoints_are_rejected() {
        let mut g = DynBipartiteGraph::new(2, 2);
        assert_eq!(g.insert_edge(Edge::new(2, 0)), Err(GraphError::OutOfRange(VertexId::left(2))));
        assert!(matches!(
            Edge::between(VertexId::left(0), VertexId::left(1)),
            Err(GraphError::SameSide(..))
        ));
        assert!(g.degree(VertexId::right(5)).is_err());
    }

    #[test]
    fn delete_restores_empty_graph() {
        let mut g = DynBipartiteGraph::new(2, 2);
        g.insert_edge(Edge::new(0, 1)).unwrap();
        g.delete_edge(Edge::new(0, 1)).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.max_degree(), 0);
    }

    #[test]
    fn star_center_degree() {
        let mut g = DynBipartiteGraph::new(1, 7);
        for r in 0..7 {
            g.insert_edge(Edge::new(0, r)).unwrap();
        }
        assert_eq!(g.degree(VertexId::left(0)).unwrap(), 7);
        assert_eq!(g.degree(VertexId::right(3)).unwrap(), 1);
    }

    #[test]
    fn between_accepts_either_order() {
        let e = Edge::between(VertexId::right(3), VertexId::left(1)).unwrap();
        assert_eq!(e, Edge::new(1, 3));
        assert_eq!(e.other(VertexId::left(1)), VertexId::right(3));
    }

    /// Replays random updates against a plain edge log and compares degrees
    /// and adjacency recomputed from that log.
    #[test]
    fn random_updates_match_replay_log() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut g = DynBipartiteGraph::new(10, 12);
        let mut log: BTreeSet<Edge> = BTreeSet::new();
        for _ in 0..1000 {
            let e = Edge::new(rng.gen_range(0..10), rng.gen_range(0..12));
            if log.contains(&e) {
                g.delete_edge(e).unwrap();
                log.remove(&e);
            } else {
                g.insert_edge(e).unwrap();
                log.insert(e);
            }
        }
        g.check_consistency().unwrap();
        assert_eq!(g.edge_count(), log.len());
        assert_eq!(g.edges(), log.iter().copied().collect::<Vec<_>>());
        for v in g.space().vertices() {
            let expected = log.iter().filter(|e| e.has_endpoint(v)).count();
            assert_eq!(g.degree(v).unwrap(), expected, "degree of {v}");
        }
    }

    #[test]
    fn delete_all_edges_in_random_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut g = DynBipartiteGraph::new(8, 8);
        let mut edges = Vec::new();
        while edges.len() < 50 {
            let e = Edge::new(rng.gen_range(0..8), rng.gen_range(0..8));
            if g.insert_edge(e).is_ok() {
                edges.push(e);
            }
        }
        assert_eq!(g.edge_count(), 50);
        edges.shuffle(&mut rng);
        for e in edges {
            g.delete_edge(e).unwrap();
        }
        assert_eq!(g.edge_count(), 0);
        assert!(g.space().vertices().all(|v| g.degree_of(v) == 0));
    }

    #[test]
    fn insert_into_five_edge_graph_keeps_symmetry() {
        let mut g = DynBipartiteGraph::new(4, 4);
        for (l, r) in [(0, 0), (0, 1), (1, 1), (2, 3), (3, 2)] {
            g.insert_edge(Edge::new(l, r)).unwrap();
        }
        g.insert_edge(Edge::new(3, 3)).unwrap();
        assert_eq!(g.edge_count(), 6);
        g.check_consistency().unwrap();
    }

    proptest::proptest! {
        #[test]
        fn insert_then_delete_restores_prior_state(
            seed_edges in proptest::collection::vec((0u32..6, 0u32..6), 0..30),
            extra in (0u32..6, 0u32..6),
        ) {
            let mut g = DynBipartiteGraph::new(6, 6);
            for (l, r) in seed_edges {
                let _ = g.insert_edge(Edge::new(l, r));
            }
            let e = Edge::new(extra.0, extra.1);
            proptest::prop_assume!(!g.contains(e));
            let before = g.edges();
            let degrees: Vec<usize> = g.space().vertices().map(|v| g.degree_of(v)).collect();
            g.insert_edge(e).unwrap();
            g.delete_edge(e).unwrap();
            proptest::prop_assert_eq!(g.edges(), before);
            let after: Vec<usize> = g.space().vertices().map(|v| g.degree_of(v)).collect();
            proptest::prop_assert_eq!(after, degrees);
            proptest::prop_assert!(g.check_consistency().is_ok());
        }
    }
}
