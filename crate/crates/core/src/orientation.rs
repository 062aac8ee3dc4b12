//! Dynamic edge orientation: every edge is owned by one endpoint, and the
//! number of edges a vertex owns (its load) is kept small.
//!
//! Two schemes share one state type:
//!
//! * [`Scheme::SqrtLoad`] works on any graph and keeps every load at most
//!   `3·√m̄`, where `m̄` is an upper bound on `m` fixed between rebuilds. A
//!   vertex is *small* when its degree is below `2·√m̄` and *heavy* when its
//!   load exceeds `2·√m̄`. New edges go to a small endpoint when exactly one
//!   endpoint is small. A heavy owner whose load grows scans five owned edges
//!   round-robin and hands those leading to small vertices over; a small
//!   vertex whose degree drops scans five incident edges round-robin and takes
//!   all of them. At most ten flips happen per update.
//! * [`Scheme::Arboricity`] is meant for graphs of low arboricity. New edges
//!   go to the lighter endpoint; an endpoint pushed above the cap sheds one
//!   edge, along a reversed path of owned edges if no direct neighbour has
//!   room.

use std::collections::VecDeque;

use thiserror::Error;

use crate::graph::{DynBipartiteGraph, Edge, VertexId, VertexSpace};
use crate::ring::CursorRing;
use crate::DetHashMap;

const SCAN_BUDGET: usize = 5;
const SCAN_CURSOR: usize = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    SqrtLoad,
    Arboricity { cap: usize },
}

/// Default load cap for a graph of arboricity at most `alpha` on `n`
/// vertices: `4α + 2⌈log₂ n⌉`.
pub fn arboricity_cap(alpha: usize, n: usize) -> usize {
    let log = if n <= 1 { 0 } else { (usize::BITS - (n - 1).leading_zeros()) as usize };
    4 * alpha + 2 * log
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlipEvent {
    pub edge: Edge,
    pub new_owner: VertexId,
}

/// What an update did to the orientation. When `rebuilt` is set, ownership
/// was recomputed from scratch and consumers must resynchronise; `flips`
/// is then empty.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OrientOutcome {
    pub flips: Vec<FlipEvent>,
    pub rebuilt: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrientationError {
    #[error("edge {0} is not in the graph")]
    UnknownEdge(Edge),
    #[error("edge {0} already has an owner")]
    AlreadyOriented(Edge),
    #[error("edge {0} has no owner")]
    Unoriented(Edge),
    #[error("vertex {vertex} has load {load} above cap {cap} and no edge can be moved")]
    CapacityExceeded { vertex: VertexId, load: usize, cap: usize },
}

#[derive(Clone, Debug)]
pub struct OrientationState {
    space: VertexSpace,
    scheme: Scheme,
    owner: DetHashMap<Edge, VertexId>,
    owned: Vec<CursorRing<Edge>>,
    incident: Vec<CursorRing<Edge>>,
    m_bar: usize,
    rebuilds: usize,
}

impl OrientationState {
    pub fn new(space: VertexSpace, scheme: Scheme) -> Self {
        OrientationState {
            space,
            scheme,
            owner: DetHashMap::default(),
            owned: (0..space.total()).map(|_| CursorRing::new(1)).collect(),
            incident: match scheme {
                Scheme::SqrtLoad => (0..space.total()).map(|_| CursorRing::new(1)).collect(),
                Scheme::Arboricity { .. } => Vec::new(),
            },
            m_bar: 4,
            rebuilds: 0,
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn space(&self) -> VertexSpace {
        self.space
    }

    /// The edge-count bound the thresholds are computed from.
    pub fn m_bar(&self) -> usize {
        self.m_bar
    }

    pub fn rebuild_count(&self) -> usize {
        self.rebuilds
    }

    pub fn owner(&self, e: Edge) -> Option<VertexId> {
        self.owner.get(&e).copied()
    }

    pub fn load(&self, v: VertexId) -> usize {
        self.owned[self.space.dense(v)].len()
    }

    pub fn max_load(&self) -> usize {
        self.owned.iter().map(CursorRing::len).max().unwrap_or(0)
    }

    /// Owned edges of `v` in round-robin order from its scan position.
    pub fn owned_edges(&self, v: VertexId) -> impl Iterator<Item = Edge> + '_ {
        self.owned[self.space.dense(v)].iter_from(SCAN_CURSOR)
    }

    pub fn edge_count(&self) -> usize {
        self.owner.len()
    }

    /// `load² ≤ 9·m̄`, i.e. `load ≤ 3√m̄`.
    pub fn within_sqrt_bound(&self, load: usize) -> bool {
        load * load <= 9 * self.m_bar
    }

    fn is_small(&self, g: &DynBipartiteGraph, v: VertexId) -> bool {
        let d = g.degree_of(v);
        d * d < 4 * self.m_bar
    }

    fn is_heavy(&self, v: VertexId) -> bool {
        let load = self.load(v);
        load * load > 4 * self.m_bar
    }

    fn lighter_endpoint(&self, e: Edge) -> VertexId {
        if self.load(e.right()) < self.load(e.left()) {
            e.right()
        } else {
            e.left()
        }
    }

    fn attach(&mut self, e: Edge, owner: VertexId) {
        self.owner.insert(e, owner);
        self.owned[self.space.dense(owner)].insert_behind(SCAN_CURSOR, e);
        if matches!(self.scheme, Scheme::SqrtLoad) {
            for v in [e.left(), e.right()] {
                self.incident[self.space.dense(v)].insert_behind(SCAN_CURSOR, e);
            }
        }
    }

    fn detach(&mut self, e: Edge) -> Option<VertexId> {
        let owner = self.owner.remove(&e)?;
        self.owned[self.space.dense(owner)].remove(&e);
        if matches!(self.scheme, Scheme::SqrtLoad) {
            for v in [e.left(), e.right()] {
                self.incident[self.space.dense(v)].remove(&e);
            }
        }
        Some(owner)
    }

    fn flip(&mut self, e: Edge, new_owner: VertexId, flips: &mut Vec<FlipEvent>) {
        let old = self.owner[&e];
        debug_assert_ne!(old, new_owner);
        self.owned[self.space.dense(old)].remove(&e);
        self.owned[self.space.dense(new_owner)].insert_behind(SCAN_CURSOR, e);
        self.owner.insert(e, new_owner);
        flips.push(FlipEvent { edge: e, new_owner });
    }

    /// Orients `e`, which must already be in `g`.
    pub fn orient_insert(
        &mut self,
        g: &DynBipartiteGraph,
        e: Edge,
    ) -> Result<OrientOutcome, OrientationError> {
        if !g.contains(e) {
            return Err(OrientationError::UnknownEdge(e));
        }
        if self.owner.contains_key(&e) {
            return Err(OrientationError::AlreadyOriented(e));
        }
        match self.scheme {
            Scheme::SqrtLoad => Ok(self.sqrt_insert(g, e)),
            Scheme::Arboricity { cap } => self.arb_insert(e, cap),
        }
    }

    /// Forgets `e`, which must already be gone from `g`.
    pub fn orient_delete(
        &mut self,
        g: &DynBipartiteGraph,
        e: Edge,
    ) -> Result<OrientOutcome, OrientationError> {
        if g.contains(e) {
            return Err(OrientationError::UnknownEdge(e));
        }
        if self.detach(e).is_none() {
            return Err(OrientationError::Unoriented(e));
        }
        match self.scheme {
            Scheme::SqrtLoad => Ok(self.sqrt_delete(g, e)),
            Scheme::Arboricity { .. } => Ok(OrientOutcome::default()),
        }
    }

    fn sqrt_insert(&mut self, g: &DynBipartiteGraph, e: Edge) -> OrientOutcome {
        if g.edge_count() > self.m_bar {
            self.rebuild(g);
            return OrientOutcome { flips: Vec::new(), rebuilt: true };
        }
        let (l, r) = e.endpoints();
        let owner = match (self.is_small(g, l), self.is_small(g, r)) {
            (true, false) => l,
            (false, true) => r,
            _ => self.lighter_endpoint(e),
        };
        self.attach(e, owner);

        let mut flips = Vec::new();
        if self.is_heavy(owner) {
            let d = self.space.dense(owner);
            let budget = SCAN_BUDGET.min(self.owned[d].len());
            for _ in 0..budget {
                let Some(f) = self.owned[d].advance(SCAN_CURSOR) else { break };
                let other = f.other(owner);
                if self.is_small(g, other) {
                    self.flip(f, other, &mut flips);
                }
            }
        }
        OrientOutcome { flips, rebuilt: false }
    }

    fn sqrt_delete(&mut self, g: &DynBipartiteGraph, e: Edge) -> OrientOutcome {
        let m = g.edge_count();
        let target = (2 * m).max(4);
        if 4 * m < self.m_bar && target < self.m_bar {
            self.rebuild(g);
            return OrientOutcome { flips: Vec::new(), rebuilt: true };
        }
        let mut flips = Vec::new();
        for x in [e.left(), e.right()] {
            if !self.is_small(g, x) {
                continue;
            }
            let d = self.space.dense(x);
            let budget = SCAN_BUDGET.min(self.incident[d].len());
            for _ in 0..budget {
                let Some(f) = self.incident[d].advance(SCAN_CURSOR) else { break };
                if self.owner[&f] != x {
                    self.flip(f, x, &mut flips);
                }
            }
        }
        OrientOutcome { flips, rebuilt: false }
    }

    fn arb_insert(&mut self, e: Edge, cap: usize) -> Result<OrientOutcome, OrientationError> {
        let owner = self.lighter_endpoint(e);
        self.attach(e, owner);
        let mut flips = Vec::new();
        if self.load(owner) > cap {
            self.shed_one(owner, cap, &mut flips)?;
        }
        Ok(OrientOutcome { flips, rebuilt: false })
    }

    /// Moves one unit of load off `v`: directly to a neighbour below the
    /// cap if one exists, else along the shortest path of owned edges that
    /// ends at a vertex below the cap.
    fn shed_one(
        &mut self,
        v: VertexId,
        cap: usize,
        flips: &mut Vec<FlipEvent>,
    ) -> Result<(), OrientationError> {
        let direct = self.owned_edges(v).find(|f| self.load(f.other(v)) < cap);
        if let Some(f) = direct {
            self.flip(f, f.other(v), flips);
            return Ok(());
        }

        let n = self.space.total();
        let mut via: Vec<Option<Edge>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        seen[self.space.dense(v)] = true;
        queue.push_back(v);
        let mut target = None;
        'bfs: while let Some(x) = queue.pop_front() {
            for f in self.owned_edges(x) {
                let y = f.other(x);
                let dy = self.space.dense(y);
                if seen[dy] {
                    continue;
                }
                seen[dy] = true;
                via[dy] = Some(f);
                if self.load(y) < cap {
                    target = Some(y);
                    break 'bfs;
                }
                queue.push_back(y);
            }
        }
        let Some(mut y) = target else {
            return Err(OrientationError::CapacityExceeded { vertex: v, load: self.load(v), cap });
        };
        let mut path = Vec::new();
        while y != v {
            let f = via[self.space.dense(y)].expect("bfs tree edge");
            path.push((f, y));
            y = f.other(y);
        }
        // Flip from the target end so intermediate loads never exceed the cap.
        for (f, new_owner) in path {
            self.flip(f, new_owner, flips);
        }
        Ok(())
    }

    /// Recomputes ownership from scratch with `m̄ = max(4, 2m)`: a small
    /// endpoint owns the edge, otherwise the lighter endpoint does.
    pub fn rebuild(&mut self, g: &DynBipartiteGraph) {
        self.m_bar = (2 * g.edge_count()).max(4);
        self.owner.clear();
        for ring in self.owned.iter_mut().chain(self.incident.iter_mut()) {
            ring.clear();
        }
        for e in g.edges() {
            let owner = match self.scheme {
                Scheme::SqrtLoad => match (self.is_small(g, e.left()), self.is_small(g, e.right())) {
                    (true, false) => e.left(),
                    (false, true) => e.right(),
                    _ => self.lighter_endpoint(e),
                },
                Scheme::Arboricity { .. } => self.lighter_endpoint(e),
            };
            self.attach(e, owner);
        }
        self.rebuilds += 1;
    }

    /// Full recount of the orientation against `g`. Returns a description of
    /// every broken invariant.
    pub fn audit(&self, g: &DynBipartiteGraph) -> Vec<String> {
        let mut out = Vec::new();
        let edges = g.edges();
        if edges.len() != self.owner.len() {
            out.push(format!("{} owners for {} edges", self.owner.len(), edges.len()));
        }
        let mut recount = vec![0usize; self.space.total()];
        for &e in &edges {
            match self.owner.get(&e) {
                None => out.push(format!("edge {e} has no owner")),
                Some(&o) if !e.has_endpoint(o) => out.push(format!("owner {o} of {e} is not an endpoint")),
                Some(&o) => {
                    recount[self.space.dense(o)] += 1;
                    if !self.owned[self.space.dense(o)].contains(&e) {
                        out.push(format!("edge {e} missing from owned list of {o}"));
                    }
                }
            }
        }
        for v in self.space.vertices() {
            let d = self.space.dense(v);
            if recount[d] != self.owned[d].len() {
                out.push(format!("load of {v} is {} but it owns {}", self.owned[d].len(), recount[d]));
            }
            let load = self.owned[d].len();
            match self.scheme {
                Scheme::SqrtLoad => {
                    if !self.within_sqrt_bound(load) {
                        out.push(format!("load {load} of {v} exceeds 3*sqrt({})", self.m_bar));
                    }
                    if load * load > 9 * self.m_bar {
                        for f in self.owned_edges(v) {
                            let dw = g.degree_of(f.other(v));
                            if dw * dw < self.m_bar {
                                out.push(format!("overloaded {v} owns {f} to low-degree vertex"));
                            }
                        }
                    }
                }
                Scheme::Arboricity { cap } => {
                    if load > cap {
                        out.push(format!("load {load} of {v} exceeds cap {cap}"));
                    }
                }
            }
        }
        out
    }
}
