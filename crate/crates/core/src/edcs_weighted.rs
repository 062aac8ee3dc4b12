//! Weighted EDCS for graphs of small arboricity.
//!
//! Every edge of `G` carries an integer weight in `[0, β]`; `H` is the set of
//! edges with positive weight and `d_H(v)` is the weight sum at `v`. The
//! maintained properties are
//!
//! * P1: a used edge has `d_H(u) + d_H(v) ≤ β`;
//! * P2: every edge has `d_H(u) + d_H(v) ≥ β − 1`.
//!
//! A weight-`w` edge behaves like `w` parallel unit copies, so updates are
//! processed one unit at a time. A vertex that must absorb a `+1` either has
//! no *full* edge (used, edge degree `β`) or passes the unit on by taking one
//! from a full edge; a vertex that must absorb a `-1` either has no
//! *deficient* edge (edge degree `β − 1`) or passes it on by adding one to a
//! deficient edge. Degrees along the resulting path step by one on each side,
//! so the path is simple and has at most `2β + 1` edges.
//!
//! Degree bookkeeping: while a path is being built, `degree` holds the value
//! each vertex had before the pending unit, and only the final vertex of the
//! path has its degree adjusted. Interior vertices gain and lose one unit
//! each, so they never change.
//!
//! Finding full and deficient edges uses the orientation: each vertex indexes
//! the incident edges it does *not* own by the exact degree of the neighbour
//! that owns them, and scans the edges it owns directly.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{Edge, VertexId, VertexSpace};
use crate::orientation::{FlipEvent, OrientationState};
use crate::path::{AlternatingPath, EdcsError, HChange};
use crate::DetHashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeClass {
    Full,
    Deficient,
    Neither,
}

/// Everything one graph update did to `H`.
#[derive(Clone, Debug, Default)]
pub struct WeightedReport {
    /// Unit weight changes in the order they were applied.
    pub deltas: Vec<(Edge, i32)>,
    /// Membership changes of `H` (weight crossing between 0 and 1).
    pub h_changes: Vec<HChange>,
    pub paths: Vec<AlternatingPath>,
    /// Number of unit copies inserted or deleted.
    pub units: usize,
    /// Largest number of unit changes caused by a single unit copy.
    pub max_unit_changes: usize,
}

type DegreeIndex = BTreeMap<u32, BTreeSet<Edge>>;

fn index_add(index: &mut DegreeIndex, key: u32, e: Edge) {
    index.entry(key).or_default().insert(e);
}

fn index_del(index: &mut DegreeIndex, key: u32, e: Edge) -> bool {
    let Some(set) = index.get_mut(&key) else { return false };
    let removed = set.remove(&e);
    if set.is_empty() {
        index.remove(&key);
    }
    removed
}

#[derive(Clone, Debug)]
pub struct WeightedEdcs {
    space: VertexSpace,
    beta: u32,
    weight: DetHashMap<Edge, u32>,
    degree: Vec<u32>,
    owner: DetHashMap<Edge, VertexId>,
    owned: Vec<BTreeSet<Edge>>,
    /// Per vertex: unowned incident edges keyed by the owner's degree.
    index_all: Vec<DegreeIndex>,
    /// Same, restricted to edges with positive weight.
    index_used: Vec<DegreeIndex>,
}

impl WeightedEdcs {
    pub fn new(space: VertexSpace, beta: u32) -> Result<Self, EdcsError> {
        if beta < 2 {
            return Err(EdcsError::Parameters(format!("beta must be at least 2, got {beta}")));
        }
        let n = space.total();
        Ok(WeightedEdcs {
            space,
            beta,
            weight: DetHashMap::default(),
            degree: vec![0; n],
            owner: DetHashMap::default(),
            owned: vec![BTreeSet::new(); n],
            index_all: vec![DegreeIndex::new(); n],
            index_used: vec![DegreeIndex::new(); n],
        })
    }

    /// Builds a state directly from `(edge, weight, owner)` triples. Degrees
    /// are derived from the weights; no EDCS property is checked.
    pub fn from_state(
        space: VertexSpace,
        beta: u32,
        edges: &[(Edge, u32, VertexId)],
    ) -> Result<Self, EdcsError> {
        let mut h = WeightedEdcs::new(space, beta)?;
        for &(e, w, o) in edges {
            if w > beta || !e.has_endpoint(o) || !space.contains_edge(e) {
                return Err(EdcsError::Parameters(format!("bad state entry {e} w={w} owner={o}")));
            }
            if h.weight.insert(e, w).is_some() {
                return Err(EdcsError::AlreadyTracked(e));
            }
            h.degree[space.dense(e.left())] += w;
            h.degree[space.dense(e.right())] += w;
            h.owner.insert(e, o);
            h.owned[space.dense(o)].insert(e);
        }
        h.rebuild_index();
        Ok(h)
    }

    pub fn beta(&self) -> u32 {
        self.beta
    }

    pub fn weight(&self, e: Edge) -> Option<u32> {
        self.weight.get(&e).copied()
    }

    pub fn degree(&self, v: VertexId) -> u32 {
        self.degree[self.space.dense(v)]
    }

    pub fn edge_degree(&self, e: Edge) -> u32 {
        self.degree(e.left()) + self.degree(e.right())
    }

    /// All tracked edges with their weights, sorted.
    pub fn weights(&self) -> Vec<(Edge, u32)> {
        let mut out: Vec<(Edge, u32)> = self.weight.iter().map(|(&e, &w)| (e, w)).collect();
        out.sort_unstable();
        out
    }

    /// Edges of `H` (positive weight), sorted.
    pub fn used_edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self.weight.iter().filter(|(_, &w)| w > 0).map(|(&e, _)| e).collect();
        out.sort_unstable();
        out
    }

    pub fn classify(&self, e: Edge) -> Result<EdgeClass, EdcsError> {
        let w = self.weight(e).ok_or(EdcsError::UnknownEdge(e))?;
        let ed = self.edge_degree(e);
        Ok(if w >= 1 && ed == self.beta {
            EdgeClass::Full
        } else if ed + 1 == self.beta {
            EdgeClass::Deficient
        } else {
            EdgeClass::Neither
        })
    }

    fn non_owner(&self, e: Edge) -> VertexId {
        e.other(self.owner[&e])
    }

    fn index_insert(&mut self, e: Edge) {
        let o = self.owner[&e];
        let x = self.space.dense(e.other(o));
        let key = self.degree[self.space.dense(o)];
        index_add(&mut self.index_all[x], key, e);
        if self.weight[&e] > 0 {
            index_add(&mut self.index_used[x], key, e);
        }
    }

    fn index_remove(&mut self, e: Edge) {
        let o = self.owner[&e];
        let x = self.space.dense(e.other(o));
        let key = self.degree[self.space.dense(o)];
        index_del(&mut self.index_all[x], key, e);
        index_del(&mut self.index_used[x], key, e);
    }

    fn rebuild_index(&mut self) {
        for idx in self.index_all.iter_mut().chain(self.index_used.iter_mut()) {
            idx.clear();
        }
        let edges: Vec<Edge> = self.owner.keys().copied().collect();
        for e in edges {
            self.index_insert(e);
        }
    }

    /// Starts tracking a newly inserted edge of `G` owned by `owner` and
    /// restores P1/P2.
    pub fn on_graph_insert(&mut self, e: Edge, owner: VertexId) -> Result<WeightedReport, EdcsError> {
        if self.weight.contains_key(&e) {
            return Err(EdcsError::AlreadyTracked(e));
        }
        if !e.has_endpoint(owner) {
            return Err(EdcsError::Parameters(format!("{owner} is not an endpoint of {e}")));
        }
        self.weight.insert(e, 0);
        self.owner.insert(e, owner);
        self.owned[self.space.dense(owner)].insert(e);
        self.index_insert(e);

        let mut report = WeightedReport::default();
        let (u, v) = e.endpoints();
        while self.edge_degree(e) + 1 < self.beta {
            if report.units == self.beta as usize {
                return Err(EdcsError::InvariantBreach(format!(
                    "insertion of {e} needed more than {} units",
                    self.beta
                )));
            }
            let before = report.deltas.len();
            self.apply_unit(e, 1, &mut report);
            self.fix(u, 1, &mut report)?;
            self.fix(v, 1, &mut report)?;
            report.units += 1;
            report.max_unit_changes = report.max_unit_changes.max(report.deltas.len() - before);
        }
        Ok(report)
    }

    /// Stops tracking an edge deleted from `G`, removing its weight one unit
    /// at a time and restoring P1/P2 after each.
    pub fn on_graph_delete(&mut self, e: Edge) -> Result<WeightedReport, EdcsError> {
        let w = self.weight(e).ok_or(EdcsError::UnknownEdge(e))?;
        self.index_remove(e);
        let o = self.owner.remove(&e).expect("tracked edge has an owner");
        self.owned[self.space.dense(o)].remove(&e);

        let mut report = WeightedReport::default();
        let (u, v) = e.endpoints();
        for _ in 0..w {
            let before = report.deltas.len();
            self.apply_unit(e, -1, &mut report);
            self.fix(u, -1, &mut report)?;
            self.fix(v, -1, &mut report)?;
            report.units += 1;
            report.max_unit_changes = report.max_unit_changes.max(report.deltas.len() - before);
        }
        self.weight.remove(&e);
        Ok(report)
    }

    /// Moves the index entry of a flipped edge to the new non-owner. Flips of
    /// edges not yet tracked are ignored; they are picked up on insertion.
    pub fn on_flip(&mut self, flip: FlipEvent) -> Result<(), EdcsError> {
        let e = flip.edge;
        let Some(&old) = self.owner.get(&e) else { return Ok(()) };
        if !e.has_endpoint(flip.new_owner) {
            return Err(EdcsError::Parameters(format!("{} is not an endpoint of {e}", flip.new_owner)));
        }
        if old == flip.new_owner {
            return Ok(());
        }
        self.index_remove(e);
        self.owned[self.space.dense(old)].remove(&e);
        self.owner.insert(e, flip.new_owner);
        self.owned[self.space.dense(flip.new_owner)].insert(e);
        self.index_insert(e);
        Ok(())
    }

    /// Re-reads ownership of every tracked edge after an orientation rebuild.
    /// Edges the orientation no longer knows keep their owner until their
    /// deletion arrives.
    pub fn resync(&mut self, orientation: &OrientationState) -> Result<(), EdcsError> {
        for set in self.owned.iter_mut() {
            set.clear();
        }
        let edges: Vec<Edge> = self.weight.keys().copied().collect();
        for e in edges {
            let o = orientation.owner(e).unwrap_or(self.owner[&e]);
            self.owner.insert(e, o);
            self.owned[self.space.dense(o)].insert(e);
        }
        self.rebuild_index();
        Ok(())
    }

    fn apply_unit(&mut self, e: Edge, delta: i32, report: &mut WeightedReport) {
        let tracked = self.owner.contains_key(&e);
        let w = self.weight.get_mut(&e).expect("weighted edge exists");
        let old = *w;
        *w = (old as i64 + delta as i64) as u32;
        let new = *w;
        report.deltas.push((e, delta));
        if old == 0 && new > 0 {
            report.h_changes.push(HChange::Insert(e));
            if tracked {
                let x = self.space.dense(self.non_owner(e));
                let key = self.degree[self.space.dense(self.owner[&e])];
                index_add(&mut self.index_used[x], key, e);
            }
        } else if old > 0 && new == 0 {
            report.h_changes.push(HChange::Delete(e));
            if tracked {
                let x = self.space.dense(self.non_owner(e));
                let key = self.degree[self.space.dense(self.owner[&e])];
                index_del(&mut self.index_used[x], key, e);
            }
        }
    }

    fn set_degree(&mut self, x: VertexId, new: u32) {
        let dx = self.space.dense(x);
        let old = self.degree[dx];
        if old == new {
            return;
        }
        let owned: Vec<Edge> = self.owned[dx].iter().copied().collect();
        for e in owned {
            let y = self.space.dense(e.other(x));
            index_del(&mut self.index_all[y], old, e);
            index_add(&mut self.index_all[y], new, e);
            if self.weight[&e] > 0 {
                index_del(&mut self.index_used[y], old, e);
                index_add(&mut self.index_used[y], new, e);
            }
        }
        self.degree[dx] = new;
    }

    /// An incident used edge of `x` with edge degree exactly `β`.
    pub fn find_full(&self, x: VertexId) -> Option<Edge> {
        let dx = self.space.dense(x);
        let deg = self.degree[dx];
        if deg <= self.beta {
            if let Some(e) = self.index_used[dx].get(&(self.beta - deg)).and_then(|s| s.first()) {
                return Some(*e);
            }
        }
        self.owned[dx]
            .iter()
            .find(|e| self.weight[e] > 0 && deg + self.degree(e.other(x)) == self.beta)
            .copied()
    }

    /// An incident edge of `x` with edge degree exactly `β − 1`.
    pub fn find_deficient(&self, x: VertexId) -> Option<Edge> {
        let dx = self.space.dense(x);
        let deg = self.degree[dx];
        if deg < self.beta {
            let key = self.beta - 1 - deg;
            if let Some(e) = self.index_all[dx]
                .get(&key)
                .and_then(|s| s.iter().find(|e| self.weight[e] < self.beta))
            {
                return Some(*e);
            }
        }
        self.owned[dx]
            .iter()
            .find(|e| self.weight[e] < self.beta && deg + self.degree(e.other(x)) + 1 == self.beta)
            .copied()
    }

    /// Absorbs a pending `delta` (±1) at `x` along an alternating path.
    fn fix(&mut self, x: VertexId, delta: i8, report: &mut WeightedReport) -> Result<(), EdcsError> {
        let max_len = 2 * self.beta as usize + 1;
        let mut path = AlternatingPath::start(x, self.degree(x));
        let mut cur = x;
        let mut need = delta;
        loop {
            let next = if need > 0 { self.find_full(cur) } else { self.find_deficient(cur) };
            match next {
                None => {
                    let d = self.degree(cur) as i64 + need as i64;
                    if d < 0 || d > self.beta as i64 {
                        return Err(EdcsError::InvariantBreach(format!("degree of {cur} would become {d}")));
                    }
                    self.set_degree(cur, d as u32);
                    path.end_delta = need;
                    break;
                }
                Some(e) => {
                    let y = e.other(cur);
                    self.apply_unit(e, -need as i32, report);
                    path.push(e, -need, y, self.degree(y));
                    if path.len() > max_len {
                        return Err(EdcsError::InvariantBreach(format!(
                            "alternating path from {x} exceeds {max_len} edges"
                        )));
                    }
                    cur = y;
                    need = -need;
                }
            }
        }
        report.paths.push(path);
        Ok(())
    }

    /// Compares the live indexes and degrees against a reconstruction from
    /// `(owner, weight)` alone.
    pub fn audit(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut degree = vec![0u32; self.space.total()];
        for (&e, &w) in &self.weight {
            degree[self.space.dense(e.left())] += w;
            degree[self.space.dense(e.right())] += w;
            if w > self.beta {
                out.push(format!("weight {w} of {e} exceeds beta"));
            }
        }
        if degree != self.degree {
            out.push("degree table differs from weight sums".to_string());
        }
        let mut all = vec![DegreeIndex::new(); self.space.total()];
        let mut used = vec![DegreeIndex::new(); self.space.total()];
        for (&e, &o) in &self.owner {
            let x = self.space.dense(e.other(o));
            let key = degree[self.space.dense(o)];
            index_add(&mut all[x], key, e);
            if self.weight[&e] > 0 {
                index_add(&mut used[x], key, e);
            }
            if !self.owned[self.space.dense(o)].contains(&e) {
                out.push(format!("{e} missing from owned set of {o}"));
            }
        }
        if all != self.index_all || used != self.index_used {
            out.push("neighbour index differs from reconstruction".to_string());
        }
        out
    }
}
