//! Unweighted EDCS for arbitrary bipartite graphs.
//!
//! `H ⊆ E` is maintained with
//!
//! * P1: every edge of `H` has `d_H(u) + d_H(v) ≤ β`;
//! * P2: every edge of `E \ H` has `d_H(u) + d_H(v) ≥ β − λβ`.
//!
//! The slack `λβ` is kept as an integer multiple of 6 and split into six
//! ranges of width `ℓ = λβ / 6`. Edge degrees are labelled `F0` (below
//! `β − λβ`), `F1..F6` (one width each, shared endpoints going to the lower
//! label) and `F7` (exactly `β`, i.e. full). An unused edge labelled `F5` or
//! below is *augmentable*.
//!
//! Repairs alternate between removing full edges and adding augmentable
//! ones. Full edges are found by scanning `H` at the vertex. Augmentable
//! edges are found in two places:
//!
//! * unowned neighbours sit in buckets of width `ℓ` by the last degree value
//!   their owner pushed; the vertex probes eight consecutive buckets and
//!   checks one candidate exactly;
//! * owned edges are visited `r` at a time from the repair cursor `q`.
//!
//! Whenever a path ends at a vertex its degree changes, and the vertex pushes
//! its new degree to the next `r` edges it owns, starting at cursor `p`.
//! With at most `3√m̄` owned edges per vertex and `r·ℓ ≥ 3√m̄`, every
//! estimate stays within `ℓ` of the truth.
//!
//! Buckets only hold neighbours across *unused* edges, so the candidate
//! picked from a bucket is never already in `H`.

use std::collections::BTreeSet;

use crate::graph::{Edge, VertexId, VertexSpace};
use crate::orientation::{FlipEvent, OrientationState};
use crate::path::{AlternatingPath, EdcsError, HChange};
use crate::ring::CursorRing;
use crate::{DetHashMap, DetHashSet};

const INFO: usize = 0;
const REPAIR: usize = 1;

/// Range label `F0..F7` of an edge degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RangeLabel(u8);

impl RangeLabel {
    pub const FULL: RangeLabel = RangeLabel(7);

    pub fn new(index: u8) -> Option<Self> {
        (index <= 7).then_some(RangeLabel(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }
}

impl std::fmt::Display for RangeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "F{}", self.0)
    }
}

/// `β` together with the integer slack `λβ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneralParams {
    beta: u32,
    slack: u32,
}

impl GeneralParams {
    pub fn new(beta: u32, slack: u32) -> Result<Self, EdcsError> {
        if slack == 0 || !slack.is_multiple_of(6) {
            return Err(EdcsError::Parameters(format!("slack {slack} must be a positive multiple of 6")));
        }
        if slack >= beta {
            return Err(EdcsError::Parameters(format!("slack {slack} must be below beta {beta}")));
        }
        Ok(GeneralParams { beta, slack })
    }

    pub fn beta(self) -> u32 {
        self.beta
    }

    /// `λβ`.
    pub fn slack(self) -> u32 {
        self.slack
    }

    pub fn lambda(self) -> f64 {
        self.slack as f64 / self.beta as f64
    }

    /// Bucket and range width `ℓ`.
    pub fn ell(self) -> u32 {
        self.slack / 6
    }

    /// `β(1 − λ)`, the P2 threshold.
    pub fn lower(self) -> u32 {
        self.beta - self.slack
    }

    /// Buckets cover estimates `0..=β`.
    pub fn bucket_count(self) -> usize {
        (self.beta / self.ell()) as usize + 1
    }

    /// `12/λ + 1`.
    pub fn max_path_len(self) -> usize {
        (12 * self.beta).div_ceil(self.slack) as usize + 1
    }

    /// `24/λ + 2`.
    pub fn max_h_changes(self) -> usize {
        (24 * self.beta).div_ceil(self.slack) as usize + 2
    }

    /// `r = ⌈18√m̄ / (λβ)⌉`, at least 1.
    pub fn scan_length(self, m_bar: usize) -> usize {
        let r = (18.0 * (m_bar as f64).sqrt() / self.slack as f64).ceil() as usize;
        r.max(1)
    }

    /// Label of an edge degree in `0..=2β`.
    pub fn range_of(self, edge_degree: u32) -> Result<RangeLabel, EdcsError> {
        if edge_degree > 2 * self.beta {
            return Err(EdcsError::Parameters(format!(
                "edge degree {edge_degree} outside 0..={}",
                2 * self.beta
            )));
        }
        let lower = self.lower();
        Ok(if edge_degree >= self.beta {
            RangeLabel(7)
        } else if edge_degree < lower {
            RangeLabel(0)
        } else {
            let above = edge_degree - lower;
            RangeLabel(above.div_ceil(self.ell()).max(1) as u8)
        })
    }

    /// Unused edges at or below this edge degree are augmentable (`F5` or
    /// lower).
    pub fn augmentable_max(self) -> u32 {
        self.beta - self.ell()
    }
}

#[derive(Clone, Debug, Default)]
pub struct GeneralReport {
    pub h_changes: Vec<HChange>,
    pub paths: Vec<AlternatingPath>,
}

/// Per-vertex odometers for the two cursors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CursorStats {
    pub info_steps: u64,
    pub repair_steps: u64,
    pub decreases: u64,
}

#[derive(Clone, Debug)]
pub struct GeneralEdcs {
    params: GeneralParams,
    space: VertexSpace,
    r: usize,
    degree: Vec<u32>,
    in_h: DetHashSet<Edge>,
    h_adj: Vec<BTreeSet<Edge>>,
    owner: DetHashMap<Edge, VertexId>,
    /// Estimate of the owner's degree, held by the non-owner.
    estimate: DetHashMap<Edge, u32>,
    owned: Vec<CursorRing<Edge>>,
    /// Tracked edges per vertex; only read by the audits.
    incident: Vec<BTreeSet<Edge>>,
    /// `buckets[x][b]`: owners of unused edges into `x` whose estimate lies
    /// in `[bℓ, (b+1)ℓ)`.
    buckets: Vec<Vec<BTreeSet<VertexId>>>,
    stats: Vec<CursorStats>,
    audit: bool,
    violations: Vec<String>,
}

impl GeneralEdcs {
    pub fn new(space: VertexSpace, params: GeneralParams, m_bar: usize) -> Self {
        let n = space.total();
        GeneralEdcs {
            params,
            space,
            r: params.scan_length(m_bar),
            degree: vec![0; n],
            in_h: DetHashSet::default(),
            h_adj: vec![BTreeSet::new(); n],
            owner: DetHashMap::default(),
            estimate: DetHashMap::default(),
            owned: (0..n).map(|_| CursorRing::new(2)).collect(),
            incident: vec![BTreeSet::new(); n],
            buckets: vec![vec![BTreeSet::new(); params.bucket_count()]; n],
            stats: vec![CursorStats::default(); n],
            audit: false,
            violations: Vec::new(),
        }
    }

    /// Turns on per-step checks of the bucket window, the bucket pick and
    /// the path-end condition. Failures accumulate in [`Self::violations`].
    pub fn set_audit(&mut self, on: bool) {
        self.audit = on;
    }

    pub fn violations(&self) -> &[String] {
        &self.violations
    }

    pub fn take_violations(&mut self) -> Vec<String> {
        std::mem::take(&mut self.violations)
    }

    pub fn params(&self) -> GeneralParams {
        self.params
    }

    pub fn scan_length(&self) -> usize {
        self.r
    }

    pub fn degree(&self, v: VertexId) -> u32 {
        self.degree[self.space.dense(v)]
    }

    pub fn edge_degree(&self, e: Edge) -> u32 {
        self.degree(e.left()) + self.degree(e.right())
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.in_h.contains(&e)
    }

    pub fn is_tracked(&self, e: Edge) -> bool {
        self.owner.contains_key(&e)
    }

    pub fn h_size(&self) -> usize {
        self.in_h.len()
    }

    /// Edges of `H`, sorted.
    pub fn h_edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self.in_h.iter().copied().collect();
        out.sort_unstable();
        out
    }

    pub fn estimate(&self, e: Edge) -> Option<u32> {
        self.estimate.get(&e).copied()
    }

    pub fn cursor_stats(&self, v: VertexId) -> CursorStats {
        self.stats[self.space.dense(v)]
    }

    pub fn range_of_edge(&self, e: Edge) -> RangeLabel {
        self.params.range_of(self.edge_degree(e)).expect("degrees never exceed beta")
    }

    pub fn is_augmentable(&self, e: Edge) -> bool {
        !self.in_h.contains(&e) && self.edge_degree(e) <= self.params.augmentable_max()
    }

    fn bucket_of(&self, estimate: u32) -> usize {
        (estimate / self.params.ell()) as usize
    }

    fn bucket_add(&mut self, e: Edge) {
        let o = self.owner[&e];
        let b = self.bucket_of(self.estimate[&e]);
        let x = self.space.dense(e.other(o));
        self.buckets[x][b].insert(o);
    }

    fn bucket_remove(&mut self, e: Edge) {
        let o = self.owner[&e];
        let b = self.bucket_of(self.estimate[&e]);
        let x = self.space.dense(e.other(o));
        self.buckets[x][b].remove(&o);
    }

    fn refresh_estimate(&mut self, e: Edge) {
        let used = self.in_h.contains(&e);
        if !used {
            self.bucket_remove(e);
        }
        let o = self.owner[&e];
        self.estimate.insert(e, self.degree(o));
        if !used {
            self.bucket_add(e);
        }
    }

    fn set_used(&mut self, e: Edge, used: bool, report: &mut GeneralReport) {
        let tracked = self.owner.contains_key(&e);
        let (a, b) = (self.space.dense(e.left()), self.space.dense(e.right()));
        if used {
            if tracked {
                self.bucket_remove(e);
            }
            self.in_h.insert(e);
            self.h_adj[a].insert(e);
            self.h_adj[b].insert(e);
            report.h_changes.push(HChange::Insert(e));
        } else {
            self.in_h.remove(&e);
            self.h_adj[a].remove(&e);
            self.h_adj[b].remove(&e);
            if tracked {
                self.bucket_add(e);
            }
            report.h_changes.push(HChange::Delete(e));
        }
    }

    fn track(&mut self, e: Edge, owner: VertexId) {
        self.owner.insert(e, owner);
        self.estimate.insert(e, self.degree(owner));
        self.owned[self.space.dense(owner)].insert_behind(INFO, e);
        self.incident[self.space.dense(e.left())].insert(e);
        self.incident[self.space.dense(e.right())].insert(e);
        if !self.in_h.contains(&e) {
            self.bucket_add(e);
        }
    }

    fn untrack(&mut self, e: Edge) -> VertexId {
        if !self.in_h.contains(&e) {
            self.bucket_remove(e);
        }
        let o = self.owner.remove(&e).expect("tracked edge has an owner");
        self.estimate.remove(&e);
        self.owned[self.space.dense(o)].remove(&e);
        self.incident[self.space.dense(e.left())].remove(&e);
        self.incident[self.space.dense(e.right())].remove(&e);
        o
    }

    /// Starts tracking an edge just inserted into `G` and owned by `owner`.
    pub fn on_graph_insert(&mut self, e: Edge, owner: VertexId) -> Result<GeneralReport, EdcsError> {
        if self.owner.contains_key(&e) {
            return Err(EdcsError::AlreadyTracked(e));
        }
        if !e.has_endpoint(owner) || !self.space.contains_edge(e) {
            return Err(EdcsError::Parameters(format!("bad insertion {e} owned by {owner}")));
        }
        self.track(e, owner);
        let mut report = GeneralReport::default();
        if self.edge_degree(e) < self.params.lower() {
            self.set_used(e, true, &mut report);
            self.fix(e.left(), 1, &mut report)?;
            self.fix(e.right(), 1, &mut report)?;
        }
        self.check_change_count(&report)?;
        Ok(report)
    }

    /// Stops tracking an edge just deleted from `G`.
    pub fn on_graph_delete(&mut self, e: Edge) -> Result<GeneralReport, EdcsError> {
        if !self.owner.contains_key(&e) {
            return Err(EdcsError::UnknownEdge(e));
        }
        let used = self.in_h.contains(&e);
        self.untrack(e);
        let mut report = GeneralReport::default();
        if used {
            self.set_used(e, false, &mut report);
            self.fix(e.left(), -1, &mut report)?;
            self.fix(e.right(), -1, &mut report)?;
        }
        self.check_change_count(&report)?;
        Ok(report)
    }

    fn check_change_count(&self, report: &GeneralReport) -> Result<(), EdcsError> {
        let max = self.params.max_h_changes();
        if report.h_changes.len() > max {
            return Err(EdcsError::InvariantBreach(format!(
                "{} H changes in one update, bound {max}",
                report.h_changes.len()
            )));
        }
        Ok(())
    }

    /// Moves a flipped edge to its new owner with a fresh estimate. `H` is
    /// not touched. Flips of untracked edges are ignored.
    pub fn on_flip(&mut self, flip: FlipEvent) -> Result<(), EdcsError> {
        let e = flip.edge;
        let Some(&old) = self.owner.get(&e) else { return Ok(()) };
        if !e.has_endpoint(flip.new_owner) {
            return Err(EdcsError::Parameters(format!("{} is not an endpoint of {e}", flip.new_owner)));
        }
        if old != flip.new_owner {
            self.untrack(e);
            self.track(e, flip.new_owner);
        }
        Ok(())
    }

    /// Re-reads ownership after an orientation rebuild, recomputes `r` and
    /// refreshes every estimate. Edges the orientation no longer knows keep
    /// their owner until their deletion arrives.
    pub fn resync(&mut self, orientation: &OrientationState) -> Result<(), EdcsError> {
        self.r = self.params.scan_length(orientation.m_bar());
        let mut edges: Vec<Edge> = self.owner.keys().copied().collect();
        edges.sort_unstable();
        for ring in self.owned.iter_mut() {
            ring.clear();
        }
        for set in self.incident.iter_mut() {
            set.clear();
        }
        for per_vertex in self.buckets.iter_mut() {
            for b in per_vertex.iter_mut() {
                b.clear();
            }
        }
        let previous = std::mem::take(&mut self.owner);
        self.estimate.clear();
        for e in edges {
            // an edge already dropped by the orientation is about to be deleted
            let o = orientation.owner(e).unwrap_or(previous[&e]);
            self.track(e, o);
        }
        Ok(())
    }

    /// Any edge of `H` at `x` with edge degree exactly `β`.
    pub fn find_full(&self, x: VertexId) -> Option<Edge> {
        let beta = self.params.beta();
        self.h_adj[self.space.dense(x)].iter().find(|&&e| self.edge_degree(e) == beta).copied()
    }

    /// The eight bucket indices `x` probes, clamped to existing buckets.
    pub fn probe_window(&self, x: VertexId) -> std::ops::Range<usize> {
        let ell = self.params.ell() as i64;
        let target = self.params.lower() as i64 - ell - self.degree(x) as i64;
        let first = target.div_euclid(ell);
        let last = first + 8;
        let count = self.params.bucket_count() as i64;
        (first.clamp(0, count) as usize)..(last.clamp(0, count) as usize)
    }

    /// Probes the bucket window for the first non-empty bucket and checks its
    /// smallest member exactly. One candidate at most.
    pub fn find_augmentable(&mut self, x: VertexId) -> Option<Edge> {
        let window = self.probe_window(x);
        let dx = self.space.dense(x);
        if self.audit {
            self.audit_window(x, window.clone());
        }
        let pick = window.clone().find_map(|b| self.buckets[dx][b].first().copied())?;
        let e = Edge::between(x, pick).expect("bucket entries are neighbours");
        if self.audit {
            self.audit_pick(x, pick, window);
        }
        self.is_augmentable(e).then_some(e)
    }

    /// Visits up to `r` owned edges from the repair cursor and returns the
    /// first augmentable one.
    pub fn repair_scan(&mut self, x: VertexId) -> Option<Edge> {
        let dx = self.space.dense(x);
        let steps = self.r.min(self.owned[dx].len());
        for _ in 0..steps {
            let e = self.owned[dx].advance(REPAIR).expect("ring is non-empty");
            self.stats[dx].repair_steps += 1;
            if self.is_augmentable(e) {
                return Some(e);
            }
        }
        None
    }

    /// Pushes the exact degree of `x` to the next `r` edges it owns.
    pub fn information_update(&mut self, x: VertexId) {
        let dx = self.space.dense(x);
        let steps = self.r.min(self.owned[dx].len());
        for _ in 0..steps {
            let e = self.owned[dx].advance(INFO).expect("ring is non-empty");
            self.stats[dx].info_steps += 1;
            self.refresh_estimate(e);
        }
    }

    fn end_of_path(&mut self, x: VertexId, delta: i8) -> Result<(), EdcsError> {
        let dx = self.space.dense(x);
        if delta < 0 {
            if self.audit {
                self.audit_path_end(x);
            }
            self.stats[dx].decreases += 1;
        }
        let d = self.degree[dx] as i64 + delta as i64;
        if d < 0 || d > self.params.beta() as i64 {
            return Err(EdcsError::InvariantBreach(format!("degree of {x} would become {d}")));
        }
        self.degree[dx] = d as u32;
        self.information_update(x);
        Ok(())
    }

    fn fix(&mut self, x: VertexId, delta: i8, report: &mut GeneralReport) -> Result<(), EdcsError> {
        let max_len = self.params.max_path_len();
        let mut path = AlternatingPath::start(x, self.degree(x));
        let mut cur = x;
        let mut need = delta;
        loop {
            let next = if need > 0 {
                self.find_full(cur)
            } else {
                self.find_augmentable(cur).or_else(|| self.repair_scan(cur))
            };
            let Some(e) = next else {
                self.end_of_path(cur, need)?;
                path.end_delta = need;
                break;
            };
            self.set_used(e, need < 0, report);
            let y = e.other(cur);
            path.push(e, -need, y, self.degree(y));
            if path.len() > max_len {
                return Err(EdcsError::InvariantBreach(format!(
                    "alternating path from {x} exceeds {max_len} edges"
                )));
            }
            cur = y;
            need = -need;
        }
        report.paths.push(path);
        Ok(())
    }

    fn unowned_neighbours(&self, x: VertexId) -> Vec<(Edge, VertexId)> {
        self.incident[self.space.dense(x)]
            .iter()
            .map(|&e| (e, self.owner[&e]))
            .filter(|&(_, o)| o != x)
            .collect()
    }

    /// Every augmentable unowned edge at `x` sits in a probed bucket.
    fn audit_window(&mut self, x: VertexId, window: std::ops::Range<usize>) {
        for (e, _) in self.unowned_neighbours(x) {
            if self.is_augmentable(e) {
                let b = self.bucket_of(self.estimate[&e]);
                if !window.contains(&b) {
                    self.violations.push(format!("augmentable {e} in bucket {b} outside window {window:?}"));
                }
            }
        }
    }

    /// A pick `w` satisfies `d(w) ≤ d(v) + 3ℓ` for every candidate `v` whose
    /// bucket lies in the window.
    fn audit_pick(&mut self, x: VertexId, pick: VertexId, window: std::ops::Range<usize>) {
        let dw = self.degree(pick);
        let three_ell = 3 * self.params.ell();
        for (e, v) in self.unowned_neighbours(x) {
            if self.in_h.contains(&e) || !window.contains(&self.bucket_of(self.estimate[&e])) {
                continue;
            }
            if dw > self.degree(v) + three_ell {
                self.violations.push(format!("pick {pick} at {x} has degree {dw}, {v} has {}", self.degree(v)));
            }
        }
    }

    /// A degree decrease at `x` never happens while an unowned unused edge at
    /// `x` is in range `F2` or lower.
    fn audit_path_end(&mut self, x: VertexId) {
        let limit = self.params.lower() + 2 * self.params.ell();
        for (e, _) in self.unowned_neighbours(x) {
            if !self.in_h.contains(&e) && self.edge_degree(e) <= limit {
                self.violations.push(format!("{x} decreases while unowned {e} has edge degree {}", self.edge_degree(e)));
            }
        }
    }

    /// Estimate staleness: `|d̃ − d| ≤ ℓ` for every tracked edge.
    pub fn audit_estimates(&self) -> Vec<String> {
        let ell = self.params.ell();
        let mut out = Vec::new();
        for (e, &est) in &self.estimate {
            let d = self.degree(self.owner[e]);
            if est.abs_diff(d) > ell {
                out.push(format!("estimate {est} for {e} but owner degree {d}"));
            }
        }
        out.sort();
        out
    }

    /// Rebuilds buckets, `H` adjacency, degrees and owned lists from the
    /// primary maps and compares.
    pub fn audit_structure(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.space.total();
        let mut degree = vec![0u32; n];
        let mut adj = vec![BTreeSet::new(); n];
        for &e in &self.in_h {
            for v in [e.left(), e.right()] {
                degree[self.space.dense(v)] += 1;
                adj[self.space.dense(v)].insert(e);
            }
            if !self.owner.contains_key(&e) {
                out.push(format!("{e} in H but not tracked"));
            }
        }
        if degree != self.degree {
            out.push("degree table differs from H".to_string());
        }
        if adj != self.h_adj {
            out.push("H adjacency differs from H".to_string());
        }
        let mut buckets = vec![vec![BTreeSet::new(); self.params.bucket_count()]; n];
        let mut loads = vec![0usize; n];
        for (&e, &o) in &self.owner {
            loads[self.space.dense(o)] += 1;
            if !self.owned[self.space.dense(o)].contains(&e) {
                out.push(format!("{e} missing from owned list of {o}"));
            }
            if !self.in_h.contains(&e) {
                let x = self.space.dense(e.other(o));
                buckets[x][self.bucket_of(self.estimate[&e])].insert(o);
            }
        }
        if buckets != self.buckets {
            out.push("buckets differ from reconstruction".to_string());
        }
        for (i, ring) in self.owned.iter().enumerate() {
            if ring.len() != loads[i] {
                out.push(format!("owned list of {} has {} entries, expected {}", self.space.vertex(i), ring.len(), loads[i]));
            }
        }
        out
    }
}
