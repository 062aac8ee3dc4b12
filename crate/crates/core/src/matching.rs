//! `(1+ε)`-approximate matching of the bounded-degree subgraph `H`.
//!
//! Changes of `H` are applied lazily: a deleted matched edge simply leaves
//! `M`, an inserted edge between two free vertices joins it. After
//! `⌈(ε/2)·max(1, |M_rebuild|)⌉` changes the matching is rebuilt by running
//! shortest-augmenting-path phases from the current `M` until no augmenting
//! path of at most `2k − 1` edges remains, `k = ⌈1/ε⌉`.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::graph::{Edge, VertexId, VertexSpace};
use crate::path::HChange;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchingError {
    #[error("{0} is already in H")]
    AlreadyPresent(Edge),
    #[error("{0} is not in H")]
    Missing(Edge),
    #[error("edge {0} is outside the vertex space")]
    OutOfRange(Edge),
    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(f64),
}

#[derive(Clone, Debug)]
pub struct MaintainedMatching {
    space: VertexSpace,
    epsilon: f64,
    greedy: bool,
    /// `H` adjacency of left vertices (right indices).
    adj: Vec<BTreeSet<u32>>,
    h_size: usize,
    mate_left: Vec<Option<u32>>,
    mate_right: Vec<Option<u32>>,
    size: usize,
    size_at_rebuild: usize,
    since_rebuild: usize,
    rebuilds: usize,
}

impl MaintainedMatching {
    pub fn new(space: VertexSpace, epsilon: f64) -> Result<Self, MatchingError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(MatchingError::Epsilon(epsilon));
        }
        Ok(MaintainedMatching {
            space,
            epsilon,
            greedy: true,
            adj: vec![BTreeSet::new(); space.n_left as usize],
            h_size: 0,
            mate_left: vec![None; space.n_left as usize],
            mate_right: vec![None; space.n_right as usize],
            size: 0,
            size_at_rebuild: 0,
            since_rebuild: 0,
            rebuilds: 0,
        })
    }

    /// Greedy matching of inserted edges; on by default.
    pub fn set_greedy(&mut self, on: bool) {
        self.greedy = on;
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `k = ⌈1/ε⌉`.
    pub fn phase_bound(&self) -> usize {
        (1.0 / self.epsilon - 1e-9).ceil() as usize
    }

    pub fn rebuild_threshold(&self) -> usize {
        ((self.epsilon / 2.0) * self.size_at_rebuild.max(1) as f64).ceil() as usize
    }

    pub fn updates_since_rebuild(&self) -> usize {
        self.since_rebuild
    }

    pub fn size_at_rebuild(&self) -> usize {
        self.size_at_rebuild
    }

    pub fn rebuild_count(&self) -> usize {
        self.rebuilds
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn h_size(&self) -> usize {
        self.h_size
    }

    pub fn mate(&self, v: VertexId) -> Option<VertexId> {
        match v.side {
            crate::Side::Left => self.mate_left[v.index as usize].map(VertexId::right),
            crate::Side::Right => self.mate_right[v.index as usize].map(VertexId::left),
        }
    }

    /// `M`, sorted.
    pub fn current_matching(&self) -> Vec<Edge> {
        self.mate_left
            .iter()
            .enumerate()
            .filter_map(|(l, m)| m.map(|r| Edge::new(l as u32, r)))
            .collect()
    }

    /// `H` as seen by the matching layer, sorted.
    pub fn h_edges(&self) -> Vec<Edge> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(l, rs)| rs.iter().map(move |&r| Edge::new(l as u32, r)))
            .collect()
    }

    pub fn on_h_change(&mut self, change: HChange) -> Result<(), MatchingError> {
        let e = change.edge();
        if !self.space.contains_edge(e) {
            return Err(MatchingError::OutOfRange(e));
        }
        let (l, r) = (e.left_index() as usize, e.right_index());
        match change {
            HChange::Insert(_) => {
                if !self.adj[l].insert(r) {
                    return Err(MatchingError::AlreadyPresent(e));
                }
                self.h_size += 1;
                if self.greedy && self.mate_left[l].is_none() && self.mate_right[r as usize].is_none() {
                    self.link(l as u32, r);
                }
            }
            HChange::Delete(_) => {
                if !self.adj[l].remove(&r) {
                    return Err(MatchingError::Missing(e));
                }
                self.h_size -= 1;
                if self.mate_left[l] == Some(r) {
                    self.mate_left[l] = None;
                    self.mate_right[r as usize] = None;
                    self.size -= 1;
                }
            }
        }
        self.since_rebuild += 1;
        if self.since_rebuild >= self.rebuild_threshold() {
            self.rebuild();
        }
        Ok(())
    }

    fn link(&mut self, l: u32, r: u32) {
        self.mate_left[l as usize] = Some(r);
        self.mate_right[r as usize] = Some(l);
        self.size += 1;
    }

    /// Augments along shortest paths while one of at most `2k − 1` edges
    /// exists, then resets the counters.
    pub fn rebuild(&mut self) {
        let max_layer = self.phase_bound() - 1;
        while self.phase(max_layer) {}
        self.size_at_rebuild = self.size;
        self.since_rebuild = 0;
        self.rebuilds += 1;
    }

    /// One shortest-path phase. Left layer `t` is reached after `2t` edges;
    /// a free right neighbour there closes a path of `2t + 1` edges.
    fn phase(&mut self, max_layer: usize) -> bool {
        let nl = self.adj.len();
        let mut layer = vec![usize::MAX; nl];
        let mut queue = VecDeque::new();
        for (l, slot) in layer.iter_mut().enumerate() {
            if self.mate_left[l].is_none() {
                *slot = 0;
                queue.push_back(l);
            }
        }
        let mut found: Option<usize> = None;
        while let Some(l) = queue.pop_front() {
            if found.is_some_and(|f| layer[l] >= f) || layer[l] > max_layer {
                continue;
            }
            for &r in &self.adj[l] {
                match self.mate_right[r as usize] {
                    None => found = Some(found.map_or(layer[l], |f| f.min(layer[l]))),
                    Some(next) => {
                        let next = next as usize;
                        if layer[next] == usize::MAX {
                            layer[next] = layer[l] + 1;
                            queue.push_back(next);
                        }
                    }
                }
            }
        }
        let Some(target) = found else { return false };
        let mut dead = vec![false; nl];
        let mut augmented = false;
        for l in 0..nl {
            if layer[l] == 0 && self.mate_left[l].is_none() && self.augment_from(l, target, &layer, &mut dead) {
                augmented = true;
            }
        }
        augmented
    }

    fn augment_from(&mut self, start: usize, target: usize, layer: &[usize], dead: &mut [bool]) -> bool {
        // explicit stack of (left vertex, candidate right vertices)
        let mut stack: Vec<(usize, Vec<u32>)> = vec![(start, self.adj[start].iter().copied().collect())];
        while let Some((l, candidates)) = stack.last_mut() {
            let l = *l;
            let Some(r) = candidates.pop() else {
                dead[l] = true;
                stack.pop();
                continue;
            };
            match self.mate_right[r as usize] {
                None if layer[l] == target => {
                    // flip the path recorded on the stack
                    let mut right = r;
                    for (left, _) in stack.iter().rev() {
                        dead[*left] = true;
                        let prev = self.mate_left[*left];
                        self.mate_left[*left] = Some(right);
                        self.mate_right[right as usize] = Some(*left as u32);
                        match prev {
                            Some(p) => right = p,
                            None => break,
                        }
                    }
                    self.size += 1;
                    return true;
                }
                None => {}
                Some(next) => {
                    let next = next as usize;
                    if !dead[next] && layer[next] == layer[l] + 1 && layer[next] <= target {
                        let cands = self.adj[next].iter().copied().collect();
                        stack.push((next, cands));
                    }
                }
            }
        }
        false
    }

    /// Checks that `M` is a matching contained in the mirrored `H`.
    pub fn audit(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut count = 0;
        for (l, m) in self.mate_left.iter().enumerate() {
            if let Some(r) = *m {
                count += 1;
                if self.mate_right[r as usize] != Some(l as u32) {
                    out.push(format!("mates of L{l} and R{r} disagree"));
                }
                if !self.adj[l].contains(&r) {
                    out.push(format!("matched (L{l},R{r}) is not in H"));
                }
            }
        }
        for (r, m) in self.mate_right.iter().enumerate() {
            if let Some(l) = *m {
                if self.mate_left[l as usize] != Some(r as u32) {
                    out.push(format!("mates of R{r} and L{l} disagree"));
                }
            }
        }
        if count != self.size {
            out.push(format!("size counter {} but {count} matched edges", self.size));
        }
        out
    }
}
