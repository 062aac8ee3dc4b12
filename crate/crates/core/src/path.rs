//! Records shared by both EDCS maintainers: the alternating paths they
//! apply and the membership changes they emit for the matching layer.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{Edge, Side, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EdcsError {
    #[error("edge {0} is not tracked by the EDCS")]
    UnknownEdge(Edge),
    #[error("edge {0} is already tracked by the EDCS")]
    AlreadyTracked(Edge),
    #[error("invalid EDCS parameters: {0}")]
    Parameters(String),
    #[error("EDCS invariant breached: {0}")]
    InvariantBreach(String),
}

/// A change of membership of an edge in `H`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HChange {
    Insert(Edge),
    Delete(Edge),
}

impl HChange {
    pub fn edge(self) -> Edge {
        match self {
            HChange::Insert(e) | HChange::Delete(e) => e,
        }
    }
}

/// One edge of an alternating path together with the unit weight change
/// applied to it: `-1` on a full edge, `+1` on a deficient or augmentable
/// edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathStep {
    pub edge: Edge,
    pub delta: i8,
}

/// A path of alternating full and deficient (or augmentable) edges, as
/// applied during one repair.
///
/// `vertices[i]` is reached after `steps[..i]`; `degrees[i]` is its degree
/// in `H` when the path visited it. The last vertex absorbs the net degree
/// change `end_delta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlternatingPath {
    pub vertices: Vec<VertexId>,
    pub degrees: Vec<u32>,
    pub steps: Vec<PathStep>,
    pub end_delta: i8,
}

impl AlternatingPath {
    pub fn start(v: VertexId, degree: u32) -> Self {
        AlternatingPath { vertices: vec![v], degrees: vec![degree], steps: Vec::new(), end_delta: 0 }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end(&self) -> VertexId {
        *self.vertices.last().expect("path has a start vertex")
    }

    pub(crate) fn push(&mut self, edge: Edge, delta: i8, next: VertexId, next_degree: u32) {
        self.steps.push(PathStep { edge, delta });
        self.vertices.push(next);
        self.degrees.push(next_degree);
    }

    /// Checks the structural guarantees every applied path must meet: at most
    /// `max_len` edges, consecutive edges sharing the recorded vertex,
    /// alternating actions, no repeated vertex, and pairwise distinct
    /// degrees among vertices on the same side.
    pub fn check(&self, max_len: usize) -> Result<(), String> {
        if self.steps.len() > max_len {
            return Err(format!("path of length {} exceeds {max_len}", self.steps.len()));
        }
        for (i, step) in self.steps.iter().enumerate() {
            let (a, b) = (self.vertices[i], self.vertices[i + 1]);
            if !(step.edge.has_endpoint(a) && step.edge.has_endpoint(b)) {
                return Err(format!("step {i} edge {} does not join {a} and {b}", step.edge));
            }
            if step.delta != 1 && step.delta != -1 {
                return Err(format!("step {i} has delta {}", step.delta));
            }
            if i > 0 && step.delta == self.steps[i - 1].delta {
                return Err(format!("steps {} and {i} do not alternate", i - 1));
            }
        }
        let mut seen = BTreeSet::new();
        if let Some(v) = self.vertices.iter().find(|v| !seen.insert(**v)) {
            return Err(format!("vertex {v} repeats"));
        }
        for side in [Side::Left, Side::Right] {
            let mut degrees = BTreeSet::new();
            for (v, d) in self.vertices.iter().zip(&self.degrees) {
                if v.side == side && !degrees.insert(*d) {
                    return Err(format!("two {side:?} vertices share degree {d}"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_repeated_vertex_and_bad_alternation() {
        let mut p = AlternatingPath::start(VertexId::left(0), 3);
        p.push(Edge::new(0, 0), -1, VertexId::right(0), 1);
        p.push(Edge::new(1, 0), 1, VertexId::left(1), 2);
        assert!(p.check(5).is_ok());
        assert!(p.check(1).is_err());

        let mut bad = p.clone();
        bad.steps[1].delta = -1;
        assert!(bad.check(5).is_err());

        let mut repeat = p.clone();
        repeat.push(Edge::new(1, 0), -1, VertexId::right(0), 4);
        assert!(repeat.check(5).is_err());

        let mut same_degree = p;
        same_degree.degrees[2] = 3;
        assert!(same_degree.check(5).is_err());
    }
}
