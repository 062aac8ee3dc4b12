//! Update streams: generation, the `+ L<i> R<j>` text format, and replay
//! validation.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use dynmatch_core::{DetHashMap, Edge, VertexSpace};

use crate::config::{StreamKind, StreamSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StreamError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("step {step}: {message}")]
    Replay { step: usize, message: String },
    #[error("invalid stream parameters: {0}")]
    Params(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Insert,
    Delete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Update {
    pub op: Op,
    pub edge: Edge,
}

impl Update {
    pub fn insert(edge: Edge) -> Self {
        Update { op: Op::Insert, edge }
    }

    pub fn delete(edge: Edge) -> Self {
        Update { op: Op::Delete, edge }
    }
}

impl fmt::Display for Update {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.op {
            Op::Insert => '+',
            Op::Delete => '-',
        };
        write!(f, "{sign} L{} R{}", self.edge.left_index(), self.edge.right_index())
    }
}

impl FromStr for Update {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut parts = s.split_whitespace();
        let op = match parts.next() {
            Some("+") => Op::Insert,
            Some("-") => Op::Delete,
            other => return Err(format!("expected '+' or '-', found {other:?}")),
        };
        let mut vertex = |prefix: char| -> Result<u32, String> {
            let tok = parts.next().ok_or_else(|| format!("missing {prefix} vertex"))?;
            tok.strip_prefix(prefix)
                .and_then(|i| i.parse().ok())
                .ok_or_else(|| format!("expected {prefix}<index>, found {tok:?}"))
        };
        let l = vertex('L')?;
        let r = vertex('R')?;
        if let Some(extra) = parts.next() {
            return Err(format!("unexpected token {extra:?}"));
        }
        Ok(Update { op, edge: Edge::new(l, r) })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UpdateStream {
    pub updates: Vec<Update>,
}

impl UpdateStream {
    pub fn len(&self) -> usize {
        self.updates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    pub fn parse(text: &str) -> Result<Self, StreamError> {
        let mut updates = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let u = line.parse().map_err(|message| StreamError::Parse { line: i + 1, message })?;
            updates.push(u);
        }
        Ok(UpdateStream { updates })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.updates.len() * 12);
        for u in &self.updates {
            out.push_str(&u.to_string());
            out.push('\n');
        }
        out
    }

    /// Smallest vertex space containing every endpoint.
    pub fn inferred_space(&self) -> VertexSpace {
        let nl = self.updates.iter().map(|u| u.edge.left_index() + 1).max().unwrap_or(0);
        let nr = self.updates.iter().map(|u| u.edge.right_index() + 1).max().unwrap_or(0);
        VertexSpace::new(nl, nr)
    }

    /// Checks replayability against `space` and returns the peak edge count.
    pub fn validate(&self, space: VertexSpace) -> Result<usize, StreamError> {
        let mut present = BTreeSet::new();
        let mut peak = 0;
        for (step, u) in self.updates.iter().enumerate() {
            let fail = |message: String| StreamError::Replay { step: step + 1, message };
            if !space.contains_edge(u.edge) {
                return Err(fail(format!("{} outside {}+{} vertices", u.edge, space.n_left, space.n_right)));
            }
            match u.op {
                Op::Insert if !present.insert(u.edge) => return Err(fail(format!("insert of present edge {}", u.edge))),
                Op::Delete if !present.remove(&u.edge) => return Err(fail(format!("delete of absent edge {}", u.edge))),
                _ => {}
            }
            peak = peak.max(present.len());
        }
        Ok(peak)
    }
}

/// Live edge set with O(1) uniform sampling.
#[derive(Default)]
struct EdgePool {
    edges: Vec<Edge>,
    slot: DetHashMap<Edge, usize>,
}

impl EdgePool {
    fn len(&self) -> usize {
        self.edges.len()
    }

    fn contains(&self, e: Edge) -> bool {
        self.slot.contains_key(&e)
    }

    fn insert(&mut self, e: Edge) {
        self.slot.insert(e, self.edges.len());
        self.edges.push(e);
    }

    fn remove(&mut self, e: Edge) {
        let i = self.slot.remove(&e).expect("edge in pool");
        let last = self.edges.pop().expect("pool non-empty");
        if i < self.edges.len() {
            self.edges[i] = last;
            self.slot.insert(last, i);
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Edge {
        self.edges[rng.gen_range(0..self.edges.len())]
    }
}

fn random_absent(pool: &EdgePool, nl: u32, nr: u32, rng: &mut ChaCha8Rng) -> Edge {
    loop {
        let e = Edge::new(rng.gen_range(0..nl), rng.gen_range(0..nr));
        if !pool.contains(e) {
            return e;
        }
    }
}

/// Probability of inserting next: pulls the edge count toward `target`.
fn insert_bias(m: usize, target: usize) -> f64 {
    if m < target {
        0.8
    } else {
        0.2
    }
}

pub fn generate_stream(spec: &StreamSpec, seed: u64) -> Result<UpdateStream, StreamError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nl, nr) = (spec.n_left, spec.n_right);
    if spec.kind != StreamKind::FourBlock && spec.kind != StreamKind::ThreeBlock && (nl == 0 || nr == 0) && spec.steps > 0 {
        return Err(StreamError::Params("both sides need at least one vertex".into()));
    }
    let updates = match spec.kind {
        StreamKind::Random => random(spec, &mut rng)?,
        StreamKind::SlidingWindow => sliding_window(spec, &mut rng)?,
        StreamKind::ForestUnion => forest_union(spec, &mut rng)?,
        StreamKind::FourBlock => four_block(spec, &mut rng)?,
        StreamKind::ThreeBlock => {
            let inst = three_block_instance(spec.beta, spec.block_size)?;
            inst.g.into_iter().map(Update::insert).collect()
        }
    };
    Ok(UpdateStream { updates })
}

fn random(spec: &StreamSpec, rng: &mut ChaCha8Rng) -> Result<Vec<Update>, StreamError> {
    if !(0.0..=1.0).contains(&spec.density) {
        return Err(StreamError::Params(format!("density {} outside [0, 1]", spec.density)));
    }
    let (nl, nr) = (spec.n_left, spec.n_right);
    let slots = nl as usize * nr as usize;
    let target = ((spec.density * slots as f64).round() as usize).clamp(1, slots.max(1));
    let mut pool = EdgePool::default();
    let mut out = Vec::with_capacity(spec.steps);
    for _ in 0..spec.steps {
        let m = pool.len();
        let insert = m == 0 || (m < slots && rng.gen_bool(insert_bias(m, target)));
        if insert {
            let e = random_absent(&pool, nl, nr, rng);
            pool.insert(e);
            out.push(Update::insert(e));
        } else {
            let e = pool.sample(rng);
            pool.remove(e);
            out.push(Update::delete(e));
        }
    }
    Ok(out)
}

fn sliding_window(spec: &StreamSpec, rng: &mut ChaCha8Rng) -> Result<Vec<Update>, StreamError> {
    let (nl, nr) = (spec.n_left, spec.n_right);
    let slots = nl as usize * nr as usize;
    if spec.window == 0 || spec.window >= slots {
        return Err(StreamError::Params(format!("window {} must lie in 1..{slots}", spec.window)));
    }
    let mut pool = EdgePool::default();
    let mut queue = VecDeque::new();
    let mut out = Vec::with_capacity(spec.steps);
    for _ in 0..spec.steps {
        if queue.len() >= spec.window {
            let e = queue.pop_front().expect("window non-empty");
            pool.remove(e);
            out.push(Update::delete(e));
        } else {
            let e = random_absent(&pool, nl, nr, rng);
            pool.insert(e);
            queue.push_back(e);
            out.push(Update::insert(e));
        }
    }
    Ok(out)
}

/// Union of `forests` edge-disjoint forests; every edge is assigned to a
/// forest in which it closes no cycle, so arboricity stays at most
/// `forests`.
fn forest_union(spec: &StreamSpec, rng: &mut ChaCha8Rng) -> Result<Vec<Update>, StreamError> {
    let (nl, nr) = (spec.n_left, spec.n_right);
    let space = VertexSpace::new(nl, nr);
    if spec.forests == 0 {
        return Err(StreamError::Params("forest_union needs at least one forest".into()));
    }
    let n = space.total();
    let capacity = spec.forests * (n - 1);
    let target = ((spec.density * capacity as f64).round() as usize).clamp(1, capacity);
    let mut forests: Vec<Vec<BTreeSet<usize>>> = vec![vec![BTreeSet::new(); n]; spec.forests];
    let mut forest_of: DetHashMap<Edge, usize> = DetHashMap::default();
    let mut pool = EdgePool::default();
    let mut out = Vec::with_capacity(spec.steps);
    let dense = |e: Edge| (space.dense(e.left()), space.dense(e.right()));
    while out.len() < spec.steps {
        let m = pool.len();
        let want_insert = m == 0 || rng.gen_bool(insert_bias(m, target));
        if want_insert {
            let e = random_absent(&pool, nl, nr, rng);
            let (a, b) = dense(e);
            let start = rng.gen_range(0..spec.forests);
            let slot = (0..spec.forests).map(|k| (start + k) % spec.forests).find(|&f| !connected(&forests[f], a, b));
            if let Some(f) = slot {
                forests[f][a].insert(b);
                forests[f][b].insert(a);
                forest_of.insert(e, f);
                pool.insert(e);
                out.push(Update::insert(e));
                continue;
            }
            if m == 0 {
                continue;
            }
        }
        let e = pool.sample(rng);
        let (a, b) = dense(e);
        let f = forest_of.remove(&e).expect("edge has a forest");
        forests[f][a].remove(&b);
        forests[f][b].remove(&a);
        pool.remove(e);
        out.push(Update::delete(e));
    }
    Ok(out)
}

fn connected(adj: &[BTreeSet<usize>], a: usize, b: usize) -> bool {
    let mut seen = BTreeSet::from([a]);
    let mut stack = vec![a];
    while let Some(x) = stack.pop() {
        if x == b {
            return true;
        }
        for &y in &adj[x] {
            if seen.insert(y) {
                stack.push(y);
            }
        }
    }
    false
}

/// Edges of the four-block graph: sides split into halves of `b`, every
/// pair present except second half × second half.
pub fn four_block_edges(b: u32) -> Vec<Edge> {
    let mut out = Vec::with_capacity(3 * (b * b) as usize);
    for l in 0..2 * b {
        for r in 0..2 * b {
            if !(l >= b && r >= b) {
                out.push(Edge::new(l, r));
            }
        }
    }
    out
}

/// Builds the four-block graph in shuffled order, then churns it: a random
/// present edge is deleted or a missing one is put back.
fn four_block(spec: &StreamSpec, rng: &mut ChaCha8Rng) -> Result<Vec<Update>, StreamError> {
    let b = spec.block_size;
    if b == 0 {
        return Err(StreamError::Params("block size must be positive".into()));
    }
    if spec.n_left < 2 * b || spec.n_right < 2 * b {
        return Err(StreamError::Params(format!("four_block with block size {b} needs {} vertices per side", 2 * b)));
    }
    let mut all = four_block_edges(b);
    all.shuffle(rng);
    let mut out = Vec::with_capacity(spec.steps);
    let mut pool = EdgePool::default();
    let mut missing = EdgePool::default();
    for &e in all.iter().take(spec.steps) {
        pool.insert(e);
        out.push(Update::insert(e));
    }
    for &e in all.iter().skip(spec.steps) {
        missing.insert(e);
    }
    while out.len() < spec.steps {
        if missing.len() == 0 || rng.gen_bool(0.5) {
            let e = pool.sample(rng);
            pool.remove(e);
            missing.insert(e);
            out.push(Update::delete(e));
        } else {
            let e = missing.sample(rng);
            missing.remove(e);
            pool.insert(e);
            out.push(Update::insert(e));
        }
    }
    Ok(out)
}

/// A graph together with an intended EDCS on it.
#[derive(Clone, Debug)]
pub struct ThreeBlockInstance {
    pub g: Vec<Edge>,
    pub h: Vec<Edge>,
    pub space: VertexSpace,
}

/// Three pieces of `s` vertices per side, `L1..L3` and `R1..R3`. `H` holds
/// the matching `L1–R1`, a `(β/2 − 1)`-regular block `L1–R2`, a
/// `(β/2 − 1)`-regular block `L2–R3` and the matching `L3–R3`; `G` adds the
/// matching `L2–R2`. Every `H` edge has edge degree at most `β − 1`, the
/// extra edges have `β − 2`, `μ(H) = 2s` and `μ(G) = 3s`.
pub fn three_block_instance(beta: u32, s: u32) -> Result<ThreeBlockInstance, StreamError> {
    if beta < 4 || !beta.is_multiple_of(2) {
        return Err(StreamError::Params(format!("three_block needs an even beta >= 4, got {beta}")));
    }
    let k = beta / 2 - 1;
    if s < k || s == 0 {
        return Err(StreamError::Params(format!("three_block needs piece size >= {k}, got {s}")));
    }
    let mut h = Vec::new();
    for i in 0..s {
        h.push(Edge::new(i, i));
        for j in 0..k {
            h.push(Edge::new(i, s + (i + j) % s));
            h.push(Edge::new(s + i, 2 * s + (i + j) % s));
        }
        h.push(Edge::new(2 * s + i, 2 * s + i));
    }
    h.sort();
    h.dedup();
    let mut g = h.clone();
    g.extend((0..s).map(|i| Edge::new(s + i, s + i)));
    Ok(ThreeBlockInstance { g, h, space: VertexSpace::new(3 * s, 3 * s) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dynmatch_core::oracle;

    fn spec(kind: StreamKind) -> StreamSpec {
        StreamSpec { kind, n_left: 20, n_right: 20, steps: 500, ..Default::default() }
    }

    #[test]
    fn text_round_trip() {
        let s = generate_stream(&spec(StreamKind::Random), 3).unwrap();
        let text = s.to_text();
        assert!(text.starts_with("+ L"));
        assert_eq!(UpdateStream::parse(&text).unwrap(), s);
        assert!(matches!(UpdateStream::parse("+ L1 R2\n* L1 R1\n"), Err(StreamError::Parse { line: 2, .. })));
        assert!(UpdateStream::parse("+ L1 X2").is_err());
        assert!(UpdateStream::parse("+ L1 R2 R3").is_err());
    }

    #[test]
    fn every_kind_replays_and_is_deterministic() {
        for kind in [StreamKind::Random, StreamKind::SlidingWindow, StreamKind::ForestUnion, StreamKind::FourBlock] {
            let mut sp = spec(kind);
            sp.window = 50;
            sp.block_size = 5;
            let a = generate_stream(&sp, 9).unwrap();
            let b = generate_stream(&sp, 9).unwrap();
            assert_eq!(a.to_text(), b.to_text());
            assert_eq!(a.len(), 500);
            a.validate(VertexSpace::new(20, 20)).unwrap();
            assert_ne!(a, generate_stream(&sp, 10).unwrap());
        }
    }

    #[test]
    fn replay_errors_name_the_step() {
        let s = UpdateStream::parse("+ L0 R0\n- L0 R1\n").unwrap();
        assert_eq!(
            s.validate(VertexSpace::new(2, 2)),
            Err(StreamError::Replay { step: 2, message: "delete of absent edge (L0,R1)".into() })
        );
        let s = UpdateStream::parse("+ L0 R0\n+ L0 R0\n").unwrap();
        assert!(matches!(s.validate(VertexSpace::new(2, 2)), Err(StreamError::Replay { step: 2, .. })));
        assert!(s.validate(VertexSpace::new(0, 0)).is_err());
    }

    #[test]
    fn four_block_of_size_two() {
        let sp = StreamSpec { kind: StreamKind::FourBlock, n_left: 4, n_right: 4, steps: 12, block_size: 2, ..Default::default() };
        let s = generate_stream(&sp, 1).unwrap();
        assert!(s.updates.iter().all(|u| u.op == Op::Insert));
        let edges: Vec<Edge> = s.updates.iter().map(|u| u.edge).collect();
        assert_eq!(oracle::brute_force_mu(&edges).unwrap(), 4);
    }

    #[test]
    fn forest_union_single_forest_stays_acyclic() {
        let sp = StreamSpec { kind: StreamKind::ForestUnion, n_left: 15, n_right: 15, steps: 800, forests: 1, density: 0.9, ..Default::default() };
        let s = generate_stream(&sp, 4).unwrap();
        let space = VertexSpace::new(15, 15);
        let mut present = BTreeSet::new();
        for u in &s.updates {
            match u.op {
                Op::Insert => present.insert(u.edge),
                Op::Delete => present.remove(&u.edge),
            };
            // a forest on N vertices with c components has N - c edges
            let mut adj = vec![BTreeSet::new(); space.total()];
            for e in &present {
                adj[space.dense(e.left())].insert(space.dense(e.right()));
                adj[space.dense(e.right())].insert(space.dense(e.left()));
            }
            let mut seen = vec![false; space.total()];
            let mut components = 0;
            for v in 0..space.total() {
                if !seen[v] {
                    components += 1;
                    let mut stack = vec![v];
                    seen[v] = true;
                    while let Some(x) = stack.pop() {
                        for &y in &adj[x] {
                            if !seen[y] {
                                seen[y] = true;
                                stack.push(y);
                            }
                        }
                    }
                }
            }
            assert_eq!(present.len() + components, space.total());
        }
    }

    #[test]
    fn three_block_instance_is_an_edcs_with_gap() {
        for (beta, s) in [(12, 5), (12, 8), (20, 9)] {
            let inst = three_block_instance(beta, s).unwrap();
            let lambda = 6.0 / beta as f64;
            assert!(oracle::validate_edcs_unweighted(&inst.g, &inst.h, beta, lambda).ok());
            let n = 3 * s;
            assert_eq!(oracle::hopcroft_karp(n, n, &inst.h).0, 2 * s as usize);
            assert_eq!(oracle::hopcroft_karp(n, n, &inst.g).0, 3 * s as usize);
        }
        assert!(three_block_instance(13, 10).is_err());
        assert!(three_block_instance(12, 3).is_err());
    }

    #[test]
    fn sliding_window_alternates_after_warmup() {
        let mut sp = spec(StreamKind::SlidingWindow);
        sp.window = 10;
        let s = generate_stream(&sp, 2).unwrap();
        assert!(s.updates[..10].iter().all(|u| u.op == Op::Insert));
        assert_eq!(s.updates[10].op, Op::Delete);
        assert_eq!(s.updates[10].edge, s.updates[0].edge);
        assert_eq!(s.validate(VertexSpace::new(20, 20)).unwrap(), 10);
    }
}
