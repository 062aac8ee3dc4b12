//! Ground truth: static maximum matching, exhaustive matching for tiny
//! graphs, and EDCS validators that recompute every degree from scratch.
//!
//! Nothing here reads the live maintenance structures; inputs are plain
//! edge lists.

use std::collections::VecDeque;

use thiserror::Error;

use crate::exec::ExecPolicy;
use crate::graph::{DynBipartiteGraph, Edge};
use crate::DetHashMap;

/// Largest edge count accepted by [`brute_force_mu`].
pub const BRUTE_FORCE_MAX_EDGES: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("brute force limited to {BRUTE_FORCE_MAX_EDGES} edges, got {0}")]
    TooLarge(usize),
}

/// Maximum matching by Hopcroft–Karp. Returns `μ` and one maximum matching,
/// sorted.
pub fn hopcroft_karp(n_left: u32, n_right: u32, edges: &[Edge]) -> (usize, Vec<Edge>) {
    let (nl, nr) = (n_left as usize, n_right as usize);
    let mut adj = vec![Vec::new(); nl];
    for e in edges {
        adj[e.left_index() as usize].push(e.right_index() as usize);
    }
    const FREE: usize = usize::MAX;
    let mut ml = vec![FREE; nl];
    let mut mr = vec![FREE; nr];
    let mut dist = vec![0usize; nl];
    let mut size = 0;
    loop {
        // BFS layering from all free left vertices
        let mut queue = VecDeque::new();
        for l in 0..nl {
            if ml[l] == FREE {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        let mut reachable_free = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                let m = mr[r];
                if m == FREE {
                    reachable_free = true;
                } else if dist[m] == usize::MAX {
                    dist[m] = dist[l] + 1;
                    queue.push_back(m);
                }
            }
        }
        if !reachable_free {
            break;
        }
        let mut next_edge = vec![0usize; nl];
        for l in 0..nl {
            if ml[l] == FREE && dfs(l, &adj, &mut ml, &mut mr, &mut dist, &mut next_edge) {
                size += 1;
            }
        }
    }
    let mut matching: Vec<Edge> = (0..nl)
        .filter(|&l| ml[l] != FREE)
        .map(|l| Edge::new(l as u32, ml[l] as u32))
        .collect();
    matching.sort_unstable();
    (size, matching)
}

fn dfs(
    l: usize,
    adj: &[Vec<usize>],
    ml: &mut [usize],
    mr: &mut [usize],
    dist: &mut [usize],
    next_edge: &mut [usize],
) -> bool {
    while next_edge[l] < adj[l].len() {
        let r = adj[l][next_edge[l]];
        next_edge[l] += 1;
        let m = mr[r];
        if m == usize::MAX || (dist[m] == dist[l] + 1 && dfs(m, adj, ml, mr, dist, next_edge)) {
            ml[l] = r;
            mr[r] = l;
            return true;
        }
    }
    dist[l] = usize::MAX;
    false
}

pub fn hopcroft_karp_graph(g: &DynBipartiteGraph) -> usize {
    hopcroft_karp(g.n_left(), g.n_right(), &g.edges()).0
}

/// Exact `μ` by backtracking over edges: each edge is either skipped or
/// taken when both endpoints are free.
pub fn brute_force_mu(edges: &[Edge]) -> Result<usize, OracleError> {
    if edges.len() > BRUTE_FORCE_MAX_EDGES {
        return Err(OracleError::TooLarge(edges.len()));
    }
    fn go(edges: &[Edge], used_l: &mut Vec<u32>, used_r: &mut Vec<u32>) -> usize {
        let Some((&e, rest)) = edges.split_first() else { return 0 };
        let skip = go(rest, used_l, used_r);
        if used_l.contains(&e.left_index()) || used_r.contains(&e.right_index()) {
            return skip;
        }
        used_l.push(e.left_index());
        used_r.push(e.right_index());
        let take = 1 + go(rest, used_l, used_r);
        used_l.pop();
        used_r.pop();
        skip.max(take)
    }
    Ok(go(edges, &mut Vec::new(), &mut Vec::new()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constraint {
    P1,
    P2,
    /// Weight outside `[0, β]`.
    WeightRange,
    /// An `H` edge that is not in `G`.
    NotInGraph,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub edge: Edge,
    pub constraint: Constraint,
    pub edge_degree: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, c: Constraint) -> usize {
        self.violations.iter().filter(|v| v.constraint == c).count()
    }
}

fn degree_table(weighted: impl Iterator<Item = (Edge, u64)>) -> DetHashMap<(bool, u32), u64> {
    let mut deg = DetHashMap::default();
    for (e, w) in weighted {
        *deg.entry((false, e.left_index())).or_default() += w;
        *deg.entry((true, e.right_index())).or_default() += w;
    }
    deg
}

fn edge_degree(deg: &DetHashMap<(bool, u32), u64>, e: Edge) -> u64 {
    deg.get(&(false, e.left_index())).copied().unwrap_or(0) + deg.get(&(true, e.right_index())).copied().unwrap_or(0)
}

/// P1 on `H` (`≤ β`), P2 on `G \ H` (`≥ β(1−λ)`).
pub fn validate_edcs_unweighted(g: &[Edge], h: &[Edge], beta: u32, lambda: f64) -> ValidationReport {
    let deg = degree_table(h.iter().map(|&e| (e, 1)));
    let in_h: std::collections::BTreeSet<Edge> = h.iter().copied().collect();
    let in_g: std::collections::BTreeSet<Edge> = g.iter().copied().collect();
    let lower = beta as f64 * (1.0 - lambda);
    let mut report = ValidationReport::default();
    for &e in &in_h {
        if !in_g.contains(&e) {
            report.violations.push(Violation { edge: e, constraint: Constraint::NotInGraph, edge_degree: edge_degree(&deg, e) });
        }
    }
    for &e in &in_g {
        let ed = edge_degree(&deg, e);
        if in_h.contains(&e) {
            if ed > beta as u64 {
                report.violations.push(Violation { edge: e, constraint: Constraint::P1, edge_degree: ed });
            }
        } else if (ed as f64) < lower - 1e-9 {
            report.violations.push(Violation { edge: e, constraint: Constraint::P2, edge_degree: ed });
        }
    }
    report
}

/// P1 on edges of positive weight, P2 (`≥ β − 1`) on every edge of `G`,
/// weights in `[0, β]`. Edges of `G` missing from `weights` count as weight 0.
pub fn validate_edcs_weighted(g: &[Edge], weights: &[(Edge, u32)], beta: u32) -> ValidationReport {
    let w: DetHashMap<Edge, u32> = weights.iter().copied().collect();
    let deg = degree_table(weights.iter().map(|&(e, w)| (e, w as u64)));
    let in_g: std::collections::BTreeSet<Edge> = g.iter().copied().collect();
    let mut report = ValidationReport::default();
    let mut sorted = weights.to_vec();
    sorted.sort_unstable();
    for &(e, we) in &sorted {
        if we > beta {
            report.violations.push(Violation { edge: e, constraint: Constraint::WeightRange, edge_degree: edge_degree(&deg, e) });
        }
        if !in_g.contains(&e) && we > 0 {
            report.violations.push(Violation { edge: e, constraint: Constraint::NotInGraph, edge_degree: edge_degree(&deg, e) });
        }
    }
    for &e in &in_g {
        let ed = edge_degree(&deg, e);
        if w.get(&e).copied().unwrap_or(0) > 0 && ed > beta as u64 {
            report.violations.push(Violation { edge: e, constraint: Constraint::P1, edge_degree: ed });
        }
        if ed + 1 < beta as u64 {
            report.violations.push(Violation { edge: e, constraint: Constraint::P2, edge_degree: ed });
        }
    }
    report
}

/// `μ(G) / max(1, size)`.
pub fn approx_ratio(g: &DynBipartiteGraph, matching_size: usize) -> f64 {
    ratio(hopcroft_karp_graph(g), matching_size)
}

pub fn ratio(mu: usize, matching_size: usize) -> f64 {
    mu as f64 / matching_size.max(1) as f64
}

/// All bipartite graphs on `n_left + n_right` vertices, as edge lists, in
/// bitmask order.
pub fn all_graphs(n_left: u32, n_right: u32) -> impl Iterator<Item = Vec<Edge>> {
    let slots: Vec<Edge> = (0..n_left).flat_map(|l| (0..n_right).map(move |r| Edge::new(l, r))).collect();
    let count = 1u64 << slots.len();
    (0..count).map(move |mask| slots.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect())
}

/// Compares Hopcroft–Karp against brute force on every bipartite graph with
/// the given sides, in parallel chunks. Returns the first disagreeing mask.
pub fn cross_check_exhaustive(n_left: u32, n_right: u32, policy: ExecPolicy) -> Result<u64, (u64, usize, usize)> {
    let slots: Vec<Edge> = (0..n_left).flat_map(|l| (0..n_right).map(move |r| Edge::new(l, r))).collect();
    let count = 1u64 << slots.len();
    let chunk = 1u64 << 10;
    let chunks = count.div_ceil(chunk);
    let results = policy.map_range(0..chunks, |c| {
        for mask in c * chunk..((c + 1) * chunk).min(count) {
            let edges: Vec<Edge> = slots.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
            let hk = hopcroft_karp(n_left, n_right, &edges).0;
            let bf = brute_force_mu(&edges).expect("at most 24 slots");
            if hk != bf {
                return Err((mask, hk, bf));
            }
        }
        Ok(())
    });
    results.into_iter().collect::<Result<Vec<()>, _>>()?;
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn complete(a: u32, b: u32) -> Vec<Edge> {
        (0..a).flat_map(|l| (0..b).map(move |r| Edge::new(l, r))).collect()
    }

    #[test]
    fn small_examples() {
        assert_eq!(hopcroft_karp(3, 3, &complete(3, 3)).0, 3);
        let path = [Edge::new(0, 0), Edge::new(0, 1), Edge::new(1, 1)];
        assert_eq!(hopcroft_karp(2, 2, &path).0, 2);
        assert_eq!(brute_force_mu(&[]).unwrap(), 0);
        assert_eq!(brute_force_mu(&[Edge::new(0, 0)]).unwrap(), 1);
        assert!(brute_force_mu(&complete(5, 5)).is_err());
    }

    #[test]
    fn returned_matching_is_valid() {
        let (mu, m) = hopcroft_karp(3, 3, &complete(3, 3));
        assert_eq!(m.len(), mu);
        let mut ls: Vec<u32> = m.iter().map(|e| e.left_index()).collect();
        let mut rs: Vec<u32> = m.iter().map(|e| e.right_index()).collect();
        ls.dedup();
        rs.sort();
        rs.dedup();
        assert_eq!((ls.len(), rs.len()), (3, 3));
    }

    /// Blocks of size 2: all pairs except those between the second left and
    /// second right block.
    #[test]
    fn four_block_of_size_two() {
        let edges: Vec<Edge> = complete(4, 4).into_iter().filter(|e| !(e.left_index() >= 2 && e.right_index() >= 2)).collect();
        assert_eq!(edges.len(), 12);
        assert_eq!(brute_force_mu(&edges).unwrap(), 4);
        assert_eq!(hopcroft_karp(4, 4, &edges).0, 4);
    }

    #[test]
    fn exhaustive_up_to_four_by_four() {
        for (a, b) in [(1, 1), (2, 3), (3, 3), (4, 4)] {
            assert!(cross_check_exhaustive(a, b, ExecPolicy::default()).is_ok());
        }
    }

    #[test]
    fn random_six_by_six() {
        let mut rng = ChaCha8Rng::seed_from_u64(66);
        for _ in 0..1000 {
            let mut edges: Vec<Edge> = complete(6, 6).into_iter().filter(|_| rng.gen_bool(0.3)).collect();
            edges.truncate(BRUTE_FORCE_MAX_EDGES);
            assert_eq!(hopcroft_karp(6, 6, &edges).0, brute_force_mu(&edges).unwrap());
        }
    }

    #[test]
    fn validator_examples() {
        let g = vec![Edge::new(0, 0), Edge::new(1, 1)];
        assert!(validate_edcs_unweighted(&g, &g, 4, 0.5).ok());
        let r = validate_edcs_unweighted(&[Edge::new(0, 0)], &[], 4, 0.5);
        assert_eq!(r.count(Constraint::P2), 1);
        assert!(validate_edcs_weighted(&[Edge::new(0, 0)], &[(Edge::new(0, 0), 2)], 4).ok());
        let r = validate_edcs_weighted(&[Edge::new(0, 0)], &[(Edge::new(0, 0), 1)], 4);
        assert_eq!(r.violations, vec![Violation { edge: Edge::new(0, 0), constraint: Constraint::P2, edge_degree: 2 }]);
        let r = validate_edcs_weighted(&[Edge::new(0, 0)], &[(Edge::new(0, 0), 5)], 4);
        assert_eq!(r.count(Constraint::WeightRange), 1);
        assert_eq!(r.count(Constraint::P1), 1);
        // star of 3 inside H with beta 3: every edge degree is 4
        let star = vec![Edge::new(0, 0), Edge::new(0, 1), Edge::new(0, 2)];
        assert_eq!(validate_edcs_unweighted(&star, &star, 3, 0.5).count(Constraint::P1), 3);
    }

    #[test]
    fn ratio_examples() {
        let mut g = DynBipartiteGraph::new(3, 3);
        for i in 0..3 {
            g.insert_edge(Edge::new(i, i)).unwrap();
        }
        assert_eq!(approx_ratio(&g, 3), 1.0);
        assert_eq!(approx_ratio(&g, 2), 1.5);
        assert_eq!(ratio(0, 0), 0.0);
    }
}
