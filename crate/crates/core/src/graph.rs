//! Directed communication topology induced by positions and transmission radii.
//!
//! Agent `i` reaches agent `j` when `j` sits inside the closed disk of radius
//! `d_i` centred on `i`. Edges are ordered pairs `(from, to)`; there are no
//! self-loops.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vec2::Vec2;

/// Zero-based agent index. Rendered 1-based in human-facing output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentId(pub usize);

impl AgentId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TopologySnapshot {
    n_agents: usize,
    edges: BTreeSet<(AgentId, AgentId)>,
}

impl TopologySnapshot {
    pub fn empty(n_agents: usize) -> Self {
        TopologySnapshot { n_agents, edges: BTreeSet::new() }
    }

    /// Builds a snapshot from explicit edges, rejecting self-loops and
    /// out-of-range endpoints.
    pub fn from_edges<I>(n_agents: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::Validation(format!("self-loop on agent {}", a + 1)));
            }
            if a >= n_agents || b >= n_agents {
                return Err(Error::Validation(format!("edge ({a}, {b}) outside 0..{n_agents}")));
            }
            set.insert((AgentId(a), AgentId(b)));
        }
        Ok(TopologySnapshot { n_agents, edges: set })
    }

    /// Complete digraph on `n_agents` vertices.
    pub fn complete(n_agents: usize) -> Self {
        let edges = (0..n_agents)
            .flat_map(|a| (0..n_agents).filter(move |&b| b != a).map(move |b| (AgentId(a), AgentId(b))))
            .collect();
        TopologySnapshot { n_agents, edges }
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn edges(&self) -> &BTreeSet<(AgentId, AgentId)> {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(AgentId(from), AgentId(to)))
    }

    pub fn insert(&mut self, from: usize, to: usize) {
        assert!(from != to && from < self.n_agents && to < self.n_agents, "bad edge ({from}, {to})");
        self.edges.insert((AgentId(from), AgentId(to)));
    }

    pub fn out_of(&self, i: usize) -> BTreeSet<AgentId> {
        self.edges.range((AgentId(i), AgentId(0))..=(AgentId(i), AgentId(usize::MAX))).map(|&(_, b)| b).collect()
    }

    pub fn in_of(&self, i: usize) -> BTreeSet<AgentId> {
        self.edges.iter().filter(|(_, b)| b.0 == i).map(|&(a, _)| a).collect()
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out_of(i).len()
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.edges.iter().filter(|(_, b)| b.0 == i).count()
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n_agents * self.n_agents.saturating_sub(1)
    }

    pub fn is_subset(&self, other: &TopologySnapshot) -> bool {
        self.edges.is_subset(&other.edges)
    }

    /// Adjacency lists indexed by source agent.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_agents];
        for &(a, b) in &self.edges {
            adj[a.0].push(b.0);
        }
        adj
    }
}

impl fmt::Display for TopologySnapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, (a, b)) in self.edges.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}->{b}")?;
        }
        write!(f, "}}")
    }
}

fn check_inputs<S: Scalar>(positions: &[Vec2<S>], radii: &[S], i: Option<usize>) {
    assert_eq!(positions.len(), radii.len(), "positions and radii must have equal length");
    if let Some(i) = i {
        assert!(i < positions.len(), "agent index {i} out of range for {} agents", positions.len());
    }
}

/// Agents inside `i`'s transmission disk.
pub fn outgoing_neighbors<S: Scalar>(positions: &[Vec2<S>], radii: &[S], i: AgentId) -> BTreeSet<AgentId> {
    check_inputs(positions, radii, Some(i.0));
    let ri = positions[i.0];
    positions
        .iter()
        .enumerate()
        .filter(|&(j, rj)| j != i.0 && ri.dist(*rj) <= radii[i.0])
        .map(|(j, _)| AgentId(j))
        .collect()
}

/// Agents whose transmission disk covers `i`.
pub fn incoming_neighbors<S: Scalar>(positions: &[Vec2<S>], radii: &[S], i: AgentId) -> BTreeSet<AgentId> {
    check_inputs(positions, radii, Some(i.0));
    let ri = positions[i.0];
    positions
        .iter()
        .enumerate()
        .filter(|&(j, rj)| j != i.0 && ri.dist(*rj) <= radii[j])
        .map(|(j, _)| AgentId(j))
        .collect()
}

/// Edge set built from every agent's outgoing neighbors.
pub fn snapshot<S: Scalar>(positions: &[Vec2<S>], radii: &[S]) -> TopologySnapshot {
    check_inputs(positions, radii, None);
    let n = positions.len();
    let edges = (0..n)
        .flat_map(|i| outgoing_neighbors(positions, radii, AgentId(i)).into_iter().map(move |j| (AgentId(i), j)))
        .collect();
    TopologySnapshot { n_agents: n, edges }
}

/// Same edge set, assembled from every agent's incoming neighbors instead.
pub fn snapshot_from_incoming<S: Scalar>(positions: &[Vec2<S>], radii: &[S]) -> TopologySnapshot {
    check_inputs(positions, radii, None);
    let n = positions.len();
    let edges = (0..n)
        .flat_map(|i| incoming_neighbors(positions, radii, AgentId(i)).into_iter().map(move |j| (j, AgentId(i))))
        .collect();
    TopologySnapshot { n_agents: n, edges }
}

fn reaches_all(adj: &[Vec<usize>], root: usize) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count == adj.len()
}

/// True when some agent has a directed path to every other agent.
pub fn has_directed_spanning_tree(topo: &TopologySnapshot) -> bool {
    if topo.n_agents == 0 {
        return false;
    }
    let adj = topo.adjacency();
    (0..topo.n_agents).any(|root| reaches_all(&adj, root))
}

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix<T> {
    n: usize,
    entries: Vec<T>,
}

impl<T: Num + Copy + PartialOrd> WeightMatrix<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.entries[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.entries[row * self.n..(row + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.entries.chunks(self.n.max(1))
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.n).map(|r| self.row(r).iter().fold(T::zero(), |acc, &v| acc + v)).collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|&v| v >= T::zero())
    }

    /// Applies the matrix to a list of points: `out_i = sum_j w_ij p_j`.
    pub fn apply<S: Scalar>(&self, points: &[Vec2<S>]) -> Vec<Vec2<S>>
    where
        T: Into<S>,
    {
        (0..self.n)
            .map(|r| self.row(r).iter().zip(points).fold(Vec2::zero(), |acc, (&w, &p)| acc + p.scale(w.into())))
            .collect()
    }
}

/// `I - T L` for the in-degree Laplacian `L` of `topo`.
///
/// Row `i` puts `1 - T |N_in(i)|` on the diagonal and `T` at each incoming
/// neighbor. Fails when `T * max_in_degree >= 1`.
pub fn update_matrix<T: Num + Copy + PartialOrd>(topo: &TopologySnapshot, t: T) -> Result<WeightMatrix<T>> {
    if !(t > T::zero()) {
        return Err(Error::Validation("sampling period must be positive".into()));
    }
    let n = topo.n_agents;
    let max_in = (0..n).map(|i| topo.in_degree(i)).max().unwrap_or(0);
    let scaled = |k: usize| (0..k).fold(T::zero(), |acc, _| acc + t);
    if scaled(max_in) >= T::one() {
        return Err(Error::SamplingConstraint { max_in_degree: max_in });
    }
    let mut entries = vec![T::zero(); n * n];
    for i in 0..n {
        entries[i * n + i] = T::one() - scaled(topo.in_degree(i));
    }
    for &(from, to) in &topo.edges {
        // row of the receiver, column of the sender
        entries[to.0 * n + from.0] = t;
    }
    Ok(WeightMatrix { n, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_agents() -> (Vec<Vec2<f64>>, Vec<f64>) {
        (
            vec![Vec2::new(2.0, 2.0), Vec2::new(1.4, 3.2), Vec2::new(3.7, 5.2), Vec2::new(4.5, 4.3)],
            vec![3.5, 2.5, 1.5, 1.4],
        )
    }

    fn ids(v: &[usize]) -> BTreeSet<AgentId> {
        v.iter().map(|&i| AgentId(i)).collect()
    }

    // pairwise distances: |r1-r2| = 1.3416, |r1-r3| = 3.6235, |r1-r4| = 3.3971,
    // |r2-r3| = 3.0480, |r2-r4| = 3.2894, |r3-r4| = 1.2042
    #[test]
    fn four_agents_neighbors() {
        let (p, d) = four_agents();
        assert_eq!(outgoing_neighbors(&p, &d, AgentId(0)), ids(&[1, 3]));
        assert_eq!(incoming_neighbors(&p, &d, AgentId(0)), ids(&[1]));
        let topo = snapshot(&p, &d);
        let expected = TopologySnapshot::from_edges(4, [(0, 1), (0, 3), (1, 0), (2, 3), (3, 2)]).unwrap();
        assert_eq!(topo, expected);
        assert!(has_directed_spanning_tree(&topo));
        assert_eq!(topo.to_string(), "{1->2, 1->4, 2->1, 3->4, 4->3}");
    }

    #[test]
    fn in_out_asymmetry() {
        // agent 1 covers agent 2; agent 2 does not cover agent 1
        let p = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)];
        let d = vec![1.5, 0.5];
        assert!(incoming_neighbors(&p, &d, AgentId(0)).is_empty());
        assert_eq!(outgoing_neighbors(&p, &d, AgentId(0)), ids(&[1]));
        assert_eq!(incoming_neighbors(&p, &d, AgentId(1)), ids(&[0]));
        assert!(outgoing_neighbors(&p, &d, AgentId(1)).is_empty());
    }

    #[test]
    fn degenerate_radii() {
        let p = vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 0.0)];
        assert_eq!(snapshot(&p, &[0.0, 0.0]), TopologySnapshot::complete(2));
        let p = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        assert_eq!(snapshot(&p, &[0.0; 3]).edge_count(), 0);
        assert!(outgoing_neighbors(&[Vec2::new(1.0, 1.0)], &[5.0], AgentId(0)).is_empty());
        let big = vec![100.0; 3];
        assert_eq!(incoming_neighbors(&p, &big, AgentId(2)), ids(&[0, 1]));
    }

    #[test]
    fn closed_ball_boundary() {
        let p = vec![Vec2::new(0.0, 0.0), Vec2::new(3.0, 4.0)];
        assert_eq!(outgoing_neighbors(&p, &[5.0, 0.0], AgentId(0)), ids(&[1]));
    }

    #[test]
    #[should_panic]
    fn index_out_of_range() {
        let p = vec![Vec2::new(0.0, 0.0)];
        outgoing_neighbors(&p, &[1.0], AgentId(3));
    }

    #[test]
    fn spanning_tree_cases() {
        assert!(has_directed_spanning_tree(&TopologySnapshot::complete(5)));
        let split = TopologySnapshot::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(!has_directed_spanning_tree(&split));
        assert!(has_directed_spanning_tree(&TopologySnapshot::empty(1)));
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(TopologySnapshot::from_edges(2, [(1, 1)]).is_err());
        assert!(TopologySnapshot::from_edges(2, [(0, 2)]).is_err());
    }

    #[test]
    fn update_matrix_values() {
        let m = update_matrix(&TopologySnapshot::empty(3), 0.1).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(m.get(r, c), if r == c { 1.0 } else { 0.0 });
            }
        }
        let m = update_matrix(&TopologySnapshot::complete(2), 0.1).unwrap();
        assert_eq!(m.row(0), &[0.9, 0.1]);
        assert_eq!(m.row(1), &[0.1, 0.9]);
        let m = update_matrix(&TopologySnapshot::complete(4), 0.1).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let want: f64 = if r == c { 0.7 } else { 0.1 };
                assert!((m.get(r, c) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn update_matrix_uses_incoming_rows() {
        // 1 -> 2 only: agent 2 averages toward agent 1
        let topo = TopologySnapshot::from_edges(2, [(0, 1)]).unwrap();
        let m = update_matrix(&topo, 0.25).unwrap();
        assert_eq!(m.row(0), &[1.0, 0.0]);
        assert_eq!(m.row(1), &[0.25, 0.75]);
    }

    #[test]
    fn update_matrix_rejects_large_period() {
        let err = update_matrix(&TopologySnapshot::complete(4), 0.5).unwrap_err();
        assert!(matches!(err, Error::SamplingConstraint { max_in_degree: 3 }));
        assert!(update_matrix(&TopologySnapshot::complete(2), 1.0).is_err());
        assert!(update_matrix(&TopologySnapshot::complete(2), 0.0).is_err());
    }

    #[test]
    fn update_matrix_exact_rational() {
        use num_rational::Ratio;
        let t = Ratio::new(1i64, 10);
        let m = update_matrix(&TopologySnapshot::complete(4), t).unwrap();
        assert!(m.row_sums().iter().all(|s| *s == Ratio::from_integer(1)));
        assert_eq!(m.get(0, 0), Ratio::new(7, 10));
        assert!(m.is_nonnegative());
    }
}
