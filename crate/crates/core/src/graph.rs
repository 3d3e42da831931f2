//! Pseudo-undirected graphs and their structural matrices.
//!
//! Every node pair of a pseudo-undirected graph is joined by two oppositely
//! directed edges whose weights may differ. All matrices produced here share
//! one column ordering for the `2m` directed edges:
//!
//! ```text
//! columns 0..m    the a→b direction of each pair, in declaration order
//! columns m..2m   the b→a direction of each pair, in the same order
//! ```
//!
//! For a path built by [`path_graph`] this makes the incidence matrix factor
//! as `E = E_tau · [I | -I]`.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("node index {index} out of range 1..={n}")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("self pair on node {0}")]
    SelfPair(usize),

    #[error("duplicate pair {{{0}, {1}}}")]
    DuplicatePair(usize, usize),

    #[error("pair {{{a}, {b}}} has weights ({w_ab}, {w_ba}); a zero weight requires both to be zero")]
    SingleZeroWeight { a: usize, b: usize, w_ab: f64, w_ba: f64 },

    #[error("pair {{{0}, {1}}} has both weights zero")]
    ZeroPair(usize, usize),

    #[error("non-finite weight on pair {{{0}, {1}}}")]
    NonFiniteWeight(usize, usize),

    #[error("dimension mismatch: expected {expected} weights, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("undirected skeleton is disconnected")]
    DisconnectedGraph,

    #[error("graph has no directed edge {0}")]
    UnknownEdge(DirectedEdge),
}

/// A physical directed edge, `tail → head`, with 1-based node indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub tail: usize,
    pub head: usize,
}

impl DirectedEdge {
    pub fn new(tail: usize, head: usize) -> Self {
        Self { tail, head }
    }
}

impl fmt::Display for DirectedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.tail, self.head)
    }
}

/// One node pair with the weights of both directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgePair {
    pub a: usize,
    pub b: usize,
    pub w_ab: f64,
    pub w_ba: f64,
}

/// A pseudo-undirected graph on nodes `1..=n`.
///
/// Construction enforces: no self pairs, no duplicate unordered pairs, and a
/// zero weight in one direction only if the other direction is zero too.
/// Pairs with both weights zero carry no edge and are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoGraph {
    n: usize,
    pairs: Vec<EdgePair>,
}

impl PseudoGraph {
    pub fn new(n: usize, pairs: Vec<EdgePair>) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewNodes(n));
        }
        let mut seen = std::collections::HashSet::new();
        for p in &pairs {
            for index in [p.a, p.b] {
                if index == 0 || index > n {
                    return Err(GraphError::NodeOutOfRange { index, n });
                }
            }
            if p.a == p.b {
                return Err(GraphError::SelfPair(p.a));
            }
            if !p.w_ab.is_finite() || !p.w_ba.is_finite() {
                return Err(GraphError::NonFiniteWeight(p.a, p.b));
            }
            // Configured inputs, so exact comparison against zero.
            match (p.w_ab == 0.0, p.w_ba == 0.0) {
                (true, true) => return Err(GraphError::ZeroPair(p.a, p.b)),
                (true, false) | (false, true) => {
                    return Err(GraphError::SingleZeroWeight {
                        a: p.a,
                        b: p.b,
                        w_ab: p.w_ab,
                        w_ba: p.w_ba,
                    })
                }
                (false, false) => {}
            }
            if !seen.insert((p.a.min(p.b), p.a.max(p.b))) {
                return Err(GraphError::DuplicatePair(p.a, p.b));
            }
        }
        Ok(Self { n, pairs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of node pairs; the directed edge count is `2 * m()`.
    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[EdgePair] {
        &self.pairs
    }

    /// Column index → physical edge, in the canonical ordering.
    pub fn edge_order(&self) -> Vec<DirectedEdge> {
        let forward = self.pairs.iter().map(|p| DirectedEdge::new(p.a, p.b));
        let reverse = self.pairs.iter().map(|p| DirectedEdge::new(p.b, p.a));
        forward.chain(reverse).collect()
    }

    /// Edge weights in the canonical column ordering.
    pub fn weights(&self) -> WeightMatrix {
        let forward = self.pairs.iter().map(|p| p.w_ab);
        let reverse = self.pairs.iter().map(|p| p.w_ba);
        WeightMatrix(forward.chain(reverse).collect())
    }

    /// Column of `edge` in the canonical ordering.
    pub fn edge_column(&self, edge: DirectedEdge) -> Result<usize, GraphError> {
        let m = self.m();
        self.pairs
            .iter()
            .enumerate()
            .find_map(|(k, p)| {
                if p.a == edge.tail && p.b == edge.head {
                    Some(k)
                } else if p.b == edge.tail && p.a == edge.head {
                    Some(m + k)
                } else {
                    None
                }
            })
            .ok_or(GraphError::UnknownEdge(edge))
    }

    pub fn weight(&self, edge: DirectedEdge) -> Result<f64, GraphError> {
        let col = self.edge_column(edge)?;
        Ok(self.weights().0[col])
    }

    /// Returns a copy with the weight of `edge` replaced.
    pub fn with_weight(&self, edge: DirectedEdge, w: f64) -> Result<Self, GraphError> {
        let col = self.edge_column(edge)?;
        let m = self.m();
        let mut pairs = self.pairs.clone();
        if col < m {
            pairs[col].w_ab = w;
        } else {
            pairs[col - m].w_ba = w;
        }
        Self::new(self.n, pairs)
    }

    pub fn weight_sum(&self) -> f64 {
        self.pairs.iter().map(|p| p.w_ab + p.w_ba).sum()
    }

    /// Pair weights as `(forward, reverse)` sequences if the graph is the path
    /// `1-2-…-n` with pairs declared as `{i, i+1}` in order.
    pub fn as_path(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.m() != self.n - 1 {
            return None;
        }
        let mut forward = Vec::with_capacity(self.m());
        let mut reverse = Vec::with_capacity(self.m());
        for (i, p) in self.pairs.iter().enumerate() {
            if p.a == i + 1 && p.b == i + 2 {
                forward.push(p.w_ab);
                reverse.push(p.w_ba);
            } else {
                return None;
            }
        }
        Some((forward, reverse))
    }

    /// Sorted neighbour lists of the undirected skeleton (0-based).
    fn skeleton(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for p in &self.pairs {
            adj[p.a - 1].push(p.b - 1);
            adj[p.b - 1].push(p.a - 1);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        self.bfs_tree().is_some()
    }

    /// Breadth-first spanning tree from node 1. Returns tree edges as
    /// `(parent, child)` in discovery order (0-based), or `None` when the
    /// skeleton is disconnected.
    fn bfs_tree(&self) -> Option<Vec<(usize, usize)>> {
        let adj = self.skeleton();
        let mut visited = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        visited[0] = true;
        let mut tree = Vec::with_capacity(self.n - 1);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !visited[v] {
                    visited[v] = true;
                    tree.push((u, v));
                    queue.push_back(v);
                }
            }
        }
        (tree.len() == self.n - 1).then_some(tree)
    }

    /// Longest shortest-path distance in the undirected skeleton.
    pub fn diameter(&self) -> Option<usize> {
        let adj = self.skeleton();
        let mut diameter = 0;
        for s in 0..self.n {
            let mut dist = vec![usize::MAX; self.n];
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            let far = *dist.iter().max().unwrap();
            if far == usize::MAX {
                return None;
            }
            diameter = diameter.max(far);
        }
        Some(diameter)
    }

    /// Weighted adjacency `A[i][j] = w(i → j)`.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for p in &self.pairs {
            a[(p.a - 1, p.b - 1)] += p.w_ab;
            a[(p.b - 1, p.a - 1)] += p.w_ba;
        }
        a
    }

    /// Weighted out-degrees.
    pub fn out_degrees(&self) -> DVector<f64> {
        let a = self.adjacency();
        DVector::from_iterator(self.n, a.row_iter().map(|r| r.sum()))
    }
}

/// Diagonal of edge weights, ordered like [`PseudoGraph::edge_order`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix(pub Vec<f64>);

impl WeightMatrix {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_diagonal(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.0))
    }
}

/// Incidence matrices of a connected pseudo-undirected graph.
#[derive(Debug, Clone)]
pub struct IncidenceSet {
    /// `n × 2m`, +1 at the tail and -1 at the head of each column.
    pub e: DMatrix<f64>,
    /// `n × 2m`, only the +1 (tail) entries of `e`.
    pub e_out: DMatrix<f64>,
    /// `n × (n-1)` incidence of the spanning tree, edges oriented parent → child.
    pub e_tree: DMatrix<f64>,
    /// `(n-1) × 2m` relation matrix with `e = e_tree · relation`.
    pub relation: DMatrix<f64>,
    pub edge_order: Vec<DirectedEdge>,
    /// For every tree edge, the column of `e` with the same orientation.
    pub tree_columns: Vec<usize>,
}

impl IncidenceSet {
    /// `E_in = E - E_out`, the head (-1) entries.
    pub fn e_in(&self) -> DMatrix<f64> {
        &self.e - &self.e_out
    }

    pub fn tree_edges(&self) -> Vec<DirectedEdge> {
        self.tree_columns.iter().map(|&c| self.edge_order[c]).collect()
    }
}

pub fn incidence_set(g: &PseudoGraph) -> Result<IncidenceSet, GraphError> {
    let tree = g.bfs_tree().ok_or(GraphError::DisconnectedGraph)?;
    let n = g.n();
    let edge_order = g.edge_order();
    let cols = edge_order.len();

    let mut e = DMatrix::zeros(n, cols);
    let mut e_out = DMatrix::zeros(n, cols);
    for (c, edge) in edge_order.iter().enumerate() {
        e[(edge.tail - 1, c)] = 1.0;
        e[(edge.head - 1, c)] = -1.0;
        e_out[(edge.tail - 1, c)] = 1.0;
    }

    let mut e_tree = DMatrix::zeros(n, n - 1);
    let mut parent = vec![None; n];
    let mut parent_edge = vec![usize::MAX; n];
    let mut tree_columns = Vec::with_capacity(n - 1);
    for (k, &(p, c)) in tree.iter().enumerate() {
        e_tree[(p, k)] = 1.0;
        e_tree[(c, k)] = -1.0;
        parent[c] = Some(p);
        parent_edge[c] = k;
        let col = edge_order
            .iter()
            .position(|d| d.tail == p + 1 && d.head == c + 1)
            .expect("tree edge belongs to the graph");
        tree_columns.push(col);
    }

    // Tree edges on the path from the root to `v`.
    let root_path = |mut v: usize| {
        let mut path = Vec::new();
        while let Some(p) = parent[v] {
            path.push(parent_edge[v]);
            v = p;
        }
        path
    };

    // e_u - e_v = (e_root - e_v) - (e_root - e_u): the tree solve is the
    // indicator of the root path to v minus that of the root path to u.
    let mut relation = DMatrix::zeros(n - 1, cols);
    for (c, edge) in edge_order.iter().enumerate() {
        for k in root_path(edge.head - 1) {
            relation[(k, c)] += 1.0;
        }
        for k in root_path(edge.tail - 1) {
            relation[(k, c)] -= 1.0;
        }
    }

    Ok(IncidenceSet {
        e,
        e_out,
        e_tree,
        relation,
        edge_order,
        tree_columns,
    })
}

/// Out-Laplacian `L = E_out · W · Eᵀ` with its edge-ordering provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    pub matrix: DMatrix<f64>,
    pub edge_order: Vec<DirectedEdge>,
}

impl Laplacian {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_tridiagonal(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..n).all(|j| i.abs_diff(j) <= 1 || self.matrix[(i, j)] == 0.0))
    }

    pub fn max_row_sum(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|r| r.sum().abs())
            .fold(0.0, f64::max)
    }
}

pub fn laplacian(g: &PseudoGraph) -> Laplacian {
    let n = g.n();
    let edge_order = g.edge_order();
    let w = g.weights();
    let mut e = DMatrix::zeros(n, edge_order.len());
    let mut e_out_w = DMatrix::zeros(n, edge_order.len());
    for (c, edge) in edge_order.iter().enumerate() {
        e[(edge.tail - 1, c)] = 1.0;
        e[(edge.head - 1, c)] = -1.0;
        e_out_w[(edge.tail - 1, c)] = w.0[c];
    }
    Laplacian {
        matrix: e_out_w * e.transpose(),
        edge_order,
    }
}

/// Path `1 - 2 - … - n`; `forward[i]` weighs edge `i+1 → i+2`, `reverse[i]`
/// weighs edge `i+2 → i+1` (1-based node labels).
pub fn path_graph(n: usize, forward: &[f64], reverse: &[f64]) -> Result<PseudoGraph, GraphError> {
    if n < 2 {
        return Err(GraphError::TooFewNodes(n));
    }
    for got in [forward.len(), reverse.len()] {
        if got != n - 1 {
            return Err(GraphError::DimensionMismatch { expected: n - 1, got });
        }
    }
    let pairs = forward
        .iter()
        .zip(reverse)
        .enumerate()
        .map(|(i, (&w_ab, &w_ba))| EdgePair {
            a: i + 1,
            b: i + 2,
            w_ab,
            w_ba,
        })
        .collect();
    PseudoGraph::new(n, pairs)
}

/// Unit-weight path on `n` nodes.
pub fn unit_path(n: usize) -> Result<PseudoGraph, GraphError> {
    let ones = vec![1.0; n.saturating_sub(1)];
    path_graph(n, &ones, &ones)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeDegree {
    pub node: usize,
    pub neighbours: usize,
    pub out_degree: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub n: usize,
    pub pairs: usize,
    pub connected: bool,
    pub negative_weights: usize,
    pub degrees: Vec<NodeDegree>,
}

pub fn validate(g: &PseudoGraph) -> Diagnostics {
    let skeleton = g.skeleton();
    let out = g.out_degrees();
    Diagnostics {
        n: g.n(),
        pairs: g.m(),
        connected: g.is_connected(),
        negative_weights: g.weights().0.iter().filter(|&&w| w < 0.0).count(),
        degrees: (0..g.n())
            .map(|i| NodeDegree {
                node: i + 1,
                neighbours: skeleton[i].len(),
                out_degree: out[i],
            })
            .collect(),
    }
}
