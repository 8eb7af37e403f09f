// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Undirected simple graphs, random generators and the one-step transition
//! matrix `W_ij = A_ij / K_i`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Regeneration attempts before a random model gives up.
pub const MAX_ATTEMPTS: u32 = 100;

/// Finite undirected simple graph.
///
/// Construction guarantees symmetry, no self-loops and no isolated nodes.
/// Connectivity and bipartiteness are reported by [`validate`] and enforced by
/// [`load_edge_list`] and [`generate_graph`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    neighbors: Vec<Vec<usize>>,
    degree_sum: usize,
}

impl Graph {
    /// Build from an edge list over nodes `0..n`. Duplicate edges collapse.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        let mut sets = vec![BTreeSet::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range for {n} nodes")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            sets[a].insert(b);
            sets[b].insert(a);
        }
        if let Some(i) = sets.iter().position(|s| s.is_empty()) {
            return Err(Error::InvalidGraph(format!("node {i} is isolated")));
        }
        let neighbors: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let degree_sum = neighbors.iter().map(Vec::len).sum();
        Ok(Graph { neighbors, degree_sum })
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn degree_sum(&self) -> usize {
        self.degree_sum
    }

    /// Sorted neighbor list of node `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    /// Edges `(i, j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.degree_sum / 2);
        for (i, nb) in self.neighbors.iter().enumerate() {
            out.extend(nb.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    /// Dense 0/1 adjacency matrix.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut a = DMatrix::zeros(n, n);
        for (i, nb) in self.neighbors.iter().enumerate() {
            for &j in nb {
                a[(i, j)] = 1.0;
            }
        }
        a
    }

    /// Breadth-first hop distances from a set of sources; unreachable nodes
    /// get `usize::MAX`.
    pub fn distances_from(&self, sources: &[usize]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &self.neighbors[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Edge list text accepted by [`load_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (i, j) in self.edges() {
            s.push_str(&format!("{i} {j}\n"));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Diagnostics {
    pub connected: bool,
    pub bipartite: bool,
    pub aperiodic: bool,
}

impl Diagnostics {
    pub fn is_valid(&self) -> bool {
        self.connected && !self.bipartite
    }
}

/// Connectivity, bipartiteness and aperiodicity of the simple random walk.
pub fn validate(g: &Graph) -> Diagnostics {
    let n = g.n();
    let mut color = vec![u8::MAX; n];
    let mut bipartite = true;
    let mut components = 0;
    for s in 0..n {
        if color[s] != u8::MAX {
            continue;
        }
        components += 1;
        color[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if color[v] == u8::MAX {
                    color[v] = 1 - color[u];
                    queue.push_back(v);
                } else if color[v] == color[u] {
                    bipartite = false;
                }
            }
        }
    }
    let connected = components == 1;
    Diagnostics {
        connected,
        bipartite,
        aperiodic: connected && !bipartite,
    }
}

fn require_valid(g: Graph) -> Result<Graph> {
    let d = validate(&g);
    if !d.connected {
        return Err(Error::InvalidGraph("graph is disconnected".into()));
    }
    if d.bipartite {
        return Err(Error::InvalidGraph("graph is bipartite".into()));
    }
    Ok(g)
}

/// Parse a whitespace-separated edge list.
///
/// Lines starting with `#` and blank lines are skipped. Node ids are
/// compacted to `0..n` in increasing order of the original id.
pub fn load_edge_list(text: &str) -> Result<Graph> {
    let mut raw = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected two node ids, found {} fields", fields.len()),
            });
        }
        let mut ids = [0u64; 2];
        for (slot, f) in ids.iter_mut().zip(&fields) {
            *slot = f.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("'{f}' is not a non-negative integer"),
            })?;
        }
        if ids[0] == ids[1] {
            return Err(Error::Parse {
                line: line_no,
                message: format!("self-loop at node {}", ids[0]),
            });
        }
        raw.push((ids[0], ids[1]));
    }
    if raw.is_empty() {
        return Err(Error::InvalidGraph("edge list is empty".into()));
    }
    let ids: BTreeSet<u64> = raw.iter().flat_map(|&(a, b)| [a, b]).collect();
    let index: BTreeMap<u64, usize> = ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
    let edges: Vec<(usize, usize)> = raw.iter().map(|(a, b)| (index[a], index[b])).collect();
    require_valid(Graph::from_edges(ids.len(), &edges)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GraphModel {
    /// Ring of `n` nodes, each joined to `m` neighbors on either side, with
    /// every ring edge rewired with probability `rewire`.
    WattsStrogatz { n: usize, m: usize, rewire: f64 },
    /// Preferential attachment of `m` edges per new node.
    BarabasiAlbert { n: usize, m: usize },
    Complete { n: usize },
}

impl GraphModel {
    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            GraphModel::WattsStrogatz { n, m, rewire } => {
                if n < 3 || m < 1 || 2 * m >= n {
                    return bad(format!("watts-strogatz needs n >= 3 and 1 <= m < n/2, got n={n}, m={m}"));
                }
                if !(0.0..=1.0).contains(&rewire) {
                    return bad(format!("rewiring probability {rewire} outside [0, 1]"));
                }
            }
            GraphModel::BarabasiAlbert { n, m } => {
                if n < 3 || m < 1 || m >= n {
                    return bad(format!("barabasi-albert needs n >= 3 and 1 <= m < n, got n={n}, m={m}"));
                }
                if m == 1 && n > 2 {
                    // every realization is a tree
                    return bad("barabasi-albert with m = 1 always yields a bipartite tree".into());
                }
            }
            GraphModel::Complete { n } => {
                if n < 3 {
                    return bad(format!("complete graph needs n >= 3, got {n}"));
                }
            }
        }
        Ok(())
    }
}

/// Generate a valid graph from `model`, reproducibly in `seed`.
pub fn generate_graph(model: GraphModel, seed: u64) -> Result<Graph> {
    generate_graph_traced(model, seed).map(|(g, _)| g)
}

/// As [`generate_graph`], also returning the attempt index that succeeded.
/// Attempt `a` draws from substream `a` of `seed`.
pub fn generate_graph_traced(model: GraphModel, seed: u64) -> Result<(Graph, u32)> {
    model.check()?;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = stream_rng(seed, u64::from(attempt));
        let edges = match model {
            GraphModel::WattsStrogatz { n, m, rewire } => watts_strogatz(n, m, rewire, &mut rng),
            GraphModel::BarabasiAlbert { n, m } => barabasi_albert(n, m, &mut rng),
            GraphModel::Complete { n } => {
                let mut e = Vec::new();
                for i in 0..n {
                    e.extend((i + 1..n).map(|j| (i, j)));
                }
                e
            }
        };
        let n = match model {
            GraphModel::WattsStrogatz { n, .. }
            | GraphModel::BarabasiAlbert { n, .. }
            | GraphModel::Complete { n } => n,
        };
        if let Ok(g) = Graph::from_edges(n, &edges) {
            if validate(&g).is_valid() {
                return Ok((g, attempt));
            }
        }
    }
    Err(Error::RetryLimit { attempts: MAX_ATTEMPTS })
}

fn watts_strogatz<R: Rng>(n: usize, m: usize, rewire: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=m {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for j in 1..=m {
        for u in 0..n {
            let v = (u + j) % n;
            if rng.random::<f64>() >= rewire {
                continue;
            }
            if adj[u].len() >= n - 1 || !adj[u].contains(&v) {
                continue;
            }
            let mut w = rng.random_range(0..n);
            while w == u || adj[u].contains(&w) {
                w = rng.random_range(0..n);
            }
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    let mut edges = Vec::new();
    for (u, nb) in adj.iter().enumerate() {
        edges.extend(nb.iter().filter(|&&v| v > u).map(|&v| (u, v)));
    }
    edges
}

fn barabasi_albert<R: Rng>(n: usize, m: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    // each node appears once per incident edge end
    let mut ends = Vec::new();
    for i in 0..=m {
        for j in i + 1..=m {
            edges.push((i, j));
            ends.push(i);
            ends.push(j);
        }
    }
    for v in m + 1..n {
        let mut chosen = BTreeSet::new();
        while chosen.len() < m {
            chosen.insert(ends[rng.random_range(0..ends.len())]);
        }
        for &u in &chosen {
            edges.push((u, v));
            ends.push(u);
            ends.push(v);
        }
    }
    edges
}

/// One-step transition matrix of the simple random walk on a graph.
#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    w: DMatrix<f64>,
    neighbors: Vec<Vec<usize>>,
    degrees: Vec<f64>,
    stationary: DVector<f64>,
}

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// Dense `W`.
    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Equilibrium `K_j / sum_r K_r`.
    pub fn stationary(&self) -> &DVector<f64> {
        &self.stationary
    }

    /// Row vector times `W`, using the sparsity pattern.
    pub fn left_mul(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.n(), |j, _| {
            self.neighbors[j].iter().map(|&i| x[i] / self.degrees[i]).sum()
        })
    }

    /// `W` times a column vector, using the sparsity pattern.
    pub fn right_mul(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.n(), |i, _| {
            self.neighbors[i].iter().map(|&j| v[j]).sum::<f64>() / self.degrees[i]
        })
    }

    /// `m W` for a dense `m`, using the sparsity pattern of `W`.
    pub fn mat_mul_right(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n();
        let mut out = DMatrix::zeros(m.nrows(), n);
        for j in 0..n {
            for &k in &self.neighbors[j] {
                let w = 1.0 / self.degrees[k];
                for i in 0..m.nrows() {
                    out[(i, j)] += m[(i, k)] * w;
                }
            }
        }
        out
    }
}

pub fn transition_matrix(g: &Graph) -> TransitionMatrix {
    let n = g.n();
    let degrees: Vec<f64> = g.degrees().into_iter().map(|k| k as f64).collect();
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for &j in g.neighbors(i) {
            w[(i, j)] = 1.0 / degrees[i];
        }
    }
    let total = g.degree_sum() as f64;
    let stationary = DVector::from_iterator(n, degrees.iter().map(|k| k / total));
    TransitionMatrix {
        w,
        neighbors: (0..n).map(|i| g.neighbors(i).to_vec()).collect(),
        degrees,
        stationary,
    }
}
