//! Social graphs on which households observe each other.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of whole-graph resamples before an Erdős–Rényi draw gives up.
pub const DEFAULT_MAX_ATTEMPTS: usize = 1000;

/// Acceptance rule applied to Erdős–Rényi samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConnectivityPolicy {
    /// Reject samples with an isolated node.
    #[default]
    NoIsolated,
    /// Reject samples that are not connected.
    Connected,
}

/// Undirected simple graph; node `i` is household `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SocialGraph {
    adjacency: Vec<Vec<usize>>,
}

impl SocialGraph {
    /// Builds a graph from an edge list, rejecting self-loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut sets = vec![BTreeSet::new(); n];
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Graph(format!("edge ({a}, {b}) out of range for n = {n}")));
            }
            if a == b {
                return Err(Error::Graph(format!("self-loop at node {a}")));
            }
            if !sets[a].insert(b) {
                return Err(Error::Graph(format!("duplicate edge ({a}, {b})")));
            }
            sets[b].insert(a);
        }
        Ok(Self::from_sets(sets))
    }

    fn from_sets(sets: Vec<BTreeSet<usize>>) -> Self {
        SocialGraph {
            adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn has_isolated_node(&self) -> bool {
        self.adjacency.iter().any(Vec::is_empty)
    }

    pub fn is_complete(&self) -> bool {
        let n = self.n();
        self.adjacency.iter().all(|nb| nb.len() == n - 1)
    }

    /// Hop distances from `source`; `None` marks unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || self.bfs_distances(0).iter().all(Option::is_some)
    }

    /// Writes one `i j` line per undirected edge, `i < j`, 0-indexed.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut buf = String::new();
        for (i, j) in self.edges() {
            writeln!(buf, "{i} {j}").unwrap();
        }
        out.write_all(buf.as_bytes())
    }

    pub fn read_edge_list<R: BufRead>(n: usize, input: R) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace().map(str::parse::<usize>);
            match (parts.next(), parts.next(), parts.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => edges.push((a, b)),
                _ => {
                    return Err(Error::Graph(format!(
                        "line {}: expected `i j`, got {line:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Self::from_edges(n, edges)
    }
}

pub fn complete_graph(n: usize) -> Result<SocialGraph> {
    if n < 2 {
        return Err(Error::Graph(format!("complete graph needs n >= 2, got {n}")));
    }
    Ok(SocialGraph {
        adjacency: (0..n)
            .map(|i| (0..n).filter(|&j| j != i).collect())
            .collect(),
    })
}

/// G(n, p), resampled whole until it satisfies `policy`.
pub fn erdos_renyi<R: Rng + ?Sized>(
    n: usize,
    p: f64,
    rng: &mut R,
    policy: ConnectivityPolicy,
    max_attempts: usize,
) -> Result<SocialGraph> {
    if n < 2 {
        return Err(Error::Graph(format!("need n >= 2, got {n}")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Graph(format!("edge probability must lie in (0, 1], got {p}")));
    }
    for _ in 0..max_attempts.max(1) {
        let mut sets = vec![BTreeSet::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < p {
                    sets[i].insert(j);
                    sets[j].insert(i);
                }
            }
        }
        let g = SocialGraph::from_sets(sets);
        let ok = match policy {
            ConnectivityPolicy::NoIsolated => !g.has_isolated_node(),
            ConnectivityPolicy::Connected => g.is_connected(),
        };
        if ok {
            return Ok(g);
        }
    }
    Err(Error::ResampleExhausted {
        attempts: max_attempts,
        reason: format!("no G({n}, {p}) sample satisfied {policy:?}; p is too small"),
    })
}

/// Ring lattice with `k_ring` nearest neighbours, each lattice edge rewired with
/// probability `p_rewire` to a uniformly chosen new endpoint.
pub fn watts_strogatz<R: Rng + ?Sized>(
    n: usize,
    k_ring: usize,
    p_rewire: f64,
    rng: &mut R,
) -> Result<SocialGraph> {
    if k_ring < 2 || k_ring % 2 != 0 || k_ring >= n {
        return Err(Error::Graph(format!(
            "k_ring must be even with 2 <= k_ring < n, got k_ring = {k_ring}, n = {n}"
        )));
    }
    if !(0.0..=1.0).contains(&p_rewire) {
        return Err(Error::Graph(format!("rewiring probability must lie in [0, 1], got {p_rewire}")));
    }
    let mut sets = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=k_ring / 2 {
            let v = (u + j) % n;
            sets[u].insert(v);
            sets[v].insert(u);
        }
    }
    for j in 1..=k_ring / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if rng.random::<f64>() >= p_rewire {
                continue;
            }
            if sets[u].len() >= n - 1 || !sets[u].contains(&v) {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !sets[u].contains(&w) {
                    break w;
                }
            };
            sets[u].remove(&v);
            sets[v].remove(&u);
            sets[u].insert(w);
            sets[w].insert(u);
        }
    }
    Ok(SocialGraph::from_sets(sets))
}

/// `<k> = 2|E| / n`.
pub fn mean_degree(g: &SocialGraph) -> f64 {
    2.0 * g.edge_count() as f64 / g.n() as f64
}

/// Mean BFS hop distance over ordered pairs `i != j`.
pub fn avg_shortest_path(g: &SocialGraph) -> Result<f64> {
    let n = g.n();
    if n < 2 {
        return Err(Error::Graph("path length needs at least two nodes".into()));
    }
    let mut total: u64 = 0;
    for s in 0..n {
        for (t, d) in g.bfs_distances(s).into_iter().enumerate() {
            match d {
                Some(d) => total += d as u64,
                None => return Err(Error::Disconnected { from: s, to: t }),
            }
        }
    }
    Ok(total as f64 / (n * (n - 1)) as f64)
}
