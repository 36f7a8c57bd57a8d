use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Weighted undirected graph without self-loops. Weights are positive integer
/// joint-appearance counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    labels: Vec<String>,
    /// Sorted by neighbor index.
    adj: Vec<Vec<(usize, u64)>>,
}

impl Graph {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self { labels, adj: vec![Vec::new(); n] }
    }

    /// Builds a graph from labelled nodes and `(u, v, weight)` edges; repeated
    /// edges accumulate.
    pub fn from_edges(labels: &[&str], edges: &[(usize, usize, u64)]) -> Self {
        let mut g = Self::new(labels.iter().map(|l| String::from(*l)).collect());
        for &(u, v, w) in edges {
            g.add_weight(u, v, w);
        }
        g
    }

    /// Add `w` to edge `{u, v}`. Self-loops and zero weights are ignored.
    pub fn add_weight(&mut self, u: usize, v: usize, w: u64) {
        if u == v || w == 0 {
            return;
        }
        for (a, b) in [(u, v), (v, u)] {
            let list = &mut self.adj[a];
            match list.binary_search_by_key(&b, |e| e.0) {
                Ok(i) => list[i].1 += w,
                Err(i) => list.insert(i, (b, w)),
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, u64)] {
        &self.adj[v]
    }

    pub fn weight(&self, u: usize, v: usize) -> u64 {
        self.adj[u]
            .binary_search_by_key(&v, |e| e.0)
            .map(|i| self.adj[u][i].1)
            .unwrap_or(0)
    }

    /// `deg(v) = |N(v)|`.
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Sum of incident edge weights.
    pub fn strength(&self, v: usize) -> f64 {
        self.adj[v].iter().map(|e| e.1 as f64).sum()
    }

    /// Total edge weight `m`.
    pub fn total_weight(&self) -> f64 {
        self.edges().map(|(_, _, w)| w as f64).sum()
    }

    /// Each edge once, with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |e| e.0 > u)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    pub(crate) fn unweighted_adjacency(&self) -> Vec<Vec<usize>> {
        self.adj
            .iter()
            .map(|l| l.iter().map(|e| e.0).collect())
            .collect()
    }

    /// Connected components, each sorted by node index, ordered by their
    /// smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        components_of(&self.unweighted_adjacency())
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Subgraph induced by `nodes` (kept in the given order).
    pub fn induced(&self, nodes: &[usize]) -> Graph {
        let mut position = vec![usize::MAX; self.node_count()];
        for (i, &v) in nodes.iter().enumerate() {
            position[v] = i;
        }
        let mut g = Graph::new(nodes.iter().map(|&v| self.labels[v].clone()).collect());
        for (i, &v) in nodes.iter().enumerate() {
            for &(u, w) in &self.adj[v] {
                let j = position[u];
                if j != usize::MAX && i < j {
                    g.add_weight(i, j, w);
                }
            }
        }
        g
    }

    /// Copy without edges lighter than `min_weight`; nodes are kept.
    pub fn without_edges_below(&self, min_weight: u64) -> Graph {
        let mut g = Graph::new(self.labels.clone());
        for (u, v, w) in self.edges() {
            if w >= min_weight {
                g.add_weight(u, v, w);
            }
        }
        g
    }
}

pub(crate) fn components_of(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    comp.push(u);
                    queue.push_back(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Hop distances from `source`; `usize::MAX` marks unreachable nodes.
pub(crate) fn bfs_distances(adj: &[Vec<usize>], source: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}
