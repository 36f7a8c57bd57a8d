use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::graph::{bfs_distances, Graph};
use super::GraphError;
use crate::result::AnalysisResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentralityMeasure {
    Degree,
    Betweenness,
    Closeness,
    Eigenvector,
}

impl CentralityMeasure {
    pub fn name(self) -> &'static str {
        match self {
            CentralityMeasure::Degree => "degree",
            CentralityMeasure::Betweenness => "betweenness",
            CentralityMeasure::Closeness => "closeness",
            CentralityMeasure::Eigenvector => "eigenvector",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityScores {
    pub measure: CentralityMeasure,
    pub scores: BTreeMap<String, f64>,
    /// Principal eigenvalue (eigenvector measure only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl CentralityScores {
    pub fn get(&self, node: &str) -> Option<f64> {
        self.scores.get(node).copied()
    }
}

pub const EIGEN_TOLERANCE: f64 = 1e-10;
pub const EIGEN_MAX_ITERATIONS: usize = 10_000;

/// Node centrality. Betweenness and closeness use unweighted hop counts;
/// eigenvector centrality uses edge weights.
pub fn centrality(graph: &Graph, measure: CentralityMeasure) -> Result<CentralityScores, GraphError> {
    if graph.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    let (values, lambda) = match measure {
        CentralityMeasure::Degree => ((0..graph.node_count()).map(|v| graph.degree(v) as f64).collect(), None),
        CentralityMeasure::Betweenness => (betweenness(graph), None),
        CentralityMeasure::Closeness => (closeness(graph), None),
        CentralityMeasure::Eigenvector => {
            let (v, l) = eigenvector(graph)?;
            (v, Some(l))
        }
    };
    Ok(CentralityScores {
        measure,
        scores: graph.labels().iter().cloned().zip(values).collect(),
        lambda,
    })
}

/// Brandes accumulation from the given sources over an unweighted adjacency.
/// Every ordered (source, target) pair contributes, so undirected callers
/// halve the totals.
pub(crate) fn brandes_accumulate(
    adj: &[Vec<usize>],
    sources: &[usize],
    vertex: &mut [f64],
    mut edge: Option<&mut BTreeMap<(usize, usize), f64>>,
) {
    let n = adj.len();
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut stack: Vec<usize> = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for &s in sources {
        for v in stack.drain(..) {
            sigma[v] = 0.0;
            dist[v] = usize::MAX;
            delta[v] = 0.0;
            preds[v].clear();
        }
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        for &w in stack.iter().rev() {
            for &v in &preds[w] {
                let c = sigma[v] / sigma[w] * (1.0 + delta[w]);
                if let Some(edge) = edge.as_deref_mut() {
                    let key = if v < w { (v, w) } else { (w, v) };
                    *edge.entry(key).or_default() += c;
                }
                delta[v] += c;
            }
            if w != s {
                vertex[w] += delta[w];
            }
        }
    }
    for v in stack.drain(..) {
        sigma[v] = 0.0;
        dist[v] = usize::MAX;
    }
}

fn betweenness(graph: &Graph) -> Vec<f64> {
    let adj = graph.unweighted_adjacency();
    let sources: Vec<usize> = (0..adj.len()).collect();
    let mut scores = vec![0.0; adj.len()];
    brandes_accumulate(&adj, &sources, &mut scores, None);
    scores.iter_mut().for_each(|s| *s /= 2.0);
    scores
}

/// Reciprocal of the summed hop distance to reachable nodes; 0 when isolated.
fn closeness(graph: &Graph) -> Vec<f64> {
    let adj = graph.unweighted_adjacency();
    (0..adj.len())
        .map(|v| {
            let total: usize = bfs_distances(&adj, v)
                .into_iter()
                .filter(|d| *d != usize::MAX)
                .sum();
            if total == 0 {
                0.0
            } else {
                1.0 / total as f64
            }
        })
        .collect()
}

/// Principal eigenvector of the weighted adjacency by power iteration on
/// `A + I` (same eigenvectors, and it converges on bipartite graphs where
/// iterating `A` alone oscillates).
fn eigenvector(graph: &Graph) -> Result<(Vec<f64>, f64), GraphError> {
    if !graph.is_connected() {
        return Err(GraphError::DisconnectedGraph);
    }
    let n = graph.node_count();
    let mut x = vec![1.0 / libm::sqrt(n as f64); n];
    let mut next = vec![0.0; n];
    for _ in 0..EIGEN_MAX_ITERATIONS {
        for v in 0..n {
            next[v] = x[v]
                + graph
                    .neighbors(v)
                    .iter()
                    .map(|&(u, w)| w as f64 * x[u])
                    .sum::<f64>();
        }
        let norm = libm::sqrt(next.iter().map(|a| a * a).sum::<f64>());
        next.iter_mut().for_each(|a| *a /= norm);
        let change = libm::sqrt(x.iter().zip(&next).map(|(a, b)| (a - b) * (a - b)).sum::<f64>());
        core::mem::swap(&mut x, &mut next);
        if change < EIGEN_TOLERANCE {
            break;
        }
    }
    let lambda: f64 = (0..n)
        .map(|v| {
            x[v] * graph
                .neighbors(v)
                .iter()
                .map(|&(u, w)| w as f64 * x[u])
                .sum::<f64>()
        })
        .sum();
    x.iter_mut().for_each(|a| *a = a.max(0.0));
    Ok((x, lambda))
}

/// Equal-width histogram of scores over `[min, max]`, normalized to sum 1.
pub fn centrality_distribution(scores: &CentralityScores, bins: usize) -> Result<AnalysisResult, GraphError> {
    if scores.scores.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    if bins == 0 {
        return Err(GraphError::InvalidParameter("bins must be at least 1"));
    }
    let values: Vec<f64> = scores.scores.values().copied().collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut result = AnalysisResult::table("centrality_distribution", "bin", &["probability"])
        .with_meta("measure", scores.measure.name())
        .with_meta(crate::result::META_LABEL_AXIS, "bin");
    let n = values.len() as f64;
    if max == min {
        result.push(alloc::format!("{min:.4}"), vec![1.0]);
        return Ok(result.with_meta("bins", 1));
    }
    let width = (max - min) / bins as f64;
    let mut counts = vec![0.0; bins];
    for v in &values {
        let i = (libm::floor((v - min) / width) as usize).min(bins - 1);
        counts[i] += 1.0;
    }
    for (i, c) in counts.iter().enumerate() {
        let lo = min + width * i as f64;
        let hi = if i + 1 == bins { max } else { lo + width };
        result.push(alloc::format!("{lo:.4}-{hi:.4}"), vec![c / n]);
    }
    Ok(result.with_meta("bins", bins))
}
