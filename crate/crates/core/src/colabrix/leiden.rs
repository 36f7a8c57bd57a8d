//! Leiden community detection (local moving, refinement, aggregation) for
//! weighted modularity with a resolution parameter.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::community::canonical;
use super::graph::Graph;

/// Randomness of the refinement step.
const THETA: f64 = 0.01;
const MAX_LEVELS: usize = 100;
const EPS: f64 = 1e-12;

/// Aggregated graph: off-diagonal weights plus internal (self-loop) weight.
struct Level {
    adj: Vec<BTreeMap<usize, f64>>,
    /// `k_v`, counting each internal edge twice.
    strength: Vec<f64>,
    two_m: f64,
}

impl Level {
    fn from_graph(graph: &Graph) -> Self {
        let adj: Vec<BTreeMap<usize, f64>> = (0..graph.node_count())
            .map(|v| graph.neighbors(v).iter().map(|&(u, w)| (u, w as f64)).collect())
            .collect();
        let strength: Vec<f64> = adj.iter().map(|a| a.values().sum()).collect();
        let two_m = strength.iter().sum();
        Self { adj, strength, two_m }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn aggregate(&self, labels: &[usize]) -> Self {
        let count = labels.iter().max().map_or(0, |m| m + 1);
        let mut adj = vec![BTreeMap::new(); count];
        let mut strength = vec![0.0; count];
        for v in 0..self.len() {
            strength[labels[v]] += self.strength[v];
            for (&u, &w) in &self.adj[v] {
                if labels[u] != labels[v] {
                    *adj[labels[v]].entry(labels[u]).or_insert(0.0) += w;
                }
            }
        }
        Self { adj, strength, two_m: self.two_m }
    }
}

pub(crate) fn leiden(graph: &Graph, seed: u64, resolution: f64) -> Vec<usize> {
    let n = graph.node_count();
    let mut level = Level::from_graph(graph);
    if level.two_m == 0.0 {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut node_map: Vec<usize> = (0..n).collect();
    let mut part: Vec<usize> = (0..n).collect();
    for _ in 0..MAX_LEVELS {
        move_nodes_fast(&level, &mut part, &mut rng, resolution);
        part = canonical(&part);
        let communities = part.iter().max().map_or(0, |m| m + 1);
        if communities == level.len() {
            break;
        }
        let refined = canonical(&refine(&level, &part, &mut rng, resolution));
        let refined_count = refined.iter().max().map_or(0, |m| m + 1);
        let (labels, next_part) = if refined_count == level.len() {
            // Refinement made no progress; collapse the moved partition instead.
            (part.clone(), (0..communities).collect())
        } else {
            let mut next = vec![0; refined_count];
            for v in 0..level.len() {
                next[refined[v]] = part[v];
            }
            (refined, next)
        };
        level = level.aggregate(&labels);
        for slot in node_map.iter_mut() {
            *slot = labels[*slot];
        }
        part = next_part;
    }
    node_map.iter().map(|&v| part[v]).collect()
}

fn neighbor_weights(level: &Level, v: usize, part: &[usize]) -> BTreeMap<usize, f64> {
    let mut out = BTreeMap::new();
    for (&u, &w) in &level.adj[v] {
        *out.entry(part[u]).or_insert(0.0) += w;
    }
    out
}

fn move_nodes_fast(level: &Level, part: &mut [usize], rng: &mut ChaCha8Rng, gamma: f64) {
    let n = level.len();
    let mut total = vec![0.0; n];
    let mut size = vec![0usize; n];
    for v in 0..n {
        total[part[v]] += level.strength[v];
        size[part[v]] += 1;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut queue: VecDeque<usize> = order.into();
    let mut queued = vec![true; n];
    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        let k = level.strength[v];
        let own = part[v];
        total[own] -= k;
        size[own] -= 1;
        let weights = neighbor_weights(level, v, part);
        let gain = |c: usize, total: &[f64]| {
            weights.get(&c).copied().unwrap_or(0.0) - gamma * k * total[c] / level.two_m
        };
        let mut best = own;
        let mut best_gain = gain(own, &total);
        for &c in weights.keys() {
            let g = gain(c, &total);
            if g > best_gain + EPS {
                best = c;
                best_gain = g;
            }
        }
        if best_gain < -EPS && size[own] > 0 {
            if let Some(empty) = (0..n).find(|&c| size[c] == 0) {
                best = empty;
            }
        }
        total[best] += k;
        size[best] += 1;
        if best != own {
            part[v] = best;
            for &u in level.adj[v].keys() {
                if part[u] != best && !queued[u] {
                    queued[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
}

/// Splits each community of `part` into well-connected sub-communities by
/// randomized greedy merging of singletons.
fn refine(level: &Level, part: &[usize], rng: &mut ChaCha8Rng, gamma: f64) -> Vec<usize> {
    let n = level.len();
    let mut refined: Vec<usize> = (0..n).collect();
    let mut ref_total = level.strength.clone();
    let mut ref_size = vec![1usize; n];
    // Weight from each refined community to the rest of its parent community.
    let mut external = vec![0.0; n];
    let mut parent_total: BTreeMap<usize, f64> = BTreeMap::new();
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        *parent_total.entry(part[v]).or_insert(0.0) += level.strength[v];
        members.entry(part[v]).or_default().push(v);
        external[v] = level.adj[v]
            .iter()
            .filter(|(u, _)| part[**u] == part[v])
            .map(|(_, w)| *w)
            .sum();
    }
    for (c, mut nodes) in members {
        let big = parent_total[&c];
        nodes.shuffle(rng);
        for v in nodes {
            if ref_size[refined[v]] > 1 {
                continue;
            }
            let k = level.strength[v];
            if external[v] < gamma * k * (big - k) / level.two_m {
                continue;
            }
            let mut weights: BTreeMap<usize, f64> = BTreeMap::new();
            for (&u, &w) in &level.adj[v] {
                if part[u] == c && refined[u] != refined[v] {
                    *weights.entry(refined[u]).or_insert(0.0) += w;
                }
            }
            let mut candidates: Vec<(usize, f64)> = vec![(refined[v], 0.0)];
            for (&t, &w) in &weights {
                let well_connected =
                    external[t] >= gamma * ref_total[t] * (big - ref_total[t]) / level.two_m;
                let gain = w - gamma * k * ref_total[t] / level.two_m;
                if well_connected && gain >= 0.0 {
                    candidates.push((t, 2.0 * gain / level.two_m));
                }
            }
            let top = candidates.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
            let weights_exp: Vec<f64> = candidates
                .iter()
                .map(|c| libm::exp((c.1 - top) / THETA))
                .collect();
            let mut pick = rng.random::<f64>() * weights_exp.iter().sum::<f64>();
            let mut chosen = candidates[candidates.len() - 1].0;
            for (cand, w) in candidates.iter().zip(&weights_exp) {
                if pick < *w {
                    chosen = cand.0;
                    break;
                }
                pick -= w;
            }
            let own = refined[v];
            if chosen != own {
                let w_vt = weights[&chosen];
                external[chosen] = external[chosen] + external[own] - 2.0 * w_vt;
                ref_total[chosen] += k;
                ref_size[chosen] += 1;
                ref_total[own] = 0.0;
                ref_size[own] = 0;
                refined[v] = chosen;
            }
        }
    }
    refined
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colabrix::community::modularity_of;

    fn ring_of_cliques(cliques: usize, size: usize) -> Graph {
        let labels: Vec<alloc::string::String> =
            (0..cliques * size).map(|i| alloc::format!("n{i:03}")).collect();
        let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
        let mut edges = Vec::new();
        for c in 0..cliques {
            for i in 0..size {
                for j in i + 1..size {
                    edges.push((c * size + i, c * size + j, 1));
                }
            }
            edges.push((c * size, ((c + 1) % cliques) * size + 1, 1));
        }
        Graph::from_edges(&refs, &edges)
    }

    #[test]
    fn recovers_ring_of_cliques() {
        let g = ring_of_cliques(6, 5);
        let membership = canonical(&leiden(&g, 3, 1.0));
        for c in 0..6 {
            let block = &membership[c * 5..c * 5 + 5];
            assert!(block.iter().all(|m| *m == block[0]));
        }
        assert_eq!(membership.iter().max(), Some(&5));
        assert!(modularity_of(&g, &membership, 1.0) > 0.7);
    }

    #[test]
    fn deterministic_for_seed() {
        let g = ring_of_cliques(8, 4);
        assert_eq!(leiden(&g, 11, 1.0), leiden(&g, 11, 1.0));
    }

    #[test]
    fn communities_are_connected() {
        let g = ring_of_cliques(5, 4);
        for seed in 0..10 {
            let membership = canonical(&leiden(&g, seed, 1.0));
            let count = membership.iter().max().unwrap() + 1;
            for c in 0..count {
                let nodes: Vec<usize> = (0..g.node_count()).filter(|v| membership[*v] == c).collect();
                assert!(g.induced(&nodes).is_connected(), "seed {seed}");
            }
        }
    }
}
