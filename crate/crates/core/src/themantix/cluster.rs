//! TF-IDF document vectors, spherical k-means and a two-component PCA
//! projection for scatter plots.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ThemeError;

pub const MAX_KMEANS_ITERATIONS: usize = 100;
const PCA_ITERATIONS: usize = 1000;

type Sparse = BTreeMap<usize, f64>;

fn dot(a: &Sparse, b: &Sparse) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small.iter().filter_map(|(i, x)| large.get(i).map(|y| x * y)).sum()
}

fn normalize(v: &mut Sparse) {
    let norm = libm::sqrt(v.values().map(|x| x * x).sum::<f64>());
    if norm > 0.0 {
        v.values_mut().for_each(|x| *x /= norm);
    }
}

/// L2-normalized TF-IDF rows with smooth idf `ln((1 + D) / (1 + df)) + 1`.
pub(crate) fn tfidf(docs: &[Vec<String>]) -> Vec<Sparse> {
    // Term ids follow sorted order, so vectors do not depend on document order.
    let mut index: BTreeMap<&str, usize> = docs.iter().flatten().map(|t| (t.as_str(), 0)).collect();
    for (i, id) in index.values_mut().enumerate() {
        *id = i;
    }
    let mut df = vec![0usize; index.len()];
    let counts: Vec<Sparse> = docs
        .iter()
        .map(|doc| {
            let mut tf = Sparse::new();
            for t in doc {
                *tf.entry(index[t.as_str()]).or_insert(0.0) += 1.0;
            }
            for i in tf.keys() {
                df[*i] += 1;
            }
            tf
        })
        .collect();
    let d = docs.len() as f64;
    counts
        .into_iter()
        .map(|mut tf| {
            for (i, x) in tf.iter_mut() {
                *x *= libm::log((1.0 + d) / (1.0 + df[*i] as f64)) + 1.0;
            }
            normalize(&mut tf);
            tf
        })
        .collect()
}

/// Cosine k-means. The first center is drawn from the seed; each further
/// center is the document least similar to every chosen center (lowest
/// index on ties). Returns cluster ids renumbered by first appearance.
pub(crate) fn spherical_kmeans(vectors: &[Sparse], k: usize, seed: u64) -> Result<Vec<usize>, ThemeError> {
    let n = vectors.len();
    if k == 0 {
        return Err(ThemeError::InvalidParameter("k must be at least 1"));
    }
    if k > n {
        return Err(ThemeError::KExceedsDocuments { k, documents: n });
    }
    if k == n {
        return Ok((0..n).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![rng.random_range(0..n)];
    let mut closest: Vec<f64> = vectors.iter().map(|v| dot(v, &vectors[chosen[0]])).collect();
    while chosen.len() < k {
        let next = (0..n)
            .filter(|i| !chosen.contains(i))
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if closest[b] <= closest[i] => Some(b),
                _ => Some(i),
            })
            .expect("k < n leaves a candidate");
        for (i, v) in vectors.iter().enumerate() {
            closest[i] = closest[i].max(dot(v, &vectors[next]));
        }
        chosen.push(next);
    }
    let mut centers: Vec<Sparse> = chosen.iter().map(|&i| vectors[i].clone()).collect();
    let mut assignment = vec![usize::MAX; n];
    for _ in 0..MAX_KMEANS_ITERATIONS {
        let next: Vec<usize> = vectors
            .iter()
            .map(|v| {
                let sims: Vec<f64> = centers.iter().map(|c| dot(v, c)).collect();
                (0..k).fold(0, |best, c| if sims[c] > sims[best] { c } else { best })
            })
            .collect();
        if next == assignment {
            break;
        }
        assignment = next;
        for (c, center) in centers.iter_mut().enumerate() {
            let mut sum = Sparse::new();
            for (v, _) in vectors.iter().zip(&assignment).filter(|(_, a)| **a == c) {
                for (i, x) in v {
                    *sum.entry(*i).or_insert(0.0) += x;
                }
            }
            normalize(&mut sum);
            if sum.values().any(|x| *x != 0.0) {
                *center = sum;
            }
        }
    }
    Ok(crate::util::first_appearance_ids(&assignment))
}

/// Leading two principal-component coordinates of the rows.
pub(crate) fn pca_2d(vectors: &[Sparse]) -> Vec<[f64; 2]> {
    let n = vectors.len();
    if n == 0 {
        return Vec::new();
    }
    let mut mean = Sparse::new();
    for v in vectors {
        for (i, x) in v {
            *mean.entry(*i).or_insert(0.0) += x / n as f64;
        }
    }
    let mean_sq = dot(&mean, &mean);
    let to_mean: Vec<f64> = vectors.iter().map(|v| dot(v, &mean)).collect();
    let mut gram = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let g = dot(&vectors[i], &vectors[j]) - to_mean[i] - to_mean[j] + mean_sq;
            gram[i][j] = g;
            gram[j][i] = g;
        }
    }
    let mut coords = vec![[0.0; 2]; n];
    for component in 0..2 {
        let (lambda, u) = leading_eigenpair(&gram);
        if lambda <= 1e-12 {
            break;
        }
        let scale = libm::sqrt(lambda);
        for i in 0..n {
            coords[i][component] = u[i] * scale;
        }
        for i in 0..n {
            for j in 0..n {
                gram[i][j] -= lambda * u[i] * u[j];
            }
        }
    }
    coords
}

/// Power iteration on a symmetric positive semi-definite matrix. The sign is
/// fixed so the entry of largest magnitude is positive.
fn leading_eigenpair(m: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let n = m.len();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / n as f64).collect();
    let norm = libm::sqrt(x.iter().map(|a| a * a).sum::<f64>());
    x.iter_mut().for_each(|a| *a /= norm);
    let mut lambda = 0.0;
    for _ in 0..PCA_ITERATIONS {
        let mut y: Vec<f64> = m.iter().map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
        let norm = libm::sqrt(y.iter().map(|a| a * a).sum::<f64>());
        if norm <= 1e-300 {
            return (0.0, x);
        }
        y.iter_mut().for_each(|a| *a /= norm);
        let change: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        lambda = norm;
        x = y;
        if change < 1e-12 {
            break;
        }
    }
    let pivot = (0..n).fold(0, |best, i| if x[i].abs() > x[best].abs() + 1e-12 { i } else { best });
    if x[pivot] < 0.0 {
        x.iter_mut().for_each(|a| *a = -*a);
    }
    (lambda, x)
}
