//! Latent Dirichlet allocation by collapsed Gibbs sampling.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ThemeError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub k: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Document-topic prior; `50 / k` when absent.
    pub alpha: Option<f64>,
    /// Topic-word prior; `0.01` when absent.
    pub beta: Option<f64>,
}

impl LdaParams {
    pub fn new(k: usize, iterations: usize, seed: u64) -> Self {
        Self { k, iterations, seed, alpha: None, beta: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub k: usize,
    pub vocabulary: Vec<String>,
    /// `k × V`, rows sum to 1.
    pub topic_word: Vec<Vec<f64>>,
    /// `D × k`, rows sum to 1.
    pub doc_topic: Vec<Vec<f64>>,
    /// Record id of each `doc_topic` row.
    pub doc_ids: Vec<String>,
    pub seed: u64,
    pub iterations: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl TopicModel {
    /// Top `n` terms of a topic by probability (ties by term).
    pub fn top_terms(&self, topic: usize, n: usize) -> Vec<(&str, f64)> {
        let mut terms: Vec<(&str, f64)> = self
            .vocabulary
            .iter()
            .zip(&self.topic_word[topic])
            .map(|(t, p)| (t.as_str(), *p))
            .collect();
        terms.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(core::cmp::Ordering::Equal).then(a.0.cmp(b.0)));
        terms.truncate(n);
        terms
    }

    /// Topic with the largest share in document `d` (lowest index on ties).
    pub fn dominant_topic(&self, d: usize) -> usize {
        let row = &self.doc_topic[d];
        (0..self.k).fold(0, |best, t| if row[t] > row[best] { t } else { best })
    }
}

/// Fits a model to pre-tokenized documents. Empty documents are skipped.
pub fn fit_lda(doc_ids: &[String], docs: &[Vec<String>], params: &LdaParams) -> Result<TopicModel, ThemeError> {
    let k = params.k;
    if k == 0 {
        return Err(ThemeError::InvalidParameter("k must be at least 1"));
    }
    let alpha = params.alpha.unwrap_or(50.0 / k as f64);
    let beta = params.beta.unwrap_or(0.01);
    if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
        return Err(ThemeError::InvalidParameter("priors must be positive"));
    }
    let vocab: BTreeMap<&str, usize> = {
        let mut terms: Vec<&str> = docs.iter().flatten().map(String::as_str).collect();
        terms.sort_unstable();
        terms.dedup();
        terms.into_iter().enumerate().map(|(i, t)| (t, i)).collect()
    };
    if vocab.is_empty() {
        return Err(ThemeError::EmptyVocabulary);
    }
    let kept: Vec<usize> = (0..docs.len()).filter(|&d| !docs[d].is_empty()).collect();
    if kept.len() < k {
        return Err(ThemeError::TooFewDocuments { needed: k, found: kept.len() });
    }
    let words: Vec<Vec<usize>> = kept
        .iter()
        .map(|&d| docs[d].iter().map(|t| vocab[t.as_str()]).collect())
        .collect();
    let v = vocab.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut n_dk = vec![vec![0u32; k]; words.len()];
    let mut n_kw = vec![vec![0u32; v]; k];
    let mut n_k = vec![0u32; k];
    let mut z: Vec<Vec<usize>> = words
        .iter()
        .enumerate()
        .map(|(d, doc)| {
            doc.iter()
                .map(|&w| {
                    let t = rng.random_range(0..k);
                    n_dk[d][t] += 1;
                    n_kw[t][w] += 1;
                    n_k[t] += 1;
                    t
                })
                .collect()
        })
        .collect();
    let v_beta = v as f64 * beta;
    let mut p = vec![0.0f64; k];
    for _ in 0..params.iterations {
        for (d, doc) in words.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let old = z[d][i];
                n_dk[d][old] -= 1;
                n_kw[old][w] -= 1;
                n_k[old] -= 1;
                let mut total = 0.0;
                for t in 0..k {
                    total += (n_dk[d][t] as f64 + alpha) * (n_kw[t][w] as f64 + beta) / (n_k[t] as f64 + v_beta);
                    p[t] = total;
                }
                let u = rng.random::<f64>() * total;
                let new = p.iter().position(|c| u < *c).unwrap_or(k - 1);
                z[d][i] = new;
                n_dk[d][new] += 1;
                n_kw[new][w] += 1;
                n_k[new] += 1;
            }
        }
    }
    let doc_topic = words
        .iter()
        .enumerate()
        .map(|(d, doc)| {
            let denom = doc.len() as f64 + k as f64 * alpha;
            (0..k).map(|t| (n_dk[d][t] as f64 + alpha) / denom).collect()
        })
        .collect();
    let topic_word = (0..k)
        .map(|t| {
            let denom = n_k[t] as f64 + v_beta;
            (0..v).map(|w| (n_kw[t][w] as f64 + beta) / denom).collect()
        })
        .collect();
    Ok(TopicModel {
        k,
        vocabulary: vocab.keys().map(|t| String::from(*t)).collect(),
        topic_word,
        doc_topic,
        doc_ids: kept.iter().map(|&d| doc_ids[d].clone()).collect(),
        seed: params.seed,
        iterations: params.iterations,
        alpha,
        beta,
    })
}
