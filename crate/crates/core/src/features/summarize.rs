//! Extractive sentence ranking: LexRank centrality and LSA salience.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::text::words;

/// Cosine similarity above which two sentences are linked.
pub const LEXRANK_THRESHOLD: f64 = 0.1;
pub const LEXRANK_DAMPING: f64 = 0.85;
pub const LEXRANK_TOLERANCE: f64 = 1e-6;
pub const LEXRANK_MAX_ITER: usize = 200;
/// Number of latent topics used by the LSA scorer.
pub const LSA_TOPICS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Summarizer {
    LexRank,
    Lsa,
}

impl Summarizer {
    pub fn top<S: AsRef<str>>(&self, sentences: &[S], n: usize) -> Vec<usize> {
        match self {
            Summarizer::LexRank => lexrank_top(sentences, n),
            Summarizer::Lsa => lsa_top(sentences, n),
        }
    }
}

/// Sparse TF-IDF rows (term id → weight), smoothed idf
/// `ln((1+n)/(1+df)) + 1`.
fn tfidf<S: AsRef<str>>(sentences: &[S]) -> (Vec<BTreeMap<usize, f64>>, usize) {
    let mut vocab: BTreeMap<String, usize> = BTreeMap::new();
    let docs: Vec<Vec<String>> = sentences.iter().map(|s| words(s.as_ref())).collect();
    for d in &docs {
        for w in d {
            let next = vocab.len();
            vocab.entry(w.clone()).or_insert(next);
        }
    }
    let mut df = vec![0usize; vocab.len()];
    let mut tf: Vec<BTreeMap<usize, f64>> = Vec::with_capacity(docs.len());
    for d in &docs {
        let mut counts = BTreeMap::new();
        for w in d {
            *counts.entry(vocab[w]).or_insert(0.0) += 1.0;
        }
        for &t in counts.keys() {
            df[t] += 1;
        }
        tf.push(counts);
    }
    let n = docs.len() as f64;
    for row in tf.iter_mut() {
        for (t, v) in row.iter_mut() {
            *v *= ((1.0 + n) / (1.0 + df[*t] as f64)).ln() + 1.0;
        }
    }
    (tf, vocab.len())
}

fn cosine(a: &BTreeMap<usize, f64>, b: &BTreeMap<usize, f64>) -> f64 {
    let dot: f64 = a.iter().filter_map(|(t, x)| b.get(t).map(|y| x * y)).sum();
    let na = a.values().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.values().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Row-stochastic transition matrix of the thresholded similarity graph.
/// Sentences without edges jump uniformly.
pub fn lexrank_transition<S: AsRef<str>>(sentences: &[S]) -> Vec<Vec<f64>> {
    let n = sentences.len();
    let (rows, _) = tfidf(sentences);
    (0..n)
        .map(|i| {
            let adj: Vec<f64> = (0..n)
                .map(|j| (i != j && cosine(&rows[i], &rows[j]) > LEXRANK_THRESHOLD) as u8 as f64)
                .collect();
            let deg: f64 = adj.iter().sum();
            if deg == 0.0 {
                vec![1.0 / n as f64; n]
            } else {
                adj.into_iter().map(|a| a / deg).collect()
            }
        })
        .collect()
}

/// Stationary distribution of the damped walk, by power iteration.
pub fn lexrank_scores<S: AsRef<str>>(sentences: &[S]) -> Vec<f64> {
    let n = sentences.len();
    if n == 0 {
        return Vec::new();
    }
    let t = lexrank_transition(sentences);
    let d = LEXRANK_DAMPING;
    let teleport = (1.0 - d) / n as f64;
    let mut p = vec![1.0 / n as f64; n];
    for _ in 0..LEXRANK_MAX_ITER {
        let mut next = vec![teleport; n];
        for (i, row) in t.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                next[j] += d * p[i] * w;
            }
        }
        let diff: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        p = next;
        if diff * d / (1.0 - d) < LEXRANK_TOLERANCE {
            break;
        }
    }
    p
}

/// Indices by descending score; near-equal scores keep original order.
fn rank(scores: &[f64], n: usize) -> Vec<usize> {
    let q: Vec<i64> = scores.iter().map(|s| (s * 1e9).round() as i64).collect();
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| q[b].cmp(&q[a]).then(a.cmp(&b)));
    idx.truncate(n);
    idx
}

/// The `n` most central sentences, most central first.
pub fn lexrank_top<S: AsRef<str>>(sentences: &[S], n: usize) -> Vec<usize> {
    rank(&lexrank_scores(sentences), n)
}

/// `sqrt(Σ_{i<k} (σ_i v_{i,s})²)` over the top `k = min(3, rank)` singular
/// triplets of the term-by-sentence TF-IDF matrix.
pub fn lsa_scores<S: AsRef<str>>(sentences: &[S]) -> Vec<f64> {
    let n = sentences.len();
    let (rows, m) = tfidf(sentences);
    if n == 0 || m == 0 {
        return vec![0.0; n];
    }
    let mut a = DMatrix::zeros(m, n);
    for (s, row) in rows.iter().enumerate() {
        for (&t, &v) in row {
            a[(t, s)] = v;
        }
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let sigma = svd.singular_values;
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]));
    let smax = sigma[order[0]];
    let rank = order.iter().filter(|&&i| sigma[i] > 1e-10 * smax).count();
    let k = LSA_TOPICS.min(rank);
    (0..n)
        .map(|s| {
            order[..k]
                .iter()
                .map(|&i| (sigma[i] * vt[(i, s)]).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

pub fn lsa_top<S: AsRef<str>>(sentences: &[S], n: usize) -> Vec<usize> {
    rank(&lsa_scores(sentences), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    /// Dense oracle: null vector of (Mᵀ − I) from its SVD, normalized to sum 1.
    fn stationary_oracle(sentences: &[&str]) -> Vec<f64> {
        let n = sentences.len();
        let t = lexrank_transition(sentences);
        let d = LEXRANK_DAMPING;
        let m = DMatrix::from_fn(n, n, |i, j| d * t[j][i] + (1.0 - d) / n as f64 - (i == j) as u8 as f64);
        let svd = m.svd(false, true);
        let vt = svd.v_t.unwrap();
        let (min_i, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let v: Vec<f64> = (0..n).map(|j| vt[(min_i, j)]).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    }

    /// Oracle via the eigendecomposition of AᵀA (σ² and right vectors).
    fn lsa_oracle(sentences: &[&str]) -> Vec<f64> {
        let n = sentences.len();
        let (rows, m) = tfidf(sentences);
        let a = DMatrix::from_fn(m, n, |t, s| rows[s].get(&t).copied().unwrap_or(0.0));
        let eig = SymmetricEigen::new(a.transpose() * &a);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
        let top = eig.eigenvalues[order[0]];
        let k = order.iter().filter(|&&i| eig.eigenvalues[i] > 1e-18 * top).count().min(3);
        (0..n)
            .map(|s| {
                order[..k]
                    .iter()
                    .map(|&i| eig.eigenvalues[i] * eig.eigenvectors[(s, i)].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    const FIXTURE: [&str; 4] = [
        "The market rallied as stocks rose.",
        "Stocks rose after the market opened.",
        "Investors cheered as the market rallied and stocks rose.",
        "Penguins waddle across antarctic ice.",
    ];

    #[test]
    fn identical_sentences_tie_in_order() {
        let s = ["same words here"; 3];
        assert_eq!(lexrank_top(&s, 2), [0, 1]);
        assert_eq!(lsa_top(&s, 3), [0, 1, 2]);
    }

    #[test]
    fn fewer_sentences_than_requested() {
        assert_eq!(lexrank_top(&["only one"], 3), [0]);
        assert_eq!(lsa_top(&["only one"], 3), [0]);
        assert!(lexrank_top::<&str>(&[], 3).is_empty());
        assert!(lsa_top::<&str>(&[], 3).is_empty());
    }

    #[test]
    fn orthogonal_sentence_ranks_last() {
        let top = lexrank_top(&FIXTURE, 4);
        assert_eq!(top[3], 3);
        let oracle = stationary_oracle(&FIXTURE);
        for (a, b) in lexrank_scores(&FIXTURE).iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn lsa_prefers_majority_topic() {
        let top = lsa_top(&FIXTURE, 4);
        assert!(top[0] < 3);
        for (a, b) in lsa_scores(&FIXTURE).iter().zip(lsa_oracle(&FIXTURE)) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn lsa_matches_oracle_beyond_three_topics() {
        let s = [
            "alpha beta", "gamma delta", "epsilon zeta alpha", "eta theta", "iota kappa gamma beta",
        ];
        for (a, b) in lsa_scores(&s).iter().zip(lsa_oracle(&s)) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn wordless_sentences_are_total() {
        let s = ["...", "!!!"];
        assert_eq!(lsa_scores(&s), [0.0, 0.0]);
        let l = lexrank_scores(&s);
        assert!((l[0] - 0.5).abs() < 1e-12 && (l[1] - 0.5).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn sentence() -> impl Strategy<Value = String> {
            prop::collection::vec(prop::sample::select(vec!["sun", "moon", "star", "sky", "sea", "rain", "wind"]), 1..6)
                .prop_map(|w| w.join(" "))
        }

        proptest! {
            #[test]
            fn lexrank_matches_dense_eigenvector(s in prop::collection::vec(sentence(), 1..=5)) {
                let refs: Vec<&str> = s.iter().map(String::as_str).collect();
                let oracle = stationary_oracle(&refs);
                for (a, b) in lexrank_scores(&refs).iter().zip(&oracle) {
                    prop_assert!((a - b).abs() < 1e-6);
                }
            }

            #[test]
            fn top_n_is_a_prefix_permutation(s in prop::collection::vec(sentence(), 0..8), n in 1usize..10) {
                for top in [lexrank_top(&s, n), lsa_top(&s, n)] {
                    prop_assert_eq!(top.len(), n.min(s.len()));
                    let mut sorted = top.clone();
                    sorted.sort();
                    sorted.dedup();
                    prop_assert_eq!(sorted.len(), top.len());
                }
            }
        }
    }
}
