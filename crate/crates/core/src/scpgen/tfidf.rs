//! TF-IDF cosine ranking used to mine prediction distractors.

use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ranked {
    pub index: usize,
    pub similarity: f64,
}

/// Lowercased runs of alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Ranks `pool` by cosine similarity to `query`, highest first.
///
/// Term frequency is the raw count, `idf(t) = ln((1 + |pool|) / (1 + df(t))) + 1`
/// over the pool, vectors are L2-normalized, and query terms missing from the
/// pool vocabulary are ignored. The sort is stable, so ties keep pool order.
pub fn tfidf_rank<S: AsRef<str>>(query: &str, pool: &[S]) -> Vec<Ranked> {
    let mut vocab: HashMap<String, usize> = HashMap::new();
    let docs: Vec<Vec<usize>> = pool
        .iter()
        .map(|s| {
            tokenize(s.as_ref())
                .into_iter()
                .map(|t| {
                    let next = vocab.len();
                    *vocab.entry(t).or_insert(next)
                })
                .collect()
        })
        .collect();

    let mut df = vec![0usize; vocab.len()];
    for doc in &docs {
        let mut terms = doc.clone();
        terms.sort_unstable();
        terms.dedup();
        for t in terms {
            df[t] += 1;
        }
    }
    let n = pool.len() as f64;
    let idf: Vec<f64> = df
        .iter()
        .map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0)
        .collect();

    let query_terms: Vec<usize> = tokenize(query)
        .iter()
        .filter_map(|t| vocab.get(t).copied())
        .collect();
    let query_vec = weighted(&query_terms, &idf);

    let mut ranked: Vec<Ranked> = docs
        .iter()
        .enumerate()
        .map(|(index, doc)| Ranked {
            index,
            similarity: dot(&query_vec, &weighted(doc, &idf)),
        })
        .collect();
    ranked.sort_by(|a, b| b.similarity.total_cmp(&a.similarity));
    ranked
}

/// Sparse L2-normalized tf-idf vector, sorted by term id.
fn weighted(terms: &[usize], idf: &[f64]) -> Vec<(usize, f64)> {
    let mut sorted = terms.to_vec();
    sorted.sort_unstable();
    let mut vec: Vec<(usize, f64)> = Vec::new();
    for t in sorted {
        match vec.last_mut() {
            Some((last, count)) if *last == t => *count += 1.0,
            _ => vec.push((t, 1.0)),
        }
    }
    for (t, w) in vec.iter_mut() {
        *w *= idf[*t];
    }
    let norm = vec.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, w) in vec.iter_mut() {
            *w /= norm;
        }
    }
    vec
}

fn dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}
