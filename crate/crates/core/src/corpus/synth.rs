//! Deterministic synthetic articles for fixtures and tests.
//!
//! Each article has a short heading paragraph, `eligible` prose paragraphs of
//! six to nine sentences and at least 85 words, and one math-heavy paragraph,
//! so with default fragment settings exactly `eligible` windows pass the
//! filters for every task kind.

use std::path::Path;

use chrono::{Duration, NaiveDate};

use super::{Article, ArticleMeta, CorpusError, CorpusManifest, CorpusStore, DateWindow, Domain};
use crate::scpgen::ScpRng;

const ADJECTIVES: &[&str] = &[
    "sparse",
    "robust",
    "adaptive",
    "latent",
    "stochastic",
    "hierarchical",
    "convex",
    "noisy",
    "scalable",
    "efficient",
    "bayesian",
    "empirical",
    "spectral",
    "recurrent",
    "discrete",
    "continuous",
    "nonlinear",
    "modular",
    "implicit",
    "distributed",
    "compact",
    "temporal",
    "causal",
    "variational",
    "symmetric",
    "local",
    "global",
    "weighted",
    "random",
    "optimal",
];
const NOUNS: &[&str] = &[
    "estimator",
    "network",
    "model",
    "kernel",
    "gradient",
    "policy",
    "dataset",
    "graph",
    "encoder",
    "decoder",
    "sampler",
    "bound",
    "operator",
    "representation",
    "objective",
    "algorithm",
    "classifier",
    "embedding",
    "signal",
    "distribution",
    "protocol",
    "scheduler",
    "manifold",
    "solver",
    "attention",
    "benchmark",
    "regularizer",
    "trajectory",
    "filter",
    "partition",
    "corpus",
    "tokenizer",
    "memory",
    "controller",
    "simulator",
    "prior",
];
const VERBS: &[&str] = &[
    "improves",
    "reduces",
    "captures",
    "approximates",
    "stabilizes",
    "constrains",
    "predicts",
    "aggregates",
    "transforms",
    "outperforms",
    "regularizes",
    "decomposes",
    "refines",
    "generalizes",
    "accelerates",
    "encodes",
    "calibrates",
    "dominates",
    "preserves",
    "tracks",
];
const PREPOSITIONS: &[&str] = &[
    "under", "across", "within", "for", "beyond", "despite", "along",
];
const ADVERBS: &[&str] = &[
    "consistently",
    "substantially",
    "marginally",
    "reliably",
    "rapidly",
    "provably",
    "empirically",
    "gradually",
    "sharply",
    "jointly",
];
const OPENERS: &[&str] = &[
    "In contrast",
    "Moreover",
    "As a result",
    "In practice",
    "Notably",
    "Consequently",
    "Furthermore",
    "In our experiments",
    "Surprisingly",
    "Overall",
];
const HEADINGS: &[&str] = &[
    "Introduction",
    "Related Work",
    "Method",
    "Experiments",
    "Discussion",
];

fn pick<'a>(rng: &mut ScpRng, words: &[&'a str]) -> &'a str {
    words[rng.below(words.len())]
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

fn sentence(rng: &mut ScpRng, math_heavy: bool) -> String {
    let mut words = Vec::new();
    if rng.below(4) == 0 {
        words.push(format!("{},", pick(rng, OPENERS)));
        words.push("the".into());
    } else {
        words.push("The".into());
    }
    words.push(pick(rng, ADJECTIVES).into());
    words.push(pick(rng, NOUNS).into());
    words.push(pick(rng, VERBS).into());
    words.push("the".into());
    words.push(pick(rng, ADJECTIVES).into());
    words.push(pick(rng, NOUNS).into());
    words.push(pick(rng, PREPOSITIONS).into());
    words.push(pick(rng, ADJECTIVES).into());
    words.push(pick(rng, NOUNS).into());
    match rng.below(5) {
        0 => {
            words.push(format!("in {}", 2 + rng.below(98)));
            words.push("settings".into());
        }
        1 => words.push(format!("(see Fig. {})", 1 + rng.below(9))),
        2 => {
            words.push(format!(
                "where {} bounds the",
                crate::corpus::MATH_PLACEHOLDER
            ));
            words.push(pick(rng, NOUNS).into());
        }
        _ => {}
    }
    if math_heavy {
        for _ in 0..5 {
            words.push(crate::corpus::MATH_PLACEHOLDER.into());
        }
    }
    words.push(format!("{}.", pick(rng, ADVERBS)));
    words.join(" ")
}

fn prose_paragraph(rng: &mut ScpRng, math_heavy: bool) -> String {
    let target_sentences = 6 + rng.below(4);
    let mut sentences: Vec<String> = Vec::new();
    let mut words = 0;
    while sentences.len() < target_sentences || words < 85 {
        let s = sentence(rng, math_heavy);
        words += s.split_whitespace().count();
        sentences.push(s);
    }
    sentences.join(" ")
}

/// One synthetic article; the same arguments always give the same article.
pub fn article(domain: Domain, index: usize, eligible: usize, seed: u64) -> Article {
    let mut rng = ScpRng::from_parts(&[
        b"synth",
        &seed.to_le_bytes(),
        domain.as_str().as_bytes(),
        &(index as u64).to_le_bytes(),
    ]);
    let mut paragraphs = vec![capitalize(pick(&mut rng, HEADINGS))];
    for i in 0..eligible {
        if i == eligible / 2 {
            paragraphs.push(prose_paragraph(&mut rng, true));
        }
        paragraphs.push(prose_paragraph(&mut rng, false));
    }
    if eligible == 0 {
        paragraphs.push(prose_paragraph(&mut rng, true));
    }
    let title = format!(
        "{} {} for {} {}",
        capitalize(pick(&mut rng, ADJECTIVES)),
        capitalize(pick(&mut rng, NOUNS)),
        capitalize(pick(&mut rng, ADJECTIVES)),
        capitalize(pick(&mut rng, NOUNS))
    );
    let raw_char_count = paragraphs.iter().map(|p| p.chars().count() + 2).sum();
    let window_start = NaiveDate::from_ymd_opt(2024, 4, 1).expect("valid date");
    Article {
        meta: ArticleMeta {
            arxiv_id: format!("{}.{:05}", 2404 + (index % 6), 10 + index),
            domain,
            submitted: window_start + Duration::days((index * 7 % 180) as i64),
            title,
        },
        paragraphs,
        raw_char_count,
    }
}

pub fn articles(domain: Domain, count: usize, eligible: usize, seed: u64) -> Vec<Article> {
    (0..count)
        .map(|i| article(domain, i, eligible, seed))
        .collect()
}

/// Writes a synthetic corpus under `root` (April to September 2024, label `2024b`).
pub fn write_corpus(
    root: &Path,
    domain: Domain,
    count: usize,
    eligible: usize,
    seed: u64,
) -> Result<CorpusManifest, CorpusError> {
    let window = DateWindow::new(
        NaiveDate::from_ymd_opt(2024, 4, 1).expect("valid date"),
        NaiveDate::from_ymd_opt(2024, 9, 30).expect("valid date"),
    )?;
    let store = CorpusStore::create(root, CorpusManifest::new("2024b", window))?;
    for a in articles(domain, count, eligible, seed) {
        store.store_article(&a)?;
    }
    store.manifest()
}
