//! Benchmark assembly and the JSONL benchmark file format.

use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use rayon::prelude::*;

use super::fragment::{fragment_at, FragmentOutcome};
use super::rng::ScpRng;
use super::tasks::{generate, GenContext};
use super::{
    Benchmark, BenchmarkHeader, BenchmarkStatus, FragmentConfig, ScpError, TaskKind, TestCase,
    GENERATOR_VERSION,
};
use crate::corpus::{Article, CorpusStore, Domain};
use crate::digest::hash_parts_hex;

#[derive(Debug, Clone)]
pub struct BuildRequest {
    pub domain: Domain,
    pub task_kind: TaskKind,
    pub config: FragmentConfig,
    pub seed: u64,
    pub target_size: usize,
    /// Defaults to the corpus manifest's label.
    pub period_label: Option<String>,
    pub created: DateTime<Utc>,
}

/// `<period>-<domain>-<task code>-<16 hex digits>`, stable for a given
/// (period, domain, task, seed, generator version).
pub fn benchmark_id(period_label: &str, domain: Domain, task_kind: TaskKind, seed: u64) -> String {
    let digest = hash_parts_hex(&[
        period_label.as_bytes(),
        domain.as_str().as_bytes(),
        task_kind.as_str().as_bytes(),
        &seed.to_le_bytes(),
        GENERATOR_VERSION.as_bytes(),
    ]);
    format!(
        "{period_label}-{domain}-{}-{}",
        task_kind.code(),
        &digest[..16]
    )
}

/// Loads the domain's articles from the corpus and builds a benchmark.
pub fn build_benchmark(store: &CorpusStore, request: &BuildRequest) -> Result<Benchmark, ScpError> {
    let manifest = store.manifest()?;
    let articles = store.load_domain(request.domain)?;
    if articles.is_empty() {
        return Err(ScpError::Precondition(format!(
            "corpus has no articles in domain {}",
            request.domain
        )));
    }
    let period = request
        .period_label
        .clone()
        .unwrap_or(manifest.period_label);
    build_from_articles(&articles, &period, request)
}

/// Every case an article can contribute, in its sub-seeded window order.
///
/// Windows are visited in a shuffled order drawn from the article's own
/// generator (seeded by `(seed, article_id)`), so the result does not depend
/// on which other articles are processed or in what order.
pub fn article_cases(article: &Article, kind: TaskKind, ctx: &GenContext) -> Vec<TestCase> {
    let n = ctx.config.n_paragraphs;
    if article.paragraphs.len() < n || article.paragraphs.is_empty() {
        return Vec::new();
    }
    let mut rng = ScpRng::for_article(ctx.seed, "article", &article.meta.arxiv_id);
    let mut starts: Vec<usize> = (0..=article.paragraphs.len() - n).collect();
    rng.shuffle(&mut starts);
    starts
        .into_iter()
        .filter_map(|start| match fragment_at(article, start, &ctx.config) {
            Ok(FragmentOutcome::Accepted(fragment)) => {
                generate(kind, &fragment, article, &mut rng, ctx).ok()
            }
            _ => None,
        })
        .collect()
}

/// Builds a benchmark from an explicit article list.
///
/// Articles are visited in a seed-shuffled order, round-robin: each pass takes
/// the next case from every article that still has one, until `target_size`
/// items are collected or all articles are exhausted.
pub fn build_from_articles(
    articles: &[Article],
    period_label: &str,
    request: &BuildRequest,
) -> Result<Benchmark, ScpError> {
    request.config.validate()?;
    let ctx = GenContext {
        domain: request.domain,
        seed: request.seed,
        config: request.config.clone(),
    };
    let mut ordered: Vec<&Article> = articles
        .iter()
        .filter(|a| a.meta.domain == request.domain)
        .collect();
    ordered.sort_by(|a, b| a.meta.arxiv_id.cmp(&b.meta.arxiv_id));
    ScpRng::for_seed(request.seed, "article-order").shuffle(&mut ordered);

    let per_article: Vec<Vec<TestCase>> = ordered
        .par_iter()
        .map(|a| article_cases(a, request.task_kind, &ctx))
        .collect();

    let mut items = Vec::with_capacity(request.target_size);
    let mut round = 0;
    'outer: loop {
        let mut progressed = false;
        for cases in &per_article {
            if let Some(case) = cases.get(round) {
                progressed = true;
                items.push(case.clone());
                if items.len() == request.target_size {
                    break 'outer;
                }
            }
        }
        if !progressed {
            break;
        }
        round += 1;
    }

    if items.is_empty() {
        return Err(ScpError::EmptyBenchmark {
            domain: request.domain,
            task_kind: request.task_kind,
        });
    }
    let header = BenchmarkHeader {
        benchmark_id: benchmark_id(
            period_label,
            request.domain,
            request.task_kind,
            request.seed,
        ),
        period_label: period_label.to_string(),
        domain: request.domain,
        task_kind: request.task_kind,
        seed: request.seed,
        status: BenchmarkStatus::Private,
        created: request.created,
        generator_version: GENERATOR_VERSION.to_string(),
        tool_version: crate::TOOL_VERSION.to_string(),
        config_digest: request.config.digest(),
        item_count: items.len(),
    };
    let bench = Benchmark { header, items };
    bench
        .validate()
        .map_err(|message| ScpError::InvalidBenchmark { line: 0, message })?;
    Ok(bench)
}

/// JSONL: the header on the first line, then one test case per line.
pub fn write_benchmark(bench: &Benchmark, path: &Path) -> Result<(), ScpError> {
    let io_err = |source| ScpError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = Vec::new();
    serde_json::to_writer(&mut out, &bench.header).expect("header serializes");
    out.push(b'\n');
    for item in &bench.items {
        serde_json::to_writer(&mut out, item).expect("case serializes");
        out.push(b'\n');
    }
    crate::fsio::write_atomic(path, &out).map_err(io_err)
}

pub fn read_benchmark(path: &Path) -> Result<Benchmark, ScpError> {
    let text = fs::read_to_string(path).map_err(|source| ScpError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or(ScpError::InvalidBenchmark {
        line: 1,
        message: "empty file".into(),
    })?;
    let header: BenchmarkHeader =
        serde_json::from_str(first).map_err(|e| ScpError::InvalidBenchmark {
            line: 1,
            message: e.to_string(),
        })?;
    let items = lines
        .map(|(i, l)| {
            serde_json::from_str::<TestCase>(l).map_err(|e| ScpError::InvalidBenchmark {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let bench = Benchmark { header, items };
    bench
        .validate()
        .map_err(|message| ScpError::InvalidBenchmark { line: 0, message })?;
    Ok(bench)
}
