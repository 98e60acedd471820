//! `ingest` and `synth-corpus`.

use std::path::PathBuf;
use std::sync::atomic::Ordering;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context as _, Result};
use arxivroll::corpus::{
    extract_source, synth, Article, CorpusError, CorpusManifest, CorpusStore, DateWindow, Domain,
    ListingClient, ListingConfig, ListingEntry, SystemClock, UreqTransport, ARXIV_API_URL,
};
use chrono::NaiveDate;
use clap::Args;
use tracing::{info, warn};

use crate::{corpus_root, Context, Interrupted};

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Corpus directory; defaults to the config's corpus_root.
    #[arg(long, value_name = "DIR")]
    pub corpus: Option<PathBuf>,
    /// Subject group code (cs, econ, eess, math, physics, q-bio, q-fin, stat); repeatable.
    #[arg(long = "domain", required = true, value_name = "CODE")]
    pub domains: Vec<Domain>,
    /// First submission day, inclusive (YYYY-MM-DD).
    #[arg(long)]
    pub start: NaiveDate,
    /// Last submission day, inclusive (YYYY-MM-DD).
    #[arg(long)]
    pub end: NaiveDate,
    /// Period label recorded in the manifest, e.g. 2024b.
    #[arg(long)]
    pub period_label: String,
    /// Stop after this many stored articles per domain.
    #[arg(long)]
    pub max_articles: Option<usize>,
    #[arg(long, default_value = ARXIV_API_URL)]
    pub api_url: String,
    #[arg(long, default_value = "https://arxiv.org/e-print")]
    pub source_url: String,
    /// Seconds between requests (arXiv asks for at least 3).
    #[arg(long, default_value_t = 3.0)]
    pub min_delay: f64,
    /// Seconds per request.
    #[arg(long, default_value_t = 60.0)]
    pub timeout: f64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_name = "DIR")]
    pub corpus: Option<PathBuf>,
    #[arg(long, default_value = "cs")]
    pub domain: Domain,
    /// Number of articles.
    #[arg(long, default_value_t = 20)]
    pub articles: usize,
    /// Eligible paragraphs per article.
    #[arg(long, default_value_t = 26)]
    pub eligible: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

pub fn synth(args: SynthArgs, ctx: &Context) -> Result<()> {
    let root = corpus_root(args.corpus, ctx, "synth-corpus")?;
    let manifest = synth::write_corpus(&root, args.domain, args.articles, args.eligible, args.seed)
        .with_context(|| format!("writing synthetic corpus to {}", root.display()))?;
    println!(
        "wrote {} {} articles to {}",
        manifest.counts.get(&args.domain).copied().unwrap_or(0),
        args.domain,
        root.display()
    );
    Ok(())
}

pub fn ingest(args: IngestArgs, ctx: &Context) -> Result<()> {
    let root = corpus_root(args.corpus, ctx, "ingest")?;
    let window = DateWindow::new(args.start, args.end)?;
    if !(args.min_delay >= 0.0 && args.timeout > 0.0) {
        bail!("--min-delay must be >= 0 and --timeout positive");
    }
    if args.min_delay < 3.0 && args.api_url == ARXIV_API_URL {
        warn!("--min-delay below 3 s against the public arXiv API");
    }
    let store = CorpusStore::create(&root, CorpusManifest::new(&args.period_label, window))?;
    let manifest = store.manifest()?;
    if manifest.period_label != args.period_label || manifest.window() != window {
        bail!(
            "corpus {} belongs to period {} ({} to {}); use a fresh directory",
            root.display(),
            manifest.period_label,
            manifest.window_start,
            manifest.window_end
        );
    }
    let client = ListingClient::new(
        ListingConfig {
            base_url: args.api_url,
            source_url: args.source_url,
            min_delay: Duration::from_secs_f64(args.min_delay),
            ..ListingConfig::default()
        },
        UreqTransport::new(Duration::from_secs_f64(args.timeout)),
        Arc::new(SystemClock::default()),
    );

    for domain in args.domains {
        let mut stored = 0;
        let mut page = 0;
        'pages: loop {
            let listing = client.fetch_listing(domain, window, page)?;
            if listing.raw_entries == 0 {
                break;
            }
            for entry in listing.entries {
                if ctx.cancel.load(Ordering::SeqCst) {
                    return Err(Interrupted(format!(
                        "ingest stopped after {stored} {domain} articles"
                    ))
                    .into());
                }
                if args.max_articles.is_some_and(|m| stored >= m) {
                    break 'pages;
                }
                if store_entry(&store, &client, entry)? {
                    stored += 1;
                }
            }
            page += 1;
        }
        info!(%domain, stored, "domain done");
        println!("{domain}: {stored} articles stored");
    }
    Ok(())
}

/// Stores one listed article, falling back to its abstract when the source
/// is unavailable or yields no text. Returns false for already stored ids.
fn store_entry(
    store: &CorpusStore,
    client: &ListingClient<UreqTransport, SystemClock>,
    entry: ListingEntry,
) -> Result<bool> {
    let id = entry.meta.arxiv_id.clone();
    let extracted = client
        .fetch_source(&id)
        .and_then(|bytes| extract_source(&bytes));
    let result = match extracted {
        Ok(ex) if !ex.paragraphs.is_empty() => {
            for w in &ex.warnings {
                warn!(article = %id, "{w}");
            }
            store.store_article(&Article::from_extracted(entry.meta, ex))
        }
        other => {
            if let Err(e) = other {
                warn!(article = %id, error = %e, "source unusable; storing abstract");
            }
            let summary = entry
                .summary
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ");
            if summary.is_empty() {
                warn!(article = %id, "no abstract either; skipped");
                return Ok(false);
            }
            let article = Article {
                raw_char_count: entry.summary.chars().count(),
                meta: entry.meta,
                paragraphs: vec![summary],
            };
            store.store_abstract_only(&article)
        }
    };
    match result {
        Ok(_) => Ok(true),
        Err(CorpusError::Conflict(_)) => Ok(false),
        Err(e) => Err(e.into()),
    }
}
