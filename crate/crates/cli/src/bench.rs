//! `generate`, `evaluate` and `stability`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use arxivroll::corpus::{CorpusManifest, CorpusStore, Domain};
use arxivroll::harness::{
    score_benchmark, write_run, EvalOptions, HttpBackend, MockBackend, ModelBackend, ModelConfig,
    EXPIRED_RERUN_TAG, INTERRUPTED_TAG,
};
use arxivroll::metrics::{stability as spread, StabilityStats};
use arxivroll::registry::Registry;
use arxivroll::scpgen::{
    build_from_articles, read_benchmark, write_benchmark, BenchmarkStatus, BuildRequest,
    FragmentConfig, TaskKind, GENERATOR_VERSION,
};
use chrono::{DateTime, Utc};
use clap::Args;
use serde::Serialize;
use tracing::warn;

use crate::{corpus_root, Context, Interrupted};

/// Fragment thresholds that override the config file.
#[derive(Debug, Args)]
pub struct FragmentFlags {
    #[arg(long)]
    pub n_paragraphs: Option<usize>,
    #[arg(long)]
    pub min_words: Option<usize>,
    #[arg(long)]
    pub max_math_ratio: Option<f64>,
}

impl FragmentFlags {
    fn apply(&self, base: &FragmentConfig) -> Result<FragmentConfig> {
        let mut cfg = base.clone();
        if let Some(v) = self.n_paragraphs {
            cfg.n_paragraphs = v;
        }
        if let Some(v) = self.min_words {
            cfg.min_words = v;
        }
        if let Some(v) = self.max_math_ratio {
            cfg.max_math_ratio = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_name = "DIR")]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub domain: Domain,
    /// sequencing, cloze or prediction (or s, c, p).
    #[arg(long)]
    pub task: TaskKind,
    #[arg(long)]
    pub seed: u64,
    /// Target number of items.
    #[arg(long, default_value_t = 500)]
    pub size: usize,
    /// Output file (`*.jsonl`) or directory; the file is named after the
    /// benchmark id in the directory case.
    #[arg(long, default_value = "benchmarks")]
    pub out: PathBuf,
    /// Creation timestamp (RFC 3339); defaults to the end of the corpus window.
    #[arg(long)]
    pub created: Option<DateTime<Utc>>,
    /// Period label; defaults to the corpus manifest's.
    #[arg(long)]
    pub period_label: Option<String>,
    #[command(flatten)]
    pub fragment: FragmentFlags,
    /// Also record the benchmark in the registry.
    #[arg(long)]
    pub register: bool,
    #[arg(long, value_name = "FILE")]
    pub registry: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Benchmark file; repeatable.
    #[arg(long = "bench", required = true, value_name = "FILE")]
    pub benches: Vec<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub model_config: PathBuf,
    /// Results root; runs go to `<out>/<model_id>/<benchmark_id>.json`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Evaluate expired benchmarks anyway; such runs are tagged and kept
    /// off leaderboards by default.
    #[arg(long)]
    pub allow_expired: bool,
    #[arg(long, value_name = "FILE")]
    pub registry: Option<PathBuf>,
    /// Overrides the model config's concurrency.
    #[arg(long)]
    pub max_in_flight: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[arg(long, value_name = "DIR")]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub domain: Domain,
    #[arg(long)]
    pub task: TaskKind,
    /// Number of seeds.
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(2..))]
    pub seeds: u64,
    #[arg(long, default_value_t = 1)]
    pub first_seed: u64,
    #[arg(long, default_value_t = 500)]
    pub size: usize,
    #[arg(long, value_name = "FILE")]
    pub model_config: PathBuf,
    /// Report file (JSON); printed to stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub created: Option<DateTime<Utc>>,
    #[command(flatten)]
    pub fragment: FragmentFlags,
}

fn window_end(manifest: &CorpusManifest) -> DateTime<Utc> {
    manifest
        .window_end
        .and_hms_opt(0, 0, 0)
        .expect("midnight exists")
        .and_utc()
}

pub fn generate(args: GenerateArgs, ctx: &Context) -> Result<()> {
    let root = corpus_root(args.corpus, ctx, "generate")?;
    let config = args.fragment.apply(&ctx.config.fragment)?;
    let store = CorpusStore::open(&root)?;
    let manifest = store.manifest()?;
    let articles = store.load_domain(args.domain)?;
    if articles.is_empty() {
        bail!("corpus {} has no {} articles", root.display(), args.domain);
    }
    let period = args
        .period_label
        .unwrap_or_else(|| manifest.period_label.clone());
    let req = BuildRequest {
        domain: args.domain,
        task_kind: args.task,
        config,
        seed: args.seed,
        target_size: args.size,
        period_label: Some(period.clone()),
        created: args.created.unwrap_or_else(|| window_end(&manifest)),
    };
    let bench = build_from_articles(&articles, &period, &req)?;
    let path = if args.out.extension().is_some_and(|e| e == "jsonl") {
        args.out
    } else {
        args.out.join(format!("{}.jsonl", bench.id()))
    };
    write_benchmark(&bench, &path)?;
    if bench.items.len() < args.size {
        warn!(
            got = bench.items.len(),
            wanted = args.size,
            "corpus too small for the requested size"
        );
    }
    println!(
        "{} {} items -> {}",
        bench.id(),
        bench.items.len(),
        path.display()
    );
    if args.register {
        let mut reg = Registry::open(ctx.config.registry_path(args.registry.as_deref()))?;
        reg.register(&path)?;
        println!("registered {} in {}", bench.id(), reg.log_path().display());
    }
    Ok(())
}

fn backend(config: &ModelConfig) -> Result<Box<dyn ModelBackend>> {
    Ok(match &config.mock {
        Some(profile) => Box::new(MockBackend::new(profile.clone())),
        None => Box::new(HttpBackend::new(config)?),
    })
}

pub fn evaluate(args: EvaluateArgs, ctx: &Context) -> Result<()> {
    let mut config = ctx.config.model_config(&args.model_config)?;
    if let Some(n) = args.max_in_flight {
        config.max_in_flight = n;
    }
    config.validate()?;
    let out = ctx.config.results_root(args.out.as_deref());
    let reg_path = ctx.config.registry_path(args.registry.as_deref());
    let registry = if reg_path.exists() {
        Some(Registry::open_unverified(&reg_path)?)
    } else {
        None
    };
    let backend = backend(&config)?;

    for path in &args.benches {
        let bench = read_benchmark(path)?;
        let mut expired = bench.header.status == BenchmarkStatus::Expired;
        if let Some(reg) = &registry {
            if reg.get(bench.id()).is_some() {
                reg.verify_file(bench.id(), path)?;
                expired |= reg
                    .get(bench.id())
                    .is_some_and(|r| r.status == BenchmarkStatus::Expired);
            }
        }
        let mut tags = Vec::new();
        if expired {
            if !args.allow_expired {
                bail!(
                    "benchmark {} is expired; pass --allow-expired to rerun it (the run is tagged `{EXPIRED_RERUN_TAG}`)",
                    bench.id()
                );
            }
            tags.push(EXPIRED_RERUN_TAG.to_string());
        }
        let options = EvalOptions {
            tags,
            cancel: Some(ctx.cancel.clone()),
        };
        let run = score_benchmark(&bench, &config, backend.as_ref(), &options)?;
        let written = write_run(&run, &out)?;
        if run.has_tag(INTERRUPTED_TAG) {
            return Err(Interrupted(format!(
                "{} of {} items saved to {}",
                run.items.len(),
                bench.items.len(),
                written.display()
            ))
            .into());
        }
        println!(
            "{} {}: {:.1} ± {:.1} (n={}, failed={}) -> {}",
            run.model_id,
            run.benchmark_id,
            run.accuracy_pct,
            run.se_pct,
            run.n,
            run.n_failed,
            written.display()
        );
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct StabilityReport {
    model_id: String,
    domain: Domain,
    task_kind: TaskKind,
    size: usize,
    seeds: Vec<u64>,
    item_counts: Vec<usize>,
    accuracies: Vec<f64>,
    stats: StabilityStats,
    generator_version: String,
    tool_version: String,
    config_digest: String,
}

pub fn stability(args: StabilityArgs, ctx: &Context) -> Result<()> {
    let root = corpus_root(args.corpus, ctx, "stability")?;
    let fragment = args.fragment.apply(&ctx.config.fragment)?;
    let model = ctx.config.model_config(&args.model_config)?;
    model.validate()?;
    let backend = backend(&model)?;
    let store = CorpusStore::open(&root)?;
    let manifest = store.manifest()?;
    let articles = store.load_domain(args.domain)?;
    let created = args.created.unwrap_or_else(|| window_end(&manifest));

    let seeds: Vec<u64> = (args.first_seed..).take(args.seeds as usize).collect();
    let mut accuracies = Vec::new();
    let mut item_counts = Vec::new();
    for &seed in &seeds {
        let req = BuildRequest {
            domain: args.domain,
            task_kind: args.task,
            config: fragment.clone(),
            seed,
            target_size: args.size,
            period_label: None,
            created,
        };
        let bench = build_from_articles(&articles, &manifest.period_label, &req)
            .with_context(|| format!("seed {seed}"))?;
        let options = EvalOptions {
            tags: Vec::new(),
            cancel: Some(ctx.cancel.clone()),
        };
        let run = score_benchmark(&bench, &model, backend.as_ref(), &options)?;
        if run.has_tag(INTERRUPTED_TAG) {
            return Err(Interrupted(format!("stability stopped at seed {seed}")).into());
        }
        item_counts.push(bench.items.len());
        accuracies.push(run.accuracy_pct);
    }
    let report = StabilityReport {
        model_id: model.model_id.clone(),
        domain: args.domain,
        task_kind: args.task,
        size: args.size,
        stats: spread(&accuracies)?,
        seeds,
        item_counts,
        accuracies,
        generator_version: GENERATOR_VERSION.into(),
        tool_version: arxivroll::TOOL_VERSION.into(),
        config_digest: fragment.digest(),
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    match &args.out {
        Some(path) => write_file(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    eprintln!(
        "accuracy over {} seeds: mean {:.2}, std {:.3}, range {:.1}..{:.1}",
        report.stats.n, report.stats.mean, report.stats.std, report.stats.min, report.stats.max
    );
    Ok(())
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
