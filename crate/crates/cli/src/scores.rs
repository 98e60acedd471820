//! `rs`, `correlate`, `pairs`, `registry` and `leaderboard`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use arxivroll::harness::load_runs;
use arxivroll::metrics::{build_table, compute_reports, kendall, pearson, spearman, PairConfig};
use arxivroll::registry::{
    build_leaderboard, emit_report, LeaderboardOptions, Registry, ReportFormat,
};
use chrono::{DateTime, Utc};
use clap::{Args, Subcommand};

use crate::bench::write_file;
use crate::{Context, RegistryArgs};

#[derive(Debug, Args)]
pub struct RsArgs {
    /// Pair config (JSON), e.g. from `arxivroll pairs`.
    #[arg(long, value_name = "FILE")]
    pub pairs: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub results: Option<PathBuf>,
    /// Report directory; one `<model_id>.json` per model.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Model scores: JSON object `{model: score}` or CSV `model_id,score`.
    #[arg(value_name = "TABLE_A")]
    pub a: PathBuf,
    #[arg(value_name = "TABLE_B")]
    pub b: PathBuf,
    /// Write the coefficients as JSON here as well.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PairsArgs {
    #[arg(long, value_name = "FILE")]
    pub registry: Option<PathBuf>,
    /// Period whose benchmarks are the private side.
    #[arg(long)]
    pub private_period: String,
    /// Restrict the public side to expired benchmarks of this period.
    #[arg(long)]
    pub public_period: Option<String>,
    /// Pair expired benchmarks as the public side.
    #[arg(long)]
    pub promote_expired_as_public: bool,
    /// Pair config file; printed to stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum RegistryAction {
    /// Record a benchmark file as private.
    Register {
        #[arg(value_name = "FILE")]
        bench: PathBuf,
    },
    /// Mark a benchmark expired (idempotent).
    Expire {
        benchmark_id: String,
        /// RFC 3339 timestamp; defaults to now.
        #[arg(long)]
        at: Option<DateTime<Utc>>,
    },
    /// Print every record.
    List,
    /// Recompute the digest of every registered file.
    Verify,
}

#[derive(Debug, Args)]
pub struct LeaderboardArgs {
    #[arg(long, value_name = "DIR")]
    pub results: Option<PathBuf>,
    /// Rugged-score reports; defaults to the config's rs_root when it exists.
    #[arg(long, value_name = "DIR")]
    pub rs: Option<PathBuf>,
    /// md, json or csv.
    #[arg(long, default_value = "md")]
    pub format: ReportFormat,
    /// Output file; printed to stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Only benchmarks of this period.
    #[arg(long)]
    pub period: Option<String>,
    /// Only count runs on benchmarks in this registry.
    #[arg(long, value_name = "FILE")]
    pub registry: Option<PathBuf>,
    #[arg(long)]
    pub include_expired_reruns: bool,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn pretty<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn rs(args: RsArgs, ctx: &Context) -> Result<()> {
    let config: PairConfig = read_json(&args.pairs)?;
    let results = ctx.config.results_root(args.results.as_deref());
    let runs: Vec<_> = load_runs(&results)?.into_iter().map(|(_, r)| r).collect();
    let table = build_table(&config, &runs)?;
    if table.models.is_empty() {
        bail!("no runs in {} match the pair config", results.display());
    }
    let out = ctx.config.rs_root(args.out.as_deref());
    for report in compute_reports(&table)? {
        let path = out.join(format!("{}.json", report.model_id));
        write_file(&path, pretty(&report)?.as_bytes())?;
        let show = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
        println!(
            "{}: RS_I {} (rank shift {}), RS_II {} (normalized {})",
            report.model_id,
            show(report.rs1_absolute),
            show(report.rs1_relative),
            show(report.rs2),
            show(report.rs2_normalized)
        );
        for f in &report.flags {
            println!("  note: {f}");
        }
    }
    Ok(())
}

/// Reads `{model: score}` JSON, or CSV with `model_id,score` columns.
fn read_scores(path: &Path) -> Result<BTreeMap<String, f64>> {
    if path.extension().is_some_and(|e| e == "json") {
        return read_json(path);
    }
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = BTreeMap::new();
    for (i, rec) in reader.deserialize::<(String, f64)>().enumerate() {
        let (model, score) = rec.with_context(|| format!("{} row {}", path.display(), i + 2))?;
        if out.insert(model.clone(), score).is_some() {
            bail!("{}: model {model} listed twice", path.display());
        }
    }
    Ok(out)
}

pub fn correlate(args: CorrelateArgs, _ctx: &Context) -> Result<()> {
    let a = read_scores(&args.a)?;
    let b = read_scores(&args.b)?;
    let only: Vec<&str> = a
        .keys()
        .filter(|k| !b.contains_key(*k))
        .chain(b.keys().filter(|k| !a.contains_key(*k)))
        .map(String::as_str)
        .collect();
    if !only.is_empty() {
        bail!(
            "the tables cover different models; unmatched: {}",
            only.join(", ")
        );
    }
    if a.len() < 3 {
        bail!("correlation needs at least 3 models, got {}", a.len());
    }
    let xs: Vec<f64> = a.values().copied().collect();
    let ys: Vec<f64> = b.values().copied().collect();
    let result = BTreeMap::from([
        ("pearson", pearson(&xs, &ys)?),
        ("spearman", spearman(&xs, &ys)?),
        ("kendall", kendall(&xs, &ys)?),
    ]);
    println!("| Models | Pearson | Spearman | Kendall |");
    println!("| ---: | ---: | ---: | ---: |");
    println!(
        "| {} | {:.3} | {:.3} | {:.3} |",
        a.len(),
        result["pearson"],
        result["spearman"],
        result["kendall"]
    );
    if let Some(path) = &args.out {
        write_file(path, pretty(&result)?.as_bytes())?;
    }
    Ok(())
}

pub fn pairs(args: PairsArgs, ctx: &Context) -> Result<()> {
    let reg = Registry::open(ctx.config.registry_path(args.registry.as_deref()))?;
    let config = reg.pair_config(
        &args.private_period,
        args.public_period.as_deref(),
        args.promote_expired_as_public,
    )?;
    let text = pretty(&config)?;
    match &args.out {
        Some(path) => write_file(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn registry(args: RegistryArgs, ctx: &Context) -> Result<()> {
    let path = ctx.config.registry_path(args.registry.as_deref());
    match args.action {
        RegistryAction::Register { bench } => {
            let mut reg = Registry::open(&path)?;
            let rec = reg.register(&bench)?;
            println!("registered {} ({})", rec.benchmark_id, rec.status);
        }
        RegistryAction::Expire { benchmark_id, at } => {
            let mut reg = Registry::open(&path)?;
            let rec = reg.expire(&benchmark_id, at.unwrap_or_else(Utc::now))?;
            let when = rec.expired_at.map(|t| t.to_rfc3339()).unwrap_or_default();
            println!("{} expired at {when}", rec.benchmark_id);
        }
        RegistryAction::List => {
            let reg = Registry::open_unverified(&path)?;
            println!("| Benchmark | Period | Domain | Task | Status | Created | Expired |");
            println!("| --- | --- | --- | --- | --- | --- | --- |");
            for r in reg.records() {
                println!(
                    "| {} | {} | {} | {} | {} | {} | {} |",
                    r.benchmark_id,
                    r.period_label,
                    r.domain,
                    r.task_kind,
                    r.status,
                    r.created.to_rfc3339(),
                    r.expired_at
                        .map(|t| t.to_rfc3339())
                        .unwrap_or_else(|| "-".into())
                );
            }
        }
        RegistryAction::Verify => {
            let reg = Registry::open(&path)?;
            println!("{} records verified", reg.records().len());
        }
    }
    Ok(())
}

pub fn leaderboard(args: LeaderboardArgs, ctx: &Context) -> Result<()> {
    let results = ctx.config.results_root(args.results.as_deref());
    let rs_dir = ctx.config.rs_root(args.rs.as_deref());
    let registry = match &args.registry {
        Some(p) => Some(Registry::open(p)?),
        None => None,
    };
    let options = LeaderboardOptions {
        period: args.period,
        include_expired_reruns: args.include_expired_reruns,
    };
    let rows = build_leaderboard(&results, Some(&rs_dir), registry.as_ref(), &options)?;
    let text = emit_report(&rows, args.format);
    match &args.out {
        Some(path) => write_file(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}
