//! The `arxivroll` command line, as a library so tests can drive it
//! in-process.

mod bench;
mod config;
mod corpus;
mod scores;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use clap::{Args, CommandFactory, Parser, Subcommand};

use arxivroll::scpgen::GENERATOR_VERSION;

pub use config::ToolConfig;

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Domain failures: bad config, empty benchmark, refused lifecycle action.
pub const EXIT_FAILURE: i32 = 1;
/// Usage errors: unknown subcommand, missing or malformed flags.
pub const EXIT_USAGE: i32 = 2;
/// Stopped by Ctrl-C after flushing partial results.
pub const EXIT_INTERRUPTED: i32 = 130;

#[derive(Debug, Parser)]
#[command(
    name = "arxivroll",
    version,
    about = "One-time private LLM benchmarks from fresh arXiv articles",
    propagate_version = true
)]
pub struct Cli {
    /// Tool config (TOML). Defaults to ./arxivroll.toml when present.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Log filter, e.g. `info` or `arxivroll=debug` (overrides the config).
    #[arg(long, global = true, value_name = "FILTER")]
    pub log_level: Option<String>,
    /// Create the configured corpus, results and registry locations first.
    #[arg(long, global = true)]
    pub init: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Harvest articles of a date window from arXiv into a corpus.
    Ingest(corpus::IngestArgs),
    /// Write a deterministic synthetic corpus (fixtures, offline demos).
    SynthCorpus(corpus::SynthArgs),
    /// Build one benchmark (JSONL) from a corpus.
    Generate(bench::GenerateArgs),
    /// Evaluate a model (or mock) on benchmarks and store the runs.
    Evaluate(bench::EvaluateArgs),
    /// Regenerate a benchmark under many seeds and report accuracy spread.
    Stability(bench::StabilityArgs),
    /// Rugged scores per model from a pair config and run files.
    Rs(scores::RsArgs),
    /// Pearson, Spearman and Kendall between two model score tables.
    Correlate(scores::CorrelateArgs),
    /// Build a pair config from the registry.
    Pairs(scores::PairsArgs),
    /// Benchmark lifecycle: register, expire, list.
    Registry(RegistryArgs),
    /// Ranked table of models from run files and rugged-score reports.
    Leaderboard(scores::LeaderboardArgs),
}

#[derive(Debug, Args)]
pub struct RegistryArgs {
    /// Registry log (JSONL); defaults to the config's registry_path.
    #[arg(long, value_name = "FILE")]
    pub registry: Option<PathBuf>,
    #[command(subcommand)]
    pub action: scores::RegistryAction,
}

/// A usage problem found after clap parsing (e.g. a path that neither a
/// flag nor the config file supplies). Exits 2 with usage text.
#[derive(Debug)]
pub struct UsageError {
    pub subcommand: &'static str,
    pub message: String,
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for UsageError {}

/// Raised when a cancellation flag stopped the work.
#[derive(Debug)]
pub struct Interrupted(pub String);

impl fmt::Display for Interrupted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "interrupted: {}", self.0)
    }
}

impl std::error::Error for Interrupted {}

/// Shared state handed to every subcommand.
pub struct Context {
    pub config: ToolConfig,
    pub cancel: Arc<AtomicBool>,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_cancel(argv, Arc::new(AtomicBool::new(false)))
}

/// Like [`run`], with a flag that, once set, stops evaluations after their
/// in-flight items.
pub fn run_with_cancel<I, T>(argv: I, cancel: Arc<AtomicBool>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let config = match ToolConfig::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_FAILURE;
        }
    };
    init_logging(cli.log_level.as_deref().or(config.log_level.as_deref()));
    eprintln!(
        "arxivroll {}: seed={} generator_version={GENERATOR_VERSION}",
        arxivroll::TOOL_VERSION,
        effective_seed(&cli.command)
    );
    let ctx = Context { config, cancel };
    let result = if cli.init {
        init_paths(&ctx).and_then(|_| dispatch(cli.command, &ctx))
    } else {
        dispatch(cli.command, &ctx)
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => exit_code_for(&e),
    }
}

fn exit_code_for(e: &anyhow::Error) -> i32 {
    if let Some(u) = e.downcast_ref::<UsageError>() {
        let mut cmd = Cli::command();
        cmd.build();
        let err = match cmd.find_subcommand_mut(u.subcommand) {
            Some(sub) => sub.error(clap::error::ErrorKind::MissingRequiredArgument, &u.message),
            None => cmd.error(clap::error::ErrorKind::MissingRequiredArgument, &u.message),
        };
        let _ = err.print();
        return EXIT_USAGE;
    }
    eprintln!("error: {e:#}");
    if e.downcast_ref::<Interrupted>().is_some() {
        EXIT_INTERRUPTED
    } else {
        EXIT_FAILURE
    }
}

fn effective_seed(cmd: &Command) -> String {
    match cmd {
        Command::Generate(a) => a.seed.to_string(),
        Command::SynthCorpus(a) => a.seed.to_string(),
        Command::Stability(a) => format!("{}..={}", a.first_seed, a.first_seed + a.seeds - 1),
        _ => "none".into(),
    }
}

fn init_logging(filter: Option<&str>) {
    let filter = tracing_subscriber::EnvFilter::try_new(filter.unwrap_or("warn"))
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn"));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

fn init_paths(ctx: &Context) -> anyhow::Result<()> {
    let cfg = &ctx.config;
    let mut dirs = vec![cfg.results_root(None), cfg.rs_root(None)];
    dirs.extend(cfg.corpus_root.clone());
    if let Some(parent) = cfg
        .registry_path(None)
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
    {
        dirs.push(parent.to_path_buf());
    }
    for d in dirs {
        std::fs::create_dir_all(&d)
            .map_err(|e| anyhow::anyhow!("creating {}: {e}", d.display()))?;
    }
    Ok(())
}

fn dispatch(command: Command, ctx: &Context) -> anyhow::Result<()> {
    match command {
        Command::Ingest(a) => corpus::ingest(a, ctx),
        Command::SynthCorpus(a) => corpus::synth(a, ctx),
        Command::Generate(a) => bench::generate(a, ctx),
        Command::Evaluate(a) => bench::evaluate(a, ctx),
        Command::Stability(a) => bench::stability(a, ctx),
        Command::Rs(a) => scores::rs(a, ctx),
        Command::Correlate(a) => scores::correlate(a, ctx),
        Command::Pairs(a) => scores::pairs(a, ctx),
        Command::Registry(a) => scores::registry(a, ctx),
        Command::Leaderboard(a) => scores::leaderboard(a, ctx),
    }
}

/// Corpus root from the flag or the config; neither is a usage error.
pub(crate) fn corpus_root(
    flag: Option<PathBuf>,
    ctx: &Context,
    subcommand: &'static str,
) -> anyhow::Result<PathBuf> {
    flag.or_else(|| ctx.config.corpus_root.clone())
        .ok_or_else(|| {
            UsageError {
                subcommand,
                message: "the following required argument was not provided: --corpus <DIR> \
                      (or set corpus_root in the config file)"
                    .into(),
            }
            .into()
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(run(["arxivroll", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["arxivroll", "--version"]), EXIT_OK);
    }
}
