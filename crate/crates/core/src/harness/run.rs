//! Concurrent scoring of a benchmark and the run file format.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use tracing::{info, warn};

use super::client::{elapsed_ms, QueryError, QueryErrorKind};
use super::{prompt::render_prompt, BenchmarkRef, EvalRun, HarnessError, ItemResult, ModelConfig};
use crate::scpgen::{Benchmark, BenchmarkHeader, TestCase};

/// Tag carried by runs on a benchmark that was already expired.
pub const EXPIRED_RERUN_TAG: &str = "expired-rerun";
/// Tag carried by runs cut short by cancellation; such runs are partial.
pub const INTERRUPTED_TAG: &str = "interrupted";

/// Anything that answers prompts: the HTTP client or a mock.
pub trait ModelBackend: Send + Sync {
    fn complete(
        &self,
        bench: &BenchmarkHeader,
        case: &TestCase,
        prompt: &str,
    ) -> Result<String, QueryError>;

    /// Whether item latencies are meaningful; mocks report 0 so their run
    /// files are reproducible.
    fn reports_latency(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub tags: Vec<String>,
    /// When set, workers finish their current item and stop picking new ones.
    pub cancel: Option<Arc<AtomicBool>>,
}

/// Evaluates every item of `bench` with up to `config.max_in_flight`
/// concurrent requests. Items come back ordered by case_id whatever the
/// completion order.
pub fn score_benchmark(
    bench: &Benchmark,
    config: &ModelConfig,
    backend: &dyn ModelBackend,
    options: &EvalOptions,
) -> Result<EvalRun, HarnessError> {
    config.validate()?;
    if bench.items.is_empty() {
        return Err(HarnessError::EmptyBenchmark(bench.id().to_string()));
    }
    let total = bench.items.len();
    let workers = config.max_in_flight.min(total);
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let fatal: Mutex<Option<QueryError>> = Mutex::new(None);
    let collected: Mutex<Vec<ItemResult>> = Mutex::new(Vec::with_capacity(total));
    let cancelled = || {
        options
            .cancel
            .as_ref()
            .is_some_and(|c| c.load(Ordering::SeqCst))
    };

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if stop.load(Ordering::SeqCst) || cancelled() {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(case) = bench.items.get(i) else {
                    break;
                };
                let prompt = render_prompt(case);
                let start = Instant::now();
                let outcome = backend.complete(&bench.header, case, &prompt);
                let latency = if backend.reports_latency() {
                    elapsed_ms(start)
                } else {
                    0
                };
                let result = match outcome {
                    Ok(raw) => ItemResult::scored(&case.case_id, raw, case.correct_index, latency),
                    Err(e) if e.kind == QueryErrorKind::Auth => {
                        stop.store(true, Ordering::SeqCst);
                        fatal
                            .lock()
                            .unwrap_or_else(|p| p.into_inner())
                            .get_or_insert(e);
                        break;
                    }
                    Err(e) => {
                        warn!(case = %case.case_id, error = %e, "item failed");
                        ItemResult::failed(&case.case_id, e.to_string(), latency)
                    }
                };
                collected
                    .lock()
                    .unwrap_or_else(|p| p.into_inner())
                    .push(result);
            });
        }
    });

    if let Some(e) = fatal.into_inner().unwrap_or_else(|p| p.into_inner()) {
        return Err(HarnessError::Auth {
            model_id: config.model_id.clone(),
            message: e.message,
        });
    }
    let mut items = collected.into_inner().unwrap_or_else(|p| p.into_inner());
    items.sort_by(|a, b| a.case_id.cmp(&b.case_id));

    let mut tags = options.tags.clone();
    if items.len() < total {
        warn!(done = items.len(), total, "evaluation interrupted");
        tags.push(INTERRUPTED_TAG.to_string());
    }
    tags.sort();
    tags.dedup();

    let mut run = EvalRun {
        model_id: config.model_id.clone(),
        benchmark_id: bench.id().to_string(),
        benchmark: BenchmarkRef::from(&bench.header),
        config: config.clone(),
        tool_version: crate::TOOL_VERSION.to_string(),
        tags,
        items,
        n: 0,
        n_correct: 0,
        n_failed: 0,
        accuracy_pct: 0.0,
        se_pct: 0.0,
    };
    run.recompute();
    if run.n > 0 && run.n_failed * 2 > run.n {
        return Err(HarnessError::Unreliable {
            failed: run.n_failed,
            total: run.n,
        });
    }
    info!(
        model = %run.model_id,
        bench = %run.benchmark_id,
        acc = run.accuracy_pct,
        se = run.se_pct,
        "scored"
    );
    Ok(run)
}

/// `<results_root>/<model_id>/<benchmark_id>.json`
pub fn run_path(results_root: &Path, model_id: &str, benchmark_id: &str) -> PathBuf {
    results_root
        .join(model_id)
        .join(format!("{benchmark_id}.json"))
}

/// Writes the run under `results_root`; an interrupted run goes to
/// `<benchmark_id>.partial.json` so it never replaces a complete one.
pub fn write_run(run: &EvalRun, results_root: &Path) -> Result<PathBuf, HarnessError> {
    let mut path = run_path(results_root, &run.model_id, &run.benchmark_id);
    if run.has_tag(INTERRUPTED_TAG) {
        path.set_file_name(format!("{}.partial.json", run.benchmark_id));
    }
    let mut bytes = serde_json::to_vec_pretty(run).map_err(|source| HarnessError::Json {
        path: path.clone(),
        source,
    })?;
    bytes.push(b'\n');
    crate::fsio::write_atomic(&path, &bytes).map_err(|source| HarnessError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Loads a run and checks that its aggregates recompute from its items.
pub fn read_run(path: &Path) -> Result<EvalRun, HarnessError> {
    let bytes = std::fs::read(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let run: EvalRun = serde_json::from_slice(&bytes).map_err(|source| HarnessError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    run.verify().map_err(|message| HarnessError::InvalidRun {
        path: path.to_path_buf(),
        message,
    })?;
    Ok(run)
}

/// Every run file under `dir` (any depth), ordered by path.
pub fn load_runs(dir: &Path) -> Result<Vec<(PathBuf, EvalRun)>, HarnessError> {
    let mut out = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| HarnessError::Io {
            path: e.path().unwrap_or(dir).to_path_buf(),
            source: e.into(),
        })?;
        let path = entry.path();
        if entry.file_type().is_file() && path.extension().is_some_and(|x| x == "json") {
            out.push((path.to_path_buf(), read_run(path)?));
        }
    }
    Ok(out)
}
