//! Joins run files and rugged-score reports into ranked rows.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tracing::warn;

use super::{Registry, RegistryError};
use crate::harness::{load_runs, EvalRun, EXPIRED_RERUN_TAG, INTERRUPTED_TAG};
use crate::metrics::{average_ranks, RsReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub benchmark_id: String,
    pub accuracy_pct: f64,
    pub se_pct: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub model_id: String,
    /// Keyed `<domain>/<task_kind>`; cells without a run are absent.
    pub cells: BTreeMap<String, Cell>,
    /// Mean accuracy over the present cells, in percent.
    pub mean_accuracy: f64,
    /// 1-based by descending mean accuracy; ties share the average rank.
    pub rank: f64,
    pub rs1_absolute: Option<f64>,
    pub rs1_relative: Option<f64>,
    pub rs2: Option<f64>,
    pub rs2_normalized: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct LeaderboardOptions {
    /// Only benchmarks of this period.
    pub period: Option<String>,
    /// Count runs tagged as reruns of expired benchmarks (off by default,
    /// since they are reproductions rather than fresh private results).
    pub include_expired_reruns: bool,
}

/// Builds ranked rows from `results_dir` and, optionally, the per-model
/// reports in `rs_dir`.
///
/// With a registry, only runs on registered benchmarks count. Identical
/// duplicate runs collapse to one; differing duplicates are an error naming
/// both files. Interrupted runs never count.
pub fn build_leaderboard(
    results_dir: &Path,
    rs_dir: Option<&Path>,
    registry: Option<&Registry>,
    options: &LeaderboardOptions,
) -> Result<Vec<LeaderboardRow>, RegistryError> {
    let mut runs: BTreeMap<(String, String), (PathBuf, EvalRun)> = BTreeMap::new();
    for (path, run) in load_runs(results_dir)? {
        if run.has_tag(INTERRUPTED_TAG)
            || (run.has_tag(EXPIRED_RERUN_TAG) && !options.include_expired_reruns)
            || options
                .period
                .as_ref()
                .is_some_and(|p| *p != run.benchmark.period_label)
        {
            continue;
        }
        if let Some(reg) = registry {
            if reg.get(&run.benchmark_id).is_none() {
                warn!(path = %path.display(), "run on an unregistered benchmark; skipped");
                continue;
            }
        }
        let key = (run.model_id.clone(), run.benchmark_id.clone());
        match runs.get(&key) {
            Some((first, existing)) => {
                if !same_result(existing, &run) {
                    return Err(RegistryError::DuplicateRun {
                        model_id: key.0,
                        benchmark_id: key.1,
                        first: first.clone(),
                        second: path,
                    });
                }
            }
            None => {
                runs.insert(key, (path, run));
            }
        }
    }
    if runs.is_empty() {
        return Err(RegistryError::Empty);
    }

    let mut rows: BTreeMap<String, BTreeMap<String, Cell>> = BTreeMap::new();
    for ((model, bench), (_, run)) in &runs {
        let cell_key = format!("{}/{}", run.benchmark.domain, run.benchmark.task_kind);
        let cells = rows.entry(model.clone()).or_default();
        if let Some(other) = cells.get(&cell_key) {
            return Err(RegistryError::AmbiguousCell {
                model_id: model.clone(),
                cell: cell_key,
                first: other.benchmark_id.clone(),
                second: bench.clone(),
            });
        }
        cells.insert(
            cell_key,
            Cell {
                benchmark_id: bench.clone(),
                accuracy_pct: run.accuracy_pct,
                se_pct: run.se_pct,
                n: run.n,
            },
        );
    }

    let reports = match rs_dir {
        Some(dir) => load_reports(dir)?,
        None => BTreeMap::new(),
    };
    let mut out: Vec<LeaderboardRow> = rows
        .into_iter()
        .map(|(model_id, cells)| {
            let mean_accuracy =
                cells.values().map(|c| c.accuracy_pct).sum::<f64>() / cells.len() as f64;
            let rs = reports.get(&model_id);
            LeaderboardRow {
                rs1_absolute: rs.and_then(|r| r.rs1_absolute),
                rs1_relative: rs.and_then(|r| r.rs1_relative),
                rs2: rs.and_then(|r| r.rs2),
                rs2_normalized: rs.and_then(|r| r.rs2_normalized),
                model_id,
                cells,
                mean_accuracy,
                rank: 0.0,
            }
        })
        .collect();
    let neg: Vec<f64> = out.iter().map(|r| -r.mean_accuracy).collect();
    for (row, rank) in out.iter_mut().zip(average_ranks(&neg)) {
        row.rank = rank;
    }
    out.sort_by(|a, b| {
        a.rank
            .total_cmp(&b.rank)
            .then_with(|| a.model_id.cmp(&b.model_id))
    });
    Ok(out)
}

/// Duplicates agree when every scored field matches; latencies may differ.
fn same_result(a: &EvalRun, b: &EvalRun) -> bool {
    a.n == b.n
        && a.n_correct == b.n_correct
        && a.items.len() == b.items.len()
        && a.items.iter().zip(&b.items).all(|(x, y)| {
            x.case_id == y.case_id && x.extracted == y.extracted && x.correct == y.correct
        })
}

fn load_reports(dir: &Path) -> Result<BTreeMap<String, RsReport>, RegistryError> {
    let mut out = BTreeMap::new();
    if !dir.exists() {
        return Ok(out);
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(super::io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    for path in paths {
        let bytes = std::fs::read(&path).map_err(super::io_err(&path))?;
        let report: RsReport =
            serde_json::from_slice(&bytes).map_err(|source| RegistryError::Json {
                path: path.clone(),
                source,
            })?;
        out.insert(report.model_id.clone(), report);
    }
    Ok(out)
}
