//! Pair configuration files, table assembly from run files, and per-model
//! rugged-score reports.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{rs1_absolute, rs1_relative, rs2, BenchmarkDesc, MetricsError, PerfTable, Visibility};
use crate::harness::{EvalRun, INTERRUPTED_TAG};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRef {
    pub public: String,
    pub private: String,
}

/// Which benchmarks feed the rugged scores, by benchmark id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairConfig {
    pub pairs: BTreeMap<String, PairRef>,
    pub unmatched_public: Vec<String>,
    pub unmatched_private: Vec<String>,
    /// Accuracy fractions for benchmarks scored elsewhere (typically public
    /// suites), `model_id -> benchmark_id -> score`.
    pub external_scores: BTreeMap<String, BTreeMap<String, f64>>,
}

impl PairConfig {
    /// Benchmark descriptors in a fixed order: pairs by id (public first),
    /// then unmatched public, then unmatched private.
    pub fn descriptors(&self) -> Result<Vec<BenchmarkDesc>, MetricsError> {
        let mut out = Vec::new();
        for (id, p) in &self.pairs {
            for (bench, vis) in [
                (&p.public, Visibility::Public),
                (&p.private, Visibility::Private),
            ] {
                out.push(BenchmarkDesc {
                    id: bench.clone(),
                    visibility: vis,
                    pair_id: Some(id.clone()),
                });
            }
        }
        for (list, vis) in [
            (&self.unmatched_public, Visibility::Public),
            (&self.unmatched_private, Visibility::Private),
        ] {
            out.extend(list.iter().map(|b| BenchmarkDesc {
                id: b.clone(),
                visibility: vis,
                pair_id: None,
            }));
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = out.iter().find(|d| !seen.insert(d.id.as_str())) {
            return Err(MetricsError::InvalidTable(format!(
                "benchmark `{}` appears more than once in the pair config",
                dup.id
            )));
        }
        Ok(out)
    }
}

/// Fills a table from run files and external scores.
///
/// Models are every model with at least one score on a listed benchmark,
/// sorted by id. Interrupted (partial) runs are ignored. Two runs of one
/// model on one benchmark must agree, and so must a run and an external score.
pub fn build_table(config: &PairConfig, runs: &[EvalRun]) -> Result<PerfTable, MetricsError> {
    let benchmarks = config.descriptors()?;
    let listed: BTreeSet<&str> = benchmarks.iter().map(|b| b.id.as_str()).collect();
    let mut cells: BTreeMap<(String, String), f64> = BTreeMap::new();
    let mut put = |model: &str, bench: &str, score: f64| -> Result<(), MetricsError> {
        match cells.insert((model.to_string(), bench.to_string()), score) {
            Some(old) if old != score => Err(MetricsError::InvalidTable(format!(
                "conflicting scores for `{model}` on `{bench}`: {old} vs {score}"
            ))),
            _ => Ok(()),
        }
    };
    for run in runs {
        if run.has_tag(INTERRUPTED_TAG) || !listed.contains(run.benchmark_id.as_str()) {
            continue;
        }
        put(&run.model_id, &run.benchmark_id, run.accuracy_fraction())?;
    }
    for (model, scores) in &config.external_scores {
        for (bench, score) in scores {
            if !listed.contains(bench.as_str()) {
                return Err(MetricsError::InvalidTable(format!(
                    "external score for unlisted benchmark `{bench}`"
                )));
            }
            put(model, bench, *score)?;
        }
    }
    let models: Vec<String> = cells
        .keys()
        .map(|(m, _)| m.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut table = PerfTable::new(models, benchmarks);
    for ((model, bench), score) in cells {
        table.set(&model, &bench, score)?;
    }
    table.validate()?;
    Ok(table)
}

/// Rugged scores of one model; a `None` field could not be computed and
/// `flags` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsReport {
    pub model_id: String,
    pub rs1_absolute: Option<f64>,
    pub rs1_relative: Option<f64>,
    pub rs2: Option<f64>,
    pub rs2_normalized: Option<f64>,
    pub flags: Vec<String>,
    pub tool_version: String,
}

/// One report per model in table order.
///
/// The rank-based score uses the models scored on every paired benchmark;
/// others get `None` with a flag.
pub fn compute_reports(table: &PerfTable) -> Result<Vec<RsReport>, MetricsError> {
    table.validate()?;
    let pairs = table.pairs();
    let complete: Vec<String> = table
        .models
        .iter()
        .enumerate()
        .filter(|(m, _)| {
            pairs.iter().all(|p| {
                table.scores[*m][p.public].is_some() && table.scores[*m][p.private].is_some()
            })
        })
        .map(|(_, id)| id.clone())
        .collect();
    let relative = rs1_relative(table, &complete);

    let mut reports = Vec::with_capacity(table.models.len());
    for model in &table.models {
        let mut flags = Vec::new();
        let rs1 = match rs1_absolute(table, model) {
            Ok(r) => {
                flags.extend(r.flags.iter().map(|f| format!("rs1_absolute: {f}")));
                Some(r.value)
            }
            Err(e) => {
                flags.push(format!("rs1_absolute: {e}"));
                None
            }
        };
        let rel = match &relative {
            Ok(map) => map.get(model).copied(),
            Err(e) => {
                flags.push(format!("rs1_relative: {e}"));
                None
            }
        };
        if rel.is_none() && relative.is_ok() {
            flags.push("rs1_relative: model lacks scores on some paired benchmark".into());
        }
        let (r2, r2n) = match rs2(table, model) {
            Ok(r) => {
                if r.normalized.is_none() {
                    flags.push("rs2_normalized: mean private score is 0".into());
                }
                (Some(r.rs2), r.normalized)
            }
            Err(e) => {
                flags.push(format!("rs2: {e}"));
                (None, None)
            }
        };
        reports.push(RsReport {
            model_id: model.clone(),
            rs1_absolute: rs1,
            rs1_relative: rel,
            rs2: r2,
            rs2_normalized: r2n,
            flags,
            tool_version: crate::TOOL_VERSION.to_string(),
        });
    }
    Ok(reports)
}
