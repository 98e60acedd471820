//! Benchmark lifecycle (private, then expired) kept as an append-only event
//! log, plus leaderboards built from run files.

mod leaderboard;
mod report;

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::warn;

use crate::corpus::Domain;
use crate::digest::{sha256_hex, DIGEST_ALGORITHM};
use crate::harness::HarnessError;
use crate::metrics::{PairConfig, PairRef};
use crate::scpgen::{read_benchmark, BenchmarkStatus, ScpError, TaskKind};

pub use leaderboard::{build_leaderboard, Cell, LeaderboardOptions, LeaderboardRow};
pub use report::{emit_report, ReportFormat};

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("benchmark {0} is already registered")]
    Conflict(String),
    #[error("benchmark {0} is not registered")]
    Unknown(String),
    #[error(
        "integrity check failed for {benchmark_id} ({path}): expected {expected}, found {found}"
    )]
    Integrity {
        benchmark_id: String,
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("registry log {path}, line {line}: {message}")]
    MalformedLog {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("conflicting runs for model {model_id} on {benchmark_id}: {first} and {second}")]
    DuplicateRun {
        model_id: String,
        benchmark_id: String,
        first: PathBuf,
        second: PathBuf,
    },
    #[error("model {model_id} has two benchmarks in cell {cell}: {first} and {second} (filter by period)")]
    AmbiguousCell {
        model_id: String,
        cell: String,
        first: String,
        second: String,
    },
    #[error("no scored runs to rank")]
    Empty,
    #[error("ambiguous pairing: {0}")]
    AmbiguousPair(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Benchmark(#[from] ScpError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RegistryError + '_ {
    move |source| RegistryError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryRecord {
    pub benchmark_id: String,
    pub period_label: String,
    pub domain: Domain,
    pub task_kind: TaskKind,
    pub status: BenchmarkStatus,
    pub created: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expired_at: Option<DateTime<Utc>>,
    pub digest_algorithm: String,
    pub content_digest: String,
    /// Benchmark file; relative paths are relative to the log's directory.
    pub path: PathBuf,
}

/// One line of the registry log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum Event {
    Register {
        record: RegistryRecord,
    },
    Expire {
        benchmark_id: String,
        at: DateTime<Utc>,
    },
}

/// What applying an event did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Applied {
    Changed,
    /// Expiring an already expired benchmark.
    NoOp,
}

/// Registry state as a pure function of the event sequence. The only
/// transitions are "absent -> private" (register) and "private -> expired"
/// (expire); nothing leads back to private.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegistryState {
    records: BTreeMap<String, RegistryRecord>,
}

impl RegistryState {
    pub fn apply(&mut self, event: &Event) -> Result<Applied, RegistryError> {
        match event {
            Event::Register { record } => {
                if self.records.contains_key(&record.benchmark_id) {
                    return Err(RegistryError::Conflict(record.benchmark_id.clone()));
                }
                let mut record = record.clone();
                record.status = BenchmarkStatus::Private;
                record.expired_at = None;
                self.records.insert(record.benchmark_id.clone(), record);
                Ok(Applied::Changed)
            }
            Event::Expire { benchmark_id, at } => {
                let record = self
                    .records
                    .get_mut(benchmark_id)
                    .ok_or_else(|| RegistryError::Unknown(benchmark_id.clone()))?;
                if record.status == BenchmarkStatus::Expired {
                    return Ok(Applied::NoOp);
                }
                record.status = BenchmarkStatus::Expired;
                record.expired_at = Some(*at);
                Ok(Applied::Changed)
            }
        }
    }

    pub fn get(&self, id: &str) -> Option<&RegistryRecord> {
        self.records.get(id)
    }

    pub fn records(&self) -> impl Iterator<Item = &RegistryRecord> {
        self.records.values()
    }
}

/// The registry behind a `registry.log` file.
///
/// Writers hold an exclusive lock on the log while they re-read it and
/// append, so concurrent writers serialize; readers replay whatever complete
/// lines exist.
#[derive(Debug)]
pub struct Registry {
    log_path: PathBuf,
    state: RegistryState,
}

impl Registry {
    /// Replays the log (a missing log is an empty registry) and verifies
    /// every registered benchmark file against its digest.
    pub fn open(log_path: impl Into<PathBuf>) -> Result<Self, RegistryError> {
        let registry = Self::open_unverified(log_path)?;
        registry.verify_all()?;
        Ok(registry)
    }

    /// Replays the log without touching benchmark files.
    pub fn open_unverified(log_path: impl Into<PathBuf>) -> Result<Self, RegistryError> {
        let log_path = log_path.into();
        let state = replay(&log_path)?;
        Ok(Self { log_path, state })
    }

    pub fn log_path(&self) -> &Path {
        &self.log_path
    }

    pub fn state(&self) -> &RegistryState {
        &self.state
    }

    pub fn get(&self, id: &str) -> Option<&RegistryRecord> {
        self.state.get(id)
    }

    /// Records ordered by benchmark id.
    pub fn records(&self) -> Vec<&RegistryRecord> {
        self.state.records().collect()
    }

    fn base_dir(&self) -> PathBuf {
        self.log_path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."))
    }

    /// Absolute location of a record's benchmark file.
    pub fn resolve(&self, record: &RegistryRecord) -> PathBuf {
        if record.path.is_absolute() {
            record.path.clone()
        } else {
            self.base_dir().join(&record.path)
        }
    }

    pub fn verify(&self, record: &RegistryRecord) -> Result<(), RegistryError> {
        let path = self.resolve(record);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let found = sha256_hex(&bytes);
        if found != record.content_digest {
            return Err(RegistryError::Integrity {
                benchmark_id: record.benchmark_id.clone(),
                path,
                expected: record.content_digest.clone(),
                found,
            });
        }
        Ok(())
    }

    pub fn verify_all(&self) -> Result<(), RegistryError> {
        self.state.records().try_for_each(|r| self.verify(r))
    }

    /// Checks that `path` holds exactly the registered content of `id`.
    pub fn verify_file(&self, id: &str, path: &Path) -> Result<(), RegistryError> {
        let record = self
            .get(id)
            .ok_or_else(|| RegistryError::Unknown(id.to_string()))?;
        let bytes = fs::read(path).map_err(io_err(path))?;
        let found = sha256_hex(&bytes);
        if found != record.content_digest {
            return Err(RegistryError::Integrity {
                benchmark_id: id.to_string(),
                path: path.to_path_buf(),
                expected: record.content_digest.clone(),
                found,
            });
        }
        Ok(())
    }

    /// Registers the benchmark file at `bench_path` as private.
    pub fn register(&mut self, bench_path: &Path) -> Result<RegistryRecord, RegistryError> {
        let bytes = fs::read(bench_path).map_err(io_err(bench_path))?;
        let bench = read_benchmark(bench_path)?;
        let record = RegistryRecord {
            benchmark_id: bench.header.benchmark_id.clone(),
            period_label: bench.header.period_label.clone(),
            domain: bench.header.domain,
            task_kind: bench.header.task_kind,
            status: BenchmarkStatus::Private,
            created: bench.header.created,
            expired_at: None,
            digest_algorithm: DIGEST_ALGORITHM.to_string(),
            content_digest: sha256_hex(&bytes),
            path: self.stored_path(bench_path),
        };
        self.append(Event::Register {
            record: record.clone(),
        })?;
        Ok(record)
    }

    /// Marks a private benchmark expired. Expiring an expired benchmark
    /// changes nothing and logs a warning.
    pub fn expire(&mut self, id: &str, at: DateTime<Utc>) -> Result<RegistryRecord, RegistryError> {
        let applied = self.append(Event::Expire {
            benchmark_id: id.to_string(),
            at,
        })?;
        if applied == Applied::NoOp {
            warn!(benchmark = id, "already expired; nothing to do");
        }
        Ok(self.get(id).expect("record exists after expire").clone())
    }

    /// Under the log lock: replay, apply, and append the event if it
    /// changed anything.
    fn append(&mut self, event: Event) -> Result<Applied, RegistryError> {
        let path = self.log_path.clone();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let mut file: File = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        file.lock().map_err(io_err(&path))?;
        let mut state = replay(&path)?;
        let applied = state.apply(&event)?;
        if applied == Applied::Changed {
            let mut line = serde_json::to_vec(&event).map_err(|source| RegistryError::Json {
                path: path.clone(),
                source,
            })?;
            line.push(b'\n');
            file.write_all(&line).map_err(io_err(&path))?;
            file.sync_all().map_err(io_err(&path))?;
        }
        self.state = state;
        Ok(applied)
    }

    /// Paths under the log's directory are stored relative to it so the
    /// registry can move together with its benchmarks.
    fn stored_path(&self, bench_path: &Path) -> PathBuf {
        let abs = fs::canonicalize(bench_path).unwrap_or_else(|_| bench_path.to_path_buf());
        match fs::canonicalize(self.base_dir()) {
            Ok(base) => abs
                .strip_prefix(&base)
                .map(Path::to_path_buf)
                .unwrap_or(abs),
            Err(_) => abs,
        }
    }

    /// Builds a pair configuration for the private benchmarks of
    /// `private_period`.
    ///
    /// With `promote_expired`, expired benchmarks (from `public_period` if
    /// given, otherwise from any other period) act as the public side and
    /// are paired by (domain, task). Everything left over is listed as
    /// unmatched.
    pub fn pair_config(
        &self,
        private_period: &str,
        public_period: Option<&str>,
        promote_expired: bool,
    ) -> Result<PairConfig, RegistryError> {
        let key = |r: &RegistryRecord| format!("{}-{}", r.domain, r.task_kind);
        let mut private: BTreeMap<String, &RegistryRecord> = BTreeMap::new();
        let mut public: BTreeMap<String, &RegistryRecord> = BTreeMap::new();
        for r in self.state.records() {
            if r.period_label == private_period {
                if let Some(prev) = private.insert(key(r), r) {
                    return Err(RegistryError::AmbiguousPair(format!(
                        "{} and {} share {} in period {private_period}",
                        prev.benchmark_id,
                        r.benchmark_id,
                        key(r)
                    )));
                }
            } else if promote_expired
                && r.status == BenchmarkStatus::Expired
                && public_period.is_none_or(|p| p == r.period_label)
            {
                if let Some(prev) = public.insert(key(r), r) {
                    return Err(RegistryError::AmbiguousPair(format!(
                        "{} and {} are both expired candidates for {}; pass a public period",
                        prev.benchmark_id,
                        r.benchmark_id,
                        key(r)
                    )));
                }
            }
        }
        let mut config = PairConfig::default();
        for (k, priv_rec) in &private {
            match public.remove(k) {
                Some(pub_rec) => {
                    config.pairs.insert(
                        k.clone(),
                        PairRef {
                            public: pub_rec.benchmark_id.clone(),
                            private: priv_rec.benchmark_id.clone(),
                        },
                    );
                }
                None => config.unmatched_private.push(priv_rec.benchmark_id.clone()),
            }
        }
        config.unmatched_public = public.values().map(|r| r.benchmark_id.clone()).collect();
        Ok(config)
    }
}

fn replay(path: &Path) -> Result<RegistryState, RegistryError> {
    let mut state = RegistryState::default();
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(state),
        Err(e) => return Err(io_err(path)(e)),
    };
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| RegistryError::MalformedLog {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let event: Event = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        state.apply(&event).map_err(|e| malformed(e.to_string()))?;
    }
    Ok(state)
}
