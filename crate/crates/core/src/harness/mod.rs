//! Exact-match evaluation: prompt rendering, model queries, answer extraction
//! and accuracy with a binomial standard error.

mod client;
mod extract;
mod mock;
mod prompt;
mod run;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Domain;
use crate::scpgen::{BenchmarkHeader, BenchmarkStatus, TaskKind};

pub use client::{query_model, HttpBackend, QueryError, QueryErrorKind};
pub use extract::extract_answer;
pub use mock::{MockBackend, MockProfile};
pub use prompt::{instruction, render_prompt};
pub use run::{
    load_runs, read_run, run_path, score_benchmark, write_run, EvalOptions, ModelBackend,
    EXPIRED_RERUN_TAG, INTERRUPTED_TAG,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("credential variable `{0}` is not set")]
    MissingCredential(String),
    #[error("model {model_id}: authentication failed: {message}")]
    Auth { model_id: String, message: String },
    #[error("benchmark {0} has no items")]
    EmptyBenchmark(String),
    #[error("run aborted as unreliable: {failed} of {total} items failed in transport")]
    Unreliable { failed: usize, total: usize },
    #[error("run file {path}: {message}")]
    InvalidRun { path: PathBuf, message: String },
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

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    /// Total attempts per item, including the first.
    pub max_attempts: u32,
    /// Seconds before the first retry; doubled on each further retry.
    pub base_backoff: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            base_backoff: 1.0,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based).
    pub fn backoff(&self, retry: u32) -> Duration {
        let factor = 2f64.powi(retry.saturating_sub(1).min(30) as i32);
        Duration::from_secs_f64((self.base_backoff * factor).max(0.0))
    }
}

/// How to reach one model. `mock` selects an in-process answerer instead of
/// the HTTP endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub model_id: String,
    /// Chat-completion URL, e.g. `https://host/v1/chat/completions`.
    pub endpoint_url: String,
    /// Model name sent in the request body; defaults to `model_id`.
    pub api_model: Option<String>,
    /// Environment variable holding the bearer token; empty for none.
    pub auth_token_env_var: String,
    pub temperature: f64,
    pub max_new_tokens: u32,
    /// Seconds per request.
    pub request_timeout: f64,
    pub max_in_flight: usize,
    pub retry_policy: RetryPolicy,
    pub mock: Option<MockProfile>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            model_id: String::new(),
            endpoint_url: String::new(),
            api_model: None,
            auth_token_env_var: "OPENAI_API_KEY".into(),
            temperature: 0.0,
            max_new_tokens: 50,
            request_timeout: 60.0,
            max_in_flight: 4,
            retry_policy: RetryPolicy::default(),
            mock: None,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidConfig(m.to_string()));
        if self.model_id.trim().is_empty() {
            return bad("model_id is empty");
        }
        if self.model_id.contains(['/', '\\']) || self.model_id.starts_with('.') {
            return bad("model_id must be usable as a directory name");
        }
        if self.temperature != 0.0 {
            return bad("temperature must be 0 (greedy decoding)");
        }
        if self.max_new_tokens < 1 {
            return bad("max_new_tokens must be >= 1");
        }
        if self.max_in_flight < 1 {
            return bad("max_in_flight must be >= 1");
        }
        if self.retry_policy.max_attempts < 1 {
            return bad("retry_policy.max_attempts must be >= 1");
        }
        if self.request_timeout.is_nan() || self.request_timeout <= 0.0 {
            return bad("request_timeout must be positive");
        }
        if self.retry_policy.base_backoff.is_nan() || self.retry_policy.base_backoff < 0.0 {
            return bad("retry_policy.base_backoff must be >= 0");
        }
        if self.mock.is_none() && self.endpoint_url.is_empty() {
            return bad("endpoint_url is required unless a mock profile is set");
        }
        if let Some(mock) = &self.mock {
            mock.validate().map_err(HarnessError::InvalidConfig)?;
        }
        Ok(())
    }
}

/// An extracted answer letter, or `none` when nothing matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    A,
    B,
    C,
    D,
    #[serde(rename = "none")]
    None,
}

impl Answer {
    pub fn from_index(i: usize) -> Answer {
        match i {
            0 => Answer::A,
            1 => Answer::B,
            2 => Answer::C,
            3 => Answer::D,
            _ => Answer::None,
        }
    }

    pub fn index(self) -> Option<usize> {
        match self {
            Answer::A => Some(0),
            Answer::B => Some(1),
            Answer::C => Some(2),
            Answer::D => Some(3),
            Answer::None => None,
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::A => "A",
            Answer::B => "B",
            Answer::C => "C",
            Answer::D => "D",
            Answer::None => "none",
        })
    }
}

impl FromStr for Answer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Answer::A),
            "B" => Ok(Answer::B),
            "C" => Ok(Answer::C),
            "D" => Ok(Answer::D),
            "NONE" => Ok(Answer::None),
            other => Err(format!("not an answer letter: `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemResult {
    pub case_id: String,
    pub raw_output: String,
    pub extracted: Answer,
    pub correct: bool,
    /// Milliseconds; mocks report 0.
    pub latency: u64,
    /// Transport failure after all retries; such items count as incorrect.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ItemResult {
    pub fn scored(case_id: &str, raw_output: String, correct_index: usize, latency: u64) -> Self {
        let extracted = extract_answer(&raw_output);
        Self {
            case_id: case_id.to_string(),
            raw_output,
            extracted,
            correct: extracted.index() == Some(correct_index),
            latency,
            error: None,
        }
    }

    pub fn failed(case_id: &str, error: String, latency: u64) -> Self {
        Self {
            case_id: case_id.to_string(),
            raw_output: String::new(),
            extracted: Answer::None,
            correct: false,
            latency,
            error: Some(error),
        }
    }
}

/// Where a run's benchmark came from; copied from the benchmark header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkRef {
    pub benchmark_id: String,
    pub period_label: String,
    pub domain: Domain,
    pub task_kind: TaskKind,
    pub seed: u64,
    pub status: BenchmarkStatus,
    pub generator_version: String,
    pub config_digest: String,
}

impl From<&BenchmarkHeader> for BenchmarkRef {
    fn from(h: &BenchmarkHeader) -> Self {
        Self {
            benchmark_id: h.benchmark_id.clone(),
            period_label: h.period_label.clone(),
            domain: h.domain,
            task_kind: h.task_kind,
            seed: h.seed,
            status: h.status,
            generator_version: h.generator_version.clone(),
            config_digest: h.config_digest.clone(),
        }
    }
}

/// One model evaluated on one benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRun {
    pub model_id: String,
    pub benchmark_id: String,
    pub benchmark: BenchmarkRef,
    /// Model configuration echo (the credential itself is never stored).
    pub config: ModelConfig,
    pub tool_version: String,
    #[serde(default)]
    pub tags: Vec<String>,
    /// Ordered by case_id.
    pub items: Vec<ItemResult>,
    pub n: usize,
    pub n_correct: usize,
    pub n_failed: usize,
    pub accuracy_pct: f64,
    pub se_pct: f64,
}

impl EvalRun {
    /// Recomputes `n`, `n_correct`, `n_failed`, `accuracy_pct` and `se_pct`
    /// from the items.
    pub fn recompute(&mut self) {
        self.n = self.items.len();
        self.n_correct = self.items.iter().filter(|i| i.correct).count();
        self.n_failed = self.items.iter().filter(|i| i.error.is_some()).count();
        let (acc, se) = accuracy_and_se(self.n_correct, self.n);
        self.accuracy_pct = acc;
        self.se_pct = se;
    }

    /// Checks the stored aggregates and per-item invariants against the items.
    pub fn verify(&self) -> Result<(), String> {
        let mut fresh = self.clone();
        fresh.recompute();
        if (fresh.n, fresh.n_correct, fresh.n_failed) != (self.n, self.n_correct, self.n_failed)
            || fresh.accuracy_pct.to_bits() != self.accuracy_pct.to_bits()
            || fresh.se_pct.to_bits() != self.se_pct.to_bits()
        {
            return Err("aggregates do not match the item records".into());
        }
        for item in &self.items {
            if item.extracted == Answer::None && item.correct {
                return Err(format!(
                    "item {} is correct without an answer",
                    item.case_id
                ));
            }
        }
        if self.benchmark_id != self.benchmark.benchmark_id {
            return Err("benchmark_id disagrees with the benchmark reference".into());
        }
        Ok(())
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t == tag)
    }

    /// Accuracy as a fraction in `[0, 1]`.
    pub fn accuracy_fraction(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.n_correct as f64 / self.n as f64
        }
    }
}

/// Binomial (Wald) standard error in percentage points: `100·sqrt(p(1-p)/n)`.
pub fn se_pct(p: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    100.0 * (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

/// `(accuracy_pct, se_pct)` for `correct` of `n`; both zero when `n == 0`.
pub fn accuracy_and_se(correct: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let p = correct as f64 / n as f64;
    (100.0 * p, se_pct(p, n))
}
