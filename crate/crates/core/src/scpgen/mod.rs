//! Sequencing / Cloze / Prediction (SCP) test-case generation.
//!
//! Every generator is a pure function of its inputs and a [`ScpRng`] derived
//! from the benchmark seed, so regenerating a benchmark reproduces it byte for
//! byte.

mod benchmark;
mod fragment;
pub mod rng;
mod sentences;
mod tasks;
mod tfidf;

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusError, Domain};

pub use benchmark::{
    article_cases, benchmark_id, build_benchmark, build_from_articles, read_benchmark,
    write_benchmark, BuildRequest,
};
pub use fragment::{fragment_at, sample_fragment, FragmentOutcome, Rejection};
pub use rng::ScpRng;
pub use sentences::split_sentences;
pub use tasks::{
    apply_candidate, gen_cloze, gen_prediction, gen_sequencing, generate, GenContext, Ineligible,
};
pub use tfidf::{tfidf_rank, tokenize, Ranked};

/// Pins the generation procedure: sentence splitting, task layouts, the RNG
/// stream and the prompt template. Any change to those bumps this string.
pub const GENERATOR_VERSION: &str = "scp-1.0+chacha20-sha256+prompt-1";

#[derive(Debug, Error)]
pub enum ScpError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid fragment config: {0}")]
    InvalidConfig(String),
    #[error("no eligible fragments for {task_kind} in domain {domain}")]
    EmptyBenchmark { domain: Domain, task_kind: TaskKind },
    #[error("invalid benchmark file, line {line}: {message}")]
    InvalidBenchmark { line: usize, message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Fragment sampling and filtering thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FragmentConfig {
    /// Paragraphs per fragment.
    pub n_paragraphs: usize,
    /// Minimum whitespace-delimited words per fragment.
    pub min_words: usize,
    /// Maximum share of tokens that are math placeholders.
    pub max_math_ratio: f64,
    pub min_sentences_seq: usize,
    pub min_sentences_cloze: usize,
    pub min_sentences_pred: usize,
}

impl Default for FragmentConfig {
    fn default() -> Self {
        Self {
            n_paragraphs: 1,
            min_words: 80,
            max_math_ratio: 0.15,
            min_sentences_seq: 4,
            min_sentences_cloze: 6,
            min_sentences_pred: 3,
        }
    }
}

impl FragmentConfig {
    pub fn validate(&self) -> Result<(), ScpError> {
        if self.n_paragraphs < 1 {
            return Err(ScpError::InvalidConfig("n_paragraphs must be >= 1".into()));
        }
        if self.min_words < 1 {
            return Err(ScpError::InvalidConfig("min_words must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.max_math_ratio) {
            return Err(ScpError::InvalidConfig(
                "max_math_ratio must lie in [0, 1]".into(),
            ));
        }
        if self.min_sentences_seq < 4 || self.min_sentences_cloze < 6 || self.min_sentences_pred < 3
        {
            return Err(ScpError::InvalidConfig(
                "per-task sentence minimums cannot go below 4 / 6 / 3".into(),
            ));
        }
        Ok(())
    }

    /// Sentence floor shared by all tasks, applied while sampling.
    pub fn min_sentences(&self) -> usize {
        self.min_sentences_seq
            .min(self.min_sentences_cloze)
            .min(self.min_sentences_pred)
    }

    pub fn min_sentences_for(&self, kind: TaskKind) -> usize {
        match kind {
            TaskKind::Sequencing => self.min_sentences_seq,
            TaskKind::Cloze => self.min_sentences_cloze,
            TaskKind::Prediction => self.min_sentences_pred,
        }
    }

    /// Hex digest of the canonical JSON form, recorded in artifacts.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        crate::digest::sha256_hex(&json)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Sequencing,
    Cloze,
    Prediction,
}

impl TaskKind {
    pub const ALL: [TaskKind; 3] = [TaskKind::Sequencing, TaskKind::Cloze, TaskKind::Prediction];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Sequencing => "sequencing",
            TaskKind::Cloze => "cloze",
            TaskKind::Prediction => "prediction",
        }
    }

    pub fn code(self) -> char {
        match self {
            TaskKind::Sequencing => 's',
            TaskKind::Cloze => 'c',
            TaskKind::Prediction => 'p',
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s" | "sequencing" => Ok(TaskKind::Sequencing),
            "c" | "cloze" => Ok(TaskKind::Cloze),
            "p" | "prediction" => Ok(TaskKind::Prediction),
            other => Err(format!("unknown task kind `{other}` (expected s, c or p)")),
        }
    }
}

/// A contiguous run of paragraphs split into sentences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    pub article_id: String,
    /// Half-open paragraph range `[start, end)`.
    pub paragraph_span: [usize; 2],
    pub sentences: Vec<String>,
    pub word_count: usize,
}

impl Fragment {
    /// Sentences joined by single spaces.
    pub fn text(&self) -> String {
        self.sentences.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub article_id: String,
    pub paragraph_span: [usize; 2],
    pub seed: u64,
    pub generator_version: String,
}

/// One four-candidate selection item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub case_id: String,
    pub task_kind: TaskKind,
    pub stem: String,
    pub candidates: Vec<String>,
    pub correct_index: usize,
    pub domain: Domain,
    pub provenance: Provenance,
}

impl TestCase {
    pub fn validate(&self) -> Result<(), String> {
        if self.candidates.len() != 4 {
            return Err(format!("{} candidates, expected 4", self.candidates.len()));
        }
        for i in 0..4 {
            for j in i + 1..4 {
                if self.candidates[i] == self.candidates[j] {
                    return Err(format!("candidates {i} and {j} are identical"));
                }
            }
        }
        if self.correct_index > 3 {
            return Err(format!("correct_index {} out of range", self.correct_index));
        }
        for text in std::iter::once(&self.stem).chain(&self.candidates) {
            if text.contains("{{") || text.contains("}}") {
                return Err("unreplaced template marker".into());
            }
        }
        Ok(())
    }

    /// Letter of the keyed answer.
    pub fn correct_letter(&self) -> char {
        (b'A' + self.correct_index as u8) as char
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkStatus {
    Private,
    Expired,
}

impl fmt::Display for BenchmarkStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchmarkStatus::Private => "private",
            BenchmarkStatus::Expired => "expired",
        })
    }
}

/// Benchmark fields other than the items; the first line of a benchmark file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkHeader {
    pub benchmark_id: String,
    pub period_label: String,
    pub domain: Domain,
    pub task_kind: TaskKind,
    pub seed: u64,
    pub status: BenchmarkStatus,
    pub created: DateTime<Utc>,
    pub generator_version: String,
    pub tool_version: String,
    pub config_digest: String,
    pub item_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Benchmark {
    pub header: BenchmarkHeader,
    pub items: Vec<TestCase>,
}

impl Benchmark {
    pub fn id(&self) -> &str {
        &self.header.benchmark_id
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.header.item_count != self.items.len() {
            return Err(format!(
                "header says {} items, found {}",
                self.header.item_count,
                self.items.len()
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for item in &self.items {
            if item.domain != self.header.domain || item.task_kind != self.header.task_kind {
                return Err(format!(
                    "item {} does not match benchmark domain/task",
                    item.case_id
                ));
            }
            if !seen.insert(item.case_id.as_str()) {
                return Err(format!("duplicate case_id {}", item.case_id));
            }
            item.validate()
                .map_err(|e| format!("item {}: {e}", item.case_id))?;
        }
        Ok(())
    }
}
