//! Article ingestion: arXiv listings, source extraction and the on-disk corpus.

mod extract;
mod listing;
mod source;
mod store;
pub mod synth;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use extract::{extract_text, Extracted, SourceFormat, MATH_PLACEHOLDER};
pub use listing::{
    parse_feed, Clock, ListingClient, ListingConfig, ListingEntry, ListingPage, SystemClock,
    Transport, TransportError, UreqTransport, ARXIV_API_URL,
};
pub use source::extract_source;
pub use store::CorpusStore;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("request to {url} failed: {message}")]
    Network {
        url: String,
        message: String,
        retryable: bool,
    },
    #[error("malformed feed at byte {offset}: {message}")]
    Parse { offset: u64, message: String },
    #[error("invalid window: {start} is after {end}")]
    InvalidWindow { start: NaiveDate, end: NaiveDate },
    #[error("unknown domain code `{0}`")]
    UnknownDomain(String),
    #[error("article {0} is already stored in this corpus")]
    Conflict(String),
    #[error("invalid article {id}: {reason}")]
    InvalidArticle { id: String, reason: String },
    #[error("no usable source: {0}")]
    NoSource(String),
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

impl CorpusError {
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            CorpusError::Network {
                retryable: true,
                ..
            }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.into(),
            source,
        }
    }
}

/// The eight arXiv subject groups a corpus is partitioned into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Domain {
    #[serde(rename = "cs")]
    Cs,
    #[serde(rename = "econ")]
    Econ,
    #[serde(rename = "eess")]
    Eess,
    #[serde(rename = "math")]
    Math,
    #[serde(rename = "physics")]
    Physics,
    #[serde(rename = "q-bio")]
    QBio,
    #[serde(rename = "q-fin")]
    QFin,
    #[serde(rename = "stat")]
    Stat,
}

impl Domain {
    pub const ALL: [Domain; 8] = [
        Domain::Cs,
        Domain::Econ,
        Domain::Eess,
        Domain::Math,
        Domain::Physics,
        Domain::QBio,
        Domain::QFin,
        Domain::Stat,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Cs => "cs",
            Domain::Econ => "econ",
            Domain::Eess => "eess",
            Domain::Math => "math",
            Domain::Physics => "physics",
            Domain::QBio => "q-bio",
            Domain::QFin => "q-fin",
            Domain::Stat => "stat",
        }
    }

    /// arXiv category patterns that make up this group in a listing query.
    pub fn category_patterns(self) -> &'static [&'static str] {
        match self {
            Domain::Cs => &["cs.*"],
            Domain::Econ => &["econ.*"],
            Domain::Eess => &["eess.*"],
            Domain::Math => &["math.*"],
            Domain::Physics => &[
                "astro-ph*",
                "cond-mat*",
                "gr-qc",
                "hep-ex",
                "hep-lat",
                "hep-ph",
                "hep-th",
                "math-ph",
                "nlin*",
                "nucl-ex",
                "nucl-th",
                "physics*",
                "quant-ph",
            ],
            Domain::QBio => &["q-bio*"],
            Domain::QFin => &["q-fin*"],
            Domain::Stat => &["stat*"],
        }
    }

    /// Maps an arXiv category such as `cs.LG` or `hep-th` to its group.
    pub fn from_category(category: &str) -> Option<Domain> {
        let archive = category.split('.').next().unwrap_or(category);
        match archive {
            "cs" => Some(Domain::Cs),
            "econ" => Some(Domain::Econ),
            "eess" => Some(Domain::Eess),
            "math" => Some(Domain::Math),
            "q-bio" => Some(Domain::QBio),
            "q-fin" => Some(Domain::QFin),
            "stat" => Some(Domain::Stat),
            "astro-ph" | "cond-mat" | "gr-qc" | "hep-ex" | "hep-lat" | "hep-ph" | "hep-th"
            | "math-ph" | "nlin" | "nucl-ex" | "nucl-th" | "physics" | "quant-ph" => {
                Some(Domain::Physics)
            }
            _ => None,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Domain {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Domain::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| CorpusError::UnknownDomain(s.to_string()))
    }
}

/// Inclusive range of submission dates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self, CorpusError> {
        if start > end {
            return Err(CorpusError::InvalidWindow { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleMeta {
    pub arxiv_id: String,
    pub domain: Domain,
    pub submitted: NaiveDate,
    pub title: String,
}

/// A cleaned article: document-ordered paragraphs with math replaced by
/// [`MATH_PLACEHOLDER`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    #[serde(flatten)]
    pub meta: ArticleMeta,
    pub paragraphs: Vec<String>,
    pub raw_char_count: usize,
}

impl Article {
    pub fn from_extracted(meta: ArticleMeta, extracted: Extracted) -> Self {
        Self {
            meta,
            paragraphs: extracted.paragraphs,
            raw_char_count: extracted.raw_char_count,
        }
    }

    pub fn id(&self) -> &str {
        &self.meta.arxiv_id
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let invalid = |reason: &str| CorpusError::InvalidArticle {
            id: self.meta.arxiv_id.clone(),
            reason: reason.to_string(),
        };
        if self.meta.arxiv_id.trim().is_empty() {
            return Err(invalid("empty arxiv_id"));
        }
        for p in &self.paragraphs {
            if p.trim().is_empty() {
                return Err(invalid("empty paragraph"));
            }
            if p.contains('\n') {
                return Err(invalid("paragraph contains a newline"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub period_label: String,
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    pub counts: BTreeMap<Domain, usize>,
    /// Articles stored from their abstract because source extraction failed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub abstract_only: Vec<String>,
}

impl CorpusManifest {
    pub fn new(period_label: impl Into<String>, window: DateWindow) -> Self {
        Self {
            period_label: period_label.into(),
            window_start: window.start,
            window_end: window.end,
            counts: BTreeMap::new(),
            abstract_only: Vec::new(),
        }
    }

    pub fn window(&self) -> DateWindow {
        DateWindow {
            start: self.window_start,
            end: self.window_end,
        }
    }
}
