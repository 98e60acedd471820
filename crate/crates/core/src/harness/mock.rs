//! In-process mock models for offline runs and tests.
//!
//! Skill-based profiles decide correctness per source passage (article,
//! paragraph span, task kind) rather than per generated item, the way a real
//! model tends to either understand a passage or not regardless of how its
//! options were shuffled. The generation seed therefore does not enter the
//! decision, only the mock's own seed does.

use serde::{Deserialize, Serialize};

use super::client::QueryError;
use super::run::ModelBackend;
use crate::digest::{hash_parts, unit_interval};
use crate::scpgen::{BenchmarkHeader, TestCase};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum MockProfile {
    AlwaysCorrect,
    /// Uniform letter per case id.
    UniformRandom {
        seed: u64,
    },
    /// Correct on a `p` share of passages.
    Skill {
        p: f64,
        seed: u64,
    },
    /// Skill `memorized_p` on memorized benchmarks or cases, `base_p` elsewhere.
    Contaminated {
        seed: u64,
        #[serde(default = "default_memorized_p")]
        memorized_p: f64,
        #[serde(default = "default_base_p")]
        base_p: f64,
        #[serde(default)]
        memorized_benchmarks: Vec<String>,
        #[serde(default)]
        memorized_cases: Vec<String>,
    },
}

fn default_memorized_p() -> f64 {
    0.9
}

fn default_base_p() -> f64 {
    0.3
}

impl MockProfile {
    pub fn validate(&self) -> Result<(), String> {
        let check = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(format!("mock {name} must lie in [0, 1], got {p}"))
            }
        };
        match self {
            MockProfile::Skill { p, .. } => check("p", *p),
            MockProfile::Contaminated {
                memorized_p,
                base_p,
                ..
            } => {
                check("memorized_p", *memorized_p)?;
                check("base_p", *base_p)
            }
            _ => Ok(()),
        }
    }
}

pub struct MockBackend {
    profile: MockProfile,
}

impl MockBackend {
    pub fn new(profile: MockProfile) -> Self {
        Self { profile }
    }

    /// The letter index this mock picks for `case`.
    pub fn choose(&self, bench: &BenchmarkHeader, case: &TestCase) -> usize {
        match &self.profile {
            MockProfile::AlwaysCorrect => case.correct_index,
            MockProfile::UniformRandom { seed } => {
                let h = hash_parts(&[
                    b"mock-uniform",
                    &seed.to_le_bytes(),
                    case.case_id.as_bytes(),
                ]);
                (h[0] % 4) as usize
            }
            MockProfile::Skill { p, seed } => skilled(*p, *seed, case),
            MockProfile::Contaminated {
                seed,
                memorized_p,
                base_p,
                memorized_benchmarks,
                memorized_cases,
            } => {
                let memorized = memorized_benchmarks.contains(&bench.benchmark_id)
                    || memorized_cases.contains(&case.case_id);
                skilled(if memorized { *memorized_p } else { *base_p }, *seed, case)
            }
        }
    }
}

fn skilled(p: f64, seed: u64, case: &TestCase) -> usize {
    let prov = &case.provenance;
    let passage: [&[u8]; 6] = [
        b"mock-skill",
        &seed.to_le_bytes(),
        prov.article_id.as_bytes(),
        &(prov.paragraph_span[0] as u64).to_le_bytes(),
        &(prov.paragraph_span[1] as u64).to_le_bytes(),
        case.task_kind.as_str().as_bytes(),
    ];
    if unit_interval(&passage) < p {
        return case.correct_index;
    }
    let h = hash_parts(&[b"mock-wrong", &seed.to_le_bytes(), case.case_id.as_bytes()]);
    let offset = 1 + (h[0] % 3) as usize;
    (case.correct_index + offset) % 4
}

impl ModelBackend for MockBackend {
    fn complete(
        &self,
        bench: &BenchmarkHeader,
        case: &TestCase,
        _prompt: &str,
    ) -> Result<String, QueryError> {
        let letter = (b'A' + self.choose(bench, case) as u8) as char;
        Ok(format!("Answer: {letter}"))
    }

    fn reports_latency(&self) -> bool {
        false
    }
}
