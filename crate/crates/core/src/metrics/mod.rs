//! Rugged scores, rank correlations and regeneration stability.
//!
//! Scores are accuracy fractions in `[0, 1]`; reports render percentages.

mod correlation;
mod pairs;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use correlation::{average_ranks, kendall, pearson, spearman};
pub use pairs::{build_table, compute_reports, PairConfig, PairRef, RsReport};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("model `{0}` is not in the table")]
    UnknownModel(String),
    #[error("no score for model `{model}` on benchmark `{benchmark}`")]
    MissingScore { model: String, benchmark: String },
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("not enough data: {0}")]
    Insufficient(String),
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("input contains a non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Public,
    Private,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkDesc {
    pub id: String,
    pub visibility: Visibility,
    /// Links one public and one private benchmark of the same domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_id: Option<String>,
}

/// Models × benchmarks accuracy matrix; `None` marks an unscored cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfTable {
    pub models: Vec<String>,
    pub benchmarks: Vec<BenchmarkDesc>,
    /// `scores[model][benchmark]`
    pub scores: Vec<Vec<Option<f64>>>,
}

/// A pair as column indices into the table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCols {
    pub pair_id: String,
    pub public: usize,
    pub private: usize,
}

impl PerfTable {
    pub fn new(models: Vec<String>, benchmarks: Vec<BenchmarkDesc>) -> Self {
        let scores = vec![vec![None; benchmarks.len()]; models.len()];
        Self {
            models,
            benchmarks,
            scores,
        }
    }

    pub fn model_index(&self, model: &str) -> Result<usize, MetricsError> {
        self.models
            .iter()
            .position(|m| m == model)
            .ok_or_else(|| MetricsError::UnknownModel(model.to_string()))
    }

    pub fn benchmark_index(&self, id: &str) -> Option<usize> {
        self.benchmarks.iter().position(|b| b.id == id)
    }

    pub fn set(&mut self, model: &str, benchmark: &str, score: f64) -> Result<(), MetricsError> {
        let m = self.model_index(model)?;
        let b = self.benchmark_index(benchmark).ok_or_else(|| {
            MetricsError::InvalidTable(format!("unknown benchmark `{benchmark}`"))
        })?;
        self.scores[m][b] = Some(score);
        Ok(())
    }

    pub fn score(&self, model: usize, bench: usize) -> Result<f64, MetricsError> {
        self.scores[model][bench].ok_or_else(|| MetricsError::MissingScore {
            model: self.models[model].clone(),
            benchmark: self.benchmarks[bench].id.clone(),
        })
    }

    /// Shape, score range, and that every pair id links exactly one public
    /// and one private benchmark.
    pub fn validate(&self) -> Result<(), MetricsError> {
        if self.scores.len() != self.models.len()
            || self.scores.iter().any(|r| r.len() != self.benchmarks.len())
        {
            return Err(MetricsError::InvalidTable(
                "score matrix shape mismatch".into(),
            ));
        }
        if let Some(v) = self
            .scores
            .iter()
            .flatten()
            .flatten()
            .find(|v| !v.is_finite() || **v < 0.0)
        {
            return Err(MetricsError::InvalidTable(format!(
                "score {v} is negative or not finite"
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for b in &self.benchmarks {
            if !seen.insert(&b.id) {
                return Err(MetricsError::InvalidTable(format!(
                    "benchmark `{}` listed twice",
                    b.id
                )));
            }
        }
        let mut by_pair: BTreeMap<&str, Vec<Visibility>> = BTreeMap::new();
        for b in &self.benchmarks {
            if let Some(p) = &b.pair_id {
                by_pair.entry(p).or_default().push(b.visibility);
            }
        }
        for (pair, vis) in by_pair {
            let publics = vis.iter().filter(|v| **v == Visibility::Public).count();
            if vis.len() != 2 || publics != 1 {
                return Err(MetricsError::InvalidTable(format!(
                    "pair `{pair}` must link exactly one public and one private benchmark"
                )));
            }
        }
        Ok(())
    }

    /// Pairs ordered by pair id.
    pub fn pairs(&self) -> Vec<PairCols> {
        let mut map: BTreeMap<&str, (Option<usize>, Option<usize>)> = BTreeMap::new();
        for (i, b) in self.benchmarks.iter().enumerate() {
            if let Some(p) = &b.pair_id {
                let e = map.entry(p).or_default();
                match b.visibility {
                    Visibility::Public => e.0 = Some(i),
                    Visibility::Private => e.1 = Some(i),
                }
            }
        }
        map.into_iter()
            .filter_map(|(id, (p, c))| {
                Some(PairCols {
                    pair_id: id.to_string(),
                    public: p?,
                    private: c?,
                })
            })
            .collect()
    }

    pub fn unmatched(&self, visibility: Visibility) -> Vec<usize> {
        self.benchmarks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.visibility == visibility && b.pair_id.is_none())
            .map(|(i, _)| i)
            .collect()
    }

    /// Paired and unmatched private benchmarks.
    pub fn private_columns(&self) -> Vec<usize> {
        self.benchmarks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.visibility == Visibility::Private)
            .map(|(i, _)| i)
            .collect()
    }

    /// The same table with every public tag turned private and vice versa.
    pub fn swapped(&self) -> PerfTable {
        let mut t = self.clone();
        for b in &mut t.benchmarks {
            b.visibility = match b.visibility {
                Visibility::Public => Visibility::Private,
                Visibility::Private => Visibility::Public,
            };
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rs1 {
    pub value: f64,
    /// Terms that were absent or had a zero denominator.
    pub flags: Vec<String>,
}

/// `(a - b) / (a + b)`, or 0 with a flag when both are 0.
fn ratio_term(a: f64, b: f64, what: &str, flags: &mut Vec<String>) -> f64 {
    let sum = a + b;
    if sum == 0.0 {
        flags.push(format!("{what}: zero denominator, term set to 0"));
        0.0
    } else {
        (a - b) / sum
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Absolute rugged score: the normalized public-minus-private gap.
///
/// `(2/Np)·Σ (Mp−Mc)/(Mp+Mc)` over pairs plus `2·(P̄−C̄)/(P̄+C̄)` over the
/// unmatched public (P̄) and private (C̄) averages. Each bracketed ratio lies in
/// `[-1, 1]`, so the value lies in `[-4, 4]` for non-negative scores.
pub fn rs1_absolute(table: &PerfTable, model: &str) -> Result<Rs1, MetricsError> {
    let m = table.model_index(model)?;
    let pairs = table.pairs();
    let un_pub = table.unmatched(Visibility::Public);
    let un_priv = table.unmatched(Visibility::Private);
    let has_unmatched = !un_pub.is_empty() && !un_priv.is_empty();
    if pairs.is_empty() && !has_unmatched {
        return Err(MetricsError::Insufficient(
            "need a public-private pair or both unmatched groups".into(),
        ));
    }
    let mut flags = Vec::new();
    let mut value = 0.0;
    if pairs.is_empty() {
        flags.push("no pairs: pair term absent".into());
    } else {
        let mut sum = 0.0;
        for p in &pairs {
            let (mp, mc) = (table.score(m, p.public)?, table.score(m, p.private)?);
            sum += ratio_term(mp, mc, &format!("pair {}", p.pair_id), &mut flags);
        }
        value += 2.0 / pairs.len() as f64 * sum;
    }
    if has_unmatched {
        let pubs = un_pub
            .iter()
            .map(|&b| table.score(m, b))
            .collect::<Result<Vec<_>, _>>()?;
        let privs = un_priv
            .iter()
            .map(|&b| table.score(m, b))
            .collect::<Result<Vec<_>, _>>()?;
        value += 2.0 * ratio_term(mean(&pubs), mean(&privs), "unmatched", &mut flags);
    } else {
        flags.push("unmatched term absent".into());
    }
    Ok(Rs1 { value, flags })
}

/// Ranks within one benchmark column, 1 = best, ties averaged.
fn descending_ranks(values: &[f64]) -> Vec<f64> {
    let neg: Vec<f64> = values.iter().map(|v| -v).collect();
    average_ranks(&neg)
}

/// Rank-based rugged score: per model, the mean over pairs of
/// `rank on private − rank on public`. Positive means the model ranks worse
/// on private benchmarks than on their public counterparts.
pub fn rs1_relative(
    table: &PerfTable,
    models: &[String],
) -> Result<BTreeMap<String, f64>, MetricsError> {
    if models.len() < 2 {
        return Err(MetricsError::Insufficient(format!(
            "rank comparison needs at least 2 models, got {}",
            models.len()
        )));
    }
    let pairs = table.pairs();
    if pairs.is_empty() {
        return Err(MetricsError::Insufficient("no public-private pairs".into()));
    }
    let idx = models
        .iter()
        .map(|m| table.model_index(m))
        .collect::<Result<Vec<_>, _>>()?;
    let column = |b: usize| {
        idx.iter()
            .map(|&m| table.score(m, b))
            .collect::<Result<Vec<_>, _>>()
    };
    let mut shift = vec![0.0; models.len()];
    for p in &pairs {
        let pub_ranks = descending_ranks(&column(p.public)?);
        let priv_ranks = descending_ranks(&column(p.private)?);
        for k in 0..models.len() {
            shift[k] += priv_ranks[k] - pub_ranks[k];
        }
    }
    Ok(models
        .iter()
        .zip(shift)
        .map(|(m, s)| (m.clone(), s / pairs.len() as f64))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rs2 {
    pub rs2: f64,
    /// `None` when the mean private score is 0.
    pub normalized: Option<f64>,
}

/// Population standard deviation of `scores` and its mean-normalized form.
pub fn rs2_from_scores(scores: &[f64]) -> Result<Rs2, MetricsError> {
    if scores.len() < 2 {
        return Err(MetricsError::Insufficient(format!(
            "dispersion needs at least 2 private benchmarks, got {}",
            scores.len()
        )));
    }
    if scores.iter().any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite);
    }
    let mu = mean(scores);
    let var = scores.iter().map(|s| (s - mu) * (s - mu)).sum::<f64>() / scores.len() as f64;
    let rs2 = var.sqrt();
    Ok(Rs2 {
        rs2,
        normalized: (mu > 0.0).then(|| rs2 / mu),
    })
}

/// Dispersion of one model's scores over all private benchmarks.
pub fn rs2(table: &PerfTable, model: &str) -> Result<Rs2, MetricsError> {
    let m = table.model_index(model)?;
    let scores = table
        .private_columns()
        .into_iter()
        .map(|b| table.score(m, b))
        .collect::<Result<Vec<_>, _>>()?;
    rs2_from_scores(&scores)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityStats {
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

pub fn stability(values: &[f64]) -> Result<StabilityStats, MetricsError> {
    if values.len() < 2 {
        return Err(MetricsError::Insufficient(format!(
            "stability needs at least 2 runs, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite);
    }
    let mu = mean(values);
    let var = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / values.len() as f64;
    Ok(StabilityStats {
        n: values.len(),
        mean: mu,
        std: var.sqrt(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn desc(id: &str, v: Visibility, pair: Option<&str>) -> BenchmarkDesc {
        BenchmarkDesc {
            id: id.into(),
            visibility: v,
            pair_id: pair.map(Into::into),
        }
    }

    /// One pair plus one unmatched benchmark on each side.
    fn table(mp: f64, mc: f64, up: f64, uc: f64) -> PerfTable {
        let mut t = PerfTable::new(
            vec!["m".into()],
            vec![
                desc("pub", Visibility::Public, Some("p1")),
                desc("priv", Visibility::Private, Some("p1")),
                desc("upub", Visibility::Public, None),
                desc("upriv", Visibility::Private, None),
            ],
        );
        for (b, s) in [("pub", mp), ("priv", mc), ("upub", up), ("upriv", uc)] {
            t.set("m", b, s).unwrap();
        }
        t
    }

    #[test]
    fn rs1_examples() {
        assert_eq!(
            rs1_absolute(&table(0.4, 0.4, 0.7, 0.7), "m").unwrap().value,
            0.0
        );
        let v = rs1_absolute(&table(0.6, 0.2, 0.5, 0.5), "m").unwrap().value;
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(
            rs1_absolute(&table(0.6, 0.0, 0.3, 0.0), "m").unwrap().value,
            4.0
        );
    }

    #[test]
    fn rs1_zero_denominator_is_flagged() {
        let r = rs1_absolute(&table(0.0, 0.0, 0.5, 0.5), "m").unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.flags.iter().any(|f| f.contains("zero denominator")));
    }

    #[test]
    fn rs1_preconditions() {
        let t = PerfTable::new(vec!["m".into()], vec![desc("a", Visibility::Public, None)]);
        assert!(matches!(
            rs1_absolute(&t, "m"),
            Err(MetricsError::Insufficient(_))
        ));
        assert!(matches!(
            rs1_absolute(&table(0.1, 0.1, 0.1, 0.1), "x"),
            Err(MetricsError::UnknownModel(_))
        ));
        let mut only_pair = PerfTable::new(
            vec!["m".into()],
            vec![
                desc("a", Visibility::Public, Some("p")),
                desc("b", Visibility::Private, Some("p")),
            ],
        );
        only_pair.set("m", "a", 0.5).unwrap();
        only_pair.set("m", "b", 0.5).unwrap();
        let r = rs1_absolute(&only_pair, "m").unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.flags.iter().any(|f| f.contains("unmatched term absent")));
    }

    #[test]
    fn rs1_relative_examples() {
        let models: Vec<String> = ["X", "Y", "Z"].iter().map(|s| s.to_string()).collect();
        let mut t = PerfTable::new(
            models.clone(),
            vec![
                desc("a", Visibility::Public, Some("p")),
                desc("b", Visibility::Private, Some("p")),
            ],
        );
        for (m, pa, pb) in [("X", 0.9, 0.1), ("Y", 0.5, 0.8), ("Z", 0.2, 0.4)] {
            t.set(m, "a", pa).unwrap();
            t.set(m, "b", pb).unwrap();
        }
        let r = rs1_relative(&t, &models).unwrap();
        assert_eq!((r["X"], r["Y"], r["Z"]), (2.0, -1.0, -1.0));
        assert!(matches!(
            rs1_relative(&t, &models[..1]),
            Err(MetricsError::Insufficient(_))
        ));
    }

    #[test]
    fn rs2_examples() {
        let r = rs2_from_scores(&[0.2, 0.4]).unwrap();
        assert!((r.rs2 - 0.1).abs() < 1e-12);
        assert!((r.normalized.unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let r = rs2_from_scores(&[0.1, 0.2, 0.3]).unwrap();
        assert!((r.rs2 - 0.08165).abs() < 1e-5);
        assert!((r.normalized.unwrap() - 0.40825).abs() < 1e-5);
        let r = rs2_from_scores(&[0.5, 0.5]).unwrap();
        assert_eq!((r.rs2, r.normalized), (0.0, Some(0.0)));
        assert_eq!(rs2_from_scores(&[0.0, 0.0]).unwrap().normalized, None);
        assert!(rs2_from_scores(&[0.3]).is_err());
        let r = rs2(&table(0.6, 0.2, 0.5, 0.4), "m").unwrap();
        assert!((r.rs2 - 0.1).abs() < 1e-12);
    }

    #[test]
    fn stability_examples() {
        let s = stability(&[22.9; 32]).unwrap();
        assert!(s.std.abs() < 1e-12);
        let s = stability(&[24.0, 26.0]).unwrap();
        assert_eq!((s.mean, s.std, s.min, s.max), (25.0, 1.0, 24.0, 26.0));
        assert!(stability(&[1.0]).is_err());
    }

    #[test]
    fn validation_rejects_broken_pairs() {
        let t = PerfTable::new(
            vec!["m".into()],
            vec![
                desc("a", Visibility::Public, Some("p")),
                desc("b", Visibility::Public, Some("p")),
            ],
        );
        assert!(t.validate().is_err());
    }

    fn random_table() -> impl Strategy<Value = PerfTable> {
        (
            1usize..4,
            0usize..3,
            0usize..3,
            proptest::collection::vec(0.0f64..1.0, 32),
        )
            .prop_map(|(np, nu_pub, nu_priv, vals)| {
                let mut benches = Vec::new();
                for i in 0..np {
                    benches.push(desc(
                        &format!("p{i}"),
                        Visibility::Public,
                        Some(&format!("pair{i}")),
                    ));
                    benches.push(desc(
                        &format!("c{i}"),
                        Visibility::Private,
                        Some(&format!("pair{i}")),
                    ));
                }
                for i in 0..nu_pub {
                    benches.push(desc(&format!("up{i}"), Visibility::Public, None));
                }
                for i in 0..nu_priv {
                    benches.push(desc(&format!("uc{i}"), Visibility::Private, None));
                }
                let mut t = PerfTable::new(vec!["m".into()], benches);
                for (cell, v) in t.scores[0].iter_mut().zip(&vals) {
                    *cell = Some(*v);
                }
                t
            })
    }

    proptest! {
        #[test]
        fn rs1_bounded_and_antisymmetric(t in random_table()) {
            let a = rs1_absolute(&t, "m").unwrap().value;
            let b = rs1_absolute(&t.swapped(), "m").unwrap().value;
            prop_assert!((-4.0..=4.0).contains(&a));
            prop_assert!((a + b).abs() < 1e-12);
        }

        #[test]
        fn rs1_relative_rank_invariant(vals in proptest::collection::vec(0.0f64..1.0, 8)) {
            let models: Vec<String> = (0..4).map(|i| format!("m{i}")).collect();
            let mut t = PerfTable::new(
                models.clone(),
                vec![desc("a", Visibility::Public, Some("p")), desc("b", Visibility::Private, Some("p"))],
            );
            for (i, m) in models.iter().enumerate() {
                t.set(m, "a", vals[i]).unwrap();
                t.set(m, "b", vals[4 + i]).unwrap();
            }
            let before = rs1_relative(&t, &models).unwrap();
            for row in &mut t.scores {
                row[1] = row[1].map(|v| (v * 3.0).exp());
            }
            prop_assert_eq!(before, rs1_relative(&t, &models).unwrap());
        }

        #[test]
        fn rs2_scale_properties(v in proptest::collection::vec(0.01f64..1.0, 2..12), c in 0.1f64..10.0) {
            let a = rs2_from_scores(&v).unwrap();
            let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
            let b = rs2_from_scores(&scaled).unwrap();
            prop_assert!((b.rs2 - c * a.rs2).abs() < 1e-12);
            prop_assert!((b.normalized.unwrap() - a.normalized.unwrap()).abs() < 1e-12);
        }
    }
}
