//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Everything runs offline against the bundled fixture corpus, the
//! synthetic corpus generator and the in-process mock models.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use arxivroll::corpus::{synth, Article, Domain};
use arxivroll::harness::{
    read_run, score_benchmark, se_pct, EvalOptions, EvalRun, MockBackend, MockProfile, ModelConfig,
    EXPIRED_RERUN_TAG,
};
use arxivroll::metrics::{
    build_table, kendall, pearson, rs1_absolute, rs2_from_scores, spearman, BenchmarkDesc,
    PairConfig, PairRef, PerfTable, Visibility,
};
use arxivroll::registry::{Event, RegistryRecord, RegistryState};
use arxivroll::scpgen::{
    apply_candidate, build_from_articles, fragment_at, tfidf_rank, Benchmark, BenchmarkStatus,
    BuildRequest, FragmentConfig, ScpRng, TaskKind,
};
use arxivroll_cli::run;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fixture_corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/corpus")
}

fn cli(args: &[&str]) -> i32 {
    let mut argv = vec!["arxivroll"];
    argv.extend_from_slice(args);
    run(argv)
}

fn request(kind: TaskKind, seed: u64, size: usize) -> BuildRequest {
    BuildRequest {
        domain: Domain::Cs,
        task_kind: kind,
        config: FragmentConfig::default(),
        seed,
        target_size: size,
        period_label: None,
        created: "2024-09-30T00:00:00Z".parse().unwrap(),
    }
}

fn mock_run(bench: &Benchmark, model_id: &str, profile: MockProfile) -> EvalRun {
    let config = ModelConfig {
        model_id: model_id.into(),
        mock: Some(profile.clone()),
        max_in_flight: 8,
        ..ModelConfig::default()
    };
    score_benchmark(
        bench,
        &config,
        &MockBackend::new(profile),
        &EvalOptions::default(),
    )
    .unwrap()
}

// 1
fn se_cross_check() -> Outcome {
    let se = se_pct(0.229, 2931);
    check((se - 0.78).abs() <= 0.01, format!("se_pct = {se}"))?;
    check(format!("{se:.1}") == "0.8", "does not render as 0.8")?;
    Ok(format!("se_pct(0.229, 2931) = {se:.4}"))
}

// 2
fn stability_study() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("skill.toml");
    std::fs::write(
        &model,
        "model_id = \"skill-0.5\"\n[mock]\nprofile = \"skill\"\np = 0.5\nseed = 11\n",
    )
    .unwrap();
    let out = dir.path().join("stability.json");
    let corpus = fixture_corpus();
    let code = cli(&[
        "stability",
        "--corpus",
        corpus.to_str().unwrap(),
        "--domain",
        "cs",
        "--task",
        "sequencing",
        "--seeds",
        "32",
        "--first-seed",
        "1",
        "--size",
        "500",
        "--model-config",
        model.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    check(code == 0, format!("stability exited {code}"))?;
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let counts = report["item_counts"].as_array().unwrap();
    check(counts.len() == 32, "expected 32 seeds")?;
    check(
        counts.iter().all(|c| c.as_u64() == Some(500)),
        format!("item counts {counts:?}"),
    )?;
    let std = report["stats"]["std"].as_f64().unwrap();
    let mean = report["stats"]["mean"].as_f64().unwrap();
    check(std < 1.0, format!("std {std:.3} points (mean {mean:.2})"))?;
    Ok(format!(
        "32 seeds x 500 items, mean {mean:.2}, std {std:.3} points"
    ))
}

/// A larger synthetic corpus; `offset` shifts article ids so separate calls
/// yield unrelated passages.
fn big_corpus(count: usize, eligible: usize, seed: u64, offset: usize) -> Vec<Article> {
    let mut articles = synth::articles(Domain::Cs, count, eligible, seed);
    for (i, a) in articles.iter_mut().enumerate() {
        a.meta.arxiv_id = format!("{}.{:05}", 2300 + offset, 10 + i);
    }
    articles
}

// 3
fn random_guess_calibration() -> Outcome {
    let articles = big_corpus(50, 25, 3, 0);
    let mut parts = Vec::new();
    for kind in TaskKind::ALL {
        let bench = build_from_articles(&articles, "2024b", &request(kind, 9, 1200)).unwrap();
        check(
            bench.items.len() >= 1000,
            format!("{kind}: only {} items", bench.items.len()),
        )?;
        let run = mock_run(&bench, "uniform", MockProfile::UniformRandom { seed: 5 });
        check(
            (run.accuracy_pct - 25.0).abs() <= 4.2,
            format!("{kind}: {:.2}% on {} items", run.accuracy_pct, run.n),
        )?;
        parts.push(format!("{kind} {:.1}% (n={})", run.accuracy_pct, run.n));
    }
    Ok(parts.join(", "))
}

// 4
fn round_trip() -> Outcome {
    let articles = big_corpus(50, 25, 4, 1);
    let by_id: HashMap<&str, &Article> = articles
        .iter()
        .map(|a| (a.meta.arxiv_id.as_str(), a))
        .collect();
    let cfg = FragmentConfig::default();
    let mut parts = Vec::new();
    for kind in TaskKind::ALL {
        let bench = build_from_articles(&articles, "2024b", &request(kind, 21, 1000)).unwrap();
        check(
            bench.items.len() == 1000,
            format!("{kind}: {} items", bench.items.len()),
        )?;
        let mut failures = 0;
        for case in &bench.items {
            let article = by_id[case.provenance.article_id.as_str()];
            let [start, end] = case.provenance.paragraph_span;
            check(end - start == cfg.n_paragraphs, "span width")?;
            let source = fragment_at(article, start, &cfg)
                .unwrap()
                .accepted()
                .unwrap()
                .text();
            if apply_candidate(case, case.correct_index).as_deref() != Ok(source.as_str()) {
                failures += 1;
            }
        }
        check(failures == 0, format!("{kind}: {failures} failures"))?;
        parts.push(format!("{kind} 1000/1000"));
    }
    Ok(parts.join(", "))
}

/// Lowercased alphanumeric runs, written independently of the library.
fn brute_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Dense tf-idf cosine with smoothed idf, straight from the definitions.
fn brute_tfidf(query: &str, pool: &[String]) -> Vec<f64> {
    let docs: Vec<Vec<String>> = pool.iter().map(|s| brute_tokens(s)).collect();
    let vocab: Vec<String> = docs
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let n = pool.len() as f64;
    let idf: Vec<f64> = vocab
        .iter()
        .map(|t| {
            let df = docs.iter().filter(|d| d.contains(t)).count() as f64;
            ((1.0 + n) / (1.0 + df)).ln() + 1.0
        })
        .collect();
    let vector = |tokens: &[String]| -> Vec<f64> {
        vocab
            .iter()
            .zip(&idf)
            .map(|(t, w)| tokens.iter().filter(|x| *x == t).count() as f64 * w)
            .collect()
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let q = vector(&brute_tokens(query));
    docs.iter()
        .map(|d| {
            let v = vector(d);
            let denom = norm(&q) * norm(&v);
            if denom == 0.0 {
                0.0
            } else {
                q.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / denom
            }
        })
        .collect()
}

const WORDS: &[&str] = &[
    "the", "model", "kernel", "Bound", "sampler", "graph", "loss", "x2", "prior", "data", "of",
    "a", "Gradient", "λ", "noise", "mean",
];

fn random_sentence(rng: &mut ScpRng) -> String {
    let len = 1 + rng.below(12);
    let mut s: Vec<String> = (0..len)
        .map(|_| WORDS[rng.below(WORDS.len())].to_string())
        .collect();
    if rng.below(5) == 0 {
        s.push("--".into());
    }
    s.join(if rng.below(3) == 0 { ", " } else { " " }) + "."
}

// 5
fn tfidf_oracle() -> Outcome {
    let mut rng = ScpRng::for_seed(5, "acceptance-tfidf");
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let size = 1 + rng.below(20);
        let pool: Vec<String> = (0..size).map(|_| random_sentence(&mut rng)).collect();
        let query = random_sentence(&mut rng);
        let expected = brute_tfidf(&query, &pool);
        let ranked = tfidf_rank(&query, &pool);
        check(ranked.len() == pool.len(), format!("pool {trial}: length"))?;
        let mut seen = BTreeSet::new();
        for w in ranked.windows(2) {
            check(
                w[0].similarity >= w[1].similarity,
                format!("pool {trial}: not sorted"),
            )?;
        }
        for r in &ranked {
            check(
                seen.insert(r.index),
                format!("pool {trial}: repeated index"),
            )?;
            let diff = (r.similarity - expected[r.index]).abs();
            worst = worst.max(diff);
            check(
                diff <= 1e-9,
                format!(
                    "pool {trial} doc {}: {} vs {}",
                    r.index, r.similarity, expected[r.index]
                ),
            )?;
        }
    }
    Ok(format!("200 pools, max |diff| {worst:.2e}"))
}

fn desc(id: &str, visibility: Visibility, pair: Option<&str>) -> BenchmarkDesc {
    BenchmarkDesc {
        id: id.into(),
        visibility,
        pair_id: pair.map(String::from),
    }
}

/// One model; a pair `p` plus one unmatched benchmark on each side.
fn small_table(pair_pub: f64, pair_priv: f64, un_pub: f64, un_priv: f64) -> PerfTable {
    let mut t = PerfTable::new(
        vec!["m".into()],
        vec![
            desc("pub", Visibility::Public, Some("p")),
            desc("priv", Visibility::Private, Some("p")),
            desc("pub-u", Visibility::Public, None),
            desc("priv-u", Visibility::Private, None),
        ],
    );
    for (b, v) in [
        ("pub", pair_pub),
        ("priv", pair_priv),
        ("pub-u", un_pub),
        ("priv-u", un_priv),
    ] {
        t.set("m", b, v).unwrap();
    }
    t
}

// 6
fn rs1_properties() -> Outcome {
    let equal = rs1_absolute(&small_table(0.5, 0.5, 0.5, 0.5), "m")
        .unwrap()
        .value;
    check(equal == 0.0, format!("equal scores -> {equal}"))?;
    let hand = rs1_absolute(&small_table(0.6, 0.2, 0.45, 0.45), "m")
        .unwrap()
        .value;
    check((hand - 1.0).abs() <= 1e-12, format!("hand case -> {hand}"))?;
    let zero = rs1_absolute(&small_table(0.7, 0.0, 0.3, 0.0), "m")
        .unwrap()
        .value;
    check(zero == 4.0, format!("all-zero private -> {zero}"))?;

    let mut rng = ScpRng::for_seed(6, "acceptance-rs1");
    for i in 0..100 {
        let pairs = 1 + rng.below(4);
        let (n_pub, n_priv) = (rng.below(3), rng.below(3));
        let mut benches = Vec::new();
        for p in 0..pairs {
            benches.push(desc(
                &format!("pub{p}"),
                Visibility::Public,
                Some(&format!("p{p}")),
            ));
            benches.push(desc(
                &format!("priv{p}"),
                Visibility::Private,
                Some(&format!("p{p}")),
            ));
        }
        benches.extend((0..n_pub).map(|k| desc(&format!("upub{k}"), Visibility::Public, None)));
        benches.extend((0..n_priv).map(|k| desc(&format!("upriv{k}"), Visibility::Private, None)));
        let ids: Vec<String> = benches.iter().map(|b| b.id.clone()).collect();
        let mut t = PerfTable::new(vec!["m".into()], benches);
        for id in &ids {
            t.set("m", id, 0.01 + 0.98 * rng.unit()).unwrap();
        }
        let a = rs1_absolute(&t, "m").unwrap().value;
        let b = rs1_absolute(&t.swapped(), "m").unwrap().value;
        check(
            (a + b).abs() <= 1e-12,
            format!("table {i}: {a} vs swapped {b}"),
        )?;
        check(
            (-4.0..=4.0).contains(&a),
            format!("table {i}: {a} out of range"),
        )?;
    }
    Ok(format!(
        "equal 0, hand {hand}, zero-private {zero}, 100 swaps antisymmetric"
    ))
}

// 7
fn rs2_properties() -> Outcome {
    let r = rs2_from_scores(&[0.2, 0.4]).unwrap();
    check((r.rs2 - 0.1).abs() <= 1e-12, format!("rs2 {}", r.rs2))?;
    let n = r.normalized.unwrap();
    check((n - 1.0 / 3.0).abs() <= 1e-12, format!("normalized {n}"))?;
    let mut rng = ScpRng::for_seed(7, "acceptance-rs2");
    for i in 0..100 {
        let len = 2 + rng.below(8);
        let v: Vec<f64> = (0..len).map(|_| 0.01 + rng.unit()).collect();
        let c = 0.1 + 5.0 * rng.unit();
        let shift = rng.unit();
        let base = rs2_from_scores(&v).unwrap();
        let scaled = rs2_from_scores(&v.iter().map(|x| x * c).collect::<Vec<_>>()).unwrap();
        let shifted = rs2_from_scores(&v.iter().map(|x| x + shift).collect::<Vec<_>>()).unwrap();
        check(
            (scaled.rs2 - c * base.rs2).abs() <= 1e-12,
            format!("vector {i}: scale equivariance"),
        )?;
        check(
            (scaled.normalized.unwrap() - base.normalized.unwrap()).abs() <= 1e-12,
            format!("vector {i}: normalized not scale invariant"),
        )?;
        check(
            (shifted.rs2 - base.rs2).abs() <= 1e-12,
            format!("vector {i}: shift invariance"),
        )?;
    }
    Ok("fixed case exact, 100 random vectors".into())
}

fn brute_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Average 1-based ranks by counting, O(n^2).
fn brute_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|a| {
            let below = x.iter().filter(|b| *b < a).count() as f64;
            let equal = x.iter().filter(|b| *b == a).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Tau-b over all pairs.
fn brute_kendall(x: &[f64], y: &[f64]) -> f64 {
    let (mut conc, mut disc, mut tx, mut ty, mut pairs) = (0.0_f64, 0.0, 0.0, 0.0, 0.0_f64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            pairs += 1.0;
            let dx = (x[i] - x[j]).signum() * f64::from(x[i] != x[j]);
            let dy = (y[i] - y[j]).signum() * f64::from(y[i] != y[j]);
            if dx == 0.0 {
                tx += 1.0;
            }
            if dy == 0.0 {
                ty += 1.0;
            }
            match dx * dy {
                p if p > 0.0 => conc += 1.0,
                p if p < 0.0 => disc += 1.0,
                _ => {}
            }
        }
    }
    (conc - disc) / ((pairs - tx) * (pairs - ty)).sqrt()
}

// 8
fn correlation_oracles() -> Outcome {
    let s = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
    check(s == 0.8, format!("spearman fixed case {s}"))?;
    let k = kendall(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
    check(k == 1.0 / 3.0, format!("kendall fixed case {k}"))?;
    let mut rng = ScpRng::for_seed(8, "acceptance-corr");
    let mut tested = 0;
    while tested < 500 {
        let n = 3 + rng.below(30);
        let levels = 2 + rng.below(10);
        let x: Vec<f64> = (0..n).map(|_| rng.below(levels) as f64 * 0.5).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.below(levels) as f64 - 1.0).collect();
        if x.iter().all(|v| *v == x[0]) || y.iter().all(|v| *v == y[0]) {
            // Undefined; the library reports an error there.
            check(pearson(&x, &y).is_err(), "constant input accepted")?;
            continue;
        }
        let cases = [
            ("pearson", pearson(&x, &y).unwrap(), brute_pearson(&x, &y)),
            (
                "spearman",
                spearman(&x, &y).unwrap(),
                brute_pearson(&brute_ranks(&x), &brute_ranks(&y)),
            ),
            ("kendall", kendall(&x, &y).unwrap(), brute_kendall(&x, &y)),
        ];
        for (name, got, want) in cases {
            check(
                (got - want).abs() <= 1e-9,
                format!("{name} {got} vs {want} on {x:?} / {y:?}"),
            )?;
        }
        tested += 1;
    }
    Ok("fixed cases exact, 500 random tied vectors".into())
}

// 9
fn contamination_demo() -> Outcome {
    let public_articles = big_corpus(80, 26, 91, 2);
    let private_articles = big_corpus(80, 26, 92, 3);
    let mut config = PairConfig::default();
    let mut benches = Vec::new();
    for kind in TaskKind::ALL {
        let public =
            build_from_articles(&public_articles, "2024a", &request(kind, 1, 2000)).unwrap();
        let private =
            build_from_articles(&private_articles, "2024b", &request(kind, 1, 2000)).unwrap();
        check(
            public.items.len() == 2000 && private.items.len() == 2000,
            "benchmark size",
        )?;
        config.pairs.insert(
            format!("cs-{kind}"),
            PairRef {
                public: public.id().into(),
                private: private.id().into(),
            },
        );
        benches.push(public);
        benches.push(private);
    }
    let contaminated = MockProfile::Contaminated {
        seed: 3,
        memorized_p: 0.9,
        base_p: 0.3,
        memorized_benchmarks: config.pairs.values().map(|p| p.public.clone()).collect(),
        memorized_cases: Vec::new(),
    };
    let honest = MockProfile::Skill { p: 0.3, seed: 4 };
    let mut runs = Vec::new();
    for b in &benches {
        runs.push(mock_run(b, "contaminated", contaminated.clone()));
        runs.push(mock_run(b, "honest", honest.clone()));
    }
    let table = build_table(&config, &runs).unwrap();
    let dirty = rs1_absolute(&table, "contaminated").unwrap().value;
    let clean = rs1_absolute(&table, "honest").unwrap().value;
    check(dirty >= 0.8, format!("contaminated rs1 {dirty:.3}"))?;
    check(clean.abs() <= 0.1, format!("honest rs1 {clean:.3}"))?;
    Ok(format!(
        "contaminated {dirty:.3}, honest {clean:.3} (3 pairs x 2000 items)"
    ))
}

fn record(id: &str) -> RegistryRecord {
    RegistryRecord {
        benchmark_id: id.into(),
        period_label: "2024b".into(),
        domain: Domain::Cs,
        task_kind: TaskKind::Cloze,
        status: BenchmarkStatus::Private,
        created: "2024-09-30T00:00:00Z".parse().unwrap(),
        expired_at: None,
        digest_algorithm: "sha256".into(),
        content_digest: "0".repeat(64),
        path: PathBuf::from(format!("{id}.jsonl")),
    }
}

// 10
fn lifecycle() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = |p: &str| dir.path().join(p).to_str().unwrap().to_string();
    let bench = d("b/bench.jsonl");
    let (reg, results, model) = (d("registry.log"), d("results"), d("m.toml"));
    std::fs::write(
        &model,
        "model_id = \"m\"\n[mock]\nprofile = \"always-correct\"\n",
    )
    .unwrap();
    let corpus = fixture_corpus();
    let code = cli(&[
        "generate",
        "--corpus",
        corpus.to_str().unwrap(),
        "--domain",
        "cs",
        "--task",
        "p",
        "--seed",
        "3",
        "--size",
        "20",
        "--out",
        &bench,
        "--register",
        "--registry",
        &reg,
    ]);
    check(code == 0, format!("generate exited {code}"))?;
    let id = arxivroll::scpgen::read_benchmark(Path::new(&bench))
        .unwrap()
        .header
        .benchmark_id;
    check(
        cli(&[
            "registry",
            "--registry",
            &reg,
            "expire",
            &id,
            "--at",
            "2024-10-01T00:00:00Z",
        ]) == 0,
        "expire failed",
    )?;
    let base = [
        "evaluate",
        "--bench",
        &bench,
        "--model-config",
        &model,
        "--registry",
        &reg,
        "--out",
        &results,
    ];
    let refused = cli(&base);
    check(refused != 0, "expired benchmark evaluated without override")?;
    let run_file = dir.path().join("results/m").join(format!("{id}.json"));
    check(!run_file.exists(), "refused evaluation still wrote a run")?;
    let mut allowed = base.to_vec();
    allowed.push("--allow-expired");
    check(cli(&allowed) == 0, "override rejected")?;
    let run = read_run(&run_file).unwrap();
    check(
        run.has_tag(EXPIRED_RERUN_TAG),
        format!("tags {:?}", run.tags),
    )?;

    let mut rng = ScpRng::for_seed(10, "acceptance-lifecycle");
    let ids = ["a", "b", "c", "d", "e"];
    let mut transitions = 0;
    for seq in 0..1000 {
        let mut state = RegistryState::default();
        let mut ever_expired = BTreeSet::new();
        for step in 0..(5 + rng.below(30)) {
            let id = ids[rng.below(ids.len())];
            let event = if rng.below(2) == 0 {
                Event::Register { record: record(id) }
            } else {
                Event::Expire {
                    benchmark_id: id.into(),
                    at: "2025-01-01T00:00:00Z".parse().unwrap(),
                }
            };
            let before = state.clone();
            if state.apply(&event).is_err() {
                check(
                    state == before,
                    format!("seq {seq} step {step}: failed event changed state"),
                )?;
            }
            for r in state.records() {
                if ever_expired.contains(&r.benchmark_id) {
                    check(
                        r.status == BenchmarkStatus::Expired,
                        format!(
                            "seq {seq} step {step}: {} went back to private",
                            r.benchmark_id
                        ),
                    )?;
                }
                if r.status == BenchmarkStatus::Expired {
                    transitions += usize::from(ever_expired.insert(r.benchmark_id.clone()));
                }
            }
        }
    }
    Ok(format!(
        "refused exit {refused}, override tagged, 1000 sequences ({transitions} expiries) monotone"
    ))
}

/// Runs the whole command-line pipeline in `root` and returns the
/// leaderboard outputs.
fn pipeline(root: &Path) -> BTreeMap<&'static str, Vec<u8>> {
    let p = |s: &str| root.join(s).to_str().unwrap().to_string();
    let corpus = fixture_corpus();
    let corpus = corpus.to_str().unwrap();
    let reg = p("registry.log");
    std::fs::write(
        p("honest.toml"),
        "model_id = \"honest\"\n[mock]\nprofile = \"skill\"\np = 0.4\nseed = 2\n",
    )
    .unwrap();
    std::fs::write(
        p("lucky.toml"),
        "model_id = \"lucky\"\n[mock]\nprofile = \"uniform-random\"\nseed = 8\n",
    )
    .unwrap();
    let mut files = Vec::new();
    for (period, seed) in [("2024a", "100"), ("2024b", "200")] {
        for task in ["s", "c", "p"] {
            let out = p(&format!("bench/{period}-{task}.jsonl"));
            assert_eq!(
                cli(&[
                    "generate",
                    "--corpus",
                    corpus,
                    "--domain",
                    "cs",
                    "--task",
                    task,
                    "--seed",
                    seed,
                    "--size",
                    "60",
                    "--period-label",
                    period,
                    "--out",
                    &out,
                    "--register",
                    "--registry",
                    &reg,
                ]),
                0
            );
            if period == "2024a" {
                let id = arxivroll::scpgen::read_benchmark(Path::new(&out))
                    .unwrap()
                    .header
                    .benchmark_id;
                assert_eq!(
                    cli(&[
                        "registry",
                        "--registry",
                        &reg,
                        "expire",
                        &id,
                        "--at",
                        "2024-10-01T00:00:00Z"
                    ]),
                    0
                );
            }
            files.push(out);
        }
    }
    for model in ["honest.toml", "lucky.toml"] {
        let mut args = vec!["evaluate", "--model-config"];
        let m = p(model);
        args.push(&m);
        for f in &files {
            args.extend(["--bench", f.as_str()]);
        }
        let results = p("results");
        args.extend(["--registry", &reg, "--out", &results, "--allow-expired"]);
        assert_eq!(cli(&args), 0);
    }
    let pairs = p("pairs.json");
    assert_eq!(
        cli(&[
            "pairs",
            "--registry",
            &reg,
            "--private-period",
            "2024b",
            "--promote-expired-as-public",
            "--out",
            &pairs
        ]),
        0
    );
    assert_eq!(
        cli(&[
            "rs",
            "--pairs",
            &pairs,
            "--results",
            &p("results"),
            "--out",
            &p("rs")
        ]),
        0
    );
    let mut out = BTreeMap::new();
    for (fmt, name) in [("md", "lb.md"), ("json", "lb.json"), ("csv", "lb.csv")] {
        assert_eq!(
            cli(&[
                "leaderboard",
                "--results",
                &p("results"),
                "--rs",
                &p("rs"),
                "--format",
                fmt,
                "--registry",
                &reg,
                "--out",
                &p(name),
            ]),
            0
        );
        out.insert(fmt, std::fs::read(p(name)).unwrap());
    }
    out
}

// 11
fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture_corpus();
    let mut outputs = Vec::new();
    for name in ["one.jsonl", "two.jsonl"] {
        let out = dir.path().join(name);
        let code = cli(&[
            "generate",
            "--corpus",
            corpus.to_str().unwrap(),
            "--domain",
            "cs",
            "--task",
            "cloze",
            "--seed",
            "42",
            "--size",
            "100",
            "--out",
            out.to_str().unwrap(),
        ]);
        check(code == 0, format!("generate exited {code}"))?;
        outputs.push(std::fs::read(out).unwrap());
    }
    check(
        outputs[0] == outputs[1],
        "generate --seed 42 differs between runs",
    )?;

    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = pipeline(a.path());
    let second = pipeline(b.path());
    for (fmt, bytes) in &first {
        check(*bytes == second[fmt], format!("{fmt} leaderboard differs"))?;
    }
    let md = String::from_utf8(first["md"].clone()).unwrap();
    check(
        md.lines().count() == 4,
        format!("unexpected leaderboard:\n{md}"),
    )?;
    check(
        !md.contains("| - | - | - | - |"),
        format!("rugged scores missing:\n{md}"),
    )?;
    Ok(format!(
        "JSONL identical ({} bytes); md/json/csv leaderboards identical",
        outputs[0].len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("standard-error cross-check", se_cross_check),
        ("stability over 32 seeds", stability_study),
        ("random-guess calibration", random_guess_calibration),
        ("candidate round trip", round_trip),
        ("tf-idf oracle", tfidf_oracle),
        ("RS_I properties", rs1_properties),
        ("RS_II properties", rs2_properties),
        ("correlation oracles", correlation_oracles),
        ("contamination detection", contamination_demo),
        ("lifecycle enforcement", lifecycle),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
