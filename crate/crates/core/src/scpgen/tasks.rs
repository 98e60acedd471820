//! The three SCP task generators and the inverse mapping used to check them.

use std::collections::HashMap;

use super::rng::ScpRng;
use super::sentences::split_sentences;
use super::tfidf::tfidf_rank;
use super::{Fragment, FragmentConfig, Provenance, TaskKind, TestCase, GENERATOR_VERSION};
use crate::corpus::{Article, Domain};
use crate::digest::hash_parts_hex;

const LABELS: [&str; 4] = ["A", "B", "C", "D"];
const BANK_LABELS: [&str; 4] = ["i", "ii", "iii", "iv"];

/// Settings shared by every case of one benchmark.
#[derive(Debug, Clone)]
pub struct GenContext {
    pub domain: Domain,
    pub seed: u64,
    pub config: FragmentConfig,
}

/// Why a fragment cannot produce a case of some kind. Not an error: the
/// builder simply moves on to the next fragment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ineligible {
    TooFewSentences { have: usize, need: usize },
    DuplicateSegments,
    TooFewDistractors { have: usize },
}

/// Dispatches on `kind`.
pub fn generate(
    kind: TaskKind,
    fragment: &Fragment,
    article: &Article,
    rng: &mut ScpRng,
    ctx: &GenContext,
) -> Result<TestCase, Ineligible> {
    match kind {
        TaskKind::Sequencing => gen_sequencing(fragment, rng, ctx),
        TaskKind::Cloze => gen_cloze(fragment, rng, ctx),
        TaskKind::Prediction => gen_prediction(fragment, article, rng, ctx),
    }
}

/// All 24 permutations of `0..4` in lexicographic order; index 0 is identity.
fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    if p.iter().all(|&x| !std::mem::replace(&mut seen[x], true)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Picks three distinct non-correct permutations, shuffles them with the
/// correct one and returns `(candidates, correct_index)`.
fn candidates_from(
    correct: [usize; 4],
    rng: &mut ScpRng,
    render: impl Fn(&[usize; 4]) -> String,
) -> (Vec<String>, usize) {
    let others: Vec<[usize; 4]> = permutations4()
        .into_iter()
        .filter(|p| *p != correct)
        .collect();
    let mut chosen = vec![correct];
    chosen.extend(
        rng.sample_distinct(others.len(), 3)
            .into_iter()
            .map(|i| others[i]),
    );
    let mut order = [0usize, 1, 2, 3];
    rng.shuffle(&mut order);
    let correct_index = order.iter().position(|&o| o == 0).expect("correct present");
    (
        order.iter().map(|&o| render(&chosen[o])).collect(),
        correct_index,
    )
}

fn case_id(fragment: &Fragment, kind: TaskKind, seed: u64) -> String {
    let digest = hash_parts_hex(&[
        fragment.article_id.as_bytes(),
        kind.as_str().as_bytes(),
        &seed.to_le_bytes(),
        &(fragment.paragraph_span[0] as u64).to_le_bytes(),
        &(fragment.paragraph_span[1] as u64).to_le_bytes(),
    ]);
    digest[..20].to_string()
}

fn build_case(
    fragment: &Fragment,
    kind: TaskKind,
    ctx: &GenContext,
    stem: String,
    candidates: Vec<String>,
    correct_index: usize,
) -> TestCase {
    TestCase {
        case_id: case_id(fragment, kind, ctx.seed),
        task_kind: kind,
        stem,
        candidates,
        correct_index,
        domain: ctx.domain,
        provenance: Provenance {
            article_id: fragment.article_id.clone(),
            paragraph_span: fragment.paragraph_span,
            seed: ctx.seed,
            generator_version: GENERATOR_VERSION.to_string(),
        },
    }
}

fn require_sentences(fragment: &Fragment, need: usize) -> Result<(), Ineligible> {
    if fragment.sentences.len() < need {
        return Err(Ineligible::TooFewSentences {
            have: fragment.sentences.len(),
            need,
        });
    }
    Ok(())
}

fn all_distinct(items: &[String]) -> bool {
    (0..items.len()).all(|i| (i + 1..items.len()).all(|j| items[i] != items[j]))
}

/// Sequencing: the fragment is cut into four contiguous groups (sizes as
/// equal as possible, larger groups first), displayed under a random
/// non-identity permutation as `(A)`..`(D)`. Candidates are label chains such
/// as `C-A-D-B`; the correct chain lists the labels in original order.
pub fn gen_sequencing(
    fragment: &Fragment,
    rng: &mut ScpRng,
    ctx: &GenContext,
) -> Result<TestCase, Ineligible> {
    require_sentences(fragment, ctx.config.min_sentences_seq)?;
    let n = fragment.sentences.len();
    let (base, extra) = (n / 4, n % 4);
    let mut groups = Vec::with_capacity(4);
    let mut at = 0;
    for g in 0..4 {
        let size = base + usize::from(g < extra);
        groups.push(fragment.sentences[at..at + size].join(" "));
        at += size;
    }
    if !all_distinct(&groups) {
        return Err(Ineligible::DuplicateSegments);
    }

    let perms = permutations4();
    // Index 0 is the identity, so this is uniform over the 23 others.
    let shown = perms[1 + rng.below(23)];
    let stem = shown
        .iter()
        .enumerate()
        .map(|(pos, &g)| format!("({}) {}", LABELS[pos], groups[g]))
        .collect::<Vec<_>>()
        .join("\n");

    // correct[k] = display position holding original group k.
    let mut correct = [0usize; 4];
    for (pos, &g) in shown.iter().enumerate() {
        correct[g] = pos;
    }
    let (candidates, correct_index) = candidates_from(correct, rng, |p| {
        p.iter()
            .map(|&pos| LABELS[pos])
            .collect::<Vec<_>>()
            .join("-")
    });
    Ok(build_case(
        fragment,
        TaskKind::Sequencing,
        ctx,
        stem,
        candidates,
        correct_index,
    ))
}

/// Cloze: four distinct sentences are replaced by `[BLANK-1]`..`[BLANK-4]` (in
/// document order) and listed in shuffled order as a bank `(i)`..`(iv)`.
/// Candidates are blank-to-bank assignments such as `1→iii, 2→i, 3→iv, 4→ii`.
pub fn gen_cloze(
    fragment: &Fragment,
    rng: &mut ScpRng,
    ctx: &GenContext,
) -> Result<TestCase, Ineligible> {
    require_sentences(fragment, ctx.config.min_sentences_cloze)?;
    let mut positions = rng.sample_distinct(fragment.sentences.len(), 4);
    positions.sort_unstable();
    let removed: Vec<String> = positions
        .iter()
        .map(|&p| fragment.sentences[p].clone())
        .collect();
    if !all_distinct(&removed) {
        return Err(Ineligible::DuplicateSegments);
    }

    // bank[b] holds removed sentence bank_of[b].
    let mut bank_of = [0usize, 1, 2, 3];
    rng.shuffle(&mut bank_of);

    let passage = fragment
        .sentences
        .iter()
        .enumerate()
        .map(|(i, s)| match positions.iter().position(|&p| p == i) {
            Some(k) => format!("[BLANK-{}]", k + 1),
            None => s.clone(),
        })
        .collect::<Vec<_>>()
        .join(" ");
    let bank = bank_of
        .iter()
        .enumerate()
        .map(|(b, &k)| format!("({}) {}", BANK_LABELS[b], removed[k]))
        .collect::<Vec<_>>()
        .join("\n");
    let stem = format!("{passage}\n\n{bank}");

    // correct[k] = bank slot holding the sentence for blank k.
    let mut correct = [0usize; 4];
    for (b, &k) in bank_of.iter().enumerate() {
        correct[k] = b;
    }
    let (candidates, correct_index) = candidates_from(correct, rng, |p| {
        p.iter()
            .enumerate()
            .map(|(k, &b)| format!("{}→{}", k + 1, BANK_LABELS[b]))
            .collect::<Vec<_>>()
            .join(", ")
    });
    Ok(build_case(
        fragment,
        TaskKind::Cloze,
        ctx,
        stem,
        candidates,
        correct_index,
    ))
}

/// Prediction: the stem is the fragment minus its last sentence; distractors
/// are the three sentences from the rest of the article most similar to the
/// answer under [`tfidf_rank`], skipping exact duplicates of the answer or of
/// an earlier pick.
pub fn gen_prediction(
    fragment: &Fragment,
    article: &Article,
    rng: &mut ScpRng,
    ctx: &GenContext,
) -> Result<TestCase, Ineligible> {
    require_sentences(fragment, ctx.config.min_sentences_pred)?;
    let (answer, context) = fragment.sentences.split_last().expect("non-empty");
    let [start, end] = fragment.paragraph_span;
    let pool: Vec<String> = article
        .paragraphs
        .iter()
        .enumerate()
        .filter(|(i, _)| *i < start || *i >= end)
        .flat_map(|(_, p)| split_sentences(p))
        .collect();
    if pool.len() < 3 {
        return Err(Ineligible::TooFewDistractors { have: pool.len() });
    }

    let mut distractors: Vec<&String> = Vec::with_capacity(3);
    for r in tfidf_rank(answer, &pool) {
        let s = &pool[r.index];
        if s != answer && !distractors.contains(&s) {
            distractors.push(s);
            if distractors.len() == 3 {
                break;
            }
        }
    }
    if distractors.len() < 3 {
        return Err(Ineligible::TooFewDistractors {
            have: distractors.len(),
        });
    }

    let mut options: Vec<&String> = vec![answer];
    options.extend(distractors);
    let mut order = [0usize, 1, 2, 3];
    rng.shuffle(&mut order);
    let correct_index = order.iter().position(|&o| o == 0).expect("answer present");
    let candidates = order.iter().map(|&o| options[o].clone()).collect();
    Ok(build_case(
        fragment,
        TaskKind::Prediction,
        ctx,
        context.join(" "),
        candidates,
        correct_index,
    ))
}

/// Reassembles the passage implied by choosing candidate `index`.
///
/// Works from the rendered stem and candidate text only, so it checks the
/// generators independently of their internal state.
pub fn apply_candidate(case: &TestCase, index: usize) -> Result<String, String> {
    let candidate = case
        .candidates
        .get(index)
        .ok_or_else(|| format!("no candidate {index}"))?;
    match case.task_kind {
        TaskKind::Prediction => Ok(format!("{} {}", case.stem, candidate)),
        TaskKind::Sequencing => {
            let segments = labeled_lines(&case.stem, &LABELS)?;
            candidate
                .split('-')
                .map(|label| {
                    segments
                        .get(label)
                        .cloned()
                        .ok_or_else(|| format!("unknown label {label}"))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(|parts| parts.join(" "))
        }
        TaskKind::Cloze => {
            let (passage, bank) = case
                .stem
                .rsplit_once("\n\n")
                .ok_or("cloze stem has no bank")?;
            let bank = labeled_lines(bank, &BANK_LABELS)?;
            let mut text = passage.to_string();
            for pair in candidate.split(", ") {
                let (blank, label) = pair.split_once('→').ok_or("bad assignment")?;
                let sentence = bank
                    .get(label)
                    .ok_or_else(|| format!("unknown bank label {label}"))?;
                let marker = format!("[BLANK-{blank}]");
                if !text.contains(&marker) {
                    return Err(format!("missing {marker}"));
                }
                text = text.replacen(&marker, sentence, 1);
            }
            Ok(text)
        }
    }
}

fn labeled_lines(block: &str, labels: &[&str]) -> Result<HashMap<String, String>, String> {
    let mut out = HashMap::new();
    for line in block.lines() {
        let (label, text) = line
            .strip_prefix('(')
            .and_then(|l| l.split_once(") "))
            .ok_or_else(|| format!("unlabeled line `{line}`"))?;
        if !labels.contains(&label) {
            return Err(format!("unexpected label {label}"));
        }
        out.insert(label.to_string(), text.to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ArticleMeta;
    use chrono::NaiveDate;

    fn ctx(seed: u64) -> GenContext {
        GenContext {
            domain: Domain::Cs,
            seed,
            config: FragmentConfig::default(),
        }
    }

    fn fragment(sentences: &[&str]) -> Fragment {
        Fragment {
            article_id: "2404.00001".into(),
            paragraph_span: [0, 1],
            sentences: sentences.iter().map(|s| s.to_string()).collect(),
            word_count: sentences.iter().map(|s| s.split_whitespace().count()).sum(),
        }
    }

    fn numbered(n: usize) -> Vec<String> {
        (1..=n)
            .map(|i| format!("Sentence number {i} is here."))
            .collect()
    }

    fn frag_n(n: usize) -> Fragment {
        let s = numbered(n);
        fragment(&s.iter().map(String::as_str).collect::<Vec<_>>())
    }

    #[test]
    fn permutations_are_complete() {
        let p = permutations4();
        assert_eq!(p.len(), 24);
        assert_eq!(p[0], [0, 1, 2, 3]);
        let mut sorted = p.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), 24);
    }

    #[test]
    fn sequencing_four_sentences_round_trip() {
        let f = fragment(&["s1.", "s2.", "s3.", "s4."]);
        for seed in 0..50 {
            let mut rng = ScpRng::for_seed(seed, "t");
            let case = gen_sequencing(&f, &mut rng, &ctx(seed)).unwrap();
            assert_eq!(
                apply_candidate(&case, case.correct_index).unwrap(),
                "s1. s2. s3. s4."
            );
            assert!(case.validate().is_ok());
        }
    }

    #[test]
    fn sequencing_group_sizes_spread_from_front() {
        let f = frag_n(7);
        let mut rng = ScpRng::for_seed(3, "t");
        let case = gen_sequencing(&f, &mut rng, &ctx(3)).unwrap();
        let mut sizes: Vec<usize> = case
            .stem
            .lines()
            .map(|l| l.matches("Sentence").count())
            .collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2, 2, 2]);
    }

    #[test]
    fn sequencing_needs_four_sentences() {
        let mut rng = ScpRng::for_seed(1, "t");
        assert_eq!(
            gen_sequencing(&fragment(&["a.", "b.", "c."]), &mut rng, &ctx(1)).unwrap_err(),
            Ineligible::TooFewSentences { have: 3, need: 4 }
        );
    }

    #[test]
    fn sequencing_candidates_over_many_seeds() {
        let f = frag_n(8);
        for seed in 0..1000u64 {
            let mut rng = ScpRng::for_seed(seed, "t");
            let case = gen_sequencing(&f, &mut rng, &ctx(seed)).unwrap();
            // Brute force over S4: exactly one candidate restores the text.
            let restoring = (0..4)
                .filter(|&i| apply_candidate(&case, i).unwrap() == f.text())
                .count();
            assert_eq!(restoring, 1);
            assert_eq!(
                apply_candidate(&case, case.correct_index).unwrap(),
                f.text()
            );
            assert!(case.validate().is_ok(), "seed {seed}");
            // The displayed order is never already correct.
            assert_ne!(case.candidates[case.correct_index], "A-B-C-D");
        }
    }

    #[test]
    fn cloze_round_trip_and_shape() {
        let f = frag_n(9);
        for seed in 0..200 {
            let mut rng = ScpRng::for_seed(seed, "t");
            let case = gen_cloze(&f, &mut rng, &ctx(seed)).unwrap();
            assert_eq!(
                apply_candidate(&case, case.correct_index).unwrap(),
                f.text()
            );
            for blank in 1..=4 {
                assert_eq!(case.stem.matches(&format!("[BLANK-{blank}]")).count(), 1);
            }
            let wrong = (0..4)
                .filter(|&i| i != case.correct_index)
                .all(|i| apply_candidate(&case, i).unwrap() != f.text());
            assert!(wrong);
            assert!(case.validate().is_ok());
        }
    }

    #[test]
    fn cloze_needs_six_sentences() {
        let mut rng = ScpRng::for_seed(1, "t");
        assert_eq!(
            gen_cloze(&frag_n(5), &mut rng, &ctx(1)).unwrap_err(),
            Ineligible::TooFewSentences { have: 5, need: 6 }
        );
    }

    #[test]
    fn cloze_is_deterministic() {
        let f = frag_n(10);
        let a = gen_cloze(&f, &mut ScpRng::for_seed(5, "t"), &ctx(5)).unwrap();
        let b = gen_cloze(&f, &mut ScpRng::for_seed(5, "t"), &ctx(5)).unwrap();
        assert_eq!(
            serde_json::to_vec(&a).unwrap(),
            serde_json::to_vec(&b).unwrap()
        );
    }

    fn article(paragraphs: &[&str]) -> Article {
        Article {
            meta: ArticleMeta {
                arxiv_id: "2404.00001".into(),
                domain: Domain::Cs,
                submitted: NaiveDate::from_ymd_opt(2024, 4, 2).unwrap(),
                title: "t".into(),
            },
            paragraphs: paragraphs.iter().map(|s| s.to_string()).collect(),
            raw_char_count: 0,
        }
    }

    #[test]
    fn prediction_round_trip_and_duplicate_skip() {
        let a = article(&[
            "We train a model. It learns fast. The model converges quickly.",
            "Unrelated text appears. The model converges quickly! Other words follow. Birds sing loudly. Cats sleep.",
        ]);
        let f = fragment(&[
            "We train a model.",
            "It learns fast.",
            "The model converges quickly.",
        ]);
        let pool = split_sentences(&a.paragraphs[1]);
        // Same tokens as the answer, different string: rank 1 in the pool.
        let ranking = tfidf_rank("The model converges quickly.", &pool);
        assert_eq!(pool[ranking[0].index], "The model converges quickly!");
        assert!((ranking[0].similarity - 1.0).abs() < 1e-12);

        let mut rng = ScpRng::for_seed(4, "t");
        let case = gen_prediction(&f, &a, &mut rng, &ctx(4)).unwrap();
        assert_eq!(
            apply_candidate(&case, case.correct_index).unwrap(),
            f.text()
        );
        assert!(case
            .candidates
            .contains(&"The model converges quickly!".to_string()));
        assert!(case.validate().is_ok());
    }

    #[test]
    fn prediction_needs_three_outside_sentences() {
        let a = article(&["A b c. D e f. G h i.", "Only one. Only two."]);
        let f = fragment(&["A b c.", "D e f.", "G h i."]);
        let mut rng = ScpRng::for_seed(1, "t");
        assert_eq!(
            gen_prediction(&f, &a, &mut rng, &ctx(1)).unwrap_err(),
            Ineligible::TooFewDistractors { have: 2 }
        );
    }

    #[test]
    fn prediction_exact_duplicates_never_become_candidates() {
        let a = article(&[
            "First here. Second here. Final answer sentence.",
            "Final answer sentence. Final answer sentence. Other one. Another one. Yet another one.",
        ]);
        let f = fragment(&["First here.", "Second here.", "Final answer sentence."]);
        let case = gen_prediction(&f, &a, &mut ScpRng::for_seed(2, "t"), &ctx(2)).unwrap();
        assert!(case.validate().is_ok());
        assert_eq!(
            case.candidates
                .iter()
                .filter(|c| *c == "Final answer sentence.")
                .count(),
            1
        );
    }

    #[test]
    fn case_ids_depend_on_kind_and_span() {
        let f = frag_n(8);
        let s = gen_sequencing(&f, &mut ScpRng::for_seed(1, "t"), &ctx(1)).unwrap();
        let c = gen_cloze(&f, &mut ScpRng::for_seed(1, "t"), &ctx(1)).unwrap();
        assert_ne!(s.case_id, c.case_id);
        let mut g = f.clone();
        g.paragraph_span = [1, 2];
        let s2 = gen_sequencing(&g, &mut ScpRng::for_seed(1, "t"), &ctx(1)).unwrap();
        assert_ne!(s.case_id, s2.case_id);
    }
}
