//! Fragment sampling with length, math-density and sentence-count filters.

use super::rng::ScpRng;
use super::sentences::split_sentences;
use super::{Fragment, FragmentConfig, ScpError};
use crate::corpus::{Article, MATH_PLACEHOLDER};

#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    TooShort {
        words: usize,
        min_words: usize,
    },
    MathHeavy {
        ratio: f64,
        max_ratio: f64,
    },
    TooFewSentences {
        sentences: usize,
        min_sentences: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum FragmentOutcome {
    Accepted(Fragment),
    Rejected(Rejection),
}

impl FragmentOutcome {
    pub fn accepted(self) -> Option<Fragment> {
        match self {
            FragmentOutcome::Accepted(f) => Some(f),
            FragmentOutcome::Rejected(_) => None,
        }
    }
}

/// Draws a uniformly random window of `config.n_paragraphs` paragraphs and
/// applies the fragment filters.
pub fn sample_fragment(
    article: &Article,
    config: &FragmentConfig,
    rng: &mut ScpRng,
) -> Result<FragmentOutcome, ScpError> {
    check_length(article, config)?;
    let windows = article.paragraphs.len() - config.n_paragraphs + 1;
    fragment_at(article, rng.below(windows), config)
}

/// The window starting at paragraph `start`, filtered.
pub fn fragment_at(
    article: &Article,
    start: usize,
    config: &FragmentConfig,
) -> Result<FragmentOutcome, ScpError> {
    check_length(article, config)?;
    let end = start + config.n_paragraphs;
    if end > article.paragraphs.len() {
        return Err(ScpError::Precondition(format!(
            "window [{start}, {end}) exceeds {} paragraphs",
            article.paragraphs.len()
        )));
    }
    let paragraphs = &article.paragraphs[start..end];

    let tokens: Vec<&str> = paragraphs
        .iter()
        .flat_map(|p| p.split_whitespace())
        .collect();
    let words = tokens.len();
    if words < config.min_words {
        return Ok(FragmentOutcome::Rejected(Rejection::TooShort {
            words,
            min_words: config.min_words,
        }));
    }
    let math = tokens
        .iter()
        .filter(|t| t.contains(MATH_PLACEHOLDER))
        .count();
    let ratio = math as f64 / words as f64;
    if ratio > config.max_math_ratio {
        return Ok(FragmentOutcome::Rejected(Rejection::MathHeavy {
            ratio,
            max_ratio: config.max_math_ratio,
        }));
    }
    let sentences: Vec<String> = paragraphs.iter().flat_map(|p| split_sentences(p)).collect();
    if sentences.len() < config.min_sentences() {
        return Ok(FragmentOutcome::Rejected(Rejection::TooFewSentences {
            sentences: sentences.len(),
            min_sentences: config.min_sentences(),
        }));
    }
    Ok(FragmentOutcome::Accepted(Fragment {
        article_id: article.meta.arxiv_id.clone(),
        paragraph_span: [start, end],
        word_count: sentences.iter().map(|s| s.split_whitespace().count()).sum(),
        sentences,
    }))
}

fn check_length(article: &Article, config: &FragmentConfig) -> Result<(), ScpError> {
    if article.paragraphs.is_empty() {
        return Err(ScpError::Precondition(format!(
            "article {} has no paragraphs",
            article.meta.arxiv_id
        )));
    }
    if article.paragraphs.len() < config.n_paragraphs {
        return Err(ScpError::Precondition(format!(
            "article {} has {} paragraphs, fragments need {}",
            article.meta.arxiv_id,
            article.paragraphs.len(),
            config.n_paragraphs
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ArticleMeta, Domain};
    use chrono::NaiveDate;

    fn article(paragraphs: Vec<String>) -> Article {
        Article {
            meta: ArticleMeta {
                arxiv_id: "2404.00001".into(),
                domain: Domain::Cs,
                submitted: NaiveDate::from_ymd_opt(2024, 4, 2).unwrap(),
                title: "t".into(),
            },
            paragraphs,
            raw_char_count: 0,
        }
    }

    /// `sentences` sentences of `words_each` words; total = product.
    fn paragraph(sentences: usize, words_each: usize) -> String {
        (0..sentences)
            .map(|s| {
                let mut w: Vec<String> = (0..words_each).map(|i| format!("w{s}x{i}")).collect();
                w[0] = format!("Word{s}");
                w.last_mut().unwrap().push('.');
                w.join(" ")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    #[test]
    fn hundred_words_accepted_with_defaults() {
        let a = article(vec![paragraph(5, 20)]);
        let mut rng = ScpRng::for_seed(1, "t");
        let f = sample_fragment(&a, &FragmentConfig::default(), &mut rng)
            .unwrap()
            .accepted()
            .expect("accepted");
        assert_eq!(f.word_count, 100);
        assert_eq!(f.sentences.len(), 5);
        assert_eq!(f.paragraph_span, [0, 1]);
        assert_eq!(f.text(), a.paragraphs[0]);
    }

    #[test]
    fn seventy_nine_words_rejected() {
        let mut p = paragraph(4, 20);
        p = p.replacen("w0x1 ", "", 1);
        assert_eq!(p.split_whitespace().count(), 79);
        let out = fragment_at(&article(vec![p]), 0, &FragmentConfig::default()).unwrap();
        assert_eq!(
            out,
            FragmentOutcome::Rejected(Rejection::TooShort {
                words: 79,
                min_words: 80
            })
        );
    }

    #[test]
    fn math_ratio_point_two_rejected() {
        // 20 tokens, 4 of them placeholders: ratio 0.20 > 0.15.
        let p = "Alpha ⟨MATH⟩ beta gamma delta. Epsilon ⟨MATH⟩ zeta eta theta. \
                 Iota ⟨MATH⟩ kappa lambda mu. Nu ⟨MATH⟩ xi omicron pi."
            .to_string();
        assert_eq!(p.split_whitespace().count(), 20);
        let cfg = FragmentConfig {
            min_words: 10,
            ..FragmentConfig::default()
        };
        match fragment_at(&article(vec![p]), 0, &cfg).unwrap() {
            FragmentOutcome::Rejected(Rejection::MathHeavy { ratio, .. }) => {
                assert!((ratio - 0.2).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn too_few_sentences_rejected() {
        let out = fragment_at(
            &article(vec![paragraph(2, 50)]),
            0,
            &FragmentConfig::default(),
        )
        .unwrap();
        assert!(matches!(
            out,
            FragmentOutcome::Rejected(Rejection::TooFewSentences { sentences: 2, .. })
        ));
    }

    #[test]
    fn empty_article_is_precondition_error() {
        let mut rng = ScpRng::for_seed(1, "t");
        assert!(matches!(
            sample_fragment(&article(vec![]), &FragmentConfig::default(), &mut rng),
            Err(ScpError::Precondition(_))
        ));
    }

    #[test]
    fn multi_paragraph_windows_are_contiguous() {
        let a = article((0..5).map(|_| paragraph(3, 10)).collect());
        let cfg = FragmentConfig {
            n_paragraphs: 3,
            ..FragmentConfig::default()
        };
        let mut rng = ScpRng::for_seed(9, "t");
        for _ in 0..20 {
            let f = sample_fragment(&a, &cfg, &mut rng)
                .unwrap()
                .accepted()
                .unwrap();
            let [s, e] = f.paragraph_span;
            assert_eq!(e - s, 3);
            assert!(e <= 5);
            assert_eq!(f.word_count, 90);
            assert_eq!(f.text(), a.paragraphs[s..e].join(" "));
        }
    }
}
