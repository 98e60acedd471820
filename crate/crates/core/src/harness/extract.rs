//! Exact-match answer extraction.
//!
//! Rules, first hit wins:
//! 1. `answer is X` / `answer: X` with optional punctuation before the letter
//!    (the last such phrase counts, so a closing "final answer: B" overrides
//!    earlier musing),
//! 2. the first parenthesised letter, `(B)`,
//! 3. the first standalone A-D token, case-insensitive.
//!
//! "Standalone" means not adjacent to a letter, digit, underscore or
//! apostrophe, so the `d` in "I'd" is not an answer.

use std::sync::LazyLock;

use regex::Regex;

use super::Answer;

static RULE_ANSWER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?i)\banswer(?:\s+is|\s*:)[\s:.,;*"'(\[{-]*([abcd])(?:$|[^\w'])"#)
        .expect("valid regex")
});
static RULE_PAREN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\(\s*([A-Da-d])\s*\)").expect("valid regex"));
static RULE_TOKEN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)(?:^|[^\w'])([abcd])(?:$|[^\w'])").expect("valid regex"));

pub fn extract_answer(raw: &str) -> Answer {
    let letter = RULE_ANSWER
        .captures_iter(raw)
        .last()
        .or_else(|| RULE_PAREN.captures(raw))
        .or_else(|| RULE_TOKEN.captures(raw))
        .and_then(|c| c.get(1))
        .map(|m| m.as_str());
    match letter {
        Some(l) => l.parse().unwrap_or(Answer::None),
        None => Answer::None,
    }
}
