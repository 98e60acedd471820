//! Rule-based sentence splitting.

/// Tokens ending in a period that do not end a sentence (compared lowercase,
/// after stripping opening brackets and quotes).
const ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "al.", "etc.", "cf.", "vs.", "viz.", "approx.", "resp.", "ca.", "fig.",
    "figs.", "eq.", "eqs.", "eqn.", "eqns.", "sec.", "secs.", "ref.", "refs.", "tab.", "thm.",
    "lem.", "def.", "prop.", "cor.", "alg.", "appx.", "no.", "nos.", "vol.", "pp.", "ch.", "dr.",
    "mr.", "mrs.", "ms.", "prof.", "st.", "jr.", "sr.",
];

const OPENERS: &[char] = &['(', '[', '"', '\'', '“', '‘'];
const CLOSERS: &[char] = &[')', ']', '"', '\'', '”', '’'];

/// Splits a paragraph on `.`, `!` or `?` followed by whitespace and a capital
/// letter or digit, except after a known abbreviation or a single-letter
/// initial. Whitespace inside sentences is collapsed, so joining the result
/// with single spaces gives back the paragraph modulo whitespace.
pub fn split_sentences(paragraph: &str) -> Vec<String> {
    let tokens: Vec<&str> = paragraph.split_whitespace().collect();
    let mut sentences = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        current.push(token);
        let Some(next) = tokens.get(i + 1) else {
            break;
        };
        if ends_sentence(token) && starts_sentence(next) {
            sentences.push(current.join(" "));
            current.clear();
        }
    }
    if !current.is_empty() {
        sentences.push(current.join(" "));
    }
    sentences
}

fn ends_sentence(token: &str) -> bool {
    let core = token.trim_end_matches(CLOSERS);
    let Some(last) = core.chars().last() else {
        return false;
    };
    match last {
        '!' | '?' => true,
        '.' => !is_abbreviation(core),
        _ => false,
    }
}

fn is_abbreviation(token: &str) -> bool {
    let word = token.trim_start_matches(OPENERS).to_lowercase();
    if ABBREVIATIONS.contains(&word.as_str()) {
        return true;
    }
    // Initials such as "J." in "J. Smith".
    let mut chars = token.trim_start_matches(OPENERS).chars();
    matches!(
        (chars.next(), chars.next(), chars.next()),
        (Some(c), Some('.'), None) if c.is_uppercase()
    )
}

fn starts_sentence(token: &str) -> bool {
    token
        .trim_start_matches(OPENERS)
        .chars()
        .next()
        .is_some_and(|c| c.is_uppercase() || c.is_ascii_digit())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_terminal_punctuation() {
        assert_eq!(
            split_sentences("A cat sat. It slept."),
            vec!["A cat sat.", "It slept."]
        );
        assert_eq!(
            split_sentences("Really? Yes! 3 more follow."),
            vec!["Really?", "Yes!", "3 more follow."]
        );
    }

    #[test]
    fn abbreviations_do_not_split() {
        let s = split_sentences("See Fig. 2 for details. Done.");
        assert_eq!(s, vec!["See Fig. 2 for details.", "Done."]);
        let s = split_sentences("As shown by Smith et al. The result holds (e.g. Table 3).");
        assert_eq!(s.len(), 1);
        let s = split_sentences("Work by J. Smith shows this. Next.");
        assert_eq!(s, vec!["Work by J. Smith shows this.", "Next."]);
    }

    #[test]
    fn lowercase_continuation_does_not_split() {
        assert_eq!(
            split_sentences("Values near 0.5. then rise."),
            vec!["Values near 0.5. then rise."]
        );
    }

    #[test]
    fn closing_quotes_and_brackets() {
        assert_eq!(
            split_sentences("He said \"stop.\" Then left. (Really.) Yes."),
            vec!["He said \"stop.\"", "Then left.", "(Really.)", "Yes."]
        );
    }

    #[test]
    fn five_sentence_fixture_round_trips() {
        let paragraph = "We study sparse models.  They are   fast. Results improve by 3%. \
                         Table 2 lists them. Future work remains.";
        let s = split_sentences(paragraph);
        assert_eq!(s.len(), 5);
        let normalized: Vec<&str> = paragraph.split_whitespace().collect();
        assert_eq!(s.join(" "), normalized.join(" "));
    }

    #[test]
    fn no_terminal_punctuation_is_one_sentence() {
        assert_eq!(
            split_sentences("no punctuation here"),
            vec!["no punctuation here"]
        );
        assert!(split_sentences("   ").is_empty());
    }
}
