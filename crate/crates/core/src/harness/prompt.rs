//! The prompt template. Any wording change here must bump
//! [`GENERATOR_VERSION`](crate::scpgen::GENERATOR_VERSION).

use crate::scpgen::{TaskKind, TestCase};

const CLOSING: &str = "Answer with a single letter (A, B, C, or D).";

pub fn instruction(kind: TaskKind) -> &'static str {
    match kind {
        TaskKind::Sequencing => {
            "Sequencing task: the passage below was split into segments that are shown out of order. \
             Choose the order of segments that restores the original passage."
        }
        TaskKind::Cloze => {
            "Cloze task: sentences were removed from the passage below and listed after it. \
             Choose the assignment of sentences to blanks that restores the original passage."
        }
        TaskKind::Prediction => {
            "Prediction task: read the passage below and choose the sentence that comes next in the original text."
        }
    }
}

/// Instruction, stem, the four labelled candidates and the closing line,
/// separated by blank lines. Trailing whitespace is stripped from every line
/// and the prompt ends without a newline.
pub fn render_prompt(case: &TestCase) -> String {
    let mut out = String::new();
    out.push_str(instruction(case.task_kind));
    out.push_str("\n\n");
    out.push_str(case.stem.trim_end());
    out.push_str("\n\n");
    for (i, candidate) in case.candidates.iter().enumerate() {
        let letter = (b'A' + i as u8) as char;
        out.push_str(&format!("{letter}. {}\n", flatten(candidate)));
    }
    out.push('\n');
    out.push_str(CLOSING);
    out.lines()
        .map(str::trim_end)
        .collect::<Vec<_>>()
        .join("\n")
}

/// Candidates are single-line by construction; guard anyway so the label
/// lines stay exactly four.
fn flatten(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
