//! LaTeX / plain-text cleanup into paragraph lists.

use serde::{Deserialize, Serialize};

/// Single token that stands in for every inline or display formula.
pub const MATH_PLACEHOLDER: &str = "⟨MATH⟩";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    Latex,
    Plain,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Extracted {
    pub paragraphs: Vec<String>,
    pub raw_char_count: usize,
    /// Recoverable problems, e.g. unbalanced math delimiters.
    pub warnings: Vec<String>,
}

/// Environments removed together with their contents.
const DROPPED_ENVS: &[&str] = &[
    "table",
    "table*",
    "figure",
    "figure*",
    "wrapfigure",
    "subfigure",
    "tabular",
    "tabular*",
    "tabularx",
    "longtable",
    "algorithm",
    "algorithm*",
    "algorithmic",
    "lstlisting",
    "verbatim",
    "thebibliography",
    "tikzpicture",
];

/// Environments replaced by a single placeholder.
const MATH_ENVS: &[&str] = &[
    "equation",
    "equation*",
    "align",
    "align*",
    "alignat",
    "alignat*",
    "gather",
    "gather*",
    "multline",
    "multline*",
    "flalign",
    "flalign*",
    "eqnarray",
    "eqnarray*",
    "displaymath",
    "math",
    "dmath",
    "dmath*",
];

/// Commands dropped along with all their arguments.
const DROPPED_COMMANDS: &[&str] = &[
    "label",
    "cite",
    "citep",
    "citet",
    "citealp",
    "citeauthor",
    "citeyear",
    "ref",
    "eqref",
    "autoref",
    "cref",
    "Cref",
    "pageref",
    "footnote",
    "url",
    "includegraphics",
    "vspace",
    "hspace",
    "bibliography",
    "bibliographystyle",
    "title",
    "author",
    "date",
    "affiliation",
    "thanks",
    "email",
    "keywords",
    "newcommand",
    "renewcommand",
    "def",
    "usepackage",
    "documentclass",
    "input",
    "include",
    "setlength",
];

/// Commands whose argument becomes a paragraph of its own.
const HEADING_COMMANDS: &[&str] = &[
    "part",
    "chapter",
    "section",
    "subsection",
    "subsubsection",
    "paragraph",
    "subparagraph",
];

/// Cleans `raw` into paragraphs.
///
/// LaTeX input has comments stripped, math replaced by [`MATH_PLACEHOLDER`],
/// tables and figures dropped and paragraphs split on blank lines. Plain input
/// is split on newline runs with whitespace collapsed, which makes the plain
/// path idempotent on its own output joined by `\n`.
pub fn extract_text(raw: &[u8], format: SourceFormat) -> Extracted {
    let text = String::from_utf8_lossy(raw).replace("\r\n", "\n");
    let raw_char_count = text.chars().count();
    match format {
        SourceFormat::Plain => Extracted {
            paragraphs: text
                .split('\n')
                .map(collapse_whitespace)
                .filter(|p| !p.is_empty())
                .collect(),
            raw_char_count,
            warnings: Vec::new(),
        },
        SourceFormat::Latex => {
            let body = document_body(&strip_comments(&text));
            let mut scanner = Scanner::new(&body);
            scanner.run();
            let paragraphs = split_paragraphs(&scanner.out);
            Extracted {
                paragraphs,
                raw_char_count,
                warnings: scanner.warnings,
            }
        }
    }
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn strip_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.split('\n') {
        match comment_start(line) {
            Some(0) => continue,
            Some(idx) if line[..idx].trim().is_empty() => continue,
            Some(idx) => out.push_str(&line[..idx]),
            None => out.push_str(line),
        }
        out.push('\n');
    }
    out
}

/// Byte index of the first `%` not escaped by an odd run of backslashes.
fn comment_start(line: &str) -> Option<usize> {
    let bytes = line.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'%' {
            let backslashes = bytes[..i].iter().rev().take_while(|&&c| c == b'\\').count();
            if backslashes % 2 == 0 {
                return Some(i);
            }
        }
    }
    None
}

fn document_body(text: &str) -> String {
    const BEGIN: &str = "\\begin{document}";
    const END: &str = "\\end{document}";
    match text.find(BEGIN) {
        Some(start) => {
            let rest = &text[start + BEGIN.len()..];
            match rest.find(END) {
                Some(end) => rest[..end].to_string(),
                None => rest.to_string(),
            }
        }
        None => text.to_string(),
    }
}

fn split_paragraphs(text: &str) -> Vec<String> {
    let mut paragraphs = Vec::new();
    let mut current = String::new();
    for line in text.split('\n') {
        if line.trim().is_empty() {
            push_paragraph(&mut paragraphs, &current);
            current.clear();
        } else {
            current.push(' ');
            current.push_str(line);
        }
    }
    push_paragraph(&mut paragraphs, &current);
    paragraphs
}

fn push_paragraph(out: &mut Vec<String>, raw: &str) {
    let p = tidy_punctuation(&collapse_whitespace(raw));
    if !p.is_empty() {
        out.push(p);
    }
}

/// Removes the spaces left behind by dropped commands before punctuation and
/// inside parentheses.
fn tidy_punctuation(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if matches!(c, ',' | '.' | ';' | ':' | ')' | '!' | '?') && out.ends_with(' ') {
            out.pop();
        }
        if c == ' ' && out.ends_with('(') {
            continue;
        }
        out.push(c);
    }
    out.trim().to_string()
}

struct Scanner {
    chars: Vec<char>,
    pos: usize,
    out: String,
    warnings: Vec<String>,
}

impl Scanner {
    fn new(text: &str) -> Self {
        Self {
            chars: text.chars().collect(),
            pos: 0,
            out: String::new(),
            warnings: Vec::new(),
        }
    }

    fn peek(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn starts_with(&self, at: usize, pat: &str) -> bool {
        pat.chars()
            .enumerate()
            .all(|(k, c)| self.chars.get(at + k) == Some(&c))
    }

    fn find(&self, from: usize, pat: &str) -> Option<usize> {
        (from..self.chars.len()).find(|&i| self.starts_with(i, pat))
    }

    /// Index of the next blank line (paragraph break) at or after `from`.
    fn paragraph_end(&self, from: usize) -> usize {
        let mut i = from;
        while i < self.chars.len() {
            if self.chars[i] == '\n' {
                let mut j = i + 1;
                while j < self.chars.len() && self.chars[j] != '\n' && self.chars[j].is_whitespace()
                {
                    j += 1;
                }
                if j >= self.chars.len() || self.chars[j] == '\n' {
                    return i;
                }
            }
            i += 1;
        }
        self.chars.len()
    }

    fn emit_math(&mut self) {
        self.out.push(' ');
        self.out.push_str(MATH_PLACEHOLDER);
        self.out.push(' ');
    }

    /// Replaces the rest of the current paragraph with a placeholder.
    fn unbalanced_math(&mut self, what: &str) {
        self.warnings.push(format!(
            "unbalanced {what} at char {}; rest of paragraph treated as math",
            self.pos
        ));
        self.emit_math();
        self.pos = self.paragraph_end(self.pos);
    }

    fn run(&mut self) {
        while let Some(c) = self.peek(0) {
            match c {
                '\\' => self.command(),
                '$' => self.dollar_math(),
                '{' | '}' => self.pos += 1,
                '~' => {
                    self.out.push(' ');
                    self.pos += 1;
                }
                _ => {
                    self.out.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    fn dollar_math(&mut self) {
        let display = self.peek(1) == Some('$');
        let delim = if display { "$$" } else { "$" };
        let start = self.pos + delim.len();
        let limit = self.paragraph_end(start);
        let mut i = start;
        let mut close = None;
        while i < limit {
            match self.chars[i] {
                '\\' => i += 2,
                '$' if self.starts_with(i, delim) => {
                    close = Some(i);
                    break;
                }
                _ => i += 1,
            }
        }
        match close {
            Some(end) => {
                self.emit_math();
                self.pos = end + delim.len();
            }
            None => self.unbalanced_math(if display { "$$" } else { "$" }),
        }
    }

    fn delimited_math(&mut self, close: &str, what: &str) {
        let start = self.pos + 2;
        match self.find(start, close) {
            Some(end) => {
                self.emit_math();
                self.pos = end + close.len();
            }
            None => self.unbalanced_math(what),
        }
    }

    fn command(&mut self) {
        let next = match self.peek(1) {
            Some(c) => c,
            None => {
                self.pos += 1;
                return;
            }
        };
        match next {
            '[' => return self.delimited_math("\\]", "\\["),
            '(' => return self.delimited_math("\\)", "\\("),
            '\\' => {
                self.out.push(' ');
                self.pos += 2;
                return;
            }
            '%' | '$' | '&' | '#' | '_' | '{' | '}' => {
                self.out.push(next);
                self.pos += 2;
                return;
            }
            c if !c.is_ascii_alphabetic() => {
                // \, \; \! \  and accents: treat as a space or drop.
                if c == ' ' || c == ',' || c == ';' {
                    self.out.push(' ');
                }
                self.pos += 2;
                return;
            }
            _ => {}
        }

        let name_start = self.pos + 1;
        let mut end = name_start;
        while end < self.chars.len() && self.chars[end].is_ascii_alphabetic() {
            end += 1;
        }
        let mut name: String = self.chars[name_start..end].iter().collect();
        if self.chars.get(end) == Some(&'*') {
            name.push('*');
            end += 1;
        }
        self.pos = end;

        match name.as_str() {
            "begin" => self.begin_environment(),
            "end" => {
                self.skip_group();
            }
            "par" => self.out.push_str("\n\n"),
            "item" => {
                self.skip_optional();
                self.out.push(' ');
            }
            "href" => {
                self.skip_group();
            }
            _ => {
                let base = name.trim_end_matches('*');
                if DROPPED_COMMANDS.contains(&base) {
                    self.skip_arguments();
                } else if HEADING_COMMANDS.contains(&base) {
                    self.skip_optional();
                    let heading = self.take_group();
                    self.out.push_str("\n\n");
                    let mut inner = Scanner::new(&heading);
                    inner.run();
                    self.warnings.append(&mut inner.warnings);
                    self.out.push_str(&inner.out.replace('\n', " "));
                    self.out.push_str("\n\n");
                } else {
                    // Unknown command: drop the name and optional arguments,
                    // keep braced content (braces are skipped by the main loop).
                    self.skip_optional();
                    if self.peek(0).is_some_and(|c| c.is_whitespace()) && base.len() > 1 {
                        self.out.push(' ');
                    }
                }
            }
        }
    }

    fn begin_environment(&mut self) {
        let env = self.take_group();
        let env = env.trim().to_string();
        let end_marker = format!("\\end{{{env}}}");
        if DROPPED_ENVS.contains(&env.as_str()) {
            match self.matching_end(&env) {
                Some(after) => self.pos = after,
                None => {
                    self.warnings
                        .push(format!("unterminated environment {env}; dropped to end"));
                    self.pos = self.chars.len();
                }
            }
            self.out.push_str("\n\n");
        } else if MATH_ENVS.contains(&env.as_str()) {
            match self.find(self.pos, &end_marker) {
                Some(end) => {
                    self.emit_math();
                    self.pos = end + end_marker.chars().count();
                }
                None => self.unbalanced_math(&format!("environment {env}")),
            }
        } else {
            // Other environments (abstract, itemize, theorem, ...) keep content.
            self.skip_optional();
        }
    }

    /// Position just after the `\end{env}` closing the environment opened
    /// before `self.pos`, respecting nesting of the same environment.
    fn matching_end(&self, env: &str) -> Option<usize> {
        let begin = format!("\\begin{{{env}}}");
        let end = format!("\\end{{{env}}}");
        let mut depth = 1usize;
        let mut i = self.pos;
        while i < self.chars.len() {
            if self.starts_with(i, &begin) {
                depth += 1;
                i += begin.chars().count();
            } else if self.starts_with(i, &end) {
                depth -= 1;
                i += end.chars().count();
                if depth == 0 {
                    return Some(i);
                }
            } else {
                i += 1;
            }
        }
        None
    }

    fn skip_spaces(&mut self) {
        while self.peek(0).is_some_and(|c| c.is_whitespace() && c != '\n') {
            self.pos += 1;
        }
    }

    fn skip_optional(&mut self) {
        let save = self.pos;
        self.skip_spaces();
        if self.peek(0) == Some('[') {
            if let Some(close) = self.balanced_close(self.pos, '[', ']') {
                self.pos = close + 1;
                return;
            }
        }
        self.pos = save;
    }

    fn skip_arguments(&mut self) {
        loop {
            let save = self.pos;
            self.skip_spaces();
            match self.peek(0) {
                Some('[') => match self.balanced_close(self.pos, '[', ']') {
                    Some(close) => self.pos = close + 1,
                    None => {
                        self.pos = save;
                        return;
                    }
                },
                Some('{') => {
                    self.skip_group();
                }
                _ => {
                    self.pos = save;
                    return;
                }
            }
        }
    }

    fn skip_group(&mut self) {
        let _ = self.take_group();
    }

    /// Consumes a `{...}` group and returns its raw content.
    fn take_group(&mut self) -> String {
        self.skip_spaces();
        if self.peek(0) != Some('{') {
            return String::new();
        }
        match self.balanced_close(self.pos, '{', '}') {
            Some(close) => {
                let content: String = self.chars[self.pos + 1..close].iter().collect();
                self.pos = close + 1;
                content
            }
            None => {
                let content: String = self.chars[self.pos + 1..].iter().collect();
                self.warnings
                    .push(format!("unbalanced brace at char {}", self.pos));
                self.pos = self.chars.len();
                content
            }
        }
    }

    fn balanced_close(&self, open_at: usize, open: char, close: char) -> Option<usize> {
        let mut depth = 0usize;
        let mut i = open_at;
        while i < self.chars.len() {
            let c = self.chars[i];
            if c == '\\' {
                i += 2;
                continue;
            }
            if c == open {
                depth += 1;
            } else if c == close {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            i += 1;
        }
        None
    }
}
