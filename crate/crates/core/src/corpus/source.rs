//! arXiv e-print payloads: gzipped tarballs, gzipped single files, bare TeX
//! or pre-extracted plain text.

use std::collections::BTreeMap;
use std::io::Read;

use flate2::read::GzDecoder;

use super::extract::{extract_text, Extracted, SourceFormat};
use super::CorpusError;

const MAX_INPUT_DEPTH: usize = 8;

/// Detects the payload kind, locates the main TeX file and extracts it.
///
/// Tarballs are searched for the file holding `\begin{document}` (the largest
/// one if several do), and `\input`/`\include` directives are inlined from the
/// same archive.
pub fn extract_source(bytes: &[u8]) -> Result<Extracted, CorpusError> {
    let bytes = if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(bytes)
            .read_to_end(&mut out)
            .map_err(|e| CorpusError::NoSource(format!("gzip: {e}")))?;
        out
    } else {
        bytes.to_vec()
    };

    if is_tar(&bytes) {
        let files = tex_files(&bytes)?;
        let main = files
            .iter()
            .filter(|(_, body)| body.contains("\\begin{document}"))
            .max_by_key(|(_, body)| body.len())
            .or_else(|| files.iter().max_by_key(|(_, body)| body.len()))
            .map(|(name, _)| name.clone())
            .ok_or_else(|| CorpusError::NoSource("tarball contains no .tex file".into()))?;
        let text = inline_inputs(&files[&main], &files, 0);
        return Ok(extract_text(text.as_bytes(), SourceFormat::Latex));
    }

    let text = String::from_utf8_lossy(&bytes);
    let format = if looks_like_latex(&text) {
        SourceFormat::Latex
    } else {
        SourceFormat::Plain
    };
    Ok(extract_text(text.as_bytes(), format))
}

fn is_tar(bytes: &[u8]) -> bool {
    bytes.len() > 262 && &bytes[257..262] == b"ustar"
}

fn looks_like_latex(text: &str) -> bool {
    [
        "\\begin{",
        "\\section",
        "\\documentclass",
        "\\emph{",
        "\\cite{",
    ]
    .iter()
    .any(|m| text.contains(m))
}

fn tex_files(bytes: &[u8]) -> Result<BTreeMap<String, String>, CorpusError> {
    let mut archive = tar::Archive::new(bytes);
    let mut files = BTreeMap::new();
    let entries = archive
        .entries()
        .map_err(|e| CorpusError::NoSource(format!("tar: {e}")))?;
    for entry in entries {
        let mut entry = entry.map_err(|e| CorpusError::NoSource(format!("tar: {e}")))?;
        let path = entry
            .path()
            .map_err(|e| CorpusError::NoSource(format!("tar: {e}")))?
            .to_string_lossy()
            .trim_start_matches("./")
            .to_string();
        if !path.ends_with(".tex") {
            continue;
        }
        let mut raw = Vec::new();
        entry
            .read_to_end(&mut raw)
            .map_err(|e| CorpusError::NoSource(format!("tar: {e}")))?;
        files.insert(path, String::from_utf8_lossy(&raw).into_owned());
    }
    Ok(files)
}

fn inline_inputs(text: &str, files: &BTreeMap<String, String>, depth: usize) -> String {
    if depth >= MAX_INPUT_DEPTH {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(idx) = find_input(rest) {
        out.push_str(&rest[..idx.start]);
        let name = idx.name.trim();
        let key = if name.ends_with(".tex") {
            name.to_string()
        } else {
            format!("{name}.tex")
        };
        if let Some(body) = files.get(&key) {
            out.push('\n');
            out.push_str(&inline_inputs(body, files, depth + 1));
            out.push('\n');
        }
        rest = &rest[idx.end..];
    }
    out.push_str(rest);
    out
}

struct InputDirective<'a> {
    start: usize,
    end: usize,
    name: &'a str,
}

fn find_input(text: &str) -> Option<InputDirective<'_>> {
    let mut search = 0;
    loop {
        let hit = ["\\input{", "\\include{"]
            .iter()
            .filter_map(|m| text[search..].find(m).map(|i| (search + i, m.len())))
            .min_by_key(|(i, _)| *i)?;
        let (start, len) = hit;
        let open = start + len;
        let close_rel = text[open..].find('}')?;
        // Skip directives that are commented out on their own line.
        let line_start = text[..start].rfind('\n').map_or(0, |i| i + 1);
        if text[line_start..start].contains('%') {
            search = open;
            continue;
        }
        return Some(InputDirective {
            start,
            end: open + close_rel + 1,
            name: &text[open..open + close_rel],
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use flate2::write::GzEncoder;
    use flate2::Compression;
    use std::io::Write;

    fn tarball(files: &[(&str, &str)]) -> Vec<u8> {
        let mut builder = tar::Builder::new(Vec::new());
        for (name, body) in files {
            let mut header = tar::Header::new_gnu();
            header.set_size(body.len() as u64);
            header.set_mode(0o644);
            header.set_cksum();
            builder
                .append_data(&mut header, name, body.as_bytes())
                .unwrap();
        }
        let tar = builder.into_inner().unwrap();
        let mut gz = GzEncoder::new(Vec::new(), Compression::default());
        gz.write_all(&tar).unwrap();
        gz.finish().unwrap()
    }

    #[test]
    fn tarball_main_file_with_inputs() {
        let bytes = tarball(&[
            ("macros.tex", "\\newcommand{\\R}{\\mathbb{R}}"),
            (
                "main.tex",
                "\\documentclass{article}\\begin{document}\nFirst part.\n\n\\input{sections/intro}\n\\end{document}",
            ),
            ("sections/intro.tex", "Intro with $x$ math."),
        ]);
        let out = extract_source(&bytes).unwrap();
        assert_eq!(
            out.paragraphs,
            vec!["First part.", "Intro with ⟨MATH⟩ math."]
        );
    }

    #[test]
    fn gzipped_single_tex() {
        let mut gz = GzEncoder::new(Vec::new(), Compression::default());
        gz.write_all(b"\\section{A}\nBody $y$.").unwrap();
        let out = extract_source(&gz.finish().unwrap()).unwrap();
        assert_eq!(out.paragraphs, vec!["A", "Body ⟨MATH⟩."]);
    }

    #[test]
    fn plain_text_passthrough() {
        let out = extract_source(b"Line one.\nLine two.").unwrap();
        assert_eq!(out.paragraphs, vec!["Line one.", "Line two."]);
    }

    #[test]
    fn tarball_without_tex_is_rejected() {
        let bytes = tarball(&[("fig.png", "binary")]);
        assert!(matches!(
            extract_source(&bytes),
            Err(CorpusError::NoSource(_))
        ));
    }
}
