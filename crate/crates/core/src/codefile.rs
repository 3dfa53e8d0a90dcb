//! Plain-text code files.
//!
//! ```text
//! # provenance {"seed":1,"solver":"min-degree-greedy"}
//! HCC 7 2 3
//! 0001011
//! 0010110
//! ```
//!
//! The header is `KIND n q d`, followed by `w` for OOC, `[w] lambda` for FHS
//! and `[w] kappa` for WMUC; the optional weight is recognized by the token
//! count. Each further line holds one word. Lines starting with `#` are
//! comments, and a comment of the form `# provenance <json object>` carries
//! provenance. Blank lines are ignored. Files end with a newline.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::code::{CodeArtifact, CodeKind, CodeParams};
use crate::error::{Error, Result};
use crate::words::Word;

const PROVENANCE: &str = "provenance";

pub fn header(kind: CodeKind, p: &CodeParams) -> String {
    let mut tokens = vec![kind.as_str().to_string(), p.n.to_string(), p.q.to_string(), p.d.to_string()];
    tokens.extend(p.weight.map(|w| w.to_string()));
    match kind {
        CodeKind::Fhs => tokens.extend(p.lambda.map(|l| l.to_string())),
        CodeKind::Wmuc => tokens.extend(p.kappa.map(|k| k.to_string())),
        _ => {}
    }
    tokens.join(" ")
}

pub fn write_code(code: &CodeArtifact) -> String {
    let mut out = String::new();
    if !code.provenance.is_empty() {
        let json = serde_json::to_string(&code.provenance).unwrap_or_default();
        let _ = writeln!(out, "# {PROVENANCE} {json}");
    }
    let _ = writeln!(out, "{}", header(code.kind, &code.params));
    for w in &code.words {
        let _ = writeln!(out, "{w}");
    }
    out
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(line_no: usize, line: &str) -> Result<(CodeKind, CodeParams)> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let kind = match tokens.first().copied() {
        Some("HCC") => CodeKind::Hcc,
        Some("OOC") => CodeKind::Ooc,
        Some("FHS") => CodeKind::Fhs,
        Some("WMUC") => CodeKind::Wmuc,
        other => return Err(parse_error(line_no, format!("unknown code kind {:?}", other.unwrap_or("")))),
    };
    let numbers = tokens[1..]
        .iter()
        .map(|t| t.parse::<usize>().map_err(|_| parse_error(line_no, format!("expected an integer, got {t:?}"))))
        .collect::<Result<Vec<usize>>>()?;
    let expected = match kind {
        CodeKind::Hcc => "HCC n q d",
        CodeKind::Ooc => "OOC n q d w",
        CodeKind::Fhs => "FHS n q d [w] lambda",
        CodeKind::Wmuc => "WMUC n q d [w] kappa",
    };
    let (weight, extra) = match (kind, numbers.len()) {
        (CodeKind::Hcc, 3) => (None, None),
        (CodeKind::Ooc, 4) => (Some(numbers[3]), None),
        (CodeKind::Fhs | CodeKind::Wmuc, 4) => (None, Some(numbers[3])),
        (CodeKind::Fhs | CodeKind::Wmuc, 5) => (Some(numbers[3]), Some(numbers[4])),
        _ => return Err(parse_error(line_no, format!("header must read \"{expected}\""))),
    };
    let q = u16::try_from(numbers[1]).map_err(|_| parse_error(line_no, "alphabet size out of range"))?;
    if numbers[0] == 0 {
        return Err(parse_error(line_no, "n must be positive"));
    }
    Ok((
        kind,
        CodeParams {
            n: numbers[0],
            q,
            d: numbers[2],
            weight,
            lambda: if kind == CodeKind::Fhs { extra } else { None },
            kappa: if kind == CodeKind::Wmuc { extra } else { None },
        },
    ))
}

pub fn parse_code(text: &str) -> Result<CodeArtifact> {
    let mut provenance = BTreeMap::new();
    let mut head: Option<(CodeKind, CodeParams)> = None;
    let mut words = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(json) = comment.trim_start().strip_prefix(PROVENANCE) {
                let map: BTreeMap<String, serde_json::Value> = serde_json::from_str(json.trim())
                    .map_err(|e| parse_error(line_no, format!("bad provenance: {e}")))?;
                provenance.extend(map);
            }
            continue;
        }
        match &head {
            None => head = Some(parse_header(line_no, line)?),
            Some((_, p)) => {
                let word = Word::parse(line, p.q).map_err(|e| parse_error(line_no, e.to_string()))?;
                words.push(word);
            }
        }
    }
    let (kind, params) = head.ok_or_else(|| parse_error(0, "missing header line"))?;
    Ok(CodeArtifact {
        kind,
        params,
        words,
        provenance,
    })
}

pub fn save(path: &Path, code: &CodeArtifact) -> Result<()> {
    std::fs::write(path, write_code(code))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<CodeArtifact> {
    parse_code(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(kind: CodeKind, weight: Option<usize>, lambda: Option<usize>, kappa: Option<usize>) -> CodeArtifact {
        let mut provenance = BTreeMap::new();
        provenance.insert("seed".to_string(), serde_json::json!(7));
        CodeArtifact {
            kind,
            params: CodeParams {
                n: 4,
                q: 2,
                d: 2,
                weight,
                lambda,
                kappa,
            },
            words: vec![Word::parse("0001", 2).unwrap(), Word::parse("0010", 2).unwrap()],
            provenance,
        }
    }

    #[test]
    fn round_trips() {
        for code in [
            sample(CodeKind::Hcc, None, None, None),
            sample(CodeKind::Ooc, Some(1), None, None),
            sample(CodeKind::Fhs, None, Some(2), None),
            sample(CodeKind::Fhs, Some(1), Some(2), None),
            sample(CodeKind::Wmuc, None, None, Some(3)),
            sample(CodeKind::Wmuc, Some(1), None, Some(3)),
        ] {
            let text = write_code(&code);
            assert!(text.ends_with('\n'));
            assert_eq!(parse_code(&text).unwrap(), code);
        }
    }

    #[test]
    fn exact_text() {
        let text = write_code(&sample(CodeKind::Ooc, Some(1), None, None));
        assert_eq!(text, "# provenance {\"seed\":7}\nOOC 4 2 2 1\n0001\n0010\n");
        let wide = parse_code("HCC 2 12 1\n0,11\n11,0\n").unwrap();
        assert_eq!(write_code(&wide), "HCC 2 12 1\n0,11\n11,0\n");
    }

    #[test]
    fn parse_errors_carry_lines() {
        let cases = [
            ("", 0),
            ("XYZ 4 2 2\n", 1),
            ("# note\nHCC 4 2\n", 2),
            ("HCC 4 2 2\n0001\n0201\n", 3),
            ("OOC 4 2 2\n", 1),
            ("\n# provenance {oops\nHCC 4 2 2\n", 2),
        ];
        for (text, line) in cases {
            match parse_code(text) {
                Err(Error::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
        let empty = parse_code("HCC 5 2 3\n").unwrap();
        assert!(empty.words.is_empty());
    }
}
