//! Tableau file format.
//!
//! UTF-8 text. `#` starts a comment, blank lines are ignored. A header of
//! `key: value` lines (`name`, `family`, `mode`, `fsal`, `source`) is followed
//! by bracketed sections:
//!
//! ```text
//! [C]     one row, 7 scalars
//! [A]     seven rows of 7 scalars (full matrix, zeros included)
//! [B]     one row, 7 scalars
//! [D]     one row, 7 scalars
//! [BETA]  optional, four rows of 7 scalars (theta^1..theta^4 coefficients)
//! ```
//!
//! Rational scalars are written `p/q` (`q` omitted when 1) and parsed
//! bit-exactly; float scalars use shortest round-trip decimals. `mode` decides
//! which: a rational file can be loaded (and exactly rounded) into float mode,
//! but float data never silently becomes rational.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::scalar::{Mode, Rational, Scalar, ScalarParseError};
use crate::stage::{StageVec, STAGES};
use crate::tableau::{AnyPair, ButcherPair, Interpolant, Violation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableauParseError {
    #[error("line {line}: {source}")]
    Scalar {
        line: usize,
        #[source]
        source: ScalarParseError,
    },
    #[error("line {line}: malformed header entry `{text}` (expected `key: value`)")]
    Header { line: usize, text: String },
    #[error("line {line}: unknown section `[{name}]`")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: section [{section}] row has {got} entries, expected {expected}")]
    RowLength {
        line: usize,
        section: String,
        got: usize,
        expected: usize,
    },
    #[error("section [{section}] has {got} rows, expected {expected}")]
    SectionShape {
        section: String,
        got: usize,
        expected: usize,
    },
    #[error("missing required section [{0}]")]
    MissingSection(String),
    #[error("missing or invalid `mode:` header (expected `rational` or `float`)")]
    BadMode,
    #[error("invalid `fsal:` header (expected `true` or `false`)")]
    BadFsal,
}

struct RawSections {
    header: HashMap<String, String>,
    sections: HashMap<String, Vec<(usize, Vec<String>)>>,
}

fn scan(text: &str) -> Result<RawSections, TableauParseError> {
    let mut header = HashMap::new();
    let mut sections: HashMap<String, Vec<(usize, Vec<String>)>> = HashMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim().to_uppercase();
            if !matches!(name.as_str(), "C" | "A" | "B" | "D" | "BETA") {
                return Err(TableauParseError::UnknownSection {
                    line: line_no,
                    name,
                });
            }
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        match &current {
            None => {
                let (key, value) =
                    line.split_once(':')
                        .ok_or_else(|| TableauParseError::Header {
                            line: line_no,
                            text: line.to_string(),
                        })?;
                header.insert(key.trim().to_lowercase(), value.trim().to_string());
            }
            Some(section) => {
                let tokens = line.split_whitespace().map(str::to_string).collect();
                sections
                    .get_mut(section)
                    .expect("section initialized")
                    .push((line_no, tokens));
            }
        }
    }
    Ok(RawSections { header, sections })
}

fn parse_row<S: Scalar>(
    section: &str,
    row: &(usize, Vec<String>),
) -> Result<StageVec<S>, TableauParseError> {
    let (line, tokens) = row;
    if tokens.len() != STAGES {
        return Err(TableauParseError::RowLength {
            line: *line,
            section: section.to_string(),
            got: tokens.len(),
            expected: STAGES,
        });
    }
    let mut out: Vec<S> = Vec::with_capacity(STAGES);
    for t in tokens {
        out.push(S::parse(t).map_err(|source| TableauParseError::Scalar {
            line: *line,
            source,
        })?);
    }
    Ok(out.try_into().map_err(|_| unreachable!()).unwrap())
}

fn take_section<'a>(
    raw: &'a RawSections,
    name: &str,
    rows: usize,
) -> Result<&'a [(usize, Vec<String>)], TableauParseError> {
    let data = raw
        .sections
        .get(name)
        .ok_or_else(|| TableauParseError::MissingSection(name.to_string()))?;
    if data.len() != rows {
        return Err(TableauParseError::SectionShape {
            section: name.to_string(),
            got: data.len(),
            expected: rows,
        });
    }
    Ok(data)
}

fn build_pair<S: Scalar>(raw: &RawSections, fsal: bool) -> Result<ButcherPair<S>, TableauParseError> {
    let c = parse_row::<S>("C", &take_section(raw, "C", 1)?[0])?;
    let a_rows = take_section(raw, "A", STAGES)?;
    let mut a: Vec<StageVec<S>> = Vec::with_capacity(STAGES);
    for row in a_rows {
        a.push(parse_row::<S>("A", row)?);
    }
    let b = parse_row::<S>("B", &take_section(raw, "B", 1)?[0])?;
    let d = parse_row::<S>("D", &take_section(raw, "D", 1)?[0])?;
    let interpolant = match raw.sections.get("BETA") {
        None => None,
        Some(_) => {
            let rows = take_section(raw, "BETA", 4)?;
            let mut beta: Vec<StageVec<S>> = Vec::with_capacity(4);
            for row in rows {
                beta.push(parse_row::<S>("BETA", row)?);
            }
            Some(Interpolant {
                beta: beta.try_into().map_err(|_| unreachable!()).unwrap(),
            })
        }
    };
    Ok(ButcherPair {
        name: raw.header.get("name").cloned().unwrap_or_default(),
        family: raw.header.get("family").cloned().unwrap_or_default(),
        source: raw.header.get("source").cloned().unwrap_or_default(),
        c,
        a: a.try_into().map_err(|_| unreachable!()).unwrap(),
        b,
        d,
        interpolant,
        fsal,
    })
}

/// Parses a tableau from text. Invariant violations do not reject the file
/// (broken tableaux can be studied); they are returned as warnings alongside.
pub fn load_str(text: &str) -> Result<(AnyPair, Vec<Violation>), TableauParseError> {
    let raw = scan(text)?;
    let mode = match raw.header.get("mode").map(String::as_str) {
        Some("rational") => Mode::Rational,
        Some("float") => Mode::Float,
        _ => return Err(TableauParseError::BadMode),
    };
    let fsal = match raw.header.get("fsal").map(String::as_str) {
        None | Some("true") => true,
        Some("false") => false,
        Some(_) => return Err(TableauParseError::BadFsal),
    };
    let pair = match mode {
        Mode::Rational => AnyPair::Rational(build_pair::<Rational>(&raw, fsal)?),
        Mode::Float => AnyPair::Float(build_pair::<f64>(&raw, fsal)?),
    };
    let warnings = pair.validate();
    Ok((pair, warnings))
}

pub fn load_path(path: impl AsRef<Path>) -> Result<(AnyPair, Vec<Violation>), super::TableauError> {
    let text = std::fs::read_to_string(path)?;
    Ok(load_str(&text)?)
}

fn write_pair<S: Scalar>(pair: &ButcherPair<S>, out: &mut String) {
    use std::fmt::Write as _;
    let row = |v: &StageVec<S>| {
        v.iter()
            .map(Scalar::format)
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(out, "name: {}", pair.name);
    let _ = writeln!(out, "family: {}", pair.family);
    let _ = writeln!(out, "mode: {}", S::MODE);
    let _ = writeln!(out, "fsal: {}", pair.fsal);
    if !pair.source.is_empty() {
        let _ = writeln!(out, "source: {}", pair.source);
    }
    let _ = writeln!(out, "\n[C]\n{}", row(&pair.c));
    let _ = writeln!(out, "\n[A]");
    for r in &pair.a {
        let _ = writeln!(out, "{}", row(r));
    }
    let _ = writeln!(out, "\n[B]\n{}", row(&pair.b));
    let _ = writeln!(out, "\n[D]\n{}", row(&pair.d));
    if let Some(interp) = &pair.interpolant {
        let _ = writeln!(out, "\n[BETA]");
        for r in &interp.beta {
            let _ = writeln!(out, "{}", row(r));
        }
    }
}

pub fn save_string(pair: &AnyPair) -> String {
    let mut out = String::new();
    match pair {
        AnyPair::Rational(p) => write_pair(p, &mut out),
        AnyPair::Float(p) => write_pair(p, &mut out),
    }
    out
}

pub fn save_path(pair: &AnyPair, path: impl AsRef<Path>) -> Result<(), super::TableauError> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(save_string(pair).as_bytes())?;
    Ok(())
}
