//! Instance grammar: one header line, then whitespace-separated value tokens.
//!
//!   header  := "m=<int> t=<int>"   (subset-sum)
//!            | "n=<int>"           (egz / zero-run)
//!   token   := <value> | <value>:<count>
//!
//! Errors carry 1-based line and byte-column positions.

use std::fmt;

// Guard against hostile `value:count` expansions; real inputs top out around
// 2n-1 for n = 10^5.
const MAX_ELEMENTS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    fn at(line: usize, col: usize, msg: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

/// A parsed instance file, still un-reduced: the solver constructors own
/// mod-m reduction and duplicate merging.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedInstance {
    SubsetSum {
        m: u64,
        t: u64,
        /// (value, count) in input order.
        pairs: Vec<(u64, u64)>,
    },
    Elements {
        n: u64,
        /// `v:c` tokens expanded in place, preserving input order.
        values: Vec<u64>,
    },
}

/// (line, col, token) with 1-based positions; col counts bytes.
fn tokenize(text: &str) -> Vec<(usize, usize, &str)> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut rest = line;
        let mut offset = 0;
        while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
            let tail = &rest[start..];
            let end = tail.find(|c: char| c.is_whitespace()).unwrap_or(tail.len());
            out.push((i + 1, offset + start + 1, &tail[..end]));
            offset += start + end;
            rest = &tail[end..];
        }
    }
    out
}

fn parse_u64(line: usize, col: usize, text: &str) -> Result<u64, ParseError> {
    if text.is_empty() {
        return Err(ParseError::at(line, col, "empty integer"));
    }
    if !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseError::at(
            line,
            col,
            format!("malformed unsigned integer {text:?}"),
        ));
    }
    text.parse()
        .map_err(|_| ParseError::at(line, col, format!("integer out of range {text:?}")))
}

/// `key=<int>` with a positivity check; `col` is the token start.
fn parse_keyed(line: usize, col: usize, token: &str, key: &str) -> Result<u64, ParseError> {
    let Some(raw) = token.strip_prefix(key).and_then(|r| r.strip_prefix('=')) else {
        return Err(ParseError::at(
            line,
            col,
            format!("expected {key}=<int>, got {token:?}"),
        ));
    };
    let value = parse_u64(line, col + key.len() + 1, raw)?;
    if value == 0 {
        return Err(ParseError::at(line, col, format!("{key} must be positive")));
    }
    Ok(value)
}

pub fn parse_instance(text: &str) -> Result<ParsedInstance, ParseError> {
    let tokens = tokenize(text);
    let Some(&(hline, hcol, head)) = tokens.first() else {
        return Err(ParseError::at(1, 1, "missing header line"));
    };
    if head.starts_with("m=") {
        let m = parse_keyed(hline, hcol, head, "m")?;
        let Some(&(tline, tcol, ttok)) = tokens.get(1).filter(|&&(l, ..)| l == hline) else {
            return Err(ParseError::at(
                hline,
                hcol + head.len(),
                "subset-sum header needs t=<int> on the same line",
            ));
        };
        let t = parse_target(tline, tcol, ttok)?;
        if let Some(&(l, c, tok)) = tokens.get(2).filter(|&&(l, ..)| l == hline) {
            return Err(ParseError::at(
                l,
                c,
                format!("unexpected header token {tok:?}"),
            ));
        }
        let mut pairs = Vec::new();
        for &(line, col, tok) in &tokens[2..] {
            pairs.push(parse_pair(line, col, tok)?);
        }
        Ok(ParsedInstance::SubsetSum { m, t, pairs })
    } else if head.starts_with("n=") {
        let n = parse_keyed(hline, hcol, head, "n")?;
        if let Some(&(l, c, tok)) = tokens.get(1).filter(|&&(l, ..)| l == hline) {
            return Err(ParseError::at(
                l,
                c,
                format!("unexpected header token {tok:?}"),
            ));
        }
        let mut values = Vec::new();
        for &(line, col, tok) in &tokens[1..] {
            let (value, count) = parse_pair(line, col, tok)?;
            if values.len() as u64 + count > MAX_ELEMENTS {
                return Err(ParseError::at(
                    line,
                    col,
                    format!("element expansion exceeds {MAX_ELEMENTS}"),
                ));
            }
            values.extend(std::iter::repeat_n(value, count as usize));
        }
        Ok(ParsedInstance::Elements { n, values })
    } else {
        Err(ParseError::at(
            hline,
            hcol,
            format!("expected header 'm=<int> t=<int>' or 'n=<int>', got {head:?}"),
        ))
    }
}

/// `t=<int>`; zero is a legal target, so no positivity check.
fn parse_target(line: usize, col: usize, token: &str) -> Result<u64, ParseError> {
    let Some(raw) = token.strip_prefix("t=") else {
        return Err(ParseError::at(
            line,
            col,
            format!("expected t=<int>, got {token:?}"),
        ));
    };
    parse_u64(line, col + 2, raw)
}

/// `<value>` or `<value>:<count>` with count >= 1.
fn parse_pair(line: usize, col: usize, token: &str) -> Result<(u64, u64), ParseError> {
    match token.split_once(':') {
        None => Ok((parse_u64(line, col, token)?, 1)),
        Some((v, c)) => {
            if c.contains(':') {
                return Err(ParseError::at(
                    line,
                    col,
                    format!("malformed token {token:?}"),
                ));
            }
            let value = parse_u64(line, col, v)?;
            let count = parse_u64(line, col + v.len() + 1, c)?;
            if count == 0 {
                return Err(ParseError::at(
                    line,
                    col + v.len() + 1,
                    "count must be positive",
                ));
            }
            Ok((value, count))
        }
    }
}

/// Certificate file for subset-sum verification: witness tokens in the same
/// `<value>` / `<value>:<count>` shape, duplicates merged, sorted by value.
pub fn parse_witness_parts(text: &str) -> Result<Vec<(u64, u64)>, ParseError> {
    let mut merged: std::collections::BTreeMap<u64, u64> = std::collections::BTreeMap::new();
    for (line, col, tok) in tokenize(text) {
        let (value, count) = parse_pair(line, col, tok)?;
        *merged.entry(value).or_insert(0) += count;
    }
    Ok(merged.into_iter().collect())
}

/// Certificate file for egz / zero-run verification: plain indices.
pub fn parse_indices(text: &str) -> Result<Vec<u64>, ParseError> {
    tokenize(text)
        .into_iter()
        .map(|(line, col, tok)| parse_u64(line, col, tok))
        .collect()
}
