//! Line-oriented tokenizer shared by the pattern and mesh text formats.
//!
//! Blank lines and lines whose first non-blank character is `%` are skipped;
//! every remaining line is a record of whitespace-separated tokens.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::topology::ElementType;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    /// 1-based line number; 0 when the input ended early.
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

pub(crate) struct Record<'a> {
    pub line: usize,
    pub tokens: Vec<&'a str>,
}

impl Record<'_> {
    pub fn expect_len(&self, n: usize, what: &str) -> Result<(), ParseError> {
        if self.tokens.len() != n {
            return Err(ParseError::new(
                self.line,
                format!("expected {n} tokens for {what}, found {}", self.tokens.len()),
            ));
        }
        Ok(())
    }

    pub fn parse<T: FromStr>(&self, index: usize, what: &str) -> Result<T, ParseError> {
        let tok = self
            .tokens
            .get(index)
            .ok_or_else(|| ParseError::new(self.line, format!("missing {what}")))?;
        tok.parse()
            .map_err(|_| ParseError::new(self.line, format!("invalid {what} `{tok}`")))
    }
}

pub(crate) struct Records<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Records<'a> {
    pub fn new(text: &'a str) -> Self {
        Records {
            inner: text.lines().enumerate(),
        }
    }

    pub fn next_record(&mut self, what: &str) -> Result<Record<'a>, ParseError> {
        self.next()
            .ok_or_else(|| ParseError::new(0, format!("unexpected end of input, expected {what}")))
    }

    pub fn expect_end(&mut self) -> Result<(), ParseError> {
        match self.next() {
            None => Ok(()),
            Some(r) => Err(ParseError::new(r.line, "unexpected extra record")),
        }
    }
}

impl<'a> Iterator for Records<'a> {
    type Item = Record<'a>;

    fn next(&mut self) -> Option<Record<'a>> {
        for (i, line) in self.inner.by_ref() {
            let trimmed = line.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('%') {
                continue;
            }
            return Some(Record {
                line: i + 1,
                tokens: trimmed.split_whitespace().collect(),
            });
        }
        None
    }
}

/// Header giving the node and element counts.
pub(crate) fn parse_counts(rec: &Record<'_>) -> Result<(usize, usize), ParseError> {
    rec.expect_len(2, "node and element counts")?;
    Ok((rec.parse(0, "node count")?, rec.parse(1, "element count")?))
}

pub(crate) fn parse_node(rec: &Record<'_>) -> Result<[f64; 3], ParseError> {
    rec.expect_len(3, "node coordinates")?;
    let mut x = [0.0; 3];
    for (k, v) in x.iter_mut().enumerate() {
        *v = rec.parse::<f64>(k, "coordinate")?;
        if !v.is_finite() {
            return Err(ParseError::new(rec.line, "non-finite coordinate"));
        }
    }
    Ok(x)
}

pub(crate) struct ElementRecord {
    pub line: usize,
    pub element_type: ElementType,
    pub material: i32,
    pub nodes: Vec<usize>,
}

pub(crate) fn parse_element(rec: &Record<'_>, node_count: usize) -> Result<ElementRecord, ParseError> {
    let code: i64 = rec.parse(0, "element type code")?;
    let element_type = ElementType::from_code(code)
        .ok_or_else(|| ParseError::new(rec.line, format!("unknown element type code {code}")))?;
    let material = rec.parse(1, "material id")?;
    rec.expect_len(2 + element_type.node_count(), &format!("a {element_type}"))?;
    let mut nodes = Vec::with_capacity(element_type.node_count());
    for k in 0..element_type.node_count() {
        let n: usize = rec.parse(2 + k, "node id")?;
        if n >= node_count {
            return Err(ParseError::new(
                rec.line,
                format!("node id {n} out of range (0..{node_count})"),
            ));
        }
        if nodes.contains(&n) {
            return Err(ParseError::new(rec.line, format!("node id {n} repeated")));
        }
        nodes.push(n);
    }
    Ok(ElementRecord {
        line: rec.line,
        element_type,
        material,
        nodes,
    })
}

/// Formats a real like C's `%.17g`: 17 significant digits, trailing zeros
/// removed, exponent form outside `1e-5 <= |x| < 1e17`.
pub fn format_real(x: f64) -> String {
    RealG17(x).to_string()
}

struct RealG17(f64);

impl fmt::Display for RealG17 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.0;
        if x == 0.0 {
            return f.write_str("0");
        }
        let sci = format!("{:.16e}", x);
        let (mantissa, exp) = sci.split_once('e').expect("exponent present");
        let exp: i32 = exp.parse().expect("integer exponent");
        if (-5..17).contains(&exp) {
            let decimals = (16 - exp).max(0) as usize;
            let fixed = format!("{:.*}", decimals, x);
            f.write_str(trim_zeros(&fixed))
        } else {
            write!(f, "{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
        }
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
