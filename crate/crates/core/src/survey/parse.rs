//! Response validation. Both parsers are total: every input maps to a
//! verdict or to `Invalid` with a reason.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::nfc;
use crate::questionnaire::Question;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvalidReason {
    Empty,
    ExtraTokens,
    NotYesNo,
    NotNumeric,
    OutOfRange,
    NotAscending,
    Duplicate,
    /// No answer was obtained (request failed after all retries).
    Failed,
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InvalidReason::Empty => "empty",
            InvalidReason::ExtraTokens => "extra tokens",
            InvalidReason::NotYesNo => "not Sí/No",
            InvalidReason::NotNumeric => "not numeric",
            InvalidReason::OutOfRange => "out of range",
            InvalidReason::NotAscending => "not ascending",
            InvalidReason::Duplicate => "duplicate",
            InvalidReason::Failed => "request failed",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParsedResponse {
    Yes,
    No,
    /// 1-based option indices.
    Selection(BTreeSet<usize>),
    Invalid(InvalidReason),
}

impl ParsedResponse {
    pub fn is_valid(&self) -> bool {
        !matches!(self, ParsedResponse::Invalid(_))
    }
}

const TERMINAL: [char; 3] = ['.', '!', '…'];

/// Accepts exactly one token, `sí`/`si` or `no`, after trimming whitespace
/// and trailing `.`, `!`, `…`, and case folding.
pub fn parse_ynqf(raw: &str) -> ParsedResponse {
    let normalized = nfc(raw);
    let stripped = normalized.trim_end_matches(|c: char| c.is_whitespace() || TERMINAL.contains(&c));
    let folded = stripped.trim().to_lowercase();
    if folded.is_empty() {
        return ParsedResponse::Invalid(InvalidReason::Empty);
    }
    if folded.split_whitespace().nth(1).is_some() || folded.contains([',', ';', ':']) {
        return ParsedResponse::Invalid(InvalidReason::ExtraTokens);
    }
    match folded.as_str() {
        "sí" | "si" => ParsedResponse::Yes,
        "no" => ParsedResponse::No,
        _ => ParsedResponse::Invalid(InvalidReason::NotYesNo),
    }
}

/// Accepts `/`-separated decimal option numbers in strictly ascending
/// order, each within `1..=k`.
pub fn parse_mcqf(raw: &str, k: usize) -> ParsedResponse {
    let s = raw.trim();
    if s.is_empty() {
        return ParsedResponse::Invalid(InvalidReason::Empty);
    }
    let mut picked = BTreeSet::new();
    let mut previous = 0usize;
    for token in s.split('/') {
        if token.is_empty() || !token.bytes().all(|b| b.is_ascii_digit()) {
            return ParsedResponse::Invalid(InvalidReason::NotNumeric);
        }
        let Ok(n) = token.parse::<usize>() else {
            return ParsedResponse::Invalid(InvalidReason::OutOfRange);
        };
        if n == 0 || n > k {
            return ParsedResponse::Invalid(InvalidReason::OutOfRange);
        }
        if n == previous {
            return ParsedResponse::Invalid(InvalidReason::Duplicate);
        }
        if n < previous {
            return ParsedResponse::Invalid(InvalidReason::NotAscending);
        }
        previous = n;
        picked.insert(n);
    }
    ParsedResponse::Selection(picked)
}

pub fn parse_response(question: &Question, raw: &str) -> ParsedResponse {
    match question {
        Question::YesNo(_) => parse_ynqf(raw),
        Question::MultipleChoice(q) => parse_mcqf(raw, q.options.len()),
    }
}

/// Renders 1-based indices in the answer format, e.g. `1/3/4`.
pub fn format_selection<I: IntoIterator<Item = usize>>(indices: I) -> String {
    let mut v: Vec<usize> = indices.into_iter().collect();
    v.sort_unstable();
    v.dedup();
    v.iter().map(usize::to_string).collect::<Vec<_>>().join("/")
}
