use std::ops::Range;

use super::tokenize::{SpokenToken, TokenKind};
use super::SpokenError;

/// Sliding window length, in non-separator tokens.
pub const WINDOW: usize = 3;
/// Minimum share of non-filler tokens for a window to count as mathematical.
pub const THRESHOLD: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MathSpan {
    /// Indices into the token list.
    pub tokens: Range<usize>,
    /// Character offsets into the utterance.
    pub span: (usize, usize),
    pub residual: String,
}

fn is_filler(t: &SpokenToken) -> bool {
    t.kind == TokenKind::Filler
}

fn is_trailing_trim(t: &SpokenToken) -> bool {
    is_filler(t) || t.kind == TokenKind::Separator || matches!(t.text.as_str(), "the" | "an" | "of" | "from" | "to")
}

/// Finds the most mathematical contiguous run of tokens.
pub fn extract_math_span(utterance: &str, tokens: &[SpokenToken]) -> Result<MathSpan, SpokenError> {
    let content: Vec<usize> = (0..tokens.len()).filter(|&i| tokens[i].kind != TokenKind::Separator).collect();
    if content.is_empty() {
        return Err(SpokenError::NoMathFound);
    }
    let w = WINDOW.min(content.len());
    let mut marked = vec![false; content.len()];
    for start in 0..=content.len() - w {
        let window = &content[start..start + w];
        let score = window.iter().filter(|&&i| !is_filler(&tokens[i])).count() as f64 / w as f64;
        if score >= THRESHOLD {
            marked[start..start + w].iter_mut().for_each(|m| *m = true);
        }
    }

    let mut best: Option<(usize, Range<usize>)> = None;
    let mut k = 0;
    while k < content.len() {
        if !marked[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < content.len() && marked[k] {
            k += 1;
        }
        let run = start..k;
        let weight = content[run.clone()].iter().filter(|&&i| !is_filler(&tokens[i])).count();
        if best.as_ref().is_none_or(|(w, _)| weight > *w) {
            best = Some((weight, run));
        }
    }
    let Some((_, run)) = best else { return Err(SpokenError::NoMathFound) };

    let mut first = content[run.start];
    let mut last = content[run.end - 1];
    while first < last && (is_filler(&tokens[first]) || tokens[first].kind == TokenKind::Separator) {
        first += 1;
    }
    while last > first && is_trailing_trim(&tokens[last]) {
        last -= 1;
    }
    if is_filler(&tokens[first]) {
        return Err(SpokenError::NoMathFound);
    }

    let span = (tokens[first].span.0, tokens[last].span.1);
    Ok(MathSpan { tokens: first..last + 1, span, residual: residual(utterance, span) })
}

fn residual(utterance: &str, (start, end): (usize, usize)) -> String {
    let chars: Vec<char> = utterance.chars().collect();
    let trim = |s: String| {
        s.trim_matches(|c: char| c.is_whitespace() || c.is_ascii_punctuation() && c != '\'').to_string()
    };
    let before = trim(chars[..start].iter().collect());
    let after = trim(chars[end..].iter().collect());
    let joined = [before, after].into_iter().filter(|s| !s.is_empty()).collect::<Vec<_>>().join(" ");
    joined.split_whitespace().collect::<Vec<_>>().join(" ")
}
