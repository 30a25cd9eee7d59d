//! The deterministic grammar backend: spoken text to [`Expr`].
//!
//! The pipeline is tokenize → isolate the mathematical span → recursive
//! descent over the span's tokens. Conversational words outside the span are
//! returned as residual text.

mod lexicon;
pub(crate) mod numbers;
mod parser;
mod span;
mod tokenize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{normalize, Expr, InvalidExpr};

pub use lexicon::{normalize_phrase, LexEntry, Lexicon, LexiconError, Term, LEXICON_SCHEMA_VERSION};
pub use span::{extract_math_span, MathSpan, THRESHOLD, WINDOW};
pub use tokenize::{tokenize, SpokenToken, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcription {
    pub expr: Expr,
    /// Character offsets of the mathematical part of the utterance.
    pub source_span: (usize, usize),
    pub residual_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpokenError {
    #[error("no mathematics found in the utterance")]
    NoMathFound,
    #[error("{message} (characters {}..{})", span.0, span.1)]
    Syntax { span: (usize, usize), message: String },
    #[error(transparent)]
    Invalid(#[from] InvalidExpr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpokenOptions {
    /// Letters are lowercase unless preceded by "capital".
    pub lowercase_default: bool,
}

impl Default for SpokenOptions {
    fn default() -> Self {
        SpokenOptions { lowercase_default: true }
    }
}

/// Symbols already present in the surrounding equations, most useful first.
///
/// A letter spoken without a subscript resolves to the most useful
/// subscripted symbol with the same base, unless the bare symbol itself
/// appears in context.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymbolContext {
    symbols: Vec<(Expr, f64)>,
}

impl SymbolContext {
    /// Builds from `(equation, usefulness)` pairs.
    pub fn new<'a>(equations: impl IntoIterator<Item = (&'a Expr, f64)>) -> Self {
        let mut ranked: Vec<(usize, &'a Expr, f64)> =
            equations.into_iter().enumerate().map(|(i, (e, u))| (i, e, u)).collect();
        ranked.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
        let mut symbols: Vec<(Expr, f64)> = Vec::new();
        for (_, e, u) in ranked {
            e.walk(&mut |node| {
                if matches!(node, Expr::Ident(_) | Expr::Greek { .. }) && !symbols.iter().any(|(s, _)| s == node) {
                    symbols.push((node.clone(), u));
                }
            });
        }
        SymbolContext { symbols }
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Expr> {
        self.symbols.iter().map(|(e, _)| e)
    }

    pub fn resolve(&self, bare: &Expr) -> Option<Expr> {
        if self.symbols.iter().any(|(s, _)| s == bare) {
            return None;
        }
        let same_base = |s: &Expr| match (bare, s) {
            (Expr::Ident(a), Expr::Ident(b)) => a.name == b.name && b.subscript.is_some(),
            (Expr::Greek { letter: a, .. }, Expr::Greek { letter: b, subscript }) => a == b && subscript.is_some(),
            _ => false,
        };
        self.symbols.iter().find(|(s, _)| same_base(s)).map(|(s, _)| s.clone())
    }
}

pub fn parse_spoken(
    utterance: &str,
    lexicon: &Lexicon,
    context: Option<&SymbolContext>,
) -> Result<Transcription, SpokenError> {
    parse_spoken_with(utterance, lexicon, context, SpokenOptions::default())
}

pub fn parse_spoken_with(
    utterance: &str,
    lexicon: &Lexicon,
    context: Option<&SymbolContext>,
    opts: SpokenOptions,
) -> Result<Transcription, SpokenError> {
    let tokens = tokenize(utterance, lexicon);
    let span = extract_math_span(utterance, &tokens)?;
    let expr = parser::Parser::new(utterance, &tokens[span.tokens.clone()], lexicon, context, opts).parse()?;
    let expr = normalize(&expr);
    expr.validate()?;
    Ok(Transcription { expr, source_span: span.span, residual_text: span.residual })
}
