use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::ast::{parse_latex, Expr, FunctionName, Greek};

const STEM_LEXICON: &str = include_str!("../../data/stem.lex.json");

pub const LEXICON_SCHEMA_VERSION: &str = "1";

/// A domain term such as "index of refraction" → `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub phrase: String,
    pub symbol: Expr,
    /// A number spoken right after the phrase becomes the symbol's subscript.
    pub subscript_follows: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LexEntry {
    Term(Term),
    Greek(Greek),
    Function(FunctionName),
    Equation(Expr),
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed lexicon at `{path}`: {message}")]
    Malformed { path: String, message: String },
    #[error("lexicon schema_version `{0}` is not supported")]
    UnsupportedVersion(String),
    #[error("phrase `{0}` is defined more than once")]
    DuplicatePhrase(String),
    #[error("phrase `{phrase}`: {message}")]
    InvalidEntry { phrase: String, message: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconFile {
    schema_version: String,
    #[serde(default)]
    terms: Vec<TermEntry>,
    #[serde(default)]
    greek: Vec<GreekEntry>,
    #[serde(default)]
    functions: Vec<FunctionEntry>,
    #[serde(default)]
    equations: Vec<EquationEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermEntry {
    phrase: String,
    symbol: String,
    #[serde(default)]
    subscript_follows: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GreekEntry {
    phrase: String,
    letter: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionEntry {
    phrase: String,
    function: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EquationEntry {
    phrase: String,
    latex: String,
}

/// Vocabulary mapping spoken phrases to symbols, functions and equations.
///
/// Phrases are stored lowercase with single spaces; hyphens count as spaces.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: HashMap<String, LexEntry>,
    /// Phrase insertion order, for listing.
    order: Vec<String>,
    max_words: usize,
}

pub fn normalize_phrase(phrase: &str) -> String {
    phrase
        .to_lowercase()
        .replace('\u{2019}', "'")
        .replace('-', " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::stem()
    }
}

impl Lexicon {
    /// Only the Greek alphabet.
    pub fn empty() -> Self {
        let mut lex = Lexicon { entries: HashMap::new(), order: Vec::new(), max_words: 1 };
        for &g in Greek::ALL {
            let cmd = g.command();
            if cmd.chars().all(|c| c.is_ascii_lowercase()) {
                lex.insert(cmd.to_string(), LexEntry::Greek(g));
                if let Some(rest) = cmd.strip_prefix("var") {
                    lex.insert(format!("var {rest}"), LexEntry::Greek(g));
                }
            }
        }
        lex
    }

    /// The shipped STEM vocabulary.
    pub fn stem() -> Self {
        let mut lex = Lexicon::empty();
        lex.merge(Lexicon::parse_file(STEM_LEXICON, "stem.lex.json").expect("shipped lexicon is valid"));
        lex
    }

    /// Parses a lexicon document without the builtin Greek names.
    pub fn from_json(text: &str) -> Result<Lexicon, LexiconError> {
        Lexicon::parse_file(text, "<input>")
    }

    pub fn from_path(path: &Path) -> Result<Lexicon, LexiconError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| LexiconError::Io { path: path.display().to_string(), source })?;
        Lexicon::parse_file(&text, &path.display().to_string())
    }

    /// The STEM vocabulary extended by user files, later files overriding earlier entries.
    pub fn stem_with_files(paths: &[impl AsRef<Path>]) -> Result<Lexicon, LexiconError> {
        let mut lex = Lexicon::stem();
        for p in paths {
            lex.merge(Lexicon::from_path(p.as_ref())?);
        }
        Ok(lex)
    }

    fn parse_file(text: &str, origin: &str) -> Result<Lexicon, LexiconError> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| LexiconError::Malformed { path: origin.to_string(), message: e.to_string() })?;
        match value.get("schema_version").and_then(|v| v.as_str()) {
            Some(LEXICON_SCHEMA_VERSION) => {}
            Some(other) => return Err(LexiconError::UnsupportedVersion(other.to_string())),
            None => {
                return Err(LexiconError::Malformed {
                    path: "schema_version".into(),
                    message: "missing schema_version".into(),
                })
            }
        }
        let file: LexiconFile = serde_path_to_error::deserialize(value)
            .map_err(|e| LexiconError::Malformed { path: e.path().to_string(), message: e.inner().to_string() })?;
        debug_assert_eq!(file.schema_version, LEXICON_SCHEMA_VERSION);

        let mut lex = Lexicon { entries: HashMap::new(), order: Vec::new(), max_words: 1 };
        let mut add = |phrase: &str, entry: LexEntry| -> Result<(), LexiconError> {
            let key = normalize_phrase(phrase);
            if key.is_empty() {
                return Err(LexiconError::InvalidEntry { phrase: phrase.into(), message: "empty phrase".into() });
            }
            if lex.entries.contains_key(&key) {
                return Err(LexiconError::DuplicatePhrase(key));
            }
            lex.insert(key, entry);
            Ok(())
        };
        let invalid = |phrase: &str, message: String| LexiconError::InvalidEntry { phrase: phrase.into(), message };

        for t in file.terms {
            let symbol = parse_latex(&t.symbol).map_err(|e| invalid(&t.phrase, e.to_string()))?;
            if t.subscript_follows
                && !matches!(&symbol, Expr::Ident(id) if id.subscript.is_none())
                && !matches!(&symbol, Expr::Greek { subscript: None, .. })
            {
                return Err(invalid(&t.phrase, "subscript_follows needs a bare letter symbol".into()));
            }
            let phrase = normalize_phrase(&t.phrase);
            add(&t.phrase, LexEntry::Term(Term { phrase, symbol, subscript_follows: t.subscript_follows }))?;
        }
        for g in file.greek {
            let letter =
                Greek::from_command(&g.letter).ok_or_else(|| invalid(&g.phrase, format!("unknown letter `{}`", g.letter)))?;
            add(&g.phrase, LexEntry::Greek(letter))?;
        }
        for f in file.functions {
            if f.function.is_empty() || !f.function.bytes().all(|b| b.is_ascii_alphabetic()) {
                return Err(invalid(&f.phrase, format!("bad function name `{}`", f.function)));
            }
            add(&f.phrase, LexEntry::Function(FunctionName::named(&f.function)))?;
        }
        for q in file.equations {
            let expr = parse_latex(&q.latex).map_err(|e| invalid(&q.phrase, e.to_string()))?;
            add(&q.phrase, LexEntry::Equation(expr))?;
        }
        Ok(lex)
    }

    fn insert(&mut self, key: String, entry: LexEntry) {
        self.max_words = self.max_words.max(key.split(' ').count());
        if self.entries.insert(key.clone(), entry).is_none() {
            self.order.push(key);
        }
    }

    /// Adds every entry of `other`, replacing entries with the same phrase.
    pub fn merge(&mut self, other: Lexicon) {
        let Lexicon { mut entries, order, .. } = other;
        for key in order {
            if let Some(entry) = entries.remove(&key) {
                self.insert(key, entry);
            }
        }
    }

    pub fn get(&self, phrase: &str) -> Option<&LexEntry> {
        self.entries.get(phrase)
    }

    pub fn max_phrase_words(&self) -> usize {
        self.max_words
    }

    pub fn phrases(&self) -> impl Iterator<Item = (&str, &LexEntry)> {
        self.order.iter().map(|k| (k.as_str(), &self.entries[k]))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
