use serde::{Deserialize, Serialize};

use super::lexicon::{LexEntry, Lexicon};
use super::numbers;
use crate::ast::Greek;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    NumberWord,
    Digit,
    OperatorWord,
    StructureWord,
    Identifier,
    Greek,
    Function,
    DomainPhrase,
    Filler,
    /// Punctuation from the recognizer.
    Separator,
}

/// One word or phrase of the utterance. `span` is a half-open range of
/// character offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpokenToken {
    pub kind: TokenKind,
    pub text: String,
    pub span: (usize, usize),
}

/// Grammar vocabulary that does not depend on the lexicon.
const OPERATOR_WORDS: &[&str] = &[
    "plus",
    "minus",
    "times",
    "multiplied by",
    "divided by",
    "equals",
    "equal",
    "equal to",
    "equals to",
    "is equal to",
    "less than",
    "is less than",
    "greater than",
    "is greater than",
    "less than or equal to",
    "is less than or equal to",
    "greater than or equal to",
    "is greater than or equal to",
    "at most",
    "at least",
    "squared",
    "cubed",
    "to the power of",
    "to the power",
    "raised to the power of",
    "raised to the",
    "raised to",
    "power",
    "negative",
    "degrees",
    "all over",
];

const STRUCTURE_WORDS: &[&str] = &[
    "over",
    "by",
    "of",
    "from",
    "to",
    "to the",
    "the",
    "an",
    "sub",
    "subscript",
    "capital",
    "uppercase",
    "point",
    "integral",
    "sum",
    "summation",
    "product",
    "derivative",
    "partial",
    "partial derivative",
    "with respect to",
    "square root",
    "cube root",
    "root",
    "open paren",
    "open parenthesis",
    "left paren",
    "left parenthesis",
    "close paren",
    "close parenthesis",
    "right paren",
    "right parenthesis",
];

const IDENTIFIER_WORDS: &[&str] = &["infinity"];

fn max_builtin_words() -> usize {
    OPERATOR_WORDS.iter().chain(STRUCTURE_WORDS).map(|p| p.split(' ').count()).max().unwrap_or(1)
}

fn builtin_kind(phrase: &str) -> Option<TokenKind> {
    if OPERATOR_WORDS.contains(&phrase) {
        Some(TokenKind::OperatorWord)
    } else if STRUCTURE_WORDS.contains(&phrase) {
        Some(TokenKind::StructureWord)
    } else if IDENTIFIER_WORDS.contains(&phrase) {
        Some(TokenKind::Identifier)
    } else if numbers::is_number_word(phrase) {
        Some(TokenKind::NumberWord)
    } else {
        None
    }
}

fn lexicon_kind(entry: &LexEntry) -> TokenKind {
    match entry {
        LexEntry::Term(_) | LexEntry::Equation(_) => TokenKind::DomainPhrase,
        LexEntry::Greek(_) => TokenKind::Greek,
        LexEntry::Function(_) => TokenKind::Function,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RawClass {
    Word,
    Digits,
    Symbol,
    Punct,
    Other,
}

#[derive(Debug, Clone)]
struct Raw {
    class: RawClass,
    text: String,
    uppercase_i: bool,
    start: usize,
    end: usize,
}

const SYMBOLS: &[char] = &['(', ')', '+', '-', '*', '/', '=', '^', '<', '>', '≤', '≥', '−', '×', '÷', '·'];
const PUNCT: &[char] = &[',', '.', ';', ':', '?', '!', '…'];
const QUOTES: &[char] = &['"', '\'', '‘', '’', '“', '”', '`'];

fn scan(utterance: &str) -> Vec<Raw> {
    let chars: Vec<char> = utterance.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() || QUOTES.contains(&c) && !is_inner_apostrophe(&chars, i) {
            i += 1;
            continue;
        }
        if c.is_alphabetic() {
            let mut text = String::new();
            while i < chars.len() && (chars[i].is_alphabetic() || is_inner_apostrophe(&chars, i)) {
                text.push(if chars[i] == '’' { '\'' } else { chars[i] });
                i += 1;
            }
            let uppercase_i = text == "I";
            out.push(Raw { class: RawClass::Word, text: text.to_lowercase(), uppercase_i, start, end: i });
            continue;
        }
        if c.is_ascii_digit() {
            while i < chars.len()
                && (chars[i].is_ascii_digit()
                    || chars[i] == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) && chars[i - 1].is_ascii_digit())
            {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Raw { class: RawClass::Digits, text, uppercase_i: false, start, end: i });
            continue;
        }
        i += 1;
        if c == '-' && start > 0 && chars[start - 1].is_alphabetic() && chars.get(i).is_some_and(|n| n.is_alphabetic()) {
            continue;
        }
        let (class, text) = if SYMBOLS.contains(&c) {
            let text = match c {
                '<' | '>' if chars.get(i) == Some(&'=') => {
                    i += 1;
                    if c == '<' { "<=" } else { ">=" }.to_string()
                }
                '≤' => "<=".into(),
                '≥' => ">=".into(),
                '−' => "-".into(),
                '×' | '·' => "*".into(),
                '÷' => "/".into(),
                _ => c.to_string(),
            };
            (RawClass::Symbol, text)
        } else if PUNCT.contains(&c) {
            (RawClass::Punct, c.to_string())
        } else {
            (RawClass::Other, c.to_string())
        };
        out.push(Raw { class, text, uppercase_i: false, start, end: i });
    }
    out
}

fn is_inner_apostrophe(chars: &[char], i: usize) -> bool {
    matches!(chars[i], '\'' | '’')
        && i > 0
        && chars[i - 1].is_alphabetic()
        && chars.get(i + 1).is_some_and(|c| c.is_alphabetic())
}

fn is_differential_word(w: &str) -> bool {
    let mut cs = w.chars();
    matches!((cs.next(), cs.next(), cs.next()), (Some('d'), Some(c), None) if c.is_ascii_lowercase()) && w != "do"
}

/// Splits an utterance into classified tokens, matching multi-word phrases longest-first.
pub fn tokenize(utterance: &str, lexicon: &Lexicon) -> Vec<SpokenToken> {
    let raws = scan(utterance);
    let max_words = lexicon.max_phrase_words().max(max_builtin_words());
    let mut tokens = Vec::with_capacity(raws.len());
    let mut i = 0;
    while i < raws.len() {
        let raw = &raws[i];
        let simple = |kind| SpokenToken { kind, text: raw.text.clone(), span: (raw.start, raw.end) };
        match raw.class {
            RawClass::Digits => {
                tokens.push(simple(TokenKind::Digit));
                i += 1;
                continue;
            }
            RawClass::Symbol => {
                let kind = if matches!(raw.text.as_str(), "(" | ")") {
                    TokenKind::StructureWord
                } else {
                    TokenKind::OperatorWord
                };
                tokens.push(simple(kind));
                i += 1;
                continue;
            }
            RawClass::Punct => {
                tokens.push(simple(TokenKind::Separator));
                i += 1;
                continue;
            }
            RawClass::Other => {
                tokens.push(simple(TokenKind::Filler));
                i += 1;
                continue;
            }
            RawClass::Word => {}
        }

        let run = raws[i..].iter().take(max_words).take_while(|r| r.class == RawClass::Word).count();
        let mut matched = None;
        for n in (1..=run).rev() {
            let phrase = raws[i..i + n].iter().map(|r| r.text.as_str()).collect::<Vec<_>>().join(" ");
            let kind = lexicon.get(&phrase).map(lexicon_kind).or_else(|| builtin_kind(&phrase));
            if let Some(kind) = kind {
                matched = Some((n, kind, phrase));
                break;
            }
        }
        let (n, kind, text) = matched.unwrap_or_else(|| (1, classify_word(raw), raw.text.clone()));
        tokens.push(SpokenToken { kind, text, span: (raw.start, raws[i + n - 1].end) });
        i += n;
    }
    resolve_article_a(&mut tokens);
    tokens
}

fn classify_word(raw: &Raw) -> TokenKind {
    let mut chars = raw.text.chars();
    let (first, second) = (chars.next(), chars.next());
    match (first, second) {
        (Some(_), None) if raw.uppercase_i => TokenKind::Filler,
        (Some(c), None) if c.is_ascii_alphabetic() => TokenKind::Identifier,
        (Some(c), None) if Greek::from_unicode(c).is_some() => TokenKind::Greek,
        _ if is_differential_word(&raw.text) => TokenKind::StructureWord,
        _ => TokenKind::Filler,
    }
}

/// "a" is a variable beside an operator word, after "capital", at the end of
/// an operand run ("m a"), or alone.
fn resolve_article_a(tokens: &mut [SpokenToken]) {
    let n = tokens.len();
    for i in 0..n {
        if tokens[i].text != "a" || tokens[i].kind != TokenKind::Identifier {
            continue;
        }
        let operator_like = |t: &SpokenToken| {
            t.kind == TokenKind::OperatorWord || matches!(t.text.as_str(), "over" | "by" | "capital" | "uppercase")
        };
        let prev = i.checked_sub(1).and_then(|j| tokens.get(j));
        let next = tokens.get(i + 1);
        let beside_operator = prev.is_some_and(operator_like) || next.is_some_and(operator_like);
        let closes_operands = prev.is_some_and(|p| {
            matches!(p.kind, TokenKind::Identifier | TokenKind::Greek | TokenKind::Digit | TokenKind::NumberWord)
        }) && next.is_none_or(|t| t.kind == TokenKind::Separator);
        let alone = tokens.iter().filter(|t| t.kind != TokenKind::Separator).count() == 1;
        if !(alone || beside_operator || closes_operands) {
            tokens[i].kind = TokenKind::Filler;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(s: &str) -> Vec<(TokenKind, String)> {
        tokenize(s, &Lexicon::stem()).into_iter().map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn x_over_three() {
        use TokenKind::*;
        assert_eq!(
            kinds("x over 3"),
            vec![(Identifier, "x".into()), (StructureWord, "over".into()), (Digit, "3".into())]
        );
    }

    #[test]
    fn domain_phrase_matches_longest() {
        use TokenKind::*;
        assert_eq!(
            kinds("index of refraction one"),
            vec![(DomainPhrase, "index of refraction".into()), (NumberWord, "one".into())]
        );
        assert_eq!(
            kinds("pi over two"),
            vec![(Greek, "pi".into()), (StructureWord, "over".into()), (NumberWord, "two".into())]
        );
    }

    #[test]
    fn spans_are_character_offsets() {
        let toks = tokenize("θ over 2", &Lexicon::stem());
        assert_eq!(toks[0].span, (0, 1));
        assert_eq!(toks[1].span, (2, 6));
        assert_eq!(toks[0].kind, TokenKind::Greek);
    }

    #[test]
    fn glued_digits_and_letters_split() {
        let texts: Vec<String> = kinds("(2x+1)(x+3)").into_iter().map(|(_, t)| t).collect();
        assert_eq!(texts, ["(", "2", "x", "+", "1", ")", "(", "x", "+", "3", ")"]);
    }

    #[test]
    fn pronoun_and_article_are_filler() {
        use TokenKind::*;
        let k = kinds("I think a cat");
        assert_eq!(k[0].0, Filler);
        assert_eq!(k[2].0, Filler);
        assert_eq!(kinds("a plus b")[0].0, Identifier);
        assert_eq!(kinds("x, dx")[1].0, Separator);
        assert_eq!(kinds("twenty-five")[1], (NumberWord, "five".into()));
    }
}
