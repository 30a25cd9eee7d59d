//! The closed command grammar. See docs/commands.md.

use super::{Bound, EditCommand, EditError, Occurrence};
use crate::ast::{BinOp, Expr};
use crate::spoken::{numbers, parse_spoken, Lexicon};

pub const COMMAND_VERBS: &[&str] = &["change", "replace", "swap", "substitute", "plug in", "move", "set", "make"];

const PREAMBLE: &[&[&str]] = &[
    &["please"],
    &["now"],
    &["okay"],
    &["ok"],
    &["so"],
    &["and"],
    &["then"],
    &["um"],
    &["uh"],
    &["alright"],
    &["can", "you"],
    &["could", "you"],
    &["let's"],
    &["go", "ahead", "and"],
    &["i", "want", "to"],
    &["i'd", "like", "to"],
];

const OPERATORS: &[(&str, BinOp)] = &[
    ("plus", BinOp::Add),
    ("plus sign", BinOp::Add),
    ("addition", BinOp::Add),
    ("+", BinOp::Add),
    ("minus", BinOp::Sub),
    ("minus sign", BinOp::Sub),
    ("subtraction", BinOp::Sub),
    ("-", BinOp::Sub),
    ("−", BinOp::Sub),
    ("times", BinOp::Mul),
    ("times sign", BinOp::Mul),
    ("multiplication", BinOp::Mul),
    ("multiplication sign", BinOp::Mul),
    ("dot", BinOp::Mul),
    ("*", BinOp::Mul),
    ("×", BinOp::Mul),
    ("implicit multiplication", BinOp::ImplicitMul),
    ("juxtaposition", BinOp::ImplicitMul),
    ("equals", BinOp::Eq),
    ("equal sign", BinOp::Eq),
    ("equals sign", BinOp::Eq),
    ("=", BinOp::Eq),
    ("less than", BinOp::Lt),
    ("less than sign", BinOp::Lt),
    ("<", BinOp::Lt),
    ("greater than", BinOp::Gt),
    ("greater than sign", BinOp::Gt),
    (">", BinOp::Gt),
    ("less than or equal to", BinOp::Le),
    ("less than or equal", BinOp::Le),
    ("at most", BinOp::Le),
    ("<=", BinOp::Le),
    ("≤", BinOp::Le),
    ("greater than or equal to", BinOp::Ge),
    ("greater than or equal", BinOp::Ge),
    ("at least", BinOp::Ge),
    (">=", BinOp::Ge),
    ("≥", BinOp::Ge),
];

const PLURALS: &[(&str, &str)] = &[
    ("pluses", "plus"),
    ("plus signs", "plus sign"),
    ("minuses", "minus"),
    ("minus signs", "minus sign"),
    ("times signs", "times sign"),
    ("dots", "dot"),
    ("equals signs", "equals sign"),
    ("equal signs", "equal sign"),
];

#[derive(Debug, Clone)]
struct Word {
    text: String,
    start: usize,
    end: usize,
}

fn words(utterance: &str) -> Vec<Word> {
    let mut out = Vec::new();
    let chars: Vec<char> = utterance.chars().collect();
    let edge = |c: char| matches!(c, ',' | '.' | '!' | '?' | ';' | ':' | '"' | '\'' | '‘' | '’' | '“' | '”');
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let mut start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let mut end = i;
        while start < end && edge(chars[start]) {
            start += 1;
        }
        while end > start && edge(chars[end - 1]) {
            end -= 1;
        }
        if start < end {
            let text: String = chars[start..end].iter().collect::<String>().to_lowercase().replace('’', "'");
            out.push(Word { text, start, end });
        }
    }
    out
}

fn is(w: &[Word], i: usize, text: &str) -> bool {
    w.get(i).is_some_and(|x| x.text == text)
}

fn joined(w: &[Word]) -> String {
    w.iter().map(|x| x.text.as_str()).collect::<Vec<_>>().join(" ")
}

fn strip_article(w: &[Word]) -> &[Word] {
    match w.first().map(|x| x.text.as_str()) {
        Some("a" | "an" | "the") => &w[1..],
        _ => w,
    }
}

/// Leading occurrence words: "only", "first", "second", "all (of) the", "every".
fn occurrence(w: &[Word]) -> (Option<Occurrence>, &[Word]) {
    let w = strip_article(w);
    let Some(first) = w.first() else { return (None, w) };
    let (occ, rest) = match first.text.as_str() {
        "only" => (Occurrence::Only, &w[1..]),
        "all" | "every" | "each" => {
            let mut rest = &w[1..];
            if is(rest, 0, "of") {
                rest = &rest[1..];
            }
            (Occurrence::All, rest)
        }
        t => match numbers::ordinal(t) {
            Some(Some(1)) => (Occurrence::First, &w[1..]),
            Some(Some(k)) => (Occurrence::Nth(k as u32), &w[1..]),
            _ => return (None, w),
        },
    };
    (Some(occ), strip_article(rest))
}

/// An operator name, and whether it was plural.
fn operator(w: &[Word]) -> Option<(BinOp, bool)> {
    let phrase = joined(strip_article(w));
    let (phrase, plural) = match PLURALS.iter().find(|(p, _)| *p == phrase) {
        Some((_, single)) => (single.to_string(), true),
        None => (phrase, false),
    };
    OPERATORS.iter().find(|(p, _)| *p == phrase).map(|(_, op)| (*op, plural))
}

struct Ctx<'a> {
    utterance: &'a str,
    lexicon: &'a Lexicon,
}

impl Ctx<'_> {
    /// Parses a word range as a complete expression with nothing left over.
    fn expr(&self, w: &[Word]) -> Option<Expr> {
        let (first, last) = (w.first()?, w.last()?);
        let text: String = self.utterance.chars().skip(first.start).take(last.end - first.start).collect();
        let t = parse_spoken(&text, self.lexicon, None).ok()?;
        (t.residual_text.is_empty()).then_some(t.expr)
    }
}

/// Parses one of the closed set of edit commands.
pub fn parse_command(utterance: &str, lexicon: &Lexicon) -> Result<EditCommand, EditError> {
    let all = words(utterance);
    let mut w: &[Word] = &all;
    'strip: loop {
        for p in PREAMBLE {
            if w.len() > p.len() && w.iter().zip(p.iter()).all(|(a, b)| a.text == *b) {
                w = &w[p.len()..];
                continue 'strip;
            }
        }
        break;
    }
    while w.last().is_some_and(|x| x.text == "please") {
        w = &w[..w.len() - 1];
    }
    let Some(verb) = w.first() else { return Err(EditError::NotACommand) };
    let ctx = Ctx { utterance, lexicon };
    let parsed = match verb.text.as_str() {
        "change" | "replace" | "swap" => change(&ctx, &w[1..]),
        "substitute" => substitute(&ctx, &w[1..], false),
        "plug" if is(w, 1, "in") => substitute(&ctx, &w[2..], true),
        "plug" => substitute(&ctx, &w[1..], true),
        "move" => move_denominator(&w[1..]),
        "set" | "make" => set_bound(&ctx, &w[1..]),
        _ => None,
    };
    parsed.ok_or(EditError::NotACommand)
}

fn change(ctx: &Ctx, w: &[Word]) -> Option<EditCommand> {
    let (w, everywhere) = match w.last() {
        Some(x) if x.text == "everywhere" => (&w[..w.len() - 1], true),
        _ => (w, false),
    };
    for p in 1..w.len() {
        if !matches!(w[p].text.as_str(), "to" | "with" | "into" | "for") {
            continue;
        }
        let (occ, left) = occurrence(&w[..p]);
        let right = &w[p + 1..];
        let occ = if everywhere { Some(Occurrence::All) } else { occ };
        if let (Some((from, plural)), Some((to, _))) = (operator(left), operator(right)) {
            if from == to {
                return None;
            }
            let default = if plural { Occurrence::All } else { Occurrence::Only };
            return Some(EditCommand::ChangeOperator { from, to, occurrence: occ.unwrap_or(default) });
        }
        if let (Some(target), Some(replacement)) = (ctx.expr(left), ctx.expr(right)) {
            let occurrence = occ.unwrap_or(Occurrence::Only);
            return Some(EditCommand::ReplaceSubexpr { target, replacement, occurrence });
        }
    }
    None
}

fn substitution(target: Expr, replacement: Expr) -> EditCommand {
    match target {
        Expr::Ident(target) => EditCommand::Substitute { target, replacement },
        target => EditCommand::ReplaceSubexpr { target, replacement, occurrence: Occurrence::All },
    }
}

/// "x with 7", "7 for x", "x equals 7"; `plug` also allows "7 in for x".
fn substitute(ctx: &Ctx, w: &[Word], plug: bool) -> Option<EditCommand> {
    for p in 1..w.len() {
        let (left, right) = (&w[..p], &w[p + 1..]);
        match w[p].text.as_str() {
            "with" | "by" if !plug => {
                if let (Some(t), Some(r)) = (ctx.expr(left), ctx.expr(right)) {
                    return Some(substitution(t, r));
                }
            }
            "for" | "as" => {
                let left = if plug && left.last().is_some_and(|x| x.text == "in") { &left[..p - 1] } else { left };
                if let (Some(r), Some(t)) = (ctx.expr(left), ctx.expr(right)) {
                    return Some(substitution(t, r));
                }
            }
            _ => {}
        }
    }
    match ctx.expr(w)? {
        Expr::Binary { op: BinOp::Eq, left, right } => Some(substitution(*left, *right)),
        _ => None,
    }
}

/// "[the] [second|all the] denominator(s) [to|into the numerator | up | to the top]".
fn move_denominator(w: &[Word]) -> Option<EditCommand> {
    let (occ, w) = occurrence(w);
    let (head, tail) = w.split_first()?;
    let plural = match head.text.as_str() {
        "denominator" => false,
        "denominators" => true,
        _ => return None,
    };
    let tail = joined(tail);
    let ok = ["", "up", "to the numerator", "into the numerator", "to the numerators", "into the numerators", "to the top"];
    if !ok.contains(&tail.as_str()) {
        return None;
    }
    let default = if plural { Occurrence::All } else { Occurrence::Only };
    Some(EditCommand::MoveDenominatorToNumerator { fraction_selector: occ.unwrap_or(default) })
}

/// "[the] lower|upper bound|limit [of the integral] [to|to be|equal to|equals|=|be] value".
fn set_bound(ctx: &Ctx, w: &[Word]) -> Option<EditCommand> {
    let w = strip_article(w);
    let which = match w.first()?.text.as_str() {
        "lower" | "bottom" => Bound::Lower,
        "upper" | "top" => Bound::Upper,
        _ => return None,
    };
    if !matches!(w.get(1)?.text.as_str(), "bound" | "limit") {
        return None;
    }
    let mut w = &w[2..];
    if is(w, 0, "of") {
        w = strip_article(&w[1..]);
        if !matches!(w.first()?.text.as_str(), "integral" | "sum" | "summation" | "product") {
            return None;
        }
        w = &w[1..];
    }
    for connector in [&["to", "be"][..], &["equal", "to"], &["to"], &["equals"], &["="], &["be"], &["is"]] {
        if w.len() > connector.len() && w.iter().zip(connector).all(|(a, b)| a.text == *b) {
            w = &w[connector.len()..];
            break;
        }
    }
    let value = ctx.expr(w)?;
    Some(EditCommand::SetBound { which, value })
}
