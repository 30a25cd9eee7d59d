mod common;

use common::corpora::{ISOLATION_CASES, SYNONYM_TRIPLES};
use phoenix_core::ast::{parse_latex, render_latex, structurally_equal, Expr, RenderOptions};
use phoenix_core::spoken::{parse_spoken, tokenize, Lexicon, SpokenError, TokenKind};
use proptest::prelude::*;

fn parse(s: &str) -> Expr {
    parse_spoken(s, &Lexicon::stem(), None).unwrap_or_else(|e| panic!("{s}: {e}")).expr
}

#[test]
fn synonym_triples_agree() {
    assert!(SYNONYM_TRIPLES.len() >= 20);
    for triple in SYNONYM_TRIPLES {
        let first = parse(triple[0]);
        for other in &triple[1..] {
            assert!(structurally_equal(&first, &parse(other)), "{triple:?}: {other}");
        }
    }
}

#[test]
fn spoken_and_typed_fraction_agree() {
    let typed = parse_latex("\\frac{x}{3}").unwrap();
    assert!(structurally_equal(&typed, &parse("x over 3")));
}

#[test]
fn isolation_suite() {
    for (utterance, latex, residual) in ISOLATION_CASES {
        let t = parse_spoken(utterance, &Lexicon::stem(), None).unwrap_or_else(|e| panic!("{utterance}: {e}"));
        assert_eq!(render_latex(&t.expr, &RenderOptions::default()), *latex, "{utterance}");
        assert_eq!(t.residual_text, *residual, "{utterance}");
    }
}

#[test]
fn reparsing_the_span_gives_the_same_tree() {
    let utterances = ISOLATION_CASES
        .iter()
        .map(|c| c.0)
        .chain(SYNONYM_TRIPLES.iter().flatten().copied());
    for u in utterances {
        let t = parse_spoken(u, &Lexicon::stem(), None).unwrap();
        let span: String = u.chars().skip(t.source_span.0).take(t.source_span.1 - t.source_span.0).collect();
        let again = parse_spoken(&span, &Lexicon::stem(), None).unwrap();
        assert_eq!(again.expr, t.expr, "{u} / {span}");
        assert_eq!(again.source_span, (0, span.chars().count()), "{u} / {span}");
    }
}

#[test]
fn token_spans_are_ordered_and_disjoint() {
    let toks = tokenize("Index of refraction one, sine of theta one", &Lexicon::stem());
    for pair in toks.windows(2) {
        assert!(pair[0].span.1 <= pair[1].span.0);
    }
    assert_eq!(toks[0].kind, TokenKind::DomainPhrase);
}

#[test]
fn user_lexicon_adds_terms() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/physics.lex");
    let lex = Lexicon::stem_with_files(&[path]).unwrap();
    let t = parse_spoken("wavelength two equals speed of light over frequency two", &lex, None).unwrap();
    assert_eq!(render_latex(&t.expr, &RenderOptions::default()), "\\lambda_2 = \\frac{c}{f_2}");
}

const VOCAB: &[&str] = &[
    "x", "over", "plus", "the", "integral", "from", "to", "of", "dx", "squared", "sine", "theta", "one", "two",
    "(", ")", ",", "equals", "sum", "derivative", "with respect to", "sub", "capital", "point", "negative", "to the",
    "root", "square root", "hello", "I", "a", "d", "by", "times", "e", "pi", "infinity", "third", "power", "-",
];

proptest! {
    #[test]
    fn never_panics_on_arbitrary_text(s in "\\PC{0,60}") {
        let _ = parse_spoken(&s, &Lexicon::stem(), None);
    }

    #[test]
    fn never_panics_on_vocabulary_soup(words in prop::collection::vec(prop::sample::select(VOCAB), 0..25)) {
        let s = words.join(" ");
        match parse_spoken(&s, &Lexicon::stem(), None) {
            Ok(t) => prop_assert!(t.expr.validate().is_ok()),
            Err(SpokenError::NoMathFound | SpokenError::Syntax { .. } | SpokenError::Invalid(_)) => {}
        }
    }
}

#[test]
fn deep_nesting_is_an_error() {
    let s = "open paren ".repeat(200) + "x" + &" close paren".repeat(200);
    assert!(matches!(parse_spoken(&s, &Lexicon::stem(), None), Err(SpokenError::Syntax { .. })));
    let s = "negative ".repeat(500) + "x";
    assert!(parse_spoken(&s, &Lexicon::stem(), None).is_err());
}
