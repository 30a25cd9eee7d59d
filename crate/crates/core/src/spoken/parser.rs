use std::collections::HashSet;

use super::lexicon::{LexEntry, Lexicon};
use super::numbers;
use super::tokenize::{SpokenToken, TokenKind};
use super::{SpokenError, SpokenOptions, SymbolContext};
use crate::ast::{BigOpKind, BinOp, Expr, Greek, Ident, Number};

const MAX_DEPTH: usize = 64;

const OPEN_PARENS: &[&str] = &["(", "open paren", "open parenthesis", "left paren", "left parenthesis"];
const CLOSE_PARENS: &[&str] = &[")", "close paren", "close parenthesis", "right paren", "right parenthesis"];
const EQUALS: &[&str] = &["equals", "equal", "equal to", "equals to", "is equal to", "="];

struct Tok<'a> {
    kind: TokenKind,
    text: &'a str,
    span: (usize, usize),
    after_sep: bool,
}

pub(super) struct Parser<'a> {
    toks: Vec<Tok<'a>>,
    pos: usize,
    depth: usize,
    chars: Vec<char>,
    lexicon: &'a Lexicon,
    context: Option<&'a SymbolContext>,
    opts: SpokenOptions,
    in_lower_bound: bool,
    in_integrand: bool,
}

type PResult<T> = Result<T, SpokenError>;

impl<'a> Parser<'a> {
    pub(super) fn new(
        utterance: &str,
        tokens: &'a [SpokenToken],
        lexicon: &'a Lexicon,
        context: Option<&'a SymbolContext>,
        opts: SpokenOptions,
    ) -> Self {
        let mut toks = Vec::new();
        let mut after_sep = false;
        for t in tokens {
            match t.kind {
                TokenKind::Separator => after_sep = true,
                TokenKind::Filler => {}
                kind => {
                    toks.push(Tok { kind, text: &t.text, span: t.span, after_sep });
                    after_sep = false;
                }
            }
        }
        Parser {
            toks,
            pos: 0,
            depth: 0,
            chars: utterance.chars().collect(),
            lexicon,
            context,
            opts,
            in_lower_bound: false,
            in_integrand: false,
        }
    }

    pub(super) fn parse(mut self) -> PResult<Expr> {
        if self.toks.is_empty() {
            return Err(SpokenError::NoMathFound);
        }
        let e = self.relation()?;
        if self.pos < self.toks.len() {
            return self.unexpected();
        }
        Ok(e)
    }

    fn peek(&self) -> Option<&Tok<'a>> {
        self.toks.get(self.pos)
    }

    fn text_at(&self, k: usize) -> Option<&'a str> {
        self.toks.get(k).map(|t| t.text)
    }

    fn is(&self, text: &str) -> bool {
        self.text_at(self.pos) == Some(text)
    }

    fn is_any(&self, texts: &[&str]) -> bool {
        self.text_at(self.pos).is_some_and(|t| texts.contains(&t))
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.is(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_any(&mut self, texts: &[&str]) -> bool {
        if self.is_any(texts) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn here(&self) -> (usize, usize) {
        match self.peek() {
            Some(t) => t.span,
            None => {
                let end = self.toks.last().map_or(0, |t| t.span.1);
                (end, end)
            }
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(SpokenError::Syntax { span: self.here(), message: message.into() })
    }

    fn unexpected<T>(&self) -> PResult<T> {
        match self.peek() {
            Some(t) => self.error(format!("unexpected `{}`", t.text)),
            None => self.error("unexpected end of utterance"),
        }
    }

    fn expect_any(&mut self, texts: &[&str], what: &str) -> PResult<()> {
        if self.eat_any(texts) {
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.error("expression is nested too deeply");
        }
        Ok(())
    }

    fn relation(&mut self) -> PResult<Expr> {
        self.enter()?;
        let mut left = self.additive()?;
        loop {
            let op = match self.text_at(self.pos) {
                Some(t) if EQUALS.contains(&t) => BinOp::Eq,
                Some("less than" | "is less than" | "<") => BinOp::Lt,
                Some("greater than" | "is greater than" | ">") => BinOp::Gt,
                Some("less than or equal to" | "is less than or equal to" | "at most" | "<=") => BinOp::Le,
                Some("greater than or equal to" | "is greater than or equal to" | "at least" | ">=") => BinOp::Ge,
                _ => break,
            };
            self.pos += 1;
            let right = self.additive()?;
            left = Expr::binary(op, left, right);
        }
        self.depth -= 1;
        Ok(left)
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut left = self.term()?;
        loop {
            if self.eat_any(&["plus", "+"]) {
                left = Expr::add(left, self.term()?);
            } else if self.eat_any(&["minus", "-"]) {
                left = Expr::sub(left, self.term()?);
            } else if self.eat("all over") {
                left = Expr::frac(left, self.term()?);
            } else {
                return Ok(left);
            }
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut left = self.unary()?;
        loop {
            if self.eat_any(&["times", "multiplied by", "*"]) {
                left = Expr::mul(left, self.unary()?);
            } else if self.eat_any(&["over", "divided by", "by", "/"]) {
                left = Expr::frac(left, self.unary()?);
            } else if self.peek().is_some_and(|t| !t.after_sep) && self.starts_primary(self.pos) {
                left = Expr::implicit(left, self.power()?);
            } else {
                return Ok(left);
            }
        }
    }

    /// A unary operand followed by implicit factors only: "2 x", "i pi".
    fn juxtaposed(&mut self) -> PResult<Expr> {
        let mut left = self.unary()?;
        while self.peek().is_some_and(|t| !t.after_sep) && self.starts_primary(self.pos) {
            left = Expr::implicit(left, self.power()?);
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_any(&["negative", "minus", "-"]) {
            self.enter()?;
            let operand = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::neg(operand));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let mut base = self.postfix()?;
        loop {
            let exponent = if !self.in_lower_bound && self.eat("to the") {
                self.exponent(true)?
            } else if self.eat_any(&["to the power of", "to the power", "raised to the power of"]) {
                self.exponent(false)?
            } else if self.eat("raised to the") || self.eat("raised to") {
                self.exponent(true)?
            } else if self.eat("^") {
                self.unary()?
            } else {
                return Ok(base);
            };
            base = Expr::pow(base, exponent);
        }
    }

    fn exponent(&mut self, ordinal_allowed: bool) -> PResult<Expr> {
        let e = match self.text_at(self.pos).and_then(numbers::ordinal) {
            Some(value) if ordinal_allowed => {
                self.pos += 1;
                match value {
                    Some(v) => Expr::num(v),
                    None => Expr::ident("n"),
                }
            }
            _ => self.saved(|p| p.juxtaposed())?,
        };
        self.eat("power");
        Ok(e)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.eat("squared") {
                e = Expr::pow(e, Expr::num(2));
            } else if self.eat("cubed") {
                e = Expr::pow(e, Expr::num(3));
            } else if self.eat("degrees") {
                e = Expr::frac(Expr::implicit(e, Expr::greek(Greek::Pi)), Expr::num(180));
            } else {
                return Ok(e);
            }
        }
    }

    /// Runs `f` with the bound and integrand modes cleared.
    fn saved<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        let (lower, integrand) = (self.in_lower_bound, self.in_integrand);
        self.in_lower_bound = false;
        self.in_integrand = false;
        let out = f(self);
        self.in_lower_bound = lower;
        self.in_integrand = integrand;
        out
    }

    fn is_cardinal(text: &str) -> bool {
        numbers::classify(text).is_some()
    }

    fn is_differential_at(&self, k: usize) -> bool {
        let Some(t) = self.toks.get(k) else { return false };
        if t.kind == TokenKind::StructureWord && t.text.len() == 2 && t.text.starts_with('d') {
            return true;
        }
        t.kind == TokenKind::Identifier
            && t.text == "d"
            && self.toks.get(k + 1).is_some_and(|n| matches!(n.kind, TokenKind::Identifier | TokenKind::Greek) && !n.after_sep)
    }

    fn starts_primary(&self, k: usize) -> bool {
        let Some(t) = self.toks.get(k) else { return false };
        match t.kind {
            TokenKind::Digit | TokenKind::Greek | TokenKind::Function | TokenKind::DomainPhrase => true,
            TokenKind::NumberWord => {
                Self::is_cardinal(t.text)
                    || self.text_at(k + 1).is_some_and(|n| {
                        matches!(n, "derivative" | "partial" | "partial derivative" | "root")
                    })
            }
            TokenKind::Identifier => !(self.in_integrand && self.is_differential_at(k)),
            TokenKind::StructureWord => match t.text {
                "the" | "an" => self.starts_primary(k + 1),
                "capital" | "uppercase" | "integral" | "sum" | "summation" | "product" | "derivative" | "partial"
                | "partial derivative" | "square root" | "cube root" => true,
                other => OPEN_PARENS.contains(&other),
            },
            _ => false,
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        self.enter()?;
        let e = self.primary_inner()?;
        self.depth -= 1;
        Ok(e)
    }

    fn primary_inner(&mut self) -> PResult<Expr> {
        let Some(tok) = self.peek() else { return self.error("expected an expression") };
        let (kind, text) = (tok.kind, tok.text);
        match kind {
            TokenKind::Digit => {
                let value = Number::new(text).map_err(|_| SpokenError::Syntax {
                    span: self.here(),
                    message: format!("`{text}` is not a number"),
                })?;
                self.pos += 1;
                Ok(Expr::Number { value })
            }
            TokenKind::NumberWord if Self::is_cardinal(text) => self.number(),
            TokenKind::NumberWord => match self.text_at(self.pos + 1) {
                Some("derivative" | "partial" | "partial derivative") => self.derivative(),
                Some("root") => self.root(),
                _ => self.unexpected(),
            },
            TokenKind::Identifier if text == "infinity" => {
                self.pos += 1;
                Ok(Expr::Infinity)
            }
            TokenKind::Identifier => self.letter(false),
            TokenKind::Greek => self.greek(false),
            TokenKind::DomainPhrase => self.domain(),
            TokenKind::Function => self.function(),
            TokenKind::StructureWord => match text {
                "the" | "an" => {
                    self.pos += 1;
                    self.primary_inner()
                }
                "capital" | "uppercase" => {
                    self.pos += 1;
                    match self.peek().map(|t| t.kind) {
                        Some(TokenKind::Identifier) if self.peek().is_some_and(|t| t.text.len() == 1) => {
                            self.letter(true)
                        }
                        Some(TokenKind::Greek) => self.greek(true),
                        _ => self.error("expected a letter after `capital`"),
                    }
                }
                "integral" => self.integral(),
                "sum" | "summation" | "product" => self.big_op(),
                "derivative" | "partial" | "partial derivative" => self.derivative(),
                "square root" | "cube root" => self.root(),
                t if OPEN_PARENS.contains(&t) => {
                    self.pos += 1;
                    let inner = self.saved(|p| p.relation())?;
                    self.expect_any(CLOSE_PARENS, "a closing parenthesis")?;
                    Ok(Expr::group(inner))
                }
                _ => self.unexpected(),
            },
            _ => self.unexpected(),
        }
    }

    fn number(&mut self) -> PResult<Expr> {
        let words: Vec<&str> = self.toks[self.pos..]
            .iter()
            .take_while(|t| t.kind == TokenKind::NumberWord && Self::is_cardinal(t.text))
            .map(|t| t.text)
            .collect();
        let Some((value, used)) = numbers::parse_cardinal(&words) else { return self.unexpected() };
        self.pos += used;
        let mut text = value.to_string();
        if self.is("point") {
            let mut fraction = String::new();
            let mut k = self.pos + 1;
            while let Some(t) = self.toks.get(k) {
                match (t.kind, numbers::digit(t.text)) {
                    (TokenKind::NumberWord, Some(d)) => fraction.push_str(&d.to_string()),
                    (TokenKind::Digit, _) if !t.text.contains('.') => fraction.push_str(t.text),
                    _ => break,
                }
                k += 1;
            }
            if !fraction.is_empty() {
                self.pos = k;
                text = format!("{text}.{fraction}");
            }
        }
        Ok(Expr::Number { value: Number::new(text).expect("digits") })
    }

    /// A number immediately following the previous token, read as a subscript.
    fn following_number(&mut self) -> PResult<Option<Expr>> {
        match self.peek() {
            Some(t) if !t.after_sep && t.kind == TokenKind::Digit && !t.text.contains('.') => {
                let value = Number::new(t.text).expect("digits");
                self.pos += 1;
                Ok(Some(Expr::Number { value }))
            }
            Some(t) if !t.after_sep && t.kind == TokenKind::NumberWord && Self::is_cardinal(t.text) => {
                let words: Vec<&str> = self.toks[self.pos..]
                    .iter()
                    .take_while(|t| t.kind == TokenKind::NumberWord && Self::is_cardinal(t.text))
                    .map(|t| t.text)
                    .collect();
                let (value, used) = numbers::parse_cardinal(&words).expect("cardinal");
                self.pos += used;
                Ok(Some(Expr::Number { value: Number::from_u64(value) }))
            }
            _ => Ok(None),
        }
    }

    /// `sub 1`, `subscript i`, `sub theta`.
    fn explicit_subscript(&mut self) -> PResult<Option<Expr>> {
        if !self.eat_any(&["sub", "subscript"]) {
            return Ok(None);
        }
        if let Some(n) = self.following_number()? {
            return Ok(Some(n));
        }
        match self.peek().map(|t| t.kind) {
            Some(TokenKind::Identifier) if self.peek().is_some_and(|t| t.text.len() == 1) => {
                let name = self.letter_name(false);
                self.pos += 1;
                Ok(Some(Expr::ident(&name)))
            }
            Some(TokenKind::Greek) => {
                let g = self.greek_letter(false)?;
                self.pos += 1;
                Ok(Some(Expr::greek(g)))
            }
            _ => self.error("expected a subscript"),
        }
    }

    fn letter_name(&self, capital: bool) -> String {
        let t = &self.toks[self.pos];
        if capital {
            t.text.to_uppercase()
        } else if self.opts.lowercase_default {
            t.text.to_string()
        } else {
            self.chars[t.span.0..t.span.1].iter().collect()
        }
    }

    fn letter(&mut self, capital: bool) -> PResult<Expr> {
        let name = self.letter_name(capital);
        if !name.bytes().all(|b| b.is_ascii_alphabetic()) {
            return self.error(format!("`{name}` is not a variable name"));
        }
        self.pos += 1;
        let sub = self.explicit_subscript()?;
        Ok(self.attach(Expr::Ident(Ident { name, subscript: sub.map(Box::new) })))
    }

    fn greek_letter(&self, capital: bool) -> PResult<Greek> {
        let t = &self.toks[self.pos];
        let letter = match self.lexicon.get(t.text) {
            Some(LexEntry::Greek(g)) => Some(*g),
            _ => {
                let mut cs = t.text.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) => Greek::from_unicode(c),
                    _ => None,
                }
            }
        };
        let Some(letter) = letter else { return self.error(format!("unknown Greek letter `{}`", t.text)) };
        if !capital {
            return Ok(letter);
        }
        let cmd = letter.command();
        let upper = cmd[..1].to_uppercase() + &cmd[1..];
        match Greek::from_command(&upper) {
            Some(g) => Ok(g),
            None => self.error(format!("`{cmd}` has no capital form")),
        }
    }

    fn greek(&mut self, capital: bool) -> PResult<Expr> {
        let letter = self.greek_letter(capital)?;
        self.pos += 1;
        let sub = match self.following_number()? {
            Some(n) => Some(n),
            None => self.explicit_subscript()?,
        };
        Ok(self.attach(Expr::Greek { letter, subscript: sub.map(Box::new) }))
    }

    /// Applies context bias to a symbol spoken without a subscript.
    fn attach(&self, e: Expr) -> Expr {
        match (&e, self.context) {
            (Expr::Ident(Ident { subscript: None, .. }) | Expr::Greek { subscript: None, .. }, Some(ctx)) => {
                ctx.resolve(&e).unwrap_or(e)
            }
            _ => e,
        }
    }

    fn domain(&mut self) -> PResult<Expr> {
        let text = self.toks[self.pos].text;
        let entry = self.lexicon.get(text).cloned();
        self.pos += 1;
        match entry {
            Some(LexEntry::Term(term)) => {
                let sub = if term.subscript_follows { self.following_number()? } else { None };
                let sub = match sub {
                    Some(s) => Some(s),
                    None => self.explicit_subscript()?,
                };
                let symbol = match (term.symbol, sub) {
                    (Expr::Ident(Ident { name, subscript: None }), Some(s)) => Expr::ident_sub(&name, s),
                    (Expr::Greek { letter, subscript: None }, Some(s)) => Expr::greek_sub(letter, s),
                    (_, Some(_)) => {
                        return Err(SpokenError::Syntax {
                            span: self.toks[self.pos - 1].span,
                            message: format!("`{text}` cannot take a subscript"),
                        })
                    }
                    (symbol, None) => symbol,
                };
                Ok(self.attach(symbol))
            }
            Some(LexEntry::Equation(e)) => Ok(e),
            _ => {
                self.pos -= 1;
                self.error(format!("`{text}` is not in the lexicon"))
            }
        }
    }

    fn function(&mut self) -> PResult<Expr> {
        let name = match self.lexicon.get(self.toks[self.pos].text) {
            Some(LexEntry::Function(f)) => f.clone(),
            _ => return self.unexpected(),
        };
        self.pos += 1;
        self.eat("of");
        let argument = self.saved(|p| {
            if p.eat_any(&["negative", "minus", "-"]) {
                Ok(Expr::neg(p.primary()?))
            } else {
                p.primary()
            }
        })?;
        Ok(Expr::func(name, argument))
    }

    fn root(&mut self) -> PResult<Expr> {
        let degree = match self.text_at(self.pos) {
            Some("square root") => None,
            Some("cube root") => Some(Expr::num(3)),
            Some(t) => match numbers::ordinal(t) {
                Some(Some(2)) => None,
                Some(Some(n)) => Some(Expr::num(n)),
                Some(None) => Some(Expr::ident("n")),
                None => return self.unexpected(),
            },
            None => return self.unexpected(),
        };
        self.pos += 1;
        if degree.is_some() || self.is("root") {
            self.eat("root");
        }
        self.eat("of");
        let radicand = self.saved(|p| p.unary())?;
        Ok(Expr::Root { degree: degree.map(Box::new), radicand: Box::new(radicand) })
    }

    /// A Latin letter naming a differential or bound variable.
    fn variable_letter(&mut self) -> PResult<Ident> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier && t.text.len() == 1 => {
                let name = self.letter_name(false);
                self.pos += 1;
                Ok(Ident::new(name))
            }
            Some(t) if t.kind == TokenKind::Greek => self.error("the variable must be a Latin letter"),
            _ => self.error("expected a variable"),
        }
    }

    fn differential(&mut self) -> PResult<Option<Ident>> {
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::StructureWord && t.text.len() == 2 && t.text.starts_with('d') {
                let name = if self.opts.lowercase_default {
                    t.text[1..].to_string()
                } else {
                    self.chars[t.span.0 + 1..t.span.1].iter().collect()
                };
                self.pos += 1;
                return Ok(Some(Ident::new(name)));
            }
            if t.kind == TokenKind::Identifier && t.text == "d" && self.is_differential_at(self.pos) {
                self.pos += 1;
                return self.variable_letter().map(Some);
            }
        }
        if self.eat("with respect to") {
            return self.variable_letter().map(Some);
        }
        Ok(None)
    }

    fn bounds(&mut self) -> PResult<(Expr, Expr)> {
        self.in_lower_bound = true;
        let lower = self.additive();
        self.in_lower_bound = false;
        let lower = lower?;
        self.expect_any(&["to", "to the"], "`to`")?;
        let upper = self.additive()?;
        Ok((lower, upper))
    }

    fn integral(&mut self) -> PResult<Expr> {
        self.pos += 1;
        let (lower, upper) = if self.eat("from") {
            let (l, u) = self.saved(|p| p.bounds())?;
            (Some(l), Some(u))
        } else {
            (None, None)
        };
        self.eat("of");
        let outer = (self.in_lower_bound, self.in_integrand);
        self.in_lower_bound = false;
        self.in_integrand = true;
        let integrand = self.additive();
        (self.in_lower_bound, self.in_integrand) = outer;
        let integrand = integrand?;
        let variable = match self.differential()? {
            Some(v) => v,
            None => default_variable(&integrand),
        };
        Ok(Expr::integral(lower, upper, integrand, variable))
    }

    fn big_op(&mut self) -> PResult<Expr> {
        let op = if self.is("product") { BigOpKind::Product } else { BigOpKind::Sum };
        self.pos += 1;
        self.expect_any(&["from"], "`from` after the sum")?;
        let index = self.variable_letter()?;
        self.expect_any(EQUALS, "`equals` after the index")?;
        let (lower, upper) = self.saved(|p| p.bounds())?;
        self.eat("of");
        let body = self.saved(|p| p.term())?;
        Ok(Expr::BigOp { op, index, lower: Box::new(lower), upper: Box::new(upper), body: Box::new(body) })
    }

    fn derivative(&mut self) -> PResult<Expr> {
        let mut order = 1;
        if let Some(o) = self.text_at(self.pos).and_then(numbers::ordinal) {
            let Some(o) = o else { return self.error("derivative order must be a number") };
            order = o as u32;
            self.pos += 1;
        }
        let partial = if self.eat("partial derivative") {
            true
        } else if self.eat("partial") {
            self.expect_any(&["derivative"], "`derivative`")?;
            true
        } else {
            self.expect_any(&["derivative"], "`derivative`")?;
            false
        };
        self.eat("of");
        let body = self.saved(|p| p.additive())?;
        let variable = if self.eat("with respect to") { self.variable_letter()? } else { default_variable(&body) };
        Ok(Expr::Derivative { order, partial, variable, body: Box::new(body) })
    }
}

/// The unique free Latin variable of `body`, else `x`.
pub(super) fn default_variable(body: &Expr) -> Ident {
    let mut free = HashSet::new();
    collect_free(body, &mut Vec::new(), &mut free);
    let mut latin = free.iter().filter_map(|e| match e {
        Expr::Ident(id) => Some(id.clone()),
        _ => None,
    });
    match (free.len(), latin.next()) {
        (1, Some(id)) => id,
        _ => Ident::new("x"),
    }
}

fn collect_free(e: &Expr, bound: &mut Vec<Ident>, out: &mut HashSet<Expr>) {
    match e {
        Expr::Ident(id) => {
            if !bound.contains(id) {
                out.insert(e.clone());
            }
        }
        Expr::Greek { letter, .. } => {
            if *letter != Greek::Pi {
                out.insert(e.clone());
            }
        }
        Expr::Integral { lower, upper, integrand, variable } => {
            for b in lower.iter().chain(upper.iter()) {
                collect_free(b, bound, out);
            }
            bound.push(variable.clone());
            collect_free(integrand, bound, out);
            bound.pop();
        }
        Expr::BigOp { index, lower, upper, body, .. } => {
            collect_free(lower, bound, out);
            collect_free(upper, bound, out);
            bound.push(index.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
        Expr::Derivative { variable, body, .. } => {
            bound.push(variable.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
        other => {
            for c in other.children() {
                collect_free(c, bound, out);
            }
        }
    }
}
