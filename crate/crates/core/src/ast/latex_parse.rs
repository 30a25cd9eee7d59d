//! Parser for the LaTeX subset produced by [`render_latex`](super::render_latex).
//!
//! The accepted grammar is documented in `docs/latex-grammar.md`. Input
//! outside it is a syntax error; there is no best-effort recovery.

use thiserror::Error;

use super::{normalize, BigOpKind, BinOp, Expr, FunctionName, Greek, Ident, Number};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("LaTeX syntax error at byte {offset}: {message}")]
pub struct LatexSyntaxError {
    pub offset: usize,
    pub message: String,
}

impl LatexSyntaxError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        LatexSyntaxError { offset, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatexTok {
    Letter(char),
    Digits(String),
    Command(String),
    Symbol(char),
    /// `\,` `\;` `\:` `\!` `\quad` `\qquad`
    Space,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatexToken {
    pub tok: LatexTok,
    pub offset: usize,
    /// Whitespace (or a spacing command) separates this token from the previous one.
    pub spaced: bool,
}

const COMMANDS: &[&str] = &[
    "frac", "dfrac", "tfrac", "sqrt", "int", "sum", "prod", "sin", "cos", "tan", "log", "ln", "exp",
    "operatorname", "mathrm", "infty", "cdot", "times", "le", "leq", "ge", "geq", "left", "right",
    "cdots", "partial", "quad", "qquad",
];

fn known_command(name: &str) -> bool {
    COMMANDS.contains(&name) || Greek::from_command(name).is_some()
}

/// Splits `input` into subset tokens, rejecting unknown commands and characters.
pub fn tokenize_latex(input: &str) -> Result<Vec<LatexToken>, LatexSyntaxError> {
    let bytes = input.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut spaced = false;
    while i < bytes.len() {
        let start = i;
        let c = input[i..].chars().next().expect("in bounds");
        if c.is_whitespace() {
            spaced = true;
            i += c.len_utf8();
            continue;
        }
        let tok = if c == '\\' {
            let rest = &bytes[i + 1..];
            let letters = rest.iter().take_while(|b| b.is_ascii_alphabetic()).count();
            if letters > 0 {
                let name = &input[i + 1..i + 1 + letters];
                i += 1 + letters;
                if !known_command(name) {
                    return Err(LatexSyntaxError::new(start, format!("unsupported command `\\{name}`")));
                }
                if name == "quad" || name == "qquad" {
                    LatexTok::Space
                } else {
                    LatexTok::Command(name.to_string())
                }
            } else {
                match rest.first() {
                    Some(b',' | b';' | b':' | b'!' | b' ') => {
                        i += 2;
                        LatexTok::Space
                    }
                    _ => return Err(LatexSyntaxError::new(start, "unsupported control symbol")),
                }
            }
        } else if c.is_ascii_digit() {
            let mut end = i;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            if end + 1 < bytes.len() && bytes[end] == b'.' && bytes[end + 1].is_ascii_digit() {
                end += 1;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
            }
            i = end;
            LatexTok::Digits(input[start..end].to_string())
        } else if c.is_ascii_alphabetic() {
            i += 1;
            LatexTok::Letter(c)
        } else if "+-=<>()[]{}^_*/".contains(c) {
            i += 1;
            LatexTok::Symbol(c)
        } else {
            return Err(LatexSyntaxError::new(start, format!("unexpected character `{c}`")));
        };
        if tok == LatexTok::Space {
            spaced = true;
            tokens.push(LatexToken { tok, offset: start, spaced: true });
            continue;
        }
        tokens.push(LatexToken { tok, offset: start, spaced });
        spaced = false;
    }
    Ok(tokens)
}

/// Parses the documented subset and returns the canonical tree.
pub fn parse_latex(input: &str) -> Result<Expr, LatexSyntaxError> {
    let raw = tokenize_latex(input)?;
    let mut tokens = Vec::with_capacity(raw.len());
    let mut after_space = false;
    for t in raw {
        match &t.tok {
            LatexTok::Space => after_space = true,
            LatexTok::Command(c) if c == "cdots" || c == "left" || c == "right" => {}
            _ => {
                tokens.push(Tok { after_space, inner: t });
                after_space = false;
            }
        }
    }
    let mut p = Parser { tokens, pos: 0, end: input.len(), depth: 0, integrand: false };
    let e = p.relation()?;
    if let Some(t) = p.peek() {
        return Err(LatexSyntaxError::new(t.inner.offset, "unexpected token"));
    }
    Ok(normalize(&e))
}

struct Tok {
    /// A spacing command preceded this token.
    after_space: bool,
    inner: LatexToken,
}

const MAX_DEPTH: usize = 200;

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
    end: usize,
    depth: usize,
    /// Inside an integrand: stop before the differential.
    integrand: bool,
}

type PResult<T> = Result<T, LatexSyntaxError>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, ahead: usize) -> Option<&LatexTok> {
        self.tokens.get(self.pos + ahead).map(|t| &t.inner.tok)
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.inner.offset)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn is_symbol(&self, c: char) -> bool {
        matches!(self.peek_at(0), Some(LatexTok::Symbol(s)) if *s == c)
    }

    fn is_command(&self, name: &str) -> bool {
        matches!(self.peek_at(0), Some(LatexTok::Command(c)) if c == name)
    }

    fn eat_symbol(&mut self, c: char) -> bool {
        if self.is_symbol(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_symbol(&mut self, c: char, opened_at: Option<usize>) -> PResult<()> {
        if self.eat_symbol(c) {
            Ok(())
        } else if self.at_end() {
            match opened_at {
                Some(at) => Err(LatexSyntaxError::new(at, "unclosed group")),
                None => Err(LatexSyntaxError::new(self.end, format!("expected `{c}`"))),
            }
        } else {
            Err(LatexSyntaxError::new(self.offset(), format!("expected `{c}`")))
        }
    }

    fn unexpected<T>(&self) -> PResult<T> {
        if self.at_end() {
            Err(LatexSyntaxError::new(self.end, "unexpected end of input"))
        } else {
            Err(LatexSyntaxError::new(self.offset(), "unexpected token"))
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(LatexSyntaxError::new(self.offset(), "expression nested too deeply"));
        }
        Ok(())
    }

    /// Parses a delimited sub-expression: clears integrand mode and maps an
    /// unexpected end of input to the offset of the opening delimiter.
    fn delimited(&mut self, open: char, close: char) -> PResult<Expr> {
        let opened_at = self.offset();
        if !self.eat_symbol(open) {
            return self.unexpected();
        }
        if self.at_end() {
            return Err(LatexSyntaxError::new(opened_at, "unclosed group"));
        }
        let saved = std::mem::replace(&mut self.integrand, false);
        let inner = self.relation().map_err(|e| {
            if e.offset == self.end {
                LatexSyntaxError::new(opened_at, "unclosed group")
            } else {
                e
            }
        });
        self.integrand = saved;
        let inner = inner?;
        self.expect_symbol(close, Some(opened_at))?;
        Ok(inner)
    }

    fn relation(&mut self) -> PResult<Expr> {
        self.enter()?;
        let mut left = self.additive()?;
        loop {
            let op = match self.peek_at(0) {
                Some(LatexTok::Symbol('=')) => BinOp::Eq,
                Some(LatexTok::Symbol('<')) => BinOp::Lt,
                Some(LatexTok::Symbol('>')) => BinOp::Gt,
                Some(LatexTok::Command(c)) if c == "le" || c == "leq" => BinOp::Le,
                Some(LatexTok::Command(c)) if c == "ge" || c == "geq" => BinOp::Ge,
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
            let op = if self.is_symbol('+') {
                BinOp::Add
            } else if self.is_symbol('-') {
                BinOp::Sub
            } else {
                break;
            };
            self.pos += 1;
            let right = self.term()?;
            left = Expr::binary(op, left, right);
        }
        Ok(left)
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut left = self.unary()?;
        loop {
            if self.integrand && self.at_differential() {
                break;
            }
            if self.is_command("cdot") || self.is_command("times") || self.is_symbol('*') {
                self.pos += 1;
                let right = self.unary()?;
                left = Expr::mul(left, right);
            } else if self.is_symbol('/') {
                self.pos += 1;
                let right = self.unary()?;
                left = Expr::frac(left, right);
            } else if self.starts_primary() {
                let right = self.power()?;
                left = Expr::implicit(left, right);
            } else {
                break;
            }
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_symbol('-') {
            self.enter()?;
            let operand = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::neg(operand));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.primary()?;
        if self.eat_symbol('^') {
            let exponent = self.script()?;
            if self.is_symbol('^') {
                return Err(LatexSyntaxError::new(self.offset(), "double superscript"));
            }
            return Ok(Expr::pow(base, exponent));
        }
        Ok(base)
    }

    fn starts_primary(&self) -> bool {
        match self.peek_at(0) {
            Some(LatexTok::Letter(_) | LatexTok::Digits(_)) => true,
            Some(LatexTok::Symbol(c)) => *c == '(' || *c == '{',
            Some(LatexTok::Command(c)) => !matches!(
                c.as_str(),
                "cdot" | "times" | "le" | "leq" | "ge" | "geq" | "partial"
            ),
            _ => false,
        }
    }

    /// `\mathrm{d}` or a `d` glued to the variable, or any `d` after a spacing command.
    fn at_differential(&self) -> bool {
        let Some(t) = self.peek() else { return false };
        match &t.inner.tok {
            LatexTok::Letter('d') => {
                if t.after_space {
                    return true;
                }
                match self.tokens.get(self.pos + 1) {
                    Some(next) if !next.inner.spaced => {
                        matches!(&next.inner.tok, LatexTok::Letter(_))
                            || matches!(&next.inner.tok, LatexTok::Command(c) if c == "mathrm")
                    }
                    _ => false,
                }
            }
            LatexTok::Command(c) if c == "mathrm" => self.mathrm_is_d(self.pos),
            _ => false,
        }
    }

    fn mathrm_is_d(&self, at: usize) -> bool {
        let tok = |k: usize| self.tokens.get(at + k).map(|t| &t.inner.tok);
        matches!(tok(0), Some(LatexTok::Command(c)) if c == "mathrm")
            && tok(1) == Some(&LatexTok::Symbol('{'))
            && tok(2) == Some(&LatexTok::Letter('d'))
            && tok(3) == Some(&LatexTok::Symbol('}'))
    }

    /// Superscript or subscript argument: braces, one letter, one digit, or one command atom.
    fn script(&mut self) -> PResult<Expr> {
        match self.peek_at(0) {
            Some(LatexTok::Symbol('{')) => self.delimited('{', '}'),
            Some(LatexTok::Letter(c)) => {
                let c = *c;
                self.pos += 1;
                Ok(Expr::ident(&c.to_string()))
            }
            Some(LatexTok::Digits(d)) => {
                let d = d.clone();
                let first = &d[..1];
                if d.len() == 1 {
                    self.pos += 1;
                } else {
                    let tok = &mut self.tokens[self.pos].inner;
                    tok.tok = LatexTok::Digits(d[1..].to_string());
                    tok.offset += 1;
                    tok.spaced = false;
                }
                Ok(Expr::decimal(first).expect("single digit"))
            }
            Some(LatexTok::Command(_)) => {
                let saved = std::mem::replace(&mut self.integrand, false);
                let e = self.primary();
                self.integrand = saved;
                e
            }
            _ => self.unexpected(),
        }
    }

    fn subscript(&mut self) -> PResult<Option<Box<Expr>>> {
        if self.eat_symbol('_') {
            Ok(Some(Box::new(self.script()?)))
        } else {
            Ok(None)
        }
    }

    /// Letters inside `{...}` after `\mathrm` or `\operatorname`.
    fn braced_name(&mut self) -> PResult<String> {
        let opened_at = self.offset();
        self.expect_symbol('{', None)?;
        let mut name = String::new();
        while let Some(LatexTok::Letter(c)) = self.peek_at(0) {
            name.push(*c);
            self.pos += 1;
        }
        if name.is_empty() {
            return Err(LatexSyntaxError::new(self.offset(), "expected a name"));
        }
        self.expect_symbol('}', Some(opened_at))?;
        Ok(name)
    }

    fn variable(&mut self) -> PResult<Ident> {
        let name = match self.peek_at(0) {
            Some(LatexTok::Letter(c)) => {
                let c = *c;
                self.pos += 1;
                c.to_string()
            }
            Some(LatexTok::Command(c)) if c == "mathrm" => {
                self.pos += 1;
                self.braced_name()?
            }
            _ => return Err(LatexSyntaxError::new(self.offset(), "expected a variable")),
        };
        Ok(Ident { name, subscript: self.subscript()? })
    }

    fn primary(&mut self) -> PResult<Expr> {
        self.enter()?;
        let e = self.primary_inner()?;
        self.depth -= 1;
        Ok(e)
    }

    fn primary_inner(&mut self) -> PResult<Expr> {
        let offset = self.offset();
        let Some(tok) = self.peek_at(0).cloned() else {
            return self.unexpected();
        };
        match tok {
            LatexTok::Letter(c) => {
                self.pos += 1;
                let subscript = self.subscript()?;
                Ok(Expr::Ident(Ident { name: c.to_string(), subscript }))
            }
            LatexTok::Digits(d) => {
                self.pos += 1;
                Ok(Expr::Number { value: Number::new(d).expect("lexer emits decimals") })
            }
            LatexTok::Symbol('(') => Ok(Expr::group(self.delimited('(', ')')?)),
            LatexTok::Symbol('{') => Ok(Expr::group(self.delimited('{', '}')?)),
            LatexTok::Command(name) => {
                self.pos += 1;
                self.command(&name, offset)
            }
            _ => self.unexpected(),
        }
    }

    fn command(&mut self, name: &str, offset: usize) -> PResult<Expr> {
        if let Some(letter) = Greek::from_command(name) {
            let subscript = self.subscript()?;
            return Ok(Expr::Greek { letter, subscript });
        }
        match name {
            "infty" => Ok(Expr::Infinity),
            "mathrm" => {
                let name = self.braced_name()?;
                let subscript = self.subscript()?;
                Ok(Expr::Ident(Ident { name, subscript }))
            }
            "operatorname" => {
                let fname = self.braced_name()?;
                self.function(FunctionName::named(&fname))
            }
            "sin" | "cos" | "tan" | "log" | "ln" | "exp" => {
                self.function(FunctionName::builtin(name).expect("builtin"))
            }
            "frac" | "dfrac" | "tfrac" => self.fraction(),
            "sqrt" => {
                let degree = if self.is_symbol('[') { Some(Box::new(self.delimited('[', ']')?)) } else { None };
                let radicand = Box::new(self.delimited('{', '}')?);
                Ok(Expr::Root { degree, radicand })
            }
            "int" => self.integral(),
            "sum" => self.big_op(BigOpKind::Sum),
            "prod" => self.big_op(BigOpKind::Product),
            _ => Err(LatexSyntaxError::new(offset, format!("`\\{name}` cannot start an expression"))),
        }
    }

    fn function(&mut self, name: FunctionName) -> PResult<Expr> {
        let argument = if self.is_symbol('(') {
            self.delimited('(', ')')?
        } else {
            self.power()?
        };
        Ok(Expr::func(name, argument))
    }

    fn fraction(&mut self) -> PResult<Expr> {
        if let Some(marker) = self.derivative_marker() {
            return self.derivative(marker);
        }
        let numerator = self.delimited('{', '}')?;
        let denominator = self.delimited('{', '}')?;
        Ok(Expr::frac(numerator, denominator))
    }

    /// Recognizes `{\mathrm{d}}`, `{\mathrm{d}^n}`, `{\partial}`, `{\partial^n}`
    /// without consuming anything; returns (partial, token count).
    fn derivative_marker(&self) -> Option<(bool, usize)> {
        if self.peek_at(0) != Some(&LatexTok::Symbol('{')) {
            return None;
        }
        let (partial, mut k) = if self.mathrm_is_d(self.pos + 1) {
            (false, 5)
        } else if matches!(self.peek_at(1), Some(LatexTok::Command(c)) if c == "partial") {
            (true, 2)
        } else {
            return None;
        };
        if self.peek_at(k) == Some(&LatexTok::Symbol('^')) {
            k += 2;
            if self.peek_at(k - 1) == Some(&LatexTok::Symbol('{')) {
                k += 2;
            }
        }
        (self.peek_at(k) == Some(&LatexTok::Symbol('}'))).then_some((partial, k))
    }

    fn derivative_order(&mut self) -> PResult<u32> {
        if !self.eat_symbol('^') {
            return Ok(1);
        }
        let at = self.offset();
        match self.script()? {
            Expr::Number { value } => value
                .as_str()
                .parse::<u32>()
                .ok()
                .filter(|o| *o >= 1)
                .ok_or_else(|| LatexSyntaxError::new(at, "derivative order must be a positive integer")),
            _ => Err(LatexSyntaxError::new(at, "derivative order must be a positive integer")),
        }
    }

    fn eat_marker(&mut self, partial: bool) -> PResult<()> {
        if partial {
            if self.is_command("partial") {
                self.pos += 1;
                return Ok(());
            }
        } else if self.mathrm_is_d(self.pos) {
            self.pos += 4;
            return Ok(());
        }
        Err(LatexSyntaxError::new(self.offset(), "expected a differential"))
    }

    fn derivative(&mut self, (partial, _): (bool, usize)) -> PResult<Expr> {
        let open = self.offset();
        self.expect_symbol('{', None)?;
        self.eat_marker(partial)?;
        let order = self.derivative_order()?;
        self.expect_symbol('}', Some(open))?;
        let open = self.offset();
        self.expect_symbol('{', None)?;
        self.eat_marker(partial)?;
        let variable = self.variable()?;
        let at = self.offset();
        let denominator_order = self.derivative_order()?;
        if denominator_order != order {
            return Err(LatexSyntaxError::new(at, "derivative orders differ"));
        }
        self.expect_symbol('}', Some(open))?;
        let saved = std::mem::replace(&mut self.integrand, false);
        let body = self.power();
        self.integrand = saved;
        Ok(Expr::Derivative { order, partial, variable, body: Box::new(body?) })
    }

    fn integral(&mut self) -> PResult<Expr> {
        let mut lower = None;
        let mut upper = None;
        for _ in 0..2 {
            if lower.is_none() && self.eat_symbol('_') {
                lower = Some(Box::new(self.script()?));
            } else if upper.is_none() && self.eat_symbol('^') {
                upper = Some(Box::new(self.script()?));
            }
        }
        let saved = std::mem::replace(&mut self.integrand, true);
        let integrand = self.relation();
        self.integrand = saved;
        let integrand = integrand?;
        if self.mathrm_is_d(self.pos) {
            self.pos += 4;
        } else if matches!(self.peek_at(0), Some(LatexTok::Letter('d'))) {
            self.pos += 1;
        } else {
            return Err(LatexSyntaxError::new(self.offset(), "expected a differential such as `dx`"));
        }
        let variable = self.variable()?;
        Ok(Expr::Integral { lower, upper, integrand: Box::new(integrand), variable })
    }

    fn big_op(&mut self, op: BigOpKind) -> PResult<Expr> {
        if !self.eat_symbol('_') {
            return Err(LatexSyntaxError::new(self.offset(), "expected `_` with the index range"));
        }
        let open = self.offset();
        self.expect_symbol('{', None)?;
        let index = self.variable()?;
        self.expect_symbol('=', Some(open))?;
        let saved = std::mem::replace(&mut self.integrand, false);
        let lower = self.relation();
        self.integrand = saved;
        let lower = lower.map_err(|e| if e.offset == self.end { LatexSyntaxError::new(open, "unclosed group") } else { e })?;
        self.expect_symbol('}', Some(open))?;
        if !self.eat_symbol('^') {
            return Err(LatexSyntaxError::new(self.offset(), "expected `^` with the upper limit"));
        }
        let upper = self.script()?;
        let saved = std::mem::replace(&mut self.integrand, false);
        let body = self.power();
        self.integrand = saved;
        Ok(Expr::BigOp { op, index, lower: Box::new(lower), upper: Box::new(upper), body: Box::new(body?) })
    }
}
