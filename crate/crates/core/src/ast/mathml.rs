//! MathML encoding of [`Expr`] and a reader for the Word-restricted profile.
//!
//! Both profiles share one encoding except for parentheses: the full profile
//! writes `<mo>(</mo>` fences inside an `mrow`, the Word profile writes
//! `mfenced`, which Word's importer understands.

use thiserror::Error;

use super::{normalize, BigOpKind, BinOp, Expr, FunctionName, Greek, Ident, Number};

pub const MATHML_NS: &str = "http://www.w3.org/1998/Math/MathML";

/// Elements the Word-restricted profile may contain.
pub const WORD_ALLOWED_ELEMENTS: &[&str] = &[
    "math", "mrow", "mi", "mn", "mo", "msub", "msup", "msubsup", "mfrac", "msqrt", "mroot", "mtext",
    "mtable", "mtr", "mtd", "mfenced", "mover", "munder", "munderover",
];

/// Attributes the Word-restricted profile may carry on MathML elements.
pub const WORD_ALLOWED_ATTRIBUTES: &[&str] = &["display", "mathvariant", "open", "close", "separators"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MathmlProfile {
    Full,
    WordRestricted,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MathmlError {
    #[error("construct `{0}` has no encoding in the requested profile")]
    UnsupportedInProfile(String),
    #[error("malformed MathML: {0}")]
    Malformed(String),
}

const INVISIBLE_TIMES: &str = "\u{2062}";
const FUNCTION_APPLICATION: &str = "\u{2061}";
const MINUS: &str = "\u{2212}";
const DOT: &str = "\u{22C5}";

/// Renders the canonical form of `expr` inside a `<math>` element.
pub fn render_mathml(expr: &Expr, profile: MathmlProfile) -> Result<String, MathmlError> {
    let mut out = format!("<math xmlns=\"{MATHML_NS}\">");
    Writer { profile, out: &mut out }.expr(&normalize(expr))?;
    out.push_str("</math>");
    Ok(out)
}

/// Renders only the children of `<math>` for embedding in a larger document.
pub(crate) fn render_mathml_content(expr: &Expr, profile: MathmlProfile, out: &mut String) -> Result<(), MathmlError> {
    Writer { profile, out }.expr(&normalize(expr))
}

pub(crate) fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

struct Writer<'a> {
    profile: MathmlProfile,
    out: &'a mut String,
}

impl Writer<'_> {
    fn leaf(&mut self, tag: &str, text: &str) {
        self.out.push('<');
        self.out.push_str(tag);
        self.out.push('>');
        self.out.push_str(&escape_text(text));
        self.out.push_str("</");
        self.out.push_str(tag);
        self.out.push('>');
    }

    fn open(&mut self, tag: &str) {
        self.out.push('<');
        self.out.push_str(tag);
        self.out.push('>');
    }

    fn close(&mut self, tag: &str) {
        self.out.push_str("</");
        self.out.push_str(tag);
        self.out.push('>');
    }

    fn upright_d(&mut self) {
        self.out.push_str("<mi mathvariant=\"normal\">d</mi>");
    }

    fn fenced(&mut self, inner: &Expr) -> Result<(), MathmlError> {
        match self.profile {
            MathmlProfile::WordRestricted => {
                self.open("mfenced");
                self.expr(inner)?;
                self.close("mfenced");
            }
            MathmlProfile::Full => {
                self.open("mrow");
                self.leaf("mo", "(");
                self.expr(inner)?;
                self.leaf("mo", ")");
                self.close("mrow");
            }
        }
        Ok(())
    }

    fn with_subscript(&mut self, base: impl FnOnce(&mut Self), subscript: Option<&Expr>) -> Result<(), MathmlError> {
        match subscript {
            Some(sub) => {
                self.open("msub");
                base(self);
                self.expr(sub)?;
                self.close("msub");
            }
            None => base(self),
        }
        Ok(())
    }

    fn ident(&mut self, id: &Ident) -> Result<(), MathmlError> {
        self.with_subscript(|w| w.leaf("mi", &id.name), id.subscript.as_deref())
    }

    fn expr(&mut self, e: &Expr) -> Result<(), MathmlError> {
        match e {
            Expr::Number { value } => self.leaf("mn", value.as_str()),
            Expr::Ident(id) => self.ident(id)?,
            Expr::Greek { letter, subscript } => {
                let glyph = letter.unicode().to_string();
                self.with_subscript(|w| w.leaf("mi", &glyph), subscript.as_deref())?;
            }
            Expr::Infinity => self.leaf("mi", "\u{221E}"),
            Expr::Binary { op, left, right } => {
                self.open("mrow");
                self.expr(left)?;
                self.leaf("mo", op_text(*op));
                self.expr(right)?;
                self.close("mrow");
            }
            Expr::Neg { operand } => {
                self.open("mrow");
                self.leaf("mo", MINUS);
                self.expr(operand)?;
                self.close("mrow");
            }
            Expr::Fraction { numerator, denominator } => {
                self.open("mfrac");
                self.expr(numerator)?;
                self.expr(denominator)?;
                self.close("mfrac");
            }
            Expr::Power { base, exponent } => {
                self.open("msup");
                self.expr(base)?;
                self.expr(exponent)?;
                self.close("msup");
            }
            Expr::Root { degree: None, radicand } => {
                self.open("msqrt");
                self.expr(radicand)?;
                self.close("msqrt");
            }
            Expr::Root { degree: Some(d), radicand } => {
                self.open("mroot");
                self.expr(radicand)?;
                self.expr(d)?;
                self.close("mroot");
            }
            Expr::Function { name, argument } => {
                self.open("mrow");
                self.leaf("mi", name.as_str());
                self.leaf("mo", FUNCTION_APPLICATION);
                self.fenced(argument)?;
                self.close("mrow");
            }
            Expr::Integral { lower, upper, integrand, variable } => {
                self.open("mrow");
                let tag = match (lower, upper) {
                    (Some(_), Some(_)) => Some("msubsup"),
                    (Some(_), None) => Some("msub"),
                    (None, Some(_)) => Some("msup"),
                    (None, None) => None,
                };
                if let Some(tag) = tag {
                    self.open(tag);
                }
                self.leaf("mo", "\u{222B}");
                if let Some(l) = lower {
                    self.expr(l)?;
                }
                if let Some(u) = upper {
                    self.expr(u)?;
                }
                if let Some(tag) = tag {
                    self.close(tag);
                }
                self.expr(integrand)?;
                self.open("mrow");
                self.upright_d();
                self.ident(variable)?;
                self.close("mrow");
                self.close("mrow");
            }
            Expr::BigOp { op, index, lower, upper, body } => {
                self.open("mrow");
                self.open("munderover");
                self.leaf("mo", if *op == BigOpKind::Sum { "\u{2211}" } else { "\u{220F}" });
                self.open("mrow");
                self.ident(index)?;
                self.leaf("mo", "=");
                self.expr(lower)?;
                self.close("mrow");
                self.expr(upper)?;
                self.close("munderover");
                self.expr(body)?;
                self.close("mrow");
            }
            Expr::Derivative { order, partial, variable, body } => {
                let marker = |w: &mut Self| {
                    if *partial {
                        w.leaf("mo", "\u{2202}");
                    } else {
                        w.upright_d();
                    }
                };
                let order_mn = (*order > 1).then(|| order.to_string());
                self.open("mrow");
                self.open("mfrac");
                match &order_mn {
                    Some(o) => {
                        self.open("msup");
                        marker(self);
                        self.leaf("mn", o);
                        self.close("msup");
                    }
                    None => marker(self),
                }
                self.open("mrow");
                marker(self);
                match &order_mn {
                    Some(o) => {
                        self.open("msup");
                        self.ident(variable)?;
                        self.leaf("mn", o);
                        self.close("msup");
                    }
                    None => self.ident(variable)?,
                }
                self.close("mrow");
                self.close("mfrac");
                self.expr(body)?;
                self.close("mrow");
            }
            Expr::Group { inner } => self.fenced(inner)?,
        }
        Ok(())
    }
}

fn op_text(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => MINUS,
        BinOp::Mul => DOT,
        BinOp::ImplicitMul => INVISIBLE_TIMES,
        BinOp::Eq => "=",
        BinOp::Lt => "<",
        BinOp::Gt => ">",
        BinOp::Le => "\u{2264}",
        BinOp::Ge => "\u{2265}",
    }
}

fn op_from_text(s: &str) -> Option<BinOp> {
    Some(match s {
        "+" => BinOp::Add,
        MINUS | "-" => BinOp::Sub,
        DOT | "\u{00B7}" | "\u{00D7}" => BinOp::Mul,
        INVISIBLE_TIMES => BinOp::ImplicitMul,
        "=" => BinOp::Eq,
        "<" => BinOp::Lt,
        ">" => BinOp::Gt,
        "\u{2264}" => BinOp::Le,
        "\u{2265}" => BinOp::Ge,
        _ => return None,
    })
}

/// Reads a `<math>` element written in the Word-restricted encoding back into
/// a canonical tree.
pub fn parse_word_mathml(xml: &str) -> Result<Expr, MathmlError> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| MathmlError::Malformed(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "math" {
        return Err(MathmlError::Malformed(format!("expected <math>, found <{}>", root.tag_name().name())));
    }
    read_math(root)
}

/// Reads a `<math>` node found inside a larger document.
pub(crate) fn read_math(node: roxmltree::Node<'_, '_>) -> Result<Expr, MathmlError> {
    let kids = elements(node);
    let e = match kids.as_slice() {
        [only] => read(*only)?,
        _ => read_row(&kids)?,
    };
    Ok(normalize(&e))
}

type Node<'a, 'i> = roxmltree::Node<'a, 'i>;

fn malformed<T>(msg: impl Into<String>) -> Result<T, MathmlError> {
    Err(MathmlError::Malformed(msg.into()))
}

fn elements<'a, 'i>(node: Node<'a, 'i>) -> Vec<Node<'a, 'i>> {
    node.children().filter(|n| n.is_element()).collect()
}

fn name<'a>(node: &Node<'a, '_>) -> &'a str {
    node.tag_name().name()
}

fn text(node: Node<'_, '_>) -> String {
    node.text().unwrap_or("").trim().to_string()
}

fn is_upright_d(node: Node<'_, '_>) -> bool {
    name(&node) == "mi" && text(node) == "d" && node.attribute("mathvariant") == Some("normal")
}

fn is_mo(node: Node<'_, '_>, s: &str) -> bool {
    name(&node) == "mo" && text(node) == s
}

fn read_ident(node: Node<'_, '_>) -> Result<Ident, MathmlError> {
    match read(node)? {
        Expr::Ident(id) => Ok(id),
        other => malformed(format!("expected an identifier, found {other:?}")),
    }
}

fn two<'a, 'i>(node: Node<'a, 'i>) -> Result<(Node<'a, 'i>, Node<'a, 'i>), MathmlError> {
    match elements(node).as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => malformed(format!("<{}> needs exactly two children", name(&node))),
    }
}

fn read(node: Node<'_, '_>) -> Result<Expr, MathmlError> {
    match name(&node) {
        "mn" => Number::new(text(node))
            .map(|value| Expr::Number { value })
            .map_err(|e| MathmlError::Malformed(e.to_string())),
        "mi" => read_mi(node),
        "msub" => {
            let (base, sub) = two(node)?;
            let sub = Box::new(read(sub)?);
            match read(base)? {
                Expr::Ident(Ident { name, subscript: None }) => Ok(Expr::Ident(Ident { name, subscript: Some(sub) })),
                Expr::Greek { letter, subscript: None } => Ok(Expr::Greek { letter, subscript: Some(sub) }),
                other => malformed(format!("unsupported subscript base {other:?}")),
            }
        }
        "msup" => {
            let (base, exp) = two(node)?;
            Ok(Expr::pow(read(base)?, read(exp)?))
        }
        "mfrac" => {
            let (n, d) = two(node)?;
            Ok(Expr::frac(read(n)?, read(d)?))
        }
        "msqrt" => {
            let kids = elements(node);
            let inner = match kids.as_slice() {
                [only] => read(*only)?,
                _ => read_row(&kids)?,
            };
            Ok(Expr::sqrt(inner))
        }
        "mroot" => {
            let (radicand, degree) = two(node)?;
            Ok(Expr::Root { degree: Some(Box::new(read(degree)?)), radicand: Box::new(read(radicand)?) })
        }
        "mfenced" => {
            let kids = elements(node);
            let inner = match kids.as_slice() {
                [only] => read(*only)?,
                _ => read_row(&kids)?,
            };
            Ok(Expr::group(inner))
        }
        "mrow" => read_row(&elements(node)),
        other => malformed(format!("unsupported element <{other}>")),
    }
}

fn read_mi(node: Node<'_, '_>) -> Result<Expr, MathmlError> {
    let t = text(node);
    let mut chars = t.chars();
    match (chars.next(), chars.next()) {
        (Some('\u{221E}'), None) => Ok(Expr::Infinity),
        (Some(c), None) if Greek::from_unicode(c).is_some() => {
            Ok(Expr::greek(Greek::from_unicode(c).expect("checked")))
        }
        _ if !t.is_empty() && t.chars().all(|c| c.is_ascii_alphabetic()) => Ok(Expr::ident(&t)),
        _ => malformed(format!("unsupported identifier `{t}`")),
    }
}

fn read_row(kids: &[Node<'_, '_>]) -> Result<Expr, MathmlError> {
    match kids {
        [] => malformed("empty row"),
        [only] => read(*only),
        [op, operand] if is_mo(*op, MINUS) => Ok(Expr::neg(read(*operand)?)),
        [frac, body] if name(frac) == "mfrac" => read_derivative(*frac, *body),
        [big, body] if name(big) == "munderover" => read_big_op(*big, *body),
        [f, apply, arg] if is_mo(*apply, FUNCTION_APPLICATION) => {
            let fname = text(*f);
            let argument = match name(arg) {
                "mfenced" => {
                    let inner = elements(*arg);
                    match inner.as_slice() {
                        [only] => read(*only)?,
                        many => read_row(many)?,
                    }
                }
                _ => read(*arg)?,
            };
            Ok(Expr::func(FunctionName::named(&fname), argument))
        }
        [op, integrand, differential] if is_integral_op(*op) => read_integral(*op, *integrand, *differential),
        [open, inner, close] if is_mo(*open, "(") && is_mo(*close, ")") => Ok(Expr::group(read(*inner)?)),
        [left, op, right] if name(op) == "mo" => {
            let Some(bin) = op_from_text(&text(*op)) else {
                return malformed(format!("unsupported operator `{}`", text(*op)));
            };
            Ok(Expr::binary(bin, read(*left)?, read(*right)?))
        }
        _ => malformed(format!("unrecognized row of {} elements", kids.len())),
    }
}

fn is_integral_op(node: Node<'_, '_>) -> bool {
    match name(&node) {
        "mo" => text(node) == "\u{222B}",
        "msub" | "msup" | "msubsup" => elements(node).first().is_some_and(|n| is_mo(*n, "\u{222B}")),
        _ => false,
    }
}

fn read_integral(op: Node<'_, '_>, integrand: Node<'_, '_>, differential: Node<'_, '_>) -> Result<Expr, MathmlError> {
    let bounds = elements(op);
    let (lower, upper) = match (name(&op), bounds.as_slice()) {
        ("mo", _) => (None, None),
        ("msub", [_, l]) => (Some(read(*l)?), None),
        ("msup", [_, u]) => (None, Some(read(*u)?)),
        ("msubsup", [_, l, u]) => (Some(read(*l)?), Some(read(*u)?)),
        _ => return malformed("malformed integral bounds"),
    };
    let variable = match elements(differential).as_slice() {
        [d, var] if name(&differential) == "mrow" && is_upright_d(*d) => read_ident(*var)?,
        _ => return malformed("expected a differential"),
    };
    Ok(Expr::integral(lower, upper, read(integrand)?, variable))
}

fn read_big_op(big: Node<'_, '_>, body: Node<'_, '_>) -> Result<Expr, MathmlError> {
    let kids = elements(big);
    let [op, range, upper] = kids.as_slice() else {
        return malformed("<munderover> needs three children");
    };
    let kind = if is_mo(*op, "\u{2211}") {
        BigOpKind::Sum
    } else if is_mo(*op, "\u{220F}") {
        BigOpKind::Product
    } else {
        return malformed("unsupported large operator");
    };
    let range_kids = elements(*range);
    let [index, eq, lower] = range_kids.as_slice() else {
        return malformed("expected `index = lower` under the operator");
    };
    if !is_mo(*eq, "=") {
        return malformed("expected `=` in operator range");
    }
    Ok(Expr::BigOp {
        op: kind,
        index: read_ident(*index)?,
        lower: Box::new(read(*lower)?),
        upper: Box::new(read(*upper)?),
        body: Box::new(read(body)?),
    })
}

/// Returns (partial, order) when `node` is a derivative marker, optionally raised.
fn derivative_marker(node: Node<'_, '_>) -> Option<(bool, u32)> {
    let plain = |n: Node<'_, '_>| {
        if is_upright_d(n) {
            Some(false)
        } else if is_mo(n, "\u{2202}") {
            Some(true)
        } else {
            None
        }
    };
    if let Some(p) = plain(node) {
        return Some((p, 1));
    }
    if name(&node) == "msup" {
        if let [m, o] = elements(node).as_slice() {
            let order = text(*o).parse().ok()?;
            return plain(*m).map(|p| (p, order));
        }
    }
    None
}

fn read_derivative(frac: Node<'_, '_>, body: Node<'_, '_>) -> Result<Expr, MathmlError> {
    let (num, den) = two(frac)?;
    let Some((partial, order)) = derivative_marker(num) else {
        // A fraction followed by something else is never produced as a bare pair.
        return malformed("unrecognized fraction row");
    };
    let den_kids = elements(den);
    let [marker, var] = den_kids.as_slice() else {
        return malformed("expected `d x` in derivative denominator");
    };
    if derivative_marker(*marker) != Some((partial, 1)) {
        return malformed("derivative markers differ");
    }
    let (variable, den_order) = if order > 1 {
        let (v, o) = two(*var)?;
        (read_ident(v)?, text(o).parse::<u32>().map_err(|e| MathmlError::Malformed(e.to_string()))?)
    } else {
        (read_ident(*var)?, 1)
    };
    if den_order != order {
        return malformed("derivative orders differ");
    }
    Ok(Expr::Derivative { order, partial, variable, body: Box::new(read(body)?) })
}
