//! Equation AST, canonical form, and the LaTeX / MathML codecs.
//!
//! Every other module speaks in terms of [`Expr`]. Trees are plain values:
//! cloning is cheap enough for the sizes dictated by speech, and no operation
//! here mutates its input.

mod latex;
mod latex_parse;
pub mod mathml;
mod normalize;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use latex::{render_latex, RenderOptions, MulStyle};
pub use latex_parse::{parse_latex, tokenize_latex, LatexSyntaxError, LatexTok, LatexToken};
pub use mathml::{parse_word_mathml, render_mathml, MathmlError, MathmlProfile};
pub use normalize::{normalize, structurally_equal};

/// A decimal literal kept exactly as dictated or typed.
///
/// Grammar: `digit+ ("." digit+)?`. Signs are expressed with [`Expr::Neg`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Number(String);

impl Number {
    pub fn new(text: impl Into<String>) -> Result<Self, InvalidExpr> {
        let text = text.into();
        if is_decimal(&text) {
            Ok(Number(text))
        } else {
            Err(InvalidExpr::Number(text))
        }
    }

    pub fn from_u64(value: u64) -> Self {
        Number(value.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True for any spelling of zero (`0`, `00`, `0.0`).
    pub fn is_zero(&self) -> bool {
        self.0.chars().all(|c| c == '0' || c == '.')
    }
}

fn is_decimal(text: &str) -> bool {
    let mut parts = text.splitn(2, '.');
    let int = parts.next().unwrap_or("");
    let frac = parts.next();
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    digits(int) && frac.is_none_or(digits)
}

impl TryFrom<String> for Number {
    type Error = InvalidExpr;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Number::new(value)
    }
}

impl From<Number> for String {
    fn from(n: Number) -> String {
        n.0
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A Latin-letter variable, optionally subscripted (`x`, `n_1`, `\mathrm{rate}`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ident {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subscript: Option<Box<Expr>>,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Ident { name: name.into(), subscript: None }
    }

    pub fn with_subscript(name: impl Into<String>, subscript: Expr) -> Self {
        Ident { name: name.into(), subscript: Some(Box::new(subscript)) }
    }
}

macro_rules! greek_letters {
    ($($variant:ident => $command:literal, $unicode:literal;)*) => {
        /// The closed Greek alphabet: 24 lowercase names, the uppercase forms
        /// with their own glyph, and the LaTeX variant forms.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum Greek {
            $($variant,)*
        }

        impl Greek {
            pub const ALL: &'static [Greek] = &[$(Greek::$variant,)*];

            /// Command name without the backslash.
            pub fn command(self) -> &'static str {
                match self { $(Greek::$variant => $command,)* }
            }

            pub fn unicode(self) -> char {
                match self { $(Greek::$variant => $unicode,)* }
            }

            pub fn from_command(name: &str) -> Option<Greek> {
                match name { $($command => Some(Greek::$variant),)* _ => None }
            }

            pub fn from_unicode(c: char) -> Option<Greek> {
                match c { $($unicode => Some(Greek::$variant),)* _ => None }
            }
        }
    };
}

greek_letters! {
    Alpha => "alpha", 'α';
    Beta => "beta", 'β';
    Gamma => "gamma", 'γ';
    Delta => "delta", 'δ';
    Epsilon => "epsilon", 'ϵ';
    Zeta => "zeta", 'ζ';
    Eta => "eta", 'η';
    Theta => "theta", 'θ';
    Iota => "iota", 'ι';
    Kappa => "kappa", 'κ';
    Lambda => "lambda", 'λ';
    Mu => "mu", 'μ';
    Nu => "nu", 'ν';
    Xi => "xi", 'ξ';
    Omicron => "omicron", 'ο';
    Pi => "pi", 'π';
    Rho => "rho", 'ρ';
    Sigma => "sigma", 'σ';
    Tau => "tau", 'τ';
    Upsilon => "upsilon", 'υ';
    Phi => "phi", 'ϕ';
    Chi => "chi", 'χ';
    Psi => "psi", 'ψ';
    Omega => "omega", 'ω';
    VarEpsilon => "varepsilon", 'ε';
    VarTheta => "vartheta", 'ϑ';
    VarPi => "varpi", 'ϖ';
    VarRho => "varrho", 'ϱ';
    VarSigma => "varsigma", 'ς';
    VarPhi => "varphi", 'φ';
    UpperGamma => "Gamma", 'Γ';
    UpperDelta => "Delta", 'Δ';
    UpperTheta => "Theta", 'Θ';
    UpperLambda => "Lambda", 'Λ';
    UpperXi => "Xi", 'Ξ';
    UpperPi => "Pi", 'Π';
    UpperSigma => "Sigma", 'Σ';
    UpperUpsilon => "Upsilon", 'Υ';
    UpperPhi => "Phi", 'Φ';
    UpperPsi => "Psi", 'Ψ';
    UpperOmega => "Omega", 'Ω';
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    ImplicitMul,
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
}

impl BinOp {
    /// Binding strength: relations 1, additive 2, multiplicative 3.
    pub fn level(self) -> u8 {
        match self {
            BinOp::Eq | BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge => 1,
            BinOp::Add | BinOp::Sub => 2,
            BinOp::Mul | BinOp::ImplicitMul => 3,
        }
    }

    pub fn is_relation(self) -> bool {
        self.level() == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionName {
    Sin,
    Cos,
    Tan,
    Log,
    Ln,
    Exp,
    User(String),
}

impl FunctionName {
    pub const BUILTIN: [FunctionName; 6] = [
        FunctionName::Sin,
        FunctionName::Cos,
        FunctionName::Tan,
        FunctionName::Log,
        FunctionName::Ln,
        FunctionName::Exp,
    ];

    pub fn builtin(name: &str) -> Option<FunctionName> {
        Some(match name {
            "sin" => FunctionName::Sin,
            "cos" => FunctionName::Cos,
            "tan" => FunctionName::Tan,
            "log" => FunctionName::Log,
            "ln" => FunctionName::Ln,
            "exp" => FunctionName::Exp,
            _ => return None,
        })
    }

    /// Builtin when the name matches one, user-defined otherwise.
    pub fn named(name: &str) -> FunctionName {
        FunctionName::builtin(name).unwrap_or_else(|| FunctionName::User(name.to_string()))
    }

    pub fn as_str(&self) -> &str {
        match self {
            FunctionName::Sin => "sin",
            FunctionName::Cos => "cos",
            FunctionName::Tan => "tan",
            FunctionName::Log => "log",
            FunctionName::Ln => "ln",
            FunctionName::Exp => "exp",
            FunctionName::User(name) => name,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BigOpKind {
    Sum,
    Product,
}

/// The equation tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expr {
    Number { value: Number },
    Ident(Ident),
    Greek {
        letter: Greek,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        subscript: Option<Box<Expr>>,
    },
    Infinity,
    Binary { op: BinOp, left: Box<Expr>, right: Box<Expr> },
    Neg { operand: Box<Expr> },
    Fraction { numerator: Box<Expr>, denominator: Box<Expr> },
    Power { base: Box<Expr>, exponent: Box<Expr> },
    Root {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        degree: Option<Box<Expr>>,
        radicand: Box<Expr>,
    },
    Function { name: FunctionName, argument: Box<Expr> },
    Integral {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower: Option<Box<Expr>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        upper: Option<Box<Expr>>,
        integrand: Box<Expr>,
        variable: Ident,
    },
    BigOp { op: BigOpKind, index: Ident, lower: Box<Expr>, upper: Box<Expr>, body: Box<Expr> },
    Derivative { order: u32, partial: bool, variable: Ident, body: Box<Expr> },
    Group { inner: Box<Expr> },
}

/// Shorthand constructors. They keep test fixtures and rewrite rules readable.
impl Expr {
    pub fn num(value: u64) -> Expr {
        Expr::Number { value: Number::from_u64(value) }
    }

    pub fn decimal(text: &str) -> Result<Expr, InvalidExpr> {
        Ok(Expr::Number { value: Number::new(text)? })
    }

    pub fn ident(name: &str) -> Expr {
        Expr::Ident(Ident::new(name))
    }

    pub fn ident_sub(name: &str, subscript: Expr) -> Expr {
        Expr::Ident(Ident::with_subscript(name, subscript))
    }

    pub fn greek(letter: Greek) -> Expr {
        Expr::Greek { letter, subscript: None }
    }

    pub fn greek_sub(letter: Greek, subscript: Expr) -> Expr {
        Expr::Greek { letter, subscript: Some(Box::new(subscript)) }
    }

    pub fn binary(op: BinOp, left: Expr, right: Expr) -> Expr {
        Expr::Binary { op, left: Box::new(left), right: Box::new(right) }
    }

    pub fn add(left: Expr, right: Expr) -> Expr {
        Expr::binary(BinOp::Add, left, right)
    }

    pub fn sub(left: Expr, right: Expr) -> Expr {
        Expr::binary(BinOp::Sub, left, right)
    }

    pub fn mul(left: Expr, right: Expr) -> Expr {
        Expr::binary(BinOp::Mul, left, right)
    }

    pub fn implicit(left: Expr, right: Expr) -> Expr {
        Expr::binary(BinOp::ImplicitMul, left, right)
    }

    pub fn eq(left: Expr, right: Expr) -> Expr {
        Expr::binary(BinOp::Eq, left, right)
    }

    pub fn neg(operand: Expr) -> Expr {
        Expr::Neg { operand: Box::new(operand) }
    }

    pub fn frac(numerator: Expr, denominator: Expr) -> Expr {
        Expr::Fraction { numerator: Box::new(numerator), denominator: Box::new(denominator) }
    }

    pub fn pow(base: Expr, exponent: Expr) -> Expr {
        Expr::Power { base: Box::new(base), exponent: Box::new(exponent) }
    }

    pub fn sqrt(radicand: Expr) -> Expr {
        Expr::Root { degree: None, radicand: Box::new(radicand) }
    }

    pub fn func(name: FunctionName, argument: Expr) -> Expr {
        Expr::Function { name, argument: Box::new(argument) }
    }

    pub fn integral(lower: Option<Expr>, upper: Option<Expr>, integrand: Expr, variable: Ident) -> Expr {
        Expr::Integral {
            lower: lower.map(Box::new),
            upper: upper.map(Box::new),
            integrand: Box::new(integrand),
            variable,
        }
    }

    pub fn group(inner: Expr) -> Expr {
        Expr::Group { inner: Box::new(inner) }
    }

    /// Immediate children in left-to-right reading order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Number { .. } | Expr::Infinity => vec![],
            Expr::Ident(id) => id.subscript.iter().map(|b| b.as_ref()).collect(),
            Expr::Greek { subscript, .. } => subscript.iter().map(|b| b.as_ref()).collect(),
            Expr::Binary { left, right, .. } => vec![left, right],
            Expr::Neg { operand } => vec![operand],
            Expr::Fraction { numerator, denominator } => vec![numerator, denominator],
            Expr::Power { base, exponent } => vec![base, exponent],
            Expr::Root { degree, radicand } => {
                degree.iter().map(|b| b.as_ref()).chain(std::iter::once(radicand.as_ref())).collect()
            }
            Expr::Function { argument, .. } => vec![argument],
            Expr::Integral { lower, upper, integrand, variable } => lower
                .iter()
                .chain(upper.iter())
                .map(|b| b.as_ref())
                .chain([integrand.as_ref()])
                .chain(variable.subscript.iter().map(|b| b.as_ref()))
                .collect(),
            Expr::BigOp { index, lower, upper, body, .. } => index
                .subscript
                .iter()
                .map(|b| b.as_ref())
                .chain([lower.as_ref(), upper.as_ref(), body.as_ref()])
                .collect(),
            Expr::Derivative { variable, body, .. } => {
                variable.subscript.iter().map(|b| b.as_ref()).chain([body.as_ref()]).collect()
            }
            Expr::Group { inner } => vec![inner],
        }
    }

    /// Number of nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        1 + self.children().into_iter().map(Expr::depth).max().unwrap_or(0)
    }

    /// Pre-order walk.
    pub fn walk<'a>(&'a self, visit: &mut dyn FnMut(&'a Expr)) {
        visit(self);
        for child in self.children() {
            child.walk(visit);
        }
    }

    /// Checks the structural invariants: decimal numbers, well-formed names,
    /// no literal zero denominator, positive derivative order.
    pub fn validate(&self) -> Result<(), InvalidExpr> {
        let mut err = None;
        self.walk(&mut |e| {
            if err.is_some() {
                return;
            }
            err = match e {
                Expr::Number { value } if !is_decimal(value.as_str()) => {
                    Some(InvalidExpr::Number(value.as_str().to_string()))
                }
                Expr::Ident(id) => check_ident(id).err(),
                Expr::Fraction { denominator, .. } => match peel_groups(denominator) {
                    Expr::Number { value } if value.is_zero() => Some(InvalidExpr::ZeroDenominator),
                    _ => None,
                },
                Expr::Function { name: FunctionName::User(name), .. } if !is_name(name) => {
                    Some(InvalidExpr::Name(name.clone()))
                }
                Expr::Integral { variable, .. } => check_ident(variable).err(),
                Expr::BigOp { index, .. } => check_ident(index).err(),
                Expr::Derivative { order, variable, .. } => {
                    if *order == 0 {
                        Some(InvalidExpr::DerivativeOrder)
                    } else {
                        check_ident(variable).err()
                    }
                }
                _ => None,
            };
        });
        err.map_or(Ok(()), Err)
    }
}

fn peel_groups(mut e: &Expr) -> &Expr {
    while let Expr::Group { inner } = e {
        e = inner;
    }
    e
}

fn is_name(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_alphabetic())
}

fn check_ident(id: &Ident) -> Result<(), InvalidExpr> {
    if is_name(&id.name) {
        Ok(())
    } else {
        Err(InvalidExpr::Name(id.name.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvalidExpr {
    #[error("`{0}` is not a decimal literal")]
    Number(String),
    #[error("`{0}` is not a valid identifier or function name")]
    Name(String),
    #[error("fraction has a literal zero denominator")]
    ZeroDenominator,
    #[error("derivative order must be at least 1")]
    DerivativeOrder,
}
