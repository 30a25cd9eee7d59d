//! Random valid expression trees covering every variant.

use phoenix_core::ast::{BigOpKind, BinOp, Expr, FunctionName, Greek, Ident, Number};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const OPS: [BinOp; 9] = [
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::ImplicitMul,
    BinOp::Eq,
    BinOp::Lt,
    BinOp::Gt,
    BinOp::Le,
    BinOp::Ge,
];

fn letter(rng: &mut impl Rng) -> char {
    let letters: Vec<char> = ('a'..='z').chain('A'..='Z').collect();
    *letters.choose(rng).unwrap()
}

fn name(rng: &mut impl Rng) -> String {
    let len = if rng.gen_bool(0.85) { 1 } else { rng.gen_range(2..=4) };
    (0..len).map(|_| letter(rng)).collect()
}

pub fn number(rng: &mut impl Rng) -> Number {
    let int = rng.gen_range(0..1000u32).to_string();
    let text = if rng.gen_bool(0.2) { format!("{int}.{}", rng.gen_range(0..100u32)) } else { int };
    Number::new(text).unwrap()
}

fn nonzero_number(rng: &mut impl Rng) -> Number {
    loop {
        let n = number(rng);
        if !n.is_zero() {
            return n;
        }
    }
}

fn subscript(rng: &mut impl Rng, depth: usize) -> Option<Box<Expr>> {
    if depth < 2 {
        return None;
    }
    match rng.gen_range(0..6) {
        0 => Some(Box::new(Expr::Number { value: Number::from_u64(rng.gen_range(0..20)) })),
        1 => Some(Box::new(Expr::ident(&letter(rng).to_string()))),
        _ => None,
    }
}

pub fn ident(rng: &mut impl Rng, depth: usize) -> Ident {
    Ident { name: name(rng), subscript: subscript(rng, depth) }
}

fn plain_ident(rng: &mut impl Rng) -> Ident {
    Ident::new(letter(rng).to_string())
}

pub fn leaf(rng: &mut impl Rng, depth: usize) -> Expr {
    match rng.gen_range(0..10) {
        0..=2 => Expr::Number { value: number(rng) },
        3..=6 => Expr::Ident(ident(rng, depth)),
        7 | 8 => Expr::Greek { letter: *Greek::ALL.choose(rng).unwrap(), subscript: subscript(rng, depth) },
        _ => Expr::Infinity,
    }
}

/// A tree of depth at most `depth` (a leaf has depth 1).
pub fn expr(rng: &mut impl Rng, depth: usize) -> Expr {
    if depth <= 1 || rng.gen_bool(0.25) {
        return leaf(rng, depth);
    }
    let d = depth - 1;
    let sub = |rng: &mut _| Box::new(expr(rng, d));
    match rng.gen_range(0..24) {
        0..=8 => Expr::Binary { op: *OPS.choose(rng).unwrap(), left: sub(rng), right: sub(rng) },
        9 => Expr::Neg { operand: sub(rng) },
        10 | 11 => {
            let denominator = if rng.gen_bool(0.3) {
                Box::new(Expr::Number { value: nonzero_number(rng) })
            } else {
                loop {
                    let e = expr(rng, d);
                    let mut peeled = &e;
                    while let Expr::Group { inner } = peeled {
                        peeled = inner;
                    }
                    if !matches!(peeled, Expr::Number { value } if value.is_zero()) {
                        break Box::new(e);
                    }
                }
            };
            Expr::Fraction { numerator: sub(rng), denominator }
        }
        12 | 13 => Expr::Power { base: sub(rng), exponent: sub(rng) },
        14 => Expr::Root { degree: rng.gen_bool(0.4).then(|| sub(rng)), radicand: sub(rng) },
        15 | 16 => {
            let name = if rng.gen_bool(0.8) {
                FunctionName::BUILTIN.choose(rng).unwrap().clone()
            } else {
                FunctionName::User(["f", "g", "sinh", "arctan"].choose(rng).unwrap().to_string())
            };
            Expr::Function { name, argument: sub(rng) }
        }
        17 | 18 => Expr::Integral {
            lower: rng.gen_bool(0.6).then(|| sub(rng)),
            upper: rng.gen_bool(0.6).then(|| sub(rng)),
            integrand: sub(rng),
            variable: plain_ident(rng),
        },
        19 => Expr::BigOp {
            op: if rng.gen_bool(0.5) { BigOpKind::Sum } else { BigOpKind::Product },
            index: plain_ident(rng),
            lower: sub(rng),
            upper: sub(rng),
            body: sub(rng),
        },
        20 => Expr::Derivative {
            order: rng.gen_range(1..=3),
            partial: rng.gen_bool(0.5),
            variable: ident(rng, d),
            body: sub(rng),
        },
        _ => Expr::Group { inner: sub(rng) },
    }
}

/// Arithmetic-only trees over the variables `x`, `y`, `z`.
pub fn arithmetic(rng: &mut impl Rng, depth: usize) -> Expr {
    if depth <= 1 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.5) {
            Expr::Number { value: Number::from_u64(rng.gen_range(1..10)) }
        } else {
            Expr::ident(["x", "y", "z"].choose(rng).unwrap())
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..8) {
        0 => Expr::add(arithmetic(rng, d), arithmetic(rng, d)),
        1 => Expr::sub(arithmetic(rng, d), arithmetic(rng, d)),
        2 => Expr::mul(arithmetic(rng, d), arithmetic(rng, d)),
        3 => Expr::implicit(arithmetic(rng, d), arithmetic(rng, d)),
        4 => Expr::frac(arithmetic(rng, d), Expr::Number { value: Number::from_u64(rng.gen_range(1..10)) }),
        5 => Expr::neg(arithmetic(rng, d)),
        6 => Expr::pow(arithmetic(rng, d), Expr::Number { value: Number::from_u64(rng.gen_range(0..4)) }),
        _ => Expr::group(arithmetic(rng, d)),
    }
}
