//! Numeric evaluation of arithmetic trees.

use std::collections::HashMap;

use phoenix_core::ast::{BinOp, Expr};

pub fn eval(e: &Expr, env: &HashMap<&str, f64>) -> Option<f64> {
    Some(match e {
        Expr::Number { value } => value.as_str().parse().ok()?,
        Expr::Ident(id) if id.subscript.is_none() => *env.get(id.name.as_str())?,
        Expr::Group { inner } => eval(inner, env)?,
        Expr::Neg { operand } => -eval(operand, env)?,
        Expr::Fraction { numerator, denominator } => eval(numerator, env)? / eval(denominator, env)?,
        Expr::Power { base, exponent } => eval(base, env)?.powf(eval(exponent, env)?),
        Expr::Binary { op, left, right } => {
            let (l, r) = (eval(left, env)?, eval(right, env)?);
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul | BinOp::ImplicitMul => l * r,
                _ => return None,
            }
        }
        _ => return None,
    })
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}
