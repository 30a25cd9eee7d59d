//! Spoken edit commands as AST rewrites.
//!
//! Site order is reading order: operators are counted in-order, fractions
//! and subexpressions pre-order. Subscripts are labels and are never edited.

mod parse;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{normalize, BinOp, Expr, Ident, InvalidExpr};

pub use parse::{parse_command, COMMAND_VERBS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Occurrence {
    /// The target must be unique.
    Only,
    First,
    /// 1-based.
    Nth(u32),
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum EditCommand {
    ChangeOperator { from: BinOp, to: BinOp, occurrence: Occurrence },
    /// Replaces every free occurrence of `target`.
    Substitute { target: Ident, replacement: Expr },
    MoveDenominatorToNumerator { fraction_selector: Occurrence },
    ReplaceSubexpr { target: Expr, replacement: Expr, occurrence: Occurrence },
    /// Applies to the single integral, sum or product in the expression.
    SetBound { which: Bound, value: Expr },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditError {
    #[error("not an edit command")]
    NotACommand,
    #[error("the command's target does not occur in the expression")]
    TargetNotFound,
    #[error("the command's target occurs {matches} times; say which one")]
    AmbiguousTarget { matches: usize },
    #[error("invalid command: {0}")]
    InvalidCommand(String),
    #[error(transparent)]
    Invalid(#[from] InvalidExpr),
}

/// Applies `cmd` to a copy of `expr` and returns the normalized result.
pub fn apply_command(expr: &Expr, cmd: &EditCommand) -> Result<Expr, EditError> {
    let expr = normalize(expr);
    let out = match cmd {
        EditCommand::ChangeOperator { from, to, occurrence } => {
            if from == to {
                return Err(EditError::InvalidCommand("source and replacement operator are the same".into()));
            }
            let sites = count_ops(&expr, *from);
            let pick = select(sites, *occurrence)?;
            let mut counter = 0;
            change_ops(&expr, *from, *to, &pick, &mut counter)
        }
        EditCommand::Substitute { target, replacement } => {
            let target = Expr::Ident(target.clone());
            if count_free(&expr, &target) == 0 {
                return Err(EditError::TargetNotFound);
            }
            substitute(&expr, &target, replacement)
        }
        EditCommand::MoveDenominatorToNumerator { fraction_selector } => {
            let is_fraction = |e: &Expr| matches!(e, Expr::Fraction { .. });
            let pick = select(count_sites(&expr, &is_fraction), *fraction_selector)?;
            let mut counter = 0;
            replace_sites(&expr, &is_fraction, &pick, &mut counter, &|e| match e {
                Expr::Fraction { numerator, denominator } => Expr::implicit(
                    (**numerator).clone(),
                    Expr::pow((**denominator).clone(), Expr::neg(Expr::num(1))),
                ),
                _ => unreachable!("selector matched a fraction"),
            })
        }
        EditCommand::ReplaceSubexpr { target, replacement, occurrence } => {
            let target = normalize(target);
            let matches = |e: &Expr| !matches!(e, Expr::Group { .. }) && normalize(e) == target;
            let pick = select(count_sites(&expr, &matches), *occurrence)?;
            let mut counter = 0;
            replace_sites(&expr, &matches, &pick, &mut counter, &|_| replacement.clone())
        }
        EditCommand::SetBound { which, value } => {
            let is_bounded = |e: &Expr| matches!(e, Expr::Integral { .. } | Expr::BigOp { .. });
            let pick = select(count_sites(&expr, &is_bounded), Occurrence::Only)?;
            let mut counter = 0;
            replace_sites(&expr, &is_bounded, &pick, &mut counter, &|e| set_bound(e, *which, value))
        }
    };
    let out = normalize(&out);
    out.validate()?;
    Ok(out)
}

/// Resolves an occurrence against a site count.
fn select(sites: usize, occurrence: Occurrence) -> Result<Selection, EditError> {
    if sites == 0 {
        return Err(EditError::TargetNotFound);
    }
    match occurrence {
        Occurrence::Only if sites > 1 => Err(EditError::AmbiguousTarget { matches: sites }),
        Occurrence::Only | Occurrence::First => Ok(Selection::One(0)),
        Occurrence::Nth(0) => Err(EditError::InvalidCommand("occurrence index starts at 1".into())),
        Occurrence::Nth(k) if k as usize > sites => Err(EditError::TargetNotFound),
        Occurrence::Nth(k) => Ok(Selection::One(k as usize - 1)),
        Occurrence::All => Ok(Selection::All),
    }
}

enum Selection {
    One(usize),
    All,
}

impl Selection {
    fn contains(&self, i: usize) -> bool {
        match self {
            Selection::One(k) => *k == i,
            Selection::All => true,
        }
    }
}

/// Rebuilds `e` with `f` applied to each child. Subscripts and bound
/// variables are kept as they are.
fn map_children(e: &Expr, f: &mut dyn FnMut(&Expr) -> Expr) -> Expr {
    let mut b = |x: &Expr| Box::new(f(x));
    match e {
        Expr::Number { .. } | Expr::Ident(_) | Expr::Greek { .. } | Expr::Infinity => e.clone(),
        Expr::Binary { op, left, right } => Expr::Binary { op: *op, left: b(left), right: b(right) },
        Expr::Neg { operand } => Expr::Neg { operand: b(operand) },
        Expr::Fraction { numerator, denominator } => {
            Expr::Fraction { numerator: b(numerator), denominator: b(denominator) }
        }
        Expr::Power { base, exponent } => Expr::Power { base: b(base), exponent: b(exponent) },
        Expr::Root { degree, radicand } => {
            Expr::Root { degree: degree.as_deref().map(&mut b), radicand: b(radicand) }
        }
        Expr::Function { name, argument } => Expr::Function { name: name.clone(), argument: b(argument) },
        Expr::Integral { lower, upper, integrand, variable } => Expr::Integral {
            lower: lower.as_deref().map(&mut b),
            upper: upper.as_deref().map(&mut b),
            integrand: b(integrand),
            variable: variable.clone(),
        },
        Expr::BigOp { op, index, lower, upper, body } => Expr::BigOp {
            op: *op,
            index: index.clone(),
            lower: b(lower),
            upper: b(upper),
            body: b(body),
        },
        Expr::Derivative { order, partial, variable, body } => Expr::Derivative {
            order: *order,
            partial: *partial,
            variable: variable.clone(),
            body: b(body),
        },
        Expr::Group { inner } => Expr::Group { inner: b(inner) },
    }
}

/// Children that `map_children` visits, in the same order.
fn editable_children(e: &Expr) -> Vec<&Expr> {
    match e {
        Expr::Ident(_) | Expr::Greek { .. } => vec![],
        Expr::Integral { lower, upper, integrand, .. } => {
            lower.iter().chain(upper.iter()).map(|b| b.as_ref()).chain([integrand.as_ref()]).collect()
        }
        Expr::BigOp { lower, upper, body, .. } => vec![lower, upper, body],
        Expr::Derivative { body, .. } => vec![body],
        _ => e.children(),
    }
}

fn count_ops(e: &Expr, op: BinOp) -> usize {
    let here = matches!(e, Expr::Binary { op: o, .. } if *o == op) as usize;
    here + editable_children(e).into_iter().map(|c| count_ops(c, op)).sum::<usize>()
}

fn change_ops(e: &Expr, from: BinOp, to: BinOp, pick: &Selection, counter: &mut usize) -> Expr {
    match e {
        Expr::Binary { op, left, right } => {
            let left = change_ops(left, from, to, pick, counter);
            let mut op = *op;
            if op == from {
                if pick.contains(*counter) {
                    op = to;
                }
                *counter += 1;
            }
            let right = change_ops(right, from, to, pick, counter);
            Expr::binary(op, left, right)
        }
        _ => map_children(e, &mut |c| change_ops(c, from, to, pick, counter)),
    }
}

/// Non-overlapping pre-order matches.
fn count_sites(e: &Expr, pred: &dyn Fn(&Expr) -> bool) -> usize {
    if pred(e) {
        return 1;
    }
    editable_children(e).into_iter().map(|c| count_sites(c, pred)).sum()
}

fn replace_sites(
    e: &Expr,
    pred: &dyn Fn(&Expr) -> bool,
    pick: &Selection,
    counter: &mut usize,
    make: &dyn Fn(&Expr) -> Expr,
) -> Expr {
    if pred(e) {
        let i = *counter;
        *counter += 1;
        return if pick.contains(i) { make(e) } else { e.clone() };
    }
    map_children(e, &mut |c| replace_sites(c, pred, pick, counter, make))
}

fn binds(e: &Expr, target: &Expr) -> bool {
    let Expr::Ident(t) = target else { return false };
    match e {
        Expr::Integral { variable, .. } | Expr::Derivative { variable, .. } => variable == t,
        Expr::BigOp { index, .. } => index == t,
        _ => false,
    }
}

fn count_free(e: &Expr, target: &Expr) -> usize {
    if e == target {
        return 1;
    }
    let scoped = binds(e, target);
    scoped_children(e, scoped).into_iter().map(|c| count_free(c, target)).sum()
}

/// Editable children, minus the scope of a binder when `scoped`.
fn scoped_children(e: &Expr, scoped: bool) -> Vec<&Expr> {
    if !scoped {
        return editable_children(e);
    }
    match e {
        Expr::Integral { lower, upper, .. } => lower.iter().chain(upper.iter()).map(|b| b.as_ref()).collect(),
        Expr::BigOp { lower, upper, .. } => vec![lower, upper],
        _ => vec![],
    }
}

fn substitute(e: &Expr, target: &Expr, replacement: &Expr) -> Expr {
    if e == target {
        return replacement.clone();
    }
    if binds(e, target) {
        return match e {
            Expr::Integral { lower, upper, integrand, variable } => Expr::Integral {
                lower: lower.as_deref().map(|l| Box::new(substitute(l, target, replacement))),
                upper: upper.as_deref().map(|u| Box::new(substitute(u, target, replacement))),
                integrand: integrand.clone(),
                variable: variable.clone(),
            },
            Expr::BigOp { op, index, lower, upper, body } => Expr::BigOp {
                op: *op,
                index: index.clone(),
                lower: Box::new(substitute(lower, target, replacement)),
                upper: Box::new(substitute(upper, target, replacement)),
                body: body.clone(),
            },
            _ => e.clone(),
        };
    }
    map_children(e, &mut |c| substitute(c, target, replacement))
}

fn set_bound(e: &Expr, which: Bound, value: &Expr) -> Expr {
    let mut out = e.clone();
    match &mut out {
        Expr::Integral { lower, upper, .. } => {
            let slot = if which == Bound::Lower { lower } else { upper };
            *slot = Some(Box::new(value.clone()));
        }
        Expr::BigOp { lower, upper, .. } => {
            let slot = if which == Bound::Lower { lower } else { upper };
            **slot = value.clone();
        }
        _ => unreachable!("selector matched a bounded operator"),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{parse_latex, render_latex, RenderOptions};

    fn run(latex: &str, cmd: EditCommand) -> Result<String, EditError> {
        apply_command(&parse_latex(latex).unwrap(), &cmd).map(|e| render_latex(&e, &RenderOptions::default()))
    }

    fn change(from: BinOp, to: BinOp, occurrence: Occurrence) -> EditCommand {
        EditCommand::ChangeOperator { from, to, occurrence }
    }

    #[test]
    fn change_operator_occurrences() {
        assert_eq!(run("x + 3", change(BinOp::Add, BinOp::Sub, Occurrence::Only)).unwrap(), "x - 3");
        assert_eq!(
            run("x + y + x", change(BinOp::Add, BinOp::Sub, Occurrence::Only)),
            Err(EditError::AmbiguousTarget { matches: 2 })
        );
        assert_eq!(run("x + y + x", change(BinOp::Add, BinOp::Sub, Occurrence::First)).unwrap(), "x - y + x");
        assert_eq!(run("x + y + x", change(BinOp::Add, BinOp::Sub, Occurrence::Nth(2))).unwrap(), "x + y - x");
        assert_eq!(run("x + y + x", change(BinOp::Add, BinOp::Sub, Occurrence::All)).unwrap(), "x - y - x");
        assert_eq!(run("x + y", change(BinOp::Add, BinOp::Sub, Occurrence::Nth(3))), Err(EditError::TargetNotFound));
        assert_eq!(run("x - y", change(BinOp::Add, BinOp::Sub, Occurrence::Only)), Err(EditError::TargetNotFound));
        assert_eq!(run("a + b = c", change(BinOp::Eq, BinOp::Le, Occurrence::Only)).unwrap(), "a + b \\le c");
    }

    #[test]
    fn changed_operator_gets_parentheses() {
        assert_eq!(run("a \\cdot b + c", change(BinOp::Mul, BinOp::Add, Occurrence::Only)).unwrap(), "a + b + c");
        assert_eq!(run("a \\cdot (b + c)", change(BinOp::Add, BinOp::Mul, Occurrence::Only)).unwrap(), "a \\cdot b \\cdot c");
        assert_eq!(run("(a + b) c", change(BinOp::Add, BinOp::Sub, Occurrence::Only)).unwrap(), "(a - b) c");
    }

    #[test]
    fn substitute_respects_binders() {
        let sub = |name: &str, latex: &str| EditCommand::Substitute {
            target: Ident::new(name),
            replacement: parse_latex(latex).unwrap(),
        };
        assert_eq!(run("x + 1", sub("x", "7")).unwrap(), "7 + 1");
        assert_eq!(run("x^2 + x", sub("x", "y + 1")).unwrap(), "(y + 1)^2 + (y + 1)");
        assert_eq!(run("\\int_0^x x \\, dx", sub("x", "2")).unwrap(), "\\int_0^2 x \\, dx");
        assert_eq!(run("\\sum_{i=1}^{n} i", sub("i", "2")), Err(EditError::TargetNotFound));
        assert_eq!(run("\\sum_{i=1}^{n} i", sub("n", "5")).unwrap(), "\\sum_{i=1}^5 i");
        assert_eq!(run("x_1 + x", sub("x", "3")).unwrap(), "x_1 + 3");
        assert_eq!(run("\\frac{1}{x}", sub("x", "0")), Err(EditError::Invalid(InvalidExpr::ZeroDenominator)));
    }

    #[test]
    fn move_denominator() {
        let mv = |o| EditCommand::MoveDenominatorToNumerator { fraction_selector: o };
        assert_eq!(run("\\frac{a}{b}", mv(Occurrence::Only)).unwrap(), "a b^{-1}");
        assert_eq!(run("\\frac{a + 1}{b + c}", mv(Occurrence::Only)).unwrap(), "(a + 1)(b + c)^{-1}");
        assert_eq!(
            run("\\frac{a}{b} + \\frac{c}{d}", mv(Occurrence::Only)),
            Err(EditError::AmbiguousTarget { matches: 2 })
        );
        assert_eq!(run("\\frac{a}{b} + \\frac{c}{d}", mv(Occurrence::Nth(2))).unwrap(), "\\frac{a}{b} + c d^{-1}");
        assert_eq!(run("x", mv(Occurrence::Only)), Err(EditError::TargetNotFound));
    }

    #[test]
    fn replace_and_bounds() {
        let rep = EditCommand::ReplaceSubexpr {
            target: parse_latex("x^2").unwrap(),
            replacement: parse_latex("x^3").unwrap(),
            occurrence: Occurrence::Only,
        };
        assert_eq!(run("x^2 + 1", rep.clone()).unwrap(), "x^3 + 1");
        assert_eq!(run("x^2 + x^2", rep), Err(EditError::AmbiguousTarget { matches: 2 }));
        let upper = EditCommand::SetBound { which: Bound::Upper, value: Expr::num(5) };
        assert_eq!(run("\\int_0^2 x \\, dx", upper.clone()).unwrap(), "\\int_0^5 x \\, dx");
        assert_eq!(run("\\int x \\, dx", upper.clone()).unwrap(), "\\int^5 x \\, dx");
        assert_eq!(run("\\sum_{i=1}^{n} i", upper.clone()).unwrap(), "\\sum_{i=1}^5 i");
        assert_eq!(run("x + 1", upper), Err(EditError::TargetNotFound));
    }

    #[test]
    fn input_is_untouched() {
        let e = parse_latex("x + 3").unwrap();
        let before = e.clone();
        let _ = apply_command(&e, &change(BinOp::Add, BinOp::Sub, Occurrence::Only)).unwrap();
        assert_eq!(e, before);
    }
}
