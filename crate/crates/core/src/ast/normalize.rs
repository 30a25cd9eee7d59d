use super::{BinOp, Expr, FunctionName, Ident};

/// Canonical form.
///
/// Explicit groups are dropped and then re-inserted exactly where the
/// precedence rules of the renderer need parentheses, so two trees that
/// render the same are equal after normalization. Chains of `Mul` and of
/// `ImplicitMul` are rebuilt left-nested.
pub fn normalize(expr: &Expr) -> Expr {
    parenthesize(strip(expr))
}

/// Equality of canonical forms.
pub fn structurally_equal(a: &Expr, b: &Expr) -> bool {
    normalize(a) == normalize(b)
}

fn boxed(e: &Expr) -> Box<Expr> {
    Box::new(strip(e))
}

fn strip_ident(id: &Ident) -> Ident {
    Ident { name: id.name.clone(), subscript: id.subscript.as_deref().map(boxed) }
}

/// Removes groups, canonicalizes function names and re-associates products.
fn strip(expr: &Expr) -> Expr {
    match expr {
        Expr::Group { inner } => strip(inner),
        Expr::Number { .. } | Expr::Infinity => expr.clone(),
        Expr::Ident(id) => Expr::Ident(strip_ident(id)),
        Expr::Greek { letter, subscript } => {
            Expr::Greek { letter: *letter, subscript: subscript.as_deref().map(boxed) }
        }
        Expr::Binary { op, .. } if matches!(op, BinOp::Mul | BinOp::ImplicitMul) => {
            let mut operands = Vec::new();
            flatten(*op, expr, &mut operands);
            let mut iter = operands.into_iter();
            let first = iter.next().expect("chain has at least two operands");
            iter.fold(first, |acc, next| Expr::binary(*op, acc, next))
        }
        Expr::Binary { op, left, right } => Expr::Binary { op: *op, left: boxed(left), right: boxed(right) },
        Expr::Neg { operand } => Expr::Neg { operand: boxed(operand) },
        Expr::Fraction { numerator, denominator } => {
            Expr::Fraction { numerator: boxed(numerator), denominator: boxed(denominator) }
        }
        Expr::Power { base, exponent } => Expr::Power { base: boxed(base), exponent: boxed(exponent) },
        Expr::Root { degree, radicand } => {
            Expr::Root { degree: degree.as_deref().map(boxed), radicand: boxed(radicand) }
        }
        Expr::Function { name, argument } => {
            let name = match name {
                FunctionName::User(n) => FunctionName::named(n),
                other => other.clone(),
            };
            Expr::Function { name, argument: boxed(argument) }
        }
        Expr::Integral { lower, upper, integrand, variable } => Expr::Integral {
            lower: lower.as_deref().map(boxed),
            upper: upper.as_deref().map(boxed),
            integrand: boxed(integrand),
            variable: strip_ident(variable),
        },
        Expr::BigOp { op, index, lower, upper, body } => Expr::BigOp {
            op: *op,
            index: strip_ident(index),
            lower: boxed(lower),
            upper: boxed(upper),
            body: boxed(body),
        },
        Expr::Derivative { order, partial, variable, body } => Expr::Derivative {
            order: *order,
            partial: *partial,
            variable: strip_ident(variable),
            body: boxed(body),
        },
    }
}

/// Collects the operands of a same-operator product chain, looking through groups.
fn flatten(op: BinOp, expr: &Expr, out: &mut Vec<Expr>) {
    match expr {
        Expr::Group { inner } => flatten(op, inner, out),
        Expr::Binary { op: o, left, right } if *o == op => {
            flatten(op, left, out);
            flatten(op, right, out);
        }
        other => out.push(strip(other)),
    }
}

fn starts_with_neg(e: &Expr) -> bool {
    match e {
        Expr::Neg { .. } => true,
        Expr::Binary { left, .. } => starts_with_neg(left),
        _ => false,
    }
}

fn is_binary_or_neg(e: &Expr) -> bool {
    matches!(e, Expr::Binary { .. } | Expr::Neg { .. })
}

/// Bases that can carry a superscript without parentheses.
fn is_power_base(e: &Expr) -> bool {
    matches!(
        e,
        Expr::Number { .. }
            | Expr::Ident(_)
            | Expr::Greek { .. }
            | Expr::Infinity
            | Expr::Root { .. }
            | Expr::Function { .. }
            | Expr::Group { .. }
    )
}

fn wrap(e: Expr, needed: bool) -> Box<Expr> {
    Box::new(if needed { Expr::group(e) } else { e })
}

fn paren_ident(id: Ident) -> Ident {
    Ident { name: id.name, subscript: id.subscript.map(|s| Box::new(parenthesize(*s))) }
}

fn inner(e: Box<Expr>) -> Box<Expr> {
    Box::new(parenthesize(*e))
}

/// Inserts groups on a group-free tree.
fn parenthesize(expr: Expr) -> Expr {
    match expr {
        Expr::Number { .. } | Expr::Infinity => expr,
        Expr::Ident(id) => Expr::Ident(paren_ident(id)),
        Expr::Greek { letter, subscript } => Expr::Greek { letter, subscript: subscript.map(inner) },
        Expr::Binary { op, left, right } => {
            let level = op.level();
            let left_needs = matches!(left.as_ref(), Expr::Binary { op: l, .. } if l.level() < level);
            let right_needs = matches!(right.as_ref(), Expr::Binary { op: r, .. } if r.level() <= level)
                || (level >= 2 && starts_with_neg(&right));
            Expr::Binary {
                op,
                left: wrap(parenthesize(*left), left_needs),
                right: wrap(parenthesize(*right), right_needs),
            }
        }
        Expr::Neg { operand } => {
            let needs = is_binary_or_neg(&operand);
            Expr::Neg { operand: wrap(parenthesize(*operand), needs) }
        }
        Expr::Fraction { numerator, denominator } => {
            Expr::Fraction { numerator: inner(numerator), denominator: inner(denominator) }
        }
        Expr::Power { base, exponent } => {
            let needs = !is_power_base(&base);
            Expr::Power { base: wrap(parenthesize(*base), needs), exponent: inner(exponent) }
        }
        Expr::Root { degree, radicand } => Expr::Root { degree: degree.map(inner), radicand: inner(radicand) },
        Expr::Function { name, argument } => Expr::Function { name, argument: inner(argument) },
        Expr::Integral { lower, upper, integrand, variable } => Expr::Integral {
            lower: lower.map(inner),
            upper: upper.map(inner),
            integrand: inner(integrand),
            variable: paren_ident(variable),
        },
        Expr::BigOp { op, index, lower, upper, body } => {
            let needs = is_binary_or_neg(&body);
            Expr::BigOp {
                op,
                index: paren_ident(index),
                lower: inner(lower),
                upper: inner(upper),
                body: wrap(parenthesize(*body), needs),
            }
        }
        Expr::Derivative { order, partial, variable, body } => {
            let needs = is_binary_or_neg(&body);
            Expr::Derivative {
                order,
                partial,
                variable: paren_ident(variable),
                body: wrap(parenthesize(*body), needs),
            }
        }
        Expr::Group { inner: g } => parenthesize(*g),
    }
}
