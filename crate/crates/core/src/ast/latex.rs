use serde::{Deserialize, Serialize};

use super::{normalize, BigOpKind, BinOp, Expr, FunctionName, Ident};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MulStyle {
    #[default]
    Juxtaposition,
    Cdot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderOptions {
    /// Emit `\,` before the differential of an integral.
    pub spacing_before_differential: bool,
    pub implicit_mul_style: MulStyle,
    /// Spoken letters are lowercase unless the speaker says "capital".
    pub lowercase_default: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            spacing_before_differential: true,
            implicit_mul_style: MulStyle::Juxtaposition,
            lowercase_default: true,
        }
    }
}

/// Renders the canonical form of `expr` as LaTeX.
pub fn render_latex(expr: &Expr, opts: &RenderOptions) -> String {
    let mut out = String::new();
    emit(&normalize(expr), opts, &mut out);
    out
}

fn emit(e: &Expr, opts: &RenderOptions, out: &mut String) {
    match e {
        Expr::Number { value } => out.push_str(value.as_str()),
        Expr::Ident(id) => emit_ident(id, opts, out),
        Expr::Greek { letter, subscript } => {
            out.push('\\');
            out.push_str(letter.command());
            if let Some(sub) = subscript {
                out.push('_');
                emit_script(sub, opts, out);
            }
        }
        Expr::Infinity => out.push_str("\\infty"),
        Expr::Binary { op, left, right } => {
            let l = to_string(left, opts);
            let r = to_string(right, opts);
            out.push_str(&l);
            out.push_str(match op {
                BinOp::Add => " + ",
                BinOp::Sub => " - ",
                BinOp::Mul => " \\cdot ",
                BinOp::ImplicitMul => match opts.implicit_mul_style {
                    MulStyle::Cdot => " \\cdot ",
                    MulStyle::Juxtaposition => juxtapose(left, &r),
                },
                BinOp::Eq => " = ",
                BinOp::Lt => " < ",
                BinOp::Gt => " > ",
                BinOp::Le => " \\le ",
                BinOp::Ge => " \\ge ",
            });
            out.push_str(&r);
        }
        Expr::Neg { operand } => {
            out.push('-');
            emit(operand, opts, out);
        }
        Expr::Fraction { numerator, denominator } => {
            out.push_str("\\frac{");
            emit(numerator, opts, out);
            out.push_str("}{");
            emit(denominator, opts, out);
            out.push('}');
        }
        Expr::Power { base, exponent } => {
            emit(base, opts, out);
            out.push('^');
            emit_script(exponent, opts, out);
        }
        Expr::Root { degree, radicand } => {
            out.push_str("\\sqrt");
            if let Some(d) = degree {
                out.push('[');
                emit(d, opts, out);
                out.push(']');
            }
            out.push('{');
            emit(radicand, opts, out);
            out.push('}');
        }
        Expr::Function { name, argument } => {
            match name {
                FunctionName::User(n) => {
                    out.push_str("\\operatorname{");
                    out.push_str(n);
                    out.push('}');
                }
                builtin => {
                    out.push('\\');
                    out.push_str(builtin.as_str());
                }
            }
            out.push('(');
            emit(argument, opts, out);
            out.push(')');
        }
        Expr::Integral { lower, upper, integrand, variable } => {
            out.push_str("\\int");
            if let Some(l) = lower {
                out.push('_');
                emit_script(l, opts, out);
            }
            if let Some(u) = upper {
                out.push('^');
                emit_script(u, opts, out);
            }
            out.push(' ');
            emit(integrand, opts, out);
            out.push_str(if opts.spacing_before_differential { " \\, d" } else { " d" });
            emit_ident(variable, opts, out);
        }
        Expr::BigOp { op, index, lower, upper, body } => {
            out.push_str(match op {
                BigOpKind::Sum => "\\sum_{",
                BigOpKind::Product => "\\prod_{",
            });
            emit_ident(index, opts, out);
            out.push('=');
            emit(lower, opts, out);
            out.push_str("}^");
            emit_script(upper, opts, out);
            out.push(' ');
            emit(body, opts, out);
        }
        Expr::Derivative { order, partial, variable, body } => {
            let (marker, sep) = if *partial { ("\\partial", " ") } else { ("\\mathrm{d}", "") };
            let order_script = (*order > 1).then(|| script_text(&order.to_string()));
            out.push_str("\\frac{");
            out.push_str(marker);
            if let Some(o) = &order_script {
                out.push('^');
                out.push_str(o);
            }
            out.push_str("}{");
            out.push_str(marker);
            out.push_str(sep);
            emit_ident(variable, opts, out);
            if let Some(o) = &order_script {
                out.push('^');
                out.push_str(o);
            }
            out.push_str("} ");
            emit(body, opts, out);
        }
        Expr::Group { inner } => {
            out.push('(');
            emit(inner, opts, out);
            out.push(')');
        }
    }
}

fn to_string(e: &Expr, opts: &RenderOptions) -> String {
    let mut s = String::new();
    emit(e, opts, &mut s);
    s
}

/// Separator for implicit products: "2x", "(a)(b)", otherwise a space.
fn juxtapose(left: &Expr, right: &str) -> &'static str {
    let first = right.chars().next();
    if first == Some('(') {
        return "";
    }
    if matches!(left, Expr::Number { .. }) && first.is_some_and(|c| c.is_ascii_alphabetic()) {
        return "";
    }
    " "
}

fn emit_ident(id: &Ident, opts: &RenderOptions, out: &mut String) {
    if id.name.chars().count() == 1 {
        out.push_str(&id.name);
    } else {
        out.push_str("\\mathrm{");
        out.push_str(&id.name);
        out.push('}');
    }
    if let Some(sub) = &id.subscript {
        out.push('_');
        emit_script(sub, opts, out);
    }
}

fn script_text(s: &str) -> String {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_ascii_alphanumeric() => s.to_string(),
        _ => format!("{{{s}}}"),
    }
}

/// Sub/superscript: single characters bare, everything else braced.
fn emit_script(e: &Expr, opts: &RenderOptions, out: &mut String) {
    out.push_str(&script_text(&to_string(e, opts)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Greek;

    fn x() -> Expr {
        Expr::ident("x")
    }

    fn render(e: &Expr) -> String {
        render_latex(e, &RenderOptions::default())
    }

    #[test]
    fn integral_zero_to_infinity() {
        let e = Expr::integral(Some(Expr::num(0)), Some(Expr::Infinity), Expr::pow(x(), Expr::num(2)), Ident::new("x"));
        assert_eq!(render(&e), "\\int_0^{\\infty} x^2 \\, dx");
    }

    #[test]
    fn integral_with_fraction_bound() {
        let e = Expr::integral(
            Some(Expr::num(0)),
            Some(Expr::frac(Expr::greek(Greek::Pi), Expr::num(2))),
            Expr::func(FunctionName::Cos, x()),
            Ident::new("x"),
        );
        assert_eq!(render(&e), "\\int_0^{\\frac{\\pi}{2}} \\cos(x) \\, dx");
    }

    #[test]
    fn snell_law() {
        let side = |i| {
            Expr::implicit(
                Expr::ident_sub("n", Expr::num(i)),
                Expr::func(FunctionName::Sin, Expr::greek_sub(Greek::Theta, Expr::num(i))),
            )
        };
        assert_eq!(render(&Expr::eq(side(1), side(2))), "n_1 \\sin(\\theta_1) = n_2 \\sin(\\theta_2)");
    }

    #[test]
    fn identity_and_juxtaposition() {
        assert_eq!(render(&x()), "x");
        let lin = |a: u64, b: u64| Expr::add(Expr::implicit(Expr::num(a), x()), Expr::num(b));
        let e = Expr::implicit(lin(2, 1), Expr::add(x(), Expr::num(3)));
        assert_eq!(render(&e), "(2x + 1)(x + 3)");
    }

    #[test]
    fn differential_spacing_is_optional() {
        let e = Expr::integral(None, None, x(), Ident::new("x"));
        let opts = RenderOptions { spacing_before_differential: false, ..Default::default() };
        assert_eq!(render_latex(&e, &opts), "\\int x dx");
    }

    #[test]
    fn cdot_style() {
        let e = Expr::implicit(Expr::num(2), x());
        let opts = RenderOptions { implicit_mul_style: MulStyle::Cdot, ..Default::default() };
        assert_eq!(render_latex(&e, &opts), "2 \\cdot x");
    }

    #[test]
    fn derivative_forms() {
        let d = Expr::Derivative { order: 2, partial: true, variable: Ident::new("t"), body: Box::new(x()) };
        assert_eq!(render(&d), "\\frac{\\partial^2}{\\partial t^2} x");
        let d = Expr::Derivative {
            order: 1,
            partial: false,
            variable: Ident::new("x"),
            body: Box::new(Expr::add(x(), Expr::num(1))),
        };
        assert_eq!(render(&d), "\\frac{\\mathrm{d}}{\\mathrm{d}x} (x + 1)");
    }
}
