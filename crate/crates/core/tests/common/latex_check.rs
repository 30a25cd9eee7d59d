//! Structural stand-in for a LaTeX compile: no TeX toolchain is available here.

/// Control words defined by the LaTeX kernel or amsmath that may appear in math mode.
const KNOWN: &[&str] = &[
    "frac", "sqrt", "int", "sum", "prod", "partial", "infty", "cdot", "times", "le", "ge", "leq", "geq",
    "sin", "cos", "tan", "log", "ln", "exp", "mathrm", "operatorname", "text", "mathit",
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa", "lambda", "mu",
    "nu", "xi", "pi", "rho", "sigma", "tau", "upsilon", "phi", "chi", "psi", "omega",
    "varepsilon", "vartheta", "varpi", "varrho", "varsigma", "varphi",
    "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma", "Upsilon", "Phi", "Psi", "Omega",
    "textbackslash", "textasciitilde", "textasciicircum", "left", "right",
];

/// Returns the first problem found, or `None` when the fragment would compile
/// inside a document that loads amsmath.
pub fn latex_fragment_problem(src: &str) -> Option<String> {
    let mut defined: Vec<String> = Vec::new();
    let mut body = src;
    while let Some(rest) = body.strip_prefix("\\providecommand{\\") {
        let end = rest.find('}')?;
        defined.push(rest[..end].to_string());
        let line_end = rest.find('\n').unwrap_or(rest.len());
        body = rest[line_end..].trim_start_matches('\n');
    }
    let Some(inner) = body.strip_prefix("\\begin{align*}\n").and_then(|b| b.strip_suffix("\\end{align*}\n")) else {
        return Some("not a single align* environment".into());
    };
    if inner.contains("\n\n") {
        return Some("blank line inside align*".into());
    }
    for (i, row) in inner.split("\\\\\n").enumerate() {
        let row = row.trim_end_matches('\n');
        if row.trim().is_empty() {
            return Some(format!("row {i} is empty"));
        }
        if let Some(p) = row_problem(row, &defined) {
            return Some(format!("row {i}: {p}"));
        }
    }
    None
}

fn row_problem(row: &str, defined: &[String]) -> Option<String> {
    let chars: Vec<char> = row.chars().collect();
    let mut depth = 0i32;
    let mut tabs = 0;
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '\\' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j].is_ascii_alphabetic() {
                    j += 1;
                }
                if j == start {
                    match chars.get(start) {
                        Some(',' | ';' | '!' | ' ' | '{' | '}' | '%' | '&' | '_' | '#' | '$') => i = start + 1,
                        other => return Some(format!("bad control symbol {other:?}")),
                    }
                    continue;
                }
                let name: String = chars[start..j].iter().collect();
                if !KNOWN.contains(&name.as_str()) && !defined.contains(&name) {
                    return Some(format!("undefined control sequence \\{name}"));
                }
                i = j;
                continue;
            }
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth < 0 {
                    return Some("unbalanced }".into());
                }
            }
            '&' => tabs += 1,
            '$' | '%' | '#' => return Some(format!("stray {}", chars[i])),
            '^' | '_' => {
                let next = chars[i + 1..].iter().find(|c| !c.is_whitespace());
                if next.is_none() || matches!(next, Some('^' | '_' | '}')) {
                    return Some("script without argument".into());
                }
            }
            _ => {}
        }
        i += 1;
    }
    if depth != 0 {
        return Some("unbalanced {".into());
    }
    if tabs > 2 {
        return Some(format!("{tabs} alignment tabs"));
    }
    None
}
