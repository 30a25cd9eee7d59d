//! Node exports: annotated LaTeX, Word-profile MathML tables, print pages.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::mathml::{escape_text, read_math, render_mathml_content, MATHML_NS, WORD_ALLOWED_ATTRIBUTES, WORD_ALLOWED_ELEMENTS};
use crate::ast::{render_latex, Expr, MathmlError, MathmlProfile, RenderOptions};
use crate::workspace::{EquationEntry, SubproblemNode};

pub const LATEX_MEDIA_TYPE: &str = "application/x-latex-fragment";
pub const WORD_MEDIA_TYPE: &str = "text/html; flavor=word-mathml-table";
pub const PRINT_MEDIA_TYPE: &str = "text/html; flavor=print";

/// Pinned MathJax build used by the print page.
pub const MATHJAX_URL: &str = "https://cdn.jsdelivr.net/npm/mathjax@3.2.2/es5/tex-chtml.js";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportBundle {
    pub media_type: String,
    pub payload: Vec<u8>,
    pub human_label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExportError {
    #[error("the node has no equations")]
    EmptyNode,
    #[error(transparent)]
    Mathml(#[from] MathmlError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Latex,
    WordMathml,
    PrintHtml,
}

pub fn export(node: &SubproblemNode, format: ExportFormat, include_annotations: bool, opts: &RenderOptions) -> Result<ExportBundle, ExportError> {
    match format {
        ExportFormat::Latex => export_latex(node, include_annotations, opts),
        ExportFormat::WordMathml => export_word_mathml(node, include_annotations),
        ExportFormat::PrintHtml => export_print_html(node, opts),
    }
}

/// Parents before children; otherwise list order.
pub fn export_order(node: &SubproblemNode) -> Vec<&EquationEntry> {
    let ids: HashSet<u64> = node.equations.iter().map(|e| e.id).collect();
    let mut emitted: HashSet<u64> = HashSet::new();
    let mut out = Vec::with_capacity(node.equations.len());
    while out.len() < node.equations.len() {
        let next = node
            .equations
            .iter()
            .find(|e| {
                !emitted.contains(&e.id)
                    && e.parent_equation_id.is_none_or(|p| !ids.contains(&p) || emitted.contains(&p))
            })
            .or_else(|| node.equations.iter().find(|e| !emitted.contains(&e.id)))
            .expect("an equation remains");
        emitted.insert(next.id);
        out.push(next);
    }
    out
}

fn ordered(node: &SubproblemNode) -> Result<Vec<&EquationEntry>, ExportError> {
    if node.equations.is_empty() {
        return Err(ExportError::EmptyNode);
    }
    Ok(export_order(node))
}

fn annotation(e: &EquationEntry, include: bool) -> Option<&str> {
    e.annotation.as_deref().filter(|a| include && !a.trim().is_empty())
}

/// Escapes text for `\text{...}`.
pub fn escape_latex_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '{' | '}' | '#' | '$' | '%' | '&' | '_' => {
                out.push('\\');
                out.push(c);
            }
            '~' => out.push_str("\\textasciitilde{}"),
            '^' => out.push_str("\\textasciicircum{}"),
            '\n' | '\r' => out.push(' '),
            _ => out.push(c),
        }
    }
    out
}

/// An `align*` block; needs `amsmath`.
pub fn export_latex(node: &SubproblemNode, include_annotations: bool, opts: &RenderOptions) -> Result<ExportBundle, ExportError> {
    let eqs = ordered(node)?;
    let rows: Vec<String> = eqs
        .iter()
        .map(|e| {
            let latex = render_latex(&e.expr, opts);
            match annotation(e, include_annotations) {
                Some(a) => format!("  {latex} && \\text{{{}}}", escape_latex_text(a)),
                None => format!("  {latex}"),
            }
        })
        .collect();
    let mut out = String::new();
    if rows.iter().any(|r| r.contains("\\omicron")) {
        out.push_str("\\providecommand{\\omicron}{o}\n");
    }
    out.push_str("\\begin{align*}\n");
    out.push_str(&rows.join(" \\\\\n"));
    out.push_str("\n\\end{align*}\n");
    Ok(ExportBundle {
        media_type: LATEX_MEDIA_TYPE.into(),
        payload: out.into_bytes(),
        human_label: format!("LaTeX ({} equations)", eqs.len()),
    })
}

fn math_element(content: &str) -> String {
    format!("<math xmlns=\"{MATHML_NS}\" display=\"block\">{content}</math>")
}

/// An HTML clipboard fragment holding a one-column table; annotation rows
/// come before their equation.
pub fn export_word_mathml(node: &SubproblemNode, include_annotations: bool) -> Result<ExportBundle, ExportError> {
    let eqs = ordered(node)?;
    let mut rows = String::new();
    for e in &eqs {
        if let Some(a) = annotation(e, include_annotations) {
            let cell = math_element(&format!("<mtext>{}</mtext>", escape_text(a)));
            rows.push_str(&format!("<tr><td>{cell}</td></tr>\n"));
        }
        let mut content = String::new();
        render_mathml_content(&e.expr, MathmlProfile::WordRestricted, &mut content)?;
        rows.push_str(&format!("<tr><td>{}</td></tr>\n", math_element(&content)));
    }
    let html = format!(
        "<html xmlns:m=\"{MATHML_NS}\">\n<head><meta charset=\"utf-8\" /></head>\n<body>\n<!--StartFragment-->\n<table>\n{rows}</table>\n<!--EndFragment-->\n</body>\n</html>\n"
    );
    Ok(ExportBundle {
        media_type: WORD_MEDIA_TYPE.into(),
        payload: html.into_bytes(),
        human_label: format!("Word table ({} equations)", eqs.len()),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub element: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
    pub message: String,
}

/// Checks every MathML element and attribute against the Word allowlist.
pub fn validate_word_mathml(payload: &str) -> Vec<Violation> {
    let doc = match roxmltree::Document::parse(payload) {
        Ok(d) => d,
        Err(e) => return vec![Violation { element: String::new(), attribute: None, message: format!("not well-formed: {e}") }],
    };
    let mut out = Vec::new();
    for node in doc.descendants().filter(|n| n.is_element()) {
        let in_math = node.tag_name().namespace() == Some(MATHML_NS)
            || node.ancestors().any(|a| a.is_element() && a.tag_name().name() == "math");
        if !in_math && node.tag_name().name() != "math" {
            continue;
        }
        let name = node.tag_name().name();
        if !WORD_ALLOWED_ELEMENTS.contains(&name) {
            out.push(Violation { element: name.into(), attribute: None, message: format!("element <{name}> is outside the Word profile") });
        }
        for attr in node.attributes() {
            if !WORD_ALLOWED_ATTRIBUTES.contains(&attr.name()) {
                out.push(Violation {
                    element: name.into(),
                    attribute: Some(attr.name().into()),
                    message: format!("attribute `{}` is outside the Word profile", attr.name()),
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordRow {
    Annotation(String),
    Equation(Expr),
}

/// Reads a table produced by [`export_word_mathml`] back into rows.
pub fn read_word_mathml_table(payload: &str) -> Result<Vec<WordRow>, MathmlError> {
    let doc = roxmltree::Document::parse(payload).map_err(|e| MathmlError::Malformed(e.to_string()))?;
    let mut rows = Vec::new();
    for math in doc.descendants().filter(|n| n.is_element() && n.tag_name().name() == "math") {
        let kids: Vec<_> = math.children().filter(|n| n.is_element()).collect();
        match kids.as_slice() {
            [only] if only.tag_name().name() == "mtext" => {
                rows.push(WordRow::Annotation(only.text().unwrap_or("").to_string()))
            }
            _ => rows.push(WordRow::Equation(read_math(math)?)),
        }
    }
    Ok(rows)
}

fn escape_html(s: &str) -> String {
    escape_text(s).replace('"', "&quot;")
}

/// A self-contained page that prints itself once MathJax reports a finished render.
pub fn export_print_html(node: &SubproblemNode, opts: &RenderOptions) -> Result<ExportBundle, ExportError> {
    let eqs = ordered(node)?;
    let mut rows = String::new();
    for (i, e) in eqs.iter().enumerate() {
        let latex = escape_html(&render_latex(&e.expr, opts));
        let note = e.annotation.as_deref().map(escape_html).unwrap_or_default();
        rows.push_str(&format!(
            "      <tr><td class=\"step\">{}</td><td class=\"note\">{note}</td><td class=\"math\">\\[{latex}\\]</td></tr>\n",
            i + 1
        ));
    }
    let html = format!(
        r#"<!DOCTYPE html>
<html lang="en">
  <head>
    <meta charset="utf-8" />
    <title>Subproblem {id}</title>
    <style>
      table {{ border-collapse: collapse; width: 100%; }}
      td {{ border-bottom: 1px solid #ccc; padding: 0.4em 0.8em; vertical-align: middle; }}
      td.step {{ width: 2em; color: #666; }}
      td.note {{ width: 30%; font-style: italic; }}
      #status {{ font-family: sans-serif; color: #a00; }}
      @media print {{ #status {{ display: none; }} }}
    </style>
    <script>
      window.MathJax = {{
        startup: {{
          pageReady: function () {{
            return MathJax.startup.defaultPageReady().then(
              function () {{
                document.body.setAttribute("data-rendered", "true");
                window.print();
              }},
              function (err) {{
                document.getElementById("status").textContent = "Rendering failed: " + err;
              }}
            );
          }}
        }}
      }};
    </script>
    <script id="MathJax-script" defer="defer" src="{MATHJAX_URL}"></script>
  </head>
  <body>
    <p id="status"></p>
    <table>
      <tbody>
{rows}      </tbody>
    </table>
  </body>
</html>
"#,
        id = node.id
    );
    Ok(ExportBundle {
        media_type: PRINT_MEDIA_TYPE.into(),
        payload: html.into_bytes(),
        human_label: format!("Printable page ({} equations)", eqs.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_latex;
    use crate::workspace::{Point, Workspace};

    fn node(latex: &[&str]) -> SubproblemNode {
        let mut ws = Workspace::new("t");
        let n = ws.add_node(Point::default(), None).unwrap();
        for l in latex {
            ws.add_equation(n, parse_latex(l).unwrap(), None).unwrap();
        }
        ws.node(n).unwrap().clone()
    }

    #[test]
    fn latex_fragment() {
        let b = export_latex(&node(&["x^2"]), true, &RenderOptions::default()).unwrap();
        assert_eq!(b.media_type, LATEX_MEDIA_TYPE);
        assert_eq!(String::from_utf8(b.payload).unwrap(), "\\begin{align*}\n  x^2\n\\end{align*}\n");
        assert_eq!(export_latex(&node(&[]), true, &RenderOptions::default()), Err(ExportError::EmptyNode));
    }

    #[test]
    fn word_violations() {
        let ok = format!("<math xmlns=\"{MATHML_NS}\"><mi>x</mi></math>");
        assert!(validate_word_mathml(&ok).is_empty());
        let bad = format!("<math xmlns=\"{MATHML_NS}\"><semantics><mi>x</mi></semantics></math>");
        let v = validate_word_mathml(&bad);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].element, "semantics");
        let attr = format!("<math xmlns=\"{MATHML_NS}\"><mi href=\"#\">x</mi></math>");
        assert_eq!(validate_word_mathml(&attr)[0].attribute.as_deref(), Some("href"));
        assert_eq!(validate_word_mathml("<math>").len(), 1);
    }

    #[test]
    fn text_escaping() {
        assert_eq!(escape_latex_text("50% of a_1 & {b}"), "50\\% of a\\_1 \\& \\{b\\}");
    }
}
