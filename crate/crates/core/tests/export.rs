mod common;

use common::exprs;
use common::latex_check::latex_fragment_problem;
use phoenix_core::ast::{normalize, parse_latex, Expr, RenderOptions};
use phoenix_core::export::{
    export, export_latex, export_order, export_print_html, export_word_mathml, read_word_mathml_table,
    validate_word_mathml, ExportError, ExportFormat, WordRow, LATEX_MEDIA_TYPE, MATHJAX_URL, PRINT_MEDIA_TYPE,
    WORD_MEDIA_TYPE,
};
use phoenix_core::workspace::{load, Point, SubproblemNode, Workspace};
use quick_xml::events::Event;
use quick_xml::Reader;

fn node_of(exprs: Vec<Expr>, annotations: &[Option<&str>]) -> SubproblemNode {
    let mut ws = Workspace::new("export");
    let n = ws.add_node(Point::default(), None).unwrap();
    for (i, e) in exprs.into_iter().enumerate() {
        let id = ws.add_equation(n, e, None).unwrap();
        if let Some(Some(a)) = annotations.get(i) {
            ws.set_annotation(id, Some(a.to_string())).unwrap();
        }
    }
    ws.node(n).unwrap().clone()
}

fn latex_node(latex: &[&str], annotations: &[Option<&str>]) -> SubproblemNode {
    node_of(latex.iter().map(|l| parse_latex(l).unwrap()).collect(), annotations)
}

fn text(b: &[u8]) -> &str {
    std::str::from_utf8(b).unwrap()
}

/// Independent well-formedness check with a second XML parser.
fn well_formed(xml: &str) -> Result<usize, String> {
    let mut r = Reader::from_str(xml);
    r.config_mut().check_end_names = true;
    let mut elements = 0;
    loop {
        match r.read_event() {
            Ok(Event::Eof) => return Ok(elements),
            Ok(Event::Start(_) | Event::Empty(_)) => elements += 1,
            Ok(_) => {}
            Err(e) => return Err(e.to_string()),
        }
    }
}

fn fixture() -> Workspace {
    load(include_bytes!("fixtures/snell.workspace.json")).unwrap()
}

#[test]
fn latex_fragment_shape() {
    let opts = RenderOptions::default();
    let one = export_latex(&latex_node(&["x^2"], &[]), true, &opts).unwrap();
    assert_eq!(one.media_type, LATEX_MEDIA_TYPE);
    assert!(text(&one.payload).contains("x^2"));
    assert_eq!(latex_fragment_problem(text(&one.payload)), None);

    let prompt1 = export_latex(&latex_node(&["\\int_0^{\\infty} x^2 \\, dx"], &[]), true, &opts).unwrap();
    assert!(text(&prompt1.payload).contains("\\int_0^{\\infty} x^2 \\, dx"), "{}", text(&prompt1.payload));

    let ws = fixture();
    let node = &ws.nodes[0];
    let with = text(&export_latex(node, true, &opts).unwrap().payload).to_string();
    assert_eq!(latex_fragment_problem(&with), None, "{with}");
    assert!(with.contains("&& \\text{divide both sides by n\\_2}"), "{with}");
    assert_eq!(with.matches(" \\\\\n").count(), node.equations.len() - 1);
    let without = text(&export_latex(node, false, &opts).unwrap().payload).to_string();
    assert!(!without.contains("\\text"));
}

#[test]
fn latex_oracle_catches_broken_fragments() {
    for bad in [
        "\\begin{align*}\n  \\frac{x}{\n\\end{align*}\n",
        "\\begin{align*}\n  \\mathbb{R}\n\\end{align*}\n",
        "\\begin{align*}\n  x^\n\\end{align*}\n",
        "\\begin{align*}\n  50% \\\\\n  y\n\\end{align*}\n",
        "x^2\n",
    ] {
        assert!(latex_fragment_problem(bad).is_some(), "{bad}");
    }
}

#[test]
fn omicron_is_provided() {
    let b = export_latex(&latex_node(&["\\omicron + 1"], &[]), false, &RenderOptions::default()).unwrap();
    let s = text(&b.payload);
    assert!(s.starts_with("\\providecommand{\\omicron}{o}\n"));
    assert_eq!(latex_fragment_problem(s), None);
}

#[test]
fn annotations_are_escaped_for_latex() {
    let node = latex_node(&["y"], &[Some("50% of {a} & b_1 ~ \\ #")]);
    let s = text(&export_latex(&node, true, &RenderOptions::default()).unwrap().payload).to_string();
    assert_eq!(latex_fragment_problem(&s), None, "{s}");
}

#[test]
fn empty_nodes_are_refused() {
    let node = node_of(vec![], &[]);
    let opts = RenderOptions::default();
    assert_eq!(export_latex(&node, true, &opts), Err(ExportError::EmptyNode));
    assert_eq!(export_word_mathml(&node, true), Err(ExportError::EmptyNode));
    assert_eq!(export_print_html(&node, &opts), Err(ExportError::EmptyNode));
}

#[test]
fn word_table_rows_and_annotations() {
    let node = latex_node(&["x + 1 = 2", "x = 1"], &[None, Some("integrate both sides")]);
    let b = export_word_mathml(&node, true).unwrap();
    assert_eq!(b.media_type, WORD_MEDIA_TYPE);
    let s = text(&b.payload);
    assert!(well_formed(s).is_ok(), "{s}");
    assert_eq!(validate_word_mathml(s), vec![]);
    assert_eq!(s.matches("<table>").count(), 1);
    assert_eq!(s.matches("<tr>").count(), 3);
    assert_eq!(s.matches("<math ").count(), 3);
    assert!(s.contains("<mtext>integrate both sides</mtext>"));
    let rows = read_word_mathml_table(s).unwrap();
    assert_eq!(
        rows,
        vec![
            WordRow::Equation(parse_latex("x + 1 = 2").unwrap()),
            WordRow::Annotation("integrate both sides".into()),
            WordRow::Equation(parse_latex("x = 1").unwrap()),
        ]
    );

    let plain = export_word_mathml(&node, false).unwrap();
    assert_eq!(text(&plain.payload).matches("<tr>").count(), 2);
    assert!(!text(&plain.payload).contains("mtext"));
}

#[test]
fn word_export_is_clean_and_round_trips_for_generated_trees() {
    let mut rng = exprs::rng(2024);
    for _ in 0..2000 {
        let e = exprs::expr(&mut rng, 6);
        let node = node_of(vec![e.clone()], &[]);
        let b = export_word_mathml(&node, false).unwrap();
        let s = text(&b.payload);
        well_formed(s).unwrap_or_else(|err| panic!("{err}\n{s}"));
        assert_eq!(validate_word_mathml(s), vec![], "{s}");
        assert_eq!(read_word_mathml_table(s).unwrap(), vec![WordRow::Equation(normalize(&e))], "{s}");
    }
}

#[test]
fn every_generated_tree_exports_through_all_targets() {
    let mut rng = exprs::rng(77);
    let opts = RenderOptions::default();
    for _ in 0..300 {
        let batch: Vec<Expr> = (0..3).map(|_| exprs::expr(&mut rng, 6)).collect();
        let node = node_of(batch, &[Some("step one"), None, Some("a < b & c")]);
        for format in [ExportFormat::Latex, ExportFormat::WordMathml, ExportFormat::PrintHtml] {
            let first = export(&node, format, true, &opts).unwrap();
            assert_eq!(export(&node, format, true, &opts).unwrap(), first);
        }
        let latex = export_latex(&node, true, &opts).unwrap();
        assert_eq!(latex_fragment_problem(text(&latex.payload)), None, "{}", text(&latex.payload));
    }
}

#[test]
fn parents_come_before_children() {
    let mut ws = Workspace::new("order");
    let n = ws.add_node(Point::default(), None).unwrap();
    let a = ws.add_equation(n, Expr::ident("a"), None).unwrap();
    let b = ws.add_equation(n, Expr::ident("b"), Some(a)).unwrap();
    let c = ws.add_equation(n, Expr::ident("c"), Some(a)).unwrap();
    let d = ws.add_equation(n, Expr::ident("d"), Some(b)).unwrap();
    let mut node = ws.node(n).unwrap().clone();
    // A reversed list must not change the emitted order.
    node.equations.reverse();
    let order: Vec<u64> = export_order(&node).iter().map(|e| e.id).collect();
    assert_eq!(order, [a, c, b, d]);
}

#[test]
fn print_page_structure() {
    let ws = fixture();
    let node = &ws.nodes[0];
    let b = export_print_html(node, &ws.preferences.render).unwrap();
    assert_eq!(b.media_type, PRINT_MEDIA_TYPE);
    let s = text(&b.payload);
    assert!(s.starts_with("<!DOCTYPE html>\n"));
    let xml = s.trim_start_matches("<!DOCTYPE html>\n");
    well_formed(xml).unwrap_or_else(|e| panic!("{e}\n{s}"));
    let doc = roxmltree::Document::parse(xml).unwrap();
    let root = doc.root_element();
    assert_eq!(root.attribute("lang"), Some("en"));
    let title = doc.descendants().find(|n| n.has_tag_name("title")).unwrap();
    assert!(!title.text().unwrap().trim().is_empty());
    let rows: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("tr")).collect();
    assert_eq!(rows.len(), node.equations.len());
    for (row, eq) in rows.iter().zip(export_order(node)) {
        let math = row.descendants().find(|n| n.attribute("class") == Some("math")).unwrap();
        let body = math.text().unwrap();
        let latex = body.strip_prefix("\\[").and_then(|b| b.strip_suffix("\\]")).unwrap();
        assert_eq!(parse_latex(latex).unwrap(), eq.expr);
    }
    let script = doc.descendants().find(|n| n.attribute("id") == Some("MathJax-script")).unwrap();
    assert_eq!(script.attribute("src"), Some(MATHJAX_URL));
    let hook = doc.descendants().filter(|n| n.has_tag_name("script")).find_map(|n| n.text()).unwrap();
    let ready = hook.find("defaultPageReady().then(").unwrap();
    let print = hook.find("window.print()").unwrap();
    let failure = hook.find("function (err)").unwrap();
    assert!(ready < print && print < failure, "print must sit in the success branch");
    assert_eq!(hook.matches("window.print()").count(), 1);
}
