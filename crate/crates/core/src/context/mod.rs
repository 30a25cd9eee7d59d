//! Context ranking over the equation dependency graph, prompt assembly for
//! transcription backends, and the transcription entry point.

mod backend;
mod prompt;

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{parse_latex, InvalidExpr, LatexSyntaxError};
use crate::edit::{apply_command, parse_command, EditCommand, EditError};
use crate::spoken::{parse_spoken_with, Lexicon, SpokenError, SpokenOptions, SymbolContext, Transcription};
use crate::workspace::{EquationId, NodeId, Workspace};

pub use backend::{BackendError, GrammarBackend, RemoteBackend, RemoteConfig, TranscriptionBackend};
pub use prompt::{assemble_prompt, sanitize_output, FewShotExample, FewShotSet, PromptBundle, SYSTEM_INSTRUCTIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EquationRef {
    pub node: NodeId,
    pub equation: EquationId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    ParentEquation,
    InterNodeLink,
}

/// Directed from the newer equation to the one it depends on. Weight 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: EquationRef,
    pub to: EquationRef,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextGraph {
    pub vertices: Vec<EquationRef>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedItem {
    pub equation: EquationRef,
    pub usefulness: f64,
    pub distance: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedContext {
    pub focus: EquationRef,
    pub items: Vec<RankedItem>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContextError {
    #[error("focus equation {0:?} is not in the workspace")]
    FocusNotFound(EquationRef),
    #[error("decay must lie strictly between 0 and 1, got {0}")]
    InvalidDecay(f64),
    #[error("the backend returned no mathematics")]
    NoMathInOutput,
}

/// One vertex per equation; parent edges within nodes, and a link edge from
/// the first equation of each child node to the last equation of its parent.
pub fn build_graph(ws: &Workspace) -> ContextGraph {
    let mut g = ContextGraph::default();
    for node in &ws.nodes {
        for eq in &node.equations {
            let here = EquationRef { node: node.id, equation: eq.id };
            g.vertices.push(here);
            if let Some(p) = eq.parent_equation_id {
                let to = EquationRef { node: node.id, equation: p };
                g.edges.push(Edge { from: here, to, kind: EdgeKind::ParentEquation });
            }
        }
    }
    for link in &ws.node_links {
        let (Ok(parent), Ok(child)) = (ws.node(link.parent), ws.node(link.child)) else { continue };
        if let (Some(last), Some(first)) = (parent.equations.last(), child.equations.first()) {
            g.edges.push(Edge {
                from: EquationRef { node: child.id, equation: first.id },
                to: EquationRef { node: parent.id, equation: last.id },
                kind: EdgeKind::InterNodeLink,
            });
        }
    }
    g
}

/// Relevance of an equation `distance` hops from the focus.
pub fn usefulness(decay: f64, distance: u32) -> f64 {
    decay.powi(distance as i32)
}

/// Breadth-first distances from `focus` over undirected edges. Items are
/// ordered by usefulness, then newest equation first, then by id.
pub fn rank_context(graph: &ContextGraph, focus: EquationRef, decay: f64) -> Result<RankedContext, ContextError> {
    if !(decay > 0.0 && decay < 1.0) {
        return Err(ContextError::InvalidDecay(decay));
    }
    if !graph.vertices.contains(&focus) {
        return Err(ContextError::FocusNotFound(focus));
    }
    let mut adjacent: HashMap<EquationRef, Vec<EquationRef>> = HashMap::new();
    for e in &graph.edges {
        adjacent.entry(e.from).or_default().push(e.to);
        adjacent.entry(e.to).or_default().push(e.from);
    }
    let mut distance = HashMap::from([(focus, 0u32)]);
    let mut queue = VecDeque::from([focus]);
    while let Some(v) = queue.pop_front() {
        let d = distance[&v];
        for &w in adjacent.get(&v).into_iter().flatten() {
            if !distance.contains_key(&w) {
                distance.insert(w, d + 1);
                queue.push_back(w);
            }
        }
    }
    let mut items: Vec<RankedItem> = graph
        .vertices
        .iter()
        .filter_map(|v| distance.get(v).map(|&d| RankedItem { equation: *v, usefulness: usefulness(decay, d), distance: d }))
        .collect();
    // Equation ids are handed out in creation order, so a larger id is newer.
    items.sort_by(|a, b| {
        b.usefulness
            .total_cmp(&a.usefulness)
            .then(b.equation.equation.cmp(&a.equation.equation))
            .then(a.equation.cmp(&b.equation))
    });
    Ok(RankedContext { focus, items })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum TranscribeOutcome {
    /// A new equation.
    Transcription(Transcription),
    /// The utterance was an edit of the focus equation.
    Edit { command: EditCommand, target: EquationRef, expr: crate::ast::Expr },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TranscribeError {
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Edit(#[from] EditError),
    #[error("edit commands need a focus equation")]
    NoFocus,
    #[error("operations on both sides of an equation need a remote backend")]
    NeedsRemoteBackend,
    #[error(transparent)]
    Spoken(#[from] SpokenError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("backend output is not valid LaTeX: {0}")]
    Latex(#[from] LatexSyntaxError),
    #[error(transparent)]
    Invalid(#[from] InvalidExpr),
}

fn is_both_sides(utterance: &str) -> bool {
    let lower = utterance.to_lowercase();
    lower.contains("both sides") || lower.contains("each side")
}

/// Command first; otherwise rank context around the focus and ask the backend.
pub fn transcribe(
    ws: &Workspace,
    focus: Option<EquationRef>,
    utterance: &str,
    backend: &dyn TranscriptionBackend,
    lexicon: &Lexicon,
    examples: &FewShotSet,
) -> Result<TranscribeOutcome, TranscribeError> {
    if let Some(f) = focus {
        if ws.node(f.node).ok().and_then(|n| n.equation(f.equation)).is_none() {
            return Err(ContextError::FocusNotFound(f).into());
        }
    }
    if backend.supports_commands() {
        match parse_command(utterance, lexicon) {
            Ok(command) => {
                let target = focus.ok_or(TranscribeError::NoFocus)?;
                let (_, entry) = ws.equation(target.equation).map_err(|_| ContextError::FocusNotFound(target))?;
                let expr = apply_command(&entry.expr, &command)?;
                return Ok(TranscribeOutcome::Edit { command, target, expr });
            }
            Err(EditError::NotACommand) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let ranked = match focus {
        Some(f) => Some(rank_context(&build_graph(ws), f, ws.preferences.decay)?),
        None => None,
    };
    if backend.is_grammar() {
        if is_both_sides(utterance) {
            return Err(TranscribeError::NeedsRemoteBackend);
        }
        let symbols = ranked.as_ref().map(|r| {
            SymbolContext::new(r.items.iter().filter_map(|item| {
                ws.equation(item.equation.equation).ok().map(|(_, e)| (&e.expr, item.usefulness))
            }))
        });
        let opts = SpokenOptions { lowercase_default: ws.preferences.render.lowercase_default };
        return Ok(TranscribeOutcome::Transcription(parse_spoken_with(utterance, lexicon, symbols.as_ref(), opts)?));
    }
    let ranked = ranked.unwrap_or(RankedContext {
        focus: EquationRef { node: 0, equation: 0 },
        items: Vec::new(),
    });
    let bundle = assemble_prompt(&ranked, ws, utterance, examples);
    let raw = backend.complete(&bundle)?;
    let latex = sanitize_output(&raw)?;
    let expr = parse_latex(&latex)?;
    expr.validate()?;
    Ok(TranscribeOutcome::Transcription(Transcription {
        expr,
        source_span: (0, utterance.chars().count()),
        residual_text: String::new(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Expr;
    use crate::workspace::Point;

    fn eref(node: u64, equation: u64) -> EquationRef {
        EquationRef { node, equation }
    }

    #[test]
    fn graph_edges() {
        let mut ws = Workspace::new("g");
        assert_eq!(build_graph(&ws), ContextGraph::default());
        let a = ws.add_node(Point::default(), None).unwrap();
        let e1 = ws.add_equation(a, Expr::ident("x"), None).unwrap();
        let e2 = ws.add_equation(a, Expr::ident("y"), None).unwrap();
        let b = ws.add_node(Point::default(), Some(a)).unwrap();
        let e3 = ws.add_equation(b, Expr::ident("z"), None).unwrap();
        let g = build_graph(&ws);
        assert_eq!(g.vertices, vec![eref(a, e1), eref(a, e2), eref(b, e3)]);
        assert_eq!(
            g.edges,
            vec![
                Edge { from: eref(a, e2), to: eref(a, e1), kind: EdgeKind::ParentEquation },
                Edge { from: eref(b, e3), to: eref(a, e2), kind: EdgeKind::InterNodeLink },
            ]
        );
        let r = rank_context(&g, eref(b, e3), 0.5).unwrap();
        let got: Vec<_> = r.items.iter().map(|i| (i.equation.equation, i.usefulness, i.distance)).collect();
        assert_eq!(got, vec![(e3, 1.0, 0), (e2, 0.5, 1), (e1, 0.25, 2)]);
        assert_eq!(rank_context(&g, eref(9, 9), 0.5), Err(ContextError::FocusNotFound(eref(9, 9))));
        assert_eq!(rank_context(&g, eref(b, e3), 1.0), Err(ContextError::InvalidDecay(1.0)));
    }

    #[test]
    fn ties_prefer_newer_equations() {
        let v = [eref(1, 1), eref(1, 2), eref(1, 3)];
        let g = ContextGraph {
            vertices: v.to_vec(),
            edges: vec![
                Edge { from: v[1], to: v[0], kind: EdgeKind::ParentEquation },
                Edge { from: v[2], to: v[0], kind: EdgeKind::ParentEquation },
            ],
        };
        let r = rank_context(&g, v[0], 0.5).unwrap();
        let order: Vec<u64> = r.items.iter().map(|i| i.equation.equation).collect();
        assert_eq!(order, [1, 3, 2]);
    }

    #[test]
    fn unreachable_vertices_are_dropped() {
        let g = ContextGraph { vertices: vec![eref(1, 1), eref(2, 2)], edges: vec![] };
        assert_eq!(rank_context(&g, eref(1, 1), 0.3).unwrap().items.len(), 1);
    }
}
