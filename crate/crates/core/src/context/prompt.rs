use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{ContextError, RankedContext};
use crate::ast::{render_latex, tokenize_latex, LatexTok};
use crate::workspace::Workspace;

pub const SYSTEM_INSTRUCTIONS: &str = "\
You transcribe spoken mathematics into LaTeX. Reply with a single LaTeX \
expression and nothing else. Ignore conversational words that are not part of \
the mathematics. The context lists equations already in the workspace, least \
relevant first; reuse their symbols (including subscripts) when the speaker \
refers to them, and when the speaker asks for a change to an equation, reply \
with the changed equation.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FewShotExample {
    pub utterance: String,
    pub latex: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FewShotSet {
    pub version: String,
    pub examples: Vec<FewShotExample>,
}

impl FewShotSet {
    pub fn builtin() -> &'static FewShotSet {
        static SET: OnceLock<FewShotSet> = OnceLock::new();
        SET.get_or_init(|| {
            serde_json::from_str(include_str!("../../data/few_shot.json")).expect("bundled few-shot set parses")
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system_instructions: String,
    pub few_shot_examples: Vec<FewShotExample>,
    /// One LaTeX line per context equation, most relevant last.
    pub context_block: String,
    pub user_utterance: String,
}

impl PromptBundle {
    /// The structured text sent to remote backends.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("### instructions\n");
        out.push_str(&self.system_instructions);
        out.push_str("\n\n### examples\n");
        for ex in &self.few_shot_examples {
            out.push_str(&format!("input: {}\noutput: {}\n", ex.utterance, ex.latex));
        }
        out.push_str("\n### context\n");
        out.push_str(&self.context_block);
        if !self.context_block.is_empty() {
            out.push('\n');
        }
        out.push_str("\n### utterance\n");
        out.push_str(&self.user_utterance);
        out.push('\n');
        out
    }
}

/// Keeps the `context_cap` most useful items and renders them least useful first.
pub fn assemble_prompt(ranked: &RankedContext, ws: &Workspace, utterance: &str, examples: &FewShotSet) -> PromptBundle {
    let kept = ranked.items.iter().take(ws.preferences.context_cap);
    let lines: Vec<String> = kept
        .filter_map(|item| ws.equation(item.equation.equation).ok())
        .map(|(_, e)| render_latex(&e.expr, &ws.preferences.render))
        .collect();
    let context_block = lines.into_iter().rev().collect::<Vec<_>>().join("\n");
    PromptBundle {
        system_instructions: SYSTEM_INSTRUCTIONS.into(),
        few_shot_examples: examples.examples.clone(),
        context_block,
        user_utterance: utterance.into(),
    }
}

fn delimited() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(concat!(
            r"(?s)```[A-Za-z]*[ \t]*\n(?P<fence>.*?)```",
            r"|\$\$(?P<dd>.+?)\$\$",
            r"|\\\[(?P<br>.+?)\\\]",
            r"|\\\((?P<pa>.+?)\\\)",
            r"|\$(?P<d>[^$]+?)\$",
        ))
        .expect("valid pattern")
    })
}

fn mathrm_block() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\\(?:mathrm|operatorname)\{[A-Za-z]*\}").expect("valid pattern"))
}

fn word() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\\?[A-Za-z]+").expect("valid pattern"))
}

/// Accepts text that tokenizes as the LaTeX subset and carries no prose words.
fn looks_like_math(s: &str) -> bool {
    let Ok(tokens) = tokenize_latex(s) else { return false };
    if tokens.iter().all(|t| t.tok == LatexTok::Space) {
        return false;
    }
    let stripped = mathrm_block().replace_all(s, "");
    let prose = word().find_iter(&stripped).any(|m| !m.as_str().starts_with('\\') && m.as_str().len() >= 3);
    if prose {
        return false;
    }
    let signal = tokens.iter().any(|t| !matches!(t.tok, LatexTok::Letter(_) | LatexTok::Space));
    signal || tokens.len() == 1
}

/// Extracts the LaTeX from a backend reply.
pub fn sanitize_output(raw: &str) -> Result<String, ContextError> {
    for caps in delimited().captures_iter(raw) {
        let body = ["fence", "dd", "br", "pa", "d"].iter().find_map(|g| caps.name(g)).expect("one group matches");
        let body = body.as_str().trim();
        let body = body.strip_prefix('$').and_then(|b| b.strip_suffix('$')).unwrap_or(body).trim();
        if looks_like_math(body) {
            return Ok(body.to_string());
        }
    }
    raw.lines()
        .map(str::trim)
        .filter(|l| !l.starts_with("```") && looks_like_math(l))
        .max_by_key(|l| l.len())
        .map(str::to_string)
        .ok_or(ContextError::NoMathInOutput)
}
