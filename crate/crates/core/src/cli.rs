//! The `phoenix` command line: transcription, corpus runs, exports, serving.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::ast::{parse_latex, render_latex, RenderOptions};
use crate::export::{export, ExportFormat};
use crate::service::config::ServiceConfig;
use crate::service::rate::SystemClock;
use crate::service::{run, shutdown_signal, AppState};
use crate::spoken::{parse_spoken, Lexicon};
use crate::workspace;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CORPUS_FAILURES: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "phoenix", version, about = "Spoken mathematics to LaTeX")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the LaTeX for one utterance.
    Transcribe {
        utterance: String,
        /// Extra lexicon file; may be repeated.
        #[arg(long = "lexicon", value_name = "FILE")]
        lexicons: Vec<PathBuf>,
    },
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Write one node of a workspace file as an export bundle.
    Export {
        file: PathBuf,
        #[arg(long)]
        node: u64,
        #[arg(long, value_enum)]
        format: FormatArg,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_annotations: bool,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CorpusCommand {
    /// Transcribe every case and compare with its expected LaTeX.
    Run {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(long = "lexicon", value_name = "FILE")]
        lexicons: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Latex,
    Word,
    Print,
}

impl From<FormatArg> for ExportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Latex => ExportFormat::Latex,
            FormatArg::Word => ExportFormat::WordMathml,
            FormatArg::Print => ExportFormat::PrintHtml,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusCase {
    pub utterance: String,
    pub expected_latex: String,
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub line: usize,
    pub utterance: String,
    pub expected_latex: String,
    pub actual_latex: Option<String>,
    pub error: Option<String>,
    pub pass: bool,
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub corpus: String,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub elapsed_ms: f64,
    pub cases: Vec<CaseResult>,
}

/// Drops whitespace except where it separates a control word from a letter.
pub fn normalize_whitespace(latex: &str) -> String {
    let mut out = String::with_capacity(latex.len());
    let mut pending = false;
    for c in latex.chars() {
        if c.is_whitespace() {
            pending = true;
            continue;
        }
        if pending && c.is_ascii_alphabetic() && ends_with_control_word(&out) {
            out.push(' ');
        }
        pending = false;
        out.push(c);
    }
    out
}

fn ends_with_control_word(s: &str) -> bool {
    let letters = s.bytes().rev().take_while(u8::is_ascii_alphabetic).count();
    letters > 0 && s.as_bytes().get(s.len() - letters - 1) == Some(&b'\\')
}

/// Parses a line-delimited JSON corpus. Blank lines and `#` comments are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<(usize, CorpusCase)>, String> {
    let mut cases = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let case: CorpusCase = serde_json::from_str(t).map_err(|e| format!("line {line_no}: {e}"))?;
        parse_latex(&case.expected_latex).map_err(|e| format!("line {line_no}: expected_latex: {e}"))?;
        cases.push((line_no, case));
    }
    Ok(cases)
}

pub fn run_corpus(name: &str, cases: &[(usize, CorpusCase)], lexicon: &Lexicon) -> CorpusReport {
    let start = Instant::now();
    let opts = RenderOptions::default();
    let results: Vec<CaseResult> = cases
        .iter()
        .map(|(line, c)| {
            let (actual, error) = match parse_spoken(&c.utterance, lexicon, None) {
                Ok(t) => (Some(render_latex(&t.expr, &opts)), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let pass = actual
                .as_deref()
                .is_some_and(|a| normalize_whitespace(a) == normalize_whitespace(&c.expected_latex));
            CaseResult {
                line: *line,
                utterance: c.utterance.clone(),
                expected_latex: c.expected_latex.clone(),
                actual_latex: actual,
                error,
                pass,
                tags: c.tags.clone(),
            }
        })
        .collect();
    let passed = results.iter().filter(|r| r.pass).count();
    CorpusReport {
        corpus: name.to_string(),
        total: results.len(),
        passed,
        failed: results.len() - passed,
        elapsed_ms: start.elapsed().as_secs_f64() * 1000.0,
        cases: results,
    }
}

fn table(report: &CorpusReport) -> String {
    let mut out = String::new();
    for r in &report.cases {
        let status = if r.pass { "PASS" } else { "FAIL" };
        out.push_str(&format!("{status}  line {:<4} {}\n", r.line, r.utterance));
        if !r.pass {
            out.push_str(&format!("      expected: {}\n", r.expected_latex));
            match (&r.actual_latex, &r.error) {
                (Some(a), _) => out.push_str(&format!("      actual:   {a}\n")),
                (None, Some(e)) => out.push_str(&format!("      error:    {e}\n")),
                (None, None) => {}
            }
        }
    }
    out.push_str(&format!("{}/{} passed\n", report.passed, report.total));
    out
}

struct Failure(u8, String);

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

fn lexicon(paths: &[PathBuf]) -> Result<Lexicon, Failure> {
    Lexicon::stem_with_files(paths).map_err(|e| usage(e.to_string()))
}

fn write_stdout(bytes: &[u8]) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| usage(format!("writing stdout: {e}")))
}

fn execute(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Transcribe { utterance, lexicons } => {
            let lex = lexicon(&lexicons)?;
            let t = parse_spoken(&utterance, &lex, None).map_err(|e| usage(e.to_string()))?;
            write_stdout(format!("{}\n", render_latex(&t.expr, &RenderOptions::default())).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Corpus(CorpusCommand::Run { file, json, lexicons }) => {
            let lex = lexicon(&lexicons)?;
            let text = std::fs::read_to_string(&file).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            let cases = parse_corpus(&text).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            let report = run_corpus(&file.display().to_string(), &cases, &lex);
            if json {
                let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
                s.push('\n');
                write_stdout(s.as_bytes())?;
            } else {
                write_stdout(table(&report).as_bytes())?;
            }
            Ok(if report.failed == 0 { EXIT_OK } else { EXIT_CORPUS_FAILURES })
        }
        Command::Export { file, node, format, out, no_annotations } => {
            let bytes = std::fs::read(&file).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            let ws = workspace::load(&bytes).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            let n = ws.node(node).map_err(|e| usage(e.to_string()))?;
            let bundle = export(n, format.into(), !no_annotations, &ws.preferences.render).map_err(|e| usage(e.to_string()))?;
            match out {
                Some(path) => std::fs::write(&path, &bundle.payload).map_err(|e| usage(format!("{}: {e}", path.display())))?,
                None => write_stdout(&bundle.payload)?,
            }
            eprintln!("{} ({})", bundle.human_label, bundle.media_type);
            Ok(EXIT_OK)
        }
        Command::Serve { config } => serve(config.as_deref()),
    }
}

fn serve(config: Option<&Path>) -> Result<u8, Failure> {
    let config = ServiceConfig::load(config, |k| std::env::var(k).ok()).map_err(|e| usage(e.to_string()))?;
    let _ = tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .try_init();
    let runtime = tokio::runtime::Runtime::new().map_err(|e| usage(e.to_string()))?;
    runtime.block_on(async move {
        let state = AppState::new(config, Arc::new(SystemClock)).map_err(|e| usage(e.to_string()))?;
        let listener = tokio::net::TcpListener::bind(&state.config.listen_addr)
            .await
            .map_err(|e| usage(format!("binding {}: {e}", state.config.listen_addr)))?;
        let addr = listener.local_addr().map_err(|e| usage(e.to_string()))?;
        eprintln!("listening on {addr}");
        run(state, listener, shutdown_signal()).await.map_err(|e| usage(e.to_string()))?;
        eprintln!("stopped");
        Ok(EXIT_OK)
    })
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whitespace_normalization() {
        assert_eq!(normalize_whitespace("\\int_0^{\\infty}  x^2 \\, dx"), "\\int_0^{\\infty}x^2\\,dx");
        assert_eq!(normalize_whitespace("\\pi r"), "\\pi r");
        assert_eq!(normalize_whitespace("a +  b"), "a+b");
    }

    #[test]
    fn corpus_lines() {
        let cases = parse_corpus("# c\n\n{\"utterance\":\"x\",\"expected_latex\":\"x\"}\n").unwrap();
        assert_eq!(cases[0].0, 3);
        assert!(parse_corpus("{\"utterance\":\"x\",\"expected_latex\":\"\\\\frac{x}{\"}").unwrap_err().starts_with("line 1"));
    }
}
