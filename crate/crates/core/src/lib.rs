//! Spoken-math transcription engine.
//!
//! Spoken utterances become expression trees ([`ast::Expr`]) that render to
//! LaTeX and MathML, can be edited by voice commands, live in a node graph
//! workspace, and export to LaTeX, Word and print documents.

pub mod ast;
pub mod cli;
pub mod context;
pub mod edit;
pub mod export;
pub mod service;
pub mod spoken;
pub mod workspace;
