#![allow(dead_code)]

pub mod corpora;
pub mod eval;
pub mod exprs;
pub mod gcra;
pub mod graphs;
pub mod http;
pub mod latex_check;
pub mod schema;
pub mod workspaces;
