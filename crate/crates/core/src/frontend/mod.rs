//! Textual DSL (`.cuta`) and JSON interchange (`.cuta.json`) for workflows.

mod json;
mod lexer;
mod parser;
mod printer;

use std::path::Path;

use crate::cuta::CutaWorkflow;
use crate::diagnostic::Diagnostic;

pub use json::{from_json, to_json};
pub use lexer::{lex, Token, TokenKind};
pub use parser::{parse_dsl, MAX_NESTING};
pub use printer::{print_dsl, quote};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    Dsl,
    Json,
}

impl SourceFormat {
    /// `.cuta.json` (or any `.json`) is JSON, everything else DSL.
    pub fn sniff(path: &Path) -> Self {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.ends_with(".json") {
            SourceFormat::Json
        } else {
            SourceFormat::Dsl
        }
    }
}

/// Parses `text` in the given format and validates the result.
pub fn load(
    text: &str,
    file_name: &str,
    format: SourceFormat,
) -> Result<CutaWorkflow, Vec<Diagnostic>> {
    match format {
        SourceFormat::Dsl => parse_dsl(text, file_name),
        SourceFormat::Json => from_json(text),
    }
}
