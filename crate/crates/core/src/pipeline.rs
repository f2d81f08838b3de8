//! validate → transform → emit → verify, as one call.

use thiserror::Error;

use crate::bpmn::{emit_xml, BpmnDefinitions, EmitError};
use crate::cuta::{validate_workflow, CutaWorkflow};
use crate::diagnostic::Diagnostic;
use crate::flatten::{transform_workflow, TransformError};
use crate::verify::{verify_with, SoundnessReport, VerifyError, VerifyOptions};

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("workflow has {} diagnostics", .0.len())]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Emit(#[from] EmitError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub definitions: BpmnDefinitions,
    pub xml: String,
    /// `None` when verification was skipped.
    pub report: Option<SoundnessReport>,
}

#[derive(Debug, Clone, Copy)]
pub struct CompileOptions {
    /// `None` skips verification.
    pub verify: Option<VerifyOptions>,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            verify: Some(VerifyOptions::default()),
        }
    }
}

pub fn compile(w: &CutaWorkflow, opts: CompileOptions) -> Result<Compiled, CompileError> {
    let diags = validate_workflow(w);
    if !diags.is_empty() {
        return Err(CompileError::Invalid(diags));
    }
    let definitions = transform_workflow(w)?;
    let xml = emit_xml(&definitions)?;
    let report = match &opts.verify {
        Some(v) => Some(verify_with(&definitions, v)?),
        None => None,
    };
    Ok(Compiled {
        definitions,
        xml,
        report,
    })
}
