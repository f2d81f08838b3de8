//! Compiles block-structured CUTA4BPM process models into BPMN 2.0 process
//! graphs and checks that every generated graph is sound.
//!
//! The pipeline is
//! [`frontend::load`] → [`cuta::validate_workflow`] →
//! [`flatten::transform_workflow`] → [`bpmn::emit_xml`], with
//! [`verify::verify_soundness`] as an independent token-game check on the
//! result. [`pipeline::compile`] runs all of it.

pub mod bpmn;
pub mod cuta;
pub mod diagnostic;
pub mod flatten;
pub mod frontend;
pub mod pipeline;
pub mod stats;
pub mod verify;

pub use bpmn::{check_well_formed, emit_xml, BpmnDefinitions};
pub use cuta::{generate_random_workflow, validate_workflow, Block, CutaWorkflow};
pub use diagnostic::{Code, Diagnostic, Severity, SourceSpan, TreePath};
pub use flatten::transform_workflow;
pub use frontend::{from_json, parse_dsl, print_dsl, to_json};
pub use pipeline::{compile, CompileError, CompileOptions, Compiled};
pub use verify::{
    verify_soundness, verify_with, SoundnessReport, VerifyOptions, ViolationKind, DEFAULT_STATE_CAP,
};
