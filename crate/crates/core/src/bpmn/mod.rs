//! The BPMN subset produced by the flattener, its structural checks and its
//! XML serialization.

mod model;
mod wellformed;
mod xml;

pub use model::{
    AssocDirection, BpmnDefinitions, BpmnProcess, DataAssociation, DataObject, FlowNode, Lane,
    NodeKind, SequenceFlow,
};
pub use wellformed::check_well_formed;
pub use xml::{emit_xml, escape, natural_key, EmitError, BPMN_NS};
