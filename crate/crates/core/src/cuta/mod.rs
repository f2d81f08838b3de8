//! The block-structured source metamodel: activities and the five control
//! flow blocks, plus the role and document registries they reference.

mod generate;
mod model;
mod validate;

pub use generate::{generate_random_workflow, GenError, MAX_ACTIVITIES};
pub use model::{
    Block, BlockKind, Case, CaseItem, ChoiceOption, ConditionPosition, CutaWorkflow, Document,
    Loop, MultipleChoice, OrganizationalUnit, Parallel, Role, Sequence, SequenceElement,
    SimpleActivity,
};
pub use validate::validate_workflow;
