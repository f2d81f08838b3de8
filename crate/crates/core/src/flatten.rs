//! Block → graph flattening.
//!
//! Every block becomes a subgraph with one entry and one exit node. Parents
//! wire their children's subgraphs together with sequence flows, so nesting
//! disappears and the result is a flat process graph:
//!
//! | block        | entry / exit                     | internal flows            |
//! |--------------|----------------------------------|---------------------------|
//! | activity     | the task itself                  | none                      |
//! | sequence     | first child entry / last exit    | `k-1` connectors          |
//! | case         | XOR split / XOR join             | `2k`, split side guarded  |
//! | parallel     | AND split / AND join             | `2k`                      |
//! | multichoice  | OR split / OR join               | `2k`, split side guarded  |
//! | loop (pre)   | G1 / G2, G1 tests the condition  | G1→body, body→G1, G1→G2   |
//! | loop (post)  | G1 / G2, G2 tests the condition  | G1→body, body→G2, G2→G1   |

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bpmn::{
    AssocDirection, BpmnDefinitions, BpmnProcess, DataAssociation, DataObject, FlowNode, Lane,
    NodeKind, SequenceFlow,
};
use crate::cuta::{
    validate_workflow, Block, Case, ConditionPosition, CutaWorkflow, Loop, MultipleChoice,
    Parallel, Sequence, SimpleActivity,
};
use crate::diagnostic::Diagnostic;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("workflow is invalid ({} diagnostics)", .0.len())]
    InvalidWorkflow(Vec<Diagnostic>),
}

/// Handles of a mapped block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgraph {
    pub entry: String,
    pub exit: String,
    /// Condition for the flow the parent will draw out of `exit`. Only a
    /// post-test loop sets this: its exit gateway is a split whose
    /// alternatives are "repeat" and "leave".
    pub exit_condition: Option<String>,
}

/// Text of the synthesized alternative to `condition`.
pub fn negate(condition: &str) -> String {
    format!("not ({condition})")
}

/// Maps a valid workflow onto a BPMN process in a pool named after its
/// company. Equal inputs produce identical graphs, ids included.
pub fn transform_workflow(w: &CutaWorkflow) -> Result<BpmnDefinitions, TransformError> {
    let diags = validate_workflow(w);
    if !diags.is_empty() {
        return Err(TransformError::InvalidWorkflow(diags));
    }
    let mut ctx = TransformContext::new(w);
    let start = ctx.node("start", NodeKind::StartEvent, "");
    let end = ctx.node("end", NodeKind::EndEvent, "");
    let root = map_block(&w.root, &mut ctx);
    ctx.flow(&start, &root.entry, None);
    ctx.exit_flow(&root, &end);
    Ok(ctx.finish(w))
}

/// Per-invocation state: id counters and the lane and data object registries.
pub struct TransformContext {
    process: BpmnProcess,
    counters: BTreeMap<&'static str, u32>,
    lanes: Vec<Lane>,
    data_objects: BTreeMap<String, String>,
}

impl TransformContext {
    pub fn new(workflow: &CutaWorkflow) -> Self {
        TransformContext {
            process: BpmnProcess {
                id: "process_1".into(),
                name: workflow.name.clone(),
                ..Default::default()
            },
            counters: BTreeMap::new(),
            lanes: Vec::new(),
            data_objects: BTreeMap::new(),
        }
    }

    fn next_id(&mut self, prefix: &'static str) -> String {
        let n = self.counters.entry(prefix).or_insert(0);
        *n += 1;
        format!("{prefix}_{n}")
    }

    fn node(&mut self, prefix: &'static str, kind: NodeKind, label: &str) -> String {
        let id = self.next_id(prefix);
        self.process
            .nodes
            .push(FlowNode::new(id.clone(), kind, label));
        id
    }

    fn flow(&mut self, source: &str, target: &str, condition: Option<String>) -> String {
        let id = self.next_id("sf");
        self.process.flows.push(SequenceFlow {
            id: id.clone(),
            source: source.into(),
            target: target.into(),
            condition,
        });
        id
    }

    /// Flow out of a child subgraph, carrying its pending exit condition.
    fn exit_flow(&mut self, from: &Subgraph, target: &str) -> String {
        self.flow(&from.exit, target, from.exit_condition.clone())
    }

    /// Creates a split/join gateway pair of `kind` and records the pairing.
    fn gateway_pair(&mut self, kind: NodeKind) -> (String, String) {
        let prefix = match kind {
            NodeKind::ExclusiveGateway => "gw_x",
            NodeKind::ParallelGateway => "gw_p",
            NodeKind::InclusiveGateway => "gw_i",
            other => unreachable!("{other} is not a gateway"),
        };
        let split = self.node(prefix, kind, "");
        let join = self.node(prefix, kind, "");
        self.process
            .gateway_pairs
            .insert(split.clone(), join.clone());
        (split, join)
    }

    fn lane_for(&mut self, role: &str) {
        if !self.lanes.iter().any(|l| l.name == role) {
            self.lanes.push(Lane { name: role.into() });
        }
    }

    fn data_object(&mut self, document: &str) -> String {
        if let Some(id) = self.data_objects.get(document) {
            return id.clone();
        }
        let id = self.next_id("do");
        self.process.data_objects.push(DataObject {
            id: id.clone(),
            name: document.into(),
        });
        self.data_objects.insert(document.into(), id.clone());
        id
    }

    fn finish(self, w: &CutaWorkflow) -> BpmnDefinitions {
        BpmnDefinitions {
            process: self.process,
            pool_name: w.company.clone(),
            lanes: self.lanes,
        }
    }
}

pub fn map_block(b: &Block, ctx: &mut TransformContext) -> Subgraph {
    match b {
        Block::Activity(a) => map_activity(a, ctx),
        Block::Sequence(s) => map_sequence(s, ctx),
        Block::Case(c) => map_case(c, ctx),
        Block::Parallel(p) => map_parallel(p, ctx),
        Block::MultipleChoice(m) => map_multichoice(m, ctx),
        Block::Loop(l) => map_loop(l, ctx),
    }
}

pub fn map_activity(a: &SimpleActivity, ctx: &mut TransformContext) -> Subgraph {
    let task = ctx.node("task", NodeKind::Task, &a.sentence());
    ctx.lane_for(&a.role);
    let meta: Vec<String> = [("location", &a.location), ("time_limit", &a.time_limit)]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| format!("{k}: {v}")))
        .collect();
    let node = ctx.process.nodes.last_mut().expect("task just created");
    node.lane = Some(a.role.clone());
    if !meta.is_empty() {
        node.documentation = Some(meta.join("; "));
    }
    for (direction, docs) in [
        (AssocDirection::Input, &a.documents_in),
        (AssocDirection::Output, &a.documents_out),
    ] {
        for doc in docs {
            let data = ctx.data_object(doc);
            let id = ctx.next_id("da");
            ctx.process.data_assocs.push(DataAssociation {
                id,
                direction,
                task: task.clone(),
                data,
            });
        }
    }
    Subgraph {
        entry: task.clone(),
        exit: task,
        exit_condition: None,
    }
}

pub fn map_sequence(s: &Sequence, ctx: &mut TransformContext) -> Subgraph {
    let mut elements: Vec<_> = s.elements.iter().collect();
    elements.sort_by_key(|e| e.seq_no);
    let mut children = elements.into_iter().map(|e| &e.block);
    let first = map_block(children.next().expect("sequence is non-empty"), ctx);
    let entry = first.entry.clone();
    let mut last = first;
    for child in children {
        let next = map_block(child, ctx);
        ctx.exit_flow(&last, &next.entry);
        last = next;
    }
    Subgraph {
        entry,
        exit: last.exit,
        exit_condition: last.exit_condition,
    }
}

/// Shared shape of case, parallel and multichoice: split, one guarded flow
/// into each branch, one flow from each branch into the join.
fn map_branches<'b>(
    kind: NodeKind,
    branches: impl IntoIterator<Item = (Option<&'b str>, &'b Block)>,
    ctx: &mut TransformContext,
) -> Subgraph {
    let (split, join) = ctx.gateway_pair(kind);
    for (guard, body) in branches {
        let sub = map_block(body, ctx);
        ctx.flow(&split, &sub.entry, guard.map(str::to_string));
        ctx.exit_flow(&sub, &join);
    }
    Subgraph {
        entry: split,
        exit: join,
        exit_condition: None,
    }
}

pub fn map_case(c: &Case, ctx: &mut TransformContext) -> Subgraph {
    let mut items: Vec<_> = c.items.iter().collect();
    items.sort_by_key(|i| i.number);
    map_branches(
        NodeKind::ExclusiveGateway,
        items
            .into_iter()
            .map(|i| (Some(i.condition.as_str()), &i.body)),
        ctx,
    )
}

pub fn map_parallel(p: &Parallel, ctx: &mut TransformContext) -> Subgraph {
    map_branches(
        NodeKind::ParallelGateway,
        p.branches.iter().map(|b| (None, b)),
        ctx,
    )
}

pub fn map_multichoice(m: &MultipleChoice, ctx: &mut TransformContext) -> Subgraph {
    map_branches(
        NodeKind::InclusiveGateway,
        m.options
            .iter()
            .map(|o| (Some(o.condition.as_str()), &o.body)),
        ctx,
    )
}

pub fn map_loop(l: &Loop, ctx: &mut TransformContext) -> Subgraph {
    let (first, second) = ctx.gateway_pair(NodeKind::ExclusiveGateway);
    let body = map_block(&l.body, ctx);
    match l.position {
        ConditionPosition::Begin => {
            // first gateway merges entry and loopback, then tests
            ctx.flow(&first, &body.entry, Some(l.condition.clone()));
            ctx.exit_flow(&body, &first);
            ctx.flow(&first, &second, Some(negate(&l.condition)));
            Subgraph {
                entry: first,
                exit: second,
                exit_condition: None,
            }
        }
        ConditionPosition::End => {
            ctx.flow(&first, &body.entry, None);
            ctx.exit_flow(&body, &second);
            ctx.flow(&second, &first, Some(l.condition.clone()));
            Subgraph {
                entry: first,
                exit: second,
                exit_condition: Some(negate(&l.condition)),
            }
        }
    }
}
