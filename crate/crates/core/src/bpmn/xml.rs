//! BPMN 2.0 interchange XML (semantic model only, no diagram section).

use std::fmt::Write;

use thiserror::Error;

use super::model::{AssocDirection, BpmnDefinitions, FlowNode, NodeKind, SequenceFlow};
use super::wellformed::check_well_formed;
use crate::diagnostic::Diagnostic;

pub const BPMN_NS: &str = "http://www.omg.org/spec/BPMN/20100524/MODEL";
pub const XSI_NS: &str = "http://www.w3.org/2001/XMLSchema-instance";
pub const TARGET_NS: &str = "urn:cuta4bpm";

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("graph is not well-formed ({} diagnostics)", .0.len())]
    IllFormed(Vec<Diagnostic>),
}

/// Sort key ordering `task_2` before `task_10`.
pub fn natural_key(id: &str) -> (&str, u64) {
    match id.rfind('_') {
        Some(i) => match id[i + 1..].parse() {
            Ok(n) => (&id[..i], n),
            Err(_) => (id, 0),
        },
        None => (id, 0),
    }
}

/// Escapes text for use in XML content or double-quoted attributes. Characters
/// XML 1.0 cannot represent are replaced by U+FFFD.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\t' | '\n' | '\r' => out.push(c),
            c if (c as u32) < 0x20 || c == '\u{FFFE}' || c == '\u{FFFF}' => out.push('\u{FFFD}'),
            c => out.push(c),
        }
    }
    out
}

/// Renders `d` as BPMN 2.0 XML.
///
/// Elements are grouped as events, tasks, gateways, flows, data elements,
/// each group in id order, so equal inputs yield byte-identical output.
/// Gateway pairing metadata is not part of the standard and is not written.
pub fn emit_xml(d: &BpmnDefinitions) -> Result<String, EmitError> {
    let diags = check_well_formed(d);
    if !diags.is_empty() {
        return Err(EmitError::IllFormed(diags));
    }
    let p = &d.process;
    let mut x = Xml::default();
    x.raw("<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    x.open(&format!(
        "definitions xmlns=\"{BPMN_NS}\" xmlns:xsi=\"{XSI_NS}\" id=\"definitions_1\" targetNamespace=\"{TARGET_NS}\""
    ));
    x.open("collaboration id=\"collaboration_1\"");
    x.empty(&format!(
        "participant id=\"participant_1\" name=\"{}\" processRef=\"{}\"",
        escape(&d.pool_name),
        escape(&p.id)
    ));
    x.close("collaboration");

    x.open(&format!(
        "process id=\"{}\" name=\"{}\" isExecutable=\"false\"",
        escape(&p.id),
        escape(&p.name)
    ));
    if !d.lanes.is_empty() {
        x.open("laneSet id=\"laneset_1\"");
        for (i, lane) in d.lanes.iter().enumerate() {
            let mut members: Vec<&FlowNode> = p
                .nodes
                .iter()
                .filter(|n| n.lane.as_deref() == Some(lane.name.as_str()))
                .collect();
            members.sort_by(|a, b| natural_key(&a.id).cmp(&natural_key(&b.id)));
            let tag = format!("lane id=\"lane_{}\" name=\"{}\"", i + 1, escape(&lane.name));
            if members.is_empty() {
                x.empty(&tag);
                continue;
            }
            x.open(&tag);
            for m in members {
                x.text_elem("flowNodeRef", &m.id);
            }
            x.close("lane");
        }
        x.close("laneSet");
    }

    let groups: [&[NodeKind]; 4] = [
        &[NodeKind::StartEvent],
        &[NodeKind::EndEvent],
        &[NodeKind::Task],
        &[
            NodeKind::ExclusiveGateway,
            NodeKind::ParallelGateway,
            NodeKind::InclusiveGateway,
        ],
    ];
    for group in groups {
        let mut nodes: Vec<&FlowNode> =
            p.nodes.iter().filter(|n| group.contains(&n.kind)).collect();
        nodes.sort_by(|a, b| natural_key(&a.id).cmp(&natural_key(&b.id)));
        for n in nodes {
            node(&mut x, d, n);
        }
    }

    let mut flows: Vec<&SequenceFlow> = p.flows.iter().collect();
    flows.sort_by(|a, b| natural_key(&a.id).cmp(&natural_key(&b.id)));
    for f in flows {
        let tag = format!(
            "sequenceFlow id=\"{}\" sourceRef=\"{}\" targetRef=\"{}\"",
            escape(&f.id),
            escape(&f.source),
            escape(&f.target)
        );
        match &f.condition {
            None => x.empty(&tag),
            Some(cond) => {
                x.open(&tag);
                x.line(&format!(
                    "<conditionExpression xsi:type=\"tFormalExpression\">{}</conditionExpression>",
                    escape(cond)
                ));
                x.close("sequenceFlow");
            }
        }
    }

    let mut objects: Vec<_> = p.data_objects.iter().collect();
    objects.sort_by(|a, b| natural_key(&a.id).cmp(&natural_key(&b.id)));
    for o in objects {
        x.empty(&format!(
            "dataObject id=\"{}\" name=\"{}\"",
            escape(&o.id),
            escape(&o.name)
        ));
        x.empty(&format!(
            "dataObjectReference id=\"{}\" name=\"{}\" dataObjectRef=\"{}\"",
            escape(&reference_id(&o.id)),
            escape(&o.name),
            escape(&o.id)
        ));
    }
    x.close("process");
    x.close("definitions");
    Ok(x.out)
}

fn reference_id(data_object: &str) -> String {
    format!("{data_object}_ref")
}

fn node(x: &mut Xml, d: &BpmnDefinitions, n: &FlowNode) {
    let p = &d.process;
    let mut tag = format!("{} id=\"{}\"", n.kind.element(), escape(&n.id));
    if !n.label.is_empty() {
        write!(tag, " name=\"{}\"", escape(&n.label)).unwrap();
    }
    let incoming: Vec<&str> = p.incoming(&n.id).map(|f| f.id.as_str()).collect();
    let outgoing: Vec<&str> = p.outgoing(&n.id).map(|f| f.id.as_str()).collect();
    let inputs: Vec<_> = p
        .data_assocs
        .iter()
        .filter(|a| a.task == n.id && a.direction == AssocDirection::Input)
        .collect();
    let outputs: Vec<_> = p
        .data_assocs
        .iter()
        .filter(|a| a.task == n.id && a.direction == AssocDirection::Output)
        .collect();
    x.open(&tag);
    if let Some(doc) = &n.documentation {
        x.text_elem("documentation", doc);
    }
    for f in incoming {
        x.text_elem("incoming", f);
    }
    for f in outgoing {
        x.text_elem("outgoing", f);
    }
    // Input associations need a target inside the activity; BPMN tools use a
    // placeholder property for this.
    let placeholder = format!("{}_input", n.id);
    if !inputs.is_empty() {
        x.empty(&format!(
            "property id=\"{}\" name=\"__targetRef_placeholder\"",
            escape(&placeholder)
        ));
    }
    for a in inputs {
        x.open(&format!("dataInputAssociation id=\"{}\"", escape(&a.id)));
        x.text_elem("sourceRef", &reference_id(&a.data));
        x.text_elem("targetRef", &placeholder);
        x.close("dataInputAssociation");
    }
    for a in outputs {
        x.open(&format!("dataOutputAssociation id=\"{}\"", escape(&a.id)));
        x.text_elem("targetRef", &reference_id(&a.data));
        x.close("dataOutputAssociation");
    }
    x.close(n.kind.element());
}

#[derive(Default)]
struct Xml {
    out: String,
    depth: usize,
}

impl Xml {
    fn line(&mut self, s: &str) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn raw(&mut self, s: &str) {
        self.line(s);
    }

    fn open(&mut self, tag: &str) {
        self.line(&format!("<{tag}>"));
        self.depth += 1;
    }

    fn close(&mut self, name: &str) {
        self.depth -= 1;
        self.line(&format!("</{name}>"));
    }

    fn empty(&mut self, tag: &str) {
        self.line(&format!("<{tag}/>"));
    }

    fn text_elem(&mut self, name: &str, text: &str) {
        self.line(&format!("<{name}>{}</{name}>", escape(text)));
    }
}
