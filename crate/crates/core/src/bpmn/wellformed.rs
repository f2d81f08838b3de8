use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::model::{BpmnDefinitions, NodeKind};
use crate::diagnostic::{Code, Diagnostic};

/// Structural check of a target graph: every type invariant plus exact
/// start→end path coverage (forward and backward closure).
pub fn check_well_formed(d: &BpmnDefinitions) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let p = &d.process;
    let mut report = |code, msg: String| diags.push(Diagnostic::error(code, msg));

    if d.pool_name.trim().is_empty() {
        report(Code::EmptyPoolName, "pool name must not be empty".into());
    }
    let mut lane_names = BTreeSet::new();
    for lane in &d.lanes {
        if !lane_names.insert(lane.name.as_str()) {
            report(
                Code::DuplicateLane,
                format!("lane '{}' defined twice", lane.name),
            );
        }
    }

    // ids are XML ids, so they are unique across every element kind
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let all_ids = p
        .nodes
        .iter()
        .map(|n| n.id.as_str())
        .chain(p.flows.iter().map(|f| f.id.as_str()))
        .chain(p.data_objects.iter().map(|o| o.id.as_str()))
        .chain(p.data_assocs.iter().map(|a| a.id.as_str()));
    for id in all_ids {
        if id.is_empty() {
            report(Code::EmptyNodeId, "element with empty id".into());
        }
        *seen.entry(id).or_default() += 1;
    }
    for (id, n) in &seen {
        if *n > 1 && !id.is_empty() {
            report(Code::DuplicateNodeId, format!("id '{id}' used {n} times"));
        }
    }

    let starts = p.count(NodeKind::StartEvent);
    if starts != 1 {
        report(
            Code::StartEventCount,
            format!("exactly one start event required, found {starts}"),
        );
    }
    let ends = p.count(NodeKind::EndEvent);
    if ends != 1 {
        report(
            Code::EndEventCount,
            format!("exactly one end event required, found {ends}"),
        );
    }

    for n in &p.nodes {
        match (n.kind, &n.lane) {
            (NodeKind::Task, None) => {
                report(Code::LaneAssignment, format!("task '{}' has no lane", n.id))
            }
            (NodeKind::Task, Some(lane)) if !lane_names.contains(lane.as_str()) => report(
                Code::LaneAssignment,
                format!("task '{}' is in unknown lane '{lane}'", n.id),
            ),
            (kind, Some(_)) if kind != NodeKind::Task => report(
                Code::LaneAssignment,
                format!("{kind} '{}' must not be in a lane", n.id),
            ),
            _ => {}
        }
    }

    let kinds: HashMap<&str, NodeKind> = p.nodes.iter().map(|n| (n.id.as_str(), n.kind)).collect();
    let mut out_degree: HashMap<&str, usize> = HashMap::new();
    let mut in_degree: HashMap<&str, usize> = HashMap::new();
    for f in &p.flows {
        *out_degree.entry(&f.source).or_default() += 1;
        *in_degree.entry(&f.target).or_default() += 1;
    }
    for f in &p.flows {
        for end in [&f.source, &f.target] {
            if !kinds.contains_key(end.as_str()) {
                report(
                    Code::DanglingFlowRef,
                    format!("flow '{}' references missing node '{end}'", f.id),
                );
            }
        }
        if f.source == f.target {
            report(
                Code::SelfLoop,
                format!("flow '{}' is a self-loop on '{}'", f.id, f.source),
            );
        }
        if f.condition.is_some() {
            let split = out_degree.get(f.source.as_str()).copied().unwrap_or(0) >= 2;
            let conditional = kinds
                .get(f.source.as_str())
                .is_some_and(|k| k.is_conditional());
            if !(split && conditional) {
                report(
                    Code::UnexpectedCondition,
                    format!(
                        "flow '{}' carries a condition but its source '{}' is not an exclusive or inclusive split",
                        f.id, f.source
                    ),
                );
            }
        }
    }

    let mut paired: BTreeMap<&str, usize> = BTreeMap::new();
    for (split, join) in &p.gateway_pairs {
        *paired.entry(split).or_default() += 1;
        *paired.entry(join).or_default() += 1;
        match (kinds.get(split.as_str()), kinds.get(join.as_str())) {
            (Some(a), Some(b)) if a.is_gateway() && a == b => {}
            (Some(a), Some(b)) => report(
                Code::GatewayPairing,
                format!(
                    "pair {split}→{join} must join two gateways of one kind, found {a} and {b}"
                ),
            ),
            _ => report(
                Code::GatewayPairing,
                format!("pair {split}→{join} references a missing node"),
            ),
        }
    }
    for (id, n) in &paired {
        if *n > 1 {
            report(
                Code::GatewayPairing,
                format!("gateway '{id}' belongs to {n} pairs"),
            );
        }
    }
    for n in p.nodes_of(NodeKind::InclusiveGateway) {
        let id = n.id.as_str();
        let is_split = out_degree.get(id).copied().unwrap_or(0) >= 2;
        let is_join = in_degree.get(id).copied().unwrap_or(0) >= 2;
        if is_split && !p.gateway_pairs.contains_key(id) {
            report(
                Code::GatewayPairing,
                format!("inclusive split '{id}' has no paired join"),
            );
        }
        if is_join && !p.gateway_pairs.values().any(|j| j == id) {
            report(
                Code::GatewayPairing,
                format!("inclusive join '{id}' has no paired split"),
            );
        }
    }

    let mut object_names = BTreeSet::new();
    for o in &p.data_objects {
        if !object_names.insert(o.name.as_str()) {
            report(
                Code::DuplicateDataObject,
                format!("document '{}' has more than one data object", o.name),
            );
        }
    }
    for a in &p.data_assocs {
        if kinds.get(a.task.as_str()) != Some(&NodeKind::Task) {
            report(
                Code::DataObjectRef,
                format!(
                    "data association '{}' references missing task '{}'",
                    a.id, a.task
                ),
            );
        }
        if !p.data_objects.iter().any(|o| o.id == a.data) {
            report(
                Code::DataObjectRef,
                format!(
                    "data association '{}' references missing data object '{}'",
                    a.id, a.data
                ),
            );
        }
    }

    if starts == 1 && ends == 1 {
        let start = p.nodes_of(NodeKind::StartEvent).next().unwrap().id.as_str();
        let end = p.nodes_of(NodeKind::EndEvent).next().unwrap().id.as_str();
        let forward = closure(
            start,
            p.flows
                .iter()
                .map(|f| (f.source.as_str(), f.target.as_str())),
        );
        let backward = closure(
            end,
            p.flows
                .iter()
                .map(|f| (f.target.as_str(), f.source.as_str())),
        );
        for n in &p.nodes {
            let id = n.id.as_str();
            if !forward.contains(id) || !backward.contains(id) {
                let why = match (forward.contains(id), backward.contains(id)) {
                    (false, false) => "unreachable from start and cannot reach end",
                    (false, true) => "unreachable from start",
                    _ => "cannot reach end",
                };
                report(
                    Code::NodeOffPath,
                    format!("node '{id}' not on start→end path ({why})"),
                );
            }
        }
    }
    diags
}

/// BFS closure of `from` over directed `edges`.
fn closure<'a>(
    from: &'a str,
    edges: impl Iterator<Item = (&'a str, &'a str)>,
) -> BTreeSet<&'a str> {
    let mut adj: HashMap<&str, Vec<&str>> = HashMap::new();
    for (a, b) in edges {
        adj.entry(a).or_default().push(b);
    }
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(n) = queue.pop_front() {
        for &next in adj.get(n).into_iter().flatten() {
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    seen
}
