//! Size accounting: what a block tree must flatten to, and what a graph
//! actually contains.

use std::fmt;

use crate::bpmn::{BpmnDefinitions, NodeKind};
use crate::cuta::{Block, BlockKind};
use crate::diagnostic::TreePath;

/// Node and flow counts a block contributes to the flattened graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub nodes: usize,
    pub flows: usize,
}

/// Counting laws of the flattening patterns.
pub fn expected_counts(b: &Block) -> Counts {
    let kids: Vec<Counts> = b.children().into_iter().map(expected_counts).collect();
    let n: usize = kids.iter().map(|c| c.nodes).sum();
    let e: usize = kids.iter().map(|c| c.flows).sum();
    let k = kids.len();
    match b.kind() {
        BlockKind::Activity => Counts { nodes: 1, flows: 0 },
        BlockKind::Sequence => Counts {
            nodes: n,
            flows: e + k.saturating_sub(1),
        },
        BlockKind::Case | BlockKind::Parallel | BlockKind::MultipleChoice => Counts {
            nodes: n + 2,
            flows: e + 2 * k,
        },
        BlockKind::Loop => Counts {
            nodes: n + 2,
            flows: e + 3,
        },
    }
}

/// Expected size of the whole process: root plus start and end events and
/// the two flows attaching them.
pub fn expected_totals(root: &Block) -> Counts {
    let c = expected_counts(root);
    Counts {
        nodes: c.nodes + 2,
        flows: c.flows + 2,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCensus {
    pub path: TreePath,
    pub kind: BlockKind,
    pub counts: Counts,
}

/// Preorder per-block breakdown of [`expected_counts`].
pub fn block_census(root: &Block) -> Vec<BlockCensus> {
    let mut out = Vec::new();
    walk(root, TreePath::root(), &mut out);
    out
}

fn walk(b: &Block, path: TreePath, out: &mut Vec<BlockCensus>) {
    out.push(BlockCensus {
        path: path.clone(),
        kind: b.kind(),
        counts: expected_counts(b),
    });
    let child_path = |i: usize| match b.kind() {
        BlockKind::Sequence => path.index(i as u32 + 1),
        BlockKind::Loop => path.kind("loop"),
        other => path.kind(other.as_str()).index(i as u32 + 1),
    };
    for (i, c) in b.children().into_iter().enumerate() {
        walk(c, child_path(i), out);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphCensus {
    pub nodes: usize,
    pub flows: usize,
    pub lanes: usize,
    pub data_objects: usize,
    pub data_associations: usize,
    pub tasks: usize,
    pub exclusive_gateways: usize,
    pub parallel_gateways: usize,
    pub inclusive_gateways: usize,
    pub conditioned_flows: usize,
}

pub fn graph_census(d: &BpmnDefinitions) -> GraphCensus {
    let p = &d.process;
    GraphCensus {
        nodes: p.nodes.len(),
        flows: p.flows.len(),
        lanes: d.lanes.len(),
        data_objects: p.data_objects.len(),
        data_associations: p.data_assocs.len(),
        tasks: p.count(NodeKind::Task),
        exclusive_gateways: p.count(NodeKind::ExclusiveGateway),
        parallel_gateways: p.count(NodeKind::ParallelGateway),
        inclusive_gateways: p.count(NodeKind::InclusiveGateway),
        conditioned_flows: p.flows.iter().filter(|f| f.condition.is_some()).count(),
    }
}

impl fmt::Display for GraphCensus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nodes={}", self.nodes)?;
        writeln!(f, "flows={}", self.flows)?;
        writeln!(f, "lanes={}", self.lanes)?;
        writeln!(f, "data_objects={}", self.data_objects)?;
        writeln!(f, "data_associations={}", self.data_associations)?;
        writeln!(f, "tasks={}", self.tasks)?;
        writeln!(
            f,
            "gateways: exclusive={} parallel={} inclusive={}",
            self.exclusive_gateways, self.parallel_gateways, self.inclusive_gateways
        )?;
        write!(f, "conditioned_flows={}", self.conditioned_flows)
    }
}
