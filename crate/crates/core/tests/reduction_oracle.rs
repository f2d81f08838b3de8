//! The reduced exploration must reach the same verdict as plain interleaving
//! on every graph, sound or not.

use cuta_bpmn::bpmn::{BpmnProcess, FlowNode, Lane, NodeKind, SequenceFlow};
use cuta_bpmn::verify::Witness;
use cuta_bpmn::{
    generate_random_workflow, transform_workflow, verify_with, BpmnDefinitions, SoundnessReport,
    VerifyOptions, ViolationKind,
};
use proptest::prelude::*;

const CAP: usize = 20_000;

/// Everything a verdict consists of except the witness markings, which
/// depend on visiting order.
fn verdict(r: &SoundnessReport) -> (bool, Vec<ViolationKind>, Vec<String>) {
    let mut kinds: Vec<ViolationKind> = r.violations.iter().map(|v| v.kind).collect();
    kinds.dedup();
    let dead = r
        .violations
        .iter()
        .filter_map(|v| match &v.witness {
            Witness::Node(n) => Some(n.clone()),
            _ => None,
        })
        .collect();
    (r.sound, kinds, dead)
}

/// `None` when the unreduced search does not fit in `CAP`.
fn compare(d: &BpmnDefinitions) -> Option<(SoundnessReport, SoundnessReport)> {
    let full = verify_with(
        d,
        &VerifyOptions {
            state_cap: CAP,
            reduce: false,
        },
    )
    .unwrap();
    if full.has(ViolationKind::StateExplosion) {
        return None;
    }
    let reduced = verify_with(
        d,
        &VerifyOptions {
            state_cap: CAP,
            reduce: true,
        },
    )
    .unwrap();
    assert_eq!(
        verdict(&full),
        verdict(&reduced),
        "full:\n{full}reduced:\n{reduced}"
    );
    assert!(reduced.states_explored <= full.states_explored);
    Some((full, reduced))
}

/// Random graph over tasks and exclusive/parallel gateways. Each inner node
/// gets an edge from an earlier node and one to a later node, so every node
/// lies on a start→end path; extra edges may point anywhere, closing cycles.
fn arbitrary_graph(
    kinds: &[u8],
    extra: &[(usize, usize)],
    picks: &[(usize, usize)],
) -> BpmnDefinitions {
    let n = kinds.len();
    let mut nodes = vec![FlowNode::new("start_1", NodeKind::StartEvent, "")];
    for (i, k) in kinds.iter().enumerate() {
        let id = format!("n{i}");
        nodes.push(match k % 3 {
            0 => FlowNode::new(id.clone(), NodeKind::Task, id).in_lane("R"),
            1 => FlowNode::new(id, NodeKind::ExclusiveGateway, ""),
            _ => FlowNode::new(id, NodeKind::ParallelGateway, ""),
        });
    }
    nodes.push(FlowNode::new("end_1", NodeKind::EndEvent, ""));
    // node positions: 0 = start, 1..=n inner, n+1 = end
    let mut edges = std::collections::BTreeSet::new();
    for i in 1..=n {
        let (a, b) = picks[i - 1];
        edges.insert((a % i, i));
        edges.insert((i, i + 1 + b % (n + 1 - i)));
    }
    for &(a, b) in extra {
        let (a, b) = (a % (n + 1), 1 + b % (n + 1));
        if a != b {
            edges.insert((a, b));
        }
    }
    let flows = edges
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            SequenceFlow::new(
                format!("sf_{}", i + 1),
                nodes[a].id.clone(),
                nodes[b].id.clone(),
            )
        })
        .collect();
    BpmnDefinitions {
        process: BpmnProcess {
            id: "process_1".into(),
            name: "random".into(),
            nodes,
            flows,
            ..Default::default()
        },
        pool_name: "ACME".into(),
        lanes: vec![Lane { name: "R".into() }],
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 400, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn arbitrary_graphs_agree(
        kinds in prop::collection::vec(any::<u8>(), 1..9),
        picks in prop::collection::vec((any::<usize>(), any::<usize>()), 9),
        extra in prop::collection::vec((any::<usize>(), any::<usize>()), 0..5),
    ) {
        let d = arbitrary_graph(&kinds, &extra, &picks);
        compare(&d);
    }
}

/// Flips exclusive and parallel gateways of flattened workflows; inclusive
/// pairs and loops stay in place, so most mutants are unsound in some way.
#[test]
fn mutated_flattener_graphs_agree() {
    let mut unsound = 0;
    let mut compared = 0;
    for seed in 1..=150u64 {
        let w = generate_random_workflow(seed, 3, 3).unwrap();
        let base = transform_workflow(&w).unwrap();
        if let Some((full, _)) = compare(&base) {
            assert!(full.sound);
        }
        let gateways: Vec<usize> = base
            .process
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| {
                matches!(
                    n.kind,
                    NodeKind::ExclusiveGateway | NodeKind::ParallelGateway
                )
            })
            .map(|(i, _)| i)
            .collect();
        for (m, &g) in gateways.iter().enumerate().take(4) {
            let mut d = base.clone();
            let flipped = match d.process.nodes[g].kind {
                NodeKind::ExclusiveGateway => NodeKind::ParallelGateway,
                _ => NodeKind::ExclusiveGateway,
            };
            d.process.nodes[g].kind = flipped;
            if m % 2 == 1 {
                // also flip its partner so mismatched pairs and matched
                // but rewired pairs both occur
                if let Some(j) = d.process.gateway_pairs.get(&d.process.nodes[g].id).cloned() {
                    let jn = d.process.nodes.iter_mut().find(|n| n.id == j).unwrap();
                    jn.kind = flipped;
                }
            }
            let id = d.process.nodes[g].id.clone();
            for f in &mut d.process.flows {
                if f.source == id && flipped == NodeKind::ParallelGateway {
                    f.condition = None;
                }
            }
            d.process.gateway_pairs.retain(|s, j| {
                let kind = |x: &str| base.process.node(x).map(|n| n.kind);
                kind(s) == Some(NodeKind::InclusiveGateway)
                    || kind(j) == Some(NodeKind::InclusiveGateway)
            });
            if let Some((full, _)) = compare(&d) {
                compared += 1;
                unsound += usize::from(!full.sound);
            }
        }
    }
    assert!(compared > 200, "only {compared} mutants fit the cap");
    assert!(
        unsound > 100,
        "only {unsound} of {compared} mutants unsound"
    );
}
