//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Runs as a plain binary so the lines are always shown.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::fs;
use std::hash::{Hash, Hasher};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use cuta_bpmn::bpmn::{BpmnProcess, FlowNode, Lane, NodeKind, SequenceFlow};
use cuta_bpmn::{
    check_well_formed, compile, from_json, parse_dsl, print_dsl, to_json, verify_with, Block,
    BpmnDefinitions, Code, CompileOptions, SoundnessReport, VerifyOptions, ViolationKind,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const BIN: &str = env!("CARGO_BIN_EXE_cuta2bpmn");
const SEEDS: std::ops::RangeInclusive<u64> = 1..=500;
const PATTERNS: [&str; 8] = [
    "workflow",
    "activity_shared_documents",
    "sequence",
    "case",
    "parallel",
    "multichoice",
    "loop_pre",
    "loop_post",
];

/// Fresh, empty directory for one criterion.
fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("acceptance-{name}"));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden")
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn ok(out: &Output) -> Result<(), String> {
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Workflow files produced by `gen`, shared by criteria 1, 2 and 5.
struct Corpus {
    dir: PathBuf,
}

impl Corpus {
    fn source(&self, seed: u64) -> PathBuf {
        self.dir.join(format!("w{seed}.cuta"))
    }

    fn bpmn(&self, seed: u64) -> PathBuf {
        self.dir.join(format!("w{seed}.bpmn"))
    }

    fn text(&self, seed: u64) -> String {
        fs::read_to_string(self.source(seed)).unwrap()
    }
}

fn soundness(corpus: &Corpus) -> Result<String, String> {
    let started = Instant::now();
    let mut states = Vec::new();
    for seed in SEEDS {
        let gen = run(&[
            "gen",
            "--seed",
            &seed.to_string(),
            "--depth",
            "4",
            "--fanout",
            "4",
        ]);
        ok(&gen).map_err(|e| format!("gen seed {seed}: {e}"))?;
        fs::write(corpus.source(seed), &gen.stdout).unwrap();
        let src = corpus.source(seed);
        let out = corpus.bpmn(seed);
        let compiled = run(&[
            "compile",
            src.to_str().unwrap(),
            "-o",
            out.to_str().unwrap(),
        ]);
        ok(&compiled).map_err(|e| format!("compile seed {seed}: {e}"))?;
        let said = String::from_utf8_lossy(&compiled.stdout);
        ensure(said.starts_with("sound"), || format!("seed {seed}: {said}"))?;

        let w =
            parse_dsl(&corpus.text(seed), "w.cuta").map_err(|d| format!("seed {seed}: {d:?}"))?;
        ensure(w.root.activities().len() <= 50, || {
            format!("seed {seed}: too many activities")
        })?;
        let report = compile(&w, CompileOptions::default())
            .unwrap()
            .report
            .unwrap();
        ensure(report.sound, || format!("seed {seed}: {report}"))?;
        ensure(!report.has(ViolationKind::StateExplosion), || {
            format!("seed {seed}: explosion")
        })?;
        states.push(report.states_explored);
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    states.sort_unstable();
    Ok(format!(
        "500/500 sound, 0 StateExplosion, states p50={} max={}, {:.1?}",
        states[states.len() / 2],
        states.last().unwrap(),
        elapsed
    ))
}

/// (nodes, flows) of a block by the counting laws.
fn laws(b: &Block) -> (usize, usize) {
    let kids: Vec<(usize, usize)> = b.children().into_iter().map(laws).collect();
    let k = kids.len();
    let n: usize = kids.iter().map(|c| c.0).sum();
    let e: usize = kids.iter().map(|c| c.1).sum();
    match b {
        Block::Activity(_) => (1, 0),
        Block::Sequence(_) => (n, e + k - 1),
        Block::Case(_) | Block::Parallel(_) | Block::MultipleChoice(_) => (n + 2, e + 2 * k),
        Block::Loop(_) => (n + 2, e + 3),
    }
}

fn counting_laws(corpus: &Corpus) -> Result<String, String> {
    const NODE_TAGS: [&str; 6] = [
        "<startEvent ",
        "<endEvent ",
        "<task ",
        "<exclusiveGateway ",
        "<parallelGateway ",
        "<inclusiveGateway ",
    ];
    for seed in SEEDS {
        let w = parse_dsl(&corpus.text(seed), "w.cuta").unwrap();
        let (n, e) = laws(&w.root);
        let xml = fs::read_to_string(corpus.bpmn(seed)).unwrap();
        let nodes: usize = NODE_TAGS.iter().map(|t| xml.matches(t).count()).sum();
        let flows = xml.matches("<sequenceFlow ").count();
        ensure((nodes, flows) == (n + 2, e + 2), || {
            format!(
                "seed {seed}: file has {nodes} nodes/{flows} flows, laws give {}/{}",
                n + 2,
                e + 2
            )
        })?;
        let stats = run(&["stats", corpus.source(seed).to_str().unwrap()]);
        ok(&stats).map_err(|e| format!("stats seed {seed}: {e}"))?;
    }
    Ok("node and flow counts exact on 500/500 (emitted XML vs tree recursion)".into())
}

fn structure(d: &BpmnDefinitions) -> Result<(), String> {
    let p = &d.process;
    let out_degree = |id: &str| p.outgoing(id).count();
    for f in &p.flows {
        let src = p.node(&f.source).unwrap();
        let should = src.kind.is_conditional() && out_degree(&src.id) >= 2;
        ensure(f.condition.is_some() == should, || {
            format!("condition placement on {}", f.id)
        })?;
    }
    let mut paired = BTreeMap::new();
    for (s, j) in &p.gateway_pairs {
        let (a, b) = (p.node(s).unwrap().kind, p.node(j).unwrap().kind);
        ensure(a == b && a.is_gateway(), || {
            format!("pair {s}/{j} mixes {a} and {b}")
        })?;
        *paired.entry(s.as_str()).or_insert(0) += 1;
        *paired.entry(j.as_str()).or_insert(0) += 1;
    }
    for n in p.nodes.iter().filter(|n| n.kind.is_gateway()) {
        ensure(paired.get(n.id.as_str()) == Some(&1), || {
            format!("{} not paired once", n.id)
        })?;
    }
    Ok(())
}

fn goldens() -> Result<String, String> {
    let dir = scratch("golden");
    let expected_gateways: [(&str, Option<NodeKind>); 8] = [
        ("workflow", None),
        ("activity_shared_documents", None),
        ("sequence", None),
        ("case", Some(NodeKind::ExclusiveGateway)),
        ("parallel", Some(NodeKind::ParallelGateway)),
        ("multichoice", Some(NodeKind::InclusiveGateway)),
        ("loop_pre", Some(NodeKind::ExclusiveGateway)),
        ("loop_post", Some(NodeKind::ExclusiveGateway)),
    ];
    for (name, gateway) in expected_gateways {
        let src = golden_dir().join(format!("{name}.cuta"));
        let out = dir.join(format!("{name}.bpmn"));
        ok(&run(&[
            "compile",
            src.to_str().unwrap(),
            "-o",
            out.to_str().unwrap(),
        ]))?;
        let got = fs::read(&out).unwrap();
        let want = fs::read(golden_dir().join(format!("{name}.bpmn"))).unwrap();
        ensure(got == want, || format!("{name}.bpmn not byte-identical"))?;

        let w = parse_dsl(&fs::read_to_string(&src).unwrap(), name).unwrap();
        let d = compile(&w, CompileOptions::default()).unwrap().definitions;
        structure(&d).map_err(|e| format!("{name}: {e}"))?;
        let kinds: Vec<NodeKind> = d
            .process
            .nodes
            .iter()
            .filter(|n| n.kind.is_gateway())
            .map(|n| n.kind)
            .collect();
        match gateway {
            None => ensure(kinds.is_empty(), || format!("{name}: unexpected gateways"))?,
            Some(k) => ensure(kinds == [k, k], || format!("{name}: gateways {kinds:?}"))?,
        }
    }
    Ok("8/8 byte-exact; gateway kinds, condition placement and pairing checked".into())
}

fn diamond(split: NodeKind, join: NodeKind) -> BpmnDefinitions {
    BpmnDefinitions {
        process: BpmnProcess {
            id: "process_1".into(),
            name: "diamond".into(),
            nodes: vec![
                FlowNode::new("start_1", NodeKind::StartEvent, ""),
                FlowNode::new("split", split, ""),
                FlowNode::new("A", NodeKind::Task, "A").in_lane("R"),
                FlowNode::new("B", NodeKind::Task, "B").in_lane("R"),
                FlowNode::new("join", join, ""),
                FlowNode::new("end_1", NodeKind::EndEvent, ""),
            ],
            flows: vec![
                SequenceFlow::new("sf_1", "start_1", "split"),
                SequenceFlow::new("sf_2", "split", "A"),
                SequenceFlow::new("sf_3", "split", "B"),
                SequenceFlow::new("sf_4", "A", "join"),
                SequenceFlow::new("sf_5", "B", "join"),
                SequenceFlow::new("sf_6", "join", "end_1"),
            ],
            ..Default::default()
        },
        pool_name: "ACME".into(),
        lanes: vec![Lane { name: "R".into() }],
    }
}

fn calibration() -> Result<String, String> {
    use ViolationKind::{Deadlock, ImproperCompletion};
    // (split, join, reported, must not be reported)
    let cases = [
        (
            NodeKind::ExclusiveGateway,
            NodeKind::ParallelGateway,
            Deadlock,
            ImproperCompletion,
        ),
        (
            NodeKind::ParallelGateway,
            NodeKind::ExclusiveGateway,
            ImproperCompletion,
            Deadlock,
        ),
    ];
    let mut seen = Vec::new();
    for (split, join, expected, absent) in cases {
        let d = diamond(split, join);
        let mut reports: Vec<SoundnessReport> = Vec::new();
        for reduce in [false, true, false, true] {
            reports.push(
                verify_with(
                    &d,
                    &VerifyOptions {
                        reduce,
                        ..Default::default()
                    },
                )
                .unwrap(),
            );
        }
        ensure(reports[0] == reports[2] && reports[1] == reports[3], || {
            "nondeterministic".into()
        })?;
        for r in &reports {
            ensure(!r.sound && r.has(expected) && !r.has(absent), || {
                format!("{split}/{join}: {r}")
            })?;
        }
        seen.push(format!("{split}/{join} → {expected:?}"));
    }
    Ok(seen.join(", "))
}

fn round_trips(corpus: &Corpus) -> Result<String, String> {
    let mut n = 0;
    for seed in SEEDS {
        let text = corpus.text(seed);
        let w = parse_dsl(&text, "w.cuta").unwrap();
        let again =
            parse_dsl(&print_dsl(&w), "p.cuta").map_err(|d| format!("seed {seed}: {d:?}"))?;
        ensure(again == w, || format!("seed {seed}: parse∘print"))?;
        let back = from_json(&to_json(&w)).map_err(|d| format!("seed {seed}: {d:?}"))?;
        ensure(back == w, || format!("seed {seed}: from_json∘to_json"))?;
        n += 1;
    }
    for name in PATTERNS {
        let text = fs::read_to_string(golden_dir().join(format!("{name}.cuta"))).unwrap();
        let w = parse_dsl(&text, name).unwrap();
        ensure(parse_dsl(&print_dsl(&w), name).unwrap() == w, || {
            format!("{name}: parse∘print")
        })?;
        n += 1;
    }
    Ok(format!("{n} models, DSL and JSON identity"))
}

fn digest(path: &Path) -> u64 {
    let mut h = DefaultHasher::new();
    fs::read(path).unwrap().hash(&mut h);
    h.finish()
}

fn determinism(corpus: &Corpus) -> Result<String, String> {
    let dir = scratch("determinism");
    let mut inputs: Vec<PathBuf> = PATTERNS
        .iter()
        .map(|p| golden_dir().join(format!("{p}.cuta")))
        .collect();
    inputs.extend(SEEDS.step_by(25).map(|s| corpus.source(s)));
    for (i, input) in inputs.iter().enumerate() {
        let mut digests = Vec::new();
        for run_no in 0..2 {
            let bpmn = dir.join(format!("{i}_{run_no}.bpmn"));
            let json = dir.join(format!("{i}_{run_no}.cuta.json"));
            ok(&run(&[
                "compile",
                input.to_str().unwrap(),
                "-o",
                bpmn.to_str().unwrap(),
                "--json",
                json.to_str().unwrap(),
            ]))?;
            digests.push((digest(&bpmn), digest(&json)));
        }
        ensure(digests[0] == digests[1], || {
            format!("{} differs between runs", input.display())
        })?;

        // the JSON interchange compiles back to the same BPMN
        let json = dir.join(format!("{i}_0.cuta.json"));
        let again = dir.join(format!("{i}_json.bpmn"));
        ok(&run(&[
            "compile",
            json.to_str().unwrap(),
            "-o",
            again.to_str().unwrap(),
        ]))?;
        ensure(digest(&again) == digests[0].0, || {
            format!("{}: JSON route differs", input.display())
        })?;
    }
    Ok(format!(
        "{} inputs, identical .bpmn and .cuta.json hashes",
        inputs.len()
    ))
}

fn fuzz() -> Result<String, String> {
    const ALPHABET: &[&str] = &[
        "workflow ",
        "company ",
        "activity",
        "sequence",
        "case",
        "when ",
        "parallel",
        "multichoice",
        "option ",
        "loop ",
        "pre ",
        "post ",
        "subject",
        "action",
        "object",
        "role",
        " in ",
        "out",
        ":",
        "{",
        "}",
        "[",
        "]",
        ",",
        "\"",
        "\"R\"",
        "\\",
        "\n",
        "//",
        "é",
        "\u{0}",
    ];
    let mut rng = StdRng::seed_from_u64(7);
    let inputs: Vec<String> = (0..10_000)
        .map(|i| {
            let len = rng.random_range(0..512);
            if i % 2 == 0 {
                let bytes: Vec<u8> = (0..len).map(|_| rng.random()).collect();
                String::from_utf8_lossy(&bytes).into_owned()
            } else {
                (0..len / 4)
                    .map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())])
                    .collect()
            }
        })
        .collect();
    let total = inputs.len();
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        for (i, text) in inputs.into_iter().enumerate() {
            let outcome = catch_unwind(|| parse_dsl(&text, "fuzz.cuta").is_ok());
            if tx
                .send((i, outcome.is_ok(), outcome.unwrap_or(false)))
                .is_err()
            {
                return;
            }
        }
    });
    let mut accepted = 0;
    for expected in 0..total {
        match rx.recv_timeout(Duration::from_secs(5)) {
            Ok((i, true, parsed)) if i == expected => accepted += usize::from(parsed),
            Ok((i, false, _)) => return Err(format!("input {i} panicked")),
            Ok((i, ..)) => return Err(format!("input {i} out of order")),
            Err(_) => return Err(format!("input {expected} exceeded 5 s")),
        }
    }
    Ok(format!(
        "{total} inputs, no panic or hang ({accepted} parsed as models)"
    ))
}

fn base_graph() -> BpmnDefinitions {
    let mut d = diamond(NodeKind::ParallelGateway, NodeKind::ParallelGateway);
    d.process
        .gateway_pairs
        .insert("split".into(), "join".into());
    d
}

fn wellformed_gate() -> Result<String, String> {
    ensure(check_well_formed(&base_graph()).is_empty(), || {
        "base graph rejected".into()
    })?;
    let mut cases: Vec<(&str, BpmnDefinitions, Code)> = Vec::new();

    let mut d = base_graph();
    d.process
        .nodes
        .push(FlowNode::new("start_2", NodeKind::StartEvent, ""));
    d.process
        .flows
        .push(SequenceFlow::new("sf_7", "start_2", "A"));
    cases.push(("two starts", d, Code::StartEventCount));

    let mut d = base_graph();
    d.process
        .nodes
        .push(FlowNode::new("C", NodeKind::Task, "C").in_lane("R"));
    d.process.flows.push(SequenceFlow::new("sf_7", "C", "join"));
    cases.push(("unreachable node", d, Code::NodeOffPath));

    let mut d = base_graph();
    d.process
        .flows
        .push(SequenceFlow::new("sf_7", "A", "ghost"));
    cases.push(("dangling flow reference", d, Code::DanglingFlowRef));

    let mut d = base_graph();
    d.process.flows[3].condition = Some("approved".into());
    cases.push((
        "condition on task-sourced flow",
        d,
        Code::UnexpectedCondition,
    ));

    let mut d = base_graph();
    d.process.nodes[3].id = "A".into();
    d.process.flows[2].target = "A".into();
    d.process.flows[4].source = "A".into();
    cases.push(("duplicate id", d, Code::DuplicateNodeId));

    for (name, d, code) in &cases {
        let codes: Vec<Code> = check_well_formed(d).iter().map(|x| x.code).collect();
        ensure(codes.contains(code), || format!("{name}: got {codes:?}"))?;
    }
    Ok(format!(
        "{} violation graphs rejected with the matching kind",
        cases.len()
    ))
}

fn main() {
    let corpus = Corpus {
        dir: scratch("corpus"),
    };
    type Check<'a> = Box<dyn FnOnce() -> Result<String, String> + 'a>;
    let criteria: Vec<(&str, Check)> = vec![
        ("soundness by construction", Box::new(|| soundness(&corpus))),
        ("counting laws", Box::new(|| counting_laws(&corpus))),
        ("pattern goldens", Box::new(goldens)),
        ("verifier calibration", Box::new(calibration)),
        ("round trips", Box::new(|| round_trips(&corpus))),
        ("determinism", Box::new(|| determinism(&corpus))),
        ("parser totality fuzz", Box::new(fuzz)),
        ("well-formedness gate", Box::new(wellformed_gate)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
