//! Exhaustive token-game soundness check.
//!
//! Tokens sit on sequence flows. Starting from one token on each outgoing
//! flow of the start event, every reachable marking is enumerated:
//!
//! * tasks and events consume one token from one incoming flow and put one
//!   on every outgoing flow; the end event moves its token to a completion
//!   counter;
//! * exclusive gateways move one token from one incoming flow to one
//!   outgoing flow, every choice explored;
//! * parallel gateways need a token on every incoming flow and feed every
//!   outgoing flow;
//! * an inclusive split feeds any nonempty subset of its outgoing flows and
//!   remembers the subset; its paired join fires once every corresponding
//!   incoming flow holds a token, and consumes exactly those.
//!
//! The graph is sound when no reachable marking is stuck, the end event is
//! only ever reached with nothing else in flight, and every node fires in
//! some execution.
//!
//! By default independent moves are not interleaved: a node whose moves
//! commute with everything else is fired on its own (a persistent-set
//! reduction). Deadlocks, improper completions and dead nodes are the same
//! as with [`VerifyOptions::reduce`] off; only `states_explored` shrinks.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::bpmn::{check_well_formed, BpmnDefinitions, NodeKind};
use crate::diagnostic::Diagnostic;

pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// Inclusive splits wider than this are not enumerated.
const MAX_INCLUSIVE_FANOUT: usize = 16;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("graph is not well-formed ({} diagnostics)", .0.len())]
    IllFormed(Vec<Diagnostic>),
    #[error("inclusive gateway '{0}' merges flows but has no paired split in gateway_pairs")]
    MissingPairing(String),
    #[error("inclusive gateway '{0}' splits flows but has no paired join in gateway_pairs")]
    MissingJoin(String),
    #[error("branch '{flow}' of inclusive split '{split}' reaches {found} incoming flows of its join, expected exactly one")]
    UnstructuredBranch {
        split: String,
        flow: String,
        found: usize,
    },
    #[error("inclusive split '{0}' has more than {MAX_INCLUSIVE_FANOUT} outgoing flows")]
    InclusiveFanout(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ViolationKind {
    Deadlock,
    ImproperCompletion,
    DeadNode,
    StateExplosion,
}

/// A reachable marking: tokens per flow id plus tokens that passed the end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarkingWitness {
    pub tokens: BTreeMap<String, u32>,
    pub completed: u32,
}

impl fmt::Display for MarkingWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for (flow, n) in &self.tokens {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            if *n == 1 {
                write!(f, "{flow}")?;
            } else {
                write!(f, "{flow}×{n}")?;
            }
        }
        if self.completed > 0 {
            if !first {
                f.write_str(", ")?;
            }
            write!(f, "completed×{}", self.completed)?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    Marking(MarkingWitness),
    Node(String),
    Limit(usize),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Marking(m) => write!(f, "marking {m}"),
            Witness::Node(n) => write!(f, "node {n}"),
            Witness::Limit(n) => write!(f, "more than {n} states"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SoundnessReport {
    pub sound: bool,
    pub violations: Vec<Violation>,
    pub states_explored: usize,
    /// Highest token count seen on any single flow. Structured graphs never
    /// exceed 1.
    pub max_flow_tokens: u32,
}

impl SoundnessReport {
    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for SoundnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sound {
            writeln!(f, "sound ({} states explored)", self.states_explored)?;
        } else {
            writeln!(f, "unsound ({} states explored)", self.states_explored)?;
        }
        for v in &self.violations {
            writeln!(f, "  {:?}: {}", v.kind, v.witness)?;
        }
        if self.max_flow_tokens > 1 {
            writeln!(
                f,
                "  warning: a flow held {} tokens at once",
                self.max_flow_tokens
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Marking {
    tokens: Box<[u8]>,
    completed: u8,
    /// inclusive join node index → expected incoming flow indices (sorted)
    pending: Vec<(u32, Vec<u32>)>,
}

struct Net {
    kinds: Vec<NodeKind>,
    node_ids: Vec<String>,
    flow_ids: Vec<String>,
    flow_target: Vec<usize>,
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
    /// inclusive split → (join node, split outgoing flow → join incoming flow)
    inclusive_split: HashMap<usize, (usize, HashMap<usize, usize>)>,
    inclusive_join: HashSet<usize>,
    /// inclusive join → flows from which its split is reachable without
    /// passing through the join
    split_feeders: HashMap<usize, Vec<bool>>,
    /// targets of back edges in a depth-first walk from the start event;
    /// every cycle of the graph contains one
    cycle_entry: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub state_cap: usize,
    /// Skip interleavings of independent moves. Off means every
    /// interleaving is enumerated.
    pub reduce: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            state_cap: DEFAULT_STATE_CAP,
            reduce: true,
        }
    }
}

/// Explores the reachable markings of `d`, up to `state_cap` distinct ones.
pub fn verify_soundness(
    d: &BpmnDefinitions,
    state_cap: usize,
) -> Result<SoundnessReport, VerifyError> {
    verify_with(
        d,
        &VerifyOptions {
            state_cap,
            ..VerifyOptions::default()
        },
    )
}

pub fn verify_with(
    d: &BpmnDefinitions,
    opts: &VerifyOptions,
) -> Result<SoundnessReport, VerifyError> {
    let diags = check_well_formed(d);
    if !diags.is_empty() {
        return Err(VerifyError::IllFormed(diags));
    }
    let net = Net::build(d)?;
    Ok(net.explore(opts))
}

impl Net {
    fn build(d: &BpmnDefinitions) -> Result<Net, VerifyError> {
        let p = &d.process;
        let index: HashMap<&str, usize> = p
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        let n = p.nodes.len();
        let mut incoming = vec![Vec::new(); n];
        let mut outgoing = vec![Vec::new(); n];
        let mut flow_source = Vec::with_capacity(p.flows.len());
        let mut flow_target = Vec::with_capacity(p.flows.len());
        for (fi, f) in p.flows.iter().enumerate() {
            let s = index[f.source.as_str()];
            let t = index[f.target.as_str()];
            outgoing[s].push(fi);
            incoming[t].push(fi);
            flow_source.push(s);
            flow_target.push(t);
        }
        let mut net = Net {
            kinds: p.nodes.iter().map(|n| n.kind).collect(),
            node_ids: p.nodes.iter().map(|n| n.id.clone()).collect(),
            flow_ids: p.flows.iter().map(|f| f.id.clone()).collect(),
            flow_target,
            incoming,
            outgoing,
            inclusive_split: HashMap::new(),
            inclusive_join: HashSet::new(),
            split_feeders: HashMap::new(),
            cycle_entry: vec![false; n],
        };
        for (i, kind) in net.kinds.iter().enumerate() {
            if *kind != NodeKind::InclusiveGateway {
                continue;
            }
            let id = &net.node_ids[i];
            if net.incoming[i].len() > 1 {
                if !p.gateway_pairs.values().any(|j| j == id) {
                    return Err(VerifyError::MissingPairing(id.clone()));
                }
                net.inclusive_join.insert(i);
            }
            if net.outgoing[i].len() > 1 {
                let Some(join_id) = p.gateway_pairs.get(id) else {
                    return Err(VerifyError::MissingJoin(id.clone()));
                };
                if net.outgoing[i].len() > MAX_INCLUSIVE_FANOUT {
                    return Err(VerifyError::InclusiveFanout(id.clone()));
                }
                let join = index[join_id.as_str()];
                let mut branch_map = HashMap::new();
                for &f in &net.outgoing[i] {
                    let reached = net.join_inputs_reached(f, join);
                    if reached.len() != 1 {
                        return Err(VerifyError::UnstructuredBranch {
                            split: id.clone(),
                            flow: net.flow_ids[f].clone(),
                            found: reached.len(),
                        });
                    }
                    branch_map.insert(f, reached[0]);
                }
                net.inclusive_split.insert(i, (join, branch_map));
            }
        }
        for (&split, &(join, _)) in &net.inclusive_split {
            let mut feeds = vec![false; net.flow_ids.len()];
            let mut queue: VecDeque<usize> = net.incoming[split].iter().copied().collect();
            while let Some(f) = queue.pop_front() {
                if std::mem::replace(&mut feeds[f], true) {
                    continue;
                }
                let source = flow_source[f];
                if source != join {
                    queue.extend(net.incoming[source].iter().copied());
                }
            }
            net.split_feeders.insert(join, feeds);
        }
        net.mark_cycle_entries();
        Ok(net)
    }

    fn mark_cycle_entries(&mut self) {
        // 0 unvisited, 1 on the stack, 2 done
        let mut state = vec![0u8; self.kinds.len()];
        for root in 0..self.kinds.len() {
            if state[root] != 0 {
                continue;
            }
            state[root] = 1;
            let mut stack = vec![(root, 0usize)];
            while let Some((node, i)) = stack.last_mut() {
                let node = *node;
                if let Some(&f) = self.outgoing[node].get(*i) {
                    *i += 1;
                    let next = self.flow_target[f];
                    match state[next] {
                        0 => {
                            state[next] = 1;
                            stack.push((next, 0));
                        }
                        1 => self.cycle_entry[next] = true,
                        _ => {}
                    }
                } else {
                    state[node] = 2;
                    stack.pop();
                }
            }
        }
    }

    /// Incoming flows of `join` reachable from flow `from` without passing
    /// through `join`.
    fn join_inputs_reached(&self, from: usize, join: usize) -> Vec<usize> {
        let mut seen_flows = HashSet::from([from]);
        let mut queue = VecDeque::from([from]);
        let mut found = Vec::new();
        while let Some(f) = queue.pop_front() {
            let t = self.flow_target[f];
            if t == join {
                found.push(f);
                continue;
            }
            for &g in &self.outgoing[t] {
                if seen_flows.insert(g) {
                    queue.push_back(g);
                }
            }
        }
        found.sort_unstable();
        found
    }

    fn witness(&self, m: &Marking) -> Witness {
        let tokens = m
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(i, &n)| (self.flow_ids[i].clone(), n as u32))
            .collect();
        Witness::Marking(MarkingWitness {
            tokens,
            completed: m.completed as u32,
        })
    }

    fn explore(&self, opts: &VerifyOptions) -> SoundnessReport {
        let start = self
            .kinds
            .iter()
            .position(|k| *k == NodeKind::StartEvent)
            .expect("well-formed graphs have a start event");
        let mut initial = Marking {
            tokens: vec![0u8; self.flow_ids.len()].into_boxed_slice(),
            completed: 0,
            pending: Vec::new(),
        };
        for &f in &self.outgoing[start] {
            initial.tokens[f] = 1;
        }
        let mut fired = vec![false; self.kinds.len()];
        fired[start] = true;

        let mut violations: Vec<Violation> = Vec::new();
        let record = |kind: ViolationKind, witness: Witness, violations: &mut Vec<Violation>| {
            if !violations.iter().any(|v| v.kind == kind) {
                violations.push(Violation { kind, witness });
            }
        };
        let mut max_flow_tokens = initial.tokens.iter().copied().max().unwrap_or(0) as u32;
        let mut seen: HashSet<Marking> = HashSet::from([initial.clone()]);
        let mut queue = VecDeque::from([initial]);
        let mut exploded = false;
        let mut successors = Vec::new();

        'search: while let Some(m) = queue.pop_front() {
            let in_flight = m.tokens.iter().any(|&t| t > 0);
            if m.completed > 1 || (m.completed > 0 && in_flight) {
                record(
                    ViolationKind::ImproperCompletion,
                    self.witness(&m),
                    &mut violations,
                );
            }
            successors.clear();
            if self
                .expand(&m, opts.reduce, &mut fired, &mut successors)
                .is_err()
            {
                exploded = true;
                break;
            }
            if successors.is_empty() {
                if in_flight {
                    record(ViolationKind::Deadlock, self.witness(&m), &mut violations);
                }
                continue;
            }
            for next in successors.drain(..) {
                if seen.contains(&next) {
                    continue;
                }
                if let Some(&top) = next.tokens.iter().max() {
                    max_flow_tokens = max_flow_tokens.max(top as u32);
                }
                if seen.len() >= opts.state_cap {
                    exploded = true;
                    break 'search;
                }
                seen.insert(next.clone());
                queue.push_back(next);
            }
        }

        if exploded {
            record(
                ViolationKind::StateExplosion,
                Witness::Limit(opts.state_cap),
                &mut violations,
            );
        } else {
            for (i, &f) in fired.iter().enumerate() {
                if !f {
                    violations.push(Violation {
                        kind: ViolationKind::DeadNode,
                        witness: Witness::Node(self.node_ids[i].clone()),
                    });
                }
            }
        }
        violations.sort_by_key(|v| v.kind);
        SoundnessReport {
            sound: violations.is_empty(),
            violations,
            states_explored: seen.len(),
            max_flow_tokens,
        }
    }

    /// Successors of `m`. With `reduce`, the first node whose moves are
    /// independent of every other node's (see [`Net::independent`]) is
    /// expanded alone.
    fn expand(
        &self,
        m: &Marking,
        reduce: bool,
        fired: &mut [bool],
        out: &mut Vec<Marking>,
    ) -> Result<(), Overflow> {
        let mut candidates: Vec<usize> = m
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, &t)| t > 0)
            .map(|(f, _)| self.flow_target[f])
            .collect();
        candidates.sort_unstable();
        candidates.dedup();

        if reduce {
            for &node in &candidates {
                if !self.independent(m, node) {
                    continue;
                }
                self.fire(m, node, out)?;
                if out.is_empty() {
                    continue;
                }
                fired[node] = true;
                return Ok(());
            }
        }
        for node in candidates {
            let before = out.len();
            self.fire(m, node, out)?;
            if out.len() > before {
                fired[node] = true;
            }
        }
        Ok(())
    }

    /// True when no move of another node can disable, or fail to commute
    /// with, a move of `node` from any marking reachable from `m` without
    /// firing `node`. Token production never disables anything, since each
    /// flow has a single consumer and every enabling rule is monotone, so
    /// only the end event (it changes the completion verdict) and the
    /// inclusive branch-set record need care.
    ///
    /// Cycle entries are never reduced: every cycle of markings fires one of
    /// them, so each such cycle passes a fully expanded marking and no node
    /// is postponed forever.
    fn independent(&self, m: &Marking, node: usize) -> bool {
        if self.kinds[node] == NodeKind::EndEvent || self.cycle_entry[node] {
            return false;
        }
        if let Some((join, _)) = self.inclusive_split.get(&node) {
            let pending = m.pending.iter().any(|(j, _)| *j as usize == *join);
            if pending || self.incoming[node].len() != 1 {
                return false;
            }
        }
        if let Some(feeds_split) = self.split_feeders.get(&node) {
            let may_rearm = m
                .tokens
                .iter()
                .enumerate()
                .any(|(f, &t)| t > 0 && feeds_split[f]);
            if may_rearm {
                return false;
            }
        }
        true
    }

    /// Pushes every successor of `m` reached by firing `node`.
    fn fire(&self, m: &Marking, node: usize, out: &mut Vec<Marking>) -> Result<(), Overflow> {
        // consumption alternatives
        let mut consumed: Vec<Marking> = Vec::new();
        match self.kinds[node] {
            NodeKind::ParallelGateway => {
                if self.incoming[node].iter().all(|&f| m.tokens[f] > 0) {
                    let mut next = m.clone();
                    for &f in &self.incoming[node] {
                        next.tokens[f] -= 1;
                    }
                    consumed.push(next);
                }
            }
            NodeKind::InclusiveGateway if self.inclusive_join.contains(&node) => {
                let pos = m.pending.iter().position(|(j, _)| *j as usize == node);
                if let Some(pos) = pos {
                    let expected = &m.pending[pos].1;
                    if expected.iter().all(|&f| m.tokens[f as usize] > 0) {
                        let mut next = m.clone();
                        for &f in expected {
                            next.tokens[f as usize] -= 1;
                        }
                        next.pending.remove(pos);
                        consumed.push(next);
                    }
                }
            }
            _ => {
                for &f in &self.incoming[node] {
                    if m.tokens[f] > 0 {
                        let mut next = m.clone();
                        next.tokens[f] -= 1;
                        consumed.push(next);
                    }
                }
            }
        }

        for base in consumed {
            match self.kinds[node] {
                NodeKind::EndEvent => {
                    let mut next = base;
                    // only "none", "one" and "more than one" matter
                    next.completed = (next.completed + 1).min(2);
                    out.push(next);
                }
                NodeKind::ExclusiveGateway => {
                    for &g in &self.outgoing[node] {
                        let mut next = base.clone();
                        produce(&mut next, &[g])?;
                        out.push(next);
                    }
                }
                NodeKind::InclusiveGateway if self.inclusive_split.contains_key(&node) => {
                    let (join, branch_map) = &self.inclusive_split[&node];
                    let outs = &self.outgoing[node];
                    for mask in 1u32..(1 << outs.len()) {
                        let chosen: Vec<usize> = outs
                            .iter()
                            .enumerate()
                            .filter(|(bit, _)| mask & (1 << bit) != 0)
                            .map(|(_, &f)| f)
                            .collect();
                        let mut next = base.clone();
                        produce(&mut next, &chosen)?;
                        let mut expected: Vec<u32> =
                            chosen.iter().map(|f| branch_map[f] as u32).collect();
                        expected.sort_unstable();
                        next.pending.retain(|(j, _)| *j as usize != *join);
                        next.pending.push((*join as u32, expected));
                        next.pending.sort();
                        out.push(next);
                    }
                }
                _ => {
                    let mut next = base;
                    produce(&mut next, &self.outgoing[node])?;
                    out.push(next);
                }
            }
        }
        Ok(())
    }
}

/// A flow would exceed the per-flow token counter.
struct Overflow;

fn produce(m: &mut Marking, flows: &[usize]) -> Result<(), Overflow> {
    for &f in flows {
        m.tokens[f] = m.tokens[f].checked_add(1).ok_or(Overflow)?;
    }
    Ok(())
}
