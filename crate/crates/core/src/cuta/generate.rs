//! Seeded generator of valid random workflows, used to build test corpora.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::model::{Block, BlockKind, ConditionPosition, CutaWorkflow, SimpleActivity};

/// Upper bound on activities in a generated workflow.
pub const MAX_ACTIVITIES: usize = 50;

const SUBJECTS: &[&str] = &["Ann", "Bob", "Carla", "Dan", "Eve"];
const ACTIONS: &[&str] = &["files", "reviews", "approves", "ships", "archives", "signs"];
const OBJECTS: &[&str] = &[
    "the form",
    "the order",
    "the invoice",
    "the parcel",
    "the contract",
];
const ROLES: &[(&str, &str)] = &[
    ("Clerk", "Sales"),
    ("Manager", "Sales"),
    ("Accountant", "Finance"),
    ("Auditor", "Finance"),
    ("Driver", "Logistics"),
];
const DOCUMENTS: &[&str] = &["Order", "Invoice", "Receipt", "Contract", "Report"];
const CONDITIONS: &[&str] = &[
    "amount > 1000",
    "order is valid",
    "customer is \"new\"",
    "stock available",
    "discount & bonus",
    "priority < high",
];
const LOCATIONS: &[&str] = &["head office", "warehouse"];
const TIME_LIMITS: &[&str] = &["2 days", "1 week"];
const COMPANIES: &[&str] = &["ACME", "Globex", "Initech"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("max_depth must be at least 1, got {0}")]
    Depth(u32),
    #[error("max_fanout must be at least 2, got {0}")]
    Fanout(u32),
}

/// Generates a random valid workflow.
///
/// The output is a pure function of the three parameters. Block kinds are
/// drawn uniformly at every node; nodes at `max_depth` are activities, and no
/// workflow has more than [`MAX_ACTIVITIES`] activities.
pub fn generate_random_workflow(
    seed: u64,
    max_depth: u32,
    max_fanout: u32,
) -> Result<CutaWorkflow, GenError> {
    if max_depth < 1 {
        return Err(GenError::Depth(max_depth));
    }
    if max_fanout < 2 {
        return Err(GenError::Fanout(max_fanout));
    }
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(seed),
        max_depth,
        max_fanout: max_fanout as usize,
    };
    let root = g.block(1, MAX_ACTIVITIES);
    let company = *COMPANIES.choose(&mut g.rng).unwrap();
    let units: BTreeMap<String, String> = ROLES
        .iter()
        .map(|(r, u)| (r.to_string(), u.to_string()))
        .collect();
    Ok(CutaWorkflow::assemble(
        format!("Random workflow {seed}"),
        company,
        root,
        &units,
    ))
}

struct Generator {
    rng: ChaCha8Rng,
    max_depth: u32,
    max_fanout: usize,
}

impl Generator {
    fn block(&mut self, depth: u32, budget: usize) -> Block {
        let kind = if depth >= self.max_depth {
            BlockKind::Activity
        } else if budget < 2 {
            *[BlockKind::Activity, BlockKind::Sequence, BlockKind::Loop]
                .choose(&mut self.rng)
                .unwrap()
        } else {
            *BlockKind::ALL.choose(&mut self.rng).unwrap()
        };
        let width_cap = self.max_fanout.min(budget);
        match kind {
            BlockKind::Activity => Block::Activity(self.activity()),
            BlockKind::Sequence => {
                let n = self.rng.random_range(1..=width_cap);
                Block::sequence(self.children(n, depth, budget))
            }
            BlockKind::Case => {
                let n = self.rng.random_range(2..=width_cap);
                let bodies = self.children(n, depth, budget);
                let conds = self.conditions(n);
                Block::case(conds.into_iter().zip(bodies))
            }
            BlockKind::Parallel => {
                let n = self.rng.random_range(2..=width_cap);
                Block::parallel(self.children(n, depth, budget))
            }
            BlockKind::MultipleChoice => {
                let n = self.rng.random_range(2..=width_cap);
                let bodies = self.children(n, depth, budget);
                let conds = self.conditions(n);
                Block::multichoice(conds.into_iter().zip(bodies))
            }
            BlockKind::Loop => {
                let cond = *CONDITIONS.choose(&mut self.rng).unwrap();
                let pos = if self.rng.random_bool(0.5) {
                    ConditionPosition::Begin
                } else {
                    ConditionPosition::End
                };
                let body = self.block(depth + 1, budget);
                Block::looped(cond, pos, body)
            }
        }
    }

    /// Splits `budget` across `n` children; every child gets at least one.
    fn children(&mut self, n: usize, depth: u32, budget: usize) -> Vec<Block> {
        let mut remaining = budget;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let left = n - i;
            let child_budget = (remaining / left).max(1);
            let child = self.block(depth + 1, child_budget);
            remaining -= child.activities().len();
            out.push(child);
        }
        out
    }

    fn conditions(&mut self, n: usize) -> Vec<String> {
        (0..n)
            .map(|i| {
                let base = *CONDITIONS.choose(&mut self.rng).unwrap();
                format!("{base} ({})", i + 1)
            })
            .collect()
    }

    fn documents(&mut self) -> Vec<String> {
        let n = self.rng.random_range(0..=2);
        DOCUMENTS
            .choose_multiple(&mut self.rng, n)
            .map(|d| d.to_string())
            .collect()
    }

    fn activity(&mut self) -> SimpleActivity {
        let subject = *SUBJECTS.choose(&mut self.rng).unwrap();
        let action = *ACTIONS.choose(&mut self.rng).unwrap();
        let object = *OBJECTS.choose(&mut self.rng).unwrap();
        let (role, _) = *ROLES.choose(&mut self.rng).unwrap();
        let mut a = SimpleActivity::new(subject, action, object, role);
        a.documents_in = self.documents();
        a.documents_out = self.documents();
        if self.rng.random_bool(0.25) {
            a.location = Some(LOCATIONS.choose(&mut self.rng).unwrap().to_string());
        }
        if self.rng.random_bool(0.25) {
            a.time_limit = Some(TIME_LIMITS.choose(&mut self.rng).unwrap().to_string());
        }
        a
    }
}
