use std::collections::BTreeMap;
use std::fmt;

/// Where a loop evaluates its condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConditionPosition {
    /// Pre-test: checked before every iteration, the body may run zero times.
    Begin,
    /// Post-test: checked after every iteration, the body runs at least once.
    End,
}

impl ConditionPosition {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionPosition::Begin => "begin",
            ConditionPosition::End => "end",
        }
    }
}

/// A SimpleActivity card: "subject action object", performed in a role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleActivity {
    pub subject: String,
    pub action: String,
    pub object: String,
    pub role: String,
    pub documents_in: Vec<String>,
    pub documents_out: Vec<String>,
    pub location: Option<String>,
    pub time_limit: Option<String>,
}

impl SimpleActivity {
    pub fn new(
        subject: impl Into<String>,
        action: impl Into<String>,
        object: impl Into<String>,
        role: impl Into<String>,
    ) -> Self {
        SimpleActivity {
            subject: subject.into(),
            action: action.into(),
            object: object.into(),
            role: role.into(),
            documents_in: Vec::new(),
            documents_out: Vec::new(),
            location: None,
            time_limit: None,
        }
    }

    pub fn reads<I, S>(mut self, docs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.documents_in.extend(docs.into_iter().map(Into::into));
        self
    }

    pub fn writes<I, S>(mut self, docs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.documents_out.extend(docs.into_iter().map(Into::into));
        self
    }

    /// The card's sentence, single-space joined.
    pub fn sentence(&self) -> String {
        format!("{} {} {}", self.subject, self.action, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceElement {
    pub seq_no: u32,
    pub block: Block,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    pub elements: Vec<SequenceElement>,
}

impl Sequence {
    /// Builds a sequence numbering the blocks 1..k in order.
    pub fn of(blocks: impl IntoIterator<Item = Block>) -> Self {
        Sequence {
            elements: blocks
                .into_iter()
                .zip(1..)
                .map(|(block, seq_no)| SequenceElement { seq_no, block })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseItem {
    pub number: u32,
    pub condition: String,
    pub body: Block,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case {
    pub items: Vec<CaseItem>,
}

impl Case {
    pub fn of<S: Into<String>>(items: impl IntoIterator<Item = (S, Block)>) -> Self {
        Case {
            items: items
                .into_iter()
                .zip(1..)
                .map(|((condition, body), number)| CaseItem {
                    number,
                    condition: condition.into(),
                    body,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parallel {
    pub branches: Vec<Block>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceOption {
    pub condition: String,
    pub body: Block,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultipleChoice {
    pub options: Vec<ChoiceOption>,
}

impl MultipleChoice {
    pub fn of<S: Into<String>>(options: impl IntoIterator<Item = (S, Block)>) -> Self {
        MultipleChoice {
            options: options
                .into_iter()
                .map(|(condition, body)| ChoiceOption {
                    condition: condition.into(),
                    body,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loop {
    pub condition: String,
    pub position: ConditionPosition,
    pub body: Box<Block>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    Activity(SimpleActivity),
    Sequence(Sequence),
    Case(Case),
    Parallel(Parallel),
    MultipleChoice(MultipleChoice),
    Loop(Loop),
}

/// Discriminant of [`Block`], spelled the same way as the JSON `kind` tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockKind {
    Activity,
    Sequence,
    Case,
    Parallel,
    MultipleChoice,
    Loop,
}

impl BlockKind {
    pub const ALL: [BlockKind; 6] = [
        BlockKind::Activity,
        BlockKind::Sequence,
        BlockKind::Case,
        BlockKind::Parallel,
        BlockKind::MultipleChoice,
        BlockKind::Loop,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BlockKind::Activity => "activity",
            BlockKind::Sequence => "sequence",
            BlockKind::Case => "case",
            BlockKind::Parallel => "parallel",
            BlockKind::MultipleChoice => "multichoice",
            BlockKind::Loop => "loop",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        BlockKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Block {
    pub fn kind(&self) -> BlockKind {
        match self {
            Block::Activity(_) => BlockKind::Activity,
            Block::Sequence(_) => BlockKind::Sequence,
            Block::Case(_) => BlockKind::Case,
            Block::Parallel(_) => BlockKind::Parallel,
            Block::MultipleChoice(_) => BlockKind::MultipleChoice,
            Block::Loop(_) => BlockKind::Loop,
        }
    }

    pub fn sequence(blocks: impl IntoIterator<Item = Block>) -> Self {
        Block::Sequence(Sequence::of(blocks))
    }

    pub fn parallel(blocks: impl IntoIterator<Item = Block>) -> Self {
        Block::Parallel(Parallel {
            branches: blocks.into_iter().collect(),
        })
    }

    pub fn case<S: Into<String>>(items: impl IntoIterator<Item = (S, Block)>) -> Self {
        Block::Case(Case::of(items))
    }

    pub fn multichoice<S: Into<String>>(options: impl IntoIterator<Item = (S, Block)>) -> Self {
        Block::MultipleChoice(MultipleChoice::of(options))
    }

    pub fn looped(condition: impl Into<String>, position: ConditionPosition, body: Block) -> Self {
        Block::Loop(Loop {
            condition: condition.into(),
            position,
            body: Box::new(body),
        })
    }

    /// Direct children in processing order.
    pub fn children(&self) -> Vec<&Block> {
        match self {
            Block::Activity(_) => Vec::new(),
            Block::Sequence(s) => s.elements.iter().map(|e| &e.block).collect(),
            Block::Case(c) => c.items.iter().map(|i| &i.body).collect(),
            Block::Parallel(p) => p.branches.iter().collect(),
            Block::MultipleChoice(m) => m.options.iter().map(|o| &o.body).collect(),
            Block::Loop(l) => vec![&*l.body],
        }
    }

    /// Preorder walk over all activities.
    pub fn activities(&self) -> Vec<&SimpleActivity> {
        let mut out = Vec::new();
        self.collect_activities(&mut out);
        out
    }

    fn collect_activities<'a>(&'a self, out: &mut Vec<&'a SimpleActivity>) {
        match self {
            Block::Activity(a) => out.push(a),
            other => {
                for child in other.children() {
                    child.collect_activities(out);
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }
}

impl From<SimpleActivity> for Block {
    fn from(a: SimpleActivity) -> Self {
        Block::Activity(a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Document {
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Role {
    pub name: String,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrganizationalUnit {
    pub name: String,
    pub roles: Vec<String>,
}

/// A block-structured process owned by a company.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutaWorkflow {
    pub name: String,
    pub company: String,
    pub root: Block,
    pub documents: Vec<Document>,
    pub org_units: Vec<OrganizationalUnit>,
}

impl CutaWorkflow {
    /// Assembles a workflow whose document and organisation registries are
    /// derived from the tree: documents in order of first reference, units in
    /// order of first use, each unit listing its roles in order of first use.
    ///
    /// `role_units` maps role names to their unit; roles missing from it are
    /// left unresolved for the validator to report.
    pub fn assemble(
        name: impl Into<String>,
        company: impl Into<String>,
        root: Block,
        role_units: &BTreeMap<String, String>,
    ) -> Self {
        let mut documents: Vec<Document> = Vec::new();
        let mut org_units: Vec<OrganizationalUnit> = Vec::new();
        for act in root.activities() {
            for doc in act.documents_in.iter().chain(&act.documents_out) {
                if !documents.iter().any(|d| &d.name == doc) {
                    documents.push(Document { name: doc.clone() });
                }
            }
            let Some(unit) = role_units.get(&act.role) else {
                continue;
            };
            match org_units.iter_mut().find(|u| &u.name == unit) {
                Some(u) => {
                    if !u.roles.contains(&act.role) {
                        u.roles.push(act.role.clone());
                    }
                }
                None => org_units.push(OrganizationalUnit {
                    name: unit.clone(),
                    roles: vec![act.role.clone()],
                }),
            }
        }
        CutaWorkflow {
            name: name.into(),
            company: company.into(),
            root,
            documents,
            org_units,
        }
    }

    pub fn roles(&self) -> Vec<Role> {
        self.org_units
            .iter()
            .flat_map(|u| {
                u.roles.iter().map(|r| Role {
                    name: r.clone(),
                    unit: u.name.clone(),
                })
            })
            .collect()
    }

    /// Unit of `role`, if exactly one unit claims it.
    pub fn unit_of(&self, role: &str) -> Option<&str> {
        let mut owners = self
            .org_units
            .iter()
            .filter(|u| u.roles.iter().any(|r| r == role));
        let first = owners.next()?;
        match owners.next() {
            Some(_) => None,
            None => Some(&first.name),
        }
    }

    /// Role → unit map, usable to re-assemble the workflow.
    pub fn role_units(&self) -> BTreeMap<String, String> {
        self.roles().into_iter().map(|r| (r.name, r.unit)).collect()
    }
}
