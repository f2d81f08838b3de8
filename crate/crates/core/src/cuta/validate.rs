//! Structural validation of the source metamodel.

use std::collections::BTreeMap;

use super::model::{Block, CutaWorkflow, SimpleActivity};
use crate::diagnostic::{sort_by_path, Code, Diagnostic, TreePath};

/// Returns one diagnostic per violated invariant, ordered by tree path.
/// An empty result means the workflow is valid.
pub fn validate_workflow(w: &CutaWorkflow) -> Vec<Diagnostic> {
    let mut v = Validator {
        w,
        diags: Vec::new(),
    };
    v.workflow();
    let mut diags = v.diags;
    sort_by_path(&mut diags);
    diags
}

struct Validator<'a> {
    w: &'a CutaWorkflow,
    diags: Vec<Diagnostic>,
}

impl Validator<'_> {
    fn report(&mut self, code: Code, message: impl Into<String>, path: &TreePath) {
        self.diags
            .push(Diagnostic::error(code, message).at_path(path.clone()));
    }

    fn workflow(&mut self) {
        let root = TreePath::root();
        if self.w.name.trim().is_empty() {
            self.report(
                Code::EmptyWorkflowName,
                "workflow name must not be empty",
                &root,
            );
        }
        if self.w.company.trim().is_empty() {
            self.report(Code::EmptyCompany, "company must not be empty", &root);
        }
        self.registries(&root);
        self.block(&self.w.root, &root);
    }

    fn registries(&mut self, root: &TreePath) {
        let mut unit_names: BTreeMap<&str, usize> = BTreeMap::new();
        let mut role_owners: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for unit in &self.w.org_units {
            if unit.name.trim().is_empty() {
                self.report(
                    Code::EmptyOrgUnit,
                    "organizational unit name must not be empty",
                    root,
                );
            }
            *unit_names.entry(&unit.name).or_default() += 1;
            for role in &unit.roles {
                role_owners.entry(role).or_default().push(&unit.name);
            }
        }
        for (name, count) in unit_names {
            if count > 1 {
                self.report(
                    Code::DuplicateOrgUnit,
                    format!("organizational unit '{name}' is defined {count} times"),
                    root,
                );
            }
        }
        for (role, owners) in role_owners {
            if owners.len() > 1 {
                self.report(
                    Code::AmbiguousRole,
                    format!(
                        "role '{role}' must belong to exactly one organizational unit, found {}",
                        owners.join(", ")
                    ),
                    root,
                );
            }
        }

        let mut doc_names: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in &self.w.documents {
            if doc.name.trim().is_empty() {
                self.report(
                    Code::EmptyDocumentName,
                    "document name must not be empty",
                    root,
                );
            }
            *doc_names.entry(&doc.name).or_default() += 1;
        }
        for (name, count) in doc_names {
            if count > 1 {
                self.report(
                    Code::DuplicateDocument,
                    format!("document '{name}' is defined {count} times"),
                    root,
                );
            }
        }
    }

    fn block(&mut self, block: &Block, path: &TreePath) {
        match block {
            Block::Activity(a) => self.activity(a, path),
            Block::Sequence(s) => {
                if s.elements.is_empty() {
                    self.report(
                        Code::EmptySequence,
                        "sequence requires at least one element",
                        path,
                    );
                }
                if !s
                    .elements
                    .iter()
                    .map(|e| e.seq_no)
                    .eq(1..=s.elements.len() as u32)
                {
                    let found: Vec<String> =
                        s.elements.iter().map(|e| e.seq_no.to_string()).collect();
                    self.report(
                        Code::SeqNoNotContiguous,
                        format!("SeqNo must be contiguous 1..k, found ({})", found.join(",")),
                        path,
                    );
                }
                for (i, e) in s.elements.iter().enumerate() {
                    self.block(&e.block, &path.index(i as u32 + 1));
                }
            }
            Block::Case(c) => {
                if c.items.len() < 2 {
                    self.report(
                        Code::CaseArity,
                        format!("case requires ≥2 items, found {}", c.items.len()),
                        path,
                    );
                }
                if !c
                    .items
                    .iter()
                    .map(|i| i.number)
                    .eq(1..=c.items.len() as u32)
                {
                    let found: Vec<String> = c.items.iter().map(|i| i.number.to_string()).collect();
                    self.report(
                        Code::CaseNumberNotContiguous,
                        format!(
                            "case item numbers must be contiguous 1..k, found ({})",
                            found.join(",")
                        ),
                        path,
                    );
                }
                let base = path.kind("case");
                for (i, item) in c.items.iter().enumerate() {
                    let item_path = base.index(i as u32 + 1);
                    if item.condition.trim().is_empty() {
                        self.report(
                            Code::EmptyCondition,
                            "case item condition must not be empty",
                            &item_path,
                        );
                    }
                    self.block(&item.body, &item_path);
                }
            }
            Block::Parallel(p) => {
                if p.branches.len() < 2 {
                    self.report(
                        Code::ParallelArity,
                        format!("parallel requires ≥2 branches, found {}", p.branches.len()),
                        path,
                    );
                }
                let base = path.kind("parallel");
                for (i, b) in p.branches.iter().enumerate() {
                    self.block(b, &base.index(i as u32 + 1));
                }
            }
            Block::MultipleChoice(m) => {
                if m.options.len() < 2 {
                    self.report(
                        Code::MultiChoiceArity,
                        format!("multichoice requires ≥2 options, found {}", m.options.len()),
                        path,
                    );
                }
                let base = path.kind("multichoice");
                for (i, opt) in m.options.iter().enumerate() {
                    let opt_path = base.index(i as u32 + 1);
                    if opt.condition.trim().is_empty() {
                        self.report(
                            Code::EmptyCondition,
                            "multichoice option condition must not be empty",
                            &opt_path,
                        );
                    }
                    self.block(&opt.body, &opt_path);
                }
            }
            Block::Loop(l) => {
                if l.condition.trim().is_empty() {
                    self.report(
                        Code::EmptyCondition,
                        "loop condition must not be empty",
                        path,
                    );
                }
                self.block(&l.body, &path.kind("loop"));
            }
        }
    }

    fn activity(&mut self, a: &SimpleActivity, path: &TreePath) {
        for (field, value) in [
            ("subject", &a.subject),
            ("action", &a.action),
            ("object", &a.object),
        ] {
            if value.trim().is_empty() {
                self.report(
                    Code::EmptyActivityField,
                    format!("activity {field} must not be empty"),
                    path,
                );
            }
        }
        if a.role.trim().is_empty() {
            self.report(Code::EmptyRole, "activity role must not be empty", path);
        } else if !self.w.org_units.iter().any(|u| u.roles.contains(&a.role)) {
            self.report(
                Code::UnresolvedRole,
                format!(
                    "role '{}' does not belong to any organizational unit",
                    a.role
                ),
                path,
            );
        }
        for (dir, list) in [("in", &a.documents_in), ("out", &a.documents_out)] {
            for (i, doc) in list.iter().enumerate() {
                if list[..i].contains(doc) {
                    self.report(
                        Code::DuplicateDocumentRef,
                        format!("document '{doc}' is listed twice in '{dir}'"),
                        path,
                    );
                }
                if !self.w.documents.iter().any(|d| &d.name == doc) {
                    self.report(
                        Code::UnresolvedDocument,
                        format!("document '{doc}' is not declared in the workflow"),
                        path,
                    );
                }
            }
        }
    }
}
