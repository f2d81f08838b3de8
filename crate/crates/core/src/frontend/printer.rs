use std::collections::BTreeSet;
use std::fmt::Write;

use crate::cuta::{Block, ConditionPosition, CutaWorkflow, SimpleActivity};

/// Canonical DSL rendering: 2-space indent, fields in fixed order, a role's
/// unit written at its first use only.
pub fn print_dsl(w: &CutaWorkflow) -> String {
    let mut p = Printer {
        w,
        out: String::new(),
        declared: BTreeSet::new(),
    };
    writeln!(
        p.out,
        "workflow {} company {} {{",
        quote(&w.name),
        quote(&w.company)
    )
    .unwrap();
    p.block(&w.root, 1);
    p.out.push_str("}\n");
    p.out
}

/// Double-quotes `s`, escaping `"` and `\`.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if matches!(c, '"' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

struct Printer<'a> {
    w: &'a CutaWorkflow,
    out: String,
    declared: BTreeSet<&'a str>,
}

impl<'a> Printer<'a> {
    fn line(&mut self, indent: usize, text: &str) {
        for _ in 0..indent {
            self.out.push_str("  ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn block(&mut self, block: &'a Block, indent: usize) {
        match block {
            Block::Activity(a) => self.activity(a, indent),
            Block::Sequence(s) => {
                self.line(indent, "sequence {");
                for e in &s.elements {
                    self.block(&e.block, indent + 1);
                }
                self.line(indent, "}");
            }
            Block::Parallel(p) => {
                self.line(indent, "parallel {");
                for b in &p.branches {
                    self.block(b, indent + 1);
                }
                self.line(indent, "}");
            }
            Block::Case(c) => {
                self.line(indent, "case {");
                for item in &c.items {
                    self.guarded("when", &item.condition, &item.body, indent + 1);
                }
                self.line(indent, "}");
            }
            Block::MultipleChoice(m) => {
                self.line(indent, "multichoice {");
                for opt in &m.options {
                    self.guarded("option", &opt.condition, &opt.body, indent + 1);
                }
                self.line(indent, "}");
            }
            Block::Loop(l) => {
                let pos = match l.position {
                    ConditionPosition::Begin => "pre",
                    ConditionPosition::End => "post",
                };
                self.line(indent, &format!("loop {pos} {} {{", quote(&l.condition)));
                self.block(&l.body, indent + 1);
                self.line(indent, "}");
            }
        }
    }

    fn guarded(&mut self, keyword: &str, cond: &str, body: &'a Block, indent: usize) {
        self.line(indent, &format!("{keyword} {} {{", quote(cond)));
        self.block(body, indent + 1);
        self.line(indent, "}");
    }

    fn activity(&mut self, a: &'a SimpleActivity, indent: usize) {
        self.line(indent, "activity {");
        let inner = indent + 1;
        self.line(inner, &format!("subject: {}", quote(&a.subject)));
        self.line(inner, &format!("action: {}", quote(&a.action)));
        self.line(inner, &format!("object: {}", quote(&a.object)));
        let mut role = format!("role: {}", quote(&a.role));
        if self.declared.insert(&a.role) {
            if let Some(unit) = self.w.unit_of(&a.role) {
                write!(role, " in {}", quote(unit)).unwrap();
            }
        }
        self.line(inner, &role);
        for (name, docs) in [("in", &a.documents_in), ("out", &a.documents_out)] {
            if !docs.is_empty() {
                let list: Vec<String> = docs.iter().map(|d| quote(d)).collect();
                self.line(inner, &format!("{name}: [{}]", list.join(", ")));
            }
        }
        if let Some(loc) = &a.location {
            self.line(inner, &format!("location: {}", quote(loc)));
        }
        if let Some(t) = &a.time_limit {
            self.line(inner, &format!("time_limit: {}", quote(t)));
        }
        self.line(indent, "}");
    }
}
