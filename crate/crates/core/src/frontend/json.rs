//! `.cuta.json` interchange.
//!
//! ```json
//! { "name": "W", "company": "ACME",
//!   "body": { "kind": "sequence", "elements": [ { "kind": "activity", ... } ] } }
//! ```
//!
//! Activities carry their role's `unit`; documents and organizational units
//! are derived from the tree on load, as in the DSL.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::cuta::{
    validate_workflow, Block, BlockKind, Case, CaseItem, ChoiceOption, ConditionPosition,
    CutaWorkflow, Loop, MultipleChoice, Parallel, SimpleActivity,
};
use crate::diagnostic::{Code, Diagnostic, SourceSpan, TreePath};

pub fn to_json(w: &CutaWorkflow) -> String {
    let doc = json!({
        "name": w.name,
        "company": w.company,
        "body": block_to_value(w, &w.root),
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("json values always serialize");
    text.push('\n');
    text
}

fn block_to_value(w: &CutaWorkflow, block: &Block) -> Value {
    let kind = block.kind().as_str();
    match block {
        Block::Activity(a) => {
            let mut m = Map::new();
            m.insert("kind".into(), kind.into());
            m.insert("subject".into(), a.subject.clone().into());
            m.insert("action".into(), a.action.clone().into());
            m.insert("object".into(), a.object.clone().into());
            m.insert("role".into(), a.role.clone().into());
            if let Some(unit) = w.unit_of(&a.role) {
                m.insert("unit".into(), unit.into());
            }
            m.insert("in".into(), a.documents_in.clone().into());
            m.insert("out".into(), a.documents_out.clone().into());
            if let Some(loc) = &a.location {
                m.insert("location".into(), loc.clone().into());
            }
            if let Some(t) = &a.time_limit {
                m.insert("time_limit".into(), t.clone().into());
            }
            Value::Object(m)
        }
        Block::Sequence(s) => json!({
            "kind": kind,
            "elements": s.elements.iter().map(|e| block_to_value(w, &e.block)).collect::<Vec<_>>(),
        }),
        Block::Case(c) => json!({
            "kind": kind,
            "items": c.items.iter().map(|i| json!({
                "number": i.number,
                "condition": i.condition,
                "body": block_to_value(w, &i.body),
            })).collect::<Vec<_>>(),
        }),
        Block::Parallel(p) => json!({
            "kind": kind,
            "branches": p.branches.iter().map(|b| block_to_value(w, b)).collect::<Vec<_>>(),
        }),
        Block::MultipleChoice(m) => json!({
            "kind": kind,
            "options": m.options.iter().map(|o| json!({
                "condition": o.condition,
                "body": block_to_value(w, &o.body),
            })).collect::<Vec<_>>(),
        }),
        Block::Loop(l) => json!({
            "kind": kind,
            "condition": l.condition,
            "condition_position": l.position.as_str(),
            "body": block_to_value(w, &l.body),
        }),
    }
}

/// Reads and validates a `.cuta.json` document.
pub fn from_json(text: &str) -> Result<CutaWorkflow, Vec<Diagnostic>> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        let line = e.line().max(1) as u32;
        let col = e.column().max(1) as u32;
        vec![
            Diagnostic::error(Code::MalformedJson, format!("malformed JSON: {e}"))
                .at_span(SourceSpan::point("<json>", line, col)),
        ]
    })?;
    let mut r = Reader {
        role_units: BTreeMap::new(),
        diags: Vec::new(),
    };
    let root = TreePath::root();
    let Some(obj) = value.as_object() else {
        return Err(vec![shape(&root, "workflow must be a JSON object")]);
    };
    let name = r.text(obj, "name", &root);
    let company = r.text(obj, "company", &root);
    let body = match obj.get("body") {
        Some(b) => r.block(b, &root),
        None => {
            r.diags.push(shape(&root, "missing field 'body'"));
            None
        }
    };
    let (Some(name), Some(company), Some(body)) = (name, company, body) else {
        return Err(r.diags);
    };
    if !r.diags.is_empty() {
        return Err(r.diags);
    }
    let w = CutaWorkflow::assemble(name, company, body, &r.role_units);
    let diags = validate_workflow(&w);
    if diags.is_empty() {
        Ok(w)
    } else {
        Err(diags)
    }
}

fn shape(path: &TreePath, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error(Code::InvalidJsonShape, msg).at_path(path.clone())
}

struct Reader {
    role_units: BTreeMap<String, String>,
    diags: Vec<Diagnostic>,
}

impl Reader {
    fn text(&mut self, obj: &Map<String, Value>, key: &str, path: &TreePath) -> Option<String> {
        match obj.get(key) {
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => {
                self.diags
                    .push(shape(path, format!("field '{key}' must be a string")));
                None
            }
            None => {
                self.diags
                    .push(shape(path, format!("missing field '{key}'")));
                None
            }
        }
    }

    fn opt_text(&mut self, obj: &Map<String, Value>, key: &str, path: &TreePath) -> Option<String> {
        if obj.contains_key(key) {
            self.text(obj, key, path)
        } else {
            None
        }
    }

    fn array<'v>(
        &mut self,
        obj: &'v Map<String, Value>,
        key: &str,
        path: &TreePath,
    ) -> Option<&'v [Value]> {
        match obj.get(key) {
            Some(Value::Array(a)) => Some(a),
            Some(_) => {
                self.diags
                    .push(shape(path, format!("field '{key}' must be an array")));
                None
            }
            None => {
                self.diags
                    .push(shape(path, format!("missing field '{key}'")));
                None
            }
        }
    }

    fn strings(&mut self, obj: &Map<String, Value>, key: &str, path: &TreePath) -> Vec<String> {
        if !obj.contains_key(key) {
            return Vec::new();
        }
        let Some(items) = self.array(obj, key, path) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for item in items {
            match item.as_str() {
                Some(s) => out.push(s.to_string()),
                None => self
                    .diags
                    .push(shape(path, format!("entries of '{key}' must be strings"))),
            }
        }
        out
    }

    fn body(&mut self, obj: &Map<String, Value>, path: &TreePath) -> Option<Block> {
        match obj.get("body") {
            Some(b) => self.block(b, path),
            None => {
                self.diags.push(shape(path, "missing field 'body'"));
                None
            }
        }
    }

    fn block(&mut self, value: &Value, path: &TreePath) -> Option<Block> {
        let Some(obj) = value.as_object() else {
            self.diags.push(shape(path, "block must be a JSON object"));
            return None;
        };
        let kind_name = self.text(obj, "kind", path)?;
        let Some(kind) = BlockKind::from_name(&kind_name) else {
            self.diags.push(
                Diagnostic::error(
                    Code::UnknownBlockKind,
                    format!("unknown block kind '{kind_name}'"),
                )
                .at_path(path.clone()),
            );
            return None;
        };
        match kind {
            BlockKind::Activity => self.activity(obj, path).map(Block::Activity),
            BlockKind::Sequence => {
                let elements = self.array(obj, "elements", path)?;
                let blocks: Vec<Option<Block>> = elements
                    .iter()
                    .enumerate()
                    .map(|(i, e)| self.block(e, &path.index(i as u32 + 1)))
                    .collect();
                Some(Block::sequence(
                    blocks.into_iter().collect::<Option<Vec<_>>>()?,
                ))
            }
            BlockKind::Parallel => {
                let base = path.kind("parallel");
                let branches = self.array(obj, "branches", path)?;
                let blocks: Vec<Option<Block>> = branches
                    .iter()
                    .enumerate()
                    .map(|(i, b)| self.block(b, &base.index(i as u32 + 1)))
                    .collect();
                Some(Block::Parallel(Parallel {
                    branches: blocks.into_iter().collect::<Option<Vec<_>>>()?,
                }))
            }
            BlockKind::Case => {
                let base = path.kind("case");
                let items = self.array(obj, "items", path)?;
                let mut out = Vec::new();
                let mut ok = true;
                for (i, item) in items.iter().enumerate() {
                    let item_path = base.index(i as u32 + 1);
                    let Some(io) = item.as_object() else {
                        self.diags
                            .push(shape(&item_path, "case item must be a JSON object"));
                        ok = false;
                        continue;
                    };
                    let number = match io.get("number").and_then(Value::as_u64) {
                        Some(n) if n <= u32::MAX as u64 => Some(n as u32),
                        _ => {
                            self.diags.push(shape(
                                &item_path,
                                "case item needs a non-negative integer 'number'",
                            ));
                            None
                        }
                    };
                    let condition = self.text(io, "condition", &item_path);
                    let body = self.body(io, &item_path);
                    match (number, condition, body) {
                        (Some(number), Some(condition), Some(body)) => out.push(CaseItem {
                            number,
                            condition,
                            body,
                        }),
                        _ => ok = false,
                    }
                }
                ok.then_some(Block::Case(Case { items: out }))
            }
            BlockKind::MultipleChoice => {
                let base = path.kind("multichoice");
                let options = self.array(obj, "options", path)?;
                let mut out = Vec::new();
                let mut ok = true;
                for (i, opt) in options.iter().enumerate() {
                    let opt_path = base.index(i as u32 + 1);
                    let Some(oo) = opt.as_object() else {
                        self.diags
                            .push(shape(&opt_path, "multichoice option must be a JSON object"));
                        ok = false;
                        continue;
                    };
                    let condition = self.text(oo, "condition", &opt_path);
                    let body = self.body(oo, &opt_path);
                    match (condition, body) {
                        (Some(condition), Some(body)) => out.push(ChoiceOption { condition, body }),
                        _ => ok = false,
                    }
                }
                ok.then_some(Block::MultipleChoice(MultipleChoice { options: out }))
            }
            BlockKind::Loop => {
                let condition = self.text(obj, "condition", path);
                let position = match self.text(obj, "condition_position", path)?.as_str() {
                    "begin" => Some(ConditionPosition::Begin),
                    "end" => Some(ConditionPosition::End),
                    other => {
                        self.diags.push(shape(
                            path,
                            format!("condition_position must be \"begin\" or \"end\", found \"{other}\""),
                        ));
                        None
                    }
                };
                let body = self.body(obj, &path.kind("loop"));
                Some(Block::Loop(Loop {
                    condition: condition?,
                    position: position?,
                    body: Box::new(body?),
                }))
            }
        }
    }

    fn activity(&mut self, obj: &Map<String, Value>, path: &TreePath) -> Option<SimpleActivity> {
        let subject = self.text(obj, "subject", path);
        let action = self.text(obj, "action", path);
        let object = self.text(obj, "object", path);
        let role = self.text(obj, "role", path);
        let unit = self.opt_text(obj, "unit", path);
        let documents_in = self.strings(obj, "in", path);
        let documents_out = self.strings(obj, "out", path);
        let location = self.opt_text(obj, "location", path);
        let time_limit = self.opt_text(obj, "time_limit", path);
        let role = role?;
        if let Some(unit) = unit {
            match self.role_units.get(&role) {
                Some(existing) if *existing != unit => self.diags.push(
                    Diagnostic::error(
                        Code::ConflictingRoleUnit,
                        format!("role '{role}' declared in unit '{unit}' but was already declared in '{existing}'"),
                    )
                    .at_path(path.clone()),
                ),
                Some(_) => {}
                None => {
                    self.role_units.insert(role.clone(), unit);
                }
            }
        }
        Some(SimpleActivity {
            subject: subject?,
            action: action?,
            object: object?,
            role,
            documents_in,
            documents_out,
            location,
            time_limit,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CutaWorkflow {
        let a = SimpleActivity::new("Ann", "files", "the form", "Clerk").reads(["Order"]);
        let mut b = SimpleActivity::new("Bob", "ships", "the parcel", "Driver").writes(["Receipt"]);
        b.location = Some("warehouse".into());
        let root = Block::sequence([
            Block::looped("retry", ConditionPosition::End, a.into()),
            Block::case([("ok", b.clone().into()), ("not ok", b.into())]),
        ]);
        let units = BTreeMap::from([
            ("Clerk".to_string(), "Sales".to_string()),
            ("Driver".to_string(), "Logistics".to_string()),
        ]);
        CutaWorkflow::assemble("W", "ACME", root, &units)
    }

    #[test]
    fn round_trip() {
        let w = sample();
        let text = to_json(&w);
        assert_eq!(from_json(&text).unwrap(), w);
        assert!(text.contains("\"condition_position\": \"end\""));
        assert!(text.contains("\"kind\": \"case\""));
    }

    #[test]
    fn unknown_kind() {
        let text = r#"{"name":"W","company":"A","body":{"kind":"sequence","elements":[{"kind":"teleport"}]}}"#;
        let d = from_json(text).unwrap_err();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, Code::UnknownBlockKind);
        assert_eq!(d[0].message, "unknown block kind 'teleport'");
        assert_eq!(d[0].path.as_ref().unwrap().to_string(), "root/1");
    }

    #[test]
    fn malformed_json_has_position() {
        let d = from_json("{\"name\": ").unwrap_err();
        assert_eq!(d[0].code, Code::MalformedJson);
        assert!(d[0].span.is_some());
    }

    #[test]
    fn invariant_violations_are_delegated() {
        let text = r#"{"name":"W","company":"A","body":{"kind":"parallel","branches":[
            {"kind":"activity","subject":"a","action":"b","object":"c","role":"R","unit":"U"}]}}"#;
        let d = from_json(text).unwrap_err();
        assert_eq!(d[0].code, Code::ParallelArity);
    }

    #[test]
    fn bad_position_and_shape() {
        let text = r#"{"name":"W","company":"A","body":{"kind":"loop","condition":"c","condition_position":"middle",
            "body":{"kind":"activity","subject":"a","action":"b","object":"c","role":"R","unit":"U"}}}"#;
        let d = from_json(text).unwrap_err();
        assert!(d[0].message.contains("\"begin\" or \"end\""));
        let d = from_json("[1,2]").unwrap_err();
        assert_eq!(d[0].code, Code::InvalidJsonShape);
    }
}
