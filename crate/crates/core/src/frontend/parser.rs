//! Recursive-descent parser for the `.cuta` block language.
//!
//! ```text
//! workflow    := "workflow" STRING "company" STRING "{" block "}"
//! block       := activity | sequence | case | parallel | multichoice | loop
//! activity    := "activity" "{" field* "}"
//! field       := ("subject" | "action" | "object" | "location" | "time_limit") ":" STRING
//!              | "role" ":" STRING ("in" STRING)?
//!              | ("in" | "out") ":" "[" (STRING ","?)* "]"
//! sequence    := "sequence" "{" block+ "}"
//! case        := "case" "{" ("when" STRING "{" block "}")+ "}"
//! parallel    := "parallel" "{" block block+ "}"
//! multichoice := "multichoice" "{" ("option" STRING "{" block "}")+ "}"
//! loop        := "loop" ("pre" | "post") STRING "{" block "}"
//! ```
//!
//! Cardinalities (`block+`, two parallel branches, ...) are left to the model
//! validator so that such mistakes get the same diagnostics whichever
//! frontend the model came through.

use std::collections::{BTreeMap, HashMap};

use super::lexer::{lex, Pos, Token, TokenKind};
use crate::cuta::{
    validate_workflow, Block, ChoiceOption, ConditionPosition, CutaWorkflow, MultipleChoice,
    SimpleActivity,
};
use crate::diagnostic::{Code, Diagnostic, SourceSpan, TreePath};

/// Nesting limit; deeper inputs are rejected instead of exhausting the stack.
pub const MAX_NESTING: usize = 128;

/// Parses and validates DSL text.
///
/// Every returned diagnostic carries a span, including the validator's.
pub fn parse_dsl(text: &str, file_name: &str) -> Result<CutaWorkflow, Vec<Diagnostic>> {
    let (tokens, lex_diags) = lex(text, file_name);
    if !lex_diags.is_empty() {
        return Err(lex_diags);
    }
    if let Some(d) = check_braces(&tokens, file_name) {
        return Err(vec![d]);
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        file: file_name,
        depth: 0,
        role_units: BTreeMap::new(),
        spans: HashMap::new(),
        soft: Vec::new(),
    };
    let (name, company, root, header) = p.workflow().map_err(|d| vec![d])?;
    if !p.soft.is_empty() {
        return Err(p.soft);
    }
    let units = p
        .role_units
        .into_iter()
        .map(|(role, (unit, _))| (role, unit))
        .collect();
    let w = CutaWorkflow::assemble(name, company, root, &units);
    let diags = validate_workflow(&w);
    if diags.is_empty() {
        return Ok(w);
    }
    Err(diags
        .into_iter()
        .map(|d| {
            let span = d
                .path
                .as_ref()
                .and_then(|path| p.spans.get(path))
                .unwrap_or(&header)
                .clone();
            d.at_span(span)
        })
        .collect())
}

/// Reports the first unbalanced brace: a stray `}` at its position, or an
/// unclosed `{` at end of file.
fn check_braces(tokens: &[Token], file: &str) -> Option<Diagnostic> {
    let mut open: Vec<&Token> = Vec::new();
    for tok in tokens {
        match tok.kind {
            TokenKind::LBrace => open.push(tok),
            TokenKind::RBrace => {
                if open.pop().is_none() {
                    return Some(
                        Diagnostic::error(
                            Code::UnexpectedToken,
                            "unexpected '}' without matching '{'",
                        )
                        .at_span(SourceSpan::new(file, tok.start, tok.end)),
                    );
                }
            }
            TokenKind::Eof => {
                if let Some(opener) = open.last() {
                    return Some(
                        Diagnostic::error(
                            Code::UnclosedBlock,
                            format!(
                                "unclosed block: '{{' opened at {}:{} is never closed",
                                opener.start.0, opener.start.1
                            ),
                        )
                        .at_span(SourceSpan::new(file, tok.start, tok.end)),
                    );
                }
            }
            _ => {}
        }
    }
    None
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    file: &'a str,
    depth: usize,
    /// role → (unit, span of its first declaration)
    role_units: BTreeMap<String, (String, SourceSpan)>,
    spans: HashMap<TreePath, SourceSpan>,
    /// Non-fatal problems found while parsing continues.
    soft: Vec<Diagnostic>,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &TokenKind {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if tok.kind != TokenKind::Eof {
            self.pos += 1;
        }
        tok
    }

    fn last_end(&self) -> Pos {
        self.tokens[self.pos.saturating_sub(1)].end
    }

    fn span(&self, start: Pos, end: Pos) -> SourceSpan {
        SourceSpan::new(self.file, start, end)
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        let tok = self.peek();
        let code = if tok.kind == TokenKind::Eof {
            Code::UnclosedBlock
        } else {
            Code::UnexpectedToken
        };
        Diagnostic::error(
            code,
            format!("expected {expected}, found {}", tok.kind.describe()),
        )
        .at_span(self.span(tok.start, tok.end))
    }

    fn expect(&mut self, kind: TokenKind, expected: &str) -> PResult<Token> {
        if self.peek().kind == kind {
            Ok(self.advance())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn keyword(&mut self, word: &str) -> PResult<Token> {
        match &self.peek().kind {
            TokenKind::Ident(s) if s == word => Ok(self.advance()),
            _ => Err(self.unexpected(&format!("'{word}'"))),
        }
    }

    fn string(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::Str(s) => {
                self.advance();
                Ok((s, self.span(tok.start, tok.end)))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn at_rbrace(&self) -> bool {
        matches!(self.peek().kind, TokenKind::RBrace | TokenKind::Eof)
    }

    fn workflow(&mut self) -> PResult<(String, String, Block, SourceSpan)> {
        let start = self.keyword("workflow")?.start;
        let (name, _) = self.string("workflow name string")?;
        self.keyword("company")?;
        let (company, _) = self.string("company name string")?;
        let header = self.span(start, self.last_end());
        self.expect(TokenKind::LBrace, "'{'")?;
        let root = self.block(&TreePath::root())?;
        self.expect(TokenKind::RBrace, "'}' closing the workflow")?;
        if self.peek().kind != TokenKind::Eof {
            return Err(self.unexpected("end of file after the workflow"));
        }
        Ok((name, company, root, header))
    }

    fn block(&mut self, path: &TreePath) -> PResult<Block> {
        if self.depth >= MAX_NESTING {
            let tok = self.peek();
            return Err(Diagnostic::error(
                Code::NestingTooDeep,
                format!("blocks nested deeper than {MAX_NESTING} levels"),
            )
            .at_span(self.span(tok.start, tok.end)));
        }
        self.depth += 1;
        let start = self.peek().start;
        let block = self.block_inner(path);
        self.depth -= 1;
        let block = block?;
        let span = self.span(start, self.last_end());
        self.spans.insert(path.clone(), span);
        Ok(block)
    }

    fn block_inner(&mut self, path: &TreePath) -> PResult<Block> {
        let word = match &self.peek().kind {
            TokenKind::Ident(s) => s.clone(),
            _ => return Err(self.unexpected("a block")),
        };
        match word.as_str() {
            "activity" => {
                self.advance();
                self.activity().map(Block::Activity)
            }
            "sequence" => {
                self.advance();
                self.expect(TokenKind::LBrace, "'{'")?;
                let mut blocks = Vec::new();
                while !self.at_rbrace() {
                    blocks.push(self.block(&path.index(blocks.len() as u32 + 1))?);
                }
                self.expect(TokenKind::RBrace, "'}'")?;
                Ok(Block::sequence(blocks))
            }
            "parallel" => {
                self.advance();
                self.expect(TokenKind::LBrace, "'{'")?;
                let base = path.kind("parallel");
                let mut blocks = Vec::new();
                while !self.at_rbrace() {
                    blocks.push(self.block(&base.index(blocks.len() as u32 + 1))?);
                }
                self.expect(TokenKind::RBrace, "'}'")?;
                Ok(Block::parallel(blocks))
            }
            "case" => {
                self.advance();
                let items = self.guarded_branches("when", &path.kind("case"))?;
                Ok(Block::case(items))
            }
            "multichoice" => {
                self.advance();
                let options = self.guarded_branches("option", &path.kind("multichoice"))?;
                Ok(Block::MultipleChoice(MultipleChoice {
                    options: options
                        .into_iter()
                        .map(|(condition, body)| ChoiceOption { condition, body })
                        .collect(),
                }))
            }
            "loop" => {
                self.advance();
                let position = match &self.peek().kind {
                    TokenKind::Ident(s) if s == "pre" => ConditionPosition::Begin,
                    TokenKind::Ident(s) if s == "post" => ConditionPosition::End,
                    _ => return Err(self.unexpected("'pre' or 'post'")),
                };
                self.advance();
                let (condition, _) = self.string("loop condition string")?;
                self.expect(TokenKind::LBrace, "'{'")?;
                let body = self.block(&path.kind("loop"))?;
                self.expect(TokenKind::RBrace, "'}'")?;
                Ok(Block::looped(condition, position, body))
            }
            _ => Err(self.unexpected("a block")),
        }
    }

    /// `"{" (KEYWORD STRING "{" block "}")* "}"`
    fn guarded_branches(
        &mut self,
        keyword: &str,
        base: &TreePath,
    ) -> PResult<Vec<(String, Block)>> {
        self.expect(TokenKind::LBrace, "'{'")?;
        let mut out = Vec::new();
        while !self.at_rbrace() {
            let path = base.index(out.len() as u32 + 1);
            let start = self.keyword(keyword)?.start;
            let (cond, _) = self.string("condition string")?;
            self.expect(TokenKind::LBrace, "'{'")?;
            let body = self.block(&path)?;
            self.expect(TokenKind::RBrace, "'}'")?;
            // The guard belongs to the branch, so widen the body span over it.
            let span = self.span(start, self.last_end());
            self.spans.insert(path, span);
            out.push((cond, body));
        }
        self.expect(TokenKind::RBrace, "'}'")?;
        Ok(out)
    }

    fn activity(&mut self) -> PResult<SimpleActivity> {
        let open = self.expect(TokenKind::LBrace, "'{'")?;
        let mut fields: BTreeMap<String, SourceSpan> = BTreeMap::new();
        let mut act = SimpleActivity::new("", "", "", "");
        while !self.at_rbrace() {
            let tok = self.peek().clone();
            let TokenKind::Ident(name) = tok.kind.clone() else {
                return Err(self.unexpected("an activity field name"));
            };
            let name_span = self.span(tok.start, tok.end);
            self.advance();
            if fields.contains_key(&name) {
                self.soft.push(
                    Diagnostic::error(Code::DuplicateField, format!("field '{name}' given twice"))
                        .at_span(name_span.clone()),
                );
            }
            self.expect(TokenKind::Colon, "':'")?;
            match name.as_str() {
                "subject" => act.subject = self.string("string")?.0,
                "action" => act.action = self.string("string")?.0,
                "object" => act.object = self.string("string")?.0,
                "location" => act.location = Some(self.string("string")?.0),
                "time_limit" => act.time_limit = Some(self.string("string")?.0),
                "role" => {
                    let (role, role_span) = self.string("role name string")?;
                    if matches!(self.peek_at(0), TokenKind::Ident(s) if s == "in")
                        && matches!(self.peek_at(1), TokenKind::Str(_))
                    {
                        self.advance();
                        let (unit, unit_span) = self.string("unit name string")?;
                        self.declare_role(&role, unit, role_span, unit_span);
                    }
                    act.role = role;
                }
                "in" => act.documents_in = self.string_list()?,
                "out" => act.documents_out = self.string_list()?,
                _ => {
                    return Err(Diagnostic::error(
                        Code::UnexpectedToken,
                        format!("unknown activity field '{name}'"),
                    )
                    .at_span(name_span))
                }
            }
            fields.insert(name, name_span);
        }
        let close = self.expect(TokenKind::RBrace, "'}'")?;
        for required in ["subject", "action", "object", "role"] {
            if !fields.contains_key(required) {
                self.soft.push(
                    Diagnostic::error(
                        Code::MissingField,
                        format!("activity is missing field '{required}'"),
                    )
                    .at_span(self.span(open.start, close.end)),
                );
            }
        }
        Ok(act)
    }

    fn declare_role(
        &mut self,
        role: &str,
        unit: String,
        role_span: SourceSpan,
        unit_span: SourceSpan,
    ) {
        match self.role_units.get(role) {
            None => {
                self.role_units.insert(role.to_string(), (unit, role_span));
            }
            Some((existing, first)) if *existing != unit => {
                let msg = format!(
                    "role '{role}' declared in unit '{unit}' but was already declared in '{existing}' at {first}"
                );
                self.soft
                    .push(Diagnostic::error(Code::ConflictingRoleUnit, msg).at_span(unit_span));
            }
            Some(_) => {}
        }
    }

    fn string_list(&mut self) -> PResult<Vec<String>> {
        self.expect(TokenKind::LBracket, "'['")?;
        let mut out = Vec::new();
        loop {
            match &self.peek().kind {
                TokenKind::RBracket => {
                    self.advance();
                    return Ok(out);
                }
                TokenKind::Str(_) => {
                    out.push(self.string("string")?.0);
                    if self.peek().kind == TokenKind::Comma {
                        self.advance();
                    }
                }
                _ => return Err(self.unexpected("a document name string or ']'")),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"workflow "W" company "ACME" { activity { subject:"Ann" action:"files" object:"the form" role:"Clerk" in "Sales" } }"#;

    fn err(src: &str) -> Vec<Diagnostic> {
        parse_dsl(src, "t.cuta").expect_err("should fail")
    }

    #[test]
    fn minimal_source() {
        let w = parse_dsl(MINIMAL, "t.cuta").unwrap();
        assert_eq!(w.name, "W");
        assert_eq!(w.company, "ACME");
        assert_eq!(
            w.root,
            Block::Activity(SimpleActivity::new("Ann", "files", "the form", "Clerk"))
        );
        assert_eq!(w.unit_of("Clerk"), Some("Sales"));
    }

    #[test]
    fn single_branch_parallel_is_diagnosed_with_span() {
        let src = r#"workflow "W" company "ACME" {
  parallel {
    activity { subject:"Ann" action:"files" object:"the form" role:"Clerk" in "Sales" }
  }
}"#;
        let d = err(src);
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("parallel requires ≥2 branches"));
        let span = d[0].span.as_ref().unwrap();
        assert_eq!((span.start_line, span.start_col), (2, 3));
        assert_eq!((span.end_line, span.end_col), (4, 4));
    }

    #[test]
    fn truncated_input_reports_unclosed_block_at_eof() {
        let d = err(r#"workflow "W" {"#);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, Code::UnclosedBlock);
        assert!(d[0].message.starts_with("unclosed block"));
        let span = d[0].span.as_ref().unwrap();
        assert_eq!((span.start_line, span.start_col), (1, 15));
    }

    #[test]
    fn later_uses_may_omit_unit() {
        let src = r#"workflow "W" company "ACME" { sequence {
            activity { subject:"Ann" action:"files" object:"the form" role:"Clerk" in "Sales" in:["Order"] }
            activity { subject:"Bob" action:"checks" object:"the form" role:"Clerk" in:["Order"] out:["Receipt",] }
        } }"#;
        let w = parse_dsl(src, "t.cuta").unwrap();
        assert_eq!(w.documents.len(), 2);
        assert_eq!(w.org_units.len(), 1);
    }

    #[test]
    fn conflicting_unit_and_unresolved_role() {
        let src = r#"workflow "W" company "ACME" { sequence {
            activity { subject:"Ann" action:"files" object:"x" role:"Clerk" in "Sales" }
            activity { subject:"Ann" action:"files" object:"x" role:"Clerk" in "HR" }
        } }"#;
        let d = err(src);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, Code::ConflictingRoleUnit);

        let src = r#"workflow "W" company "ACME" { activity { subject:"Ann" action:"files" object:"x" role:"Ghost" } }"#;
        let d = err(src);
        assert_eq!(d[0].code, Code::UnresolvedRole);
        assert!(d[0].span.is_some());
    }

    #[test]
    fn missing_and_duplicate_fields() {
        let d = err(
            r#"workflow "W" company "A" { activity { subject:"a" subject:"b" action:"x" role:"R" in "U" } }"#,
        );
        let codes: Vec<Code> = d.iter().map(|d| d.code).collect();
        assert_eq!(codes, vec![Code::DuplicateField, Code::MissingField]);
    }

    #[test]
    fn unexpected_tokens() {
        let d = err(r#"workflow "W" company "A" { teleport { } }"#);
        assert_eq!(d[0].code, Code::UnexpectedToken);
        assert!(d[0].message.contains("expected a block"));
        let d = err(r#"workflow "W" company "A" { loop maybe "c" { } }"#);
        assert!(d[0].message.contains("'pre' or 'post'"));
        let d = err(r#"workflow "W" company "A" { } }"#);
        assert_eq!(d[0].code, Code::UnexpectedToken);
    }

    #[test]
    fn deep_nesting_is_rejected_not_overflowed() {
        let n = 5000;
        let src = format!(
            "workflow \"W\" company \"A\" {{ {} {} }}",
            "sequence { ".repeat(n),
            "}".repeat(n)
        );
        let d = err(&src);
        assert_eq!(d[0].code, Code::NestingTooDeep);
    }

    #[test]
    fn loops_and_guards() {
        let src = r#"workflow "W" company "A" {
  sequence {
    loop pre "more items" { activity { subject:"a" action:"b" object:"c" role:"R" in "U" } }
    case {
      when "ok" { activity { subject:"a" action:"b" object:"c" role:"R" } }
      when "not ok" { loop post "retry" { activity { subject:"a" action:"b" object:"c" role:"R" } } }
    }
    multichoice {
      option "x" { activity { subject:"a" action:"b" object:"c" role:"R" } }
      option "y" { activity { subject:"a" action:"b" object:"c" role:"R" } }
    }
  }
}"#;
        let w = parse_dsl(src, "t.cuta").unwrap();
        let kinds: Vec<_> = w
            .root
            .children()
            .iter()
            .map(|b| b.kind().as_str())
            .collect();
        assert_eq!(kinds, vec!["loop", "case", "multichoice"]);
    }
}
