//! Diagnostics shared by the model validator, the frontends and the BPMN
//! well-formedness checker.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

/// The invariant (or syntax rule) a diagnostic reports on.
///
/// Every diagnostic names exactly one code, so tools can match on violation
/// kinds without parsing message text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Code {
    // source model
    EmptyWorkflowName,
    EmptyCompany,
    EmptyActivityField,
    EmptyRole,
    UnresolvedRole,
    AmbiguousRole,
    EmptyOrgUnit,
    DuplicateOrgUnit,
    DuplicateDocumentRef,
    UnresolvedDocument,
    DuplicateDocument,
    EmptyDocumentName,
    EmptySequence,
    SeqNoNotContiguous,
    CaseArity,
    CaseNumberNotContiguous,
    EmptyCondition,
    ParallelArity,
    MultiChoiceArity,
    // concrete syntax
    Lex,
    UnexpectedToken,
    UnclosedBlock,
    MissingField,
    DuplicateField,
    ConflictingRoleUnit,
    NestingTooDeep,
    // json interchange
    MalformedJson,
    UnknownBlockKind,
    InvalidJsonShape,
    // target graph
    StartEventCount,
    EndEventCount,
    DuplicateNodeId,
    EmptyNodeId,
    DanglingFlowRef,
    SelfLoop,
    UnexpectedCondition,
    LaneAssignment,
    DuplicateLane,
    EmptyPoolName,
    GatewayPairing,
    DataObjectRef,
    DuplicateDataObject,
    NodeOffPath,
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("code serializes to a string");
        f.write_str(s.as_str().unwrap_or("unknown"))
    }
}

/// 1-based source region.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<String>, start: (u32, u32), end: (u32, u32)) -> Self {
        debug_assert!(start <= end);
        SourceSpan {
            file: file.into(),
            start_line: start.0,
            start_col: start.1,
            end_line: end.0,
            end_col: end.1,
        }
    }

    pub fn point(file: impl Into<String>, line: u32, col: u32) -> Self {
        Self::new(file, (line, col), (line, col))
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathSegment {
    Index(u32),
    Kind(&'static str),
}

/// Location of a block inside the source tree, rendered like `root/2/case/1`.
///
/// Sequence children are addressed by SeqNo directly; the children of the
/// other compound blocks are prefixed with the block kind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TreePath(Vec<PathSegment>);

impl TreePath {
    pub fn root() -> Self {
        TreePath(Vec::new())
    }

    pub fn index(&self, i: u32) -> Self {
        let mut segs = self.0.clone();
        segs.push(PathSegment::Index(i));
        TreePath(segs)
    }

    pub fn kind(&self, kind: &'static str) -> Self {
        let mut segs = self.0.clone();
        segs.push(PathSegment::Kind(kind));
        TreePath(segs)
    }

    pub fn segments(&self) -> &[PathSegment] {
        &self.0
    }
}

impl Ord for PathSegment {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (PathSegment::Index(a), PathSegment::Index(b)) => a.cmp(b),
            (PathSegment::Kind(a), PathSegment::Kind(b)) => a.cmp(b),
            (PathSegment::Index(_), PathSegment::Kind(_)) => Ordering::Less,
            (PathSegment::Kind(_), PathSegment::Index(_)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for PathSegment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TreePath {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl PartialOrd for TreePath {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TreePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("root")?;
        for seg in &self.0 {
            match seg {
                PathSegment::Index(i) => write!(f, "/{i}")?,
                PathSegment::Kind(k) => write!(f, "/{k}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for TreePath {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<TreePath>,
}

impl Diagnostic {
    pub fn error(code: Code, message: impl Into<String>) -> Self {
        let message = message.into();
        debug_assert!(!message.is_empty());
        Diagnostic {
            severity: Severity::Error,
            code,
            message,
            span: None,
            path: None,
        }
    }

    pub fn at_path(mut self, path: TreePath) -> Self {
        self.path = Some(path);
        self
    }

    pub fn at_span(mut self, span: SourceSpan) -> Self {
        self.span = Some(span);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(span) = &self.span {
            write!(f, "{span}: ")?;
        }
        write!(f, "{}[{}]: {}", self.severity, self.code, self.message)?;
        if let Some(path) = &self.path {
            write!(f, " (at {path})")?;
        }
        Ok(())
    }
}

/// Sorts diagnostics by tree path; diagnostics without a path come first.
/// The sort is stable, so emission order breaks ties.
pub fn sort_by_path(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| a.path.cmp(&b.path));
}
