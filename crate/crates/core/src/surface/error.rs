use std::fmt;

use serde::Serialize;

use crate::syntax::Path;

/// 1-based line and column.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span {
            start: self.start,
            end: other.end,
        }
    }
}

/// Source spans mirroring the shape of a parsed node, child for child, in
/// the numbering used by [`Path`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpanTree {
    pub span: Span,
    pub children: Vec<SpanTree>,
}

impl SpanTree {
    pub fn leaf(span: Span) -> SpanTree {
        SpanTree {
            span,
            children: Vec::new(),
        }
    }

    pub fn node(span: Span, children: Vec<SpanTree>) -> SpanTree {
        SpanTree { span, children }
    }

    /// Span of the deepest node along `path` that the tree knows about.
    pub fn locate(&self, path: &Path) -> Span {
        let mut node = self;
        for &i in &path.0 {
            match node.children.get(i) {
                Some(c) => node = c,
                None => break,
            }
        }
        node.span
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParseErrorKind {
    Lexical,
    Syntax,
    UnboundName,
    DuplicateDeclaration,
    MissingMain,
    ReservedName,
    MalformedRational,
    ProbabilityOutOfRange,
    DuplicateOutcome,
    BadOracleDeclaration,
}

impl ParseErrorKind {
    /// Stable machine-readable code.
    pub fn code(self) -> &'static str {
        match self {
            ParseErrorKind::Lexical => "lexical-error",
            ParseErrorKind::Syntax => "syntax-error",
            ParseErrorKind::UnboundName => "unbound-name",
            ParseErrorKind::DuplicateDeclaration => "duplicate-declaration",
            ParseErrorKind::MissingMain => "missing-main",
            ParseErrorKind::ReservedName => "reserved-name",
            ParseErrorKind::MalformedRational => "malformed-rational",
            ParseErrorKind::ProbabilityOutOfRange => "probability-out-of-range",
            ParseErrorKind::DuplicateOutcome => "duplicate-outcome",
            ParseErrorKind::BadOracleDeclaration => "bad-oracle-declaration",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {message} [{}]", kind.code())]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            pos,
            message: message.into(),
        }
    }

    pub fn code(&self) -> &'static str {
        self.kind.code()
    }
}
