use std::fmt;

use crate::syntax::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TypeErrorKind {
    UnboundVar,
    UnboundConVar,
    UnknownOracle,
    TypeMismatch,
    KindMismatch,
    NotAKindFunction,
    NotAType,
    IllFormedKind,
    NotAFunction,
    NotAPair,
    NotAChoice,
    EfqOnNonBottom,
    EfqTargetContainsForall,
    BranchTypeMismatch,
    ProbabilityOutOfRange,
    ComputationTerm,
    DuplicateBinding,
    FuelExhausted,
}

impl TypeErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            TypeErrorKind::UnboundVar => "unbound-var",
            TypeErrorKind::UnboundConVar => "unbound-con-var",
            TypeErrorKind::UnknownOracle => "unknown-oracle",
            TypeErrorKind::TypeMismatch => "type-mismatch",
            TypeErrorKind::KindMismatch => "kind-mismatch",
            TypeErrorKind::NotAKindFunction => "not-a-kind-function",
            TypeErrorKind::NotAType => "not-a-type",
            TypeErrorKind::IllFormedKind => "ill-formed-kind",
            TypeErrorKind::NotAFunction => "not-a-function",
            TypeErrorKind::NotAPair => "not-a-pair",
            TypeErrorKind::NotAChoice => "not-a-choice",
            TypeErrorKind::EfqOnNonBottom => "efq-on-non-bottom",
            TypeErrorKind::EfqTargetContainsForall => "efq-target-contains-forall",
            TypeErrorKind::BranchTypeMismatch => "branch-type-mismatch",
            TypeErrorKind::ProbabilityOutOfRange => "probability-out-of-range",
            TypeErrorKind::ComputationTerm => "computation-term",
            TypeErrorKind::DuplicateBinding => "duplicate-binding",
            TypeErrorKind::FuelExhausted => "fuel-exhausted",
        }
    }
}

/// A kinding or typing failure at `path` below the checked node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub path: Path,
    pub message: String,
}

impl TypeError {
    pub fn new(kind: TypeErrorKind, message: impl Into<String>) -> Self {
        TypeError {
            kind,
            path: Path::root(),
            message: message.into(),
        }
    }

    pub fn within(mut self, i: usize) -> Self {
        self.path = self.path.within(i);
        self
    }

    pub fn code(&self) -> &'static str {
        self.kind.code()
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.message, self.code())
    }
}

impl std::error::Error for TypeError {}

pub(crate) trait Within<T> {
    fn within(self, i: usize) -> Result<T, TypeError>;
}

impl<T> Within<T> for Result<T, TypeError> {
    fn within(self, i: usize) -> Result<T, TypeError> {
        self.map_err(|e| e.within(i))
    }
}
