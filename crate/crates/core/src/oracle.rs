//! Oracle constants and their rule-based oracular functions.

use std::collections::{BTreeMap, BTreeSet};

use crate::constructor::DEFAULT_FUEL;
use crate::syntax::{alpha_eq_term, free_term_vars, HoleContext, Name, Term, TypeCon};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Arity {
    Nullary,
    Unary,
}

impl Arity {
    pub fn as_usize(self) -> usize {
        match self {
            Arity::Nullary => 0,
            Arity::Unary => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Guard {
    /// `index mod k = r`, hole indices counted from 1.
    IndexMod { modulus: usize, residue: usize },
    /// `index in {i, j, ...}`
    IndexIn(BTreeSet<usize>),
    /// `arg = t`, matched up to α after β and projection steps. Unary
    /// oracles only.
    Arg(Term),
    /// `context = "..."`, compared with [`HoleContext::fingerprint`].
    Context(String),
}

impl Guard {
    fn matches(&self, ctx: &HoleContext, m: usize, arg: Option<&Term>) -> bool {
        match self {
            Guard::IndexMod { modulus, residue } => m % modulus == *residue,
            Guard::IndexIn(set) => set.contains(&m),
            Guard::Arg(p) => arg.is_some_and(|a| {
                alpha_eq_term(a, p)
                    || crate::reducer::normalize_pure(a, DEFAULT_FUEL)
                        .is_some_and(|n| alpha_eq_term(&n, p))
            }),
            Guard::Context(fp) => &ctx.fingerprint() == fp,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleRule {
    pub guard: Guard,
    pub output: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleDef {
    pub name: Name,
    pub arity: Arity,
    /// `Sigma A` for nullary oracles, `forall x:A. Sigma B` for unary ones.
    pub ty: TypeCon,
    pub rules: Vec<OracleRule>,
    pub default: Term,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("unknown oracle `#{0}`")]
    UnknownOracle(Name),
    #[error("oracle `#{0}` is declared twice")]
    Duplicate(Name),
    #[error("oracle `#{oracle}` has arity {expected} but was invoked with {found} argument(s)")]
    ArityMismatch {
        oracle: Name,
        expected: usize,
        found: usize,
    },
    #[error("hole index {index} out of range 1..={holes}")]
    HoleOutOfRange { index: usize, holes: usize },
    #[error("oracle `#{oracle}`: type must be {expected}, found {found}")]
    BadType {
        oracle: Name,
        expected: &'static str,
        found: String,
    },
    #[error("oracle `#{oracle}`: output `{output}` is ill-typed: {reason}")]
    OutputIllTyped {
        oracle: Name,
        output: String,
        reason: String,
    },
    #[error("oracle `#{oracle}`: output `{output}` has free variable `{var}`")]
    OutputNotClosed {
        oracle: Name,
        output: String,
        var: Name,
    },
    #[error("oracle `#{oracle}`: output `{output}` mentions an oracle")]
    OutputContainsOracle { oracle: Name, output: String },
}

impl OracleError {
    pub fn code(&self) -> &'static str {
        match self {
            OracleError::UnknownOracle(_) => "unknown-oracle",
            OracleError::Duplicate(_) => "duplicate-oracle",
            OracleError::ArityMismatch { .. } => "oracle-arity-mismatch",
            OracleError::HoleOutOfRange { .. } => "hole-out-of-range",
            OracleError::BadType { .. } => "bad-oracle-type",
            OracleError::OutputIllTyped { .. } => "output-ill-typed",
            OracleError::OutputNotClosed { .. } => "output-not-closed",
            OracleError::OutputContainsOracle { .. } => "output-contains-oracle",
        }
    }
}

pub(crate) fn mentions_oracle(t: &Term) -> bool {
    match t {
        Term::Oracle(_) | Term::OracleApp(..) => true,
        _ => t.term_children().into_iter().any(mentions_oracle),
    }
}

impl OracleDef {
    /// Every output term, rules first, then the default.
    pub fn outputs(&self) -> impl Iterator<Item = &Term> {
        self.rules
            .iter()
            .map(|r| &r.output)
            .chain(std::iter::once(&self.default))
    }

    /// Checks that do not need a typing environment: type shape, arity of
    /// guards and oracle-freeness of outputs.
    pub fn validate_shape(&self) -> Result<(), OracleError> {
        match (self.arity, &self.ty) {
            (Arity::Nullary, TypeCon::Sigma(_)) => {}
            (Arity::Unary, TypeCon::Forall(_, _, b)) if matches!(**b, TypeCon::Sigma(_)) => {}
            (Arity::Nullary, ty) => {
                return Err(OracleError::BadType {
                    oracle: self.name.clone(),
                    expected: "Sigma A",
                    found: ty.to_string(),
                })
            }
            (Arity::Unary, ty) => {
                return Err(OracleError::BadType {
                    oracle: self.name.clone(),
                    expected: "forall x:A. Sigma B",
                    found: ty.to_string(),
                })
            }
        }
        for out in self.outputs() {
            if mentions_oracle(out) {
                return Err(OracleError::OutputContainsOracle {
                    oracle: self.name.clone(),
                    output: out.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Fails on the first output with a free variable that is not a
    /// declared constant.
    pub fn check_closed(&self, is_const: impl Fn(&str) -> bool) -> Result<(), OracleError> {
        for out in self.outputs() {
            if let Some(var) = free_term_vars(out).into_iter().find(|v| !is_const(v)) {
                return Err(OracleError::OutputNotClosed {
                    oracle: self.name.clone(),
                    output: out.to_string(),
                    var,
                });
            }
        }
        Ok(())
    }

    /// Runs the oracular function: the output of the first rule whose guard
    /// matches hole `m` (1-based) of `ctx`, or the default.
    pub fn eval(
        &self,
        ctx: &HoleContext,
        m: usize,
        arg: Option<&Term>,
    ) -> Result<&Term, OracleError> {
        let found = usize::from(arg.is_some());
        if found != self.arity.as_usize() {
            return Err(OracleError::ArityMismatch {
                oracle: self.name.clone(),
                expected: self.arity.as_usize(),
                found,
            });
        }
        if m == 0 || m > ctx.holes() {
            return Err(OracleError::HoleOutOfRange {
                index: m,
                holes: ctx.holes(),
            });
        }
        Ok(self
            .rules
            .iter()
            .find(|r| r.guard.matches(ctx, m, arg))
            .map(|r| &r.output)
            .unwrap_or(&self.default))
    }
}

/// Loaded oracle definitions, keyed by name.
#[derive(Clone, Debug, Default)]
pub struct OracleRegistry {
    defs: BTreeMap<Name, OracleDef>,
}

impl OracleRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_defs(defs: impl IntoIterator<Item = OracleDef>) -> Result<Self, OracleError> {
        let mut r = Self::new();
        for d in defs {
            r.insert(d)?;
        }
        Ok(r)
    }

    pub fn insert(&mut self, def: OracleDef) -> Result<(), OracleError> {
        def.validate_shape()?;
        if self.defs.contains_key(&def.name) {
            return Err(OracleError::Duplicate(def.name));
        }
        self.defs.insert(def.name.clone(), def);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&OracleDef> {
        self.defs.get(name)
    }

    pub fn lookup(&self, name: &str) -> Result<&OracleDef, OracleError> {
        self.get(name)
            .ok_or_else(|| OracleError::UnknownOracle(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &OracleDef> {
        self.defs.values()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }
}

/// `eval_oracle(def, ctx, m, arg)`.
pub fn eval_oracle<'a>(
    def: &'a OracleDef,
    ctx: &HoleContext,
    m: usize,
    arg: Option<&Term>,
) -> Result<&'a Term, OracleError> {
    def.eval(ctx, m, arg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::decompose_oracle_context;

    fn cyclic() -> OracleDef {
        OracleDef {
            name: "c".into(),
            arity: Arity::Nullary,
            ty: TypeCon::sigma(TypeCon::var("A")),
            rules: vec![OracleRule {
                guard: Guard::IndexMod {
                    modulus: 3,
                    residue: 0,
                },
                output: Term::var("b"),
            }],
            default: Term::var("a"),
        }
    }

    #[test]
    fn cyclic_outputs() {
        let occ = Term::nu(Term::oracle("c"));
        let t = Term::tuple(vec![occ.clone(), occ.clone(), occ]);
        let (ctx, _) = decompose_oracle_context(&t, "c");
        let d = cyclic();
        let outs: Vec<String> = (1..=3)
            .map(|m| d.eval(&ctx, m, None).unwrap().to_string())
            .collect();
        assert_eq!(outs, ["a", "a", "b"]);
        assert!(matches!(
            d.eval(&ctx, 4, None),
            Err(OracleError::HoleOutOfRange { .. })
        ));
        assert!(matches!(
            d.eval(&ctx, 1, Some(&Term::var("a"))),
            Err(OracleError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn arg_guard() {
        let d = OracleDef {
            name: "f".into(),
            arity: Arity::Unary,
            ty: TypeCon::forall("x", TypeCon::var("N"), TypeCon::sigma(TypeCon::var("B"))),
            rules: vec![OracleRule {
                guard: Guard::Arg(Term::var("zero")),
                output: Term::var("a"),
            }],
            default: Term::var("b"),
        };
        let t = Term::nu(Term::app(Term::oracle("f"), Term::var("zero")));
        let (ctx, _) = decompose_oracle_context(&t, "f");
        assert_eq!(
            d.eval(&ctx, 1, Some(&Term::var("zero"))).unwrap(),
            &Term::var("a")
        );
        assert_eq!(
            d.eval(&ctx, 1, Some(&Term::var("one"))).unwrap(),
            &Term::var("b")
        );
    }

    #[test]
    fn shape_validation() {
        let mut d = cyclic();
        d.default = Term::nu(Term::oracle("c"));
        assert!(matches!(
            d.validate_shape(),
            Err(OracleError::OutputContainsOracle { .. })
        ));
        let mut d = cyclic();
        d.ty = TypeCon::var("A");
        assert!(matches!(
            d.validate_shape(),
            Err(OracleError::BadType { .. })
        ));
        let d = cyclic();
        assert!(matches!(
            d.check_closed(|v| v == "a"),
            Err(OracleError::OutputNotClosed { .. })
        ));
        assert!(d.check_closed(|v| v == "a" || v == "b").is_ok());
    }
}
