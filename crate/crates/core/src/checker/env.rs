use std::collections::BTreeMap;

use crate::oracle::OracleRegistry;
use crate::surface::Scope;
use crate::syntax::{Kind, Name, TypeCon};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Binding {
    Term(Name, TypeCon),
    Con(Name, Kind),
}

impl Binding {
    pub fn name(&self) -> &str {
        match self {
            Binding::Term(x, _) | Binding::Con(x, _) => x,
        }
    }
}

/// Typing environment: an ordered list of bindings plus the types of the
/// oracle constants in use.
#[derive(Clone, Debug, Default)]
pub struct Env {
    entries: Vec<Binding>,
    oracles: BTreeMap<Name, TypeCon>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[Binding] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, x: &str) -> bool {
        self.entries.iter().any(|b| b.name() == x)
    }

    /// Pushes without validation; see [`crate::checker::extend_term`] for
    /// the checked version.
    pub fn push_term(&mut self, x: impl Into<Name>, ty: TypeCon) {
        self.entries.push(Binding::Term(x.into(), ty));
    }

    pub fn push_con(&mut self, a: impl Into<Name>, k: Kind) {
        self.entries.push(Binding::Con(a.into(), k));
    }

    pub fn pop(&mut self) -> Option<Binding> {
        self.entries.pop()
    }

    pub fn truncate(&mut self, len: usize) {
        self.entries.truncate(len);
    }

    pub fn lookup_term(&self, x: &str) -> Option<&TypeCon> {
        self.entries.iter().rev().find_map(|b| match b {
            Binding::Term(y, ty) if y == x => Some(ty),
            _ => None,
        })
    }

    pub fn lookup_con(&self, a: &str) -> Option<&Kind> {
        self.entries.iter().rev().find_map(|b| match b {
            Binding::Con(y, k) if y == a => Some(k),
            _ => None,
        })
    }

    pub fn term_names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().filter_map(|b| match b {
            Binding::Term(x, _) => Some(x.as_str()),
            _ => None,
        })
    }

    pub fn con_names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().filter_map(|b| match b {
            Binding::Con(a, _) => Some(a.as_str()),
            _ => None,
        })
    }

    pub fn set_oracle_type(&mut self, o: impl Into<Name>, ty: TypeCon) {
        self.oracles.insert(o.into(), ty);
    }

    pub fn oracle_type(&self, o: &str) -> Option<&TypeCon> {
        self.oracles.get(o)
    }

    /// Registers the declared type of every oracle in `registry`, without
    /// validating anything.
    pub fn with_oracle_types(mut self, registry: &OracleRegistry) -> Self {
        for d in registry.iter() {
            self.oracles.insert(d.name.clone(), d.ty.clone());
        }
        self
    }

    /// Names in scope, for parsing terms against this environment.
    pub fn scope(&self) -> Scope {
        Scope::new(
            self.con_names().map(str::to_string),
            self.term_names().map(str::to_string),
        )
    }
}
