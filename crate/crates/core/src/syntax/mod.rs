//! The three-level abstract syntax: kinds, type constructors and terms,
//! together with binding, substitution, α-equivalence and hole contexts.

mod alpha;
mod context;
mod path;
mod subst;
mod term;

pub use alpha::{alpha_eq_con, alpha_eq_kind, alpha_eq_term, AlphaEq};
pub use context::{decompose_oracle_context, hole_name, HoleContext, Occurrence};
pub use path::{NodeMut, NodeRef, Path};
pub use subst::{
    canonicalize_con, canonicalize_term, free_con_vars, free_kind_vars, free_term_vars, fresh_name,
    occurs_free_con, occurs_free_term, rename_con, rename_kind, rename_term, substitute_in_con,
    substitute_in_kind, substitute_term,
};
pub use term::{Kind, Name, ProjIndex, Term, TypeCon, ANON_BINDER};
