use std::fmt;

use crate::rational::Rational;

pub type Name = String;

/// Which component a projection selects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProjIndex {
    Zero,
    One,
}

impl ProjIndex {
    pub fn as_usize(self) -> usize {
        match self {
            ProjIndex::Zero => 0,
            ProjIndex::One => 1,
        }
    }

    pub fn from_usize(i: usize) -> Option<Self> {
        match i {
            0 => Some(ProjIndex::Zero),
            1 => Some(ProjIndex::One),
            _ => None,
        }
    }
}

/// Terms.
///
/// `OracleApp(o, t)` is the canonical form of an oracle constant applied to an
/// argument; [`Term::app`] builds it whenever the head of an application is an
/// oracle reference, so `App(Oracle(_), _)` never appears in terms produced by
/// the parser or by substitution.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Name),
    Oracle(Name),
    OracleApp(Name, Box<Term>),
    Lambda(Name, Box<TypeCon>, Box<Term>),
    App(Box<Term>, Box<Term>),
    Choice(Box<Term>, Rational, Box<Term>),
    Nu(Box<Term>),
    Pair(Box<Term>, Box<Term>),
    Proj(Box<Term>, ProjIndex),
    Efq(Box<Term>, Box<TypeCon>),
    /// `[t1, ..., tn]^p`: a computation listed as the terms it passes through.
    CompList(Vec<Term>, Option<Rational>),
    /// `[t, [k1 / ... / kn], s]^p`: alternative computations from `t` to `s`.
    CompMerge(Box<Term>, Vec<Vec<Term>>, Box<Term>, Option<Rational>),
}

/// Type constructors. Binders bind term variables; constructor variables are
/// never bound.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeCon {
    Var(Name),
    Lambda(Name, Box<TypeCon>, Box<TypeCon>),
    App(Box<TypeCon>, Box<Term>),
    Forall(Name, Box<TypeCon>, Box<TypeCon>),
    Oplus(Box<TypeCon>),
    Sigma(Box<TypeCon>),
    And(Box<TypeCon>, Box<TypeCon>),
    Bottom,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Star,
    Pi(Name, Box<TypeCon>, Box<Kind>),
}

/// Binder name used for non-dependent arrows `A -> B`.
pub const ANON_BINDER: &str = "_";

impl Term {
    pub fn var(name: impl Into<Name>) -> Term {
        Term::Var(name.into())
    }

    pub fn oracle(name: impl Into<Name>) -> Term {
        Term::Oracle(name.into())
    }

    pub fn lam(x: impl Into<Name>, ty: TypeCon, body: Term) -> Term {
        Term::Lambda(x.into(), Box::new(ty), Box::new(body))
    }

    /// Application; an oracle reference in head position becomes `OracleApp`.
    pub fn app(f: Term, a: Term) -> Term {
        match f {
            Term::Oracle(o) => Term::OracleApp(o, Box::new(a)),
            f => Term::App(Box::new(f), Box::new(a)),
        }
    }

    pub fn choice(t: Term, p: Rational, s: Term) -> Term {
        Term::Choice(Box::new(t), p, Box::new(s))
    }

    pub fn nu(t: Term) -> Term {
        Term::Nu(Box::new(t))
    }

    pub fn pair(t: Term, s: Term) -> Term {
        Term::Pair(Box::new(t), Box::new(s))
    }

    pub fn proj(t: Term, i: ProjIndex) -> Term {
        Term::Proj(Box::new(t), i)
    }

    pub fn efq(t: Term, ty: TypeCon) -> Term {
        Term::Efq(Box::new(t), Box::new(ty))
    }

    /// Right-nested tuple `<t1, <t2, ... tn>>`. A single element is returned
    /// as is. Panics on an empty list.
    pub fn tuple(mut items: Vec<Term>) -> Term {
        let mut acc = items.pop().expect("empty tuple");
        while let Some(t) = items.pop() {
            acc = Term::pair(t, acc);
        }
        acc
    }

    pub fn is_computation(&self) -> bool {
        matches!(self, Term::CompList(..) | Term::CompMerge(..))
    }

    /// Number of term nodes on the longest root-to-leaf path through term
    /// positions (type annotations are not counted).
    pub fn depth(&self) -> usize {
        1 + self
            .term_children()
            .into_iter()
            .map(|c| c.depth())
            .max()
            .unwrap_or(0)
    }

    /// Children in term positions with their child index, skipping type
    /// annotations. These are the positions where evaluation may take place.
    pub fn term_children(&self) -> Vec<&Term> {
        self.indexed_term_children()
            .into_iter()
            .map(|(_, t)| t)
            .collect()
    }

    pub(crate) fn indexed_term_children(&self) -> Vec<(usize, &Term)> {
        match self {
            Term::Var(_) | Term::Oracle(_) => vec![],
            Term::OracleApp(_, t) | Term::Nu(t) | Term::Proj(t, _) => vec![(0, t)],
            Term::Lambda(_, _, b) => vec![(1, b)],
            Term::App(f, a) => vec![(0, f), (1, a)],
            Term::Choice(t, _, s) | Term::Pair(t, s) => vec![(0, t), (1, s)],
            Term::Efq(t, _) => vec![(0, t)],
            Term::CompList(..) | Term::CompMerge(..) => vec![],
        }
    }
}

impl TypeCon {
    pub fn var(name: impl Into<Name>) -> TypeCon {
        TypeCon::Var(name.into())
    }

    pub fn lam(x: impl Into<Name>, dom: TypeCon, body: TypeCon) -> TypeCon {
        TypeCon::Lambda(x.into(), Box::new(dom), Box::new(body))
    }

    pub fn app(f: TypeCon, t: Term) -> TypeCon {
        TypeCon::App(Box::new(f), Box::new(t))
    }

    pub fn forall(x: impl Into<Name>, dom: TypeCon, body: TypeCon) -> TypeCon {
        TypeCon::Forall(x.into(), Box::new(dom), Box::new(body))
    }

    pub fn arrow(dom: TypeCon, cod: TypeCon) -> TypeCon {
        TypeCon::forall(ANON_BINDER, dom, cod)
    }

    pub fn oplus(a: TypeCon) -> TypeCon {
        TypeCon::Oplus(Box::new(a))
    }

    pub fn sigma(a: TypeCon) -> TypeCon {
        TypeCon::Sigma(Box::new(a))
    }

    pub fn and(a: TypeCon, b: TypeCon) -> TypeCon {
        TypeCon::And(Box::new(a), Box::new(b))
    }

    /// `A ∧ ... ∧ A` with `n` copies, right-nested. `n = 1` gives `A`.
    pub fn power(a: &TypeCon, n: usize) -> TypeCon {
        assert!(n >= 1);
        let mut acc = a.clone();
        for _ in 1..n {
            acc = TypeCon::and(a.clone(), acc);
        }
        acc
    }

    pub fn contains_forall(&self) -> bool {
        match self {
            TypeCon::Forall(..) => true,
            TypeCon::Var(_) | TypeCon::Bottom => false,
            TypeCon::Lambda(_, a, b) | TypeCon::And(a, b) => {
                a.contains_forall() || b.contains_forall()
            }
            TypeCon::App(f, _) => f.contains_forall(),
            TypeCon::Oplus(a) | TypeCon::Sigma(a) => a.contains_forall(),
        }
    }
}

impl Kind {
    pub fn pi(x: impl Into<Name>, dom: TypeCon, body: Kind) -> Kind {
        Kind::Pi(x.into(), Box::new(dom), Box::new(body))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::surface::print_term(self))
    }
}

impl fmt::Display for TypeCon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::surface::print_con(self))
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::surface::print_kind(self))
    }
}
