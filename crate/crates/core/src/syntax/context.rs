//! Multi-hole term contexts and oracle-occurrence decomposition.

use std::collections::BTreeSet;

use super::path::Path;
use super::subst::{canonicalize_term, free_term_vars, fresh_name, rename_term};
use super::term::{Name, Term};

/// Name of the designated variable standing for hole `i` (1-based). The
/// bracket makes it impossible to write in source text.
pub fn hole_name(i: usize) -> Name {
    format!("[_{i}]")
}

/// A term with `holes` designated variables `[_1] ... [_n]`, each occurring
/// exactly once, numbered in left-to-right preorder.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HoleContext {
    skeleton: Term,
    holes: usize,
}

/// One ν-redex occurrence of an oracle constant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Occurrence {
    /// Position of the `ν` node in the original term.
    pub path: Path,
    /// Argument of `(o u)ν`; `None` for `o ν`.
    pub arg: Option<Term>,
}

impl Occurrence {
    /// The redex this occurrence stands for.
    pub fn original(&self, oracle: &str) -> Term {
        match &self.arg {
            None => Term::nu(Term::oracle(oracle)),
            Some(u) => Term::nu(Term::OracleApp(oracle.to_string(), Box::new(u.clone()))),
        }
    }
}

impl HoleContext {
    pub fn skeleton(&self) -> &Term {
        &self.skeleton
    }

    pub fn holes(&self) -> usize {
        self.holes
    }

    /// Plugs `t` into hole `i` without renaming: the hole sits in the scope
    /// of its enclosing binders, so free variables of `t` may be captured.
    /// Other holes stay in place.
    pub fn fill(&self, i: usize, t: &Term) -> Term {
        plug(&self.skeleton, &|name| {
            (name == hole_name(i)).then(|| t.clone())
        })
    }

    /// Plugs `terms[i-1]` into hole `i` for every hole, without renaming.
    pub fn fill_all(&self, terms: &[Term]) -> Term {
        assert_eq!(terms.len(), self.holes, "wrong number of hole fillers");
        plug(&self.skeleton, &|name| {
            hole_index(name).map(|i| terms[i - 1].clone())
        })
    }

    /// Like [`fill_all`](Self::fill_all), but first renames binders of the
    /// skeleton that would capture free variables of the fillers.
    pub fn fill_all_avoiding(&self, terms: &[Term]) -> Term {
        let avoid: BTreeSet<Name> = terms.iter().flat_map(free_term_vars).collect();
        let skeleton = rename_binders_avoiding(&self.skeleton, &avoid);
        HoleContext {
            skeleton,
            holes: self.holes,
        }
        .fill_all(terms)
    }

    /// α-normal printed form, holes rendered `[_i]`.
    pub fn fingerprint(&self) -> String {
        crate::surface::print_term(&canonicalize_term(&self.skeleton))
    }
}

fn hole_index(name: &str) -> Option<usize> {
    name.strip_prefix("[_")?.strip_suffix(']')?.parse().ok()
}

fn plug(t: &Term, f: &dyn Fn(&str) -> Option<Term>) -> Term {
    match t {
        Term::Var(x) => f(x).unwrap_or_else(|| t.clone()),
        Term::Oracle(_) => t.clone(),
        Term::OracleApp(o, a) => Term::OracleApp(o.clone(), Box::new(plug(a, f))),
        Term::Lambda(x, ty, b) => Term::Lambda(x.clone(), ty.clone(), Box::new(plug(b, f))),
        Term::App(a, b) => Term::app(plug(a, f), plug(b, f)),
        Term::Choice(a, p, b) => {
            Term::Choice(Box::new(plug(a, f)), p.clone(), Box::new(plug(b, f)))
        }
        Term::Nu(a) => Term::nu(plug(a, f)),
        Term::Pair(a, b) => Term::pair(plug(a, f), plug(b, f)),
        Term::Proj(a, i) => Term::proj(plug(a, f), *i),
        Term::Efq(a, ty) => Term::Efq(Box::new(plug(a, f)), ty.clone()),
        Term::CompList(..) | Term::CompMerge(..) => t.clone(),
    }
}

/// Renames every term-position binder whose name is in `avoid`.
fn rename_binders_avoiding(t: &Term, avoid: &BTreeSet<Name>) -> Term {
    match t {
        Term::Lambda(x, ty, b) => {
            let (x2, b2) = if avoid.contains(x) {
                let fv = free_term_vars(b);
                let x2 = fresh_name(x, |c| avoid.contains(c) || fv.contains(c));
                (x2.clone(), rename_term(b, x, &x2))
            } else {
                (x.clone(), (**b).clone())
            };
            Term::Lambda(
                x2,
                ty.clone(),
                Box::new(rename_binders_avoiding(&b2, avoid)),
            )
        }
        Term::Var(_) | Term::Oracle(_) | Term::CompList(..) | Term::CompMerge(..) => t.clone(),
        Term::OracleApp(o, a) => {
            Term::OracleApp(o.clone(), Box::new(rename_binders_avoiding(a, avoid)))
        }
        Term::App(a, b) => Term::app(
            rename_binders_avoiding(a, avoid),
            rename_binders_avoiding(b, avoid),
        ),
        Term::Choice(a, p, b) => Term::Choice(
            Box::new(rename_binders_avoiding(a, avoid)),
            p.clone(),
            Box::new(rename_binders_avoiding(b, avoid)),
        ),
        Term::Nu(a) => Term::nu(rename_binders_avoiding(a, avoid)),
        Term::Pair(a, b) => Term::pair(
            rename_binders_avoiding(a, avoid),
            rename_binders_avoiding(b, avoid),
        ),
        Term::Proj(a, i) => Term::proj(rename_binders_avoiding(a, avoid), *i),
        Term::Efq(a, ty) => Term::Efq(Box::new(rename_binders_avoiding(a, avoid)), ty.clone()),
    }
}

/// Splits `t` into a context whose holes replace every `o ν` and `(o u) ν`
/// occurrence of oracle `o`, in left-to-right preorder. Arguments of
/// replaced occurrences are returned in the descriptors and not searched
/// further. Type annotations and computation terms are not searched.
pub fn decompose_oracle_context(t: &Term, oracle: &str) -> (HoleContext, Vec<Occurrence>) {
    let mut occurrences = Vec::new();
    let skeleton = cut(t, oracle, &mut Path::root(), &mut occurrences);
    let holes = occurrences.len();
    (HoleContext { skeleton, holes }, occurrences)
}

fn is_occurrence<'a>(t: &'a Term, oracle: &str) -> Option<Option<&'a Term>> {
    match t {
        Term::Nu(inner) => match &**inner {
            Term::Oracle(o) if o == oracle => Some(None),
            Term::OracleApp(o, u) if o == oracle => Some(Some(&**u)),
            _ => None,
        },
        _ => None,
    }
}

fn cut(t: &Term, oracle: &str, here: &mut Path, out: &mut Vec<Occurrence>) -> Term {
    if let Some(arg) = is_occurrence(t, oracle) {
        out.push(Occurrence {
            path: here.clone(),
            arg: arg.cloned(),
        });
        return Term::var(hole_name(out.len()));
    }
    let mut go = |i: usize, c: &Term, out: &mut Vec<Occurrence>| {
        here.0.push(i);
        let r = cut(c, oracle, here, out);
        here.0.pop();
        r
    };
    match t {
        Term::Var(_) | Term::Oracle(_) | Term::CompList(..) | Term::CompMerge(..) => t.clone(),
        Term::OracleApp(o, a) => Term::OracleApp(o.clone(), Box::new(go(0, a, out))),
        Term::Lambda(x, ty, b) => Term::Lambda(x.clone(), ty.clone(), Box::new(go(1, b, out))),
        Term::App(a, b) => {
            let a = go(0, a, out);
            let b = go(1, b, out);
            Term::App(Box::new(a), Box::new(b))
        }
        Term::Choice(a, p, b) => {
            let a = go(0, a, out);
            let b = go(1, b, out);
            Term::Choice(Box::new(a), p.clone(), Box::new(b))
        }
        Term::Nu(a) => Term::nu(go(0, a, out)),
        Term::Pair(a, b) => {
            let a = go(0, a, out);
            let b = go(1, b, out);
            Term::pair(a, b)
        }
        Term::Proj(a, i) => Term::proj(go(0, a, out), *i),
        Term::Efq(a, ty) => Term::Efq(Box::new(go(0, a, out)), ty.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{alpha_eq_term, TypeCon};

    fn coin() -> Term {
        Term::nu(Term::oracle("o"))
    }

    #[test]
    fn pair_of_occurrences() {
        let t = Term::pair(coin(), coin());
        let (ctx, occ) = decompose_oracle_context(&t, "o");
        assert_eq!(ctx.holes(), 2);
        assert_eq!(occ.len(), 2);
        assert!(occ.iter().all(|o| o.arg.is_none()));
        assert_eq!(
            ctx.skeleton(),
            &Term::pair(Term::var("[_1]"), Term::var("[_2]"))
        );
        assert_eq!(occ[0].path, Path(vec![0]));
        assert_eq!(occ[1].path, Path(vec![1]));
    }

    #[test]
    fn unary_occurrence_keeps_argument() {
        // (\x:A. x) (#o u)!
        let id = Term::lam("x", TypeCon::var("A"), Term::var("x"));
        let occ_term = Term::nu(Term::app(Term::oracle("o"), Term::var("u")));
        let t = Term::app(id.clone(), occ_term);
        let (ctx, occ) = decompose_oracle_context(&t, "o");
        assert_eq!(ctx.holes(), 1);
        assert_eq!(occ[0].arg, Some(Term::var("u")));
        assert_eq!(ctx.skeleton(), &Term::app(id, Term::var("[_1]")));
    }

    #[test]
    fn no_occurrences() {
        let (ctx, occ) = decompose_oracle_context(&Term::var("x"), "o");
        assert_eq!(ctx.holes(), 0);
        assert!(occ.is_empty());
        assert_eq!(ctx.skeleton(), &Term::var("x"));
    }

    #[test]
    fn other_oracles_and_bare_references_are_not_holes() {
        let t = Term::pair(Term::nu(Term::oracle("p")), Term::oracle("o"));
        let (ctx, _) = decompose_oracle_context(&t, "o");
        assert_eq!(ctx.holes(), 0);
    }

    #[test]
    fn fill_restores_original() {
        let t = Term::pair(coin(), Term::lam("x", TypeCon::var("A"), coin()));
        let (ctx, occ) = decompose_oracle_context(&t, "o");
        let originals: Vec<Term> = occ.iter().map(|o| o.original("o")).collect();
        assert!(alpha_eq_term(&ctx.fill_all(&originals), &t));
        let partial = ctx.fill(2, &Term::var("z"));
        assert_eq!(
            partial,
            Term::pair(
                Term::var("[_1]"),
                Term::lam("x", TypeCon::var("A"), Term::var("z"))
            )
        );
    }

    #[test]
    fn avoiding_fill_renames_capturing_binders() {
        // \a:A. #o!   with output `a` must not be captured
        let t = Term::lam("a", TypeCon::var("A"), coin());
        let (ctx, _) = decompose_oracle_context(&t, "o");
        let r = ctx.fill_all_avoiding(&[Term::var("a")]);
        assert_eq!(r, Term::lam("a1", TypeCon::var("A"), Term::var("a")));
    }

    #[test]
    fn fingerprint_is_alpha_invariant() {
        let t1 = Term::lam("x", TypeCon::var("A"), Term::pair(Term::var("x"), coin()));
        let t2 = Term::lam("y", TypeCon::var("A"), Term::pair(Term::var("y"), coin()));
        let f1 = decompose_oracle_context(&t1, "o").0.fingerprint();
        let f2 = decompose_oracle_context(&t2, "o").0.fingerprint();
        assert_eq!(f1, f2);
        assert_eq!(f1, "\\_0:A. <_0, [_1]>");
    }
}
