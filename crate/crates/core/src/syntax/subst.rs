//! Free variables and capture-avoiding substitution of terms for term
//! variables, at all three levels.

use std::collections::BTreeSet;

use super::term::{Kind, Name, Term, TypeCon};

pub fn free_term_vars(t: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    Fv::default().term(t, &mut out);
    out
}

pub fn free_con_vars(c: &TypeCon) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    Fv::default().con(c, &mut out);
    out
}

pub fn free_kind_vars(k: &Kind) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    Fv::default().kind(k, &mut out);
    out
}

pub fn occurs_free_term(x: &str, t: &Term) -> bool {
    free_term_vars(t).contains(x)
}

pub fn occurs_free_con(x: &str, c: &TypeCon) -> bool {
    free_con_vars(c).contains(x)
}

#[derive(Default)]
struct Fv {
    bound: Vec<Name>,
}

impl Fv {
    fn is_bound(&self, x: &str) -> bool {
        self.bound.iter().any(|b| b == x)
    }

    fn under<F: FnOnce(&mut Self)>(&mut self, x: &str, f: F) {
        self.bound.push(x.to_string());
        f(self);
        self.bound.pop();
    }

    fn term(&mut self, t: &Term, out: &mut BTreeSet<Name>) {
        match t {
            Term::Var(x) => {
                if !self.is_bound(x) {
                    out.insert(x.clone());
                }
            }
            Term::Oracle(_) => {}
            Term::OracleApp(_, a) | Term::Nu(a) | Term::Proj(a, _) => self.term(a, out),
            Term::Lambda(x, ty, b) => {
                self.con(ty, out);
                self.under(x, |s| s.term(b, out));
            }
            Term::App(a, b) | Term::Choice(a, _, b) | Term::Pair(a, b) => {
                self.term(a, out);
                self.term(b, out);
            }
            Term::Efq(a, ty) => {
                self.term(a, out);
                self.con(ty, out);
            }
            Term::CompList(ts, _) => ts.iter().for_each(|t| self.term(t, out)),
            Term::CompMerge(s, ks, e, _) => {
                self.term(s, out);
                ks.iter().flatten().for_each(|t| self.term(t, out));
                self.term(e, out);
            }
        }
    }

    fn con(&mut self, c: &TypeCon, out: &mut BTreeSet<Name>) {
        match c {
            TypeCon::Var(_) | TypeCon::Bottom => {}
            TypeCon::Lambda(x, a, b) | TypeCon::Forall(x, a, b) => {
                self.con(a, out);
                self.under(x, |s| s.con(b, out));
            }
            TypeCon::App(f, t) => {
                self.con(f, out);
                self.term(t, out);
            }
            TypeCon::Oplus(a) | TypeCon::Sigma(a) => self.con(a, out),
            TypeCon::And(a, b) => {
                self.con(a, out);
                self.con(b, out);
            }
        }
    }

    fn kind(&mut self, k: &Kind, out: &mut BTreeSet<Name>) {
        match k {
            Kind::Star => {}
            Kind::Pi(x, a, k) => {
                self.con(a, out);
                self.under(x, |s| s.kind(k, out));
            }
        }
    }
}

/// A name derived from `base` for which `taken` is false: `base` with its
/// trailing digits replaced by the smallest positive counter that works.
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    (1u64..)
        .map(|i| format!("{stem}{i}"))
        .find(|cand| !taken(cand))
        .expect("unbounded counter")
}

/// `t[s/x]`
pub fn substitute_term(t: &Term, x: &str, s: &Term) -> Term {
    Subst::new(x, s).term(t)
}

/// `φ[t/x]`
pub fn substitute_in_con(c: &TypeCon, x: &str, t: &Term) -> TypeCon {
    Subst::new(x, t).con(c)
}

/// `Φ[t/x]`
pub fn substitute_in_kind(k: &Kind, x: &str, t: &Term) -> Kind {
    Subst::new(x, t).kind(k)
}

/// Renames the free variable `from` to `to` (capture-avoiding).
pub fn rename_term(t: &Term, from: &str, to: &str) -> Term {
    substitute_term(t, from, &Term::var(to))
}

pub fn rename_con(c: &TypeCon, from: &str, to: &str) -> TypeCon {
    substitute_in_con(c, from, &Term::var(to))
}

pub fn rename_kind(k: &Kind, from: &str, to: &str) -> Kind {
    substitute_in_kind(k, from, &Term::var(to))
}

struct Subst<'a> {
    x: &'a str,
    s: &'a Term,
    fv_s: BTreeSet<Name>,
}

/// What a binder does to an ongoing substitution.
enum Binder {
    /// The binder shadows the substituted variable.
    Shadows,
    /// Proceed under the binder, possibly renamed.
    Enter(Name),
}

impl<'a> Subst<'a> {
    fn new(x: &'a str, s: &'a Term) -> Self {
        Subst {
            x,
            s,
            fv_s: free_term_vars(s),
        }
    }

    fn binder(&self, y: &str, body_fv: impl FnOnce() -> BTreeSet<Name>) -> Binder {
        if y == self.x {
            return Binder::Shadows;
        }
        if !self.fv_s.contains(y) {
            return Binder::Enter(y.to_string());
        }
        let fv = body_fv();
        if !fv.contains(self.x) {
            return Binder::Enter(y.to_string());
        }
        let fresh = fresh_name(y, |c| {
            c == self.x || self.fv_s.contains(c) || fv.contains(c)
        });
        Binder::Enter(fresh)
    }

    fn term(&self, t: &Term) -> Term {
        match t {
            Term::Var(y) => {
                if y == self.x {
                    self.s.clone()
                } else {
                    t.clone()
                }
            }
            Term::Oracle(_) => t.clone(),
            Term::OracleApp(o, a) => Term::OracleApp(o.clone(), Box::new(self.term(a))),
            Term::Lambda(y, ty, b) => {
                let ty = self.con(ty);
                match self.binder(y, || free_term_vars(b)) {
                    Binder::Shadows => Term::Lambda(y.clone(), Box::new(ty), b.clone()),
                    Binder::Enter(y2) => {
                        let body = if &y2 == y {
                            self.term(b)
                        } else {
                            self.term(&rename_term(b, y, &y2))
                        };
                        Term::Lambda(y2, Box::new(ty), Box::new(body))
                    }
                }
            }
            Term::App(f, a) => Term::app(self.term(f), self.term(a)),
            Term::Choice(a, p, b) => {
                Term::Choice(Box::new(self.term(a)), p.clone(), Box::new(self.term(b)))
            }
            Term::Nu(a) => Term::nu(self.term(a)),
            Term::Pair(a, b) => Term::pair(self.term(a), self.term(b)),
            Term::Proj(a, i) => Term::proj(self.term(a), *i),
            Term::Efq(a, ty) => Term::Efq(Box::new(self.term(a)), Box::new(self.con(ty))),
            Term::CompList(ts, p) => {
                Term::CompList(ts.iter().map(|t| self.term(t)).collect(), p.clone())
            }
            Term::CompMerge(s, ks, e, p) => Term::CompMerge(
                Box::new(self.term(s)),
                ks.iter()
                    .map(|k| k.iter().map(|t| self.term(t)).collect())
                    .collect(),
                Box::new(self.term(e)),
                p.clone(),
            ),
        }
    }

    fn con(&self, c: &TypeCon) -> TypeCon {
        match c {
            TypeCon::Var(_) | TypeCon::Bottom => c.clone(),
            TypeCon::Lambda(y, a, b) | TypeCon::Forall(y, a, b) => {
                let a = self.con(a);
                let (y2, body) = match self.binder(y, || free_con_vars(b)) {
                    Binder::Shadows => (y.clone(), (**b).clone()),
                    Binder::Enter(y2) => {
                        let body = if &y2 == y {
                            self.con(b)
                        } else {
                            self.con(&rename_con(b, y, &y2))
                        };
                        (y2, body)
                    }
                };
                if matches!(c, TypeCon::Lambda(..)) {
                    TypeCon::Lambda(y2, Box::new(a), Box::new(body))
                } else {
                    TypeCon::Forall(y2, Box::new(a), Box::new(body))
                }
            }
            TypeCon::App(f, t) => TypeCon::app(self.con(f), self.term(t)),
            TypeCon::Oplus(a) => TypeCon::oplus(self.con(a)),
            TypeCon::Sigma(a) => TypeCon::sigma(self.con(a)),
            TypeCon::And(a, b) => TypeCon::and(self.con(a), self.con(b)),
        }
    }

    fn kind(&self, k: &Kind) -> Kind {
        match k {
            Kind::Star => Kind::Star,
            Kind::Pi(y, a, body) => {
                let a = self.con(a);
                match self.binder(y, || free_kind_vars(body)) {
                    Binder::Shadows => Kind::Pi(y.clone(), Box::new(a), body.clone()),
                    Binder::Enter(y2) => {
                        let inner = if &y2 == y {
                            self.kind(body)
                        } else {
                            self.kind(&rename_kind(body, y, &y2))
                        };
                        Kind::Pi(y2, Box::new(a), Box::new(inner))
                    }
                }
            }
        }
    }
}

/// Renames every bound variable to `_<n>`, where `n` is the number of
/// enclosing binders. α-equivalent terms map to structurally equal terms
/// (free variables must not themselves be of the form `_<n>`).
pub fn canonicalize_term(t: &Term) -> Term {
    Canon::default().term(t)
}

pub fn canonicalize_con(c: &TypeCon) -> TypeCon {
    Canon::default().con(c)
}

#[derive(Default)]
struct Canon {
    map: Vec<(Name, Name)>,
}

impl Canon {
    fn lookup(&self, x: &str) -> Name {
        self.map
            .iter()
            .rev()
            .find(|(from, _)| from == x)
            .map(|(_, to)| to.clone())
            .unwrap_or_else(|| x.to_string())
    }

    fn bind<R>(&mut self, x: &str, f: impl FnOnce(&mut Self) -> R) -> (Name, R) {
        let name = format!("_{}", self.map.len());
        self.map.push((x.to_string(), name.clone()));
        let r = f(self);
        self.map.pop();
        (name, r)
    }

    fn term(&mut self, t: &Term) -> Term {
        match t {
            Term::Var(x) => Term::Var(self.lookup(x)),
            Term::Oracle(_) => t.clone(),
            Term::OracleApp(o, a) => Term::OracleApp(o.clone(), Box::new(self.term(a))),
            Term::Lambda(x, ty, b) => {
                let ty = self.con(ty);
                let (x, b) = self.bind(x, |s| s.term(b));
                Term::Lambda(x, Box::new(ty), Box::new(b))
            }
            Term::App(f, a) => Term::App(Box::new(self.term(f)), Box::new(self.term(a))),
            Term::Choice(a, p, b) => {
                Term::Choice(Box::new(self.term(a)), p.clone(), Box::new(self.term(b)))
            }
            Term::Nu(a) => Term::nu(self.term(a)),
            Term::Pair(a, b) => Term::pair(self.term(a), self.term(b)),
            Term::Proj(a, i) => Term::proj(self.term(a), *i),
            Term::Efq(a, ty) => Term::Efq(Box::new(self.term(a)), Box::new(self.con(ty))),
            Term::CompList(ts, p) => {
                Term::CompList(ts.iter().map(|t| self.term(t)).collect(), p.clone())
            }
            Term::CompMerge(s, ks, e, p) => Term::CompMerge(
                Box::new(self.term(s)),
                ks.iter()
                    .map(|k| k.iter().map(|t| self.term(t)).collect())
                    .collect(),
                Box::new(self.term(e)),
                p.clone(),
            ),
        }
    }

    fn con(&mut self, c: &TypeCon) -> TypeCon {
        match c {
            TypeCon::Var(_) | TypeCon::Bottom => c.clone(),
            TypeCon::Lambda(x, a, b) => {
                let a = self.con(a);
                let (x, b) = self.bind(x, |s| s.con(b));
                TypeCon::Lambda(x, Box::new(a), Box::new(b))
            }
            TypeCon::Forall(x, a, b) => {
                let a = self.con(a);
                let (x, b) = self.bind(x, |s| s.con(b));
                TypeCon::Forall(x, Box::new(a), Box::new(b))
            }
            TypeCon::App(f, t) => TypeCon::app(self.con(f), self.term(t)),
            TypeCon::Oplus(a) => TypeCon::oplus(self.con(a)),
            TypeCon::Sigma(a) => TypeCon::sigma(self.con(a)),
            TypeCon::And(a, b) => TypeCon::and(self.con(a), self.con(b)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::alpha_eq_term;

    fn a() -> TypeCon {
        TypeCon::var("A")
    }

    #[test]
    fn free_vars_examples() {
        assert!(free_term_vars(&Term::lam("x", a(), Term::var("x"))).is_empty());
        let fv = free_term_vars(&Term::lam("x", a(), Term::var("y")));
        assert_eq!(fv.into_iter().collect::<Vec<_>>(), ["y"]);
        // <x, \x:A. x>
        let t = Term::pair(Term::var("x"), Term::lam("x", a(), Term::var("x")));
        assert_eq!(free_term_vars(&t).into_iter().collect::<Vec<_>>(), ["x"]);
        // variables inside annotations are free too
        let t = Term::lam(
            "x",
            TypeCon::app(TypeCon::var("P"), Term::var("z")),
            Term::var("x"),
        );
        assert_eq!(free_term_vars(&t).into_iter().collect::<Vec<_>>(), ["z"]);
    }

    #[test]
    fn substitution_examples() {
        let t = Term::var("t");
        assert_eq!(substitute_term(&Term::var("x"), "x", &t), t);
        let id = Term::lam("x", a(), Term::var("x"));
        assert_eq!(substitute_term(&id, "x", &t), id);
    }

    #[test]
    fn substitution_avoids_capture() {
        // (\y:A. <x, y>)[y/x] = \y1:A. <y, y1>
        let t = Term::lam("y", a(), Term::pair(Term::var("x"), Term::var("y")));
        let r = substitute_term(&t, "x", &Term::var("y"));
        let expected = Term::lam("z", a(), Term::pair(Term::var("y"), Term::var("z")));
        assert!(alpha_eq_term(&r, &expected));
        match r {
            Term::Lambda(name, _, _) => assert_eq!(name, "y1"),
            _ => unreachable!(),
        }
    }

    #[test]
    fn substitution_in_constructors() {
        let t = Term::var("t");
        assert_eq!(
            substitute_in_con(&TypeCon::var("α"), "x", &t),
            TypeCon::var("α")
        );
        // (forall y:A. beta x y)[t/x] = forall y:A. beta t y
        let beta = |u: Term, v: Term| TypeCon::app(TypeCon::app(TypeCon::var("beta"), u), v);
        let c = TypeCon::forall("y", a(), beta(Term::var("x"), Term::var("y")));
        let expected = TypeCon::forall("y", a(), beta(t.clone(), Term::var("y")));
        assert_eq!(substitute_in_con(&c, "x", &t), expected);
        // bound occurrence untouched
        let c = TypeCon::lam("x", a(), TypeCon::app(TypeCon::var("beta"), Term::var("x")));
        assert_eq!(substitute_in_con(&c, "x", &t), c);
    }

    #[test]
    fn substitution_rebuilds_oracle_applications() {
        // (f a)[#o/f] = #o a
        let t = Term::App(Box::new(Term::var("f")), Box::new(Term::var("a")));
        let r = substitute_term(&t, "f", &Term::oracle("o"));
        assert_eq!(r, Term::OracleApp("o".into(), Box::new(Term::var("a"))));
    }

    #[test]
    fn fresh_names_skip_taken() {
        assert_eq!(fresh_name("x", |_| false), "x1");
        assert_eq!(fresh_name("x1", |c| c == "x1"), "x2");
        assert_eq!(fresh_name("_", |_| false), "_1");
    }

    #[test]
    fn canonical_forms_identify_alpha_variants() {
        let t1 = Term::lam("x", a(), Term::lam("y", a(), Term::var("x")));
        let t2 = Term::lam("u", a(), Term::lam("v", a(), Term::var("u")));
        assert_eq!(canonicalize_term(&t1), canonicalize_term(&t2));
        let t3 = Term::lam("u", a(), Term::lam("v", a(), Term::var("v")));
        assert_ne!(canonicalize_term(&t1), canonicalize_term(&t3));
    }
}
