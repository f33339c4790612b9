//! Equality up to consistent renaming of bound variables.

use super::term::{Kind, Term, TypeCon};

pub fn alpha_eq_term(a: &Term, b: &Term) -> bool {
    Alpha::default().term(a, b)
}

pub fn alpha_eq_con(a: &TypeCon, b: &TypeCon) -> bool {
    Alpha::default().con(a, b)
}

pub fn alpha_eq_kind(a: &Kind, b: &Kind) -> bool {
    Alpha::default().kind(a, b)
}

/// Dispatches to the right level.
pub trait AlphaEq {
    fn alpha_eq(&self, other: &Self) -> bool;
}

impl AlphaEq for Term {
    fn alpha_eq(&self, other: &Self) -> bool {
        alpha_eq_term(self, other)
    }
}

impl AlphaEq for TypeCon {
    fn alpha_eq(&self, other: &Self) -> bool {
        alpha_eq_con(self, other)
    }
}

impl AlphaEq for Kind {
    fn alpha_eq(&self, other: &Self) -> bool {
        alpha_eq_kind(self, other)
    }
}

/// Two binder stacks pushed in lockstep.
#[derive(Default)]
struct Alpha<'a> {
    left: Vec<&'a str>,
    right: Vec<&'a str>,
}

impl<'a> Alpha<'a> {
    fn var(&self, x: &str, y: &str) -> bool {
        let i = self.left.iter().rposition(|b| *b == x);
        let j = self.right.iter().rposition(|b| *b == y);
        match (i, j) {
            (None, None) => x == y,
            (Some(i), Some(j)) => i == j,
            _ => false,
        }
    }

    fn under<R>(&mut self, x: &'a str, y: &'a str, f: impl FnOnce(&mut Self) -> R) -> R {
        self.left.push(x);
        self.right.push(y);
        let r = f(self);
        self.left.pop();
        self.right.pop();
        r
    }

    fn term(&mut self, a: &'a Term, b: &'a Term) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => self.var(x, y),
            (Term::Oracle(o), Term::Oracle(p)) => o == p,
            (Term::OracleApp(o, s), Term::OracleApp(p, t)) => o == p && self.term(s, t),
            (Term::Lambda(x, ta, sa), Term::Lambda(y, tb, sb)) => {
                self.con(ta, tb) && self.under(x, y, |me| me.term(sa, sb))
            }
            (Term::App(f, s), Term::App(g, t)) | (Term::Pair(f, s), Term::Pair(g, t)) => {
                self.term(f, g) && self.term(s, t)
            }
            (Term::Choice(s1, p, s2), Term::Choice(t1, q, t2)) => {
                p == q && self.term(s1, t1) && self.term(s2, t2)
            }
            (Term::Nu(s), Term::Nu(t)) => self.term(s, t),
            (Term::Proj(s, i), Term::Proj(t, j)) => i == j && self.term(s, t),
            (Term::Efq(s, sa), Term::Efq(t, ta)) => self.term(s, t) && self.con(sa, ta),
            (Term::CompList(ss, p), Term::CompList(ts, q)) => {
                p == q && ss.len() == ts.len() && ss.iter().zip(ts).all(|(s, t)| self.term(s, t))
            }
            (Term::CompMerge(s1, ks, s2, p), Term::CompMerge(t1, ls, t2, q)) => {
                p == q
                    && self.term(s1, t1)
                    && self.term(s2, t2)
                    && ks.len() == ls.len()
                    && ks.iter().zip(ls).all(|(k, l)| {
                        k.len() == l.len() && k.iter().zip(l).all(|(s, t)| self.term(s, t))
                    })
            }
            _ => false,
        }
    }

    fn con(&mut self, a: &'a TypeCon, b: &'a TypeCon) -> bool {
        match (a, b) {
            (TypeCon::Var(x), TypeCon::Var(y)) => x == y,
            (TypeCon::Bottom, TypeCon::Bottom) => true,
            (TypeCon::Lambda(x, da, ba), TypeCon::Lambda(y, db, bb))
            | (TypeCon::Forall(x, da, ba), TypeCon::Forall(y, db, bb)) => {
                self.con(da, db) && self.under(x, y, |me| me.con(ba, bb))
            }
            (TypeCon::App(f, s), TypeCon::App(g, t)) => self.con(f, g) && self.term(s, t),
            (TypeCon::Oplus(x), TypeCon::Oplus(y)) | (TypeCon::Sigma(x), TypeCon::Sigma(y)) => {
                self.con(x, y)
            }
            (TypeCon::And(a1, a2), TypeCon::And(b1, b2)) => self.con(a1, b1) && self.con(a2, b2),
            _ => false,
        }
    }

    fn kind(&mut self, a: &'a Kind, b: &'a Kind) -> bool {
        match (a, b) {
            (Kind::Star, Kind::Star) => true,
            (Kind::Pi(x, da, ka), Kind::Pi(y, db, kb)) => {
                self.con(da, db) && self.under(x, y, |me| me.kind(ka, kb))
            }
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> TypeCon {
        TypeCon::var("A")
    }

    #[test]
    fn examples() {
        assert!(alpha_eq_term(
            &Term::lam("x", a(), Term::var("x")),
            &Term::lam("y", a(), Term::var("y"))
        ));
        assert!(!alpha_eq_term(
            &Term::lam("x", a(), Term::var("x")),
            &Term::lam("x", a(), Term::var("y"))
        ));
        let ax = |v: &str| TypeCon::app(TypeCon::var("α"), Term::var(v));
        assert!(alpha_eq_con(
            &TypeCon::forall("x", a(), ax("x")),
            &TypeCon::forall("z", a(), ax("z"))
        ));
    }

    #[test]
    fn shadowing_is_respected() {
        // \x. \x. x  vs  \x. \y. x
        let t1 = Term::lam("x", a(), Term::lam("x", a(), Term::var("x")));
        let t2 = Term::lam("x", a(), Term::lam("y", a(), Term::var("x")));
        let t3 = Term::lam("u", a(), Term::lam("v", a(), Term::var("v")));
        assert!(!alpha_eq_term(&t1, &t2));
        assert!(alpha_eq_term(&t1, &t3));
    }

    #[test]
    fn free_and_bound_never_match() {
        let t1 = Term::lam("x", a(), Term::var("y"));
        let t2 = Term::lam("y", a(), Term::var("y"));
        assert!(!alpha_eq_term(&t1, &t2));
    }

    #[test]
    fn kinds() {
        let k1 = Kind::pi("x", a(), Kind::Star);
        let k2 = Kind::pi("y", a(), Kind::Star);
        assert!(alpha_eq_kind(&k1, &k2));
        assert!(!alpha_eq_kind(&k1, &Kind::Star));
    }
}
