//! Seeded generators of terms, constructors and kinds for property tests.
//!
//! [`TermGen`] builds closed terms that type-check in [`fixture`]'s
//! environment. Terms in dependent positions (arguments of `P`, arguments
//! of dependent functions) are kept free of choices and oracles, and every
//! λ-bound variable that may receive such a term is used at most once, so
//! that each one-step reduct is again well typed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checker::{load_program, CheckedProgram, Env};
use crate::constructor::con_equiv;
use crate::oracle::OracleRegistry;
use crate::rational::Rational;
use crate::surface::parse_oracles;
use crate::syntax::{
    free_term_vars, occurs_free_con, substitute_in_con, Kind, Name, ProjIndex, Term, TypeCon,
    ANON_BINDER,
};

pub const FIXTURE_PROGRAM: &str = "\
atom A : *
atom B : *
atom P : Pi x:A. *
atom R : Pi x:A. Pi y:A. *
const a : A
const a2 : A
const b : B
const b2 : B
const p : forall x:A. P x
const g : A -> B
import coin
import f
main = a
";

pub const FIXTURE_ORACLES: &str = "\
oracle coin arity 0 type Sigma A
  rule index mod 3 = 0 -> a2
  default -> a
oracle f arity 1 type forall x:A. Sigma B
  rule arg = a -> b2
  default -> b
";

pub struct Fixture {
    pub program: CheckedProgram,
    pub registry: OracleRegistry,
}

impl Fixture {
    pub fn env(&self) -> &Env {
        &self.program.env
    }
}

/// The environment every generator targets.
pub fn fixture() -> Fixture {
    let registry =
        OracleRegistry::from_defs(parse_oracles(FIXTURE_ORACLES).expect("fixture oracles parse"))
            .expect("fixture oracles are valid");
    let program = load_program(FIXTURE_PROGRAM, &registry).expect("fixture program checks");
    Fixture { program, registry }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const PROBS: [(i64, i64); 6] = [(1, 2), (1, 3), (2, 3), (1, 4), (1, 1), (0, 1)];

fn prob(rng: &mut impl Rng) -> Rational {
    let (n, d) = *PROBS.choose(rng).expect("non-empty");
    Rational::new(n, d)
}

fn a() -> TypeCon {
    TypeCon::var("A")
}

fn b() -> TypeCon {
    TypeCon::var("B")
}

fn p_of(t: Term) -> TypeCon {
    TypeCon::app(TypeCon::var("P"), t)
}

fn dep_p() -> TypeCon {
    TypeCon::forall("x", a(), p_of(Term::var("x")))
}

struct Slot {
    name: Name,
    ty: TypeCon,
    /// May appear in dependent positions and be used any number of times.
    pure: bool,
    used: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Move {
    Var(usize),
    Intro,
    Nu,
    Proj,
    App,
}

/// Generator of closed well-typed terms over the fixture.
pub struct TermGen {
    rng: ChaCha8Rng,
    choices: usize,
    fresh: usize,
    ctx: Vec<Slot>,
}

/// Upper bound on [`Term::depth`] of generated terms.
pub const MAX_DEPTH: usize = 7;
const CHOICE_BUDGET: usize = 4;

impl TermGen {
    pub fn new(seed: u64) -> Self {
        TermGen {
            rng: rng(seed),
            choices: CHOICE_BUDGET,
            fresh: 0,
            ctx: Vec::new(),
        }
    }

    /// A closed term of depth at most [`MAX_DEPTH`] together with the type
    /// it was generated at.
    pub fn generate(&mut self) -> (Term, TypeCon) {
        loop {
            self.choices = CHOICE_BUDGET;
            self.ctx.clear();
            let depth = self.rng.gen_range(2..=5);
            let ty = self.ty(2);
            let t = self.term(&ty, depth);
            if t.depth() <= MAX_DEPTH {
                return (t, ty);
            }
        }
    }

    fn fresh(&mut self) -> Name {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    /// A closed pure term of type `A`.
    fn pure_a(&mut self) -> Term {
        let pure_vars: Vec<Name> = self
            .ctx
            .iter()
            .filter(|s| s.pure && con_equiv(&s.ty, &a()))
            .map(|s| s.name.clone())
            .collect();
        match self.rng.gen_range(0..6) {
            0 if !pure_vars.is_empty() => {
                Term::var(pure_vars.choose(&mut self.rng).expect("non-empty").clone())
            }
            0 | 1 => Term::var("a2"),
            _ => Term::var("a"),
        }
    }

    /// A pure term convertible with `t`: `t` itself or a β/π expansion.
    fn expand(&mut self, t: Term) -> Term {
        match self.rng.gen_range(0..5) {
            0 => Term::app(Term::lam("z", a(), Term::var("z")), t),
            1 => Term::proj(Term::pair(t, Term::var("b")), ProjIndex::Zero),
            _ => t,
        }
    }

    fn ty(&mut self, depth: usize) -> TypeCon {
        let top = if depth == 0 { 3 } else { 11 };
        match self.rng.gen_range(0..top) {
            0 => a(),
            1 => b(),
            2 => {
                let t = self.pure_a();
                let t = self.expand(t);
                p_of(t)
            }
            3 => a(),
            4 => TypeCon::and(self.ty(depth - 1), self.ty(depth - 1)),
            5 => TypeCon::arrow(self.ty(depth - 1), self.ty(depth - 1)),
            6 => dep_p(),
            7 if self.choices > 0 => TypeCon::oplus(self.ty(depth - 1)),
            7 => TypeCon::sigma(a()),
            8 => TypeCon::sigma(if self.rng.gen_bool(0.5) { a() } else { b() }),
            9 => TypeCon::arrow(TypeCon::Bottom, self.ty(0)),
            _ => b(),
        }
    }

    fn term(&mut self, ty: &TypeCon, depth: usize) -> Term {
        let mut moves: Vec<(Move, u32)> = Vec::new();
        for (i, s) in self.ctx.iter().enumerate() {
            if (s.pure || !s.used) && con_equiv(&s.ty, ty) {
                moves.push((Move::Var(i), 4));
            }
        }
        if *ty != TypeCon::Bottom {
            moves.push((Move::Intro, 4));
        }
        let value = matches!(
            ty,
            TypeCon::Var(_) | TypeCon::App(..) | TypeCon::And(..) | TypeCon::Forall(..)
        );
        if depth > 0 && value {
            if self.choices > 0 || matches!(ty, TypeCon::Var(_)) {
                moves.push((Move::Nu, 3));
            }
            moves.push((Move::Proj, 1));
            moves.push((Move::App, 2));
        }
        let total: u32 = moves.iter().map(|(_, w)| w).sum();
        let mut pick = self.rng.gen_range(0..total);
        let mv = moves
            .iter()
            .find(|(_, w)| {
                if pick < *w {
                    true
                } else {
                    pick -= w;
                    false
                }
            })
            .map(|(m, _)| *m)
            .expect("weights cover the range");
        match mv {
            Move::Var(i) => {
                self.ctx[i].used = true;
                Term::var(self.ctx[i].name.clone())
            }
            Move::Intro => self.intro(ty, depth),
            Move::Nu => self.nu(ty, depth),
            Move::Proj => {
                let other = self.ty(0);
                let d = depth - 1;
                if self.rng.gen_bool(0.5) {
                    Term::proj(
                        self.term(&TypeCon::and(ty.clone(), other), d),
                        ProjIndex::Zero,
                    )
                } else {
                    Term::proj(
                        self.term(&TypeCon::and(other, ty.clone()), d),
                        ProjIndex::One,
                    )
                }
            }
            Move::App => self.app(ty, depth - 1),
        }
    }

    fn nu(&mut self, ty: &TypeCon, depth: usize) -> Term {
        let oracle = match ty {
            TypeCon::Var(x) if x == "A" => Some(Term::oracle("coin")),
            TypeCon::Var(x) if x == "B" => {
                let arg = self.term(&a(), depth.saturating_sub(2));
                Some(Term::app(Term::oracle("f"), arg))
            }
            _ => None,
        };
        match oracle {
            Some(o) if self.choices == 0 || self.rng.gen_bool(0.4) => Term::nu(o),
            _ => {
                self.choices = self.choices.saturating_sub(1);
                let p = prob(&mut self.rng);
                let l = self.term(ty, depth - 1);
                let r = self.term(ty, depth - 1);
                Term::nu(Term::choice(l, p, r))
            }
        }
    }

    fn app(&mut self, ty: &TypeCon, depth: usize) -> Term {
        if let TypeCon::App(_, t) = ty {
            // dependent application: the argument must convert to `t`
            let f = self.term(&dep_p(), depth);
            let arg = self.expand((**t).clone());
            return Term::app(f, arg);
        }
        let dom = self.ty(1);
        let f = self.term(&TypeCon::arrow(dom.clone(), ty.clone()), depth);
        let arg = self.term(&dom, depth);
        Term::app(f, arg)
    }

    fn intro(&mut self, ty: &TypeCon, depth: usize) -> Term {
        let d = depth.saturating_sub(1);
        match ty {
            TypeCon::Var(x) if x == "A" => {
                Term::var(if self.rng.gen_bool(0.7) { "a" } else { "a2" })
            }
            TypeCon::Var(x) if x == "B" => match self.rng.gen_range(0..4) {
                0 if depth > 0 => {
                    let arg = self.term(&a(), d);
                    Term::app(Term::var("g"), arg)
                }
                1 => Term::var("b2"),
                _ => Term::var("b"),
            },
            TypeCon::App(_, t) => {
                let arg = self.expand((**t).clone());
                Term::app(Term::var("p"), arg)
            }
            TypeCon::And(l, r) => {
                let l = self.term(l, d);
                let r = self.term(r, d);
                Term::pair(l, r)
            }
            TypeCon::Forall(x, dom, cod) => {
                if x != ANON_BINDER && **dom == a() && self.rng.gen_bool(0.3) {
                    return Term::var("p");
                }
                if x == ANON_BINDER && **dom == a() && **cod == b() && self.rng.gen_bool(0.3) {
                    return Term::var("g");
                }
                let v = self.fresh();
                let dependent = x != ANON_BINDER && occurs_free_con(x, cod);
                let cod = if x == ANON_BINDER {
                    (**cod).clone()
                } else {
                    substitute_in_con(cod, x, &Term::var(v.clone()))
                };
                if **dom == TypeCon::Bottom && !cod.contains_forall() {
                    return Term::lam(v.clone(), TypeCon::Bottom, Term::efq(Term::var(v), cod));
                }
                self.ctx.push(Slot {
                    name: v.clone(),
                    ty: (**dom).clone(),
                    pure: dependent,
                    used: false,
                });
                let body = self.term(&cod, d);
                self.ctx.pop();
                Term::lam(v, (**dom).clone(), body)
            }
            TypeCon::Oplus(inner) => {
                self.choices = self.choices.saturating_sub(1);
                let p = prob(&mut self.rng);
                let l = self.term(inner, d);
                let r = self.term(inner, d);
                Term::choice(l, p, r)
            }
            TypeCon::Sigma(inner) if **inner == b() => {
                let arg = self.term(&a(), d);
                Term::app(Term::oracle("f"), arg)
            }
            TypeCon::Sigma(_) => Term::oracle("coin"),
            other => panic!("no introduction form for `{other}` in the fixture"),
        }
    }
}

/// Generator of kind-checked constructors with β-redexes, for confluence.
pub struct ConGen {
    rng: ChaCha8Rng,
    fresh: usize,
}

fn star() -> Kind {
    Kind::Star
}

fn pi_a(k: Kind) -> Kind {
    Kind::pi("x", a(), k)
}

impl ConGen {
    pub fn new(seed: u64) -> Self {
        ConGen {
            rng: rng(seed),
            fresh: 0,
        }
    }

    fn fresh(&mut self) -> Name {
        self.fresh += 1;
        format!("u{}", self.fresh)
    }

    /// A constructor of kind `*`.
    pub fn generate(&mut self) -> TypeCon {
        let depth = self.rng.gen_range(2..=5);
        self.con(&star(), depth, &mut Vec::new())
    }

    fn term(&mut self, vars: &[Name]) -> Term {
        let base = match self.rng.gen_range(0..4) {
            0 if !vars.is_empty() => {
                Term::var(vars.choose(&mut self.rng).expect("non-empty").clone())
            }
            1 => Term::var("a2"),
            _ => Term::var("a"),
        };
        match self.rng.gen_range(0..4) {
            0 => Term::app(Term::lam("z", a(), Term::var("z")), base),
            _ => base,
        }
    }

    /// `k` is `*`, `Pi x:A. *` or `Pi x:A. Pi y:A. *`.
    fn con(&mut self, k: &Kind, depth: usize, vars: &mut Vec<Name>) -> TypeCon {
        let arity = kind_arity(k);
        if depth == 0 {
            return match arity {
                0 => {
                    if self.rng.gen_bool(0.5) {
                        a()
                    } else {
                        TypeCon::app(TypeCon::var("P"), self.term(vars))
                    }
                }
                1 => TypeCon::var("P"),
                _ => TypeCon::var("R"),
            };
        }
        let d = depth - 1;
        if arity > 0 {
            return match self.rng.gen_range(0..3) {
                0 if arity == 1 => {
                    let t = self.term(vars);
                    TypeCon::app(TypeCon::var("R"), t)
                }
                0 | 1 => self.con(k, 0, vars),
                _ => {
                    let v = self.fresh();
                    vars.push(v.clone());
                    let body = self.con(&kind_of_arity(arity - 1), d, vars);
                    vars.pop();
                    TypeCon::lam(v, a(), body)
                }
            };
        }
        match self.rng.gen_range(0..10) {
            0 => b(),
            1 => TypeCon::Bottom,
            2 => TypeCon::and(self.con(k, d, vars), self.con(k, d, vars)),
            3 => TypeCon::arrow(self.con(k, d, vars), self.con(k, d, vars)),
            4 => {
                let v = self.fresh();
                vars.push(v.clone());
                let body = self.con(k, d, vars);
                vars.pop();
                TypeCon::forall(v, a(), body)
            }
            5 => {
                if self.rng.gen_bool(0.5) {
                    TypeCon::oplus(self.con(k, d, vars))
                } else {
                    TypeCon::sigma(self.con(k, d, vars))
                }
            }
            6 => {
                let f = self.con(&pi_a(star()), d, vars);
                TypeCon::app(f, self.term(vars))
            }
            7 | 8 => {
                let f = self.con(&pi_a(pi_a(star())), d, vars);
                let t = self.term(vars);
                let s = self.term(vars);
                TypeCon::app(TypeCon::app(f, t), s)
            }
            _ => self.con(k, 0, vars),
        }
    }
}

fn kind_arity(k: &Kind) -> usize {
    match k {
        Kind::Star => 0,
        Kind::Pi(_, _, k) => 1 + kind_arity(k),
    }
}

fn kind_of_arity(n: usize) -> Kind {
    (0..n).fold(star(), |k, _| pi_a(k))
}

/// Variable names of the untyped generator.
pub const RAW_VARS: [&str; 5] = ["x", "y", "z", "w", "u"];
const RAW_CONS: [&str; 4] = ["A", "B", "P", "R"];

/// Generator of syntactically arbitrary (not necessarily well-typed) terms,
/// constructors and kinds over a small alphabet, so that names collide and
/// capture is exercised.
pub struct RawGen {
    rng: ChaCha8Rng,
}

impl RawGen {
    pub fn new(seed: u64) -> Self {
        RawGen { rng: rng(seed) }
    }

    pub fn var(&mut self) -> Name {
        RAW_VARS
            .choose(&mut self.rng)
            .expect("non-empty")
            .to_string()
    }

    pub fn term(&mut self, depth: usize) -> Term {
        if depth == 0 {
            return match self.rng.gen_range(0..8) {
                0 => Term::oracle(if self.rng.gen_bool(0.5) { "coin" } else { "f" }),
                1 => Term::var("a"),
                _ => Term::var(self.var()),
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..11) {
            0 | 1 => {
                let x = self.var();
                let ty = self.con(d.min(2));
                Term::lam(x, ty, self.term(d))
            }
            2 | 3 => Term::app(self.term(d), self.term(d)),
            4 => {
                let p = prob(&mut self.rng);
                Term::choice(self.term(d), p, self.term(d))
            }
            5 => Term::nu(self.term(d)),
            6 => Term::pair(self.term(d), self.term(d)),
            7 => {
                let i = if self.rng.gen_bool(0.5) {
                    ProjIndex::Zero
                } else {
                    ProjIndex::One
                };
                Term::proj(self.term(d), i)
            }
            8 => Term::app(Term::oracle("f"), self.term(d)),
            9 => {
                let ty = self.con(d.min(2));
                Term::efq(self.term(d), ty)
            }
            _ => self.term(0),
        }
    }

    pub fn con(&mut self, depth: usize) -> TypeCon {
        if depth == 0 {
            return match self.rng.gen_range(0..6) {
                0 => TypeCon::Bottom,
                _ => TypeCon::var(*RAW_CONS.choose(&mut self.rng).expect("non-empty")),
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..9) {
            0 => {
                let x = self.var();
                let dom = self.con(d);
                TypeCon::lam(x, dom, self.con(d))
            }
            1 => TypeCon::app(self.con(d), self.term(d.min(2))),
            2 => {
                let x = self.var();
                let dom = self.con(d);
                TypeCon::forall(x, dom, self.con(d))
            }
            3 => TypeCon::arrow(self.con(d), self.con(d)),
            4 => TypeCon::oplus(self.con(d)),
            5 => TypeCon::sigma(self.con(d)),
            6 => TypeCon::and(self.con(d), self.con(d)),
            _ => self.con(0),
        }
    }

    pub fn kind(&mut self, depth: usize) -> Kind {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return Kind::Star;
        }
        let x = self.var();
        let dom = self.con(2);
        Kind::pi(x, dom, self.kind(depth - 1))
    }

    pub fn depth(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }
}

/// One instance of the substitution lemma: `x ≠ y` and `y ∉ FV(t)`.
#[derive(Clone, Debug)]
pub struct SubstInstance {
    pub theta: Term,
    pub x: Name,
    pub y: Name,
    pub t: Term,
    pub s: Term,
}

pub fn subst_instance(seed: u64) -> SubstInstance {
    let mut g = RawGen::new(seed);
    let x = g.var();
    let y = loop {
        let y = g.var();
        if y != x {
            break y;
        }
    };
    let d = g.depth(1, 5);
    let theta = g.term(d);
    let d = g.depth(0, 3);
    let s = g.term(d);
    let t = loop {
        let d = g.depth(0, 3);
        let t = g.term(d);
        if !free_term_vars(&t).contains(&y) {
            break t;
        }
    };
    SubstInstance { theta, x, y, t, s }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{check_kind, infer_kind, infer_type};

    #[test]
    fn fixture_loads() {
        let fx = fixture();
        assert!(fx.env().lookup_term("p").is_some());
        assert!(fx.registry.get("f").is_some());
    }

    #[test]
    fn generated_terms_are_well_typed() {
        let fx = fixture();
        let mut g = TermGen::new(7);
        for _ in 0..200 {
            let (t, ty) = g.generate();
            assert!(t.depth() <= MAX_DEPTH);
            let found = infer_type(fx.env(), &t).unwrap_or_else(|e| panic!("{t}: {e}"));
            assert!(con_equiv(&found, &ty), "{t}: {found} vs {ty}");
        }
    }

    #[test]
    fn generated_constructors_are_well_kinded() {
        let fx = fixture();
        let mut g = ConGen::new(3);
        for _ in 0..200 {
            let c = g.generate();
            assert_eq!(
                infer_kind(fx.env(), &c).unwrap_or_else(|e| panic!("{c}: {e}")),
                Kind::Star
            );
        }
    }

    #[test]
    fn raw_generators_are_deterministic() {
        let (mut g1, mut g2) = (RawGen::new(5), RawGen::new(5));
        for _ in 0..20 {
            assert_eq!(g1.term(4), g2.term(4));
        }
        let k = RawGen::new(1).kind(3);
        let _ = check_kind(&Env::new(), &k);
    }

    #[test]
    fn subst_instances_meet_the_side_conditions() {
        for seed in 0..100 {
            let i = subst_instance(seed);
            assert_ne!(i.x, i.y);
            assert!(!free_term_vars(&i.t).contains(&i.y));
        }
    }
}
