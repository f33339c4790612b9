//! Syntax-directed kinding and typing. Environment lookup stands in for the
//! axiom and weakening rules; conversion is applied wherever two types are
//! compared.

use super::env::Env;
use super::error::{TypeError, TypeErrorKind as K, Within};
use crate::constructor::{
    con_equiv, kind_equiv, normalize_con, normalize_kind, Strategy, DEFAULT_FUEL,
};
use crate::oracle::{Arity, Guard, OracleDef, OracleError};
use crate::syntax::{
    canonicalize_con, free_con_vars, free_kind_vars, free_term_vars, fresh_name, occurs_free_con,
    rename_con, rename_kind, rename_term, substitute_in_con, substitute_in_kind, Kind, Name, Term,
    TypeCon,
};

fn norm(c: &TypeCon) -> Result<TypeCon, TypeError> {
    normalize_con(c, Strategy::LeftmostOutermost, DEFAULT_FUEL)
        .map_err(|e| TypeError::new(K::FuelExhausted, e.to_string()))
}

fn norm_kind(k: &Kind) -> Result<Kind, TypeError> {
    normalize_kind(k, DEFAULT_FUEL).map_err(|e| TypeError::new(K::FuelExhausted, e.to_string()))
}

/// A binder name not in `env` and not free in the scope it binds over.
fn open_binder(env: &Env, x: &str, free_in_scope: impl Fn(&str) -> bool) -> Option<Name> {
    env.contains(x)
        .then(|| fresh_name(x, |c| env.contains(c) || free_in_scope(c)))
}

pub fn check_kind(env: &Env, k: &Kind) -> Result<(), TypeError> {
    let mut env = env.clone();
    kind_wf(&mut env, k).map_err(|e| TypeError {
        kind: K::IllFormedKind,
        message: format!("ill-formed kind `{k}`: {}", e.message),
        path: e.path,
    })
}

fn kind_wf(env: &mut Env, k: &Kind) -> Result<(), TypeError> {
    match k {
        Kind::Star => Ok(()),
        Kind::Pi(x, a, body) => {
            let a = expect_type(env, a).within(0)?;
            let (x, body) = match open_binder(env, x, |c| free_kind_vars(body).contains(c)) {
                Some(x2) => {
                    let b = rename_kind(body, x, &x2);
                    (x2, b)
                }
                None => (x.clone(), (**body).clone()),
            };
            env.push_term(x, a);
            let r = kind_wf(env, &body).within(1);
            env.pop();
            r
        }
    }
}

pub fn infer_kind(env: &Env, c: &TypeCon) -> Result<Kind, TypeError> {
    let mut env = env.clone();
    kind_of(&mut env, c)
}

/// Checks that `c` is a type (has kind `*`) and returns its normal form.
pub fn check_is_type(env: &Env, c: &TypeCon) -> Result<TypeCon, TypeError> {
    let mut env = env.clone();
    expect_type(&mut env, c)
}

fn expect_type(env: &mut Env, c: &TypeCon) -> Result<TypeCon, TypeError> {
    let k = kind_of(env, c)?;
    if !kind_equiv(&k, &Kind::Star) {
        return Err(TypeError::new(
            K::NotAType,
            format!("`{c}` has kind `{k}`, but a type (kind `*`) is required"),
        ));
    }
    norm(c)
}

fn kind_of(env: &mut Env, c: &TypeCon) -> Result<Kind, TypeError> {
    match c {
        TypeCon::Var(a) => match env.lookup_con(a) {
            Some(k) => norm_kind(k),
            None => Err(TypeError::new(
                K::UnboundConVar,
                format!("unbound type constructor `{a}`"),
            )),
        },
        TypeCon::Bottom => Ok(Kind::Star),
        TypeCon::Lambda(x, a, body) | TypeCon::Forall(x, a, body) => {
            let a = expect_type(env, a).within(0)?;
            let (x, body) = match open_binder(env, x, |v| free_con_vars(body).contains(v)) {
                Some(x2) => {
                    let b = rename_con(body, x, &x2);
                    (x2, b)
                }
                None => (x.clone(), (**body).clone()),
            };
            env.push_term(x.clone(), a.clone());
            let r = if matches!(c, TypeCon::Forall(..)) {
                expect_type(env, &body).within(1).map(|_| Kind::Star)
            } else {
                kind_of(env, &body).within(1).map(|k| Kind::pi(x, a, k))
            };
            env.pop();
            r
        }
        TypeCon::App(f, t) => {
            let fk = kind_of(env, f).within(0)?;
            match norm_kind(&fk)? {
                Kind::Pi(x, a, body) => {
                    check(env, t, &a).within(1)?;
                    norm_kind(&substitute_in_kind(&body, &x, t))
                }
                Kind::Star => Err(TypeError::new(
                    K::NotAKindFunction,
                    format!("`{f}` has kind `*` and cannot be applied to `{t}`"),
                )),
            }
        }
        TypeCon::Oplus(a) | TypeCon::Sigma(a) => expect_type(env, a).within(0).map(|_| Kind::Star),
        TypeCon::And(a, b) => {
            expect_type(env, a).within(0)?;
            expect_type(env, b).within(1)?;
            Ok(Kind::Star)
        }
    }
}

/// The type of `t`, in constructor normal form.
pub fn infer_type(env: &Env, t: &Term) -> Result<TypeCon, TypeError> {
    let mut env = env.clone();
    infer(&mut env, t)
}

/// Checks `t` against `expected` up to conversion.
pub fn check_type(env: &Env, t: &Term, expected: &TypeCon) -> Result<(), TypeError> {
    let mut env = env.clone();
    check(&mut env, t, expected)
}

fn check(env: &mut Env, t: &Term, expected: &TypeCon) -> Result<(), TypeError> {
    let found = infer(env, t)?;
    if con_equiv(&found, expected) {
        Ok(())
    } else {
        Err(TypeError::new(
            K::TypeMismatch,
            format!("`{t}` has type `{found}`, expected `{expected}`"),
        ))
    }
}

fn infer(env: &mut Env, t: &Term) -> Result<TypeCon, TypeError> {
    match t {
        Term::Var(x) => match env.lookup_term(x) {
            Some(ty) => norm(ty),
            None => Err(TypeError::new(
                K::UnboundVar,
                format!("unbound variable `{x}`"),
            )),
        },
        Term::Oracle(o) => match env.oracle_type(o) {
            Some(ty) => norm(ty),
            None => Err(TypeError::new(
                K::UnknownOracle,
                format!("unknown oracle `#{o}`"),
            )),
        },
        Term::OracleApp(o, s) => {
            let ty = match env.oracle_type(o) {
                Some(ty) => norm(ty)?,
                None => {
                    return Err(TypeError::new(
                        K::UnknownOracle,
                        format!("unknown oracle `#{o}`"),
                    ))
                }
            };
            match ty {
                TypeCon::Forall(x, a, body) if matches!(*body, TypeCon::Sigma(_)) => {
                    check(env, s, &a).within(0)?;
                    norm(&substitute_in_con(&body, &x, s))
                }
                other => Err(TypeError::new(
                    K::NotAFunction,
                    format!("oracle `#{o}` has type `{other}` and takes no argument"),
                )),
            }
        }
        Term::Lambda(x, a, body) => {
            let a = expect_type(env, a).within(0)?;
            let (x, body) = match open_binder(env, x, |v| free_term_vars(body).contains(v)) {
                Some(x2) => {
                    let b = rename_term(body, x, &x2);
                    (x2, b)
                }
                None => (x.clone(), (**body).clone()),
            };
            env.push_term(x.clone(), a.clone());
            let b = infer(env, &body).within(1);
            env.pop();
            Ok(TypeCon::forall(x, a, b?))
        }
        Term::App(f, s) => {
            let ft = infer(env, f).within(0)?;
            match ft {
                TypeCon::Forall(x, a, body) => {
                    check(env, s, &a).within(1)?;
                    norm(&substitute_in_con(&body, &x, s))
                }
                other => Err(TypeError::new(
                    K::NotAFunction,
                    format!("`{f}` has type `{other}` and cannot be applied"),
                )),
            }
        }
        Term::Choice(a, p, b) => {
            if !p.is_probability() {
                return Err(TypeError::new(
                    K::ProbabilityOutOfRange,
                    format!("choice probability {p} is outside [0, 1]"),
                ));
            }
            let ta = infer(env, a).within(0)?;
            let tb = infer(env, b).within(1)?;
            if !con_equiv(&ta, &tb) {
                return Err(TypeError::new(
                    K::BranchTypeMismatch,
                    format!("choice branches have types `{ta}` and `{tb}`"),
                ));
            }
            Ok(TypeCon::oplus(ta))
        }
        Term::Nu(s) => match infer(env, s).within(0)? {
            TypeCon::Oplus(a) | TypeCon::Sigma(a) => Ok(*a),
            other => Err(TypeError::new(
                K::NotAChoice,
                format!("`!` needs a term of type `Oplus A` or `Sigma A`, found `{other}`"),
            )),
        },
        Term::Pair(a, b) => {
            let ta = infer(env, a).within(0)?;
            let tb = infer(env, b).within(1)?;
            Ok(TypeCon::and(ta, tb))
        }
        Term::Proj(s, i) => match infer(env, s).within(0)? {
            TypeCon::And(a0, a1) => Ok(if i.as_usize() == 0 { *a0 } else { *a1 }),
            other => Err(TypeError::new(
                K::NotAPair,
                format!("projection needs a term of type `A /\\ B`, found `{other}`"),
            )),
        },
        Term::Efq(s, p) => {
            let ts = infer(env, s).within(0)?;
            let p = expect_type(env, p).within(1)?;
            if !con_equiv(&ts, &TypeCon::Bottom) {
                return Err(TypeError::new(
                    K::EfqOnNonBottom,
                    format!("`efq` needs a term of type `Bot`, found `{ts}`"),
                ));
            }
            if p.contains_forall() {
                return Err(TypeError::new(
                    K::EfqTargetContainsForall,
                    format!("`efq` target `{p}` contains a universal quantifier"),
                ));
            }
            Ok(p)
        }
        Term::CompList(..) | Term::CompMerge(..) => Err(TypeError::new(
            K::ComputationTerm,
            "computation terms are typed by the evaluation predicate, not as ordinary terms",
        )),
    }
}

/// The connective tree of a type with embedded terms and binder names
/// erased. Used to compare the types of a term and its reducts.
pub fn skeleton(c: &TypeCon) -> TypeCon {
    fn erase(c: &TypeCon) -> TypeCon {
        match c {
            TypeCon::Var(_) | TypeCon::Bottom => c.clone(),
            TypeCon::Lambda(x, a, b) => TypeCon::lam(x.clone(), erase(a), erase(b)),
            TypeCon::Forall(x, a, b) => TypeCon::forall(x.clone(), erase(a), erase(b)),
            TypeCon::App(f, _) => TypeCon::app(erase(f), Term::var("_")),
            TypeCon::Oplus(a) => TypeCon::oplus(erase(a)),
            TypeCon::Sigma(a) => TypeCon::sigma(erase(a)),
            TypeCon::And(a, b) => TypeCon::and(erase(a), erase(b)),
        }
    }
    canonicalize_con(&erase(c))
}

/// Checks an oracle definition against a program environment: its type is
/// well formed, its outputs are closed, oracle-free and, where the expected
/// type is known statically, well typed.
pub fn validate_oracle(def: &OracleDef, env: &Env) -> Result<(), OracleError> {
    def.validate_shape()?;
    let ty = check_is_type(env, &def.ty).map_err(|e| OracleError::BadType {
        oracle: def.name.clone(),
        expected: "a well-formed type",
        found: format!("{}: {}", def.ty, e.message),
    })?;
    def.check_closed(|v| env.lookup_term(v).is_some())?;
    let ill = |out: &Term, e: TypeError| OracleError::OutputIllTyped {
        oracle: def.name.clone(),
        output: out.to_string(),
        reason: e.message,
    };
    match (def.arity, &ty) {
        (Arity::Nullary, TypeCon::Sigma(a)) => {
            for out in def.outputs() {
                check_type(env, out, a).map_err(|e| ill(out, e))?;
            }
        }
        (Arity::Unary, TypeCon::Forall(x, a, body)) => {
            let TypeCon::Sigma(b) = &**body else {
                unreachable!("shape validated")
            };
            for rule in &def.rules {
                if let Guard::Arg(p) = &rule.guard {
                    check_type(env, p, a).map_err(|e| ill(p, e))?;
                    let expected = substitute_in_con(b, x, p);
                    check_type(env, &rule.output, &expected).map_err(|e| ill(&rule.output, e))?;
                } else if !occurs_free_con(x, b) {
                    check_type(env, &rule.output, b).map_err(|e| ill(&rule.output, e))?;
                }
            }
            if !occurs_free_con(x, b) {
                check_type(env, &def.default, b).map_err(|e| ill(&def.default, e))?;
            }
        }
        _ => unreachable!("shape validated"),
    }
    Ok(())
}
