//! Small-step probabilistic evaluation.
//!
//! ```text
//! (\x:A. t) s        ↦1      t[s/x]                         β
//! <t0, t1>.i         ↦1      ti                             π
//! (t ⊕p s) ν         ↦p      t                              left
//! (t ⊕p s) ν         ↦(1-p)  s                              right
//! C[o ν]1 ... [o ν]n ↦1      C[s1]1 ... [sn]n               ω
//! ```
//!
//! where `si` is the oracle's output for hole `i` of the whole-term context
//! `C`. Unary oracles `(o u) ν` work the same way, the argument `u` being
//! passed along.

use std::fmt;
use std::str::FromStr;

use num::BigInt;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checker::{check_type, Env};
use crate::oracle::{Arity, OracleError, OracleRegistry};
use crate::rational::Rational;
use crate::syntax::{
    decompose_oracle_context, substitute_in_con, substitute_term, HoleContext, Name, Occurrence,
    Path, ProjIndex, Term, TypeCon,
};

/// Step labels of a static reduction sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Beta,
    Left,
    Right,
    Omega,
    Pi,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Beta => "β",
            Label::Left => "left",
            Label::Right => "right",
            Label::Omega => "ω",
            Label::Pi => "π",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "β" | "beta" => Ok(Label::Beta),
            "left" => Ok(Label::Left),
            "right" => Ok(Label::Right),
            "ω" | "omega" => Ok(Label::Omega),
            "π" | "pi" => Ok(Label::Pi),
            other => Err(format!("unknown step label `{other}`")),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Everything an oracle step needs: the whole-term context and the
/// occurrences filling its holes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleSite {
    pub oracle: Name,
    pub context: HoleContext,
    pub occurrences: Vec<Occurrence>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RedexKind {
    Beta,
    Proj,
    ChoiceNu,
    OracleNullary(OracleSite),
    OracleUnary(OracleSite),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermRedex {
    /// For oracle redexes, the first occurrence.
    pub path: Path,
    pub kind: RedexKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    pub term: Term,
    pub prob: Rational,
    pub label: Label,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ReduceError {
    #[error("no redex of the expected kind at path {0}")]
    InvalidRedex(Path),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("evaluation did not reach a normal form within {0} steps")]
    FuelExhausted(usize),
}

impl ReduceError {
    pub fn code(&self) -> &'static str {
        match self {
            ReduceError::InvalidRedex(_) => "invalid-redex",
            ReduceError::Oracle(e) => e.code(),
            ReduceError::FuelExhausted(_) => "fuel-exhausted",
        }
    }
}

fn oracle_occurrence(t: &Term) -> Option<(&str, bool)> {
    match t {
        Term::Nu(inner) => match &**inner {
            Term::Oracle(o) => Some((o, false)),
            Term::OracleApp(o, _) => Some((o, true)),
            _ => None,
        },
        _ => None,
    }
}

fn local_kind(t: &Term) -> Option<RedexKind> {
    match t {
        Term::App(f, _) if matches!(**f, Term::Lambda(..)) => Some(RedexKind::Beta),
        Term::Proj(p, _) if matches!(**p, Term::Pair(..)) => Some(RedexKind::Proj),
        Term::Nu(c) if matches!(**c, Term::Choice(..)) => Some(RedexKind::ChoiceNu),
        _ => None,
    }
}

/// All redexes of `t` in preorder, which is leftmost-outermost order. Each
/// oracle contributes one redex, placed at its first occurrence and covering
/// all of them. Type annotations are not searched.
pub fn find_redexes(t: &Term) -> Vec<TermRedex> {
    let mut found = Vec::new();
    let mut seen_oracles: Vec<&str> = Vec::new();
    walk(t, &mut Path::root(), &mut |node, path| {
        if let Some(kind) = local_kind(node) {
            found.push(TermRedex {
                path: path.clone(),
                kind,
            });
        } else if let Some((o, unary)) = oracle_occurrence(node) {
            if !seen_oracles.contains(&o) {
                seen_oracles.push(o);
                let (context, occurrences) = decompose_oracle_context(t, o);
                let site = OracleSite {
                    oracle: o.to_string(),
                    context,
                    occurrences,
                };
                let kind = if unary {
                    RedexKind::OracleUnary(site)
                } else {
                    RedexKind::OracleNullary(site)
                };
                found.push(TermRedex {
                    path: path.clone(),
                    kind,
                });
            }
        }
        true
    });
    found
}

/// Preorder walk over term positions; `f` returning false stops the descent
/// below that node.
fn walk<'a>(t: &'a Term, here: &mut Path, f: &mut dyn FnMut(&'a Term, &Path) -> bool) {
    if !f(t, here) {
        return;
    }
    for (i, c) in t.indexed_term_children() {
        here.0.push(i);
        walk(c, here, f);
        here.0.pop();
    }
}

/// The leftmost-outermost redex; `None` iff `t` is normal.
pub fn deterministic_strategy(t: &Term) -> Option<TermRedex> {
    let mut first: Option<(Path, Option<RedexKind>, Option<&str>)> = None;
    walk(t, &mut Path::root(), &mut |node, path| {
        if first.is_some() {
            return false;
        }
        if let Some(kind) = local_kind(node) {
            first = Some((path.clone(), Some(kind), None));
            return false;
        }
        if let Some((o, _)) = oracle_occurrence(node) {
            first = Some((path.clone(), None, Some(o)));
            return false;
        }
        true
    });
    let (path, kind, oracle) = first?;
    if let Some(kind) = kind {
        return Some(TermRedex { path, kind });
    }
    let o = oracle.expect("oracle occurrence");
    let unary = matches!(oracle_occurrence(t.term_at(&path)?), Some((_, true)));
    let (context, occurrences) = decompose_oracle_context(t, o);
    let site = OracleSite {
        oracle: o.to_string(),
        context,
        occurrences,
    };
    let kind = if unary {
        RedexKind::OracleUnary(site)
    } else {
        RedexKind::OracleNullary(site)
    };
    Some(TermRedex { path, kind })
}

pub fn is_normal(t: &Term) -> bool {
    deterministic_strategy(t).is_none()
}

fn contract_local(node: &Term) -> Option<Vec<(Term, Rational, Label)>> {
    match node {
        Term::App(f, s) => match &**f {
            Term::Lambda(x, _, body) => Some(vec![(
                substitute_term(body, x, s),
                Rational::one(),
                Label::Beta,
            )]),
            _ => None,
        },
        Term::Proj(p, i) => match &**p {
            Term::Pair(a, b) => {
                let picked = match i {
                    ProjIndex::Zero => a,
                    ProjIndex::One => b,
                };
                Some(vec![((**picked).clone(), Rational::one(), Label::Pi)])
            }
            _ => None,
        },
        Term::Nu(c) => match &**c {
            Term::Choice(a, p, b) => Some(vec![
                ((**a).clone(), p.clone(), Label::Left),
                ((**b).clone(), p.complement(), Label::Right),
            ]),
            _ => None,
        },
        _ => None,
    }
}

/// Normalizes `t` using β and projection steps only, at any term position,
/// leftmost-outermost. `None` when `fuel` runs out.
pub fn normalize_pure(t: &Term, fuel: usize) -> Option<Term> {
    let mut cur = t.clone();
    for _ in 0..=fuel {
        let mut target: Option<Path> = None;
        walk(&cur, &mut Path::root(), &mut |node, path| {
            if target.is_some() {
                return false;
            }
            if matches!(local_kind(node), Some(RedexKind::Beta | RedexKind::Proj)) {
                target = Some(path.clone());
                return false;
            }
            true
        });
        let Some(path) = target else {
            return Some(cur);
        };
        let node = cur.term_at(&path)?;
        let (next, _, _) = contract_local(node)?.remove(0);
        cur = cur.replace_term_at(&path, next)?;
    }
    None
}

/// One evaluation session: oracle definitions plus, optionally, the typing
/// environment used to check oracle outputs of unary oracles.
#[derive(Clone, Copy)]
pub struct Reducer<'a> {
    registry: &'a OracleRegistry,
    env: Option<&'a Env>,
}

/// Result of [`Reducer::run_sample`].
#[derive(Clone, Debug)]
pub struct Sample {
    pub normal_form: Term,
    pub prob: Rational,
    pub trace: Vec<StepOutcome>,
}

impl<'a> Reducer<'a> {
    pub fn new(registry: &'a OracleRegistry) -> Self {
        Reducer {
            registry,
            env: None,
        }
    }

    pub fn with_env(registry: &'a OracleRegistry, env: &'a Env) -> Self {
        Reducer {
            registry,
            env: Some(env),
        }
    }

    pub fn registry(&self) -> &'a OracleRegistry {
        self.registry
    }

    /// All one-step outcomes of contracting `r` in `t`.
    pub fn step(&self, t: &Term, r: &TermRedex) -> Result<Vec<StepOutcome>, ReduceError> {
        match &r.kind {
            RedexKind::Beta | RedexKind::Proj | RedexKind::ChoiceNu => {
                let node = t
                    .term_at(&r.path)
                    .ok_or_else(|| ReduceError::InvalidRedex(r.path.clone()))?;
                if local_kind(node).as_ref() != Some(&r.kind) {
                    return Err(ReduceError::InvalidRedex(r.path.clone()));
                }
                let outs = contract_local(node)
                    .ok_or_else(|| ReduceError::InvalidRedex(r.path.clone()))?;
                outs.into_iter()
                    .map(|(contractum, prob, label)| {
                        let term = t
                            .replace_term_at(&r.path, contractum)
                            .ok_or_else(|| ReduceError::InvalidRedex(r.path.clone()))?;
                        Ok(StepOutcome { term, prob, label })
                    })
                    .collect()
            }
            RedexKind::OracleNullary(site) | RedexKind::OracleUnary(site) => {
                let term = self.fire_oracle(site)?;
                Ok(vec![StepOutcome {
                    term,
                    prob: Rational::one(),
                    label: Label::Omega,
                }])
            }
        }
    }

    /// The outputs the oracle assigns to each hole of `site`.
    pub fn oracle_outputs(&self, site: &OracleSite) -> Result<Vec<Term>, ReduceError> {
        let def = self.registry.lookup(&site.oracle)?;
        let mut outs = Vec::with_capacity(site.occurrences.len());
        for (i, occ) in site.occurrences.iter().enumerate() {
            let out = def.eval(&site.context, i + 1, occ.arg.as_ref())?;
            if let (Some(env), Arity::Unary, Some(arg)) = (self.env, def.arity, occ.arg.as_ref()) {
                if let TypeCon::Forall(x, _, body) = &def.ty {
                    if let TypeCon::Sigma(b) = &**body {
                        let expected = substitute_in_con(b, x, arg);
                        check_type(env, out, &expected).map_err(|e| {
                            OracleError::OutputIllTyped {
                                oracle: def.name.clone(),
                                output: out.to_string(),
                                reason: e.to_string(),
                            }
                        })?;
                    }
                }
            }
            outs.push(out.clone());
        }
        Ok(outs)
    }

    fn fire_oracle(&self, site: &OracleSite) -> Result<Term, ReduceError> {
        let outs = self.oracle_outputs(site)?;
        Ok(site.context.fill_all_avoiding(&outs))
    }

    /// Evaluates `t` to a normal form under the deterministic strategy,
    /// resolving each choice with the generator seeded by `seed` on
    /// stream `stream`.
    pub fn run_sample_stream(
        &self,
        t: &Term,
        seed: u64,
        stream: u64,
        fuel: usize,
    ) -> Result<Sample, ReduceError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut cur = t.clone();
        let mut prob = Rational::one();
        let mut trace = Vec::new();
        for _ in 0..fuel {
            let Some(r) = deterministic_strategy(&cur) else {
                return Ok(Sample {
                    normal_form: cur,
                    prob,
                    trace,
                });
            };
            let mut outs = self.step(&cur, &r)?;
            let picked = if outs.len() == 2 {
                let go_left = draw_left(&mut rng, &outs[0].prob);
                outs.swap_remove(if go_left { 0 } else { 1 })
            } else {
                outs.swap_remove(0)
            };
            prob = &prob * &picked.prob;
            cur = picked.term.clone();
            trace.push(picked);
        }
        if is_normal(&cur) {
            Ok(Sample {
                normal_form: cur,
                prob,
                trace,
            })
        } else {
            Err(ReduceError::FuelExhausted(fuel))
        }
    }

    pub fn run_sample(&self, t: &Term, seed: u64, fuel: usize) -> Result<Sample, ReduceError> {
        self.run_sample_stream(t, seed, 0, fuel)
    }
}

/// Left iff `u / 2^64 < p` for a uniform 64-bit `u`, compared exactly.
fn draw_left(rng: &mut ChaCha8Rng, p: &Rational) -> bool {
    let u = BigInt::from(rng.next_u64());
    u * p.denom() < p.numer() * (BigInt::from(1u8) << 64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Guard, OracleDef, OracleRule};
    use crate::surface::parse_term;

    fn t(src: &str) -> Term {
        parse_term(src).unwrap()
    }

    fn cyclic() -> OracleRegistry {
        OracleRegistry::from_defs([OracleDef {
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
        }])
        .unwrap()
    }

    #[test]
    fn redex_discovery() {
        assert!(find_redexes(&t("a")).is_empty());
        let rs = find_redexes(&t("(\\x:A. x) a"));
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].kind, RedexKind::Beta);
        let rs = find_redexes(&t("<#c!, #c!>"));
        assert_eq!(rs.len(), 1);
        match &rs[0].kind {
            RedexKind::OracleNullary(site) => assert_eq!(site.occurrences.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
        let r = deterministic_strategy(&t("(\\x:A. x) (choose[1/2]{a}{b} !)")).unwrap();
        assert_eq!((r.path, r.kind), (Path::root(), RedexKind::Beta));
        let r = deterministic_strategy(&t("choose[1/2]{a}{b} !")).unwrap();
        assert_eq!(r.kind, RedexKind::ChoiceNu);
    }

    #[test]
    fn steps() {
        let reg = OracleRegistry::new();
        let red = Reducer::new(&reg);
        let c = t("choose[1/4]{a}{b} !");
        let outs = red.step(&c, &deterministic_strategy(&c).unwrap()).unwrap();
        assert_eq!(outs.len(), 2);
        assert_eq!(
            (outs[0].term.clone(), outs[0].prob.clone(), outs[0].label),
            (t("a"), Rational::new(1, 4), Label::Left)
        );
        assert_eq!(
            (outs[1].term.clone(), outs[1].prob.clone(), outs[1].label),
            (t("b"), Rational::new(3, 4), Label::Right)
        );
        let p = t("<a, b>.1");
        let outs = red.step(&p, &deterministic_strategy(&p).unwrap()).unwrap();
        assert_eq!(
            outs,
            vec![StepOutcome {
                term: t("b"),
                prob: Rational::one(),
                label: Label::Pi
            }]
        );
    }

    #[test]
    fn oracle_step_rewrites_every_occurrence() {
        let reg = cyclic();
        let red = Reducer::new(&reg);
        let tup = t("<#c!, #c!, #c!>");
        let outs = red
            .step(&tup, &deterministic_strategy(&tup).unwrap())
            .unwrap();
        assert_eq!(outs.len(), 1);
        assert_eq!(outs[0].term, t("<a, a, b>"));
        assert_eq!(outs[0].label, Label::Omega);
        assert!(is_normal(&outs[0].term));
    }

    #[test]
    fn sampling() {
        let reg = OracleRegistry::new();
        let red = Reducer::new(&reg);
        let s = red.run_sample(&t("a"), 7, 100).unwrap();
        assert_eq!(
            (s.normal_form, s.prob, s.trace.len()),
            (t("a"), Rational::one(), 0)
        );
        let s = red.run_sample(&t("choose[1]{a}{b} !"), 7, 100).unwrap();
        assert_eq!(s.normal_form, t("a"));
        assert_eq!(s.trace[0].label, Label::Left);
        let fair = t("choose[1/2]{a}{b} !");
        let first = red.run_sample(&fair, 3, 100).unwrap().normal_form;
        for _ in 0..5 {
            assert_eq!(red.run_sample(&fair, 3, 100).unwrap().normal_form, first);
        }
        let err = red
            .run_sample(&t("(\\x:A. x) ((\\y:A. y) a)"), 0, 1)
            .unwrap_err();
        assert_eq!(err, ReduceError::FuelExhausted(1));
    }

    #[test]
    fn pure_normalization_skips_choices() {
        let u = normalize_pure(&t("(\\x:A. <x, choose[1/2]{a}{b} !>) a"), 10).unwrap();
        assert_eq!(u, t("<a, choose[1/2]{a}{b} !>"));
    }
}
