//! The static evaluation predicate `t ⊨^p s`: reduction traces, their
//! verification, and exact enumeration of output distributions.

use std::collections::BTreeMap;

use crate::checker::{infer_type, skeleton, Env, TypeError};
use crate::rational::Rational;
use crate::reducer::{
    deterministic_strategy, find_redexes, Label, RedexKind, ReduceError, Reducer, StepOutcome,
};
use crate::syntax::{alpha_eq_term, canonicalize_term, Name, Term};

/// One step `before ↦q after` labelled `ρ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceQuadruple {
    pub before: Term,
    pub after: Term,
    pub prob: Rational,
    pub label: Label,
}

impl TraceQuadruple {
    fn same_as(&self, other: &TraceQuadruple) -> bool {
        self.label == other.label
            && self.prob == other.prob
            && alpha_eq_term(&self.before, &other.before)
            && alpha_eq_term(&self.after, &other.after)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// A single static reduction sequence.
    Trace(Vec<TraceQuadruple>),
    /// Pairwise ND-distinct sequences with a common start and end.
    Merge(Vec<Vec<TraceQuadruple>>),
    /// An oracle-tuple reduction: the `n`-tuple of the source and the
    /// outputs it reduced to.
    Frequency { tuple: Term, outputs: Vec<Term> },
}

/// `source ⊨^prob target`, with the evidence for it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapstoJudgment {
    pub source: Term,
    pub target: Term,
    pub prob: Rational,
    pub witness: Witness,
}

impl MapstoJudgment {
    /// The witness as a computation term: `[t1; ...; tn]^p` for a single
    /// trace, `[t, [k1 / ... / kn], s]^p` for a merge.
    pub fn witness_term(&self) -> Term {
        let p = Some(self.prob.clone());
        match &self.witness {
            Witness::Trace(qs) => Term::CompList(sequence_unchecked(&self.source, qs), p),
            Witness::Merge(ks) => Term::CompMerge(
                Box::new(self.source.clone()),
                ks.iter()
                    .map(|k| sequence_unchecked(&self.source, k))
                    .collect(),
                Box::new(self.target.clone()),
                p,
            ),
            Witness::Frequency { tuple, outputs } => {
                Term::CompList(vec![tuple.clone(), Term::tuple(outputs.clone())], p)
            }
        }
    }

    pub fn has_omega(&self) -> bool {
        match &self.witness {
            Witness::Trace(qs) => qs.iter().any(|q| q.label == Label::Omega),
            Witness::Merge(ks) => ks.iter().flatten().any(|q| q.label == Label::Omega),
            Witness::Frequency { .. } => true,
        }
    }
}

fn sequence_unchecked(start: &Term, qs: &[TraceQuadruple]) -> Vec<Term> {
    let mut out = vec![qs
        .first()
        .map(|q| q.before.clone())
        .unwrap_or_else(|| start.clone())];
    out.extend(qs.iter().map(|q| q.after.clone()));
    out
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("step {0} does not start where the previous one ended")]
    BrokenChain(usize),
    #[error("step {0} is not an instance of any reduction rule")]
    RuleMismatch(usize),
    #[error("probability mismatch: claimed {claimed}, derived {derived}")]
    ProbabilityMismatch {
        claimed: Rational,
        derived: Rational,
    },
    #[error("traces {0} and {1} are not ND-distinct")]
    NDConditionViolated(usize, usize),
    #[error("oracle output at step {0} differs from the oracle's replay")]
    OracleReplayMismatch(usize),
    #[error("trace ends in `{found}`, but the claim names `{claimed}`")]
    TargetMismatch { claimed: String, found: String },
    #[error("source and target types differ: `{source_type}` vs `{target_type}`")]
    TypeShapeMismatch {
        source_type: String,
        target_type: String,
    },
    #[error("malformed witness: {0}")]
    MalformedWitness(String),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
}

impl TraceError {
    pub fn code(&self) -> &'static str {
        match self {
            TraceError::BrokenChain(_) => "broken-chain",
            TraceError::RuleMismatch(_) => "rule-mismatch",
            TraceError::ProbabilityMismatch { .. } => "probability-mismatch",
            TraceError::NDConditionViolated(..) => "nd-condition-violated",
            TraceError::OracleReplayMismatch(_) => "oracle-replay-mismatch",
            TraceError::TargetMismatch { .. } => "target-mismatch",
            TraceError::TypeShapeMismatch { .. } => "type-shape-mismatch",
            TraceError::MalformedWitness(_) => "malformed-witness",
            TraceError::Type(e) => e.code(),
            TraceError::Reduce(e) => e.code(),
        }
    }
}

/// The terms a trace passes through, starting from `start`.
pub fn produced_sequence(start: &Term, trace: &[TraceQuadruple]) -> Result<Vec<Term>, TraceError> {
    let mut out = vec![start.clone()];
    for (i, q) in trace.iter().enumerate() {
        if !alpha_eq_term(out.last().expect("non-empty"), &q.before) {
            return Err(TraceError::BrokenChain(i));
        }
        out.push(q.after.clone());
    }
    Ok(out)
}

/// `κ1 ≢ND κ2`: neither trace has an ω step, and at the first position
/// where they differ both rewrite the same term by the two sides of one
/// choice redex.
pub fn not_equiv_nd(k1: &[TraceQuadruple], k2: &[TraceQuadruple]) -> bool {
    if k1.iter().chain(k2).any(|q| q.label == Label::Omega) {
        return false;
    }
    let Some(i) = (0..k1.len().min(k2.len())).find(|&i| !k1[i].same_as(&k2[i])) else {
        return false;
    };
    let (r, s) = (&k1[i], &k2[i]);
    if !alpha_eq_term(&r.before, &s.before) {
        return false;
    }
    let (l, rt) = match (r.label, s.label) {
        (Label::Left, Label::Right) => (r, s),
        (Label::Right, Label::Left) => (s, r),
        _ => return false,
    };
    if rt.prob != l.prob.complement() {
        return false;
    }
    // both must come from one choice redex of the common term
    let reg = crate::oracle::OracleRegistry::new();
    let red = Reducer::new(&reg);
    find_redexes(&l.before)
        .iter()
        .filter(|x| x.kind == RedexKind::ChoiceNu)
        .any(|x| {
            let Ok(outs) = red.step(&l.before, x) else {
                return false;
            };
            outs.len() == 2
                && alpha_eq_term(&outs[0].term, &l.after)
                && outs[0].prob == l.prob
                && alpha_eq_term(&outs[1].term, &rt.after)
                && outs[1].prob == rt.prob
        })
}

/// Verifies that `q` is one step of some redex of `q.before`, not only the
/// one the deterministic strategy would pick.
fn check_step(reducer: &Reducer<'_>, q: &TraceQuadruple, index: usize) -> Result<(), TraceError> {
    let mut oracle_seen = false;
    let mut prob_only = None;
    for r in find_redexes(&q.before) {
        let is_oracle = matches!(
            r.kind,
            RedexKind::OracleNullary(_) | RedexKind::OracleUnary(_)
        );
        oracle_seen |= is_oracle;
        let outs = match reducer.step(&q.before, &r) {
            Ok(outs) => outs,
            Err(_) if is_oracle => continue,
            Err(e) => return Err(e.into()),
        };
        for o in outs {
            if o.label == q.label && alpha_eq_term(&o.term, &q.after) {
                if o.prob == q.prob {
                    return Ok(());
                }
                prob_only = Some(o.prob);
            }
        }
    }
    if let Some(derived) = prob_only {
        return Err(TraceError::ProbabilityMismatch {
            claimed: q.prob.clone(),
            derived,
        });
    }
    if q.label == Label::Omega && oracle_seen {
        return Err(TraceError::OracleReplayMismatch(index));
    }
    Err(TraceError::RuleMismatch(index))
}

/// Checks a chained trace from `start`, returning its end and probability.
fn check_chain(
    reducer: &Reducer<'_>,
    start: &Term,
    qs: &[TraceQuadruple],
) -> Result<(Term, Rational), TraceError> {
    let seq = produced_sequence(start, qs)?;
    let mut prob = Rational::one();
    for (i, q) in qs.iter().enumerate() {
        check_step(reducer, q, i)?;
        prob = &prob * &q.prob;
    }
    Ok((seq.last().expect("non-empty").clone(), prob))
}

fn expect_target(found: &Term, claimed: &Term) -> Result<(), TraceError> {
    if alpha_eq_term(found, claimed) {
        Ok(())
    } else {
        Err(TraceError::TargetMismatch {
            claimed: claimed.to_string(),
            found: found.to_string(),
        })
    }
}

fn expect_prob(claimed: &Rational, derived: Rational) -> Result<(), TraceError> {
    if *claimed == derived {
        Ok(())
    } else {
        Err(TraceError::ProbabilityMismatch {
            claimed: claimed.clone(),
            derived,
        })
    }
}

/// Re-derives `claim` from its witness by the rules of the evaluation
/// predicate and recomputes every probability exactly.
pub fn check_trace(
    env: &Env,
    reducer: &Reducer<'_>,
    claim: &MapstoJudgment,
) -> Result<(), TraceError> {
    let source_ty = infer_type(env, &claim.source)?;
    let target_ty = infer_type(env, &claim.target)?;
    if skeleton(&source_ty) != skeleton(&target_ty) {
        return Err(TraceError::TypeShapeMismatch {
            source_type: source_ty.to_string(),
            target_type: target_ty.to_string(),
        });
    }
    match &claim.witness {
        Witness::Trace(qs) => {
            let (end, prob) = check_chain(reducer, &claim.source, qs)?;
            expect_target(&end, &claim.target)?;
            expect_prob(&claim.prob, prob)
        }
        Witness::Merge(ks) => {
            if ks.is_empty() {
                return Err(TraceError::MalformedWitness("empty merge".into()));
            }
            let mut total = Rational::zero();
            for k in ks {
                let (end, prob) = check_chain(reducer, &claim.source, k)?;
                expect_target(&end, &claim.target)?;
                total = &total + &prob;
            }
            for i in 0..ks.len() {
                for j in i + 1..ks.len() {
                    if !not_equiv_nd(&ks[i], &ks[j]) {
                        return Err(TraceError::NDConditionViolated(i, j));
                    }
                }
            }
            expect_prob(&claim.prob, total)
        }
        Witness::Frequency { tuple, outputs } => {
            let n = outputs.len();
            if n == 0 {
                return Err(TraceError::MalformedWitness("empty oracle tuple".into()));
            }
            let is_oracle_form = matches!(&claim.source, Term::Nu(inner) if matches!(**inner, Term::Oracle(_) | Term::OracleApp(..)));
            if !is_oracle_form {
                return Err(TraceError::MalformedWitness(format!(
                    "`{}` is not an oracle invocation",
                    claim.source
                )));
            }
            let expected_tuple = Term::tuple(vec![claim.source.clone(); n]);
            if !alpha_eq_term(tuple, &expected_tuple) {
                return Err(TraceError::MalformedWitness(
                    "tuple does not repeat the source".into(),
                ));
            }
            let step = TraceQuadruple {
                before: tuple.clone(),
                after: Term::tuple(outputs.clone()),
                prob: Rational::one(),
                label: Label::Omega,
            };
            check_step(reducer, &step, 0)?;
            let m = outputs
                .iter()
                .filter(|o| alpha_eq_term(o, &claim.target))
                .count();
            if m == 0 {
                return Err(TraceError::TargetMismatch {
                    claimed: claim.target.to_string(),
                    found: Term::tuple(outputs.clone()).to_string(),
                });
            }
            expect_prob(&claim.prob, Rational::new(m as i64, n as i64))
        }
    }
}

/// Finite map from normal forms (up to α) to probabilities, ordered by
/// printed form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Distribution {
    entries: Vec<(Term, Rational)>,
}

impl Distribution {
    pub fn from_entries(mut entries: Vec<(Term, Rational)>) -> Self {
        entries.sort_by_key(|(t, _)| t.to_string());
        Distribution { entries }
    }

    pub fn entries(&self) -> &[(Term, Rational)] {
        &self.entries
    }

    pub fn get(&self, t: &Term) -> Option<&Rational> {
        self.entries
            .iter()
            .find(|(u, _)| alpha_eq_term(u, t))
            .map(|(_, p)| p)
    }

    pub fn total(&self) -> Rational {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn canonical_key(t: &Term) -> String {
    canonicalize_term(t).to_string()
}

struct Leaf {
    term: Term,
    prob: Rational,
    trace: Vec<TraceQuadruple>,
}

/// Expands the reduction tree of `t` under the deterministic strategy,
/// branching at choices, and groups the normal forms reached. `fuel` bounds
/// the total number of steps taken over all branches.
pub fn enumerate_distribution(
    reducer: &Reducer<'_>,
    t: &Term,
    fuel: usize,
) -> Result<(Distribution, Vec<MapstoJudgment>), TraceError> {
    let mut leaves: Vec<Leaf> = Vec::new();
    let mut stack: Vec<Leaf> = vec![Leaf {
        term: t.clone(),
        prob: Rational::one(),
        trace: Vec::new(),
    }];
    let mut spent = 0usize;
    while let Some(node) = stack.pop() {
        let Some(r) = deterministic_strategy(&node.term) else {
            leaves.push(node);
            continue;
        };
        spent += 1;
        if spent > fuel {
            return Err(ReduceError::FuelExhausted(fuel).into());
        }
        let outs: Vec<StepOutcome> = reducer.step(&node.term, &r)?;
        // push right before left so the left branch is explored first
        for o in outs.into_iter().rev() {
            if o.prob.is_zero() {
                continue;
            }
            let mut trace = node.trace.clone();
            trace.push(TraceQuadruple {
                before: node.term.clone(),
                after: o.term.clone(),
                prob: o.prob.clone(),
                label: o.label,
            });
            stack.push(Leaf {
                term: o.term,
                prob: &node.prob * &o.prob,
                trace,
            });
        }
    }

    let mut groups: BTreeMap<String, Vec<Leaf>> = BTreeMap::new();
    for leaf in leaves {
        groups
            .entry(canonical_key(&leaf.term))
            .or_default()
            .push(leaf);
    }
    let mut entries = Vec::new();
    let mut judgments = Vec::new();
    for (_, group) in groups {
        let target = group[0].term.clone();
        let total: Rational = group.iter().map(|l| &l.prob).sum();
        entries.push((target.clone(), total.clone()));
        let omega = group
            .iter()
            .any(|l| l.trace.iter().any(|q| q.label == Label::Omega));
        if group.len() == 1 || omega {
            for leaf in group {
                judgments.push(MapstoJudgment {
                    source: t.clone(),
                    target: leaf.term,
                    prob: leaf.prob,
                    witness: Witness::Trace(leaf.trace),
                });
            }
        } else {
            judgments.push(MapstoJudgment {
                source: t.clone(),
                target,
                prob: total,
                witness: Witness::Merge(group.into_iter().map(|l| l.trace).collect()),
            });
        }
    }
    judgments.sort_by_key(|j| j.target.to_string());
    Ok((Distribution::from_entries(entries), judgments))
}

/// The frequency view of an oracle: reduces the `n`-tuple of `o ν` (or
/// `(o t) ν`) in one oracle step and reports each distinct output `s` with
/// probability `m/n`, `m` being the number of holes that received `s`.
pub fn oracle_frequency(
    reducer: &Reducer<'_>,
    oracle: &str,
    arg: Option<&Term>,
    n: usize,
) -> Result<(Distribution, Vec<MapstoJudgment>), TraceError> {
    if n == 0 {
        return Err(TraceError::MalformedWitness(
            "sample width must be at least 1".into(),
        ));
    }
    let source = match arg {
        None => Term::nu(Term::oracle(oracle)),
        Some(u) => Term::nu(Term::app(Term::oracle(oracle), u.clone())),
    };
    let tuple = Term::tuple(vec![source.clone(); n]);
    let site = find_redexes(&tuple)
        .into_iter()
        .find_map(|r| match r.kind {
            RedexKind::OracleNullary(s) | RedexKind::OracleUnary(s) if s.oracle == oracle => {
                Some(s)
            }
            _ => None,
        })
        .ok_or_else(|| TraceError::MalformedWitness(format!("no redex of oracle `{oracle}`")))?;
    let outputs = reducer.oracle_outputs(&site)?;
    let mut counts: Vec<(Term, usize)> = Vec::new();
    for o in &outputs {
        match counts.iter_mut().find(|(u, _)| alpha_eq_term(u, o)) {
            Some((_, c)) => *c += 1,
            None => counts.push((o.clone(), 1)),
        }
    }
    let entries: Vec<(Term, Rational)> = counts
        .iter()
        .map(|(o, m)| (o.clone(), Rational::new(*m as i64, n as i64)))
        .collect();
    let dist = Distribution::from_entries(entries);
    let judgments = dist
        .entries()
        .iter()
        .map(|(o, p)| MapstoJudgment {
            source: source.clone(),
            target: o.clone(),
            prob: p.clone(),
            witness: Witness::Frequency {
                tuple: tuple.clone(),
                outputs: outputs.clone(),
            },
        })
        .collect();
    Ok((dist, judgments))
}

/// Candidate quadruples taking `u` to `v` in one step.
fn candidate_steps(reducer: &Reducer<'_>, u: &Term, v: &Term) -> Vec<TraceQuadruple> {
    let mut out: Vec<TraceQuadruple> = Vec::new();
    for r in find_redexes(u) {
        let Ok(outs) = reducer.step(u, &r) else {
            continue;
        };
        for o in outs {
            if alpha_eq_term(&o.term, v) {
                let q = TraceQuadruple {
                    before: u.clone(),
                    after: v.clone(),
                    prob: o.prob,
                    label: o.label,
                };
                if !out.iter().any(|p| p.same_as(&q)) {
                    out.push(q);
                }
            }
        }
    }
    out
}

const MAX_READINGS: usize = 64;

/// Every way (up to a bound) of reading a term sequence as a trace.
fn readings(reducer: &Reducer<'_>, seq: &[Term]) -> Vec<Vec<TraceQuadruple>> {
    let mut acc: Vec<Vec<TraceQuadruple>> = vec![Vec::new()];
    for w in seq.windows(2) {
        let cands = candidate_steps(reducer, &w[0], &w[1]);
        let mut next = Vec::new();
        'outer: for prefix in &acc {
            for c in &cands {
                let mut p = prefix.clone();
                p.push(c.clone());
                next.push(p);
                if next.len() >= MAX_READINGS {
                    break 'outer;
                }
            }
        }
        acc = next;
    }
    acc
}

/// Types a computation term `[κ]^p` or `[t, [κ1 / ... / κn], s]^p` as a
/// judgment `t ⊨^p s`, reconstructing each step's rule and checking the
/// result. Each `κ` lists the terms passed through, start and end included.
pub fn type_of_trace_term(
    env: &Env,
    reducer: &Reducer<'_>,
    t: &Term,
) -> Result<MapstoJudgment, TraceError> {
    let finish = |source: Term,
                  target: Term,
                  claimed: &Option<Rational>,
                  derived: Rational,
                  witness: Witness| {
        let prob = claimed.clone().unwrap_or(derived);
        let j = MapstoJudgment {
            source,
            target,
            prob,
            witness,
        };
        check_trace(env, reducer, &j).map(|_| j)
    };
    match t {
        Term::CompList(seq, p) => {
            let (Some(source), Some(target)) = (seq.first(), seq.last()) else {
                return Err(TraceError::MalformedWitness("empty computation".into()));
            };
            let mut last_err = TraceError::RuleMismatch(0);
            for qs in readings(reducer, seq) {
                let derived = qs
                    .iter()
                    .map(|q| &q.prob)
                    .fold(Rational::one(), |a, b| &a * b);
                match finish(
                    source.clone(),
                    target.clone(),
                    p,
                    derived,
                    Witness::Trace(qs),
                ) {
                    Ok(j) => return Ok(j),
                    Err(e) => last_err = e,
                }
            }
            if seq.len() > 1 && readings(reducer, seq).is_empty() {
                let bad = seq
                    .windows(2)
                    .position(|w| candidate_steps(reducer, &w[0], &w[1]).is_empty())
                    .unwrap_or(0);
                return Err(TraceError::RuleMismatch(bad));
            }
            Err(last_err)
        }
        Term::CompMerge(source, ks, target, p) => {
            let per_branch: Vec<Vec<Vec<TraceQuadruple>>> =
                ks.iter().map(|k| readings(reducer, k)).collect();
            if let Some(i) = per_branch.iter().position(|r| r.is_empty()) {
                return Err(TraceError::MalformedWitness(format!(
                    "branch {i} is not a reduction sequence"
                )));
            }
            // pick one reading per branch such that all pairs are ND-distinct
            fn search(
                per_branch: &[Vec<Vec<TraceQuadruple>>],
                chosen: &mut Vec<Vec<TraceQuadruple>>,
            ) -> bool {
                let i = chosen.len();
                if i == per_branch.len() {
                    return true;
                }
                for cand in &per_branch[i] {
                    if chosen.iter().all(|c| not_equiv_nd(c, cand)) {
                        chosen.push(cand.clone());
                        if search(per_branch, chosen) {
                            return true;
                        }
                        chosen.pop();
                    }
                }
                false
            }
            let mut chosen = Vec::new();
            if !search(&per_branch, &mut chosen) {
                return Err(TraceError::NDConditionViolated(
                    0,
                    1.min(ks.len().saturating_sub(1)),
                ));
            }
            let derived = chosen
                .iter()
                .map(|qs| {
                    qs.iter()
                        .map(|q| &q.prob)
                        .fold(Rational::one(), |a, b| &a * b)
                })
                .fold(Rational::zero(), |a, b| &a + &b);
            finish(
                (**source).clone(),
                (**target).clone(),
                p,
                derived,
                Witness::Merge(chosen),
            )
        }
        other => Err(TraceError::MalformedWitness(format!(
            "`{other}` is not a computation term"
        ))),
    }
}

/// Renders a trace one step per line: `before  ↦q  after  [ρ]`.
pub fn render_trace(qs: &[TraceQuadruple]) -> Vec<String> {
    qs.iter()
        .map(|q| format!("{}  ↦{}  {}  [{}]", q.before, q.prob, q.after, q.label))
        .collect()
}

/// Looks up the oracle name of a bare oracle form `#o !` or `(#o t) !`.
pub fn bare_oracle_form(t: &Term) -> Option<(Name, Option<Term>)> {
    match t {
        Term::Nu(inner) => match &**inner {
            Term::Oracle(o) => Some((o.clone(), None)),
            Term::OracleApp(o, a) => Some((o.clone(), Some((**a).clone()))),
            _ => None,
        },
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Arity, Guard, OracleDef, OracleRegistry, OracleRule};
    use crate::surface::parse_term;
    use crate::syntax::{Kind, TypeCon};

    fn t(src: &str) -> Term {
        parse_term(src).unwrap()
    }

    fn env() -> Env {
        let mut e = Env::new();
        e.push_con("A", Kind::Star);
        e.push_term("a", TypeCon::var("A"));
        e.push_term("b", TypeCon::var("A"));
        e.set_oracle_type("c", TypeCon::sigma(TypeCon::var("A")));
        e
    }

    fn registry() -> OracleRegistry {
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

    fn choice_trace(src: &str) -> (Vec<TraceQuadruple>, Vec<TraceQuadruple>) {
        let reg = OracleRegistry::new();
        let red = Reducer::new(&reg);
        let s = t(src);
        let r = deterministic_strategy(&s).unwrap();
        let outs = red.step(&s, &r).unwrap();
        let q = |o: &StepOutcome| TraceQuadruple {
            before: s.clone(),
            after: o.term.clone(),
            prob: o.prob.clone(),
            label: o.label,
        };
        (vec![q(&outs[0])], vec![q(&outs[1])])
    }

    #[test]
    fn sequences() {
        assert_eq!(produced_sequence(&t("a"), &[]).unwrap(), vec![t("a")]);
        let (l, _) = choice_trace("choose[1/2]{a}{b} !");
        assert_eq!(
            produced_sequence(&t("choose[1/2]{a}{b} !"), &l)
                .unwrap()
                .len(),
            2
        );
        assert_eq!(
            produced_sequence(&t("a"), &l),
            Err(TraceError::BrokenChain(0))
        );
    }

    #[test]
    fn nd_relation() {
        let (l, r) = choice_trace("choose[1/2]{a}{b} !");
        assert!(!not_equiv_nd(&l, &l));
        assert!(not_equiv_nd(&l, &r));
        assert!(not_equiv_nd(&r, &l));
        let mut w = l.clone();
        w[0].label = Label::Omega;
        assert!(!not_equiv_nd(&w, &r));
    }

    #[test]
    fn trace_checking() {
        let reg = OracleRegistry::new();
        let red = Reducer::new(&reg);
        let e = env();
        let base = MapstoJudgment {
            source: t("a"),
            target: t("a"),
            prob: Rational::one(),
            witness: Witness::Trace(vec![]),
        };
        assert!(check_trace(&e, &red, &base).is_ok());
        let (l, r) = choice_trace("choose[1/3]{a}{b} !");
        let left = MapstoJudgment {
            source: t("choose[1/3]{a}{b} !"),
            target: t("a"),
            prob: Rational::new(1, 3),
            witness: Witness::Trace(l.clone()),
        };
        assert!(check_trace(&e, &red, &left).is_ok());
        let mut bad = left.clone();
        bad.prob = Rational::new(1, 2);
        assert!(matches!(
            check_trace(&e, &red, &bad),
            Err(TraceError::ProbabilityMismatch { .. })
        ));
        let mut bad = left.clone();
        bad.witness = Witness::Trace(r);
        assert!(matches!(
            check_trace(&e, &red, &bad),
            Err(TraceError::TargetMismatch { .. })
        ));
        let mut forged = l;
        forged[0].prob = Rational::new(1, 2);
        let bad = MapstoJudgment {
            prob: Rational::new(1, 2),
            witness: Witness::Trace(forged),
            ..left
        };
        assert!(matches!(
            check_trace(&e, &red, &bad),
            Err(TraceError::ProbabilityMismatch { .. })
        ));
    }

    #[test]
    fn merge_rule() {
        let reg = OracleRegistry::new();
        let red = Reducer::new(&reg);
        let e = env();
        let (l, r) = choice_trace("choose[1/2]{a}{a} !");
        let j = MapstoJudgment {
            source: t("choose[1/2]{a}{a} !"),
            target: t("a"),
            prob: Rational::one(),
            witness: Witness::Merge(vec![l.clone(), r]),
        };
        assert!(check_trace(&e, &red, &j).is_ok());
        let dup = MapstoJudgment {
            witness: Witness::Merge(vec![l.clone(), l]),
            ..j
        };
        assert_eq!(
            check_trace(&e, &red, &dup),
            Err(TraceError::NDConditionViolated(0, 1))
        );
    }

    #[test]
    fn enumeration() {
        let reg = registry();
        let red = Reducer::new(&reg);
        let e = env();
        let (d, js) = enumerate_distribution(&red, &t("a"), 100).unwrap();
        assert_eq!(d.entries(), &[(t("a"), Rational::one())]);
        assert_eq!(js.len(), 1);
        let (d, js) = enumerate_distribution(&red, &t("choose[1/3]{a}{b} !"), 100).unwrap();
        assert_eq!(
            d.entries(),
            &[(t("a"), Rational::new(1, 3)), (t("b"), Rational::new(2, 3))]
        );
        for j in &js {
            check_trace(&e, &red, j).unwrap();
        }
        let (d, js) = enumerate_distribution(&red, &t("choose[1/2]{a}{a} !"), 100).unwrap();
        assert_eq!(d.entries(), &[(t("a"), Rational::one())]);
        assert!(matches!(js[0].witness, Witness::Merge(ref ks) if ks.len() == 2));
        check_trace(&e, &red, &js[0]).unwrap();
        // ω paths are never merged
        let (d, js) = enumerate_distribution(&red, &t("choose[1/2]{#c !}{#c !} !"), 100).unwrap();
        assert_eq!(d.entries(), &[(t("a"), Rational::one())]);
        assert_eq!(js.len(), 2);
        for j in &js {
            check_trace(&e, &red, j).unwrap();
        }
        assert_eq!(
            enumerate_distribution(&red, &t("choose[1/2]{a}{b} !"), 0).unwrap_err(),
            TraceError::Reduce(ReduceError::FuelExhausted(0))
        );
    }

    #[test]
    fn frequencies() {
        let reg = registry();
        let red = Reducer::new(&reg);
        let (d, js) = oracle_frequency(&red, "c", None, 3).unwrap();
        assert_eq!(
            d.entries(),
            &[(t("a"), Rational::new(2, 3)), (t("b"), Rational::new(1, 3))]
        );
        for j in &js {
            check_trace(&env(), &red, j).unwrap();
        }
        let mut forged = js[0].clone();
        forged.prob = Rational::new(1, 3);
        assert!(matches!(
            check_trace(&env(), &red, &forged),
            Err(TraceError::ProbabilityMismatch { .. })
        ));
        let mut forged = js[0].clone();
        forged.witness = Witness::Frequency {
            tuple: t("<#c !, #c !, #c !>"),
            outputs: vec![t("a"), t("a"), t("a")],
        };
        forged.prob = Rational::one();
        assert_eq!(
            check_trace(&env(), &red, &forged),
            Err(TraceError::OracleReplayMismatch(0))
        );
    }

    #[test]
    fn computation_terms_are_typed() {
        let reg = registry();
        let red = Reducer::new(&reg);
        let e = env();
        let (_, js) = enumerate_distribution(&red, &t("choose[1/2]{a}{a} !"), 100).unwrap();
        let j = type_of_trace_term(&e, &red, &js[0].witness_term()).unwrap();
        assert_eq!(j.prob, Rational::one());
        let (_, js) =
            enumerate_distribution(&red, &t("(\\x:A. x) (choose[1/3]{a}{b} !)"), 100).unwrap();
        let j = type_of_trace_term(&e, &red, &js[1].witness_term()).unwrap();
        assert_eq!(
            (j.target.clone(), j.prob.clone()),
            (t("b"), Rational::new(2, 3))
        );
        let bogus = Term::CompList(vec![t("a"), t("b")], None);
        assert_eq!(
            type_of_trace_term(&e, &red, &bogus).unwrap_err(),
            TraceError::RuleMismatch(0)
        );
    }
}
