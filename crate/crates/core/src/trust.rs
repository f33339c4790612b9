//! Trust verdicts against a target distribution, and replayable
//! certificates bundling the totality computation, one `⊨` witness per
//! outcome path and the per-outcome threshold comparisons.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::checker::{infer_type, skeleton, Env};
use crate::rational::Rational;
use crate::reducer::{is_normal, Label, Reducer};
use crate::surface::{parse_term_in, TargetDistributionFile};
use crate::syntax::{alpha_eq_term, Term};
use crate::trace::{
    bare_oracle_form, check_trace, enumerate_distribution, oracle_frequency, Distribution,
    MapstoJudgment, TraceError, TraceQuadruple, Witness,
};

pub const CERTIFICATE_SCHEMA: u32 = 1;

#[derive(Clone, Debug)]
pub struct TrustSpec {
    pub target: Vec<(Term, Rational)>,
    pub epsilon: Rational,
}

impl TrustSpec {
    pub fn new(target: &TargetDistributionFile, epsilon: Rational) -> Result<Self, TrustError> {
        Self::from_entries(
            target
                .entries
                .iter()
                .map(|e| (e.term.clone(), e.prob.clone()))
                .collect(),
            epsilon,
        )
    }

    pub fn from_entries(
        target: Vec<(Term, Rational)>,
        epsilon: Rational,
    ) -> Result<Self, TrustError> {
        if !epsilon.is_positive() || !epsilon.is_probability() {
            return Err(TrustError::BadEpsilon(epsilon));
        }
        Ok(TrustSpec { target, epsilon })
    }

    fn lookup(&self, t: &Term) -> Option<&Rational> {
        self.target
            .iter()
            .find(|(u, _)| alpha_eq_term(u, t))
            .map(|(_, p)| p)
    }
}

/// How the output distribution of the program is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum View {
    /// Exhaustive enumeration under the deterministic strategy.
    Exact,
    /// For a bare oracle form `#o !`: the frequencies over an `n`-tuple.
    OracleFrequency(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Trusted,
    Untrusted,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Trusted => "trusted",
            Verdict::Untrusted => "untrusted",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    /// `|f - z| < ε`.
    Pass,
    Fail,
    /// Listed with probability 0: no condition.
    Unconstrained,
    /// Produced by the program but absent from the target.
    Extra,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrustRow {
    pub outcome: Term,
    /// `None` when the target does not list the outcome.
    pub target: Option<Rational>,
    /// `None` when the program never produces the outcome.
    pub derived: Option<Rational>,
    pub diff: Option<Rational>,
    pub status: RowStatus,
    pub witnesses: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct TrustReport {
    pub verdict: Verdict,
    pub rows: Vec<TrustRow>,
    pub epsilon: Rational,
    pub totality: Rational,
    /// Total mass of outcomes missing from the target.
    pub extra_mass: Rational,
    /// Whether the extra-paper policy (`extra_mass >= ε` fails) decided
    /// against the program.
    pub extra_policy_failed: bool,
    pub distribution: Distribution,
    pub judgments: Vec<MapstoJudgment>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TrustError {
    #[error("epsilon must lie in (0, 1], got {0}")]
    BadEpsilon(Rational),
    #[error("target outcome `{outcome}` is not a normal form of the program's type: {reason}")]
    UnknownOutcome { outcome: String, reason: String },
    #[error("witnesses do not cover the distribution: {0}")]
    IncompleteWitnesses(String),
    #[error("`{0}` is not a bare oracle form")]
    NotAnOracleForm(String),
    #[error(transparent)]
    Evaluation(#[from] TraceError),
}

impl TrustError {
    pub fn code(&self) -> &'static str {
        match self {
            TrustError::BadEpsilon(_) => "bad-epsilon",
            TrustError::UnknownOutcome { .. } => "unknown-outcome",
            TrustError::IncompleteWitnesses(_) => "incomplete-witnesses",
            TrustError::NotAnOracleForm(_) => "not-an-oracle-form",
            TrustError::Evaluation(e) => e.code(),
        }
    }
}

/// The output distribution of `t` under `view`, with its witnesses.
pub fn derive_distribution(
    reducer: &Reducer<'_>,
    t: &Term,
    view: View,
    fuel: usize,
) -> Result<(Distribution, Vec<MapstoJudgment>), TrustError> {
    Ok(match view {
        View::Exact => enumerate_distribution(reducer, t, fuel)?,
        View::OracleFrequency(n) => {
            let (o, arg) =
                bare_oracle_form(t).ok_or_else(|| TrustError::NotAnOracleForm(t.to_string()))?;
            oracle_frequency(reducer, &o, arg.as_ref(), n)?
        }
    })
}

fn witness_ids(judgments: &[MapstoJudgment], outcome: &Term) -> Vec<String> {
    judgments
        .iter()
        .enumerate()
        .filter(|(_, j)| alpha_eq_term(&j.target, outcome))
        .map(|(i, _)| format!("w{}", i + 1))
        .collect()
}

struct Comparison {
    rows: Vec<TrustRow>,
    extra_mass: Rational,
    extra_policy_failed: bool,
    verdict: Verdict,
}

/// The per-outcome threshold comparisons. Pure rational arithmetic, shared
/// by checking and replay.
fn compare(spec: &TrustSpec, dist: &Distribution, judgments: &[MapstoJudgment]) -> Comparison {
    let mut outcomes: Vec<Term> = spec.target.iter().map(|(t, _)| t.clone()).collect();
    for (t, _) in dist.entries() {
        if !outcomes.iter().any(|u| alpha_eq_term(u, t)) {
            outcomes.push(t.clone());
        }
    }
    outcomes.sort_by_key(|t| t.to_string());

    let mut rows = Vec::new();
    let mut extra_mass = Rational::zero();
    let mut all_pass = true;
    for y in outcomes {
        let f = spec.lookup(&y).cloned();
        let z = dist.get(&y).cloned();
        let diff = match (&f, &z) {
            (Some(f), Some(z)) => Some(f.abs_diff(z)),
            _ => None,
        };
        let status = match (&f, &diff) {
            (None, _) => {
                extra_mass = &extra_mass
                    + z.as_ref()
                        .expect("extra outcomes come from the distribution");
                RowStatus::Extra
            }
            (Some(f), _) if f.is_zero() => RowStatus::Unconstrained,
            (Some(_), Some(d)) if *d < spec.epsilon => RowStatus::Pass,
            _ => RowStatus::Fail,
        };
        all_pass &= status != RowStatus::Fail;
        rows.push(TrustRow {
            witnesses: witness_ids(judgments, &y),
            outcome: y,
            target: f,
            derived: z,
            diff,
            status,
        });
    }
    let extra_policy_failed = extra_mass >= spec.epsilon;
    let totality = dist.total();
    let verdict = if all_pass && !extra_policy_failed && totality.is_one() {
        Verdict::Trusted
    } else {
        Verdict::Untrusted
    };
    Comparison {
        rows,
        extra_mass,
        extra_policy_failed,
        verdict,
    }
}

/// Checks every target outcome against the type of `t`.
fn check_outcomes(env: &Env, t: &Term, spec: &TrustSpec) -> Result<(), TrustError> {
    let ty = infer_type(env, t).map_err(TraceError::from)?;
    for (y, _) in &spec.target {
        let unknown = |reason: String| TrustError::UnknownOutcome {
            outcome: y.to_string(),
            reason,
        };
        let yty = infer_type(env, y).map_err(|e| unknown(e.to_string()))?;
        if skeleton(&yty) != skeleton(&ty) {
            return Err(unknown(format!(
                "it has type `{yty}`, the program has `{ty}`"
            )));
        }
        if !is_normal(y) {
            return Err(unknown("it is not in normal form".into()));
        }
    }
    Ok(())
}

/// `Trust(t, f)`: for every `y` with `f y ≠ 0` there must be a derived
/// `t ⊨_z y` with `|f y - z| < ε`, and the derived probabilities must sum to 1.
pub fn trust_check(
    env: &Env,
    reducer: &Reducer<'_>,
    t: &Term,
    spec: &TrustSpec,
    view: View,
    fuel: usize,
) -> Result<TrustReport, TrustError> {
    check_outcomes(env, t, spec)?;
    let (distribution, judgments) = derive_distribution(reducer, t, view, fuel)?;
    let c = compare(spec, &distribution, &judgments);
    Ok(TrustReport {
        verdict: c.verdict,
        rows: c.rows,
        epsilon: spec.epsilon.clone(),
        totality: distribution.total(),
        extra_mass: c.extra_mass,
        extra_policy_failed: c.extra_policy_failed,
        distribution,
        judgments,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub before: String,
    pub after: String,
    pub prob: Rational,
    pub label: Label,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WitnessBody {
    Trace { steps: Vec<StepRecord> },
    Merge { branches: Vec<Vec<StepRecord>> },
    Frequency { tuple: String, outputs: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub id: String,
    pub source: String,
    pub target: String,
    pub prob: Rational,
    #[serde(flatten)]
    pub body: WitnessBody,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub outcome: String,
    pub target: Option<Rational>,
    pub derived: Option<Rational>,
    pub diff: Option<Rational>,
    pub status: RowStatus,
}

/// The serialized `𝕊` certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: u32,
    pub program: String,
    pub seedless: bool,
    pub distribution: Vec<(String, Rational)>,
    pub witnesses: Vec<WitnessRecord>,
    pub totality: Rational,
    pub epsilon: Rational,
    pub target: Vec<(String, Rational)>,
    pub comparisons: Vec<ComparisonRecord>,
    pub extra_mass: Rational,
    pub verdict: Verdict,
    /// SHA-256 over the compact JSON of every other field.
    pub digest: String,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, CertificateError> {
        serde_json::from_str(s).map_err(|e| CertificateError::Malformed(e.to_string()))
    }

    pub fn compute_digest(&self) -> String {
        let mut body = self.clone();
        body.digest = String::new();
        let bytes = serde_json::to_vec(&body).expect("certificates serialize");
        hex::encode(Sha256::digest(&bytes))
    }
}

fn step_records(qs: &[TraceQuadruple]) -> Vec<StepRecord> {
    qs.iter()
        .map(|q| StepRecord {
            before: q.before.to_string(),
            after: q.after.to_string(),
            prob: q.prob.clone(),
            label: q.label,
        })
        .collect()
}

fn witness_record(i: usize, j: &MapstoJudgment) -> WitnessRecord {
    WitnessRecord {
        id: format!("w{}", i + 1),
        source: j.source.to_string(),
        target: j.target.to_string(),
        prob: j.prob.clone(),
        body: match &j.witness {
            Witness::Trace(qs) => WitnessBody::Trace {
                steps: step_records(qs),
            },
            Witness::Merge(ks) => WitnessBody::Merge {
                branches: ks.iter().map(|k| step_records(k)).collect(),
            },
            Witness::Frequency { tuple, outputs } => WitnessBody::Frequency {
                tuple: tuple.to_string(),
                outputs: outputs.iter().map(Term::to_string).collect(),
            },
        },
    }
}

fn comparison_records(rows: &[TrustRow]) -> Vec<ComparisonRecord> {
    rows.iter()
        .map(|r| ComparisonRecord {
            outcome: r.outcome.to_string(),
            target: r.target.clone(),
            derived: r.derived.clone(),
            diff: r.diff.clone(),
            status: r.status,
        })
        .collect()
}

/// Sums the witnesses per outcome and checks them against `dist`.
fn witnesses_cover(dist: &Distribution, judgments: &[MapstoJudgment]) -> Result<(), String> {
    if !dist.total().is_one() {
        return Err(format!("distribution sums to {}, not 1", dist.total()));
    }
    for j in judgments {
        if dist.get(&j.target).is_none() {
            return Err(format!("witness for `{}` names no outcome", j.target));
        }
    }
    for (y, p) in dist.entries() {
        let sum: Rational = judgments
            .iter()
            .filter(|j| alpha_eq_term(&j.target, y))
            .map(|j| &j.prob)
            .sum();
        if sum != *p {
            return Err(format!(
                "witnesses for `{y}` sum to {sum}, the distribution says {p}"
            ));
        }
    }
    Ok(())
}

/// Bundles the totality computation, the witnesses and the threshold
/// comparisons into a certificate.
pub fn build_s_rule_certificate(
    t: &Term,
    dist: &Distribution,
    judgments: &[MapstoJudgment],
    spec: &TrustSpec,
) -> Result<Certificate, TrustError> {
    witnesses_cover(dist, judgments).map_err(TrustError::IncompleteWitnesses)?;
    if let Some(j) = judgments.iter().find(|j| !alpha_eq_term(&j.source, t)) {
        return Err(TrustError::IncompleteWitnesses(format!(
            "witness starts at `{}`",
            j.source
        )));
    }
    let c = compare(spec, dist, judgments);
    let mut cert = Certificate {
        schema: CERTIFICATE_SCHEMA,
        program: t.to_string(),
        seedless: true,
        distribution: dist
            .entries()
            .iter()
            .map(|(y, p)| (y.to_string(), p.clone()))
            .collect(),
        witnesses: judgments
            .iter()
            .enumerate()
            .map(|(i, j)| witness_record(i, j))
            .collect(),
        totality: dist.total(),
        epsilon: spec.epsilon.clone(),
        target: spec
            .target
            .iter()
            .map(|(y, p)| (y.to_string(), p.clone()))
            .collect(),
        comparisons: comparison_records(&c.rows),
        extra_mass: c.extra_mass,
        verdict: c.verdict,
        digest: String::new(),
    };
    cert.digest = cert.compute_digest();
    Ok(cert)
}

/// Builds the certificate for a finished report.
pub fn certificate_for(t: &Term, report: &TrustReport) -> Result<Certificate, TrustError> {
    let spec = TrustSpec {
        target: report
            .rows
            .iter()
            .filter_map(|r| r.target.clone().map(|p| (r.outcome.clone(), p)))
            .collect(),
        epsilon: report.epsilon.clone(),
    };
    build_s_rule_certificate(t, &report.distribution, &report.judgments, &spec)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("malformed certificate: {0}")]
    Malformed(String),
    #[error("unsupported certificate schema {0}")]
    Schema(u32),
    #[error("certificate field `{field}` does not parse: {message}")]
    BadTerm { field: String, message: String },
    #[error("witness {id}: {error}")]
    Witness { id: String, error: TraceError },
    #[error("certificate field `{0}` disagrees with the replay")]
    FieldMismatch(String),
    #[error("digest mismatch")]
    DigestMismatch,
}

impl CertificateError {
    pub fn code(&self) -> &'static str {
        match self {
            CertificateError::Malformed(_) => "malformed-certificate",
            CertificateError::Schema(_) => "unsupported-schema",
            CertificateError::BadTerm { .. } => "bad-term",
            CertificateError::Witness { error, .. } => error.code(),
            CertificateError::FieldMismatch(_) => "field-mismatch",
            CertificateError::DigestMismatch => "digest-mismatch",
        }
    }
}

/// Re-checks a certificate from scratch: every witness by `check_trace`,
/// every sum and comparison by exact arithmetic, and finally the digest.
pub fn replay_certificate(
    env: &Env,
    reducer: &Reducer<'_>,
    cert: &Certificate,
) -> Result<(), CertificateError> {
    if cert.schema != CERTIFICATE_SCHEMA {
        return Err(CertificateError::Schema(cert.schema));
    }
    if !cert.seedless {
        return Err(CertificateError::FieldMismatch("seedless".into()));
    }
    let scope = env.scope();
    let term = |field: &str, src: &str| {
        parse_term_in(src, &scope).map_err(|e| CertificateError::BadTerm {
            field: field.to_string(),
            message: e.to_string(),
        })
    };
    let steps = |field: &str, rs: &[StepRecord]| -> Result<Vec<TraceQuadruple>, CertificateError> {
        rs.iter()
            .map(|r| {
                Ok(TraceQuadruple {
                    before: term(field, &r.before)?,
                    after: term(field, &r.after)?,
                    prob: r.prob.clone(),
                    label: r.label,
                })
            })
            .collect()
    };

    let program = term("program", &cert.program)?;
    let mut judgments = Vec::new();
    for (i, w) in cert.witnesses.iter().enumerate() {
        if w.id != format!("w{}", i + 1) {
            return Err(CertificateError::FieldMismatch(format!(
                "witnesses[{i}].id"
            )));
        }
        let source = term("source", &w.source)?;
        if !alpha_eq_term(&source, &program) {
            return Err(CertificateError::FieldMismatch(format!("{}.source", w.id)));
        }
        let witness = match &w.body {
            WitnessBody::Trace { steps: s } => Witness::Trace(steps(&w.id, s)?),
            WitnessBody::Merge { branches } => Witness::Merge(
                branches
                    .iter()
                    .map(|b| steps(&w.id, b))
                    .collect::<Result<_, _>>()?,
            ),
            WitnessBody::Frequency { tuple, outputs } => Witness::Frequency {
                tuple: term(&w.id, tuple)?,
                outputs: outputs
                    .iter()
                    .map(|o| term(&w.id, o))
                    .collect::<Result<_, _>>()?,
            },
        };
        let j = MapstoJudgment {
            source,
            target: term("target", &w.target)?,
            prob: w.prob.clone(),
            witness,
        };
        check_trace(env, reducer, &j).map_err(|error| CertificateError::Witness {
            id: w.id.clone(),
            error,
        })?;
        judgments.push(j);
    }

    let mut entries = Vec::new();
    for (y, p) in &cert.distribution {
        let y = term("distribution", y)?;
        if entries
            .iter()
            .any(|(u, _): &(Term, Rational)| alpha_eq_term(u, &y))
        {
            return Err(CertificateError::FieldMismatch("distribution".into()));
        }
        entries.push((y, p.clone()));
    }
    let dist = Distribution::from_entries(entries);
    let listed: Vec<&str> = cert.distribution.iter().map(|(y, _)| y.as_str()).collect();
    let sorted: Vec<String> = dist.entries().iter().map(|(y, _)| y.to_string()).collect();
    if listed != sorted {
        return Err(CertificateError::FieldMismatch("distribution".into()));
    }
    witnesses_cover(&dist, &judgments)
        .map_err(|_| CertificateError::FieldMismatch("distribution".into()))?;
    if cert.totality != dist.total() || !cert.totality.is_one() {
        return Err(CertificateError::FieldMismatch("totality".into()));
    }

    let target = cert
        .target
        .iter()
        .map(|(y, p)| Ok((term("target", y)?, p.clone())))
        .collect::<Result<Vec<_>, CertificateError>>()?;
    let spec = TrustSpec::from_entries(target, cert.epsilon.clone())
        .map_err(|_| CertificateError::FieldMismatch("epsilon".into()))?;
    check_outcomes(env, &program, &spec)
        .map_err(|_| CertificateError::FieldMismatch("target".into()))?;
    let c = compare(&spec, &dist, &judgments);
    if comparison_records(&c.rows) != cert.comparisons {
        return Err(CertificateError::FieldMismatch("comparisons".into()));
    }
    if c.extra_mass != cert.extra_mass {
        return Err(CertificateError::FieldMismatch("extra_mass".into()));
    }
    if c.verdict != cert.verdict {
        return Err(CertificateError::FieldMismatch("verdict".into()));
    }
    if cert.compute_digest() != cert.digest {
        return Err(CertificateError::DigestMismatch);
    }
    Ok(())
}
