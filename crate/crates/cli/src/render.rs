//! Text and JSON renderings. Every JSON document carries `"schema": 1`.

use olam::trace::{render_trace, Distribution, MapstoJudgment, Witness};
use olam::trust::{RowStatus, TrustReport};
use olam::Rational;
use serde_json::{json, Value};

use crate::Failure;

pub const SCHEMA: u32 = 1;

pub fn failure_text(f: &Failure) -> String {
    match f {
        Failure::Usage(m) => format!("error: {m}"),
        Failure::Domain {
            code,
            message,
            file,
            line,
            col,
        } => {
            let mut at = String::new();
            if let Some(file) = file {
                at.push_str(&format!("{}:", file.display()));
            }
            if let (Some(l), Some(c)) = (line, col) {
                at.push_str(&format!("{l}:{c}:"));
            }
            if at.is_empty() {
                format!("error: {message} [{code}]")
            } else {
                format!("{at} error: {message} [{code}]")
            }
        }
    }
}

pub fn failure_json(f: &Failure) -> Value {
    match f {
        Failure::Usage(m) => {
            json!({ "schema": SCHEMA, "error": { "code": "usage", "message": m } })
        }
        Failure::Domain {
            code,
            message,
            file,
            line,
            col,
        } => json!({
            "schema": SCHEMA,
            "error": {
                "code": code,
                "message": message,
                "file": file.as_ref().map(|p| p.display().to_string()),
                "line": line,
                "col": col,
            }
        }),
    }
}

/// Witness ids (`w1`, `w2`, ...) of the judgments concluding in `y`.
fn witness_ids(judgments: &[MapstoJudgment], y: &olam::syntax::Term) -> Vec<String> {
    judgments
        .iter()
        .enumerate()
        .filter(|(_, j)| olam::syntax::alpha_eq_term(&j.target, y))
        .map(|(i, _)| format!("w{}", i + 1))
        .collect()
}

fn columns(rows: &[Vec<String>]) -> String {
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..width)
        .map(|i| {
            rows.iter()
                .filter_map(|r| r.get(i))
                .map(|c| c.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in rows {
        let mut line = String::new();
        for (i, c) in r.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(c);
            if i + 1 < r.len() {
                line.push_str(&" ".repeat(widths[i] - c.chars().count()));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

pub fn distribution_text(d: &Distribution, judgments: &[MapstoJudgment]) -> String {
    let rows: Vec<Vec<String>> = d
        .entries()
        .iter()
        .map(|(y, p)| {
            vec![
                y.to_string(),
                p.to_string(),
                witness_ids(judgments, y).join(","),
            ]
        })
        .collect();
    columns(&rows)
}

pub fn distribution_json(d: &Distribution, judgments: &[MapstoJudgment]) -> Value {
    let entries: Vec<Value> = d
        .entries()
        .iter()
        .map(|(y, p)| json!({ "term": y.to_string(), "prob": p.to_string(), "witnesses": witness_ids(judgments, y) }))
        .collect();
    json!({ "schema": SCHEMA, "distribution": entries, "total": d.total().to_string() })
}

fn steps_json(qs: &[olam::trace::TraceQuadruple]) -> Value {
    Value::Array(
        qs.iter()
            .map(|q| {
                json!({
                    "before": q.before.to_string(),
                    "after": q.after.to_string(),
                    "prob": q.prob.to_string(),
                    "label": q.label.as_str(),
                })
            })
            .collect(),
    )
}

pub fn judgment_header(i: usize, j: &MapstoJudgment) -> String {
    format!("w{}: {} ⊨^{} {}", i + 1, j.source, j.prob, j.target)
}

pub fn traces_text(judgments: &[MapstoJudgment]) -> String {
    let mut out = String::new();
    for (i, j) in judgments.iter().enumerate() {
        out.push_str(&judgment_header(i, j));
        out.push('\n');
        match &j.witness {
            Witness::Trace(qs) if qs.is_empty() => out.push_str("  (no steps)\n"),
            Witness::Trace(qs) => {
                for line in render_trace(qs) {
                    out.push_str(&format!("  {line}\n"));
                }
            }
            Witness::Merge(ks) => {
                for (b, k) in ks.iter().enumerate() {
                    out.push_str(&format!("  branch {}:\n", b + 1));
                    for line in render_trace(k) {
                        out.push_str(&format!("    {line}\n"));
                    }
                }
            }
            Witness::Frequency { tuple, outputs } => {
                let outs: Vec<String> = outputs.iter().map(ToString::to_string).collect();
                out.push_str(&format!("  {tuple}  ↦1  <{}>  [ω]\n", outs.join(", ")));
            }
        }
    }
    out
}

pub fn judgment_json(i: usize, j: &MapstoJudgment) -> Value {
    let mut v = json!({
        "id": format!("w{}", i + 1),
        "source": j.source.to_string(),
        "target": j.target.to_string(),
        "prob": j.prob.to_string(),
    });
    let body = match &j.witness {
        Witness::Trace(qs) => json!({ "kind": "trace", "steps": steps_json(qs) }),
        Witness::Merge(ks) => {
            json!({ "kind": "merge", "branches": ks.iter().map(|k| steps_json(k)).collect::<Vec<_>>() })
        }
        Witness::Frequency { tuple, outputs } => json!({
            "kind": "frequency",
            "tuple": tuple.to_string(),
            "outputs": outputs.iter().map(ToString::to_string).collect::<Vec<_>>(),
        }),
    };
    let (Value::Object(m), Value::Object(b)) = (&mut v, body) else {
        unreachable!("both are objects")
    };
    m.extend(b);
    v
}

fn opt(r: &Option<Rational>) -> String {
    r.as_ref()
        .map_or_else(|| "-".to_string(), ToString::to_string)
}

fn status(s: RowStatus) -> &'static str {
    match s {
        RowStatus::Pass => "pass",
        RowStatus::Fail => "FAIL",
        RowStatus::Unconstrained => "unconstrained",
        RowStatus::Extra => "extra",
    }
}

pub fn trust_text(rep: &TrustReport, cert_path: &str) -> String {
    let mut rows = vec![vec![
        "outcome".to_string(),
        "target".into(),
        "derived".into(),
        "|f-z|".into(),
        "status".into(),
        "witnesses".into(),
    ]];
    for r in &rep.rows {
        rows.push(vec![
            r.outcome.to_string(),
            opt(&r.target),
            opt(&r.derived),
            opt(&r.diff),
            status(r.status).to_string(),
            r.witnesses.join(","),
        ]);
    }
    let mut out = columns(&rows);
    out.push_str(&format!("epsilon: {}\n", rep.epsilon));
    out.push_str(&format!("totality: {}\n", rep.totality));
    if rep.rows.iter().any(|r| r.status == RowStatus::Extra) {
        out.push_str(&format!(
            "extra-paper policy: outcomes missing from the target carry mass {}{}\n",
            rep.extra_mass,
            if rep.extra_policy_failed {
                " >= epsilon (fails)"
            } else {
                " < epsilon"
            }
        ));
    }
    out.push_str(&format!("verdict: {}\n", rep.verdict));
    out.push_str(&format!("certificate: {cert_path}\n"));
    out
}

pub fn trust_json(rep: &TrustReport, cert_path: &str) -> Value {
    let rows: Vec<Value> = rep
        .rows
        .iter()
        .map(|r| {
            json!({
                "outcome": r.outcome.to_string(),
                "target": r.target.as_ref().map(ToString::to_string),
                "derived": r.derived.as_ref().map(ToString::to_string),
                "diff": r.diff.as_ref().map(ToString::to_string),
                "status": status(r.status).to_lowercase(),
                "witnesses": r.witnesses,
            })
        })
        .collect();
    json!({
        "schema": SCHEMA,
        "verdict": rep.verdict.to_string(),
        "epsilon": rep.epsilon.to_string(),
        "totality": rep.totality.to_string(),
        "extra_paper_policy": { "extra_mass": rep.extra_mass.to_string(), "failed": rep.extra_policy_failed },
        "rows": rows,
        "certificate": cert_path,
    })
}
