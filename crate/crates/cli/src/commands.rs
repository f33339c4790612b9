use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use olam::checker::{load_program, CheckedProgram, ProgramError};
use olam::oracle::{OracleError, OracleRegistry};
use olam::reducer::{ReduceError, Reducer};
use olam::surface::{parse_distribution, parse_oracles, ParseError};
use olam::syntax::Term;
use olam::trace::{bare_oracle_form, enumerate_distribution, oracle_frequency, TraceError};
use olam::trust::{certificate_for, trust_check, TrustError, TrustSpec, Verdict, View};
use olam::Rational;
use serde_json::json;

use crate::render::{self, SCHEMA};
use crate::{Common, Failure, Report};

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_failure(file: &Path, e: &ParseError) -> Failure {
    Failure::Domain {
        code: e.code().to_string(),
        message: e.message.clone(),
        file: Some(file.to_path_buf()),
        line: Some(e.pos.line),
        col: Some(e.pos.col),
    }
}

fn program_failure(file: &Path, e: &ProgramError) -> Failure {
    let pos = e.pos();
    Failure::Domain {
        code: e.code().to_string(),
        message: e.message(),
        file: Some(file.to_path_buf()),
        line: pos.map(|p| p.line),
        col: pos.map(|p| p.col),
    }
}

fn oracle_failure(e: &OracleError) -> Failure {
    Failure::domain(e.code(), e.to_string())
}

fn trace_failure(e: &TraceError) -> Failure {
    Failure::domain(e.code(), e.to_string())
}

fn reduce_failure(e: &ReduceError) -> Failure {
    Failure::domain(e.code(), e.to_string())
}

fn trust_failure(e: &TrustError) -> Failure {
    Failure::domain(e.code(), e.to_string())
}

fn load_registry(paths: &[PathBuf]) -> Result<OracleRegistry, Failure> {
    let mut reg = OracleRegistry::new();
    for path in paths {
        let src = read(path)?;
        let defs = parse_oracles(&src).map_err(|e| parse_failure(path, &e))?;
        for d in defs {
            reg.insert(d).map_err(|e| oracle_failure(&e))?;
        }
    }
    Ok(reg)
}

struct Loaded {
    program: CheckedProgram,
    registry: OracleRegistry,
}

impl Loaded {
    fn main(&self) -> &Term {
        &self.program.main().term
    }

    fn reducer(&self) -> Reducer<'_> {
        Reducer::with_env(&self.registry, &self.program.env)
    }
}

fn load(c: &Common) -> Result<Loaded, Failure> {
    let src = read(&c.program)?;
    let registry = load_registry(&c.oracles)?;
    let program = load_program(&src, &registry).map_err(|e| program_failure(&c.program, &e))?;
    Ok(Loaded { program, registry })
}

pub fn check(c: &Common) -> Result<Report, Failure> {
    let l = load(c)?;
    let defs = &l.program.definitions;
    let text: String = defs
        .iter()
        .map(|d| format!("{} : {}\n", d.name, d.ty))
        .collect();
    let json = json!({
        "schema": SCHEMA,
        "definitions": defs.iter().map(|d| json!({ "name": d.name, "type": d.ty.to_string() })).collect::<Vec<_>>(),
    });
    Ok(Report {
        text,
        json,
        ok: true,
    })
}

/// Sample `i` uses stream `i` of the generator seeded with `seed`, so runs
/// are reproducible and samples independent.
pub fn eval(c: &Common, seed: u64, samples: u64) -> Result<Report, Failure> {
    if samples == 0 {
        return Err(Failure::Usage("--samples must be at least 1".into()));
    }
    let l = load(c)?;
    let red = l.reducer();
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for i in 0..samples {
        let s = red
            .run_sample_stream(l.main(), seed, i, c.fuel)
            .map_err(|e| reduce_failure(&e))?;
        *counts.entry(s.normal_form.to_string()).or_default() += 1;
    }
    let mut text = String::new();
    let mut outcomes = Vec::new();
    for (term, n) in &counts {
        let freq = *n as f64 / samples as f64;
        text.push_str(&format!("{term}  {n}/{samples}  {freq:.4}\n"));
        outcomes.push(json!({ "term": term, "count": n, "frequency": freq }));
    }
    let json = json!({ "schema": SCHEMA, "seed": seed, "samples": samples, "outcomes": outcomes });
    Ok(Report {
        text,
        json,
        ok: true,
    })
}

pub fn dist(c: &Common) -> Result<Report, Failure> {
    let l = load(c)?;
    let (d, js) =
        enumerate_distribution(&l.reducer(), l.main(), c.fuel).map_err(|e| trace_failure(&e))?;
    Ok(Report {
        text: render::distribution_text(&d, &js),
        json: render::distribution_json(&d, &js),
        ok: true,
    })
}

pub fn trace(c: &Common) -> Result<Report, Failure> {
    let l = load(c)?;
    let (_, js) =
        enumerate_distribution(&l.reducer(), l.main(), c.fuel).map_err(|e| trace_failure(&e))?;
    let json = json!({
        "schema": SCHEMA,
        "judgments": js.iter().enumerate().map(|(i, j)| render::judgment_json(i, j)).collect::<Vec<_>>(),
    });
    Ok(Report {
        text: render::traces_text(&js),
        json,
        ok: true,
    })
}

fn parse_epsilon(s: &str) -> Result<Rational, Failure> {
    let eps: Rational = s
        .parse()
        .map_err(|_| Failure::Usage(format!("--epsilon expects a rational p/q, got `{s}`")))?;
    if !eps.is_positive() || !eps.is_probability() {
        return Err(Failure::Usage(format!(
            "--epsilon must lie in (0, 1], got {eps}"
        )));
    }
    Ok(eps)
}

fn certificate_path(program: &Path) -> PathBuf {
    let mut p = program.as_os_str().to_owned();
    p.push(".cert.json");
    PathBuf::from(p)
}

pub fn trust(
    c: &Common,
    target: &Path,
    epsilon: &str,
    n: Option<usize>,
) -> Result<Report, Failure> {
    let eps = parse_epsilon(epsilon)?;
    if n == Some(0) {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let l = load(c)?;
    let target_src = read(target)?;
    let target_file = parse_distribution(&target_src).map_err(|e| parse_failure(target, &e))?;
    let spec = TrustSpec::new(&target_file, eps).map_err(|e| trust_failure(&e))?;
    let view = match n {
        Some(n) if bare_oracle_form(l.main()).is_some() => View::OracleFrequency(n),
        Some(_) => {
            return Err(Failure::domain(
                "not-an-oracle-form",
                format!(
                    "--n needs `main` to be a bare oracle form, found `{}`",
                    l.main()
                ),
            ))
        }
        None => View::Exact,
    };
    let red = l.reducer();
    let rep = trust_check(&l.program.env, &red, l.main(), &spec, view, c.fuel)
        .map_err(|e| trust_failure(&e))?;
    let cert = certificate_for(l.main(), &rep).map_err(|e| trust_failure(&e))?;
    let path = certificate_path(&c.program);
    fs::write(&path, cert.to_json() + "\n")
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    let shown = path.display().to_string();
    Ok(Report {
        text: render::trust_text(&rep, &shown),
        json: render::trust_json(&rep, &shown),
        ok: rep.verdict == Verdict::Trusted,
    })
}

pub fn oracle_freq(c: &Common, n: usize) -> Result<Report, Failure> {
    if n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let l = load(c)?;
    let (o, arg) = bare_oracle_form(l.main()).ok_or_else(|| {
        Failure::domain(
            "not-an-oracle-form",
            format!("`main` must be `#o !` or `(#o t) !`, found `{}`", l.main()),
        )
    })?;
    let (d, js) =
        oracle_frequency(&l.reducer(), &o, arg.as_ref(), n).map_err(|e| trace_failure(&e))?;
    let text: String = js
        .iter()
        .enumerate()
        .map(|(i, j)| render::judgment_header(i, j) + "\n")
        .collect();
    let mut json = render::distribution_json(&d, &js);
    json["n"] = json!(n);
    json["judgments"] = json!(js
        .iter()
        .enumerate()
        .map(|(i, j)| render::judgment_json(i, j))
        .collect::<Vec<_>>());
    Ok(Report {
        text,
        json,
        ok: true,
    })
}
