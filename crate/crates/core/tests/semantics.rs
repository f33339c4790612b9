use std::collections::BTreeMap;

use olam::checker::{load_program, CheckedProgram};
use olam::oracle::OracleRegistry;
use olam::reducer::{deterministic_strategy, find_redexes, Label, RedexKind, Reducer};
use olam::surface::{parse_oracles, parse_term};
use olam::syntax::Term;
use olam::trace::{check_trace, enumerate_distribution, not_equiv_nd, oracle_frequency, Witness};
use olam::trust::{certificate_for, replay_certificate, trust_check, TrustSpec, Verdict, View};
use olam::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HEADER: &str = "atom A : *\nconst a : A\nconst b : A\nconst c : A\n";

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn load(main: &str, oracles: &str) -> (CheckedProgram, OracleRegistry) {
    let reg = OracleRegistry::from_defs(parse_oracles(oracles).unwrap()).unwrap();
    let imports: String = reg.iter().map(|d| format!("import {}\n", d.name)).collect();
    let prog = load_program(&format!("{HEADER}{imports}main = {main}\n"), &reg).unwrap();
    (prog, reg)
}

fn dist(main: &str) -> Vec<(String, Rational)> {
    let (prog, reg) = load(main, "");
    let red = Reducer::with_env(&reg, &prog.env);
    let (d, _) = enumerate_distribution(&red, &prog.main().term, 100_000).unwrap();
    d.entries()
        .iter()
        .map(|(t, p)| (t.to_string(), p.clone()))
        .collect()
}

/// Independent reference: the distribution of a closed tree of choices
/// over constants, by direct recursion on the tree.
fn denote(t: &Term) -> BTreeMap<String, Rational> {
    match t {
        Term::Var(x) => BTreeMap::from([(x.clone(), Rational::one())]),
        Term::Nu(inner) => match &**inner {
            Term::Choice(l, p, s) => {
                let mut out = BTreeMap::new();
                for (k, v) in denote(l) {
                    let e = out.entry(k).or_insert_with(Rational::zero);
                    *e = &*e + &(p * &v);
                }
                for (k, v) in denote(s) {
                    let e = out.entry(k).or_insert_with(Rational::zero);
                    *e = &*e + &(&p.complement() * &v);
                }
                out.retain(|_, v| !v.is_zero());
                out
            }
            _ => unreachable!(),
        },
        _ => unreachable!(),
    }
}

fn choice_tree(rng: &mut ChaCha8Rng, depth: usize) -> Term {
    if depth == 0 || rng.gen_bool(0.3) {
        return Term::var(["a", "b", "c"][rng.gen_range(0..3)]);
    }
    let p = Rational::new(rng.gen_range(0..=4), 4);
    Term::nu(Term::choice(
        choice_tree(rng, depth - 1),
        p,
        choice_tree(rng, depth - 1),
    ))
}

#[test]
fn exact_distributions() {
    assert_eq!(
        dist("choose[1/3]{a}{b} !"),
        [("a".into(), r(1, 3)), ("b".into(), r(2, 3))]
    );
    assert_eq!(dist("a"), [("a".into(), r(1, 1))]);
    assert_eq!(dist("choose[1/2]{a}{a} !"), [("a".into(), r(1, 1))]);
    // 1/3 * 1/2 + 2/3 by hand
    assert_eq!(
        dist("choose[1/3]{choose[1/2]{a}{b} !}{a} !"),
        [("a".into(), r(5, 6)), ("b".into(), r(1, 6))]
    );
    // the zero-probability branch is pruned
    assert_eq!(dist("choose[1]{a}{b} !"), [("a".into(), r(1, 1))]);
}

#[test]
fn enumeration_agrees_with_direct_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let reg = OracleRegistry::new();
    let red = Reducer::new(&reg);
    for _ in 0..300 {
        let t = choice_tree(&mut rng, 5);
        let (d, _) = enumerate_distribution(&red, &t, 100_000).unwrap();
        let got: BTreeMap<String, Rational> = d
            .entries()
            .iter()
            .map(|(t, p)| (t.to_string(), p.clone()))
            .collect();
        assert_eq!(got, denote(&t), "{t}");
    }
}

#[test]
fn one_step_rules() {
    let reg = OracleRegistry::new();
    let red = Reducer::new(&reg);
    let t = parse_term("choose[1/4]{a}{b} !").unwrap();
    let outs = red.step(&t, &deterministic_strategy(&t).unwrap()).unwrap();
    let got: Vec<_> = outs
        .iter()
        .map(|o| (o.term.to_string(), o.prob.clone(), o.label))
        .collect();
    assert_eq!(
        got,
        [
            ("a".into(), r(1, 4), Label::Left),
            ("b".into(), r(3, 4), Label::Right)
        ]
    );

    let t = parse_term("<a, b>.1").unwrap();
    let outs = red.step(&t, &deterministic_strategy(&t).unwrap()).unwrap();
    assert_eq!(
        (outs[0].term.to_string(), outs[0].label),
        ("b".into(), Label::Pi)
    );

    // leftmost-outermost picks the outer β-redex
    let t = parse_term("(\\x:A. x) (choose[1/2]{a}{b} !)").unwrap();
    assert_eq!(deterministic_strategy(&t).unwrap().kind, RedexKind::Beta);
    assert!(deterministic_strategy(&parse_term("a").unwrap()).is_none());
    assert!(find_redexes(&parse_term("a").unwrap()).is_empty());
}

const CYCLIC: &str = "oracle o arity 0 type Sigma A\n  rule index mod 3 = 0 -> b\n  default -> a\n";

#[test]
fn oracle_tuples_fire_at_once() {
    let (prog, reg) = load("<#o !, #o !, #o !>", CYCLIC);
    let t = &prog.main().term;
    let rs = find_redexes(t);
    assert_eq!(rs.len(), 1);
    assert!(matches!(&rs[0].kind, RedexKind::OracleNullary(site) if site.occurrences.len() == 3));
    let red = Reducer::with_env(&reg, &prog.env);
    let outs = red.step(t, &rs[0]).unwrap();
    assert_eq!(outs.len(), 1);
    assert_eq!(
        (outs[0].term.to_string(), outs[0].label),
        ("<a, a, b>".into(), Label::Omega)
    );
}

/// Reference counts for a cyclic oracle over `pattern`: hole `m` receives
/// `pattern[(m - 1) % len]`.
fn cyclic_counts(pattern: &[&str], n: usize) -> BTreeMap<String, Rational> {
    let mut counts: BTreeMap<String, i64> = BTreeMap::new();
    for m in 1..=n {
        *counts
            .entry(pattern[(m - 1) % pattern.len()].to_string())
            .or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(k, c)| (k, Rational::new(c, n as i64)))
        .collect()
}

#[test]
fn oracle_frequencies() {
    let cases = [
        (CYCLIC, vec!["a", "a", "b"], 3),
        (
            "oracle o arity 0 type Sigma A\n  rule index mod 2 = 0 -> b\n  default -> a\n",
            vec!["a", "b"],
            4,
        ),
        (
            "oracle o arity 0 type Sigma A\n  default -> c\n",
            vec!["c"],
            5,
        ),
        (CYCLIC, vec!["a", "a", "b"], 7),
    ];
    for (src, pattern, n) in cases {
        let (prog, reg) = load("a", src);
        let red = Reducer::with_env(&reg, &prog.env);
        let (d, js) = oracle_frequency(&red, "o", None, n).unwrap();
        let got: BTreeMap<String, Rational> = d
            .entries()
            .iter()
            .map(|(t, p)| (t.to_string(), p.clone()))
            .collect();
        assert_eq!(got, cyclic_counts(&pattern, n), "{pattern:?} n={n}");
        for j in &js {
            check_trace(&prog.env, &red, j).unwrap();
        }
    }
}

#[test]
fn unary_oracle_frequencies_use_the_argument() {
    let src = "oracle f arity 1 type forall x:A. Sigma A\n  rule arg = a -> b\n  default -> c\n";
    let (prog, reg) = load("a", src);
    let red = Reducer::with_env(&reg, &prog.env);
    let (d, _) =
        oracle_frequency(&red, "f", Some(&parse_term("(\\x:A. x) a").unwrap()), 2).unwrap();
    assert_eq!(d.entries(), &[(Term::var("b"), r(1, 1))]);
    let (d, _) = oracle_frequency(&red, "f", Some(&Term::var("c")), 2).unwrap();
    assert_eq!(d.entries(), &[(Term::var("c"), r(1, 1))]);
}

#[test]
fn merge_needs_nd_distinct_branches() {
    let (prog, reg) = load("choose[1/2]{a}{a} !", "");
    let red = Reducer::new(&reg);
    let (_, js) = enumerate_distribution(&red, &prog.main().term, 100).unwrap();
    let Witness::Merge(ks) = &js[0].witness else {
        panic!("expected a merge")
    };
    assert!(not_equiv_nd(&ks[0], &ks[1]));
    assert!(!not_equiv_nd(&ks[0], &ks[0]));
    assert_eq!(js[0].prob, r(1, 1));
}

#[test]
fn sampling_matches_the_exact_distribution() {
    let (prog, reg) = load("choose[1/3]{choose[1/2]{a}{b} !}{a} !", "");
    let red = Reducer::with_env(&reg, &prog.env);
    let t = &prog.main().term;
    let n = 6000;
    let hits = (0..n)
        .filter(|&i| red.run_sample_stream(t, 7, i, 1000).unwrap().normal_form == Term::var("a"))
        .count();
    // exact 5/6; four standard deviations is about 0.019
    let freq = hits as f64 / n as f64;
    assert!((freq - 5.0 / 6.0).abs() < 0.02, "{freq}");
}

#[test]
fn trust_examples() {
    let (prog, reg) = load("choose[1/3]{a}{b} !", "");
    let red = Reducer::with_env(&reg, &prog.env);
    let t = &prog.main().term;
    let target = |a: Rational, b: Rational| {
        TrustSpec::from_entries(vec![(Term::var("a"), a), (Term::var("b"), b)], r(1, 100)).unwrap()
    };
    let rep = trust_check(
        &prog.env,
        &red,
        t,
        &target(r(1, 3), r(2, 3)),
        View::Exact,
        1000,
    )
    .unwrap();
    assert_eq!(rep.verdict, Verdict::Trusted);
    let cert = certificate_for(t, &rep).unwrap();
    replay_certificate(&prog.env, &red, &cert).unwrap();

    let rep = trust_check(
        &prog.env,
        &red,
        t,
        &target(r(1, 2), r(1, 2)),
        View::Exact,
        1000,
    )
    .unwrap();
    assert_eq!(rep.verdict, Verdict::Untrusted);
    assert_eq!(rep.rows[0].diff, Some(r(1, 6)));
    let cert = certificate_for(t, &rep).unwrap();
    replay_certificate(&prog.env, &red, &cert).unwrap();

    // monotone in epsilon
    for k in 1..=6 {
        let s = TrustSpec::from_entries(
            vec![(Term::var("a"), r(1, 2)), (Term::var("b"), r(1, 2))],
            r(k, 6),
        )
        .unwrap();
        let v = trust_check(&prog.env, &red, t, &s, View::Exact, 1000)
            .unwrap()
            .verdict;
        assert_eq!(v == Verdict::Trusted, k > 1, "epsilon {k}/6");
    }
}

#[test]
fn trust_on_oracle_frequencies() {
    let (prog, reg) = load("#o !", CYCLIC);
    let red = Reducer::with_env(&reg, &prog.env);
    let spec = TrustSpec::from_entries(
        vec![(Term::var("a"), r(2, 3)), (Term::var("b"), r(1, 3))],
        r(1, 100),
    )
    .unwrap();
    let t = &prog.main().term;
    let rep = trust_check(&prog.env, &red, t, &spec, View::OracleFrequency(3), 1000).unwrap();
    assert_eq!(rep.verdict, Verdict::Trusted);
    replay_certificate(&prog.env, &red, &certificate_for(t, &rep).unwrap()).unwrap();
    // a single firing only ever sees the first hole
    let rep = trust_check(&prog.env, &red, t, &spec, View::Exact, 1000).unwrap();
    assert_eq!(rep.verdict, Verdict::Untrusted);
}
