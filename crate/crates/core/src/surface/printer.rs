//! Pretty-printer producing text that `parse_term` / `parse_con` /
//! `parse_kind` read back to an α-equal value.

use crate::syntax::{occurs_free_con, Kind, ProjIndex, Term, TypeCon};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum TermPrec {
    Top,
    App,
    Postfix,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum ConPrec {
    Top,
    And,
    Prefix,
    App,
    Atom,
}

pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    term(t, TermPrec::Top, &mut out);
    out
}

pub fn print_con(c: &TypeCon) -> String {
    let mut out = String::new();
    con(c, ConPrec::Top, &mut out);
    out
}

pub fn print_kind(k: &Kind) -> String {
    let mut out = String::new();
    kind(k, &mut out);
    out
}

fn parens(needed: bool, out: &mut String, f: impl FnOnce(&mut String)) {
    if needed {
        out.push('(');
    }
    f(out);
    if needed {
        out.push(')');
    }
}

fn term_prec(t: &Term) -> TermPrec {
    match t {
        Term::Lambda(..) => TermPrec::Top,
        Term::App(..) | Term::OracleApp(..) => TermPrec::App,
        _ => TermPrec::Postfix,
    }
}

fn term(t: &Term, ctx: TermPrec, out: &mut String) {
    parens(term_prec(t) < ctx, out, |out| match t {
        Term::Var(x) => out.push_str(x),
        Term::Oracle(o) => {
            out.push('#');
            out.push_str(o);
        }
        Term::OracleApp(o, a) => {
            out.push('#');
            out.push_str(o);
            out.push(' ');
            term(a, TermPrec::Postfix, out);
        }
        Term::Lambda(x, ty, b) => {
            out.push('\\');
            out.push_str(x);
            out.push(':');
            con(ty, ConPrec::Top, out);
            out.push_str(". ");
            term(b, TermPrec::Top, out);
        }
        Term::App(f, a) => {
            term(f, TermPrec::App, out);
            out.push(' ');
            term(a, TermPrec::Postfix, out);
        }
        Term::Choice(a, p, b) => {
            out.push_str("choose[");
            if p.denom() == &num::BigInt::from(1) {
                out.push_str(&p.numer().to_string());
            } else {
                out.push_str(&p.to_string());
            }
            out.push_str("]{");
            term(a, TermPrec::Top, out);
            out.push_str("}{");
            term(b, TermPrec::Top, out);
            out.push('}');
        }
        Term::Nu(a) => {
            term(a, TermPrec::Postfix, out);
            out.push_str(" !");
        }
        Term::Pair(a, b) => {
            out.push('<');
            term(a, TermPrec::Top, out);
            let mut rest = &**b;
            while let Term::Pair(x, y) = rest {
                out.push_str(", ");
                term(x, TermPrec::Top, out);
                rest = y;
            }
            out.push_str(", ");
            term(rest, TermPrec::Top, out);
            out.push('>');
        }
        Term::Proj(a, i) => {
            term(a, TermPrec::Postfix, out);
            out.push_str(match i {
                ProjIndex::Zero => ".0",
                ProjIndex::One => ".1",
            });
        }
        Term::Efq(a, ty) => {
            out.push_str("efq(");
            term(a, TermPrec::Top, out);
            out.push_str(" : ");
            con(ty, ConPrec::Top, out);
            out.push(')');
        }
        Term::CompList(ts, p) => {
            out.push('[');
            term_list(ts, out);
            out.push(']');
            superscript(p, out);
        }
        Term::CompMerge(s, ks, e, p) => {
            out.push('[');
            term(s, TermPrec::Top, out);
            out.push_str(", [");
            for (i, k) in ks.iter().enumerate() {
                if i > 0 {
                    out.push_str(" / ");
                }
                term_list(k, out);
            }
            out.push_str("], ");
            term(e, TermPrec::Top, out);
            out.push(']');
            superscript(p, out);
        }
    })
}

fn term_list(ts: &[Term], out: &mut String) {
    for (i, t) in ts.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        term(t, TermPrec::Top, out);
    }
}

fn superscript(p: &Option<crate::rational::Rational>, out: &mut String) {
    if let Some(p) = p {
        out.push('^');
        out.push_str(&p.to_string());
    }
}

fn con_prec(c: &TypeCon) -> ConPrec {
    match c {
        TypeCon::Lambda(..) | TypeCon::Forall(..) => ConPrec::Top,
        TypeCon::And(..) => ConPrec::And,
        TypeCon::Oplus(_) | TypeCon::Sigma(_) => ConPrec::Prefix,
        TypeCon::App(..) => ConPrec::App,
        TypeCon::Var(_) | TypeCon::Bottom => ConPrec::Atom,
    }
}

fn con(c: &TypeCon, ctx: ConPrec, out: &mut String) {
    parens(con_prec(c) < ctx, out, |out| match c {
        TypeCon::Var(a) => out.push_str(a),
        TypeCon::Bottom => out.push_str("Bot"),
        TypeCon::Lambda(x, a, b) => {
            out.push_str("\\\\");
            out.push_str(x);
            out.push(':');
            con(a, ConPrec::Top, out);
            out.push_str(". ");
            con(b, ConPrec::Top, out);
        }
        TypeCon::Forall(x, a, b) => {
            if occurs_free_con(x, b) {
                out.push_str("forall ");
                out.push_str(x);
                out.push(':');
                con(a, ConPrec::Top, out);
                out.push_str(". ");
                con(b, ConPrec::Top, out);
            } else {
                con(a, ConPrec::And, out);
                out.push_str(" -> ");
                con(b, ConPrec::Top, out);
            }
        }
        TypeCon::App(f, t) => {
            con(f, ConPrec::App, out);
            out.push(' ');
            term(t, TermPrec::Postfix, out);
        }
        TypeCon::Oplus(a) => {
            out.push_str("Oplus ");
            con(a, ConPrec::Prefix, out);
        }
        TypeCon::Sigma(a) => {
            out.push_str("Sigma ");
            con(a, ConPrec::Prefix, out);
        }
        TypeCon::And(a, b) => {
            con(a, ConPrec::Prefix, out);
            out.push_str(" /\\ ");
            con(b, ConPrec::And, out);
        }
    })
}

fn kind(k: &Kind, out: &mut String) {
    match k {
        Kind::Star => out.push('*'),
        Kind::Pi(x, a, k) => {
            out.push_str("Pi ");
            out.push_str(x);
            out.push(':');
            con(a, ConPrec::Top, out);
            out.push_str(". ");
            kind(k, out);
        }
    }
}
