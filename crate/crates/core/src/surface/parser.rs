//! Recursive-descent parser for terms, type constructors and kinds.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! term    ::= '\' x ':' con '.' term | app
//! app     ::= postfix postfix*                 -- left-associative
//! postfix ::= atom ('!' | '.0' | '.1')*
//! atom    ::= x | '#' o | '(' term ')' | '<' term (',' term)+ '>'
//!           | 'choose' '[' rational ']' '{' term '}' '{' term '}'
//!           | 'efq' '(' term ':' con ')'
//! con     ::= 'forall' x ':' con '.' con | '\\' x ':' con '.' con
//!           | and ('->' con)?
//! and     ::= prefix ('/\' and)?
//! prefix  ::= ('Oplus' | 'Sigma') prefix | capp
//! capp    ::= catom postfix*                   -- constructor applied to terms
//! catom   ::= α | 'Bot' | '(' con ')'
//! kind    ::= '*' | 'Pi' x ':' con '.' kind
//! ```
//!
//! A token starting in column 1 never continues an application; it begins
//! the next top-level item.

use std::collections::HashSet;

use super::error::{ParseError, ParseErrorKind, Pos, Span, SpanTree};
use super::lexer::{lex, Tok, Token};
use crate::rational::Rational;
use crate::syntax::{Kind, ProjIndex, Term, TypeCon, ANON_BINDER};

pub type PResult<T> = Result<T, ParseError>;

pub const KEYWORDS: &[&str] = &[
    "choose", "efq", "forall", "Oplus", "Sigma", "Bot", "Pi", "atom", "const", "import", "oracle",
    "rule", "default",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Names visible while parsing. Without a scope every identifier is accepted.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    pub atoms: HashSet<String>,
    pub terms: HashSet<String>,
    binders: Vec<String>,
}

impl Scope {
    pub fn new(
        atoms: impl IntoIterator<Item = String>,
        terms: impl IntoIterator<Item = String>,
    ) -> Self {
        Scope {
            atoms: atoms.into_iter().collect(),
            terms: terms.into_iter().collect(),
            binders: Vec::new(),
        }
    }

    fn has_term(&self, x: &str) -> bool {
        self.terms.contains(x) || self.binders.iter().any(|b| b == x)
    }
}

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    pub(crate) scope: Option<Scope>,
}

pub fn parse_term(src: &str) -> PResult<Term> {
    let mut p = Parser::new(src, None)?;
    let (t, _) = p.term()?;
    p.expect_end()?;
    Ok(t)
}

pub fn parse_term_in(src: &str, scope: &Scope) -> PResult<Term> {
    let mut p = Parser::new(src, Some(scope.clone()))?;
    let (t, _) = p.term()?;
    p.expect_end()?;
    Ok(t)
}

pub fn parse_con(src: &str) -> PResult<TypeCon> {
    let mut p = Parser::new(src, None)?;
    let (c, _) = p.con()?;
    p.expect_end()?;
    Ok(c)
}

pub fn parse_kind(src: &str) -> PResult<Kind> {
    let mut p = Parser::new(src, None)?;
    let (k, _) = p.kind()?;
    p.expect_end()?;
    Ok(k)
}

impl Parser {
    pub fn new(src: &str, scope: Option<Scope>) -> PResult<Self> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            scope,
        })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn peek_token(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn here(&self) -> Pos {
        match self.toks.get(self.pos) {
            Some(t) => t.start,
            None => self
                .toks
                .last()
                .map(|t| t.end)
                .unwrap_or(Pos { line: 1, col: 1 }),
        }
    }

    fn last_end(&self) -> Pos {
        self.pos
            .checked_sub(1)
            .and_then(|i| self.toks.get(i))
            .map(|t| t.end)
            .unwrap_or_else(|| self.here())
    }

    pub(crate) fn span_from(&self, start: Pos) -> Span {
        Span {
            start,
            end: self.last_end(),
        }
    }

    pub fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn error(&self, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
        ParseError::new(kind, self.here(), message)
    }

    pub fn unexpected(&self, wanted: &str) -> ParseError {
        let found = match self.peek() {
            Some(t) => t.describe(),
            None => "end of input".to_string(),
        };
        self.error(
            ParseErrorKind::Syntax,
            format!("expected {wanted}, found {found}"),
        )
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok, wanted: &str) -> PResult<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    pub fn expect_end(&self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    /// A non-keyword identifier.
    pub fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_keyword(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(Tok::Ident(s)) => {
                let msg = format!("`{s}` is a reserved word and cannot be used as {what}");
                Err(self.error(ParseErrorKind::ReservedName, msg))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    pub fn number(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Number(n)) => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    pub fn usize_literal(&mut self) -> PResult<usize> {
        let at = self.here();
        let n = self.number()?;
        n.parse().map_err(|_| {
            ParseError::new(
                ParseErrorKind::Syntax,
                at,
                format!("number `{n}` is too large"),
            )
        })
    }

    /// `num` or `num/den`.
    pub fn rational(&mut self) -> PResult<Rational> {
        let at = self.here();
        let num = match self.peek() {
            Some(Tok::Number(_)) => self.number()?,
            _ => {
                return Err(ParseError::new(
                    ParseErrorKind::MalformedRational,
                    at,
                    "expected a rational literal",
                ))
            }
        };
        let text = if self.eat(&Tok::Slash) {
            match self.peek() {
                Some(Tok::Number(_)) => format!("{num}/{}", self.number()?),
                _ => {
                    return Err(ParseError::new(
                        ParseErrorKind::MalformedRational,
                        at,
                        "expected a denominator after `/`",
                    ))
                }
            }
        } else {
            num
        };
        text.parse()
            .map_err(|e: crate::rational::ParseRationalError| {
                ParseError::new(ParseErrorKind::MalformedRational, at, e.to_string())
            })
    }

    pub fn probability(&mut self) -> PResult<Rational> {
        let at = self.here();
        let p = self.rational()?;
        if !p.is_probability() {
            return Err(ParseError::new(
                ParseErrorKind::ProbabilityOutOfRange,
                at,
                format!("probability {p} is outside [0, 1]"),
            ));
        }
        Ok(p)
    }

    fn continues(&self) -> bool {
        match self.peek_token() {
            Some(t) if !t.at_margin => match &t.tok {
                Tok::Ident(s) => !is_keyword(s) || s == "choose" || s == "efq",
                Tok::OracleName(_) | Tok::LParen | Tok::LAngle => true,
                _ => false,
            },
            _ => false,
        }
    }

    fn with_binder<R>(&mut self, x: &str, f: impl FnOnce(&mut Self) -> R) -> R {
        if let Some(s) = self.scope.as_mut() {
            s.binders.push(x.to_string());
        }
        let r = f(self);
        if let Some(s) = self.scope.as_mut() {
            s.binders.pop();
        }
        r
    }

    fn binder(&mut self) -> PResult<String> {
        self.ident("a binder name")
    }

    pub fn term(&mut self) -> PResult<(Term, SpanTree)> {
        let start = self.here();
        if self.eat(&Tok::Backslash) {
            let x = self.binder()?;
            self.expect(&Tok::Colon, "`:`")?;
            let (ty, ts) = self.con()?;
            self.expect(&Tok::Dot, "`.`")?;
            let (body, bs) = self.with_binder(&x, |p| p.term())?;
            let span = self.span_from(start);
            return Ok((Term::lam(x, ty, body), SpanTree::node(span, vec![ts, bs])));
        }
        self.app()
    }

    fn app(&mut self) -> PResult<(Term, SpanTree)> {
        let start = self.here();
        let (mut head, mut hs) = self.postfix()?;
        while self.continues() {
            let (arg, as_) = self.postfix()?;
            let span = self.span_from(start);
            hs = if matches!(head, Term::Oracle(_)) {
                SpanTree::node(span, vec![as_])
            } else {
                SpanTree::node(span, vec![hs, as_])
            };
            head = Term::app(head, arg);
        }
        Ok((head, hs))
    }

    fn postfix(&mut self) -> PResult<(Term, SpanTree)> {
        let start = self.here();
        let (mut t, mut s) = self.atom()?;
        loop {
            match self.peek() {
                Some(Tok::Bang) => {
                    self.pos += 1;
                    t = Term::nu(t);
                }
                Some(Tok::ProjDot(i)) => {
                    let i = ProjIndex::from_usize(*i).expect("lexer yields 0 or 1");
                    self.pos += 1;
                    t = Term::proj(t, i);
                }
                _ => break,
            }
            s = SpanTree::node(self.span_from(start), vec![s]);
        }
        Ok((t, s))
    }

    fn atom(&mut self) -> PResult<(Term, SpanTree)> {
        let start = self.here();
        match self.peek().cloned() {
            Some(Tok::Ident(kw)) if kw == "choose" => {
                self.pos += 1;
                self.expect(&Tok::LBracket, "`[`")?;
                let p = self.probability()?;
                self.expect(&Tok::RBracket, "`]`")?;
                self.expect(&Tok::LBrace, "`{`")?;
                let (t, ts) = self.term()?;
                self.expect(&Tok::RBrace, "`}`")?;
                self.expect(&Tok::LBrace, "`{`")?;
                let (s, ss) = self.term()?;
                self.expect(&Tok::RBrace, "`}`")?;
                Ok((
                    Term::choice(t, p, s),
                    SpanTree::node(self.span_from(start), vec![ts, ss]),
                ))
            }
            Some(Tok::Ident(kw)) if kw == "efq" => {
                self.pos += 1;
                self.expect(&Tok::LParen, "`(`")?;
                let (t, ts) = self.term()?;
                self.expect(&Tok::Colon, "`:`")?;
                let (ty, tys) = self.con()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok((
                    Term::efq(t, ty),
                    SpanTree::node(self.span_from(start), vec![ts, tys]),
                ))
            }
            Some(Tok::Ident(_)) => {
                let x = self.ident("a term")?;
                if let Some(scope) = &self.scope {
                    if !scope.has_term(&x) {
                        return Err(ParseError::new(
                            ParseErrorKind::UnboundName,
                            start,
                            format!("unbound term name `{x}`"),
                        ));
                    }
                }
                Ok((Term::Var(x), SpanTree::leaf(self.span_from(start))))
            }
            Some(Tok::OracleName(o)) => {
                self.pos += 1;
                Ok((Term::Oracle(o), SpanTree::leaf(self.span_from(start))))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let (t, mut s) = self.term()?;
                self.expect(&Tok::RParen, "`)`")?;
                s.span = self.span_from(start);
                Ok((t, s))
            }
            Some(Tok::LAngle) => {
                self.pos += 1;
                let mut items = vec![self.term()?];
                while self.eat(&Tok::Comma) {
                    items.push(self.term()?);
                }
                if items.len() < 2 {
                    return Err(self.unexpected("`,`"));
                }
                self.expect(&Tok::RAngle, "`>`")?;
                let end = self.last_end();
                let (mut acc, mut acc_s) = items.pop().expect("non-empty");
                while let Some((t, ts)) = items.pop() {
                    let span = Span {
                        start: ts.span.start,
                        end,
                    };
                    acc_s = SpanTree::node(span, vec![ts, acc_s]);
                    acc = Term::pair(t, acc);
                }
                acc_s.span = self.span_from(start);
                Ok((acc, acc_s))
            }
            _ => Err(self.unexpected("a term")),
        }
    }

    pub fn con(&mut self) -> PResult<(TypeCon, SpanTree)> {
        let start = self.here();
        if self.eat_keyword("forall") {
            let x = self.binder()?;
            self.expect(&Tok::Colon, "`:`")?;
            let (a, as_) = self.con()?;
            self.expect(&Tok::Dot, "`.`")?;
            let (b, bs) = self.with_binder(&x, |p| p.con())?;
            return Ok((
                TypeCon::forall(x, a, b),
                SpanTree::node(self.span_from(start), vec![as_, bs]),
            ));
        }
        if self.eat(&Tok::DoubleBackslash) {
            let x = self.binder()?;
            self.expect(&Tok::Colon, "`:`")?;
            let (a, as_) = self.con()?;
            self.expect(&Tok::Dot, "`.`")?;
            let (b, bs) = self.with_binder(&x, |p| p.con())?;
            return Ok((
                TypeCon::lam(x, a, b),
                SpanTree::node(self.span_from(start), vec![as_, bs]),
            ));
        }
        let (lhs, ls) = self.con_and()?;
        if self.eat(&Tok::Arrow) {
            let (rhs, rs) = self.with_binder(ANON_BINDER, |p| p.con())?;
            return Ok((
                TypeCon::arrow(lhs, rhs),
                SpanTree::node(self.span_from(start), vec![ls, rs]),
            ));
        }
        Ok((lhs, ls))
    }

    fn con_and(&mut self) -> PResult<(TypeCon, SpanTree)> {
        let start = self.here();
        let (lhs, ls) = self.con_prefix()?;
        if self.eat(&Tok::Wedge) {
            let (rhs, rs) = self.con_and()?;
            return Ok((
                TypeCon::and(lhs, rhs),
                SpanTree::node(self.span_from(start), vec![ls, rs]),
            ));
        }
        Ok((lhs, ls))
    }

    fn con_prefix(&mut self) -> PResult<(TypeCon, SpanTree)> {
        let start = self.here();
        if self.eat_keyword("Oplus") {
            let (a, s) = self.con_prefix()?;
            return Ok((
                TypeCon::oplus(a),
                SpanTree::node(self.span_from(start), vec![s]),
            ));
        }
        if self.eat_keyword("Sigma") {
            let (a, s) = self.con_prefix()?;
            return Ok((
                TypeCon::sigma(a),
                SpanTree::node(self.span_from(start), vec![s]),
            ));
        }
        self.con_app()
    }

    fn con_app(&mut self) -> PResult<(TypeCon, SpanTree)> {
        let start = self.here();
        let (mut head, mut hs) = self.con_atom()?;
        while self.continues() {
            let (arg, as_) = self.postfix()?;
            hs = SpanTree::node(self.span_from(start), vec![hs, as_]);
            head = TypeCon::app(head, arg);
        }
        Ok((head, hs))
    }

    fn con_atom(&mut self) -> PResult<(TypeCon, SpanTree)> {
        let start = self.here();
        if self.eat_keyword("Bot") {
            return Ok((TypeCon::Bottom, SpanTree::leaf(self.span_from(start))));
        }
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let a = self.ident("a type")?;
                if let Some(scope) = &self.scope {
                    if !scope.atoms.contains(&a) {
                        return Err(ParseError::new(
                            ParseErrorKind::UnboundName,
                            start,
                            format!("unbound type name `{a}`"),
                        ));
                    }
                }
                Ok((TypeCon::Var(a), SpanTree::leaf(self.span_from(start))))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let (c, mut s) = self.con()?;
                self.expect(&Tok::RParen, "`)`")?;
                s.span = self.span_from(start);
                Ok((c, s))
            }
            _ => Err(self.unexpected("a type")),
        }
    }

    pub fn kind(&mut self) -> PResult<(Kind, SpanTree)> {
        let start = self.here();
        if self.eat(&Tok::Star) {
            return Ok((Kind::Star, SpanTree::leaf(self.span_from(start))));
        }
        if self.eat_keyword("Pi") {
            let x = self.binder()?;
            self.expect(&Tok::Colon, "`:`")?;
            let (a, as_) = self.con()?;
            self.expect(&Tok::Dot, "`.`")?;
            let (k, ks) = self.with_binder(&x, |p| p.kind())?;
            return Ok((
                Kind::pi(x, a, k),
                SpanTree::node(self.span_from(start), vec![as_, ks]),
            ));
        }
        Err(self.unexpected("a kind (`*` or `Pi`)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::alpha_eq_con;

    #[test]
    fn term_examples() {
        let t = parse_term("\\x:A. x").unwrap();
        assert_eq!(t, Term::lam("x", TypeCon::var("A"), Term::var("x")));
        let t = parse_term("choose[1/3]{a}{b} !").unwrap();
        assert_eq!(
            t,
            Term::nu(Term::choice(
                Term::var("a"),
                Rational::new(1, 3),
                Term::var("b")
            ))
        );
        let t = parse_term("<#coin!, #coin!>").unwrap();
        let c = Term::nu(Term::oracle("coin"));
        assert_eq!(t, Term::pair(c.clone(), c));
    }

    #[test]
    fn application_and_postfix() {
        let t = parse_term("f a b").unwrap();
        assert_eq!(
            t,
            Term::app(Term::app(Term::var("f"), Term::var("a")), Term::var("b"))
        );
        let t = parse_term("(#f a)!").unwrap();
        assert_eq!(
            t,
            Term::nu(Term::OracleApp("f".into(), Box::new(Term::var("a"))))
        );
        let t = parse_term("<a, b, c>.1.0").unwrap();
        let tup = Term::pair(Term::var("a"), Term::pair(Term::var("b"), Term::var("c")));
        assert_eq!(
            t,
            Term::proj(Term::proj(tup, ProjIndex::One), ProjIndex::Zero)
        );
        let t = parse_term("efq(x : A /\\ B)").unwrap();
        assert_eq!(
            t,
            Term::efq(
                Term::var("x"),
                TypeCon::and(TypeCon::var("A"), TypeCon::var("B"))
            )
        );
    }

    #[test]
    fn types() {
        let c = parse_con("A -> B -> C").unwrap();
        let expected = TypeCon::arrow(
            TypeCon::var("A"),
            TypeCon::arrow(TypeCon::var("B"), TypeCon::var("C")),
        );
        assert!(alpha_eq_con(&c, &expected));
        let c = parse_con("forall x:A. P x /\\ Oplus Sigma Bot").unwrap();
        let px = TypeCon::app(TypeCon::var("P"), Term::var("x"));
        let expected = TypeCon::forall(
            "x",
            TypeCon::var("A"),
            TypeCon::and(px, TypeCon::oplus(TypeCon::sigma(TypeCon::Bottom))),
        );
        assert_eq!(c, expected);
        let c = parse_con("(\\\\x:A. P x) (f a)").unwrap();
        assert!(matches!(c, TypeCon::App(..)));
        assert_eq!(
            parse_kind("Pi x:A. Pi y:A. *").unwrap(),
            Kind::pi(
                "x",
                TypeCon::var("A"),
                Kind::pi("y", TypeCon::var("A"), Kind::Star)
            )
        );
    }

    #[test]
    fn choice_probability_bounds() {
        let err = parse_term("choose[5/4]{a}{b}").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::ProbabilityOutOfRange);
        let err = parse_term("choose[1/0]{a}{b}").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MalformedRational);
        assert!(parse_term("choose[1]{a}{b}").is_ok());
    }

    #[test]
    fn scoped_parsing_reports_unbound_names() {
        let scope = Scope::new(["A".to_string()], ["a".to_string()]);
        assert!(parse_term_in("\\x:A. <x, a>", &scope).is_ok());
        let err = parse_term_in("\\x:A. y", &scope).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnboundName);
        assert_eq!((err.pos.line, err.pos.col), (1, 7));
        let err = parse_term_in("\\x:B. x", &scope).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnboundName);
    }

    #[test]
    fn errors() {
        assert_eq!(parse_term("<a>").unwrap_err().kind, ParseErrorKind::Syntax);
        assert_eq!(
            parse_term("\\choose:A. x").unwrap_err().kind,
            ParseErrorKind::ReservedName
        );
        assert_eq!(parse_term("a )").unwrap_err().kind, ParseErrorKind::Syntax);
    }

    #[test]
    fn span_tree_tracks_children() {
        let mut p = Parser::new("f (g a)", None).unwrap();
        let (_, s) = p.term().unwrap();
        assert_eq!(s.children.len(), 2);
        let arg = &s.children[1];
        assert_eq!(arg.span.start, Pos { line: 1, col: 3 });
        assert_eq!(arg.children[1].span.start, Pos { line: 1, col: 6 });
    }
}
