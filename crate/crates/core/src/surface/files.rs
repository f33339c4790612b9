//! Whole-file formats: programs (`.olam`), oracle definitions (`.oracle`)
//! and target distributions (`.dist`).

use std::collections::{BTreeSet, HashSet};

use super::error::{ParseError, ParseErrorKind, Pos, Span, SpanTree};
use super::lexer::Tok;
use super::parser::{Parser, Scope};
use crate::oracle::{Arity, Guard, OracleDef, OracleRule};
use crate::rational::Rational;
use crate::syntax::{alpha_eq_term, Kind, Name, Term, TypeCon};

#[derive(Clone, Debug)]
pub enum Decl {
    /// `atom P : Pi x:A. *`
    Atom { name: Name, kind: Kind, span: Span },
    /// `const a : A`
    Const {
        name: Name,
        ty: TypeCon,
        span: Span,
        ty_spans: SpanTree,
    },
    /// `import coin`
    Import { name: Name, span: Span },
    /// `name = t` or `name : T = t`
    Def(Definition),
}

#[derive(Clone, Debug)]
pub struct Definition {
    pub name: Name,
    pub ty: Option<(TypeCon, SpanTree)>,
    pub body: Term,
    pub body_spans: SpanTree,
    pub span: Span,
}

#[derive(Clone, Debug, Default)]
pub struct SourceFile {
    pub decls: Vec<Decl>,
}

impl SourceFile {
    pub fn definitions(&self) -> impl Iterator<Item = &Definition> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Def(def) => Some(def),
            _ => None,
        })
    }

    pub fn main(&self) -> Option<&Definition> {
        self.definitions().find(|d| d.name == "main")
    }

    pub fn imports(&self) -> impl Iterator<Item = (&str, Span)> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Import { name, span } => Some((name.as_str(), *span)),
            _ => None,
        })
    }
}

fn start_of_item(p: &Parser) -> PResultUnit {
    match p.peek_token() {
        Some(t) if !t.at_margin => Err(p.error(
            ParseErrorKind::Syntax,
            "a declaration must start in column 1 (indent continuation lines)",
        )),
        _ => Ok(()),
    }
}

type PResultUnit = Result<(), ParseError>;

fn declared_name(p: &mut Parser, what: &str) -> Result<(Name, Pos), ParseError> {
    let at = p.here();
    let name = p.ident(what)?;
    if name.starts_with('_') {
        return Err(ParseError::new(
            ParseErrorKind::ReservedName,
            at,
            format!("names starting with `_` are reserved: `{name}`"),
        ));
    }
    Ok((name, at))
}

/// Parses a program. Names must be declared before use and `main` must be
/// defined exactly once.
pub fn parse_program(src: &str) -> Result<SourceFile, ParseError> {
    let mut p = Parser::new(src, Some(Scope::default()))?;
    let mut file = SourceFile::default();
    let mut taken: HashSet<Name> = HashSet::new();
    let mut imported: HashSet<Name> = HashSet::new();

    while !p.at_end() {
        start_of_item(&p)?;
        let start = p.here();
        if p.eat_keyword("atom") {
            let (name, at) = declared_name(&mut p, "an atom name")?;
            p.expect(&Tok::Colon, "`:`")?;
            let (kind, _) = p.kind()?;
            claim(&mut taken, &name, at)?;
            p.scope.as_mut().expect("scoped").atoms.insert(name.clone());
            let span = p.span_from(start);
            file.decls.push(Decl::Atom { name, kind, span });
        } else if p.eat_keyword("const") {
            let (name, at) = declared_name(&mut p, "a constant name")?;
            p.expect(&Tok::Colon, "`:`")?;
            let (ty, ty_spans) = p.con()?;
            claim(&mut taken, &name, at)?;
            p.scope.as_mut().expect("scoped").terms.insert(name.clone());
            let span = p.span_from(start);
            file.decls.push(Decl::Const {
                name,
                ty,
                span,
                ty_spans,
            });
        } else if p.eat_keyword("import") {
            let at = p.here();
            let name = match p.peek().cloned() {
                Some(Tok::OracleName(o)) => {
                    p.bump();
                    o
                }
                _ => p.ident("an oracle name")?,
            };
            if !imported.insert(name.clone()) {
                return Err(ParseError::new(
                    ParseErrorKind::DuplicateDeclaration,
                    at,
                    format!("oracle `{name}` imported twice"),
                ));
            }
            let span = p.span_from(start);
            file.decls.push(Decl::Import { name, span });
        } else {
            let (name, at) = declared_name(&mut p, "a declaration")?;
            let ty = if p.eat(&Tok::Colon) {
                Some(p.con()?)
            } else {
                None
            };
            p.expect(&Tok::Eq, "`=`")?;
            let (body, body_spans) = p.term()?;
            claim(&mut taken, &name, at)?;
            p.scope.as_mut().expect("scoped").terms.insert(name.clone());
            let span = p.span_from(start);
            file.decls.push(Decl::Def(Definition {
                name,
                ty,
                body,
                body_spans,
                span,
            }));
        }
    }
    if file.main().is_none() {
        return Err(ParseError::new(
            ParseErrorKind::MissingMain,
            p.here(),
            "no `main` definition",
        ));
    }
    Ok(file)
}

fn claim(taken: &mut HashSet<Name>, name: &str, at: Pos) -> PResultUnit {
    if taken.insert(name.to_string()) {
        Ok(())
    } else {
        Err(ParseError::new(
            ParseErrorKind::DuplicateDeclaration,
            at,
            format!("`{name}` is already declared"),
        ))
    }
}

/// Parses a `.oracle` file:
///
/// ```text
/// oracle coin arity 0 type Sigma Bool
///   rule index mod 2 = 1 -> true
///   default -> false
/// ```
pub fn parse_oracles(src: &str) -> Result<Vec<OracleDef>, ParseError> {
    let mut p = Parser::new(src, None)?;
    let mut defs: Vec<OracleDef> = Vec::new();
    while !p.at_end() {
        start_of_item(&p)?;
        p.expect_keyword("oracle")?;
        let at = p.here();
        let name = match p.peek().cloned() {
            Some(Tok::OracleName(o)) => {
                p.bump();
                o
            }
            _ => p.ident("an oracle name")?,
        };
        if defs.iter().any(|d| d.name == name) {
            return Err(ParseError::new(
                ParseErrorKind::DuplicateDeclaration,
                at,
                format!("oracle `{name}` defined twice"),
            ));
        }
        expect_word(&mut p, "arity")?;
        let at = p.here();
        let arity = match p.usize_literal()? {
            0 => Arity::Nullary,
            1 => Arity::Unary,
            n => {
                return Err(ParseError::new(
                    ParseErrorKind::BadOracleDeclaration,
                    at,
                    format!("oracle arity must be 0 or 1, found {n}"),
                ))
            }
        };
        expect_word(&mut p, "type")?;
        let at = p.here();
        let (ty, _) = p.con()?;
        let shape_ok = match arity {
            Arity::Nullary => matches!(ty, TypeCon::Sigma(_)),
            Arity::Unary => {
                matches!(&ty, TypeCon::Forall(_, _, b) if matches!(**b, TypeCon::Sigma(_)))
            }
        };
        if !shape_ok {
            let want = match arity {
                Arity::Nullary => "Sigma A",
                Arity::Unary => "forall x:A. Sigma B",
            };
            return Err(ParseError::new(
                ParseErrorKind::BadOracleDeclaration,
                at,
                format!(
                    "an arity-{} oracle must have a type of the form {want}",
                    arity.as_usize()
                ),
            ));
        }
        let mut rules = Vec::new();
        let default = loop {
            let at = p.here();
            if p.eat_keyword("default") {
                p.expect(&Tok::Arrow, "`->`")?;
                break p.term()?.0;
            }
            if !p.eat_keyword("rule") {
                return Err(ParseError::new(
                    ParseErrorKind::BadOracleDeclaration,
                    at,
                    format!("oracle `{name}` must end with a `default -> t` rule"),
                ));
            }
            let guard = parse_guard(&mut p, arity)?;
            p.expect(&Tok::Arrow, "`->`")?;
            let (output, _) = p.term()?;
            rules.push(OracleRule { guard, output });
        };
        defs.push(OracleDef {
            name,
            arity,
            ty,
            rules,
            default,
        });
    }
    Ok(defs)
}

fn expect_word(p: &mut Parser, w: &str) -> PResultUnit {
    match p.peek() {
        Some(Tok::Ident(s)) if s == w => {
            p.bump();
            Ok(())
        }
        _ => Err(p.unexpected(&format!("`{w}`"))),
    }
}

fn parse_guard(p: &mut Parser, arity: Arity) -> Result<Guard, ParseError> {
    let at = p.here();
    let word = match p.peek() {
        Some(Tok::Ident(s)) => s.clone(),
        _ => return Err(p.unexpected("a guard (`index`, `arg` or `context`)")),
    };
    p.bump();
    match word.as_str() {
        "index" => {
            if matches!(p.peek(), Some(Tok::Ident(s)) if s == "mod") {
                p.bump();
                let at = p.here();
                let modulus = p.usize_literal()?;
                if modulus == 0 {
                    return Err(ParseError::new(
                        ParseErrorKind::BadOracleDeclaration,
                        at,
                        "modulus must be positive",
                    ));
                }
                p.expect(&Tok::Eq, "`=`")?;
                let at = p.here();
                let residue = p.usize_literal()?;
                if residue >= modulus {
                    return Err(ParseError::new(
                        ParseErrorKind::BadOracleDeclaration,
                        at,
                        format!("residue {residue} is not below modulus {modulus}"),
                    ));
                }
                Ok(Guard::IndexMod { modulus, residue })
            } else {
                expect_word(p, "in")?;
                p.expect(&Tok::LBrace, "`{`")?;
                let mut set = BTreeSet::new();
                set.insert(p.usize_literal()?);
                while p.eat(&Tok::Comma) {
                    set.insert(p.usize_literal()?);
                }
                p.expect(&Tok::RBrace, "`}`")?;
                Ok(Guard::IndexIn(set))
            }
        }
        "arg" => {
            if arity != Arity::Unary {
                return Err(ParseError::new(
                    ParseErrorKind::BadOracleDeclaration,
                    at,
                    "`arg` guards are only allowed for arity-1 oracles",
                ));
            }
            p.expect(&Tok::Eq, "`=`")?;
            Ok(Guard::Arg(p.term()?.0))
        }
        "context" => {
            p.expect(&Tok::Eq, "`=`")?;
            match p.bump() {
                Some(super::lexer::Token {
                    tok: Tok::Str(s), ..
                }) => Ok(Guard::Context(s)),
                _ => Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    at,
                    "expected a string after `context =`",
                )),
            }
        }
        _ => Err(ParseError::new(
            ParseErrorKind::Syntax,
            at,
            format!("unknown guard `{word}` (expected `index`, `arg` or `context`)"),
        )),
    }
}

/// One `term = p` line of a target distribution.
#[derive(Clone, Debug)]
pub struct TargetEntry {
    pub term: Term,
    pub prob: Rational,
    pub pos: Pos,
}

#[derive(Clone, Debug, Default)]
pub struct TargetDistributionFile {
    pub entries: Vec<TargetEntry>,
}

impl TargetDistributionFile {
    pub fn lookup(&self, t: &Term) -> Option<&Rational> {
        self.entries
            .iter()
            .find(|e| alpha_eq_term(&e.term, t))
            .map(|e| &e.prob)
    }
}

/// Parses `term = p/q` lines. Probabilities must lie in `[0, 1]` and no
/// term may be listed twice (up to α).
pub fn parse_distribution(src: &str) -> Result<TargetDistributionFile, ParseError> {
    let mut p = Parser::new(src, None)?;
    let mut file = TargetDistributionFile::default();
    while !p.at_end() {
        let pos = p.here();
        let (term, _) = p.term()?;
        p.expect(&Tok::Eq, "`=`")?;
        let prob = p.probability()?;
        if file.lookup(&term).is_some() {
            return Err(ParseError::new(
                ParseErrorKind::DuplicateOutcome,
                pos,
                format!("outcome `{term}` is listed twice"),
            ));
        }
        file.entries.push(TargetEntry { term, prob, pos });
    }
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PROG: &str = "\
atom A : *
const a : A
const b : A
-- a comment
main = choose[1/3]{a}{b} !
";

    #[test]
    fn program() {
        let f = parse_program(PROG).unwrap();
        assert_eq!(f.decls.len(), 4);
        let main = f.main().unwrap();
        assert_eq!(main.body.to_string(), "choose[1/3]{a}{b} !");
    }

    #[test]
    fn continuation_lines_and_definitions() {
        let src = "atom A : *\nconst a : A\nid : A -> A = \\x:A.\n  x\nmain = id\n  a\n";
        let f = parse_program(src).unwrap();
        assert_eq!(f.main().unwrap().body.to_string(), "id a");
    }

    #[test]
    fn program_errors() {
        let err = parse_program("atom A : *\nmain = \\x:A. y\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnboundName);
        assert_eq!((err.pos.line, err.pos.col), (2, 14));
        let err = parse_program("atom A : *\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingMain);
        let err = parse_program("atom A : *\natom A : *\nmain = x").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateDeclaration);
        let err = parse_program("atom A : *\n const a : A\nmain = a").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Syntax);
        let err = parse_program("const _a : A\nmain = a").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::ReservedName);
    }

    #[test]
    fn oracle_file() {
        let src = "\
oracle coin arity 0 type Sigma Bool
  rule index mod 2 = 1 -> true
  default -> false
oracle f arity 1 type forall x:Nat. Sigma Bool
  rule arg = zero -> true
  rule index in {2, 3} -> false
  rule context = \"<[_1], [_2]>\" -> true
  default -> false
";
        let defs = parse_oracles(src).unwrap();
        assert_eq!(defs.len(), 2);
        assert_eq!(defs[0].rules.len(), 1);
        assert_eq!(
            defs[0].rules[0].guard,
            Guard::IndexMod {
                modulus: 2,
                residue: 1
            }
        );
        assert_eq!(defs[1].arity, Arity::Unary);
        assert_eq!(defs[1].rules.len(), 3);
        assert_eq!(
            defs[1].rules[2].guard,
            Guard::Context("<[_1], [_2]>".into())
        );
    }

    #[test]
    fn oracle_file_errors() {
        let no_default = "oracle c arity 0 type Sigma A\n  rule index in {1} -> a\n";
        assert_eq!(
            parse_oracles(no_default).unwrap_err().kind,
            ParseErrorKind::BadOracleDeclaration
        );
        let bad_type = "oracle c arity 0 type A\n  default -> a\n";
        assert_eq!(
            parse_oracles(bad_type).unwrap_err().kind,
            ParseErrorKind::BadOracleDeclaration
        );
        let bad_arity = "oracle c arity 2 type Sigma A\n  default -> a\n";
        assert_eq!(
            parse_oracles(bad_arity).unwrap_err().kind,
            ParseErrorKind::BadOracleDeclaration
        );
        let arg_on_nullary = "oracle c arity 0 type Sigma A\n  rule arg = a -> a\n  default -> a\n";
        assert_eq!(
            parse_oracles(arg_on_nullary).unwrap_err().kind,
            ParseErrorKind::BadOracleDeclaration
        );
    }

    #[test]
    fn distribution_file() {
        let d = parse_distribution("a = 1/3\nb = 2/3").unwrap();
        assert_eq!(d.entries.len(), 2);
        assert_eq!(d.entries[1].prob, Rational::new(2, 3));
        let err = parse_distribution("a = 5/4").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::ProbabilityOutOfRange);
        let err = parse_distribution("a = 1/3\na = 1/3").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateOutcome);
        let err = parse_distribution("a = 1/x").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MalformedRational);
        let err = parse_distribution("\\x:A. x = 1\n\\y:A. y = 0").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateOutcome);
    }
}
