use std::fmt;

use super::check::{check_is_type, check_kind, check_type, infer_type, validate_oracle};
use super::env::Env;
use super::error::TypeError;
use crate::oracle::{OracleError, OracleRegistry};
use crate::surface::{parse_program, Decl, ParseError, Pos, SourceFile, Span};
use crate::syntax::{substitute_in_con, substitute_term, Name, Term, TypeCon};

#[derive(Clone, Debug)]
pub struct CheckedDefinition {
    pub name: Name,
    /// The body with earlier definitions substituted in.
    pub term: Term,
    pub ty: TypeCon,
}

#[derive(Clone, Debug)]
pub struct CheckedProgram {
    pub env: Env,
    pub definitions: Vec<CheckedDefinition>,
}

impl CheckedProgram {
    pub fn main(&self) -> &CheckedDefinition {
        self.definitions
            .iter()
            .find(|d| d.name == "main")
            .expect("parser guarantees a main definition")
    }
}

#[derive(Clone, Debug)]
pub enum ProgramError {
    Parse(ParseError),
    Type {
        declaration: Name,
        error: TypeError,
        span: Span,
    },
    Oracle {
        error: OracleError,
        span: Option<Span>,
    },
}

impl ProgramError {
    pub fn code(&self) -> &'static str {
        match self {
            ProgramError::Parse(e) => e.code(),
            ProgramError::Type { error, .. } => error.code(),
            ProgramError::Oracle { error, .. } => error.code(),
        }
    }

    pub fn pos(&self) -> Option<Pos> {
        match self {
            ProgramError::Parse(e) => Some(e.pos),
            ProgramError::Type { span, .. } => Some(span.start),
            ProgramError::Oracle { span, .. } => span.map(|s| s.start),
        }
    }

    pub fn span(&self) -> Option<Span> {
        match self {
            ProgramError::Parse(e) => Some(Span {
                start: e.pos,
                end: e.pos,
            }),
            ProgramError::Type { span, .. } => Some(*span),
            ProgramError::Oracle { span, .. } => *span,
        }
    }

    pub fn message(&self) -> String {
        match self {
            ProgramError::Parse(e) => e.message.clone(),
            ProgramError::Type {
                declaration, error, ..
            } => format!("in `{declaration}`: {}", error.message),
            ProgramError::Oracle { error, .. } => error.to_string(),
        }
    }
}

impl fmt::Display for ProgramError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos() {
            Some(p) => write!(f, "{p}: {} [{}]", self.message(), self.code()),
            None => write!(f, "{} [{}]", self.message(), self.code()),
        }
    }
}

impl std::error::Error for ProgramError {}

impl From<ParseError> for ProgramError {
    fn from(e: ParseError) -> Self {
        ProgramError::Parse(e)
    }
}

/// Parses and checks a program against the given oracles.
pub fn load_program(src: &str, registry: &OracleRegistry) -> Result<CheckedProgram, ProgramError> {
    let file = parse_program(src)?;
    check_program(&file, registry)
}

/// Checks declarations in order. Atoms and constants build the environment;
/// then every loaded oracle is validated against it; then definitions are
/// checked, each with the earlier definitions substituted in.
pub fn check_program(
    file: &SourceFile,
    registry: &OracleRegistry,
) -> Result<CheckedProgram, ProgramError> {
    let mut env = Env::new();
    for decl in &file.decls {
        match decl {
            Decl::Atom { name, kind, span } => {
                check_kind(&env, kind).map_err(|error| ProgramError::Type {
                    declaration: name.clone(),
                    error,
                    span: *span,
                })?;
                env.push_con(name.clone(), kind.clone());
            }
            Decl::Const {
                name, ty, ty_spans, ..
            } => {
                let ty = check_is_type(&env, ty).map_err(|error| ProgramError::Type {
                    declaration: name.clone(),
                    span: ty_spans.locate(&error.path),
                    error,
                })?;
                env.push_term(name.clone(), ty);
            }
            Decl::Import { .. } | Decl::Def(_) => {}
        }
    }

    for def in registry.iter() {
        validate_oracle(def, &env).map_err(|error| ProgramError::Oracle { error, span: None })?;
        env.set_oracle_type(def.name.clone(), def.ty.clone());
    }
    for (name, span) in file.imports() {
        if registry.get(name).is_none() {
            return Err(ProgramError::Oracle {
                error: OracleError::UnknownOracle(name.to_string()),
                span: Some(span),
            });
        }
    }

    let mut definitions: Vec<CheckedDefinition> = Vec::new();
    for def in file.definitions() {
        let inline = |t: &Term| {
            definitions
                .iter()
                .fold(t.clone(), |acc, d| substitute_term(&acc, &d.name, &d.term))
        };
        let term = inline(&def.body);
        let ty = match &def.ty {
            Some((ascribed, spans)) => {
                let ascribed = definitions.iter().fold(ascribed.clone(), |acc, d| {
                    substitute_in_con(&acc, &d.name, &d.term)
                });
                let ascribed =
                    check_is_type(&env, &ascribed).map_err(|error| ProgramError::Type {
                        declaration: def.name.clone(),
                        span: spans.locate(&error.path),
                        error,
                    })?;
                check_type(&env, &term, &ascribed).map_err(|error| ProgramError::Type {
                    declaration: def.name.clone(),
                    span: def.body_spans.locate(&error.path),
                    error,
                })?;
                ascribed
            }
            None => infer_type(&env, &term).map_err(|error| ProgramError::Type {
                declaration: def.name.clone(),
                span: def.body_spans.locate(&error.path),
                error,
            })?,
        };
        definitions.push(CheckedDefinition {
            name: def.name.clone(),
            term,
            ty,
        });
    }
    Ok(CheckedProgram { env, definitions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse_oracles;

    const HEADER: &str = "atom A : *\natom B : *\nconst a : A\nconst b : A\n";

    fn load(body: &str, oracles: &str) -> Result<CheckedProgram, ProgramError> {
        let reg = OracleRegistry::from_defs(parse_oracles(oracles).unwrap()).unwrap();
        load_program(&format!("{HEADER}{body}"), &reg)
    }

    #[test]
    fn well_typed_program() {
        let p = load("id = \\x:A. x\nmain : A -> A = id\n", "").unwrap();
        assert_eq!(p.main().ty.to_string(), "A -> A");
        assert_eq!(p.main().term.to_string(), "\\x:A. x");
    }

    #[test]
    fn error_spans_point_into_the_source() {
        let err = load("main = <a, \\x:A. a a>\n", "").unwrap_err();
        assert_eq!(err.code(), "not-a-function");
        let span = err.span().unwrap();
        assert_eq!((span.start.line, span.start.col), (5, 18));
        let err = load("main : B = a\n", "").unwrap_err();
        assert_eq!(err.code(), "type-mismatch");
    }

    #[test]
    fn oracles_are_validated() {
        let coin =
            "oracle coin arity 0 type Sigma A\n  rule index mod 2 = 0 -> b\n  default -> a\n";
        assert!(load("import coin\nmain = <#coin!, #coin!>\n", coin).is_ok());
        let err = load("main = #coin !\n", "").unwrap_err();
        assert_eq!(err.code(), "unknown-oracle");
        let err = load("import coin\nmain = a\n", "").unwrap_err();
        assert_eq!(err.code(), "unknown-oracle");
        let bad = "oracle coin arity 0 type Sigma A\n  default -> z\n";
        assert_eq!(
            load("main = a\n", bad).unwrap_err().code(),
            "output-not-closed"
        );
        let bad = "oracle coin arity 0 type Sigma B\n  default -> a\n";
        assert_eq!(
            load("main = a\n", bad).unwrap_err().code(),
            "output-ill-typed"
        );
    }
}
