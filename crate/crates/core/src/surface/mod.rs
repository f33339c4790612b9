//! Concrete syntax: lexer, parser, printer and the file formats built on
//! them.

mod error;
mod files;
mod lexer;
mod parser;
mod printer;

pub use error::{ParseError, ParseErrorKind, Pos, Span, SpanTree};
pub use files::{
    parse_distribution, parse_oracles, parse_program, Decl, Definition, SourceFile,
    TargetDistributionFile, TargetEntry,
};
pub use parser::{is_keyword, parse_con, parse_kind, parse_term, parse_term_in, Scope, KEYWORDS};
pub use printer::{print_con, print_kind, print_term};
