//! Kind and type checking.

mod check;
mod env;
mod error;
mod program;

pub use check::{
    check_is_type, check_kind, check_type, infer_kind, infer_type, skeleton, validate_oracle,
};
pub use env::{Binding, Env};
pub use error::{TypeError, TypeErrorKind};
pub use program::{check_program, load_program, CheckedDefinition, CheckedProgram, ProgramError};
