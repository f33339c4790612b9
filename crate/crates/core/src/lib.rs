//! A dependently typed λ-calculus with probabilistic choice and oracle
//! constants: syntax, checking, evaluation, exact enumeration of output
//! distributions and trust verdicts.

pub mod checker;
pub mod constructor;
pub mod oracle;
pub mod rational;
pub mod reducer;
pub mod surface;
pub mod syntax;
pub mod testgen;
pub mod trace;
pub mod trust;

pub use rational::Rational;
