//! A verifying kernel for the d calculus: syntax, reduction, typing,
//! norms, an explicit-substitution oracle, a surface language and
//! metatheory property runners.

pub mod certificate;
pub mod corpus;
pub mod explicit;
pub mod meta;
pub mod norming;
pub mod reduction;
pub mod surface;
pub mod syntax;
pub mod typing;

pub use reduction::{classify, normalize, NormalClass, DEFAULT_FUEL};
pub use syntax::{Context, Expr, Name};
pub use typing::{check, infer, valid, Checker, ErrorKind, TypeError};
