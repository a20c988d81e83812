//! Concrete syntax: lexer, parser, printers and elaboration of theory files.
//!
//! ```text
//! tau  τ                 the sort
//! [x:A]B  [x!A]B         universal / existential abstraction
//! [x,y:A; z!B]C          several binders at once
//! [A => B]  [A;B => C]   non-dependent universal abstraction
//! (f a b)                application, left nested
//! [x := a, c : D]        protected definition (also written <x := a, c : D>)
//! [a,b]  [a,b,c]         product, right nested
//! [a+b]                  sum
//! inl{a,B}  inr{B,a}     injections
//! case{f,g}              case distinction
//! ~a  ¬a                 negation
//! a.1  a.2               projections
//! name[e1,e2]            scheme instance (no space before `[`)
//! ```

mod lexer;
mod parser;
mod printer;
pub mod elab;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::syntax::Expr;

pub use elab::{ElabError, Job, JobKind, Session, Verdict};
pub use parser::{parse_expr_term, parse_theory};
pub use printer::{print, print_in};

/// A source range, 1-based lines and columns, end exclusive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn point(line: u32, col: u32) -> Span {
        Span { line, col, end_line: line, end_col: col + 1 }
    }

    pub fn to(self, other: Span) -> Span {
        Span { line: self.line, col: self.col, end_line: other.end_line, end_col: other.end_col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{span}: expected {}, found {found}", .expected.join(" or "))]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
}

impl ParseError {
    pub fn at(span: Span, expected: Vec<String>, found: String) -> ParseError {
        ParseError { span, expected, found }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BindKind {
    Univ,
    Exist,
}

/// One `;`-separated part of a bracketed binder list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Segment {
    Bind { kind: BindKind, names: Vec<String>, ty: Term },
    /// An anonymous premise, only before `=>`.
    Premise(Term),
}

/// How a binder bracket ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BracketEnd {
    /// `[...]body`
    Body(Box<Term>),
    /// `[... => result]`
    Arrow(Box<Term>),
}

/// Surface term. Equality ignores spans.
#[derive(Clone, Debug)]
pub struct Term {
    pub kind: TermKind,
    pub span: Span,
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Term {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermKind {
    Tau,
    Ident(String),
    SchemeInst(String, Vec<Term>),
    Binder { segments: Vec<Segment>, end: BracketEnd },
    App(Vec<Term>),
    ProtDef { name: String, witness: Box<Term>, body: Box<Term>, template: Box<Term> },
    ProjL(Box<Term>),
    ProjR(Box<Term>),
    Product(Vec<Term>),
    Sum(Box<Term>, Box<Term>),
    InjL(Box<Term>, Box<Term>),
    InjR(Box<Term>, Box<Term>),
    Case(Box<Term>, Box<Term>),
    Neg(Box<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DirectiveKind {
    Axiom { names: Vec<String>, ty: Term },
    Def { name: String, ty: Option<Term>, body: Term },
    Scheme { name: String, params: Vec<String>, ty: Term },
    Check { subject: Term, ty: Term },
    Normalize(Term),
    AssertConverts(Term, Term),
    AssertInvalid { subject: Term, ty: Option<Term> },
}

impl DirectiveKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            DirectiveKind::Axiom { .. } => "axiom",
            DirectiveKind::Def { .. } => "def",
            DirectiveKind::Scheme { .. } => "scheme",
            DirectiveKind::Check { .. } => "check",
            DirectiveKind::Normalize(_) => "normalize",
            DirectiveKind::AssertConverts(..) => "assert",
            DirectiveKind::AssertInvalid { .. } => "assert-invalid",
        }
    }

    /// Every surface term in the directive, in source order.
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            DirectiveKind::Axiom { ty, .. } | DirectiveKind::Scheme { ty, .. } => vec![ty],
            DirectiveKind::Def { ty, body, .. } => ty.iter().chain([body]).collect(),
            DirectiveKind::Check { subject, ty } => vec![subject, ty],
            DirectiveKind::Normalize(t) => vec![t],
            DirectiveKind::AssertConverts(a, b) => vec![a, b],
            DirectiveKind::AssertInvalid { subject, ty } => [subject].into_iter().chain(ty).collect(),
        }
    }

    /// Directives that state a judgment rather than extend the environment.
    pub fn is_judgment(&self) -> bool {
        !matches!(self, DirectiveKind::Axiom { .. } | DirectiveKind::Def { .. } | DirectiveKind::Scheme { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Directive {
    pub kind: DirectiveKind,
    pub span: Span,
}

/// A parsed theory file.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Theory {
    pub directives: Vec<Directive>,
}

/// Parse a standalone expression; unknown identifiers become free variables.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let t = parse_expr_term(src)?;
    elab::elaborate_free(&t).map_err(|e| ParseError::at(t.span, vec!["an expression without scheme instances".into()], e.to_string()))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}
