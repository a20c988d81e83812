//! Syntax-directed type inference and checking.
//!
//! Types are computed by a single pass over the expression; conversion is
//! decided by comparing normal forms. The checker can also emit a
//! derivation tree (see [`crate::certificate`]) whose premises are
//! re-validated independently by the replayer.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::certificate::{Certificate, Derivation, Rule};
use crate::reduction::{Normalizer, Path, ReductionError, Strategy, DEFAULT_FUEL};
use crate::syntax::{Context, Expr, Name, Node, Step};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ErrorKind {
    UnboundVariable,
    NotAFunction,
    ArgumentMismatch,
    NotAPairLike,
    BodyMismatch,
    CaseBranchMismatch,
    CaseDependentResult,
    IllFormedContext,
    FuelExhausted,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 9] = [
        ErrorKind::UnboundVariable,
        ErrorKind::NotAFunction,
        ErrorKind::ArgumentMismatch,
        ErrorKind::NotAPairLike,
        ErrorKind::BodyMismatch,
        ErrorKind::CaseBranchMismatch,
        ErrorKind::CaseDependentResult,
        ErrorKind::IllFormedContext,
        ErrorKind::FuelExhausted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::UnboundVariable => "UnboundVariable",
            ErrorKind::NotAFunction => "NotAFunction",
            ErrorKind::ArgumentMismatch => "ArgumentMismatch",
            ErrorKind::NotAPairLike => "NotAPairLike",
            ErrorKind::BodyMismatch => "BodyMismatch",
            ErrorKind::CaseBranchMismatch => "CaseBranchMismatch",
            ErrorKind::CaseDependentResult => "CaseDependentResult",
            ErrorKind::IllFormedContext => "IllFormedContext",
            ErrorKind::FuelExhausted => "FuelExhausted",
        }
    }

    pub fn parse(s: &str) -> Option<ErrorKind> {
        ErrorKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A typing failure, located by a path into the subject.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} at {path}{}", detail_suffix(.expected, .actual, .note))]
pub struct TypeError {
    pub kind: ErrorKind,
    pub path: Path,
    /// The offending subterm.
    pub subject: Option<Expr>,
    pub expected: Option<Expr>,
    pub actual: Option<Expr>,
    pub note: Option<String>,
}

fn detail_suffix(expected: &Option<Expr>, actual: &Option<Expr>, note: &Option<String>) -> String {
    let mut s = String::new();
    if let Some(n) = note {
        s.push_str(": ");
        s.push_str(n);
    }
    if let Some(e) = expected {
        s.push_str(&format!("; expected {e}"));
    }
    if let Some(a) = actual {
        s.push_str(&format!("; found {a}"));
    }
    s
}

impl TypeError {
    fn new(kind: ErrorKind) -> TypeError {
        TypeError { kind, path: Path::root(), subject: None, expected: None, actual: None, note: None }
    }

    fn note(mut self, n: impl Into<String>) -> TypeError {
        self.note = Some(n.into());
        self
    }

    fn expected(mut self, e: &Expr) -> TypeError {
        self.expected = Some(e.clone());
        self
    }

    fn actual(mut self, e: &Expr) -> TypeError {
        self.actual = Some(e.clone());
        self
    }
}

/// Typing engine with a fuel budget per normalisation.
#[derive(Clone, Debug)]
pub struct Checker {
    pub fuel: u64,
    /// Record a derivation tree while inferring.
    pub certify: bool,
    /// Reduction steps spent on conversion checks so far.
    pub steps: u64,
    path: Vec<Step>,
}

impl Default for Checker {
    fn default() -> Self {
        Checker::new(DEFAULT_FUEL)
    }
}

type Judged = (Expr, Option<Derivation>);

impl Checker {
    pub fn new(fuel: u64) -> Checker {
        Checker { fuel, certify: false, steps: 0, path: Vec::new() }
    }

    pub fn certifying(fuel: u64) -> Checker {
        Checker { certify: true, ..Checker::new(fuel) }
    }

    pub fn normalize(&mut self, e: &Expr) -> Result<Expr, TypeError> {
        match Normalizer::new(Strategy::LeftmostOutermost, self.fuel).run(e) {
            Ok(n) => {
                self.steps += n.steps;
                Ok(n.expr)
            }
            Err(ReductionError::FuelExhausted { steps }) => {
                self.steps += steps;
                Err(self.err(ErrorKind::FuelExhausted).actual(e))
            }
            Err(other) => Err(self.err(ErrorKind::FuelExhausted).note(other.to_string())),
        }
    }

    pub fn converts(&mut self, a: &Expr, b: &Expr) -> Result<bool, TypeError> {
        if a == b {
            return Ok(true);
        }
        Ok(self.normalize(a)? == self.normalize(b)?)
    }

    fn err(&self, kind: ErrorKind) -> TypeError {
        TypeError { path: Path(self.path.clone()), ..TypeError::new(kind) }
    }

    /// Infer the type of `e` in a context assumed to be well formed.
    pub fn infer(&mut self, ctx: &Context, e: &Expr) -> Result<Expr, TypeError> {
        let mut c = ctx.clone();
        self.path.clear();
        self.infer_in(&mut c, e).map(|(t, _)| t)
    }

    /// Infer and return a derivation. Forces certificate recording.
    pub fn derive(&mut self, ctx: &Context, e: &Expr) -> Result<Derivation, TypeError> {
        let saved = self.certify;
        self.certify = true;
        let mut c = ctx.clone();
        self.path.clear();
        let r = self.infer_in(&mut c, e);
        self.certify = saved;
        r.map(|(_, d)| d.expect("certificate requested"))
    }

    /// `ctx |- e : ty` where `ty` must itself be valid.
    pub fn check(&mut self, ctx: &Context, e: &Expr, ty: &Expr) -> Result<(), TypeError> {
        let actual = self.infer(ctx, e)?;
        self.infer(ctx, ty).map_err(|mut err| {
            err.note = Some(format!("in the target type: {}", err.note.take().unwrap_or_default()));
            err
        })?;
        self.path.clear();
        if self.converts(&actual, ty)? {
            Ok(())
        } else {
            Err(self.err(ErrorKind::BodyMismatch).expected(ty).actual(&actual).note("type does not match"))
        }
    }

    /// A derivation for `ctx |- e : ty`, ending in a conversion when needed.
    pub fn derive_check(&mut self, ctx: &Context, e: &Expr, ty: &Expr) -> Result<Derivation, TypeError> {
        self.check(ctx, e, ty)?;
        let d = self.derive(ctx, e)?;
        let mut c = ctx.clone();
        self.conv_to(&mut c, d, ty)
    }

    /// Derivations for every declaration of `ctx` plus one for `e`,
    /// ending in `ty` when given.
    pub fn certificate(&mut self, ctx: &Context, e: &Expr, ty: Option<&Expr>) -> Result<Certificate, TypeError> {
        let context = (0..ctx.len())
            .map(|i| self.derive(&ctx.prefix(i), &ctx.entries()[i].1))
            .collect::<Result<Vec<_>, _>>()?;
        let root = match ty {
            Some(t) => self.derive_check(ctx, e, t)?,
            None => self.derive(ctx, e)?,
        };
        Ok(Certificate { context, root })
    }

    /// Every declaration must be a valid expression in the preceding prefix.
    pub fn check_context(&mut self, ctx: &Context) -> Result<(), TypeError> {
        let mut prefix = Context::new();
        for (x, t) in ctx.iter() {
            self.infer(&prefix, t).map_err(|e| {
                TypeError { kind: ErrorKind::IllFormedContext, ..e }.note(format!("declaration of `{x}` is not valid"))
            })?;
            prefix.push(x.clone(), t.clone()).map_err(|_| {
                self.err(ErrorKind::IllFormedContext).note(format!("`{x}` is declared twice"))
            })?;
        }
        Ok(())
    }

    fn child<T>(&mut self, i: Step, f: impl FnOnce(&mut Self) -> T) -> T {
        self.path.push(i);
        let r = f(self);
        self.path.pop();
        r
    }

    fn node(&self, rule: Rule, ctx: &Context, e: &Expr, ty: &Expr, premises: Vec<Option<Derivation>>) -> Option<Derivation> {
        if !self.certify {
            return None;
        }
        Some(Derivation {
            rule,
            ctx: ctx.clone(),
            subject: e.clone(),
            ty: ty.clone(),
            premises: premises.into_iter().map(|p| p.expect("premise recorded")).collect(),
        })
    }

    /// Wrap a derivation in a conversion to `target` when the types differ syntactically.
    fn conv_to(&mut self, ctx: &mut Context, d: Derivation, target: &Expr) -> Result<Derivation, TypeError> {
        if &d.ty == target {
            return Ok(d);
        }
        let (_, valid) = self.infer_in(ctx, target)?;
        Ok(Derivation {
            rule: Rule::Conv,
            ctx: ctx.clone(),
            subject: d.subject.clone(),
            ty: target.clone(),
            premises: vec![d, valid.expect("certificate requested")],
        })
    }

    fn conv_opt(&mut self, ctx: &mut Context, d: Option<Derivation>, target: &Expr) -> Result<Option<Derivation>, TypeError> {
        match d {
            Some(d) => self.conv_to(ctx, d, target).map(Some),
            None => Ok(None),
        }
    }

    // Open a binder body: extend the context with a fresh name.
    fn enter(&self, ctx: &mut Context, hint: &Name, ty: &Expr, avoid: &[&Expr]) -> Name {
        let x = ctx.fresh(hint, avoid);
        ctx.push(x.clone(), ty.clone()).expect("fresh name");
        x
    }

    fn infer_in(&mut self, ctx: &mut Context, e: &Expr) -> Result<Judged, TypeError> {
        match e.node() {
            Node::Tau => {
                let d = self.node(Rule::Ax, ctx, e, e, vec![]);
                Ok((Expr::tau(), d))
            }
            Node::Free(x) => match ctx.lookup(x) {
                Some(t) => {
                    let t = t.clone();
                    let d = self.node(Rule::Var, ctx, e, &t, vec![]);
                    Ok((t, d))
                }
                None => Err(self.err(ErrorKind::UnboundVariable).note(format!("`{x}` is not declared"))),
            },
            Node::Bound(i) => Err(self.err(ErrorKind::UnboundVariable).note(format!("dangling index {i}"))),
            Node::UnivAbs { hint, dom, body } | Node::ExistAbs { hint, dom, body } => {
                let (_, dd) = self.child(0, |s| s.infer_in(ctx, dom))?;
                let x = self.enter(ctx, hint, dom, &[body]);
                let r = self.child(1, |s| s.infer_in(ctx, &body.open(&x)));
                ctx.pop();
                let (bt, bd) = r?;
                let ty = Expr::univ(hint.clone(), dom.clone(), bt.abstract_free(&x));
                let rule = if matches!(e.node(), Node::UnivAbs { .. }) { Rule::AbsU } else { Rule::AbsE };
                let d = self.node(rule, ctx, e, &ty, vec![dd, bd]);
                Ok((ty, d))
            }
            Node::Apply(f, a) => {
                let (ft, fd) = self.child(0, |s| s.infer_in(ctx, f))?;
                let fun = self.as_univ(&ft)?.ok_or_else(|| {
                    let mut err = self.err(ErrorKind::NotAFunction).actual(&ft);
                    err.path.0.push(0);
                    err.note("the applied expression does not have a universal type")
                })?;
                let (c, dbody, fun_ty) = fun;
                let (at, ad) = self.child(1, |s| s.infer_in(ctx, a))?;
                if !self.converts(&at, &c)? {
                    let mut err = self.err(ErrorKind::ArgumentMismatch).expected(&c).actual(&at);
                    err.path.0.push(1);
                    err.subject = Some(a.clone());
                    return Err(err.note("argument type does not match the domain"));
                }
                let ty = dbody.instantiate(a);
                let fd = self.conv_opt(ctx, fd, &fun_ty)?;
                let ad = self.conv_opt(ctx, ad, &c)?;
                let d = self.node(Rule::Appl, ctx, e, &ty, vec![fd, ad]);
                Ok((ty, d))
            }
            Node::ProtDef { hint, witness, body, template } => {
                let (wt, wd) = self.child(0, |s| s.infer_in(ctx, witness))?;
                let x = self.enter(ctx, hint, &wt, &[template]);
                let r = self.child(2, |s| s.infer_in(ctx, &template.open(&x)));
                ctx.pop();
                let (_, td) = r?;
                let (bt, bd) = self.child(1, |s| s.infer_in(ctx, body))?;
                let expected = template.instantiate(witness);
                if !self.converts(&bt, &expected)? {
                    let mut err = self.err(ErrorKind::BodyMismatch).expected(&expected).actual(&bt);
                    err.path.0.push(1);
                    return Err(err.note("body does not match the template at the witness"));
                }
                let ty = Expr::exist(hint.clone(), wt, template.clone());
                let bd = self.conv_opt(ctx, bd, &expected)?;
                let d = self.node(Rule::Def, ctx, e, &ty, vec![wd, bd, td]);
                Ok((ty, d))
            }
            Node::ProjL(p) | Node::ProjR(p) => {
                let left = matches!(e.node(), Node::ProjL(_));
                let (pt, pd) = self.child(0, |s| s.infer_in(ctx, p))?;
                let shape = if matches!(pt.node(), Node::ExistAbs { .. } | Node::Product(..)) {
                    pt.clone()
                } else {
                    self.normalize(&pt)?
                };
                let (ty, rule) = match (shape.node(), left) {
                    (Node::ExistAbs { dom, .. }, true) => (dom.clone(), Rule::ChI),
                    (Node::ExistAbs { body, .. }, false) => (body.instantiate(&Expr::proj_l(p.clone())), Rule::ChB),
                    (Node::Product(a, _), true) => (a.clone(), Rule::PrL),
                    (Node::Product(_, b), false) => (b.clone(), Rule::PrR),
                    _ => {
                        let mut err = self.err(ErrorKind::NotAPairLike).actual(&pt);
                        err.path.0.push(0);
                        return Err(err.note("projection needs an existential or a product type"));
                    }
                };
                let pd = self.conv_opt(ctx, pd, &shape)?;
                let d = self.node(rule, ctx, e, &ty, vec![pd]);
                Ok((ty, d))
            }
            Node::Product(a, b) | Node::Sum(a, b) => {
                let (at, ad) = self.child(0, |s| s.infer_in(ctx, a))?;
                let (bt, bd) = self.child(1, |s| s.infer_in(ctx, b))?;
                let ty = Expr::product(at, bt);
                let rule = if matches!(e.node(), Node::Product(..)) { Rule::Prd } else { Rule::Sum };
                let d = self.node(rule, ctx, e, &ty, vec![ad, bd]);
                Ok((ty, d))
            }
            Node::InjL { value, other } => {
                let (vt, vd) = self.child(0, |s| s.infer_in(ctx, value))?;
                let (_, od) = self.child(1, |s| s.infer_in(ctx, other))?;
                let ty = Expr::sum(vt, other.clone());
                let d = self.node(Rule::InjL, ctx, e, &ty, vec![vd, od]);
                Ok((ty, d))
            }
            Node::InjR { other, value } => {
                let (_, od) = self.child(0, |s| s.infer_in(ctx, other))?;
                let (vt, vd) = self.child(1, |s| s.infer_in(ctx, value))?;
                let ty = Expr::sum(other.clone(), vt);
                let d = self.node(Rule::InjR, ctx, e, &ty, vec![vd, od]);
                Ok((ty, d))
            }
            Node::Case(l, r) => {
                let (lt, ld) = self.child(0, |s| s.infer_in(ctx, l))?;
                let (rt, rd) = self.child(1, |s| s.infer_in(ctx, r))?;
                let ln = self.normalize(&lt)?;
                let rn = self.normalize(&rt)?;
                let (c1, d1) = self.branch(&ln, 0)?;
                let (c2, d2) = self.branch(&rn, 1)?;
                if d1 != d2 {
                    return Err(self
                        .err(ErrorKind::CaseBranchMismatch)
                        .expected(&d1)
                        .actual(&d2)
                        .note("the branches have different result types"));
                }
                let (_, dd) = self.infer_in(ctx, &d1)?;
                let ty = Expr::univ(Name::anonymous(), Expr::sum(c1, c2), d1.lift(1, 0));
                let ld = self.conv_opt(ctx, ld, &ln)?;
                let rd = self.conv_opt(ctx, rd, &rn)?;
                let d = self.node(Rule::Case, ctx, e, &ty, vec![ld, rd, dd]);
                Ok((ty, d))
            }
            Node::Neg(a) => {
                let (at, ad) = self.child(0, |s| s.infer_in(ctx, a))?;
                let d = self.node(Rule::Neg, ctx, e, &at, vec![ad]);
                Ok((at, d))
            }
        }
    }

    // A type viewed as `[x:c]d`: returns domain, body and the universal form used.
    fn as_univ(&mut self, t: &Expr) -> Result<Option<(Expr, Expr, Expr)>, TypeError> {
        let shape = if matches!(t.node(), Node::UnivAbs { .. }) { t.clone() } else { self.normalize(t)? };
        Ok(match shape.node() {
            Node::UnivAbs { dom, body, .. } => Some((dom.clone(), body.clone(), shape.clone())),
            _ => None,
        })
    }

    // A case branch type in normal form must be `[x:c]d` with `d` independent of `x`.
    fn branch(&self, t: &Expr, side: Step) -> Result<(Expr, Expr), TypeError> {
        match t.node() {
            Node::UnivAbs { dom, body, .. } => {
                if body.has_loose(0) {
                    let mut err = self.err(ErrorKind::CaseDependentResult).actual(t);
                    err.path.0.push(side);
                    Err(err.note("the result type of a case branch depends on its argument"))
                } else {
                    Ok((dom.clone(), body.lower()))
                }
            }
            _ => {
                let mut err = self.err(ErrorKind::NotAFunction).actual(t);
                err.path.0.push(side);
                Err(err.note("a case branch must have a universal type"))
            }
        }
    }
}

/// Infer with default fuel.
pub fn infer(ctx: &Context, e: &Expr) -> Result<Expr, TypeError> {
    Checker::default().infer(ctx, e)
}

/// Check with default fuel.
pub fn check(ctx: &Context, e: &Expr, ty: &Expr) -> Result<(), TypeError> {
    Checker::default().check(ctx, e, ty)
}

/// Does `e` have a type in `ctx`?
pub fn valid(ctx: &Context, e: &Expr) -> bool {
    infer(ctx, e).is_ok()
}

pub fn check_context(ctx: &Context) -> Result<(), TypeError> {
    Checker::default().check_context(ctx)
}
