//! Derivation trees and their replay.
//!
//! A derivation records one rule application per node with the full
//! judgment `ctx |- subject : ty`. [`replay`] re-checks every node against
//! the shape of its rule without calling the inference engine; only
//! conversions are delegated to normalisation.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::reduction::converts;
use crate::syntax::{Context, Expr, Node};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rule {
    Ax,
    /// Start and weakening combined: lookup in a well-formed context.
    Var,
    AbsU,
    AbsE,
    Appl,
    Def,
    ChI,
    ChB,
    Prd,
    Sum,
    PrL,
    PrR,
    InjL,
    InjR,
    Case,
    Neg,
    Conv,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Ax => "ax",
            Rule::Var => "start/weak",
            Rule::AbsU => "abs_U",
            Rule::AbsE => "abs_E",
            Rule::Appl => "appl",
            Rule::Def => "def",
            Rule::ChI => "ch_I",
            Rule::ChB => "ch_B",
            Rule::Prd => "prd",
            Rule::Sum => "sum",
            Rule::PrL => "pr_L",
            Rule::PrR => "pr_R",
            Rule::InjL => "inj_L",
            Rule::InjR => "inj_R",
            Rule::Case => "case",
            Rule::Neg => "neg",
            Rule::Conv => "conv",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `ctx |- subject : ty` justified by `rule` from `premises`.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub rule: Rule,
    pub ctx: Context,
    pub subject: Expr,
    pub ty: Expr,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(|p| p.size()).sum::<usize>()
    }

    /// Indented rendering, one judgment per line.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.render_into(&mut s, 0, self.ctx.len());
        s
    }

    fn render_into(&self, s: &mut String, indent: usize, base: usize) {
        use std::fmt::Write;
        let ext: Vec<String> = self.ctx.entries()[base.min(self.ctx.len())..]
            .iter()
            .map(|(x, t)| format!("{x}:{t}"))
            .collect();
        let pre = if ext.is_empty() { String::new() } else { format!("{} ", ext.join(", ")) };
        let _ = writeln!(s, "{:indent$}{}: {pre}|- {} : {}", "", self.rule, self.subject, self.ty, indent = indent);
        for p in &self.premises {
            p.render_into(s, indent + 2, base);
        }
    }
}

/// A derivation together with derivations for every context declaration.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub context: Vec<Derivation>,
    pub root: Derivation,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{rule} node for {subject}: {reason}")]
pub struct ReplayError {
    pub rule: Rule,
    pub subject: String,
    pub reason: String,
}

struct Replayer {
    fuel: u64,
}

fn fail(d: &Derivation, reason: impl Into<String>) -> ReplayError {
    ReplayError { rule: d.rule, subject: d.subject.to_string(), reason: reason.into() }
}

impl Replayer {
    fn ensure(&self, d: &Derivation, ok: bool, reason: &str) -> Result<(), ReplayError> {
        if ok {
            Ok(())
        } else {
            Err(fail(d, reason))
        }
    }

    fn arity(&self, d: &Derivation, n: usize) -> Result<(), ReplayError> {
        self.ensure(d, d.premises.len() == n, "wrong number of premises")
    }

    fn same_ctx(&self, d: &Derivation, p: &Derivation) -> Result<(), ReplayError> {
        self.ensure(d, d.ctx == p.ctx, "premise context differs")
    }

    // Premise for a binder body: context extended by one fresh declaration.
    fn extended(&self, d: &Derivation, p: &Derivation, dom: &Expr) -> Result<crate::syntax::Name, ReplayError> {
        let n = d.ctx.len();
        self.ensure(d, p.ctx.len() == n + 1 && p.ctx.prefix(n) == d.ctx, "premise context is not an extension")?;
        let (x, t) = &p.ctx.entries()[n];
        self.ensure(d, t == dom, "extension declares the wrong type")?;
        self.ensure(d, !d.ctx.contains(x), "extension variable is not fresh")?;
        Ok(x.clone())
    }

    fn conv(&self, a: &Expr, b: &Expr) -> bool {
        converts(a, b, self.fuel).unwrap_or(false)
    }

    fn node(&self, d: &Derivation) -> Result<(), ReplayError> {
        for p in &d.premises {
            self.node(p)?;
        }
        let p = &d.premises;
        match d.rule {
            Rule::Ax => {
                self.arity(d, 0)?;
                self.ensure(d, d.subject.is_tau() && d.ty.is_tau(), "ax concludes tau : tau")
            }
            Rule::Var => {
                self.arity(d, 0)?;
                match d.subject.node() {
                    Node::Free(x) => self.ensure(d, d.ctx.lookup(x) == Some(&d.ty), "declared type differs"),
                    _ => Err(fail(d, "subject is not a variable")),
                }
            }
            Rule::AbsU | Rule::AbsE => {
                self.arity(d, 2)?;
                let (dom, body) = match (d.rule, d.subject.node()) {
                    (Rule::AbsU, Node::UnivAbs { dom, body, .. }) | (Rule::AbsE, Node::ExistAbs { dom, body, .. }) => {
                        (dom, body)
                    }
                    _ => return Err(fail(d, "subject has the wrong shape")),
                };
                self.same_ctx(d, &p[0])?;
                self.ensure(d, &p[0].subject == dom, "first premise must type the domain")?;
                let x = self.extended(d, &p[1], dom)?;
                self.ensure(d, p[1].subject == body.open(&x), "second premise must type the opened body")?;
                let expect = Expr::univ_named(&x, dom.clone(), &p[1].ty);
                self.ensure(d, d.ty == expect, "conclusion must be the universal abstraction of the body type")
            }
            Rule::Appl => {
                self.arity(d, 2)?;
                let (f, a) = match d.subject.node() {
                    Node::Apply(f, a) => (f, a),
                    _ => return Err(fail(d, "subject is not an application")),
                };
                self.same_ctx(d, &p[0])?;
                self.same_ctx(d, &p[1])?;
                self.ensure(d, &p[0].subject == f && &p[1].subject == a, "premises must type function and argument")?;
                match p[0].ty.node() {
                    Node::UnivAbs { dom, body, .. } => {
                        self.ensure(d, &p[1].ty == dom, "argument type must equal the domain")?;
                        self.ensure(d, d.ty == body.instantiate(a), "conclusion must instantiate the codomain")
                    }
                    _ => Err(fail(d, "function premise must have a universal type")),
                }
            }
            Rule::Def => {
                self.arity(d, 3)?;
                let (w, b, t) = match d.subject.node() {
                    Node::ProtDef { witness, body, template, .. } => (witness, body, template),
                    _ => return Err(fail(d, "subject is not a protected definition")),
                };
                self.same_ctx(d, &p[0])?;
                self.same_ctx(d, &p[1])?;
                self.ensure(d, &p[0].subject == w && &p[1].subject == b, "premises must type witness and body")?;
                let x = self.extended(d, &p[2], &p[0].ty)?;
                self.ensure(d, p[2].subject == t.open(&x), "third premise must type the opened template")?;
                self.ensure(d, p[1].ty == t.instantiate(w), "body type must be the template at the witness")?;
                let expect = Expr::exist(crate::syntax::Name::anonymous(), p[0].ty.clone(), t.clone());
                self.ensure(d, d.ty == expect, "conclusion must be the existential abstraction")
            }
            Rule::ChI | Rule::ChB | Rule::PrL | Rule::PrR => {
                self.arity(d, 1)?;
                let (inner, left) = match d.subject.node() {
                    Node::ProjL(a) => (a, true),
                    Node::ProjR(a) => (a, false),
                    _ => return Err(fail(d, "subject is not a projection")),
                };
                self.same_ctx(d, &p[0])?;
                self.ensure(d, &p[0].subject == inner, "premise must type the projected expression")?;
                let expect = match (d.rule, p[0].ty.node(), left) {
                    (Rule::ChI, Node::ExistAbs { dom, .. }, true) => dom.clone(),
                    (Rule::ChB, Node::ExistAbs { body, .. }, false) => body.instantiate(&Expr::proj_l(inner.clone())),
                    (Rule::PrL, Node::Product(a, _), true) => a.clone(),
                    (Rule::PrR, Node::Product(_, b), false) => b.clone(),
                    _ => return Err(fail(d, "premise type has the wrong shape")),
                };
                self.ensure(d, d.ty == expect, "conclusion type differs")
            }
            Rule::Prd | Rule::Sum => {
                self.arity(d, 2)?;
                let (a, b) = match (d.rule, d.subject.node()) {
                    (Rule::Prd, Node::Product(a, b)) | (Rule::Sum, Node::Sum(a, b)) => (a, b),
                    _ => return Err(fail(d, "subject has the wrong shape")),
                };
                self.same_ctx(d, &p[0])?;
                self.same_ctx(d, &p[1])?;
                self.ensure(d, &p[0].subject == a && &p[1].subject == b, "premises must type the components")?;
                self.ensure(d, d.ty == Expr::product(p[0].ty.clone(), p[1].ty.clone()), "conclusion must be a product")
            }
            Rule::InjL | Rule::InjR => {
                self.arity(d, 2)?;
                let (value, other, left) = match (d.rule, d.subject.node()) {
                    (Rule::InjL, Node::InjL { value, other }) => (value, other, true),
                    (Rule::InjR, Node::InjR { other, value }) => (value, other, false),
                    _ => return Err(fail(d, "subject has the wrong shape")),
                };
                self.same_ctx(d, &p[0])?;
                self.same_ctx(d, &p[1])?;
                self.ensure(d, &p[0].subject == value && &p[1].subject == other, "premises must type value and annotation")?;
                let expect = if left {
                    Expr::sum(p[0].ty.clone(), other.clone())
                } else {
                    Expr::sum(other.clone(), p[0].ty.clone())
                };
                self.ensure(d, d.ty == expect, "conclusion must be a sum")
            }
            Rule::Case => {
                self.arity(d, 3)?;
                let (l, r) = match d.subject.node() {
                    Node::Case(l, r) => (l, r),
                    _ => return Err(fail(d, "subject is not a case")),
                };
                for q in p {
                    self.same_ctx(d, q)?;
                }
                self.ensure(d, &p[0].subject == l && &p[1].subject == r, "premises must type the branches")?;
                let split = |t: &Expr| match t.node() {
                    Node::UnivAbs { dom, body, .. } if !body.has_loose(0) => Some((dom.clone(), body.lower())),
                    _ => None,
                };
                let (c1, d1) = split(&p[0].ty).ok_or_else(|| fail(d, "left branch type has the wrong shape"))?;
                let (c2, d2) = split(&p[1].ty).ok_or_else(|| fail(d, "right branch type has the wrong shape"))?;
                self.ensure(d, d1 == d2 && p[2].subject == d1, "branches must share a result type")?;
                let expect = Expr::univ(crate::syntax::Name::anonymous(), Expr::sum(c1, c2), d1.lift(1, 0));
                self.ensure(d, d.ty == expect, "conclusion must abstract over the sum")
            }
            Rule::Neg => {
                self.arity(d, 1)?;
                match d.subject.node() {
                    Node::Neg(a) => {
                        self.same_ctx(d, &p[0])?;
                        self.ensure(d, &p[0].subject == a && p[0].ty == d.ty, "negation keeps the type")
                    }
                    _ => Err(fail(d, "subject is not a negation")),
                }
            }
            Rule::Conv => {
                self.arity(d, 2)?;
                self.same_ctx(d, &p[0])?;
                self.same_ctx(d, &p[1])?;
                self.ensure(d, p[0].subject == d.subject, "premise must type the same subject")?;
                self.ensure(d, p[1].subject == d.ty, "second premise must show the new type is valid")?;
                self.ensure(d, self.conv(&p[0].ty, &d.ty), "types are not convertible")
            }
        }
    }
}

/// Re-validate every node of a derivation. The root context is taken on trust;
/// use [`replay_certificate`] to cover it as well.
pub fn replay(d: &Derivation, fuel: u64) -> Result<(), ReplayError> {
    Replayer { fuel }.node(d)
}

/// Re-validate a certificate, including one derivation per context declaration.
pub fn replay_certificate(c: &Certificate, fuel: u64) -> Result<(), ReplayError> {
    let r = Replayer { fuel };
    let ctx = &c.root.ctx;
    if c.context.len() != ctx.len() {
        return Err(fail(&c.root, "context certificate has the wrong length"));
    }
    for (i, d) in c.context.iter().enumerate() {
        r.node(d)?;
        if d.ctx != ctx.prefix(i) || d.subject != ctx.entries()[i].1 {
            return Err(fail(d, "context derivation does not match its declaration"));
        }
    }
    r.node(&c.root)
}
