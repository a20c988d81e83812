//! Elaboration of theory files into kernel jobs.
//!
//! Definitions are expanded at their use sites and never enter the kernel
//! context. Scheme instances become context axioms named after the scheme
//! and a hash of their normalised arguments, added on first use.

use std::collections::HashMap;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{BindKind, BracketEnd, Directive, DirectiveKind, Segment, Span, Term, TermKind, Theory};
use crate::certificate::replay_certificate;
use crate::explicit::es_normalize;
use crate::reduction::{Normalizer, Strategy, DEFAULT_FUEL};
use crate::syntax::{Context, Expr, Name, Step};
use crate::typing::{Checker, ErrorKind, TypeError};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ElabError {
    #[error("{span}: unknown name `{name}`")]
    UnknownName { name: String, span: Span },
    #[error("{span}: `{name}` is already declared")]
    Duplicate { name: String, span: Span },
    #[error("{span}: definition `{name}` refers to itself")]
    RecursiveDef { name: String, span: Span },
    #[error("{span}: scheme `{name}` takes {expected} arguments, got {found}")]
    Arity { name: String, expected: usize, found: usize, span: Span },
    #[error("{span}: `{name}` is not a scheme")]
    NotAScheme { name: String, span: Span },
    #[error("{span}: scheme `{name}` must be instantiated")]
    BareScheme { name: String, span: Span },
    #[error("{span}: scheme arguments may not mention bound variables")]
    BoundSchemeArgument { span: Span },
    #[error("{span}: {error}")]
    Type { error: TypeError, span: Span },
}

impl ElabError {
    pub fn span(&self) -> Span {
        match self {
            ElabError::UnknownName { span, .. }
            | ElabError::Duplicate { span, .. }
            | ElabError::RecursiveDef { span, .. }
            | ElabError::Arity { span, .. }
            | ElabError::NotAScheme { span, .. }
            | ElabError::BareScheme { span, .. }
            | ElabError::BoundSchemeArgument { span }
            | ElabError::Type { span, .. } => *span,
        }
    }
}

/// Source spans of kernel subterms, keyed by path.
#[derive(Clone, Debug, Default)]
pub struct SpanMap(Vec<(Vec<Step>, Span)>);

impl SpanMap {
    /// Span of the deepest recorded prefix of `path`.
    pub fn lookup(&self, path: &[Step]) -> Option<Span> {
        self.0
            .iter()
            .filter(|(p, _)| path.starts_with(p))
            .max_by_key(|(p, _)| p.len())
            .map(|(_, s)| *s)
    }
}

#[derive(Clone, Debug)]
pub enum JobKind {
    Check { subject: Expr, ty: Expr },
    Normalize(Expr),
    AssertConverts(Expr, Expr),
    AssertInvalid { subject: Expr, ty: Option<Expr> },
}

/// One kernel task with the context it runs in.
#[derive(Clone, Debug)]
pub struct Job {
    pub index: usize,
    pub span: Span,
    pub kind: JobKind,
    pub ctx: Context,
    /// Spans for the subject and for the type (or second operand).
    pub spans: (SpanMap, SpanMap),
}

impl JobKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            JobKind::Check { .. } => "check",
            JobKind::Normalize(_) => "normalize",
            JobKind::AssertConverts(..) => "assert",
            JobKind::AssertInvalid { .. } => "assert-invalid",
        }
    }
}

/// Outcome of one directive.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub file: String,
    pub index: usize,
    pub kind: String,
    pub ok: bool,
    pub detail: String,
    pub span: Span,
    /// The error kind behind a failure, or behind an expected rejection.
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
struct Scheme {
    params: Vec<String>,
    template: Term,
}

/// How identifiers that are not declared are treated.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Strict,
    Lenient,
}

/// Elaboration state shared across the files of one run.
#[derive(Clone, Debug)]
pub struct Session {
    pub ctx: Context,
    defs: HashMap<String, Expr>,
    schemes: HashMap<String, Scheme>,
    pub fuel: u64,
    /// Cross-check normal forms with the explicit-substitution engine.
    pub oracle: bool,
    /// Attach replayed derivations to check verdicts.
    pub explain: bool,
    pub steps: u64,
    pub max_depth: usize,
}

impl Default for Session {
    fn default() -> Self {
        Session::new(DEFAULT_FUEL)
    }
}

const HIDDEN: &str = "";

struct Elab<'a> {
    bound: Vec<String>,
    params: &'a HashMap<String, Expr>,
    path: Vec<Step>,
    spans: SpanMap,
    mode: Mode,
}

impl Session {
    pub fn new(fuel: u64) -> Session {
        Session {
            ctx: Context::new(),
            defs: HashMap::new(),
            schemes: HashMap::new(),
            fuel,
            oracle: false,
            explain: false,
            steps: 0,
            max_depth: 0,
        }
    }

    fn checker(&self) -> Checker {
        Checker::new(self.fuel)
    }

    fn declared(&self, name: &str) -> bool {
        self.defs.contains_key(name) || self.schemes.contains_key(name) || self.ctx.contains(&Name::new(name))
    }

    /// Elaborate an expression in the current environment. Undeclared names
    /// become free variables, which typing then reports.
    pub fn elaborate_expr(&mut self, t: &Term) -> Result<Expr, ElabError> {
        let params = HashMap::new();
        let mut el = Elab { bound: Vec::new(), params: &params, path: Vec::new(), spans: SpanMap::default(), mode: Mode::Lenient };
        self.term(&mut el, t)
    }

    fn strict(&mut self, t: &Term) -> Result<(Expr, SpanMap), ElabError> {
        let params = HashMap::new();
        let mut el = Elab { bound: Vec::new(), params: &params, path: Vec::new(), spans: SpanMap::default(), mode: Mode::Strict };
        let e = self.term(&mut el, t)?;
        self.max_depth = self.max_depth.max(e.depth());
        Ok((e, el.spans))
    }

    fn term(&mut self, el: &mut Elab, t: &Term) -> Result<Expr, ElabError> {
        el.spans.0.push((el.path.clone(), t.span));
        let e = match &t.kind {
            TermKind::Tau => Expr::tau(),
            TermKind::Ident(s) => self.ident(el, s, t.span)?,
            TermKind::SchemeInst(name, args) => self.instance(el, name, args, t.span)?,
            TermKind::Binder { segments, end } => self.segments(el, segments, end)?,
            TermKind::App(items) => {
                let n = items.len();
                let mut acc = None;
                for (j, it) in items.iter().enumerate() {
                    let depth = if j == 0 { n - 1 } else { n - j };
                    let base = el.path.len();
                    el.path.extend(std::iter::repeat_n(0, depth));
                    if j > 0 {
                        el.path.pop();
                        el.path.push(1);
                    }
                    let x = self.term(el, it);
                    el.path.truncate(base);
                    let x = x?;
                    acc = Some(match acc {
                        None => x,
                        Some(f) => Expr::apply(f, x),
                    });
                }
                acc.expect("nonempty application")
            }
            TermKind::ProtDef { name, witness, body, template } => {
                let w = self.child(el, 0, witness)?;
                let b = self.child(el, 1, body)?;
                el.bound.push(name.clone());
                let tpl = self.child(el, 2, template);
                el.bound.pop();
                Expr::protdef(Name::new(name), w, b, tpl?)
            }
            TermKind::ProjL(a) => Expr::proj_l(self.child(el, 0, a)?),
            TermKind::ProjR(a) => Expr::proj_r(self.child(el, 0, a)?),
            TermKind::Product(items) => {
                let n = items.len();
                let base = el.path.len();
                let mut parts = Vec::with_capacity(n);
                for (j, it) in items.iter().enumerate() {
                    el.path.extend(std::iter::repeat_n(1, j));
                    if j + 1 < n {
                        el.path.push(0);
                    }
                    let x = self.term(el, it);
                    el.path.truncate(base);
                    parts.push(x?);
                }
                let mut acc = parts.pop().expect("nonempty product");
                while let Some(p) = parts.pop() {
                    acc = Expr::product(p, acc);
                }
                acc
            }
            TermKind::Sum(a, b) => Expr::sum(self.child(el, 0, a)?, self.child(el, 1, b)?),
            TermKind::InjL(a, b) => Expr::inj_l(self.child(el, 0, a)?, self.child(el, 1, b)?),
            TermKind::InjR(a, b) => Expr::inj_r(self.child(el, 0, a)?, self.child(el, 1, b)?),
            TermKind::Case(a, b) => Expr::case(self.child(el, 0, a)?, self.child(el, 1, b)?),
            TermKind::Neg(a) => Expr::neg(self.child(el, 0, a)?),
        };
        Ok(e)
    }

    fn child(&mut self, el: &mut Elab, i: Step, t: &Term) -> Result<Expr, ElabError> {
        el.path.push(i);
        let r = self.term(el, t);
        el.path.pop();
        r
    }

    fn ident(&mut self, el: &mut Elab, s: &str, span: Span) -> Result<Expr, ElabError> {
        if let Some(k) = el.bound.iter().rev().position(|b| b == s) {
            return Ok(Expr::bound(k as u32));
        }
        if let Some(e) = el.params.get(s) {
            return Ok(e.clone());
        }
        if let Some(e) = self.defs.get(s) {
            return Ok(e.clone());
        }
        if self.schemes.contains_key(s) {
            return Err(ElabError::BareScheme { name: s.to_string(), span });
        }
        let n = Name::new(s);
        if self.ctx.contains(&n) || el.mode == Mode::Lenient {
            return Ok(Expr::free(n));
        }
        Err(ElabError::UnknownName { name: s.to_string(), span })
    }

    fn segments(&mut self, el: &mut Elab, segments: &[Segment], end: &BracketEnd) -> Result<Expr, ElabError> {
        // Flatten into single binders; a group's type is elaborated once and
        // lifted past the names of its own group.
        let base_path = el.path.len();
        let base_bound = el.bound.len();
        let mut binders: Vec<(BindKind, Name, Expr)> = Vec::new();
        for seg in segments {
            let (kind, names, ty) = match seg {
                Segment::Bind { kind, names, ty } => (*kind, names.clone(), ty),
                Segment::Premise(ty) => (BindKind::Univ, vec![HIDDEN.to_string()], ty),
            };
            el.path.push(0);
            let dom = self.term(el, ty);
            el.path.pop();
            let dom = match dom {
                Ok(d) => d,
                Err(e) => {
                    el.path.truncate(base_path);
                    el.bound.truncate(base_bound);
                    return Err(e);
                }
            };
            for (k, n) in names.iter().enumerate() {
                let hint = if n == HIDDEN { Name::anonymous() } else { Name::new(n) };
                binders.push((kind, hint, dom.lift(k as u32, 0)));
                el.bound.push(n.clone());
                el.path.push(1);
            }
        }
        let body = match end {
            BracketEnd::Body(b) | BracketEnd::Arrow(b) => self.term(el, b),
        };
        el.path.truncate(base_path);
        el.bound.truncate(base_bound);
        let mut acc = body?;
        for (kind, hint, dom) in binders.into_iter().rev() {
            acc = match kind {
                BindKind::Univ => Expr::univ(hint, dom, acc),
                BindKind::Exist => Expr::exist(hint, dom, acc),
            };
        }
        Ok(acc)
    }

    fn instance(&mut self, el: &mut Elab, name: &str, args: &[Term], span: Span) -> Result<Expr, ElabError> {
        let scheme = match self.schemes.get(name) {
            Some(s) => s.clone(),
            None if el.mode == Mode::Lenient && !self.declared(name) => {
                return Err(ElabError::UnknownName { name: name.to_string(), span })
            }
            None => return Err(ElabError::NotAScheme { name: name.to_string(), span }),
        };
        if scheme.params.len() != args.len() {
            return Err(ElabError::Arity { name: name.to_string(), expected: scheme.params.len(), found: args.len(), span });
        }
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            // Argument spans are not tracked: the instance is a single variable.
            let mut sub = Elab { bound: el.bound.clone(), params: el.params, path: Vec::new(), spans: SpanMap::default(), mode: el.mode };
            let v = self.term(&mut sub, a)?;
            if !v.is_locally_closed() {
                return Err(ElabError::BoundSchemeArgument { span: a.span });
            }
            let nf = Normalizer::new(Strategy::LeftmostOutermost, self.fuel)
                .run(&v)
                .map_err(|_| ElabError::Type {
                    error: TypeError {
                        kind: ErrorKind::FuelExhausted,
                        path: Default::default(),
                        subject: Some(v.clone()),
                        expected: None,
                        actual: None,
                        note: Some("normalising a scheme argument".into()),
                    },
                    span: a.span,
                })?;
            self.steps += nf.steps;
            vals.push(nf.expr);
        }
        let inst = instance_name(name, &vals);
        if !self.ctx.contains(&inst) {
            let params: HashMap<String, Expr> = scheme.params.iter().cloned().zip(vals.iter().cloned()).collect();
            let mut sub = Elab { bound: Vec::new(), params: &params, path: Vec::new(), spans: SpanMap::default(), mode: Mode::Strict };
            let ty = self.term(&mut sub, &scheme.template)?;
            let mut ck = self.checker();
            ck.infer(&self.ctx, &ty).map_err(|error| ElabError::Type { error, span })?;
            self.steps += ck.steps;
            self.ctx.push(inst.clone(), ty).expect("instance names are unique");
        }
        Ok(Expr::free(inst))
    }

    /// Validate environment directives and turn judgments into jobs.
    pub fn elaborate_directive(&mut self, index: usize, d: &Directive) -> Result<Option<Job>, ElabError> {
        let job = |kind, ctx: &Context, spans| Some(Job { index, span: d.span, kind, ctx: ctx.clone(), spans });
        match &d.kind {
            DirectiveKind::Axiom { names, ty } => {
                for n in names {
                    if self.declared(n) {
                        return Err(ElabError::Duplicate { name: n.clone(), span: d.span });
                    }
                }
                let (t, spans) = self.strict(ty)?;
                let mut ck = self.checker();
                ck.infer(&self.ctx, &t).map_err(|error| ElabError::Type { span: spans.lookup(&error.path.0).unwrap_or(d.span), error })?;
                self.steps += ck.steps;
                for n in names {
                    self.ctx.push(Name::new(n), t.clone()).map_err(|_| ElabError::Duplicate { name: n.clone(), span: d.span })?;
                }
                Ok(None)
            }
            DirectiveKind::Def { name, ty, body } => {
                if self.declared(name) {
                    return Err(ElabError::Duplicate { name: name.clone(), span: d.span });
                }
                if mentions_free(body, name, &mut Vec::new()) {
                    return Err(ElabError::RecursiveDef { name: name.clone(), span: d.span });
                }
                let (b, spans) = self.strict(body)?;
                let mut ck = self.checker();
                let locate = |error: TypeError, spans: &SpanMap| ElabError::Type { span: spans.lookup(&error.path.0).unwrap_or(d.span), error };
                match ty {
                    Some(t) => {
                        let (t, tspans) = self.strict(t)?;
                        ck.infer(&self.ctx, &t).map_err(|e| locate(e, &tspans))?;
                        ck.check(&self.ctx, &b, &t).map_err(|e| locate(e, &spans))?;
                    }
                    None => {
                        ck.infer(&self.ctx, &b).map_err(|e| locate(e, &spans))?;
                    }
                }
                self.steps += ck.steps;
                self.defs.insert(name.clone(), b);
                Ok(None)
            }
            DirectiveKind::Scheme { name, params, ty } => {
                if self.declared(name) {
                    return Err(ElabError::Duplicate { name: name.clone(), span: d.span });
                }
                self.schemes.insert(name.clone(), Scheme { params: params.clone(), template: ty.clone() });
                Ok(None)
            }
            DirectiveKind::Check { subject, ty } => {
                let (s, ss) = self.strict(subject)?;
                let (t, ts) = self.strict(ty)?;
                Ok(job(JobKind::Check { subject: s, ty: t }, &self.ctx, (ss, ts)))
            }
            DirectiveKind::Normalize(t) => {
                let (e, sp) = self.strict(t)?;
                Ok(job(JobKind::Normalize(e), &self.ctx, (sp, SpanMap::default())))
            }
            DirectiveKind::AssertConverts(a, b) => {
                let (x, xs) = self.strict(a)?;
                let (y, ys) = self.strict(b)?;
                Ok(job(JobKind::AssertConverts(x, y), &self.ctx, (xs, ys)))
            }
            DirectiveKind::AssertInvalid { subject, ty } => {
                let (s, ss) = self.strict(subject)?;
                let (t, ts) = match ty {
                    Some(t) => {
                        let (t, ts) = self.strict(t)?;
                        (Some(t), ts)
                    }
                    None => (None, SpanMap::default()),
                };
                Ok(job(JobKind::AssertInvalid { subject: s, ty: t }, &self.ctx, (ss, ts)))
            }
        }
    }

    /// Run a job and report its verdict (file name left empty).
    pub fn run_job(&mut self, job: &Job) -> Verdict {
        let mut ck = self.checker();
        let ctx = &job.ctx;
        let mut v = Verdict {
            file: String::new(),
            index: job.index,
            kind: job.kind.keyword().to_string(),
            ok: true,
            detail: String::new(),
            span: job.span,
            error: None,
        };
        let locate = |e: &TypeError, spans: &SpanMap| spans.lookup(&e.path.0).unwrap_or(job.span);
        match &job.kind {
            JobKind::Check { subject, ty } => {
                match ck.check(ctx, subject, ty) {
                    Ok(()) => {
                        v.detail = format!("{subject} : {ty}");
                        if self.explain {
                            match ck.certificate(ctx, subject, Some(ty)) {
                                Ok(cert) => match replay_certificate(&cert, self.fuel) {
                                    Ok(()) => v.detail = format!("{}\n{}", v.detail, cert.root.render()),
                                    Err(e) => fail(&mut v, format!("certificate replay failed: {e}"), None),
                                },
                                Err(e) => fail(&mut v, format!("certificate construction failed: {e}"), Some(e.kind)),
                            }
                        }
                        if self.oracle {
                            if let Ok(t) = ck.infer(ctx, subject) {
                                self.cross_check(&mut v, &[t, ty.clone()]);
                            }
                        }
                    }
                    Err(e) => {
                        // A failure inside the target type is located in the type.
                        let in_type = e.note.as_deref().is_some_and(|n| n.starts_with("in the target type"));
                        v.span = locate(&e, if in_type { &job.spans.1 } else { &job.spans.0 });
                        fail(&mut v, e.to_string(), Some(e.kind));
                    }
                }
            }
            JobKind::Normalize(e) => match Normalizer::new(Strategy::LeftmostOutermost, self.fuel).run(e) {
                Ok(n) => {
                    ck.steps += n.steps;
                    v.detail = n.expr.to_string();
                    if self.oracle {
                        self.cross_check(&mut v, std::slice::from_ref(e));
                    }
                }
                Err(err) => fail(&mut v, err.to_string(), Some(ErrorKind::FuelExhausted)),
            },
            JobKind::AssertConverts(a, b) => match ck.converts(a, b) {
                Ok(true) => {
                    v.detail = format!("{a} == {b}");
                    if self.oracle {
                        self.cross_check(&mut v, &[a.clone(), b.clone()]);
                    }
                }
                Ok(false) => fail(&mut v, format!("{a} and {b} are not convertible"), None),
                Err(e) => fail(&mut v, e.to_string(), Some(e.kind)),
            },
            JobKind::AssertInvalid { subject, ty } => {
                let r = match ty {
                    Some(t) => ck.check(ctx, subject, t),
                    None => ck.infer(ctx, subject).map(|_| ()),
                };
                match r {
                    Ok(()) => fail(&mut v, format!("{subject} was accepted"), None),
                    Err(e) => {
                        v.detail = format!("rejected: {e}");
                        v.error = Some(e.kind.to_string());
                    }
                }
            }
        }
        self.steps += ck.steps;
        v
    }

    fn cross_check(&mut self, v: &mut Verdict, exprs: &[Expr]) {
        for e in exprs {
            let kernel = Normalizer::new(Strategy::LeftmostOutermost, self.fuel).run(e);
            let es = es_normalize(e, self.fuel);
            match (kernel, es) {
                (Ok(k), Ok(s)) if k.expr == s.expr => {}
                (Ok(k), Ok(s)) => {
                    fail(v, format!("internal error: oracle disagrees on {e}: {} vs {}", k.expr, s.expr), None);
                    v.kind = "internal-error".into();
                    return;
                }
                (Err(_), _) | (_, Err(_)) => {
                    fail(v, format!("internal error: oracle ran out of fuel on {e}"), None);
                    v.kind = "internal-error".into();
                    return;
                }
            }
        }
    }

    /// Elaborate and run every directive of a file.
    pub fn process(&mut self, file: &str, theory: &Theory) -> Vec<Verdict> {
        let mut out = Vec::with_capacity(theory.directives.len());
        for (i, d) in theory.directives.iter().enumerate() {
            let mut v = match self.elaborate_directive(i, d) {
                Ok(Some(job)) => self.run_job(&job),
                Ok(None) => Verdict {
                    file: String::new(),
                    index: i,
                    kind: d.kind.keyword().to_string(),
                    ok: true,
                    detail: String::new(),
                    span: d.span,
                    error: None,
                },
                Err(e) => Verdict {
                    file: String::new(),
                    index: i,
                    kind: d.kind.keyword().to_string(),
                    ok: false,
                    detail: e.to_string(),
                    span: e.span(),
                    error: Some(match &e {
                        ElabError::Type { error, .. } => error.kind.to_string(),
                        _ => "ElabError".to_string(),
                    }),
                },
            };
            v.file = file.to_string();
            out.push(v);
        }
        out
    }
}

fn fail(v: &mut Verdict, detail: String, kind: Option<ErrorKind>) {
    v.ok = false;
    v.detail = detail;
    v.error = kind.map(|k| k.to_string());
}

/// Axiom name for a scheme instance: stable under convertible arguments.
pub fn instance_name(scheme: &str, normal_args: &[Expr]) -> Name {
    let mut h = Sha256::new();
    for a in normal_args {
        h.update(a.canonical().as_bytes());
        h.update([0u8]);
    }
    let digest = h.finalize();
    let hex: String = digest.iter().take(6).map(|b| format!("{b:02x}")).collect();
    Name::new(&format!("{scheme}@{hex}"))
}

// Does identifier `name` occur free in a surface term?
fn mentions_free(t: &Term, name: &str, bound: &mut Vec<String>) -> bool {
    let go = |t: &Term, bound: &mut Vec<String>| mentions_free(t, name, bound);
    match &t.kind {
        TermKind::Tau => false,
        TermKind::Ident(s) => s == name && !bound.iter().any(|b| b == name),
        TermKind::SchemeInst(s, args) => s == name || args.iter().any(|a| go(a, bound)),
        TermKind::Binder { segments, end } => {
            let base = bound.len();
            let mut hit = false;
            for seg in segments {
                match seg {
                    Segment::Bind { names, ty, .. } => {
                        hit |= go(ty, bound);
                        bound.extend(names.iter().cloned());
                    }
                    Segment::Premise(ty) => hit |= go(ty, bound),
                }
            }
            hit |= match end {
                BracketEnd::Body(b) | BracketEnd::Arrow(b) => go(b, bound),
            };
            bound.truncate(base);
            hit
        }
        TermKind::App(items) | TermKind::Product(items) => items.iter().any(|i| go(i, bound)),
        TermKind::ProtDef { name: x, witness, body, template } => {
            if go(witness, bound) || go(body, bound) {
                return true;
            }
            bound.push(x.clone());
            let r = go(template, bound);
            bound.pop();
            r
        }
        TermKind::ProjL(a) | TermKind::ProjR(a) | TermKind::Neg(a) => go(a, bound),
        TermKind::Sum(a, b) | TermKind::InjL(a, b) | TermKind::InjR(a, b) | TermKind::Case(a, b) => {
            go(a, bound) || go(b, bound)
        }
    }
}

/// Elaborate a whole theory in a fresh session into its list of jobs.
/// Environment directives are validated on the way.
pub fn elaborate(theory: &Theory) -> Result<Vec<Job>, ElabError> {
    let mut s = Session::default();
    let mut jobs = Vec::new();
    for (i, d) in theory.directives.iter().enumerate() {
        if let Some(j) = s.elaborate_directive(i, d)? {
            jobs.push(j);
        }
    }
    Ok(jobs)
}

/// Elaborate with no environment: every identifier is a free variable.
pub fn elaborate_free(t: &Term) -> Result<Expr, ElabError> {
    Session::default().elaborate_expr(t)
}
