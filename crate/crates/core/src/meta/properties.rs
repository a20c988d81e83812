//! Property runners, reports and counterexample shrinking.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{gen_case, gen_raw, GenConfig};
use crate::explicit::es_normalize;
use crate::norming::norm;
use crate::reduction::{classify, is_normal, redexes, step_at, NormalClass, Normalizer, Strategy};
use crate::surface::{parse_expr, print};
use crate::syntax::{Context, Expr, Name};
use crate::typing::Checker;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Property {
    /// Both strategies reach the same normal form.
    Confluence,
    /// One-step reducts keep a convertible type.
    SubjectReduction,
    /// Inference is deterministic and stable under normalisation.
    Uniqueness,
    /// Norms exist, agree with the type's norm and survive reduction.
    Norming,
    /// Normalisation finishes within the fuel budget.
    SnFuel,
    /// The explicit-substitution engine agrees on normal forms.
    EsOracle,
    /// Irreducible closed valid terms are valid normal forms.
    Classify,
    /// Nothing closed inhabits `[x:tau]x`.
    Consistency,
    /// Printing then parsing gives back the same expression.
    Roundtrip,
}

impl Property {
    pub const ALL: [Property; 9] = [
        Property::Confluence,
        Property::SubjectReduction,
        Property::Uniqueness,
        Property::Norming,
        Property::SnFuel,
        Property::EsOracle,
        Property::Classify,
        Property::Consistency,
        Property::Roundtrip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Confluence => "confluence",
            Property::SubjectReduction => "subject-reduction",
            Property::Uniqueness => "uniqueness",
            Property::Norming => "norming",
            Property::SnFuel => "sn-fuel",
            Property::EsOracle => "es-oracle",
            Property::Classify => "classify",
            Property::Consistency => "consistency",
            Property::Roundtrip => "roundtrip",
        }
    }

    fn closed_only(self) -> bool {
        matches!(self, Property::Classify | Property::Consistency)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = String;
    fn from_str(s: &str) -> Result<Property, String> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown property `{s}`; expected one of {}", Property::ALL.map(|p| p.name()).join(", ")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub index: u64,
    pub context: String,
    pub term: String,
    pub detail: String,
    /// A smaller failing term, when shrinking found one.
    pub shrunk: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub property: String,
    pub seed: u64,
    pub cases: u64,
    pub checked: u64,
    /// Cases the generator could not complete, or raw terms outside the budget.
    pub skipped: u64,
    pub failures: Vec<Failure>,
    /// Largest number of reduction steps any case needed.
    pub max_steps: u64,
    /// Cases that ran out of fuel.
    pub exhausted: u64,
    pub elapsed_ms: u128,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

enum Outcome {
    Pass(u64),
    Fail(String),
    Skip,
    Exhausted(String),
}

fn render_ctx(ctx: &Context) -> String {
    let parts: Vec<String> = ctx.iter().map(|(x, t)| format!("{x}:{t}")).collect();
    format!("({})", parts.join(", "))
}

fn check(prop: Property, ctx: &Context, a: &Expr, fuel: u64) -> Outcome {
    let mut ck = Checker::new(fuel);
    match prop {
        Property::Confluence => {
            let lo = Normalizer::new(Strategy::LeftmostOutermost, fuel).run(a);
            let ri = Normalizer::new(Strategy::RightmostInnermost, fuel).run(a);
            match (lo, ri) {
                (Ok(x), Ok(y)) if x.expr == y.expr => Outcome::Pass(x.steps.max(y.steps)),
                (Ok(x), Ok(y)) => Outcome::Fail(format!("strategies disagree: {} vs {}", x.expr, y.expr)),
                (Err(e), _) | (_, Err(e)) => Outcome::Exhausted(e.to_string()),
            }
        }
        Property::SubjectReduction => {
            let ty = match ck.infer(ctx, a) {
                Ok(t) => t,
                Err(e) => return Outcome::Fail(format!("not valid: {e}")),
            };
            for r in redexes(a) {
                let b = step_at(a, &r.path, r.tag).expect("listed redex");
                match ck.infer(ctx, &b) {
                    Ok(t2) => match ck.converts(&t2, &ty) {
                        Ok(true) => {}
                        Ok(false) => return Outcome::Fail(format!("{} at {} changes the type to {t2}", r.tag, r.path)),
                        Err(e) => return Outcome::Exhausted(e.to_string()),
                    },
                    Err(e) => return Outcome::Fail(format!("{} at {} gives an invalid term: {e}", r.tag, r.path)),
                }
            }
            Outcome::Pass(ck.steps)
        }
        Property::Uniqueness => {
            let t1 = ck.infer(ctx, a);
            let t2 = ck.infer(ctx, a);
            let (t1, t2) = match (t1, t2) {
                (Ok(x), Ok(y)) => (x, y),
                (Err(e), _) | (_, Err(e)) => return Outcome::Fail(format!("not valid: {e}")),
            };
            if t1 != t2 {
                return Outcome::Fail(format!("two runs give {t1} and {t2}"));
            }
            let nf = match Normalizer::new(Strategy::LeftmostOutermost, fuel).run(a) {
                Ok(n) => n.expr,
                Err(e) => return Outcome::Exhausted(e.to_string()),
            };
            match ck.infer(ctx, &nf) {
                Ok(t3) => match ck.converts(&t1, &t3) {
                    Ok(true) => Outcome::Pass(ck.steps),
                    Ok(false) => Outcome::Fail(format!("normal form has type {t3}, term has {t1}")),
                    Err(e) => Outcome::Exhausted(e.to_string()),
                },
                Err(e) => Outcome::Fail(format!("normal form is not valid: {e}")),
            }
        }
        Property::Norming => {
            let ty = match ck.infer(ctx, a) {
                Ok(t) => t,
                Err(e) => return Outcome::Fail(format!("not valid: {e}")),
            };
            let n = match norm(ctx, a) {
                Some(n) => n,
                None => return Outcome::Fail("valid but not normable".into()),
            };
            match norm(ctx, &ty) {
                Some(m) if m == n => {}
                other => return Outcome::Fail(format!("norm {n} differs from the type's norm {other:?}")),
            }
            for r in redexes(a) {
                let b = step_at(a, &r.path, r.tag).expect("listed redex");
                if norm(ctx, &b).as_ref() != Some(&n) {
                    return Outcome::Fail(format!("{} at {} changes the norm", r.tag, r.path));
                }
            }
            Outcome::Pass(0)
        }
        Property::SnFuel => match Normalizer::new(Strategy::LeftmostOutermost, fuel).run(a) {
            Ok(n) => Outcome::Pass(n.steps),
            Err(e) => Outcome::Exhausted(e.to_string()),
        },
        Property::EsOracle => {
            let k = match Normalizer::new(Strategy::LeftmostOutermost, fuel).run(a) {
                Ok(n) => n,
                Err(e) => return Outcome::Exhausted(e.to_string()),
            };
            match es_normalize(a, fuel) {
                Ok(s) if s.expr == k.expr => Outcome::Pass(k.steps),
                Ok(s) => Outcome::Fail(format!("kernel gives {}, explicit substitution gives {}", k.expr, s.expr)),
                Err(e) => Outcome::Fail(format!("explicit substitution did not finish: {e}")),
            }
        }
        Property::Classify => {
            let irreducible = is_normal(a);
            let class = classify(a);
            let in_nf = matches!(class, NormalClass::InN | NormalClass::InD);
            if irreducible != in_nf {
                return Outcome::Fail(format!("irreducible={irreducible} but classified as {class}"));
            }
            match Normalizer::new(Strategy::LeftmostOutermost, fuel).run(a) {
                Ok(n) => match classify(&n.expr) {
                    NormalClass::InN | NormalClass::InD => Outcome::Pass(n.steps),
                    c => Outcome::Fail(format!("normal form {} classified as {c}", n.expr)),
                },
                Err(e) => Outcome::Exhausted(e.to_string()),
            }
        }
        Property::Consistency => {
            let falsum = Expr::univ_named(&Name::new("x"), Expr::tau(), &Expr::free("x"));
            match ck.check(ctx, a, &falsum) {
                Ok(()) => Outcome::Fail("inhabits [x:tau]x".into()),
                Err(_) => Outcome::Pass(ck.steps),
            }
        }
        Property::Roundtrip => {
            let text = print(a);
            match parse_expr(&text) {
                Ok(b) if &b == a => Outcome::Pass(0),
                Ok(b) => Outcome::Fail(format!("{text} reparses as {}", print(&b))),
                Err(e) => Outcome::Fail(format!("{text} does not parse: {e}")),
            }
        }
    }
}

fn still_fails(prop: Property, ctx: &Context, a: &Expr, fuel: u64) -> bool {
    // Oracle cases may be raw terms, everything else must stay valid.
    let valid = prop == Property::EsOracle || Checker::new(fuel).infer(ctx, a).is_ok();
    valid && matches!(check(prop, ctx, a, fuel), Outcome::Fail(_) | Outcome::Exhausted(_))
}

// Candidate simplifications: replace a subterm by tau or by one of its children.
fn candidates(a: &Expr) -> Vec<Expr> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    collect_candidates(a, a, &mut path, &mut out);
    out
}

fn collect_candidates(root: &Expr, sub: &Expr, path: &mut Vec<u8>, out: &mut Vec<Expr>) {
    if !sub.is_tau() {
        if let Some(r) = root.replace_at(path, Expr::tau()) {
            out.push(r);
        }
    }
    for (i, c) in sub.children().into_iter().enumerate() {
        let lifted = if sub.binds_child(i) {
            if c.has_loose(0) {
                None
            } else {
                Some(c.lower())
            }
        } else {
            Some(c.clone())
        };
        if let Some(l) = lifted {
            if let Some(r) = root.replace_at(path, l) {
                out.push(r);
            }
        }
    }
    for (i, c) in sub.children().into_iter().enumerate() {
        path.push(i as u8);
        collect_candidates(root, c, path, out);
        path.pop();
    }
}

/// Greedily shrink a failing term while it stays valid and keeps failing.
pub fn shrink(prop: Property, ctx: &Context, a: &Expr, fuel: u64) -> Expr {
    let mut cur = a.clone();
    for _ in 0..100 {
        let next = candidates(&cur)
            .into_iter()
            .filter(|c| c.size() < cur.size())
            .find(|c| still_fails(prop, ctx, c, fuel));
        match next {
            Some(n) => cur = n,
            None => break,
        }
    }
    cur
}

type Case = (Context, Expr);

/// Run `prop` on cases `0..cases` of the generator.
pub fn run_property(prop: Property, cfg: &GenConfig, cases: u64) -> PropertyReport {
    let start = Instant::now();
    let cfg = if prop.closed_only() { cfg.clone().closed() } else { cfg.clone() };
    let results: Vec<(u64, Outcome, Option<Case>)> = (0..cases)
        .into_par_iter()
        .map(|i| {
            // Half of the oracle cases are arbitrary expressions.
            if prop == Property::EsOracle && i % 2 == 1 {
                let a = gen_raw(cfg.seed, i, 5);
                let small = Normalizer { size_limit: Some(2000), ..Normalizer::new(Strategy::LeftmostOutermost, 2000) };
                return match small.run(&a) {
                    Ok(_) => (i, check(prop, &Context::new(), &a, cfg.fuel), Some((Context::new(), a))),
                    Err(_) => (i, Outcome::Skip, None),
                };
            }
            match gen_case(&cfg, i) {
                Some(g) => (i, check(prop, &g.ctx, &g.term, cfg.fuel), Some((g.ctx, g.term))),
                None => (i, Outcome::Skip, None),
            }
        })
        .collect();
    let mut report = PropertyReport {
        property: prop.name().to_string(),
        seed: cfg.seed,
        cases,
        checked: 0,
        skipped: 0,
        failures: Vec::new(),
        max_steps: 0,
        exhausted: 0,
        elapsed_ms: 0,
    };
    for (i, outcome, case) in results {
        match outcome {
            Outcome::Skip => report.skipped += 1,
            Outcome::Pass(steps) => {
                report.checked += 1;
                report.max_steps = report.max_steps.max(steps);
            }
            Outcome::Exhausted(detail) | Outcome::Fail(detail) => {
                let exhausted = detail.contains("fuel") || detail.contains("grew beyond");
                report.checked += 1;
                if exhausted {
                    report.exhausted += 1;
                }
                let (ctx, term) = case.expect("failing cases carry their term");
                let small = shrink(prop, &ctx, &term, cfg.fuel);
                report.failures.push(Failure {
                    index: i,
                    context: render_ctx(&ctx),
                    term: print(&term),
                    detail,
                    shrunk: (small != term).then(|| print(&small)),
                });
            }
        }
    }
    report.elapsed_ms = start.elapsed().as_millis();
    report
}
