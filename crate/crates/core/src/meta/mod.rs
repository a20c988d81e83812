//! Randomised checking of the calculus' metatheory.
//!
//! [`gen_case`] builds a valid expression by applying typing rules forwards
//! from `tau : tau`, consulting the checker for the types of the pieces it
//! has already built. Each case index has its own random stream, so runs
//! are reproducible and can be split across threads.

mod properties;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::reduction::{normalize, DEFAULT_FUEL};
use crate::syntax::{Context, Expr, Name, Node};
use crate::typing::Checker;

pub use properties::{run_property, shrink, Failure, Property, PropertyReport};

/// Relative frequencies of the construction rules.
#[derive(Clone, Debug, Serialize)]
pub struct Weights {
    pub tau: u32,
    pub var: u32,
    pub abs_u: u32,
    pub abs_e: u32,
    pub beta: u32,
    pub apply: u32,
    pub protdef: u32,
    pub proj: u32,
    pub product: u32,
    pub sum: u32,
    pub inj: u32,
    pub case: u32,
    pub neg: u32,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            tau: 6,
            var: 8,
            abs_u: 6,
            abs_e: 3,
            beta: 6,
            apply: 5,
            protdef: 4,
            proj: 5,
            product: 3,
            sum: 3,
            inj: 3,
            case: 3,
            neg: 6,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GenConfig {
    pub seed: u64,
    /// Maximum nesting of construction rules.
    pub max_depth: u32,
    pub weights: Weights,
    /// Upper bound on the number of declarations in a generated context.
    pub ctx_pool: usize,
    /// Step budget for every normalisation.
    pub fuel: u64,
    /// Candidates larger than this many nodes are discarded.
    pub max_size: usize,
    /// Share of cases generated in the empty context, in percent.
    pub closed_percent: u32,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            max_depth: 8,
            weights: Weights::default(),
            ctx_pool: 4,
            fuel: DEFAULT_FUEL,
            max_size: 300,
            closed_percent: 30,
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> GenConfig {
        GenConfig { seed, ..GenConfig::default() }
    }

    /// Only closed terms.
    pub fn closed(mut self) -> GenConfig {
        self.closed_percent = 100;
        self
    }
}

/// A valid expression with its context and inferred type.
#[derive(Clone, Debug)]
pub struct Generated {
    pub index: u64,
    pub ctx: Context,
    pub term: Expr,
    pub ty: Expr,
}

fn rng_for(seed: u64, index: u64, salt: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ salt);
    r.set_stream(index);
    r
}

#[derive(Clone, Copy)]
enum Rule {
    Tau,
    Var,
    AbsU,
    AbsE,
    Beta,
    Apply,
    ProtDef,
    Proj,
    Product,
    Sum,
    Inj,
    Case,
    Neg,
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    cfg: &'a GenConfig,
    ctx: Context,
    ck: Checker,
    counter: usize,
}

impl<'a> Gen<'a> {
    fn fresh(&mut self, base: &str) -> Name {
        self.counter += 1;
        Name::new(&format!("{base}{}", self.counter))
    }

    fn infer(&mut self, e: &Expr) -> Option<Expr> {
        if e.size() > self.cfg.max_size {
            return None;
        }
        let ctx = self.ctx.clone();
        self.ck.infer(&ctx, e).ok()
    }

    fn nf(&self, e: &Expr) -> Option<Expr> {
        normalize(e, self.cfg.fuel).ok()
    }

    fn pick_rule(&mut self, depth: u32) -> Rule {
        let w = &self.cfg.weights;
        let has_vars = !self.ctx.is_empty();
        let mut table = vec![(Rule::Tau, w.tau), (Rule::Var, if has_vars { w.var } else { 0 })];
        if depth > 0 {
            table.extend([
                (Rule::AbsU, w.abs_u),
                (Rule::AbsE, w.abs_e),
                (Rule::Beta, w.beta),
                (Rule::Apply, if has_vars { w.apply } else { w.apply / 2 }),
                (Rule::ProtDef, w.protdef),
                (Rule::Proj, w.proj),
                (Rule::Product, w.product),
                (Rule::Sum, w.sum),
                (Rule::Inj, w.inj),
                (Rule::Case, w.case),
                (Rule::Neg, w.neg),
            ]);
        }
        table.choose_weighted(&mut self.rng, |(_, w)| *w).map(|(r, _)| *r).unwrap_or(Rule::Tau)
    }

    /// A valid term and its type, built with at most `depth` nested rules.
    fn term(&mut self, depth: u32) -> Option<(Expr, Expr)> {
        for _ in 0..4 {
            let rule = self.pick_rule(depth);
            if let Some(r) = self.apply_rule(rule, depth) {
                return Some(r);
            }
        }
        Some((Expr::tau(), Expr::tau()))
    }

    fn child(&mut self, depth: u32) -> Option<(Expr, Expr)> {
        let d = self.sub(depth);
        self.term(d)
    }

    fn sub(&mut self, depth: u32) -> u32 {
        // Shrink faster at random so that sizes stay moderate.
        let d = depth.saturating_sub(1);
        if d > 0 && self.rng.gen_bool(0.3) {
            d - 1
        } else {
            d
        }
    }

    fn under<T>(&mut self, x: &Name, ty: &Expr, f: impl FnOnce(&mut Self) -> T) -> T {
        self.ctx.push(x.clone(), ty.clone()).expect("fresh");
        let r = f(self);
        self.ctx.pop();
        r
    }

    fn typed(&mut self, e: Expr) -> Option<(Expr, Expr)> {
        let t = self.infer(&e)?;
        Some((e, t))
    }

    // Some term of type `ty`, if one is easy to find.
    fn inhabitant(&mut self, ty: &Expr, depth: u32) -> Option<Expr> {
        let target = self.nf(ty)?;
        let mut vars: Vec<Name> = self.ctx.iter().map(|(x, _)| x.clone()).collect();
        vars.shuffle(&mut self.rng);
        for x in vars {
            let t = self.ctx.lookup(&x).cloned()?;
            if self.nf(&t).as_ref() == Some(&target) {
                return Some(Expr::free(x));
            }
        }
        if target.is_tau() {
            return Some(Expr::tau());
        }
        for _ in 0..3 {
            let (e, t) = self.term(depth)?;
            if self.nf(&t).as_ref() == Some(&target) {
                return Some(e);
            }
        }
        None
    }

    fn apply_rule(&mut self, rule: Rule, depth: u32) -> Option<(Expr, Expr)> {
        match rule {
            Rule::Tau => Some((Expr::tau(), Expr::tau())),
            Rule::Var => {
                let entries = self.ctx.entries();
                let (x, t) = entries.choose(&mut self.rng)?.clone();
                Some((Expr::free(x), t))
            }
            Rule::AbsU | Rule::AbsE => {
                let d = self.sub(depth);
                let (dom, _) = self.term(d)?;
                let x = self.fresh("x");
                let d2 = self.sub(depth);
                let (body, _) = self.under(&x, &dom, |g| g.term(d2))?;
                let e = if matches!(rule, Rule::AbsU) {
                    Expr::univ_named(&x, dom, &body)
                } else {
                    Expr::exist_named(&x, dom, &body)
                };
                self.typed(e)
            }
            Rule::Beta => {
                let d = self.sub(depth);
                let (arg, aty) = self.term(d)?;
                let x = self.fresh("y");
                let d2 = self.sub(depth);
                let (body, _) = self.under(&x, &aty, |g| g.term(d2))?;
                let f = if self.rng.gen_bool(0.7) {
                    Expr::univ_named(&x, aty, &body)
                } else {
                    Expr::exist_named(&x, aty, &body)
                };
                self.typed(Expr::apply(f, arg))
            }
            Rule::Apply => {
                let d = self.sub(depth);
                let (f, fty) = if !self.ctx.is_empty() && self.rng.gen_bool(0.5) {
                    self.apply_rule(Rule::Var, 0)?
                } else {
                    self.term(d)?
                };
                let shape = self.nf(&fty)?;
                let dom = match shape.node() {
                    Node::UnivAbs { dom, .. } => dom.clone(),
                    _ => return None,
                };
                let arg = self.inhabitant(&dom, d)?;
                self.typed(Expr::apply(f, arg))
            }
            Rule::ProtDef => {
                let d = self.sub(depth);
                let (a, _) = self.term(d)?;
                let (c, cty) = self.child(depth)?;
                let x = self.fresh("w");
                let template = if self.rng.gen_bool(0.5) { replace(&cty, &a, &Expr::free(x.clone())) } else { cty };
                self.typed(Expr::protdef_named(&x, a, c, &template))
            }
            Rule::Proj => {
                let d = self.sub(depth);
                let inner = match self.rng.gen_range(0..4) {
                    0 => self.apply_rule(Rule::Product, d.max(1))?,
                    1 => self.apply_rule(Rule::ProtDef, d.max(1))?,
                    2 => self.apply_rule(Rule::Sum, d.max(1))?,
                    _ => self.term(d)?,
                };
                let (p, pty) = inner;
                let shape = self.nf(&pty)?;
                if !matches!(shape.node(), Node::ExistAbs { .. } | Node::Product(..)) {
                    return None;
                }
                let e = if self.rng.gen_bool(0.5) { Expr::proj_l(p) } else { Expr::proj_r(p) };
                self.typed(e)
            }
            Rule::Product | Rule::Sum => {
                let (a, _) = self.child(depth)?;
                let (b, _) = self.child(depth)?;
                let e = if matches!(rule, Rule::Product) { Expr::product(a, b) } else { Expr::sum(a, b) };
                self.typed(e)
            }
            Rule::Inj => {
                let (v, _) = self.child(depth)?;
                let (o, _) = self.child(depth)?;
                let e = if self.rng.gen_bool(0.5) { Expr::inj_l(v, o) } else { Expr::inj_r(o, v) };
                self.typed(e)
            }
            Rule::Case => {
                let d = self.sub(depth);
                let (c1, _) = self.term(d)?;
                let x = self.fresh("c");
                let (body, bty) = self.under(&x, &c1, |g| g.term(d))?;
                if bty.has_free(&x) {
                    return None;
                }
                let l = Expr::univ_named(&x, c1.clone(), &body);
                let (c2, r) = if self.rng.gen_bool(0.4) {
                    (c1.clone(), l.clone())
                } else {
                    let (c2, _) = self.term(d)?;
                    let t = self.inhabitant(&bty, d)?;
                    (c2.clone(), Expr::univ(Name::new("y"), c2, t.lift(1, 0)))
                };
                let case = Expr::case(l, r);
                if self.rng.gen_bool(0.5) {
                    // Apply to an injection so that the case can fire.
                    let arg = if self.rng.gen_bool(0.5) {
                        Expr::inj_l(self.inhabitant(&c1, d)?, c2)
                    } else {
                        Expr::inj_r(c1, self.inhabitant(&c2, d)?)
                    };
                    self.typed(Expr::apply(case, arg))
                } else {
                    self.typed(case)
                }
            }
            Rule::Neg => {
                let (a, _) = self.child(depth)?;
                let e = if self.rng.gen_bool(0.2) { Expr::neg(Expr::neg(a)) } else { Expr::neg(a) };
                self.typed(e)
            }
        }
    }
}

// Replace every occurrence of the locally closed `pat` by `by`.
fn replace(e: &Expr, pat: &Expr, by: &Expr) -> Expr {
    if !pat.is_locally_closed() || pat.is_tau() {
        return e.clone();
    }
    if e == pat {
        return by.clone();
    }
    let kids: Vec<Expr> = e.children().into_iter().map(|c| replace(c, pat, by)).collect();
    if kids.is_empty() {
        e.clone()
    } else {
        e.rebuild(kids)
    }
}

/// The case with the given index; `None` when generation hit a dead end.
pub fn gen_case(cfg: &GenConfig, index: u64) -> Option<Generated> {
    let mut g = Gen {
        rng: rng_for(cfg.seed, index, 0x5eed),
        cfg,
        ctx: Context::new(),
        ck: Checker::new(cfg.fuel),
        counter: 0,
    };
    let closed = g.rng.gen_range(0..100) < cfg.closed_percent;
    if !closed && cfg.ctx_pool > 0 {
        let n = g.rng.gen_range(1..=cfg.ctx_pool);
        for i in 0..n {
            let (ty, _) = g.term(2)?;
            g.ctx.push(Name::new(&format!("v{i}")), ty).ok()?;
        }
    }
    let (term, _) = g.term(cfg.max_depth)?;
    let ty = g.infer(&term)?;
    Some(Generated { index, ctx: g.ctx, term, ty })
}

/// Successful cases `0..cases`, in order.
pub fn gen_valid(cfg: &GenConfig, cases: u64) -> impl Iterator<Item = Generated> + '_ {
    (0..cases).filter_map(move |i| gen_case(cfg, i))
}

/// An arbitrary expression over the free names `v0..v3`, possibly invalid.
pub fn gen_raw(seed: u64, index: u64, depth: u32) -> Expr {
    let mut rng = rng_for(seed, index, 0x4a3);
    raw(&mut rng, depth, 0)
}

fn raw(rng: &mut ChaCha8Rng, depth: u32, binders: u32) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    if leaf {
        return match rng.gen_range(0..3) {
            0 => Expr::tau(),
            1 if binders > 0 => Expr::bound(rng.gen_range(0..binders)),
            _ => Expr::free(format!("v{}", rng.gen_range(0..4)).as_str()),
        };
    }
    let d = depth - 1;
    let h = || Name::new("x");
    match rng.gen_range(0..15) {
        0 => Expr::univ(h(), raw(rng, d, binders), raw(rng, d, binders + 1)),
        1 => Expr::exist(h(), raw(rng, d, binders), raw(rng, d, binders + 1)),
        2 | 3 => Expr::apply(raw(rng, d, binders), raw(rng, d, binders)),
        4 => Expr::apply(Expr::univ(h(), raw(rng, d, binders), raw(rng, d, binders + 1)), raw(rng, d, binders)),
        5 => Expr::protdef(h(), raw(rng, d, binders), raw(rng, d, binders), raw(rng, d, binders + 1)),
        6 => Expr::proj_l(raw(rng, d, binders)),
        7 => Expr::proj_r(raw(rng, d, binders)),
        8 => Expr::product(raw(rng, d, binders), raw(rng, d, binders)),
        9 => Expr::sum(raw(rng, d, binders), raw(rng, d, binders)),
        10 => Expr::inj_l(raw(rng, d, binders), raw(rng, d, binders)),
        11 => Expr::inj_r(raw(rng, d, binders), raw(rng, d, binders)),
        12 => Expr::case(raw(rng, d, binders), raw(rng, d, binders)),
        _ => Expr::neg(raw(rng, d, binders)),
    }
}
