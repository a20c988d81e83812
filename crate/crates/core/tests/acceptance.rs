//! Acceptance criteria, one line per criterion. Exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dkernel::corpus::{default_dir, run_corpus, Manifest};
use dkernel::meta::{run_property, GenConfig, Property, PropertyReport};
use dkernel::norming::norm;
use dkernel::surface::{parse_expr, parse_theory, print, Session, Verdict};
use dkernel::typing::valid;
use dkernel::{Checker, Context, Expr, Name, DEFAULT_FUEL};

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const SEED: u64 = 1;
const CORPUS_LIMIT: Duration = Duration::from_secs(10);
const CONFLUENCE_LIMIT: Duration = Duration::from_secs(60);

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn summary(r: &PropertyReport) -> String {
    let mut s = format!("{} checked, {} skipped, {} failures, {} ms", r.checked, r.skipped, r.failures.len(), r.elapsed_ms);
    if let Some(f) = r.failures.first() {
        s.push_str(&format!("; first: case {} {}: {}", f.index, f.term, f.detail));
    }
    s
}

/// Every expression of the corpus, elaborated in the environment of its session.
fn corpus_expressions() -> Vec<Expr> {
    let dir = default_dir();
    let manifest = Manifest::load(&dir).expect("manifest");
    let mut out = Vec::new();
    for s in &manifest.sessions {
        let mut session = Session::new(DEFAULT_FUEL);
        let mut theories = Vec::new();
        for f in &s.files {
            let theory = parse_theory(&std::fs::read_to_string(dir.join(f)).expect("corpus file")).expect("corpus parses");
            session.process(f, &theory);
            theories.push(theory);
        }
        for t in theories.iter().flat_map(|t| &t.directives).flat_map(|d| d.kind.terms()) {
            if let Ok(e) = session.elaborate_expr(t) {
                out.push(e);
            }
        }
    }
    out
}

fn falsum() -> Expr {
    Expr::univ_named(&Name::new("x"), Expr::tau(), &Expr::free("x"))
}

fn corpus_golden() -> Outcome {
    match run_corpus(&default_dir(), DEFAULT_FUEL) {
        Ok(r) => {
            let ok = r.all_ok() && r.checks >= 30 && r.elapsed < CORPUS_LIMIT;
            let mut d = format!("{}/{} judgments ok in {:.2?}", r.passed, r.checks, r.elapsed);
            if let Some(f) = r.failures.first() {
                d.push_str(&format!("; first failure: {f}"));
            }
            outcome(ok, d)
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn negative_suite(corpus: &[Expr]) -> Outcome {
    let src = std::fs::read_to_string(default_dir().join("negative.d")).expect("negative.d");
    let theory = parse_theory(&src).expect("negative.d parses");
    let verdicts: Vec<Verdict> = Session::new(DEFAULT_FUEL).process("negative.d", &theory);
    let rejected = |needle: &str, kind: &str| {
        theory.directives.iter().zip(&verdicts).any(|(d, v)| {
            d.kind.terms().first().is_some_and(|t| print_term(&src, t.span).contains(needle))
                && v.ok
                && v.error.as_deref() == Some(kind)
        })
    };
    let mut problems = Vec::new();
    if !rejected("(I C)", "ArgumentMismatch") {
        problems.push("(I C) not rejected with ArgumentMismatch".to_string());
    }
    if !rejected("(x x)", "ArgumentMismatch") || valid(&Context::new(), &parse_expr("[x:[y:tau]y](x x)").unwrap()) {
        problems.push("[x:[y:tau]y](x x) not rejected".into());
    }
    if !rejected("(xe z0)", "NotAFunction") {
        problems.push("(x z) with x:[y!a]b not rejected with NotAFunction".into());
    }
    let f = falsum();
    let inhabitants = corpus.iter().filter(|e| Checker::new(DEFAULT_FUEL).check(&Context::new(), e, &f).is_ok()).count();
    if inhabitants > 0 {
        problems.push(format!("{inhabitants} corpus expressions inhabit [x:tau]x"));
    }
    let gen = run_property(Property::Consistency, &GenConfig::with_seed(SEED), 10_000);
    if !gen.passed() {
        problems.push(format!("generated: {}", summary(&gen)));
    }
    let detail = format!(
        "3 named rejections, {} corpus and {} generated closed terms do not inhabit [x:tau]x",
        corpus.len(),
        gen.checked
    );
    if problems.is_empty() {
        outcome(true, detail)
    } else {
        outcome(false, problems.join("; "))
    }
}

fn print_term(src: &str, span: dkernel::surface::Span) -> String {
    let line = src.lines().nth(span.line as usize - 1).unwrap_or("");
    line.chars().skip(span.col as usize - 1).collect()
}

fn confluence() -> Outcome {
    let start = Instant::now();
    let r = run_property(Property::Confluence, &GenConfig::with_seed(SEED), 10_000);
    let t = start.elapsed();
    outcome(r.passed() && r.checked == 10_000 && t < CONFLUENCE_LIMIT, format!("{} (wall {:.2?})", summary(&r), t))
}

fn subject_reduction() -> Outcome {
    let r = run_property(Property::SubjectReduction, &GenConfig::with_seed(SEED), 1000);
    outcome(r.passed() && r.checked == 1000, summary(&r))
}

fn norming() -> Outcome {
    let r = run_property(Property::Norming, &GenConfig::with_seed(SEED), 1000);
    let mut g = Context::new();
    for (x, t) in [("p", "tau"), ("q", "tau"), ("z", "[x:p][y:q]tau"), ("w", "[x:tau]x")] {
        g.push(Name::new(x), parse_expr(t).unwrap()).unwrap();
    }
    let e1 = parse_expr("[x:p](z x)").unwrap();
    let e2 = parse_expr("[x:p](z p)").unwrap();
    let e3 = parse_expr("[x:[y:tau]y](x x)").unwrap();
    let show = |e: &Expr| norm(&g, e).map_or("none".to_string(), |n| n.to_string());
    let triple = valid(&g, &e1)
        && show(&e1) == "[tau,[tau,tau]]"
        && !valid(&g, &e2)
        && show(&e2) == "[tau,[tau,tau]]"
        && !valid(&g, &e3)
        && show(&e3) == "none";
    let detail = format!("{}; triple norms {} / {} / {}", summary(&r), show(&e1), show(&e2), show(&e3));
    outcome(r.passed() && r.checked == 1000 && triple, detail)
}

fn es_oracle() -> Outcome {
    // Raw terms that do not normalise within the small budget are skipped,
    // so top up with further seeds until 5000 terms are compared.
    let mut checked = 0;
    let mut failures = 0;
    let mut first = None;
    let mut seed = SEED;
    while checked < 5000 && seed < SEED + 10 {
        let r = run_property(Property::EsOracle, &GenConfig::with_seed(seed), 5000 - checked);
        checked += r.checked;
        failures += r.failures.len();
        if first.is_none() && !r.passed() {
            first = Some(summary(&r));
        }
        seed += 1;
    }
    let mut d = format!("{checked} terms compared, {failures} mismatches");
    if let Some(f) = first {
        d.push_str(&format!("; {f}"));
    }
    outcome(checked >= 5000 && failures == 0, d)
}

fn sn_fuel() -> Outcome {
    let mut cfg = GenConfig::with_seed(SEED);
    cfg.fuel = 1_000_000;
    let r = run_property(Property::SnFuel, &cfg, 10_000);
    outcome(r.passed() && r.exhausted == 0, format!("{}, {} exhausted, max steps {}", summary(&r), r.exhausted, r.max_steps))
}

fn classifier() -> Outcome {
    let r = run_property(Property::Classify, &GenConfig::with_seed(SEED), 10_000);
    outcome(r.passed() && r.checked == 10_000, summary(&r))
}

fn roundtrip(corpus: &[Expr]) -> Outcome {
    let bad: Vec<String> = corpus
        .iter()
        .filter(|e| parse_expr(&print(e)).ok().as_ref() != Some(*e))
        .map(print)
        .collect();
    let r = run_property(Property::Roundtrip, &GenConfig::with_seed(SEED), 10_000);
    let mut d = format!("corpus {}/{} identical; generated {}", corpus.len() - bad.len(), corpus.len(), summary(&r));
    if let Some(b) = bad.first() {
        d.push_str(&format!("; first corpus mismatch: {b}"));
    }
    outcome(bad.is_empty() && r.passed() && r.checked == 10_000, d)
}

fn main() -> ExitCode {
    let corpus = corpus_expressions();
    let criteria: Vec<Criterion> = vec![
        ("golden corpus", Box::new(corpus_golden)),
        ("negative suite", Box::new(|| negative_suite(&corpus))),
        ("confluence", Box::new(confluence)),
        ("subject reduction", Box::new(subject_reduction)),
        ("norming", Box::new(norming)),
        ("oracle equivalence", Box::new(es_oracle)),
        ("strong normalisation fuel", Box::new(sn_fuel)),
        ("normal form classifier", Box::new(classifier)),
        ("round trip", Box::new(|| roundtrip(&corpus))),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        all &= o.ok;
        println!("{} {}. {name}: {}", if o.ok { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
