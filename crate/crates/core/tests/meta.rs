use std::str::FromStr;

use dkernel::meta::{gen_case, gen_raw, run_property, shrink, GenConfig, Property};
use dkernel::reduction::{is_normal, redexes};
use dkernel::surface::parse_expr;
use dkernel::typing::{infer, valid};
use dkernel::Context;

#[test]
fn generated_cases_are_valid_with_checked_types() {
    let cfg = GenConfig::with_seed(21);
    let mut produced = 0;
    for i in 0..1000 {
        if let Some(g) = gen_case(&cfg, i) {
            produced += 1;
            assert!(valid(&g.ctx, &g.term), "case {i}");
            assert!(dkernel::reduction::converts(&infer(&g.ctx, &g.term).unwrap(), &g.ty, 1_000_000).unwrap());
        }
    }
    assert!(produced >= 950, "generator produced only {produced} of 1000");
}

#[test]
fn generation_is_deterministic_per_seed_and_index() {
    let cfg = GenConfig::with_seed(5);
    for i in [0, 1, 17, 999] {
        let a = gen_case(&cfg, i).map(|g| (format!("{:?}", g.ctx), g.term.canonical()));
        let b = gen_case(&cfg, i).map(|g| (format!("{:?}", g.ctx), g.term.canonical()));
        assert_eq!(a, b);
    }
    assert_eq!(gen_raw(1, 2, 5), gen_raw(1, 2, 5));
    let other = GenConfig::with_seed(6);
    let differ = (0..20).filter(|&i| gen_case(&cfg, i).map(|g| g.term) != gen_case(&other, i).map(|g| g.term)).count();
    assert!(differ > 10);
}

#[test]
fn generated_terms_exercise_reduction() {
    let cfg = GenConfig::with_seed(2);
    let cases: Vec<_> = (0..500).filter_map(|i| gen_case(&cfg, i)).collect();
    let reducible = cases.iter().filter(|g| !is_normal(&g.term)).count();
    let open = cases.iter().filter(|g| !g.ctx.is_empty()).count();
    assert!(reducible * 2 > cases.len(), "{reducible} of {}", cases.len());
    assert!(open * 2 > cases.len());
    let closed = GenConfig::with_seed(2).closed();
    assert!((0..50).filter_map(|i| gen_case(&closed, i)).all(|g| g.ctx.is_empty()));
}

#[test]
fn property_names_parse() {
    for p in Property::ALL {
        assert_eq!(Property::from_str(p.name()).unwrap(), p);
        assert_eq!(p.to_string(), p.name());
    }
    assert!(Property::from_str("nonsense").is_err());
}

#[test]
fn every_property_holds_on_a_small_run() {
    let cfg = GenConfig::with_seed(9);
    for p in Property::ALL {
        let r = run_property(p, &cfg, 150);
        assert!(r.passed(), "{}: {:?}", p, r.failures);
        assert_eq!(r.checked + r.skipped, 150);
        assert!(r.checked >= 100, "{}: checked {}", p, r.checked);
    }
}

#[test]
fn reports_are_reproducible() {
    let cfg = GenConfig::with_seed(4);
    let a = run_property(Property::Confluence, &cfg, 60);
    let b = run_property(Property::Confluence, &cfg, 60);
    assert_eq!((a.checked, a.skipped, a.max_steps), (b.checked, b.skipped, b.max_steps));
}

#[test]
fn shrinking_keeps_the_failure_and_reduces_size() {
    // With a budget of one step, any term needing two contractions fails.
    let a = parse_expr("[f:[x:tau]tau][[y:tau]y,([z:tau]z tau)].2").unwrap();
    let ctx = Context::new();
    let s = shrink(Property::SnFuel, &ctx, &a, 1);
    assert!(s.size() < a.size(), "{s}");
    assert!(!redexes(&s).is_empty());
    assert!(valid(&ctx, &s));
}
