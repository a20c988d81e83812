mod common;

use common::{ctx, ex};
use dkernel::certificate::{replay, replay_certificate, Rule};
use dkernel::meta::{gen_case, GenConfig};
use dkernel::reduction::converts;
use dkernel::typing::{check_context, infer, valid, Checker, ErrorKind};
use dkernel::{Context, DEFAULT_FUEL};

fn ty(c: &Context, src: &str) -> String {
    infer(c, &ex(src)).unwrap_or_else(|e| panic!("{src}: {e}")).to_string()
}

fn conv_check(c: &Context, e: &str, t: &str) {
    Checker::new(DEFAULT_FUEL).check(c, &ex(e), &ex(t)).unwrap_or_else(|err| panic!("{e} : {t}: {err}"));
}

fn kind(c: &Context, src: &str) -> ErrorKind {
    infer(c, &ex(src)).expect_err(src).kind
}

#[test]
fn identity_and_constant_function() {
    let e = Context::new();
    assert_eq!(ty(&e, "tau"), "tau");
    assert_eq!(ty(&e, "[x:tau]x"), "[x:tau]tau");
    assert_eq!(ty(&e, "[x:tau]tau"), "[x:tau]tau");
}

#[test]
fn existential_rules() {
    let e = Context::new();
    // An existential types to a universal abstraction.
    assert_eq!(ty(&e, "[x:tau][y!x]tau"), "[x:tau][y:x]tau");
    let g = ctx(&[("a", "tau"), ("b", "tau"), ("P", "[a => b]"), ("x", "[y!a](P y)")]);
    assert_eq!(ty(&g, "x.1"), "a");
    assert_eq!(ty(&g, "x.2"), "(P x.1)");
}

#[test]
fn introduction_of_existentials() {
    let g = ctx(&[("a", "tau"), ("b", "tau"), ("P", "[y:a]b"), ("x", "a"), ("z", "(P x)")]);
    assert_eq!(ty(&g, "[y := x, z : (P y)]"), "[y!a](P y)");
}

#[test]
fn elimination_of_existentials() {
    let g = ctx(&[
        ("a", "tau"),
        ("b", "tau"),
        ("P", "[y:a]b"),
        ("Q", "[y:a]b"),
        ("x", "[y1!a](P y1)"),
        ("z", "[y2:a][y:(P y2)](Q y2)"),
    ]);
    assert_eq!(ty(&g, "(z x.1)"), "[y:(P x.1)](Q x.1)");
    assert_eq!(ty(&g, "((z x.1) x.2)"), "(Q x.1)");
    assert_eq!(ty(&g, "[y3 := x.1, ((z x.1) x.2) : (Q y3)]"), "[y3!a](Q y3)");
}

#[test]
fn propositional_rules() {
    let g = ctx(&[("a", "tau"), ("b", "tau"), ("c", "a"), ("d", "b")]);
    assert_eq!(ty(&g, "[c,d]"), "[a,b]");
    assert_eq!(ty(&g, "[c+d]"), "[a,b]");
    assert_eq!(ty(&g, "inl{c,b}"), "[a+b]");
    assert_eq!(ty(&g, "inr{a,d}"), "[a+b]");
    assert_eq!(ty(&g, "~c"), "a");
    assert_eq!(ty(&g, "case{[x:a]c, [y:b]c}"), "[[a+b] => a]");
    assert_eq!(ty(&g, "[c,d].2"), "b");
}

#[test]
fn truth_is_provable() {
    conv_check(&Context::new(), "[x := tau, tau : ~x]", "~[x:tau]x");
    conv_check(&Context::new(), "[x:tau][y:[z:tau]z](y x)", "[x:tau][[z:tau]z => x]");
}

#[test]
fn negation_laws_hold_up_to_conversion() {
    let g = ctx(&[("a", "tau"), ("b", "tau")]);
    conv_check(&g, "[x:a]x", "[~~a => a]");
    conv_check(&g, "[x:~[a,b]]x", "[[~a+~b] => ~[a,b]]");
    conv_check(&g, "[x:~[x!a]b]x", "[[x:a]~b => ~[x!a]b]");
}

#[test]
fn rejections_carry_their_kind() {
    let e = Context::new();
    assert_eq!(kind(&e, "([x:tau]x [x:tau]tau)"), ErrorKind::ArgumentMismatch);
    assert_eq!(kind(&e, "[x:[y:tau]y](x x)"), ErrorKind::ArgumentMismatch);
    assert_eq!(kind(&e, "(tau tau)"), ErrorKind::NotAFunction);
    assert_eq!(kind(&e, "tau.1"), ErrorKind::NotAPairLike);
    assert_eq!(kind(&e, "q"), ErrorKind::UnboundVariable);
    assert_eq!(kind(&e, "case{[x:tau]x, [y:[z:tau]z]y}"), ErrorKind::CaseBranchMismatch);
    assert_eq!(kind(&e, "case{[x:tau][y:x]y, [x:tau][y:x]y}"), ErrorKind::CaseDependentResult);
    assert_eq!(kind(&e, "[x := tau, [y:tau]y : x]"), ErrorKind::BodyMismatch);
    let g = ctx(&[("a", "tau"), ("b", "tau"), ("x", "[y!a]b"), ("z", "a")]);
    assert_eq!(kind(&g, "(x z)"), ErrorKind::NotAFunction);
}

#[test]
fn errors_point_at_the_failing_subterm() {
    let err = infer(&Context::new(), &ex("[x:tau][y:tau](tau x)")).unwrap_err();
    // The head of the application is at fault.
    assert_eq!(err.path.to_string(), "1.1.0");
}

#[test]
fn the_fuel_limit_is_reported_distinctly() {
    // A context variable whose type loops under normalisation.
    let g = ctx(&[("f", "[x:tau]tau"), ("w", "(([x:tau](x x) [x:tau](x x)) tau)")]);
    let err = Checker::new(200).infer(&g, &ex("(w tau)")).unwrap_err();
    assert!(matches!(err.kind, ErrorKind::FuelExhausted | ErrorKind::NotAFunction), "{err}");
}

#[test]
fn ill_formed_contexts_are_rejected() {
    let bad = ctx(&[("x", "(tau tau)")]);
    assert_eq!(check_context(&bad).unwrap_err().kind, ErrorKind::IllFormedContext);
    assert!(check_context(&ctx(&[("a", "tau"), ("x", "a")])).is_ok());
}

#[test]
fn falsehood_is_not_inhabited_by_small_closed_terms() {
    let falsum = ex("[x:tau]x");
    for src in ["tau", "[x:tau]x", "[x:tau]tau", "[x:tau]~x", "[x := tau, tau : x]", "[x:tau][x,x].1"] {
        assert!(Checker::new(DEFAULT_FUEL).check(&Context::new(), &ex(src), &falsum).is_err(), "{src}");
    }
}

#[test]
fn certificates_replay() {
    let g = ctx(&[("a", "tau"), ("b", "tau"), ("P", "[y:a]b"), ("Q", "[y:a]b")]);
    let e = ex("[x:[y1!a](P y1)][z:[y2:a][(P y2) => (Q y2)]][y3 := x.1, ((z x.1) x.2) : (Q y3)]");
    let mut ck = Checker::certifying(DEFAULT_FUEL);
    let c = ck.certificate(&g, &e, None).unwrap();
    replay_certificate(&c, DEFAULT_FUEL).unwrap();
    assert_eq!(c.context.len(), 4);
    assert_eq!(c.root.rule, Rule::AbsU);
}

#[test]
fn certificates_end_in_the_requested_type() {
    let g = ctx(&[("a", "tau")]);
    let mut ck = Checker::certifying(DEFAULT_FUEL);
    let c = ck.certificate(&g, &ex("[x:a]x"), Some(&ex("[~~a => a]"))).unwrap();
    assert_eq!(c.root.rule, Rule::Conv);
    assert_eq!(c.root.ty, ex("[~~a => a]"));
    replay_certificate(&c, DEFAULT_FUEL).unwrap();
}

#[test]
fn tampered_certificates_are_rejected() {
    let mut ck = Checker::certifying(DEFAULT_FUEL);
    let mut d = ck.derive(&Context::new(), &ex("[x:tau]x")).unwrap();
    replay(&d, DEFAULT_FUEL).unwrap();
    d.ty = ex("[x:tau]x");
    assert!(replay(&d, DEFAULT_FUEL).is_err());
    let mut d2 = ck.derive(&Context::new(), &ex("[tau,tau].1")).unwrap();
    d2.premises[0].subject = ex("[tau,[x:tau]tau]");
    assert!(replay(&d2, DEFAULT_FUEL).is_err());
}

#[test]
fn generated_judgments_are_valid_and_certified() {
    let cfg = GenConfig::with_seed(7);
    for i in 0..200 {
        let Some(g) = gen_case(&cfg, i) else { continue };
        assert!(valid(&g.ctx, &g.term), "case {i}");
        let t = infer(&g.ctx, &g.term).unwrap();
        assert!(converts(&t, &g.ty, DEFAULT_FUEL).unwrap(), "case {i}");
        let mut ck = Checker::certifying(DEFAULT_FUEL);
        let c = ck.certificate(&g.ctx, &g.term, None).unwrap();
        replay_certificate(&c, DEFAULT_FUEL).unwrap_or_else(|e| panic!("case {i}: {e}"));
    }
}
