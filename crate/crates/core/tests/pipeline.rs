use krealize_core::combinators::{numeral, succ};
use krealize_core::compile::compile_str;
use krealize_core::derivation::{check_derivation, parse_derivation, Reason};
use krealize_core::kam::{behavioral_numeral, run_final, Terminal};
use krealize_core::pole::{thread_member, Membership};
use krealize_core::realizer::{extract, PipelineInputs};
use krealize_core::star::{bbot_member, default_window, BMember, BProcess};
use krealize_core::syntax::{parse_bprocess, parse_process, print_term, PrintOptions};
use krealize_core::truth::Formula;
use krealize_core::{Process, Stack, Term};

#[test]
fn compiled_lambda_runs_on_the_machine() {
    let t = compile_str("\\x.\\y. y x").unwrap();
    let p = Process::new(
        t,
        Stack::from_terms(
            [Term::constant("a"), Term::constant("f")],
            Stack::constant("p"),
        ),
    );
    let fin = run_final(&p, 1000);
    assert_eq!(fin.state, parse_process("#f * #a . %p").unwrap());
    assert!(matches!(fin.terminal, Terminal::Stuck(_)));
}

#[test]
fn identity_compiles_to_i() {
    assert_eq!(
        print_term(&compile_str("\\x. x").unwrap(), &PrintOptions::default()),
        "I"
    );
}

#[test]
fn successor_counts() {
    let three = Term::app(succ(), Term::app(succ(), numeral(1)));
    assert_eq!(behavioral_numeral(&three, 10_000), Ok(3));
}

#[test]
fn halting_constant_decides_a_thread() {
    let p = parse_process("#d * {0} . %pi0").unwrap();
    assert_eq!(thread_member(&p, 0, 0, 8, 10_000), Ok(Membership::Yes));
    assert_eq!(thread_member(&p, 0, 1, 8, 10_000), Ok(Membership::No));
}

#[test]
fn extended_pole_on_the_everything_pole() {
    let (t, p, s, q) = parse_bprocess("(I, <>) * (#a . %pi0, <>)").unwrap();
    let bp = BProcess(Process::new(t, s), krealize_core::star::meet(&p, &q));
    let window = default_window(&bp.1);
    let verdict = bbot_member(&bp, &krealize_core::pole::Pole::Everything, window, 10_000);
    assert!(matches!(verdict, BMember::InBot), "{verdict}");
}

#[test]
fn extraction_of_a_stub_pipeline() {
    let inputs = PipelineInputs::with_stubs(Term::comb(krealize_core::Comb::I), Formula::bot());
    let phi = extract(&inputs).unwrap();
    assert!(phi.is_closed() && phi.is_proof_like());
}

#[test]
fn derivation_file_with_comments() {
    let src = "# K, the weakening axiom\n\
               1: r1 [] x: A; y: B |- x : A\n\
               2: r3 [1] x: A |- \\y. x : B -> A\n\
               3: r3 [2] |- \\x.\\y. x : A -> B -> A\n";
    let d = parse_derivation(src).unwrap();
    let ok = check_derivation(&d).unwrap();
    assert_eq!(ok.formula.to_string(), "A -> B -> A");
}

#[test]
fn eigenvariable_violation_is_reported() {
    let src = "1: r1 [] x: a noteps b |- x : a noteps b\n\
               2: r4 [1] x: a noteps b |- x : forall a. a noteps b\n";
    let d = parse_derivation(src).unwrap();
    let rej = check_derivation(&d).unwrap_err();
    assert_eq!(rej.node, 2);
    assert!(matches!(rej.reason, Reason::Eigenvariable { .. }), "{rej}");
}
