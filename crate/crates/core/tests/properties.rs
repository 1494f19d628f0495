use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use krealize_core::combinators::numeral;
use krealize_core::compile::{lam_many, mlbd};
use krealize_core::derivation::{
    check_derivation, parse_derivation, parse_dformula, random_dformula, random_valid,
};
use krealize_core::kam::{behavioral_numeral, passes_through, run, step, StepResult};
use krealize_core::realizer::{Generator, Kind};
use krealize_core::star::{lle, meet, star, Condition};
use krealize_core::suite::random_formula;
use krealize_core::syntax::{
    parse_cterm, parse_process, print_process, print_term, PrintOptions, PrintStyle,
};
use krealize_core::{Comb, Name, Process, Stack, Term};

fn atom() -> impl Strategy<Value = Term> {
    prop_oneof![
        proptest::sample::select(Comb::ALL.to_vec()).prop_map(Term::comb),
        proptest::sample::select(vec!["x", "y"]).prop_map(Term::var),
        proptest::sample::select(vec!["a", "b"]).prop_map(Term::constant),
    ]
}

fn cterm() -> impl Strategy<Value = Term> {
    atom().prop_recursive(5, 24, 2, |inner| {
        (inner.clone(), inner).prop_map(|(f, a)| Term::app(f, a))
    })
}

fn closed_cterm() -> impl Strategy<Value = Term> {
    proptest::sample::select(Comb::ALL.to_vec())
        .prop_map(Term::comb)
        .prop_recursive(4, 16, 2, |inner| {
            (inner.clone(), inner).prop_map(|(f, a)| Term::app(f, a))
        })
}

fn condition() -> impl Strategy<Value = Condition> {
    prop_oneof![
        1 => Just(Condition::Bottom),
        6 => proptest::collection::vec(0u64..2, 0..4).prop_map(Condition::seq),
    ]
}

fn styles() -> impl Strategy<Value = PrintOptions> {
    (
        proptest::sample::select(vec![
            PrintStyle::Grouped,
            PrintStyle::Paper,
            PrintStyle::Plain,
        ]),
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(style, numerals, star_names)| PrintOptions {
            style,
            numerals,
            star_names,
        })
}

proptest! {
    #[test]
    fn printed_terms_parse_back(t in cterm(), opts in styles()) {
        let text = print_term(&t, &opts);
        prop_assert_eq!(parse_cterm(&text).unwrap(), t);
    }

    #[test]
    fn printed_processes_parse_back(t in cterm(), args in proptest::collection::vec(cterm(), 0..3), opts in styles()) {
        let p = Process::new(t, Stack::from_terms(args, Stack::constant("p")));
        let text = print_process(&p, &opts);
        prop_assert_eq!(parse_process(&text).unwrap(), p);
    }

    #[test]
    fn abstraction_removes_the_variable(t in cterm()) {
        let x = Name::new("x");
        prop_assert!(!mlbd(&x, &t).contains_var(&x));
    }

    #[test]
    fn abstraction_beta_reduces(t in cterm()) {
        let vars = [Name::new("x"), Name::new("y")];
        let args = [Term::constant("xi"), Term::constant("eta")];
        let binding: BTreeMap<Name, Term> = vars.iter().cloned().zip(args.iter().cloned()).collect();
        let start = Process::new(lam_many(&vars, &t), Stack::from_terms(args.clone(), Stack::constant("r")));
        let target = Process::new(t.substitute(&binding), Stack::constant("r"));
        prop_assert!(passes_through(&start, &target, 1_000_000));
    }

    #[test]
    fn the_machine_is_deterministic(t in closed_cterm()) {
        let p = Process::new(t, Stack::constant("p"));
        let a = run(&p, 300);
        let b = run(&p, 300);
        prop_assert_eq!(a.states, b.states);
    }

    #[test]
    fn traces_follow_single_steps(t in closed_cterm()) {
        let trace = run(&Process::new(t, Stack::constant("p")), 200);
        for w in trace.states.windows(2) {
            prop_assert_eq!(step(&w[0]), StepResult::Next(w[1].clone()));
        }
    }

    #[test]
    fn numerals_are_recognised(n in 0usize..200) {
        prop_assert_eq!(behavioral_numeral(&numeral(n), 1_000_000), Ok(n));
    }

    #[test]
    fn star_keeps_proof_like_terms_closed(t in closed_cterm()) {
        let s = star(&t).unwrap();
        prop_assert!(s.is_closed() && s.is_proof_like());
    }

    #[test]
    fn meet_is_a_semilattice(p in condition(), q in condition(), r in condition()) {
        prop_assert_eq!(meet(&p, &q), meet(&q, &p));
        prop_assert_eq!(meet(&p, &meet(&q, &r)), meet(&meet(&p, &q), &r));
        prop_assert_eq!(meet(&p, &p), p.clone());
        prop_assert_eq!(meet(&p, &Condition::one()), p.clone());
        prop_assert_eq!(meet(&p, &Condition::Bottom), Condition::Bottom);
    }

    #[test]
    fn lle_is_monotone(p in condition(), q in condition(), n in 0u64..5) {
        // a longer sequence is bounded less often
        prop_assert!(lle(&p, n) <= lle(&p, n + 1));
        prop_assert_eq!(lle(&Condition::Bottom, n), 0);
        if meet(&p, &q) == p {
            prop_assert!(lle(&p, n) <= lle(&q, n));
        }
    }

    #[test]
    fn generators_are_proof_like(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_formula(&mut rng, 4);
        let mut g = Generator::new();
        for kind in Kind::ALL {
            let out = g.generate(kind, &f);
            prop_assert!(out.is_closed() && out.is_proof_like(), "{} of {}", kind, f);
        }
    }

    #[test]
    fn random_derivations_check_and_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_valid(&mut rng);
        prop_assert!(check_derivation(&d).is_ok(), "{}", d);
        let reparsed = parse_derivation(&d.to_string()).unwrap();
        prop_assert_eq!(reparsed.to_string(), d.to_string());
        prop_assert!(check_derivation(&reparsed).is_ok());
    }

    #[test]
    fn dformulas_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_dformula(&mut rng, 4);
        prop_assert_eq!(parse_dformula(&f.to_string()).unwrap(), f);
    }
}
