//! Numerals, iteration and the named closed terms.

use std::sync::OnceLock;

use thiserror::Error;

use crate::compile::compile_str;
use crate::syntax::parse_cterm;
use crate::term::{Comb, Term, TermKind};

fn cterm(src: &str) -> Term {
    parse_cterm(src).unwrap_or_else(|e| panic!("built-in term {src:?}: {e}"))
}

fn lambda(src: &str) -> Term {
    compile_str(src).unwrap_or_else(|e| panic!("built-in λ-term {src:?}: {e}"))
}

/// 0̄ = K I
pub fn zero() -> Term {
    static Z: OnceLock<Term> = OnceLock::new();
    Z.get_or_init(|| Term::app(Term::comb(Comb::K), Term::comb(Comb::I)))
        .clone()
}

/// σ = (B W)(B)B
pub fn succ() -> Term {
    static S: OnceLock<Term> = OnceLock::new();
    S.get_or_init(|| cterm("(B W)(B)B")).clone()
}

/// (φ)ⁿα
pub fn iter_apply(phi: &Term, n: usize, alpha: &Term) -> Term {
    (0..n).fold(alpha.clone(), |acc, _| Term::app(phi.clone(), acc))
}

/// n̄ = (σ)ⁿ0̄
pub fn numeral(n: usize) -> Term {
    iter_apply(&succ(), n, &zero())
}

/// The n with `t` syntactically equal to n̄, if any.
pub fn as_numeral(t: &Term) -> Option<usize> {
    let s = succ();
    let z = zero();
    let mut cur = t;
    let mut n = 0;
    loop {
        if *cur == z {
            return Some(n);
        }
        match cur.kind() {
            TermKind::App(f, a) if *f == s => {
                n += 1;
                cur = a;
            }
            _ => return None,
        }
    }
}

/// Which of a fixture's forms is returned by [`fixture`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Canonical {
    Printed,
    Lambda,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub canonical: Canonical,
    /// The combinator form, when one is written out.
    pub printed: Option<Term>,
    /// The compiled λ-form, when one is written out.
    pub lambda: Option<Term>,
}

impl Fixture {
    pub fn term(&self) -> Term {
        match self.canonical {
            Canonical::Printed => self.printed.clone(),
            Canonical::Lambda => self.lambda.clone(),
        }
        .expect("canonical form present")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown fixture {0:?}; known: zero, succ, A, Y, Omega, Sigma, Sigma2, notAtoB")]
pub struct UnknownFixture(pub String);

pub fn fixture_table() -> &'static [Fixture] {
    static TABLE: OnceLock<Vec<Fixture>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let a_lambda = lambda("\\a.\\f. (f)(a) a f");
        let y = Term::app(a_lambda.clone(), a_lambda.clone());
        let sigma_big = cterm("(B)(BW)(B)B");
        vec![
            Fixture {
                name: "zero",
                canonical: Canonical::Printed,
                printed: Some(zero()),
                lambda: None,
            },
            Fixture {
                name: "succ",
                canonical: Canonical::Printed,
                printed: Some(succ()),
                lambda: None,
            },
            Fixture {
                name: "A",
                canonical: Canonical::Lambda,
                printed: Some(cterm("(W)(B)(BW)(C)B")),
                lambda: Some(a_lambda),
            },
            Fixture {
                name: "Y",
                canonical: Canonical::Lambda,
                printed: None,
                lambda: Some(y),
            },
            Fixture {
                name: "Omega",
                canonical: Canonical::Printed,
                printed: Some(cterm("(K)(K)I")),
                lambda: Some(lambda("\\d.\\f.\\a. a")),
            },
            Fixture {
                name: "Sigma",
                canonical: Canonical::Printed,
                printed: Some(sigma_big.clone()),
                lambda: Some(lambda("\\n.\\d.\\f.\\a. (n d f)(f) a")),
            },
            Fixture {
                name: "Sigma2",
                canonical: Canonical::Printed,
                printed: Some(Term::app(
                    Term::comb(Comb::C),
                    Term::app(Term::comb(Comb::C), sigma_big),
                )),
                lambda: None,
            },
            Fixture {
                name: "notAtoB",
                canonical: Canonical::Lambda,
                printed: None,
                lambda: Some(lambda("\\x.\\y. (cc) \\k. (y)(x) k")),
            },
        ]
    })
}

pub fn fixture_entry(name: &str) -> Result<&'static Fixture, UnknownFixture> {
    fixture_table()
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| UnknownFixture(name.to_string()))
}

pub fn fixture(name: &str) -> Result<Term, UnknownFixture> {
    fixture_entry(name).map(Fixture::term)
}

/// Ω in λ-form, λdλfλa a.
pub fn omega_lambda() -> Term {
    fixture_entry("Omega")
        .expect("table")
        .lambda
        .clone()
        .expect("λ-form")
}

/// Σ in λ-form, λnλdλfλa(ndf)(f)a.
pub fn sigma_lambda() -> Term {
    fixture_entry("Sigma")
        .expect("table")
        .lambda
        .clone()
        .expect("λ-form")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kam::{behavioral_numeral, passes_through, run};
    use crate::term::{Process, Stack};

    fn k(n: &str) -> Term {
        Term::constant(n)
    }

    #[test]
    fn numeral_shapes() {
        assert_eq!(numeral(0), cterm("K I"));
        assert_eq!(numeral(1), Term::app(succ(), zero()));
        assert_eq!(as_numeral(&numeral(9)), Some(9));
        assert_eq!(as_numeral(&succ()), None);
    }

    #[test]
    fn iteration() {
        assert_eq!(iter_apply(&k("f"), 0, &k("a")), k("a"));
        assert_eq!(iter_apply(&k("f"), 2, &k("a")), cterm("(#f)(#f)#a"));
    }

    #[test]
    fn seven_counts_to_seven() {
        assert_eq!(behavioral_numeral(&numeral(7), 10_000), Ok(7));
    }

    #[test]
    fn three_iterates() {
        let pi = Stack::constant("p");
        let p = Process::new(numeral(3), Stack::from_terms([k("f"), k("a")], pi.clone()));
        let target = Process::new(iter_apply(&k("f"), 3, &k("a")), pi.clone());
        assert!(passes_through(&p, &target, 1000));
        let t = run(&p, 1000);
        assert_eq!(
            t.last(),
            &Process::new(k("f"), Stack::push(iter_apply(&k("f"), 2, &k("a")), pi))
        );
    }

    #[test]
    fn fixtures_are_proof_like() {
        for f in fixture_table() {
            assert!(f.term().is_proof_like(), "{}", f.name);
            assert!(f.term().is_closed(), "{}", f.name);
        }
        assert!(fixture("nope").is_err());
    }

    #[test]
    fn fixture_shapes() {
        let a = fixture("A").unwrap();
        assert_eq!(fixture("Y").unwrap(), Term::app(a.clone(), a));
        assert_eq!(fixture("Omega").unwrap(), cterm("(K)(K)I"));
        assert_eq!(fixture("Sigma2").unwrap(), cterm("(C)(C)(B)(BW)(B)B"));
    }

    #[test]
    fn y_unfolds() {
        let pi = Stack::constant("p");
        let y = fixture("Y").unwrap();
        let start = Process::new(y.clone(), Stack::push(k("x"), pi.clone()));
        let target = Process::new(k("x"), Stack::push(Term::app(y, k("x")), pi));
        assert!(passes_through(&start, &target, 100));
    }
}
