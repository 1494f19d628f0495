//! Bracket abstraction and λ-term compilation.
//!
//! `mlbd x t` removes the variable `x` from the c-term `t` using the six
//! rewriting rules, always applying the first one that matches:
//!
//! 1. `t` does not contain `x`: `(K)t`
//! 2. `t = x`: `I`
//! 3. `t = (u)v`, `v` free of `x`: `((C)mlbd x u)v`
//! 4. `t = (u)x`, `u` free of `x`: `u`
//! 5. `t = (u)x`: `(W)mlbd x u`
//! 6. `t = (u)(v)w`: `mlbd x (B)uvw`
//!
//! and `λx t` is `mlbd x (I)t`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::syntax::{self, ParseError};
use crate::term::{Comb, Name, Term, TermKind};

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum LambdaTerm {
    /// Any term without binders; usually an atom.
    Atom(Term),
    App(Box<LambdaTerm>, Box<LambdaTerm>),
    Abs(Name, Box<LambdaTerm>),
}

impl LambdaTerm {
    pub fn app(f: LambdaTerm, a: LambdaTerm) -> LambdaTerm {
        LambdaTerm::App(Box::new(f), Box::new(a))
    }

    pub fn abs(x: Name, body: LambdaTerm) -> LambdaTerm {
        LambdaTerm::Abs(x, Box::new(body))
    }

    pub fn var(x: &str) -> LambdaTerm {
        LambdaTerm::Atom(Term::var(x))
    }

    /// The term itself when it has no binders.
    pub fn to_term(&self) -> Option<Term> {
        match self {
            LambdaTerm::Atom(t) => Some(t.clone()),
            LambdaTerm::App(f, a) => Some(Term::app(f.to_term()?, a.to_term()?)),
            LambdaTerm::Abs(..) => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        match self {
            LambdaTerm::Atom(t) => t.free_vars(),
            LambdaTerm::App(f, a) => {
                let mut s = f.free_vars();
                s.extend(a.free_vars());
                s
            }
            LambdaTerm::Abs(x, b) => {
                let mut s = b.free_vars();
                s.remove(x);
                s
            }
        }
    }
}

impl fmt::Debug for LambdaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&syntax::print_lambda(self, &Default::default()))
    }
}

/// Which abstraction rule fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
}

fn is_var(t: &Term, x: &Name) -> bool {
    matches!(t.kind(), TermKind::Var(y) if y == x)
}

fn mlbd_inner(x: &Name, t: &Term, trace: &mut Option<&mut Vec<Rule>>) -> Term {
    let mut cur = t.clone();
    loop {
        let mut fire = |r: Rule| {
            if let Some(v) = trace.as_deref_mut() {
                v.push(r);
            }
        };
        if !cur.contains_var(x) {
            fire(Rule::R1);
            return Term::app(Term::comb(Comb::K), cur);
        }
        if is_var(&cur, x) {
            fire(Rule::R2);
            return Term::comb(Comb::I);
        }
        let (u, v) = match cur.kind() {
            TermKind::App(u, v) => (u.clone(), v.clone()),
            _ => panic!("mlbd: atom {cur:?} contains the variable {x:?} but is not it"),
        };
        if !v.contains_var(x) {
            fire(Rule::R3);
            let inner = mlbd_inner(x, &u, trace);
            return Term::app(Term::app(Term::comb(Comb::C), inner), v);
        }
        if is_var(&v, x) {
            if !u.contains_var(x) {
                fire(Rule::R4);
                return u;
            }
            fire(Rule::R5);
            let inner = mlbd_inner(x, &u, trace);
            return Term::app(Term::comb(Comb::W), inner);
        }
        match v.kind() {
            TermKind::App(v1, v2) => {
                fire(Rule::R6);
                cur = Term::app(
                    Term::app(Term::app(Term::comb(Comb::B), u), v1.clone()),
                    v2.clone(),
                );
            }
            _ => panic!("mlbd: argument atom {v:?} contains {x:?} but is not it"),
        }
    }
}

/// Eliminate `x` from `t`.
///
/// Panics if `t` hides `x` inside a continuation, which the parser never
/// produces for λ-terms.
pub fn mlbd(x: &Name, t: &Term) -> Term {
    mlbd_inner(x, t, &mut None)
}

/// [`mlbd`] together with the sequence of rules that fired.
pub fn mlbd_traced(x: &Name, t: &Term) -> (Term, Vec<Rule>) {
    let mut rules = Vec::new();
    let out = mlbd_inner(x, t, &mut Some(&mut rules));
    (out, rules)
}

/// `λx t = mlbd x (I)t`.
pub fn lam(x: &Name, t: &Term) -> Term {
    mlbd(x, &Term::app(Term::comb(Comb::I), t.clone()))
}

/// `λx₁…λxₙ t`, innermost binder first.
pub fn lam_many(xs: &[Name], t: &Term) -> Term {
    xs.iter().rev().fold(t.clone(), |acc, x| lam(x, &acc))
}

/// Compile a λ-term, eliminating innermost abstractions first. Free
/// variables survive as variable atoms.
pub fn compile_lambda(l: &LambdaTerm) -> Term {
    match l {
        LambdaTerm::Atom(t) => t.clone(),
        LambdaTerm::App(f, a) => Term::app(compile_lambda(f), compile_lambda(a)),
        LambdaTerm::Abs(x, body) => lam(x, &compile_lambda(body)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("free variables in a closed compile: {}", .0.join(", "))]
    FreeVariables(Vec<String>),
}

/// Like [`compile_lambda`] but rejects free variables.
pub fn compile_closed(l: &LambdaTerm) -> Result<Term, CompileError> {
    let free = l.free_vars();
    if !free.is_empty() {
        return Err(CompileError::FreeVariables(
            free.iter().map(|n| n.to_string()).collect(),
        ));
    }
    Ok(compile_lambda(l))
}

pub fn compile_str(src: &str) -> Result<Term, CompileError> {
    Ok(compile_lambda(&syntax::parse_lambda(src)?))
}

/// Compile a λ-template whose free variables name closed subterms, then
/// plug those subterms in. Equal to compiling the λ-term with the subterms
/// written out, because abstraction never looks inside a subterm that is
/// free of the bound variable.
pub fn compile_template(src: &str, holes: &[(&str, Term)]) -> Term {
    let body = compile_str(src).unwrap_or_else(|e| panic!("built-in template {src:?}: {e}"));
    let binding: BTreeMap<Name, Term> = holes
        .iter()
        .map(|(n, t)| (Name::new(n), t.clone()))
        .collect();
    body.substitute(&binding)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_cterm;

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    fn c(s: &str) -> Term {
        parse_cterm(s).unwrap()
    }

    #[test]
    fn rule_two() {
        assert_eq!(mlbd(&n("x"), &c("x")), c("I"));
    }

    #[test]
    fn rule_four() {
        assert_eq!(mlbd(&n("x"), &c("y x")), c("y"));
    }

    #[test]
    fn self_application() {
        let (t, rules) = mlbd_traced(&n("x"), &c("x x"));
        assert_eq!(t, c("W I"));
        assert_eq!(rules, vec![Rule::R5, Rule::R2]);
    }

    #[test]
    fn lam_identity() {
        assert_eq!(lam(&n("x"), &c("x")), c("I"));
    }

    #[test]
    fn lam_constant_body_fires_rule_one() {
        // (I)y does not contain x, so rule 1 applies before rule 3.
        assert_eq!(lam(&n("x"), &c("y")), c("K (I y)"));
    }

    #[test]
    fn compile_nested() {
        assert_eq!(compile_str("\\x. x").unwrap(), c("I"));
        let t = compile_str("\\x.\\y. (y)x").unwrap();
        assert!(t.is_closed());
    }

    #[test]
    fn strict_mode_reports_free_variables() {
        let l = syntax::parse_lambda("\\x. (x) y").unwrap();
        assert_eq!(
            compile_closed(&l),
            Err(CompileError::FreeVariables(vec!["y".into()]))
        );
    }
}
