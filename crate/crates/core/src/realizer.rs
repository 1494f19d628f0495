//! Realizer generators: θ⁰/θ¹/τ⁰/τ¹ over elementary formulas, the numeral
//! conversions T₀/T₁, the collapsing realizers θ₀/θ₁ and the extraction
//! pipeline Φ = (τ¹_F)0̄Ψ.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::combinators::{omega_lambda, sigma_lambda, succ, zero};
use crate::compile::compile_template;
use crate::star::{sigma_star, star, zero_star, StarError};
use crate::truth::{
    sub_transform, sup_transform, Formula, FormulaKind, GroundExpr, GroundValue, Space,
};
use crate::{Comb, Name, Term};

/// T₀ = λfλn((n)(CB)(C)σ*)f0̄*, turning n̄ into n̄*.
pub fn t0() -> Term {
    static T: OnceLock<Term> = OnceLock::new();
    T.get_or_init(|| {
        compile_template(
            "\\f.\\n. (n (C B (C hss))) f hzs",
            &[("hss", sigma_star()), ("hzs", zero_star())],
        )
    })
    .clone()
}

/// T₁ = λfλn((((n 0̄)(C)Σ)Ω)(C)Bσ)f 0̄, turning n̄* back into a numeral.
pub fn t1() -> Term {
    static T: OnceLock<Term> = OnceLock::new();
    T.get_or_init(|| {
        compile_template(
            "\\f.\\n. (((((n hz) (C hsig)) homega) (C B hs)) f) hz",
            &[
                ("hz", zero()),
                ("hsig", sigma_lambda()),
                ("homega", omega_lambda()),
                ("hs", succ()),
            ],
        )
    })
    .clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TConversion {
    T0,
    T1,
}

pub fn t_conversion(which: TConversion) -> Term {
    match which {
        TConversion::T0 => t0(),
        TConversion::T1 => t1(),
    }
}

/// (θ₀, θ₁) with θ₀ = λnλkλx(x)n and θ₁ = λnλx((((n)(CB)(C)σ*)(C)x)0̄*)(σ)n.
pub fn collapse_realizers() -> (Term, Term) {
    static T: OnceLock<(Term, Term)> = OnceLock::new();
    T.get_or_init(|| {
        let th0 = compile_template("\\n.\\k.\\x. x n", &[]);
        let th1 = compile_template(
            "\\n.\\x. (((n (C B (C hss))) (C x)) hzs) (hs n)",
            &[("hss", sigma_star()), ("hzs", zero_star()), ("hs", succ())],
        );
        (th0, th1)
    })
    .clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Theta0,
    Theta1,
    Tau0,
    Tau1,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::Theta0, Kind::Theta1, Kind::Tau0, Kind::Tau1];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Theta0 => "theta0",
            Kind::Theta1 => "theta1",
            Kind::Tau0 => "tau0",
            Kind::Tau1 => "tau1",
        }
    }

    pub fn from_name(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// θ/τ generation memoised per formula node. The formulas are kept alive
/// alongside their terms so node addresses stay valid keys.
#[derive(Default)]
pub struct Generator {
    memo: HashMap<(usize, Kind), (Formula, Term)>,
}

impl Generator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn generate(&mut self, kind: Kind, u: &Formula) -> Term {
        if let Some((_, t)) = self.memo.get(&(u.id(), kind)) {
            return t.clone();
        }
        let t = match kind {
            Kind::Theta0 | Kind::Theta1 => self.theta_fresh(kind == Kind::Theta1, u),
            Kind::Tau0 => compile_template(
                "\\n.\\x.\\m. tu m x",
                &[("tu", self.generate(Kind::Theta0, u))],
            ),
            Kind::Tau1 => compile_template(
                "\\n.\\x. (tu n) (x n)",
                &[("tu", self.generate(Kind::Theta1, u))],
            ),
        };
        self.memo.insert((u.id(), kind), (u.clone(), t.clone()));
        t
    }

    pub fn theta(&mut self, one: bool, u: &Formula) -> Term {
        self.generate(if one { Kind::Theta1 } else { Kind::Theta0 }, u)
    }

    pub fn tau(&mut self, one: bool, u: &Formula) -> Term {
        self.generate(if one { Kind::Tau1 } else { Kind::Tau0 }, u)
    }

    fn theta_fresh(&mut self, one: bool, u: &Formula) -> Term {
        match u.kind() {
            FormulaKind::Top | FormulaKind::Bot => compile_template("\\n.\\x. x", &[]),
            FormulaKind::EqHook(_, _, v) | FormulaKind::ForallFin(_, _, v) => self.theta(one, v),
            FormulaKind::Imp(v, w) => {
                // θ⁰ wraps the argument with τ¹_V, θ¹ with τ⁰_V.
                let tw = self.theta(one, w);
                let tv = self.tau(!one, v);
                compile_template(
                    "\\n.\\x.\\y. (tw n) (x (tv n y))",
                    &[("tw", tw), ("tv", tv)],
                )
            }
            FormulaKind::ForallInt { body, .. } => {
                let tv = self.theta(one, body);
                if one {
                    compile_template(
                        "\\n.\\x.\\m. (tv n) (ht0 x m)",
                        &[("tv", tv), ("ht0", t0())],
                    )
                } else {
                    compile_template(
                        "\\n.\\x. ht1 (\\m. (tv n) (x m))",
                        &[("tv", tv), ("ht1", t1())],
                    )
                }
            }
        }
    }
}

pub fn theta(one: bool, u: &Formula) -> Term {
    Generator::new().theta(one, u)
}

pub fn tau(one: bool, u: &Formula) -> Term {
    Generator::new().tau(one, u)
}

pub fn generate(kind: Kind, u: &Formula) -> Term {
    Generator::new().generate(kind, u)
}

/// The four guarded statements about U and its condition transforms, each
/// realized by one generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statement {
    /// θ⁰_U ⊩ ∀p ∀n^int ((p ≤ n) = 1 ↪ (U → U_p))
    I,
    /// θ¹_U ⊩ ∀p ∀n^int ((p ≤ n) = 1 ↪ (U_p → U))
    II,
    /// τ⁰_U ⊩ ∀p ∀n^int ((p ≤ n) = 1 ↪ (U → U^p))
    III,
    /// τ¹_U ⊩ ∀p ∀n^int ((p ≤ n) = 1 ↪ (U^p → U))
    IV,
}

impl Statement {
    pub const ALL: [Statement; 4] = [Statement::I, Statement::II, Statement::III, Statement::IV];

    pub fn realizer_kind(self) -> Kind {
        match self {
            Statement::I => Kind::Theta0,
            Statement::II => Kind::Theta1,
            Statement::III => Kind::Tau0,
            Statement::IV => Kind::Tau1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Statement::I => "i",
            Statement::II => "ii",
            Statement::III => "iii",
            Statement::IV => "iv",
        }
    }
}

/// The statement as a finite formula: p over the space's conditions and n
/// up to its integer bound.
pub fn lemma_statement(s: Statement, u: &Formula, space: &Space) -> Formula {
    let p = Name::new("$p");
    let n = Name::new("$n");
    let pv = GroundExpr::var(&p);
    let body = match s {
        Statement::I => Formula::imp(u.clone(), sub_transform(u, &pv, space)),
        Statement::II => Formula::imp(sub_transform(u, &pv, space), u.clone()),
        Statement::III => Formula::imp(u.clone(), sup_transform(u, &pv, space)),
        Statement::IV => Formula::imp(sup_transform(u, &pv, space), u.clone()),
    };
    let guard = GroundExpr::Lle(Box::new(pv), Box::new(GroundExpr::var(&n)));
    let guarded = Formula::hook(guard, GroundExpr::nat(1), body);
    let range = space
        .conditions
        .iter()
        .cloned()
        .map(GroundValue::Cond)
        .collect();
    Formula::forall_fin(p, range, Formula::forall_int(n, space.int_bound, guarded))
}

#[derive(Debug, Clone)]
pub struct PipelineInputs {
    pub phi0: Term,
    pub formula: Formula,
    pub h: Term,
    pub delta: Term,
}

impl PipelineInputs {
    /// Identity stubs for H and Δ.
    pub fn with_stubs(phi0: Term, formula: Formula) -> Self {
        PipelineInputs {
            phi0,
            formula,
            h: Term::comb(Comb::I),
            delta: Term::comb(Comb::I),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("{0} is not closed")]
    NotClosed(&'static str),
    #[error("{0} is not proof-like")]
    NotProofLike(&'static str),
    #[error("cannot star Φ₁: {0}")]
    Star(#[from] StarError),
}

fn check_input(name: &'static str, t: &Term) -> Result<(), ExtractError> {
    if !t.is_proof_like() {
        return Err(ExtractError::NotProofLike(name));
    }
    if !t.is_closed() {
        return Err(ExtractError::NotClosed(name));
    }
    Ok(())
}

/// Φ₁ = λx(Φ₀)(H)x.
pub fn phi1(phi0: &Term, h: &Term) -> Term {
    compile_template(
        "\\x. phi0 (h x)",
        &[("phi0", phi0.clone()), ("h", h.clone())],
    )
}

/// Φ = (τ¹_F)0̄Ψ with Ψ = CΦ₁*Δ.
pub fn extract(inputs: &PipelineInputs) -> Result<Term, ExtractError> {
    check_input("phi0", &inputs.phi0)?;
    check_input("h", &inputs.h)?;
    check_input("delta", &inputs.delta)?;
    let phi1_star = star(&phi1(&inputs.phi0, &inputs.h))?;
    let psi = Term::app(
        Term::app(Term::comb(Comb::C), phi1_star),
        inputs.delta.clone(),
    );
    Ok(Term::app(
        Term::app(tau(true, &inputs.formula), zero()),
        psi,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinators::numeral;
    use crate::kam::{behavioral_numeral, passes_through, run_until};
    use crate::pole::Membership;
    use crate::star::{star_numeral, starred};
    use crate::truth::{parse_formula, realizes, Interp};
    use crate::{Process, Stack};

    fn k(s: &str) -> Term {
        Term::constant(s)
    }

    fn rho() -> Stack {
        Stack::constant("rho")
    }

    #[test]
    fn t0_is_exact() {
        for n in 0..=10 {
            let start = Process::new(t0(), Stack::from_terms([k("z"), numeral(n)], rho()));
            let target = Process::new(k("z"), Stack::push(star_numeral(n), rho()));
            assert!(passes_through(&start, &target, 100_000), "n = {n}");
        }
        let zs = Term::app(
            Term::app(Term::comb(Comb::C), starred(Comb::K)),
            starred(Comb::I),
        );
        let start = Process::new(t0(), Stack::from_terms([k("z"), numeral(0)], rho()));
        assert!(passes_through(
            &start,
            &Process::new(k("z"), Stack::push(zs, rho())),
            1000
        ));
    }

    #[test]
    fn t1_is_behavioral() {
        for n in 0..=10 {
            let start = Process::new(t1(), Stack::from_terms([k("z"), star_numeral(n)], rho()));
            let (hit, _) = run_until(
                &start,
                100_000,
                |p| matches!(p.head.kind(), crate::term::TermKind::Const(c) if c.as_str() == "z"),
            )
            .expect("reaches the probe");
            let (nu, rest) = hit.stack.pop().expect("one argument");
            assert_eq!(*rest, rho());
            assert_eq!(behavioral_numeral(nu, 100_000), Ok(n));
        }
    }

    #[test]
    fn collapse_laws() {
        let (th0, th1) = collapse_realizers();
        assert!(th0.is_proof_like() && th0.is_closed());
        assert!(th1.is_proof_like() && th1.is_closed());
        let start = Process::new(th0, Stack::from_terms([k("nu"), k("kap"), k("xi")], rho()));
        assert!(passes_through(
            &start,
            &Process::new(k("xi"), Stack::push(k("nu"), rho())),
            100
        ));
        for n in 0..=10 {
            let start = Process::new(
                th1.clone(),
                Stack::from_terms([numeral(n), k("eta")], rho()),
            );
            let (hit, _) = run_until(
                &start,
                100_000,
                |p| matches!(p.head.kind(), crate::term::TermKind::Const(c) if c.as_str() == "eta"),
            )
            .expect("reaches η");
            let terms: Vec<&Term> = hit.stack.iter().collect();
            assert_eq!(terms.len(), 2);
            assert_eq!(behavioral_numeral(terms[0], 100_000), Ok(n + 1));
            assert_eq!(*terms[1], star_numeral(n));
        }
    }

    #[test]
    fn theta_cases() {
        let bot = Formula::bot();
        let id2 = compile_template("\\n.\\x. x", &[]);
        assert_eq!(theta(false, &bot), id2);
        let hook = parse_formula("[0=1]=> F").unwrap();
        assert_eq!(theta(false, &hook), theta(false, &bot));
        let imp = Formula::imp(Formula::top(), Formula::bot());
        let expect = compile_template(
            "\\n.\\x.\\y. (tw n) (x (tv n y))",
            &[
                ("tw", theta(true, &bot)),
                ("tv", tau(false, &Formula::top())),
            ],
        );
        assert_eq!(theta(true, &imp), expect);
        assert_eq!(
            tau(false, &bot),
            compile_template("\\n.\\x.\\m. t m x", &[("t", id2.clone())])
        );
        assert_eq!(
            tau(true, &bot),
            compile_template("\\n.\\x. (t n) (x n)", &[("t", id2)])
        );
    }

    #[test]
    fn tau1_top_passes_argument_through() {
        let t = tau(true, &Formula::top());
        let start = Process::new(t, Stack::from_terms([zero(), k("xi")], rho()));
        assert!(passes_through(
            &start,
            &Process::new(k("xi"), Stack::push(zero(), rho())),
            1000
        ));
    }

    #[test]
    fn generators_are_closed_and_proof_like() {
        let f = parse_formula("(forall_int^5 n. [n=0]=> F) -> (T -> F) -> forall x in {0,1}. F")
            .unwrap();
        let mut g = Generator::new();
        for kind in Kind::ALL {
            let t = g.generate(kind, &f);
            assert!(t.is_closed() && t.is_proof_like(), "{kind}");
        }
    }

    #[test]
    fn extract_stub_shape() {
        let i = Term::comb(Comb::I);
        let out = extract(&PipelineInputs::with_stubs(i.clone(), Formula::bot())).unwrap();
        let phi1 = compile_template("\\x. (I)(I) x", &[]);
        let expect = Term::app(
            Term::app(tau(true, &Formula::bot()), zero()),
            Term::app(Term::app(Term::comb(Comb::C), star(&phi1).unwrap()), i),
        );
        assert_eq!(out, expect);
        assert!(out.is_proof_like());
    }

    #[test]
    fn extract_rejects_continuations() {
        let bad = Term::cont(Stack::constant("p"));
        let inputs = PipelineInputs::with_stubs(bad, Formula::bot());
        assert_eq!(extract(&inputs), Err(ExtractError::NotProofLike("phi0")));
        let open = PipelineInputs::with_stubs(Term::var("x"), Formula::bot());
        assert_eq!(extract(&open), Err(ExtractError::NotClosed("phi0")));
    }

    #[test]
    fn lemma_statements_at_decidable_instances() {
        let space = Space::default();
        let interp = Interp::empty_pole();
        for src in ["T", "[0=1]=> T", "[0=0]=> T"] {
            let u = parse_formula(src).unwrap();
            for s in Statement::ALL {
                let f = lemma_statement(s, &u, &space);
                let r = generate(s.realizer_kind(), &u);
                assert_eq!(
                    realizes(&r, &f, &interp),
                    Ok(Membership::Yes),
                    "{src} ({})",
                    s.label()
                );
            }
        }
    }
}
