//! Forcing conditions, the star transform and the extended algebra
//! B = A × P.
//!
//! B only ever needs its first components run on the A machine: every B
//! operation acts componentwise, with the condition parts combined by meet.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::combinators::{iter_apply, numeral, succ};
use crate::compile::{compile_str, compile_template};
use crate::kam::{step, StepResult};
use crate::pole::{Membership, Pole};
use crate::syntax::{parse_cterm, print_condition};
use crate::term::{fresh_name, Comb, Process, Stack, Term, TermKind};

/// An element of P: a finite sequence, or the false condition O.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    Bottom,
    Seq(Arc<[u64]>),
}

impl Condition {
    /// The greatest condition, the empty sequence.
    pub fn one() -> Condition {
        Condition::Seq(Arc::from([]))
    }

    pub fn seq(v: impl Into<Arc<[u64]>>) -> Condition {
        Condition::Seq(v.into())
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Condition::Bottom)
    }

    /// Length of the sequence; `None` for O.
    pub fn domain(&self) -> Option<usize> {
        match self {
            Condition::Bottom => None,
            Condition::Seq(v) => Some(v.len()),
        }
    }
}

impl fmt::Debug for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_condition(self))
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_condition(self))
    }
}

/// Greatest lower bound: the longer sequence when one extends the other,
/// O otherwise.
pub fn meet(p: &Condition, q: &Condition) -> Condition {
    match (p, q) {
        (Condition::Seq(a), Condition::Seq(b)) => {
            let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
            if long.starts_with(short) {
                Condition::Seq(long.clone())
            } else {
                Condition::Bottom
            }
        }
        _ => Condition::Bottom,
    }
}

pub fn meet_all<'a, I: IntoIterator<Item = &'a Condition>>(cs: I) -> Condition {
    cs.into_iter()
        .fold(Condition::one(), |acc, c| meet(&acc, c))
}

/// `(p ≤ n)`: 1 iff p ≠ O and its domain is at most n.
pub fn lle(p: &Condition, n: u64) -> u64 {
    match p.domain() {
        Some(d) if (d as u64) <= n => 1,
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StarError {
    #[error("star is only defined on closed combinator terms, found {0}")]
    OutsideDomain(String),
}

/// The starred combinators and the printed combinator forms that are
/// checked against them.
#[derive(Debug, Clone)]
pub struct StarEntry {
    pub name: &'static str,
    pub comb: Comb,
    /// Compiled from the λ-form; this is what `star` uses.
    pub term: Term,
    pub printed: Term,
}

fn lambda(src: &str) -> Term {
    compile_str(src).unwrap_or_else(|e| panic!("built-in λ-term {src:?}: {e}"))
}

fn cterm(src: &str) -> Term {
    parse_cterm(src).unwrap_or_else(|e| panic!("built-in term {src:?}: {e}"))
}

pub fn star_table() -> &'static [StarEntry] {
    static TABLE: OnceLock<Vec<StarEntry>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let e = |name, comb, lam: &str, printed: &str| StarEntry {
            name,
            comb,
            term: lambda(lam),
            printed: cterm(printed),
        };
        vec![
            e(
                "B*",
                Comb::B,
                "\\n.\\x.\\y.\\z. (x n)(C) y z",
                "((C)(BC)(C)(B)(BB)B)C",
            ),
            e("C*", Comb::C, "\\n.\\x.\\y.\\z. (x) n z y", "(C)(B)C"),
            e("I*", Comb::I, "\\n.\\x. (x) n", "C I"),
            e("K*", Comb::K, "\\n.\\x.\\y. (x) n", "(C)(B)K"),
            e("W*", Comb::W, "\\n.\\x.\\y. (x) n y y", "(C)(B)W"),
            e(
                "cc*",
                Comb::Cc,
                "\\n.\\x. (cc) \\k. (x n) \\n.\\x. (k)(x) n",
                "((C)((C)((B)((B)(B)C)C)(C)(B)((B)(B)((B)(B)cc)B)B)C)B",
            ),
        ]
    })
}

pub fn starred(c: Comb) -> Term {
    star_table()
        .iter()
        .find(|e| e.comb == c)
        .expect("every combinator starred")
        .term
        .clone()
}

/// σ* = star(σ).
pub fn sigma_star() -> Term {
    static S: OnceLock<Term> = OnceLock::new();
    S.get_or_init(|| star(&succ()).expect("σ is a closed combinator term"))
        .clone()
}

/// 0̄* = C K* I*.
pub fn zero_star() -> Term {
    Term::app(
        Term::app(Term::comb(Comb::C), starred(Comb::K)),
        starred(Comb::I),
    )
}

/// n̄* = (C σ*)ⁿ 0̄*.
pub fn star_numeral(n: usize) -> Term {
    iter_apply(
        &Term::app(Term::comb(Comb::C), sigma_star()),
        n,
        &zero_star(),
    )
}

/// Starred atom by its surface name (`B*`, …, `cc*`, `s*`).
pub fn starred_by_name(name: &str) -> Option<Term> {
    if name == "s*" {
        return Some(sigma_star());
    }
    star_table()
        .iter()
        .find(|e| e.name == name)
        .map(|e| e.term.clone())
}

/// Surface name of `t` when it is one of the starred atoms.
pub fn name_of_starred(t: &Term) -> Option<&'static str> {
    if t.is_atom() {
        return None;
    }
    for e in star_table() {
        if e.term == *t {
            return Some(e.name);
        }
    }
    if *t == sigma_star() {
        return Some("s*");
    }
    None
}

/// k*_π = λnλx(k_π)(x)n.
pub fn k_star(pi: &Stack) -> Term {
    compile_template("\\n.\\x. (k)(x) n", &[("k", Term::cont(pi.clone()))])
}

/// The printed form (C)(B)k_π.
pub fn k_star_printed(pi: &Stack) -> Term {
    Term::app(
        Term::comb(Comb::C),
        Term::app(Term::comb(Comb::B), Term::cont(pi.clone())),
    )
}

/// τ ↦ τ*: combinators to their starred versions, `(tu)* = C t* u*`.
pub fn star(t: &Term) -> Result<Term, StarError> {
    match t.kind() {
        TermKind::Comb(c) => Ok(starred(*c)),
        TermKind::App(f, a) => Ok(Term::app(
            Term::app(Term::comb(Comb::C), star(f)?),
            star(a)?,
        )),
        _ => Err(StarError::OutsideDomain(t.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BTerm(pub Term, pub Condition);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BStack(pub Stack, pub Condition);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BProcess(pub Process, pub Condition);

impl fmt::Display for BProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} , {})", self.0, self.1)
    }
}

/// `(ξ,p).(π,q) = (ξ.π, pq)`
pub fn b_push(t: &BTerm, s: &BStack) -> BStack {
    BStack(Stack::push(t.0.clone(), s.0.clone()), meet(&t.1, &s.1))
}

/// `(ξ,p) ⋆ (π,q) = (ξ ⋆ π, pq)`
pub fn b_process(t: &BTerm, s: &BStack) -> BProcess {
    BProcess(Process::new(t.0.clone(), s.0.clone()), meet(&t.1, &s.1))
}

/// `(ξ,p)(η,q) = (C ξ η, pq)`
pub fn b_app(t: &BTerm, u: &BTerm) -> BTerm {
    BTerm(
        Term::app(Term::app(Term::comb(Comb::C), t.0.clone()), u.0.clone()),
        meet(&t.1, &u.1),
    )
}

/// A combinator of B: `(X*, 1)`.
pub fn b_lift(c: Comb) -> BTerm {
    BTerm(starred(c), Condition::one())
}

/// `k_(π,p) = (k*_π, p)`
pub fn b_cont(s: &BStack) -> BTerm {
    BTerm(k_star(&s.0), s.1.clone())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BStep {
    Next(BProcess),
    Stuck(crate::kam::StuckReason),
}

/// One step on the first component, the condition carried along.
pub fn b_step(bp: &BProcess) -> BStep {
    match step(&bp.0) {
        StepResult::Next(q) => BStep::Next(BProcess(q, bp.1.clone())),
        StepResult::Stuck(r) => BStep::Stuck(r),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BMember {
    InBot,
    /// `ξ ⋆ n̄.π` is outside the pole for this n.
    NotInBot(u64),
    Unknown,
}

impl fmt::Display for BMember {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BMember::InBot => f.write_str("in"),
            BMember::NotInBot(n) => write!(f, "not-in (witness n = {n})"),
            BMember::Unknown => f.write_str("unknown"),
        }
    }
}

/// The window `dom(p) .. dom(p)+6`, or an empty window for O.
pub fn default_window(p: &Condition) -> Range<u64> {
    match p.domain() {
        Some(d) => d as u64..d as u64 + 6,
        None => 0..0,
    }
}

/// Decide `(ξ⋆π, p) ∈ ⊥_B`, i.e. `ξ ⋆ n̄.π ∈ ⊥` for every n with `(p ≤ n) = 1`.
///
/// Every n of the window is tried; a failure is a witness. If nothing in
/// the window fails, the process is run once more with a fresh inert
/// parameter in place of n̄, and a pole answer that never looked at the
/// parameter holds for every n.
pub fn bbot_member(bp: &BProcess, pole: &Pole, window: Range<u64>, budget: usize) -> BMember {
    let BProcess(proc_, p) = bp;
    if p.is_bottom() {
        return BMember::InBot;
    }
    for n in window {
        if lle(p, n) == 0 {
            continue;
        }
        let probe = Process::new(
            proc_.head.clone(),
            Stack::push(numeral(n as usize), proc_.stack.clone()),
        );
        if pole.member_with_budget(&probe, budget) == Membership::No {
            return BMember::NotInBot(n);
        }
    }
    let taken: BTreeSet<_> = proc_.constants();
    let nu = fresh_name("nu", &taken);
    let generic = Process::new(
        proc_.head.clone(),
        Stack::push(Term::constant(nu.clone()), proc_.stack.clone()),
    );
    match pole.member_uniform(&generic, &nu, budget) {
        Membership::Yes => BMember::InBot,
        _ => BMember::Unknown,
    }
}

/// One verification clause of the extended algebra: if the left process is
/// outside ⊥_B then so is the right one.
#[derive(Debug, Clone)]
pub struct Clause {
    pub name: &'static str,
    pub lhs: BProcess,
    pub rhs: BProcess,
}

/// Components of a clause instance, one per letter of the clause statements.
#[derive(Debug, Clone)]
pub struct ClauseArgs {
    pub xi: Term,
    pub eta: Term,
    pub zeta: Term,
    pub pi: Stack,
    pub varpi: Stack,
    pub p: Condition,
    pub q: Condition,
    pub r: Condition,
    pub s: Condition,
}

pub fn clauses(a: &ClauseArgs) -> Vec<Clause> {
    let pq = meet(&a.p, &a.q);
    let pr = meet(&a.p, &a.r);
    let pqr = meet(&pq, &a.r);
    let pqrs = meet(&pqr, &a.s);
    let st = |ts: &[&Term], base: &Stack| {
        Stack::from_terms(ts.iter().map(|t| (*t).clone()), base.clone())
    };
    let bp = |h: Term, s: Stack, c: &Condition| BProcess(Process::new(h, s), c.clone());
    let c_app =
        |x: &Term, y: &Term| Term::app(Term::app(Term::comb(Comb::C), x.clone()), y.clone());
    let (xi, eta, zeta, pi) = (&a.xi, &a.eta, &a.zeta, &a.pi);
    vec![
        Clause {
            name: "app",
            lhs: bp(c_app(xi, eta), pi.clone(), &pqr),
            rhs: bp(xi.clone(), st(&[eta], pi), &pqr),
        },
        Clause {
            name: "B*",
            lhs: bp(starred(Comb::B), st(&[xi, eta, zeta], pi), &pqrs),
            rhs: bp(xi.clone(), st(&[&c_app(eta, zeta)], pi), &pqrs),
        },
        Clause {
            name: "C*",
            lhs: bp(starred(Comb::C), st(&[xi, eta, zeta], pi), &pqrs),
            rhs: bp(xi.clone(), st(&[zeta, eta], pi), &pqrs),
        },
        Clause {
            name: "I*",
            lhs: bp(starred(Comb::I), st(&[xi], pi), &pq),
            rhs: bp(xi.clone(), pi.clone(), &pq),
        },
        Clause {
            name: "K*",
            lhs: bp(starred(Comb::K), st(&[xi, eta], pi), &pqr),
            rhs: bp(xi.clone(), pi.clone(), &pr),
        },
        Clause {
            name: "W*",
            lhs: bp(starred(Comb::W), st(&[xi, eta], pi), &pqr),
            rhs: bp(xi.clone(), st(&[eta, eta], pi), &pqr),
        },
        Clause {
            name: "cc*",
            lhs: bp(starred(Comb::Cc), st(&[xi], pi), &pq),
            rhs: bp(xi.clone(), st(&[&k_star(pi)], pi), &pq),
        },
        Clause {
            name: "k*",
            lhs: bp(k_star(pi), st(&[xi], &a.varpi), &pqr),
            rhs: bp(xi.clone(), pi.clone(), &pq),
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClauseVerdict {
    Holds,
    Violated,
    Undecided,
}

/// Evaluate "lhs ∉ ⊥_B ⇒ rhs ∉ ⊥_B" with each side's default window.
pub fn check_clause(c: &Clause, pole: &Pole, budget: usize) -> ClauseVerdict {
    let l = bbot_member(&c.lhs, pole, default_window(&c.lhs.1), budget);
    if l == BMember::InBot {
        return ClauseVerdict::Holds;
    }
    let r = bbot_member(&c.rhs, pole, default_window(&c.rhs.1), budget);
    match (l, r) {
        (_, BMember::NotInBot(_)) => ClauseVerdict::Holds,
        (BMember::NotInBot(_), BMember::InBot) => ClauseVerdict::Violated,
        _ => ClauseVerdict::Undecided,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kam::run;
    use crate::syntax::parse_process;

    fn seq(v: &[u64]) -> Condition {
        Condition::seq(v)
    }

    #[test]
    fn meet_examples() {
        assert_eq!(meet(&Condition::one(), &seq(&[4])), seq(&[4]));
        assert_eq!(meet(&seq(&[3]), &seq(&[3, 5])), seq(&[3, 5]));
        assert_eq!(meet(&seq(&[3]), &seq(&[4])), Condition::Bottom);
        assert_eq!(
            meet(&Condition::Bottom, &Condition::one()),
            Condition::Bottom
        );
    }

    #[test]
    fn lle_examples() {
        assert_eq!(lle(&Condition::Bottom, 5), 0);
        assert_eq!(lle(&Condition::one(), 0), 1);
        assert_eq!(lle(&seq(&[7, 2]), 1), 0);
        assert_eq!(lle(&seq(&[7, 2]), 2), 1);
    }

    #[test]
    fn star_of_zero() {
        assert_eq!(star(&numeral(0)).unwrap(), zero_star());
        for n in 0..5 {
            assert_eq!(star(&numeral(n)).unwrap(), star_numeral(n));
        }
    }

    #[test]
    fn star_rejects_non_combinators() {
        assert!(star(&Term::var("x")).is_err());
        assert!(star(&Term::constant("a")).is_err());
        assert!(star(&Term::cont(Stack::constant("p"))).is_err());
    }

    #[test]
    fn starred_terms_are_proof_like() {
        for e in star_table() {
            assert!(e.term.is_proof_like() && e.term.is_closed(), "{}", e.name);
        }
    }

    #[test]
    fn b_operations() {
        let x = BTerm(Term::constant("x"), seq(&[1]));
        let s = BStack(Stack::constant("p"), seq(&[1, 2]));
        assert_eq!(b_push(&x, &s).1, seq(&[1, 2]));
        assert_eq!(b_lift(Comb::K), BTerm(starred(Comb::K), Condition::one()));
        assert_eq!(b_cont(&s), BTerm(k_star(&s.0), seq(&[1, 2])));
        let app = b_app(&x, &x);
        assert_eq!(app.0.to_string(), "(C #x) #x");
    }

    #[test]
    fn bottom_condition_is_in() {
        let p = parse_process("I * %p").unwrap();
        let bp = BProcess(p, Condition::Bottom);
        assert_eq!(bbot_member(&bp, &Pole::Empty, 0..6, 1000), BMember::InBot);
    }

    #[test]
    fn empty_pole_refutes_at_zero() {
        let p = parse_process("I * %p").unwrap();
        let bp = BProcess(p, Condition::one());
        assert_eq!(
            bbot_member(&bp, &Pole::Empty, 0..6, 1000),
            BMember::NotInBot(0)
        );
    }

    #[test]
    fn halting_on_fixed_numeral_is_in_for_every_n() {
        let p = parse_process("#d {0} * %pi0").unwrap();
        let bp = BProcess(p, Condition::one());
        let pole = Pole::Thread {
            i: 0,
            j: 0,
            depth: 8,
        };
        assert_eq!(bbot_member(&bp, &pole, 0..6, 1000), BMember::InBot);
    }

    #[test]
    fn cc_star_law_form() {
        let pi = Stack::constant("p");
        let n = numeral(2);
        let start = Process::new(
            starred(Comb::Cc),
            Stack::from_terms([n.clone(), Term::constant("x")], pi.clone()),
        );
        let t = run(&start, 1000);
        let last = t.last();
        assert_eq!(last.head, Term::constant("x"));
        assert_eq!(last.stack.iter().next(), Some(&n));
        assert_eq!(last.stack.iter().nth(1), Some(&k_star(&pi)));
    }
}
