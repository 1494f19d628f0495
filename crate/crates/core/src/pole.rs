//! Poles, and the two-threads pole built from the halting instruction `d`.
//!
//! Every oracle here answers by running the machine. Because the machine is
//! deterministic, `ξ⋆π ≻ ρ` holds exactly when ρ is on the trace of `ξ⋆π`,
//! so a pole generated by a set of states under anti-reduction is decided
//! by looking for those states on the trace. For the thread poles ⊥ᵢʲ the
//! generators all have the inert head `d`, which means only the final state
//! of a run can be one, and the least fixed point becomes a recursion on
//! majority premises.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::combinators::{as_numeral, numeral};
use crate::kam::{step, StepResult, DEFAULT_BUDGET};
use crate::term::{Name, Process, Stack, Term, TermKind};

pub const HALT: &str = "d";
pub const PI0: &str = "pi0";
pub const PI1: &str = "pi1";
pub const DEFAULT_DEPTH: u32 = 8;

pub fn thread_constant(i: u8) -> &'static str {
    if i == 0 {
        PI0
    } else {
        PI1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Membership {
    Yes,
    No,
    Unknown,
}

impl Membership {
    pub fn as_str(self) -> &'static str {
        match self {
            Membership::Yes => "yes",
            Membership::No => "no",
            Membership::Unknown => "unknown",
        }
    }

    fn and(self, other: Membership) -> Membership {
        match (self, other) {
            (Membership::No, _) | (_, Membership::No) => Membership::No,
            (Membership::Yes, Membership::Yes) => Membership::Yes,
            _ => Membership::Unknown,
        }
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A state to look for: a head and the first elements of the stack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub head: Term,
    pub prefix: Vec<Term>,
}

impl Pattern {
    fn matches(&self, p: &Process) -> bool {
        p.head == self.head
            && p.stack.iter().count() >= self.prefix.len()
            && p.stack.iter().zip(&self.prefix).all(|(a, b)| a == b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pole {
    Empty,
    Everything,
    /// Least pole containing the states matching any pattern.
    TraceTarget(Vec<Pattern>),
    /// ⊥ᵢʲ of the two-threads model.
    Thread {
        i: u8,
        j: u8,
        depth: u32,
    },
    /// The global pole of the two-threads model.
    Global {
        depth: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PoleError {
    #[error("process uses stack constant(s) {found} outside thread {i}")]
    WrongThread { i: u8, found: String },
}

/// A membership answer with the event that decided it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub answer: Membership,
    pub event: String,
    pub steps: usize,
}

impl Pole {
    pub fn member(&self, p: &Process) -> Membership {
        self.member_with_budget(p, DEFAULT_BUDGET)
    }

    pub fn member_with_budget(&self, p: &Process, budget: usize) -> Membership {
        self.query(p, None, budget).answer
    }

    /// Membership of `p` that holds for every value of the inert constant
    /// `param`: `Yes` only if the decision never depended on it.
    pub fn member_uniform(&self, p: &Process, param: &Name, budget: usize) -> Membership {
        self.query(p, Some(param), budget).answer
    }

    pub fn explain(&self, p: &Process, budget: usize) -> Verdict {
        self.query(p, None, budget)
    }

    fn query(&self, p: &Process, param: Option<&Name>, budget: usize) -> Verdict {
        match self {
            Pole::Empty => Verdict {
                answer: Membership::No,
                event: "empty pole".into(),
                steps: 0,
            },
            Pole::Everything => Verdict {
                answer: Membership::Yes,
                event: "everything pole".into(),
                steps: 0,
            },
            Pole::TraceTarget(pats) => trace_target(pats, p, param, budget),
            Pole::Thread { i, j, depth } => {
                let mut t = Threads::new(budget, param);
                match t.member(p, *i, *j, *depth) {
                    Ok(v) => v,
                    Err(e) => Verdict {
                        answer: Membership::No,
                        event: e.to_string(),
                        steps: 0,
                    },
                }
            }
            Pole::Global { depth } => {
                let mut t = Threads::new(budget, param);
                t.global(p, *depth)
            }
        }
    }
}

fn mentions(t: &Term, param: Option<&Name>) -> bool {
    param.is_some_and(|n| t.constants().contains(n))
}

fn head_is(t: &Term, n: &Name) -> bool {
    matches!(t.kind(), TermKind::Const(c) if c == n)
}

fn trace_target(pats: &[Pattern], p: &Process, param: Option<&Name>, budget: usize) -> Verdict {
    let mut cur = p.clone();
    let mut steps = 0;
    loop {
        if let Some(n) = param {
            if head_is(&cur.head, n) {
                return Verdict {
                    answer: Membership::Unknown,
                    event: "parameter reached head".into(),
                    steps,
                };
            }
        }
        if let Some(pat) = pats.iter().find(|pat| pat.matches(&cur)) {
            let dependent = mentions(&cur.head, param)
                || cur
                    .stack
                    .iter()
                    .take(pat.prefix.len())
                    .any(|t| mentions(t, param));
            if dependent {
                return Verdict {
                    answer: Membership::Unknown,
                    event: "target depends on parameter".into(),
                    steps,
                };
            }
            return Verdict {
                answer: Membership::Yes,
                event: format!("target {cur} at step {steps}"),
                steps,
            };
        }
        if steps >= budget {
            return Verdict {
                answer: Membership::Unknown,
                event: "budget exhausted".into(),
                steps,
            };
        }
        match step(&cur) {
            StepResult::Next(q) => {
                cur = q;
                steps += 1;
            }
            StepResult::Stuck(r) => {
                return Verdict {
                    answer: Membership::No,
                    event: format!("stuck ({r}) at {cur}"),
                    steps,
                };
            }
        }
    }
}

/// Stack constants of `p` that are not πⁱ.
fn foreign_constants(p: &Process, i: u8) -> BTreeSet<Name> {
    let own = Name::new(thread_constant(i));
    p.stack_constants()
        .into_iter()
        .filter(|c| *c != own)
        .collect()
}

/// Query-local evaluator for the thread poles, memoising majority premises.
struct Threads<'a> {
    budget: usize,
    param: Option<&'a Name>,
    memo: HashMap<(Process, u8, u8, u32), Verdict>,
}

impl<'a> Threads<'a> {
    fn new(budget: usize, param: Option<&'a Name>) -> Self {
        Threads {
            budget,
            param,
            memo: HashMap::new(),
        }
    }

    fn member(&mut self, p: &Process, i: u8, j: u8, depth: u32) -> Result<Verdict, PoleError> {
        let foreign = foreign_constants(p, i);
        if !foreign.is_empty() {
            let found: Vec<String> = foreign.iter().map(|n| format!("%{n}")).collect();
            return Err(PoleError::WrongThread {
                i,
                found: found.join(", "),
            });
        }
        Ok(self.thread(p, i, j, depth))
    }

    fn thread(&mut self, p: &Process, i: u8, j: u8, depth: u32) -> Verdict {
        let key = (p.clone(), i, j, depth);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let v = self.thread_uncached(p, i, j, depth);
        self.memo.insert(key, v.clone());
        v
    }

    fn thread_uncached(&mut self, p: &Process, i: u8, j: u8, depth: u32) -> Verdict {
        let unknown = |event: &str, steps| Verdict {
            answer: Membership::Unknown,
            event: event.into(),
            steps,
        };
        let halt = Name::new(HALT);
        let mut cur = p.clone();
        let mut steps = 0;
        loop {
            if let Some(n) = self.param {
                if head_is(&cur.head, n) {
                    return unknown("parameter reached head", steps);
                }
            }
            if steps >= self.budget {
                return unknown("budget exhausted", steps);
            }
            match step(&cur) {
                StepResult::Next(q) => {
                    cur = q;
                    steps += 1;
                }
                StepResult::Stuck(_) => break,
            }
        }
        let no = |event: String| Verdict {
            answer: Membership::No,
            event,
            steps,
        };
        if !head_is(&cur.head, &halt) {
            return no(format!("stopped at {cur}, not a generator"));
        }
        let Some((top, rest)) = cur.stack.pop() else {
            return no(format!("stopped at {cur}, not a generator"));
        };
        if mentions(top, self.param) {
            return unknown("generator numeral depends on parameter", steps);
        }
        let top_n = as_numeral(top);
        if top_n == Some(j as usize) {
            return Verdict {
                answer: Membership::Yes,
                event: format!("generator d * {{{j}}} reached at step {steps}"),
                steps,
            };
        }
        if top_n == Some(2) {
            let args: Vec<&Term> = rest.iter().take(3).collect();
            if args.len() == 3 {
                let base = rest.skip(3).expect("three elements present").clone();
                if depth == 0 {
                    return unknown("majority needs depth", steps);
                }
                let premises: Vec<Process> = args
                    .iter()
                    .map(|a| Process::new((*a).clone(), base.clone()))
                    .collect();
                let answer = self.majority(&premises, i, j, depth - 1);
                return Verdict {
                    answer,
                    event: format!("majority at step {steps}: {answer}"),
                    steps,
                };
            }
        }
        no(format!("stopped at {cur}, not a generator"))
    }

    /// Two yes answers make yes, two no answers make no. The third premise is
    /// only evaluated when the first two disagree or are undecided.
    fn majority(&mut self, premises: &[Process], i: u8, j: u8, depth: u32) -> Membership {
        let mut yes = 0;
        let mut no = 0;
        for p in premises {
            match self.thread(p, i, j, depth).answer {
                Membership::Yes => yes += 1,
                Membership::No => no += 1,
                Membership::Unknown => {}
            }
            if yes >= 2 {
                return Membership::Yes;
            }
            if no >= 2 {
                return Membership::No;
            }
        }
        Membership::Unknown
    }

    fn global(&mut self, p: &Process, depth: u32) -> Verdict {
        let consts = p.stack_constants();
        let c0 = Name::new(PI0);
        let c1 = Name::new(PI1);
        let only = |c: &Name| consts.iter().all(|x| x == c);
        if consts.is_empty() {
            let a = self.thread(p, 0, 0, depth);
            let b = self.thread(p, 1, 1, depth);
            let answer = a.answer.and(b.answer);
            return Verdict {
                answer,
                event: format!("both threads: {} / {}", a.event, b.event),
                steps: a.steps.max(b.steps),
            };
        }
        if only(&c0) {
            return self.thread(p, 0, 0, depth);
        }
        if only(&c1) {
            return self.thread(p, 1, 1, depth);
        }
        let event = if consts.contains(&c0) && consts.contains(&c1) {
            "contains both stack constants"
        } else {
            "outside both threads"
        };
        Verdict {
            answer: Membership::Yes,
            event: event.into(),
            steps: 0,
        }
    }
}

pub fn thread_member(
    p: &Process,
    i: u8,
    j: u8,
    depth: u32,
    budget: usize,
) -> Result<Membership, PoleError> {
    Threads::new(budget, None)
        .member(p, i, j, depth)
        .map(|v| v.answer)
}

pub fn global_member(p: &Process, depth: u32, budget: usize) -> Membership {
    Threads::new(budget, None).global(p, depth).answer
}

/// The majority clause for `d ⋆ 2̄.ξ.η.ζ.π`, evaluated on its premises directly.
#[allow(clippy::too_many_arguments)]
pub fn majority_check(
    xi: &Term,
    eta: &Term,
    zeta: &Term,
    pi: &Stack,
    i: u8,
    j: u8,
    depth: u32,
    budget: usize,
) -> Membership {
    if depth == 0 {
        return Membership::Unknown;
    }
    let premises: Vec<Process> = [xi, eta, zeta]
        .iter()
        .map(|t| Process::new((*t).clone(), pi.clone()))
        .collect();
    Threads::new(budget, None).majority(&premises, i, j, depth - 1)
}

/// `d ⋆ 2̄.ξ.η.ζ.π`
pub fn majority_process(xi: &Term, eta: &Term, zeta: &Term, pi: &Stack) -> Process {
    Process::new(
        Term::constant(HALT),
        Stack::from_terms(
            [numeral(2), xi.clone(), eta.clone(), zeta.clone()],
            pi.clone(),
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_process, parse_term};

    fn pr(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    const B: usize = 10_000;

    #[test]
    fn rule_one_generator() {
        assert_eq!(
            thread_member(&pr("#d * {0} . %pi0"), 0, 0, 8, B),
            Ok(Membership::Yes)
        );
        assert_eq!(
            thread_member(&pr("#d {0} * %pi0"), 0, 0, 8, B),
            Ok(Membership::Yes)
        );
        assert_eq!(
            thread_member(&pr("#d * {1} . %pi0"), 0, 0, 8, B),
            Ok(Membership::No)
        );
    }

    #[test]
    fn wrong_thread_is_an_error() {
        assert!(thread_member(&pr("#d * {0} . %pi1"), 0, 0, 8, B).is_err());
        let pole = Pole::Thread {
            i: 0,
            j: 0,
            depth: 8,
        };
        assert_eq!(pole.member(&pr("#d * {0} . %pi1")), Membership::No);
    }

    #[test]
    fn global_examples() {
        assert_eq!(global_member(&pr("k[%pi0] * %pi1"), 8, B), Membership::Yes);
        assert_eq!(global_member(&pr("#d * {0} . %pi0"), 8, B), Membership::Yes);
        assert_eq!(global_member(&pr("I * #a . %pi0"), 8, B), Membership::No);
        assert_eq!(global_member(&pr("#d * {1} . %pi1"), 8, B), Membership::Yes);
    }

    #[test]
    fn majority_examples() {
        let d0 = parse_term("#d {0}").unwrap();
        let i = parse_term("I").unwrap();
        let pi = Stack::constant(PI0);
        assert_eq!(
            majority_check(&d0, &d0, &i, &pi, 0, 0, 8, B),
            Membership::Yes
        );
        assert_eq!(majority_check(&i, &i, &d0, &pi, 0, 0, 8, B), Membership::No);
        let buster = parse_term("(W I)(W) I").unwrap();
        assert_eq!(
            majority_check(&d0, &i, &buster, &pi, 0, 0, 8, 500),
            Membership::Unknown
        );
        let whole = majority_process(&d0, &d0, &i, &pi);
        assert_eq!(thread_member(&whole, 0, 0, 8, B), Ok(Membership::Yes));
    }

    #[test]
    fn trace_target_pole() {
        let pole = Pole::TraceTarget(vec![Pattern {
            head: Term::constant("a"),
            prefix: vec![],
        }]);
        assert_eq!(pole.member(&pr("I * #a . %p")), Membership::Yes);
        assert_eq!(pole.member(&pr("K * #b . #a . %p")), Membership::No);
    }

    #[test]
    fn uniform_answers_ignore_dropped_parameter() {
        let pole = Pole::Thread {
            i: 0,
            j: 0,
            depth: 8,
        };
        let nu = Name::new("nu");
        assert_eq!(
            pole.member_uniform(&pr("K (#d {0}) * #nu . %pi0"), &nu, B),
            Membership::Yes
        );
        assert_eq!(
            pole.member_uniform(&pr("#d * #nu . %pi0"), &nu, B),
            Membership::Unknown
        );
        assert_eq!(
            pole.member_uniform(&pr("I * #nu . %pi0"), &nu, B),
            Membership::Unknown
        );
    }
}
