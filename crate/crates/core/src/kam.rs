//! The weak head machine on processes `ξ ⋆ π`.
//!
//! The execution rules are non-overlapping: the head constructor picks at
//! most one rule, so `≻` is the reflexive transitive closure of a
//! deterministic step function. A state that no rule applies to is stuck,
//! and stuck is terminal.

use std::fmt;

use crate::syntax::{print_process, PrintOptions};
use crate::term::{fresh_name, Comb, Name, Process, Stack, Term, TermKind};

pub const DEFAULT_BUDGET: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StuckReason {
    /// Head is an instruction constant or a free variable.
    InertConstant,
    /// A combinator saw some, but not enough, arguments.
    Underflow,
    /// A combinator or continuation saw a bare stack constant.
    BareStackConstant,
}

impl StuckReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StuckReason::InertConstant => "inert-constant",
            StuckReason::Underflow => "underflow",
            StuckReason::BareStackConstant => "bare-stack-constant",
        }
    }
}

impl fmt::Display for StuckReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Next(Process),
    Stuck(StuckReason),
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    Stuck(StuckReason),
    Budget,
}

impl Terminal {
    pub fn is_stuck(self) -> bool {
        matches!(self, Terminal::Stuck(_))
    }
}

pub fn step(p: &Process) -> StepResult {
    let pi = &p.stack;
    match p.head.kind() {
        TermKind::App(f, a) => {
            StepResult::Next(Process::new(f.clone(), Stack::push(a.clone(), pi.clone())))
        }
        TermKind::Const(_) | TermKind::Var(_) => StepResult::Stuck(StuckReason::InertConstant),
        TermKind::Cont(saved) => match pi.pop() {
            Some((xi, _)) => StepResult::Next(Process::new(xi.clone(), saved.clone())),
            None => StepResult::Stuck(StuckReason::BareStackConstant),
        },
        TermKind::Comb(c) => {
            if pi.is_bare() {
                return StepResult::Stuck(StuckReason::BareStackConstant);
            }
            let mut args: [Option<&Term>; 3] = [None; 3];
            let mut rest = pi;
            for slot in args.iter_mut().take(c.arity()) {
                match rest.pop() {
                    Some((t, r)) => {
                        *slot = Some(t);
                        rest = r;
                    }
                    None => return StepResult::Stuck(StuckReason::Underflow),
                }
            }
            let arg = |i: usize| args[i].expect("arity checked").clone();
            let next = match c {
                Comb::I => Process::new(arg(0), rest.clone()),
                Comb::K => Process::new(arg(0), rest.clone()),
                Comb::W => Process::new(
                    arg(0),
                    Stack::push(arg(1), Stack::push(arg(1), rest.clone())),
                ),
                Comb::C => Process::new(
                    arg(0),
                    Stack::push(arg(2), Stack::push(arg(1), rest.clone())),
                ),
                Comb::B => {
                    Process::new(arg(0), Stack::push(Term::app(arg(1), arg(2)), rest.clone()))
                }
                Comb::Cc => {
                    Process::new(arg(0), Stack::push(Term::cont(rest.clone()), rest.clone()))
                }
            };
            StepResult::Next(next)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    /// Every visited state, the start first.
    pub states: Vec<Process>,
    pub terminal: Terminal,
}

impl Trace {
    pub fn last(&self) -> &Process {
        self.states.last().expect("trace holds its start state")
    }

    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn contains(&self, q: &Process) -> bool {
        self.states.iter().any(|s| s == q)
    }

    /// Text rendering, one `STEP` line per state and a terminal line. With
    /// `keep = Some(n)` only the first and last `n` states are printed.
    pub fn render(&self, opts: &PrintOptions, keep: Option<usize>) -> String {
        let mut out = String::new();
        let total = self.states.len();
        for (k, s) in self.states.iter().enumerate() {
            if let Some(n) = keep {
                if total > 2 * n && k >= n && k < total - n {
                    if k == n {
                        out.push_str(&format!("... {} states elided\n", total - 2 * n));
                    }
                    continue;
                }
            }
            out.push_str(&format!("STEP {k}: {}\n", print_process(s, opts)));
        }
        match self.terminal {
            Terminal::Stuck(r) => out.push_str(&format!("STUCK {r}\n")),
            Terminal::Budget => out.push_str("BUDGET\n"),
        }
        out
    }
}

/// Run until stuck or until `budget` steps have been taken, recording every
/// state.
pub fn run(p: &Process, budget: usize) -> Trace {
    let mut states = vec![p.clone()];
    loop {
        if states.len() > budget {
            return Trace {
                states,
                terminal: Terminal::Budget,
            };
        }
        match step(states.last().expect("nonempty")) {
            StepResult::Next(q) => states.push(q),
            StepResult::Stuck(r) => {
                return Trace {
                    states,
                    terminal: Terminal::Stuck(r),
                }
            }
        }
    }
}

/// Outcome of a run that only keeps the last state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Final {
    pub state: Process,
    pub terminal: Terminal,
    pub steps: usize,
}

pub fn run_final(p: &Process, budget: usize) -> Final {
    let mut cur = p.clone();
    let mut steps = 0;
    loop {
        if steps >= budget {
            return Final {
                state: cur,
                terminal: Terminal::Budget,
                steps,
            };
        }
        match step(&cur) {
            StepResult::Next(q) => {
                cur = q;
                steps += 1;
            }
            StepResult::Stuck(r) => {
                return Final {
                    state: cur,
                    terminal: Terminal::Stuck(r),
                    steps,
                }
            }
        }
    }
}

/// Run until `pred` holds for a state (checked on the start state too).
/// Returns that state and the number of steps taken to reach it.
pub fn run_until<F>(p: &Process, budget: usize, mut pred: F) -> Option<(Process, usize)>
where
    F: FnMut(&Process) -> bool,
{
    let mut cur = p.clone();
    let mut steps = 0;
    loop {
        if pred(&cur) {
            return Some((cur, steps));
        }
        if steps >= budget {
            return None;
        }
        match step(&cur) {
            StepResult::Next(q) => {
                cur = q;
                steps += 1;
            }
            StepResult::Stuck(_) => return None,
        }
    }
}

/// True iff `q` lies on the trace of `p` within `budget` steps.
pub fn passes_through(p: &Process, q: &Process, budget: usize) -> bool {
    run_until(p, budget, |s| s == q).is_some()
}

/// Why a term failed to behave as a numeral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumeralFail {
    Budget,
    Shape,
}

/// Count how many times ν applies a probe before reaching its base case.
///
/// With fresh inert constants φ̂, α̂ and a fresh stack constant ρ̂, runs
/// `ν ⋆ φ̂.α̂.ρ̂`; every stop at `φ̂ ⋆ w.ρ̂` counts one and resumes from
/// `w ⋆ ρ̂`, and a stop at `α̂ ⋆ ρ̂` returns the count.
pub fn behavioral_numeral(nu: &Term, budget: usize) -> Result<usize, NumeralFail> {
    let taken = nu.constants();
    let mut stack_taken = std::collections::BTreeSet::new();
    nu.collect_stack_consts(&mut stack_taken);
    let phi = fresh_name("phi", &taken);
    let alpha = fresh_name("alpha", &taken);
    let rho = fresh_name("rho", &stack_taken);
    behavioral_numeral_with(nu, &phi, &alpha, &rho, budget)
}

fn behavioral_numeral_with(
    nu: &Term,
    phi: &Name,
    alpha: &Name,
    rho: &Name,
    budget: usize,
) -> Result<usize, NumeralFail> {
    let rho_s = Stack::constant(rho.clone());
    let start = Stack::push(
        Term::constant(phi.clone()),
        Stack::push(Term::constant(alpha.clone()), rho_s.clone()),
    );
    let mut cur = Process::new(nu.clone(), start);
    let mut left = budget;
    let mut count = 0;
    loop {
        let fin = run_final(&cur, left);
        if fin.terminal == Terminal::Budget {
            return Err(NumeralFail::Budget);
        }
        left -= fin.steps;
        let is_const = |t: &Term, n: &Name| matches!(t.kind(), TermKind::Const(c) if c == n);
        let st = &fin.state;
        if is_const(&st.head, alpha) && st.stack == rho_s {
            return Ok(count);
        }
        if is_const(&st.head, phi) {
            if let Some((w, rest)) = st.stack.pop() {
                if *rest == rho_s {
                    count += 1;
                    cur = Process::new(w.clone(), rho_s.clone());
                    continue;
                }
            }
        }
        return Err(NumeralFail::Shape);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinators::numeral;

    fn k(n: &str) -> Term {
        Term::constant(n)
    }

    fn pi() -> Stack {
        Stack::constant("p")
    }

    fn stack(ts: &[Term]) -> Stack {
        Stack::from_terms(ts.iter().cloned(), pi())
    }

    fn comb(c: Comb) -> Term {
        Term::comb(c)
    }

    #[test]
    fn k_drops_second() {
        let p = Process::new(comb(Comb::K), stack(&[k("x"), k("y")]));
        assert_eq!(step(&p), StepResult::Next(Process::new(k("x"), pi())));
    }

    #[test]
    fn cc_captures_stack() {
        let p = Process::new(comb(Comb::Cc), stack(&[k("x")]));
        let expect = Process::new(k("x"), Stack::push(Term::cont(pi()), pi()));
        assert_eq!(step(&p), StepResult::Next(expect));
    }

    #[test]
    fn constant_head_is_inert() {
        let p = Process::new(k("d"), pi());
        assert_eq!(step(&p), StepResult::Stuck(StuckReason::InertConstant));
    }

    #[test]
    fn stuck_kinds() {
        assert_eq!(
            step(&Process::new(comb(Comb::B), stack(&[k("x")]))),
            StepResult::Stuck(StuckReason::Underflow)
        );
        assert_eq!(
            step(&Process::new(comb(Comb::I), pi())),
            StepResult::Stuck(StuckReason::BareStackConstant)
        );
        assert_eq!(
            step(&Process::new(Term::cont(pi()), pi())),
            StepResult::Stuck(StuckReason::BareStackConstant)
        );
    }

    #[test]
    fn run_identity() {
        let t = run(&Process::new(comb(Comb::I), stack(&[k("a")])), 10);
        assert_eq!(t.terminal, Terminal::Stuck(StuckReason::InertConstant));
        assert_eq!(t.last(), &Process::new(k("a"), pi()));
        assert_eq!(t.steps(), 1);
    }

    #[test]
    fn budget_is_respected() {
        let w = comb(Comb::W);
        let delta = Term::app(w.clone(), comb(Comb::I));
        let omega = Process::new(delta.clone(), stack(&[delta]));
        let t = run(&omega, 25);
        assert_eq!(t.terminal, Terminal::Budget);
        assert_eq!(t.steps(), 25);
        let f = run_final(&omega, 25);
        assert_eq!(&f.state, t.last());
    }

    #[test]
    fn zero_reaches_base() {
        let p = Process::new(numeral(0), stack(&[k("f"), k("a")]));
        assert!(passes_through(&p, &Process::new(k("a"), pi()), 100));
    }

    #[test]
    fn behavioral_numerals() {
        assert_eq!(behavioral_numeral(&numeral(0), 1000), Ok(0));
        assert_eq!(behavioral_numeral(&numeral(2), 1000), Ok(2));
        assert_eq!(
            behavioral_numeral(&comb(Comb::K), 1000),
            Err(NumeralFail::Shape)
        );
    }

    #[test]
    fn fresh_probes_avoid_input_constants() {
        let nu = Term::app(comb(Comb::K), k("phi"));
        assert!(behavioral_numeral(&nu, 100).is_err());
    }

    #[test]
    fn trace_render_format() {
        let t = run(&Process::new(comb(Comb::I), stack(&[k("a")])), 10);
        assert_eq!(
            t.render(&Default::default(), None),
            "STEP 0: I * #a . %p\nSTEP 1: #a * %p\nSTUCK inert-constant\n"
        );
    }
}
