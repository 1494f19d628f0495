//! The property suite: one report per acceptance criterion, each a batch of
//! exact or behavioral checks with a time limit. Everything random is drawn
//! from a ChaCha stream seeded by the caller.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinators::{fixture, iter_apply, numeral, omega_lambda, sigma_lambda, succ, zero};
use crate::compile::{lam_many, mlbd};
use crate::derivation::{check_derivation, fuzz_malformed, parse_derivation};
use crate::kam::{behavioral_numeral, passes_through, run, run_until, step, StepResult};
use crate::pole::{
    global_member, majority_check, majority_process, thread_member, Membership, Pole,
};
use crate::realizer::{
    collapse_realizers, extract, lemma_statement, t0, t1, Generator, Kind, PipelineInputs,
    Statement,
};
use crate::star::{
    bbot_member, check_clause, clauses, default_window, k_star, k_star_printed, sigma_star, star,
    star_numeral, star_table, zero_star, BMember, ClauseArgs, ClauseVerdict, Condition,
};
use crate::term::{Comb, Name, Process, Stack, Term, TermKind};
use crate::truth::{
    check_corpus, formula_corpus, realizes, Evaluator, Formula, GroundExpr, GroundValue, Interp,
    Space, DEFAULT_INT_BOUND,
};

pub const CRITERIA: [u8; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

const BUDGET: usize = 100_000;

#[derive(Debug, Clone)]
pub struct Report {
    pub id: u8,
    pub title: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
    /// Extra measurements, such as undecided fractions.
    pub notes: Vec<String>,
    pub elapsed: Duration,
    pub limit: Option<Duration>,
}

impl Report {
    pub fn within_limit(&self) -> bool {
        self.limit.is_none_or(|l| self.elapsed <= l)
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.within_limit() && self.checks > 0
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "criterion {} {verdict}: {} ({} checks, {} failures, {:.2}s",
            self.id,
            self.title,
            self.checks,
            self.failures.len(),
            self.elapsed.as_secs_f64()
        )?;
        if let Some(l) = self.limit {
            write!(f, " of {}s", l.as_secs())?;
        }
        f.write_str(")")?;
        for n in &self.notes {
            write!(f, "; {n}")?;
        }
        Ok(())
    }
}

/// Accumulates check outcomes, keeping the first few failure messages.
struct Tally {
    checks: usize,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checks: 0,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

fn k(s: &str) -> Term {
    Term::constant(s)
}

fn rho() -> Stack {
    Stack::constant("rho")
}

fn stack(ts: &[Term], base: &Stack) -> Stack {
    Stack::from_terms(ts.iter().cloned(), base.clone())
}

fn comb(c: Comb) -> Term {
    Term::comb(c)
}

/// Reach `target` from `start`, reporting a failure otherwise.
fn expect_pass(t: &mut Tally, label: &str, start: &Process, target: &Process, budget: usize) {
    t.check(passes_through(start, target, budget), || {
        format!("{label}: {start} does not reach {target}")
    });
}

fn head_const(name: &str) -> impl Fn(&Process) -> bool + '_ {
    move |p| matches!(p.head.kind(), TermKind::Const(c) if c.as_str() == name)
}

pub fn run_criterion(id: u8, seed: u64) -> Report {
    let start = Instant::now();
    let (title, limit, tally) = match id {
        1 => ("machine rules", Some(1), machine_rules()),
        2 => ("bracket abstraction", Some(10), bracket_abstraction(seed)),
        3 => ("numeral lemmas", Some(5), numeral_lemmas()),
        4 => ("starred laws", Some(5), starred_laws()),
        5 => ("extended-pole clauses", None, pole_clauses(seed)),
        6 => ("collapsing realizers", Some(5), collapsing()),
        7 => ("two threads", Some(30), two_threads(seed)),
        8 => ("truth-value correspondence", Some(30), correspondence()),
        9 => ("generators and extraction", Some(10), generators(seed)),
        _ => {
            let mut t = Tally::new();
            t.check(false, || format!("no criterion {id}"));
            ("unknown", None, t)
        }
    };
    Report {
        id,
        title,
        checks: tally.checks,
        failures: tally.failures,
        notes: tally.notes,
        elapsed: start.elapsed(),
        limit: limit.map(Duration::from_secs),
    }
}

pub fn run_all(seed: u64) -> Vec<Report> {
    CRITERIA.iter().map(|id| run_criterion(*id, seed)).collect()
}

fn machine_rules() -> Tally {
    let mut t = Tally::new();
    let (xi, eta, zeta) = (k("xi"), k("eta"), k("zeta"));
    let pi = Stack::constant("pi");
    let varpi = Stack::constant("varpi");
    let cases = [
        (
            "push",
            Process::new(Term::app(xi.clone(), eta.clone()), pi.clone()),
            Process::new(xi.clone(), Stack::push(eta.clone(), pi.clone())),
        ),
        (
            "I",
            Process::new(comb(Comb::I), Stack::push(xi.clone(), pi.clone())),
            Process::new(xi.clone(), pi.clone()),
        ),
        (
            "K",
            Process::new(comb(Comb::K), stack(&[xi.clone(), eta.clone()], &pi)),
            Process::new(xi.clone(), pi.clone()),
        ),
        (
            "W",
            Process::new(comb(Comb::W), stack(&[xi.clone(), eta.clone()], &pi)),
            Process::new(xi.clone(), stack(&[eta.clone(), eta.clone()], &pi)),
        ),
        (
            "C",
            Process::new(
                comb(Comb::C),
                stack(&[xi.clone(), eta.clone(), zeta.clone()], &pi),
            ),
            Process::new(xi.clone(), stack(&[zeta.clone(), eta.clone()], &pi)),
        ),
        (
            "B",
            Process::new(
                comb(Comb::B),
                stack(&[xi.clone(), eta.clone(), zeta.clone()], &pi),
            ),
            Process::new(
                xi.clone(),
                stack(&[Term::app(eta.clone(), zeta.clone())], &pi),
            ),
        ),
        (
            "cc",
            Process::new(comb(Comb::Cc), Stack::push(xi.clone(), pi.clone())),
            Process::new(xi.clone(), stack(&[Term::cont(pi.clone())], &pi)),
        ),
        (
            "k",
            Process::new(
                Term::cont(pi.clone()),
                Stack::push(xi.clone(), varpi.clone()),
            ),
            Process::new(xi.clone(), pi.clone()),
        ),
    ];
    for (name, from, to) in cases {
        let got = step(&from);
        t.check(got == StepResult::Next(to.clone()), || {
            format!("rule {name}: {from} gave {got:?}, expected {to}")
        });
    }
    t
}

/// A random c-term with `atoms` leaves over the combinators, two constants
/// and the given variables.
fn random_cterm(rng: &mut ChaCha8Rng, atoms: usize, vars: &[Name]) -> Term {
    if atoms <= 1 {
        let roll = rng.gen_range(0..10);
        return if roll < 4 && !vars.is_empty() {
            Term::var(vars[rng.gen_range(0..vars.len())].clone())
        } else if roll < 9 {
            comb(Comb::ALL[rng.gen_range(0..Comb::ALL.len())])
        } else {
            k(["a", "b"][rng.gen_range(0..2)])
        };
    }
    let left = rng.gen_range(1..atoms);
    Term::app(
        random_cterm(rng, left, vars),
        random_cterm(rng, atoms - left, vars),
    )
}

fn bracket_abstraction(seed: u64) -> Tally {
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x02);
    let names: Vec<Name> = ["x1", "x2", "x3"].iter().map(|s| Name::new(s)).collect();
    let args: Vec<Term> = ["xi1", "xi2", "xi3"].iter().map(|s| k(s)).collect();
    for case in 0..500 {
        let nv = rng.gen_range(1..=3);
        let atoms = rng.gen_range(1..=25);
        let vars = &names[..nv];
        let body = random_cterm(&mut rng, atoms, vars);
        for x in vars {
            let out = mlbd(x, &body);
            t.check(!out.contains_var(x), || {
                format!("case {case}: mlbd {x} {body} still contains {x}")
            });
        }
        let closure = lam_many(vars, &body);
        let binding: BTreeMap<Name, Term> =
            vars.iter().cloned().zip(args.iter().cloned()).collect();
        let start = Process::new(closure, stack(&args[..nv], &rho()));
        let target = Process::new(body.substitute(&binding), rho());
        expect_pass(&mut t, &format!("case {case}"), &start, &target, 1_000_000);
    }
    t
}

fn numeral_lemmas() -> Tally {
    let mut t = Tally::new();
    let (phi, alpha, zeta, delta, nu) = (k("phi"), k("alpha"), k("zeta"), k("delta"), k("nu"));
    let cb_phi = Term::app(Term::app(comb(Comb::C), comb(Comb::B)), phi.clone());
    let sigmas = [
        ("printed", fixture("Sigma").expect("fixture")),
        ("λ-form", sigma_lambda()),
    ];
    let omegas = [
        ("printed", fixture("Omega").expect("fixture")),
        ("λ-form", omega_lambda()),
    ];
    for n in 0..=20 {
        let it = iter_apply(&phi, n, &alpha);
        let lbl = |part: &str| format!("{part}, n = {n}");
        expect_pass(
            &mut t,
            &lbl("iteration (i)"),
            &Process::new(numeral(n), stack(&[phi.clone(), alpha.clone()], &rho())),
            &Process::new(it.clone(), rho()),
            BUDGET,
        );
        expect_pass(
            &mut t,
            &lbl("iteration (ii)"),
            &Process::new(
                numeral(n),
                stack(&[cb_phi.clone(), zeta.clone(), alpha.clone()], &rho()),
            ),
            &Process::new(zeta.clone(), Stack::push(it.clone(), rho())),
            BUDGET,
        );
        for ((sn, sigma), (on, omega)) in sigmas.iter().zip(&omegas) {
            let so = iter_apply(sigma, n, omega);
            expect_pass(
                &mut t,
                &lbl(&format!("Ω/Σ (i) {sn}/{on}")),
                &Process::new(
                    so.clone(),
                    stack(&[delta.clone(), phi.clone(), alpha.clone()], &rho()),
                ),
                &Process::new(it.clone(), rho()),
                BUDGET,
            );
            expect_pass(
                &mut t,
                &lbl(&format!("Ω/Σ (ii) {sn}/{on}")),
                &Process::new(
                    so,
                    stack(
                        &[delta.clone(), cb_phi.clone(), zeta.clone(), alpha.clone()],
                        &rho(),
                    ),
                ),
                &Process::new(zeta.clone(), Stack::push(it.clone(), rho())),
                BUDGET,
            );
        }
    }
    for n in 0..=50 {
        let got = behavioral_numeral(&numeral(n), BUDGET);
        t.check(got == Ok(n), || {
            format!("behavioral numeral of {n} gave {got:?}")
        });
    }
    expect_pass(
        &mut t,
        "σ law",
        &Process::new(
            succ(),
            stack(&[nu.clone(), phi.clone(), alpha.clone()], &rho()),
        ),
        &Process::new(nu, stack(&[phi.clone(), Term::app(phi, alpha)], &rho())),
        BUDGET,
    );
    let y = fixture("Y").expect("fixture");
    let xi = k("xi");
    expect_pass(
        &mut t,
        "Y law",
        &Process::new(y.clone(), Stack::push(xi.clone(), rho())),
        &Process::new(xi.clone(), stack(&[Term::app(y, xi)], &rho())),
        BUDGET,
    );
    t
}

/// Does `kappa` act as k*_π: `κ ⋆ m̄.η.ϖ` reaching `η ⋆ m̄.π`?
fn behaves_as_k_star(kappa: &Term, pi: &Stack) -> bool {
    let varpi = Stack::constant("varpi2");
    (0..=3).all(|m| {
        let start = Process::new(kappa.clone(), stack(&[numeral(m), k("eta2")], &varpi));
        passes_through(
            &start,
            &Process::new(k("eta2"), stack(&[numeral(m)], pi)),
            BUDGET,
        )
    })
}

fn starred_laws() -> Tally {
    let mut t = Tally::new();
    let (xi, eta, zeta) = (k("xi"), k("eta"), k("zeta"));
    let pi = rho();
    let varpi = Stack::constant("varpi");
    let c_app = |a: &Term, b: &Term| Term::app(Term::app(comb(Comb::C), a.clone()), b.clone());
    for entry in star_table() {
        for (form, term) in [("λ-form", &entry.term), ("printed", &entry.printed)] {
            for n in 0..=10 {
                let nb = numeral(n);
                let lbl = format!("{} {form}, n = {n}", entry.name);
                let (args, target): (Vec<Term>, Option<Process>) = match entry.comb {
                    Comb::B => (
                        vec![nb.clone(), xi.clone(), eta.clone(), zeta.clone()],
                        Some(Process::new(
                            xi.clone(),
                            stack(&[nb.clone(), c_app(&eta, &zeta)], &pi),
                        )),
                    ),
                    Comb::C => (
                        vec![nb.clone(), xi.clone(), eta.clone(), zeta.clone()],
                        Some(Process::new(
                            xi.clone(),
                            stack(&[nb.clone(), zeta.clone(), eta.clone()], &pi),
                        )),
                    ),
                    Comb::I => (
                        vec![nb.clone(), xi.clone()],
                        Some(Process::new(
                            xi.clone(),
                            Stack::push(nb.clone(), pi.clone()),
                        )),
                    ),
                    Comb::K => (
                        vec![nb.clone(), xi.clone(), eta.clone()],
                        Some(Process::new(
                            xi.clone(),
                            Stack::push(nb.clone(), pi.clone()),
                        )),
                    ),
                    Comb::W => (
                        vec![nb.clone(), xi.clone(), eta.clone()],
                        Some(Process::new(
                            xi.clone(),
                            stack(&[nb.clone(), eta.clone(), eta.clone()], &pi),
                        )),
                    ),
                    Comb::Cc => (vec![nb.clone(), xi.clone()], None),
                };
                let start = Process::new(term.clone(), stack(&args, &pi));
                match target {
                    Some(target) => expect_pass(&mut t, &lbl, &start, &target, BUDGET),
                    None => {
                        // cc* ⋆ n̄.ξ.π reaches ξ ⋆ n̄.κ.π; κ is k*_π itself for the
                        // λ-form and acts as it for the printed form.
                        let exact_kappa = form == "λ-form";
                        let hit = run_until(&start, BUDGET, head_const("xi"));
                        let ok = hit.is_some_and(|(p, _)| {
                            let items: Vec<&Term> = p.stack.iter().collect();
                            items.len() == 2
                                && *items[0] == nb
                                && p.stack.skip(2) == Some(&pi)
                                && if exact_kappa {
                                    *items[1] == k_star(&pi)
                                } else {
                                    behaves_as_k_star(items[1], &pi)
                                }
                        });
                        t.check(ok, || format!("{lbl}: no ξ ⋆ n̄.k*_π.π state"));
                    }
                }
            }
        }
    }
    for (form, kst) in [("λ-form", k_star(&pi)), ("printed", k_star_printed(&pi))] {
        for n in 0..=10 {
            let start = Process::new(kst.clone(), stack(&[numeral(n), xi.clone()], &varpi));
            let target = Process::new(xi.clone(), stack(&[numeral(n)], &pi));
            expect_pass(
                &mut t,
                &format!("k* {form}, n = {n}"),
                &start,
                &target,
                BUDGET,
            );
        }
    }
    let c_sigma = Term::app(comb(Comb::C), sigma_star());
    for n in 0..=10 {
        let literal = iter_apply(&c_sigma, n, &zero_star());
        t.check(star_numeral(n) == literal, || {
            format!("star numeral {n} is not (Cσ*)ⁿ0̄*")
        });
        let starred = star(&numeral(n));
        t.check(starred.as_ref() == Ok(&literal), || {
            format!("star of numeral {n} is not (Cσ*)ⁿ0̄*")
        });
    }
    t
}

fn random_condition(rng: &mut ChaCha8Rng) -> Condition {
    if rng.gen_ratio(1, 10) {
        return Condition::Bottom;
    }
    let len = rng.gen_range(0..=3);
    Condition::seq((0..len).map(|_| rng.gen_range(0..2)).collect::<Vec<u64>>())
}

fn pole_clauses(seed: u64) -> Tally {
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x05);
    let d = k("d");
    let pool = [
        d.clone(),
        comb(Comb::I),
        comb(Comb::K),
        Term::app(d.clone(), zero()),
        Term::app(d.clone(), numeral(1)),
        Term::app(comb(Comb::K), d.clone()),
        Term::app(comb(Comb::K), Term::app(d, zero())),
    ];
    let poles = [
        (
            "thread",
            Pole::Thread {
                i: 0,
                j: 0,
                depth: 8,
            },
        ),
        ("everything", Pole::Everything),
    ];
    let pi0 = Stack::constant("pi0");
    let mut undecided = 0usize;
    let mut total = 0usize;
    // clauses whose left side is outside ⊥_B, so the implication is not vacuous
    let mut live = 0usize;
    let tuples = 120;
    for _ in 0..tuples {
        let mut pick = || pool[rng.gen_range(0..pool.len())].clone();
        let (xi, eta, zeta) = (pick(), pick(), pick());
        let args = ClauseArgs {
            xi,
            eta,
            zeta,
            pi: pi0.clone(),
            varpi: pi0.clone(),
            p: random_condition(&mut rng),
            q: random_condition(&mut rng),
            r: random_condition(&mut rng),
            s: random_condition(&mut rng),
        };
        for clause in clauses(&args) {
            for (pname, pole) in &poles {
                total += 1;
                if bbot_member(&clause.lhs, pole, default_window(&clause.lhs.1), 10_000)
                    != BMember::InBot
                {
                    live += 1;
                }
                match check_clause(&clause, pole, 10_000) {
                    ClauseVerdict::Holds => t.check(true, String::new),
                    ClauseVerdict::Undecided => undecided += 1,
                    ClauseVerdict::Violated => t.check(false, || {
                        format!("clause {} violated under the {pname} pole", clause.name)
                    }),
                }
            }
        }
    }
    let frac = undecided as f64 / total.max(1) as f64;
    t.notes.push(format!(
        "{tuples} condition tuples, {live} non-vacuous, undecided {undecided}/{total} = {:.1}%",
        100.0 * frac
    ));
    t.check(live > 0, || "every clause was vacuous".into());
    t.check(frac < 0.20, || {
        format!("undecided fraction {:.1}% is not below 20%", 100.0 * frac)
    });
    t
}

fn collapsing() -> Tally {
    let mut t = Tally::new();
    let (th0, th1) = collapse_realizers();
    let (nu, kap, xi, eta, zeta) = (k("nu"), k("kappa"), k("xi"), k("eta"), k("zeta"));
    expect_pass(
        &mut t,
        "θ₀",
        &Process::new(th0, stack(&[nu.clone(), kap, xi.clone()], &rho())),
        &Process::new(xi, stack(&[nu], &rho())),
        BUDGET,
    );
    for n in 0..=10 {
        let hit = run_until(
            &Process::new(th1.clone(), stack(&[numeral(n), eta.clone()], &rho())),
            BUDGET,
            head_const("eta"),
        );
        let ok = hit.is_some_and(|(p, _)| {
            let items: Vec<&Term> = p.stack.iter().collect();
            items.len() == 2
                && p.stack.skip(2) == Some(&rho())
                && behavioral_numeral(items[0], BUDGET) == Ok(n + 1)
                && *items[1] == star_numeral(n)
        });
        t.check(ok, || format!("θ₁, n = {n}: η does not receive n+1 and n̄*"));
        expect_pass(
            &mut t,
            &format!("T₀, n = {n}"),
            &Process::new(t0(), stack(&[zeta.clone(), numeral(n)], &rho())),
            &Process::new(zeta.clone(), stack(&[star_numeral(n)], &rho())),
            BUDGET,
        );
        let hit = run_until(
            &Process::new(t1(), stack(&[zeta.clone(), star_numeral(n)], &rho())),
            BUDGET,
            head_const("zeta"),
        );
        let ok = hit.is_some_and(|(p, _)| {
            p.stack.pop().is_some_and(|(top, rest)| {
                *rest == rho() && behavioral_numeral(top, BUDGET) == Ok(n)
            })
        });
        t.check(ok, || format!("T₁, n = {n}: ζ does not receive n"));
    }
    t
}

/// Closed terms over d, numerals up to 3 and the combinators, with at most
/// `size` atoms.
fn random_thread_term(rng: &mut ChaCha8Rng, size: usize) -> Term {
    if size <= 1 {
        return match rng.gen_range(0..10) {
            0..=2 => k("d"),
            3..=5 => numeral(rng.gen_range(0..=3)),
            _ => comb(Comb::ALL[rng.gen_range(0..Comb::ALL.len())]),
        };
    }
    let left = rng.gen_range(1..size);
    Term::app(
        random_thread_term(rng, left),
        random_thread_term(rng, size - left),
    )
}

fn two_threads(seed: u64) -> Tally {
    let mut t = Tally::new();
    let depth = 8;
    let budget = 10_000;
    let pr = |h: Term, ts: &[Term], base: &str| Process::new(h, stack(ts, &Stack::constant(base)));
    let d = k("d");
    let d0 = Term::app(d.clone(), zero());
    let member = |p: &Process, i, j| thread_member(p, i, j, depth, budget);
    // Rule 1, anti-reduction into rule 1, and a non-generator stop.
    t.check(
        member(&pr(d.clone(), &[zero()], "pi0"), 0, 0) == Ok(Membership::Yes),
        || "d ⋆ 0̄.π⁰ ∉ ⊥⁰₀".into(),
    );
    t.check(
        member(&pr(d0.clone(), &[], "pi0"), 0, 0) == Ok(Membership::Yes),
        || "(d)0̄ ⋆ π⁰ ∉ ⊥⁰₀".into(),
    );
    t.check(
        member(&pr(d.clone(), &[numeral(1)], "pi0"), 0, 0) == Ok(Membership::No),
        || "d ⋆ 1̄.π⁰ ∈ ⊥⁰₀".into(),
    );
    t.check(
        member(&pr(d.clone(), &[numeral(1)], "pi0"), 0, 1) == Ok(Membership::Yes),
        || "d ⋆ 1̄.π⁰ ∉ ⊥⁰₁".into(),
    );
    t.check(
        member(&pr(d.clone(), &[zero()], "pi1"), 0, 0).is_err(),
        || "thread 0 accepted a π¹ process".into(),
    );
    // Rule 3.
    let pi0 = Stack::constant("pi0");
    let i = comb(Comb::I);
    let wi = Term::app(comb(Comb::W), comb(Comb::I));
    let buster = Term::app(wi.clone(), wi);
    let maj = |a: &Term, b: &Term, c: &Term| majority_check(a, b, c, &pi0, 0, 0, depth, budget);
    t.check(maj(&d0, &d0, &i) == Membership::Yes, || {
        "majority of two members is not yes".into()
    });
    t.check(maj(&i, &i, &d0) == Membership::No, || {
        "majority of two non-members is not no".into()
    });
    t.check(maj(&d0, &i, &buster) == Membership::Unknown, || {
        "one yes, one no, one undecided is not unknown".into()
    });
    for (a, b, c) in [(&d0, &d0, &i), (&i, &i, &d0), (&d0, &i, &d0)] {
        let assembled = member(&majority_process(a, b, c, &pi0), 0, 0);
        t.check(assembled == Ok(maj(a, b, c)), || {
            "majority_check disagrees with the assembled process".into()
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x07);
    let mut decided = 0;
    let corpus = 600;
    for _ in 0..corpus {
        let size = rng.gen_range(1..=8);
        let head = random_thread_term(&mut rng, size);
        let nargs = rng.gen_range(0..=2);
        let args: Vec<Term> = (0..nargs)
            .map(|_| {
                let sz = rng.gen_range(1..=3);
                random_thread_term(&mut rng, sz)
            })
            .collect();
        let p = Process::new(head, stack(&args, &pi0));
        let a = member(&p, 0, 0).unwrap_or(Membership::Unknown);
        let b = member(&p, 0, 1).unwrap_or(Membership::Unknown);
        if a != Membership::Unknown && b != Membership::Unknown {
            decided += 1;
        }
        t.check(!(a == Membership::Yes && b == Membership::Yes), || {
            format!("{p} is in both ⊥⁰₀ and ⊥⁰₁")
        });
        for (j, ans) in [(0u8, a), (1u8, b)] {
            if ans != Membership::Yes {
                continue;
            }
            for q in &run(&p, 200).states {
                t.check(member(q, 0, j) == Ok(Membership::Yes), || {
                    format!("{q} on the trace of {p} left ⊥⁰{j}")
                });
            }
        }
    }
    t.notes.push(format!(
        "{corpus} processes, {decided} decided for both poles"
    ));

    // d 2̄ against each Boolean case: two of ξ, η, ζ realize ⊥, the third
    // is I, which is in no pole.
    for (case, realizers) in [
        ("i = j = 0", [true, false, true]),
        ("i = j = 1", [false, true, true]),
        ("i = 0, j = 1", [true, true, false]),
    ] {
        for (iota, base) in [(0usize, "pi0"), (1, "pi1")] {
            let good = Term::app(d.clone(), numeral(iota));
            let picks: Vec<Term> = realizers
                .iter()
                .map(|r| if *r { good.clone() } else { i.clone() })
                .collect();
            let p = majority_process(&picks[0], &picks[1], &picks[2], &Stack::constant(base));
            t.check(global_member(&p, depth, budget) == Membership::Yes, || {
                format!("d 2̄ case {case} against π{iota} is not in ⊥")
            });
        }
    }
    t
}

fn correspondence() -> Tally {
    let mut t = Tally::new();
    let space = Space::default();
    let interp = Interp::empty_pole();
    let corpus = formula_corpus(3, DEFAULT_INT_BOUND);
    let mut ev = Evaluator::new(&interp, &space);
    match check_corpus(&corpus, &mut ev) {
        Ok(n) => {
            t.checks += 2 * n;
            t.notes.push(format!(
                "{n} formulas, {} conditions",
                space.conditions.len()
            ));
        }
        Err(e) => t.check(false, || e.to_string()),
    }
    t
}

/// A random formula of depth at most `depth` from the corpus constructors.
pub fn random_formula(rng: &mut ChaCha8Rng, depth: usize) -> Formula {
    if depth == 0 || rng.gen_ratio(1, 5) {
        return if rng.gen_bool(0.5) {
            Formula::top()
        } else {
            Formula::bot()
        };
    }
    let x = Name::new("x");
    match rng.gen_range(0..5) {
        0 => Formula::hook(
            GroundExpr::nat(0),
            GroundExpr::nat(rng.gen_range(0..2)),
            random_formula(rng, depth - 1),
        ),
        1 => Formula::forall_fin(
            x.clone(),
            vec![GroundValue::Nat(0), GroundValue::Nat(1)],
            Formula::hook(
                GroundExpr::var(&x),
                GroundExpr::nat(0),
                random_formula(rng, depth - 1),
            ),
        ),
        2 => Formula::forall_int(
            Name::new("n"),
            DEFAULT_INT_BOUND,
            random_formula(rng, depth - 1),
        ),
        _ => Formula::imp(
            random_formula(rng, depth - 1),
            random_formula(rng, depth - 1),
        ),
    }
}

fn generators(seed: u64) -> Tally {
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x09);
    let mut corpus = formula_corpus(1, DEFAULT_INT_BOUND);
    corpus.extend((0..300).map(|_| random_formula(&mut rng, 4)));
    let mut g = Generator::new();
    for u in &corpus {
        for kind in Kind::ALL {
            let out = g.generate(kind, u);
            t.check(out.is_closed() && out.is_proof_like(), || {
                format!("{kind} of {u} is not closed and proof-like")
            });
        }
    }

    let space = Space::default();
    let interp = Interp::empty_pole();
    let hooks = [
        Formula::top(),
        Formula::hook(GroundExpr::nat(0), GroundExpr::nat(0), Formula::top()),
        Formula::hook(GroundExpr::nat(0), GroundExpr::nat(1), Formula::top()),
    ];
    for u in &hooks {
        for s in Statement::ALL {
            let realizer = g.generate(s.realizer_kind(), u);
            let got = realizes(&realizer, &lemma_statement(s, u, &space), &interp);
            t.check(got == Ok(Membership::Yes), || {
                format!("statement ({}) at {u}: {got:?}", s.label())
            });
        }
    }

    let i = comb(Comb::I);
    for f in [
        Formula::bot(),
        Formula::imp(Formula::top(), Formula::bot()),
        random_formula(&mut rng, 3),
    ] {
        let inputs = PipelineInputs::with_stubs(i.clone(), f.clone());
        match extract(&inputs) {
            Ok(phi) => {
                let phi1 = crate::realizer::phi1(&i, &i);
                let expected = Term::app(
                    Term::app(g.generate(Kind::Tau1, &f), zero()),
                    Term::app(
                        Term::app(comb(Comb::C), star(&phi1).expect("combinator term")),
                        i.clone(),
                    ),
                );
                t.check(phi == expected, || {
                    format!("extract for {f} is not (τ¹_F)0̄(CΦ₁*Δ)")
                });
                t.check(phi.is_proof_like() && phi.is_closed(), || {
                    format!("extract for {f} is not proof-like")
                });
                let fin = crate::kam::run_final(&Process::new(phi, rho()), BUDGET);
                t.check(fin.steps <= BUDGET, || {
                    "smoke run overran its budget".into()
                });
            }
            Err(e) => t.check(false, || format!("extract for {f}: {e}")),
        }
    }
    let bad = PipelineInputs::with_stubs(Term::cont(rho()), Formula::bot());
    t.check(extract(&bad).is_err(), || {
        "extract accepted a continuation".into()
    });

    let peirce =
        parse_derivation("1: r6 [] |- cc : ((A -> B) -> A) -> A").expect("built-in derivation");
    t.check(check_derivation(&peirce).is_ok(), || {
        "the Peirce axiom was rejected".into()
    });
    let malformed = fuzz_malformed(seed, 100);
    for m in &malformed {
        let r = check_derivation(&m.derivation);
        t.check(r.as_ref().is_err_and(|rej| rej.node == m.node), || {
            format!(
                "malformed derivation ({:?}) not rejected at node {}: {r:?}",
                m.mutation, m.node
            )
        });
    }
    t.notes.push(format!(
        "{} formulas, {} malformed derivations",
        corpus.len(),
        malformed.len()
    ));
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_criteria_pass() {
        for id in [1, 3, 4, 6] {
            let r = run_criterion(id, 0);
            assert!(r.failures.is_empty(), "{r}\n{:#?}", r.failures);
        }
    }

    #[test]
    fn unknown_criterion_fails() {
        assert!(!run_criterion(42, 0).passed());
    }
}
