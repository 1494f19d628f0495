//! Natural-deduction derivations over formulas built from ⊤, ⊥, relations
//! between ℓ-terms and propositional letters with `→` and `∀`, and a checker
//! for the seven rules.
//!
//! File format, one node per line; lines starting with `#` are comments:
//!
//! ```text
//! <id>: r<rule> [<premise ids>] <x:A; y:B> |- <λ-term> : <formula>
//! ```
//!
//! Premises refer to earlier lines in rule order (rule 2 takes the function
//! premise first). The last line is the conclusion.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::compile::LambdaTerm;
use crate::syntax::{parse_lambda, print_lambda};
use crate::term::{Comb, Name, Term, TermKind};

/// ℓ-terms: individual variables and function symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LTerm {
    Var(Name),
    Fun(Name, Vec<LTerm>),
}

impl LTerm {
    pub fn var(x: &str) -> LTerm {
        LTerm::Var(Name::new(x))
    }

    fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            LTerm::Var(x) => {
                out.insert(x.clone());
            }
            LTerm::Fun(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    fn vars(&self) -> BTreeSet<Name> {
        let mut s = BTreeSet::new();
        self.collect_vars(&mut s);
        s
    }

    fn subst(&self, x: &Name, tau: &LTerm) -> LTerm {
        match self {
            LTerm::Var(y) if y == x => tau.clone(),
            LTerm::Var(_) => self.clone(),
            LTerm::Fun(f, args) => {
                LTerm::Fun(f.clone(), args.iter().map(|a| a.subst(x, tau)).collect())
            }
        }
    }
}

impl fmt::Display for LTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LTerm::Var(x) => write!(f, "{x}"),
            LTerm::Fun(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// t ε̸ u
    NotEps,
    NotIn,
    Subset,
}

impl Relation {
    pub const ALL: [Relation; 3] = [Relation::NotEps, Relation::NotIn, Relation::Subset];

    pub fn keyword(self) -> &'static str {
        match self {
            Relation::NotEps => "noteps",
            Relation::NotIn => "notin",
            Relation::Subset => "subset",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DFormula {
    Top,
    Bot,
    /// A propositional letter, standing for a fixed formula.
    Letter(Name),
    Rel(Relation, LTerm, LTerm),
    Imp(Box<DFormula>, Box<DFormula>),
    Forall(Name, Box<DFormula>),
}

impl DFormula {
    pub fn letter(s: &str) -> DFormula {
        DFormula::Letter(Name::new(s))
    }

    pub fn imp(a: DFormula, b: DFormula) -> DFormula {
        DFormula::Imp(Box::new(a), Box::new(b))
    }

    pub fn forall(x: &str, body: DFormula) -> DFormula {
        DFormula::Forall(Name::new(x), Box::new(body))
    }

    /// ((A→B)→A)→A
    pub fn peirce(a: DFormula, b: DFormula) -> DFormula {
        DFormula::imp(DFormula::imp(DFormula::imp(a.clone(), b), a.clone()), a)
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            DFormula::Top | DFormula::Bot | DFormula::Letter(_) => {}
            DFormula::Rel(_, t, u) => {
                for v in t.vars().into_iter().chain(u.vars()) {
                    if !bound.contains(&v) {
                        out.insert(v);
                    }
                }
            }
            DFormula::Imp(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            DFormula::Forall(x, body) => {
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    fn all_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            DFormula::Top | DFormula::Bot | DFormula::Letter(_) => {}
            DFormula::Rel(_, t, u) => {
                t.collect_vars(out);
                u.collect_vars(out);
            }
            DFormula::Imp(a, b) => {
                a.all_vars(out);
                b.all_vars(out);
            }
            DFormula::Forall(x, body) => {
                out.insert(x.clone());
                body.all_vars(out);
            }
        }
    }

    /// A[τ/x], renaming binders that would capture a variable of τ.
    pub fn subst(&self, x: &Name, tau: &LTerm) -> DFormula {
        match self {
            DFormula::Top | DFormula::Bot | DFormula::Letter(_) => self.clone(),
            DFormula::Rel(r, t, u) => DFormula::Rel(*r, t.subst(x, tau), u.subst(x, tau)),
            DFormula::Imp(a, b) => DFormula::imp(a.subst(x, tau), b.subst(x, tau)),
            DFormula::Forall(y, body) => {
                if y == x || !body.free_vars().contains(x) {
                    return self.clone();
                }
                let tv = tau.vars();
                if !tv.contains(y) {
                    return DFormula::Forall(y.clone(), Box::new(body.subst(x, tau)));
                }
                let mut taken = tv;
                body.all_vars(&mut taken);
                taken.insert(x.clone());
                let fresh = crate::term::fresh_name(y.as_str(), &taken);
                let renamed = body.subst(y, &LTerm::Var(fresh.clone()));
                DFormula::Forall(fresh, Box::new(renamed.subst(x, tau)))
            }
        }
    }

    fn size(&self) -> usize {
        match self {
            DFormula::Top | DFormula::Bot | DFormula::Letter(_) | DFormula::Rel(..) => 1,
            DFormula::Imp(a, b) => 1 + a.size() + b.size(),
            DFormula::Forall(_, b) => 1 + b.size(),
        }
    }
}

struct Prec<'a>(&'a DFormula, u8);

impl fmt::Display for Prec<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Prec(a, level) = *self;
        match a {
            DFormula::Top => f.write_str("T"),
            DFormula::Bot => f.write_str("F"),
            DFormula::Letter(x) => write!(f, "{x}"),
            DFormula::Rel(r, t, u) => write!(f, "{t} {} {u}", r.keyword()),
            DFormula::Imp(x, y) if level == 0 => write!(f, "{} -> {}", Prec(x, 1), Prec(y, 0)),
            DFormula::Forall(x, body) if level == 0 => write!(f, "forall {x}. {}", Prec(body, 0)),
            _ => write!(f, "({})", Prec(a, 0)),
        }
    }
}

impl fmt::Display for DFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Prec(self, 0).fmt(f)
    }
}

/// Equality of formulas up to renaming of bound variables.
pub fn alpha_eq(a: &DFormula, b: &DFormula) -> bool {
    let mut m = Matcher {
        target: None,
        tau: None,
    };
    m.formula(a, b, &mut Vec::new(), &mut Vec::new())
}

/// Whether `c` is `a[τ/x]` for some ℓ-term τ; returns that τ when `x` is
/// free in `a`.
pub fn instance_of(a: &DFormula, x: &Name, c: &DFormula) -> Option<Option<LTerm>> {
    let mut m = Matcher {
        target: Some(x),
        tau: None,
    };
    if m.formula(a, c, &mut Vec::new(), &mut Vec::new()) {
        Some(m.tau)
    } else {
        None
    }
}

struct Matcher<'a> {
    target: Option<&'a Name>,
    tau: Option<LTerm>,
}

fn bound_index(stack: &[Name], x: &Name) -> Option<usize> {
    stack.iter().rposition(|y| y == x)
}

impl Matcher<'_> {
    fn formula(
        &mut self,
        a: &DFormula,
        c: &DFormula,
        ba: &mut Vec<Name>,
        bc: &mut Vec<Name>,
    ) -> bool {
        match (a, c) {
            (DFormula::Top, DFormula::Top) | (DFormula::Bot, DFormula::Bot) => true,
            (DFormula::Letter(x), DFormula::Letter(y)) => x == y,
            (DFormula::Rel(r, t, u), DFormula::Rel(s, t2, u2)) => {
                r == s && self.lterm(t, t2, ba, bc) && self.lterm(u, u2, ba, bc)
            }
            (DFormula::Imp(a1, a2), DFormula::Imp(c1, c2)) => {
                self.formula(a1, c1, ba, bc) && self.formula(a2, c2, ba, bc)
            }
            (DFormula::Forall(y, a1), DFormula::Forall(z, c1)) => {
                ba.push(y.clone());
                bc.push(z.clone());
                let ok = self.formula(a1, c1, ba, bc);
                ba.pop();
                bc.pop();
                ok
            }
            _ => false,
        }
    }

    fn lterm(&mut self, s: &LTerm, t: &LTerm, ba: &[Name], bc: &[Name]) -> bool {
        match s {
            LTerm::Var(v) => match bound_index(ba, v) {
                Some(i) => matches!(t, LTerm::Var(w) if bound_index(bc, w) == Some(i)),
                None if Some(v) == self.target => {
                    // A free occurrence of the instantiated variable: the
                    // image must not use any variable bound at this point.
                    if t.vars().iter().any(|w| bc.contains(w)) {
                        return false;
                    }
                    match &self.tau {
                        Some(tau) => tau == t,
                        None => {
                            self.tau = Some(t.clone());
                            true
                        }
                    }
                }
                None => matches!(t, LTerm::Var(w) if w == v && !bc.contains(w)),
            },
            LTerm::Fun(f, args) => match t {
                LTerm::Fun(g, args2) if f == g && args.len() == args2.len() => args
                    .iter()
                    .zip(args2)
                    .all(|(x, y)| self.lterm(x, y, ba, bc)),
                _ => false,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleTag {
    Axiom,
    App,
    Abs,
    ForallIntro,
    ForallElim,
    Peirce,
    BotElim,
}

impl RuleTag {
    pub const ALL: [RuleTag; 7] = [
        RuleTag::Axiom,
        RuleTag::App,
        RuleTag::Abs,
        RuleTag::ForallIntro,
        RuleTag::ForallElim,
        RuleTag::Peirce,
        RuleTag::BotElim,
    ];

    pub fn number(self) -> u8 {
        RuleTag::ALL
            .iter()
            .position(|r| *r == self)
            .expect("listed") as u8
            + 1
    }

    pub fn from_number(n: u8) -> Option<RuleTag> {
        RuleTag::ALL.get(usize::from(n).checked_sub(1)?).copied()
    }

    pub fn arity(self) -> usize {
        match self {
            RuleTag::Axiom | RuleTag::Peirce => 0,
            RuleTag::App => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgment {
    pub context: Vec<(Name, DFormula)>,
    pub term: LambdaTerm,
    pub formula: DFormula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: usize,
    pub rule: RuleTag,
    pub premises: Vec<usize>,
    pub judgment: Judgment,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Derivation {
    pub nodes: Vec<Node>,
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, a)) in self.context.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{x}: {a}")?;
        }
        if !self.context.is_empty() {
            f.write_str(" ")?;
        }
        write!(
            f,
            "|- {} : {}",
            print_lambda(&self.term, &Default::default()),
            self.formula
        )
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.nodes {
            let prem: Vec<String> = n.premises.iter().map(|p| p.to_string()).collect();
            writeln!(
                f,
                "{}: {} [{}] {}",
                n.id,
                n.rule,
                prem.join(","),
                n.judgment
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Reason {
    #[error("the derivation has no nodes")]
    Empty,
    #[error("node id {0} is used twice")]
    DuplicateId(usize),
    #[error("premise {0} is not an earlier node")]
    BadPremise(usize),
    #[error("rule {rule} takes {expected} premise(s), found {found}")]
    Arity {
        rule: RuleTag,
        expected: usize,
        found: usize,
    },
    #[error("variable {0} is declared twice in the context")]
    DuplicateContextVar(Name),
    #[error("the term of an axiom must be a variable")]
    NotAVariable,
    #[error("variable {0} is not declared in the context")]
    Undeclared(Name),
    #[error("expected formula {expected}, found {found}")]
    FormulaMismatch { expected: String, found: String },
    #[error("context differs from that of premise {0}")]
    ContextMismatch(usize),
    #[error("expected term {expected}, found {found}")]
    TermMismatch { expected: String, found: String },
    #[error("premise {0} does not prove an implication")]
    NotImplication(usize),
    #[error("the last hypothesis of premise {0} must be the abstracted variable")]
    AbstractionHypothesis(usize),
    #[error("expected a universal formula")]
    NotForall,
    #[error("variable {var} appears free in the hypothesis {hypothesis}")]
    Eigenvariable { var: Name, hypothesis: Name },
    #[error("{found} is not an instance of the premise")]
    NotInstance { found: String },
    #[error("the term of the Peirce rule must be cc")]
    NotCc,
    #[error("{0} is not of the form ((A -> B) -> A) -> A")]
    NotPeirce(String),
    #[error("premise {0} does not prove F")]
    NotBottom(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("node {node}: {reason}")]
pub struct Rejection {
    pub node: usize,
    pub reason: Reason,
}

/// What an accepted derivation proves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Accepted {
    pub context: Vec<(Name, DFormula)>,
    pub term: LambdaTerm,
    pub formula: DFormula,
}

/// The λ-term with every application spelled out, so that `x y` written as
/// one atom and as an application compare equal.
fn shape(l: &LambdaTerm) -> LambdaTerm {
    fn of_term(t: &Term) -> LambdaTerm {
        match t.kind() {
            TermKind::App(f, a) => LambdaTerm::app(of_term(f), of_term(a)),
            _ => LambdaTerm::Atom(t.clone()),
        }
    }
    match l {
        LambdaTerm::Atom(t) => of_term(t),
        LambdaTerm::App(f, a) => LambdaTerm::app(shape(f), shape(a)),
        LambdaTerm::Abs(x, b) => LambdaTerm::abs(x.clone(), shape(b)),
    }
}

fn show_term(l: &LambdaTerm) -> String {
    print_lambda(l, &Default::default())
}

fn contexts_eq(a: &[(Name, DFormula)], b: &[(Name, DFormula)]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|((x, f), (y, g))| x == y && alpha_eq(f, g))
}

fn expect_formula(expected: &DFormula, found: &DFormula) -> Result<(), Reason> {
    if alpha_eq(expected, found) {
        Ok(())
    } else {
        Err(Reason::FormulaMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        })
    }
}

fn expect_term(expected: &LambdaTerm, found: &LambdaTerm) -> Result<(), Reason> {
    if shape(expected) == shape(found) {
        Ok(())
    } else {
        Err(Reason::TermMismatch {
            expected: show_term(expected),
            found: show_term(found),
        })
    }
}

fn check_node(node: &Node, premises: &[&Node]) -> Result<(), Reason> {
    let j = &node.judgment;
    let mut seen = BTreeSet::new();
    for (x, _) in &j.context {
        if !seen.insert(x) {
            return Err(Reason::DuplicateContextVar(x.clone()));
        }
    }
    if premises.len() != node.rule.arity() {
        return Err(Reason::Arity {
            rule: node.rule,
            expected: node.rule.arity(),
            found: premises.len(),
        });
    }
    let same_context = |p: &Node| {
        if contexts_eq(&p.judgment.context, &j.context) {
            Ok(())
        } else {
            Err(Reason::ContextMismatch(p.id))
        }
    };
    match node.rule {
        RuleTag::Axiom => {
            let x = match shape(&j.term) {
                LambdaTerm::Atom(t) => match t.kind() {
                    TermKind::Var(x) => x.clone(),
                    _ => return Err(Reason::NotAVariable),
                },
                _ => return Err(Reason::NotAVariable),
            };
            let (_, a) = j
                .context
                .iter()
                .find(|(y, _)| *y == x)
                .ok_or(Reason::Undeclared(x.clone()))?;
            expect_formula(a, &j.formula)
        }
        RuleTag::App => {
            let (pf, pa) = (premises[0], premises[1]);
            same_context(pf)?;
            same_context(pa)?;
            let DFormula::Imp(a, b) = &pf.judgment.formula else {
                return Err(Reason::NotImplication(pf.id));
            };
            expect_formula(a, &pa.judgment.formula)?;
            expect_formula(b, &j.formula)?;
            let expected = LambdaTerm::app(pf.judgment.term.clone(), pa.judgment.term.clone());
            expect_term(&expected, &j.term)
        }
        RuleTag::Abs => {
            let p = premises[0];
            let pc = &p.judgment.context;
            let Some(((x, a), rest)) = pc.split_last() else {
                return Err(Reason::AbstractionHypothesis(p.id));
            };
            if !contexts_eq(rest, &j.context) {
                return Err(Reason::ContextMismatch(p.id));
            }
            let expected = DFormula::imp(a.clone(), p.judgment.formula.clone());
            expect_formula(&expected, &j.formula)?;
            expect_term(
                &LambdaTerm::abs(x.clone(), p.judgment.term.clone()),
                &j.term,
            )
        }
        RuleTag::ForallIntro => {
            let p = premises[0];
            same_context(p)?;
            expect_term(&p.judgment.term, &j.term)?;
            let DFormula::Forall(x, body) = &j.formula else {
                return Err(Reason::NotForall);
            };
            expect_formula(&p.judgment.formula, body)?;
            if let Some((h, _)) = j.context.iter().find(|(_, a)| a.free_vars().contains(x)) {
                return Err(Reason::Eigenvariable {
                    var: x.clone(),
                    hypothesis: h.clone(),
                });
            }
            Ok(())
        }
        RuleTag::ForallElim => {
            let p = premises[0];
            same_context(p)?;
            expect_term(&p.judgment.term, &j.term)?;
            let DFormula::Forall(x, body) = &p.judgment.formula else {
                return Err(Reason::NotForall);
            };
            match instance_of(body, x, &j.formula) {
                Some(_) => Ok(()),
                None => Err(Reason::NotInstance {
                    found: j.formula.to_string(),
                }),
            }
        }
        RuleTag::Peirce => {
            let is_cc =
                matches!(shape(&j.term), LambdaTerm::Atom(t) if t.as_comb() == Some(Comb::Cc));
            if !is_cc {
                return Err(Reason::NotCc);
            }
            let not_peirce = || Reason::NotPeirce(j.formula.to_string());
            let DFormula::Imp(lhs, a3) = &j.formula else {
                return Err(not_peirce());
            };
            let DFormula::Imp(ab, a2) = &**lhs else {
                return Err(not_peirce());
            };
            let DFormula::Imp(a1, _) = &**ab else {
                return Err(not_peirce());
            };
            if alpha_eq(a1, a2) && alpha_eq(a2, a3) {
                Ok(())
            } else {
                Err(not_peirce())
            }
        }
        RuleTag::BotElim => {
            let p = premises[0];
            same_context(p)?;
            expect_term(&p.judgment.term, &j.term)?;
            if p.judgment.formula != DFormula::Bot {
                return Err(Reason::NotBottom(p.id));
            }
            Ok(())
        }
    }
}

/// Check every node in order; the first failing node is reported.
pub fn check_derivation(d: &Derivation) -> Result<Accepted, Rejection> {
    let mut done: Vec<&Node> = Vec::with_capacity(d.nodes.len());
    for node in &d.nodes {
        let reject = |reason| Rejection {
            node: node.id,
            reason,
        };
        if done.iter().any(|n| n.id == node.id) {
            return Err(reject(Reason::DuplicateId(node.id)));
        }
        let mut premises = Vec::with_capacity(node.premises.len());
        for p in &node.premises {
            match done.iter().find(|n| n.id == *p) {
                Some(n) => premises.push(*n),
                None => return Err(reject(Reason::BadPremise(*p))),
            }
        }
        check_node(node, &premises).map_err(reject)?;
        done.push(node);
    }
    let root = d.nodes.last().ok_or(Rejection {
        node: 0,
        reason: Reason::Empty,
    })?;
    Ok(Accepted {
        context: root.judgment.context.clone(),
        term: root.judgment.term.clone(),
        formula: root.judgment.formula.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct DerivationParseError {
    pub line: usize,
    pub msg: String,
}

struct FormulaParser<'s> {
    src: &'s str,
    pos: usize,
}

type PResult<T> = Result<T, String>;

impl<'s> FormulaParser<'s> {
    fn rest(&self) -> &'s str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let r = self.rest();
        self.pos += r.len() - r.trim_start().len();
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Option<&'s str> {
        self.skip_ws();
        let r = self.rest();
        let len = r
            .find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '\''))
            .unwrap_or(r.len());
        if len == 0 || !r.starts_with(|c: char| c.is_alphabetic()) {
            return None;
        }
        self.pos += len;
        Some(&r[..len])
    }

    fn peek_ident(&mut self) -> Option<&'s str> {
        let save = self.pos;
        let id = self.ident();
        self.pos = save;
        id
    }

    fn formula(&mut self) -> PResult<DFormula> {
        if self.peek_ident() == Some("forall") {
            self.ident();
            let x = self.ident().ok_or("expected a variable after forall")?;
            if !self.eat(".") {
                return Err("expected '.' after the quantified variable".into());
            }
            let body = self.formula()?;
            return Ok(DFormula::Forall(Name::new(x), Box::new(body)));
        }
        let lhs = self.atom()?;
        if self.eat("->") {
            Ok(DFormula::imp(lhs, self.formula()?))
        } else {
            Ok(lhs)
        }
    }

    fn atom(&mut self) -> PResult<DFormula> {
        if self.eat("(") {
            let f = self.formula()?;
            if !self.eat(")") {
                return Err(format!("expected ')' at byte {}", self.pos));
            }
            return Ok(f);
        }
        let id = self
            .peek_ident()
            .ok_or_else(|| format!("expected a formula at byte {}", self.pos))?;
        match id {
            "T" => {
                self.ident();
                return Ok(DFormula::Top);
            }
            "F" => {
                self.ident();
                return Ok(DFormula::Bot);
            }
            _ => {}
        }
        if id.starts_with(|c: char| c.is_uppercase()) {
            self.ident();
            return Ok(DFormula::letter(id));
        }
        let t = self.lterm()?;
        let kw = self
            .ident()
            .ok_or_else(|| format!("expected a relation at byte {}", self.pos))?;
        let rel = Relation::ALL
            .into_iter()
            .find(|r| r.keyword() == kw)
            .ok_or_else(|| format!("unknown relation {kw:?}"))?;
        let u = self.lterm()?;
        Ok(DFormula::Rel(rel, t, u))
    }

    fn lterm(&mut self) -> PResult<LTerm> {
        let id = self
            .ident()
            .ok_or_else(|| format!("expected an ℓ-term at byte {}", self.pos))?;
        if id.starts_with(|c: char| c.is_uppercase()) || id == "forall" {
            return Err(format!("{id:?} cannot name an individual"));
        }
        if !self.eat("(") {
            return Ok(LTerm::var(id));
        }
        let mut args = vec![self.lterm()?];
        while self.eat(",") {
            args.push(self.lterm()?);
        }
        if !self.eat(")") {
            return Err(format!("expected ')' at byte {}", self.pos));
        }
        Ok(LTerm::Fun(Name::new(id), args))
    }
}

pub fn parse_dformula(src: &str) -> Result<DFormula, String> {
    let mut p = FormulaParser { src, pos: 0 };
    let f = p.formula()?;
    p.skip_ws();
    if p.pos != src.len() {
        return Err(format!("trailing input at byte {}", p.pos));
    }
    Ok(f)
}

fn parse_line(line: &str) -> Result<Node, String> {
    let (id, rest) = line.split_once(':').ok_or("expected '<id>:'")?;
    let id: usize = id
        .trim()
        .parse()
        .map_err(|_| format!("bad node id {:?}", id.trim()))?;
    let rest = rest.trim_start();
    let (tag, rest) = rest
        .split_once(char::is_whitespace)
        .ok_or("expected a rule tag")?;
    let rule = tag
        .strip_prefix('r')
        .and_then(|n| n.parse::<u8>().ok())
        .and_then(RuleTag::from_number)
        .ok_or_else(|| format!("bad rule tag {tag:?}; expected r1..r7"))?;
    let rest = rest
        .trim_start()
        .strip_prefix('[')
        .ok_or("expected '[' before the premises")?;
    let (prem, rest) = rest
        .split_once(']')
        .ok_or("expected ']' after the premises")?;
    let premises = prem
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| format!("bad premise id {s:?}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (ctx, judg) = rest.split_once("|-").ok_or("expected '|-'")?;
    let mut context = Vec::new();
    for entry in ctx.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (x, a) = entry
            .split_once(':')
            .ok_or_else(|| format!("bad hypothesis {entry:?}"))?;
        let x = x.trim();
        if x.is_empty() || !x.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(format!("bad hypothesis variable {x:?}"));
        }
        context.push((Name::new(x), parse_dformula(a)?));
    }
    let (term, formula) = judg
        .rsplit_once(" : ")
        .or_else(|| judg.rsplit_once(':'))
        .ok_or("expected ': <formula>'")?;
    let term = parse_lambda(term.trim()).map_err(|e| e.to_string())?;
    let formula = parse_dformula(formula)?;
    Ok(Node {
        id,
        rule,
        premises,
        judgment: Judgment {
            context,
            term,
            formula,
        },
    })
}

pub fn parse_derivation(src: &str) -> Result<Derivation, DerivationParseError> {
    let mut nodes = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        nodes.push(parse_line(line).map_err(|msg| DerivationParseError { line: i + 1, msg })?);
    }
    Ok(Derivation { nodes })
}

// Random derivations for testing the checker.

fn lam(src: &str) -> LambdaTerm {
    parse_lambda(src).unwrap_or_else(|e| panic!("built-in λ-term {src:?}: {e}"))
}

fn rand_lterm(rng: &mut ChaCha8Rng, depth: u32) -> LTerm {
    if depth == 0 || rng.gen_bool(0.6) {
        LTerm::var(["a", "b", "c"][rng.gen_range(0..3)])
    } else {
        let f = ["f", "g"][rng.gen_range(0..2)];
        let n = rng.gen_range(1..=2);
        LTerm::Fun(
            Name::new(f),
            (0..n).map(|_| rand_lterm(rng, depth - 1)).collect(),
        )
    }
}

/// Random formulas: letters, relations over `a b c x`, implications and
/// quantifiers over `u v`.
pub fn random_dformula(rng: &mut ChaCha8Rng, depth: u32) -> DFormula {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return match rng.gen_range(0..5) {
            0 => DFormula::Bot,
            1 => DFormula::Top,
            2 => DFormula::letter(["A", "B", "C"][rng.gen_range(0..3)]),
            _ => {
                let pick = |rng: &mut ChaCha8Rng| {
                    LTerm::var(["a", "b", "x", "u", "v"][rng.gen_range(0..5)])
                };
                let r = Relation::ALL[rng.gen_range(0..3)];
                let (t, u) = (pick(rng), pick(rng));
                DFormula::Rel(r, t, u)
            }
        };
    }
    if rng.gen_bool(0.7) {
        DFormula::imp(
            random_dformula(rng, depth - 1),
            random_dformula(rng, depth - 1),
        )
    } else {
        DFormula::forall(
            ["u", "v"][rng.gen_range(0..2)],
            random_dformula(rng, depth - 1),
        )
    }
}

fn node(
    id: usize,
    rule: RuleTag,
    premises: &[usize],
    context: &[(&str, &DFormula)],
    term: &str,
    formula: DFormula,
) -> Node {
    Node {
        id,
        rule,
        premises: premises.to_vec(),
        judgment: Judgment {
            context: context
                .iter()
                .map(|(x, a)| (Name::new(x), (*a).clone()))
                .collect(),
            term: lam(term),
            formula,
        },
    }
}

/// A valid derivation drawn from a handful of schemata that together use
/// every rule.
pub fn random_valid(rng: &mut ChaCha8Rng) -> Derivation {
    use RuleTag::*;
    let a = random_dformula(rng, 2);
    let b = random_dformula(rng, 2);
    let nodes = match rng.gen_range(0..6) {
        0 => vec![node(1, Axiom, &[], &[("x", &a)], "x", a.clone())],
        1 => vec![
            node(1, Axiom, &[], &[("x", &a), ("y", &b)], "x", a.clone()),
            node(
                2,
                Abs,
                &[1],
                &[("x", &a)],
                "\\y. x",
                DFormula::imp(b.clone(), a.clone()),
            ),
            node(
                3,
                Abs,
                &[2],
                &[],
                "\\x. \\y. x",
                DFormula::imp(a.clone(), DFormula::imp(b, a)),
            ),
        ],
        2 => {
            let ab = DFormula::imp(a.clone(), b.clone());
            let ctx = [("f", &ab), ("y", &a)];
            vec![
                node(1, Axiom, &[], &ctx, "f", ab.clone()),
                node(2, Axiom, &[], &ctx, "y", a.clone()),
                node(3, App, &[1, 2], &ctx, "f y", b),
            ]
        }
        3 => {
            let bot = DFormula::Bot;
            vec![
                node(1, Axiom, &[], &[("z", &bot)], "z", DFormula::Bot),
                node(2, BotElim, &[1], &[("z", &bot)], "z", a),
            ]
        }
        4 => {
            // ∀-introduction over x, then instantiation at a random ℓ-term.
            let px = DFormula::imp(
                DFormula::Rel(Relation::NotIn, LTerm::var("x"), LTerm::var("a")),
                a,
            );
            let arrow = DFormula::imp(px.clone(), px.clone());
            let all = DFormula::Forall(Name::new("x"), Box::new(arrow.clone()));
            let tau = rand_lterm(rng, 2);
            let inst = arrow.subst(&Name::new("x"), &tau);
            vec![
                node(1, Axiom, &[], &[("y", &px)], "y", px.clone()),
                node(2, Abs, &[1], &[], "\\y. y", arrow),
                node(3, ForallIntro, &[2], &[], "\\y. y", all),
                node(4, ForallElim, &[3], &[], "\\y. y", inst),
            ]
        }
        _ => {
            let h = DFormula::imp(DFormula::imp(a.clone(), b.clone()), a.clone());
            let ctx = [("h", &h)];
            vec![
                node(1, Axiom, &[], &ctx, "h", h.clone()),
                node(
                    2,
                    Peirce,
                    &[],
                    &ctx,
                    "cc",
                    DFormula::peirce(a.clone(), b.clone()),
                ),
                node(3, App, &[2, 1], &ctx, "cc h", a.clone()),
                node(4, Abs, &[3], &[], "\\h. cc h", DFormula::peirce(a, b)),
            ]
        }
    };
    Derivation { nodes }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mutation {
    /// A premise pointing at the node itself.
    SelfPremise,
    /// The rule tag replaced by one of a different arity.
    Retag,
    /// A conclusion formula the rule cannot produce.
    Conclusion,
    /// A hypothesis added to the conclusion only.
    ExtraHypothesis,
    /// The axiom's variable removed from its context.
    DropHypothesis,
    /// ∀-introduction over a variable free in a hypothesis.
    Eigenvariable,
    /// The Peirce formula with its last A replaced.
    BadPeirce,
}

#[derive(Debug, Clone)]
pub struct Malformed {
    pub derivation: Derivation,
    /// The only node that breaks its rule.
    pub node: usize,
    pub mutation: Mutation,
}

fn eigenvariable_case(rng: &mut ChaCha8Rng) -> Malformed {
    let px = DFormula::Rel(
        Relation::ALL[rng.gen_range(0..3)],
        LTerm::var("x"),
        rand_lterm(rng, 1),
    );
    let hyp = DFormula::imp(px.clone(), random_dformula(rng, 1));
    let ctx = [("h", &hyp), ("y", &px)];
    let derivation = Derivation {
        nodes: vec![
            node(1, RuleTag::Axiom, &[], &ctx, "y", px.clone()),
            node(
                2,
                RuleTag::ForallIntro,
                &[1],
                &ctx,
                "y",
                DFormula::Forall(Name::new("x"), Box::new(px.clone())),
            ),
        ],
    };
    Malformed {
        derivation,
        node: 2,
        mutation: Mutation::Eigenvariable,
    }
}

fn mutate(rng: &mut ChaCha8Rng, mut d: Derivation) -> Option<Malformed> {
    let i = rng.gen_range(0..d.nodes.len());
    let id = d.nodes[i].id;
    let rule = d.nodes[i].rule;
    let mutation = *[
        Mutation::SelfPremise,
        Mutation::Retag,
        Mutation::Conclusion,
        Mutation::ExtraHypothesis,
        Mutation::DropHypothesis,
        Mutation::BadPeirce,
    ]
    .choose(rng)
    .expect("non-empty");
    let n = &mut d.nodes[i];
    match mutation {
        Mutation::SelfPremise => {
            if rule.arity() == 0 {
                return None;
            }
            n.premises[0] = id;
        }
        Mutation::Retag => {
            let others: Vec<RuleTag> = RuleTag::ALL
                .into_iter()
                .filter(|r| r.arity() != rule.arity())
                .collect();
            n.rule = *others.choose(rng).expect("arities differ");
        }
        Mutation::Conclusion => {
            // Strictly larger than the one formula the rule allows here.
            if matches!(rule, RuleTag::ForallElim | RuleTag::BotElim) {
                return None;
            }
            let f = n.judgment.formula.clone();
            n.judgment.formula = DFormula::imp(f.clone(), f);
        }
        Mutation::ExtraHypothesis => {
            if rule.arity() == 0 {
                return None;
            }
            n.judgment.context.push((Name::new("zfuzz"), DFormula::Top));
        }
        Mutation::DropHypothesis => {
            if rule != RuleTag::Axiom {
                return None;
            }
            let x = match shape(&n.judgment.term) {
                LambdaTerm::Atom(t) => match t.kind() {
                    TermKind::Var(x) => x.clone(),
                    _ => return None,
                },
                _ => return None,
            };
            n.judgment.context.retain(|(y, _)| *y != x);
        }
        Mutation::BadPeirce => {
            if rule != RuleTag::Peirce {
                return None;
            }
            let DFormula::Imp(lhs, a) = &n.judgment.formula else {
                return None;
            };
            let bigger = DFormula::imp((**a).clone(), (**a).clone());
            debug_assert!(bigger.size() > a.size());
            n.judgment.formula = DFormula::Imp(lhs.clone(), Box::new(bigger));
        }
        Mutation::Eigenvariable => unreachable!("built separately"),
    }
    Some(Malformed {
        derivation: d,
        node: id,
        mutation,
    })
}

/// `count` derivations, each with exactly one node violating its rule.
pub fn fuzz_malformed(seed: u64, count: usize) -> Vec<Malformed> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if rng.gen_ratio(1, 8) {
            out.push(eigenvariable_case(&mut rng));
            continue;
        }
        let base = random_valid(&mut rng);
        if let Some(m) = mutate(&mut rng, base) {
            out.push(m);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> DFormula {
        parse_dformula(s).unwrap()
    }

    #[test]
    fn formula_syntax_round_trips() {
        for s in [
            "A -> B -> A",
            "(A -> B) -> A",
            "forall x. x notin f(a, y) -> F",
            "T -> (forall u. u subset u)",
        ] {
            let a = f(s);
            assert_eq!(f(&a.to_string()), a, "{s}");
        }
        assert!(parse_dformula("x").is_err());
        assert!(parse_dformula("A ->").is_err());
    }

    #[test]
    fn alpha_equivalence() {
        assert!(alpha_eq(
            &f("forall u. u notin a"),
            &f("forall v. v notin a")
        ));
        assert!(!alpha_eq(
            &f("forall u. u notin a"),
            &f("forall v. a notin v")
        ));
        assert!(!alpha_eq(
            &f("forall u. u notin v"),
            &f("forall v. v notin v")
        ));
    }

    #[test]
    fn instances() {
        let x = Name::new("x");
        let body = f("x notin a -> x subset x");
        assert_eq!(
            instance_of(&body, &x, &f("g(b) notin a -> g(b) subset g(b)")),
            Some(Some(LTerm::Fun(Name::new("g"), vec![LTerm::var("b")])))
        );
        assert_eq!(instance_of(&body, &x, &f("b notin a -> c subset b")), None);
        // τ may not be captured by a binder of the instance.
        assert_eq!(
            instance_of(&f("forall u. x notin u"), &x, &f("forall u. u notin u")),
            None
        );
    }

    #[test]
    fn substitution_avoids_capture() {
        let a = f("forall u. x notin u");
        let out = a.subst(&Name::new("x"), &LTerm::var("u"));
        assert_eq!(
            instance_of(&f("forall u. x notin u"), &Name::new("x"), &out),
            Some(Some(LTerm::var("u")))
        );
    }

    #[test]
    fn axiom_and_peirce() {
        let d = parse_derivation("1: r1 [] x: A |- x : A\n").unwrap();
        assert!(check_derivation(&d).is_ok());
        let d = parse_derivation("1: r6 [] |- cc : ((A -> B) -> A) -> A").unwrap();
        let ok = check_derivation(&d).unwrap();
        assert_eq!(
            ok.formula,
            DFormula::peirce(DFormula::letter("A"), DFormula::letter("B"))
        );
        let d = parse_derivation("1: r6 [] |- cc : ((A -> B) -> A) -> B").unwrap();
        assert!(matches!(
            check_derivation(&d),
            Err(Rejection {
                node: 1,
                reason: Reason::NotPeirce(_)
            })
        ));
    }

    #[test]
    fn eigenvariable_condition() {
        let src = "1: r1 [] y: x notin a |- y : x notin a\n2: r4 [1] y: x notin a |- y : forall x. x notin a\n";
        let d = parse_derivation(src).unwrap();
        assert!(matches!(
            check_derivation(&d),
            Err(Rejection {
                node: 2,
                reason: Reason::Eigenvariable { .. }
            })
        ));
    }

    #[test]
    fn combinator_k() {
        let src = "\
1: r1 [] x: A; y: B |- x : A
2: r3 [1] x: A |- \\y. x : B -> A
3: r3 [2] |- \\x. \\y. x : A -> B -> A
";
        let ok = check_derivation(&parse_derivation(src).unwrap()).unwrap();
        assert_eq!(ok.formula, f("A -> B -> A"));
    }

    #[test]
    fn printed_derivations_reparse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let d = random_valid(&mut rng);
            assert_eq!(parse_derivation(&d.to_string()).unwrap(), d);
        }
    }

    #[test]
    fn random_schemata_are_accepted() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let d = random_valid(&mut rng);
            assert!(check_derivation(&d).is_ok(), "{d}");
        }
    }

    #[test]
    fn fuzzed_derivations_are_rejected_at_the_mutated_node() {
        for m in fuzz_malformed(0, 100) {
            let r = check_derivation(&m.derivation).expect_err("malformed");
            assert_eq!(r.node, m.node, "{:?}\n{}", m.mutation, m.derivation);
        }
    }
}
