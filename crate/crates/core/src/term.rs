//! Terms, stacks and processes of the standard realizability algebra.
//!
//! A single [`Term`] type covers both combinatory terms (built from the six
//! elementary combinators, variables, instruction constants and application)
//! and the terms of the standard algebra, which may also contain
//! continuations `k[π]`. Whether a term is a c-term, closed, or proof-like is
//! a computed predicate.
//!
//! All values are immutable and reference counted, so cloning is O(1) and
//! values can be shared freely between threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Interned identifier used for variables, instruction constants and stack
/// constants.
#[derive(Clone, Eq, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl std::hash::Hash for Name {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl PartialEq for Name {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Same allocation; implies equality.
    pub fn ptr_eq(&self, other: &Name) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

/// The six elementary combinators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Comb {
    B,
    C,
    I,
    K,
    W,
    Cc,
}

impl Comb {
    pub const ALL: [Comb; 6] = [Comb::B, Comb::C, Comb::I, Comb::K, Comb::W, Comb::Cc];

    pub fn symbol(self) -> &'static str {
        match self {
            Comb::B => "B",
            Comb::C => "C",
            Comb::I => "I",
            Comb::K => "K",
            Comb::W => "W",
            Comb::Cc => "cc",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Comb> {
        Some(match s {
            "B" => Comb::B,
            "C" => Comb::C,
            "I" => Comb::I,
            "K" => Comb::K,
            "W" => Comb::W,
            "cc" => Comb::Cc,
            _ => return None,
        })
    }

    /// Number of stack arguments the execution rule consumes.
    pub fn arity(self) -> usize {
        match self {
            Comb::I | Comb::Cc => 1,
            Comb::K | Comb::W => 2,
            Comb::B | Comb::C => 3,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Comb(Comb),
    Var(Name),
    /// Instruction (term) constant, written `#name`.
    Const(Name),
    /// Continuation `k[π]`.
    Cont(Stack),
    App(Term, Term),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term(Arc<TermKind>);

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StackKind {
    /// Stack constant, written `%name`.
    Const(Name),
    Push(Term, Stack),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Stack(Arc<StackKind>);

/// A process `head ⋆ stack`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Process {
    pub head: Term,
    pub stack: Stack,
}

impl Term {
    pub fn kind(&self) -> &TermKind {
        &self.0
    }

    pub fn comb(c: Comb) -> Term {
        Term(Arc::new(TermKind::Comb(c)))
    }

    pub fn var(name: impl Into<Name>) -> Term {
        Term(Arc::new(TermKind::Var(name.into())))
    }

    pub fn constant(name: impl Into<Name>) -> Term {
        Term(Arc::new(TermKind::Const(name.into())))
    }

    pub fn cont(stack: Stack) -> Term {
        Term(Arc::new(TermKind::Cont(stack)))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term(Arc::new(TermKind::App(fun, arg)))
    }

    /// `(self)arg₁…argₙ`, left-folded application.
    pub fn apply_all<I: IntoIterator<Item = Term>>(self, args: I) -> Term {
        args.into_iter().fold(self, Term::app)
    }

    pub fn apply(&self, arg: &Term) -> Term {
        Term::app(self.clone(), arg.clone())
    }

    pub fn is_atom(&self) -> bool {
        !matches!(self.kind(), TermKind::App(..))
    }

    pub fn as_comb(&self) -> Option<Comb> {
        match self.kind() {
            TermKind::Comb(c) => Some(*c),
            _ => None,
        }
    }

    /// Unique decomposition `t = (a)t₁…tₖ` with `a` an atom.
    pub fn spine(&self) -> (Term, Vec<Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let TermKind::App(f, a) = cur.kind() {
            args.push(a.clone());
            cur = f;
        }
        args.reverse();
        (cur.clone(), args)
    }

    /// Number of atom occurrences.
    pub fn size(&self) -> usize {
        match self.kind() {
            TermKind::App(f, a) => f.size() + a.size(),
            TermKind::Cont(s) => 1 + s.iter().map(|t| t.size()).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn contains_var(&self, x: &Name) -> bool {
        match self.kind() {
            TermKind::Var(y) => y == x,
            TermKind::App(f, a) => f.contains_var(x) || a.contains_var(x),
            TermKind::Cont(s) => s.iter().any(|t| t.contains_var(x)),
            _ => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self.kind() {
            TermKind::Var(x) => {
                out.insert(x.clone());
            }
            TermKind::App(f, a) => {
                f.collect_vars(out);
                a.collect_vars(out);
            }
            TermKind::Cont(s) => s.iter().for_each(|t| t.collect_vars(out)),
            _ => {}
        }
    }

    pub fn is_closed(&self) -> bool {
        match self.kind() {
            TermKind::Var(_) => false,
            TermKind::App(f, a) => f.is_closed() && a.is_closed(),
            TermKind::Cont(s) => s.iter().all(|t| t.is_closed()),
            _ => true,
        }
    }

    /// True iff the term is a combinatory term (no continuation anywhere).
    pub fn is_cterm(&self) -> bool {
        match self.kind() {
            TermKind::Cont(_) => false,
            TermKind::App(f, a) => f.is_cterm() && a.is_cterm(),
            _ => true,
        }
    }

    /// A term is proof-like iff it contains no continuation `k[…]`, or
    /// equivalently no stack constant.
    pub fn is_proof_like(&self) -> bool {
        self.is_cterm()
    }

    /// Instruction constants occurring in the term, continuations included.
    pub fn constants(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_consts(&mut out);
        out
    }

    fn collect_consts(&self, out: &mut BTreeSet<Name>) {
        match self.kind() {
            TermKind::Const(c) => {
                out.insert(c.clone());
            }
            TermKind::App(f, a) => {
                f.collect_consts(out);
                a.collect_consts(out);
            }
            TermKind::Cont(s) => s.collect_consts(out),
            _ => {}
        }
    }

    pub(crate) fn collect_stack_consts(&self, out: &mut BTreeSet<Name>) {
        match self.kind() {
            TermKind::App(f, a) => {
                f.collect_stack_consts(out);
                a.collect_stack_consts(out);
            }
            TermKind::Cont(s) => s.collect_stack_consts(out),
            _ => {}
        }
    }

    /// Replace variables according to `binding`; variables outside the
    /// binding are left in place.
    pub fn substitute(&self, binding: &BTreeMap<Name, Term>) -> Term {
        if binding.is_empty() {
            return self.clone();
        }
        match self.kind() {
            TermKind::Var(x) => binding.get(x).cloned().unwrap_or_else(|| self.clone()),
            TermKind::App(f, a) => Term::app(f.substitute(binding), a.substitute(binding)),
            TermKind::Cont(s) => Term::cont(s.substitute(binding)),
            _ => self.clone(),
        }
    }

    pub fn substitute_one(&self, x: &Name, value: &Term) -> Term {
        let mut b = BTreeMap::new();
        b.insert(x.clone(), value.clone());
        self.substitute(&b)
    }

    /// Replace every occurrence of the instruction constant `c` by `value`.
    pub fn replace_const(&self, c: &Name, value: &Term) -> Term {
        match self.kind() {
            TermKind::Const(d) if d == c => value.clone(),
            TermKind::App(f, a) => Term::app(f.replace_const(c, value), a.replace_const(c, value)),
            TermKind::Cont(s) => Term::cont(s.replace_const(c, value)),
            _ => self.clone(),
        }
    }
}

/// `t = (a)t₁…tₖ`: the head atom and its arguments.
pub fn decompose_head(t: &Term) -> (Term, Vec<Term>) {
    t.spine()
}

/// Homomorphic substitution of terms for variables.
pub fn substitute(t: &Term, binding: &BTreeMap<Name, Term>) -> Term {
    t.substitute(binding)
}

pub fn is_proof_like(t: &Term) -> bool {
    t.is_proof_like()
}

impl Stack {
    pub fn kind(&self) -> &StackKind {
        &self.0
    }

    pub fn constant(name: impl Into<Name>) -> Stack {
        Stack(Arc::new(StackKind::Const(name.into())))
    }

    pub fn push(top: Term, rest: Stack) -> Stack {
        Stack(Arc::new(StackKind::Push(top, rest)))
    }

    /// `t₁.t₂.….tₙ.base`
    pub fn from_terms<I>(terms: I, base: Stack) -> Stack
    where
        I: IntoIterator<Item = Term>,
        I::IntoIter: DoubleEndedIterator,
    {
        terms.into_iter().rev().fold(base, |s, t| Stack::push(t, s))
    }

    pub fn pop(&self) -> Option<(&Term, &Stack)> {
        match self.kind() {
            StackKind::Push(t, s) => Some((t, s)),
            StackKind::Const(_) => None,
        }
    }

    /// The stack constant this stack bottoms out at.
    pub fn base(&self) -> &Name {
        let mut cur = self;
        loop {
            match cur.kind() {
                StackKind::Const(c) => return c,
                StackKind::Push(_, s) => cur = s,
            }
        }
    }

    pub fn iter(&self) -> StackIter<'_> {
        StackIter { cur: self }
    }

    pub fn is_empty(&self) -> bool {
        self.is_bare()
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_bare(&self) -> bool {
        matches!(self.kind(), StackKind::Const(_))
    }

    /// Drop the first `n` elements, if present.
    pub fn skip(&self, n: usize) -> Option<&Stack> {
        let mut cur = self;
        for _ in 0..n {
            cur = cur.pop()?.1;
        }
        Some(cur)
    }

    pub fn substitute(&self, binding: &BTreeMap<Name, Term>) -> Stack {
        match self.kind() {
            StackKind::Const(_) => self.clone(),
            StackKind::Push(t, s) => Stack::push(t.substitute(binding), s.substitute(binding)),
        }
    }

    pub fn replace_const(&self, c: &Name, value: &Term) -> Stack {
        match self.kind() {
            StackKind::Const(_) => self.clone(),
            StackKind::Push(t, s) => {
                Stack::push(t.replace_const(c, value), s.replace_const(c, value))
            }
        }
    }

    pub fn is_proof_free(&self) -> bool {
        self.iter().all(|t| t.is_proof_like())
    }

    pub(crate) fn collect_consts(&self, out: &mut BTreeSet<Name>) {
        self.iter().for_each(|t| t.collect_consts(out));
    }

    pub(crate) fn collect_stack_consts(&self, out: &mut BTreeSet<Name>) {
        out.insert(self.base().clone());
        self.iter().for_each(|t| t.collect_stack_consts(out));
    }

    pub fn stack_constants(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_stack_consts(&mut out);
        out
    }
}

pub struct StackIter<'a> {
    cur: &'a Stack,
}

impl<'a> Iterator for StackIter<'a> {
    type Item = &'a Term;

    fn next(&mut self) -> Option<&'a Term> {
        let (t, rest) = self.cur.pop()?;
        self.cur = rest;
        Some(t)
    }
}

impl Process {
    pub fn new(head: Term, stack: Stack) -> Self {
        Process { head, stack }
    }

    /// Every stack constant occurring anywhere in the process, including
    /// inside continuations.
    pub fn stack_constants(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.head.collect_stack_consts(&mut out);
        self.stack.collect_stack_consts(&mut out);
        out
    }

    pub fn constants(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.head.collect_consts(&mut out);
        self.stack.collect_consts(&mut out);
        out
    }

    pub fn replace_const(&self, c: &Name, value: &Term) -> Process {
        Process::new(
            self.head.replace_const(c, value),
            self.stack.replace_const(c, value),
        )
    }
}

/// A name of the form `base`, `base'`, `base''`… not in `taken`.
pub fn fresh_name(base: &str, taken: &BTreeSet<Name>) -> Name {
    let mut candidate = base.to_string();
    while taken.contains(&Name::new(&candidate)) {
        candidate.push('\'');
    }
    Name::new(&candidate)
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            crate::syntax::print_term(self, &Default::default())
        )
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            crate::syntax::print_term(self, &Default::default())
        )
    }
}

impl fmt::Debug for Stack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            crate::syntax::print_stack(self, &Default::default())
        )
    }
}

impl fmt::Display for Stack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            crate::syntax::print_stack(self, &Default::default())
        )
    }
}

impl fmt::Debug for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            crate::syntax::print_process(self, &Default::default())
        )
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            crate::syntax::print_process(self, &Default::default())
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Term {
        Term::var(s)
    }

    #[test]
    fn spine_of_nested_application() {
        let t = Term::app(Term::app(v("x"), v("y")), v("z"));
        let (a, args) = decompose_head(&t);
        assert_eq!(a, v("x"));
        assert_eq!(args, vec![v("y"), v("z")]);
        assert_eq!(a.apply_all(args), t);
    }

    #[test]
    fn spine_of_atom() {
        let k = Term::comb(Comb::K);
        assert_eq!(decompose_head(&k), (k.clone(), vec![]));
    }

    #[test]
    fn substitution_clauses() {
        let i = Term::comb(Comb::I);
        let k = Term::comb(Comb::K);
        let mut b = BTreeMap::new();
        b.insert(Name::new("x"), i.clone());
        assert_eq!(substitute(&v("x"), &b), i);
        assert_eq!(substitute(&k, &b), k);
        b.insert(Name::new("y"), i.clone());
        b.insert(Name::new("x"), k.clone());
        assert_eq!(substitute(&Term::app(v("x"), v("y")), &b), Term::app(k, i));
    }

    #[test]
    fn unbound_variables_survive_substitution() {
        let mut b = BTreeMap::new();
        b.insert(Name::new("x"), Term::comb(Comb::I));
        let t = substitute(&Term::app(v("x"), v("z")), &b);
        assert!(!t.is_closed());
        assert_eq!(
            t.free_vars().into_iter().collect::<Vec<_>>(),
            vec![Name::new("z")]
        );
    }

    #[test]
    fn proof_like_detection() {
        let p = Stack::constant("p");
        assert!(Term::comb(Comb::B)
            .apply(&Term::comb(Comb::W))
            .is_proof_like());
        assert!(!Term::cont(p.clone()).is_proof_like());
        assert!(!Term::comb(Comb::I).apply(&Term::cont(p)).is_proof_like());
    }

    #[test]
    fn stack_constants_inside_continuations() {
        let inner = Stack::constant("pi1");
        let s = Stack::push(Term::cont(inner), Stack::constant("pi0"));
        let p = Process::new(Term::comb(Comb::I), s);
        let names: Vec<_> = p
            .stack_constants()
            .into_iter()
            .map(|n| n.to_string())
            .collect();
        assert_eq!(names, vec!["pi0", "pi1"]);
    }
}
