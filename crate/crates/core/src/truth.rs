//! Elementary formulas and their truth values over finite interpretations.
//!
//! A truth value is a finite set of stacks. `‖⊥‖` is a supplied set of base
//! stacks, integer quantifiers range over `0..=bound`, and the realizers
//! quantified over in an implication come from a supplied candidate list, so
//! every value is exact relative to those choices.
//!
//! The same clauses are evaluated over the extended algebra, with stacks
//! paired with conditions, to check the correspondence between
//! `(π,p) ∈ ‖U‖_B` and `π ∈ ‖U_p‖`.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use smallvec::SmallVec;
use thiserror::Error;

use crate::combinators::numeral;
use crate::kam::DEFAULT_BUDGET;
use crate::pole::{Membership, Pole};
use crate::star::{self, bbot_member, default_window, lle, meet, BMember, BProcess, Condition};
use crate::syntax::{parse_condition, print_condition};
use crate::term::{Name, Process, Stack, Term};

pub const DEFAULT_INT_BOUND: u64 = 5;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundValue {
    Nat(u64),
    Cond(Condition),
    Tuple(Vec<GroundValue>),
}

impl fmt::Debug for GroundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GroundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundValue::Nat(n) => write!(f, "{n}"),
            GroundValue::Cond(c) => f.write_str(&print_condition(c)),
            GroundValue::Tuple(vs) => {
                let parts: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                write!(f, "({})", parts.join(", "))
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum GroundExpr {
    Val(GroundValue),
    Var(Name),
    Meet(Box<GroundExpr>, Box<GroundExpr>),
    Lle(Box<GroundExpr>, Box<GroundExpr>),
}

impl GroundExpr {
    pub fn nat(n: u64) -> GroundExpr {
        GroundExpr::Val(GroundValue::Nat(n))
    }

    pub fn cond(c: Condition) -> GroundExpr {
        GroundExpr::Val(GroundValue::Cond(c))
    }

    pub fn var(x: &Name) -> GroundExpr {
        GroundExpr::Var(x.clone())
    }

    fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            GroundExpr::Val(_) => {}
            GroundExpr::Var(x) => {
                out.insert(x.clone());
            }
            GroundExpr::Meet(a, b) | GroundExpr::Lle(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

impl fmt::Display for GroundExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundExpr::Val(v) => write!(f, "{v}"),
            GroundExpr::Var(x) => write!(f, "{x}"),
            GroundExpr::Meet(a, b) => write!(f, "meet({a}, {b})"),
            GroundExpr::Lle(a, b) => write!(f, "lle({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("ill-typed ground expression {0}")]
    IllTyped(String),
}

/// Variable bindings, innermost last.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env(Vec<(Name, GroundValue)>);

impl Env {
    pub fn new() -> Self {
        Env(Vec::new())
    }

    pub fn get(&self, x: &Name) -> Option<&GroundValue> {
        self.0
            .iter()
            .rev()
            .find(|(y, _)| y.ptr_eq(x))
            .or_else(|| self.0.iter().rev().find(|(y, _)| y == x))
            .map(|(_, v)| v)
    }

    pub fn bind(mut self, x: Name, v: GroundValue) -> Self {
        self.0.push((x, v));
        self
    }

    fn push(&mut self, x: &Name, v: GroundValue) {
        self.0.push((x.clone(), v));
    }

    fn pop(&mut self) {
        self.0.pop();
    }
}

pub fn eval_expr(e: &GroundExpr, env: &Env) -> Result<GroundValue, EvalError> {
    match e {
        GroundExpr::Val(v) => Ok(v.clone()),
        GroundExpr::Var(x) => env
            .get(x)
            .cloned()
            .ok_or_else(|| EvalError::Unbound(x.to_string())),
        GroundExpr::Meet(a, b) => match (eval_expr(a, env)?, eval_expr(b, env)?) {
            (GroundValue::Cond(p), GroundValue::Cond(q)) => Ok(GroundValue::Cond(meet(&p, &q))),
            _ => Err(EvalError::IllTyped(e.to_string())),
        },
        GroundExpr::Lle(a, b) => match (eval_expr(a, env)?, eval_expr(b, env)?) {
            (GroundValue::Cond(p), GroundValue::Nat(n)) => Ok(GroundValue::Nat(lle(&p, n))),
            _ => Err(EvalError::IllTyped(e.to_string())),
        },
    }
}

/// A ground value computed without cloning: `meet` always returns one of
/// its arguments or O.
#[derive(Clone, Copy)]
enum ValRef<'a> {
    Ref(&'a GroundValue),
    Nat(u64),
    Bottom,
}

impl ValRef<'_> {
    fn cond(&self) -> Option<CondRef<'_>> {
        match self {
            ValRef::Ref(GroundValue::Cond(Condition::Seq(s))) => Some(CondRef::Seq(s)),
            ValRef::Ref(GroundValue::Cond(Condition::Bottom)) | ValRef::Bottom => {
                Some(CondRef::Bottom)
            }
            _ => None,
        }
    }

    fn nat(&self) -> Option<u64> {
        match self {
            ValRef::Ref(GroundValue::Nat(n)) | ValRef::Nat(n) => Some(*n),
            _ => None,
        }
    }

    fn same(&self, other: &ValRef<'_>) -> bool {
        if let (Some(a), Some(b)) = (self.cond(), other.cond()) {
            return match (a, b) {
                (CondRef::Bottom, CondRef::Bottom) => true,
                (CondRef::Seq(x), CondRef::Seq(y)) => x == y,
                _ => false,
            };
        }
        if let (Some(a), Some(b)) = (self.nat(), other.nat()) {
            return a == b;
        }
        match (self, other) {
            (ValRef::Ref(a), ValRef::Ref(b)) => a == b,
            _ => false,
        }
    }
}

#[derive(Clone, Copy)]
enum CondRef<'a> {
    Seq(&'a [u64]),
    Bottom,
}

fn eval_ref<'a>(e: &'a GroundExpr, env: &'a Env) -> Result<ValRef<'a>, EvalError> {
    match e {
        GroundExpr::Val(v) => Ok(ValRef::Ref(v)),
        GroundExpr::Var(x) => env
            .get(x)
            .map(ValRef::Ref)
            .ok_or_else(|| EvalError::Unbound(x.to_string())),
        GroundExpr::Meet(a, b) => {
            let (va, vb) = (eval_ref(a, env)?, eval_ref(b, env)?);
            match (va.cond(), vb.cond()) {
                (Some(CondRef::Seq(x)), Some(CondRef::Seq(y))) => {
                    let (short, long, lv) = if x.len() <= y.len() {
                        (x, y, vb)
                    } else {
                        (y, x, va)
                    };
                    Ok(if long.starts_with(short) {
                        lv
                    } else {
                        ValRef::Bottom
                    })
                }
                (Some(_), Some(_)) => Ok(ValRef::Bottom),
                _ => Err(EvalError::IllTyped(e.to_string())),
            }
        }
        GroundExpr::Lle(a, b) => {
            let (va, vb) = (eval_ref(a, env)?, eval_ref(b, env)?);
            match (va.cond(), vb.nat()) {
                (Some(CondRef::Bottom), Some(_)) => Ok(ValRef::Nat(0)),
                (Some(CondRef::Seq(s)), Some(n)) => Ok(ValRef::Nat(u64::from(s.len() as u64 <= n))),
                _ => Err(EvalError::IllTyped(e.to_string())),
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum FormulaKind {
    Top,
    Bot,
    EqHook(GroundExpr, GroundExpr, Formula),
    ForallFin(Name, Vec<GroundValue>, Formula),
    Imp(Formula, Formula),
    /// `∀n^int U` with `n` ranging over `0..=bound`; starred instances push
    /// n̄* instead of n̄.
    ForallInt {
        var: Name,
        bound: u64,
        starred: bool,
        body: Formula,
    },
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Formula(Arc<FormulaKind>);

impl Formula {
    pub fn kind(&self) -> &FormulaKind {
        &self.0
    }

    pub(crate) fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn top() -> Formula {
        Formula(Arc::new(FormulaKind::Top))
    }

    pub fn bot() -> Formula {
        Formula(Arc::new(FormulaKind::Bot))
    }

    pub fn hook(a: GroundExpr, b: GroundExpr, body: Formula) -> Formula {
        Formula(Arc::new(FormulaKind::EqHook(a, b, body)))
    }

    pub fn forall_fin(x: Name, range: Vec<GroundValue>, body: Formula) -> Formula {
        Formula(Arc::new(FormulaKind::ForallFin(x, range, body)))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula(Arc::new(FormulaKind::Imp(a, b)))
    }

    pub fn forall_int(var: Name, bound: u64, body: Formula) -> Formula {
        Formula(Arc::new(FormulaKind::ForallInt {
            var,
            bound,
            starred: false,
            body,
        }))
    }

    pub fn forall_int_starred(var: Name, bound: u64, body: Formula) -> Formula {
        Formula(Arc::new(FormulaKind::ForallInt {
            var,
            bound,
            starred: true,
            body,
        }))
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        match self.kind() {
            FormulaKind::Top | FormulaKind::Bot => {}
            FormulaKind::EqHook(a, b, body) => {
                a.collect_vars(&mut out);
                b.collect_vars(&mut out);
                out.extend(body.free_vars());
            }
            FormulaKind::ForallFin(x, _, body) | FormulaKind::ForallInt { var: x, body, .. } => {
                out.extend(body.free_vars());
                out.remove(x);
            }
            FormulaKind::Imp(a, b) => {
                out.extend(a.free_vars());
                out.extend(b.free_vars());
            }
        }
        out
    }

    pub fn is_implication_free(&self) -> bool {
        match self.kind() {
            FormulaKind::Top | FormulaKind::Bot => true,
            FormulaKind::EqHook(_, _, b) | FormulaKind::ForallFin(_, _, b) => {
                b.is_implication_free()
            }
            FormulaKind::ForallInt { body, .. } => body.is_implication_free(),
            FormulaKind::Imp(..) => false,
        }
    }

    /// Constructor nesting depth; ⊤ and ⊥ have depth 0.
    pub fn depth(&self) -> usize {
        match self.kind() {
            FormulaKind::Top | FormulaKind::Bot => 0,
            FormulaKind::EqHook(_, _, b) | FormulaKind::ForallFin(_, _, b) => 1 + b.depth(),
            FormulaKind::ForallInt { body, .. } => 1 + body.depth(),
            FormulaKind::Imp(a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            FormulaKind::Top => f.write_str("T"),
            FormulaKind::Bot => f.write_str("F"),
            FormulaKind::EqHook(a, b, body) => write!(f, "[{a}={b}]=> {}", Paren(body)),
            FormulaKind::ForallFin(x, range, body) => {
                let vs: Vec<String> = range.iter().map(|v| v.to_string()).collect();
                write!(f, "forall {x} in {{{}}}. {}", vs.join(", "), Paren(body))
            }
            FormulaKind::Imp(a, b) => write!(f, "{} -> {}", Paren(a), Paren(b)),
            FormulaKind::ForallInt {
                var,
                bound,
                starred,
                body,
            } => {
                let s = if *starred { "*" } else { "" };
                write!(f, "forall_int{s}^{bound} {var}. {}", Paren(body))
            }
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

struct Paren<'a>(&'a Formula);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.kind() {
            FormulaKind::Top | FormulaKind::Bot => write!(f, "{}", self.0),
            _ => write!(f, "({})", self.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("formula parse error at byte {pos}: {msg}")]
pub struct FormulaParseError {
    pub pos: usize,
    pub msg: String,
}

/// Parse the formula syntax: `T`, `F`, `[a=b]=> U`, `forall x in {v, …}. U`,
/// `U -> V` (right associative), `forall_int^k n. U`, `forall_int n. U`,
/// parentheses. Ground values are naturals, conditions (`O`, `<>`, `<1,2>`)
/// and tuples `(v, w)`; expressions add variables, `meet(e, e)` and
/// `lle(e, e)`.
pub fn parse_formula(src: &str) -> Result<Formula, FormulaParseError> {
    let mut p = FParser { src, at: 0 };
    let f = p.formula()?;
    p.ws();
    if p.at < src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}

struct FParser<'a> {
    src: &'a str,
    at: usize,
}

impl FParser<'_> {
    fn err(&self, msg: &str) -> FormulaParseError {
        FormulaParseError {
            pos: self.at,
            msg: msg.to_string(),
        }
    }

    fn rest(&self) -> &str {
        &self.src[self.at..]
    }

    fn ws(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if c.is_whitespace() {
                self.at += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        self.ws();
        if self.rest().starts_with(s) {
            self.at += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), FormulaParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{s}'")))
        }
    }

    fn ident(&mut self) -> Result<String, FormulaParseError> {
        self.ws();
        let s: String = self
            .rest()
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric() || *c == '_' || *c == '$' || *c == '\'')
            .collect();
        if s.is_empty() || s.chars().next().is_some_and(|c| c.is_ascii_digit()) {
            return Err(self.err("expected identifier"));
        }
        self.at += s.len();
        Ok(s)
    }

    fn keyword(&mut self, kw: &str) -> bool {
        self.ws();
        if let Some(after) = self.rest().strip_prefix(kw) {
            if !after.starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_') {
                self.at += kw.len();
                return true;
            }
        }
        false
    }

    fn nat(&mut self) -> Result<u64, FormulaParseError> {
        self.ws();
        let s: String = self
            .rest()
            .chars()
            .take_while(|c| c.is_ascii_digit())
            .collect();
        if s.is_empty() {
            return Err(self.err("expected a natural number"));
        }
        self.at += s.len();
        s.parse().map_err(|_| self.err("number out of range"))
    }

    fn formula(&mut self) -> Result<Formula, FormulaParseError> {
        let lhs = self.unary()?;
        if self.eat("->") {
            let rhs = self.formula()?;
            return Ok(Formula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, FormulaParseError> {
        self.ws();
        if self.eat("(") {
            let f = self.formula()?;
            self.expect(")")?;
            return Ok(f);
        }
        if self.eat("[") {
            let a = self.expr()?;
            self.expect("=")?;
            let b = self.expr()?;
            self.expect("]")?;
            self.expect("=>")?;
            let body = self.formula()?;
            return Ok(Formula::hook(a, b, body));
        }
        if self.keyword("forall_int") {
            let starred = self.eat("*");
            let bound = if self.eat("^") {
                self.nat()?
            } else {
                DEFAULT_INT_BOUND
            };
            let var = self.ident()?;
            self.expect(".")?;
            let body = self.formula()?;
            let var = Name::new(&var);
            return Ok(if starred {
                Formula::forall_int_starred(var, bound, body)
            } else {
                Formula::forall_int(var, bound, body)
            });
        }
        if self.keyword("forall") {
            let var = self.ident()?;
            if !self.keyword("in") {
                return Err(self.err("expected 'in'"));
            }
            self.expect("{")?;
            let mut range = Vec::new();
            if !self.eat("}") {
                loop {
                    range.push(self.value()?);
                    if self.eat("}") {
                        break;
                    }
                    self.expect(",")?;
                }
            }
            self.expect(".")?;
            let body = self.formula()?;
            return Ok(Formula::forall_fin(Name::new(&var), range, body));
        }
        if self.keyword("T") {
            return Ok(Formula::top());
        }
        if self.keyword("F") {
            return Ok(Formula::bot());
        }
        Err(self.err("expected a formula"))
    }

    fn condition(&mut self) -> Result<Condition, FormulaParseError> {
        self.ws();
        let start = self.at;
        let end = if self.rest().starts_with('O') {
            start + 1
        } else {
            match self.rest().find('>') {
                Some(i) => start + i + 1,
                None => return Err(self.err("unterminated condition")),
            }
        };
        let text = &self.src[start..end];
        let c = parse_condition(text).map_err(|e| FormulaParseError {
            pos: start + e.pos,
            msg: e.msg,
        })?;
        self.at = end;
        Ok(c)
    }

    fn value(&mut self) -> Result<GroundValue, FormulaParseError> {
        self.ws();
        let r = self.rest();
        if r.starts_with('<')
            || (r.starts_with('O') && !r[1..].starts_with(|c: char| c.is_ascii_alphanumeric()))
        {
            return Ok(GroundValue::Cond(self.condition()?));
        }
        if self.eat("(") {
            let mut vs = vec![self.value()?];
            while self.eat(",") {
                vs.push(self.value()?);
            }
            self.expect(")")?;
            return Ok(GroundValue::Tuple(vs));
        }
        Ok(GroundValue::Nat(self.nat()?))
    }

    fn expr(&mut self) -> Result<GroundExpr, FormulaParseError> {
        self.ws();
        for (kw, is_meet) in [("meet", true), ("lle", false)] {
            let save = self.at;
            if self.keyword(kw) {
                if self.eat("(") {
                    let a = self.expr()?;
                    self.expect(",")?;
                    let b = self.expr()?;
                    self.expect(")")?;
                    let (a, b) = (Box::new(a), Box::new(b));
                    return Ok(if is_meet {
                        GroundExpr::Meet(a, b)
                    } else {
                        GroundExpr::Lle(a, b)
                    });
                }
                self.at = save;
            }
        }
        let r = self.rest();
        let c = r.chars().next();
        let is_cond_o = r.starts_with('O')
            && !r[1..].starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_');
        if c.is_some_and(|c| c.is_ascii_digit() || c == '<' || c == '(') || is_cond_o {
            return Ok(GroundExpr::Val(self.value()?));
        }
        Ok(GroundExpr::Var(Name::new(&self.ident()?)))
    }
}

/// Ranges used by the condition transforms.
#[derive(Debug, Clone)]
pub struct Space {
    pub conditions: Vec<Condition>,
    pub int_bound: u64,
}

impl Space {
    /// All sequences of length at most `len` over `0..alphabet`, plus O.
    pub fn sequences(len: usize, alphabet: u64, int_bound: u64) -> Space {
        let mut conds = vec![Condition::Bottom];
        let mut layer: Vec<Vec<u64>> = vec![vec![]];
        for _ in 0..=len {
            let mut next = Vec::new();
            for s in &layer {
                conds.push(Condition::seq(s.clone()));
                for a in 0..alphabet {
                    let mut t = s.clone();
                    t.push(a);
                    next.push(t);
                }
            }
            layer = next;
        }
        Space {
            conditions: conds,
            int_bound,
        }
    }

    fn values(&self) -> Vec<GroundValue> {
        self.conditions
            .iter()
            .cloned()
            .map(GroundValue::Cond)
            .collect()
    }
}

impl Default for Space {
    fn default() -> Self {
        Space::sequences(2, 2, DEFAULT_INT_BOUND)
    }
}

/// Level of the binders introduced by the transforms: one more than any
/// transform variable `$q<k>`, `$r<k>`, `$n<k>` already in `p`. Binders
/// never capture, and equal inputs give syntactically equal outputs, which
/// lets evaluation share work between formulas.
fn next_level(p: &GroundExpr) -> usize {
    let mut vars = BTreeSet::new();
    p.collect_vars(&mut vars);
    vars.iter()
        .filter_map(|x| {
            x.as_str()
                .strip_prefix('$')
                .and_then(|s| s.get(1..)?.parse::<usize>().ok())
        })
        .map(|k| k + 1)
        .max()
        .unwrap_or(0)
}

fn binder(prefix: char, k: usize) -> Name {
    thread_local! {
        static NAMES: RefCell<HashMap<(char, usize), Name>> = RefCell::new(HashMap::default());
    }
    NAMES.with(|m| {
        m.borrow_mut()
            .entry((prefix, k))
            .or_insert_with(|| Name::new(&format!("${prefix}{k}")))
            .clone()
    })
}

/// A cache whose entries are either kept or dropped with the scratch layer.
struct Layered<K, V> {
    base: HashMap<K, V>,
    scratch: HashMap<K, V>,
}

impl<K: Hash + Eq, V> Default for Layered<K, V> {
    fn default() -> Self {
        Layered {
            base: HashMap::default(),
            scratch: HashMap::default(),
        }
    }
}

impl<K: Hash + Eq, V> Layered<K, V> {
    fn get(&self, k: &K) -> Option<&V> {
        self.scratch.get(k).or_else(|| self.base.get(k))
    }

    fn insert(&mut self, k: K, v: V, keep: bool) {
        if keep {
            self.base.insert(k, v);
        } else {
            self.scratch.insert(k, v);
        }
    }

    fn clear_scratch(&mut self) {
        self.scratch = HashMap::default();
    }
}

/// Cached `U ↦ U_p` and `U ↦ U^p`.
///
/// Pinned formulas, and everything derived from them, are cached for good;
/// the rest lives until [`Transformer::discard_scratch`].
pub struct Transformer<'s> {
    space: &'s Space,
    values: Vec<GroundValue>,
    sub: Layered<(usize, GroundExpr), Formula>,
    sup: Layered<(usize, GroundExpr), Formula>,
    pinned: HashSet<usize>,
    keep: Vec<Formula>,
    keep_scratch: Vec<Formula>,
}

impl<'s> Transformer<'s> {
    pub fn new(space: &'s Space) -> Self {
        Transformer {
            space,
            values: space.values(),
            sub: Layered::default(),
            sup: Layered::default(),
            pinned: HashSet::default(),
            keep: Vec::new(),
            keep_scratch: Vec::new(),
        }
    }

    /// Keep `f` and its subformulas, and all results derived from them.
    pub fn pin(&mut self, f: &Formula) {
        if !self.pinned.insert(f.id()) {
            return;
        }
        self.keep.push(f.clone());
        match f.kind() {
            FormulaKind::Top | FormulaKind::Bot => {}
            FormulaKind::EqHook(_, _, b)
            | FormulaKind::ForallFin(_, _, b)
            | FormulaKind::ForallInt { body: b, .. } => self.pin(b),
            FormulaKind::Imp(a, b) => {
                self.pin(a);
                self.pin(b);
            }
        }
    }

    fn is_pinned(&self, f: &Formula) -> bool {
        self.pinned.contains(&f.id())
    }

    fn remember(&mut self, sup: bool, u: &Formula, p: &GroundExpr, out: &Formula) {
        let keep = self.is_pinned(u);
        if keep {
            self.pin(out);
        } else {
            self.keep_scratch.push(u.clone());
        }
        let cache = if sup { &mut self.sup } else { &mut self.sub };
        cache.insert((u.id(), p.clone()), out.clone(), keep);
    }

    pub fn discard_scratch(&mut self) {
        self.sub.clear_scratch();
        self.sup.clear_scratch();
        self.keep_scratch.clear();
    }

    /// `U_p`. Implication becomes a guarded quantification over the
    /// factorisations `p = qr` in the space; integer quantifiers become
    /// starred.
    pub fn sub(&mut self, u: &Formula, p: &GroundExpr) -> Formula {
        let key = (u.id(), p.clone());
        if let Some(f) = self.sub.get(&key) {
            return f.clone();
        }
        let out = match u.kind() {
            FormulaKind::Top | FormulaKind::Bot => u.clone(),
            FormulaKind::EqHook(a, b, body) => {
                Formula::hook(a.clone(), b.clone(), self.sub(body, p))
            }
            FormulaKind::ForallFin(x, range, body) => {
                Formula::forall_fin(x.clone(), range.clone(), self.sub(body, p))
            }
            FormulaKind::Imp(a, b) => {
                let k = next_level(p);
                let (q, r) = (binder('q', k), binder('r', k));
                let inner = Formula::imp(
                    self.sup(a, &GroundExpr::var(&q)),
                    self.sub(b, &GroundExpr::var(&r)),
                );
                let guarded = Formula::hook(
                    p.clone(),
                    GroundExpr::Meet(Box::new(GroundExpr::var(&q)), Box::new(GroundExpr::var(&r))),
                    inner,
                );
                let vals = &self.values;
                Formula::forall_fin(
                    q,
                    vals.clone(),
                    Formula::forall_fin(r, vals.clone(), guarded),
                )
            }
            FormulaKind::ForallInt {
                var, bound, body, ..
            } => Formula::forall_int_starred(var.clone(), *bound, self.sub(body, p)),
        };
        self.remember(false, u, p, &out);
        out
    }

    /// `U^p = ∀q ∀n^int ((pq ≤ n) = 1 ↪ U_q)`.
    pub fn sup(&mut self, u: &Formula, p: &GroundExpr) -> Formula {
        let key = (u.id(), p.clone());
        if let Some(f) = self.sup.get(&key) {
            return f.clone();
        }
        let k = next_level(p);
        let (q, n) = (binder('q', k), binder('n', k));
        let guard = GroundExpr::Lle(
            Box::new(GroundExpr::Meet(
                Box::new(p.clone()),
                Box::new(GroundExpr::var(&q)),
            )),
            Box::new(GroundExpr::var(&n)),
        );
        let body = Formula::hook(guard, GroundExpr::nat(1), self.sub(u, &GroundExpr::var(&q)));
        let out = Formula::forall_fin(
            q,
            self.values.clone(),
            Formula::forall_int(n, self.space.int_bound, body),
        );
        self.remember(true, u, p, &out);
        out
    }
}

pub fn sub_transform(u: &Formula, p: &GroundExpr, space: &Space) -> Formula {
    Transformer::new(space).sub(u, p)
}

pub fn sup_transform(u: &Formula, p: &GroundExpr, space: &Space) -> Formula {
    Transformer::new(space).sup(u, p)
}

/// The finite interpretation: base stacks for ⊥, the candidate realizers
/// for implications, and the pole.
#[derive(Debug, Clone)]
pub struct Interp {
    pub base_stacks: Vec<Stack>,
    pub candidates: Vec<Term>,
    pub pole: Pole,
    pub budget: usize,
}

impl Interp {
    pub fn new(base_stacks: Vec<Stack>, candidates: Vec<Term>, pole: Pole) -> Self {
        Interp {
            base_stacks,
            candidates,
            pole,
            budget: DEFAULT_BUDGET,
        }
    }

    /// One base stack `%p`, candidate `I`, the empty pole.
    pub fn empty_pole() -> Self {
        Interp::new(
            vec![Stack::constant("p")],
            vec![Term::comb(crate::Comb::I)],
            Pole::Empty,
        )
    }
}

pub type StackSet = BTreeSet<Stack>;
pub type BStackSet = BTreeSet<(Stack, Condition)>;

type MemoKey = (usize, SmallVec<[GroundValue; 3]>);
type Ids = Arc<Vec<u32>>;
type BIds = Arc<Vec<(u32, u32)>>;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    Base(u32),
    Push(u32, u32),
}

/// Stacks, terms and conditions interned as small integers.
#[derive(Default)]
struct Arena {
    terms: Vec<Term>,
    term_ids: HashMap<Term, u32>,
    nodes: Vec<Node>,
    node_ids: HashMap<Node, u32>,
    stacks: Vec<Option<Stack>>,
    conds: Vec<Condition>,
    cond_ids: HashMap<Condition, u32>,
    meets: HashMap<(u32, u32), u32>,
}

impl Arena {
    fn term(&mut self, t: &Term) -> u32 {
        if let Some(&i) = self.term_ids.get(t) {
            return i;
        }
        let i = self.terms.len() as u32;
        self.terms.push(t.clone());
        self.term_ids.insert(t.clone(), i);
        i
    }

    fn node(&mut self, n: Node) -> u32 {
        if let Some(&i) = self.node_ids.get(&n) {
            return i;
        }
        let i = self.nodes.len() as u32;
        self.nodes.push(n);
        self.stacks.push(None);
        self.node_ids.insert(n, i);
        i
    }

    fn stack(&mut self, id: u32) -> Stack {
        if let Some(s) = &self.stacks[id as usize] {
            return s.clone();
        }
        let s = match self.nodes[id as usize] {
            Node::Base(_) => unreachable!("base stacks are stored when interned"),
            Node::Push(t, rest) => Stack::push(self.terms[t as usize].clone(), self.stack(rest)),
        };
        self.stacks[id as usize] = Some(s.clone());
        s
    }

    fn cond(&mut self, c: &Condition) -> u32 {
        if let Some(&i) = self.cond_ids.get(c) {
            return i;
        }
        let i = self.conds.len() as u32;
        self.conds.push(c.clone());
        self.cond_ids.insert(c.clone(), i);
        i
    }

    fn meet(&mut self, a: u32, b: u32) -> u32 {
        if let Some(&m) = self.meets.get(&(a, b)) {
            return m;
        }
        let c = meet(&self.conds[a as usize], &self.conds[b as usize]);
        let m = self.cond(&c);
        self.meets.insert((a, b), m);
        m
    }
}

fn sorted<T: Ord>(mut v: Vec<T>) -> Arc<Vec<T>> {
    v.sort_unstable();
    v.dedup();
    Arc::new(v)
}

/// Memoised evaluator for one interpretation and condition space.
///
/// Truth values are cached per formula node and the values of its free
/// variables, and the nodes seen are kept alive, so formulas sharing
/// subformulas share work.
pub struct Evaluator<'a> {
    interp: &'a Interp,
    space: &'a Space,
    transformer: Transformer<'a>,
    arena: Arena,
    bases: Vec<u32>,
    candidates: Vec<u32>,
    space_conds: Vec<u32>,
    nums: HashMap<(u64, bool), u32>,
    fv: Layered<usize, Arc<Vec<Name>>>,
    memo_a: Layered<MemoKey, Ids>,
    memo_b: Layered<MemoKey, BIds>,
    memo_empty: Layered<MemoKey, bool>,
    pole_a: HashMap<(u32, u32), Membership>,
    real_a: Layered<(u32, MemoKey), Membership>,
    real_b: Layered<(u32, u32, MemoKey), Membership>,
    pole_b: HashMap<(u32, u32, u32), BMember>,
    keep_scratch: Vec<Formula>,
}

impl<'a> Evaluator<'a> {
    pub fn new(interp: &'a Interp, space: &'a Space) -> Self {
        let mut arena = Arena::default();
        let bases = interp
            .base_stacks
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let id = arena.node(Node::Base(i as u32));
                arena.stacks[id as usize] = Some(s.clone());
                id
            })
            .collect();
        let candidates = interp.candidates.iter().map(|t| arena.term(t)).collect();
        let space_conds = space.conditions.iter().map(|c| arena.cond(c)).collect();
        Evaluator {
            interp,
            space,
            transformer: Transformer::new(space),
            arena,
            bases,
            candidates,
            space_conds,
            nums: HashMap::default(),
            fv: Layered::default(),
            memo_a: Layered::default(),
            memo_b: Layered::default(),
            memo_empty: Layered::default(),
            pole_a: HashMap::default(),
            real_a: Layered::default(),
            real_b: Layered::default(),
            pole_b: HashMap::default(),
            keep_scratch: Vec::new(),
        }
    }

    pub fn transformer(&mut self) -> &mut Transformer<'a> {
        &mut self.transformer
    }

    /// Keep the work done on `f` and its subformulas across
    /// [`Evaluator::discard_scratch`].
    pub fn pin(&mut self, f: &Formula) {
        self.transformer.pin(f);
    }

    /// Drop everything cached about formulas that are not pinned.
    pub fn discard_scratch(&mut self) {
        self.transformer.discard_scratch();
        self.fv.clear_scratch();
        self.memo_a.clear_scratch();
        self.memo_b.clear_scratch();
        self.memo_empty.clear_scratch();
        self.real_a.clear_scratch();
        self.real_b.clear_scratch();
        self.keep_scratch.clear();
    }

    fn kept(&self, key: &MemoKey) -> bool {
        self.transformer.pinned.contains(&key.0)
    }

    fn numeral(&mut self, n: u64, starred: bool) -> u32 {
        if let Some(&i) = self.nums.get(&(n, starred)) {
            return i;
        }
        let t = if starred {
            star::star_numeral(n as usize)
        } else {
            numeral(n as usize)
        };
        let i = self.arena.term(&t);
        self.nums.insert((n, starred), i);
        i
    }

    fn push(&mut self, t: u32, s: u32) -> u32 {
        self.arena.node(Node::Push(t, s))
    }

    fn key(&mut self, f: &Formula, env: &Env) -> MemoKey {
        let id = f.id();
        let fv = self.free_vars_of(f);
        let bound = fv.iter().filter_map(|x| env.get(x).cloned()).collect();
        (id, bound)
    }

    /// [`Formula::free_vars`], cached per node.
    fn free_vars_of(&mut self, f: &Formula) -> Arc<Vec<Name>> {
        if let Some(v) = self.fv.get(&f.id()) {
            return v.clone();
        }
        let mut out = BTreeSet::new();
        match f.kind() {
            FormulaKind::Top | FormulaKind::Bot => {}
            FormulaKind::EqHook(a, b, body) => {
                a.collect_vars(&mut out);
                b.collect_vars(&mut out);
                out.extend(self.free_vars_of(body).iter().cloned());
            }
            FormulaKind::ForallFin(x, _, body) | FormulaKind::ForallInt { var: x, body, .. } => {
                out.extend(self.free_vars_of(body).iter().cloned());
                out.remove(x);
            }
            FormulaKind::Imp(a, b) => {
                out.extend(self.free_vars_of(a).iter().cloned());
                out.extend(self.free_vars_of(b).iter().cloned());
            }
        }
        let v = Arc::new(out.into_iter().collect::<Vec<_>>());
        let keep = self.transformer.is_pinned(f);
        if !keep {
            self.keep_scratch.push(f.clone());
        }
        self.fv.insert(f.id(), v.clone(), keep);
        v
    }

    fn hook_holds(a: &GroundExpr, b: &GroundExpr, env: &Env) -> Result<bool, EvalError> {
        Ok(eval_ref(a, env)?.same(&eval_ref(b, env)?))
    }

    fn tv_ids(&mut self, f: &Formula, env: &mut Env) -> Result<Ids, EvalError> {
        if let FormulaKind::EqHook(a, b, body) = f.kind() {
            return if Self::hook_holds(a, b, env)? {
                self.tv_ids(body, env)
            } else {
                Ok(Arc::new(Vec::new()))
            };
        }
        let key = self.key(f, env);
        if let Some(v) = self.memo_a.get(&key) {
            return Ok(v.clone());
        }
        let out: Ids = match f.kind() {
            FormulaKind::Top => Arc::new(Vec::new()),
            FormulaKind::Bot => sorted(self.bases.clone()),
            FormulaKind::EqHook(a, b, body) => {
                if Self::hook_holds(a, b, env)? {
                    self.tv_ids(body, env)?
                } else {
                    Arc::new(Vec::new())
                }
            }
            FormulaKind::ForallFin(x, range, body) => {
                let mut acc = Vec::new();
                for v in range {
                    env.push(x, v.clone());
                    let r = self.tv_ids(body, env);
                    env.pop();
                    acc.extend(r?.iter().copied());
                }
                sorted(acc)
            }
            FormulaKind::Imp(a, b) => {
                let rhs = self.tv_ids(b, env)?;
                let mut acc = Vec::new();
                if !rhs.is_empty() {
                    for xi in self.candidates.clone() {
                        if self.realizes_id(xi, a, env)? == Membership::Yes {
                            for &pi in rhs.iter() {
                                acc.push(self.push(xi, pi));
                            }
                        }
                    }
                }
                sorted(acc)
            }
            FormulaKind::ForallInt {
                var,
                bound,
                starred,
                body,
            } => {
                let mut acc = Vec::new();
                for n in 0..=*bound {
                    env.push(var, GroundValue::Nat(n));
                    let num = self.numeral(n, *starred);
                    let r = self.tv_ids(body, env);
                    env.pop();
                    for &pi in r?.iter() {
                        acc.push(self.push(num, pi));
                    }
                }
                sorted(acc)
            }
        };
        let k = self.kept(&key);
        self.memo_a.insert(key, out.clone(), k);
        Ok(out)
    }

    fn realizes_id(
        &mut self,
        xi: u32,
        f: &Formula,
        env: &mut Env,
    ) -> Result<Membership, EvalError> {
        let key = (xi, self.key(f, env));
        if let Some(&m) = self.real_a.get(&key) {
            return Ok(m);
        }
        let m = self.realizes_uncached(xi, f, env)?;
        let k = self.kept(&key.1);
        self.real_a.insert(key, m, k);
        Ok(m)
    }

    fn realizes_uncached(
        &mut self,
        xi: u32,
        f: &Formula,
        env: &mut Env,
    ) -> Result<Membership, EvalError> {
        let tv = self.tv_ids(f, env)?;
        let mut verdict = Membership::Yes;
        for &pi in tv.iter() {
            let m = match self.pole_a.get(&(xi, pi)) {
                Some(&m) => m,
                None => {
                    let p =
                        Process::new(self.arena.terms[xi as usize].clone(), self.arena.stack(pi));
                    let m = self.interp.pole.member_with_budget(&p, self.interp.budget);
                    self.pole_a.insert((xi, pi), m);
                    m
                }
            };
            match m {
                Membership::Yes => {}
                Membership::No => return Ok(Membership::No),
                Membership::Unknown => verdict = Membership::Unknown,
            }
        }
        Ok(verdict)
    }

    fn tv_b_ids(&mut self, f: &Formula, env: &mut Env) -> Result<BIds, EvalError> {
        if let FormulaKind::EqHook(a, b, body) = f.kind() {
            return if Self::hook_holds(a, b, env)? {
                self.tv_b_ids(body, env)
            } else {
                Ok(Arc::new(Vec::new()))
            };
        }
        let key = self.key(f, env);
        if let Some(v) = self.memo_b.get(&key) {
            return Ok(v.clone());
        }
        let out: BIds = match f.kind() {
            FormulaKind::Top => Arc::new(Vec::new()),
            FormulaKind::Bot => {
                let mut acc = Vec::new();
                for &s in &self.bases {
                    for &c in &self.space_conds {
                        acc.push((s, c));
                    }
                }
                sorted(acc)
            }
            FormulaKind::EqHook(a, b, body) => {
                if Self::hook_holds(a, b, env)? {
                    self.tv_b_ids(body, env)?
                } else {
                    Arc::new(Vec::new())
                }
            }
            FormulaKind::ForallFin(x, range, body) => {
                let mut acc = Vec::new();
                for v in range {
                    env.push(x, v.clone());
                    let r = self.tv_b_ids(body, env);
                    env.pop();
                    acc.extend(r?.iter().copied());
                }
                sorted(acc)
            }
            FormulaKind::Imp(a, b) => {
                let rhs = self.tv_b_ids(b, env)?;
                let mut acc = Vec::new();
                if !rhs.is_empty() {
                    for xi in self.candidates.clone() {
                        for q in self.space_conds.clone() {
                            if self.realizes_b_id(xi, q, a, env)? == Membership::Yes {
                                for &(pi, r) in rhs.iter() {
                                    let s = self.push(xi, pi);
                                    acc.push((s, self.arena.meet(q, r)));
                                }
                            }
                        }
                    }
                }
                sorted(acc)
            }
            FormulaKind::ForallInt {
                var, bound, body, ..
            } => {
                let mut acc = Vec::new();
                for n in 0..=*bound {
                    env.push(var, GroundValue::Nat(n));
                    let num = self.numeral(n, true);
                    let r = self.tv_b_ids(body, env);
                    env.pop();
                    for &(pi, p) in r?.iter() {
                        acc.push((self.push(num, pi), p));
                    }
                }
                sorted(acc)
            }
        };
        let k = self.kept(&key);
        self.memo_b.insert(key, out.clone(), k);
        Ok(out)
    }

    fn realizes_b_id(
        &mut self,
        xi: u32,
        q: u32,
        f: &Formula,
        env: &mut Env,
    ) -> Result<Membership, EvalError> {
        let key = (xi, q, self.key(f, env));
        if let Some(&m) = self.real_b.get(&key) {
            return Ok(m);
        }
        let m = self.realizes_b_uncached(xi, q, f, env)?;
        let k = self.kept(&key.2);
        self.real_b.insert(key, m, k);
        Ok(m)
    }

    fn realizes_b_uncached(
        &mut self,
        xi: u32,
        q: u32,
        f: &Formula,
        env: &mut Env,
    ) -> Result<Membership, EvalError> {
        let tv = self.tv_b_ids(f, env)?;
        let mut verdict = Membership::Yes;
        for &(pi, r) in tv.iter() {
            let c = self.arena.meet(q, r);
            let m = match self.pole_b.get(&(xi, pi, c)) {
                Some(&m) => m,
                None => {
                    let cond = self.arena.conds[c as usize].clone();
                    let p =
                        Process::new(self.arena.terms[xi as usize].clone(), self.arena.stack(pi));
                    let window = default_window(&cond);
                    let m = bbot_member(
                        &BProcess(p, cond),
                        &self.interp.pole,
                        window,
                        self.interp.budget,
                    );
                    self.pole_b.insert((xi, pi, c), m);
                    m
                }
            };
            match m {
                BMember::InBot => {}
                BMember::NotInBot(_) => return Ok(Membership::No),
                BMember::Unknown => verdict = Membership::Unknown,
            }
        }
        Ok(verdict)
    }

    /// Whether `‖F‖ = ∅`, by the same clauses as [`Evaluator::tv`] but
    /// stopping at the first stack.
    fn tv_is_empty(&mut self, f: &Formula, env: &mut Env) -> Result<bool, EvalError> {
        if let FormulaKind::EqHook(a, b, body) = f.kind() {
            return if Self::hook_holds(a, b, env)? {
                self.tv_is_empty(body, env)
            } else {
                Ok(true)
            };
        }
        let key = self.key(f, env);
        if let Some(v) = self.memo_a.get(&key) {
            return Ok(v.is_empty());
        }
        if let Some(&e) = self.memo_empty.get(&key) {
            return Ok(e);
        }
        let out = match f.kind() {
            FormulaKind::Top => true,
            FormulaKind::Bot => self.bases.is_empty(),
            FormulaKind::EqHook(..) => unreachable!("handled above"),
            FormulaKind::ForallFin(x, range, body) => {
                let mut all = true;
                for v in range {
                    env.push(x, v.clone());
                    let r = self.tv_is_empty(body, env);
                    env.pop();
                    if !r? {
                        all = false;
                        break;
                    }
                }
                all
            }
            FormulaKind::Imp(a, b) => {
                let mut empty = self.tv_is_empty(b, env)?;
                if !empty {
                    empty = true;
                    for xi in self.candidates.clone() {
                        if self.realizes_id(xi, a, env)? == Membership::Yes {
                            empty = false;
                            break;
                        }
                    }
                }
                empty
            }
            FormulaKind::ForallInt {
                var, bound, body, ..
            } => {
                if let FormulaKind::EqHook(a, b, inner) = body.kind() {
                    if !self.free_vars_of(inner).contains(var) {
                        // The guarded body does not depend on n: it only
                        // matters whether some n passes the guard.
                        let mut some = false;
                        for n in 0..=*bound {
                            env.push(var, GroundValue::Nat(n));
                            let g = Self::hook_holds(a, b, env);
                            env.pop();
                            if g? {
                                some = true;
                                break;
                            }
                        }
                        let out = !some || self.tv_is_empty(inner, env)?;
                        let k = self.kept(&key);
                        self.memo_empty.insert(key, out, k);
                        return Ok(out);
                    }
                }
                let mut all = true;
                for n in 0..=*bound {
                    env.push(var, GroundValue::Nat(n));
                    let r = self.tv_is_empty(body, env);
                    env.pop();
                    if !r? {
                        all = false;
                        break;
                    }
                }
                all
            }
        };
        let k = self.kept(&key);
        self.memo_empty.insert(key, out, k);
        Ok(out)
    }

    /// `‖F‖` over the A algebra.
    pub fn tv(&mut self, f: &Formula, env: &Env) -> Result<StackSet, EvalError> {
        let ids = self.tv_ids(f, &mut env.clone())?;
        Ok(ids.iter().map(|&s| self.arena.stack(s)).collect())
    }

    /// `ξ ⊩ F`: every stack of `‖F‖` against ξ lands in the pole.
    pub fn realizes_in(
        &mut self,
        xi: &Term,
        f: &Formula,
        env: &Env,
    ) -> Result<Membership, EvalError> {
        let id = self.arena.term(xi);
        self.realizes_id(id, f, &mut env.clone())
    }

    /// `‖F‖_B`: the same clauses over stacks paired with conditions.
    pub fn tv_b(&mut self, f: &Formula, env: &Env) -> Result<BStackSet, EvalError> {
        let ids = self.tv_b_ids(f, &mut env.clone())?;
        Ok(ids
            .iter()
            .map(|&(s, c)| (self.arena.stack(s), self.arena.conds[c as usize].clone()))
            .collect())
    }

    /// `(ξ,q) ⊩_B F`, deciding ⊥_B with [`bbot_member`].
    pub fn realizes_b_in(
        &mut self,
        xi: &Term,
        q: &Condition,
        f: &Formula,
        env: &Env,
    ) -> Result<Membership, EvalError> {
        let id = self.arena.term(xi);
        let q = self.arena.cond(q);
        self.realizes_b_id(id, q, f, &mut env.clone())
    }
}

/// `‖F‖` for a closed formula.
pub fn tv(f: &Formula, interp: &Interp) -> Result<StackSet, EvalError> {
    let space = Space::default();
    Evaluator::new(interp, &space).tv(f, &Env::new())
}

pub fn realizes(xi: &Term, f: &Formula, interp: &Interp) -> Result<Membership, EvalError> {
    let space = Space::default();
    Evaluator::new(interp, &space).realizes_in(xi, f, &Env::new())
}

/// Where a correspondence check failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorrespondenceError {
    #[error("{formula}: at condition {cond}, B-side has {b} stacks, A-side U_p has {a}")]
    Stacks {
        formula: String,
        cond: String,
        a: usize,
        b: usize,
    },
    #[error("{formula}: at condition {cond}, B-side realizes = {b}, A-side ‖U^p‖ empty = {a}")]
    Realizers {
        formula: String,
        cond: String,
        a: bool,
        b: bool,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Stack half of the correspondence: for every q in the space,
/// `{π ; (π,q) ∈ ‖U‖_B} = ‖U_q‖`.
pub fn check_stack_correspondence(
    u: &Formula,
    ev: &mut Evaluator<'_>,
) -> Result<(), CorrespondenceError> {
    let mut env = Env::new();
    let b_side = ev.tv_b_ids(u, &mut env)?;
    // U_q with q bound rather than written in, so the node is the one U^p
    // quantifies over and the two halves share their work.
    let x = binder('q', 0);
    let sub = ev.transformer.sub(u, &GroundExpr::var(&x));
    for (k, q) in ev.space.conditions.iter().enumerate() {
        let qid = ev.space_conds[k];
        env.push(&x, GroundValue::Cond(q.clone()));
        let a_side = ev.tv_ids(&sub, &mut env);
        env.pop();
        let a_side = a_side?;
        let restricted: Vec<u32> = b_side
            .iter()
            .filter(|(_, c)| *c == qid)
            .map(|(s, _)| *s)
            .collect();
        if restricted != *a_side {
            return Err(CorrespondenceError::Stacks {
                formula: u.to_string(),
                cond: q.to_string(),
                a: a_side.len(),
                b: restricted.len(),
            });
        }
    }
    Ok(())
}

/// Realizer half: `(ξ,q) ⊩_B U` iff `‖U^q‖ = ∅`. Exact at the empty pole,
/// where ⊥_B holds only at O.
pub fn check_realizer_correspondence(
    u: &Formula,
    ev: &mut Evaluator<'_>,
) -> Result<(), CorrespondenceError> {
    let mut env = Env::new();
    for (k, q) in ev.space.conditions.iter().enumerate() {
        let qid = ev.space_conds[k];
        let sup = ev.transformer.sup(u, &GroundExpr::cond(q.clone()));
        let a = ev.tv_is_empty(&sup, &mut env)?;
        for xi in ev.candidates.clone() {
            let b = ev.realizes_b_id(xi, qid, u, &mut env)? == Membership::Yes;
            if a != b {
                return Err(CorrespondenceError::Realizers {
                    formula: u.to_string(),
                    cond: q.to_string(),
                    a,
                    b,
                });
            }
        }
    }
    Ok(())
}

/// Both correspondence checks on every formula of `corpus`. Formulas that
/// occur inside other corpus formulas are pinned so their work is shared;
/// everything else is dropped after each check. Returns the number checked.
pub fn check_corpus(
    corpus: &[Formula],
    ev: &mut Evaluator<'_>,
) -> Result<usize, CorrespondenceError> {
    for f in corpus {
        match f.kind() {
            FormulaKind::Top | FormulaKind::Bot => {}
            FormulaKind::EqHook(_, _, b)
            | FormulaKind::ForallFin(_, _, b)
            | FormulaKind::ForallInt { body: b, .. } => ev.pin(b),
            FormulaKind::Imp(a, b) => {
                ev.pin(a);
                ev.pin(b);
            }
        }
    }
    for f in corpus {
        check_stack_correspondence(f, ev)?;
        check_realizer_correspondence(f, ev)?;
        ev.discard_scratch();
    }
    Ok(corpus.len())
}

/// All formulas of depth at most `depth` built from ⊤, ⊥, a true hook
/// `[0=0]=>`, a false hook `[0=1]=>`, `forall x in {0,1}. [x=0]=> U`,
/// `forall_int n. U` and implication.
pub fn formula_corpus(depth: usize, int_bound: u64) -> Vec<Formula> {
    let mut by_depth: Vec<Vec<Formula>> = vec![vec![Formula::top(), Formula::bot()]];
    let x = Name::new("x");
    let n = Name::new("n");
    for d in 1..=depth {
        let below: Vec<Formula> = by_depth.iter().flatten().cloned().collect();
        let shallower: usize = by_depth[..d - 1].iter().map(Vec::len).sum();
        let prev = &by_depth[d - 1];
        let mut layer = Vec::new();
        for u in prev {
            layer.push(Formula::hook(
                GroundExpr::nat(0),
                GroundExpr::nat(0),
                u.clone(),
            ));
            layer.push(Formula::hook(
                GroundExpr::nat(0),
                GroundExpr::nat(1),
                u.clone(),
            ));
            layer.push(Formula::forall_fin(
                x.clone(),
                vec![GroundValue::Nat(0), GroundValue::Nat(1)],
                Formula::hook(GroundExpr::var(&x), GroundExpr::nat(0), u.clone()),
            ));
            layer.push(Formula::forall_int(n.clone(), int_bound, u.clone()));
        }
        for (i, a) in below.iter().enumerate() {
            for (j, b) in below.iter().enumerate() {
                if i >= shallower || j >= shallower {
                    layer.push(Formula::imp(a.clone(), b.clone()));
                }
            }
        }
        by_depth.push(layer);
    }
    by_depth.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn stacks() -> Vec<Stack> {
        vec![Stack::constant("p"), Stack::constant("q")]
    }

    #[test]
    fn base_clauses() {
        let interp = Interp::new(stacks(), vec![Term::comb(crate::Comb::I)], Pole::Empty);
        assert!(tv(&f("T"), &interp).unwrap().is_empty());
        assert_eq!(tv(&f("F"), &interp).unwrap().len(), 2);
        assert!(tv(&f("[3=4]=> F"), &interp).unwrap().is_empty());
        assert_eq!(tv(&f("[3=3]=> F"), &interp).unwrap().len(), 2);
        assert_eq!(tv(&f("forall_int^3 n. F"), &interp).unwrap().len(), 8);
    }

    #[test]
    fn realizes_examples() {
        let i = Term::comb(crate::Comb::I);
        let interp = Interp::new(stacks(), vec![i.clone()], Pole::Empty);
        assert_eq!(realizes(&i, &f("T"), &interp), Ok(Membership::Yes));
        assert_eq!(realizes(&i, &f("F"), &interp), Ok(Membership::No));
        let every = Interp::new(stacks(), vec![i.clone()], Pole::Everything);
        assert_eq!(realizes(&i, &f("F -> F"), &every), Ok(Membership::Yes));
    }

    #[test]
    fn sub_transform_structure() {
        let space = Space::default();
        let p = GroundExpr::cond(Condition::one());
        assert_eq!(sub_transform(&f("F"), &p, &space), f("F"));
        let hooked = sub_transform(&f("[1=2]=> T"), &p, &space);
        assert!(matches!(hooked.kind(), FormulaKind::EqHook(..)));
        let imp = sub_transform(&f("F -> F"), &p, &space);
        assert!(matches!(imp.kind(), FormulaKind::ForallFin(..)));
    }

    #[test]
    fn sup_transform_values() {
        let space = Space::default();
        let interp = Interp::empty_pole();
        let mut ev = Evaluator::new(&interp, &space);
        let env = Env::new();
        let top = sup_transform(&f("T"), &GroundExpr::cond(Condition::one()), &space);
        assert!(ev.tv(&top, &env).unwrap().is_empty());
        let bot_o = sup_transform(&f("F"), &GroundExpr::cond(Condition::Bottom), &space);
        assert!(ev.tv(&bot_o, &env).unwrap().is_empty());
        let bot_1 = sup_transform(&f("F"), &GroundExpr::cond(Condition::one()), &space);
        let v = ev.tv(&bot_1, &env).unwrap();
        assert!(v.contains(&Stack::push(numeral(0), Stack::constant("p"))));
    }

    #[test]
    fn default_space_has_eight_conditions() {
        assert_eq!(Space::default().conditions.len(), 8);
    }

    #[test]
    fn formula_round_trip() {
        for s in [
            "T",
            "[0=1]=> F",
            "forall x in {0, 1}. ([x=0]=> T)",
            "(F -> T) -> F",
            "forall_int^3 n. ([lle(<1>, n)=1]=> F)",
            "forall_int*^2 m. F",
            "[meet(<0>, <0,1>)=<0,1>]=> F",
        ] {
            let g = f(s);
            assert_eq!(f(&g.to_string()), g, "{s}");
        }
    }

    #[test]
    fn corpus_counts() {
        assert_eq!(formula_corpus(0, 5).len(), 2);
        assert_eq!(formula_corpus(1, 5).len(), 2 + 8 + 4);
    }
}
