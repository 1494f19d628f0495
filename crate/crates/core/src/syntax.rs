//! Concrete syntax for terms, stacks, processes, conditions and λ-terms.
//!
//! Application uses the parenthesised-head convention: inside a group, atoms apply to
//! the left, and a parenthesised item in argument position that is followed
//! by more items takes the rest of the group as its own argument list. So
//! `(B W)(B)B` reads as `B W (B B)` and `(x)(y)z` as `x (y z)`. A final
//! parenthesised item is simply the last argument. `\x. t` extends to the end
//! of its group.
//!
//! Lexical sugar:
//! - a run of combinator letters such as `BW` is that sequence of atoms;
//! - `{n}` is the numeral n̄;
//! - `B* C* I* K* W* cc* s*` are the starred combinators (`s*` is σ*);
//! - `#a` is an instruction constant, `%p` a stack constant, `k[π]` a
//!   continuation; any other identifier is a variable.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::combinators;
use crate::compile::LambdaTerm;
use crate::star::{self, Condition};
use crate::term::{Comb, Name, Process, Stack, StackKind, Term, TermKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl ParseError {
    fn new(pos: usize, msg: impl Into<String>) -> Self {
        ParseError {
            pos,
            msg: msg.into(),
        }
    }
}

/// What a piece of text is expected to denote.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    /// Combinatory term: no continuations, no binders.
    CTerm,
    /// Term of the standard algebra: continuations allowed.
    Term,
    Stack,
    Process,
    Lambda,
}

/// Result of [`parse`], one variant per category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Parsed {
    Term(Term),
    Stack(Stack),
    Process(Process),
    Lambda(LambdaTerm),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    LBrack,
    RBrack,
    LAngle,
    RAngle,
    Dot,
    Comma,
    Sep,
    Backslash,
    Comb(Comb),
    Starred(&'static str),
    ContOpen,
    Var(String),
    Const(String),
    StackConst(String),
    Numeral(u64),
    Nat(u64),
    Eof,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '$'
}

fn starred_name(ident: &str) -> Option<&'static str> {
    Some(match ident {
        "B" => "B*",
        "C" => "C*",
        "I" => "I*",
        "K" => "K*",
        "W" => "W*",
        "cc" => "cc*",
        "s" => "s*",
        _ => return None,
    })
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let ident_at = |mut j: usize| -> (String, usize) {
        let mut s = String::new();
        while j < chars.len() && is_ident_char(chars[j].1) {
            s.push(chars[j].1);
            j += 1;
        }
        (s, j)
    };
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            '<' => Some(Tok::LAngle),
            '>' => Some(Tok::RAngle),
            '.' => Some(Tok::Dot),
            ',' => Some(Tok::Comma),
            '*' => Some(Tok::Sep),
            '\\' | 'λ' => Some(Tok::Backslash),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, pos));
            i += 1;
            continue;
        }
        if c == '{' {
            let mut j = i + 1;
            let mut digits = String::new();
            while j < chars.len() && chars[j].1.is_ascii_digit() {
                digits.push(chars[j].1);
                j += 1;
            }
            if digits.is_empty() || j >= chars.len() || chars[j].1 != '}' {
                return Err(ParseError::new(
                    pos,
                    "malformed numeral literal, expected {n}",
                ));
            }
            let n = digits
                .parse()
                .map_err(|_| ParseError::new(pos, "numeral literal out of range"))?;
            out.push((Tok::Numeral(n), pos));
            i = j + 1;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            let mut digits = String::new();
            while j < chars.len() && chars[j].1.is_ascii_digit() {
                digits.push(chars[j].1);
                j += 1;
            }
            let n = digits
                .parse()
                .map_err(|_| ParseError::new(pos, "number out of range"))?;
            out.push((Tok::Nat(n), pos));
            i = j;
            continue;
        }
        if c == '#' || c == '%' {
            let (name, j) = ident_at(i + 1);
            if name.is_empty() {
                return Err(ParseError::new(
                    pos,
                    format!("expected identifier after '{c}'"),
                ));
            }
            out.push((
                if c == '#' {
                    Tok::Const(name)
                } else {
                    Tok::StackConst(name)
                },
                pos,
            ));
            i = j;
            continue;
        }
        if is_ident_start(c) {
            let (name, j) = ident_at(i);
            let next = chars.get(j).map(|&(_, c)| c);
            if next == Some('*') {
                if let Some(s) = starred_name(&name) {
                    out.push((Tok::Starred(s), pos));
                    i = j + 1;
                    continue;
                }
            }
            if name == "k" && next == Some('[') {
                out.push((Tok::ContOpen, pos));
                i = j + 1;
                continue;
            }
            if name == "cc" {
                out.push((Tok::Comb(Comb::Cc), pos));
            } else if name.chars().all(|c| "BCIKW".contains(c)) {
                for (k, ch) in name.chars().enumerate() {
                    let comb = Comb::from_symbol(&ch.to_string()).expect("combinator letter");
                    out.push((Tok::Comb(comb), pos + k));
                }
            } else {
                out.push((Tok::Var(name), pos));
            }
            i = j;
            continue;
        }
        return Err(ParseError::new(pos, format!("unexpected character {c:?}")));
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    allow_lambda: bool,
    allow_cont: bool,
}

impl Parser {
    fn new(src: &str, allow_lambda: bool, allow_cont: bool) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            at: 0,
            allow_lambda,
            allow_cont,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::new(self.pos(), format!("expected {what}")))
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(ParseError::new(self.pos(), "unexpected trailing input"))
        }
    }

    fn group_ends(&self) -> bool {
        matches!(
            self.peek(),
            Tok::RParen | Tok::RBrack | Tok::Dot | Tok::Sep | Tok::Comma | Tok::Eof
        )
    }

    fn group(&mut self) -> Result<LambdaTerm, ParseError> {
        match self.peek() {
            Tok::Backslash => self.lambda(),
            Tok::LParen => {
                let head = self.paren()?;
                self.group_from(head)
            }
            _ => {
                let head = self.atom()?;
                self.group_from(head)
            }
        }
    }

    fn group_from(&mut self, head: LambdaTerm) -> Result<LambdaTerm, ParseError> {
        let mut acc = head;
        loop {
            if self.group_ends() {
                return Ok(acc);
            }
            match self.peek() {
                Tok::LParen => {
                    let p = self.paren()?;
                    if self.group_ends() {
                        return Ok(LambdaTerm::app(acc, p));
                    }
                    let rest = self.group_from(p)?;
                    return Ok(LambdaTerm::app(acc, rest));
                }
                Tok::Backslash => {
                    let l = self.lambda()?;
                    return Ok(LambdaTerm::app(acc, l));
                }
                _ => {
                    let a = self.atom()?;
                    acc = LambdaTerm::app(acc, a);
                }
            }
        }
    }

    fn paren(&mut self) -> Result<LambdaTerm, ParseError> {
        self.expect(Tok::LParen, "'('")?;
        let t = self.group()?;
        self.expect(Tok::RParen, "')'")?;
        Ok(t)
    }

    fn lambda(&mut self) -> Result<LambdaTerm, ParseError> {
        let pos = self.pos();
        if !self.allow_lambda {
            return Err(ParseError::new(
                pos,
                "λ-abstraction is only allowed in lambda terms",
            ));
        }
        self.bump();
        let mut vars = Vec::new();
        loop {
            match self.bump() {
                Tok::Var(x) => vars.push(Name::new(&x)),
                Tok::Dot if !vars.is_empty() => break,
                _ => return Err(ParseError::new(pos, "expected '\\x. body'")),
            }
        }
        let body = self.group()?;
        Ok(vars
            .into_iter()
            .rev()
            .fold(body, |b, x| LambdaTerm::abs(x, b)))
    }

    fn atom(&mut self) -> Result<LambdaTerm, ParseError> {
        let pos = self.pos();
        let t = match self.bump() {
            Tok::Comb(c) => Term::comb(c),
            Tok::Var(x) => Term::var(x.as_str()),
            Tok::Const(c) => Term::constant(c.as_str()),
            Tok::Numeral(n) => combinators::numeral(n as usize),
            Tok::Starred(s) => star::starred_by_name(s).expect("starred name from lexer"),
            Tok::ContOpen => {
                if !self.allow_cont {
                    return Err(ParseError::new(
                        pos,
                        "continuations are not allowed in c-terms",
                    ));
                }
                let s = self.stack()?;
                self.expect(Tok::RBrack, "']'")?;
                if self.allow_lambda && !s.iter().all(|t| t.is_closed()) {
                    return Err(ParseError::new(
                        pos,
                        "variables inside a continuation cannot be abstracted",
                    ));
                }
                Term::cont(s)
            }
            Tok::StackConst(_) => {
                return Err(ParseError::new(
                    pos,
                    "stack constant where a term was expected",
                ))
            }
            Tok::Eof => return Err(ParseError::new(pos, "unexpected end of input")),
            _ => return Err(ParseError::new(pos, "expected a term")),
        };
        Ok(LambdaTerm::Atom(t))
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let pos = self.pos();
        let l = self.group()?;
        l.to_term()
            .ok_or_else(|| ParseError::new(pos, "unexpected λ-abstraction"))
    }

    fn stack(&mut self) -> Result<Stack, ParseError> {
        let mut items = Vec::new();
        loop {
            if let Tok::StackConst(name) = self.peek().clone() {
                self.bump();
                return Ok(Stack::from_terms(items, Stack::constant(name.as_str())));
            }
            items.push(self.term()?);
            self.expect(Tok::Dot, "'.' or a stack constant")?;
        }
    }

    fn process(&mut self) -> Result<Process, ParseError> {
        let head = self.term()?;
        self.expect(Tok::Sep, "'*' between term and stack")?;
        let stack = self.stack()?;
        Ok(Process::new(head, stack))
    }

    fn condition(&mut self) -> Result<Condition, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Var(o) if o == "O" => Ok(Condition::Bottom),
            Tok::LAngle => {
                let mut entries = Vec::new();
                if *self.peek() == Tok::RAngle {
                    self.bump();
                    return Ok(Condition::seq(entries));
                }
                loop {
                    match self.bump() {
                        Tok::Nat(n) => entries.push(n),
                        _ => return Err(ParseError::new(self.pos(), "expected a natural number")),
                    }
                    match self.bump() {
                        Tok::Comma => continue,
                        Tok::RAngle => return Ok(Condition::seq(entries)),
                        _ => return Err(ParseError::new(self.pos(), "expected ',' or '>'")),
                    }
                }
            }
            _ => Err(ParseError::new(
                pos,
                "expected a condition: O, <> or <n,...>",
            )),
        }
    }
}

/// Parse `text` as an element of `category`.
pub fn parse(text: &str, category: Category) -> Result<Parsed, ParseError> {
    match category {
        Category::CTerm => parse_cterm(text).map(Parsed::Term),
        Category::Term => parse_term(text).map(Parsed::Term),
        Category::Stack => parse_stack(text).map(Parsed::Stack),
        Category::Process => parse_process(text).map(Parsed::Process),
        Category::Lambda => parse_lambda(text).map(Parsed::Lambda),
    }
}

pub fn parse_cterm(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text, false, false)?;
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text, false, true)?;
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_stack(text: &str) -> Result<Stack, ParseError> {
    let mut p = Parser::new(text, false, true)?;
    let s = p.stack()?;
    p.finish()?;
    Ok(s)
}

pub fn parse_process(text: &str) -> Result<Process, ParseError> {
    let mut p = Parser::new(text, false, true)?;
    let pr = p.process()?;
    p.finish()?;
    Ok(pr)
}

pub fn parse_lambda(text: &str) -> Result<LambdaTerm, ParseError> {
    let mut p = Parser::new(text, true, true)?;
    let l = p.group()?;
    p.finish()?;
    Ok(l)
}

pub fn parse_condition(text: &str) -> Result<Condition, ParseError> {
    let mut p = Parser::new(text, false, false)?;
    let c = p.condition()?;
    p.finish()?;
    Ok(c)
}

/// Parse a process of the extended algebra: `(t , <..>) * (s , <..>)`.
pub fn parse_bprocess(text: &str) -> Result<(Term, Condition, Stack, Condition), ParseError> {
    let mut p = Parser::new(text, false, true)?;
    p.expect(Tok::LParen, "'('")?;
    let t = p.term()?;
    p.expect(Tok::Comma, "','")?;
    let tc = p.condition()?;
    p.expect(Tok::RParen, "')'")?;
    p.expect(Tok::Sep, "'*'")?;
    p.expect(Tok::LParen, "'('")?;
    let s = p.stack()?;
    p.expect(Tok::Comma, "','")?;
    let sc = p.condition()?;
    p.expect(Tok::RParen, "')'")?;
    p.finish()?;
    Ok((t, tc, s, sc))
}

/// Parenthesisation scheme used by the printer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrintStyle {
    /// Parenthesised heads where it matters, bare atoms at the end of a spine:
    /// `(K I) W`, `(#f) #a`, `(C s*)(C K* I*)`.
    #[default]
    Grouped,
    /// Every application written `(t)u`.
    Paper,
    /// Fewest parentheses: spines written flat, only a final compound
    /// argument parenthesised.
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrintOptions {
    pub style: PrintStyle,
    /// Print numerals σⁿ0̄ as `{n}`.
    pub numerals: bool,
    /// Print the starred combinators by name.
    pub star_names: bool,
}

impl Default for PrintOptions {
    fn default() -> Self {
        PrintOptions {
            style: PrintStyle::Grouped,
            numerals: false,
            star_names: true,
        }
    }
}

enum View<'a> {
    Atom(String),
    App(&'a Term, &'a Term),
}

fn view<'a>(t: &'a Term, opts: &PrintOptions) -> View<'a> {
    match t.kind() {
        TermKind::App(f, a) => {
            if opts.star_names {
                if let Some(name) = star::name_of_starred(t) {
                    return View::Atom(name.to_string());
                }
            }
            if opts.numerals {
                if let Some(n) = combinators::as_numeral(t) {
                    return View::Atom(format!("{{{n}}}"));
                }
            }
            View::App(f, a)
        }
        _ => View::Atom(atom_text(t, opts)),
    }
}

fn atom_text(t: &Term, opts: &PrintOptions) -> String {
    match t.kind() {
        TermKind::Comb(c) => c.symbol().to_string(),
        TermKind::Var(x) => x.to_string(),
        TermKind::Const(c) => format!("#{c}"),
        TermKind::Cont(s) => format!("k[{}]", print_stack(s, opts)),
        TermKind::App(..) => unreachable!("atom_text on application"),
    }
}

struct Printer<'o> {
    opts: &'o PrintOptions,
    out: String,
}

impl Printer<'_> {
    fn top(&mut self, t: &Term) {
        match self.opts.style {
            PrintStyle::Grouped => self.k_top(t),
            PrintStyle::Paper => self.paper(t),
            PrintStyle::Plain => self.plain(t),
        }
    }

    fn k_top(&mut self, t: &Term) {
        match view(t, self.opts) {
            View::Atom(s) => self.out.push_str(&s),
            View::App(f, a) => {
                self.out.push('(');
                self.k_inner(f);
                self.out.push(')');
                self.k_tail(a);
            }
        }
    }

    fn k_tail(&mut self, a: &Term) {
        match view(a, self.opts) {
            View::Atom(s) => {
                self.out.push(' ');
                self.out.push_str(&s);
            }
            View::App(f, x) => match view(x, self.opts) {
                View::Atom(_) => {
                    self.out.push('(');
                    self.k_inner(a);
                    self.out.push(')');
                }
                View::App(..) => {
                    self.out.push('(');
                    self.k_inner(f);
                    self.out.push(')');
                    self.k_tail(x);
                }
            },
        }
    }

    fn k_inner(&mut self, t: &Term) {
        match view(t, self.opts) {
            View::Atom(s) => self.out.push_str(&s),
            View::App(f, a) => match view(a, self.opts) {
                View::Atom(s) => {
                    self.head_part(f, Self::k_inner);
                    self.out.push(' ');
                    self.out.push_str(&s);
                }
                View::App(..) => self.k_top(t),
            },
        }
    }

    /// A spine head followed by a bare atom; wrapped when the head itself
    /// ends in a compound argument, which would otherwise absorb the atom.
    fn head_part(&mut self, f: &Term, inner: fn(&mut Self, &Term)) {
        let wrap = match view(f, self.opts) {
            View::App(_, a) => matches!(view(a, self.opts), View::App(..)),
            View::Atom(_) => false,
        };
        if wrap {
            self.out.push('(');
            inner(self, f);
            self.out.push(')');
        } else {
            inner(self, f);
        }
    }

    fn paper(&mut self, t: &Term) {
        match view(t, self.opts) {
            View::Atom(s) => self.out.push_str(&s),
            View::App(f, a) => {
                self.out.push('(');
                self.paper(f);
                self.out.push(')');
                self.paper(a);
            }
        }
    }

    fn plain(&mut self, t: &Term) {
        match view(t, self.opts) {
            View::Atom(s) => self.out.push_str(&s),
            View::App(f, a) => {
                self.head_part(f, Self::plain);
                match view(a, self.opts) {
                    View::Atom(s) => {
                        self.out.push(' ');
                        self.out.push_str(&s);
                    }
                    View::App(..) => {
                        self.out.push_str(" (");
                        self.plain(a);
                        self.out.push(')');
                    }
                }
            }
        }
    }
}

pub fn print_term(t: &Term, opts: &PrintOptions) -> String {
    let mut p = Printer {
        opts,
        out: String::new(),
    };
    p.top(t);
    p.out
}

pub fn print_stack(s: &Stack, opts: &PrintOptions) -> String {
    let mut out = String::new();
    let mut cur = s;
    loop {
        match cur.kind() {
            StackKind::Const(c) => {
                let _ = write!(out, "%{c}");
                return out;
            }
            StackKind::Push(t, rest) => {
                out.push_str(&print_term(t, opts));
                out.push_str(" . ");
                cur = rest;
            }
        }
    }
}

pub fn print_process(p: &Process, opts: &PrintOptions) -> String {
    format!(
        "{} * {}",
        print_term(&p.head, opts),
        print_stack(&p.stack, opts)
    )
}

pub fn print_condition(c: &Condition) -> String {
    match c {
        Condition::Bottom => "O".to_string(),
        Condition::Seq(v) => {
            let parts: Vec<String> = v.iter().map(|n| n.to_string()).collect();
            format!("<{}>", parts.join(","))
        }
    }
}

pub fn print_lambda(l: &LambdaTerm, opts: &PrintOptions) -> String {
    match l {
        LambdaTerm::Atom(t) => {
            let s = print_term(t, opts);
            if t.is_atom() {
                s
            } else {
                format!("({s})")
            }
        }
        LambdaTerm::App(f, a) => {
            let fs = print_lambda(f, opts);
            let fs = if matches!(**f, LambdaTerm::Abs(..)) {
                format!("({fs})")
            } else {
                fs
            };
            format!("({fs}){}", print_lambda_arg(a, opts))
        }
        LambdaTerm::Abs(x, body) => format!("\\{x}. {}", print_lambda(body, opts)),
    }
}

fn print_lambda_arg(a: &LambdaTerm, opts: &PrintOptions) -> String {
    match a {
        LambdaTerm::Abs(..) => format!(" {}", print_lambda(a, opts)),
        LambdaTerm::Atom(t) if t.is_atom() => format!(" {}", print_lambda(a, opts)),
        _ => print_lambda(a, opts),
    }
}

/// Every identifier that appears as a variable or constant in `text`, used to
/// pick fresh names that cannot clash with user input.
pub fn identifiers(text: &str) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    if let Ok(toks) = lex(text) {
        for (t, _) in toks {
            match t {
                Tok::Var(s) | Tok::Const(s) | Tok::StackConst(s) => {
                    out.insert(Name::new(&s));
                }
                _ => {}
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: Comb) -> Term {
        Term::comb(x)
    }

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn zero_and_successor() {
        assert_eq!(p("K I"), Term::app(c(Comb::K), c(Comb::I)));
        let sigma = Term::app(
            Term::app(c(Comb::B), c(Comb::W)),
            Term::app(c(Comb::B), c(Comb::B)),
        );
        assert_eq!(p("(B W)(B)B"), sigma);
        assert_eq!(p("(BW)(B)B"), sigma);
    }

    #[test]
    fn parenthesised_head_convention() {
        let x = Term::var("x");
        let y = Term::var("y");
        let z = Term::var("z");
        assert_eq!(p("(x)(y)z"), x.apply(&y.apply(&z)));
        assert_eq!(p("x y z"), x.apply(&y).apply(&z));
        assert_eq!(p("(x y) z"), x.apply(&y).apply(&z));
        assert_eq!(p("x (y z)"), x.apply(&y.apply(&z)));
    }

    #[test]
    fn continuation_rejected_in_cterm() {
        assert!(parse_cterm("k[%p]").is_err());
        assert_eq!(p("k[%p]"), Term::cont(Stack::constant("p")));
    }

    #[test]
    fn lambda_only_in_lambda_category() {
        assert!(parse_term("\\x. x").is_err());
        assert!(parse_lambda("\\x. x").is_ok());
    }

    #[test]
    fn error_reports_position() {
        let e = parse_term("K ) I").unwrap_err();
        assert_eq!(e.pos, 2);
    }

    #[test]
    fn printer_examples() {
        let o = PrintOptions::default();
        let kiw = Term::app(Term::app(c(Comb::K), c(Comb::I)), c(Comb::W));
        assert_eq!(print_term(&kiw, &o), "(K I) W");
        assert_eq!(print_term(&Term::cont(Stack::constant("p")), &o), "k[%p]");
        let fa = Term::app(Term::constant("f"), Term::constant("a"));
        assert_eq!(print_term(&fa, &o), "(#f) #a");
        let two = combinators::numeral(2);
        let sugared = PrintOptions {
            numerals: true,
            ..o
        };
        assert_eq!(print_term(&two, &sugared), "{2}");
    }

    #[test]
    fn paper_and_plain_styles_round_trip() {
        let t = p("(x)((y) z w)(K I) v");
        for style in [PrintStyle::Grouped, PrintStyle::Paper, PrintStyle::Plain] {
            let o = PrintOptions {
                style,
                ..Default::default()
            };
            let s = print_term(&t, &o);
            assert_eq!(p(&s), t, "{style:?}: {s}");
        }
    }

    #[test]
    fn process_and_stack() {
        let pr = parse_process("I * #a . %p").unwrap();
        assert_eq!(pr.head, c(Comb::I));
        assert_eq!(
            pr.stack,
            Stack::push(Term::constant("a"), Stack::constant("p"))
        );
        assert_eq!(print_process(&pr, &Default::default()), "I * #a . %p");
    }

    #[test]
    fn conditions() {
        assert_eq!(parse_condition("O").unwrap(), Condition::Bottom);
        assert_eq!(parse_condition("<>").unwrap(), Condition::one());
        assert_eq!(
            parse_condition("<3,5>").unwrap(),
            Condition::seq(vec![3, 5])
        );
        assert!(parse_condition("<3,>").is_err());
    }

    #[test]
    fn bprocess_literal() {
        let (t, tc, s, sc) = parse_bprocess("(#d {0} , <>) * (%pi0 , <1>)").unwrap();
        assert_eq!(t, Term::app(Term::constant("d"), combinators::numeral(0)));
        assert_eq!(tc, Condition::one());
        assert_eq!(s, Stack::constant("pi0"));
        assert_eq!(sc, Condition::seq(vec![1]));
    }

    #[test]
    fn starred_atoms_and_separator() {
        let pr = parse_process("K* * %p").unwrap();
        assert_eq!(pr.head, star::starred_by_name("K*").unwrap());
    }
}
