//! Concrete formula syntax.
//!
//! ```text
//! formula  := binary
//! binary   := or ((SINCE | UNTIL | TRIGGER | RELEASE) interval? binary)?
//! or       := and (OR and)*
//! and      := unary (AND unary)*
//! unary    := NOT unary
//!           | (PREV | NEXT | ONCE | EVENTUALLY | HISTORICALLY | GLOBALLY) interval? unary
//!           | EXISTS name+ . formula
//!           | atom
//! atom     := ( formula ) | TRUE | FALSE | name ( terms? ) | term = term
//! term     := name | integer | "string"
//! interval := [ n , m ] | [ n , m ) | [ n , * )
//! ```
//!
//! Binary temporal operators associate to the right and bind weakest;
//! `EXISTS` extends as far right as possible. Free variables are numbered by
//! first occurrence, left to right.

use std::fmt::Write as _;

use mfotl::formula::{Formula, Interval, Term};
use mfotl::Value;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("syntax error at offset {pos}: {msg}")]
    Unexpected { pos: usize, msg: String },
    #[error("syntax error at offset {pos}: empty interval [{lo},{hi}]")]
    EmptyInterval { pos: usize, lo: u64, hi: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Star,
    Equals,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos, msg: &str| SyntaxError::Unexpected {
        pos,
        msg: msg.to_string(),
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '*' => Some(Tok::Star),
            '=' => Some(Tok::Equals),
            _ => None,
        };
        if let Some(t) = single {
            out.push((start, t));
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '-' && bytes.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = bytes[start..i].iter().collect();
            let v = text.parse().map_err(|_| err(start, "integer out of range"))?;
            out.push((start, Tok::Int(v)));
        } else if c.is_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_alphanumeric() || bytes[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(bytes[start..i].iter().collect())));
        } else if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                match bytes.get(i) {
                    None => return Err(err(start, "unterminated string")),
                    Some('"') => break,
                    Some('\\') => {
                        match bytes.get(i + 1) {
                            Some(&e @ ('"' | '\\')) => s.push(e),
                            _ => return Err(err(i, "invalid escape")),
                        }
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push((start, Tok::Str(s)));
        } else {
            return Err(err(start, &format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

const KEYWORDS: [&str; 15] = [
    "NOT",
    "AND",
    "OR",
    "EXISTS",
    "PREV",
    "NEXT",
    "SINCE",
    "UNTIL",
    "TRIGGER",
    "RELEASE",
    "ONCE",
    "EVENTUALLY",
    "HISTORICALLY",
    "GLOBALLY",
    "TRUE",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s) || s == "FALSE"
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    /// Quantified names, innermost last.
    bound: Vec<String>,
    /// Free names in order of first occurrence.
    free: Vec<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError::Unexpected {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn nat(&mut self) -> Result<u64, SyntaxError> {
        match self.peek() {
            Some(Tok::Int(v)) if *v >= 0 => {
                let v = *v as u64;
                self.pos += 1;
                Ok(v)
            }
            _ => self.fail("expected a natural number"),
        }
    }

    /// An optional interval; absent means `[0,*)`.
    fn interval(&mut self) -> Result<Interval, SyntaxError> {
        if self.peek() != Some(&Tok::LBrack) {
            return Ok(Interval::unbounded(0));
        }
        let start = self.offset();
        self.pos += 1;
        let lo = self.nat()?;
        self.expect(Tok::Comma, "','")?;
        if self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            self.expect(Tok::RParen, "')' after '*'")?;
            return Ok(Interval::unbounded(lo));
        }
        let hi = self.nat()?;
        let res = match self.bump() {
            Some(Tok::RBrack) => Interval::closed(lo, hi),
            Some(Tok::RParen) => Interval::half_open(lo, hi),
            _ => {
                self.pos -= 1;
                return self.fail("expected ']' or ')'");
            }
        };
        res.map_err(|e| SyntaxError::EmptyInterval {
            pos: start,
            lo: e.lo,
            hi: e.hi,
        })
    }

    fn var(&mut self, name: &str) -> Term {
        if let Some(k) = self.bound.iter().rev().position(|b| b == name) {
            return Term::Var(k);
        }
        let f = match self.free.iter().position(|b| b == name) {
            Some(f) => f,
            None => {
                self.free.push(name.to_string());
                self.free.len() - 1
            }
        };
        Term::Var(self.bound.len() + f)
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(Term::Const(Value::Int(v)))
            }
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(Term::Const(Value::Str(s)))
            }
            Some(Tok::Ident(name)) if !is_keyword(&name) => {
                self.pos += 1;
                Ok(self.var(&name))
            }
            _ => self.fail("expected a term"),
        }
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        let left = self.or()?;
        let op = match self.peek() {
            Some(Tok::Ident(s)) if ["SINCE", "UNTIL", "TRIGGER", "RELEASE"].contains(&s.as_str()) => s.clone(),
            _ => return Ok(left),
        };
        self.pos += 1;
        let ivl = self.interval()?;
        let right = self.formula()?;
        Ok(match op.as_str() {
            "SINCE" => Formula::since(left, ivl, right),
            "UNTIL" => Formula::until(left, ivl, right),
            "TRIGGER" => Formula::trigger(left, ivl, right),
            _ => Formula::release(left, ivl, right),
        })
    }

    fn or(&mut self) -> Result<Formula, SyntaxError> {
        let mut f = self.and()?;
        while self.keyword("OR") {
            self.pos += 1;
            f = Formula::or(f, self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula, SyntaxError> {
        let mut f = self.unary()?;
        while self.keyword("AND") {
            self.pos += 1;
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        let Some(Tok::Ident(kw)) = self.peek().cloned() else {
            return self.atom();
        };
        let wrap: fn(Interval, Formula) -> Formula = match kw.as_str() {
            "NOT" => {
                self.pos += 1;
                return Ok(Formula::neg(self.unary()?));
            }
            "EXISTS" => {
                self.pos += 1;
                return self.exists();
            }
            "PREV" => Formula::prev,
            "NEXT" => Formula::next,
            "ONCE" => Formula::once,
            "EVENTUALLY" => Formula::eventually,
            "HISTORICALLY" => Formula::historically,
            "GLOBALLY" => Formula::globally,
            _ => return self.atom(),
        };
        self.pos += 1;
        let ivl = self.interval()?;
        Ok(wrap(ivl, self.unary()?))
    }

    fn exists(&mut self) -> Result<Formula, SyntaxError> {
        let mut names = Vec::new();
        while let Some(Tok::Ident(name)) = self.peek().cloned() {
            if is_keyword(&name) {
                return self.fail("a keyword cannot be a variable");
            }
            self.pos += 1;
            names.push(name);
        }
        if names.is_empty() {
            return self.fail("expected a variable name after EXISTS");
        }
        self.expect(Tok::Dot, "'.'")?;
        let depth = self.bound.len();
        self.bound.extend(names.iter().cloned());
        let body = self.formula();
        self.bound.truncate(depth);
        Ok(names.iter().fold(body?, |f, _| Formula::exists(f)))
    }

    fn atom(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Some(Tok::Ident(kw)) if kw == "TRUE" => {
                self.pos += 1;
                Ok(Formula::truth())
            }
            Some(Tok::Ident(kw)) if kw == "FALSE" => {
                self.pos += 1;
                Ok(Formula::neg(Formula::truth()))
            }
            Some(Tok::Ident(name))
                if !is_keyword(&name) && self.toks.get(self.pos + 1).map(|(_, t)| t) == Some(&Tok::LParen) =>
            {
                self.pos += 2;
                let mut args = Vec::new();
                if self.peek() != Some(&Tok::RParen) {
                    args.push(self.term()?);
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.term()?);
                    }
                }
                self.expect(Tok::RParen, "')' or ','")?;
                Ok(Formula::Pred(name, args))
            }
            Some(Tok::Ident(kw)) if is_keyword(&kw) => self.fail(format!("unexpected keyword {kw}")),
            None => self.fail("unexpected end of input"),
            _ => {
                let t1 = self.term()?;
                self.expect(Tok::Equals, "'='")?;
                let t2 = self.term()?;
                Ok(Formula::eq(t1, t2))
            }
        }
    }
}

/// Parses a formula. Returns it together with the names of its free
/// variables, indexed by De Bruijn index.
pub fn parse_named(src: &str) -> Result<(Formula, Vec<String>), SyntaxError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        end: src.len(),
        bound: Vec::new(),
        free: Vec::new(),
    };
    let f = p.formula()?;
    if p.pos < p.toks.len() {
        return p.fail("unexpected trailing input");
    }
    Ok((f, p.free))
}

pub fn parse_formula(src: &str) -> Result<Formula, SyntaxError> {
    parse_named(src).map(|(f, _)| f)
}

// Precedence levels, weakest first.
const BIN: u8 = 0;
const OR: u8 = 1;
const AND: u8 = 2;
const UNARY: u8 = 3;
const ATOM: u8 = 4;

struct Printer {
    sugar: bool,
    out: String,
}

fn fmt_interval(i: &Interval) -> String {
    match i.hi() {
        Some(hi) => format!("[{},{}]", i.lo(), hi),
        None => format!("[{},*)", i.lo()),
    }
}

fn fmt_value(v: &Value) -> String {
    match v {
        Value::Int(k) => k.to_string(),
        Value::Str(s) => format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
    }
}

impl Printer {
    fn term(&mut self, depth: usize, t: &Term) {
        let s = match t {
            Term::Const(c) => fmt_value(c),
            Term::Var(k) if *k < depth => format!("y{}", depth - 1 - k),
            Term::Var(k) => format!("x{}", k - depth),
        };
        self.out.push_str(&s);
    }

    fn level(&self, f: &Formula) -> u8 {
        match f {
            Formula::Pred(..) | Formula::Eq(..) => ATOM,
            _ if self.sugar && (*f == Formula::truth() || *f == Formula::neg(Formula::truth())) => ATOM,
            Formula::Neg(_) | Formula::Prev(..) | Formula::Next(..) => UNARY,
            Formula::And(..) => AND,
            Formula::Or(..) => OR,
            Formula::Since(a, ..) | Formula::Until(a, ..) if self.sugar && **a == Formula::truth() => UNARY,
            Formula::Trigger(a, _, b) | Formula::Release(a, _, b)
                if self.sugar && **a == Formula::falsity_over(b) =>
            {
                UNARY
            }
            _ => BIN,
        }
    }

    fn at(&mut self, ctx: u8, depth: usize, f: &Formula) {
        if self.level(f) < ctx {
            self.out.push('(');
            self.formula(depth, f);
            self.out.push(')');
        } else {
            self.formula(depth, f);
        }
    }

    fn unary(&mut self, kw: &str, i: &Interval, depth: usize, f: &Formula) {
        let _ = write!(self.out, "{kw}{} ", fmt_interval(i));
        self.at(UNARY, depth, f);
    }

    fn binary(&mut self, kw: &str, a: &Formula, i: &Interval, b: &Formula, depth: usize) {
        self.at(OR, depth, a);
        let _ = write!(self.out, " {kw}{} ", fmt_interval(i));
        self.at(BIN, depth, b);
    }

    fn formula(&mut self, depth: usize, f: &Formula) {
        if self.sugar {
            if *f == Formula::truth() {
                self.out.push_str("TRUE");
                return;
            }
            if *f == Formula::neg(Formula::truth()) {
                self.out.push_str("FALSE");
                return;
            }
        }
        match f {
            Formula::Pred(name, ts) => {
                self.out.push_str(name);
                self.out.push('(');
                for (k, t) in ts.iter().enumerate() {
                    if k > 0 {
                        self.out.push_str(", ");
                    }
                    self.term(depth, t);
                }
                self.out.push(')');
            }
            Formula::Eq(t1, t2) => {
                self.term(depth, t1);
                self.out.push_str(" = ");
                self.term(depth, t2);
            }
            Formula::Neg(a) => {
                self.out.push_str("NOT ");
                self.at(UNARY, depth, a);
            }
            Formula::And(a, b) => {
                self.at(AND, depth, a);
                self.out.push_str(" AND ");
                self.at(UNARY, depth, b);
            }
            Formula::Or(a, b) => {
                self.at(OR, depth, a);
                self.out.push_str(" OR ");
                self.at(AND, depth, b);
            }
            Formula::Exists(a) => {
                let _ = write!(self.out, "EXISTS y{depth}. ");
                self.at(BIN, depth + 1, a);
            }
            Formula::Prev(i, a) => self.unary("PREV", i, depth, a),
            Formula::Next(i, a) => self.unary("NEXT", i, depth, a),
            Formula::Since(a, i, b) if self.sugar && **a == Formula::truth() => self.unary("ONCE", i, depth, b),
            Formula::Until(a, i, b) if self.sugar && **a == Formula::truth() => {
                self.unary("EVENTUALLY", i, depth, b)
            }
            Formula::Trigger(a, i, b) if self.sugar && **a == Formula::falsity_over(b) => {
                self.unary("HISTORICALLY", i, depth, b)
            }
            Formula::Release(a, i, b) if self.sugar && **a == Formula::falsity_over(b) => {
                self.unary("GLOBALLY", i, depth, b)
            }
            Formula::Since(a, i, b) => self.binary("SINCE", a, i, b, depth),
            Formula::Until(a, i, b) => self.binary("UNTIL", a, i, b, depth),
            Formula::Trigger(a, i, b) => self.binary("TRIGGER", a, i, b, depth),
            Formula::Release(a, i, b) => self.binary("RELEASE", a, i, b, depth),
        }
    }
}

/// Prints a formula in concrete syntax. Free variable `k` is written `xk`,
/// the variable bound by the quantifier at nesting level `l` is written
/// `yl`. With `sugar`, derived operators are printed in their short form.
pub fn print_formula(f: &Formula, sugar: bool) -> String {
    let mut p = Printer {
        sugar,
        out: String::new(),
    };
    p.formula(0, f);
    p.out
}
