//! Abstract syntax of metric first-order temporal logic.
//!
//! Variables are De Bruijn indices: `Exists` binds index 0 of its body and
//! every other free index of the body is shifted down by one outside of it.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// A domain value. Values are only ever compared for equality during
/// evaluation; the derived ordering exists for deterministic containers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Str(String),
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(usize),
    Const(Value),
}

impl Term {
    pub fn var(x: usize) -> Self {
        Term::Var(x)
    }

    pub fn int(v: i64) -> Self {
        Term::Const(Value::Int(v))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Term::Const(_))
    }
}

/// Free variables of a term.
pub fn fv_trm(t: &Term) -> BTreeSet<usize> {
    match t {
        Term::Var(x) => BTreeSet::from([*x]),
        Term::Const(_) => BTreeSet::new(),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("empty interval [{lo}, {hi}]")]
pub struct EmptyInterval {
    pub lo: u64,
    pub hi: u64,
}

/// A closed interval of natural numbers `[lo, hi]`, where `hi = None` stands
/// for an unbounded right end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    lo: u64,
    hi: Option<u64>,
}

impl Interval {
    pub fn new(lo: u64, hi: Option<u64>) -> Result<Self, EmptyInterval> {
        match hi {
            Some(hi) if hi < lo => Err(EmptyInterval { lo, hi }),
            _ => Ok(Interval { lo, hi }),
        }
    }

    /// `[lo, hi]`
    pub fn closed(lo: u64, hi: u64) -> Result<Self, EmptyInterval> {
        Self::new(lo, Some(hi))
    }

    /// `[lo, ∞)`
    pub fn unbounded(lo: u64) -> Self {
        Interval { lo, hi: None }
    }

    /// `[lo, hi)`, stored as `[lo, hi - 1]`.
    pub fn half_open(lo: u64, hi: u64) -> Result<Self, EmptyInterval> {
        if hi <= lo {
            return Err(EmptyInterval { lo, hi });
        }
        Self::new(lo, Some(hi - 1))
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> Option<u64> {
        self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.hi.is_some()
    }

    pub fn mem_l(&self, x: u64) -> bool {
        self.lo <= x
    }

    pub fn mem_r(&self, x: u64) -> bool {
        self.hi.is_none_or(|hi| x <= hi)
    }

    pub fn mem(&self, x: u64) -> bool {
        self.mem_l(x) && self.mem_r(x)
    }

    pub fn contains_zero(&self) -> bool {
        self.lo == 0
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(hi) => write!(f, "[{},{}]", self.lo, hi),
            None => write!(f, "[{},*)", self.lo),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Pred(String, Vec<Term>),
    Eq(Term, Term),
    Neg(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(Box<Formula>),
    Prev(Interval, Box<Formula>),
    Next(Interval, Box<Formula>),
    Since(Box<Formula>, Interval, Box<Formula>),
    Until(Box<Formula>, Interval, Box<Formula>),
    Trigger(Box<Formula>, Interval, Box<Formula>),
    Release(Box<Formula>, Interval, Box<Formula>),
}

impl Formula {
    pub fn pred(name: &str, args: Vec<Term>) -> Self {
        Formula::Pred(name.to_string(), args)
    }

    pub fn eq(t1: Term, t2: Term) -> Self {
        Formula::Eq(t1, t2)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(f: Formula) -> Self {
        Formula::Neg(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(f: Formula) -> Self {
        Formula::Exists(Box::new(f))
    }

    pub fn prev(i: Interval, f: Formula) -> Self {
        Formula::Prev(i, Box::new(f))
    }

    pub fn next(i: Interval, f: Formula) -> Self {
        Formula::Next(i, Box::new(f))
    }

    pub fn since(a: Formula, i: Interval, b: Formula) -> Self {
        Formula::Since(Box::new(a), i, Box::new(b))
    }

    pub fn until(a: Formula, i: Interval, b: Formula) -> Self {
        Formula::Until(Box::new(a), i, Box::new(b))
    }

    pub fn trigger(a: Formula, i: Interval, b: Formula) -> Self {
        Formula::Trigger(Box::new(a), i, Box::new(b))
    }

    pub fn release(a: Formula, i: Interval, b: Formula) -> Self {
        Formula::Release(Box::new(a), i, Box::new(b))
    }

    /// `c = c` for the integer constant 0.
    pub fn truth() -> Self {
        Formula::Eq(Term::int(0), Term::int(0))
    }

    /// `¬(v0 = v0) ∧ … ∧ ¬(vk = vk)` over the free variables of `f`, or
    /// `¬(0 = 0)` when `f` is closed. The result is constantly false and has
    /// the same free variables as `f`.
    pub fn falsity_over(f: &Formula) -> Self {
        let mut conjuncts = fv(f)
            .into_iter()
            .map(|x| Formula::neg(Formula::eq(Term::Var(x), Term::Var(x))));
        match conjuncts.next() {
            None => Formula::neg(Formula::truth()),
            Some(first) => conjuncts.fold(first, Formula::and),
        }
    }

    /// `H_I f`, encoded as `(⊥ f) T_I f`.
    pub fn historically(i: Interval, f: Formula) -> Self {
        Formula::trigger(Formula::falsity_over(&f), i, f)
    }

    /// `G_I f`, encoded as `(⊥ f) R_I f`.
    pub fn globally(i: Interval, f: Formula) -> Self {
        Formula::release(Formula::falsity_over(&f), i, f)
    }

    /// `P_I f`, encoded as `⊤ S_I f`.
    pub fn once(i: Interval, f: Formula) -> Self {
        Formula::since(Formula::truth(), i, f)
    }

    /// `F_I f`, encoded as `⊤ U_I f`.
    pub fn eventually(i: Interval, f: Formula) -> Self {
        Formula::until(Formula::truth(), i, f)
    }

    /// Direct subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Pred(..) | Formula::Eq(..) => vec![],
            Formula::Neg(a) | Formula::Exists(a) | Formula::Prev(_, a) | Formula::Next(_, a) => {
                vec![a]
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Since(a, _, b)
            | Formula::Until(a, _, b)
            | Formula::Trigger(a, _, b)
            | Formula::Release(a, _, b) => vec![a, b],
        }
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::depth)
            .max()
            .unwrap_or(0)
    }
}

fn collect_fv(f: &Formula, shift: usize, out: &mut BTreeSet<usize>) {
    let mut term = |t: &Term| {
        if let Term::Var(x) = t {
            if *x >= shift {
                out.insert(x - shift);
            }
        }
    };
    match f {
        Formula::Pred(_, ts) => ts.iter().for_each(&mut term),
        Formula::Eq(t1, t2) => {
            term(t1);
            term(t2);
        }
        Formula::Exists(a) => collect_fv(a, shift + 1, out),
        _ => {
            for c in f.children() {
                collect_fv(c, shift, out);
            }
        }
    }
}

/// Free variables of a formula.
pub fn fv(f: &Formula) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    collect_fv(f, 0, &mut out);
    out
}

/// The least `n` such that every free variable is below `n`.
pub fn nfv(f: &Formula) -> usize {
    fv(f).last().map_or(0, |x| x + 1)
}

/// True iff every `Until` and `Release` has a bounded interval.
pub fn future_bounded(f: &Formula) -> bool {
    match f {
        Formula::Until(_, i, _) | Formula::Release(_, i, _) if !i.is_bounded() => false,
        _ => f.children().into_iter().all(future_bounded),
    }
}

/// All constants occurring in the formula.
pub fn constants(f: &Formula) -> BTreeSet<Value> {
    fn go(f: &Formula, out: &mut BTreeSet<Value>) {
        let mut term = |t: &Term| {
            if let Term::Const(c) = t {
                out.insert(c.clone());
            }
        };
        match f {
            Formula::Pred(_, ts) => ts.iter().for_each(&mut term),
            Formula::Eq(t1, t2) => {
                term(t1);
                term(t2);
            }
            _ => f.children().into_iter().for_each(|c| go(c, out)),
        }
    }
    let mut out = BTreeSet::new();
    go(f, &mut out);
    out
}
