//! Seeded generators shared by the integration tests.
//!
//! Formulas are drawn from a grammar biased toward the safe fragment
//! (joins, antijoins, assignments, constraints, negated left operands,
//! falsity-guarded duals) and then filtered by the caller as needed.

#![allow(dead_code)]

use mfotl::formula::{future_bounded, nfv, Formula, Interval, Term};
use mfotl::safety::{issafe, VarSet};
use mfotl::trace::{Database, Event, TracePrefix};
use mfotl::Value;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Predicate signature: name and arity.
pub const PREDS: [(&str, usize); 3] = [("p", 1), ("q", 2), ("r", 0)];

pub struct Gen {
    pub vars: usize,
    pub consts: i64,
    pub future: bool,
}

impl Default for Gen {
    fn default() -> Self {
        Gen {
            vars: 3,
            consts: 3,
            future: true,
        }
    }
}

impl Gen {
    fn var(&self, rng: &mut TestRng) -> Term {
        Term::Var(rng.gen_range(0..self.vars))
    }

    fn term(&self, rng: &mut TestRng) -> Term {
        if rng.gen_bool(0.8) {
            self.var(rng)
        } else {
            Term::int(rng.gen_range(0..self.consts))
        }
    }

    fn interval(&self, rng: &mut TestRng, bounded: bool) -> Interval {
        let lo = rng.gen_range(0..3);
        if !bounded && rng.gen_bool(0.3) {
            Interval::unbounded(lo)
        } else {
            Interval::closed(lo, lo + rng.gen_range(0..4)).unwrap()
        }
    }

    fn interval0(&self, rng: &mut TestRng, bounded: bool) -> Interval {
        let hi = rng.gen_range(0..4);
        if !bounded && rng.gen_bool(0.3) {
            Interval::unbounded(0)
        } else {
            Interval::closed(0, hi).unwrap()
        }
    }

    pub fn atom(&self, rng: &mut TestRng) -> Formula {
        match rng.gen_range(0..10) {
            0 => Formula::eq(self.var(rng), Term::int(rng.gen_range(0..self.consts))),
            1 => Formula::truth(),
            _ => {
                let (name, arity) = *PREDS.choose(rng).unwrap();
                Formula::pred(name, (0..arity).map(|_| self.term(rng)).collect())
            }
        }
    }

    fn equality(&self, rng: &mut TestRng) -> Formula {
        let t1 = self.var(rng);
        let t2 = if rng.gen_bool(0.7) {
            self.var(rng)
        } else {
            Term::int(rng.gen_range(0..self.consts))
        };
        Formula::eq(t1, t2)
    }

    /// A random formula of depth at most `depth`.
    pub fn formula(&self, rng: &mut TestRng, depth: usize) -> Formula {
        if depth == 0 {
            return self.atom(rng);
        }
        let d = depth - 1;
        let sub = |rng: &mut TestRng| {
            let dd = rng.gen_range(0..=d);
            self.formula(rng, dd)
        };
        let past = !self.future || rng.gen_bool(0.5);
        match rng.gen_range(0..17) {
            0 => self.atom(rng),
            1 | 2 => Formula::and(sub(rng), sub(rng)),
            3 => Formula::and(sub(rng), Formula::neg(sub(rng))),
            4 => Formula::and(sub(rng), self.equality(rng)),
            5 => Formula::and(sub(rng), Formula::neg(self.equality(rng))),
            6 => Formula::or(sub(rng), sub(rng)),
            7 => Formula::exists(sub(rng)),
            8 => Formula::neg(sub(rng)),
            9 => {
                let i = self.interval(rng, !past);
                if past {
                    Formula::prev(i, sub(rng))
                } else {
                    Formula::next(i, sub(rng))
                }
            }
            10 | 11 => {
                let i = self.interval(rng, !past);
                let a = if rng.gen_bool(0.3) {
                    Formula::neg(sub(rng))
                } else {
                    sub(rng)
                };
                let b = sub(rng);
                if past {
                    Formula::since(a, i, b)
                } else {
                    Formula::until(a, i, b)
                }
            }
            12 | 13 => {
                // Dual with 0 in the interval.
                let i = self.interval0(rng, !past);
                let a = if rng.gen_bool(0.3) {
                    Formula::neg(sub(rng))
                } else {
                    sub(rng)
                };
                let b = sub(rng);
                if past {
                    Formula::trigger(a, i, b)
                } else {
                    Formula::release(a, i, b)
                }
            }
            14 => {
                // Falsity-guarded dual: historically / globally.
                let i = self.interval(rng, !past);
                let b = sub(rng);
                if past {
                    Formula::historically(i, b)
                } else {
                    Formula::globally(i, b)
                }
            }
            15 => {
                let i = self.interval(rng, !past);
                let b = sub(rng);
                if past {
                    Formula::once(i, b)
                } else {
                    Formula::eventually(i, b)
                }
            }
            _ => {
                // Dual with equal operand variables, possibly without 0.
                let i = self.interval(rng, !past);
                let a = sub(rng);
                let b = sub(rng);
                if past {
                    Formula::trigger(a, i, b)
                } else {
                    Formula::release(a, i, b)
                }
            }
        }
    }

    /// A safe, future-bounded formula with at most `max_nfv` free variable
    /// slots and depth at most `depth`.
    pub fn safe_formula(&self, rng: &mut TestRng, depth: usize, max_nfv: usize) -> Formula {
        loop {
            let k = rng.gen_range(0..=max_nfv.min(self.vars));
            let mut all: Vec<usize> = (0..self.vars).collect();
            all.shuffle(rng);
            let v: VarSet = all[..k].iter().copied().collect();
            let d = rng.gen_range(1..=depth);
            let f = if rng.gen_bool(0.2) {
                self.weak(rng, d, &v)
            } else {
                self.strong(rng, d, &v)
            };
            if issafe(&f) && future_bounded(&f) && nfv(&f) <= max_nfv {
                return f;
            }
        }
    }

    fn pick_subset(rng: &mut TestRng, v: &VarSet) -> VarSet {
        v.iter().copied().filter(|_| rng.gen_bool(0.6)).collect()
    }

    fn cover(&self, rng: &mut TestRng, v: &VarSet) -> Formula {
        let xs: Vec<usize> = v.iter().copied().collect();
        let c = |rng: &mut TestRng| Term::int(rng.gen_range(0..self.consts));
        match xs.as_slice() {
            [] => match rng.gen_range(0..4) {
                0 => Formula::truth(),
                1 => Formula::pred("q", vec![c(rng), c(rng)]),
                _ => Formula::pred("r", vec![]),
            },
            [x] => match rng.gen_range(0..6) {
                0 => Formula::eq(Term::Var(*x), c(rng)),
                1 => Formula::pred("q", vec![Term::Var(*x), c(rng)]),
                2 => Formula::pred("q", vec![Term::Var(*x), Term::Var(*x)]),
                _ => Formula::pred("p", vec![Term::Var(*x)]),
            },
            [x, y] => {
                let (a, b) = if rng.gen_bool(0.5) { (*x, *y) } else { (*y, *x) };
                Formula::pred("q", vec![Term::Var(a), Term::Var(b)])
            }
            [x, rest @ ..] => {
                let tail: VarSet = rest.iter().copied().collect();
                let head: VarSet = [*x, rest[0]].into_iter().collect();
                Formula::and(self.cover(rng, &head), self.cover(rng, &tail))
            }
        }
    }

    fn ivl_bounded(&self, rng: &mut TestRng, zero: bool) -> Interval {
        let lo = if zero { 0 } else { rng.gen_range(0..3) };
        Interval::closed(lo, lo + rng.gen_range(0..4)).unwrap()
    }

    fn ivl_past(&self, rng: &mut TestRng, zero: bool) -> Interval {
        if rng.gen_bool(0.25) {
            Interval::unbounded(if zero { 0 } else { rng.gen_range(0..3) })
        } else {
            self.ivl_bounded(rng, zero)
        }
    }

    fn ivl_nonzero(&self, rng: &mut TestRng, past: bool) -> Interval {
        let lo = rng.gen_range(1..3);
        if past && rng.gen_bool(0.25) {
            Interval::unbounded(lo)
        } else {
            Interval::closed(lo, lo + rng.gen_range(0..4)).unwrap()
        }
    }

    fn sub(&self, rng: &mut TestRng, depth: usize, v: &VarSet) -> Formula {
        let d = if rng.gen_bool(0.7) {
            depth - 1
        } else {
            rng.gen_range(0..depth)
        };
        self.strong(rng, d, v)
    }

    /// A formula with free variables exactly `v` whose only safe attribute
    /// set is `v`.
    pub fn strong(&self, rng: &mut TestRng, depth: usize, v: &VarSet) -> Formula {
        if depth == 0 {
            return self.cover(rng, v);
        }
        let past = rng.gen_bool(0.5);
        match rng.gen_range(0..16) {
            0 => self.cover(rng, v),
            1 | 2 => {
                let v1 = Self::pick_subset(rng, v);
                let v2: VarSet = v.difference(&v1).copied().chain(Self::pick_subset(rng, v)).collect();
                Formula::and(self.sub(rng, depth, &v1), self.sub(rng, depth, &v2))
            }
            3 => {
                let w = Self::pick_subset(rng, v);
                Formula::and(self.sub(rng, depth, v), Formula::neg(self.sub(rng, depth, &w)))
            }
            4 if !v.is_empty() => {
                // Assignment binding one variable from the others or a constant.
                let xs: Vec<usize> = v.iter().copied().collect();
                let y = *xs.choose(rng).unwrap();
                let rest: VarSet = v.iter().copied().filter(|&z| z != y).collect();
                let src = match rest.iter().next() {
                    Some(&z) if rng.gen_bool(0.7) => Term::Var(z),
                    _ => Term::int(rng.gen_range(0..self.consts)),
                };
                let eq = if rng.gen_bool(0.5) {
                    Formula::eq(Term::Var(y), src)
                } else {
                    Formula::eq(src, Term::Var(y))
                };
                Formula::and(self.sub(rng, depth, &rest), eq)
            }
            5 if !v.is_empty() => {
                let xs: Vec<usize> = v.iter().copied().collect();
                let t1 = Term::Var(*xs.choose(rng).unwrap());
                let t2 = if rng.gen_bool(0.6) {
                    Term::Var(*xs.choose(rng).unwrap())
                } else {
                    Term::int(rng.gen_range(0..self.consts))
                };
                let c = Formula::eq(t1, t2);
                let c = if rng.gen_bool(0.6) { Formula::neg(c) } else { c };
                Formula::and(self.sub(rng, depth, v), c)
            }
            6 => Formula::or(self.sub(rng, depth, v), self.sub(rng, depth, v)),
            7 => {
                let inner: VarSet = std::iter::once(0).chain(v.iter().map(|x| x + 1)).collect();
                let inner = if rng.gen_bool(0.2) {
                    inner.into_iter().filter(|&x| x != 0).collect()
                } else {
                    inner
                };
                Formula::exists(self.sub(rng, depth, &inner))
            }
            8 => {
                if past {
                    let zero = rng.gen_bool(0.3);
                    Formula::prev(self.ivl_past(rng, zero), self.sub(rng, depth, v))
                } else {
                    let zero = rng.gen_bool(0.3);
                    Formula::next(self.ivl_bounded(rng, zero), self.sub(rng, depth, v))
                }
            }
            9 | 10 => {
                let w = Self::pick_subset(rng, v);
                let a = if rng.gen_bool(0.35) {
                    Formula::neg(self.sub(rng, depth, &w))
                } else {
                    self.sub(rng, depth, &w)
                };
                let b = self.sub(rng, depth, v);
                let zero = rng.gen_bool(0.5);
                if past {
                    Formula::since(a, self.ivl_past(rng, zero), b)
                } else {
                    Formula::until(a, self.ivl_bounded(rng, zero), b)
                }
            }
            11 | 12 => {
                let w = Self::pick_subset(rng, v);
                let a = match rng.gen_range(0..3) {
                    0 => Formula::neg(self.sub(rng, depth, &w)),
                    _ => self.sub(rng, depth, &w),
                };
                let b = self.sub(rng, depth, v);
                if past {
                    Formula::trigger(a, self.ivl_past(rng, true), b)
                } else {
                    Formula::release(a, self.ivl_bounded(rng, true), b)
                }
            }
            13 if v.is_empty() => Formula::neg(self.sub(rng, depth, v)),
            _ => Formula::and(self.sub(rng, depth, v), self.weak(rng, depth - 1, v)),
        }
    }

    /// A formula with free variables `v` that may also be represented by
    /// the unit table: duals without 0 in the interval and disjunctions
    /// with them.
    pub fn weak(&self, rng: &mut TestRng, depth: usize, v: &VarSet) -> Formula {
        let d = depth.saturating_sub(1);
        let past = rng.gen_bool(0.5);
        match rng.gen_range(0..5) {
            0 | 1 => {
                let a = self.strong(rng, d, v);
                let b = self.strong(rng, d, v);
                let i = self.ivl_nonzero(rng, past);
                if past {
                    Formula::trigger(a, i, b)
                } else {
                    Formula::release(a, i, b)
                }
            }
            2 => {
                let b = self.strong(rng, d, v);
                let i = self.ivl_nonzero(rng, past);
                if past {
                    Formula::historically(i, b)
                } else {
                    Formula::globally(i, b)
                }
            }
            3 => Formula::or(self.strong(rng, d, v), self.weak(rng, d, v)),
            _ => Formula::or(self.weak(rng, d, v), self.weak(rng, d, v)),
        }
    }
}

/// A random trace over values `0..domain` with stamp increments in `0..=3`.
pub fn trace(rng: &mut TestRng, len: usize, domain: i64) -> TracePrefix {
    let mut t = 0u64;
    let mut entries = Vec::with_capacity(len);
    for k in 0..len {
        if k > 0 {
            t += rng.gen_range(0..=3);
        }
        let mut db = Database::new();
        for (name, arity) in PREDS {
            let tuples = domain.pow(arity as u32);
            for code in 0..tuples {
                if rng.gen_bool(if arity == 2 { 0.25 } else { 0.45 }) {
                    let args = (0..arity)
                        .map(|a| Value::Int(code / domain.pow(a as u32) % domain))
                        .collect();
                    db.insert(Event::new(name, args));
                }
            }
        }
        entries.push((db, t));
    }
    TracePrefix::from_entries(entries).unwrap()
}
