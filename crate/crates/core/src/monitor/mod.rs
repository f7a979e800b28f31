//! The incremental monitor.
//!
//! [`minit`] turns a safe, future-bounded formula into a [`MonitorState`];
//! [`mstep`] feeds it one time-point at a time and returns the satisfying
//! tuples of every time-point whose verdict has become determined.

pub mod auxiliary;
pub mod buffer;
pub mod invariants;

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::formula::{fv, future_bounded, nfv, Formula, Interval, Term, Value};
use crate::safety::{is_constraint, issafe, safe_assignment, ssfv};
use crate::table::{unit_table, Table, Tuple};
use crate::trace::{Database, TracePrefix};

use auxiliary::{
    antijoin_t, eval_future, eval_until, join_t, update_release, update_since, update_trigger,
    update_until, ReleaseAux, SinceAux, TriggerAux, UntilAux,
};
pub use buffer::{mprev_next, Buf2};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonitorError {
    #[error("formula is not safe")]
    UnsafeFormula,
    #[error("formula has an unbounded future operator")]
    UnboundedFuture,
    #[error("time-stamp {got} is smaller than the previous time-stamp {last}")]
    MonotonicityViolation { last: u64, got: u64 },
}

/// How the right conjunct of a conjunction is evaluated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AndOp {
    /// `α ∧ β` with `β` safe.
    Join(Box<MFormula>),
    /// `α ∧ ¬β`; the state is that of `β`.
    Antijoin(Box<MFormula>),
    /// `α ∧ (t1 = t2)` binding one new variable per row.
    Assign(Term, Term),
    /// `α ∧ (t1 = t2)` or `α ∧ ¬(t1 = t2)` over bound variables.
    Constraint { positive: bool, t1: Term, t2: Term },
}

/// Monitor state mirroring the formula structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MFormula {
    MRel(Table),
    MPred(String, Vec<Term>),
    /// Negation of a closed safe formula: swaps the unit and empty tables.
    MNeg(Box<MFormula>),
    MAnd {
        left: Box<MFormula>,
        op: AndOp,
        buf: Buf2,
    },
    MOr(Box<MFormula>, Box<MFormula>, Buf2),
    MExists(Box<MFormula>),
    MPrev {
        ivl: Interval,
        sub: Box<MFormula>,
        first: bool,
        buf: VecDeque<Table>,
        nts: VecDeque<u64>,
    },
    MNext {
        ivl: Interval,
        sub: Box<MFormula>,
        first: bool,
        nts: VecDeque<u64>,
    },
    MSince {
        pos: bool,
        left: Box<MFormula>,
        ivl: Interval,
        right: Box<MFormula>,
        buf: Buf2,
        nts: VecDeque<u64>,
        aux: SinceAux,
    },
    MUntil {
        pos: bool,
        left: Box<MFormula>,
        ivl: Interval,
        right: Box<MFormula>,
        buf: Buf2,
        nts: VecDeque<u64>,
        aux: UntilAux,
    },
    MTrigger {
        pos: bool,
        left: Box<MFormula>,
        mem0: bool,
        ivl: Interval,
        right: Box<MFormula>,
        buf: Buf2,
        nts: VecDeque<u64>,
        aux: TriggerAux,
    },
    MRelease {
        pos: bool,
        left: Box<MFormula>,
        mem0: bool,
        ivl: Interval,
        right: Box<MFormula>,
        buf: Buf2,
        nts: VecDeque<u64>,
        aux: ReleaseAux,
    },
}

fn singleton(n: usize, x: usize, c: &Value) -> Table {
    let mut v = vec![None; n];
    v[x] = Some(c.clone());
    Table::from([v])
}

fn bool_table(n: usize, b: bool) -> Table {
    if b {
        unit_table(n)
    } else {
        Table::new()
    }
}

/// The monitored left operand of a temporal operator: the formula itself
/// when it is safe, otherwise the body of its negation.
fn split_left(n: usize, a: &Formula) -> Result<(bool, MFormula), MonitorError> {
    if issafe(a) {
        Ok((true, minit0(n, a)?))
    } else if let Formula::Neg(a1) = a {
        Ok((false, minit0(n, a1)?))
    } else {
        Err(MonitorError::UnsafeFormula)
    }
}

/// Translates a safe formula into its initial monitor state.
pub fn minit0(n: usize, f: &Formula) -> Result<MFormula, MonitorError> {
    if !issafe(f) {
        return Err(MonitorError::UnsafeFormula);
    }
    let b = Box::new;
    Ok(match f {
        Formula::Pred(name, ts) => MFormula::MPred(name.clone(), ts.clone()),
        Formula::Eq(Term::Var(x), Term::Const(c)) | Formula::Eq(Term::Const(c), Term::Var(x)) => {
            MFormula::MRel(singleton(n, *x, c))
        }
        Formula::Eq(t1, t2) => MFormula::MRel(bool_table(n, t1 == t2)),
        Formula::Neg(g) => match &**g {
            Formula::Eq(t1, t2) => MFormula::MRel(bool_table(n, t1 != t2)),
            _ => MFormula::MNeg(b(minit0(n, g)?)),
        },
        Formula::And(l, r) => {
            let left = b(minit0(n, l)?);
            let fam = ssfv(l);
            let op = if issafe(r) {
                AndOp::Join(b(minit0(n, r)?))
            } else if fam.iter().all(|x| safe_assignment(x, r)) {
                let Formula::Eq(t1, t2) = &**r else {
                    unreachable!("safe assignments are equalities")
                };
                AndOp::Assign(t1.clone(), t2.clone())
            } else if is_constraint(r) && fam.iter().all(|x| fv(r).is_subset(x)) {
                match &**r {
                    Formula::Eq(t1, t2) => AndOp::Constraint {
                        positive: true,
                        t1: t1.clone(),
                        t2: t2.clone(),
                    },
                    Formula::Neg(e) => match &**e {
                        Formula::Eq(t1, t2) => AndOp::Constraint {
                            positive: false,
                            t1: t1.clone(),
                            t2: t2.clone(),
                        },
                        _ => unreachable!("constraints are (negated) equalities"),
                    },
                    _ => unreachable!("constraints are (negated) equalities"),
                }
            } else if let Formula::Neg(r1) = &**r {
                AndOp::Antijoin(b(minit0(n, r1)?))
            } else {
                return Err(MonitorError::UnsafeFormula);
            };
            MFormula::MAnd {
                left,
                op,
                buf: Buf2::new(),
            }
        }
        Formula::Or(l, r) => MFormula::MOr(b(minit0(n, l)?), b(minit0(n, r)?), Buf2::new()),
        Formula::Exists(g) => MFormula::MExists(b(minit0(n + 1, g)?)),
        Formula::Prev(ivl, g) => MFormula::MPrev {
            ivl: *ivl,
            sub: b(minit0(n, g)?),
            first: true,
            buf: VecDeque::new(),
            nts: VecDeque::new(),
        },
        Formula::Next(ivl, g) => MFormula::MNext {
            ivl: *ivl,
            sub: b(minit0(n, g)?),
            first: true,
            nts: VecDeque::new(),
        },
        Formula::Since(l, ivl, r) => {
            let (pos, left) = split_left(n, l)?;
            MFormula::MSince {
                pos,
                left: b(left),
                ivl: *ivl,
                right: b(minit0(n, r)?),
                buf: Buf2::new(),
                nts: VecDeque::new(),
                aux: SinceAux::new(),
            }
        }
        Formula::Until(l, ivl, r) => {
            let (pos, left) = split_left(n, l)?;
            MFormula::MUntil {
                pos,
                left: b(left),
                ivl: *ivl,
                right: b(minit0(n, r)?),
                buf: Buf2::new(),
                nts: VecDeque::new(),
                aux: UntilAux::new(),
            }
        }
        Formula::Trigger(l, ivl, r) | Formula::Release(l, ivl, r) => {
            let mem0 = ivl.contains_zero();
            let (pos, left) = if mem0 {
                split_left(n, l)?
            } else {
                (true, minit0(n, l)?)
            };
            let (left, right) = (b(left), b(minit0(n, r)?));
            if matches!(f, Formula::Trigger(..)) {
                MFormula::MTrigger {
                    pos,
                    left,
                    mem0,
                    ivl: *ivl,
                    right,
                    buf: Buf2::new(),
                    nts: VecDeque::new(),
                    aux: TriggerAux::new(),
                }
            } else {
                MFormula::MRelease {
                    pos,
                    left,
                    mem0,
                    ivl: *ivl,
                    right,
                    buf: Buf2::new(),
                    nts: VecDeque::new(),
                    aux: ReleaseAux::new(),
                }
            }
        }
    })
}

fn match_pred(n: usize, name: &str, ts: &[Term], db: &Database) -> Table {
    let mut out = Table::new();
    'events: for e in db.iter().filter(|e| e.name == name && e.args.len() == ts.len()) {
        let mut v: Tuple = vec![None; n];
        for (t, a) in ts.iter().zip(&e.args) {
            match t {
                Term::Const(c) if c != a => continue 'events,
                Term::Const(_) => {}
                Term::Var(x) => match &v[*x] {
                    Some(b) if b != a => continue 'events,
                    _ => v[*x] = Some(a.clone()),
                },
            }
        }
        out.insert(v);
    }
    out
}

fn term_value(v: &Tuple, t: &Term) -> Option<Value> {
    match t {
        Term::Const(c) => Some(c.clone()),
        Term::Var(x) => v[*x].clone(),
    }
}

fn assign(r: &Table, t1: &Term, t2: &Term) -> Table {
    r.iter()
        .filter_map(|v| {
            let mut w = v.clone();
            match (term_value(v, t1), term_value(v, t2), t1, t2) {
                (Some(a), Some(b), _, _) => (a == b).then_some(w),
                (None, Some(b), Term::Var(x), _) | (Some(b), None, _, Term::Var(x)) => {
                    w[*x] = Some(b);
                    Some(w)
                }
                _ => None,
            }
        })
        .collect()
}

fn constrain(r: &Table, positive: bool, t1: &Term, t2: &Term) -> Table {
    r.iter()
        .filter(|v| match (term_value(v, t1), term_value(v, t2)) {
            (Some(a), Some(b)) => (a == b) == positive,
            _ => false,
        })
        .cloned()
        .collect()
}

impl MFormula {
    /// Consumes one time-point and returns the tables of all time-points
    /// that became evaluable, oldest first.
    pub fn meval(&mut self, n: usize, ts: u64, db: &Database) -> Vec<Table> {
        match self {
            MFormula::MRel(t) => vec![t.clone()],
            MFormula::MPred(name, args) => vec![match_pred(n, name, args, db)],
            MFormula::MNeg(sub) => sub
                .meval(n, ts, db)
                .into_iter()
                .map(|t| bool_table(n, t.is_empty()))
                .collect(),
            MFormula::MAnd { left, op, buf } => {
                let xs = left.meval(n, ts, db);
                match op {
                    AndOp::Join(right) | AndOp::Antijoin(right) => {
                        let ys = right.meval(n, ts, db);
                        buf.add(xs, ys);
                        let is_join = matches!(op, AndOp::Join(_));
                        buf.take()
                            .into_iter()
                            .map(|(a, b)| if is_join { join_t(&a, &b) } else { antijoin_t(&a, &b) })
                            .collect()
                    }
                    AndOp::Assign(t1, t2) => xs.iter().map(|r| assign(r, t1, t2)).collect(),
                    AndOp::Constraint { positive, t1, t2 } => {
                        xs.iter().map(|r| constrain(r, *positive, t1, t2)).collect()
                    }
                }
            }
            MFormula::MOr(l, r, buf) => {
                let xs = l.meval(n, ts, db);
                let ys = r.meval(n, ts, db);
                buf.add(xs, ys);
                buf.take()
                    .into_iter()
                    .map(|(a, b)| crate::table::eval_or(n, &a, &b).expect("operand widths agree"))
                    .collect()
            }
            MFormula::MExists(sub) => sub
                .meval(n + 1, ts, db)
                .into_iter()
                .map(|t| t.into_iter().map(|v| v[1..].to_vec()).collect())
                .collect(),
            MFormula::MPrev {
                ivl,
                sub,
                first,
                buf,
                nts,
            } => {
                buf.extend(sub.meval(n, ts, db));
                nts.push_back(ts);
                let mut out = Vec::new();
                if *first {
                    out.push(Table::new());
                    *first = false;
                }
                out.extend(mprev_next(ivl, buf, nts));
                out
            }
            MFormula::MNext { ivl, sub, first, nts } => {
                let mut xs: VecDeque<Table> = sub.meval(n, ts, db).into();
                if *first && !xs.is_empty() {
                    xs.pop_front();
                    *first = false;
                }
                nts.push_back(ts);
                let out = mprev_next(ivl, &mut xs, nts);
                debug_assert!(xs.is_empty(), "next never buffers tables");
                out
            }
            MFormula::MSince {
                pos,
                left,
                ivl,
                right,
                buf,
                nts,
                aux,
            } => {
                let xs = left.meval(n, ts, db);
                let ys = right.meval(n, ts, db);
                buf.add(xs, ys);
                nts.push_back(ts);
                buf.take_stamped(nts)
                    .into_iter()
                    .map(|(a, b, t)| update_since(ivl, *pos, &a, &b, t, aux))
                    .collect()
            }
            MFormula::MUntil {
                pos,
                left,
                ivl,
                right,
                buf,
                nts,
                aux,
            } => {
                let xs = left.meval(n, ts, db);
                let ys = right.meval(n, ts, db);
                buf.add(xs, ys);
                nts.push_back(ts);
                for (a, b, t) in buf.take_stamped(nts) {
                    update_until(ivl, *pos, &a, &b, t, aux);
                }
                let nt = nts.front().copied().unwrap_or(ts);
                eval_until(ivl, nt, aux)
            }
            MFormula::MTrigger {
                pos,
                left,
                mem0,
                ivl,
                right,
                buf,
                nts,
                aux,
            } => {
                let xs = left.meval(n, ts, db);
                let ys = right.meval(n, ts, db);
                buf.add(xs, ys);
                nts.push_back(ts);
                buf.take_stamped(nts)
                    .into_iter()
                    .map(|(a, b, t)| update_trigger(ivl, *mem0, *pos, &a, &b, t, aux, n))
                    .collect()
            }
            MFormula::MRelease {
                pos,
                left,
                mem0,
                ivl,
                right,
                buf,
                nts,
                aux,
            } => {
                let xs = left.meval(n, ts, db);
                let ys = right.meval(n, ts, db);
                buf.add(xs, ys);
                nts.push_back(ts);
                for (a, b, t) in buf.take_stamped(nts) {
                    update_release(ivl, *mem0, *pos, &a, &b, t, aux, n);
                }
                let nt = nts.front().copied().unwrap_or(ts);
                eval_future(ivl, nt, aux)
            }
        }
    }
}

/// The monitor: next time-point to be output, formula state and width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonitorState {
    pub next_output: usize,
    pub mf: MFormula,
    pub n: usize,
    last_ts: Option<u64>,
}

impl MonitorState {
    /// Like [`mstep`], but returns one table per newly evaluated time-point.
    pub fn step_tables(&mut self, db: &Database, ts: u64) -> Result<Vec<(usize, Table)>, MonitorError> {
        if let Some(last) = self.last_ts {
            if ts < last {
                return Err(MonitorError::MonotonicityViolation { last, got: ts });
            }
        }
        self.last_ts = Some(ts);
        let tables = self.mf.meval(self.n, ts, db);
        let start = self.next_output;
        self.next_output += tables.len();
        Ok(tables
            .into_iter()
            .enumerate()
            .map(|(k, t)| (start + k, t))
            .collect())
    }
}

/// Initial monitor state for a safe, future-bounded formula.
pub fn minit(f: &Formula) -> Result<MonitorState, MonitorError> {
    if !issafe(f) {
        return Err(MonitorError::UnsafeFormula);
    }
    if !future_bounded(f) {
        return Err(MonitorError::UnboundedFuture);
    }
    let n = nfv(f);
    Ok(MonitorState {
        next_output: 0,
        mf: minit0(n, f)?,
        n,
        last_ts: None,
    })
}

/// Feeds one time-point to the monitor and returns the satisfying
/// `(time-point, tuple)` pairs that became available.
pub fn mstep(
    (db, ts): (&Database, u64),
    st: &mut MonitorState,
) -> Result<BTreeSet<(usize, Tuple)>, MonitorError> {
    Ok(st
        .step_tables(db, ts)?
        .into_iter()
        .flat_map(|(i, t)| t.into_iter().map(move |v| (i, v)))
        .collect())
}

/// The number of leading time-points whose verdicts are determined by a
/// prefix with the given stamps.
pub fn progress_in(stamps: &[u64], f: &Formula) -> usize {
    let j = stamps.len();
    match f {
        Formula::Pred(..) | Formula::Eq(..) => j,
        Formula::Neg(a) | Formula::Exists(a) => progress_in(stamps, a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Since(a, _, b) | Formula::Trigger(a, _, b) => {
            progress_in(stamps, a).min(progress_in(stamps, b))
        }
        Formula::Prev(_, a) => {
            if j == 0 {
                0
            } else {
                (progress_in(stamps, a) + 1).min(j)
            }
        }
        Formula::Next(_, a) => progress_in(stamps, a).saturating_sub(1),
        Formula::Until(a, ivl, b) | Formula::Release(a, ivl, b) => {
            let m = progress_in(stamps, a).min(progress_in(stamps, b));
            if j == 0 {
                return 0;
            }
            // The latest stamp that may be consulted: that of time-point m,
            // or the last one when m is the end of the prefix.
            let last = stamps[m.min(j - 1)];
            (0..m).find(|&i| ivl.mem_r(last - stamps[i])).unwrap_or(m)
        }
    }
}

pub fn progress(p: &TracePrefix, f: &Formula) -> usize {
    progress_in(&p.stamps(), f)
}
