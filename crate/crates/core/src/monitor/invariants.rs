//! Executable well-formedness invariants of monitor states.
//!
//! [`check_state`] walks a formula and its monitor state side by side after
//! `j` time-points have been consumed and compares every buffered table and
//! auxiliary entry with the reference semantics of [`Oracle`]. The oracle's
//! trace must extend the consumed prefix.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::formula::{fv, Formula, Interval};
use crate::oracle::Oracle;
use crate::safety::VarSet;
use crate::table::{qtable, unit_table, wf_tuples, Table, Tuple};

use super::{progress_in, AndOp, Buf2, MFormula, MonitorState};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invariant violated at `{node}` after {j} time-points: {what}")]
pub struct InvariantViolation {
    pub node: String,
    pub j: usize,
    pub what: String,
}

struct Ctx<'o, 'a> {
    oracle: &'o Oracle<'a>,
    stamps: Vec<u64>,
    cells: Vec<crate::formula::Value>,
}

type Res = Result<(), InvariantViolation>;

impl<'a> Ctx<'_, 'a> {
    fn j(&self) -> usize {
        self.stamps.len()
    }

    fn prog(&self, f: &Formula) -> usize {
        progress_in(&self.stamps, f)
    }

    fn fail(&self, f: &Formula, what: impl Into<String>) -> InvariantViolation {
        InvariantViolation {
            node: format!("{f:?}"),
            j: self.j(),
            what: what.into(),
        }
    }

    fn ensure(&self, ok: bool, f: &Formula, what: impl FnOnce() -> String) -> Res {
        if ok {
            Ok(())
        } else {
            Err(self.fail(f, what()))
        }
    }

    fn universe(&self, n: usize, x: &VarSet) -> Vec<Tuple> {
        wf_tuples(n, x, &self.cells)
    }

    /// `r` is the table of `g` at `i`: attributes `dfv_i g`, rows exactly the
    /// satisfying well-formed tuples.
    fn is_sat_table(&self, n: usize, i: usize, g: &'a Formula, r: &Table) -> bool {
        let x = self.oracle.dfv_unchecked(i, g);
        qtable(
            n,
            &x,
            |_| true,
            |v| self.oracle.tuple_holds(v, i, g),
            r,
            &self.universe(n, &x),
        )
    }

    fn is_qtable(&self, n: usize, x: &VarSet, q: impl Fn(&Tuple) -> bool, r: &Table) -> bool {
        qtable(n, x, |_| true, q, r, &self.universe(n, x))
    }

    fn check_tables(&self, f: &Formula, n: usize, from: usize, g: &'a Formula, ts: &VecDeque<Table>, side: &str) -> Res {
        let to = self.prog(g);
        self.ensure(from + ts.len() == to, f, || {
            format!("{side} buffer holds {} tables, expected [{from}, {to})", ts.len())
        })?;
        for (k, r) in ts.iter().enumerate() {
            self.ensure(self.is_sat_table(n, from + k, g, r), f, || {
                format!("{side} buffer table for time-point {} is wrong: {r:?}", from + k)
            })?;
        }
        Ok(())
    }

    fn check_buf2(&self, f: &Formula, n: usize, l: &'a Formula, r: &'a Formula, buf: &Buf2) -> Res {
        let m = self.prog(l).min(self.prog(r));
        self.check_tables(f, n, m, l, &buf.left, "left")?;
        self.check_tables(f, n, m, r, &buf.right, "right")
    }

    fn check_nts(&self, f: &Formula, from: usize, nts: &VecDeque<u64>) -> Res {
        let want = &self.stamps[from.min(self.j())..];
        self.ensure(nts.iter().eq(want.iter()), f, || {
            format!("stamp queue {nts:?}, expected {want:?}")
        })
    }

    fn holds(&self, v: &Tuple, i: usize, g: &'a Formula) -> bool {
        self.oracle.tuple_holds(v, i, g)
    }

    /// Entries of a past operator cover exactly the distinct stamps of
    /// time-points up to `m - 1` still within the interval's upper bound,
    /// newest first.
    fn check_past_aux<'t>(
        &self,
        f: &Formula,
        ivl: &Interval,
        m: usize,
        stamps_of: impl Iterator<Item = &'t u64> + Clone,
    ) -> Res {
        let got: Vec<u64> = stamps_of.copied().collect();
        let want: Vec<u64> = if m == 0 {
            Vec::new()
        } else {
            let last = self.stamps[m - 1];
            let set: BTreeSet<u64> = self.stamps[..m]
                .iter()
                .copied()
                .filter(|&t| ivl.mem_r(last - t))
                .collect();
            set.into_iter().rev().collect()
        };
        self.ensure(got == want, f, || format!("aux stamps {got:?}, expected {want:?}"))
    }

    fn walk(&self, n: usize, f: &'a Formula, mf: &MFormula) -> Res {
        use Formula as F;
        use MFormula as M;
        match (f, mf) {
            (F::Pred(..), M::MPred(..)) => Ok(()),
            (F::Eq(..), M::MRel(_)) => Ok(()),
            (F::Neg(g), M::MRel(_)) if matches!(**g, F::Eq(..)) => Ok(()),
            (F::Neg(g), M::MNeg(sub)) => self.walk(n, g, sub),
            (F::Exists(g), M::MExists(sub)) => self.walk(n + 1, g, sub),
            (F::And(l, r), M::MAnd { left, op, buf }) => {
                self.walk(n, l, left)?;
                match (op, &**r) {
                    (AndOp::Join(right), _) => {
                        self.walk(n, r, right)?;
                        self.check_buf2(f, n, l, r, buf)
                    }
                    (AndOp::Antijoin(right), F::Neg(r1)) => {
                        self.walk(n, r1, right)?;
                        self.check_buf2(f, n, l, r1, buf)
                    }
                    (AndOp::Assign(..) | AndOp::Constraint { .. }, _) => {
                        self.ensure(buf.is_empty(), f, || "unary conjunction buffers tables".into())
                    }
                    _ => Err(self.fail(f, "antijoin without a negated right conjunct")),
                }
            }
            (F::Or(l, r), M::MOr(left, right, buf)) => {
                self.walk(n, l, left)?;
                self.walk(n, r, right)?;
                self.check_buf2(f, n, l, r, buf)
            }
            (F::Prev(_, g), M::MPrev { sub, first, buf, nts, .. }) => {
                self.walk(n, g, sub)?;
                let j = self.j();
                self.ensure(*first == (j == 0), f, || format!("first = {first}"))?;
                let from = self.prog(g).min(j.saturating_sub(1));
                self.check_tables(f, n, from, g, buf, "shift")?;
                self.check_nts(f, from, nts)
            }
            (F::Next(_, g), M::MNext { sub, first, nts, .. }) => {
                self.walk(n, g, sub)?;
                let p = self.prog(g);
                self.ensure(*first == (p == 0), f, || format!("first = {first}, sub progress {p}"))?;
                self.check_nts(f, p.saturating_sub(1), nts)
            }
            (
                F::Since(l, ivl, r),
                M::MSince {
                    pos,
                    left,
                    right,
                    buf,
                    nts,
                    aux,
                    ..
                },
            ) => {
                let l1 = self.left_child(f, *pos, l)?;
                self.walk(n, l1, left)?;
                self.walk(n, r, right)?;
                self.check_buf2(f, n, l1, r, buf)?;
                let m = self.prog(l1).min(self.prog(r));
                self.check_nts(f, m, nts)?;
                self.check_past_aux(f, ivl, m, aux.iter().map(|(t, _)| t))?;
                let y = fv(r);
                for (t, tbl) in aux {
                    let q = |v: &Tuple| {
                        (0..m).any(|k| {
                            self.stamps[k] == *t
                                && self.holds(v, k, r)
                                && (k + 1..m).all(|l2| self.holds(v, l2, l))
                        })
                    };
                    self.ensure(self.is_qtable(n, &y, q, tbl), f, || {
                        format!("since entry for stamp {t} is wrong: {tbl:?}")
                    })?;
                }
                Ok(())
            }
            (
                F::Until(l, ivl, r),
                M::MUntil {
                    pos,
                    left,
                    right,
                    buf,
                    nts,
                    aux,
                    ..
                },
            ) => {
                let l1 = self.left_child(f, *pos, l)?;
                self.walk(n, l1, left)?;
                self.walk(n, r, right)?;
                self.check_buf2(f, n, l1, r, buf)?;
                let m = self.prog(l1).min(self.prog(r));
                self.check_nts(f, m, nts)?;
                let p = self.prog(f);
                self.ensure(p + aux.len() == m, f, || {
                    format!("{} until entries, expected [{p}, {m})", aux.len())
                })?;
                let y = fv(r);
                for (e, (t, a1, a2)) in (p..m).zip(aux) {
                    self.ensure(*t == self.stamps[e], f, || format!("entry {e} has stamp {t}"))?;
                    let a1_ok = if *pos {
                        let x: VarSet = (e..m).flat_map(|k| self.oracle.dfv_unchecked(k, l)).collect();
                        self.is_qtable(n, &x, |v| (e..m).all(|k| self.holds(v, k, l)), a1)
                    } else {
                        self.is_qtable(n, &fv(l1), |v| (e..m).any(|k| self.holds(v, k, l1)), a1)
                    };
                    self.ensure(a1_ok, f, || format!("left table of entry {e} is wrong: {a1:?}"))?;
                    let q = |v: &Tuple| {
                        (e..m).any(|k| {
                            ivl.mem(self.stamps[k] - self.stamps[e])
                                && self.holds(v, k, r)
                                && (e..k).all(|l2| self.holds(v, l2, l))
                        })
                    };
                    self.ensure(self.is_qtable(n, &y, q, a2), f, || {
                        format!("result table of entry {e} is wrong: {a2:?}")
                    })?;
                }
                Ok(())
            }
            (
                F::Trigger(l, ivl, r),
                M::MTrigger {
                    pos,
                    left,
                    mem0,
                    right,
                    buf,
                    nts,
                    aux,
                    ..
                },
            ) => {
                let l1 = if *mem0 { self.left_child(f, *pos, l)? } else { &**l };
                self.walk(n, l1, left)?;
                self.walk(n, r, right)?;
                self.check_buf2(f, n, l1, r, buf)?;
                let m = self.prog(l1).min(self.prog(r));
                self.check_nts(f, m, nts)?;
                self.check_past_aux(f, ivl, m, aux.iter().map(|(t, _)| t))?;
                let y = fv(r);
                let c = |v: &Tuple, k: usize| {
                    if *mem0 {
                        self.holds(v, k, r) && self.holds(v, k, l)
                    } else {
                        self.holds(v, k, l)
                    }
                };
                for (t, tbl) in aux {
                    let q = |v: &Tuple| {
                        (0..m)
                            .filter(|&k| self.stamps[k] == *t)
                            .all(|k| self.holds(v, k, r) || (k + 1..m).any(|l2| c(v, l2)))
                    };
                    self.ensure(self.is_qtable(n, &y, q, tbl), f, || {
                        format!("trigger entry for stamp {t} is wrong: {tbl:?}")
                    })?;
                }
                Ok(())
            }
            (
                F::Release(l, ivl, r),
                M::MRelease {
                    pos,
                    left,
                    mem0,
                    right,
                    buf,
                    nts,
                    aux,
                    ..
                },
            ) => {
                let l1 = if *mem0 { self.left_child(f, *pos, l)? } else { &**l };
                self.walk(n, l1, left)?;
                self.walk(n, r, right)?;
                self.check_buf2(f, n, l1, r, buf)?;
                let m = self.prog(l1).min(self.prog(r));
                self.check_nts(f, m, nts)?;
                let p = self.prog(f);
                self.ensure(p + aux.len() == m, f, || {
                    format!("{} release entries, expected [{p}, {m})", aux.len())
                })?;
                let y = fv(r);
                let c = |v: &Tuple, k: usize| {
                    if *mem0 {
                        self.holds(v, k, r) && self.holds(v, k, l)
                    } else {
                        self.holds(v, k, l)
                    }
                };
                for (e, (t, tl, tr)) in (p..m).zip(aux) {
                    let te = self.stamps[e];
                    self.ensure(*t == te, f, || format!("entry {e} has stamp {t}"))?;
                    let ql = |v: &Tuple| (e..m).any(|k| c(v, k));
                    self.ensure(self.is_qtable(n, &y, ql, tl), f, || {
                        format!("left table of entry {e} is wrong: {tl:?}")
                    })?;
                    let qr = |v: &Tuple| {
                        (e..m).all(|k| {
                            !ivl.mem(self.stamps[k] - te) || self.holds(v, k, r) || (e..k).any(|l2| c(v, l2))
                        })
                    };
                    let gap = self.stamps[m - 1] - te;
                    let r_ok = if *mem0 || ivl.mem_r(gap) && ivl.mem_l(gap) {
                        self.is_qtable(n, &y, qr, tr)
                    } else if !ivl.mem_l(gap) {
                        *tr == unit_table(n)
                    } else {
                        let empty = (e..m).all(|k| !ivl.mem(self.stamps[k] - te));
                        let x = if empty { VarSet::new() } else { y.clone() };
                        self.is_qtable(n, &x, qr, tr)
                    };
                    self.ensure(r_ok, f, || format!("result table of entry {e} is wrong: {tr:?}"))?;
                }
                Ok(())
            }
            _ => Err(self.fail(f, format!("state shape does not match: {mf:?}"))),
        }
    }

    /// The formula monitored as the left operand: `α` itself, or `α'` when
    /// the operand is `¬α'` evaluated by antijoin.
    fn left_child(&self, f: &Formula, pos: bool, l: &'a Formula) -> Result<&'a Formula, InvariantViolation> {
        match (pos, l) {
            (true, _) => Ok(l),
            (false, Formula::Neg(l1)) => Ok(l1),
            _ => Err(self.fail(f, "negative left operand without a negation")),
        }
    }
}

/// Checks every invariant of `st`, the state reached by monitoring `f` on
/// the first `j` time-points of the oracle's trace.
pub fn check_state<'a>(oracle: &Oracle<'a>, f: &'a Formula, st: &MonitorState, j: usize) -> Res {
    let ctx = Ctx {
        oracle,
        stamps: oracle.trace().stamps()[..j].to_vec(),
        cells: oracle.cell_values(),
    };
    let p = ctx.prog(f);
    ctx.ensure(st.next_output == p, f, || {
        format!("next output {}, expected progress {p}", st.next_output)
    })?;
    ctx.walk(st.n, f, &st.mf)
}
