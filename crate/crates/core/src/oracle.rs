//! Brute-force reference semantics over finite trace prefixes.
//!
//! Quantifiers range over the active domain of the prefix, the constants of
//! the formula, the values already bound, and enough fresh values. With an
//! equality-only signature this covers every equality type a valuation can
//! have, so the finite search is exact.
//!
//! Results are memoised per (subformula, time-point, relevant valuation).
//! The memo is keyed by subformula address, which is why every formula handed
//! to an [`Oracle`] must outlive it.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::formula::{constants, future_bounded, fv, nfv, Formula, Interval, Term, Value};
use crate::monitor::progress;
use crate::safety::{issafe, VarSet};
use crate::table::{Table, Tuple};
use crate::trace::{TraceError, TracePrefix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("time-point {i} is not determined by the prefix (progress {progress})")]
    UndeterminedTimePoint { i: usize, progress: usize },
    #[error("formula is not safe")]
    UnsafeFormula,
    #[error("formula has an unbounded future operator")]
    UnboundedFuture,
    #[error("variable {index} is outside a valuation of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("table width {n} is smaller than the formula's {nfv} free variable slots")]
    WidthTooSmall { n: usize, nfv: usize },
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// A total valuation: `v[x]` is the value of variable `x`.
pub type Valuation = Vec<Value>;

pub fn eval_trm(v: &[Value], t: &Term) -> Result<Value, OracleError> {
    match t {
        Term::Const(c) => Ok(c.clone()),
        Term::Var(x) => v.get(*x).cloned().ok_or(OracleError::IndexOutOfRange {
            index: *x,
            len: v.len(),
        }),
    }
}

/// `{j ≤ i | τ_i - τ_j ∈ I}`
pub fn down_cl_ivl(p: &TracePrefix, ivl: &Interval, i: usize) -> Result<BTreeSet<usize>, OracleError> {
    let ti = p.tau(i)?;
    Ok((0..=i).filter(|&j| ivl.mem(ti - p.stamps()[j])).collect())
}

/// `{j ≥ i | τ_j - τ_i ∈ I}`, restricted to the prefix.
pub fn up_cl_ivl(p: &TracePrefix, ivl: &Interval, i: usize) -> Result<BTreeSet<usize>, OracleError> {
    let ti = p.tau(i)?;
    let stamps = p.stamps();
    Ok((i..p.len()).filter(|&j| ivl.mem(stamps[j] - ti)).collect())
}

fn fresh_values(avoid: &BTreeSet<Value>, count: usize) -> Vec<Value> {
    (0..)
        .map(|k| Value::Str(format!("\u{0}fresh{k}")))
        .filter(|c| !avoid.contains(c))
        .take(count)
        .collect()
}

type SatKey = (usize, usize, Vec<Value>);

pub struct Oracle<'a> {
    trace: &'a TracePrefix,
    stamps: Vec<u64>,
    dom: BTreeSet<Value>,
    extra_fresh: usize,
    sat_memo: RefCell<HashMap<SatKey, bool>>,
    dfv_memo: RefCell<HashMap<(usize, usize), VarSet>>,
    fv_memo: RefCell<HashMap<usize, VarSet>>,
}

fn key(f: &Formula) -> usize {
    f as *const Formula as usize
}

impl<'a> Oracle<'a> {
    /// An oracle whose base domain is the active domain of `trace` together
    /// with the constants of `f`. Only `f` and its subformulas may be queried.
    pub fn new(trace: &'a TracePrefix, f: &Formula) -> Self {
        let mut dom = trace.active_domain();
        dom.extend(constants(f));
        Self::with_domain(trace, dom)
    }

    /// An oracle over an explicit base domain, which must contain the active
    /// domain of the trace and every constant of the queried formulas.
    pub fn with_domain(trace: &'a TracePrefix, dom: BTreeSet<Value>) -> Self {
        Oracle {
            trace,
            stamps: trace.stamps(),
            dom,
            extra_fresh: 0,
            sat_memo: RefCell::default(),
            dfv_memo: RefCell::default(),
            fv_memo: RefCell::default(),
        }
    }

    /// Offers `extra` additional fresh values to every quantifier. Used to
    /// check that a single fresh value is enough.
    pub fn with_extra_fresh(mut self, extra: usize) -> Self {
        self.extra_fresh = extra;
        self
    }

    pub fn trace(&self) -> &TracePrefix {
        self.trace
    }

    pub fn domain(&self) -> &BTreeSet<Value> {
        &self.dom
    }

    fn fv_of(&self, f: &Formula) -> VarSet {
        self.fv_memo
            .borrow_mut()
            .entry(key(f))
            .or_insert_with(|| fv(f))
            .clone()
    }

    fn check(&self, i: usize, f: &Formula) -> Result<(), OracleError> {
        if !future_bounded(f) {
            return Err(OracleError::UnboundedFuture);
        }
        let progress = progress(self.trace, f);
        if i >= progress {
            return Err(OracleError::UndeterminedTimePoint { i, progress });
        }
        Ok(())
    }

    /// Satisfaction at a time-point the prefix determines.
    pub fn sat(&self, v: &[Value], i: usize, f: &'a Formula) -> Result<bool, OracleError> {
        self.check(i, f)?;
        if let Some(&x) = self.fv_of(f).iter().find(|&&x| x >= v.len()) {
            return Err(OracleError::IndexOutOfRange {
                index: x,
                len: v.len(),
            });
        }
        Ok(self.holds(v, i, f))
    }

    /// Satisfaction without the determinacy check. Future operators only look
    /// inside the prefix, so the answer is meaningful only where the prefix
    /// determines it. `v` must cover the free variables of `f`.
    pub fn holds(&self, v: &[Value], i: usize, f: &'a Formula) -> bool {
        let n = self.fv_of(f).last().map_or(0, |x| x + 1);
        let k = (key(f), i, v[..n].to_vec());
        if let Some(&b) = self.sat_memo.borrow().get(&k) {
            return b;
        }
        let b = self.holds_raw(v, i, f);
        self.sat_memo.borrow_mut().insert(k, b);
        b
    }

    fn term(v: &[Value], t: &Term) -> Value {
        match t {
            Term::Const(c) => c.clone(),
            Term::Var(x) => v[*x].clone(),
        }
    }

    fn holds_raw(&self, v: &[Value], i: usize, f: &'a Formula) -> bool {
        let len = self.trace.len();
        let tau = |j: usize| self.stamps[j];
        match f {
            Formula::Pred(name, ts) => {
                let args: Vec<Value> = ts.iter().map(|t| Self::term(v, t)).collect();
                self.trace.entries()[i]
                    .0
                    .iter()
                    .any(|e| e.name == *name && e.args == args)
            }
            Formula::Eq(t1, t2) => Self::term(v, t1) == Self::term(v, t2),
            Formula::Neg(a) => !self.holds(v, i, a),
            Formula::And(a, b) => self.holds(v, i, a) && self.holds(v, i, b),
            Formula::Or(a, b) => self.holds(v, i, a) || self.holds(v, i, b),
            Formula::Exists(a) => {
                let n = self.fv_of(a).last().map_or(0, |x| x + 1);
                let bound: &[Value] = &v[..n.saturating_sub(1).min(v.len())];
                let mut cands = self.dom.clone();
                cands.extend(bound.iter().cloned());
                let fresh = fresh_values(&cands, 1 + self.extra_fresh);
                let mut w = Vec::with_capacity(v.len() + 1);
                w.push(Value::Int(0));
                w.extend_from_slice(v);
                cands.into_iter().chain(fresh).any(|c| {
                    w[0] = c;
                    self.holds(&w, i, a)
                })
            }
            Formula::Prev(ivl, a) => i > 0 && ivl.mem(tau(i) - tau(i - 1)) && self.holds(v, i - 1, a),
            Formula::Next(ivl, a) => {
                i + 1 < len && ivl.mem(tau(i + 1) - tau(i)) && self.holds(v, i + 1, a)
            }
            Formula::Since(a, ivl, b) => {
                // Walk j downwards while α holds on (j, i].
                for j in (0..=i).rev() {
                    if ivl.mem(tau(i) - tau(j)) && self.holds(v, j, b) {
                        return true;
                    }
                    if !ivl.mem_r(tau(i) - tau(j)) || !self.holds(v, j, a) {
                        return false;
                    }
                }
                false
            }
            Formula::Until(a, ivl, b) => {
                for j in i..len {
                    if !ivl.mem_r(tau(j) - tau(i)) {
                        return false;
                    }
                    if ivl.mem(tau(j) - tau(i)) && self.holds(v, j, b) {
                        return true;
                    }
                    if !self.holds(v, j, a) {
                        return false;
                    }
                }
                false
            }
            Formula::Trigger(a, ivl, b) => {
                // ∀j ≤ i in the window: β_j or α somewhere in (j, i].
                let mut alpha_seen = false;
                for j in (0..=i).rev() {
                    if ivl.mem(tau(i) - tau(j)) && !alpha_seen && !self.holds(v, j, b) {
                        return false;
                    }
                    alpha_seen = alpha_seen || self.holds(v, j, a);
                }
                true
            }
            Formula::Release(a, ivl, b) => {
                let mut alpha_seen = false;
                for j in i..len {
                    if !ivl.mem_r(tau(j) - tau(i)) {
                        break;
                    }
                    if ivl.mem(tau(j) - tau(i)) && !alpha_seen && !self.holds(v, j, b) {
                        return false;
                    }
                    alpha_seen = alpha_seen || self.holds(v, j, a);
                }
                true
            }
        }
    }

    /// All valuations of length `nfv(f)` whose free-variable cells range over
    /// the domain plus `|fv f|` fresh values. Other cells are filled with a
    /// fresh value; they never influence satisfaction.
    pub fn valuations(&self, f: &Formula) -> Vec<Valuation> {
        let vars = self.fv_of(f);
        let n = vars.last().map_or(0, |x| x + 1);
        let fresh = fresh_values(&self.dom, vars.len().max(1));
        let cands: Vec<Value> = self.dom.iter().cloned().chain(fresh.iter().cloned()).collect();
        let mut out = vec![vec![fresh[0].clone(); n]];
        for &x in &vars {
            out = out
                .into_iter()
                .flat_map(|v| {
                    cands.iter().map(move |c| {
                        let mut w = v.clone();
                        w[x] = c.clone();
                        w
                    })
                })
                .collect();
        }
        out
    }

    /// Dynamic free variables at a determined time-point.
    pub fn dfv(&self, i: usize, f: &'a Formula) -> Result<VarSet, OracleError> {
        self.check(i, f)?;
        Ok(self.dfv_unchecked(i, f))
    }

    /// Dynamic free variables without the determinacy check.
    pub fn dfv_unchecked(&self, i: usize, f: &'a Formula) -> VarSet {
        let k = (key(f), i);
        if let Some(s) = self.dfv_memo.borrow().get(&k) {
            return s.clone();
        }
        let s = self.dfv_raw(i, f);
        self.dfv_memo.borrow_mut().insert(k, s.clone());
        s
    }

    fn unsatisfiable(&self, i: usize, f: &'a Formula) -> bool {
        self.valuations(f).iter().all(|v| !self.holds(v, i, f))
    }

    fn dfv_raw(&self, i: usize, f: &'a Formula) -> VarSet {
        let len = self.trace.len();
        let tau = |j: usize| self.stamps[j];
        match f {
            Formula::Pred(..) | Formula::Eq(..) => self.fv_of(f),
            Formula::Neg(a) => self.dfv_unchecked(i, a),
            Formula::And(a, b) => {
                let mut s = self.dfv_unchecked(i, a);
                s.extend(self.dfv_unchecked(i, b));
                s
            }
            Formula::Or(a, b) => {
                let da = self.dfv_unchecked(i, a);
                let db = self.dfv_unchecked(i, b);
                if da.is_empty() {
                    if self.unsatisfiable(i, a) {
                        db
                    } else {
                        VarSet::new()
                    }
                } else if db.is_empty() {
                    if self.unsatisfiable(i, b) {
                        da
                    } else {
                        VarSet::new()
                    }
                } else {
                    da.union(&db).copied().collect()
                }
            }
            Formula::Exists(a) => self
                .dfv_unchecked(i, a)
                .into_iter()
                .filter(|&x| x != 0)
                .map(|x| x - 1)
                .collect(),
            Formula::Prev(_, a) => {
                if i == 0 {
                    self.fv_of(a)
                } else {
                    self.dfv_unchecked(i - 1, a)
                }
            }
            Formula::Next(_, a) => {
                if i + 1 < len {
                    self.dfv_unchecked(i + 1, a)
                } else {
                    self.fv_of(a)
                }
            }
            Formula::Since(a, ivl, b) | Formula::Until(a, ivl, b) => {
                let past = matches!(f, Formula::Since(..));
                let window: Vec<usize> = if past {
                    (0..=i).filter(|&j| ivl.mem(tau(i) - tau(j))).collect()
                } else {
                    (i..len).filter(|&j| ivl.mem(tau(j) - tau(i))).collect()
                };
                let span = |j: usize| if past { (j + 1)..(i + 1) } else { i..j };
                let vals = self.valuations(f);
                let satisf_at = |j: usize| {
                    vals.iter()
                        .any(|v| self.holds(v, j, b) && span(j).all(|k| self.holds(v, k, a)))
                };
                let js: Vec<usize> = window.into_iter().filter(|&j| satisf_at(j)).collect();
                if js.is_empty() {
                    return self.fv_of(f);
                }
                let ks: BTreeSet<usize> = js.iter().flat_map(|&j| span(j)).collect();
                self.collect_dfv(a, &ks, b, &js)
            }
            Formula::Trigger(a, ivl, b) | Formula::Release(a, ivl, b) => {
                let past = matches!(f, Formula::Trigger(..));
                let window: Vec<usize> = if past {
                    (0..=i).filter(|&j| ivl.mem(tau(i) - tau(j))).collect()
                } else {
                    (i..len).filter(|&j| ivl.mem(tau(j) - tau(i))).collect()
                };
                if window.is_empty() {
                    return VarSet::new();
                }
                let span = |j: usize| if past { (j + 1)..(i + 1) } else { i..j };
                let vals = self.valuations(f);
                let satisf_at =
                    |v: &Valuation, j: usize| self.holds(v, j, b) || span(j).any(|k| self.holds(v, k, a));
                if vals.iter().all(|v| window.iter().any(|&j| !satisf_at(v, j))) {
                    return self.fv_of(f);
                }
                let js: Vec<usize> = window
                    .iter()
                    .copied()
                    .filter(|&j| vals.iter().any(|v| self.holds(v, j, b)))
                    .collect();
                let ks: BTreeSet<usize> = window
                    .iter()
                    .flat_map(|&j| span(j))
                    .filter(|&k| vals.iter().any(|v| self.holds(v, k, a)))
                    .collect();
                self.collect_dfv(a, &ks, b, &js)
            }
        }
    }

    fn collect_dfv(&self, a: &'a Formula, ks: &BTreeSet<usize>, b: &'a Formula, js: &[usize]) -> VarSet {
        let mut s = VarSet::new();
        for &k in ks {
            s.extend(self.dfv_unchecked(k, a));
        }
        for &j in js {
            s.extend(self.dfv_unchecked(j, b));
        }
        s
    }

    /// Candidate values for table cells: the domain plus one fresh value.
    pub fn cell_values(&self) -> Vec<Value> {
        self.dom
            .iter()
            .cloned()
            .chain(fresh_values(&self.dom, 1))
            .collect()
    }

    /// Completes a tuple to a total valuation, filling `None` cells with a
    /// value outside the domain.
    pub fn complete(&self, v: &[Option<Value>]) -> Valuation {
        let filler = fresh_values(&self.dom, 1).remove(0);
        v.iter()
            .map(|c| c.clone().unwrap_or_else(|| filler.clone()))
            .collect()
    }

    /// `{v | ⟨σ, v, i⟩ ⊨ f ∧ wf_tuple n x v}` enumerated over [`Self::cell_values`].
    pub fn table_with_attrs(&self, i: usize, n: usize, x: &VarSet, f: &'a Formula) -> Table {
        crate::table::wf_tuples(n, x, &self.cell_values())
            .into_iter()
            .filter(|v| self.holds(&self.complete(v), i, f))
            .collect()
    }

    /// The satisfaction table with attributes `dfv_i f`, without checks.
    pub fn table_at(&self, i: usize, n: usize, f: &'a Formula) -> Table {
        let x = self.dfv_unchecked(i, f);
        self.table_with_attrs(i, n, &x, f)
    }

    /// The satisfaction table of a safe formula at a determined time-point.
    pub fn sats_table(&self, i: usize, n: usize, f: &'a Formula) -> Result<Table, OracleError> {
        if !issafe(f) {
            return Err(OracleError::UnsafeFormula);
        }
        if n < nfv(f) {
            return Err(OracleError::WidthTooSmall { n, nfv: nfv(f) });
        }
        self.check(i, f)?;
        Ok(self.table_at(i, n, f))
    }

    /// Whether a tuple's completion satisfies `f` at `i`.
    pub fn tuple_holds(&self, v: &Tuple, i: usize, f: &'a Formula) -> bool {
        self.holds(&self.complete(v), i, f)
    }
}
