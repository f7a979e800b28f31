//! Safety of formulas.
//!
//! `ssfv` computes the family of attribute sets that the tables of a formula
//! may take over time; a formula is safe iff the family is non-empty.
//! `safe_formula` is the older, stricter syntactic predicate, kept to compare
//! the two fragments.

use std::collections::BTreeSet;

use crate::formula::{fv, fv_trm, Formula, Term};

pub type VarSet = BTreeSet<usize>;
pub type VarSetFamily = BTreeSet<VarSet>;

/// `{a ∪ b | a ∈ a_fam, b ∈ b_fam}`
pub fn pairwise_union(a_fam: &VarSetFamily, b_fam: &VarSetFamily) -> VarSetFamily {
    a_fam
        .iter()
        .flat_map(|a| b_fam.iter().map(move |b| a.union(b).copied().collect()))
        .collect()
}

pub fn is_constraint(f: &Formula) -> bool {
    match f {
        Formula::Eq(..) => true,
        Formula::Neg(g) => matches!(**g, Formula::Eq(..)),
        _ => false,
    }
}

/// Whether `f` is an equality that binds exactly one variable outside `x`
/// in terms of variables inside `x`.
pub fn safe_assignment(x: &VarSet, f: &Formula) -> bool {
    match f {
        Formula::Eq(Term::Var(a), Term::Var(b)) => x.contains(a) != x.contains(b),
        Formula::Eq(Term::Var(a), t) | Formula::Eq(t, Term::Var(a)) => {
            !x.contains(a) && fv_trm(t).is_subset(x)
        }
        _ => false,
    }
}

fn family(sets: impl IntoIterator<Item = VarSet>) -> VarSetFamily {
    sets.into_iter().collect()
}

/// Safe sets of free variables.
pub fn ssfv(f: &Formula) -> VarSetFamily {
    match f {
        Formula::Pred(..) => family([fv(f)]),
        Formula::Eq(Term::Var(x), t) | Formula::Eq(t, Term::Var(x)) => {
            if fv_trm(t).is_empty() {
                family([VarSet::from([*x])])
            } else {
                VarSetFamily::new()
            }
        }
        Formula::Eq(..) => family([VarSet::new()]),
        Formula::Neg(g) => match &**g {
            Formula::Eq(t1, t2) => {
                let x = fv(g);
                if t1 == t2 || x.is_empty() {
                    family([x])
                } else {
                    VarSetFamily::new()
                }
            }
            _ => {
                if ssfv(g) == family([VarSet::new()]) {
                    family([VarSet::new()])
                } else {
                    VarSetFamily::new()
                }
            }
        },
        Formula::And(a, b) => ssfv_and(a, b),
        Formula::Or(a, b) => {
            let (fa, fb) = (ssfv(a), ssfv(b));
            let (x, y) = (fv(a), fv(b));
            if fa.is_empty() || fb.is_empty() {
                return VarSetFamily::new();
            }
            let within = |fam: &VarSetFamily, top: &VarSet| {
                fam.iter().all(|s| s.is_empty() || s == top)
            };
            if x == y && within(&fa, &x) && within(&fb, &y) {
                let mut out = pairwise_union(&fa, &fb);
                if fa.contains(&VarSet::new()) || fb.contains(&VarSet::new()) {
                    out.insert(VarSet::new());
                }
                out
            } else if x.is_empty() || y.is_empty() {
                fa.union(&fb).cloned().collect()
            } else {
                VarSetFamily::new()
            }
        }
        Formula::Exists(g) => ssfv(g)
            .into_iter()
            .map(|s| s.into_iter().filter(|&v| v != 0).map(|v| v - 1).collect())
            .collect(),
        Formula::Prev(_, g) | Formula::Next(_, g) => ssfv(g),
        Formula::Since(a, _, b) => ssfv_since_like(a, b, false),
        Formula::Until(a, _, b) => ssfv_since_like(a, b, true),
        Formula::Trigger(a, i, b) | Formula::Release(a, i, b) => {
            if i.contains_zero() {
                ssfv_since_like(a, b, false)
            } else {
                let (x, y) = (fv(a), fv(b));
                if x == y && ssfv(a) == family([x.clone()]) && ssfv(b) == family([y]) {
                    family([VarSet::new(), x])
                } else {
                    VarSetFamily::new()
                }
            }
        }
    }
}

fn ssfv_and(a: &Formula, b: &Formula) -> VarSetFamily {
    let fa = ssfv(a);
    if fa.is_empty() {
        return VarSetFamily::new();
    }
    let fb = ssfv(b);
    if !fb.is_empty() {
        return pairwise_union(&fa, &fb);
    }
    if fa.iter().all(|x| safe_assignment(x, b)) {
        let y = fv(b);
        return fa.iter().map(|x| x.union(&y).copied().collect()).collect();
    }
    let y = fv(b);
    if is_constraint(b) && fa.iter().all(|x| y.is_subset(x)) {
        return fa;
    }
    if let Formula::Neg(b1) = b {
        let fb1 = ssfv(b1);
        if !fb1.is_empty() && fb1.iter().all(|s| fa.iter().all(|x| s.is_subset(x))) {
            return fa;
        }
    }
    VarSetFamily::new()
}

/// Since and Until share their shape; `strict_neg` selects the stronger
/// condition required for a negated left operand of Until.
fn ssfv_since_like(a: &Formula, b: &Formula, strict_neg: bool) -> VarSetFamily {
    let (x, y) = (fv(a), fv(b));
    if ssfv(b) != family([y.clone()]) {
        return VarSetFamily::new();
    }
    if !ssfv(a).is_empty() && x.is_subset(&y) {
        return family([y]);
    }
    match a {
        Formula::Neg(a1) => {
            let fa1 = ssfv(a1);
            let ok = if strict_neg {
                x.is_subset(&y) && fa1 == family([x.clone()])
            } else {
                !fa1.is_empty() && x.is_subset(&y)
            };
            if ok {
                family([y])
            } else {
                VarSetFamily::new()
            }
        }
        _ => VarSetFamily::new(),
    }
}

pub fn issafe(f: &Formula) -> bool {
    !ssfv(f).is_empty()
}

/// Safety of a left operand that may be a negated safe formula.
fn safe_or_negated_safe(a: &Formula) -> bool {
    safe_formula(a) || matches!(a, Formula::Neg(a1) if safe_formula(a1))
}

pub fn safe_dual(conjoined: bool, a: &Formula, i: &crate::formula::Interval, b: &Formula) -> bool {
    if i.contains_zero() {
        safe_formula(b) && fv(a).is_subset(&fv(b)) && safe_or_negated_safe(a)
    } else {
        conjoined && safe_formula(a) && safe_formula(b) && fv(a) == fv(b)
    }
}

/// The baseline syntactic safety predicate.
pub fn safe_formula(f: &Formula) -> bool {
    match f {
        Formula::Eq(t1, t2) => (t1.is_const() && (t2.is_const() || t2.is_var())) || (t1.is_var() && t2.is_const()),
        Formula::Neg(g) => match &**g {
            Formula::Eq(Term::Var(x), Term::Var(y)) => x == y,
            _ => fv(g).is_empty() && safe_formula(g),
        },
        Formula::Pred(..) => true,
        Formula::Or(a, b) => fv(b) == fv(a) && safe_formula(a) && safe_formula(b),
        Formula::And(a, b) => {
            safe_formula(a)
                && (safe_assignment(&fv(a), b)
                    || safe_formula(b)
                    || (fv(b).is_subset(&fv(a))
                        && (is_constraint(b)
                            || match &**b {
                                Formula::Neg(b1) => safe_formula(b1),
                                Formula::Trigger(a1, i, b1) | Formula::Release(a1, i, b1) => {
                                    safe_dual(true, a1, i, b1)
                                }
                                _ => false,
                            })))
        }
        Formula::Exists(g) | Formula::Prev(_, g) | Formula::Next(_, g) => safe_formula(g),
        Formula::Since(a, _, b) | Formula::Until(a, _, b) => {
            safe_formula(b) && fv(a).is_subset(&fv(b)) && safe_or_negated_safe(a)
        }
        Formula::Trigger(a, i, b) | Formula::Release(a, i, b) => safe_dual(false, a, i, b),
    }
}
