//! Finite relations over positional tuples of optional values.
//!
//! A tuple of width `n` carries `Some` exactly at its attribute positions.
//! Tables are plain sets of tuples; all relational operators are nested-loop.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::formula::Value;

pub type Tuple = Vec<Option<Value>>;
pub type Table = BTreeSet<Tuple>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("tuple width mismatch: {left} vs {right}")]
pub struct LengthMismatch {
    pub left: usize,
    pub right: usize,
}

/// `length v = n` and `v[i]` is `Some` iff `i ∈ x`.
pub fn wf_tuple(n: usize, x: &BTreeSet<usize>, v: &[Option<Value>]) -> bool {
    v.len() == n && v.iter().enumerate().all(|(i, c)| c.is_some() == x.contains(&i))
}

/// Every row satisfies `wf_tuple n x`.
pub fn vtable(n: usize, x: &BTreeSet<usize>, r: &Table) -> bool {
    r.iter().all(|v| wf_tuple(n, x, v))
}

pub fn unit_tuple(n: usize) -> Tuple {
    vec![None; n]
}

pub fn unit_table(n: usize) -> Table {
    BTreeSet::from([unit_tuple(n)])
}

/// Attribute positions of a tuple.
pub fn attributes(v: &[Option<Value>]) -> BTreeSet<usize> {
    v.iter()
        .enumerate()
        .filter_map(|(i, c)| c.as_ref().map(|_| i))
        .collect()
}

/// Merges two tuples, or `None` if they disagree on a shared attribute.
pub fn join1(u: &[Option<Value>], v: &[Option<Value>]) -> Result<Option<Tuple>, LengthMismatch> {
    if u.len() != v.len() {
        return Err(LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let mut out = Vec::with_capacity(u.len());
    for (a, b) in u.iter().zip(v) {
        match (a, b) {
            (Some(x), Some(y)) if x != y => return Ok(None),
            (Some(x), _) | (None, Some(x)) => out.push(Some(x.clone())),
            (None, None) => out.push(None),
        }
    }
    Ok(Some(out))
}

pub fn join(r1: &Table, r2: &Table) -> Result<Table, LengthMismatch> {
    let mut out = Table::new();
    for u in r1 {
        for v in r2 {
            if let Some(w) = join1(u, v)? {
                out.insert(w);
            }
        }
    }
    Ok(out)
}

/// Rows of `r1` that join with no row of `r2`. When the attributes of `r2`
/// are contained in those of `r1` this is the usual antijoin.
pub fn antijoin(r1: &Table, r2: &Table) -> Result<Table, LengthMismatch> {
    let mut out = Table::new();
    for u in r1 {
        let mut matched = false;
        for v in r2 {
            if join1(u, v)?.is_some() {
                matched = true;
                break;
            }
        }
        if !matched {
            out.insert(u.clone());
        }
    }
    Ok(out)
}

fn check_width(n: usize, r: &Table) -> Result<(), LengthMismatch> {
    match r.iter().find(|v| v.len() != n) {
        Some(v) => Err(LengthMismatch {
            left: n,
            right: v.len(),
        }),
        None => Ok(()),
    }
}

/// Disjunction of two tables: the unit table absorbs everything, otherwise
/// the plain union.
pub fn eval_or(n: usize, r1: &Table, r2: &Table) -> Result<Table, LengthMismatch> {
    check_width(n, r1)?;
    check_width(n, r2)?;
    let unit = unit_table(n);
    if *r1 == unit || *r2 == unit {
        Ok(unit)
    } else {
        Ok(r1.union(r2).cloned().collect())
    }
}

/// Join of all tables, starting from the unit table.
pub fn big_join<'a>(
    rs: impl IntoIterator<Item = &'a Table>,
    n: usize,
) -> Result<Table, LengthMismatch> {
    let mut acc = unit_table(n);
    for r in rs {
        acc = join(&acc, r)?;
    }
    Ok(acc)
}

/// Keeps the cells at positions in `x` and clears the rest.
pub fn project(x: &BTreeSet<usize>, v: &[Option<Value>]) -> Tuple {
    v.iter()
        .enumerate()
        .map(|(i, c)| if x.contains(&i) { c.clone() } else { None })
        .collect()
}

/// All tuples of width `n` with attributes exactly `x` over `dom`.
pub fn wf_tuples(n: usize, x: &BTreeSet<usize>, dom: &[Value]) -> Vec<Tuple> {
    let mut out = vec![unit_tuple(n)];
    for &i in x.iter().filter(|&&i| i < n) {
        out = out
            .into_iter()
            .flat_map(|v| {
                dom.iter().map(move |a| {
                    let mut w = v.clone();
                    w[i] = Some(a.clone());
                    w
                })
            })
            .collect();
    }
    out
}

/// `vtable n x r` and, for every candidate `v` with `p v`, `v ∈ r` iff
/// `q v ∧ wf_tuple n x v`. The candidates are `universe` together with the
/// rows of `r`.
pub fn qtable<'u>(
    n: usize,
    x: &BTreeSet<usize>,
    p: impl Fn(&Tuple) -> bool,
    q: impl Fn(&Tuple) -> bool,
    r: &'u Table,
    universe: impl IntoIterator<Item = &'u Tuple>,
) -> bool {
    vtable(n, x, r)
        && universe
            .into_iter()
            .chain(r.iter())
            .filter(|v| p(v))
            .all(|v| r.contains(v) == (q(v) && wf_tuple(n, x, v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: i64) -> Option<Value> {
        Some(Value::Int(v))
    }

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    fn tbl(rows: &[Tuple]) -> Table {
        rows.iter().cloned().collect()
    }

    #[test]
    fn wf_tuple_cases() {
        assert!(wf_tuple(2, &set(&[]), &[None, None]));
        assert!(wf_tuple(2, &set(&[0]), &[s(4), None]));
        assert!(!wf_tuple(2, &set(&[0]), &[None, s(4)]));
        assert!(!wf_tuple(3, &set(&[0]), &[s(4), None]));
    }

    #[test]
    fn unit_tables() {
        assert_eq!(unit_table(0), tbl(&[vec![]]));
        assert_eq!(unit_table(1), tbl(&[vec![None]]));
        assert_eq!(unit_table(3), tbl(&[vec![None, None, None]]));
    }

    #[test]
    fn join1_cases() {
        assert_eq!(join1(&[s(1), None], &[None, s(2)]), Ok(Some(vec![s(1), s(2)])));
        assert_eq!(join1(&[s(1)], &[s(1)]), Ok(Some(vec![s(1)])));
        assert_eq!(join1(&[s(1)], &[s(2)]), Ok(None));
        assert!(join1(&[s(1)], &[s(1), None]).is_err());
    }

    #[test]
    fn join_cases() {
        let r = tbl(&[vec![s(1), None], vec![s(2), None]]);
        assert_eq!(join(&r, &unit_table(2)).unwrap(), r);
        assert_eq!(
            join(&tbl(&[vec![s(1), None]]), &tbl(&[vec![None, s(2)]])).unwrap(),
            tbl(&[vec![s(1), s(2)]])
        );
        assert!(join(&tbl(&[vec![s(1)]]), &tbl(&[vec![s(2)]])).unwrap().is_empty());
    }

    #[test]
    fn antijoin_cases() {
        let r = tbl(&[vec![s(1)], vec![s(2)]]);
        assert_eq!(antijoin(&r, &Table::new()).unwrap(), r);
        assert_eq!(antijoin(&r, &tbl(&[vec![s(2)]])).unwrap(), tbl(&[vec![s(1)]]));
        assert!(antijoin(&r, &unit_table(1)).unwrap().is_empty());
    }

    #[test]
    fn eval_or_cases() {
        assert_eq!(
            eval_or(2, &unit_table(2), &tbl(&[vec![s(1), s(2)]])).unwrap(),
            unit_table(2)
        );
        assert!(eval_or(1, &Table::new(), &Table::new()).unwrap().is_empty());
        assert_eq!(
            eval_or(1, &tbl(&[vec![s(1)]]), &tbl(&[vec![s(2)]])).unwrap(),
            tbl(&[vec![s(1)], vec![s(2)]])
        );
        assert!(eval_or(2, &tbl(&[vec![s(1)]]), &Table::new()).is_err());
    }

    #[test]
    fn big_join_cases() {
        assert_eq!(big_join([], 2).unwrap(), unit_table(2));
        let ab = tbl(&[vec![s(0)], vec![s(1)]]);
        let bc = tbl(&[vec![s(1)], vec![s(2)]]);
        assert_eq!(big_join([&ab, &bc], 1).unwrap(), tbl(&[vec![s(1)]]));
        assert_eq!(big_join([&ab], 1).unwrap(), ab);
    }

    #[test]
    fn project_cases() {
        let v = vec![s(1), s(2)];
        assert_eq!(project(&set(&[]), &v), vec![None, None]);
        assert_eq!(project(&set(&[0]), &v), vec![s(1), None]);
        assert_eq!(project(&set(&[0, 1]), &v), v);
    }

    #[test]
    fn qtable_cases() {
        let universe = wf_tuples(2, &set(&[]), &[]);
        assert!(qtable(2, &set(&[]), |_| true, |_| true, &unit_table(2), &universe));
        assert!(qtable(2, &set(&[]), |_| true, |_| false, &Table::new(), &universe));
        assert!(!qtable(1, &set(&[0]), |_| true, |_| true, &unit_table(1), &[]));
        // A wrong answer on the empty attribute set is caught.
        assert!(!qtable(2, &set(&[]), |_| true, |_| true, &Table::new(), &universe));
    }

    #[test]
    fn unit_table_is_valid_only_without_attributes() {
        let n = 3;
        for mask in 0u32..(1 << n) {
            let x: BTreeSet<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            assert_eq!(vtable(n, &x, &unit_table(n)), x.is_empty());
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        const N: usize = 3;

        fn dom() -> Vec<Value> {
            (0..3).map(Value::Int).collect()
        }

        fn arb_attrs() -> impl Strategy<Value = BTreeSet<usize>> {
            proptest::collection::btree_set(0..N, 0..=N)
        }

        /// A random wf table: attribute set plus a random subset of its tuples.
        fn arb_table() -> impl Strategy<Value = (BTreeSet<usize>, Table)> {
            arb_attrs().prop_flat_map(|x| {
                let all = wf_tuples(N, &x, &dom());
                let len = all.len();
                (
                    Just(x),
                    proptest::collection::vec(any::<bool>(), len).prop_map(move |keep| {
                        all.iter()
                            .zip(keep)
                            .filter(|(_, k)| *k)
                            .map(|(v, _)| v.clone())
                            .collect::<Table>()
                    }),
                )
            })
        }

        fn arb_same_attrs() -> impl Strategy<Value = (BTreeSet<usize>, Vec<Table>)> {
            arb_attrs().prop_flat_map(|x| {
                let all = wf_tuples(N, &x, &dom());
                let len = all.len();
                let one = proptest::collection::vec(any::<bool>(), len).prop_map(move |keep| {
                    all.iter()
                        .zip(keep)
                        .filter(|(_, k)| *k)
                        .map(|(v, _)| v.clone())
                        .collect::<Table>()
                });
                (Just(x), proptest::collection::vec(one, 1..4))
            })
        }

        proptest! {
            #[test]
            fn join_lemma((x, r1) in arb_table(), (y, r2) in arb_table()) {
                let z: BTreeSet<usize> = x.union(&y).copied().collect();
                let universe = wf_tuples(N, &z, &dom());
                let joined = join(&r1, &r2).unwrap();
                let q = |v: &Tuple| r1.contains(&project(&x, v)) && r2.contains(&project(&y, v));
                prop_assert!(qtable(N, &z, |_| true, q, &joined, &universe));
            }

            #[test]
            fn antijoin_lemma((x, r1) in arb_table(), (y, r2) in arb_table()) {
                prop_assume!(y.is_subset(&x));
                let universe = wf_tuples(N, &x, &dom());
                let result = antijoin(&r1, &r2).unwrap();
                let q = |v: &Tuple| r1.contains(v) && !r2.contains(&project(&y, v));
                prop_assert!(qtable(N, &x, |_| true, q, &result, &universe));
            }

            #[test]
            fn intersection_lemma((x, rs) in arb_same_attrs()) {
                let universe = wf_tuples(N, &x, &dom());
                let result = big_join(&rs, N).unwrap();
                let q = |v: &Tuple| rs.iter().all(|r| r.contains(v));
                prop_assert!(qtable(N, &x, |_| true, q, &result, &universe));
            }

            #[test]
            fn join_laws((_, a) in arb_table(), (_, b) in arb_table(), (_, c) in arb_table()) {
                prop_assert_eq!(join(&a, &b).unwrap(), join(&b, &a).unwrap());
                prop_assert_eq!(
                    join(&join(&a, &b).unwrap(), &c).unwrap(),
                    join(&a, &join(&b, &c).unwrap()).unwrap()
                );
                prop_assert_eq!(join(&a, &unit_table(N)).unwrap(), a.clone());
            }

            #[test]
            fn eval_or_commutes((_, a) in arb_table(), (_, b) in arb_table()) {
                prop_assert_eq!(eval_or(N, &a, &b).unwrap(), eval_or(N, &b, &a).unwrap());
            }
        }
    }
}
