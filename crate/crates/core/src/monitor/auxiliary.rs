//! Auxiliary states of the temporal operators and their update functions.
//!
//! Every updater receives the operand tables `a` (left) and `b` (right) of
//! one time-point together with its stamp `nt`. `pos` selects a join with
//! `a` (plain left operand) or an antijoin (negated left operand).

use std::collections::VecDeque;

use crate::formula::Interval;
use crate::table::{antijoin, big_join, join, unit_table, Table};

const WIDTH: &str = "operand tables share the monitor width";

pub(crate) fn join_t(r1: &Table, r2: &Table) -> Table {
    join(r1, r2).expect(WIDTH)
}

pub(crate) fn antijoin_t(r1: &Table, r2: &Table) -> Table {
    antijoin(r1, r2).expect(WIDTH)
}

/// `r ⋈ a` when `pos`, `r ▷ a` otherwise.
pub(crate) fn join_pos(r: &Table, pos: bool, a: &Table) -> Table {
    if pos {
        join_t(r, a)
    } else {
        antijoin_t(r, a)
    }
}

fn union(r1: &Table, r2: &Table) -> Table {
    r1.union(r2).cloned().collect()
}

/// Newest entry first; one table per distinct stamp.
pub type SinceAux = VecDeque<(u64, Table)>;

/// One entry per pending time-point, oldest first: stamp, running left
/// operand table, accumulated result.
pub type UntilAux = VecDeque<(u64, Table, Table)>;

/// Newest entry first; one table per distinct stamp.
pub type TriggerAux = VecDeque<(u64, Table)>;

/// One entry per pending time-point, oldest first: stamp, left table,
/// right table.
pub type ReleaseAux = VecDeque<(u64, Table, Table)>;

fn within_hi(ivl: &Interval, nt: u64, t: u64) -> bool {
    ivl.mem_r(nt - t)
}

pub fn update_since(ivl: &Interval, pos: bool, a: &Table, b: &Table, nt: u64, aux: &mut SinceAux) -> Table {
    aux.retain(|(t, _)| within_hi(ivl, nt, *t));
    for (_, r) in aux.iter_mut() {
        *r = join_pos(r, pos, a);
    }
    match aux.front_mut() {
        Some((t, r)) if *t == nt => *r = union(r, b),
        _ => aux.push_front((nt, b.clone())),
    }
    aux.iter()
        .filter(|(t, _)| ivl.mem_l(nt - t))
        .fold(Table::new(), |acc, (_, r)| union(&acc, r))
}

pub fn update_until(ivl: &Interval, pos: bool, a: &Table, b: &Table, nt: u64, aux: &mut UntilAux) {
    for (t, a1, a2) in aux.iter_mut() {
        if ivl.mem(nt - *t) {
            *a2 = union(a2, &join_pos(b, pos, a1));
        }
        *a1 = if pos { join_t(a1, a) } else { union(a1, a) };
    }
    let first = if ivl.contains_zero() { b.clone() } else { Table::new() };
    aux.push_back((nt, a.clone(), first));
}

/// Emits the results of all entries whose window has elapsed at `nt`.
pub fn eval_until(ivl: &Interval, nt: u64, aux: &mut UntilAux) -> Vec<Table> {
    let hi = ivl.hi().expect("future operators are bounded");
    let mut out = Vec::new();
    while let Some((t, _, _)) = aux.front() {
        if t + hi < nt {
            out.push(aux.pop_front().expect("checked non-empty").2);
        } else {
            break;
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
pub fn update_trigger(
    ivl: &Interval,
    mem0: bool,
    pos: bool,
    a: &Table,
    b: &Table,
    nt: u64,
    aux: &mut TriggerAux,
    n: usize,
) -> Table {
    aux.retain(|(t, _)| within_hi(ivl, nt, *t));
    let extra = if mem0 { join_pos(b, pos, a) } else { a.clone() };
    for (_, r) in aux.iter_mut() {
        *r = union(r, &extra);
    }
    // Equal stamps: every time-point with that stamp must be covered, and
    // the stored tables share the attributes of `b`, so joining intersects.
    match aux.front_mut() {
        Some((t, r)) if *t == nt => *r = join_t(r, b),
        _ => aux.push_front((nt, b.clone())),
    }
    big_join(
        aux.iter()
            .filter(|(t, _)| ivl.mem_l(nt - t))
            .map(|(_, r)| r),
        n,
    )
    .expect(WIDTH)
}

#[allow(clippy::too_many_arguments)]
pub fn update_release(
    ivl: &Interval,
    mem0: bool,
    pos: bool,
    a: &Table,
    b: &Table,
    nt: u64,
    aux: &mut ReleaseAux,
    n: usize,
) {
    let c = if mem0 { join_pos(b, pos, a) } else { a.clone() };
    for (t, left, right) in aux.iter_mut() {
        if ivl.mem(nt - *t) {
            *right = join_t(right, &union(b, left));
        }
        *left = union(left, &c);
    }
    let first = if mem0 { b.clone() } else { unit_table(n) };
    aux.push_back((nt, c, first));
}

/// Emits and removes the right tables of all entries whose window has
/// elapsed at `nt`.
pub fn eval_future(ivl: &Interval, nt: u64, aux: &mut ReleaseAux) -> Vec<Table> {
    let hi = ivl.hi().expect("future operators are bounded");
    let mut out = Vec::new();
    while let Some((t, _, _)) = aux.front() {
        if t + hi < nt {
            out.push(aux.pop_front().expect("checked non-empty").2);
        } else {
            break;
        }
    }
    out
}
