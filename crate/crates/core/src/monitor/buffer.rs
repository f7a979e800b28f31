//! Buffers holding child results until both operands of a binary operator
//! are available for the same time-point.

use std::collections::VecDeque;

use crate::formula::Interval;
use crate::table::Table;

/// Two queues of tables, one per operand. Tables at the same queue position
/// belong to the same time-point.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Buf2 {
    pub left: VecDeque<Table>,
    pub right: VecDeque<Table>,
}

impl Buf2 {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, xs: Vec<Table>, ys: Vec<Table>) {
        self.left.extend(xs);
        self.right.extend(ys);
    }

    /// Removes and returns all complete pairs, oldest first.
    pub fn take(&mut self) -> Vec<(Table, Table)> {
        let k = self.left.len().min(self.right.len());
        self.left.drain(..k).zip(self.right.drain(..k)).collect()
    }

    /// Like [`Buf2::take`], additionally pairing each time-point with its
    /// stamp from `nts`.
    pub fn take_stamped(&mut self, nts: &mut VecDeque<u64>) -> Vec<(Table, Table, u64)> {
        self.take()
            .into_iter()
            .map(|(a, b)| {
                let t = nts
                    .pop_front()
                    .expect("a stamp is queued for every buffered time-point");
                (a, b, t)
            })
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty() && self.right.is_empty()
    }
}

/// Shifts tables by one time-point. Each table in `xs` is released once the
/// stamp of the following time-point is known, replaced by the empty table
/// when the gap between the two stamps lies outside `ivl`. Unreleased
/// tables and stamps stay in `xs` and `nts`.
pub fn mprev_next(ivl: &Interval, xs: &mut VecDeque<Table>, nts: &mut VecDeque<u64>) -> Vec<Table> {
    let mut out = Vec::new();
    while !xs.is_empty() && nts.len() >= 2 {
        let x = xs.pop_front().expect("checked non-empty");
        let t = nts.pop_front().expect("checked length");
        let t_next = nts[0];
        out.push(if ivl.mem(t_next - t) { x } else { Table::new() });
    }
    out
}
