//! Monitoring of metric first-order temporal logic with trigger and release.
//!
//! The crate is split into the formula syntax ([`formula`]), finite trace
//! prefixes ([`trace`]), relational tables ([`table`]), the safety fragment
//! ([`safety`]), a brute-force reference semantics ([`oracle`]) and the
//! incremental monitor itself ([`monitor`]).

pub mod formula;
pub mod monitor;
pub mod oracle;
pub mod safety;
pub mod table;
pub mod trace;

pub use formula::{Formula, Interval, Term, Value};
pub use monitor::{MonitorError, MonitorState};
pub use table::{Table, Tuple};
pub use trace::{Database, Event, TracePrefix};
