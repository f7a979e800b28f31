//! The `check`, `monitor` and `verify` commands.

use std::io::{BufRead, Write};

use mfotl::formula::{fv, future_bounded, Formula};
use mfotl::monitor::{minit, progress, MonitorError};
use mfotl::oracle::{Oracle, OracleError};
use mfotl::safety::{issafe, safe_formula, ssfv, VarSet};
use mfotl::trace::TraceError;
use mfotl::{Table, TracePrefix, Tuple};
use thiserror::Error;

use crate::log::{parse_log, LogError};
use crate::syntax::{parse_named, print_formula, SyntaxError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("formula is not safe")]
    Unsafe,
    #[error("mismatch at time-point {i}: monitor {monitor}, oracle {oracle}")]
    Mismatch { i: usize, monitor: String, oracle: String },
    #[error("monitor emitted {emitted} time-points, the oracle determines {expected}")]
    ProgressMismatch { emitted: usize, expected: usize },
}

impl CliError {
    /// 1 for input errors, 2 for formulas that cannot be monitored, 3 for
    /// verification failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Unsafe
            | CliError::Monitor(MonitorError::UnsafeFormula | MonitorError::UnboundedFuture) => 2,
            CliError::Mismatch { .. } | CliError::ProgressMismatch { .. } | CliError::Oracle(_) => 3,
            _ => 1,
        }
    }
}

fn fmt_set(names: &[String], x: &VarSet) -> String {
    let items: Vec<&str> = x.iter().map(|&k| names[k].as_str()).collect();
    format!("{{{}}}", items.join(", "))
}

/// Prints the formula and its safety verdicts. Fails with [`CliError::Unsafe`]
/// or an unbounded-future error after printing when the formula cannot be
/// monitored.
pub fn check(src: &str, sugar: bool, out: &mut impl Write) -> Result<(), CliError> {
    let (f, names) = parse_named(src)?;
    let fam = ssfv(&f);
    let fam_text: Vec<String> = fam.iter().map(|x| fmt_set(&names, x)).collect();
    writeln!(out, "formula: {}", print_formula(&f, sugar))?;
    let vars: Vec<String> = fv(&f).iter().map(|&k| format!("{}=x{k}", names[k])).collect();
    writeln!(out, "free variables: {}", vars.join(", "))?;
    writeln!(out, "ssfv: {{{}}}", fam_text.join(", "))?;
    writeln!(out, "issafe: {}", issafe(&f))?;
    writeln!(out, "safe_formula: {}", safe_formula(&f))?;
    writeln!(out, "future-bounded: {}", future_bounded(&f))?;
    if !issafe(&f) {
        return Err(CliError::Unsafe);
    }
    if !future_bounded(&f) {
        return Err(MonitorError::UnboundedFuture.into());
    }
    Ok(())
}

fn fmt_tuple(v: &Tuple) -> String {
    let cells: Vec<String> = v
        .iter()
        .map(|c| c.as_ref().map_or("*".to_string(), ToString::to_string))
        .collect();
    format!("({})", cells.join(","))
}

fn write_table(out: &mut impl Write, ts: u64, i: usize, t: &Table) -> std::io::Result<()> {
    for v in t {
        writeln!(out, "@{ts} (time point {i}): {}", fmt_tuple(v))?;
    }
    Ok(())
}

fn parse_monitorable(src: &str) -> Result<Formula, CliError> {
    let (f, _) = parse_named(src)?;
    minit(&f)?;
    Ok(f)
}

/// Streams the log through the monitor, printing every satisfaction as
/// `@<ts> (time point <i>): (<v or *>, ...)`, grouped by time-point with
/// tuples in ascending order.
pub fn monitor(src: &str, log: impl BufRead, out: &mut impl Write) -> Result<(), CliError> {
    let f = parse_monitorable(src)?;
    let mut st = minit(&f)?;
    let mut stamps = Vec::new();
    for entry in parse_log(log) {
        let (db, ts) = entry?;
        stamps.push(ts);
        for (i, t) in st.step_tables(&db, ts)? {
            write_table(out, stamps[i], i, &t)?;
        }
        out.flush()?;
    }
    Ok(())
}

/// Runs the monitor and the reference semantics over the whole log and
/// compares them at every time-point the log determines. Returns the
/// number of verified time-points.
pub fn verify(src: &str, log: impl BufRead, out: &mut impl Write) -> Result<usize, CliError> {
    let f = parse_monitorable(src)?;
    let mut trace = TracePrefix::new();
    for entry in parse_log(log) {
        let (db, ts) = entry?;
        trace.append(db, ts)?;
    }
    let oracle = Oracle::new(&trace, &f);
    let mut st = minit(&f)?;
    let mut verified = 0;
    for (db, ts) in trace.entries() {
        for (i, t) in st.step_tables(db, *ts)? {
            let want = oracle.sats_table(i, st.n, &f)?;
            if t != want {
                let show = |t: &Table| {
                    let rows: Vec<String> = t.iter().map(fmt_tuple).collect();
                    format!("{{{}}}", rows.join(", "))
                };
                return Err(CliError::Mismatch {
                    i,
                    monitor: show(&t),
                    oracle: show(&want),
                });
            }
            verified += 1;
        }
    }
    let expected = progress(&trace, &f);
    if verified != expected {
        return Err(CliError::ProgressMismatch {
            emitted: verified,
            expected,
        });
    }
    writeln!(out, "{verified} time-points verified")?;
    Ok(verified)
}
