//! Event logs: one time-point per line.
//!
//! ```text
//! @<ts> <pred>(<arg>, ...) <pred>(<arg>, ...) ... ;
//! ```
//!
//! Arguments are integers or double-quoted strings. The trailing `;` is
//! optional. Blank lines and lines starting with `#` are skipped.

use std::io::BufRead;

use mfotl::trace::{Database, Event};
use mfotl::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("log line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("log line {line}: {source}")]
    Io {
        line: usize,
        #[source]
        source: std::io::Error,
    },
}

struct Cursor<'s> {
    s: &'s str,
    i: usize,
}

impl<'s> Cursor<'s> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.s[self.i..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.i += c.len_utf8();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.s[self.i..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.i += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'s str {
        self.skip_ws();
        let start = self.i;
        while let Some(c) = self.s[self.i..].chars().next() {
            if !f(c) {
                break;
            }
            self.i += c.len_utf8();
        }
        &self.s[start..self.i]
    }

    fn value(&mut self) -> Result<Value, String> {
        if self.eat('"') {
            let mut out = String::new();
            let mut chars = self.s[self.i..].char_indices();
            while let Some((k, c)) = chars.next() {
                match c {
                    '"' => {
                        self.i += k + 1;
                        return Ok(Value::Str(out));
                    }
                    '\\' => match chars.next() {
                        Some((_, e @ ('"' | '\\'))) => out.push(e),
                        _ => return Err("invalid escape in string".into()),
                    },
                    _ => out.push(c),
                }
            }
            return Err("unterminated string".into());
        }
        let text = self.take_while(|c| c == '-' || c.is_ascii_digit());
        text.parse()
            .map(Value::Int)
            .map_err(|_| format!("expected an integer or a string, found {:?}", self.rest()))
    }

    fn rest(&self) -> &'s str {
        &self.s[self.i..]
    }
}

/// Parses one log line; `None` for blank and comment lines.
pub fn parse_line(text: &str) -> Result<Option<(Database, u64)>, String> {
    let trimmed = text.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let mut c = Cursor { s: trimmed, i: 0 };
    if !c.eat('@') {
        return Err("expected '@<time-stamp>'".into());
    }
    let ts = c
        .take_while(|ch| ch.is_ascii_digit())
        .parse::<u64>()
        .map_err(|_| "expected a time-stamp after '@'".to_string())?;
    let mut db = Database::new();
    loop {
        match c.peek() {
            None => break,
            Some(';') => {
                c.eat(';');
                if c.peek().is_some() {
                    return Err(format!("unexpected input after ';': {:?}", c.rest()));
                }
                break;
            }
            Some(_) => {}
        }
        let name = c.take_while(|ch| ch.is_alphanumeric() || ch == '_');
        if name.is_empty() {
            return Err(format!("expected an event, found {:?}", c.rest()));
        }
        if !c.eat('(') {
            return Err(format!("expected '(' after {name}"));
        }
        let mut args = Vec::new();
        if !c.eat(')') {
            loop {
                args.push(c.value()?);
                if c.eat(')') {
                    break;
                }
                if !c.eat(',') {
                    return Err(format!("expected ',' or ')' in arguments of {name}"));
                }
            }
        }
        db.insert(Event::new(name, args));
    }
    Ok(Some((db, ts)))
}

/// Lazily parses a log, yielding one time-point per non-blank line.
pub fn parse_log<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(Database, u64), LogError>> {
    reader.lines().enumerate().filter_map(|(k, line)| {
        let line_no = k + 1;
        match line {
            Err(source) => Some(Err(LogError::Io { line: line_no, source })),
            Ok(text) => parse_line(&text)
                .map_err(|msg| LogError::Parse { line: line_no, msg })
                .transpose(),
        }
    })
}
