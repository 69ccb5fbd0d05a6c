//! Plain-text matrix formats shared by the exporters.
//!
//! Numbers are written with 17 significant digits so that a read/write cycle
//! is lossless for `f64`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Formats a value with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_row<W: Write>(w: &mut W, row: impl IntoIterator<Item = f64>) -> Result<()> {
    let line = row.into_iter().map(fmt_f64).collect::<Vec<_>>().join(",");
    writeln!(w, "{line}")?;
    Ok(())
}

/// Parsed contents of a headed numeric CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    /// Comment lines (leading `#` stripped and trimmed) in file order.
    pub comments: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NumericTable {
    /// Looks up `key=<value>` in the first comment line.
    pub fn header_value(&self, key: &str) -> Option<&str> {
        let first = self.comments.first()?;
        first.split_whitespace().find_map(|tok| {
            tok.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
        })
    }
}

pub fn read_table<R: BufRead>(r: R) -> Result<NumericTable> {
    let mut comments = Vec::new();
    let mut rows = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('#') {
            comments.push(c.trim().to_string());
            continue;
        }
        let row = t
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| {
                    Error::Parse(format!("line {}: '{}': {e}", lineno + 1, f.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(NumericTable { comments, rows })
}
