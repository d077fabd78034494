//! Table rendering shared by all commands.
//!
//! CSV: one `#` metadata line, a header row, then data rows. Numbers are
//! written as `{:.12e}`, absent or non-finite values as [`MISSING`]. Text
//! containing a comma or quote is quoted as in RFC 4180.
//! JSON: one object per data row (JSON Lines); absent values are `null`.

use std::fmt::Write as _;

use serde::Serialize;

use super::Format;

/// Sentinel for a value that does not exist, e.g. a relaxation time outside
/// the formula's domain.
pub const MISSING: &str = "NA";

/// Bumped whenever a column is added, removed or reinterpreted.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell<'a> {
    Num(f64),
    Opt(Option<f64>),
    Text(&'a str),
    Flag(bool),
}

impl Cell<'_> {
    fn write_csv(&self, out: &mut String) {
        match *self {
            Cell::Num(v) | Cell::Opt(Some(v)) if v.is_finite() => {
                let _ = write!(out, "{v:.12e}");
            }
            Cell::Num(_) | Cell::Opt(_) => out.push_str(MISSING),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                out.push('"');
                out.push_str(&s.replace('"', "\"\""));
                out.push('"');
            }
            Cell::Text(s) => out.push_str(s),
            Cell::Flag(b) => out.push(if b { '1' } else { '0' }),
        }
    }
}

pub trait Row: Serialize {
    const COLUMNS: &'static [&'static str];
    fn cells(&self) -> Vec<Cell<'_>>;
}

/// Renders rows in the requested format. `meta` becomes the CSV comment line
/// and is omitted from JSON output.
pub fn render<R: Row>(rows: &[R], meta: &str, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            let _ = writeln!(out, "# {meta}");
            out.push_str(&R::COLUMNS.join(","));
            out.push('\n');
            for row in rows {
                for (i, cell) in row.cells().iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    cell.write_csv(&mut out);
                }
                out.push('\n');
            }
        }
        Format::Json => {
            for row in rows {
                // Rows hold only numbers, strings and booleans.
                out.push_str(&serde_json::to_string(row).expect("row serializes"));
                out.push('\n');
            }
        }
    }
    out
}
