//! CSV and JSON exchange formats.
//!
//! Path CSV: header `time,x_1..x_d` optionally followed by `lift_11..lift_dd`
//! (row-major). Lift columns on row k hold the lift of the interval ending at
//! row k, so they are empty on the first data row. Numbers are written with
//! 17 significant digits.

use crate::error::{Error, Result};
use crate::roughpath::{LiftKind, RoughPath, Tensor2, TimeGrid, TracePath};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// 17 significant digits in scientific notation; round-trips every f64.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn lift_label(d: usize, j: usize, k: usize) -> String {
    if d < 10 {
        format!("lift_{}{}", j + 1, k + 1)
    } else {
        format!("lift_{}_{}", j + 1, k + 1)
    }
}

fn header(d: usize, with_lift: bool) -> String {
    let mut cols = vec!["time".to_string()];
    cols.extend((1..=d).map(|i| format!("x_{i}")));
    if with_lift {
        for j in 0..d {
            for k in 0..d {
                cols.push(lift_label(d, j, k));
            }
        }
    }
    cols.join(",")
}

fn write_rows(trace: &TracePath, lift: Option<&RoughPath>) -> String {
    let d = trace.dim();
    let mut out = header(d, lift.is_some());
    out.push('\n');
    for k in 0..trace.len() {
        let mut cells = vec![fmt_num(trace.grid().times()[k])];
        cells.extend(trace.value(k).iter().map(|&v| fmt_num(v)));
        if let Some(rp) = lift {
            if k == 0 {
                cells.extend(std::iter::repeat(String::new()).take(d * d));
            } else {
                cells.extend(rp.step_lift(k - 1).iter().map(|&v| fmt_num(v)));
            }
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn trace_to_csv(trace: &TracePath) -> String {
    write_rows(trace, None)
}

pub fn rough_path_to_csv(rp: &RoughPath) -> String {
    write_rows(rp.trace(), Some(rp))
}

/// A parsed path CSV: the trace and, if lift columns were present, the
/// adjacent-interval lifts.
#[derive(Clone, Debug, PartialEq)]
pub struct PathTable {
    pub trace: TracePath,
    pub lift: Option<Vec<Tensor2>>,
}

impl PathTable {
    /// Attaches the stored lift, failing if the file had none.
    pub fn into_rough_path(self, kind: LiftKind) -> Result<RoughPath> {
        match self.lift {
            Some(l) => RoughPath::new(self.trace, l, kind),
            None => Err(Error::config("path file has no lift columns")),
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Reads a path CSV. Line numbers in errors are 1-based and count the header.
pub fn read_path_csv(text: &str) -> Result<PathTable> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let cols: Vec<&str> = head.split(',').map(str::trim).collect();
    if cols.first() != Some(&"time") {
        return Err(parse_err(1, "first column must be `time`"));
    }
    let d = cols.iter().filter(|c| c.starts_with("x_")).count();
    if d == 0 || cols[1..=d].iter().any(|c| !c.starts_with("x_")) {
        return Err(parse_err(1, "expected columns x_1..x_d after time"));
    }
    let extra = cols.len() - 1 - d;
    let with_lift = match extra {
        0 => false,
        n if n == d * d && cols[1 + d..].iter().all(|c| c.starts_with("lift_")) => true,
        _ => return Err(parse_err(1, format!("expected 0 or {} lift columns, found {extra}", d * d))),
    };

    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut lift = Vec::new();
    for (i, line) in lines {
        let no = i + 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != cols.len() {
            return Err(parse_err(no, format!("expected {} fields, found {}", cols.len(), cells.len())));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| parse_err(no, format!("not a number: `{s}`")))
        };
        times.push(num(cells[0])?);
        for c in &cells[1..=d] {
            values.push(num(c)?);
        }
        if with_lift {
            let lc = &cells[1 + d..];
            if times.len() == 1 {
                if lc.iter().any(|c| !c.is_empty()) {
                    return Err(parse_err(no, "lift columns must be empty on the first row"));
                }
            } else {
                let v = lc.iter().map(|c| num(c)).collect::<Result<Vec<_>>>()?;
                lift.push(Tensor2::from_row_major(d, v));
            }
        }
    }
    let grid = TimeGrid::new(times).map_err(|e| parse_err(0, e.to_string()))?;
    let trace = TracePath::new(grid, d, values)?;
    Ok(PathTable { trace, lift: with_lift.then_some(lift) })
}

/// Writes a CSV with a header row. Every row must have the header's width.
pub fn table_to_csv(header: &[&str], rows: &[Vec<f64>]) -> Result<String> {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        if r.len() != header.len() {
            return Err(Error::config(format!("row of width {} under a header of width {}", r.len(), header.len())));
        }
        out.push_str(&r.iter().map(|&v| fmt_num(v)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Pretty JSON tree of any serializable value. Floats use the shortest
/// representation that reads back to the same bits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::config(e.to_string()))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
}

/// Reads a rough path tree and re-checks its invariants.
pub fn rough_path_from_json(text: &str) -> Result<RoughPath> {
    let rp: RoughPath = from_json(text)?;
    let trace = TracePath::new(TimeGrid::new(rp.grid().times().to_vec())?, rp.dim(), rp.trace().values().to_vec())?;
    let lift = (0..rp.len() - 1).map(|k| rp.step_lift_tensor(k)).collect();
    RoughPath::new(trace, lift, rp.kind())
}
