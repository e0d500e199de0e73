//! Field snapshots and trace CSV files.
//!
//! Snapshots use the `gradflow-field v1` text format: a header line
//! `# gradflow-field v1 <Nx> <Ny> <Lx> <Ly> <time>` followed by `Ny` lines of
//! `Nx` comma-separated values, row `k` (fixed `y_k`) on line `k + 2`.
//! Numbers are written in shortest round-trip form.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::diagnostics::TraceRow;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};

const MAGIC: &str = "# gradflow-field v1";

pub fn format_snapshot(field: &Field, time: f64) -> String {
    let g = field.grid();
    let mut out = format!(
        "{MAGIC} {} {} {:e} {:e} {:e}\n",
        g.nx(),
        g.ny(),
        g.lx(),
        g.ly(),
        time
    );
    for k in 0..g.ny() {
        let row: Vec<String> = (0..g.nx()).map(|j| format!("{:e}", field.at(j, k))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses a snapshot, returning the field and its time.
pub fn parse_snapshot(text: &str) -> Result<(Field, f64)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty snapshot".into(),
    })?;
    let rest = header.strip_prefix(MAGIC).ok_or(Error::Parse {
        line: 1,
        message: format!("expected header starting with `{MAGIC}`"),
    })?;
    let parts: Vec<&str> = rest.split_whitespace().collect();
    let bad_header = |message: &str| Error::Parse {
        line: 1,
        message: message.to_string(),
    };
    if parts.len() != 5 {
        return Err(bad_header("header needs Nx Ny Lx Ly time"));
    }
    let nx: usize = parts[0].parse().map_err(|_| bad_header("bad Nx"))?;
    let ny: usize = parts[1].parse().map_err(|_| bad_header("bad Ny"))?;
    let lx: f64 = parts[2].parse().map_err(|_| bad_header("bad Lx"))?;
    let ly: f64 = parts[3].parse().map_err(|_| bad_header("bad Ly"))?;
    let time: f64 = parts[4].parse().map_err(|_| bad_header("bad time"))?;
    let grid = Grid2D::new(lx, ly, nx, ny)?;

    let mut values = vec![0.0; grid.len()];
    let mut rows = 0;
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        if line.trim().is_empty() {
            continue;
        }
        if k >= ny {
            return Err(Error::Parse {
                line: lineno,
                message: format!("more than {ny} data rows"),
            });
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != nx {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {nx} values, found {}", cells.len()),
            });
        }
        for (j, c) in cells.iter().enumerate() {
            values[k * nx + j] = c.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("bad number `{c}`"),
            })?;
        }
        rows += 1;
    }
    if rows != ny {
        return Err(Error::Parse {
            line: rows + 2,
            message: format!("expected {ny} data rows, found {rows}"),
        });
    }
    Ok((Field::from_values(grid, values)?, time))
}

pub fn write_snapshot(path: &Path, field: &Field, time: f64) -> Result<()> {
    std::fs::write(path, format_snapshot(field, time)).map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<(Field, f64)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_snapshot(&text)
}

/// Header line of a trace with the given extra columns.
pub fn trace_header(extras: &[String]) -> String {
    let mut cols = vec!["t", "F_eq", "F_orig", "mass", "q_drift"];
    cols.extend(extras.iter().map(|s| s.as_str()));
    cols.join(",")
}

pub fn format_trace_row(row: &TraceRow) -> String {
    let mut cells: Vec<String> = [row.t, row.f_eq, row.f_orig, row.mass, row.q_drift]
        .iter()
        .map(|v| format!("{v:e}"))
        .collect();
    cells.extend(row.extra.iter().map(|(_, v)| format!("{v:e}")));
    cells.join(",")
}

/// Streams trace rows to a CSV file. Rows must carry the extra columns
/// named at creation, in the same order.
pub struct TraceWriter {
    path: PathBuf,
    out: BufWriter<File>,
    extras: Vec<String>,
    last_t: Option<f64>,
}

impl TraceWriter {
    pub fn create(path: &Path, extras: &[String]) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = TraceWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
            extras: extras.to_vec(),
            last_t: None,
        };
        let header = trace_header(extras);
        writeln!(w.out, "{header}").map_err(|e| Error::io(&w.path, e))?;
        Ok(w)
    }

    pub fn write(&mut self, row: &TraceRow) -> Result<()> {
        let names: Vec<&str> = row.extra.iter().map(|(n, _)| n.as_str()).collect();
        if names != self.extras.iter().map(|s| s.as_str()).collect::<Vec<_>>() {
            return Err(Error::param("trace", "extra columns do not match the header"));
        }
        if self.last_t.is_some_and(|t| row.t <= t) {
            return Err(Error::param("trace", "times must increase"));
        }
        if !row.is_finite() {
            return Err(Error::NonFinite {
                context: "trace row".into(),
            });
        }
        self.last_t = Some(row.t);
        writeln!(self.out, "{}", format_trace_row(row)).map_err(|e| Error::io(&self.path, e))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip_is_exact() {
        let g = Grid2D::new(2.0, 3.0, 6, 4).unwrap();
        let f = Field::from_fn(g, |x, y| (x * 1.3).sin() / 3.0 + y * 1e-300 + x * y);
        let text = format_snapshot(&f, 0.1 + 0.2);
        let (back, t) = parse_snapshot(&text).unwrap();
        assert_eq!(t, 0.1 + 0.2);
        assert_eq!(back, f);
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("# gradflow-field v1 6 4 "));
        // row k = 1 holds y_1 for every x_j
        let row: Vec<f64> = text.lines().nth(2).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
        for (j, v) in row.iter().enumerate() {
            assert_eq!(*v, f.at(j, 1));
        }
    }

    #[test]
    fn snapshot_errors_carry_line_numbers() {
        let g = Grid2D::square(1.0, 4).unwrap();
        let text = format_snapshot(&Field::zeros(g), 0.0);
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[3] = "0,0,x,0".into();
        match parse_snapshot(&lines.join("\n")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(parse_snapshot("garbage").is_err());
        assert!(parse_snapshot(&text.lines().take(3).collect::<Vec<_>>().join("\n")).is_err());
    }

    #[test]
    fn trace_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let mut w = TraceWriter::create(&path, &["volume".to_string()]).unwrap();
        let row = TraceRow {
            t: 0.5,
            f_eq: 1.0,
            f_orig: 1.0,
            mass: 0.0,
            q_drift: 0.0,
            extra: vec![("volume".into(), 3.0)],
        };
        w.write(&row).unwrap();
        assert!(w.write(&row).is_err());
        w.flush().unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "t,F_eq,F_orig,mass,q_drift,volume\n5e-1,1e0,1e0,0e0,0e0,3e0\n");
    }
}
