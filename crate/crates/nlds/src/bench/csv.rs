//! CSV emission and parsing for benchmark results, plus a plain
//! comma-separated matrix file format shared with the CLI.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// One recorded checkpoint of one (algorithm, seed) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub algo: String,
    pub seed: u64,
    /// Position in the trajectory the estimate has consumed (streaming
    /// methods) or the iteration count (offline methods).
    pub t: u64,
    /// Number of parameter updates performed so far.
    pub updates: u64,
    /// Wall-clock nanoseconds spent inside the update loop so far.
    pub wall_ns: u64,
    /// Squared Frobenius error against the true matrix.
    pub frob_sq_err: f64,
    /// Sweep tag: `(axis key, axis value)`, identical across a sweep slice.
    pub axis: Option<(String, String)>,
}

const BASE_HEADER: &str = "algo,seed,t,updates,wall_ns,frob_sq_err";

/// Write rows as CSV. The header grows `axis,axis_value` columns exactly when
/// the rows carry sweep tags; mixing tagged and untagged rows is a caller bug.
pub fn write_rows<W: Write>(rows: &[ResultRow], out: &mut W) -> Result<()> {
    let tagged = rows.first().map(|r| r.axis.is_some()).unwrap_or(false);
    if tagged {
        writeln!(out, "{BASE_HEADER},axis,axis_value")?;
    } else {
        writeln!(out, "{BASE_HEADER}")?;
    }
    for row in rows {
        assert_eq!(row.axis.is_some(), tagged, "rows mix sweep-tagged and untagged entries");
        write!(
            out,
            "{},{},{},{},{},{}",
            row.algo, row.seed, row.t, row.updates, row.wall_ns, row.frob_sq_err
        )?;
        if let Some((axis, value)) = &row.axis {
            assert!(
                !axis.contains(',') && !value.contains(','),
                "axis tags must not contain commas"
            );
            write!(out, ",{axis},{value}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Parse rows back from CSV produced by [`write_rows`].
pub fn read_rows<R: std::io::Read>(reader: R) -> Result<Vec<ResultRow>> {
    let mut lines = BufReader::new(reader).lines();
    let bad = |lineno: usize, msg: String| Error::FileFormat {
        path: "<results csv>".to_string(),
        msg: format!("line {lineno}: {msg}"),
    };
    let header = lines
        .next()
        .ok_or_else(|| bad(1, "empty file".to_string()))??;
    let tagged = match header.trim() {
        h if h == BASE_HEADER => false,
        h if h == format!("{BASE_HEADER},axis,axis_value") => true,
        h => return Err(bad(1, format!("unexpected header `{h}`"))),
    };
    let want = if tagged { 8 } else { 6 };
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != want {
            return Err(bad(i + 2, format!("expected {want} fields, got {}", fields.len())));
        }
        let num = |j: usize| -> Result<u64> {
            fields[j]
                .parse()
                .map_err(|_| bad(i + 2, format!("bad integer `{}`", fields[j])))
        };
        rows.push(ResultRow {
            algo: fields[0].to_string(),
            seed: num(1)?,
            t: num(2)?,
            updates: num(3)?,
            wall_ns: num(4)?,
            frob_sq_err: fields[5]
                .parse()
                .map_err(|_| bad(i + 2, format!("bad float `{}`", fields[5])))?,
            axis: tagged.then(|| (fields[6].to_string(), fields[7].to_string())),
        });
    }
    Ok(rows)
}

/// Write a matrix as plain CSV: one row per line, full-precision entries.
pub fn write_matrix(m: &DMatrix<f64>, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Read a matrix written by [`write_matrix`]. All rows must have the same
/// width and the file must be non-empty.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path)?;
    let bad = |msg: String| Error::FileFormat { path: path.display().to_string(), msg };
    let mut data: Vec<f64> = Vec::new();
    let mut ncols = 0usize;
    let mut nrows = 0usize;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("line {}: bad entry `{s}`", i + 1)))
            })
            .collect::<Result<_>>()?;
        if nrows == 0 {
            ncols = row.len();
        } else if row.len() != ncols {
            return Err(bad(format!("line {}: expected {ncols} entries, got {}", i + 1, row.len())));
        }
        nrows += 1;
        data.extend(row);
    }
    if nrows == 0 {
        return Err(bad("no rows".to_string()));
    }
    Ok(DMatrix::from_row_slice(nrows, ncols, &data))
}
