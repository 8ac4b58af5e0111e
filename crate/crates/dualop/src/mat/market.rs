//! Matrix Market exchange format.
//!
//! Sparse matrices travel as 1-based `coordinate real` files, either
//! `general` or `symmetric` (lower triangle stored, expanded on read).
//! Dense matrices use the `array real general` format, which is
//! column-major by definition.

use crate::error::{Error, Result};
use crate::mat::dense::DenseMat;
use crate::mat::sparse::SparseCsr;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Write `a` in coordinate format. With `symmetric = true` only entries on
/// or below the diagonal are emitted and the header declares `symmetric`;
/// the caller is responsible for `a` actually being symmetric.
pub fn write_coordinate<W: Write>(a: &SparseCsr, symmetric: bool, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    let kind = if symmetric { "symmetric" } else { "general" };
    writeln!(w, "%%MatrixMarket matrix coordinate real {kind}")?;
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for r in 0..a.n_rows() {
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            if symmetric && c > r {
                continue;
            }
            entries.push((r, c, v));
        }
    }
    writeln!(w, "{} {} {}", a.n_rows(), a.n_cols(), entries.len())?;
    for (r, c, v) in entries {
        writeln!(w, "{} {} {:.17e}", r + 1, c + 1, v)?;
    }
    w.flush()?;
    Ok(())
}

/// Write `a` in array (dense, column-major) format.
pub fn write_array<W: Write>(a: &DenseMat, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} {}", a.n_rows(), a.n_cols())?;
    for c in 0..a.n_cols() {
        for r in 0..a.n_rows() {
            writeln!(w, "{:.17e}", a.get(r, c))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_coordinate_file(a: &SparseCsr, symmetric: bool, path: &Path) -> Result<()> {
    write_coordinate(a, symmetric, std::fs::File::create(path)?)
}

pub fn write_array_file(a: &DenseMat, path: &Path) -> Result<()> {
    write_array(a, std::fs::File::create(path)?)
}

struct Lines<R: BufRead> {
    inner: R,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next line that is neither blank nor a `%` comment. The banner line is
    /// consumed separately because it starts with `%%`.
    fn next_data(&mut self) -> Result<Option<(usize, String)>> {
        loop {
            let mut buf = String::new();
            self.line_no += 1;
            if self.inner.read_line(&mut buf)? == 0 {
                return Ok(None);
            }
            let t = buf.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            return Ok(Some((self.line_no, t.to_string())));
        }
    }
}

enum Layout {
    Coordinate { symmetric: bool },
    Array,
}

fn parse_banner(line: &str, line_no: usize) -> Result<Layout> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "%%MatrixMarket" || fields[1] != "matrix" {
        return Err(parse_err(
            line_no,
            "expected '%%MatrixMarket matrix <format> real <symmetry>'",
        ));
    }
    if fields[3] != "real" {
        return Err(parse_err(
            line_no,
            format!("unsupported field type '{}'", fields[3]),
        ));
    }
    let symmetric = match fields[4] {
        "general" => false,
        "symmetric" => true,
        other => {
            return Err(parse_err(
                line_no,
                format!("unsupported symmetry '{other}'"),
            ))
        }
    };
    match fields[2] {
        "coordinate" => Ok(Layout::Coordinate { symmetric }),
        "array" => {
            if symmetric {
                return Err(parse_err(
                    line_no,
                    "symmetric array layout is not supported",
                ));
            }
            Ok(Layout::Array)
        }
        other => Err(parse_err(line_no, format!("unsupported layout '{other}'"))),
    }
}

/// Read any supported Matrix Market file into CSR form, expanding
/// `symmetric` coordinate storage to both triangles.
pub fn read_matrix<R: Read>(input: R) -> Result<SparseCsr> {
    let mut reader = BufReader::new(input);
    let mut banner = String::new();
    if reader.read_line(&mut banner)? == 0 {
        return Err(parse_err(0, "empty file"));
    }
    let layout = parse_banner(banner.trim(), 1)?;
    let mut lines = Lines {
        inner: reader,
        line_no: 1,
    };
    let (size_no, size_line) = lines
        .next_data()?
        .ok_or_else(|| parse_err(2, "missing size line"))?;
    let dims: Vec<&str> = size_line.split_whitespace().collect();
    match layout {
        Layout::Coordinate { symmetric } => {
            if dims.len() != 3 {
                return Err(parse_err(
                    size_no,
                    "coordinate size line needs 'rows cols nnz'",
                ));
            }
            let n_rows: usize = dims[0]
                .parse()
                .map_err(|_| parse_err(size_no, "bad row count"))?;
            let n_cols: usize = dims[1]
                .parse()
                .map_err(|_| parse_err(size_no, "bad col count"))?;
            let nnz: usize = dims[2]
                .parse()
                .map_err(|_| parse_err(size_no, "bad entry count"))?;
            let mut triplets = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
            for _ in 0..nnz {
                let (no, line) = lines
                    .next_data()?
                    .ok_or_else(|| parse_err(size_no, "truncated entry list"))?;
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() != 3 {
                    return Err(parse_err(no, "entry line needs 'row col value'"));
                }
                let r: usize = f[0].parse().map_err(|_| parse_err(no, "bad row index"))?;
                let c: usize = f[1].parse().map_err(|_| parse_err(no, "bad col index"))?;
                let v: f64 = f[2].parse().map_err(|_| parse_err(no, "bad value"))?;
                if r == 0 || c == 0 || r > n_rows || c > n_cols {
                    return Err(parse_err(
                        no,
                        format!("index ({r}, {c}) outside 1-based bounds"),
                    ));
                }
                triplets.push((r - 1, c - 1, v));
                if symmetric && r != c {
                    triplets.push((c - 1, r - 1, v));
                }
            }
            SparseCsr::from_triplets(n_rows, n_cols, &triplets)
        }
        Layout::Array => {
            if dims.len() != 2 {
                return Err(parse_err(size_no, "array size line needs 'rows cols'"));
            }
            let n_rows: usize = dims[0]
                .parse()
                .map_err(|_| parse_err(size_no, "bad row count"))?;
            let n_cols: usize = dims[1]
                .parse()
                .map_err(|_| parse_err(size_no, "bad col count"))?;
            let mut triplets = Vec::with_capacity(n_rows * n_cols);
            for c in 0..n_cols {
                for r in 0..n_rows {
                    let (no, line) = lines
                        .next_data()?
                        .ok_or_else(|| parse_err(size_no, "truncated array body"))?;
                    let v: f64 = line
                        .trim()
                        .parse()
                        .map_err(|_| parse_err(no, "bad array value"))?;
                    if v != 0.0 {
                        triplets.push((r, c, v));
                    }
                }
            }
            SparseCsr::from_triplets(n_rows, n_cols, &triplets)
        }
    }
}

pub fn read_matrix_file(path: &Path) -> Result<SparseCsr> {
    read_matrix(std::fs::File::open(path)?)
}

/// Read an array-format file as a dense matrix, keeping explicit zeros.
pub fn read_array<R: Read>(input: R) -> Result<DenseMat> {
    let mut reader = BufReader::new(input);
    let mut banner = String::new();
    if reader.read_line(&mut banner)? == 0 {
        return Err(parse_err(0, "empty file"));
    }
    match parse_banner(banner.trim(), 1)? {
        Layout::Array => {}
        Layout::Coordinate { .. } => {
            return Err(parse_err(1, "expected array layout"));
        }
    }
    let mut lines = Lines {
        inner: reader,
        line_no: 1,
    };
    let (size_no, size_line) = lines
        .next_data()?
        .ok_or_else(|| parse_err(2, "missing size line"))?;
    let dims: Vec<&str> = size_line.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(parse_err(size_no, "array size line needs 'rows cols'"));
    }
    let n_rows: usize = dims[0]
        .parse()
        .map_err(|_| parse_err(size_no, "bad row count"))?;
    let n_cols: usize = dims[1]
        .parse()
        .map_err(|_| parse_err(size_no, "bad col count"))?;
    let mut d = DenseMat::zeros(n_rows, n_cols);
    for c in 0..n_cols {
        for r in 0..n_rows {
            let (no, line) = lines
                .next_data()?
                .ok_or_else(|| parse_err(size_no, "truncated array body"))?;
            let v: f64 = line
                .trim()
                .parse()
                .map_err(|_| parse_err(no, "bad array value"))?;
            d.set(r, c, v);
        }
    }
    Ok(d)
}
