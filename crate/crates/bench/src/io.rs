//! Matrix files.
//!
//! - CSV: one row per observation, comma-separated decimal scalars.
//! - Raw binary: a 16-byte little-endian header (`b"BAKM"`, `u32` rows,
//!   `u32` cols, `u32` precision tag with 0 = f32 and 1 = f64) followed by the
//!   scalars in column-major order.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use bak_core::{DenseMatrix, Precision, Scalar};

use crate::error::{BenchError, Result};

pub const MAGIC: &[u8; 4] = b"BAKM";
const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Binary,
}

impl MatrixFormat {
    /// `.bin`/`.bakm` are binary; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("bakm") => MatrixFormat::Binary,
            _ => MatrixFormat::Csv,
        }
    }
}

impl FromStr for MatrixFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(MatrixFormat::Csv),
            "bin" | "binary" | "raw-binary" => Ok(MatrixFormat::Binary),
            other => Err(format!("unknown matrix format `{other}` (expected csv or binary)")),
        }
    }
}

pub fn load_matrix<T: Scalar>(path: &Path, format: MatrixFormat) -> Result<DenseMatrix<T>> {
    match format {
        MatrixFormat::Csv => {
            let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
            parse_csv(&text)
        }
        MatrixFormat::Binary => {
            let bytes = fs::read(path).map_err(|e| BenchError::io(path, e))?;
            decode_binary(&bytes)
        }
    }
}

/// Loads a single-column matrix (or a single row) as a vector.
pub fn load_vector<T: Scalar>(path: &Path, format: MatrixFormat) -> Result<Vec<T>> {
    let m = load_matrix::<T>(path, format)?;
    if m.cols() != 1 && m.rows() != 1 {
        return Err(BenchError::format(
            0,
            format!("expected a vector, found a {}x{} matrix", m.rows(), m.cols()),
        ));
    }
    Ok(m.into_data())
}

pub fn parse_csv<T: Scalar>(text: &str) -> Result<DenseMatrix<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<T>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let row = match e.kind() {
                csv::ErrorKind::UnequalLengths { pos: Some(pos), .. } => pos.line() as usize,
                _ => e.position().map_or(rows.len() + 1, |p| p.line() as usize),
            };
            BenchError::format(row, e.to_string())
        })?;
        let row_no = record.position().map_or(rows.len() + 1, |p| p.line() as usize);
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<T>()
                    .map_err(|_| BenchError::format(row_no, format!("cannot parse `{field}` as a number")))
            })
            .collect::<Result<Vec<T>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(BenchError::format(1, "no data rows"));
    }
    let (n_rows, n_cols) = (rows.len(), rows[0].len());
    let mut data = Vec::with_capacity(n_rows * n_cols);
    for j in 0..n_cols {
        data.extend(rows.iter().map(|r| r[j]));
    }
    Ok(DenseMatrix::from_col_major(n_rows, n_cols, data)?)
}

pub fn encode_binary<T: Scalar>(m: &DenseMatrix<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + m.data().len() * T::PRECISION.byte_width());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(m.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u32).to_le_bytes());
    out.extend_from_slice(&T::PRECISION.tag().to_le_bytes());
    for &v in m.data() {
        v.write_le(&mut out);
    }
    out
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice"))
}

/// Decodes a binary matrix, converting to `T` if the stored precision differs.
pub fn decode_binary<T: Scalar>(bytes: &[u8]) -> Result<DenseMatrix<T>> {
    if bytes.len() < HEADER_LEN {
        return Err(BenchError::format(0, "file shorter than the 16-byte header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(BenchError::format(0, "bad magic (expected BAKM)"));
    }
    let rows = read_u32(bytes, 4) as usize;
    let cols = read_u32(bytes, 8) as usize;
    let tag = read_u32(bytes, 12);
    let precision = Precision::from_tag(tag).ok_or_else(|| BenchError::format(0, format!("unknown precision tag {tag}")))?;
    let width = precision.byte_width();
    let body = &bytes[HEADER_LEN..];
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(width))
        .ok_or_else(|| BenchError::format(0, "dimensions overflow"))?;
    if body.len() != expected {
        return Err(BenchError::format(
            0,
            format!("{rows}x{cols} {precision} needs {expected} data bytes, found {}", body.len()),
        ));
    }
    let data: Vec<T> = match precision {
        Precision::Single => body.chunks_exact(4).map(|c| T::from_f64_lossy(f32::read_le(c) as f64)).collect(),
        Precision::Double => body.chunks_exact(8).map(|c| T::from_f64_lossy(f64::read_le(c))).collect(),
    };
    Ok(DenseMatrix::from_col_major(rows, cols, data)?)
}

pub fn write_matrix_binary<T: Scalar>(path: &Path, m: &DenseMatrix<T>) -> Result<()> {
    fs::write(path, encode_binary(m)).map_err(|e| BenchError::io(path, e))
}

/// Writes CSV with shortest round-trip formatting, so reading it back is exact.
pub fn write_matrix_csv<T: Scalar>(path: &Path, m: &DenseMatrix<T>) -> Result<()> {
    let to_io = |e: csv::Error| BenchError::io(path, e.into());
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(to_io)?;
    for i in 0..m.rows() {
        writer
            .write_record((0..m.cols()).map(|j| m.get(i, j).to_string()))
            .map_err(to_io)?;
    }
    writer.flush().map_err(|e| BenchError::io(path, e))
}
