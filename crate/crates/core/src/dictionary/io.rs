//! CSMX binary container and CSV interchange.
//!
//! CSMX layout: `b"CSMX"`, version `u32` LE, rows `u64` LE, cols `u64` LE,
//! then `rows · cols` `f64` LE values in row-major order.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MAGIC: &[u8; 4] = b"CSMX";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 24;

pub fn encode_csmx(m: &Matrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * m.as_slice().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for v in m.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn u64_at(bytes: &[u8], offset: usize) -> u64 {
    u64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap())
}

pub fn decode_csmx(bytes: &[u8]) -> Result<Matrix> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::format(0, "bad magic, expected \"CSMX\""));
    }
    if bytes.len() < 8 {
        return Err(Error::format(bytes.len() as u64, "truncated version field"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(bytes.len() as u64, "truncated shape header"));
    }
    let rows = u64_at(bytes, 8);
    let cols = u64_at(bytes, 16);
    let payload = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .filter(|&n| n <= (usize::MAX - HEADER_LEN) as u64)
        .ok_or_else(|| Error::format(8, format!("dimensions {rows}x{cols} overflow")))? as usize;
    let expected = HEADER_LEN + payload;
    if bytes.len() < expected {
        return Err(Error::format(
            bytes.len() as u64,
            format!("truncated payload, expected {expected} bytes"),
        ));
    }
    if bytes.len() > expected {
        return Err(Error::format(expected as u64, "trailing bytes after payload"));
    }
    let data: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::format((HEADER_LEN + 8 * pos) as u64, "non-finite value"));
    }
    Matrix::from_vec(rows as usize, cols as usize, data)
}

/// Writes `bytes` to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_matrix(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    write_atomic(path.as_ref(), &encode_csmx(m))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    decode_csmx(&fs::read(path)?)
}

pub fn format_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut offset = 0u64;
    for line in text.split_inclusive('\n') {
        let content = line.trim_end_matches(['\n', '\r']);
        if !content.trim().is_empty() {
            let mut row = Vec::new();
            let mut field_offset = offset;
            for field in content.split(',') {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::format(field_offset, format!("invalid number {:?}", field.trim())))?;
                row.push(v);
                field_offset += field.len() as u64 + 1;
            }
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::format(
                        offset,
                        format!("row has {} fields, expected {}", row.len(), first.len()),
                    ));
                }
            }
            rows.push(row);
        }
        offset += line.len() as u64;
    }
    let cols = rows.first().map_or(0, Vec::len);
    let n = rows.len();
    Matrix::from_vec(n, cols, rows.into_iter().flatten().collect())
}

pub fn write_csv(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    write_atomic(path.as_ref(), format_csv(m).as_bytes())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Matrix> {
    parse_csv(&fs::read_to_string(path)?)
}

/// Reads CSMX when the file starts with the magic bytes, CSV otherwise.
pub fn load_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        decode_csmx(&bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|e| Error::format(e.utf8_error().valid_up_to() as u64, "not UTF-8 text"))?;
        parse_csv(&text)
    }
}

/// Writes CSV for a `.csv` extension, CSMX otherwise.
pub fn save_matrix(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        write_csv(path, m)
    } else {
        write_matrix(path, m)
    }
}
