//! Binary matrix files.
//!
//! Layout: the magic bytes `CMPX`, a version byte (1), the dimension `d` as a
//! little-endian `u32`, then `2 d^2` little-endian `f64` values holding the
//! entries in row-major order with real and imaginary parts interleaved.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use rmtlab_core::{ComplexMatrix, C64};

use crate::error::{LabError, LabResult};

pub const MAGIC: &[u8; 4] = b"CMPX";
pub const VERSION: u8 = 1;
/// Largest dimension accepted when reading, to reject absurd headers early.
pub const MAX_DIM: u32 = 1 << 14;

pub fn write_matrix<W: Write>(w: &mut W, m: &ComplexMatrix) -> io::Result<()> {
    let d = u32::try_from(m.dim())
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "dimension exceeds u32"))?;
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION])?;
    w.write_all(&d.to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * m.as_slice().len());
    for z in m.as_slice() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)
}

fn read_exact_or<R: Read>(r: &mut R, buf: &mut [u8], part: &str) -> LabResult<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => {
            LabError::format("matrix file", format!("truncated {part}"))
        }
        _ => LabError::Io(e),
    })
}

pub fn read_matrix<R: Read>(r: &mut R) -> LabResult<ComplexMatrix> {
    let mut head = [0u8; 9];
    read_exact_or(r, &mut head, "header")?;
    if &head[..4] != MAGIC {
        return Err(LabError::format(
            "matrix file",
            "bad magic bytes, expected CMPX",
        ));
    }
    if head[4] != VERSION {
        return Err(LabError::format(
            "matrix file",
            format!("unsupported version {}", head[4]),
        ));
    }
    let d = u32::from_le_bytes([head[5], head[6], head[7], head[8]]);
    if d == 0 || d > MAX_DIM {
        return Err(LabError::format(
            "matrix file",
            format!("dimension {d} out of range 1..={MAX_DIM}"),
        ));
    }
    let d = d as usize;
    let mut body = vec![0u8; 16 * d * d];
    read_exact_or(
        r,
        &mut body,
        &format!("body (expected {} entries for d = {d})", d * d),
    )?;
    let data = body
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            C64::new(re, im)
        })
        .collect();
    Ok(ComplexMatrix::from_row_major(d, data)?)
}

pub fn save_matrix(path: &Path, m: &ComplexMatrix) -> LabResult<()> {
    let mut f = io::BufWriter::new(fs::File::create(path)?);
    write_matrix(&mut f, m)?;
    f.flush()?;
    Ok(())
}

/// Reads a single matrix and rejects trailing bytes.
pub fn load_matrix(path: &Path) -> LabResult<ComplexMatrix> {
    let bytes = fs::read(path)?;
    let mut cur = io::Cursor::new(bytes.as_slice());
    let m = read_matrix(&mut cur)?;
    if (cur.position() as usize) != bytes.len() {
        return Err(LabError::format(
            "matrix file",
            "trailing bytes after matrix body",
        ));
    }
    Ok(m)
}
