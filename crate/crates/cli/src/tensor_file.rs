//! Minimal binary tensor container used by all command-line artifacts.
//!
//! Layout, all integers little-endian:
//! magic `"OATF"` (4 bytes) · version `u32` = 1 · dtype `u32`
//! (0 = real64, 1 = complex128 with interleaved re, im) · ndim `u32` ·
//! ndim × `u64` dimensions · payload of row-major IEEE-754 scalars.
//! Round trips are bitwise lossless; readers reject unknown magic, version
//! or dtype and name the byte offset of the offending field.

use crate::error::{CliError, Result};
use onair_core::linalg::CMatrix;
use onair_core::tensor::ComplexTensor;
use onair_core::Cx;
use std::io::Write;
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"OATF";
pub const VERSION: u32 = 1;
pub const DTYPE_REAL64: u32 = 0;
pub const DTYPE_COMPLEX128: u32 = 1;

const MAX_NDIM: usize = 4;

/// Payload of a tensor file.
#[derive(Debug, Clone, PartialEq)]
pub enum TensorData {
    Real64(Vec<f64>),
    Complex128(Vec<Cx<f64>>),
}

/// A parsed tensor file: dimensions plus row-major payload.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorFile {
    pub dims: Vec<usize>,
    pub data: TensorData,
}

fn check_dims(path: &Path, dims: &[usize], len: usize) -> Result<()> {
    if dims.is_empty() || dims.len() > MAX_NDIM {
        return Err(CliError::io(
            path,
            format!("tensor rank must lie in 1..={MAX_NDIM}, got {}", dims.len()),
        ));
    }
    let count: usize = dims.iter().product();
    if dims.contains(&0) || count != len {
        return Err(CliError::io(
            path,
            format!("dimensions {dims:?} do not describe {len} elements"),
        ));
    }
    Ok(())
}

fn write_header(out: &mut Vec<u8>, dtype: u32, dims: &[usize]) {
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&dtype.to_le_bytes());
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
}

/// Writes a real-valued tensor (dtype 0).
pub fn write_real(path: &Path, dims: &[usize], data: &[f64]) -> Result<()> {
    check_dims(path, dims, data.len())?;
    let mut bytes = Vec::with_capacity(16 + 8 * dims.len() + 8 * data.len());
    write_header(&mut bytes, DTYPE_REAL64, dims);
    for v in data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    write_atomic(path, &bytes)
}

/// Writes a complex-valued tensor (dtype 1, interleaved re/im).
pub fn write_complex(path: &Path, dims: &[usize], data: &[Cx<f64>]) -> Result<()> {
    check_dims(path, dims, data.len())?;
    let mut bytes = Vec::with_capacity(16 + 8 * dims.len() + 16 * data.len());
    write_header(&mut bytes, DTYPE_COMPLEX128, dims);
    for z in data {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    write_atomic(path, &bytes)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    Ok(())
}

/// Cursor over the raw file bytes that reports truncation with the exact
/// byte offsets involved.
struct Reader<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.offset + n > self.bytes.len() {
            return Err(CliError::io(
                self.path,
                format!(
                    "truncated file: {what} at byte {} needs {n} bytes, \
                     only {} remain of {}",
                    self.offset,
                    self.bytes.len() - self.offset,
                    self.bytes.len()
                ),
            ));
        }
        let s = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        let b = self.take(8, what)?;
        Ok(u64::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        let b = self.take(8, what)?;
        Ok(f64::from_le_bytes(b.try_into().unwrap()))
    }
}

/// Reads and validates a tensor file.
pub fn read(path: &Path) -> Result<TensorFile> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let mut r = Reader { path, bytes: &bytes, offset: 0 };

    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(CliError::io(path, format!("bad magic {magic:?} at byte 0, expected \"OATF\"")));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(CliError::io(
            path,
            format!("unsupported version {version} at byte 4, expected {VERSION}"),
        ));
    }
    let dtype = r.u32("dtype")?;
    if dtype != DTYPE_REAL64 && dtype != DTYPE_COMPLEX128 {
        return Err(CliError::io(path, format!("unknown dtype code {dtype} at byte 8")));
    }
    let ndim = r.u32("rank")? as usize;
    if ndim == 0 || ndim > MAX_NDIM {
        return Err(CliError::io(
            path,
            format!("tensor rank must lie in 1..={MAX_NDIM}, got {ndim} at byte 12"),
        ));
    }
    let mut dims = Vec::with_capacity(ndim);
    let mut count = 1usize;
    for i in 0..ndim {
        let d = r.u64(&format!("dimension {i}"))? as usize;
        if d == 0 {
            return Err(CliError::io(path, format!("dimension {i} is zero")));
        }
        count = count.checked_mul(d).ok_or_else(|| {
            CliError::io(path, format!("dimensions overflow at dimension {i}"))
        })?;
        dims.push(d);
    }

    let scalar = if dtype == DTYPE_REAL64 { 8 } else { 16 };
    let expected = r.offset + count * scalar;
    if bytes.len() != expected {
        return Err(CliError::io(
            path,
            format!(
                "payload length mismatch: {count} elements need {expected} bytes \
                 total, file has {}",
                bytes.len()
            ),
        ));
    }

    let data = if dtype == DTYPE_REAL64 {
        let mut v = Vec::with_capacity(count);
        for _ in 0..count {
            v.push(r.f64("payload")?);
        }
        TensorData::Real64(v)
    } else {
        let mut v = Vec::with_capacity(count);
        for _ in 0..count {
            let re = r.f64("payload")?;
            let im = r.f64("payload")?;
            v.push(Cx::new(re, im));
        }
        TensorData::Complex128(v)
    };
    Ok(TensorFile { dims, data })
}

/// Reads a `[frames, height, width]` stack; real-valued files are promoted
/// to complex with zero imaginary part.
pub fn read_frames(path: &Path) -> Result<ComplexTensor<f64>> {
    let file = read(path)?;
    if file.dims.len() != 3 {
        return Err(CliError::io(
            path,
            format!("expected a 3-d frame stack, got rank {}", file.dims.len()),
        ));
    }
    let mut t = ComplexTensor::zeros(file.dims.clone());
    match file.data {
        TensorData::Complex128(v) => t.data_mut().copy_from_slice(&v),
        TensorData::Real64(v) => {
            for (o, x) in t.data_mut().iter_mut().zip(&v) {
                *o = Cx::new(*x, 0.0);
            }
        }
    }
    Ok(t)
}

/// Writes a frame stack as a complex tensor.
pub fn write_frames(path: &Path, frames: &ComplexTensor<f64>) -> Result<()> {
    write_complex(path, frames.dims(), frames.data())
}

/// Writes a dictionary as a 2-d `[atom_len, num_atoms]` complex tensor.
pub fn write_matrix(path: &Path, a: &CMatrix<f64>) -> Result<()> {
    let mut row_major = Vec::with_capacity(a.nrows() * a.ncols());
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            row_major.push(a[(r, c)]);
        }
    }
    write_complex(path, &[a.nrows(), a.ncols()], &row_major)
}

/// Writes a real-valued frame stack with the compact real dtype. Fails if
/// any entry has a nonzero imaginary part.
pub fn write_frames_real(path: &Path, frames: &ComplexTensor<f64>) -> Result<()> {
    let mut re = Vec::with_capacity(frames.data().len());
    for z in frames.data() {
        if z.im != 0.0 {
            return Err(CliError::Config(
                "tensor has nonzero imaginary parts and cannot be written as real64".into(),
            ));
        }
        re.push(z.re);
    }
    write_real(path, frames.dims(), &re)
}
