//! Shared primitives for the binary artifact formats (dataset, checkpoint):
//! magic + u32-length-prefixed JSON header + little-endian f32 payloads.

use ndarray::{Array2, ShapeBuilder};
use std::io::Write;

use crate::error::{Error, Result};

pub(crate) fn write_f32_iter<W: Write, I: IntoIterator<Item = f32>>(
    w: &mut W,
    values: I,
) -> std::io::Result<()> {
    for x in values {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

/// Sequential payload reader that names the field a truncated file breaks in.
pub(crate) struct Cursor<'a> {
    pub buf: &'a [u8],
    pub pos: usize,
    pub path: &'a str,
}

impl<'a> Cursor<'a> {
    pub fn new(buf: &'a [u8], path: &'a str) -> Self {
        Cursor { buf, pos: 0, path }
    }

    pub fn take(&mut self, n: usize, field: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::format(
                self.path,
                field,
                format!(
                    "needs {n} bytes at offset {} but file has {}",
                    self.pos,
                    self.buf.len()
                ),
            ));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn expect_magic(&mut self, magic: &[u8; 8]) -> Result<()> {
        let found = self.take(8, "magic")?;
        if found != magic {
            return Err(Error::format(
                self.path,
                "magic",
                format!("expected {magic:?}, found {found:?}"),
            ));
        }
        Ok(())
    }

    pub fn read_u32(&mut self, field: &str) -> Result<u32> {
        let b = self.take(4, field)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    pub fn read_f32_vec(&mut self, n: usize, field: &str) -> Result<Vec<f32>> {
        let bytes = self.take(n * 4, field)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect())
    }

    /// Reads a row-major matrix payload, repacked column-major so columns
    /// stay contiguous in memory.
    pub fn read_matrix_f32(&mut self, dims: [usize; 2], field: &str) -> Result<Array2<f32>> {
        let data = self.read_f32_vec(dims[0] * dims[1], field)?;
        let row_major = Array2::from_shape_vec((dims[0], dims[1]), data)
            .map_err(|e| Error::format(self.path, field, e.to_string()))?;
        let mut out = Array2::<f32>::zeros((dims[0], dims[1]).f());
        out.assign(&row_major);
        Ok(out)
    }

    pub fn expect_end(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::format(
                self.path,
                "trailing data",
                format!(
                    "{} unexpected bytes after payload",
                    self.buf.len() - self.pos
                ),
            ));
        }
        Ok(())
    }
}
