//! Field serialisation.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! b"TGFD"            magic
//! u32                format version (1)
//! u32                dim
//! u32 × dim          sizes
//! f64 × dim          lengths
//! u32                rank code (0 scalar, 1 one-form, 2 (1,0), 3 (0,1), 4 (0,2), 5 two-form)
//! u32                bundle kind (0 trivial, 1 line bundle)
//! i64                bundle degree
//! u32                number of components
//! (f64 re, f64 im)   × components × points, component-major, points row-major
//! ```
//!
//! The CSV form is for dim-2 scalars: a header `x,y,re,im` and one row per
//! grid point in storage order.

use super::{Bundle, FieldGrid, Rank, TorusGrid};
use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;
use std::io::{BufRead, Read, Write};

const MAGIC: &[u8; 4] = b"TGFD";
const VERSION: u32 = 1;

pub fn write_field<W: Write>(mut out: W, grid: &TorusGrid, f: &FieldGrid) -> Result<()> {
    let mut buf = Vec::with_capacity(64 + 16 * grid.len() * f.components.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    for &n in grid.sizes() {
        buf.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for &l in grid.lengths() {
        buf.extend_from_slice(&l.to_le_bytes());
    }
    buf.extend_from_slice(&f.rank.code().to_le_bytes());
    let (kind, deg) = match f.bundle {
        Bundle::Trivial => (0u32, 0i64),
        Bundle::Line(d) => (1, d),
    };
    buf.extend_from_slice(&kind.to_le_bytes());
    buf.extend_from_slice(&deg.to_le_bytes());
    buf.extend_from_slice(&(f.components.len() as u32).to_le_bytes());
    for c in &f.components {
        for z in c {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::Format("truncated field file".into()));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn read_field<R: Read>(mut input: R) -> Result<(TorusGrid, FieldGrid)> {
    let mut data = Vec::new();
    input.read_to_end(&mut data)?;
    let mut c = Cursor {
        data: &data,
        pos: 0,
    };
    if c.take(4)? != MAGIC {
        return Err(Error::Format("bad magic, not a field file".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported field format version {version}"
        )));
    }
    let dim = c.u32()? as usize;
    if dim != 2 && dim != 4 {
        return Err(Error::Format(format!("bad dimension {dim}")));
    }
    let sizes = (0..dim)
        .map(|_| c.u32().map(|n| n as usize))
        .collect::<Result<Vec<_>>>()?;
    let lengths = (0..dim).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
    let grid = TorusGrid::new(&sizes, &lengths).map_err(|e| Error::Format(e.to_string()))?;
    let rank = Rank::from_code(c.u32()?)?;
    let bundle = match (c.u32()?, c.i64()?) {
        (0, _) => Bundle::Trivial,
        (1, d) => Bundle::Line(d),
        (k, _) => return Err(Error::Format(format!("unknown bundle kind {k}"))),
    };
    let ncomp = c.u32()? as usize;
    if ncomp != rank.components(dim) {
        return Err(Error::Format(format!(
            "{ncomp} components for a {rank:?} field"
        )));
    }
    let expected = ncomp * grid.len() * 16;
    if data.len() - c.pos != expected {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {expected}",
            data.len() - c.pos
        )));
    }
    let mut components = Vec::with_capacity(ncomp);
    for _ in 0..ncomp {
        let mut v = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            v.push(Complex64::new(c.f64()?, c.f64()?));
        }
        components.push(v);
    }
    let field = FieldGrid {
        rank,
        bundle,
        components,
    };
    Ok((grid, field))
}

pub fn write_csv<W: Write>(mut out: W, grid: &TorusGrid, f: &FieldGrid) -> Result<()> {
    if grid.dim() != 2 || f.rank != Rank::Scalar {
        return Err(Error::InvalidInput(
            "CSV output is for scalars on T^2".into(),
        ));
    }
    writeln!(out, "x,y,re,im")?;
    for (i, z) in f.values().iter().enumerate() {
        let p = grid.point(i);
        writeln!(out, "{:e},{:e},{:e},{:e}", p[0], p[1], z.re, z.im)?;
    }
    Ok(())
}

/// Reads values written by [`write_csv`]; coordinates are checked against `grid`.
pub fn read_csv<R: BufRead>(input: R, grid: &TorusGrid) -> Result<FieldGrid> {
    let mut values = Vec::with_capacity(grid.len());
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            if line.trim() != "x,y,re,im" {
                return Err(Error::Format(format!("unexpected CSV header '{line}'")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
        if cols.len() != 4 {
            return Err(Error::Format(format!(
                "line {}: expected 4 columns",
                lineno + 1
            )));
        }
        let p = grid.point(values.len().min(grid.len().saturating_sub(1)));
        if (p[0] - cols[0]).abs() > 1e-9 || (p[1] - cols[1]).abs() > 1e-9 {
            return Err(Error::Format(format!(
                "line {}: coordinates do not match grid",
                lineno + 1
            )));
        }
        values.push(Complex64::new(cols[2], cols[3]));
    }
    grid.check_len(values.len())
        .map_err(|e| Error::Format(e.to_string()))?;
    Ok(FieldGrid::scalar(values))
}
