//! Binary checkpoint of a converged spinor field.
//!
//! Layout, all little-endian:
//!
//! ```text
//! 8 bytes   magic "SOCSPINR"
//! u32       format version (1)
//! u32       number of axes d
//! d times:  u64 points, f64 extent, f64 origin
//! u64       total points
//! 3 times:  total × (f64 re, f64 im), components in order |+1>, |0>, |-1>
//! ```

use std::io::{Read, Write};

use super::{Grid, SpinorField};
use crate::spin_algebra::C64;

const MAGIC: &[u8; 8] = b"SOCSPINR";
const VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(field: &SpinorField, mut w: W) -> std::io::Result<()> {
    let g = &field.grid;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    for a in 0..g.dim() {
        w.write_all(&(g.points[a] as u64).to_le_bytes())?;
        w.write_all(&g.extents[a].to_le_bytes())?;
        w.write_all(&g.origin(a).to_le_bytes())?;
    }
    w.write_all(&(g.len() as u64).to_le_bytes())?;
    for comp in &field.psi {
        for v in comp {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
    }
    w.flush()
}

fn bad(msg: impl Into<String>) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, msg.into())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> std::io::Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    read_array::<4, _>(r).map(u32::from_le_bytes)
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    read_array::<8, _>(r).map(u64::from_le_bytes)
}

fn read_f64<R: Read>(r: &mut R) -> std::io::Result<f64> {
    read_array::<8, _>(r).map(f64::from_le_bytes)
}

pub fn read_checkpoint<R: Read>(mut r: R) -> std::io::Result<SpinorField> {
    if &read_array::<8, _>(&mut r)? != MAGIC {
        return Err(bad("not a spinor checkpoint"));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(bad(format!("unsupported checkpoint version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    if !(1..=3).contains(&dim) {
        return Err(bad(format!("bad axis count {dim}")));
    }
    let mut points = Vec::with_capacity(dim);
    let mut extents = Vec::with_capacity(dim);
    for _ in 0..dim {
        points.push(read_u64(&mut r)? as usize);
        extents.push(read_f64(&mut r)?);
        let origin = read_f64(&mut r)?;
        if origin != -0.5 * extents[extents.len() - 1] {
            return Err(bad("grid origin is not centered"));
        }
    }
    let grid = Grid::new(points, extents).map_err(bad)?;
    let total = read_u64(&mut r)? as usize;
    if total != grid.len() {
        return Err(bad(format!("point count {total} does not match grid {}", grid.len())));
    }
    let mut read_comp = || -> std::io::Result<Vec<C64>> {
        (0..total)
            .map(|_| Ok(C64::new(read_f64(&mut r)?, read_f64(&mut r)?)))
            .collect()
    };
    let psi = [read_comp()?, read_comp()?, read_comp()?];
    Ok(SpinorField { grid, psi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let grid = Grid::new(vec![4, 2], vec![3.0, 5.0]).unwrap();
        let mut field = SpinorField::zeros(grid);
        field.psi[2][7] = C64::new(0.25, -1.5);
        let mut buf = Vec::new();
        write_checkpoint(&field, &mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 4 + 2 * 24 + 8 + 3 * 8 * 16);
        assert_eq!(&buf[..8], b"SOCSPINR");
        assert_eq!(u32::from_le_bytes(buf[12..16].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(buf[24..32].try_into().unwrap()), 3.0);
        assert_eq!(f64::from_le_bytes(buf[32..40].try_into().unwrap()), -1.5);
        let last = buf.len() - 16;
        assert_eq!(f64::from_le_bytes(buf[last..last + 8].try_into().unwrap()), 0.25);
        assert_eq!(read_checkpoint(&buf[..]).unwrap(), field);
        assert!(read_checkpoint(&buf[..buf.len() - 1]).is_err());
        let mut corrupt = buf.clone();
        corrupt[0] = b'X';
        assert!(read_checkpoint(&corrupt[..]).is_err());
    }
}
