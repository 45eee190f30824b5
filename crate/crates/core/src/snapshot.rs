//! Binary snapshot files.
//!
//! Layout, all little-endian: magic `CLFD`, version (u32), k (u32),
//! has_time (u8), n (u32), per-axis extents (u64), per-axis spacings (f64),
//! per-axis periodic flags (u8), `n` names as u32 length + UTF-8 bytes,
//! then the f64 payload in `[component][t][x1]..[xk]` order.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"CLFD";
pub const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(mut w: W, field: &Field) -> Result<()> {
    let g = field.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.spatial_dims() as u32).to_le_bytes())?;
    w.write_all(&[u8::from(g.has_time())])?;
    w.write_all(&(field.n_components() as u32).to_le_bytes())?;
    for &e in g.extents() {
        w.write_all(&(e as u64).to_le_bytes())?;
    }
    for &h in g.spacings() {
        w.write_all(&h.to_le_bytes())?;
    }
    for &p in g.periodic() {
        w.write_all(&[u8::from(p)])?;
    }
    for name in field.names() {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
    }
    for v in field.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inner
            .read_exact(&mut b)
            .map_err(|_| Error::Snapshot(format!("truncated while reading {what}")))?;
        Ok(b)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.bytes::<1>(what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(what)?))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes(what)?))
    }

    fn flag(&mut self, what: &str) -> Result<bool> {
        match self.u8(what)? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(Error::Snapshot(format!("{what} flag is {b}, expected 0 or 1"))),
        }
    }
}

pub fn read_snapshot<R: Read>(r: R) -> Result<Field> {
    let mut r = Reader { inner: r };
    if &r.bytes::<4>("magic")? != MAGIC {
        return Err(Error::Snapshot("bad magic, not a CLFD snapshot".into()));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let k = r.u32("k")? as usize;
    if !(1..=3).contains(&k) {
        return Err(Error::Snapshot(format!("spatial dimension {k} not in 1..=3")));
    }
    let has_time = r.flag("has_time")?;
    let n = r.u32("component count")? as usize;
    if n == 0 || n > 4096 {
        return Err(Error::Snapshot(format!("implausible component count {n}")));
    }
    let naxes = k + usize::from(has_time);
    let extents = (0..naxes)
        .map(|_| r.u64("extent").map(|e| e as usize))
        .collect::<Result<Vec<_>>>()?;
    let spacings = (0..naxes).map(|_| r.f64("spacing")).collect::<Result<Vec<_>>>()?;
    let periodic = (0..naxes).map(|_| r.flag("periodic")).collect::<Result<Vec<_>>>()?;
    let grid = Grid::new(k, extents, spacings, periodic, has_time)
        .map_err(|e| Error::Snapshot(e.to_string()))?;
    let mut names = Vec::with_capacity(n);
    for _ in 0..n {
        let len = r.u32("name length")? as usize;
        if len > 1 << 16 {
            return Err(Error::Snapshot(format!("name length {len} too large")));
        }
        let mut b = vec![0u8; len];
        r.inner
            .read_exact(&mut b)
            .map_err(|_| Error::Snapshot("truncated component name".into()))?;
        names.push(String::from_utf8(b).map_err(|_| Error::Snapshot("component name is not UTF-8".into()))?);
    }
    let total = grid
        .len()
        .checked_mul(n)
        .ok_or_else(|| Error::Snapshot("payload size overflows".into()))?;
    let mut raw = Vec::new();
    r.inner.read_to_end(&mut raw)?;
    if raw.len() != total * 8 {
        return Err(Error::Snapshot(format!(
            "payload has {} bytes, expected {}",
            raw.len(),
            total * 8
        )));
    }
    let data = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Field::new(grid, names, data).map_err(|e| Error::Snapshot(e.to_string()))
}

pub fn save(path: impl AsRef<Path>, field: &Field) -> Result<()> {
    write_snapshot(BufWriter::new(File::create(path)?), field)
}

pub fn load(path: impl AsRef<Path>) -> Result<Field> {
    read_snapshot(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Field {
        let g = Grid::new(2, vec![3, 4, 5], vec![0.5, 0.25, 0.2], vec![false, true, false], true).unwrap();
        Field::from_fn(g, vec!["a".into(), "bé".into()], |x, u| {
            u[0] = x[0] + 10.0 * x[1] - x[2];
            u[1] = (x[1] * 3.0).sin() / 3.0;
        })
        .unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let f = sample();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f).unwrap();
        let back = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(back, f);
        let mut again = Vec::new();
        write_snapshot(&mut again, &back).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn header_layout() {
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &sample()).unwrap();
        assert_eq!(&buf[..4], b"CLFD");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 2);
        assert_eq!(buf[12], 1);
        assert_eq!(u32::from_le_bytes(buf[13..17].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(buf[17..25].try_into().unwrap()), 3);
        let header = 17 + 3 * 8 + 3 * 8 + 3 + (4 + 1) + (4 + 3);
        assert_eq!(buf.len(), header + 2 * 60 * 8);
        // first payload value: component 0 at the first cell centre
        let v = f64::from_le_bytes(buf[header..header + 8].try_into().unwrap());
        assert_eq!(v, 0.25 + 10.0 * 0.125 - 0.1);
    }

    #[test]
    fn malformed_inputs() {
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &sample()).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_snapshot(bad.as_slice()), Err(Error::Snapshot(_))));
        let mut bad = buf.clone();
        bad[4] = 9;
        assert!(matches!(read_snapshot(bad.as_slice()), Err(Error::Snapshot(_))));
        assert!(matches!(read_snapshot(&buf[..buf.len() - 3]), Err(Error::Snapshot(_))));
        assert!(matches!(read_snapshot(&buf[..10]), Err(Error::Snapshot(_))));
        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(read_snapshot(long.as_slice()), Err(Error::Snapshot(_))));
    }
}
