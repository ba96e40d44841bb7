//! The "INCD" dataset file.
//!
//! ```text
//! offset  field
//! 0       magic "INCD"
//! 4       version u16
//! 6       d u16
//! 8       c u16
//! 10      n u64
//! 18      T u64
//! 26      X, n x d row-major f32
//!         T snapshots, each n x c row-major f32
//! ```
//! Everything is little-endian.

use std::io::{Read, Write};

use byteorder::{ByteOrder, LittleEndian, WriteBytesExt};

use super::{DataError, DatasetMeta, MeshDataset};
use crate::numcore::{Real, Tensor};

pub const DATASET_MAGIC: &[u8; 4] = b"INCD";
pub const DATASET_VERSION: u16 = 1;
pub const HEADER_BYTES: usize = 26;

/// Exact file size for the given dimensions.
pub fn file_size(n: usize, d: usize, c: usize, t: usize) -> usize {
    HEADER_BYTES + 4 * (n * d + t * n * c)
}

pub fn write_dataset<T: Real, W: Write>(dataset: &MeshDataset<T>, mut w: W) -> Result<(), DataError> {
    let d = dataset.spatial_dim();
    let c = dataset.channels();
    let narrow = |v: usize, what: &str| {
        u16::try_from(v).map_err(|_| DataError::Shape(format!("{what}={v} does not fit the header")))
    };
    w.write_all(DATASET_MAGIC)?;
    w.write_u16::<LittleEndian>(DATASET_VERSION)?;
    w.write_u16::<LittleEndian>(narrow(d, "d")?)?;
    w.write_u16::<LittleEndian>(narrow(c, "c")?)?;
    w.write_u64::<LittleEndian>(dataset.nodes() as u64)?;
    w.write_u64::<LittleEndian>(dataset.time_count() as u64)?;
    let mut buf = Vec::with_capacity(4 * dataset.nodes() * d.max(c));
    let mut put = |w: &mut W, values: &[T]| -> std::io::Result<()> {
        buf.clear();
        for &v in values {
            buf.write_f32::<LittleEndian>(v.as_f64() as f32)?;
        }
        w.write_all(&buf)
    };
    put(&mut w, dataset.coords().data())?;
    for u in dataset.snapshots() {
        put(&mut w, u.data())?;
    }
    w.flush()?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8], DataError> {
        if self.bytes.len() < self.pos + len {
            return Err(DataError::Truncated {
                offset: self.bytes.len(),
                needed: self.pos + len,
                what: what.to_string(),
            });
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn floats<T: Real>(&mut self, count: usize, what: &str) -> Result<Vec<T>, DataError> {
        let raw = self.take(4 * count, what)?;
        Ok(raw.chunks_exact(4).map(|b| T::from_f64(LittleEndian::read_f32(b) as f64)).collect())
    }
}

pub fn read_dataset<T: Real, R: Read>(mut r: R) -> Result<MeshDataset<T>, DataError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    parse_dataset(&bytes)
}

pub fn parse_dataset<T: Real>(bytes: &[u8]) -> Result<MeshDataset<T>, DataError> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(4, "magic")?;
    if magic != DATASET_MAGIC {
        return Err(DataError::BadMagic(magic.try_into().expect("4 bytes")));
    }
    let version = LittleEndian::read_u16(cur.take(2, "version")?);
    if version != DATASET_VERSION {
        return Err(DataError::Version(version));
    }
    let d = LittleEndian::read_u16(cur.take(2, "d")?) as usize;
    let c = LittleEndian::read_u16(cur.take(2, "c")?) as usize;
    let n = LittleEndian::read_u64(cur.take(8, "n")?) as usize;
    let t = LittleEndian::read_u64(cur.take(8, "T")?) as usize;
    let coords = Tensor::matrix(n, d, cur.floats(n * d, "coordinates")?)?;
    let mut snapshots = Vec::with_capacity(t);
    for i in 0..t {
        snapshots.push(Tensor::matrix(n, c, cur.floats(n * c, &format!("snapshot {i}"))?)?);
    }
    if cur.pos != bytes.len() {
        return Err(DataError::TrailingBytes(bytes.len() - cur.pos));
    }
    MeshDataset::new(coords, snapshots, c, DatasetMeta::default())
}
