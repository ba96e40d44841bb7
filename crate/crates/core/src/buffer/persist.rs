//! The "INCB" buffer snapshot, for resuming after a restart.
//!
//! ```text
//! magic "INCB", version u16, kind u8,
//! n u64, k u64, c u64, T_f u64, T_s u64,
//! full count u64, sketch count u64,
//! full records   { t u64, n*c f32 }
//! sketch records { t u64, seed u64, k*c f32 }
//! ```
//! Little-endian throughout.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{BufferError, BufferShape, FullRecord, ReplayBuffer, SketchRecord};
use crate::numcore::{Real, Tensor};
use crate::sketch::SketchKind;

pub const BUFFER_MAGIC: &[u8; 4] = b"INCB";
pub const BUFFER_VERSION: u16 = 1;

fn write_values<T: Real, W: Write>(w: &mut W, values: &[T]) -> std::io::Result<()> {
    for &v in values {
        w.write_f32::<LittleEndian>(v.as_f64() as f32)?;
    }
    Ok(())
}

fn read_values<T: Real, R: Read>(r: &mut R, rows: usize, cols: usize) -> Result<Tensor<T>, BufferError> {
    let mut raw = vec![0f32; rows * cols];
    r.read_f32_into::<LittleEndian>(&mut raw)?;
    Ok(Tensor::matrix(rows, cols, raw.into_iter().map(|v| T::from_f64(v as f64)).collect())?)
}

pub fn write_buffer<T: Real, W: Write>(buffer: &ReplayBuffer<T>, mut w: W) -> Result<(), BufferError> {
    let s = buffer.shape();
    w.write_all(BUFFER_MAGIC)?;
    w.write_u16::<LittleEndian>(BUFFER_VERSION)?;
    w.write_u8(s.kind.tag())?;
    for v in [s.n, s.k, s.c, s.full_capacity, s.sketch_capacity, buffer.full_len(), buffer.sketch_len()] {
        w.write_u64::<LittleEndian>(v as u64)?;
    }
    for r in buffer.full_records() {
        w.write_u64::<LittleEndian>(r.t as u64)?;
        write_values(&mut w, r.u.data())?;
    }
    for r in buffer.sketch_records() {
        w.write_u64::<LittleEndian>(r.t as u64)?;
        w.write_u64::<LittleEndian>(r.seed)?;
        write_values(&mut w, r.su.data())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_buffer<T: Real, R: Read>(mut r: R) -> Result<ReplayBuffer<T>, BufferError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != BUFFER_MAGIC {
        return Err(BufferError::Format(format!("bad magic {magic:?}")));
    }
    let version = r.read_u16::<LittleEndian>()?;
    if version != BUFFER_VERSION {
        return Err(BufferError::Format(format!("unsupported version {version}")));
    }
    let tag = r.read_u8()?;
    let kind = SketchKind::from_tag(tag).ok_or_else(|| BufferError::Format(format!("unknown sketch kind {tag}")))?;
    let mut h = [0usize; 7];
    for v in &mut h {
        *v = r.read_u64::<LittleEndian>()? as usize;
    }
    let [n, k, c, full_capacity, sketch_capacity, full_len, sketch_len] = h;
    let shape = BufferShape {
        n,
        c,
        k,
        kind,
        full_capacity,
        sketch_capacity,
    };
    if full_len > full_capacity || sketch_len > sketch_capacity {
        return Err(BufferError::Format("more records than capacity".into()));
    }
    let mut full = Vec::with_capacity(full_len);
    for _ in 0..full_len {
        let t = r.read_u64::<LittleEndian>()? as usize;
        full.push(FullRecord {
            t,
            u: read_values(&mut r, n, c)?,
        });
    }
    let mut sketches = Vec::with_capacity(sketch_len);
    for _ in 0..sketch_len {
        let t = r.read_u64::<LittleEndian>()? as usize;
        let seed = r.read_u64::<LittleEndian>()?;
        sketches.push(SketchRecord {
            t,
            seed,
            k,
            su: read_values(&mut r, k, c)?,
        });
    }
    ReplayBuffer::from_parts(shape, full, sketches)
}
