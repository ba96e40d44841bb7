//! Binary model artifact ("INCM"): layouts, frequency scales, precision tag and
//! the flat hypernetwork parameters, all little-endian.
//!
//! ```text
//! magic      "INCM"
//! version    u16
//! precision  u8 (32 | 64)
//! 2 x layout { in u32, out u32, width u32, blocks u32, omega0 f64, omega_hidden f64 }
//!            hypernetwork first, then target
//! time_count u64
//! count      u64
//! params     count x (f32 | f64)
//! ```

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{CompressorModel, ModelError, SirenLayout};
use crate::numcore::{Precision, Real, Tensor};

pub const MODEL_MAGIC: &[u8; 4] = b"INCM";
pub const MODEL_VERSION: u16 = 1;

fn write_layout<W: Write>(w: &mut W, l: &SirenLayout) -> std::io::Result<()> {
    for v in [l.in_dim, l.out_dim, l.width, l.blocks] {
        w.write_u32::<LittleEndian>(v as u32)?;
    }
    w.write_f64::<LittleEndian>(l.omega0)?;
    w.write_f64::<LittleEndian>(l.omega_hidden)
}

fn read_layout<R: Read>(r: &mut R) -> std::io::Result<SirenLayout> {
    let mut dims = [0usize; 4];
    for d in &mut dims {
        *d = r.read_u32::<LittleEndian>()? as usize;
    }
    Ok(SirenLayout {
        in_dim: dims[0],
        out_dim: dims[1],
        width: dims[2],
        blocks: dims[3],
        omega0: r.read_f64::<LittleEndian>()?,
        omega_hidden: r.read_f64::<LittleEndian>()?,
    })
}

pub fn write_model<T: Real, W: Write>(model: &CompressorModel<T>, mut w: W) -> Result<(), ModelError> {
    w.write_all(MODEL_MAGIC)?;
    w.write_u16::<LittleEndian>(MODEL_VERSION)?;
    w.write_u8(T::PRECISION.tag())?;
    write_layout(&mut w, model.hyper_layout())?;
    write_layout(&mut w, model.target_layout())?;
    w.write_u64::<LittleEndian>(model.time_count() as u64)?;
    w.write_u64::<LittleEndian>(model.param_count() as u64)?;
    for &v in model.params().data() {
        match T::PRECISION {
            Precision::F32 => w.write_f32::<LittleEndian>(v.as_f64() as f32)?,
            Precision::F64 => w.write_f64::<LittleEndian>(v.as_f64())?,
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads an artifact, converting stored values to `T`.
pub fn read_model<T: Real, R: Read>(mut r: R) -> Result<CompressorModel<T>, ModelError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MODEL_MAGIC {
        return Err(ModelError::Format(format!("bad magic {magic:?}")));
    }
    let version = r.read_u16::<LittleEndian>()?;
    if version != MODEL_VERSION {
        return Err(ModelError::Format(format!("unsupported model version {version}")));
    }
    let tag = r.read_u8()?;
    let precision = Precision::from_tag(tag).ok_or_else(|| ModelError::Format(format!("unknown precision tag {tag}")))?;
    let hyper = read_layout(&mut r)?;
    let target = read_layout(&mut r)?;
    let time_count = r.read_u64::<LittleEndian>()? as usize;
    let count = r.read_u64::<LittleEndian>()? as usize;
    if count != hyper.param_count() {
        return Err(ModelError::Format(format!(
            "parameter count {count} does not match layout ({})",
            hyper.param_count()
        )));
    }
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        let v = match precision {
            Precision::F32 => r.read_f32::<LittleEndian>()? as f64,
            Precision::F64 => r.read_f64::<LittleEndian>()?,
        };
        data.push(T::from_f64(v));
    }
    CompressorModel::from_parts(hyper, target, Tensor::vector(data), time_count)
}

/// Precision stored in an artifact header, without reading the parameters.
pub fn artifact_precision(header: &[u8]) -> Result<Precision, ModelError> {
    if header.len() < 7 || &header[..4] != MODEL_MAGIC {
        return Err(ModelError::Format("not a model artifact".into()));
    }
    Precision::from_tag(header[6]).ok_or_else(|| ModelError::Format(format!("unknown precision tag {}", header[6])))
}

/// Serialized size in bytes.
pub fn artifact_size<T: Real>(model: &CompressorModel<T>) -> usize {
    let value = match T::PRECISION {
        Precision::F32 => 4,
        Precision::F64 => 8,
    };
    4 + 2 + 1 + 2 * (4 * 4 + 16) + 8 + 8 + value * model.param_count()
}
