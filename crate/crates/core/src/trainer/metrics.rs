//! Error metrics over `n x c` snapshots, computed in `f64`.

use serde::{Serialize, Serializer};

use super::TrainError;
use crate::numcore::{Real, Tensor};

fn check_pair<T: Real>(u: &Tensor<T>, r: &Tensor<T>) -> Result<(), TrainError> {
    if u.shape() != r.shape() || u.shape().len() != 2 {
        return Err(TrainError::Shape(format!("data {:?} vs reconstruction {:?}", u.shape(), r.shape())));
    }
    Ok(())
}

/// Per-channel `(sum (u - r)^2, sum u^2, max r)`.
fn channel_sums<T: Real>(u: &Tensor<T>, r: &Tensor<T>) -> Vec<(f64, f64, f64)> {
    let c = u.cols();
    let mut acc = vec![(0.0, 0.0, f64::NEG_INFINITY); c];
    for (urow, rrow) in u.data().chunks(c).zip(r.data().chunks(c)) {
        for ((a, &uv), &rv) in acc.iter_mut().zip(urow).zip(rrow) {
            let (uv, rv) = (uv.as_f64(), rv.as_f64());
            a.0 += (uv - rv) * (uv - rv);
            a.1 += uv * uv;
            a.2 = a.2.max(rv);
        }
    }
    acc
}

/// Channel-mean relative l2 error of one snapshot.
pub fn loss_frame<T: Real>(u: &Tensor<T>, recon: &Tensor<T>) -> Result<f64, TrainError> {
    check_pair(u, recon)?;
    let sums = channel_sums(u, recon);
    let mut total = 0.0;
    for (channel, (err, norm, _)) in sums.iter().enumerate() {
        if *norm == 0.0 {
            return Err(TrainError::ZeroNorm { channel });
        }
        total += (err / norm).sqrt();
    }
    Ok(total / sums.len() as f64)
}

/// Channel-mean relative Frobenius error over a whole snapshot sequence.
pub fn rfe<T: Real>(data: &[Tensor<T>], recon: &[Tensor<T>]) -> Result<f64, TrainError> {
    if data.len() != recon.len() || data.is_empty() {
        return Err(TrainError::Shape(format!(
            "{} data snapshots vs {} reconstructed",
            data.len(),
            recon.len()
        )));
    }
    let c = data[0].cols();
    let mut err = vec![0.0; c];
    let mut norm = vec![0.0; c];
    for (u, r) in data.iter().zip(recon) {
        check_pair(u, r)?;
        if u.cols() != c {
            return Err(TrainError::Shape("channel count changes across snapshots".into()));
        }
        for (i, (e, n, _)) in channel_sums(u, r).into_iter().enumerate() {
            err[i] += e;
            norm[i] += n;
        }
    }
    let mut total = 0.0;
    for (channel, (e, n)) in err.iter().zip(&norm).enumerate() {
        if *n == 0.0 {
            return Err(TrainError::ZeroNorm { channel });
        }
        total += (e / n).sqrt();
    }
    Ok(total / c as f64)
}

/// `mean_c 20 log10(max_i recon[i, c] / ||u[:, c] - recon[:, c]||)`.
///
/// The peak is taken over the reconstruction and the error is not
/// normalized by `n`. Returns `+inf` when the error vanishes.
pub fn psnr<T: Real>(u: &Tensor<T>, recon: &Tensor<T>) -> Result<f64, TrainError> {
    check_pair(u, recon)?;
    let sums = channel_sums(u, recon);
    let mut total = 0.0;
    for (channel, (err, _, peak)) in sums.iter().enumerate() {
        if *peak <= 0.0 {
            return Err(TrainError::PsnrUndefined { channel });
        }
        total += 20.0 * (peak / err.sqrt()).log10();
    }
    Ok(total / sums.len() as f64)
}

/// Writes non-finite values as the strings `"inf"`, `"-inf"` or `"nan"`.
pub fn serialize_db<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&format_db(*v))
    }
}

pub fn serialize_db_list<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&Db(*x))?;
    }
    seq.end()
}

struct Db(f64);

impl Serialize for Db {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_db(&self.0, s)
    }
}

pub fn format_db(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}
